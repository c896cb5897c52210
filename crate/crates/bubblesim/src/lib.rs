//! Agent-based simulation of a single-asset market cleared by a double
//! auction.
//!
//! Ten-odd traders submit unit-size bids and asks anchored to the previous
//! round's average exchange price. What each trader does — buy, sell, or sit
//! out — follows from a risk estimate, either a fixed function of time
//! (exogenous) or a sigmoid of price-versus-fundamental deviation and recent
//! trend (endogenous). Depending on where the estimate falls relative to the
//! trader's own tolerance and the tolerance it attributes to a *greater
//! fool*, the trader is exuberant, comfortable, or panicky, which sets its
//! buy/sell propensities and pricing band. Heterogeneous tolerances plus
//! asymmetric panic pricing produce speculative bubbles and crashes;
//! homogeneous populations track the fundamental.
//!
//! Everything is deterministic given a [`sim::ScenarioConfig`] and its seed.
//!
//! ```
//! use bubblesim::presets;
//! use bubblesim::sim::run_simulation;
//!
//! let mut config = presets::expand("fig2-efficiency").unwrap();
//! config.seed = 7;
//! config.rounds = 200;
//! let result = run_simulation(&config).unwrap();
//! assert_eq!(result.prices.len(), 201);
//! ```

pub mod agents;
pub mod cli;
pub mod config;
pub mod engine;
pub mod metrics;
pub mod output;
pub mod presets;
pub mod sim;
