//! Trader parameters, risk estimation, regimes, and the per-round decision.
//!
//! Two risk models drive behaviour:
//!
//! * **Exogenous**: risk is a fixed function of elapsed time over a finite
//!   horizon, rising from 0 at the start to 1 at the end. An agent buys with
//!   probability `1 - risk` and sells otherwise.
//! * **Endogenous**: risk is a sigmoid of the deviation of the last price
//!   from the agent's fundamental-value estimate plus a weighted recent price
//!   slope. With a negative slope weight, rising prices *lower* perceived
//!   risk: someone more tolerant is expected to buy at a higher price still.
//!
//! Under the endogenous model the risk estimate is compared against the
//! agent's own threshold and the threshold it attributes to that greater
//! fool (`fool_factor * risk_threshold`), yielding one of three regimes
//! (exuberant, comfort, panic) with fixed buy/sell/idle propensities and an
//! offer-price band around the previous round's price.

use rand::Rng;
use serde::Serialize;

/// Per-agent behavioural parameters. `fundamental` is the only field that
/// changes after initialization (through the scenario's shock schedule).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentParams {
    /// Own risk threshold, in (0, 1].
    pub risk_threshold: f64,
    /// Multiplier on `risk_threshold` giving the greater fool's threshold; >= 1.
    pub fool_factor: f64,
    /// Weight on the price-minus-fundamental deviation in the risk exponent.
    pub value_weight: f64,
    /// Weight on the recent price slope in the risk exponent.
    pub slope_weight: f64,
    /// Estimate of the asset's fundamental value; positive.
    pub fundamental: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            risk_threshold: 0.5,
            fool_factor: 1.1,
            value_weight: 1.0,
            slope_weight: -3.0,
            fundamental: 100.0,
        }
    }
}

/// An agent's belongings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentState {
    pub cash: f64,
    pub shares: u32,
}

/// Shape of the exogenous risk curve over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RiskCurve {
    /// risk(t) = t / horizon.
    Linear,
    /// Smooth S-curve through (0, 0), (T/2, 1/2), (T, 1); larger steepness
    /// concentrates the transition around mid-horizon.
    Arctan { steepness: f64 },
}

/// Which risk estimate drives decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RiskModel {
    Exogenous {
        curve: RiskCurve,
    },
    Endogenous {
        /// Multiplier `a` in `1 / (1 + a * exp(-x))`.
        sigmoid_scale: f64,
        /// Number of one-step differences averaged into the price slope.
        slope_window: usize,
    },
}

impl Default for RiskModel {
    fn default() -> Self {
        RiskModel::Endogenous {
            sigmoid_scale: 1.0,
            slope_window: 3,
        }
    }
}

/// Behavioural regime for one agent in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Exuberant,
    Comfort,
    Panic,
}

/// Relative price band `[lo, hi]` applied multiplicatively around an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Draw a price uniformly from `anchor * (1 + [lo, hi])`.
    /// Consumes exactly one uniform draw.
    pub fn sample_around<R: Rng + ?Sized>(&self, anchor: f64, rng: &mut R) -> f64 {
        debug_assert!(anchor > 0.0);
        let u: f64 = rng.gen_range(0.0..1.0);
        anchor * (1.0 + self.lo + u * self.width())
    }
}

/// Offer band used by exogenous-model agents.
pub const EXOGENOUS_OFFER_BAND: Band = Band::new(-0.01, 0.01);

/// Buy/sell/idle propensities plus the offer-price band of one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePolicy {
    pub buy: f64,
    pub sell: f64,
    pub idle: f64,
    pub offer_band: Band,
}

impl RegimePolicy {
    /// The stock policy for a regime: exuberant buys 80% of the time,
    /// comfort mostly idles, panic sells 90% of the time and prices its
    /// offers asymmetrically below the anchor.
    pub fn default_for(regime: Regime) -> Self {
        match regime {
            Regime::Exuberant => Self {
                buy: 0.80,
                sell: 0.10,
                idle: 0.10,
                offer_band: Band::new(-0.01, 0.01),
            },
            Regime::Comfort => Self {
                buy: 0.40,
                sell: 0.10,
                idle: 0.50,
                offer_band: Band::new(-0.01, 0.01),
            },
            Regime::Panic => Self {
                buy: 0.05,
                sell: 0.90,
                idle: 0.05,
                offer_band: Band::new(-0.05, 0.0),
            },
        }
    }
}

/// One policy per regime, with band overrides applied from the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyTable {
    pub exuberant: RegimePolicy,
    pub comfort: RegimePolicy,
    pub panic: RegimePolicy,
}

impl Default for PolicyTable {
    fn default() -> Self {
        Self {
            exuberant: RegimePolicy::default_for(Regime::Exuberant),
            comfort: RegimePolicy::default_for(Regime::Comfort),
            panic: RegimePolicy::default_for(Regime::Panic),
        }
    }
}

impl PolicyTable {
    pub fn policy(&self, regime: Regime) -> &RegimePolicy {
        match regime {
            Regime::Exuberant => &self.exuberant,
            Regime::Comfort => &self.comfort,
            Regime::Panic => &self.panic,
        }
    }
}

/// Exogenous risk at round `round` of `horizon`.
///
/// Linear: `round / horizon`. Arctan: normalized so risk(0) = 0,
/// risk(horizon) = 1, strictly increasing.
///
/// Panics when `round > horizon`; the simulation must stop at the horizon.
pub fn exogenous_risk(round: u32, horizon: u32, curve: RiskCurve) -> f64 {
    assert!(horizon >= 1, "horizon must be at least 1");
    assert!(
        round <= horizon,
        "risk queried past the horizon ({round} > {horizon})"
    );
    let progress = round as f64 / horizon as f64;
    match curve {
        RiskCurve::Linear => progress,
        RiskCurve::Arctan { steepness } => {
            0.5 + (steepness * (progress - 0.5)).atan() / (2.0 * (steepness / 2.0).atan())
        }
    }
}

/// Mean one-step price change over the last `window` steps of `prices`,
/// i.e. `(p[last] - p[last - window]) / window`. Returns 0 while fewer than
/// `window + 1` prices exist (warm-up).
pub fn price_slope(prices: &[f64], window: usize) -> f64 {
    assert!(window >= 1, "slope window must be at least 1");
    if prices.len() < window + 1 {
        return 0.0;
    }
    let last = prices[prices.len() - 1];
    let first = prices[prices.len() - 1 - window];
    (last - first) / window as f64
}

/// Sigmoid risk estimate:
/// `1 / (1 + a * exp(-(value_weight * (price - fundamental) + slope_weight * slope)))`.
///
/// The exponent is clamped to [-500, 500] before exponentiation so extreme
/// price deviations cannot overflow.
pub fn endogenous_risk(params: &AgentParams, sigmoid_scale: f64, price: f64, slope: f64) -> f64 {
    let exponent = params.value_weight * (price - params.fundamental)
        + params.slope_weight * slope;
    let exponent = exponent.clamp(-500.0, 500.0);
    1.0 / (1.0 + sigmoid_scale * (-exponent).exp())
}

/// Map a risk estimate to a regime. Boundaries close on the riskier side:
/// `risk == risk_threshold` is comfort, `risk == fool's threshold` is panic.
pub fn classify_regime(risk: f64, params: &AgentParams) -> Regime {
    let own = params.risk_threshold;
    let fools = params.fool_factor * own;
    if risk < own {
        Regime::Exuberant
    } else if risk < fools {
        Regime::Comfort
    } else {
        Regime::Panic
    }
}

/// The stock policy of a regime (see [`RegimePolicy::default_for`]).
pub fn regime_policy(regime: Regime) -> RegimePolicy {
    RegimePolicy::default_for(regime)
}

/// What an agent can do in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Buy,
    Sell,
    Idle,
}

/// Draw an action from the policy's categorical distribution.
/// Consumes exactly one uniform draw.
pub fn sample_action<R: Rng + ?Sized>(policy: &RegimePolicy, rng: &mut R) -> Action {
    let u: f64 = rng.gen_range(0.0..1.0);
    if u < policy.buy {
        Action::Buy
    } else if u < policy.buy + policy.sell {
        Action::Sell
    } else {
        Action::Idle
    }
}

/// Draw an offer price from the policy's band around `prev_price`.
/// Consumes exactly one uniform draw.
pub fn sample_offer_price<R: Rng + ?Sized>(
    prev_price: f64,
    policy: &RegimePolicy,
    rng: &mut R,
) -> f64 {
    policy.offer_band.sample_around(prev_price, rng)
}

/// The market as one agent sees it at decision time: last completed round's
/// average price and slope, plus the clock.
#[derive(Debug, Clone, Copy)]
pub struct MarketView {
    pub last_price: f64,
    pub slope: f64,
    pub round: u32,
    pub horizon: u32,
}

/// Outcome of one agent's decision, with risk/regime telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Action after the feasibility filter.
    pub action: Action,
    /// Offer price; `Some` exactly when `action` is buy or sell.
    pub offer_price: Option<f64>,
    pub risk: f64,
    pub regime: Regime,
}

/// Decide buy/sell/idle plus an offer price for one agent.
///
/// RNG consumption is fixed: one action draw, then one price draw iff the
/// sampled action is buy or sell. The feasibility filter (buy needs cash at
/// least the offer price, sell needs a share) converts an infeasible action
/// to idle *after* the draws, so replay never depends on holdings.
///
/// Exogenous agents buy with probability `1 - risk` and sell otherwise; their
/// regime telemetry reads comfort by convention.
pub fn decide<R: Rng + ?Sized>(
    params: &AgentParams,
    state: &AgentState,
    view: &MarketView,
    model: &RiskModel,
    policies: &PolicyTable,
    rng: &mut R,
) -> Decision {
    match model {
        RiskModel::Exogenous { curve } => {
            let risk = exogenous_risk(view.round, view.horizon, *curve);
            let u: f64 = rng.gen_range(0.0..1.0);
            let intent = if u < 1.0 - risk { Action::Buy } else { Action::Sell };
            let offer = EXOGENOUS_OFFER_BAND.sample_around(view.last_price, rng);
            let (action, offer_price) = apply_feasibility(intent, offer, state);
            Decision {
                action,
                offer_price,
                risk,
                regime: Regime::Comfort,
            }
        }
        RiskModel::Endogenous { sigmoid_scale, .. } => {
            let risk = endogenous_risk(params, *sigmoid_scale, view.last_price, view.slope);
            let regime = classify_regime(risk, params);
            let policy = policies.policy(regime);
            let intent = sample_action(policy, rng);
            if intent == Action::Idle {
                return Decision {
                    action: Action::Idle,
                    offer_price: None,
                    risk,
                    regime,
                };
            }
            let offer = sample_offer_price(view.last_price, policy, rng);
            let (action, offer_price) = apply_feasibility(intent, offer, state);
            Decision {
                action,
                offer_price,
                risk,
                regime,
            }
        }
    }
}

fn apply_feasibility(intent: Action, offer: f64, state: &AgentState) -> (Action, Option<f64>) {
    match intent {
        Action::Buy if state.cash < offer => (Action::Idle, None),
        Action::Sell if state.shares == 0 => (Action::Idle, None),
        action => (action, Some(offer)),
    }
}
