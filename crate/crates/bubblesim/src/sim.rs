//! Scenario configuration and the round loop.
//!
//! A simulation is a pure function of its [`ScenarioConfig`] (seed included).
//! All randomness flows from one ChaCha8 stream seeded with `config.seed`,
//! consumed in a fixed order:
//!
//! 1. initialization — for each agent in index order: the five parameter
//!    fields (risk_threshold, fool_factor, value_weight, slope_weight,
//!    fundamental; fixed specs consume nothing), then its share endowment;
//! 2. per round — one shuffle for the order of play, then per agent in that
//!    order the decision draws (action, then offer price iff acting).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{
    decide, price_slope, AgentParams, AgentState, Band, MarketView, PolicyTable, Regime,
    RiskCurve, RiskModel,
};
use crate::engine::{
    round_average_price, MatchOutcome, Order, OrderBook, RegimeCounts, RoundReport, Side, Trade,
};
use crate::agents::Action;

/// Invalid scenario description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// How one agent-parameter field is drawn at initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ParamSpec {
    Fixed(f64),
    /// Uniform on `[lo, hi]`, endpoints included.
    Uniform(f64, f64),
}

impl ParamSpec {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ParamSpec::Fixed(value) => value,
            ParamSpec::Uniform(lo, hi) => rng.gen_range(lo..=hi),
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            ParamSpec::Fixed(v) => (v, v),
            ParamSpec::Uniform(lo, hi) => (lo, hi),
        }
    }
}

/// Initial share endowment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShareSpec {
    Fixed(u32),
    /// Uniform integer on `{lo, ..., hi}`, endpoints included.
    Uniform(u32, u32),
}

impl ShareSpec {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match *self {
            ShareSpec::Fixed(value) => value,
            ShareSpec::Uniform(lo, hi) => rng.gen_range(lo..=hi),
        }
    }
}

/// Per-field distributions for agent parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentParamSpecs {
    pub risk_threshold: ParamSpec,
    pub fool_factor: ParamSpec,
    pub value_weight: ParamSpec,
    pub slope_weight: ParamSpec,
    pub fundamental: ParamSpec,
}

impl Default for AgentParamSpecs {
    fn default() -> Self {
        let d = AgentParams::default();
        Self {
            risk_threshold: ParamSpec::Fixed(d.risk_threshold),
            fool_factor: ParamSpec::Fixed(d.fool_factor),
            value_weight: ParamSpec::Fixed(d.value_weight),
            slope_weight: ParamSpec::Fixed(d.slope_weight),
            fundamental: ParamSpec::Fixed(d.fundamental),
        }
    }
}

impl AgentParamSpecs {
    /// Field draw order is fixed; see the module docs.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AgentParams {
        AgentParams {
            risk_threshold: self.risk_threshold.sample(rng),
            fool_factor: self.fool_factor.sample(rng),
            value_weight: self.value_weight.sample(rng),
            slope_weight: self.slope_weight.sample(rng),
            fundamental: self.fundamental.sample(rng),
        }
    }
}

/// A scheduled change of every agent's fundamental-value estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shock {
    /// Round at whose start the new value takes effect.
    pub round: u32,
    pub new_fundamental: f64,
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub n_agents: usize,
    /// Number of auction rounds; doubles as the exogenous-model horizon.
    pub rounds: u32,
    pub seed: u64,
    pub model: RiskModel,
    pub params: AgentParamSpecs,
    pub initial_cash: f64,
    pub initial_shares: ShareSpec,
    /// p(0), the anchor before any trade happens.
    pub initial_price: f64,
    pub shocks: Vec<Shock>,
    pub exuberant_band: Option<Band>,
    pub comfort_band: Option<Band>,
    pub panic_band: Option<Band>,
    /// Drop all resting orders at the start of every round instead of letting
    /// them persist until matched or replaced.
    pub clear_books_each_round: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_agents: 10,
            rounds: 1000,
            seed: 1,
            model: RiskModel::default(),
            params: AgentParamSpecs::default(),
            initial_cash: 1000.0,
            initial_shares: ShareSpec::Uniform(0, 10),
            initial_price: 100.0,
            shocks: Vec::new(),
            exuberant_band: None,
            comfort_band: None,
            panic_band: None,
            clear_books_each_round: false,
        }
    }
}

fn check_band(name: &str, band: &Band) -> Result<(), ConfigError> {
    if !band.lo.is_finite() || !band.hi.is_finite() {
        return Err(ConfigError::Invalid(format!("{name} must be finite")));
    }
    if band.lo > band.hi {
        return Err(ConfigError::Invalid(format!(
            "{name}: lower bound {} exceeds upper bound {}",
            band.lo, band.hi
        )));
    }
    if band.lo <= -1.0 {
        return Err(ConfigError::Invalid(format!(
            "{name}: lower bound {} would allow non-positive offer prices",
            band.lo
        )));
    }
    Ok(())
}

fn check_param(
    name: &str,
    spec: &ParamSpec,
    legal: impl Fn(f64) -> bool,
    requirement: &str,
) -> Result<(), ConfigError> {
    let (lo, hi) = spec.bounds();
    if !lo.is_finite() || !hi.is_finite() {
        return Err(ConfigError::Invalid(format!("{name} must be finite")));
    }
    if lo > hi {
        return Err(ConfigError::Invalid(format!(
            "{name}: uniform bounds out of order ({lo} > {hi})"
        )));
    }
    if !legal(lo) || !legal(hi) {
        return Err(ConfigError::Invalid(format!("{name} must be {requirement}")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_agents < 2 {
            return Err(ConfigError::Invalid(format!(
                "need at least 2 agents, got {}",
                self.n_agents
            )));
        }
        if self.n_agents > 1_000_000 {
            return Err(ConfigError::Invalid(format!(
                "at most 1000000 agents supported, got {}",
                self.n_agents
            )));
        }
        if self.rounds > 10_000_000 {
            return Err(ConfigError::Invalid(format!(
                "at most 10000000 rounds supported, got {}",
                self.rounds
            )));
        }
        if !(self.initial_price > 0.0) || !self.initial_price.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "initial_price must be positive, got {}",
                self.initial_price
            )));
        }
        if !(self.initial_cash >= 0.0) || !self.initial_cash.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "initial_cash must be non-negative, got {}",
                self.initial_cash
            )));
        }
        check_param(
            "risk_threshold",
            &self.params.risk_threshold,
            |v| v > 0.0 && v <= 1.0,
            "in (0, 1]",
        )?;
        check_param(
            "fool_factor",
            &self.params.fool_factor,
            |v| v >= 1.0,
            "at least 1",
        )?;
        check_param("value_weight", &self.params.value_weight, |_| true, "finite")?;
        check_param("slope_weight", &self.params.slope_weight, |_| true, "finite")?;
        check_param(
            "fundamental",
            &self.params.fundamental,
            |v| v > 0.0,
            "positive",
        )?;
        if let ShareSpec::Uniform(lo, hi) = self.initial_shares {
            if lo > hi {
                return Err(ConfigError::Invalid(format!(
                    "initial_shares: uniform bounds out of order ({lo} > {hi})"
                )));
            }
        }
        match self.model {
            RiskModel::Endogenous {
                sigmoid_scale,
                slope_window,
            } => {
                if !(sigmoid_scale > 0.0) || !sigmoid_scale.is_finite() {
                    return Err(ConfigError::Invalid(format!(
                        "sigmoid_scale must be positive, got {sigmoid_scale}"
                    )));
                }
                if slope_window < 1 {
                    return Err(ConfigError::Invalid(
                        "slope_window must be at least 1".into(),
                    ));
                }
            }
            RiskModel::Exogenous {
                curve: RiskCurve::Arctan { steepness },
            } => {
                if !(steepness > 0.0) || !steepness.is_finite() {
                    return Err(ConfigError::Invalid(format!(
                        "arctan_steepness must be positive, got {steepness}"
                    )));
                }
            }
            RiskModel::Exogenous {
                curve: RiskCurve::Linear,
            } => {}
        }
        let mut prev_round = 0u32;
        for (i, shock) in self.shocks.iter().enumerate() {
            if shock.round < 1 {
                return Err(ConfigError::Invalid(
                    "shock rounds start at 1".into(),
                ));
            }
            if i > 0 && shock.round <= prev_round {
                return Err(ConfigError::Invalid(
                    "shocks must be sorted by round, without duplicates".into(),
                ));
            }
            if !(shock.new_fundamental > 0.0) || !shock.new_fundamental.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "shock fundamental must be positive, got {}",
                    shock.new_fundamental
                )));
            }
            prev_round = shock.round;
        }
        if let Some(ref b) = self.exuberant_band {
            check_band("exuberant_band", b)?;
        }
        if let Some(ref b) = self.comfort_band {
            check_band("comfort_band", b)?;
        }
        if let Some(ref b) = self.panic_band {
            check_band("panic_band", b)?;
        }
        Ok(())
    }

    /// Regime policies with this scenario's band overrides applied.
    pub fn policy_table(&self) -> PolicyTable {
        let mut table = PolicyTable::default();
        if let Some(band) = self.exuberant_band {
            table.exuberant.offer_band = band;
        }
        if let Some(band) = self.comfort_band {
            table.comfort.offer_band = band;
        }
        if let Some(band) = self.panic_band {
            table.panic.offer_band = band;
        }
        table
    }

    /// The common fundamental value at each price index `0..len`, following
    /// the shock schedule. Only meaningful when `fundamental` is a fixed
    /// spec (shocks overwrite every agent's estimate anyway).
    pub fn fundamental_schedule(&self, len: usize) -> Vec<f64> {
        let (initial, _) = self.params.fundamental.bounds();
        let mut schedule = vec![initial; len];
        for shock in &self.shocks {
            let start = shock.round as usize;
            if start < len {
                for value in &mut schedule[start..] {
                    *value = shock.new_fundamental;
                }
            }
        }
        schedule
    }

    fn slope_window(&self) -> usize {
        match self.model {
            RiskModel::Endogenous { slope_window, .. } => slope_window,
            RiskModel::Exogenous { .. } => 3,
        }
    }
}

/// Snapshot of one agent (parameters plus belongings).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentSnapshot {
    pub params: AgentParams,
    pub state: AgentState,
}

/// Mutable market state during a run.
#[derive(Debug, Clone)]
pub struct World {
    pub params: Vec<AgentParams>,
    pub agents: Vec<AgentState>,
    pub books: OrderBook,
    /// p(0..=t): initial price plus one average per completed round.
    pub prices: Vec<f64>,
}

impl World {
    pub fn total_cash(&self) -> f64 {
        self.agents.iter().map(|a| a.cash).sum()
    }

    pub fn total_shares(&self) -> u64 {
        self.agents.iter().map(|a| u64::from(a.shares)).sum()
    }

    fn snapshots(&self) -> Vec<AgentSnapshot> {
        self.params
            .iter()
            .zip(&self.agents)
            .map(|(&params, &state)| AgentSnapshot { params, state })
            .collect()
    }
}

/// Draw agents and endowments; books start empty, the price series starts at
/// `initial_price`.
pub fn init_world<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<World, ConfigError> {
    config.validate()?;
    let mut params = Vec::with_capacity(config.n_agents);
    let mut agents = Vec::with_capacity(config.n_agents);
    for _ in 0..config.n_agents {
        params.push(config.params.sample(rng));
        agents.push(AgentState {
            cash: config.initial_cash,
            shares: config.initial_shares.sample(rng),
        });
    }
    Ok(World {
        params,
        agents,
        books: OrderBook::new(),
        prices: vec![config.initial_price],
    })
}

/// Apply every shock scheduled for `round` to all agents.
pub fn apply_shocks(world: &mut World, round: u32, shocks: &[Shock]) {
    for shock in shocks {
        if shock.round == round {
            for params in &mut world.params {
                params.fundamental = shock.new_fundamental;
            }
        }
    }
}

/// Everything a finished run leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub config: ScenarioConfig,
    /// p(0..=T); length `rounds + 1`.
    pub prices: Vec<f64>,
    /// One report per round, in order.
    pub reports: Vec<RoundReport>,
    pub initial_agents: Vec<AgentSnapshot>,
    pub final_agents: Vec<AgentSnapshot>,
}

impl SimulationResult {
    /// Every trade of the run, in execution order.
    pub fn trades(&self) -> impl Iterator<Item = &Trade> {
        self.reports.iter().flat_map(|r| r.trades.iter())
    }

    pub fn trade_count(&self) -> usize {
        self.reports.iter().map(|r| r.trades.len()).sum()
    }

    pub fn final_price(&self) -> f64 {
        *self.prices.last().expect("price series is never empty")
    }
}

/// An in-progress run. Stepping is exposed so tests can inspect the world
/// between rounds; most callers just use [`run_simulation`].
pub struct Simulation {
    config: ScenarioConfig,
    policies: PolicyTable,
    world: World,
    rng: ChaCha8Rng,
    reports: Vec<RoundReport>,
    initial_agents: Vec<AgentSnapshot>,
    current_round: u32,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let world = init_world(&config, &mut rng)?;
        let initial_agents = world.snapshots();
        let policies = config.policy_table();
        Ok(Self {
            config,
            policies,
            world,
            rng,
            reports: Vec::new(),
            initial_agents,
            current_round: 0,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.current_round >= self.config.rounds
    }

    /// Run one auction round and return its report.
    pub fn step(&mut self) -> &RoundReport {
        assert!(!self.is_done(), "simulation already ran its full horizon");
        let round = self.current_round + 1;
        apply_shocks(&mut self.world, round, &self.config.shocks);
        if self.config.clear_books_each_round {
            self.world.books.clear();
        }

        let last_price = *self.world.prices.last().expect("non-empty price series");
        let view = MarketView {
            last_price,
            slope: price_slope(&self.world.prices, self.config.slope_window()),
            round,
            horizon: self.config.rounds,
        };

        let mut order_of_play: Vec<usize> = (0..self.config.n_agents).collect();
        order_of_play.shuffle(&mut self.rng);

        let mut trades = Vec::new();
        let mut buy_offers = 0;
        let mut sell_offers = 0;
        let mut idles = 0;
        let mut regime_counts = RegimeCounts::default();

        for &agent_id in &order_of_play {
            let decision = decide(
                &self.world.params[agent_id],
                &self.world.agents[agent_id],
                &view,
                &self.config.model,
                &self.policies,
                &mut self.rng,
            );
            match decision.regime {
                Regime::Exuberant => regime_counts.exuberant += 1,
                Regime::Comfort => regime_counts.comfort += 1,
                Regime::Panic => regime_counts.panic += 1,
            }
            let side = match decision.action {
                Action::Buy => {
                    buy_offers += 1;
                    Side::Buy
                }
                Action::Sell => {
                    sell_offers += 1;
                    Side::Sell
                }
                Action::Idle => {
                    idles += 1;
                    continue;
                }
            };
            let order = Order {
                agent_id,
                side,
                price: decision.offer_price.expect("acting decisions carry a price"),
                round,
            };
            match self.world.books.submit(order, &mut self.world.agents) {
                MatchOutcome::Executed(trade) => trades.push(trade),
                MatchOutcome::Rested => {}
                MatchOutcome::Rejected(reason) => {
                    debug_assert!(false, "pre-filtered order rejected: {reason:?}");
                }
            }
        }

        let avg_price = round_average_price(&trades, last_price);
        self.world.prices.push(avg_price);
        self.current_round = round;

        #[cfg(debug_assertions)]
        self.assert_conservation();

        self.reports.push(RoundReport {
            round,
            avg_price,
            trades,
            buy_offers,
            sell_offers,
            idles,
            regime_counts,
        });
        self.reports.last().expect("just pushed")
    }

    #[cfg(debug_assertions)]
    fn assert_conservation(&self) {
        let cash0: f64 = self.initial_agents.iter().map(|a| a.state.cash).sum();
        let shares0: u64 = self
            .initial_agents
            .iter()
            .map(|a| u64::from(a.state.shares))
            .sum();
        let cash = self.world.total_cash();
        debug_assert!(
            (cash - cash0).abs() <= 1e-6 * cash0.max(1.0),
            "cash drifted: {cash} vs {cash0}"
        );
        debug_assert_eq!(self.world.total_shares(), shares0, "shares not conserved");
        debug_assert!(self.world.agents.iter().all(|a| a.cash >= 0.0));
    }

    pub fn into_result(self) -> SimulationResult {
        assert!(self.is_done(), "run all rounds before collecting the result");
        let final_agents = self.world.snapshots();
        SimulationResult {
            config: self.config,
            prices: self.world.prices,
            reports: self.reports,
            initial_agents: self.initial_agents,
            final_agents,
        }
    }
}

/// Run a full scenario to completion.
pub fn run_simulation(config: &ScenarioConfig) -> Result<SimulationResult, ConfigError> {
    let mut sim = Simulation::new(config.clone())?;
    while !sim.is_done() {
        sim.step();
    }
    Ok(sim.into_result())
}

/// Run the same scenario once per seed. Results come back in seed order and
/// are identical to running each seed alone.
pub fn run_batch(
    config: &ScenarioConfig,
    seeds: &[u64],
) -> Result<Vec<SimulationResult>, ConfigError> {
    seeds
        .iter()
        .map(|&seed| {
            let mut cfg = config.clone();
            cfg.seed = seed;
            run_simulation(&cfg)
        })
        .collect()
}
