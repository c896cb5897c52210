//! A deliberately naive double-auction matcher, written directly from the
//! market rules with no code shared with the engine, plus the exhaustive
//! comparison driver.
//!
//! Rules implemented independently:
//! * unit-size orders; a submission first cancels the agent's resting order;
//! * a buy crosses when priced at or above the cheapest resting ask, a sell
//!   when at or below the dearest resting bid; earliest submission wins ties;
//! * trades execute at the resting order's price and settle immediately;
//! * an aggressor that cannot honor its own offer is rejected outright;
//!   a resting counterparty that can no longer honor its offer is purged and
//!   matching retries;
//! * otherwise the order rests.

use bubblesim::agents::AgentState;
use bubblesim::engine::{MatchOutcome, Order, OrderBook, RejectReason, Side, Trade};

#[derive(Debug, Clone, PartialEq)]
struct NaiveResting {
    agent: usize,
    side: Side,
    price: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct NaiveBook {
    /// All resting orders, in arrival order.
    resting: Vec<NaiveResting>,
}

impl NaiveBook {
    fn submit(&mut self, order: Order, agents: &mut [AgentState]) -> MatchOutcome {
        if !(order.price > 0.0) {
            return MatchOutcome::Rejected(RejectReason::NonPositivePrice);
        }
        if order.agent_id >= agents.len() {
            return MatchOutcome::Rejected(RejectReason::UnknownAgent);
        }
        let feasible = match order.side {
            Side::Buy => agents[order.agent_id].cash >= order.price,
            Side::Sell => agents[order.agent_id].shares >= 1,
        };
        if !feasible {
            return MatchOutcome::Rejected(RejectReason::InfeasibleAggressor);
        }
        self.resting.retain(|r| r.agent != order.agent_id);
        loop {
            let mut best: Option<usize> = None;
            for (i, r) in self.resting.iter().enumerate() {
                if r.side == order.side {
                    continue;
                }
                let better = match (order.side, best) {
                    (_, None) => true,
                    (Side::Buy, Some(b)) => r.price < self.resting[b].price,
                    (Side::Sell, Some(b)) => r.price > self.resting[b].price,
                };
                if better {
                    best = Some(i);
                }
            }
            let Some(index) = best else { break };
            let counter = self.resting[index].clone();
            let crosses = match order.side {
                Side::Buy => order.price >= counter.price,
                Side::Sell => order.price <= counter.price,
            };
            if !crosses {
                break;
            }
            let counter_feasible = match counter.side {
                Side::Sell => agents[counter.agent].shares >= 1,
                Side::Buy => agents[counter.agent].cash >= counter.price,
            };
            if !counter_feasible {
                self.resting.remove(index);
                continue;
            }
            self.resting.remove(index);
            let (buyer, seller) = match order.side {
                Side::Buy => (order.agent_id, counter.agent),
                Side::Sell => (counter.agent, order.agent_id),
            };
            agents[buyer].cash -= counter.price;
            agents[seller].cash += counter.price;
            agents[buyer].shares += 1;
            agents[seller].shares -= 1;
            return MatchOutcome::Executed(Trade {
                round: order.round,
                buyer,
                seller,
                price: counter.price,
                aggressor: order.side,
            });
        }
        self.resting.push(NaiveResting {
            agent: order.agent_id,
            side: order.side,
            price: order.price,
        });
        MatchOutcome::Rested
    }

    fn side(&self, side: Side) -> Vec<(usize, f64)> {
        self.resting
            .iter()
            .filter(|r| r.side == side)
            .map(|r| (r.agent, r.price))
            .collect()
    }
}

const PRICES: [f64; 3] = [99.0, 100.0, 101.0];
const AGENTS: usize = 3;

fn all_orders() -> Vec<Order> {
    let mut orders = Vec::new();
    for agent_id in 0..AGENTS {
        for side in [Side::Buy, Side::Sell] {
            for price in PRICES {
                orders.push(Order {
                    agent_id,
                    side,
                    price,
                    round: 1,
                });
            }
        }
    }
    orders
}

struct Comparison {
    sequences: u64,
    steps: u64,
}

fn recurse(
    depth: usize,
    orders: &[Order],
    engine: &OrderBook,
    naive: &NaiveBook,
    engine_agents: &[AgentState],
    naive_agents: &[AgentState],
    tally: &mut Comparison,
) {
    tally.sequences += 1;
    if depth == 0 {
        return;
    }
    for order in orders {
        let mut engine = engine.clone();
        let mut naive = naive.clone();
        let mut engine_agents = engine_agents.to_vec();
        let mut naive_agents = naive_agents.to_vec();
        let engine_outcome = engine.submit(*order, &mut engine_agents);
        let naive_outcome = naive.submit(*order, &mut naive_agents);
        assert_eq!(
            engine_outcome, naive_outcome,
            "outcome diverged on {order:?}"
        );
        assert_eq!(engine_agents, naive_agents, "holdings diverged on {order:?}");
        let engine_bids: Vec<(usize, f64)> =
            engine.bids().iter().map(|o| (o.agent_id, o.price)).collect();
        let engine_asks: Vec<(usize, f64)> =
            engine.asks().iter().map(|o| (o.agent_id, o.price)).collect();
        assert_eq!(engine_bids, naive.side(Side::Buy), "bids diverged on {order:?}");
        assert_eq!(engine_asks, naive.side(Side::Sell), "asks diverged on {order:?}");
        tally.steps += 1;
        recurse(
            depth - 1,
            orders,
            &engine,
            &naive,
            &engine_agents,
            &naive_agents,
            tally,
        );
    }
}

/// Compare the engine against the naive matcher on every order sequence of
/// length <= 5, under an ample endowment and a tight one that exercises
/// rejections and stale-order purges. Returns (sequences, submissions).
pub fn compare_engine_against_naive_matcher() -> (u64, u64) {
    let mut tally = Comparison {
        sequences: 0,
        steps: 0,
    };
    let orders = all_orders();
    for endowment in [
        AgentState {
            cash: 1000.0,
            shares: 10,
        },
        AgentState {
            cash: 150.0,
            shares: 1,
        },
    ] {
        let agents = vec![endowment; AGENTS];
        recurse(
            5,
            &orders,
            &OrderBook::new(),
            &NaiveBook::default(),
            &agents,
            &agents,
            &mut tally,
        );
    }
    (tally.sequences, tally.steps)
}
