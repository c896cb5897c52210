//! Double-auction market clearing.
//!
//! Orders are unit-size (always exactly one share). Each agent may keep at
//! most one resting order across both books (cleared-book convention); a new
//! submission first cancels the agent's previous offer, so an agent can never
//! trade with itself.
//!
//! An incoming buy crosses when its price is at or above the best ask, an
//! incoming sell crosses when its price is at or below the best bid. The
//! trade always executes at the *resting* order's price. Among equal-priced
//! resting orders the earliest submission wins.

use serde::Serialize;

use crate::agents::AgentState;

/// Index into the simulation's agent table.
pub type AgentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

/// A unit-size offer submitted to the market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    pub agent_id: AgentId,
    pub side: Side,
    /// Offer price, cash units per share. Must be positive.
    pub price: f64,
    /// Auction round in which the order was submitted.
    pub round: u32,
}

/// An unmatched order sitting in one of the books. The side is implied by
/// which book holds it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestingOrder {
    pub agent_id: AgentId,
    pub price: f64,
    pub round: u32,
}

/// An executed exchange of one share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trade {
    pub round: u32,
    pub buyer: AgentId,
    pub seller: AgentId,
    /// Execution price: the price of the resting order at match time.
    pub price: f64,
    /// Side of the incoming order that triggered the match.
    pub aggressor: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Order price was zero, negative, or not a number.
    NonPositivePrice,
    /// `agent_id` is not a live agent.
    UnknownAgent,
    /// A buyer offered more cash than it holds, or a seller holds no share.
    InfeasibleAggressor,
}

/// What happened to a submitted order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchOutcome {
    Executed(Trade),
    Rested,
    Rejected(RejectReason),
}

/// Per-round regime telemetry (how many agents were in each regime when they
/// made their decision).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RegimeCounts {
    pub exuberant: usize,
    pub comfort: usize,
    pub panic: usize,
}

/// Everything recorded about one auction round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: u32,
    /// Mean trade price of the round, or the previous round's price if no
    /// trade occurred.
    pub avg_price: f64,
    pub trades: Vec<Trade>,
    pub buy_offers: usize,
    pub sell_offers: usize,
    pub idles: usize,
    pub regime_counts: RegimeCounts,
}

/// The pair of cleared books: resting bids and resting asks.
///
/// Both vectors stay in submission order, which is what makes the
/// earliest-wins tie-break a simple linear scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderBook {
    bids: Vec<RestingOrder>,
    asks: Vec<RestingOrder>,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resting buy orders in submission order.
    pub fn bids(&self) -> &[RestingOrder] {
        &self.bids
    }

    /// Resting sell orders in submission order.
    pub fn asks(&self) -> &[RestingOrder] {
        &self.asks
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty() && self.asks.is_empty()
    }

    pub fn clear(&mut self) {
        self.bids.clear();
        self.asks.clear();
    }

    /// Highest resting bid price, if any.
    pub fn best_bid(&self) -> Option<f64> {
        self.best_bid_index().map(|i| self.bids[i].price)
    }

    /// Lowest resting ask price, if any.
    pub fn best_ask(&self) -> Option<f64> {
        self.best_ask_index().map(|i| self.asks[i].price)
    }

    /// `(best_bid, best_ask)` in one call.
    pub fn best_prices(&self) -> (Option<f64>, Option<f64>) {
        (self.best_bid(), self.best_ask())
    }

    fn best_bid_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, order) in self.bids.iter().enumerate() {
            if best.map_or(true, |b| order.price > self.bids[b].price) {
                best = Some(i);
            }
        }
        best
    }

    fn best_ask_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, order) in self.asks.iter().enumerate() {
            if best.map_or(true, |b| order.price < self.asks[b].price) {
                best = Some(i);
            }
        }
        best
    }

    /// Remove any resting order belonging to `agent_id` from both books.
    pub fn cancel(&mut self, agent_id: AgentId) {
        self.bids.retain(|o| o.agent_id != agent_id);
        self.asks.retain(|o| o.agent_id != agent_id);
    }

    /// Submit an order against the books, mutating `agents` on execution.
    ///
    /// Processing order:
    /// 1. Reject if the price is not positive, the agent is unknown, or the
    ///    aggressor cannot honor its own offer (buy: cash < price, sell: no
    ///    share). A rejected order leaves the books untouched.
    /// 2. Cancel the agent's previous resting order (replacement semantics).
    /// 3. Match against the best opposite resting order while it crosses.
    ///    A resting counterparty that can no longer honor its offer is purged
    ///    and matching retries against the next best.
    /// 4. If nothing crosses, the order rests in its own book.
    ///
    /// A trade settles immediately: one share and `price` cash move between
    /// the two parties.
    pub fn submit(&mut self, order: Order, agents: &mut [AgentState]) -> MatchOutcome {
        if !(order.price > 0.0) {
            return MatchOutcome::Rejected(RejectReason::NonPositivePrice);
        }
        let Some(aggressor) = agents.get(order.agent_id) else {
            return MatchOutcome::Rejected(RejectReason::UnknownAgent);
        };
        let feasible = match order.side {
            Side::Buy => aggressor.cash >= order.price,
            Side::Sell => aggressor.shares >= 1,
        };
        if !feasible {
            return MatchOutcome::Rejected(RejectReason::InfeasibleAggressor);
        }

        self.cancel(order.agent_id);

        loop {
            let best = match order.side {
                Side::Buy => self.best_ask_index(),
                Side::Sell => self.best_bid_index(),
            };
            let Some(index) = best else { break };
            let resting = match order.side {
                Side::Buy => self.asks[index],
                Side::Sell => self.bids[index],
            };
            let crosses = match order.side {
                Side::Buy => order.price >= resting.price,
                Side::Sell => order.price <= resting.price,
            };
            if !crosses {
                break;
            }
            // Re-validate the resting party at match time; its holdings may
            // have changed since it rested. Stale orders are purged lazily.
            let counterparty_ok = match order.side {
                Side::Buy => agents[resting.agent_id].shares >= 1,
                Side::Sell => agents[resting.agent_id].cash >= resting.price,
            };
            if !counterparty_ok {
                match order.side {
                    Side::Buy => {
                        self.asks.remove(index);
                    }
                    Side::Sell => {
                        self.bids.remove(index);
                    }
                }
                continue;
            }
            let (buyer, seller) = match order.side {
                Side::Buy => (order.agent_id, resting.agent_id),
                Side::Sell => (resting.agent_id, order.agent_id),
            };
            debug_assert!(agents[buyer].cash >= resting.price);
            debug_assert!(agents[seller].shares >= 1);
            match order.side {
                Side::Buy => {
                    self.asks.remove(index);
                }
                Side::Sell => {
                    self.bids.remove(index);
                }
            }
            agents[buyer].cash -= resting.price;
            agents[seller].cash += resting.price;
            agents[buyer].shares += 1;
            agents[seller].shares -= 1;
            return MatchOutcome::Executed(Trade {
                round: order.round,
                buyer,
                seller,
                price: resting.price,
                aggressor: order.side,
            });
        }

        let resting = RestingOrder {
            agent_id: order.agent_id,
            price: order.price,
            round: order.round,
        };
        match order.side {
            Side::Buy => self.bids.push(resting),
            Side::Sell => self.asks.push(resting),
        }
        MatchOutcome::Rested
    }
}

/// Mean trade price of a round, or `fallback` (the previous round's price)
/// when the round saw no trade.
pub fn round_average_price(trades: &[Trade], fallback: f64) -> f64 {
    assert!(fallback > 0.0, "fallback price must be positive");
    if trades.is_empty() {
        fallback
    } else {
        trades.iter().map(|t| t.price).sum::<f64>() / trades.len() as f64
    }
}
