//! Two-bidder second-price auction seen from bidder 1, on a value/bid grid.
//!
//! Variables: `V` (own value), `B` (own bid), `S` (opponent value), `C`
//! (opponent bid) and `A` (allocation `(g, m)`: winner and price paid). The
//! probability layer comes from the causal structure `V → B`, `S → C`,
//! `{B, C} → A`. The deterministic allocation rule is ε-smoothed so that the
//! joint stays strictly positive. Bidder 1's utility ratio is
//! `w(a | v) = (1 + v) / (1 + m)` when bidder 1 wins and 1 otherwise.

use crate::error::{EunError, Result};
use crate::event::Event;
use crate::model::{BuildOptions, Layer, Network, Ordering, VariableSpec};
use crate::space::{PartialAssignment, VarId};

use super::{optimal_decision, DecisionOutcome, DecisionProblem};

pub const V: VarId = VarId(0);
pub const B: VarId = VarId(1);
pub const S: VarId = VarId(2);
pub const C: VarId = VarId(3);
pub const A: VarId = VarId(4);

/// Who gets the good on equal bids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    FavorBidderOne,
    FavorBidderTwo,
}

/// Opponent bid distribution given the opponent's value.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum OpponentBids {
    /// `C = S`, ε-smoothed.
    #[default]
    Truthful,
    /// Row `s` holds `p(c | s)` over the grid; rows must have full support.
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionModel {
    /// Grid resolution `K`: values and bids live on `{0, 1/K, …, 1}`.
    pub grid: usize,
    pub epsilon: f64,
    pub tie: TieRule,
    pub opponent: OpponentBids,
}

impl AuctionModel {
    pub fn new(grid: usize, epsilon: f64) -> Result<Self> {
        let m = AuctionModel {
            grid,
            epsilon,
            tie: TieRule::default(),
            opponent: OpponentBids::default(),
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(EunError::InvalidArgument(format!(
                "grid resolution must be at least 2, got {}",
                self.grid
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1e-3) {
            return Err(EunError::InvalidArgument(format!(
                "smoothing must lie in (0, 1e-3), got {}",
                self.epsilon
            )));
        }
        let rows = self.grid + 1;
        // each allocation row puts ε on all but one outcome
        if (2 * rows - 1) as f64 * self.epsilon >= 1.0 {
            return Err(EunError::InvalidArgument(
                "smoothing too large for grid".into(),
            ));
        }
        if let OpponentBids::Table(t) = &self.opponent {
            let ok = t.len() == rows
                && t.iter().all(|r| {
                    r.len() == rows
                        && r.iter().all(|x| x.is_finite() && *x > 0.0)
                        && (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9
                });
            if !ok {
                return Err(EunError::InvalidArgument(
                    "opponent bid table must be a full-support stochastic matrix over the grid"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    pub fn grid_value(&self, i: usize) -> f64 {
        i as f64 / self.grid as f64
    }

    pub fn grid_values(&self) -> Vec<f64> {
        (0..=self.grid).map(|i| self.grid_value(i)).collect()
    }

    /// Grid index of `v`, within 1e-9.
    pub fn grid_index(&self, v: f64) -> Result<usize> {
        let i = (v * self.grid as f64).round();
        if i >= 0.0 && i <= self.grid as f64 && (self.grid_value(i as usize) - v).abs() <= 1e-9 {
            Ok(i as usize)
        } else {
            Err(EunError::InvalidArgument(format!(
                "value {v} is not on the grid of resolution {}",
                self.grid
            )))
        }
    }

    /// Allocation `(winner, price index)` for bid indices `b` and `c`.
    pub fn allocate(&self, b: usize, c: usize) -> (u8, usize) {
        let one_wins = match self.tie {
            TieRule::FavorBidderOne => b >= c,
            TieRule::FavorBidderTwo => b > c,
        };
        if one_wins {
            (1, c)
        } else {
            (2, b)
        }
    }

    /// Domain index of allocation `(g, m)`: bidder-1 wins first.
    pub fn allocation_index(&self, g: u8, m: usize) -> usize {
        (g as usize - 1) * (self.grid + 1) + m
    }

    /// Smoothed `p(a | b, c)` row, indexed by allocation.
    pub fn allocation_row(&self, b: usize, c: usize) -> Vec<f64> {
        let outcomes = 2 * (self.grid + 1);
        let (g, m) = self.allocate(b, c);
        let hit = self.allocation_index(g, m);
        (0..outcomes)
            .map(|a| {
                if a == hit {
                    1.0 - (outcomes - 1) as f64 * self.epsilon
                } else {
                    self.epsilon
                }
            })
            .collect()
    }

    /// `w(a | v)`.
    pub fn payoff_ratio(&self, a: usize, v: usize) -> f64 {
        let rows = self.grid + 1;
        if a < rows {
            (1.0 + self.grid_value(v)) / (1.0 + self.grid_value(a))
        } else {
            1.0
        }
    }

    fn opponent_row(&self, s: usize) -> Vec<f64> {
        let rows = self.grid + 1;
        match &self.opponent {
            OpponentBids::Truthful => (0..rows)
                .map(|c| {
                    if c == s {
                        1.0 - self.grid as f64 * self.epsilon
                    } else {
                        self.epsilon
                    }
                })
                .collect(),
            OpponentBids::Table(t) => t[s].clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VickreyAuction {
    pub model: AuctionModel,
    pub network: Network,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub value: f64,
    /// Maximizing bids, ascending.
    pub bids: Vec<f64>,
    pub truthful_member: bool,
    /// Conditional expected utility `u(b | V = v)` of every grid bid.
    pub utilities: Vec<(f64, f64)>,
}

/// Generates the auction network with its decision variable `B`.
pub fn build_vickrey_auction(model: AuctionModel) -> Result<VickreyAuction> {
    model.validate()?;
    let rows = model.grid + 1;
    let labels: Vec<String> = model.grid_values().iter().map(|x| x.to_string()).collect();
    let grid_var = |name: &str| VariableSpec::new(name, labels.clone(), None);
    let allocations: Vec<String> = [1, 2]
        .iter()
        .flat_map(|g| labels.iter().map(move |m| format!("{g}:{m}")))
        .collect();
    let losing_reference = format!("2:{}", labels[0]);
    let vars = vec![
        grid_var("V")?,
        grid_var("B")?,
        grid_var("S")?,
        grid_var("C")?,
        VariableSpec::new("A", allocations, Some(&losing_reference))?,
    ];
    let uniform = vec![1.0 / rows as f64; rows];
    let mut cpt_b = Vec::with_capacity(rows * rows);
    let mut cpt_c = Vec::with_capacity(rows * rows);
    let mut cpt_a = Vec::with_capacity(rows * rows * 2 * rows);
    for s in 0..rows {
        cpt_b.extend_from_slice(&uniform);
        cpt_c.extend(model.opponent_row(s));
    }
    for b in 0..rows {
        for c in 0..rows {
            cpt_a.extend(model.allocation_row(b, c));
        }
    }
    let bn = crate::bayes::BayesNet::new(
        vars,
        &[(V, B), (S, C), (B, A), (C, A)],
        vec![uniform.clone(), cpt_b, uniform, cpt_c, cpt_a],
    )?;
    let network = bn.to_network_with_utility(
        Ordering::identity(5),
        &[(V, A)],
        |s| {
            s.var_ids()
                .map(|var| {
                    s.table_from_fn(Layer::Utility, var, |x, cond| {
                        if var == A {
                            model.payoff_ratio(x, cond[0])
                        } else {
                            1.0
                        }
                    })
                })
                .collect()
        },
        BuildOptions::default(),
    )?;
    Ok(VickreyAuction { model, network })
}

impl VickreyAuction {
    pub fn problem(&self, value_index: usize) -> Result<DecisionProblem> {
        DecisionProblem::new(
            &self.network,
            vec![B],
            Event::cylinder(PartialAssignment::new().with(V, value_index)),
        )
    }

    pub fn decide(&self, value: f64) -> Result<DecisionOutcome> {
        let v = self.model.grid_index(value)?;
        optimal_decision(&self.network, &self.problem(v)?)
    }
}

/// Bids maximizing `u(b | V = v)`.
pub fn auction_best_response(auction: &VickreyAuction, value: f64) -> Result<BestResponse> {
    let v = auction.model.grid_index(value)?;
    let outcome = auction.decide(value)?;
    let bid_of = |d: &PartialAssignment| auction.model.grid_value(d.get(B).expect("bid assigned"));
    let bids: Vec<f64> = outcome.argmax.iter().map(bid_of).collect();
    let truthful_member = outcome.argmax.iter().any(|d| d.get(B) == Some(v));
    Ok(BestResponse {
        value: auction.model.grid_value(v),
        bids,
        truthful_member,
        utilities: outcome
            .evaluated
            .iter()
            .map(|(d, u)| (bid_of(d), *u))
            .collect(),
    })
}
