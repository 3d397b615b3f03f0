//! Finite-type markets, the dominance partition, and the reduction of each
//! cell to a one-dimensional monopoly problem over willingness gaps.
//!
//! A market holds `N >= 2` firms with non-negative marginal costs and `K`
//! consumer types, each a vector of valuations with a positive mass. Masses
//! sum to one exactly. Every type must be served profitably by at least one
//! firm, i.e. `max_i (v_i - c_i) > 0`. The outside option is modeled as a
//! pseudo-firm with value 0 and cost 0 wherever competing surpluses are
//! compared.

use crate::rational::Rational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Validation failures for raw market descriptions. Each message leads with
/// the variant name so command-line output stays greppable.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("FewerThanTwoFirms: got {0}, need at least 2")]
    FewerThanTwoFirms(usize),
    #[error("NegativeCost: firm {firm} has cost {cost}")]
    NegativeCost { firm: usize, cost: Rational },
    #[error("ValueCountMismatch: type {type_index} has {got} values, expected {expected}")]
    ValueCountMismatch {
        type_index: usize,
        got: usize,
        expected: usize,
    },
    #[error("NonPositiveMass: type {type_index} has mass {mass}")]
    NonPositiveMass { type_index: usize, mass: Rational },
    #[error("ValueAboveCap: type {type_index} values firm {firm} at {value}, above cap {cap}")]
    ValueAboveCap {
        type_index: usize,
        firm: usize,
        value: Rational,
        cap: Rational,
    },
    #[error("NonPositiveSurplusType: type {type_index} has max surplus {surplus}, need > 0")]
    NonPositiveSurplusType {
        type_index: usize,
        surplus: Rational,
    },
    #[error("DuplicateType: types {first} and {second} have identical value vectors")]
    DuplicateType { first: usize, second: usize },
    #[error("MassSumMismatch: masses sum to {sum}, expected exactly 1")]
    MassSumMismatch { sum: Rational },
}

/// One consumer type: a valuation per firm and the mass of consumers
/// holding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumerType {
    pub values: Vec<Rational>,
    pub mass: Rational,
}

impl ConsumerType {
    pub fn new(values: Vec<Rational>, mass: Rational) -> Self {
        ConsumerType { values, mass }
    }
}

/// A validated finite-type market. Construction via [`Market::new`] enforces
/// every invariant; instances are immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    costs: Vec<Rational>,
    types: Vec<ConsumerType>,
    value_cap: Rational,
}

impl Market {
    /// Validates a raw description. Masses must already sum to one; nothing
    /// is renormalized silently.
    pub fn new(
        costs: Vec<Rational>,
        types: Vec<ConsumerType>,
        value_cap: Rational,
    ) -> Result<Self, MarketError> {
        let firms = costs.len();
        if firms < 2 {
            return Err(MarketError::FewerThanTwoFirms(firms));
        }
        for (firm, cost) in costs.iter().enumerate() {
            if cost < &Rational::zero() {
                return Err(MarketError::NegativeCost {
                    firm,
                    cost: cost.clone(),
                });
            }
        }
        for (t, ty) in types.iter().enumerate() {
            if ty.values.len() != firms {
                return Err(MarketError::ValueCountMismatch {
                    type_index: t,
                    got: ty.values.len(),
                    expected: firms,
                });
            }
            if ty.mass <= Rational::zero() {
                return Err(MarketError::NonPositiveMass {
                    type_index: t,
                    mass: ty.mass.clone(),
                });
            }
            for (firm, value) in ty.values.iter().enumerate() {
                if value > &value_cap {
                    return Err(MarketError::ValueAboveCap {
                        type_index: t,
                        firm,
                        value: value.clone(),
                        cap: value_cap.clone(),
                    });
                }
            }
            let surplus = ty
                .values
                .iter()
                .zip(&costs)
                .map(|(v, c)| v - c)
                .max()
                .expect("at least two firms");
            if surplus <= Rational::zero() {
                return Err(MarketError::NonPositiveSurplusType {
                    type_index: t,
                    surplus,
                });
            }
        }
        for i in 0..types.len() {
            for j in (i + 1)..types.len() {
                if types[i].values == types[j].values {
                    return Err(MarketError::DuplicateType {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        let sum: Rational = types.iter().map(|t| t.mass.clone()).sum();
        if !sum.is_one() {
            return Err(MarketError::MassSumMismatch { sum });
        }
        Ok(Market {
            costs,
            types,
            value_cap,
        })
    }

    pub fn firm_count(&self) -> usize {
        self.costs.len()
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn cost(&self, firm: usize) -> &Rational {
        &self.costs[firm]
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn types(&self) -> &[ConsumerType] {
        &self.types
    }

    pub fn value_cap(&self) -> &Rational {
        &self.value_cap
    }

    /// `v_i - c_i` for one type and firm.
    pub fn surplus(&self, firm: usize, type_index: usize) -> Rational {
        &self.types[type_index].values[firm] - &self.costs[firm]
    }

    /// Best surplus any rival (or the outside option) offers the type when
    /// all rivals price at cost: `max(0, max_{j != i} (v_j - c_j))`.
    pub fn best_rival_surplus(&self, firm: usize, type_index: usize) -> Rational {
        let mut best = Rational::zero();
        for j in 0..self.firm_count() {
            if j != firm {
                let s = self.surplus(j, type_index);
                if s > best {
                    best = s;
                }
            }
        }
        best
    }

    /// The willingness gap `w_i(v) = v_i - max_{j != i}(v_j - c_j)`, with
    /// the outside option included among the rivals. Defined for every
    /// type; values at or below `c_i` simply mean the type is not in firm
    /// `i`'s cell.
    pub fn willingness_gap(&self, firm: usize, type_index: usize) -> Rational {
        &self.types[type_index].values[firm] - self.best_rival_surplus(firm, type_index)
    }

    /// Total surplus when every type buys from a surplus-maximizing firm.
    pub fn efficient_surplus(&self) -> Rational {
        self.types
            .iter()
            .enumerate()
            .map(|(t, ty)| {
                let best = (0..self.firm_count())
                    .map(|i| self.surplus(i, t))
                    .max()
                    .expect("at least two firms");
                &ty.mass * best
            })
            .sum()
    }

    /// Assigns each type to the cell of its uniquely dominant firm, or to
    /// the residual when the maximal surplus is shared.
    pub fn partition_by_dominance(&self) -> DominancePartition {
        let firms = self.firm_count();
        let mut cells: Vec<Vec<usize>> = vec![Vec::new(); firms];
        let mut residual = Vec::new();
        for t in 0..self.type_count() {
            let mut dominant = None;
            for i in 0..firms {
                if self.surplus(i, t) > self.best_rival_surplus(i, t) {
                    dominant = Some(i);
                    break;
                }
            }
            match dominant {
                Some(i) => cells[i].push(t),
                None => residual.push(t),
            }
        }
        let cell_masses = cells
            .iter()
            .map(|cell| cell.iter().map(|&t| self.types[t].mass.clone()).sum())
            .collect();
        let residual_mass = residual.iter().map(|&t| self.types[t].mass.clone()).sum();
        DominancePartition {
            cells,
            residual,
            cell_masses,
            residual_mass,
        }
    }

    /// Collapses firm `i`'s cell to its one-dimensional monopoly market of
    /// willingness gaps, masses aggregated over types sharing a gap. The
    /// result keeps the cell's unnormalized mass.
    pub fn reduce_to_monopoly(
        &self,
        partition: &DominancePartition,
        firm: usize,
    ) -> Result<WMarket, EmptyCell> {
        let cell = partition.cell(firm);
        if cell.is_empty() {
            return Err(EmptyCell(firm));
        }
        let mut by_gap: BTreeMap<Rational, Rational> = BTreeMap::new();
        for &t in cell {
            let gap = self.willingness_gap(firm, t);
            let entry = by_gap.entry(gap).or_insert_with(Rational::zero);
            *entry += &self.types[t].mass;
        }
        let points = by_gap
            .into_iter()
            .map(|(gap, mass)| WPoint { gap, mass })
            .collect();
        Ok(WMarket::new(self.costs[firm].clone(), points)
            .expect("cell reduction satisfies WMarket invariants"))
    }
}

/// Assignment of every type index to exactly one firm cell or the residual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominancePartition {
    cells: Vec<Vec<usize>>,
    residual: Vec<usize>,
    cell_masses: Vec<Rational>,
    residual_mass: Rational,
}

impl DominancePartition {
    pub fn cell(&self, firm: usize) -> &[usize] {
        &self.cells[firm]
    }

    pub fn residual(&self) -> &[usize] {
        &self.residual
    }

    pub fn cell_mass(&self, firm: usize) -> &Rational {
        &self.cell_masses[firm]
    }

    pub fn residual_mass(&self) -> &Rational {
        &self.residual_mass
    }

    pub fn firm_count(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("EmptyCell: firm {0} has no dominated types")]
pub struct EmptyCell(pub usize);

/// One gap value with its aggregated consumer mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WPoint {
    pub gap: Rational,
    pub mass: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WMarketError {
    #[error("gap list is empty")]
    Empty,
    #[error("gap {gap} is at or below cost {cost}")]
    GapAtOrBelowCost { gap: Rational, cost: Rational },
    #[error("gaps must be strictly increasing")]
    UnsortedGaps,
    #[error("gap {gap} has non-positive mass {mass}")]
    NonPositiveMass { gap: Rational, mass: Rational },
}

/// A one-dimensional monopoly market: the owning firm's cost plus a sorted
/// list of willingness-gap points, all strictly above cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WMarket {
    cost: Rational,
    points: Vec<WPoint>,
    total_mass: Rational,
}

/// Revenue-maximizing uniform price of a [`WMarket`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonopolyOptimum {
    pub price: Rational,
    pub profit: Rational,
}

impl WMarket {
    pub fn new(cost: Rational, points: Vec<WPoint>) -> Result<Self, WMarketError> {
        if points.is_empty() {
            return Err(WMarketError::Empty);
        }
        for pair in points.windows(2) {
            if pair[0].gap >= pair[1].gap {
                return Err(WMarketError::UnsortedGaps);
            }
        }
        for p in &points {
            if p.gap <= cost {
                return Err(WMarketError::GapAtOrBelowCost {
                    gap: p.gap.clone(),
                    cost: cost.clone(),
                });
            }
            if p.mass <= Rational::zero() {
                return Err(WMarketError::NonPositiveMass {
                    gap: p.gap.clone(),
                    mass: p.mass.clone(),
                });
            }
        }
        let total_mass = points.iter().map(|p| p.mass.clone()).sum();
        Ok(WMarket {
            cost,
            points,
            total_mass,
        })
    }

    pub fn cost(&self) -> &Rational {
        &self.cost
    }

    pub fn points(&self) -> &[WPoint] {
        &self.points
    }

    pub fn total_mass(&self) -> &Rational {
        &self.total_mass
    }

    pub fn support(&self) -> Vec<Rational> {
        self.points.iter().map(|p| p.gap.clone()).collect()
    }

    /// Mass of consumers with gap at least `price`: a weakly decreasing,
    /// left-continuous step function of the price.
    pub fn demand(&self, price: &Rational) -> Rational {
        self.points
            .iter()
            .filter(|p| &p.gap >= price)
            .map(|p| p.mass.clone())
            .sum()
    }

    /// `(price - cost) * demand(price)`.
    pub fn revenue(&self, price: &Rational) -> Rational {
        (price - &self.cost) * self.demand(price)
    }

    /// Maximizes `(p - cost) * demand(p)`. Revenue rises linearly between
    /// support points and demand only drops past them, so an optimum sits
    /// on a support point; ties resolve to the smallest optimal price.
    pub fn uniform_monopoly_price(&self) -> MonopolyOptimum {
        let mut best: Option<MonopolyOptimum> = None;
        for p in &self.points {
            let profit = self.revenue(&p.gap);
            match &best {
                Some(b) if profit <= b.profit => {}
                _ => {
                    best = Some(MonopolyOptimum {
                        price: p.gap.clone(),
                        profit,
                    })
                }
            }
        }
        best.expect("WMarket is nonempty")
    }
}
