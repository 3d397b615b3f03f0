//! Extremal monopoly markets and the greedy profit-preserving decomposition.
//!
//! An extremal market makes the seller indifferent across every support
//! price: with support `s_1 < ... < s_m` above cost `c`, indifference pins
//! the tail masses to `F_j = (s_1 - c) / (s_j - c)`, so the point masses are
//! `f_j = F_j - F_{j+1}` with `F_{m+1} = 0`. The greedy decomposition peels
//! off the largest multiple of the full-support extremal market that fits
//! under the residual, zeroing at least one support point per round; the
//! optimal price survives in the residual until exhaustion, so every emitted
//! segment keeps it optimal among its support.

use crate::market::{WMarket, WPoint};
use crate::rational::Rational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtremalError {
    #[error("support is empty")]
    EmptySupport,
    #[error("SupportAtOrBelowCost: support point {point} is at or below cost {cost}")]
    SupportAtOrBelowCost { point: Rational, cost: Rational },
    #[error("support must be strictly increasing")]
    UnsortedSupport,
    #[error("StarPriceNotOptimal: price {star} earns {revenue}, best is {best}")]
    StarPriceNotOptimal {
        star: Rational,
        revenue: Rational,
        best: Rational,
    },
}

/// A unit-mass monopoly market whose support coincides with its set of
/// optimal prices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalWMarket {
    cost: Rational,
    support: Vec<Rational>,
    masses: Vec<Rational>,
}

impl ExtremalWMarket {
    /// Builds the unique extremal market on the given support via the tail
    /// closed form.
    pub fn new(support: Vec<Rational>, cost: Rational) -> Result<Self, ExtremalError> {
        if support.is_empty() {
            return Err(ExtremalError::EmptySupport);
        }
        for pair in support.windows(2) {
            if pair[0] >= pair[1] {
                return Err(ExtremalError::UnsortedSupport);
            }
        }
        if support[0] <= cost {
            return Err(ExtremalError::SupportAtOrBelowCost {
                point: support[0].clone(),
                cost,
            });
        }
        let base = &support[0] - &cost;
        let tails: Vec<Rational> = support.iter().map(|s| &base / (s - &cost)).collect();
        let mut masses = Vec::with_capacity(support.len());
        for j in 0..support.len() {
            let next = tails.get(j + 1).cloned().unwrap_or_else(Rational::zero);
            masses.push(&tails[j] - next);
        }
        Ok(ExtremalWMarket {
            cost,
            support,
            masses,
        })
    }

    pub fn cost(&self) -> &Rational {
        &self.cost
    }

    pub fn support(&self) -> &[Rational] {
        &self.support
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// The revenue every support price earns: `s_1 - cost` on unit mass.
    pub fn revenue_level(&self) -> Rational {
        &self.support[0] - &self.cost
    }

    /// Mass at gaps `>= price`.
    pub fn tail_mass(&self, price: &Rational) -> Rational {
        self.support
            .iter()
            .zip(&self.masses)
            .filter(|(s, _)| *s >= price)
            .map(|(_, m)| m.clone())
            .sum()
    }

    pub fn mass_at(&self, gap: &Rational) -> Rational {
        self.support
            .iter()
            .position(|s| s == gap)
            .map(|j| self.masses[j].clone())
            .unwrap_or_else(Rational::zero)
    }

    /// `(price - cost) * tail_mass(price)`.
    pub fn revenue(&self, price: &Rational) -> Rational {
        (price - &self.cost) * self.tail_mass(price)
    }
}

/// One weighted extremal segment of a parent market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WSegment {
    pub weight: Rational,
    pub market: ExtremalWMarket,
}

/// A decomposition of a parent [`WMarket`] into extremal segments whose
/// weighted sum reproduces the parent exactly, each keeping `star_price`
/// optimal within its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WSegmentation {
    segments: Vec<WSegment>,
    parent: WMarket,
    star_price: Rational,
}

impl WSegmentation {
    pub fn segments(&self) -> &[WSegment] {
        &self.segments
    }

    pub fn parent(&self) -> &WMarket {
        &self.parent
    }

    pub fn star_price(&self) -> &Rational {
        &self.star_price
    }
}

/// Decomposes `wm` by repeatedly scaling the full-support extremal market of
/// the current residual as far as it fits. Each round zeroes at least one
/// support point, so the loop runs at most `wm.points().len()` times.
pub fn greedy_decompose(
    wm: &WMarket,
    star_price: &Rational,
) -> Result<WSegmentation, ExtremalError> {
    let best = wm.uniform_monopoly_price();
    let star_revenue = wm.revenue(star_price);
    if star_revenue != best.profit {
        return Err(ExtremalError::StarPriceNotOptimal {
            star: star_price.clone(),
            revenue: star_revenue,
            best: best.profit,
        });
    }

    let mut residual: Vec<WPoint> = wm.points().to_vec();
    let mut segments = Vec::new();
    while !residual.is_empty() {
        let support: Vec<Rational> = residual.iter().map(|p| p.gap.clone()).collect();
        let extremal = ExtremalWMarket::new(support, wm.cost().clone())
            .expect("residual support stays above cost");
        let weight = residual
            .iter()
            .zip(extremal.masses())
            .map(|(p, f)| &p.mass / f)
            .min()
            .expect("residual is nonempty");
        let mut next = Vec::with_capacity(residual.len());
        for (p, f) in residual.iter().zip(extremal.masses()) {
            let mass = &p.mass - &weight * f;
            debug_assert!(mass >= Rational::zero());
            if mass > Rational::zero() {
                next.push(WPoint {
                    gap: p.gap.clone(),
                    mass,
                });
            }
        }
        debug_assert!(next.len() < residual.len());
        segments.push(WSegment {
            weight,
            market: extremal,
        });
        residual = next;
        #[cfg(debug_assertions)]
        check_residual(&residual, wm, star_price);
    }

    Ok(WSegmentation {
        segments,
        parent: wm.clone(),
        star_price: star_price.clone(),
    })
}

/// Debug-mode loop invariant: the star price keeps positive residual mass
/// and stays revenue-optimal for the residual.
#[cfg(debug_assertions)]
fn check_residual(residual: &[WPoint], parent: &WMarket, star_price: &Rational) {
    if residual.is_empty() {
        return;
    }
    assert!(
        residual.iter().any(|p| &p.gap == star_price),
        "star price dropped from residual support"
    );
    let demand = |q: &Rational| -> Rational {
        residual
            .iter()
            .filter(|p| &p.gap >= q)
            .map(|p| p.mass.clone())
            .sum()
    };
    let star_rev = (star_price - parent.cost()) * demand(star_price);
    for p in residual {
        let rev = (&p.gap - parent.cost()) * demand(&p.gap);
        assert!(rev <= star_rev, "star price lost optimality in residual");
    }
}

/// A failed condition of an extremal segmentation, in check order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtremalViolation {
    StarNotInSupport {
        segment: usize,
    },
    UnequalSupportRevenue {
        segment: usize,
        price: Rational,
        revenue: Rational,
        level: Rational,
    },
    OffSupportImprovement {
        segment: usize,
        price: Rational,
        revenue: Rational,
        level: Rational,
    },
    MassSumMismatch {
        segment: usize,
        sum: Rational,
    },
    RecombinationMismatch {
        gap: Rational,
        recombined: Rational,
        expected: Rational,
    },
    WeightSumMismatch {
        total: Rational,
        expected: Rational,
    },
}

/// Outcome of [`verify_extremal_segmentation`]; `failures` lists every
/// violated condition in the order encountered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalCheck {
    pub failures: Vec<ExtremalViolation>,
}

impl ExtremalCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&ExtremalViolation> {
        self.failures.first()
    }
}

/// Re-checks a segmentation from the definitions, independently of how it
/// was built: per segment, equal revenue across the support, no better
/// revenue at any parent support point or the star price, star contained in
/// the support, unit mass; globally, segments recombine to the parent and
/// weights sum to the parent mass.
pub fn verify_extremal_segmentation(ws: &WSegmentation) -> ExtremalCheck {
    let mut failures = Vec::new();
    let parent = ws.parent();
    let star = ws.star_price();
    let cost = parent.cost();

    for (idx, seg) in ws.segments().iter().enumerate() {
        let y = &seg.market;
        if !y.support().contains(star) {
            failures.push(ExtremalViolation::StarNotInSupport { segment: idx });
        }
        let level = (star - cost) * y.tail_mass(star);
        for s in y.support() {
            let revenue = y.revenue(s);
            if revenue != level {
                failures.push(ExtremalViolation::UnequalSupportRevenue {
                    segment: idx,
                    price: s.clone(),
                    revenue,
                    level: level.clone(),
                });
            }
        }
        for point in parent.points() {
            let revenue = y.revenue(&point.gap);
            if revenue > level {
                failures.push(ExtremalViolation::OffSupportImprovement {
                    segment: idx,
                    price: point.gap.clone(),
                    revenue,
                    level: level.clone(),
                });
            }
        }
        let sum: Rational = y.masses().iter().cloned().sum();
        if !sum.is_one() {
            failures.push(ExtremalViolation::MassSumMismatch { segment: idx, sum });
        }
    }

    for point in parent.points() {
        let recombined: Rational = ws
            .segments()
            .iter()
            .map(|seg| &seg.weight * seg.market.mass_at(&point.gap))
            .sum();
        if recombined != point.mass {
            failures.push(ExtremalViolation::RecombinationMismatch {
                gap: point.gap.clone(),
                recombined,
                expected: point.mass.clone(),
            });
        }
    }

    let total: Rational = ws.segments().iter().map(|s| s.weight.clone()).sum();
    if &total != parent.total_mass() {
        failures.push(ExtremalViolation::WeightSumMismatch {
            total,
            expected: parent.total_mass().clone(),
        });
    }

    ExtremalCheck { failures }
}
