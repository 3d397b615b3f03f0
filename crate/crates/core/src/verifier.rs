//! Independent equilibrium verification, minimax profits, unsegmented pure
//! equilibrium search, and the segmented-vs-unsegmented profit comparison.
//!
//! Deviation search is exact: within a segment, a firm's profit as a
//! function of its own price is piecewise linear with kinks only at the
//! type-indifference prices `v_i - max_{j != i}(v_j - p_j)` (outside option
//! included among the rivals). Demand is constant strictly between kinks, so
//! the supremum over all prices equals the maximum over kinks `q` of
//! `(q - c_i) * mass{types with kink >= q}` — the left limit at `q`, which
//! is approached by prices just below `q` regardless of how ties break.

use crate::market::Market;
use crate::rational::Rational;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

/// How consumers resolve indifference. Off ties, sequential rationality
/// pins the choice. On ties, firms are always preferred to the outside
/// option; among tied firms the policy decides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TiePolicy {
    /// Buy from the segment owner when tied (lowest index if the segment
    /// has no owner).
    FavorOwner,
    /// Buy from the lowest-index tied firm.
    LowestIndex,
    /// Never resolve a tie toward the given firm; lowest-index otherwise,
    /// falling back to the outside option when only that firm is tied
    /// with it.
    NeverFavor(usize),
}

impl TiePolicy {
    pub fn label(&self) -> String {
        match self {
            TiePolicy::FavorOwner => "favor-owner".to_string(),
            TiePolicy::LowestIndex => "lowest-index".to_string(),
            TiePolicy::NeverFavor(i) => format!("never-favor:{i}"),
        }
    }
}

/// One segment of a candidate: a conditional type distribution, its weight,
/// an optional owning firm, and one listed price per firm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSegment {
    pub weight: Rational,
    pub composition: Vec<Rational>,
    pub owner: Option<usize>,
    pub prices: Vec<Rational>,
}

/// A public segmentation with listed prices, to be certified as an
/// equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicEquilibriumCandidate {
    pub segments: Vec<CandidateSegment>,
    pub tie_policy: TiePolicy,
}

impl PublicEquilibriumCandidate {
    /// The unsegmented market as a single-segment candidate at the given
    /// price profile.
    pub fn unsegmented(market: &Market, prices: Vec<Rational>, tie_policy: TiePolicy) -> Self {
        PublicEquilibriumCandidate {
            segments: vec![CandidateSegment {
                weight: Rational::one(),
                composition: market.types().iter().map(|t| t.mass.clone()).collect(),
                owner: None,
                prices,
            }],
            tie_policy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifierError {
    #[error("MalformedCandidate: {0}")]
    MalformedCandidate(String),
    #[error("UnverifiedBenchmark: price profile is not an unsegmented equilibrium")]
    UnverifiedBenchmark,
    #[error("NonpositiveBenchmarkProfit: firm {firm} earns {profit} in the benchmark")]
    NonpositiveBenchmarkProfit { firm: usize, profit: Rational },
}

/// Deviation audit for one firm in one segment. Profits are weight-scaled,
/// so summing `listed_profit` over segments gives the firm's total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationCell {
    pub segment: usize,
    pub firm: usize,
    pub listed_price: Rational,
    pub listed_profit: Rational,
    pub best_price: Rational,
    pub best_profit: Rational,
    pub improves: bool,
}

/// Full audit of a candidate: one cell per (segment, firm).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumCheck {
    pub cells: Vec<DeviationCell>,
    pub firm_profits: Vec<Rational>,
}

impl EquilibriumCheck {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| !c.improves)
    }

    pub fn first_improvement(&self) -> Option<&DeviationCell> {
        self.cells.iter().find(|c| c.improves)
    }
}

/// The firm (or outside option, `None`) a type buys from at the given
/// prices under a tie policy.
fn consumer_choice(
    market: &Market,
    prices: &[Rational],
    policy: &TiePolicy,
    owner: Option<usize>,
    type_index: usize,
) -> Option<usize> {
    let ty = &market.types()[type_index];
    let mut best = Rational::zero(); // outside option
    for (j, price) in prices.iter().enumerate() {
        let s = &ty.values[j] - price;
        if s > best {
            best = s;
        }
    }
    let tied: Vec<usize> = (0..market.firm_count())
        .filter(|&j| &ty.values[j] - &prices[j] == best)
        .collect();
    match policy {
        TiePolicy::FavorOwner => match owner {
            Some(o) if tied.contains(&o) => Some(o),
            _ => tied.first().copied(),
        },
        TiePolicy::LowestIndex => tied.first().copied(),
        TiePolicy::NeverFavor(i) => {
            let other = tied.iter().find(|&&j| j != *i).copied();
            match other {
                Some(j) => Some(j),
                None if best.is_zero() => None, // outside is tied, take it
                None => tied.first().copied(),  // strict winner, no tie
            }
        }
    }
}

fn validate_candidate(
    market: &Market,
    candidate: &PublicEquilibriumCandidate,
) -> Result<(), VerifierError> {
    let malformed = |msg: String| Err(VerifierError::MalformedCandidate(msg));
    let firms = market.firm_count();
    let k = market.type_count();
    if candidate.segments.is_empty() {
        return malformed("no segments".into());
    }
    if let TiePolicy::NeverFavor(i) = candidate.tie_policy {
        if i >= firms {
            return malformed(format!("tie policy names firm {i}, market has {firms}"));
        }
    }
    for (idx, seg) in candidate.segments.iter().enumerate() {
        if seg.weight <= Rational::zero() {
            return malformed(format!("segment {idx} has non-positive weight"));
        }
        if seg.composition.len() != k {
            return malformed(format!(
                "segment {idx} has {} composition entries, market has {k} types",
                seg.composition.len()
            ));
        }
        if seg.composition.iter().any(|c| c < &Rational::zero()) {
            return malformed(format!("segment {idx} has a negative composition entry"));
        }
        let sum: Rational = seg.composition.iter().cloned().sum();
        if !sum.is_one() {
            return malformed(format!(
                "segment {idx} composition sums to {sum}, expected 1"
            ));
        }
        if seg.prices.len() != firms {
            return malformed(format!(
                "segment {idx} lists {} prices, market has {firms} firms",
                seg.prices.len()
            ));
        }
        for (j, p) in seg.prices.iter().enumerate() {
            if p < market.cost(j) {
                return malformed(format!(
                    "segment {idx} prices firm {j} at {p}, below cost {}",
                    market.cost(j)
                ));
            }
            // pricing at cost stays legal even when cost exceeds the cap
            if p > market.value_cap() && p > market.cost(j) {
                return malformed(format!(
                    "segment {idx} prices firm {j} at {p}, above the value cap {}",
                    market.value_cap()
                ));
            }
        }
        if let Some(o) = seg.owner {
            if o >= firms {
                return malformed(format!("segment {idx} owner {o} out of range"));
            }
        }
    }
    // weighted compositions must average back to the parent market
    for t in 0..k {
        let recombined: Rational = candidate
            .segments
            .iter()
            .map(|s| &s.weight * &s.composition[t])
            .sum();
        if recombined != market.types()[t].mass {
            return malformed(format!(
                "segments recombine to {recombined} on type {t}, market has {}",
                market.types()[t].mass
            ));
        }
    }
    Ok(())
}

/// Certifies a candidate: in every segment, no firm can strictly gain at
/// any price given the others' listed prices and the consumer's tie policy.
/// Passes iff no (segment, firm) cell improves.
pub fn verify_public_equilibrium(
    market: &Market,
    candidate: &PublicEquilibriumCandidate,
) -> Result<EquilibriumCheck, VerifierError> {
    validate_candidate(market, candidate)?;
    let firms = market.firm_count();
    let mut cells = Vec::new();

    for (s_idx, seg) in candidate.segments.iter().enumerate() {
        let live: Vec<usize> = (0..market.type_count())
            .filter(|&t| seg.composition[t] > Rational::zero())
            .collect();
        for i in 0..firms {
            let cost = market.cost(i);
            // profit at the listed price, under the tie policy
            let mut sold = Rational::zero();
            for &t in &live {
                if consumer_choice(market, &seg.prices, &candidate.tie_policy, seg.owner, t)
                    == Some(i)
                {
                    sold += &seg.composition[t];
                }
            }
            let listed_profit = &seg.weight * (&seg.prices[i] - cost) * sold;

            // kink prices: where some type becomes indifferent to its best
            // alternative (rival firms and the outside option)
            let mut kinks: Vec<(usize, Rational)> = Vec::with_capacity(live.len());
            for &t in &live {
                let ty = &market.types()[t];
                let mut best_other = Rational::zero();
                for j in 0..firms {
                    if j != i {
                        let s = &ty.values[j] - &seg.prices[j];
                        if s > best_other {
                            best_other = s;
                        }
                    }
                }
                kinks.push((t, &ty.values[i] - best_other));
            }
            let mut candidates: BTreeSet<Rational> = kinks
                .iter()
                .map(|(_, q)| q.clone())
                .filter(|q| q > cost)
                .collect();
            candidates.insert(cost.clone());

            let mut best_price = cost.clone();
            let mut best_profit = Rational::zero();
            for q in candidates {
                // left-limit demand: every type whose kink is >= q buys at
                // prices just below q
                let demand: Rational = kinks
                    .iter()
                    .filter(|(_, k)| k >= &q)
                    .map(|(t, _)| seg.composition[*t].clone())
                    .sum();
                let profit = &seg.weight * (&q - cost) * demand;
                if profit > best_profit {
                    best_profit = profit;
                    best_price = q;
                }
            }

            // any tie-respecting sale at the listed price is bounded by the
            // left limit at the next kink
            debug_assert!(best_profit >= listed_profit);
            cells.push(DeviationCell {
                segment: s_idx,
                firm: i,
                listed_price: seg.prices[i].clone(),
                improves: best_profit > listed_profit,
                listed_profit,
                best_price,
                best_profit,
            });
        }
    }

    let mut firm_profits = vec![Rational::zero(); firms];
    for cell in &cells {
        firm_profits[cell.firm] += &cell.listed_profit;
    }
    Ok(EquilibriumCheck {
        cells,
        firm_profits,
    })
}

/// A firm's guaranteed profit floor and the price achieving it (as a left
/// limit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxEntry {
    pub firm: usize,
    pub minimax_profit: Rational,
    pub witness_price: Rational,
}

/// The largest profit firm `i` can secure against any segmentation, rivals
/// pricing at cost, and adversarial tie-breaking: the supremum over `p` of
/// `(p - c_i)` times the mass strictly preferring `i` at price `p`. With
/// finitely many gap values the supremum is attained in the left limit at a
/// gap `g > c_i`, where strict demand reaches the mass of gaps `>= g`.
pub fn minimax_profit(market: &Market, firm: usize) -> MinimaxEntry {
    let cost = market.cost(firm);
    let gaps: Vec<Rational> = (0..market.type_count())
        .map(|t| market.willingness_gap(firm, t))
        .collect();
    let distinct: BTreeSet<Rational> = gaps.iter().filter(|g| *g > cost).cloned().collect();

    let mut best_profit = Rational::zero();
    let mut witness = cost.clone();
    for g in distinct {
        let mass: Rational = gaps
            .iter()
            .zip(market.types())
            .filter(|(gap, _)| *gap >= &g)
            .map(|(_, ty)| ty.mass.clone())
            .sum();
        let profit = (&g - cost) * mass;
        if profit > best_profit {
            best_profit = profit;
            witness = g;
        }
    }

    // cross-check against the cell reduction: the guarantee must equal the
    // uniform monopoly profit on a nonempty cell and vanish on an empty one
    let partition = market.partition_by_dominance();
    match market.reduce_to_monopoly(&partition, firm) {
        Ok(wm) => {
            let opt = wm.uniform_monopoly_price();
            assert_eq!(
                best_profit, opt.profit,
                "minimax must equal the uniform monopoly profit on firm {firm}'s cell"
            );
        }
        Err(_) => {
            assert!(
                best_profit.is_zero(),
                "minimax must vanish for firm {firm} with an empty cell"
            );
        }
    }

    MinimaxEntry {
        firm,
        minimax_profit: best_profit,
        witness_price: witness,
    }
}

/// [`minimax_profit`] for every firm.
pub fn minimax_report(market: &Market) -> Vec<MinimaxEntry> {
    (0..market.firm_count())
        .map(|i| minimax_profit(market, i))
        .collect()
}

/// A verified pure-strategy uniform-price equilibrium of the unsegmented
/// market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsegmentedEquilibrium {
    pub prices: Vec<Rational>,
    pub tie_policy: TiePolicy,
    pub profits: Vec<Rational>,
}

/// Exhaustive pure-equilibrium search over per-firm candidate price grids:
/// costs, every own valuation, and one pass of pairwise indifference prices
/// `v_i - (v_j - p_j)` with `p_j` from the base grid, clamped to
/// `[c_i, cap]`. Each profile is checked under the lowest-index policy and
/// each never-favor policy; the first passing policy is reported. An empty
/// result means no pure equilibrium lies on the grid (the market may admit
/// only mixed equilibria).
pub fn find_unsegmented_pure_equilibria(market: &Market) -> Vec<UnsegmentedEquilibrium> {
    let firms = market.firm_count();
    let cap = market.value_cap();

    let base: Vec<BTreeSet<Rational>> = (0..firms)
        .map(|i| {
            let mut g: BTreeSet<Rational> = market
                .types()
                .iter()
                .map(|t| t.values[i].clone())
                .filter(|v| v >= market.cost(i) && v <= cap)
                .collect();
            g.insert(market.cost(i).clone());
            g
        })
        .collect();

    let grids: Vec<Vec<Rational>> = (0..firms)
        .map(|i| {
            let mut g = base[i].clone();
            for t in market.types() {
                for (j, other_base) in base.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    for p in other_base {
                        let q = &t.values[i] - (&t.values[j] - p);
                        if &q >= market.cost(i) && &q <= cap {
                            g.insert(q);
                        }
                    }
                }
            }
            g.into_iter().collect()
        })
        .collect();

    let mut policies = vec![TiePolicy::LowestIndex];
    policies.extend((0..firms).map(TiePolicy::NeverFavor));

    let mut found = Vec::new();
    let mut indices = vec![0usize; firms];
    loop {
        let prices: Vec<Rational> = indices
            .iter()
            .enumerate()
            .map(|(i, &k)| grids[i][k].clone())
            .collect();
        for policy in &policies {
            let candidate =
                PublicEquilibriumCandidate::unsegmented(market, prices.clone(), policy.clone());
            let check = verify_public_equilibrium(market, &candidate)
                .expect("unsegmented candidate is well-formed");
            if check.passed() {
                found.push(UnsegmentedEquilibrium {
                    prices: prices.clone(),
                    tie_policy: policy.clone(),
                    profits: check.firm_profits,
                });
                break;
            }
        }
        // advance the profile index odometer, last firm fastest
        let mut pos = firms;
        loop {
            if pos == 0 {
                return found;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < grids[pos].len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

/// Per-firm line of the benchmark comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub firm: usize,
    pub benchmark_profit: Rational,
    pub segmented_profit: Rational,
    pub strictly_worse: bool,
}

/// Outcome of [`compare_against_benchmark`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkComparison {
    /// `min_{types, firms} (v_i - c_i)`: the floor on pairwise trade surplus.
    pub surplus_floor: Rational,
    /// The comparison is only guaranteed when the floor is positive.
    pub floor_positive: bool,
    pub rows: Vec<ComparisonRow>,
    /// All firms strictly worse off under the segmentation; only asserted
    /// when `floor_positive`.
    pub all_strictly_worse: bool,
}

/// Compares a verified unsegmented benchmark against the segmented profits.
/// Requires every benchmark profit strictly positive and the benchmark to
/// re-verify; when the pairwise surplus floor is positive, every firm must
/// be strictly worse off under the segmentation.
pub fn compare_against_benchmark(
    market: &Market,
    benchmark: &UnsegmentedEquilibrium,
    segmented_profits: &[Rational],
) -> Result<BenchmarkComparison, VerifierError> {
    let candidate = PublicEquilibriumCandidate::unsegmented(
        market,
        benchmark.prices.clone(),
        benchmark.tie_policy.clone(),
    );
    let check = verify_public_equilibrium(market, &candidate)?;
    for (firm, profit) in check.firm_profits.iter().enumerate() {
        if profit <= &Rational::zero() {
            return Err(VerifierError::NonpositiveBenchmarkProfit {
                firm,
                profit: profit.clone(),
            });
        }
    }
    if !check.passed() {
        return Err(VerifierError::UnverifiedBenchmark);
    }

    let surplus_floor = (0..market.type_count())
        .flat_map(|t| (0..market.firm_count()).map(move |i| (i, t)))
        .map(|(i, t)| market.surplus(i, t))
        .min()
        .expect("market has types and firms");
    let floor_positive = surplus_floor > Rational::zero();

    let rows: Vec<ComparisonRow> = check
        .firm_profits
        .iter()
        .zip(segmented_profits)
        .enumerate()
        .map(|(firm, (bench, seg))| ComparisonRow {
            firm,
            benchmark_profit: bench.clone(),
            segmented_profit: seg.clone(),
            strictly_worse: bench > seg,
        })
        .collect();
    let all_strictly_worse = rows.iter().all(|r| r.strictly_worse);

    Ok(BenchmarkComparison {
        surplus_floor,
        floor_positive,
        rows,
        all_strictly_worse,
    })
}
