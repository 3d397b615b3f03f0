//! Assembles the consumer-optimal public segmentation over type space, the
//! pure equilibrium it supports, and full surplus accounting.
//!
//! Each firm cell is reduced to its gap market, decomposed greedily, and the
//! gap segments are lifted back to type space by preserving the cell's
//! conditional type distribution at every gap value. Types sharing a gap
//! split that gap's segment mass in proportion to their prior masses, so
//! recombination to the parent market is exact and every equilibrium object,
//! which depends on types only through gaps, is unaffected by the split.

use crate::extremal::{greedy_decompose, WSegmentation};
use crate::market::{DominancePartition, Market};
use crate::rational::Rational;
use crate::verifier::{CandidateSegment, PublicEquilibriumCandidate, TiePolicy};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Who a segment serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentOwner {
    /// Every type in the segment is dominated by this firm.
    Firm(usize),
    /// The residual: types whose best surplus is shared by several firms.
    Residual,
}

impl SegmentOwner {
    pub fn firm(&self) -> Option<usize> {
        match self {
            SegmentOwner::Firm(i) => Some(*i),
            SegmentOwner::Residual => None,
        }
    }
}

/// One public segment: a weight and a conditional distribution over the
/// parent's types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSegment {
    pub weight: Rational,
    /// Conditional mass per type index; sums to one.
    pub composition: Vec<Rational>,
    pub owner: SegmentOwner,
}

/// A firm's slice of the design: its cell reduced, priced, and decomposed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirmPlan {
    pub firm: usize,
    pub star_price: Rational,
    pub star_profit: Rational,
    pub w_segmentation: WSegmentation,
}

/// The designed public segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaStar {
    parent: Market,
    partition: DominancePartition,
    segments: Vec<TypeSegment>,
    plans: Vec<Option<FirmPlan>>,
}

impl SigmaStar {
    pub fn parent(&self) -> &Market {
        &self.parent
    }

    pub fn partition(&self) -> &DominancePartition {
        &self.partition
    }

    pub fn segments(&self) -> &[TypeSegment] {
        &self.segments
    }

    /// Per-firm plan; `None` when the firm's cell is empty.
    pub fn plans(&self) -> &[Option<FirmPlan>] {
        &self.plans
    }

    /// The candidate form of this design under the given equilibrium,
    /// ready for independent verification.
    pub fn to_candidate(&self, outcome: &EquilibriumOutcome) -> PublicEquilibriumCandidate {
        let segments = self
            .segments
            .iter()
            .zip(&outcome.segments)
            .map(|(seg, out)| CandidateSegment {
                weight: seg.weight.clone(),
                composition: seg.composition.clone(),
                owner: seg.owner.firm(),
                prices: out.prices.clone(),
            })
            .collect();
        PublicEquilibriumCandidate {
            segments,
            tie_policy: TiePolicy::FavorOwner,
        }
    }
}

/// Designs the segmentation: for every firm with a nonempty cell, reduce to
/// the gap market, take the uniform monopoly price, decompose greedily, and
/// lift; append one residual segment if the residual has mass. Segments are
/// ordered by firm index, greedy emission order within a firm, residual
/// last.
pub fn design_sigma_star(market: &Market) -> SigmaStar {
    let partition = market.partition_by_dominance();
    let mut segments = Vec::new();
    let mut plans = Vec::with_capacity(market.firm_count());

    for firm in 0..market.firm_count() {
        let Ok(wm) = market.reduce_to_monopoly(&partition, firm) else {
            plans.push(None);
            continue;
        };
        let optimum = wm.uniform_monopoly_price();
        let ws = greedy_decompose(&wm, &optimum.price)
            .expect("uniform monopoly price is optimal by construction");

        // prior mass of cell types at each gap value, for the lift
        let mut gap_mass: BTreeMap<Rational, Rational> = BTreeMap::new();
        for &t in partition.cell(firm) {
            let gap = market.willingness_gap(firm, t);
            *gap_mass.entry(gap).or_insert_with(Rational::zero) += &market.types()[t].mass;
        }

        for seg in ws.segments() {
            let mut composition = vec![Rational::zero(); market.type_count()];
            for &t in partition.cell(firm) {
                let gap = market.willingness_gap(firm, t);
                let share = &market.types()[t].mass / &gap_mass[&gap];
                composition[t] = seg.market.mass_at(&gap) * share;
            }
            segments.push(TypeSegment {
                weight: seg.weight.clone(),
                composition,
                owner: SegmentOwner::Firm(firm),
            });
        }

        plans.push(Some(FirmPlan {
            firm,
            star_price: optimum.price,
            star_profit: optimum.profit,
            w_segmentation: ws,
        }));
    }

    if partition.residual_mass() > &Rational::zero() {
        let mut composition = vec![Rational::zero(); market.type_count()];
        for &t in partition.residual() {
            composition[t] = &market.types()[t].mass / partition.residual_mass();
        }
        segments.push(TypeSegment {
            weight: partition.residual_mass().clone(),
            composition,
            owner: SegmentOwner::Residual,
        });
    }

    SigmaStar {
        parent: market.clone(),
        partition,
        segments,
        plans,
    }
}

/// Exact recombination: weighted compositions must average back to the
/// parent type masses.
pub fn check_plausibility(sigma: &SigmaStar) -> bool {
    (0..sigma.parent.type_count()).all(|t| {
        let recombined: Rational = sigma
            .segments
            .iter()
            .map(|s| &s.weight * &s.composition[t])
            .sum();
        recombined == sigma.parent.types()[t].mass
    })
}

/// Equilibrium play in one segment: a price per firm and each live type's
/// purchase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentOutcome {
    pub prices: Vec<Rational>,
    /// `(type index, firm bought from)` for every type with positive mass.
    pub purchases: Vec<(usize, usize)>,
}

/// The supported equilibrium across all segments, with surplus accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumOutcome {
    pub segments: Vec<SegmentOutcome>,
    pub firm_profits: Vec<Rational>,
    pub consumer_surplus: Rational,
    pub total_surplus: Rational,
    pub efficient: bool,
}

/// Plays the supported equilibrium: in an owned segment the owner charges
/// the lowest gap present, everyone else charges cost, and all types buy
/// from the owner (ties break its way). In the residual segment every firm
/// charges cost and each type buys from its lowest-index surplus-maximizing
/// firm.
pub fn supported_equilibrium(sigma: &SigmaStar) -> EquilibriumOutcome {
    let market = sigma.parent();
    let firms = market.firm_count();
    let mut firm_profits = vec![Rational::zero(); firms];
    let mut consumer_surplus = Rational::zero();
    let mut outcomes = Vec::with_capacity(sigma.segments().len());

    for seg in sigma.segments() {
        let live: Vec<usize> = (0..market.type_count())
            .filter(|&t| seg.composition[t] > Rational::zero())
            .collect();
        let mut prices: Vec<Rational> = market.costs().to_vec();
        let mut purchases = Vec::with_capacity(live.len());

        match seg.owner {
            SegmentOwner::Firm(owner) => {
                let price = live
                    .iter()
                    .map(|&t| market.willingness_gap(owner, t))
                    .min()
                    .expect("owned segments are nonempty");
                debug_assert!(revenue_matches_star(sigma, seg, owner, &price));
                prices[owner] = price.clone();
                let margin = &price - market.cost(owner);
                for &t in &live {
                    purchases.push((t, owner));
                    firm_profits[owner] += &seg.weight * &seg.composition[t] * &margin;
                    consumer_surplus += &seg.weight
                        * &seg.composition[t]
                        * (&market.types()[t].values[owner] - &price);
                }
            }
            SegmentOwner::Residual => {
                for &t in &live {
                    let best = (0..firms)
                        .map(|i| market.surplus(i, t))
                        .max()
                        .expect("at least two firms");
                    let choice = (0..firms)
                        .find(|&i| market.surplus(i, t) == best)
                        .expect("maximum is attained");
                    purchases.push((t, choice));
                    consumer_surplus += &seg.weight * &seg.composition[t] * best;
                }
            }
        }
        outcomes.push(SegmentOutcome { prices, purchases });
    }

    let total_surplus = firm_profits.iter().cloned().sum::<Rational>() + &consumer_surplus;
    let efficient = total_surplus == market.efficient_surplus();
    EquilibriumOutcome {
        segments: outcomes,
        firm_profits,
        consumer_surplus,
        total_surplus,
        efficient,
    }
}

/// Charging the cell's uniform monopoly price inside this segment earns the
/// same revenue as the lowest gap: both are optimal support prices.
fn revenue_matches_star(
    sigma: &SigmaStar,
    seg: &TypeSegment,
    owner: usize,
    low_price: &Rational,
) -> bool {
    let market = sigma.parent();
    let star = &sigma.plans()[owner]
        .as_ref()
        .expect("owner has a plan")
        .star_price;
    let cost = market.cost(owner);
    let star_demand: Rational = (0..market.type_count())
        .filter(|&t| {
            seg.composition[t] > Rational::zero() && &market.willingness_gap(owner, t) >= star
        })
        .map(|t| seg.composition[t].clone())
        .sum();
    (low_price - cost) == (star - cost) * star_demand
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::tests::{horizontal_market, vertical_market};
    use crate::market::ConsumerType;
    use crate::rational::{rat, rat_int};
    use crate::testgen;
    use crate::verifier::verify_public_equilibrium;
    use proptest::prelude::*;

    #[test]
    fn vertical_design_matches_worked_segmentation() {
        let m = vertical_market();
        let sigma = design_sigma_star(&m);
        assert_eq!(sigma.segments().len(), 2);

        let first = &sigma.segments()[0];
        assert_eq!(first.weight, rat(3, 4));
        assert_eq!(first.composition, vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(first.owner, SegmentOwner::Firm(0));

        let second = &sigma.segments()[1];
        assert_eq!(second.weight, rat(1, 4));
        assert_eq!(second.composition, vec![rat_int(1), rat_int(0)]);

        let plan = sigma.plans()[0].as_ref().unwrap();
        assert_eq!(plan.star_price, rat_int(6));
        assert_eq!(plan.star_profit, rat_int(3));
        assert!(sigma.plans()[1].is_none());
    }

    #[test]
    fn horizontal_design_matches_worked_segmentation() {
        let m = horizontal_market();
        let sigma = design_sigma_star(&m);
        let rows: Vec<(Rational, Vec<Rational>)> = sigma
            .segments()
            .iter()
            .map(|s| (s.weight.clone(), s.composition.clone()))
            .collect();
        let expected: Vec<(Rational, Vec<Rational>)> = vec![
            (
                rat(3, 8),
                vec![rat(1, 3), rat(2, 3), rat_int(0), rat_int(0)],
            ),
            (
                rat(1, 8),
                vec![rat_int(1), rat_int(0), rat_int(0), rat_int(0)],
            ),
            (
                rat(1, 8),
                vec![rat_int(0), rat_int(0), rat_int(0), rat_int(1)],
            ),
            (
                rat(3, 8),
                vec![rat_int(0), rat_int(0), rat(2, 3), rat(1, 3)],
            ),
        ];
        // same four segments, independent of emission order
        for row in &expected {
            assert!(rows.contains(row), "missing segment {row:?}");
        }
        assert_eq!(rows.len(), expected.len());
    }

    #[test]
    fn single_type_market_designs_one_point_segment() {
        let m = Market::new(
            vec![rat_int(0), rat_int(0)],
            vec![ConsumerType::new(vec![rat_int(4), rat_int(1)], rat_int(1))],
            rat_int(4),
        )
        .unwrap();
        let sigma = design_sigma_star(&m);
        assert_eq!(sigma.segments().len(), 1);
        assert_eq!(sigma.segments()[0].weight, rat_int(1));
        assert_eq!(sigma.segments()[0].composition, vec![rat_int(1)]);

        let eq = supported_equilibrium(&sigma);
        assert_eq!(eq.segments[0].prices, vec![rat_int(3), rat_int(0)]);
        assert_eq!(eq.firm_profits, vec![rat_int(3), rat_int(0)]);
        assert_eq!(eq.consumer_surplus, rat_int(1));
    }

    #[test]
    fn vertical_equilibrium_prices_profits_and_surplus() {
        let m = vertical_market();
        let sigma = design_sigma_star(&m);
        let eq = supported_equilibrium(&sigma);
        assert_eq!(eq.segments[0].prices, vec![rat_int(2), rat_int(0)]);
        assert_eq!(eq.segments[1].prices, vec![rat_int(6), rat_int(0)]);
        assert_eq!(eq.firm_profits, vec![rat_int(3), rat_int(0)]);
        assert_eq!(eq.consumer_surplus, rat_int(2));
        assert_eq!(eq.total_surplus, rat_int(5));
        assert!(eq.efficient);
        assert!(eq
            .segments
            .iter()
            .all(|s| s.purchases.iter().all(|&(_, firm)| firm == 0)));
    }

    #[test]
    fn horizontal_equilibrium_profits_and_surplus() {
        let m = horizontal_market();
        let sigma = design_sigma_star(&m);
        let eq = supported_equilibrium(&sigma);
        assert_eq!(eq.firm_profits, vec![rat(3, 2), rat(3, 2)]);
        assert_eq!(eq.consumer_surplus, rat_int(2));
        assert!(eq.efficient);
    }

    #[test]
    fn residual_segment_sells_at_cost() {
        let m = Market::new(
            vec![rat_int(0), rat_int(0)],
            vec![
                ConsumerType::new(vec![rat_int(4), rat_int(2)], rat(1, 3)),
                ConsumerType::new(vec![rat_int(2), rat_int(4)], rat(1, 3)),
                ConsumerType::new(vec![rat_int(3), rat_int(3)], rat(1, 3)),
            ],
            rat_int(4),
        )
        .unwrap();
        let sigma = design_sigma_star(&m);
        let residual = sigma
            .segments()
            .iter()
            .find(|s| s.owner == SegmentOwner::Residual)
            .unwrap();
        assert_eq!(residual.weight, rat(1, 3));
        assert_eq!(
            residual.composition,
            vec![rat_int(0), rat_int(0), rat_int(1)]
        );

        let eq = supported_equilibrium(&sigma);
        let last = eq.segments.last().unwrap();
        assert_eq!(last.prices, vec![rat_int(0), rat_int(0)]);
        // tied type buys from the lowest-index maximizer
        assert_eq!(last.purchases, vec![(2, 0)]);
        assert!(eq.efficient);
    }

    #[test]
    fn plausibility_holds_and_detects_perturbation() {
        let m = horizontal_market();
        let mut sigma = design_sigma_star(&m);
        assert!(check_plausibility(&sigma));
        sigma.segments[0].weight = &sigma.segments[0].weight / rat_int(2);
        assert!(!check_plausibility(&sigma));
    }

    #[test]
    fn designed_equilibrium_passes_independent_verification() {
        for m in [vertical_market(), horizontal_market()] {
            let sigma = design_sigma_star(&m);
            let eq = supported_equilibrium(&sigma);
            let candidate = sigma.to_candidate(&eq);
            let check = verify_public_equilibrium(&m, &candidate).unwrap();
            assert!(check.passed());
            assert_eq!(check.firm_profits, eq.firm_profits);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

        #[test]
        fn design_is_plausible_efficient_and_profit_exact(m in testgen::arb_market()) {
            let sigma = design_sigma_star(&m);
            prop_assert!(check_plausibility(&sigma));

            let eq = supported_equilibrium(&sigma);
            prop_assert!(eq.efficient);
            prop_assert_eq!(eq.total_surplus.clone(), m.efficient_surplus());
            prop_assert_eq!(
                eq.total_surplus.clone(),
                eq.firm_profits.iter().cloned().sum::<Rational>() + eq.consumer_surplus.clone()
            );

            // every firm earns exactly its uniform monopoly profit
            for (firm, plan) in sigma.plans().iter().enumerate() {
                match plan {
                    Some(p) => prop_assert_eq!(&eq.firm_profits[firm], &p.star_profit),
                    None => prop_assert!(eq.firm_profits[firm].is_zero()),
                }
            }

            // consumer surplus is the efficiency gain net of all profits
            let profit_total: Rational = eq.firm_profits.iter().cloned().sum();
            prop_assert_eq!(
                eq.consumer_surplus.clone(),
                m.efficient_surplus() - profit_total
            );
        }

        #[test]
        fn owned_segments_only_contain_cell_types(m in testgen::arb_market()) {
            let sigma = design_sigma_star(&m);
            let partition = sigma.partition().clone();
            for seg in sigma.segments() {
                match seg.owner {
                    SegmentOwner::Firm(i) => {
                        for (t, mass) in seg.composition.iter().enumerate() {
                            if mass > &Rational::zero() {
                                prop_assert!(partition.cell(i).contains(&t));
                            }
                        }
                    }
                    SegmentOwner::Residual => {
                        for (t, mass) in seg.composition.iter().enumerate() {
                            if mass > &Rational::zero() {
                                prop_assert!(partition.residual().contains(&t));
                            }
                        }
                    }
                }
            }
        }
    }
}
