//! Proptest strategies for random valid markets, shared by the unit tests.

use crate::market::{ConsumerType, Market};
use crate::rational::{rat, rat_int, Rational};
use num_traits::Zero;
use proptest::prelude::*;

/// Raw ingredients for one market: cost numerators, per-type value
/// numerators, and mass weights, over a shared denominator. Half the draws
/// use a coarse lattice (denominator 2) so surplus ties and shared gap
/// values show up often; the rest use denominator 12.
fn arb_raw(
    max_firms: usize,
    max_types: usize,
) -> impl Strategy<Value = (i64, Vec<i32>, Vec<Vec<i32>>, Vec<u32>)> {
    (2usize..=max_firms, 1usize..=max_types, prop::bool::ANY).prop_flat_map(
        |(firms, types, coarse)| {
            let (den, value, cost) = if coarse {
                (2i64, -8..=24i32, 0..=4i32)
            } else {
                (12i64, -24..=120i32, 0..=24i32)
            };
            (
                Just(den),
                prop::collection::vec(cost, firms),
                prop::collection::vec(prop::collection::vec(value, firms), types),
                prop::collection::vec(1u32..=8, types),
            )
        },
    )
}

/// A valid market: invalid draws are repaired (non-positive-surplus types get
/// one value lifted above cost) and duplicate value vectors are dropped.
pub fn arb_market() -> impl Strategy<Value = Market> {
    arb_market_with(4, 8)
}

/// Smaller instances for the brute-force certification tests.
pub fn arb_market_small() -> impl Strategy<Value = Market> {
    arb_market_with(3, 4)
}

fn arb_market_with(max_firms: usize, max_types: usize) -> impl Strategy<Value = Market> {
    arb_raw(max_firms, max_types).prop_map(|(den, cost_raw, value_raw, weight_raw)| {
        let costs: Vec<Rational> = cost_raw.iter().map(|&n| rat(n as i64, den)).collect();
        let mut typed: Vec<Vec<Rational>> = value_raw
            .iter()
            .map(|row| row.iter().map(|&n| rat(n as i64, den)).collect())
            .collect();
        for row in &mut typed {
            let best = row
                .iter()
                .zip(&costs)
                .map(|(v, c)| v - c)
                .max()
                .expect("at least two firms");
            if best <= Rational::zero() {
                row[0] = &costs[0] + rat_int(1);
            }
        }
        let mut types: Vec<ConsumerType> = Vec::new();
        let mut weights: Vec<u32> = Vec::new();
        for (row, w) in typed.into_iter().zip(weight_raw) {
            if !types.iter().any(|t| t.values == row) {
                types.push(ConsumerType::new(row, Rational::zero()));
                weights.push(w);
            }
        }
        let total: u32 = weights.iter().sum();
        for (t, w) in types.iter_mut().zip(&weights) {
            t.mass = rat(*w as i64, total as i64);
        }
        let cap = types
            .iter()
            .flat_map(|t| t.values.iter())
            .max()
            .expect("nonempty")
            .clone();
        Market::new(costs, types, cap).expect("repaired market is valid")
    })
}
