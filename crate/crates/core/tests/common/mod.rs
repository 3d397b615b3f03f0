//! Shared helpers for the integration suites: the two worked fixture
//! markets and a seeded random market sampler.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use segforge::market::{ConsumerType, Market};
use segforge::rational::{rat, rat_int, Rational};

/// `SEGFORGE_SEED` overrides the deterministic default for the randomized
/// suites.
pub fn seed_from_env() -> u64 {
    std::env::var("SEGFORGE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5E6F_0401)
}

pub fn vertical_market() -> Market {
    Market::new(
        vec![rat_int(0), rat_int(0)],
        vec![
            ConsumerType::new(vec![rat_int(7), rat_int(1)], rat(1, 2)),
            ConsumerType::new(vec![rat_int(3), rat_int(1)], rat(1, 2)),
        ],
        rat_int(7),
    )
    .unwrap()
}

pub fn horizontal_market() -> Market {
    Market::new(
        vec![rat_int(0), rat_int(0)],
        vec![
            ConsumerType::new(vec![rat_int(7), rat_int(1)], rat(1, 4)),
            ConsumerType::new(vec![rat_int(3), rat_int(1)], rat(1, 4)),
            ConsumerType::new(vec![rat_int(1), rat_int(3)], rat(1, 4)),
            ConsumerType::new(vec![rat_int(1), rat_int(7)], rat(1, 4)),
        ],
        rat_int(7),
    )
    .unwrap()
}

/// Draws valid markets with 2-4 firms, up to 8 types, and values on small
/// rational lattices (denominators 2 or 12). Roughly a third of the types
/// get a forced surplus tie so residual cells and shared maxima appear
/// often.
pub struct MarketSampler {
    rng: ChaCha8Rng,
}

impl MarketSampler {
    pub fn new(seed: u64) -> Self {
        MarketSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_market(&mut self) -> Market {
        loop {
            if let Some(m) = self.try_market() {
                return m;
            }
        }
    }

    fn try_market(&mut self) -> Option<Market> {
        let rng = &mut self.rng;
        let firms = rng.gen_range(2..=4usize);
        let type_count = rng.gen_range(1..=8usize);
        let den: i64 = if rng.gen_bool(0.5) { 2 } else { 12 };

        let costs: Vec<Rational> = (0..firms)
            .map(|_| rat(rng.gen_range(0..=2 * den), den))
            .collect();

        let mut types: Vec<Vec<Rational>> = (0..type_count)
            .map(|_| {
                (0..firms)
                    .map(|_| rat(rng.gen_range(-2 * den..=10 * den), den))
                    .collect()
            })
            .collect();

        // force exact surplus ties on some types
        for row in types.iter_mut() {
            if rng.gen_bool(0.3) {
                let a = rng.gen_range(0..firms);
                let mut b = rng.gen_range(0..firms);
                if a == b {
                    b = (b + 1) % firms;
                }
                row[b] = &costs[b] + (&row[a] - &costs[a]);
            }
        }

        let weights: Vec<i64> = (0..type_count).map(|_| rng.gen_range(1..=8)).collect();
        let total: i64 = weights.iter().sum();
        let consumer_types: Vec<ConsumerType> = types
            .into_iter()
            .zip(&weights)
            .map(|(values, &w)| ConsumerType::new(values, rat(w, total)))
            .collect();

        let cap = consumer_types
            .iter()
            .flat_map(|t| t.values.iter())
            .max()?
            .clone();
        Market::new(costs, consumer_types, cap).ok()
    }
}
