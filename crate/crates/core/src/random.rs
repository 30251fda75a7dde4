//! Seeded random channels: each likelihood column is an independent draw from
//! the symmetric Dirichlet(1) distribution over the outputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::channel::Bdmc;

#[derive(Debug, Clone)]
pub struct ChannelSampler {
    rng: ChaCha8Rng,
}

impl ChannelSampler {
    pub fn new(seed: u64) -> Self {
        ChannelSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn dirichlet_column(&mut self, outputs: usize) -> Vec<f64> {
        let draws: Vec<f64> = (0..outputs)
            .map(|_| {
                let x: f64 = Exp1.sample(&mut self.rng);
                x
            })
            .collect();
        let total: f64 = draws.iter().sum();
        draws.into_iter().map(|x| x / total).collect()
    }

    /// A channel with exactly `outputs` output symbols (at least 1).
    pub fn channel(&mut self, outputs: usize) -> Bdmc {
        let k = outputs.max(1);
        let c0 = self.dirichlet_column(k);
        let c1 = self.dirichlet_column(k);
        Bdmc::new(c0.into_iter().zip(c1)).expect("normalized Dirichlet columns are valid")
    }

    /// A channel whose output count is uniform on `min..=max`.
    pub fn channel_between(&mut self, min: usize, max: usize) -> Bdmc {
        let k = self.rng.random_range(min..=max.max(min));
        self.channel(k)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// `n` channels with output counts in `min..=max`, reproducible from `seed`.
pub fn random_channels(seed: u64, n: usize, min: usize, max: usize) -> Vec<Bdmc> {
    let mut s = ChannelSampler::new(seed);
    (0..n).map(|_| s.channel_between(min, max)).collect()
}
