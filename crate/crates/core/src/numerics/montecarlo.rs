//! Monte-Carlo estimate of `I(X; X + Z)`, used as an independent check on the
//! quadrature engine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::InputDistribution;
use crate::error::{domain, Result};
use crate::mutual_information::GaussianOutput;

pub const DEFAULT_MC_SAMPLES: usize = 200_000;

/// Default seed, `0x01AC`.
pub const DEFAULT_SEED: u64 = 428;

const CHUNK: usize = 4096;

/// Far enough that the Gaussian kernel underflows beyond it.
const MC_TAIL_SIGMA: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Draws from an input law by inverting the cumulative weights of its atoms
/// and components.
struct Sampler<'a> {
    dist: &'a InputDistribution,
    cumulative: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(dist: &'a InputDistribution) -> Self {
        let mut acc = 0.0;
        let weights = dist.atoms().iter().map(|a| a.mass).chain(dist.components().iter().map(|w| w.weight));
        let cumulative = weights
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { dist, cumulative }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|c| *c <= u).min(self.cumulative.len() - 1);
        let n_atoms = self.dist.atoms().len();
        if idx < n_atoms {
            self.dist.atoms()[idx].location
        } else {
            self.dist.components()[idx - n_atoms].component.sample(rng)
        }
    }
}

/// Count, mean and centered sum of squares of a block of terms.
#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments { n, mean: self.mean + delta * o.n / n, m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n }
    }
}

/// Sample average of `ln p(Y|X) - ln p(Y)` over `samples` draws.
///
/// Samples are produced in chunks of 4096; chunk `c` uses the ChaCha8 stream
/// `c` of `seed`, so the estimate depends only on `(seed, samples)`.
pub fn mc_mi_estimate(dist: &InputDistribution, sigma: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("noise scale must be positive and finite, got {sigma}"));
    }
    if samples < 10_000 {
        return domain(format!("at least 10^4 samples are required, got {samples}"));
    }
    let out = GaussianOutput::new(dist, sigma, MC_TAIL_SIGMA);
    let sampler = Sampler::new(dist);
    let noise = Normal::new(0.0, sigma).expect("valid sigma");
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI).ln() - sigma.ln();
    let chunks = samples.div_ceil(CHUNK);
    let moments: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut m = Moments { n: 0.0, mean: 0.0, m2: 0.0 };
            for _ in 0..len {
                let x = sampler.sample(&mut rng);
                let z: f64 = noise.sample(&mut rng);
                let term = ln_norm - 0.5 * (z / sigma) * (z / sigma) - out.pdf(x + z).ln();
                m = m.merge(Moments { n: 1.0, mean: term, m2: 0.0 });
            }
            m
        })
        .collect();
    let total = moments.into_iter().reduce(Moments::merge).expect("at least one chunk");
    let var = total.m2 / (total.n - 1.0);
    Ok(McEstimate { mean: total.mean, std_error: (var / total.n).sqrt(), samples, seed })
}
