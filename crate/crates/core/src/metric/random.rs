use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{edge_pairs, FiniteMetricSpace};
use crate::error::{MagnitudeError, Result};
use crate::rational::Q;

/// Options for [`random_metric_space`].
#[derive(Clone, Debug)]
pub struct RandomSpaceOptions {
    /// Draw distances from `[1, 2)`, which guarantees the strict virtual
    /// triangle inequality. Otherwise distances come from `[1, 3)` and
    /// triangle violations are rejected.
    pub svti: bool,
    /// Every slack `d_ij + d_jk - d_ik` over distinct triples must be at least this.
    pub min_gap: Q,
    /// Distances are multiples of `1 / denominator`.
    pub denominator: u32,
    /// Rejection-sampling budget.
    pub max_attempts: usize,
}

impl Default for RandomSpaceOptions {
    fn default() -> Self {
        RandomSpaceOptions {
            svti: false,
            min_gap: Q::zero(),
            denominator: 1000,
            max_attempts: 10_000,
        }
    }
}

impl RandomSpaceOptions {
    pub fn svti() -> Self {
        RandomSpaceOptions {
            svti: true,
            ..Default::default()
        }
    }
}

/// Samples a labelled metric space; deterministic in `(n, seed, options)`.
pub fn random_metric_space(n: usize, seed: u64, options: &RandomSpaceOptions) -> Result<FiniteMetricSpace> {
    if n < 2 {
        return Err(MagnitudeError::InvalidInput(format!(
            "a space needs at least 2 points, got {n}"
        )));
    }
    if options.denominator == 0 {
        return Err(MagnitudeError::InvalidInput("denominator must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = options.denominator as i64;
    let width = if options.svti { 1 } else { 2 };
    let pairs = edge_pairs(n);
    for _ in 0..options.max_attempts {
        let lengths: Vec<Q> = pairs
            .iter()
            .map(|_| grid_rational(&mut rng, 1, width, den))
            .collect();
        let mut d = vec![vec![Q::zero(); n]; n];
        for (&(i, j), l) in pairs.iter().zip(&lengths) {
            d[i][j] = l.clone();
            d[j][i] = l.clone();
        }
        let space = FiniteMetricSpace { labels: None, d };
        if !space.validate().ok {
            continue;
        }
        if n > 2 && space.triangle_slack() < options.min_gap {
            continue;
        }
        debug_assert!(!options.svti || space.satisfies_svti());
        return Ok(space);
    }
    Err(MagnitudeError::SamplingExhausted {
        attempts: options.max_attempts,
    })
}

/// Uniform rational in `[lo, lo + width)` on the grid `1/den`.
pub(crate) fn grid_rational(rng: &mut impl Rng, lo: i64, width: i64, den: i64) -> Q {
    Q::new(BigInt::from(lo * den + rng.gen_range(0..width * den)), BigInt::from(den))
}
