use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Fixation probability of a single mutant in the birth-death chain with
/// forward bias `r` on `n` states: `1 / (1 + sum_{i=1}^{n-1} r^-i)`.
///
/// The sum form is exact at `r = 1` (giving `1/n`). Panics if `n == 0` or
/// `r` is not positive.
pub fn birth_death_fixation(n: usize, r: f64) -> f64 {
    assert!(n >= 1, "chain needs at least one state");
    assert!(r > 0.0, "bias must be positive, got {r}");
    let inv = 1.0 / r;
    let mut term = 1.0;
    let mut sum = 1.0;
    for _ in 1..n {
        term *= inv;
        sum += term;
    }
    1.0 / sum
}

fn check_walk(m: u64, p: f64) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidParameter("target index m must be >= 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Expected number of steps for the walk on `v0..=vm` started at `v1` to
/// reach `vm`. From `v0` the walk moves to `v1` surely; from `vi` it moves
/// right with probability `p` and left with `q = 1 - p`.
pub fn expected_hitting_time(m: u64, p: f64) -> Result<f64> {
    check_walk(m, p)?;
    if p == 0.5 {
        return Err(Error::InvalidParameter(
            "p = 1/2 is not covered by the closed form".into(),
        ));
    }
    let q = 1.0 - p;
    let ratio = q / p;
    let geometric = (ratio.powf(m as f64) - ratio) / (ratio - 1.0);
    Ok((1.0 + 1.0 / (q - p)) * geometric - (m as f64 - 1.0) / (q - p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of [`expected_hitting_time`].
pub fn simulate_hitting_time(m: u64, p: f64, trials: u64, seed: u64) -> Result<HittingTimeEstimate> {
    check_walk(m, p)?;
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least 2 trials".into()));
    }
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let mut pos = 1u64;
            let mut steps = 0u64;
            while pos < m {
                if pos == 0 || rng.random::<f64>() < p {
                    pos += 1;
                } else {
                    pos -= 1;
                }
                steps += 1;
            }
            (steps as u128, (steps as u128) * (steps as u128))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    let mean = sum as f64 / t;
    let var = (sum_sq as f64 - t * mean * mean) / (t - 1.0);
    Ok(HittingTimeEstimate {
        mean,
        std_error: (var.max(0.0) / t).sqrt(),
        trials,
        seed,
    })
}
