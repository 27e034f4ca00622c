//! The simultaneous mutual-influence dynamic.
//!
//! Every vertex holds a real fitness. One iteration maps `r` to `P(r) r`,
//! where `P_ij = r_j / (deg(j) Σ)` on edges, `Σ` is the total fitness and the
//! diagonal absorbs the remaining row mass. On a connected graph the vector
//! converges to a constant `[r0, ..., r0]`, certified by the nondecreasing
//! potential `φ = Σ_u r_u / deg(u)`.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::stream_rng;

/// Default cap on placements enumerated by [`InfluenceMode::Exhaustive`].
pub const DEFAULT_PLACEMENT_CAP: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitnessVector {
    values: Vec<f64>,
    k: u64,
    sum: f64,
}

impl FitnessVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("fitness vector is empty".into()));
        }
        if let Some((u, x)) = values.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "fitness of vertex {u} must be finite and > 0, got {x}"
            )));
        }
        let sum = values.iter().sum();
        Ok(FitnessVector { values, k: 0, sum })
    }

    /// `r` on the given vertices, 1 elsewhere.
    pub fn with_mutants(n: usize, mutants: &[usize], r: f64) -> Result<Self> {
        let mut values = vec![1.0; n];
        for &u in mutants {
            if u >= n {
                return Err(Error::InvalidParameter(format!("mutant vertex {u} outside 0..{n}")));
            }
            values[u] = r;
        }
        Self::new(values)
    }

    fn advanced(values: Vec<f64>, k: u64) -> Self {
        let sum = values.iter().sum();
        FitnessVector { values, k, sum }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_input(g: &Graph, r: &FitnessVector) -> Result<()> {
    g.require_unweighted()?;
    if r.len() != g.order() {
        return Err(Error::InvalidParameter(format!(
            "fitness vector has {} entries for a graph of order {}",
            r.len(),
            g.order()
        )));
    }
    Ok(())
}

/// The row-stochastic matrix `P(r)`.
pub fn influence_matrix(g: &Graph, r: &FitnessVector) -> Result<DMatrix<f64>> {
    check_input(g, r)?;
    let n = g.order();
    let sigma = r.sum();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for &j in g.neighbors(i) {
            let x = r.values[j] / (g.degree(j) as f64 * sigma);
            p[(i, j)] = x;
            off += x;
        }
        p[(i, i)] = 1.0 - off;
    }
    Ok(p)
}

/// One iteration, evaluated as
/// `r_u + (1/Σ) sum_{v in N(u)} r_v (r_v - r_u) / deg(v)`.
pub fn aggregate_step(g: &Graph, r: &FitnessVector) -> Result<FitnessVector> {
    check_input(g, r)?;
    Ok(step_unchecked(g, r))
}

fn step_unchecked(g: &Graph, r: &FitnessVector) -> FitnessVector {
    let x = &r.values;
    let sigma = r.sum;
    let next = (0..g.order())
        .map(|u| {
            let drift: f64 = g
                .neighbors(u)
                .iter()
                .map(|&v| x[v] * (x[v] - x[u]) / g.degree(v) as f64)
                .sum();
            x[u] + drift / sigma
        })
        .collect();
    FitnessVector::advanced(next, r.k + 1)
}

/// One iteration as the matrix-vector product `P(r) r`.
pub fn aggregate_step_matrix(g: &Graph, r: &FitnessVector) -> Result<FitnessVector> {
    let p = influence_matrix(g, r)?;
    let next = p * nalgebra::DVector::from_column_slice(&r.values);
    Ok(FitnessVector::advanced(next.iter().copied().collect(), r.k + 1))
}

/// In-place iteration on the complete graph in `O(n)`.
pub fn complete_graph_step(values: &mut [f64]) {
    let n = values.len();
    if n < 2 {
        return;
    }
    let sigma: f64 = values.iter().sum();
    let mean = sigma / n as f64;
    // sum_v r_v (r_v - r_u) = sum_v r_v (r_v - mean) - (r_u - mean) Σ
    let centered: f64 = values.iter().map(|&x| x * (x - mean)).sum();
    let scale = 1.0 / ((n as f64 - 1.0) * sigma);
    for x in values.iter_mut() {
        *x += (centered - (*x - mean) * sigma) * scale;
    }
}

pub fn potential(g: &Graph, r: &FitnessVector) -> f64 {
    r.values.iter().enumerate().map(|(u, x)| x / g.degree(u) as f64).sum()
}

/// Closed form of `potential(step(r)) - potential(r)`:
/// `(1/Σ) sum_{ij in E} (r_j - r_i)^2 / (deg(i) deg(j))`.
pub fn potential_increment(g: &Graph, r: &FitnessVector) -> f64 {
    let x = &r.values;
    let s: f64 = g
        .edges()
        .iter()
        .map(|&(i, j, _)| {
            let d = x[j] - x[i];
            d * d / (g.degree(i) as f64 * g.degree(j) as f64)
        })
        .sum();
    s / r.sum
}

pub fn max_adjacent_gap(g: &Graph, r: &FitnessVector) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j, _)| (r.values[i] - r.values[j]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub k: u64,
    pub phi: f64,
    pub max_gap: f64,
    pub min_fitness: f64,
    pub max_fitness: f64,
}

impl TracePoint {
    fn of(g: &Graph, r: &FitnessVector) -> Self {
        TracePoint {
            k: r.k,
            phi: potential(g, r),
            max_gap: max_adjacent_gap(g, r),
            min_fitness: r.min(),
            max_fitness: r.max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregationRun {
    pub initial: Vec<f64>,
    pub final_vector: FitnessVector,
    pub trace: Vec<TracePoint>,
    pub converged: bool,
    /// First iteration whose maximum adjacent gap is below `eps`; the last
    /// iteration performed when the run did not converge.
    pub k_stop: u64,
    /// Mean of the final vector.
    pub r0_hat: f64,
    /// `max - min` of the final vector.
    pub spread: f64,
}

/// Iterates until `max_{uv in E} |r_u - r_v| < eps` or `max_iters` steps.
pub fn run_to_convergence(g: &Graph, r0: &FitnessVector, eps: f64, max_iters: u64) -> Result<AggregationRun> {
    check_input(g, r0)?;
    g.require_connected()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    let mut r = r0.clone();
    let mut trace = vec![TracePoint::of(g, &r)];
    let mut converged = trace[0].max_gap < eps;
    while !converged && r.k - r0.k < max_iters {
        r = step_unchecked(g, &r);
        let point = TracePoint::of(g, &r);
        converged = point.max_gap < eps;
        trace.push(point);
    }
    Ok(AggregationRun {
        initial: r0.values.clone(),
        k_stop: r.k,
        r0_hat: r.mean(),
        spread: r.max() - r.min(),
        final_vector: r,
        trace,
        converged,
    })
}

/// Nearest integer to `alpha * n`, ties toward more mutants.
pub fn mutant_count(n: usize, alpha: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(((alpha * n as f64 + 0.5).floor() as usize).min(n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompleteGraphTrajectory {
    pub n: usize,
    pub alpha: f64,
    pub r: f64,
    /// Mutant class size.
    pub mutants: usize,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// `r1 - r2`, propagated directly so it stays accurate after the two
    /// class values agree to many digits.
    pub delta: Vec<f64>,
    /// `(m r1 + (n - m) r2) / n`.
    pub weighted_mean: Vec<f64>,
}

impl CompleteGraphTrajectory {
    pub fn steps(&self) -> usize {
        self.r1.len() - 1
    }

    pub fn delta_closed_form(&self, k: usize) -> f64 {
        let n = self.n as f64;
        (self.r - 1.0) * ((n - 2.0) / (n - 1.0)).powi(k as i32)
    }
}

struct TwoClass {
    a: f64,
    b: f64,
    n: f64,
    r1: f64,
    r2: f64,
    delta: f64,
}

impl TwoClass {
    fn advance(&mut self) {
        let sigma = self.a * self.r1 + self.b * self.r2;
        let c1 = self.a * self.r1 / ((self.n - 1.0) * sigma);
        let c2 = self.b * self.r2 / ((self.n - 1.0) * sigma);
        let (r1, r2, d) = (self.r1, self.r2, self.delta);
        self.r1 = r1 - d * c2;
        self.r2 = r2 + d * c1;
        self.delta = d - d * (c1 + c2);
    }

    fn mean(&self) -> f64 {
        (self.a * self.r1 + self.b * self.r2) / self.n
    }
}

fn two_class(n: usize, alpha: f64, r: f64) -> Result<(usize, TwoClass)> {
    if n < 2 {
        return Err(Error::InvalidParameter("complete graph needs n >= 2".into()));
    }
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r must be >= 1, got {r}")));
    }
    let m = mutant_count(n, alpha)?;
    if m == 0 || m == n {
        return Err(Error::InvalidParameter(format!(
            "alpha * n rounds to {m}; both classes must be non-empty"
        )));
    }
    Ok((
        m,
        TwoClass {
            a: m as f64,
            b: (n - m) as f64,
            n: n as f64,
            r1: r,
            r2: 1.0,
            delta: r - 1.0,
        },
    ))
}

/// Iterates the mutant/resident class recurrences of the complete graph.
pub fn complete_graph_trajectory(n: usize, alpha: f64, r: f64, k_max: usize) -> Result<CompleteGraphTrajectory> {
    let (mutants, mut s) = two_class(n, alpha, r)?;
    let mut t = CompleteGraphTrajectory {
        n,
        alpha,
        r,
        mutants,
        r1: Vec::with_capacity(k_max + 1),
        r2: Vec::with_capacity(k_max + 1),
        delta: Vec::with_capacity(k_max + 1),
        weighted_mean: Vec::with_capacity(k_max + 1),
    };
    for k in 0..=k_max {
        if k > 0 {
            s.advance();
        }
        t.r1.push(s.r1);
        t.r2.push(s.r2);
        t.delta.push(s.delta);
        t.weighted_mean.push(s.mean());
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompleteGraphConvergence {
    pub mutants: usize,
    pub k_stop: u64,
    pub converged: bool,
    pub r1: f64,
    pub r2: f64,
    pub r0_hat: f64,
}

/// Runs the class recurrences until `r1 - r2 < eps`, the complete-graph form
/// of the maximum adjacent gap criterion.
pub fn complete_graph_convergence(
    n: usize,
    alpha: f64,
    r: f64,
    eps: f64,
    max_iters: u64,
) -> Result<CompleteGraphConvergence> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    let (mutants, mut s) = two_class(n, alpha, r)?;
    let mut k = 0;
    while s.delta >= eps && k < max_iters {
        s.advance();
        k += 1;
    }
    Ok(CompleteGraphConvergence {
        mutants,
        k_stop: k,
        converged: s.delta < eps,
        r1: s.r1,
        r2: s.r2,
        r0_hat: s.mean(),
    })
}

/// Iterations the complete-graph convergence-time theorem allows:
/// `(n - 2) ln((r - 1) / eps)`, or 0 when `r - 1 <= eps`.
pub fn convergence_time_bound(n: usize, r: f64, eps: f64) -> f64 {
    if r - 1.0 <= eps {
        0.0
    } else {
        (n as f64 - 2.0) * ((r - 1.0) / eps).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitBounds {
    pub lower: f64,
    pub upper: f64,
    /// Single-mutant window `[1 + (r-1)/n, 1 + (r^2-1)/(2n)]`, present when
    /// `alpha * n` rounds to 1.
    pub single_mutant: Option<(f64, f64)>,
    pub mutants: usize,
}

/// Bounds on the complete-graph limit fitness with a fraction `alpha` of
/// mutants at fitness `r`. The fraction used is the rounded count over `n`.
pub fn limit_fitness_bounds(n: usize, alpha: f64, r: f64) -> Result<LimitBounds> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r must be >= 1, got {r}")));
    }
    let mutants = mutant_count(n, alpha)?;
    let a = mutants as f64 / n as f64;
    let base = 1.0 + a * (r - 1.0);
    let d2 = (r - 1.0) * (r - 1.0);
    let upper = base + a * (1.0 - a) / base * d2 / 2.0;
    let lower = (base + (base * base + 2.0 * a * (1.0 - a) * d2).sqrt()) / 2.0;
    let single_mutant = (mutants == 1).then(|| single_mutant_bounds(n, r));
    Ok(LimitBounds {
        lower,
        upper,
        single_mutant,
        mutants,
    })
}

pub fn single_mutant_bounds(n: usize, r: f64) -> (f64, f64) {
    let n = n as f64;
    (1.0 + (r - 1.0) / n, 1.0 + (r * r - 1.0) / (2.0 * n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfluenceMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementInfluence {
    pub mutants: Vec<usize>,
    pub r0: f64,
    pub f: f64,
    pub k_stop: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceResult {
    pub n: usize,
    pub alpha: f64,
    pub r: f64,
    /// Rounded mutant count `alpha * n`.
    pub mutants: usize,
    pub mode: InfluenceMode,
    pub placements: usize,
    pub f_g: f64,
    /// Mean limit fitness over placements.
    pub r_0: f64,
    /// Set when `r = 1`, where each `f_{G,S}` is taken to be 0.
    pub degenerate: bool,
    pub all_converged: bool,
    pub per_placement: Vec<PlacementInfluence>,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Degree of influence `f_G(r)` averaged over `alpha n`-subsets of initial
/// mutants: each placement `S` starts at `r` on `S`, 1 elsewhere, and
/// contributes `(r0^S - 1) / (r - 1)`.
pub fn degree_of_influence(
    g: &Graph,
    r: f64,
    alpha: f64,
    mode: &InfluenceMode,
    eps: f64,
    max_iters: u64,
    cap: u128,
) -> Result<InfluenceResult> {
    g.require_unweighted()?;
    g.require_connected()?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be finite and > 0, got {r}")));
    }
    let n = g.order();
    let mutants = mutant_count(n, alpha)?;
    let total = binomial(n, mutants);
    let placements = match *mode {
        InfluenceMode::Exhaustive => {
            if total > cap {
                return Err(Error::PlacementCapExceeded { count: total, cap });
            }
            all_subsets(n, mutants)
        }
        InfluenceMode::Sampled { samples, seed } => {
            if samples == 0 || samples as u128 > total {
                return Err(Error::InvalidParameter(format!(
                    "sample count must lie in 1..={total}, got {samples}"
                )));
            }
            let mut rng = stream_rng(seed, 0);
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(samples);
            while out.len() < samples {
                let mut s = rand::seq::index::sample(&mut rng, n, mutants).into_vec();
                s.sort_unstable();
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
            out
        }
    };
    let degenerate = r == 1.0;
    let per_placement = placements
        .into_par_iter()
        .map(|s| {
            let start = FitnessVector::with_mutants(n, &s, r)?;
            let run = run_to_convergence(g, &start, eps, max_iters)?;
            let f = if degenerate {
                0.0
            } else {
                (run.r0_hat - 1.0) / (r - 1.0)
            };
            Ok(PlacementInfluence {
                mutants: s,
                r0: run.r0_hat,
                f,
                k_stop: run.k_stop,
                converged: run.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let count = per_placement.len() as f64;
    let f_g = per_placement.iter().map(|p| p.f).sum::<f64>() / count;
    let r_0 = per_placement.iter().map(|p| p.r0).sum::<f64>() / count;
    Ok(InfluenceResult {
        n,
        alpha,
        r,
        mutants,
        mode: mode.clone(),
        placements: per_placement.len(),
        f_g,
        r_0,
        degenerate,
        all_converged: per_placement.iter().all(|p| p.converged),
        per_placement,
    })
}
