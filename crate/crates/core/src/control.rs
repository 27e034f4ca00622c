//! Stabilizer insertion on the complete graph.
//!
//! Both mechanisms start from `alpha n` mutants at fitness `r` and reset
//! `beta n` vertices ("stabilizers") to fitness 1 until every fitness is at
//! most `1 + delta`:
//!
//! * phases: let the aggregation dynamic settle, then insert stabilizers;
//! * continuous: the same stabilizers are pinned at 1 after every iteration.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::aggregation::{complete_graph_step, mutant_count};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Iterations allowed inside one phase before it is declared stuck.
pub const MAX_PHASE_ITERATIONS: u64 = 50_000_000;
/// A run is abandoned after this multiple of its analytic bound.
pub const GUARD_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    Phases,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StabilizerPolicy {
    /// The `beta n` currently fittest vertices, lower index first on ties.
    HighestFitness,
    /// A uniform subset per phase, drawn from stream `phase` of `seed`.
    Random { seed: u64 },
    /// Vertices `0..beta n` every phase.
    FixedPrefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub n: usize,
    pub alpha: f64,
    pub r: f64,
    pub beta: f64,
    /// Relative spread `(max - min) / min` that ends a phase.
    pub eps: f64,
    pub delta: f64,
    pub mode: ControlMode,
    pub policy: StabilizerPolicy,
}

impl ControlConfig {
    pub fn phases(n: usize, alpha: f64, r: f64, beta: f64, eps: f64, delta: f64) -> Self {
        ControlConfig {
            n,
            alpha,
            r,
            beta,
            eps,
            delta,
            mode: ControlMode::Phases,
            policy: StabilizerPolicy::HighestFitness,
        }
    }

    pub fn continuous(n: usize, alpha: f64, r: f64, beta: f64, delta: f64) -> Self {
        ControlConfig {
            n,
            alpha,
            r,
            beta,
            eps: 0.0,
            delta,
            mode: ControlMode::Continuous,
            policy: StabilizerPolicy::FixedPrefix,
        }
    }

    pub fn with_policy(mut self, policy: StabilizerPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// `(mutants, stabilizers, residents)`. Mutants round to nearest, ties up;
    /// stabilizers round down with a minimum of 1 when `beta > 0`.
    pub fn class_sizes(&self) -> Result<(usize, usize, usize)> {
        let a = mutant_count(self.n, self.alpha)?;
        let b = stabilizer_count(self.n, self.beta)?;
        match self.mode {
            ControlMode::Phases => Ok((a, b, self.n - a)),
            ControlMode::Continuous => {
                if a + b > self.n {
                    return Err(Error::InvalidParameter(format!(
                        "{a} mutants and {b} stabilizers exceed n = {}",
                        self.n
                    )));
                }
                Ok((a, b, self.n - a - b))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter("n must be >= 2".into()));
        }
        if !(self.r.is_finite() && self.r >= 1.0) {
            return Err(Error::InvalidParameter(format!("r must be >= 1, got {}", self.r)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if self.mode == ControlMode::Phases && !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {}", self.eps)));
        }
        self.class_sizes().map(|_| ())
    }
}

fn stabilizer_count(n: usize, beta: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta must lie in [0, 1], got {beta}")));
    }
    let b = (beta * n as f64).floor() as usize;
    Ok(if beta > 0.0 { b.max(1) } else { b })
}

/// Phases after which every fitness is at most `1 + delta`:
/// `1 + ln((eps + (1+eps)(1+alpha)/2 (r-1)) / (delta - 4/3 sqrt eps)) / ln(1 / ((1+eps)(1-beta/2)))`.
pub fn phase_bound(cfg: &ControlConfig) -> Result<f64> {
    let root = cfg.eps.sqrt();
    if !(cfg.beta / 2.0 > root) {
        return Err(Error::HypothesisViolated(format!(
            "beta/2 > sqrt(eps) fails: beta/2 = {}, sqrt(eps) = {root}",
            cfg.beta / 2.0
        )));
    }
    if !(cfg.delta > 4.0 / 3.0 * root) {
        return Err(Error::HypothesisViolated(format!(
            "delta > (4/3) sqrt(eps) fails: delta = {}, (4/3) sqrt(eps) = {}",
            cfg.delta,
            4.0 / 3.0 * root
        )));
    }
    let e = cfg.eps;
    let num = e + (1.0 + e) * (1.0 + cfg.alpha) / 2.0 * (cfg.r - 1.0);
    let den = cfg.delta - 4.0 / 3.0 * root;
    Ok(1.0 + (num / den).ln() / (1.0 / ((1.0 + e) * (1.0 - cfg.beta / 2.0))).ln())
}

/// Iterations after which every fitness is at most `1 + delta`:
/// `(r / beta)(n - 1) ln((r - 1) / delta)`, or 0 when `r - 1 <= delta`.
pub fn continuous_bound(n: usize, r: f64, beta: f64, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be >= 2".into()));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    if r - 1.0 <= delta {
        return Ok(0.0);
    }
    Ok(r / beta * (n as f64 - 1.0) * ((r - 1.0) / delta).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlPoint {
    /// Phase number or iteration number.
    pub step: u64,
    /// Mean fitness of the initial mutants.
    pub r1: f64,
    /// Mean fitness of the initial residents (stabilizers excluded in
    /// continuous mode).
    pub r2: f64,
    pub max_fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub phase: u64,
    pub iterations: u64,
    /// Mean fitness once the phase has settled, before stabilizers.
    pub limit: f64,
    pub min_fitness: f64,
    pub max_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlReport {
    pub config: ControlConfig,
    pub mutants: usize,
    pub stabilizers: usize,
    pub residents: usize,
    /// Phases (phase mode) or iterations (continuous mode) until healthy.
    pub used: u64,
    pub bound: f64,
    pub healthy: bool,
    /// The run was stopped at `GUARD_FACTOR` times the bound.
    pub guard_tripped: bool,
    pub trajectory: Vec<ControlPoint>,
    pub phases: Vec<PhaseSummary>,
    /// Phases whose settled limit did not decrease from the previous phase.
    pub progress_violations: Vec<u64>,
    /// `r1 - r2` per iteration (continuous mode).
    pub gap: Vec<f64>,
}

fn guard(bound: f64) -> u64 {
    (GUARD_FACTOR * bound.ceil().max(1.0)) as u64
}

fn class_means(values: &[f64], mutants: usize, skip: usize) -> (f64, f64) {
    let n = values.len();
    let r1 = if mutants > 0 {
        values[..mutants].iter().sum::<f64>() / mutants as f64
    } else {
        f64::NAN
    };
    let rest = &values[mutants..n.saturating_sub(skip).max(mutants)];
    let r2 = if rest.is_empty() {
        f64::NAN
    } else {
        rest.iter().sum::<f64>() / rest.len() as f64
    };
    (r1, r2)
}

fn spread(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

pub fn run_phase_control(cfg: &ControlConfig) -> Result<ControlReport> {
    if cfg.mode != ControlMode::Phases {
        return Err(Error::InvalidParameter("configuration is not in phase mode".into()));
    }
    cfg.validate()?;
    let bound = phase_bound(cfg)?;
    let (a, b, c) = cfg.class_sizes()?;
    let n = cfg.n;
    let limit = guard(bound);
    let healthy_at = 1.0 + cfg.delta;

    let mut values = vec![1.0; n];
    values[..a].iter_mut().for_each(|x| *x = cfg.r);
    let mut report = ControlReport {
        config: cfg.clone(),
        mutants: a,
        stabilizers: b,
        residents: c,
        used: 0,
        bound,
        healthy: false,
        guard_tripped: false,
        trajectory: Vec::new(),
        phases: Vec::new(),
        progress_violations: Vec::new(),
        gap: Vec::new(),
    };
    let record = |values: &[f64], phase: u64, report: &mut ControlReport| {
        let (r1, r2) = class_means(values, a, 0);
        let max_fitness = spread(values).1;
        report.trajectory.push(ControlPoint {
            step: phase,
            r1,
            r2,
            max_fitness,
        });
        max_fitness
    };

    if record(&values, 0, &mut report) <= healthy_at {
        report.healthy = true;
        return Ok(report);
    }
    let mut phase = 0u64;
    loop {
        if phase >= limit {
            report.guard_tripped = true;
            report.used = phase;
            return Ok(report);
        }
        phase += 1;
        let mut iterations = 0u64;
        loop {
            let (min, max) = spread(&values);
            if (max - min) / min < cfg.eps {
                break;
            }
            if iterations >= MAX_PHASE_ITERATIONS {
                return Err(Error::NonTermination {
                    limit: MAX_PHASE_ITERATIONS,
                    unit: "iterations in one phase",
                });
            }
            complete_graph_step(&mut values);
            iterations += 1;
        }
        let (min_fitness, max_fitness) = spread(&values);
        let mean = values.iter().sum::<f64>() / n as f64;
        if let Some(prev) = report.phases.last() {
            if mean >= prev.limit {
                report.progress_violations.push(phase);
            }
        }
        report.phases.push(PhaseSummary {
            phase,
            iterations,
            limit: mean,
            min_fitness,
            max_fitness,
        });
        record(&values, phase, &mut report);
        if max_fitness <= healthy_at {
            report.healthy = true;
            report.used = phase;
            return Ok(report);
        }
        for v in choose_stabilizers(&values, b, cfg.policy, phase) {
            values[v] = 1.0;
        }
    }
}

fn choose_stabilizers(values: &[f64], b: usize, policy: StabilizerPolicy, phase: u64) -> Vec<usize> {
    match policy {
        StabilizerPolicy::FixedPrefix => (0..b).collect(),
        StabilizerPolicy::HighestFitness => {
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));
            order.truncate(b);
            order
        }
        StabilizerPolicy::Random { seed } => {
            let mut rng = stream_rng(seed, phase);
            sample(&mut rng, values.len(), b).into_vec()
        }
    }
}

/// Mutants, stabilizers and residents on the complete graph, iterated by
/// class. The gap `r1 - r2` is carried separately so it keeps full relative
/// precision; `r1` is rebuilt from it.
struct ThreeClass {
    a: f64,
    b: f64,
    c: f64,
    n: f64,
    r1: f64,
    r2: f64,
    gap: f64,
}

impl ThreeClass {
    fn advance(&mut self) {
        let sigma = self.a * self.r1 + self.c * self.r2 + self.b;
        let scale = (self.n - 1.0) * sigma;
        let r2 = self.r2 + (self.a * self.r1 * self.gap - self.b * (self.r2 - 1.0)) / scale;
        self.gap -= self.gap * (self.a * self.r1 + self.c * self.r2 + self.b) / scale;
        self.r2 = r2;
        self.r1 = r2 + self.gap;
    }
}

pub fn run_continuous_control(cfg: &ControlConfig) -> Result<ControlReport> {
    if cfg.mode != ControlMode::Continuous {
        return Err(Error::InvalidParameter(
            "configuration is not in continuous mode".into(),
        ));
    }
    cfg.validate()?;
    let bound = continuous_bound(cfg.n, cfg.r, cfg.beta, cfg.delta)?;
    let (a, b, c) = cfg.class_sizes()?;
    let limit = guard(bound);
    let healthy_at = 1.0 + cfg.delta;
    let mut s = ThreeClass {
        a: a as f64,
        b: b as f64,
        c: c as f64,
        n: cfg.n as f64,
        r1: cfg.r,
        r2: 1.0,
        gap: cfg.r - 1.0,
    };
    let mut report = ControlReport {
        config: cfg.clone(),
        mutants: a,
        stabilizers: b,
        residents: c,
        used: 0,
        bound,
        healthy: false,
        guard_tripped: false,
        trajectory: Vec::new(),
        phases: Vec::new(),
        progress_violations: Vec::new(),
        gap: Vec::new(),
    };
    let max_of = |s: &ThreeClass| {
        let mut m: f64 = 1.0;
        if a > 0 {
            m = m.max(s.r1);
        }
        if c > 0 {
            m = m.max(s.r2);
        }
        m
    };
    let mut k = 0u64;
    loop {
        let max_fitness = max_of(&s);
        report.trajectory.push(ControlPoint {
            step: k,
            r1: if a > 0 { s.r1 } else { f64::NAN },
            r2: if c > 0 { s.r2 } else { f64::NAN },
            max_fitness,
        });
        report.gap.push(s.gap);
        if max_fitness <= healthy_at {
            report.healthy = true;
            report.used = k;
            return Ok(report);
        }
        if k >= limit {
            report.guard_tripped = true;
            report.used = k;
            return Ok(report);
        }
        s.advance();
        k += 1;
    }
}

/// The continuous mechanism on the full `n`-vertex vector: mutants on
/// `0..a`, residents next, stabilizers on the last `b` vertices, re-pinned to
/// 1 after every iteration. Returns `(r1, r2)` read from vertex 0 and vertex
/// `a` for iterations `0..=k_max`.
pub fn simulate_continuous_full(cfg: &ControlConfig, k_max: u64) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let (a, b, _) = cfg.class_sizes()?;
    let n = cfg.n;
    let mut values = vec![1.0; n];
    values[..a].iter_mut().for_each(|x| *x = cfg.r);
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push((values[0], values[a.min(n - 1)]));
    for _ in 0..k_max {
        complete_graph_step(&mut values);
        values[n - b..].iter_mut().for_each(|x| *x = 1.0);
        out.push((values[0], values[a.min(n - 1)]));
    }
    Ok(out)
}
