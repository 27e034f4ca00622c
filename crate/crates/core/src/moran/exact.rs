//! Exact absorption probabilities over the `2^n` state space.
//!
//! States are `u32` bitmasks. `h(S)` is the probability of absorption at the
//! all-mutant state from `S`; it solves `h = P h` with `h(0) = 0` and
//! `h(V) = 1`. Self-loops cancel out of that system, so both solvers work on
//! the chain restricted to state-changing moves.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::state::MutantState;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Hard ceiling on the state-space exponent regardless of options.
pub const MAX_EXACT_ORDER: usize = 24;
/// Largest order solved by level elimination under [`SolveMethod::Auto`].
pub const DIRECT_MAX_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Auto,
    /// Block elimination across popcount levels with dense LU per level.
    Direct,
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    pub cap: usize,
    pub tolerance: f64,
    pub method: SolveMethod,
    pub max_sweeps: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            cap: 16,
            tolerance: 1e-12,
            method: SolveMethod::Auto,
            max_sweeps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionSolution {
    pub n: usize,
    pub r: f64,
    /// Indexed by state bitmask.
    pub h: Vec<f64>,
    /// `h` of the single-mutant state `{v}`.
    pub vertex: Vec<f64>,
    /// Mean of `vertex`: fixation probability under uniform placement.
    pub fixation_probability: f64,
    /// `max |h - P h|` over all states, self-loops included.
    pub residual: f64,
    pub method: SolveMethod,
    pub sweeps: u64,
}

impl AbsorptionSolution {
    pub fn state(&self, s: &MutantState) -> f64 {
        let mask = s.to_mask().expect("exact states fit one word");
        self.h[mask as usize]
    }

    /// Mean of `h_v` over a vertex subset.
    pub fn mean_over(&self, vertices: &[usize]) -> f64 {
        vertices.iter().map(|&v| self.vertex[v]).sum::<f64>() / vertices.len() as f64
    }

    /// `bitmask,h` rows for every state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitmask,h\n");
        for (mask, h) in self.h.iter().enumerate() {
            let _ = writeln!(out, "{mask},{h:?}");
        }
        out
    }
}

/// Kernel restricted to state-changing moves, in CSR form over transient
/// states. `prob` holds true one-step probabilities; `out[s]` is their sum.
struct Chain {
    n: usize,
    offsets: Vec<usize>,
    target: Vec<u32>,
    prob: Vec<f64>,
    out: Vec<f64>,
}

impl Chain {
    fn build(g: &Graph, r: f64) -> Self {
        let n = g.order();
        let states = 1usize << n;
        let share: Vec<Vec<f64>> = (0..n)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .zip(g.neighbor_weights(v))
                    .map(|(&u, &w)| w / g.weighted_degree(u))
                    .collect()
            })
            .collect();
        let mut offsets = Vec::with_capacity(states + 1);
        let mut target = Vec::new();
        let mut prob = Vec::new();
        let mut out = vec![0.0; states];
        offsets.push(0);
        for s in 0..states {
            if s != 0 && s != states - 1 {
                let k = s.count_ones() as f64;
                let total = r * k + (n as f64 - k);
                let mut sum = 0.0;
                for v in 0..n {
                    let v_mutant = s >> v & 1 == 1;
                    let mut rate = 0.0;
                    for (i, &u) in g.neighbors(v).iter().enumerate() {
                        if (s >> u & 1 == 1) != v_mutant {
                            rate += share[v][i];
                        }
                    }
                    if rate > 0.0 {
                        if !v_mutant {
                            rate *= r;
                        }
                        let p = rate / total;
                        target.push((s ^ (1 << v)) as u32);
                        prob.push(p);
                        sum += p;
                    }
                }
                out[s] = sum;
            }
            offsets.push(target.len());
        }
        Chain {
            n,
            offsets,
            target,
            prob,
            out,
        }
    }

    fn moves(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[s]..self.offsets[s + 1];
        self.target[range.clone()]
            .iter()
            .map(|&t| t as usize)
            .zip(self.prob[range].iter().copied())
    }

    fn residual(&self, h: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 1..h.len() - 1 {
            let mut ph = (1.0 - self.out[s]) * h[s];
            for (t, p) in self.moves(s) {
                ph += p * h[t];
            }
            worst = worst.max((h[s] - ph).abs());
        }
        worst
    }

    /// Returns the number of sweeps performed.
    fn gauss_seidel(&self, h: &mut [f64], tol: f64, max_sweeps: u64) -> Result<u64> {
        let last = h.len() - 1;
        let mut sweeps = 0;
        loop {
            let mut change: f64 = 0.0;
            for s in 1..last {
                let mut acc = 0.0;
                for (t, p) in self.moves(s) {
                    acc += p * h[t];
                }
                let next = acc / self.out[s];
                change = change.max((next - h[s]).abs() * self.out[s]);
                h[s] = next;
            }
            sweeps += 1;
            if change <= tol && self.residual(h) <= tol {
                return Ok(sweeps);
            }
            if sweeps >= max_sweeps {
                return Err(Error::NonTermination {
                    limit: max_sweeps,
                    unit: "Gauss-Seidel sweeps",
                });
            }
        }
    }

    fn direct(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let states = 1usize << n;
        let mut levels: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut index = vec![0usize; states];
        for s in 0..states {
            let k = s.count_ones() as usize;
            index[s] = levels[k].len();
            levels[k].push(s);
        }
        let mut h = vec![0.0; states];
        h[states - 1] = 1.0;
        if n == 1 {
            return Ok(h);
        }
        // Level k satisfies h_k = D_k h_{k-1} + U_k h_{k+1}; eliminate upward
        // to h_k = M_k h_{k+1}.
        let mut maps: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        maps.push(DMatrix::zeros(0, 0));
        for k in 1..n {
            let rows = levels[k].len();
            let mut down = DMatrix::zeros(rows, levels[k - 1].len());
            let mut up = DMatrix::zeros(rows, levels[k + 1].len());
            for (i, &s) in levels[k].iter().enumerate() {
                let norm = self.out[s];
                for (t, p) in self.moves(s) {
                    if t.count_ones() as usize > k {
                        up[(i, index[t])] += p / norm;
                    } else {
                        down[(i, index[t])] += p / norm;
                    }
                }
            }
            let m = if k == 1 {
                up
            } else {
                let a = DMatrix::identity(rows, rows) - down * &maps[k - 1];
                a.lu()
                    .solve(&up)
                    .ok_or_else(|| Error::InvalidParameter("singular level system".into()))?
            };
            maps.push(m);
        }
        let mut above = DMatrix::from_element(1, 1, 1.0);
        for k in (1..n).rev() {
            let hk = &maps[k] * &above;
            for (i, &s) in levels[k].iter().enumerate() {
                h[s] = hk[(i, 0)];
            }
            above = hk;
        }
        Ok(h)
    }
}

pub fn exact_fixation(g: &Graph, r: f64) -> Result<AbsorptionSolution> {
    exact_fixation_with(g, r, &ExactOptions::default())
}

pub fn exact_fixation_with(g: &Graph, r: f64, opts: &ExactOptions) -> Result<AbsorptionSolution> {
    super::check_fitness(r)?;
    let n = g.order();
    let cap = opts.cap.min(MAX_EXACT_ORDER);
    if n > cap {
        return Err(Error::ExactCapExceeded { n, cap });
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be > 0".into()));
    }
    g.require_connected()?;
    let chain = Chain::build(g, r);
    let method = match opts.method {
        SolveMethod::Auto if n <= DIRECT_MAX_ORDER => SolveMethod::Direct,
        SolveMethod::Auto => SolveMethod::GaussSeidel,
        m => m,
    };
    let states = 1usize << n;
    let (h, sweeps) = match method {
        SolveMethod::Direct => {
            let mut h = chain.direct()?;
            let sweeps = if chain.residual(&h) > opts.tolerance {
                chain.gauss_seidel(&mut h, opts.tolerance, opts.max_sweeps)?
            } else {
                0
            };
            (h, sweeps)
        }
        _ => {
            let mut h: Vec<f64> = (0..states).map(|s| s.count_ones() as f64 / n as f64).collect();
            let sweeps = chain.gauss_seidel(&mut h, opts.tolerance, opts.max_sweeps)?;
            (h, sweeps)
        }
    };
    let residual = chain.residual(&h);
    let vertex: Vec<f64> = (0..n).map(|v| h[1 << v]).collect();
    let fixation_probability = vertex.iter().sum::<f64>() / n as f64;
    Ok(AbsorptionSolution {
        n,
        r,
        h,
        vertex,
        fixation_probability,
        residual,
        method,
        sweeps,
    })
}
