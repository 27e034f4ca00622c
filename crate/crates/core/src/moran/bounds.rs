//! Degree-based bounds on the fixation probability of unweighted graphs.

use serde::Serialize;

use super::closed_form::birth_death_fixation;
use crate::error::Result;
use crate::graph::Graph;

/// Degree sums attached to the ordered edge `(u, v)`:
/// `q_u = sum_{x in N(u)} 1/deg x` and
/// `q_uv = sum_{x in N(u) \ v} 1/deg x + sum_{x in N(v) \ u} 1/deg x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeQuantities {
    pub u: usize,
    pub v: usize,
    pub q_u: f64,
    pub q_uv: f64,
}

impl EdgeQuantities {
    pub fn bound(&self, r: f64) -> f64 {
        let r2 = r * r;
        r2 / (r2 + r * self.q_u + self.q_u * self.q_uv / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericUpperBound {
    /// One entry per ordered edge, in adjacency order.
    pub edges: Vec<EdgeQuantities>,
}

impl GenericUpperBound {
    /// The bound at fitness `r` and the ordered edge attaining it (first
    /// maximizer in table order).
    pub fn evaluate(&self, r: f64) -> (f64, (usize, usize)) {
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for e in &self.edges {
            let b = e.bound(r);
            if b > best.0 {
                best = (b, (e.u, e.v));
            }
        }
        best
    }

    pub fn value(&self, r: f64) -> f64 {
        self.evaluate(r).0
    }
}

pub fn generic_upper_bound(g: &Graph) -> Result<GenericUpperBound> {
    g.require_unweighted()?;
    g.require_connected()?;
    let inv: Vec<f64> = (0..g.order()).map(|x| 1.0 / g.degree(x) as f64).collect();
    let q: Vec<f64> = (0..g.order())
        .map(|u| g.neighbors(u).iter().map(|&x| inv[x]).sum())
        .collect();
    let mut edges = Vec::with_capacity(2 * g.edge_count());
    for u in 0..g.order() {
        for &v in g.neighbors(u) {
            edges.push(EdgeQuantities {
                u,
                v,
                q_u: q[u],
                q_uv: (q[u] - inv[v]) + (q[v] - inv[u]),
            });
        }
    }
    Ok(GenericUpperBound { edges })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBounds {
    /// Largest degree ratio across an edge, over both orientations.
    pub lambda: f64,
    pub n: usize,
}

impl LambdaBounds {
    pub fn lower(&self, r: f64) -> f64 {
        birth_death_fixation(self.n, r / self.lambda)
    }

    pub fn upper(&self, r: f64) -> f64 {
        birth_death_fixation(self.n, r * self.lambda)
    }
}

pub fn lambda_bounds(g: &Graph) -> Result<LambdaBounds> {
    g.require_unweighted()?;
    g.require_connected()?;
    let lambda = g
        .edges()
        .iter()
        .map(|&(u, v, _)| {
            let (a, b) = (g.degree(u) as f64, g.degree(v) as f64);
            (a / b).max(b / a)
        })
        .fold(1.0, f64::max);
    Ok(LambdaBounds { lambda, n: g.order() })
}
