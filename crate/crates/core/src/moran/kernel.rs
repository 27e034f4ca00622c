//! One-step transition kernel of the birth-death process.
//!
//! From state `S` with total fitness `F = r|S| + (n - |S|)`, vertex `v` flips
//! with probability `rate(v) / F`, where
//!
//! * `rate(v) = r * sum_{u in N(v) ∩ S} w_uv / W_u` if `v` is a resident,
//! * `rate(v) = sum_{u in N(v) \ S} w_uv / W_u` if `v` is a mutant,
//!
//! and `W_u` is the weighted degree of `u`. The remaining mass is a self-loop.

use rand::Rng;

use super::state::MutantState;
use crate::graph::Graph;

/// Unnormalized flip rate of every vertex in state `s`.
pub fn flip_rates(g: &Graph, s: &MutantState, r: f64) -> Vec<f64> {
    (0..g.order())
        .map(|v| {
            let v_mutant = s.contains(v);
            g.neighbors(v)
                .iter()
                .zip(g.neighbor_weights(v))
                .filter(|&(&u, _)| s.contains(u) != v_mutant)
                .map(|(&u, &w)| {
                    let fitness = if v_mutant { 1.0 } else { r };
                    fitness * w / g.weighted_degree(u)
                })
                .sum()
        })
        .collect()
}

/// Outgoing transition probabilities of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    pub total_fitness: f64,
    /// `(v, p)`: the state with `v` flipped is reached with probability `p`.
    pub moves: Vec<(usize, f64)>,
    pub stay: f64,
}

pub fn transitions(g: &Graph, s: &MutantState, r: f64) -> Transitions {
    let k = s.count() as f64;
    let total_fitness = r * k + (g.order() as f64 - k);
    let moves: Vec<(usize, f64)> = flip_rates(g, s, r)
        .into_iter()
        .enumerate()
        .filter(|&(_, rate)| rate > 0.0)
        .map(|(v, rate)| (v, rate / total_fitness))
        .collect();
    let stay = 1.0 - moves.iter().map(|&(_, p)| p).sum::<f64>();
    Transitions {
        total_fitness,
        moves,
        stay,
    }
}

/// Samples one reproduction event, self-loops included. Absorbing states map
/// to themselves.
pub fn step<R: Rng + ?Sized>(g: &Graph, s: &MutantState, r: f64, rng: &mut R) -> MutantState {
    if s.is_absorbing() {
        return s.clone();
    }
    let n = g.order();
    let k = s.count() as f64;
    let mut x = rng.random::<f64>() * (r * k + (n as f64 - k));
    let mut reproducer = n - 1;
    for u in 0..n {
        let f = if s.contains(u) { r } else { 1.0 };
        if x < f {
            reproducer = u;
            break;
        }
        x -= f;
    }
    let weights = g.neighbor_weights(reproducer);
    let mut y = rng.random::<f64>() * g.weighted_degree(reproducer);
    let mut target = *g.neighbors(reproducer).last().expect("reproducer has neighbors");
    for (&v, &w) in g.neighbors(reproducer).iter().zip(weights) {
        if y < w {
            target = v;
            break;
        }
        y -= w;
    }
    let mut next = s.clone();
    if s.contains(reproducer) {
        next.insert(target);
    } else {
        next.remove(target);
    }
    next
}
