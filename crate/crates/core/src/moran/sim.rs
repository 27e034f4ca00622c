//! Monte Carlo simulation of the birth-death process.
//!
//! Two exact engines are available:
//!
//! * [`Engine::Elided`] keeps every vertex's flip rate in a sum tree and
//!   samples only state-changing events. Self-loops are skipped; their
//!   expected count is accumulated separately. A flip costs
//!   `O(deg(v) log n)`.
//! * [`Engine::Rejection`] samples reproduction events directly from the
//!   kernel (reproducer by fitness, then a neighbor) and discards events that
//!   leave the state unchanged. A try costs `O(1)` regardless of degree,
//!   which wins on hub-dominated graphs such as large stars.
//!
//! Both engines produce the same distribution over absorbing outcomes and over
//! the number of state-changing events.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::MutantState;
use super::{MoranConfig, Placement};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream_rng, SimRng};

/// Graphs whose maximum degree exceeds this run on the rejection engine under
/// [`Engine::Auto`].
pub const ELIDED_MAX_DEGREE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Auto,
    Elided,
    Rejection,
}

impl Engine {
    pub fn resolve(self, g: &Graph) -> Engine {
        match self {
            Engine::Auto if g.max_degree() <= ELIDED_MAX_DEGREE => Engine::Elided,
            Engine::Auto => Engine::Rejection,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Elided => "elided",
            Engine::Rejection => "rejection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Fixation,
    Extinction,
    /// The step cap was reached before absorption.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Absorption {
    pub outcome: Outcome,
    /// State-changing events until absorption (or truncation).
    pub steps: u64,
    /// Self-loop events: an exact count for the rejection engine, the
    /// expected count given the visited states for the elided engine.
    pub self_loops: f64,
}

/// Complete binary tree of partial sums over leaf weights.
#[derive(Debug, Clone)]
struct SumTree {
    size: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(n: usize) -> Self {
        let size = n.next_power_of_two().max(1);
        SumTree {
            size,
            nodes: vec![0.0; 2 * size],
        }
    }

    fn clear(&mut self) {
        self.nodes.iter_mut().for_each(|x| *x = 0.0);
    }

    fn get(&self, i: usize) -> f64 {
        self.nodes[self.size + i]
    }

    /// Sets a leaf and recomputes its ancestors from their children, so no
    /// rounding drift accumulates in the internal sums.
    fn set(&mut self, i: usize, value: f64) {
        let mut p = self.size + i;
        self.nodes[p] = value;
        p /= 2;
        while p >= 1 {
            self.nodes[p] = self.nodes[2 * p] + self.nodes[2 * p + 1];
            p /= 2;
        }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    /// Leaf whose cumulative interval contains `x`; always a positive leaf
    /// when the total is positive.
    fn sample(&self, mut x: f64) -> usize {
        let mut p = 1;
        while p < self.size {
            let left = self.nodes[2 * p];
            if x < left || self.nodes[2 * p + 1] <= 0.0 {
                p *= 2;
            } else {
                x -= left;
                p = 2 * p + 1;
            }
        }
        p - self.size
    }
}

/// Reusable simulation workspace for one graph and fitness value.
#[derive(Debug, Clone)]
pub struct Simulator<'g> {
    graph: &'g Graph,
    r: f64,
    engine: Engine,
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    /// `w_uv / W_u` for entry `v` in the list of `u`.
    share: Vec<f64>,
    /// `w_uv / W_v` for entry `v` in the list of `u` (share of the reverse arc).
    rev_share: Vec<f64>,
    /// Running sum of `share` within each list, for weighted neighbor choice.
    cum_share: Vec<f64>,
    weighted: bool,
    mutant: Vec<bool>,
    mutant_count: usize,
    tree: SumTree,
    discordant: Vec<u32>,
    members: [Vec<u32>; 2],
    pos: Vec<u32>,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g Graph, r: f64, engine: Engine) -> Self {
        let n = graph.order();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::new();
        let mut share = Vec::new();
        let mut rev_share = Vec::new();
        let mut cum_share = Vec::new();
        offsets.push(0);
        for u in 0..n {
            let wu = graph.weighted_degree(u);
            let mut acc = 0.0;
            for (&v, &w) in graph.neighbors(u).iter().zip(graph.neighbor_weights(u)) {
                nbrs.push(v as u32);
                share.push(w / wu);
                rev_share.push(w / graph.weighted_degree(v));
                acc += w / wu;
                cum_share.push(acc);
            }
            offsets.push(nbrs.len());
        }
        Simulator {
            graph,
            r,
            engine: engine.resolve(graph),
            offsets,
            nbrs,
            share,
            rev_share,
            cum_share,
            weighted: graph.is_weighted(),
            mutant: vec![false; n],
            mutant_count: 0,
            tree: SumTree::new(n),
            discordant: vec![0; n],
            members: [Vec::with_capacity(n), Vec::with_capacity(n)],
            pos: vec![0; n],
        }
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    #[inline]
    fn fitness(&self, is_mutant: bool) -> f64 {
        if is_mutant {
            self.r
        } else {
            1.0
        }
    }

    fn load(&mut self, start: &[usize]) {
        self.mutant.iter_mut().for_each(|m| *m = false);
        for &u in start {
            self.mutant[u] = true;
        }
        self.mutant_count = self.mutant.iter().filter(|&&m| m).count();
    }

    /// Runs one trajectory from the given initial mutants to absorption.
    pub fn run<R: Rng + ?Sized>(&mut self, start: &[usize], max_steps: u64, rng: &mut R) -> Absorption {
        self.load(start);
        match self.engine {
            Engine::Rejection => self.run_rejection(max_steps, rng),
            _ => self.run_elided(max_steps, rng),
        }
    }

    fn absorbed(&self) -> Option<Outcome> {
        if self.mutant_count == 0 {
            Some(Outcome::Extinction)
        } else if self.mutant_count == self.graph.order() {
            Some(Outcome::Fixation)
        } else {
            None
        }
    }

    fn recompute_rate(&mut self, v: usize) {
        let color = self.mutant[v];
        let mut rate = 0.0;
        let mut disc = 0;
        for i in self.offsets[v]..self.offsets[v + 1] {
            let u = self.nbrs[i] as usize;
            if self.mutant[u] != color {
                rate += self.fitness(!color) * self.rev_share[i];
                disc += 1;
            }
        }
        self.discordant[v] = disc;
        self.tree.set(v, rate);
    }

    fn run_elided<R: Rng + ?Sized>(&mut self, max_steps: u64, rng: &mut R) -> Absorption {
        let n = self.graph.order();
        self.tree.clear();
        for v in 0..n {
            self.recompute_rate(v);
        }
        let mut steps = 0u64;
        let mut self_loops = 0.0;
        loop {
            if let Some(outcome) = self.absorbed() {
                return Absorption {
                    outcome,
                    steps,
                    self_loops,
                };
            }
            if steps >= max_steps {
                return Absorption {
                    outcome: Outcome::Truncated,
                    steps,
                    self_loops,
                };
            }
            let total_rate = self.tree.total();
            let k = self.mutant_count as f64;
            let total_fitness = self.r * k + (n as f64 - k);
            self_loops += total_fitness / total_rate - 1.0;

            let v = self.tree.sample(rng.random::<f64>() * total_rate);
            let old = self.mutant[v];
            let new = !old;
            self.mutant[v] = new;
            if new {
                self.mutant_count += 1;
            } else {
                self.mutant_count -= 1;
            }
            for i in self.offsets[v]..self.offsets[v + 1] {
                let x = self.nbrs[i] as usize;
                let mut rate = self.tree.get(x);
                if self.mutant[x] != old {
                    // v was discordant with x and no longer is.
                    self.discordant[x] -= 1;
                    rate = if self.discordant[x] == 0 {
                        0.0
                    } else {
                        rate - self.fitness(old) * self.share[i]
                    };
                } else {
                    self.discordant[x] += 1;
                    rate += self.fitness(new) * self.share[i];
                }
                self.tree.set(x, rate);
            }
            self.recompute_rate(v);
            steps += 1;
        }
    }

    fn run_rejection<R: Rng + ?Sized>(&mut self, max_steps: u64, rng: &mut R) -> Absorption {
        let n = self.graph.order();
        self.members[0].clear();
        self.members[1].clear();
        for u in 0..n {
            let class = self.mutant[u] as usize;
            self.pos[u] = self.members[class].len() as u32;
            self.members[class].push(u as u32);
        }
        let mut steps = 0u64;
        let mut self_loops = 0u64;
        loop {
            if let Some(outcome) = self.absorbed() {
                return Absorption {
                    outcome,
                    steps,
                    self_loops: self_loops as f64,
                };
            }
            if steps >= max_steps {
                return Absorption {
                    outcome: Outcome::Truncated,
                    steps,
                    self_loops: self_loops as f64,
                };
            }
            let mutants = self.mutant_count;
            let residents = n - mutants;
            let mutant_mass = self.r * mutants as f64;
            let x = rng.random::<f64>() * (mutant_mass + residents as f64);
            let u = if x < mutant_mass {
                self.members[1][((x / self.r) as usize).min(mutants - 1)]
            } else {
                self.members[0][((x - mutant_mass) as usize).min(residents - 1)]
            } as usize;

            let lo = self.offsets[u];
            let deg = self.offsets[u + 1] - lo;
            let j = if self.weighted {
                let y = rng.random::<f64>();
                self.cum_share[lo..lo + deg].partition_point(|&c| c <= y).min(deg - 1)
            } else {
                rng.random_range(0..deg)
            };
            let v = self.nbrs[lo + j] as usize;
            let color = self.mutant[u];
            if self.mutant[v] == color {
                self_loops += 1;
                continue;
            }
            // v joins u's class.
            let from = &mut self.members[!color as usize];
            let idx = self.pos[v] as usize;
            let last = *from.last().expect("class of v is non-empty");
            from.swap_remove(idx);
            if last as usize != v {
                self.pos[last as usize] = idx as u32;
            }
            let to = &mut self.members[color as usize];
            self.pos[v] = to.len() as u32;
            to.push(v as u32);
            self.mutant[v] = color;
            if color {
                self.mutant_count += 1;
            } else {
                self.mutant_count -= 1;
            }
            steps += 1;
        }
    }
}

fn resolve_placement<R: Rng + ?Sized>(placement: &Placement, n: usize, rng: &mut R) -> Vec<usize> {
    match placement {
        Placement::Uniform => vec![rng.random_range(0..n)],
        Placement::UniformOver(vs) => vec![vs[rng.random_range(0..vs.len())]],
        Placement::Vertex(u) => vec![*u],
        Placement::Set(vs) => vs.clone(),
    }
}

/// Runs the process from the configured placement until absorption.
pub fn simulate_to_absorption<R: Rng + ?Sized>(g: &Graph, cfg: &MoranConfig, rng: &mut R) -> Result<Absorption> {
    cfg.validate(g)?;
    g.require_connected()?;
    let start = resolve_placement(&cfg.placement, g.order(), rng);
    Ok(Simulator::new(g, cfg.r, cfg.engine).run(&start, cfg.max_steps, rng))
}

/// Runs the process from an explicit initial state.
pub fn simulate_from<R: Rng + ?Sized>(
    g: &Graph,
    start: &MutantState,
    r: f64,
    max_steps: u64,
    engine: Engine,
    rng: &mut R,
) -> Result<Absorption> {
    super::check_fitness(r)?;
    if start.len() != g.order() {
        return Err(Error::InvalidParameter(format!(
            "state has {} bits for a graph of order {}",
            start.len(),
            g.order()
        )));
    }
    g.require_connected()?;
    let vertices: Vec<usize> = start.iter().collect();
    Ok(Simulator::new(g, r, engine).run(&vertices, max_steps, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixationEstimate {
    /// `fixations / (fixations + extinctions)`; truncated trials are excluded.
    pub probability: f64,
    pub trials: u64,
    pub fixations: u64,
    pub extinctions: u64,
    pub truncated: u64,
    pub std_error: f64,
    pub seed: u64,
    /// Mean number of state-changing events over completed trials.
    pub mean_absorption_steps: f64,
    pub engine: Engine,
}

impl FixationEstimate {
    pub fn completed(&self) -> u64 {
        self.fixations + self.extinctions
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    fixations: u64,
    extinctions: u64,
    truncated: u64,
    steps: u128,
}

impl Tally {
    fn record(mut self, a: Absorption) -> Self {
        match a.outcome {
            Outcome::Fixation => self.fixations += 1,
            Outcome::Extinction => self.extinctions += 1,
            Outcome::Truncated => {
                self.truncated += 1;
                return self;
            }
        }
        self.steps += a.steps as u128;
        self
    }

    fn merge(self, o: Tally) -> Self {
        Tally {
            fixations: self.fixations + o.fixations,
            extinctions: self.extinctions + o.extinctions,
            truncated: self.truncated + o.truncated,
            steps: self.steps + o.steps,
        }
    }
}

/// Estimates the fixation probability from `trials` independent runs. Trial
/// `t` draws from stream `t` of `master_seed`, and the tally is pure integer
/// counting, so the result is identical for every thread count.
pub fn estimate_fixation(g: &Graph, cfg: &MoranConfig, trials: u64, master_seed: u64) -> Result<FixationEstimate> {
    cfg.validate(g)?;
    g.require_connected()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let engine = cfg.engine.resolve(g);
    let tally = (0..trials)
        .into_par_iter()
        .map_init(
            || Simulator::new(g, cfg.r, engine),
            |sim, t| {
                let mut rng: SimRng = stream_rng(master_seed, t);
                let start = resolve_placement(&cfg.placement, g.order(), &mut rng);
                sim.run(&start, cfg.max_steps, &mut rng)
            },
        )
        .fold(Tally::default, Tally::record)
        .reduce(Tally::default, Tally::merge);

    let completed = tally.fixations + tally.extinctions;
    let (probability, std_error, mean_steps) = if completed == 0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let p = tally.fixations as f64 / completed as f64;
        (
            p,
            (p * (1.0 - p) / completed as f64).sqrt(),
            tally.steps as f64 / completed as f64,
        )
    };
    Ok(FixationEstimate {
        probability,
        trials,
        fixations: tally.fixations,
        extinctions: tally.extinctions,
        truncated: tally.truncated,
        std_error,
        seed: master_seed,
        mean_absorption_steps: mean_steps,
        engine,
    })
}
