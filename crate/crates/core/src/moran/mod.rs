//! The all-or-nothing birth-death process.
//!
//! At every step one individual is chosen for reproduction with probability
//! proportional to its fitness (`r` for mutants, 1 for residents) and its
//! offspring replaces a neighbor chosen proportionally to edge weight. On a
//! connected graph the process is absorbed at the all-resident or all-mutant
//! state with probability one.

mod bounds;
mod closed_form;
mod exact;
mod kernel;
mod sim;
mod state;

pub use bounds::{generic_upper_bound, lambda_bounds, EdgeQuantities, GenericUpperBound, LambdaBounds};
pub use closed_form::{birth_death_fixation, expected_hitting_time, simulate_hitting_time, HittingTimeEstimate};
pub use exact::{exact_fixation, exact_fixation_with, AbsorptionSolution, ExactOptions, SolveMethod};
pub use kernel::{flip_rates, step, transitions, Transitions};
pub use sim::{
    estimate_fixation, simulate_from, simulate_to_absorption, Absorption, Engine, FixationEstimate, Outcome, Simulator,
};
pub use state::MutantState;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default cap on state-changing events per trial.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000_000;

/// Where the initial mutant(s) go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// One mutant on a uniformly random vertex, resampled per trial.
    Uniform,
    /// One mutant on a uniformly random vertex of the given subset.
    UniformOver(Vec<usize>),
    Vertex(usize),
    Set(Vec<usize>),
}

impl Placement {
    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |u: usize| {
            if u < n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("placement vertex {u} outside 0..{n}")))
            }
        };
        match self {
            Placement::Uniform => Ok(()),
            Placement::Vertex(u) => check(*u),
            Placement::UniformOver(vs) | Placement::Set(vs) => {
                if vs.is_empty() && matches!(self, Placement::UniformOver(_)) {
                    return Err(Error::InvalidParameter("placement subset is empty".into()));
                }
                vs.iter().try_for_each(|&u| check(u))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoranConfig {
    pub r: f64,
    pub placement: Placement,
    pub max_steps: u64,
    pub engine: Engine,
}

impl MoranConfig {
    pub fn new(r: f64) -> Self {
        MoranConfig {
            r,
            placement: Placement::Uniform,
            max_steps: DEFAULT_MAX_STEPS,
            engine: Engine::Auto,
        }
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub(crate) fn validate(&self, g: &Graph) -> Result<()> {
        check_fitness(self.r)?;
        self.placement.validate(g.order())
    }
}

pub(crate) fn check_fitness(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "mutant fitness must be finite and > 0, got {r}"
        )))
    }
}
