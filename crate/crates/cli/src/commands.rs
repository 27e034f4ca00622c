use std::path::Path;

use evograph::aggregation::{
    complete_graph_trajectory, convergence_time_bound, degree_of_influence, limit_fitness_bounds, mutant_count,
    run_to_convergence, FitnessVector, InfluenceMode,
};
use evograph::control::{run_continuous_control, run_phase_control, ControlConfig, StabilizerPolicy};
use evograph::graph::{clique_wheel_clique_vertices, clique_wheel_ring_vertices, parse_edge_list};
use evograph::moran::{
    estimate_fixation, exact_fixation_with, generic_upper_bound, lambda_bounds, Engine, ExactOptions, MoranConfig,
    MutantState, Placement,
};
use evograph::{Graph, GraphFamily};
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::output::{Artifact, SideFile, Table};

/// Largest order for which `--states` dumps the full solution.
pub const STATES_MAX_ORDER: usize = 8;

pub struct LoadedGraph {
    pub graph: Graph,
    pub label: String,
    pub family: Option<GraphFamily>,
}

impl LoadedGraph {
    fn tag(&self) -> &'static str {
        self.family.as_ref().map_or("custom", |f| f.tag())
    }

    fn describe(&self, a: &mut Artifact) {
        a.put("graph", self.label.clone());
        a.put("family", self.tag());
        a.put("n", self.graph.order());
    }
}

pub fn load_graph(args: &GraphArgs) -> Result<LoadedGraph, CliError> {
    if let Some(path) = &args.graph {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read graph {}: {e}", path.display())))?;
        let graph = parse_edge_list(&text)?;
        return Ok(LoadedGraph {
            graph,
            label: path.display().to_string(),
            family: None,
        });
    }
    let name = args
        .family
        .ok_or_else(|| CliError::usage("a graph needs --family or --graph"))?;
    let n = args.n.ok_or_else(|| CliError::usage("--family needs --n"))?;
    let family = match name {
        FamilyName::Complete => GraphFamily::Complete { n },
        FamilyName::Cycle => GraphFamily::Cycle { n },
        FamilyName::Path => GraphFamily::Path { n },
        FamilyName::Star => GraphFamily::Star { leaves: n },
        FamilyName::CliqueWheel => GraphFamily::CliqueWheel { n },
        FamilyName::WeightedStar => GraphFamily::WeightedStar {
            leaves: n,
            eps: args.edge_eps,
        },
    };
    let graph = family.generate()?;
    Ok(LoadedGraph {
        graph,
        label: family.label(),
        family: Some(family),
    })
}

pub fn generate(args: &GenerateArgs) -> Result<Artifact, CliError> {
    let g = load_graph(&args.graph)?;
    Ok(Artifact {
        body: Some(g.graph.to_edge_list()),
        ..Artifact::default()
    })
}

fn vertex_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CliError::usage(format!("`{t}` is not a vertex index")))
        })
        .collect()
}

fn parse_placement(spec: &str, g: &LoadedGraph) -> Result<Placement, CliError> {
    let side = |ring: bool| match g.family {
        Some(GraphFamily::CliqueWheel { n }) => Ok(Placement::UniformOver(if ring {
            clique_wheel_ring_vertices(n)
        } else {
            clique_wheel_clique_vertices(n)
        })),
        _ => Err(CliError::usage(format!(
            "placement `{spec}` needs --family clique-wheel"
        ))),
    };
    let placement = match spec {
        "uniform" => Placement::Uniform,
        "clique" => side(false)?,
        "ring" => side(true)?,
        _ => {
            if let Some(v) = spec.strip_prefix("vertex:") {
                Placement::Vertex(
                    v.parse()
                        .map_err(|_| CliError::usage(format!("`{v}` is not a vertex index")))?,
                )
            } else if let Some(vs) = spec.strip_prefix("set:") {
                Placement::Set(vertex_list(vs)?)
            } else {
                return Err(CliError::usage(format!(
                    "unknown placement `{spec}` (expected uniform, vertex:<id>, set:<ids>, clique or ring)"
                )));
            }
        }
    };
    placement.validate(g.graph.order())?;
    Ok(placement)
}

pub fn moran(args: &MoranArgs, seed: u64) -> Result<Artifact, CliError> {
    let g = load_graph(&args.graph)?;
    let placement = parse_placement(&args.placement, &g)?;
    let mut a = Artifact::default();
    g.describe(&mut a);
    a.put("r", args.r);
    a.put("method", serde_json::to_value(args.method).unwrap());
    a.put("placement", args.placement.clone());
    match args.method {
        Method::Mc => {
            let engine = match args.engine {
                EngineName::Auto => Engine::Auto,
                EngineName::Elided => Engine::Elided,
                EngineName::Rejection => Engine::Rejection,
            };
            let cfg = MoranConfig::new(args.r)
                .with_placement(placement)
                .with_engine(engine)
                .with_max_steps(args.max_steps);
            let est = estimate_fixation(&g.graph, &cfg, args.trials, seed)?;
            a.put("probability", est.probability);
            a.put("std_error", est.std_error);
            a.put("trials", est.trials);
            a.put("fixations", est.fixations);
            a.put("extinctions", est.extinctions);
            a.put("truncated", est.truncated);
            a.put("mean_steps", est.mean_absorption_steps);
            a.put("engine", est.engine.name());
            a.put("seed", seed);
            if est.truncated * 2 >= est.trials {
                a.failure = Some(CliError::runtime(format!(
                    "{} of {} trials hit --max-steps {}; the estimate is dominated by truncation",
                    est.truncated, est.trials, args.max_steps
                )));
            }
        }
        Method::Exact => {
            let n = g.graph.order();
            if args.states.is_some() && n > STATES_MAX_ORDER {
                return Err(CliError::usage(format!(
                    "--states is limited to n <= {STATES_MAX_ORDER}; graph has {n} vertices"
                )));
            }
            let opts = ExactOptions {
                cap: args.cap,
                ..ExactOptions::default()
            };
            let sol = exact_fixation_with(&g.graph, args.r, &opts)?;
            let p = match &placement {
                Placement::Uniform => sol.fixation_probability,
                Placement::Vertex(v) => sol.vertex[*v],
                Placement::UniformOver(vs) => sol.mean_over(vs),
                Placement::Set(vs) => sol.state(&MutantState::from_vertices(n, vs.iter().copied())),
            };
            a.put("probability", p);
            a.put("residual", sol.residual);
            a.put("solver", serde_json::to_value(sol.method).unwrap());
            a.put("sweeps", sol.sweeps);
            if let Some(path) = &args.states {
                let mut t = Table::new("states", &["bitmask", "h"]);
                t.rows = sol
                    .h
                    .iter()
                    .enumerate()
                    .map(|(m, &h)| vec![json!(m), json!(h)])
                    .collect();
                a.side_files.push(SideFile {
                    path: path.clone(),
                    table: t,
                });
                a.put("states_csv_path", path.display().to_string());
            }
        }
    }
    Ok(a)
}

pub fn bounds(args: &BoundsArgs) -> Result<Artifact, CliError> {
    let g = load_graph(&args.graph)?;
    let gub = generic_upper_bound(&g.graph)?;
    let lb = lambda_bounds(&g.graph)?;
    let mut a = Artifact::default();
    g.describe(&mut a);
    a.put("lambda", lb.lambda);
    let mut columns = vec![
        "r",
        "generic_upper",
        "argmax_u",
        "argmax_v",
        "lambda",
        "lambda_lower",
        "lambda_upper",
    ];
    if args.exact {
        columns.push("exact");
    }
    let mut t = Table::new("rows", &columns);
    for &r in &args.r {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::usage(format!("r must be finite and > 0, got {r}")));
        }
        let (upper, (u, v)) = gub.evaluate(r);
        let mut row = vec![
            json!(r),
            json!(upper),
            json!(u),
            json!(v),
            json!(lb.lambda),
            json!(lb.lower(r)),
            json!(lb.upper(r)),
        ];
        if args.exact {
            row.push(json!(
                exact_fixation_with(&g.graph, r, &ExactOptions::default())?.fixation_probability
            ));
        }
        t.rows.push(row);
    }
    a.table = Some(t);
    Ok(a)
}

fn is_complete(g: &Graph) -> bool {
    let n = g.order();
    !g.is_weighted() && g.edge_count() == n * (n - 1) / 2
}

pub fn aggregate(args: &AggregateArgs, seed: u64) -> Result<Artifact, CliError> {
    let g = load_graph(&args.graph)?;
    match args.mode {
        AggregateMode::Run => aggregate_run(args, &g),
        AggregateMode::Influence => aggregate_influence(args, &g, seed),
    }
}

fn influence_value(r0: f64, r: f64) -> Value {
    if r == 1.0 {
        Value::Null
    } else {
        json!((r0 - 1.0) / (r - 1.0))
    }
}

fn aggregate_run(args: &AggregateArgs, g: &LoadedGraph) -> Result<Artifact, CliError> {
    let n = g.graph.order();
    let m = mutant_count(n, args.alpha)?;
    let mutants = match &args.mutants {
        Some(s) => {
            let vs = vertex_list(s)?;
            if vs.len() != m {
                return Err(CliError::usage(format!(
                    "--mutants lists {} vertices but alpha * n rounds to {m}",
                    vs.len()
                )));
            }
            vs
        }
        None => (0..m).collect(),
    };
    if mutants.iter().any(|&v| v >= n) {
        return Err(CliError::usage(format!("mutant vertex outside 0..{n}")));
    }
    let start = FitnessVector::with_mutants(n, &mutants, args.r)?;
    let run = run_to_convergence(&g.graph, &start, args.eps, args.max_iters)?;
    let mut a = Artifact::default();
    g.describe(&mut a);
    a.put("r", args.r);
    a.put("alpha", args.alpha);
    a.put("mutants", m);
    a.put("mutant_vertices", json!(mutants));
    a.put("eps", args.eps);
    a.put("k_stop", run.k_stop);
    a.put("converged", run.converged);
    a.put("r0_hat", run.r0_hat);
    a.put("spread", run.spread);
    a.put("f", influence_value(run.r0_hat, args.r));
    a.put("phi_initial", run.trace[0].phi);
    a.put("phi_final", run.trace.last().unwrap().phi);

    let classes = is_complete(&g.graph) && m > 0 && m < n && args.r >= 1.0;
    if classes {
        let lb = limit_fitness_bounds(n, m as f64 / n as f64, args.r)?;
        a.put("convergence_bound", convergence_time_bound(n, args.r, args.eps));
        a.put("r0_lower", lb.lower);
        a.put("r0_upper", lb.upper);
    }
    if let Some(path) = &args.trajectory {
        let mut columns = vec!["k", "phi", "max_gap", "min_fitness", "max_fitness"];
        let class_values = if classes {
            columns.extend(["r1", "r2"]);
            Some(complete_graph_trajectory(
                n,
                m as f64 / n as f64,
                args.r,
                run.k_stop as usize,
            )?)
        } else {
            None
        };
        let mut t = Table::new("trajectory", &columns);
        for (i, p) in run.trace.iter().enumerate() {
            let mut row = vec![
                json!(p.k),
                json!(p.phi),
                json!(p.max_gap),
                json!(p.min_fitness),
                json!(p.max_fitness),
            ];
            if let Some(c) = &class_values {
                row.extend([json!(c.r1[i]), json!(c.r2[i])]);
            }
            t.rows.push(row);
        }
        a.side_files.push(SideFile {
            path: path.clone(),
            table: t,
        });
        a.put("trajectory_csv_path", path.display().to_string());
    }
    if !run.converged {
        a.failure = Some(CliError::runtime(format!(
            "no convergence to eps = {} within {} iterations",
            args.eps, args.max_iters
        )));
    }
    Ok(a)
}

fn aggregate_influence(args: &AggregateArgs, g: &LoadedGraph, seed: u64) -> Result<Artifact, CliError> {
    let mode = match args.samples {
        Some(samples) => InfluenceMode::Sampled { samples, seed },
        None => InfluenceMode::Exhaustive,
    };
    let res = degree_of_influence(
        &g.graph,
        args.r,
        args.alpha,
        &mode,
        args.eps,
        args.max_iters,
        args.cap as u128,
    )?;
    let mut a = Artifact::default();
    g.describe(&mut a);
    a.put("alpha", res.alpha);
    a.put("r", res.r);
    a.put("eps", args.eps);
    match mode {
        InfluenceMode::Exhaustive => a.put("mode", "exhaustive"),
        InfluenceMode::Sampled { samples, .. } => {
            a.put("mode", "sampled");
            a.put("samples", samples);
        }
    }
    a.put("mutants", res.mutants);
    a.put("placements", res.placements);
    a.put("f_G", if res.degenerate { Value::Null } else { json!(res.f_g) });
    a.put("r_0", res.r_0);
    a.put("degenerate", res.degenerate);
    a.put("all_converged", res.all_converged);
    if args.per_placement {
        let mut t = Table::new("per_placement", &["mutants", "r0", "f", "k_stop", "converged"]);
        for p in &res.per_placement {
            let set: Vec<String> = p.mutants.iter().map(|v| v.to_string()).collect();
            t.rows.push(vec![
                json!(set.join(" ")),
                json!(p.r0),
                influence_value(p.r0, res.r),
                json!(p.k_stop),
                json!(p.converged),
            ]);
        }
        a.table = Some(t);
    }
    if !res.all_converged {
        a.failure = Some(CliError::runtime(format!(
            "some placements did not converge to eps = {} within {} iterations",
            args.eps, args.max_iters
        )));
    }
    Ok(a)
}

pub fn control(args: &ControlArgs, seed: u64) -> Result<Artifact, CliError> {
    let phases = args.mode == ControlModeName::Phases;
    let report = if phases {
        let policy = match args.policy {
            PolicyName::HighestFitness => StabilizerPolicy::HighestFitness,
            PolicyName::Random => StabilizerPolicy::Random { seed },
            PolicyName::FixedPrefix => StabilizerPolicy::FixedPrefix,
        };
        let cfg =
            ControlConfig::phases(args.n, args.alpha, args.r, args.beta, args.eps, args.delta).with_policy(policy);
        run_phase_control(&cfg)?
    } else {
        run_continuous_control(&ControlConfig::continuous(
            args.n, args.alpha, args.r, args.beta, args.delta,
        ))?
    };
    let mut a = Artifact::default();
    a.put("mode", serde_json::to_value(args.mode).unwrap());
    a.put("n", args.n);
    a.put("alpha", args.alpha);
    a.put("r", args.r);
    a.put("beta", args.beta);
    if phases {
        a.put("eps", args.eps);
    }
    a.put("delta", args.delta);
    if phases {
        a.put("policy", serde_json::to_value(args.policy).unwrap());
        a.put("stopping_rule", "relative_spread");
    }
    a.put("mutants", report.mutants);
    a.put("stabilizers", report.stabilizers);
    a.put("residents", report.residents);
    a.put("used", report.used);
    a.put("bound", report.bound);
    a.put("healthy", report.healthy);
    a.put("guard_tripped", report.guard_tripped);
    if phases {
        a.put("progress_violations", json!(report.progress_violations));
    }
    if let Some(path) = &args.trajectory {
        let mut t = Table::new("trajectory", &["k_or_phase", "r1", "r2", "max_fitness"]);
        t.rows = report
            .trajectory
            .iter()
            .map(|p| vec![json!(p.step), json!(p.r1), json!(p.r2), json!(p.max_fitness)])
            .collect();
        a.side_files.push(SideFile {
            path: path.clone(),
            table: t,
        });
    }
    a.put(
        "trajectory_csv_path",
        args.trajectory.as_deref().map(|p: &Path| p.display().to_string()),
    );
    if report.guard_tripped {
        a.failure = Some(CliError::runtime(format!(
            "not healthy after {} {}, the guard at {}x the bound",
            report.used,
            if phases { "phases" } else { "iterations" },
            evograph::control::GUARD_FACTOR
        )));
    }
    Ok(a)
}
