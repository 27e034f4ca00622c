//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p evograph-validation --test acceptance`.

use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use evograph::aggregation::{
    aggregate_step, complete_graph_convergence, complete_graph_trajectory, convergence_time_bound, degree_of_influence,
    limit_fitness_bounds, mutant_count, potential, potential_increment, run_to_convergence, FitnessVector,
    InfluenceMode, DEFAULT_PLACEMENT_CAP,
};
use evograph::control::{continuous_bound, run_continuous_control, run_phase_control, ControlConfig, StabilizerPolicy};
use evograph::graph::{clique_wheel_clique_vertices, clique_wheel_ring_vertices, generate, random_connected};
use evograph::moran::{
    birth_death_fixation, estimate_fixation, exact_fixation, expected_hitting_time, generic_upper_bound, lambda_bounds,
    simulate_hitting_time, Engine, MoranConfig, Placement,
};
use evograph::rng::{derive_seed, stream_rng};
use evograph::{Graph, GraphFamily};
use evograph_validation::{note, Suite, Verdict};
use rand::Rng;

const AC1_TOL: f64 = 1e-9;
const AC1_BUDGET: Duration = Duration::from_secs(60);
const AC1_R: [f64; 4] = [1.1, 1.5, 2.0, 3.0];

const AC2_TOL: f64 = 1e-9;

const AC3_RANDOM_GRAPHS: usize = 50;
const AC3_TRIALS: u64 = 100_000;
const AC3_R: f64 = 1.5;
const AC3_SE_MULTIPLE: f64 = 4.0;
const AC3_MIN_FRACTION: f64 = 0.95;
const AC3_BUDGET: Duration = Duration::from_secs(600);
const AC3_SEED: u64 = 0xac03;

const AC4_SLACK: f64 = 1e-9;
const AC4_R: [f64; 4] = [1.1, 1.5, 2.0, 3.0];

const AC5_LEAVES: usize = 200;
const AC5_R: f64 = 2.0;
const AC5_TRIALS: u64 = 200_000;
const AC5_CENTER: f64 = 0.75;
const AC5_HALF_WIDTH: f64 = 0.03;
const AC5_SEED: u64 = 0xac05;

const AC6_SIZES: [usize; 3] = [10, 20, 40];
const AC6_R: f64 = 1.25;
const AC6_TRIALS: u64 = 200_000;
const AC6_CLIQUE_MAX: f64 = 0.05;
const AC6_SE_MULTIPLE: f64 = 3.0;
const AC6_BUDGET: Duration = Duration::from_secs(30 * 60);
const AC6_SEED: u64 = 0xac06;

const AC7_LEAVES: usize = 10;
const AC7_EDGE_EPS: f64 = 1e-6;
const AC7_R: f64 = 2.0;
const AC7_TOL: f64 = 1e-2;

const AC8_P: f64 = 2.0 / 3.0;
const AC8_M: [u64; 3] = [2, 5, 10];
const AC8_TRIALS: u64 = 100_000;
const AC8_SE_MULTIPLE: f64 = 3.0;
const AC8_LONG_M: u64 = 200;
const AC8_RATIO: (f64, f64) = (2.9, 3.1);
const AC8_SEED: u64 = 0xac08;

const AC9_RUNS: u64 = 1_000;
const AC9_STEPS: usize = 100;
const AC9_DECREASE_TOL: f64 = 1e-12;
const AC9_REL_TOL: f64 = 1e-12;
/// Rounding floor for the increment comparison: the observed increment is a
/// difference of two potentials, so it carries an absolute error of a few
/// ulps of `phi`.
const AC9_ULPS: f64 = 64.0;
const AC9_BUDGET: Duration = Duration::from_secs(300);
const AC9_SEED: u64 = 0xac09;

const AC10_N: [usize; 3] = [3, 10, 100];
const AC10_R: [f64; 3] = [1.5, 2.0, 4.0];
const AC10_K: usize = 200;
const AC10_TOL: f64 = 1e-12;

const GRID_N: [usize; 3] = [10, 50, 100];
const GRID_R: [f64; 3] = [1.5, 2.0, 4.0];
const GRID_EPS: [f64; 2] = [1e-3, 1e-6];
const GRID_MAX_ITERS: u64 = 10_000_000;

const AC12_CORNER_N: [usize; 2] = [50, 100];
const AC12_CORNER_R: f64 = 2.0;

const AC13_TOL: f64 = 1e-12;

const AC14_N: [usize; 3] = [20, 50, 100];
const AC14_R: [f64; 3] = [1.5, 2.0, 3.0];
const AC14_BETA: [f64; 2] = [0.1, 0.2];
const AC14_ALPHA: [f64; 3] = [0.1, 0.3, 0.5];
const AC14_DELTA: [f64; 2] = [0.1, 0.01];
const AC14_EPS: f64 = 1e-4;
const AC14_FIXED: (usize, f64, f64, f64) = (101, 2.0, 0.1, 0.01);

fn grid_alphas(n: usize) -> [f64; 3] {
    [1.0 / n as f64, 0.1, 0.5]
}

fn corpus() -> Vec<(String, Graph)> {
    let mut rng = stream_rng(AC3_SEED, 0);
    let mut out = Vec::new();
    for i in 0..AC3_RANDOM_GRAPHS {
        let n = 2 + i % 7;
        let p = 0.1 + 0.15 * (i % 5) as f64;
        let g = random_connected(n, p, &mut rng).unwrap();
        out.push((format!("random#{i}(n={n})"), g));
    }
    for family in [
        GraphFamily::Star { leaves: 7 },
        GraphFamily::Path { n: 8 },
        GraphFamily::Cycle { n: 8 },
    ] {
        out.push((family.label(), generate(&family).unwrap()));
    }
    out
}

fn ac01() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 2..=12 {
        let g = generate(&GraphFamily::Complete { n }).unwrap();
        for r in AC1_R {
            let f = exact_fixation(&g, r).unwrap().fixation_probability;
            worst = worst.max((f - birth_death_fixation(n, r)).abs());
            cases += 1;
        }
    }
    Verdict::new(
        worst <= AC1_TOL,
        format!("{cases} cases, max |exact - rho| = {worst:.2e} (tol {AC1_TOL:.0e})"),
    )
}

fn ac02() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 3..=12 {
        let g = generate(&GraphFamily::Cycle { n }).unwrap();
        for r in AC1_R {
            let f = exact_fixation(&g, r).unwrap().fixation_probability;
            worst = worst.max((f - birth_death_fixation(n, r)).abs());
            cases += 1;
        }
    }
    Verdict::new(
        worst <= AC2_TOL,
        format!("{cases} cases, max |exact - rho| = {worst:.2e} (tol {AC2_TOL:.0e})"),
    )
}

fn ac03(graphs: &[(String, Graph)]) -> Verdict {
    let mut inside = 0;
    let mut worst = (0.0, String::new());
    for (i, (name, g)) in graphs.iter().enumerate() {
        let exact = exact_fixation(g, AC3_R).unwrap().fixation_probability;
        let est = estimate_fixation(g, &MoranConfig::new(AC3_R), AC3_TRIALS, derive_seed(AC3_SEED, i as u64)).unwrap();
        let z = (est.probability - exact).abs() / est.std_error;
        if z <= AC3_SE_MULTIPLE {
            inside += 1;
        }
        if z > worst.0 {
            worst = (z, name.clone());
        }
    }
    let fraction = inside as f64 / graphs.len() as f64;
    Verdict::new(
        fraction >= AC3_MIN_FRACTION,
        format!(
            "{inside}/{} graphs within {AC3_SE_MULTIPLE} SE at r={AC3_R}, {AC3_TRIALS} trials ({:.1}% >= {:.0}%); largest |z| = {:.2} on {}",
            graphs.len(),
            100.0 * fraction,
            100.0 * AC3_MIN_FRACTION,
            worst.0,
            worst.1
        ),
    )
}

fn ac04(graphs: &[(String, Graph)]) -> Verdict {
    let mut violations = Vec::new();
    let mut checks = 0;
    for (name, g) in graphs {
        let gub = generic_upper_bound(g).unwrap();
        let lb = lambda_bounds(g).unwrap();
        for r in AC4_R {
            let f = exact_fixation(g, r).unwrap().fixation_probability;
            checks += 3;
            if f > gub.value(r) + AC4_SLACK {
                violations.push(format!("{name} r={r} generic"));
            }
            if f < lb.lower(r) - AC4_SLACK {
                violations.push(format!("{name} r={r} lambda-lower"));
            }
            if f > lb.upper(r) + AC4_SLACK {
                violations.push(format!("{name} r={r} lambda-upper"));
            }
        }
    }
    Verdict::new(
        violations.is_empty(),
        format!(
            "{checks} inequalities over {} graphs, {} violations {violations:?}",
            graphs.len(),
            violations.len()
        ),
    )
}

fn ac05() -> Verdict {
    let g = generate(&GraphFamily::Star { leaves: AC5_LEAVES }).unwrap();
    let cfg = MoranConfig::new(AC5_R).with_engine(Engine::Rejection);
    let est = estimate_fixation(&g, &cfg, AC5_TRIALS, AC5_SEED).unwrap();
    let gub = generic_upper_bound(&g).unwrap().value(AC5_R);
    let in_window = (est.probability - AC5_CENTER).abs() <= AC5_HALF_WIDTH;
    let truncated_free = est.truncated == 0;
    Verdict::new(
        in_window && gub > est.probability && truncated_free,
        format!(
            "star({AC5_LEAVES}) r={AC5_R}: estimate {:.5} +- {:.5} in [{:.2}, {:.2}], generic upper {gub:.5} > estimate, {} truncated",
            est.probability,
            est.std_error,
            AC5_CENTER - AC5_HALF_WIDTH,
            AC5_CENTER + AC5_HALF_WIDTH,
            est.truncated
        ),
    )
}

fn ac06() -> Verdict {
    let mut clique = Vec::new();
    let mut last = (0.0, 0.0);
    let mut lines = Vec::new();
    for (i, &n) in AC6_SIZES.iter().enumerate() {
        let g = generate(&GraphFamily::CliqueWheel { n }).unwrap();
        let run = |vs: Vec<usize>, stream: u64| {
            let cfg = MoranConfig::new(AC6_R).with_placement(Placement::UniformOver(vs));
            estimate_fixation(&g, &cfg, AC6_TRIALS, derive_seed(AC6_SEED, stream)).unwrap()
        };
        let hc = run(clique_wheel_clique_vertices(n), 2 * i as u64);
        let hr = run(clique_wheel_ring_vertices(n), 2 * i as u64 + 1);
        let f = (hc.probability + hr.probability) / 2.0;
        let se = 0.5 * (hc.std_error.powi(2) + hr.std_error.powi(2)).sqrt();
        let rho = birth_death_fixation(2 * n, AC6_R);
        lines.push(format!(
            "n={n}: h_clique {:.5}+-{:.5}, h_ring {:.5}+-{:.5}, f {f:.5}+-{se:.5}, rho(2n) {rho:.5}",
            hc.probability, hc.std_error, hr.probability, hr.std_error
        ));
        clique.push(hc.probability);
        last = (f, se);
    }
    for l in &lines {
        note(6, l);
    }
    let decreasing = clique.windows(2).all(|w| w[1] < w[0]);
    let small = *clique.last().unwrap() < AC6_CLIQUE_MAX;
    let n = *AC6_SIZES.last().unwrap();
    let threshold = birth_death_fixation(2 * n, AC6_R) - AC6_SE_MULTIPLE * last.1;
    let suppressed = last.0 < threshold;
    Verdict::new(
        decreasing && small && suppressed,
        format!(
            "(a) h_clique decreasing: {decreasing}, h_clique(n={n}) = {:.5} < {AC6_CLIQUE_MAX}: {small}; (b) f(n={n}) = {:.5} < rho(2n) - {AC6_SE_MULTIPLE} SE = {threshold:.5}: {suppressed}",
            clique.last().unwrap(),
            last.0
        ),
    )
}

fn ac07() -> Verdict {
    let target = 1.0 / (AC7_LEAVES as f64 + 1.0);
    let at = |eps: f64| {
        let g = generate(&GraphFamily::WeightedStar {
            leaves: AC7_LEAVES,
            eps,
        })
        .unwrap();
        exact_fixation(&g, AC7_R).unwrap().fixation_probability
    };
    let f = at(AC7_EDGE_EPS);
    for eps in [1e-9, 1e-12] {
        note(
            7,
            &format!("edge weight {eps:.0e}: exact {:.7} (1/11 = {target:.7})", at(eps)),
        );
    }
    Verdict::new(
        (f - target).abs() <= AC7_TOL,
        format!(
            "weighted_star({AC7_LEAVES}, {AC7_EDGE_EPS:.0e}) r={AC7_R}: exact {f:.7}, |f - 1/11| = {:.5} (tol {AC7_TOL:.0e})",
            (f - target).abs()
        ),
    )
}

fn ac08() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in AC8_M {
        let est = simulate_hitting_time(m, AC8_P, AC8_TRIALS, derive_seed(AC8_SEED, m)).unwrap();
        let exact = expected_hitting_time(m, AC8_P).unwrap();
        let z = (est.mean - exact).abs() / est.std_error;
        ok &= z <= AC8_SE_MULTIPLE;
        parts.push(format!("m={m}: {exact:.4} vs {:.4} (|z| {z:.2})", est.mean));
    }
    let ratio = expected_hitting_time(AC8_LONG_M, AC8_P).unwrap() / AC8_LONG_M as f64;
    let in_range = ratio >= AC8_RATIO.0 && ratio <= AC8_RATIO.1;
    Verdict::new(
        ok && in_range,
        format!(
            "{}; mu_1/m at m={AC8_LONG_M} = {ratio:.4} in [{}, {}]",
            parts.join(", "),
            AC8_RATIO.0,
            AC8_RATIO.1
        ),
    )
}

fn ac09() -> Verdict {
    let mut worst_drop: f64 = 0.0;
    let mut worst_excess: f64 = 0.0;
    let mut worst_rel_resolved: f64 = 0.0;
    let mut failures = 0u64;
    let mut steps = 0u64;
    let mut floor_steps = 0u64;
    for run in 0..AC9_RUNS {
        let mut rng = stream_rng(AC9_SEED, run);
        let n = rng.random_range(2..=12);
        let p = rng.random_range(0.0..0.7);
        let g = random_connected(n, p, &mut rng).unwrap();
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let mut cur = FitnessVector::new(values).unwrap();
        for _ in 0..AC9_STEPS {
            let next = aggregate_step(&g, &cur).unwrap();
            let (before, after) = (potential(&g, &cur), potential(&g, &next));
            let observed = after - before;
            let predicted = potential_increment(&g, &cur);
            let floor = AC9_ULPS * f64::EPSILON * after;
            let tol = AC9_REL_TOL * predicted.abs() + floor;
            let err = (observed - predicted).abs();
            worst_drop = worst_drop.max(-observed);
            worst_excess = worst_excess.max(err / tol);
            if floor > AC9_REL_TOL * predicted.abs() {
                floor_steps += 1;
            } else {
                worst_rel_resolved = worst_rel_resolved.max(err / predicted.abs());
            }
            if observed < -AC9_DECREASE_TOL || err > tol {
                failures += 1;
            }
            steps += 1;
            cur = next;
        }
    }
    Verdict::new(
        failures == 0,
        format!(
            "{AC9_RUNS} runs x {AC9_STEPS} steps: largest decrease {worst_drop:.2e} (tol {AC9_DECREASE_TOL:.0e}); \
             increment error <= {AC9_REL_TOL:.0e} relative + {AC9_ULPS} ulp(phi) floor, worst use {worst_excess:.3}; \
             {} steps resolvable at 1e-12 relative, worst relative error there {worst_rel_resolved:.2e}; {failures} failures",
            steps - floor_steps
        ),
    )
}

fn ac10() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in AC10_N {
        for r in AC10_R {
            let t = complete_graph_trajectory(n, 1.0 / n as f64, r, AC10_K).unwrap();
            for k in 0..=AC10_K {
                worst = worst.max((t.delta[k] / t.delta_closed_form(k) - 1.0).abs());
            }
        }
    }
    let g = generate(&GraphFamily::Complete { n: 2 }).unwrap();
    let next = aggregate_step(&g, &FitnessVector::new(vec![2.0, 1.0]).unwrap()).unwrap();
    let k2 = next.values().iter().map(|x| (x - 5.0 / 3.0).abs()).fold(0.0, f64::max);
    Verdict::new(
        worst <= AC10_TOL && k2 <= AC10_TOL,
        format!("max |Delta/closed - 1| = {worst:.2e}, K2 one step |r - 5/3| = {k2:.2e} (tol {AC10_TOL:.0e})"),
    )
}

struct GridRun {
    n: usize,
    r: f64,
    eps: f64,
    alpha: f64,
    k_stop: u64,
    converged: bool,
    r0_hat: f64,
    two_class_k: u64,
}

fn grid_runs() -> Vec<GridRun> {
    let mut out = Vec::new();
    for n in GRID_N {
        let g = generate(&GraphFamily::Complete { n }).unwrap();
        for r in GRID_R {
            for eps in GRID_EPS {
                for alpha in grid_alphas(n) {
                    let m = mutant_count(n, alpha).unwrap();
                    let mutants: Vec<usize> = (0..m).collect();
                    let start = FitnessVector::with_mutants(n, &mutants, r).unwrap();
                    let run = run_to_convergence(&g, &start, eps, GRID_MAX_ITERS).unwrap();
                    let two = complete_graph_convergence(n, alpha, r, eps, GRID_MAX_ITERS).unwrap();
                    out.push(GridRun {
                        n,
                        r,
                        eps,
                        alpha,
                        k_stop: run.k_stop,
                        converged: run.converged,
                        r0_hat: two.r0_hat,
                        two_class_k: two.k_stop,
                    });
                }
            }
        }
    }
    out
}

fn ac11(runs: &[GridRun]) -> Verdict {
    let mut violations = 0;
    let mut worst = (f64::NEG_INFINITY, String::new());
    let mut agree = true;
    for g in runs {
        let allowed = convergence_time_bound(g.n, g.r, g.eps) + 1.0;
        let excess = g.k_stop as f64 - allowed;
        if !g.converged || excess > 0.0 {
            violations += 1;
        }
        if excess > worst.0 {
            worst = (
                excess,
                format!(
                    "n={} r={} eps={:.0e} alpha={:.3}: k_stop {} vs {allowed:.2}",
                    g.n, g.r, g.eps, g.alpha, g.k_stop
                ),
            );
        }
        agree &= g.two_class_k == g.k_stop;
    }
    note(
        11,
        &format!("full-vector and two-class k_stop agree on every cell: {agree}"),
    );
    note(
        11,
        "observed k_stop tracks ceil(ln((r-1)/eps) / ln((n-1)/(n-2))), about (n-3/2) ln((r-1)/eps)",
    );
    Verdict::new(
        violations == 0,
        format!(
            "{violations}/{} grid cells exceed (n-2) ln((r-1)/eps) + 1; worst excess {:.2} at {}",
            runs.len(),
            worst.0,
            worst.1
        ),
    )
}

fn ac12(runs: &[GridRun]) -> Verdict {
    let mut below = 0;
    let mut above = 0;
    let mut within_finite_n = 0;
    let mut worst = (f64::NEG_INFINITY, String::new());
    for g in runs {
        let b = limit_fitness_bounds(g.n, g.alpha, g.r).unwrap();
        let slack = 2.0 * g.eps;
        if g.r0_hat < b.lower - slack {
            below += 1;
        }
        let over = g.r0_hat - (b.upper + slack);
        if over > 0.0 {
            above += 1;
        }
        if over > worst.0 {
            worst = (
                over,
                format!(
                    "n={} r={} alpha={:.3}: r0_hat {:.7} vs upper {:.7}",
                    g.n, g.r, g.alpha, g.r0_hat, b.upper
                ),
            );
        }
        let a = b.mutants as f64 / g.n as f64;
        let base = 1.0 + a * (g.r - 1.0);
        let n = g.n as f64;
        let finite = base + a * (1.0 - a) / base * (g.r - 1.0).powi(2) * (n - 1.0) / (2.0 * n - 3.0);
        if g.r0_hat <= finite + slack {
            within_finite_n += 1;
        }
    }
    note(
        12,
        &format!(
            "with the finite-n factor (n-1)/(2n-3) in place of 1/2 the upper bound holds on {within_finite_n}/{} cells",
            runs.len()
        ),
    );
    let mut corner_ok = true;
    let mut corner = Vec::new();
    for n in AC12_CORNER_N {
        let c = complete_graph_convergence(n, 1.0 / n as f64, AC12_CORNER_R, GRID_EPS[1], GRID_MAX_ITERS).unwrap();
        let (lo, hi) = limit_fitness_bounds(n, 1.0 / n as f64, AC12_CORNER_R)
            .unwrap()
            .single_mutant
            .unwrap();
        let inside = c.r0_hat >= lo && c.r0_hat <= hi;
        corner_ok &= inside;
        corner.push(format!("n={n}: {:.6} in [{lo:.6}, {hi:.6}] {inside}", c.r0_hat));
    }
    Verdict::new(
        below == 0 && above == 0 && corner_ok,
        format!(
            "{below} cells below lower, {above}/{} above upper (slack 2 eps; worst {:.2e} at {}); single-mutant window {}",
            runs.len(),
            worst.0,
            worst.1,
            corner.join(", ")
        ),
    )
}

fn ac13() -> Verdict {
    let g = generate(&GraphFamily::Complete { n: 2 }).unwrap();
    let res = degree_of_influence(
        &g,
        2.0,
        0.5,
        &InfluenceMode::Exhaustive,
        1e-12,
        1_000,
        DEFAULT_PLACEMENT_CAP,
    )
    .unwrap();
    let err = (res.f_g - 2.0 / 3.0).abs();
    Verdict::new(
        err <= AC13_TOL,
        format!("f_K2(2) = {:.15}, |f - 2/3| = {err:.2e} (tol {AC13_TOL:.0e})", res.f_g),
    )
}

fn ac14() -> Verdict {
    let mut phase_cells = 0;
    let mut phase_bad = Vec::new();
    let mut skipped = 0;
    let mut cont_cells = 0;
    let mut cont_bad = Vec::new();
    let mut progress = 0;
    for n in AC14_N {
        for r in AC14_R {
            for beta in AC14_BETA {
                for alpha in AC14_ALPHA {
                    for delta in AC14_DELTA {
                        let cfg = ControlConfig::phases(n, alpha, r, beta, AC14_EPS, delta);
                        match run_phase_control(&cfg) {
                            Ok(rep) => {
                                phase_cells += 1;
                                progress += rep.progress_violations.len();
                                if !rep.healthy || rep.used as f64 > rep.bound.ceil() {
                                    phase_bad.push(format!(
                                        "n={n} r={r} b={beta} a={alpha} d={delta}: {} > {:.2}",
                                        rep.used, rep.bound
                                    ));
                                }
                            }
                            Err(evograph::Error::HypothesisViolated(_)) => skipped += 1,
                            Err(e) => phase_bad.push(format!("n={n} r={r} b={beta} a={alpha} d={delta}: {e}")),
                        }
                        let rep = run_continuous_control(&ControlConfig::continuous(n, alpha, r, beta, delta)).unwrap();
                        cont_cells += 1;
                        if !rep.healthy || rep.used as f64 > rep.bound.ceil() {
                            cont_bad.push(format!(
                                "n={n} r={r} b={beta} a={alpha} d={delta}: {} > {:.2}",
                                rep.used, rep.bound
                            ));
                        }
                    }
                }
            }
        }
    }
    for policy in [StabilizerPolicy::FixedPrefix, StabilizerPolicy::Random { seed: 14 }] {
        let mut worst: f64 = 0.0;
        let mut over = 0;
        for n in AC14_N {
            for r in AC14_R {
                for beta in AC14_BETA {
                    for alpha in AC14_ALPHA {
                        let cfg = ControlConfig::phases(n, alpha, r, beta, AC14_EPS, 0.1).with_policy(policy);
                        let rep = run_phase_control(&cfg).unwrap();
                        worst = worst.max(rep.used as f64 / rep.bound);
                        over += usize::from(rep.used as f64 > rep.bound.ceil());
                    }
                }
            }
        }
        note(
            14,
            &format!("phase policy {policy:?} at delta=0.1: {over} cells over the bound, max used/bound {worst:.3}"),
        );
    }
    note(
        14,
        &format!("phase progress violations (limit not decreasing): {progress}"),
    );

    let (n, r, beta, delta) = AC14_FIXED;
    let bound = continuous_bound(n, r, beta, delta).unwrap();
    let counts: Vec<u64> = AC14_ALPHA
        .iter()
        .map(|&alpha| {
            run_continuous_control(&ControlConfig::continuous(n, alpha, r, beta, delta))
                .unwrap()
                .used
        })
        .collect();
    let independent = counts.iter().all(|&c| c as f64 <= bound.ceil());
    Verdict::new(
        phase_bad.is_empty() && cont_bad.is_empty() && independent,
        format!(
            "phases {}/{phase_cells} within ceil(bound) ({skipped} cells refused by the eps/delta hypothesis) {phase_bad:?}; \
             continuous {}/{cont_cells} within ceil(bound) {cont_bad:?}; n={n} r={r} beta={beta} delta={delta}: \
             alpha {AC14_ALPHA:?} used {counts:?} <= {bound:.2}",
            phase_cells - phase_bad.len(),
            cont_cells - cont_bad.len()
        ),
    )
}

fn cli(args: &[String]) -> i32 {
    let argv = std::iter::once("evograph".to_string()).chain(args.iter().cloned());
    evograph_cli::run(argv)
}

fn ac15(dir: &Path) -> Verdict {
    let p = |name: &str| dir.join(name).display().to_string();
    let runs: Vec<(String, Vec<String>)> = vec![
        ("moran-mc".into(), vec!["moran --family star --n 8 --r 1.7 --trials 20000 --seed 5".into()]),
        ("moran-exact".into(), vec![format!("moran --family clique-wheel --n 4 --r 1.3 --method exact --placement ring --states {}", p("states.csv"))]),
        ("bounds".into(), vec!["bounds --family cycle --n 6 --r 1.5,2,3 --exact --format csv".into()]),
        ("aggregate".into(), vec![format!("aggregate --family path --n 9 --r 3 --alpha 0.3 --trajectory {}", p("agg.csv"))]),
        ("influence".into(), vec!["aggregate --family cycle --n 10 --r 2 --alpha 0.3 --mode influence --samples 30 --per-placement --seed 8 --format csv".into()]),
        ("control".into(), vec![format!("control --n 40 --alpha 0.5 --r 2 --beta 0.2 --delta 0.1 --policy random --seed 3 --trajectory {}", p("ctl.csv"))]),
        ("continuous".into(), vec!["control --mode continuous --n 60 --alpha 0.2 --r 3 --beta 0.1 --delta 0.05".into()]),
        ("sweep".into(), vec!["sweep --task moran --set family=cycle --set trials=5000 --axis n=5,7 --axis r=1.2,2 --seed 4 --format csv".into()]),
        ("generate".into(), vec!["generate --family clique-wheel --n 5".into()]),
    ];
    let side = [p("states.csv"), p("agg.csv"), p("ctl.csv")];
    let mut mismatched = Vec::new();
    for (name, cmd) in &runs {
        let mut first: Vec<String> = cmd[0].split_whitespace().map(String::from).collect();
        first.extend(["--threads".into(), "1".into(), "--out".into(), p("a.out")]);
        if cli(&first) != 0 {
            mismatched.push(format!("{name}: first run failed"));
            continue;
        }
        let original = std::fs::read(dir.join("a.out")).unwrap();
        let sides: Vec<Option<Vec<u8>>> = side.iter().map(|s| std::fs::read(s).ok()).collect();
        let again = vec![
            "--config".into(),
            p("a.out"),
            "--threads".into(),
            "4".into(),
            "--out".into(),
            p("b.out"),
        ];
        if cli(&again) != 0 {
            mismatched.push(format!("{name}: regeneration failed"));
            continue;
        }
        if std::fs::read(dir.join("b.out")).unwrap() != original {
            mismatched.push(format!("{name}: artifact differs"));
        }
        for (s, before) in side.iter().zip(sides) {
            if before.is_some() && std::fs::read(s).ok() != before {
                mismatched.push(format!("{name}: {s} differs"));
            }
        }
        for s in &side {
            let _ = std::fs::remove_file(s);
        }
    }
    Verdict::new(
        mismatched.is_empty(),
        format!(
            "{} artifacts regenerated from their embedded spec with --threads 1 then 4; mismatches {mismatched:?}",
            runs.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut suite = Suite::new();
    suite.check(
        1,
        "closed-form Moran agreement on complete graphs",
        Some(AC1_BUDGET),
        ac01,
    );
    suite.check(2, "cycles are isothermal", None, ac02);
    let graphs = corpus();
    suite.check(3, "Monte Carlo agrees with the exact solver", Some(AC3_BUDGET), || {
        ac03(&graphs)
    });
    suite.check(4, "exact fixation inside the generic and lambda bounds", None, || {
        ac04(&graphs)
    });
    suite.check(5, "star tightness near 1 - 1/r^2", None, ac05);
    suite.check(6, "clique-wheel suppressor trend", Some(AC6_BUDGET), ac06);
    suite.check(7, "weighted-star source effect", None, ac07);
    suite.check(8, "hitting-time closed form", None, ac08);
    suite.check(
        9,
        "potential monotonicity and increment identity",
        Some(AC9_BUDGET),
        ac09,
    );
    suite.check(10, "complete-graph Delta(k) closed form and K2 fixed point", None, ac10);
    let runs = grid_runs();
    suite.check(11, "complete-graph convergence-time bound", None, || ac11(&runs));
    suite.check(12, "limit-fitness bounds", None, || ac12(&runs));
    suite.check(13, "degree of influence on K2 equals fixation probability", None, ac13);
    suite.check(14, "control mechanisms within their bounds", None, ac14);
    let dir = tempfile::tempdir().unwrap();
    suite.check(15, "CLI artifacts reproduce byte for byte", None, || ac15(dir.path()));
    suite.finish()
}
