use evograph::graph::{generate, random_connected, Graph, GraphFamily};
use evograph::moran::{
    birth_death_fixation, estimate_fixation, exact_fixation, expected_hitting_time, generic_upper_bound, lambda_bounds,
    simulate_hitting_time, transitions, MoranConfig, MutantState,
};
use evograph::rng::stream_rng;
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = Graph> {
    (2usize..=8, 0.0f64..0.8, any::<u64>()).prop_map(|(n, p, seed)| {
        let mut rng = stream_rng(seed, 0);
        random_connected(n, p, &mut rng).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_rows_sum_to_one(g in small_graph(), r in 0.2f64..5.0) {
        let n = g.order();
        for mask in 0..(1u64 << n) {
            let t = transitions(&g, &MutantState::from_mask(n, mask), r);
            let total = t.stay + t.moves.iter().map(|m| m.1).sum::<f64>();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(t.moves.iter().all(|m| m.1 > 0.0));
        }
    }

    #[test]
    fn absorption_probabilities_are_valid(g in small_graph(), r in 0.5f64..4.0) {
        let sol = exact_fixation(&g, r).unwrap();
        prop_assert_eq!(sol.h[0], 0.0);
        prop_assert_eq!(*sol.h.last().unwrap(), 1.0);
        prop_assert!(sol.h.iter().all(|&h| (-1e-12..=1.0 + 1e-12).contains(&h)));
        prop_assert!(sol.residual <= 1e-12);
        let mean = sol.vertex.iter().sum::<f64>() / g.order() as f64;
        prop_assert!((mean - sol.fixation_probability).abs() < 1e-15);
    }

    #[test]
    fn bounds_sandwich_exact_value(g in small_graph(), ri in 0usize..4) {
        let r = [1.1, 1.5, 2.0, 3.0][ri];
        let f = exact_fixation(&g, r).unwrap().fixation_probability;
        let lb = lambda_bounds(&g).unwrap();
        let gub = generic_upper_bound(&g).unwrap().value(r);
        prop_assert!(lb.lower(r) <= f + 1e-9, "lower {} > {}", lb.lower(r), f);
        prop_assert!(f <= lb.upper(r) + 1e-9, "upper {} < {}", lb.upper(r), f);
        prop_assert!(f <= gub + 1e-9, "generic {} < {}", gub, f);
    }

    #[test]
    fn fixation_nondecreasing_in_r(g in small_graph()) {
        let grid = [0.5, 0.8, 1.0, 1.2, 1.5, 2.0, 3.0, 5.0];
        let values: Vec<f64> = grid.iter().map(|&r| exact_fixation(&g, r).unwrap().fixation_probability).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn regular_graphs_are_isothermal(n in 3usize..=12, ri in 0usize..4, cycle in any::<bool>()) {
        let r = [1.1, 1.5, 2.0, 3.0][ri];
        let family = if cycle || n > 9 { GraphFamily::Cycle { n } } else { GraphFamily::Complete { n } };
        let g = generate(&family).unwrap();
        let f = exact_fixation(&g, r).unwrap().fixation_probability;
        prop_assert!((f - birth_death_fixation(n, r)).abs() < 1e-9);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_solver() {
    let mut rng = stream_rng(2024, 0);
    let mut graphs: Vec<Graph> = (0..6)
        .map(|i| random_connected(4 + i % 5, 0.3, &mut rng).unwrap())
        .collect();
    graphs.push(generate(&GraphFamily::Star { leaves: 7 }).unwrap());
    graphs.push(generate(&GraphFamily::CliqueWheel { n: 4 }).unwrap());
    for (i, g) in graphs.iter().enumerate() {
        let exact = exact_fixation(g, 1.6).unwrap().fixation_probability;
        let est = estimate_fixation(g, &MoranConfig::new(1.6), 100_000, i as u64).unwrap();
        assert!(
            (est.probability - exact).abs() <= 4.0 * est.std_error,
            "graph {i}: {} vs {exact}",
            est.probability
        );
    }
}

#[test]
fn weighted_star_tracks_exact_solve() {
    let g = generate(&GraphFamily::WeightedStar { leaves: 10, eps: 1e-6 }).unwrap();
    let exact = exact_fixation(&g, 2.0).unwrap().fixation_probability;
    let est = estimate_fixation(&g, &MoranConfig::new(2.0), 2_000, 5).unwrap();
    assert!((est.probability - exact).abs() <= 3.0 * est.std_error + 1e-3);
}

#[test]
fn hitting_time_monte_carlo() {
    for m in [2, 5, 10] {
        let est = simulate_hitting_time(m, 2.0 / 3.0, 100_000, m).unwrap();
        let exact = expected_hitting_time(m, 2.0 / 3.0).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.std_error,
            "m={m}: {} vs {exact}",
            est.mean
        );
    }
}
