use entrywise_core::simulation::{
    sample_connected_mask, sample_instance, sample_mask, sample_signed_instance,
};
use entrywise_core::{
    estimate_entry, fundamental_cycle, kernel_system, path_space_basis,
    path_space_basis_with_order, spanning_forest, variance_bound, CompletionGraph, Entry, Mask,
    NoiseSpec, Observations,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rank of an integer matrix over the rationals, by fraction-free elimination.
fn rational_rank(m: &DMatrix<i64>) -> usize {
    let mut a: Vec<Vec<i128>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] as i128).collect())
        .collect();
    let (rows, cols) = (a.len(), m.ncols());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let (f, g) = (a[rank][c], a[r][c]);
                for k in 0..cols {
                    a[r][k] = a[r][k] * f - a[rank][k] * g;
                }
                let gcd = a[r].iter().fold(0i128, |acc, &v| num_gcd(acc, v.abs()));
                if gcd > 1 {
                    a[r].iter_mut().for_each(|v| *v /= gcd);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn num_gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

/// Gauss-Markov variance of the best linear unbiased estimate of `u_i + w_j`
/// from `b_e = u_r + w_c + noise_e`: `c^T (X^T S^-1 X)^+ c`.
fn gls_variance(graph: &CompletionGraph, entry: Entry, sigma: impl Fn(Entry) -> f64) -> f64 {
    let (m, n) = (graph.rows(), graph.cols());
    let mut info = DMatrix::<f64>::zeros(m + n, m + n);
    for &(r, c) in graph.edges() {
        let w = 1.0 / sigma((r, c));
        let (a, b) = (r, m + c);
        info[(a, a)] += w;
        info[(b, b)] += w;
        info[(a, b)] += w;
        info[(b, a)] += w;
    }
    let pinv = info.pseudo_inverse(1e-10).unwrap();
    let mut c = DVector::zeros(m + n);
    c[entry.0] = 1.0;
    c[m + entry.1] = 1.0;
    c.dot(&(&pinv * &c))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn arb_mask() -> impl Strategy<Value = Mask> {
    (1usize..7, 1usize..7, any::<u64>()).prop_flat_map(|(m, n, seed)| {
        (0..=m * n).prop_map(move |k| sample_mask(m, n, k, seed).unwrap())
    })
}

fn arb_connected_mask() -> impl Strategy<Value = Mask> {
    (1usize..7, 1usize..7, any::<u64>()).prop_flat_map(|(m, n, seed)| {
        (m + n - 1..=m * n).prop_map(move |k| sample_connected_mask(m, n, k, seed).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_contains_known_and_matches_queries(mask in arb_mask()) {
        let g = CompletionGraph::build(&mask);
        let closure = g.reconstructible_set();
        for e in mask.known() {
            prop_assert!(closure.contains(e));
        }
        for i in 0..mask.rows() {
            for j in 0..mask.cols() {
                prop_assert_eq!(g.is_reconstructible((i, j)).unwrap(), closure.contains(&(i, j)));
            }
        }
        prop_assert_eq!(g.partition(), CompletionGraph::build(&mask.clone()).partition());
    }

    #[test]
    fn basis_structure(mask in arb_mask()) {
        let g = CompletionGraph::build(&mask);
        let (m, n) = (mask.rows(), mask.cols());
        for i in 0..m {
            for j in 0..n {
                let basis = path_space_basis(&g, (i, j)).unwrap();
                if !g.is_reconstructible((i, j)).unwrap() {
                    prop_assert!(basis.is_empty());
                    continue;
                }
                let comp = g.component_size(g.component_id(i));
                // first Betti number of the component plus one
                prop_assert_eq!(basis.len() + comp.blue + comp.red, comp.edges + 2);
                for chain in &basis.chains {
                    prop_assert!(chain.satisfies_boundary(m, n, (i, j)));
                    for &(e, _) in chain.terms() {
                        prop_assert!(g.has_edge(e));
                    }
                }
                let (_, c) = basis.coefficient_matrix();
                prop_assert_eq!(rational_rank(&c), basis.len());
            }
        }
    }

    #[test]
    fn chains_agree_on_rank_one_data(mask in arb_connected_mask(), seed in any::<u64>()) {
        let g = CompletionGraph::build(&mask);
        let a = sample_instance(mask.rows(), mask.cols(), seed);
        for i in 0..mask.rows() {
            for j in 0..mask.cols() {
                let truth = a.value((i, j)).ln();
                for chain in &path_space_basis(&g, (i, j)).unwrap().chains {
                    let v = chain.evaluate(|e| a.value(e).ln());
                    prop_assert!((v - truth).abs() <= 1e-10 * truth.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn forest_size_and_cycles(mask in arb_mask()) {
        let g = CompletionGraph::build(&mask);
        let f = spanning_forest(&g, None);
        prop_assert_eq!(f.tree_edges().len(), g.num_vertices() - g.num_components());
        for &e in g.edges() {
            if f.contains(e) {
                prop_assert!(fundamental_cycle(&f, e).is_err());
            } else {
                let c = fundamental_cycle(&f, e).unwrap();
                prop_assert!(c.is_cycle(mask.rows(), mask.cols()));
                prop_assert_eq!(c.coeff(e), 1);
                prop_assert!(c.weight() >= 4 && c.weight().is_multiple_of(2));
            }
        }
    }

    #[test]
    fn variance_matches_gauss_markov(mask in arb_connected_mask(), seed in any::<u64>()) {
        let g = CompletionGraph::build(&mask);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma: Vec<Option<f64>> = (0..mask.rows() * mask.cols())
            .map(|_| Some(rng.random_range(0.1..2.0)))
            .collect();
        let cols = mask.cols();
        let noise = NoiseSpec::per_entry(mask.rows(), cols, sigma.clone()).unwrap();
        for i in 0..mask.rows() {
            for j in 0..cols {
                let v = variance_bound(&g, (i, j), &noise).unwrap();
                let oracle = gls_variance(&g, (i, j), |(r, c)| sigma[r * cols + c].unwrap());
                prop_assert!(rel(v, oracle) < 1e-8, "{:?}: {} vs {}", (i, j), v, oracle);
            }
        }
    }

    #[test]
    fn weights_sum_to_one(mask in arb_connected_mask(), level in 0.0f64..2.0) {
        let g = CompletionGraph::build(&mask);
        let noise = NoiseSpec::Uniform(level);
        for e in g.reconstructible_set() {
            let s = kernel_system(&g, e, &noise).unwrap();
            prop_assert!((s.alpha.sum() - 1.0).abs() < 1e-12);
            prop_assert!(s.variance >= 0.0);
            if level > 0.0 {
                prop_assert!(s.sigma.clone().cholesky().is_some());
            }
        }
    }
}

#[test]
fn optimum_beats_random_feasible_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..10 {
        let mask = sample_connected_mask(6, 5, 16, seed).unwrap();
        let g = CompletionGraph::build(&mask);
        let s = kernel_system(&g, (seed as usize % 6, 2), &NoiseSpec::Uniform(0.7)).unwrap();
        let p = s.alpha.len();
        for _ in 0..1000 {
            let raw = DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
            let alpha = &raw / raw.sum();
            let v = alpha.dot(&(&s.sigma * &alpha));
            assert!(v >= s.variance - 1e-10);
        }
    }
}

#[test]
fn forest_choice_does_not_change_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..20 {
        let mask = sample_mask(7, 8, 22, seed).unwrap();
        let g = CompletionGraph::build(&mask);
        let noise = NoiseSpec::Uniform(0.4);
        for e in g.reconstructible_set().into_iter().take(6) {
            let mut order: Vec<usize> = (0..g.edges().len()).collect();
            order.shuffle(&mut rng);
            let a = path_space_basis(&g, e).unwrap();
            let b = path_space_basis_with_order(&g, e, &order).unwrap();
            let va = entrywise_core::optimal_alpha(entrywise_core::path_kernel(a, &noise).unwrap())
                .unwrap();
            let vb = entrywise_core::optimal_alpha(entrywise_core::path_kernel(b, &noise).unwrap())
                .unwrap();
            assert!(rel(va.variance, vb.variance) < 1e-10);
        }
    }
}

#[test]
fn exact_data_is_recovered_everywhere() {
    for seed in 0..20 {
        let (m, n) = (3 + seed as usize % 5, 2 + seed as usize % 4);
        let mask = sample_connected_mask(m, n, (m + n + 2).min(m * n), seed).unwrap();
        let g = CompletionGraph::build(&mask);
        let a = sample_signed_instance(m, n, seed);
        let obs = a.observe_exact(&g);
        for i in 0..m {
            for j in 0..n {
                let est = estimate_entry(&g, &obs, (i, j), &NoiseSpec::Uniform(1.0)).unwrap();
                assert!(rel(est.value.unwrap(), a.value((i, j))) < 1e-9);
                assert!(!est.sign_conflict);
            }
        }
    }
}

#[test]
fn removing_an_observation_never_helps() {
    for seed in 0..15 {
        let mask = sample_connected_mask(5, 5, 13, seed).unwrap();
        let noise = NoiseSpec::Uniform(1.0);
        let full = CompletionGraph::build(&mask);
        let dropped = mask.known()[seed as usize % mask.len()];
        let reduced = CompletionGraph::build(&mask.without(dropped));
        for i in 0..5 {
            for j in 0..5 {
                if (i, j) == dropped {
                    continue;
                }
                let before = variance_bound(&full, (i, j), &noise).unwrap();
                let after = variance_bound(&reduced, (i, j), &noise).unwrap();
                assert!(after >= before - 1e-10, "{:?}: {after} < {before}", (i, j));
            }
        }
    }
}

#[test]
fn observed_entries_in_a_full_matrix_are_denoised() {
    let g = CompletionGraph::build(&Mask::full(2, 2));
    for e in g.edges() {
        let v = variance_bound(&g, *e, &NoiseSpec::Uniform(1.0)).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
    }
}

#[test]
fn estimates_use_observations_not_truth() {
    // perturb one observation: only estimates whose weights touch it move
    let mask = Mask::new(2, 3, [(0, 0), (0, 1), (1, 0), (1, 2)]).unwrap();
    let g = CompletionGraph::build(&mask);
    let a = sample_instance(2, 3, 1);
    let mut obs_vals: Vec<Option<f64>> = vec![None; 6];
    for &(i, j) in mask.known() {
        obs_vals[i * 3 + j] = Some(a.value((i, j)));
    }
    obs_vals[2 + 3] = Some(a.value((1, 2)) * 2.0);
    let obs = Observations::new(2, 3, obs_vals).unwrap();
    let noise = NoiseSpec::Uniform(1.0);
    let e01 = estimate_entry(&g, &obs, (0, 1), &noise).unwrap();
    assert!(rel(e01.value.unwrap(), a.value((0, 1))) < 1e-12);
    let e02 = estimate_entry(&g, &obs, (0, 2), &noise).unwrap();
    assert!(rel(e02.value.unwrap(), 2.0 * a.value((0, 2))) < 1e-12);
}
