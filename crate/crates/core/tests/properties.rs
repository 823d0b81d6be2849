//! Randomized property tests for the exact linear algebra, the sign-vector
//! machinery, and the Birch-point solver. All randomness is seeded, so runs
//! are reproducible.

use gmas_core::balance;
use gmas_core::birch::{BirchProblem, SolveOptions};
use gmas_core::dynamics;
use gmas_core::network::{parse, GeneralizedNetwork};
use gmas_core::ratcore::{rat, rat_i, Rational, RationalMatrix, SubspaceBasis};
use gmas_core::signs::{
    check_sigma_subset_closure, check_uniqueness_condition, enumerate_sign_vectors,
};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> GeneralizedNetwork {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))).unwrap()
}

fn random_subspace(rng: &mut ChaCha8Rng, n: usize, k: usize) -> SubspaceBasis {
    let vectors: Vec<Vec<Rational>> = (0..k)
        .map(|_| (0..n).map(|_| rat_i(rng.gen_range(-3..=3))).collect())
        .collect();
    SubspaceBasis::from_spanning(n, &vectors)
}

/// A kinetic-order companion with the same sign vectors: positive diagonal
/// scalings preserve every sign pattern, so the closure condition holds by
/// construction.
fn scaled_copy(rng: &mut ChaCha8Rng, s: &SubspaceBasis) -> SubspaceBasis {
    let n = s.ambient_dim();
    let scales: Vec<Rational> = (0..n)
        .map(|_| {
            let (num, den) = [(1, 2), (1, 1), (2, 1), (3, 1), (3, 2)][rng.gen_range(0..5)];
            rat(num, den)
        })
        .collect();
    let vectors: Vec<Vec<Rational>> = s
        .vectors()
        .iter()
        .map(|v| v.iter().zip(&scales).map(|(x, d)| x * d).collect())
        .collect();
    SubspaceBasis::from_spanning(n, &vectors)
}

fn orth_rows_f64(b: &SubspaceBasis) -> Vec<Vec<f64>> {
    b.orth_complement()
        .vectors()
        .iter()
        .map(|v| v.iter().map(gmas_core::ratcore::rational_to_f64).collect())
        .collect()
}

// --- exact linear algebra ---------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_is_idempotent(entries in proptest::collection::vec(-5i64..=5, 12)) {
        let m = RationalMatrix::from_i64_rows(&[
            &entries[0..4], &entries[4..8], &entries[8..12],
        ]);
        let once = m.rref();
        let twice = once.reduced.rref();
        prop_assert_eq!(&once.reduced, &twice.reduced);
        prop_assert_eq!(once.rank, twice.rank);
    }

    #[test]
    fn kernel_vectors_are_exact(entries in proptest::collection::vec(-5i64..=5, 12)) {
        let m = RationalMatrix::from_i64_rows(&[
            &entries[0..4], &entries[4..8], &entries[8..12],
        ]);
        let kernel = m.kernel_basis();
        prop_assert_eq!(m.rank() + kernel.dim(), 4);
        for v in kernel.vectors() {
            for entry in m.mul_vec(v) {
                prop_assert!(entry.is_zero());
            }
        }
    }

    #[test]
    fn orth_complement_involutes(entries in proptest::collection::vec(-4i64..=4, 10)) {
        let vectors: Vec<Vec<Rational>> = entries
            .chunks(5)
            .map(|row| row.iter().map(|&x| rat_i(x)).collect())
            .collect();
        let b = SubspaceBasis::from_spanning(5, &vectors);
        let back = b.orth_complement().orth_complement();
        prop_assert!(b.spans_same(&back));
        prop_assert_eq!(b.dim() + b.orth_complement().dim(), 5);
    }
}

// --- sign vectors -----------------------------------------------------------

#[test]
fn enumeration_is_negation_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..=n);
        let s = random_subspace(&mut rng, n, k);
        let sigma = enumerate_sign_vectors(&s).unwrap();
        for v in sigma.iter() {
            assert!(sigma.contains(&v.negate()), "missing negation of {v}");
        }
    }
}

#[test]
fn sigma_s_and_sigma_s_perp_are_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..15 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(0..=n);
        let s = random_subspace(&mut rng, n, k);
        let sigma = enumerate_sign_vectors(&s).unwrap();
        let sigma_perp = enumerate_sign_vectors(&s.orth_complement()).unwrap();
        for a in sigma.iter() {
            for b in sigma_perp.iter() {
                assert!(
                    a.orthogonal(b).unwrap(),
                    "{a} and {b} are not sign-orthogonal"
                );
            }
        }
    }
}

// The closure condition implies the uniqueness condition; this implication is
// what turns the existence hypothesis into an at-most-one statement.
#[test]
fn closure_condition_implies_uniqueness_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut implications = 0;
    for _ in 0..60 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..n.max(2));
        let s = random_subspace(&mut rng, n, k);
        let st = if rng.gen_bool(0.5) {
            scaled_copy(&mut rng, &s)
        } else {
            random_subspace(&mut rng, n, k)
        };
        if st.dim() != s.dim() {
            continue;
        }
        if check_sigma_subset_closure(&s, &st).unwrap().holds {
            assert!(
                check_uniqueness_condition(&s, &st).unwrap().holds,
                "closure holds but uniqueness fails"
            );
            implications += 1;
        }
    }
    assert!(implications >= 10, "only {implications} pairs exercised the implication");
}

// --- Birch solver -----------------------------------------------------------

#[test]
fn jacobian_matches_finite_differences_and_is_nonsingular() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..n);
        let s = random_subspace(&mut rng, n, k);
        if s.dim() == 0 || s.dim() == n {
            continue;
        }
        let st = scaled_copy(&mut rng, &s);
        if st.dim() != s.dim() {
            continue;
        }
        // the scaled copy preserves sign vectors, so the uniqueness condition
        // transfers from the trivially-true S == S~ case
        assert!(check_uniqueness_condition(&s, &st).unwrap().holds);

        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let p =
            BirchProblem::new(&orth_rows_f64(&s), &orth_rows_f64(&st), &x0, &x_star).unwrap();
        let d = p.codim_s();
        let lambda: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jac = p.jacobian(&lambda).unwrap();

        let h = 1e-6;
        for b in 0..d {
            let mut lp = lambda.clone();
            let mut lm = lambda.clone();
            lp[b] += h;
            lm[b] -= h;
            let fp = p.eval_f_log(&lp).unwrap();
            let fm = p.eval_f_log(&lm).unwrap();
            for a in 0..d {
                let fd = (fp[a] - fm[a]) / (2.0 * h);
                assert!(
                    (jac[(a, b)] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                    "jacobian ({a},{b}) = {} but finite difference = {fd}",
                    jac[(a, b)]
                );
            }
        }

        let svd = jac.svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        assert!(
            min > 1e-12 * max,
            "near-singular jacobian under verified sign condition: {min} vs {max}"
        );
        checked += 1;
    }
}

#[test]
fn jacobian_is_symmetric_when_subspaces_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..n);
        let s = random_subspace(&mut rng, n, k);
        if s.dim() == 0 || s.dim() == n {
            continue;
        }
        let rows = orth_rows_f64(&s);
        let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let p = BirchProblem::new(&rows, &rows, &vec![1.0; n], &x_star).unwrap();
        let d = p.codim_s();
        let lambda: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jac = p.jacobian(&lambda).unwrap();
        for a in 0..d {
            for b in 0..d {
                assert!((jac[(a, b)] - jac[(b, a)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn classical_birch_succeeds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut solved = 0;
    while solved < 100 {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=n);
        let s = random_subspace(&mut rng, n, k);
        if s.dim() == 0 {
            continue;
        }
        let rows = orth_rows_f64(&s);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let p = BirchProblem::new(&rows, &rows, &x0, &x_star).unwrap();
        let sol = p
            .solve(&SolveOptions::default())
            .unwrap_or_else(|e| panic!("instance {solved} failed: {e}"));
        let scale: f64 = x0.iter().fold(1.0f64, |m, v| m.max(*v));
        assert!(sol.residual_affine <= 1e-9 * scale);
        solved += 1;
    }
}

#[test]
fn solve_exists_and_restarts_agree_under_hypotheses() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut solved = 0;
    while solved < 50 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..n.max(2));
        let s = random_subspace(&mut rng, n, k);
        if s.dim() == 0 || s.dim() == n {
            continue;
        }
        // mix exact copies, scaled copies, and filtered random pairs
        let st = match rng.gen_range(0..3) {
            0 => s.clone(),
            1 => scaled_copy(&mut rng, &s),
            _ => random_subspace(&mut rng, n, k),
        };
        if st.dim() != s.dim() || !check_sigma_subset_closure(&s, &st).unwrap().holds {
            continue;
        }
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let p =
            BirchProblem::new(&orth_rows_f64(&s), &orth_rows_f64(&st), &x0, &x_star).unwrap();
        let d = p.codim_s();
        let reference = p.solve(&SolveOptions::default()).expect("hypotheses hold");
        for restart in 0..10 {
            let lambda0: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let opts = SolveOptions { initial_lambda: Some(lambda0), ..Default::default() };
            let sol = p.solve(&opts).unwrap_or_else(|e| panic!("restart {restart}: {e}"));
            for (a, b) in sol.x.iter().zip(&reference.x) {
                assert!(
                    (a - b).abs() <= 1e-7 * b.abs().max(1.0),
                    "restart {restart} found a different point"
                );
            }
        }
        solved += 1;
    }
}

// --- dynamics ---------------------------------------------------------------

// Independent re-derivation of the RHS from the graph Laplacian and the
// monomial vector, compared against the edge-sum evaluation.
#[test]
fn rhs_agrees_with_laplacian_form_on_fixtures() {
    let names = [
        "power_law.net",
        "cubic.net",
        "saddle.net",
        "two_balanced.net",
        "fourspecies_a1_b1.net",
        "fourspecies_a2_bhalf.net",
        "phospho_n1.net",
        "phospho_n2.net",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut samples = 0;
    while samples < 1000 {
        let net = fixture(names[rng.gen_range(0..names.len())]);
        let rates: Vec<f64> =
            (0..net.edges.len()).map(|_| rng.gen_range(0.1..5.0)).collect();
        let x: Vec<f64> = (0..net.num_species()).map(|_| rng.gen_range(0.1..5.0)).collect();
        let r = dynamics::rhs(&net, &rates, &x).unwrap();

        let a = gmas_core::graph::laplacian(&net, &rates).unwrap();
        let yt = net.kinetic_matrix().to_f64();
        let monomials = nalgebra::DVector::from_iterator(
            net.num_vertices(),
            (0..net.num_vertices()).map(|j| {
                (0..net.num_species())
                    .map(|i| yt[(i, j)] * x[i].ln())
                    .sum::<f64>()
                    .exp()
            }),
        );
        let alt = net.stoich_matrix().to_f64() * (a * monomials);
        let scale = r.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in r.iter().zip(alt.iter()) {
            assert!((u - v).abs() <= 1e-12 * scale, "{u} vs {v}");
        }
        samples += 1;
    }
}

#[test]
fn vertex_balanced_points_are_fixed_points_of_the_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for name in ["cubic.net", "fourspecies_a1_b1.net", "phospho_n1.net"] {
        let net = fixture(name);
        // the one-species cubic has positive kinetic-order deficiency, so only
        // its shipped rates admit a vertex-balanced state
        let rates: Vec<f64> = if name == "cubic.net" {
            net.rates_or_default()
        } else {
            (0..net.edges.len()).map(|_| rng.gen_range(0.2..3.0)).collect()
        };
        let Some((x_star, _)) = balance::find_vertex_balanced(&net, &rates).unwrap() else {
            panic!("{name}: no vertex-balanced state at sampled rates");
        };
        let opts = dynamics::IntegrateOptions { rel_tol: 1e-10, ..Default::default() };
        let traj = dynamics::integrate(&net, &rates, &x_star, 10.0, &opts).unwrap();
        for (a, b) in traj.final_state().iter().zip(&x_star) {
            assert!((a - b).abs() < 1e-6, "{name}: drifted from {b} to {a}");
        }
    }
}

#[test]
fn conservation_drift_is_small_on_phosphorylation() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for name in ["phospho_n1.net", "phospho_n2.net"] {
        let net = fixture(name);
        let rates = net.rates_or_default();
        let x0: Vec<f64> = (0..net.num_species()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let rtol = 1e-8;
        let opts = dynamics::IntegrateOptions { rel_tol: rtol, ..Default::default() };
        let traj = dynamics::integrate(&net, &rates, &x0, 10.0, &opts).unwrap();
        let drift = dynamics::conservation_residual(&net, &traj);
        assert!(drift <= 100.0 * rtol, "{name}: drift {drift}");
    }
}
