use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use sinhlog::algebra::{q, Rational};
use sinhlog::excess::{eig_sym, evaluate_excess, LinearVectorFieldSet};
use sinhlog::integrate::{
    global_error_experiment, iterated_integrals, mat_sqrt, sample_mesh, ExperimentConfig, Grid,
    Method,
};
use sinhlog::moments::{expect_strat_product, TPower};
use sinhlog::par::Exec;
use sinhlog::words::{antipode, antipode_poly, reversal, shuffle, Word, WordPoly};

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1u8..=2, 0..=max_len).prop_map(|l| Word::new(l).unwrap())
}

fn nonempty_word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1u8..=2, 1..=max_len).prop_map(|l| Word::new(l).unwrap())
}

fn matrix() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4).prop_map(|v| DMatrix::from_vec(2, 2, v))
}

fn system() -> impl Strategy<Value = (LinearVectorFieldSet, DVector<f64>)> {
    (matrix(), matrix(), -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, u, v)| {
        (
            LinearVectorFieldSet::new(vec![a, b]).unwrap(),
            DVector::from_vec(vec![u, v]),
        )
    })
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antipode_is_an_involution(w in word(6)) {
        let twice = antipode_poly(&antipode::<Rational>(&w));
        prop_assert_eq!(twice, w.to_poly());
    }

    #[test]
    fn shuffle_commutes_and_counts_interleavings(u in word(4), v in word(4)) {
        let (pu, pv) = (u.to_poly::<Rational>(), v.to_poly::<Rational>());
        let uv = shuffle(&pu, &pv);
        prop_assert_eq!(&uv, &shuffle(&pv, &pu));
        let total = binomial(u.len() + v.len(), u.len());
        prop_assert_eq!(uv.coefficient_sum(), Rational::from_integer(total));
    }

    #[test]
    fn antipode_respects_shuffles(u in word(3), v in word(3)) {
        let lhs = antipode_poly(&shuffle(&u.to_poly::<Rational>(), &v.to_poly()));
        let rhs = shuffle(&antipode::<Rational>(&u), &antipode(&v));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn moments_vanish_on_odd_letter_counts(u in word(4), v in word(4)) {
        let odd = (1..=2u8).any(|l| {
            u.as_slice().iter().chain(v.as_slice()).filter(|&&x| x == l).count() % 2 == 1
        });
        let m = expect_strat_product(&u, &v);
        if odd {
            prop_assert!(m.is_zero());
        } else {
            // Homogeneous of degree (|u| + |v|) / 2 in t.
            let degree = (u.len() + v.len()) / 2;
            prop_assert!(m.keys().all(|k| *k == TPower(degree)));
        }
    }

    #[test]
    fn moments_are_symmetric_and_reversal_invariant(u in word(4), v in word(4)) {
        let m = expect_strat_product(&u, &v);
        prop_assert_eq!(&m, &expect_strat_product(&v, &u));
        prop_assert_eq!(&m, &expect_strat_product(&reversal(&u), &reversal(&v)));
    }

    #[test]
    fn excess_scales_with_step((vf, y0) in system(), n in 1usize..=2) {
        let small = evaluate_excess(&vf, &y0, 0.5, n, 0.0).unwrap();
        let large = evaluate_excess(&vf, &y0, 1.0, n, 0.0).unwrap();
        let factor = 2f64.powi(n as i32 + 1);
        for (s, l) in [(small.e0, large.e0), (small.e1, large.e1), (small.e2, large.e2)] {
            prop_assert!((l - factor * s).abs() <= 1e-10 * l.abs().max(1e-6));
        }
    }

    #[test]
    fn excess_components_have_fixed_signs((vf, y0) in system(), n in 1usize..=3) {
        let e = evaluate_excess(&vf, &y0, 1.0, n, 0.0).unwrap();
        prop_assert!(e.e0 >= -1e-12);
        prop_assert!(e.e2 >= -1e-12);
        if n % 2 == 1 {
            prop_assert!(e.e1.abs() <= 1e-12);
        }
    }

    #[test]
    fn simulated_integrals_satisfy_shuffles(
        seed in any::<u64>(), u in nonempty_word(2), v in nonempty_word(2),
    ) {
        let mesh = sample_mesh(seed, 0, 2, 1.0, 16).unwrap();
        let j = iterated_integrals(&mesh, 0, 16, 4).unwrap();
        let expansion: WordPoly = shuffle(&u.to_poly(), &v.to_poly());
        let rhs: f64 = expansion
            .iter()
            .map(|(w, c)| sinhlog::algebra::rational_to_f64(*c) * j[w])
            .sum();
        let lhs = j[&u] * j[&v];
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn symmetric_eigenvalues_sum_to_trace(v in prop::collection::vec(-2.0f64..2.0, 16)) {
        let m = DMatrix::from_vec(4, 4, v);
        let s = (&m + m.transpose()) * 0.5;
        let eig = eig_sym(&s).unwrap();
        prop_assert!((eig.iter().sum::<f64>() - s.trace()).abs() < 1e-10);
        prop_assert!(eig.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn sqrt_of_perturbed_identity(v in prop::collection::vec(-0.3f64..0.3, 9)) {
        let b = DMatrix::from_vec(3, 3, v);
        let m = DMatrix::identity(3, 3) + &b * &b;
        let s = mat_sqrt(&m).unwrap();
        prop_assert!((&s * &s - &m).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn report_csv_is_independent_of_execution(seed in any::<u64>(), paths in 1usize..40) {
        let config = ExperimentConfig {
            matrices: vec![
                vec![vec![0.0, 1.0], vec![-0.5, -0.255]],
                vec![vec![1.0, 1.0], vec![1.0, 0.5]],
            ],
            y0: vec![1.0, 0.5],
            methods: vec![Method::SinhLog, Method::Taylor],
            order: 3,
            eps: 0.0,
            t_final: 0.1,
            h: vec![0.05, 0.025],
            grid: Grid::Step,
            paths,
            fine_steps: 8,
            seed,
            corrections: true,
            output: None,
        };
        let seq = global_error_experiment(&config, Exec::Sequential).unwrap().to_csv();
        let par = global_error_experiment(&config, Exec::Parallel).unwrap().to_csv();
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(seq, global_error_experiment(&config, Exec::Parallel).unwrap().to_csv());
    }
}

#[test]
fn unit_moment_reference_values() {
    // Independent closed forms: J_1 = W, J_11 = W²/2, 𝔼W⁴ = 3t².
    let m = |a: &str, b: &str| expect_strat_product(&sinhlog::words::w(a), &sinhlog::words::w(b));
    assert_eq!(m("1", "1").coefficient(&TPower(1)), q(1, 1));
    assert_eq!(m("11", "11").coefficient(&TPower(2)), q(3, 4));
    assert_eq!(m("12", "12").coefficient(&TPower(2)), q(1, 2));
}
