//! Acceptance checks, one line per criterion. Every criterion runs even if an
//! earlier one fails; the test fails at the end if any did.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sinhlog::coeffs::{exp_of_lie_truncation, signature};
use sinhlog::excess::{
    b_eigenvalues, eig_sym, evaluate_excess, excess_vs_quadratic_form, LinearVectorFieldSet,
};
use sinhlog::identities::{
    antipode_identity, coefficient_triple, partial_integration_identity, reversal_invariance,
    single_letter_identity, FamilyResult, SuiteConfig,
};
use sinhlog::integrate::{
    convergence_slope, global_error_experiment, local_excess_sample, sample_moments,
    ExperimentConfig, Method, StepperSpec,
};
use sinhlog::moments::{eval_rational_moment, expect_strat_product, MomentEngine};
use sinhlog::par::Exec;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn from_family(result: FamilyResult) -> Outcome {
    outcome(result.passed(), result.to_string())
}

fn within(elapsed: Duration, limit: Duration, inner: Outcome) -> Outcome {
    let passed = inner.passed && elapsed < limit;
    outcome(
        passed,
        format!("{} [{:.2?}, limit {:.0?}]", inner.detail, elapsed, limit),
    )
}

fn config(name: &str) -> ExperimentConfig {
    let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    ExperimentConfig::from_json(&text).unwrap()
}

fn random_system(rng: &mut ChaCha8Rng) -> (LinearVectorFieldSet, DVector<f64>) {
    let mut m = || DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
    let vf = LinearVectorFieldSet::new(vec![m(), m()]).unwrap();
    let y0 = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
    (vf, y0)
}

fn order_one_system() -> (LinearVectorFieldSet, DVector<f64>) {
    let c = config("paper-order1.json");
    (c.system().unwrap(), DVector::from_vec(c.y0))
}

fn antipode_polynomial() -> Outcome {
    let start = Instant::now();
    let result = antipode_identity(&SuiteConfig::default()).unwrap();
    within(
        start.elapsed(),
        Duration::from_secs(10),
        from_family(result),
    )
}

fn partial_integration() -> Outcome {
    from_family(partial_integration_identity(&SuiteConfig::default()).unwrap())
}

fn coefficient_routes() -> Outcome {
    from_family(coefficient_triple(&SuiteConfig::default()).unwrap())
}

fn lie_reconstruction() -> Outcome {
    let reconstructed = exp_of_lie_truncation(4, 2).unwrap();
    let s = signature(4, 2).unwrap();
    outcome(
        reconstructed == s,
        "exp of the truncated Lie series against the signature, grades ≤ 4",
    )
}

fn reversal() -> Outcome {
    let config = SuiteConfig {
        max_grade: 4,
        ..SuiteConfig::default()
    };
    from_family(reversal_invariance(&config, MomentEngine::global()))
}

fn single_letter() -> Outcome {
    from_family(single_letter_identity(
        &SuiteConfig::default(),
        MomentEngine::global(),
    ))
}

fn b_spectrum() -> Outcome {
    let at_zero = b_eigenvalues(0.0).unwrap();
    let zero_err = at_zero
        .iter()
        .zip([5.0 / 24.0, 0.0, 0.0, 0.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let at_sixth = b_eigenvalues(1.0 / 6.0).unwrap();
    let sixth_err = at_sixth
        .iter()
        .zip([0.5264, 5.0 / 24.0, 0.1667, -0.0264])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    // Cross-check the solver itself on the same matrix via the trace.
    let trace_ok = {
        let b = sinhlog::excess::b_matrix(1.0 / 6.0);
        let eig = eig_sym(&DMatrix::from_fn(4, 4, |i, j| b[(i, j)])).unwrap();
        (eig.iter().sum::<f64>() - b.trace()).abs() < 1e-12
    };
    outcome(
        zero_err <= 1e-12 && sixth_err <= 5e-4 && trace_ok,
        format!(
            "b(0) max err {zero_err:.1e}; b(1/6) = {:.5?}, max err {sixth_err:.1e}",
            at_sixth
        ),
    )
}

fn quadratic_form_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (vf, y0) = random_system(&mut rng);
        let eps = rng.random_range(-0.5..=0.5);
        let h = rng.random_range(0.01..1.0);
        worst = worst.max(excess_vs_quadratic_form(&vf, &y0, h, eps).unwrap());
    }
    within(
        start.elapsed(),
        Duration::from_secs(60),
        outcome(
            worst <= 1e-10,
            format!("200 systems, worst relative error {worst:.1e}"),
        ),
    )
}

fn sign_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut min_e: f64 = f64::INFINITY;
    let mut max_e1: f64 = 0.0;
    for _ in 0..100 {
        let (vf, y0) = random_system(&mut rng);
        for n in [2, 3] {
            min_e = min_e.min(evaluate_excess(&vf, &y0, 1.0, n, 0.0).unwrap().total());
        }
        for n in [1, 3] {
            max_e1 = max_e1.max(evaluate_excess(&vf, &y0, 1.0, n, 0.0).unwrap().e1.abs());
        }
    }
    outcome(
        min_e >= -1e-12 && max_e1 <= 1e-12,
        format!("min E(ε=0) over n∈{{2,3}} = {min_e:.3e}; max |E1| over n∈{{1,3}} = {max_e1:.1e}"),
    )
}

fn order_one_experiment() -> Outcome {
    let start = Instant::now();
    let config = config("paper-order1.json");
    let report = global_error_experiment(&config, Exec::Parallel).unwrap();
    let last = report.points.len() - 1;
    let mse = |m| report.row(last, m).unwrap().mse;
    let taylor_gap = report.gap(last, Method::Taylor, Method::SinhLog).unwrap();
    let lie_gap = report.gap(last, Method::Lie, Method::Taylor).unwrap();
    let passed = taylor_gap.mean > 2.0 * taylor_gap.stderr && lie_gap.mean > 2.0 * lie_gap.stderr;
    outcome(
        passed,
        format!(
            "M={} at t={:e}: sinhlog {:.5e} < taylor {:.5e} < lie {:.5e}; gaps {:.2} and {:.2} SE [{:.1?}]",
            config.paths,
            report.points[last],
            mse(Method::SinhLog),
            mse(Method::Taylor),
            mse(Method::Lie),
            taylor_gap.mean / taylor_gap.stderr,
            lie_gap.mean / lie_gap.stderr,
            start.elapsed()
        ),
    )
}

fn order_three_halves_experiment() -> Outcome {
    let start = Instant::now();
    let config = config("paper-order15.json");
    let report = global_error_experiment(&config, Exec::Parallel).unwrap();
    let slope = |m| {
        let mse: Vec<f64> = (0..report.points.len())
            .map(|i| report.row(i, m).unwrap().mse)
            .collect();
        convergence_slope(&report.points, &mse)
    };
    let (s_sl, s_t) = (slope(Method::SinhLog), slope(Method::Taylor));
    let mut order: Vec<usize> = (0..report.points.len()).collect();
    order.sort_by(|&a, &b| report.points[a].total_cmp(&report.points[b]));
    let z: Vec<f64> = order[..2]
        .iter()
        .map(|&i| {
            let g = report.gap(i, Method::Taylor, Method::SinhLog).unwrap();
            g.mean / g.stderr
        })
        .collect();
    let slopes_ok = [s_sl, s_t].iter().all(|s| (1.3..=1.7).contains(s));
    let gaps_ok = z.iter().all(|&z| z >= 1.0);
    outcome(
        slopes_ok && gaps_ok,
        format!(
            "h ∈ [{:e}, {:e}]: slopes sinhlog {s_sl:.3}, taylor {s_t:.3}; gaps at two smallest h {:.1} and {:.1} SE [{:.1?}]",
            report.points[order[0]],
            report.points[order[order.len() - 1]],
            z[0],
            z[1],
            start.elapsed()
        ),
    )
}

fn local_excess_bridge() -> Outcome {
    let (vf, y0) = order_one_system();
    let h = 2.5e-5;
    let exact = evaluate_excess(&vf, &y0, h, 2, 0.0).unwrap().total();
    let spec = StepperSpec::new(Method::SinhLog, 2).with_corrections(false);
    let sample = local_excess_sample(&vf, &y0, h, spec, 256, 200_000, 12, Exec::Parallel).unwrap();
    let z = sample.z_score(exact);
    outcome(
        z <= 3.0,
        format!(
            "analytic {exact:.4e}, sampled {:.4e} ± {:.1e} ({z:.2} SE)",
            sample.mean, sample.stderr
        ),
    )
}

fn moment_bridge() -> Outcome {
    let samples = sample_moments(2, 3, 1.0, 512, 100_000, 1, Exec::Parallel).unwrap();
    let mut worst = (0.0, String::new());
    for (u, v, est) in &samples {
        let z = est.z_score(eval_rational_moment(&expect_strat_product(u, v), 1.0));
        if z > worst.0 {
            worst = (z, format!("{u}·{v}"));
        }
    }
    outcome(
        worst.0 <= 3.0,
        format!(
            "{} pairs, M=100000, worst {:.2} SE at {}",
            samples.len(),
            worst.0,
            worst.1
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 13] = [
        ("antipode polynomial identity", antipode_polynomial),
        ("partial integration identity", partial_integration),
        ("coefficient triple agreement", coefficient_routes),
        ("Lie series reconstruction", lie_reconstruction),
        ("reversal invariance", reversal),
        ("single-letter identity", single_letter),
        ("b(eps) eigenvalues", b_spectrum),
        ("excess vs quadratic form", quadratic_form_agreement),
        ("excess sign structure", sign_structure),
        ("order-1 error ordering", order_one_experiment),
        ("order-3/2 convergence", order_three_halves_experiment),
        ("local excess bridge", local_excess_bridge),
        ("moment bridge", moment_bridge),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let status = if result.passed { "PASS" } else { "FAIL" };
        // Written to the raw handle so the lines survive libtest's capture.
        let _ = writeln!(
            std::io::stderr(),
            "{status} {:>2} {name}: {}",
            i + 1,
            result.detail
        );
        if !result.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
