use nalgebra::DVector;

use sinhlog::excess::LinearVectorFieldSet;
use sinhlog::integrate::{
    iterated_integrals, reference_solution, sample_mesh, MeanEstimate, Method,
    SignatureAccumulator, Stepper, StepperSpec, WienerMesh,
};
use sinhlog::words::w;

fn second_system() -> (LinearVectorFieldSet, DVector<f64>) {
    let vf = LinearVectorFieldSet::from_rows(&[
        vec![vec![0.0, 1.0], vec![-0.5, -0.255]],
        vec![vec![1.0, 1.0], vec![1.0, 0.5]],
    ])
    .unwrap();
    (vf, DVector::from_vec(vec![1.0, 0.5]))
}

/// Sums adjacent pairs of fine increments: the same Brownian path seen on a
/// mesh half as fine.
fn coarsen(mesh: &WienerMesh) -> WienerMesh {
    let d = mesh.d();
    let mut inc = Vec::with_capacity(mesh.fine_steps() / 2 * d);
    for s in (0..mesh.fine_steps()).step_by(2) {
        for c in 0..d {
            inc.push(mesh.increment(c, s) + mesh.increment(c, s + 1));
        }
    }
    WienerMesh::from_increments(d, mesh.t_final(), inc).unwrap()
}

#[test]
fn reference_is_stable_under_mesh_refinement() {
    let (vf, y0) = second_system();
    let h = 0.02;
    let stepper = Stepper::new(StepperSpec::new(Method::Taylor, 2), &vf, h).unwrap();
    let (mut refine, mut method) = (Vec::new(), Vec::new());
    for p in 0..400 {
        let fine = sample_mesh(4, p, 2, h, 128).unwrap();
        let coarse = coarsen(&fine);
        let y_fine = reference_solution(&fine, &vf, &y0).unwrap();
        let y_coarse = reference_solution(&coarse, &vf, &y0).unwrap();
        refine.push((&y_fine - &y_coarse).norm_squared());
        let j = iterated_integrals(&fine, 0, 128, 2).unwrap();
        method.push((stepper.step(&y0, &j).unwrap() - &y_fine).norm_squared());
    }
    let (r, m) = (
        MeanEstimate::from_samples(&refine),
        MeanEstimate::from_samples(&method),
    );
    assert!(
        r.mean < 0.05 * m.mean,
        "refinement {:e} vs method {:e}",
        r.mean,
        m.mean
    );
}

#[test]
fn sampled_area_moment_matches_exact() {
    let h = 0.5;
    let samples: Vec<f64> = (0..20_000)
        .map(|p| {
            let mesh = sample_mesh(21, p, 2, h, 256).unwrap();
            let mut acc = SignatureAccumulator::new(2, 2);
            for s in 0..256 {
                acc.push(mesh.step(s));
            }
            acc.get(&w("12")).powi(2)
        })
        .collect();
    let est = MeanEstimate::from_samples(&samples);
    assert!(est.z_score(h * h / 2.0) < 3.0, "{est:?}");
}

#[test]
fn methods_agree_to_the_order_of_the_remainder() {
    // Mean-square distance between Taylor and sinh-log steps is O(h^{n+1}).
    let (vf, y0) = second_system();
    let spread = |h: f64, n: usize| {
        let taylor = Stepper::new(
            StepperSpec::new(Method::Taylor, n).with_corrections(false),
            &vf,
            h,
        )
        .unwrap();
        let sl = Stepper::new(
            StepperSpec::new(Method::SinhLog, n).with_corrections(false),
            &vf,
            h,
        )
        .unwrap();
        let diffs: Vec<f64> = (0..4000)
            .map(|p| {
                let mesh = sample_mesh(8, p, 2, h, 16).unwrap();
                let j = iterated_integrals(&mesh, 0, 16, n).unwrap();
                (taylor.step(&y0, &j).unwrap() - sl.step(&y0, &j).unwrap()).norm_squared()
            })
            .collect();
        MeanEstimate::from_samples(&diffs).mean
    };
    for n in [2, 3] {
        let slope = (spread(0.01, n) / spread(0.0025, n)).ln() / 4f64.ln();
        assert!(slope > n as f64 + 0.6, "n={n}: slope {slope}");
    }
}

#[test]
fn zero_noise_steps_are_identities() {
    let (vf, y0) = second_system();
    let mesh = WienerMesh::zero(2, 0.1, 4);
    for (method, n) in [(Method::Taylor, 3), (Method::SinhLog, 3), (Method::Lie, 2)] {
        let stepper = Stepper::new(
            StepperSpec::new(method, n).with_corrections(false),
            &vf,
            0.1,
        )
        .unwrap();
        let j = iterated_integrals(&mesh, 0, 4, n).unwrap();
        assert_eq!(stepper.step(&y0, &j).unwrap(), y0, "{method}");
    }
}
