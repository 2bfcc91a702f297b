//! Monte Carlo experiments on a shared fine mesh: strong global errors with
//! common random numbers, the one-step excess bridge and sampled moments.
//!
//! The reference solution is the exact flow driven by the piecewise-linear
//! interpolation of the mesh, `y ← exp(Σ ΔW_i a_i) y` on every fine step. The
//! coarse methods read the signature of that same path, so the measured error
//! is pure truncation error of each method.

use serde::{Deserialize, Serialize};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::excess::LinearVectorFieldSet;
use crate::integrate::iterated::SignatureAccumulator;
use crate::integrate::linalg::ExpApply;
use crate::integrate::mesh::{sample_mesh, WienerMesh};
use crate::integrate::stepper::{Method, Stepper, StepperSpec};
use crate::par::Exec;
use crate::words::{words_up_to, Word};

/// Paths per reduction batch; results are folded in path order.
const CHUNK: usize = 2048;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn estimate(&self) -> MeanEstimate {
        let stderr = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
        MeanEstimate {
            mean: self.mean,
            stderr,
            count: self.count,
        }
    }
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut w = Welford::default();
        for &x in samples {
            w.push(x);
        }
        w.estimate()
    }

    /// `|mean − target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.stderr == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / self.stderr
        }
    }
}

/// Runs `f` on every path and folds each output coordinate in path order.
fn accumulate<F>(exec: Exec, paths: usize, width: usize, f: F) -> Result<Vec<MeanEstimate>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync + Send,
{
    let mut acc = vec![Welford::default(); width];
    let mut start = 0;
    while start < paths {
        let len = CHUNK.min(paths - start);
        let batch = exec.map_range(len, |i| f((start + i) as u64));
        for values in batch {
            for (a, x) in acc.iter_mut().zip(values?) {
                a.push(x);
            }
        }
        start += len;
    }
    Ok(acc.iter().map(Welford::estimate).collect())
}

/// Exact flow of the piecewise-linear path through the mesh at the given
/// fine-step indices (ascending, each `≤ fine_steps`).
pub fn reference_at(
    mesh: &WienerMesh,
    vf: &LinearVectorFieldSet,
    y0: &DVector<f64>,
    checkpoints: &[usize],
) -> Result<Vec<DVector<f64>>> {
    vf.check_state(y0)?;
    if mesh.d() != vf.d() {
        return Err(Error::Dimension(format!(
            "mesh has {} channels, system has {}",
            mesh.d(),
            vf.d()
        )));
    }
    let mut exp = ExpApply::new(vf.dim());
    let mut y = y0.clone();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut step = 0;
    for &target in checkpoints {
        if target > mesh.fine_steps() || target < step {
            return Err(Error::Misaligned {
                start: step,
                end: target,
                fine_steps: mesh.fine_steps(),
            });
        }
        while step < target {
            exp.apply(vf.matrices(), mesh.step(step), &mut y);
            step += 1;
        }
        out.push(y.clone());
    }
    Ok(out)
}

pub fn reference_solution(
    mesh: &WienerMesh,
    vf: &LinearVectorFieldSet,
    y0: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(reference_at(mesh, vf, y0, &[mesh.fine_steps()])?.remove(0))
}

/// Where errors are reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    /// One step size, error after every coarse step.
    #[default]
    Time,
    /// Several step sizes, error at the final time.
    Step,
}

fn default_true() -> bool {
    true
}

/// JSON-serialisable description of a global-error experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `d` row-major `N×N` matrices.
    pub matrices: Vec<Vec<Vec<f64>>>,
    pub y0: Vec<f64>,
    pub methods: Vec<Method>,
    /// Truncation length `n`: 2 for strong order one, 3 for three halves.
    pub order: usize,
    /// Top-coefficient perturbation for the sinh-log method.
    #[serde(default)]
    pub eps: f64,
    pub t_final: f64,
    pub h: Vec<f64>,
    #[serde(default)]
    pub grid: Grid,
    pub paths: usize,
    pub fine_steps: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub corrections: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn config_error(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Validated experiment ready to run.
struct Plan {
    vf: LinearVectorFieldSet,
    y0: DVector<f64>,
    steps: Vec<usize>,
}

impl ExperimentConfig {
    pub fn system(&self) -> Result<LinearVectorFieldSet> {
        LinearVectorFieldSet::from_rows(&self.matrices)
            .map_err(|e| config_error("matrices", e.to_string()))
    }

    pub fn spec(&self, method: Method) -> StepperSpec {
        let eps = if method == Method::SinhLog {
            self.eps
        } else {
            0.0
        };
        StepperSpec {
            method,
            order: self.order,
            eps,
            corrections: self.corrections,
        }
    }

    /// Coarse step counts `T/h`, checked against the fine mesh.
    pub fn step_counts(&self) -> Result<Vec<usize>> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(config_error("t_final", "must be positive"));
        }
        if self.h.is_empty() {
            return Err(config_error("h", "need at least one step size"));
        }
        if self.grid == Grid::Time && self.h.len() != 1 {
            return Err(config_error("h", "time grid takes exactly one step size"));
        }
        if self.fine_steps == 0 {
            return Err(config_error("fine_steps", "must be at least 1"));
        }
        self.h
            .iter()
            .map(|&h| {
                if h.is_nan() || h <= 0.0 {
                    return Err(config_error("h", format!("step {h} must be positive")));
                }
                let k = (self.t_final / h).round();
                if k < 1.0 || ((k * h - self.t_final) / self.t_final).abs() > 1e-9 {
                    return Err(config_error(
                        "h",
                        format!("step {h} does not divide t_final {}", self.t_final),
                    ));
                }
                let k = k as usize;
                if !self.fine_steps.is_multiple_of(k) {
                    return Err(config_error(
                        "fine_steps",
                        format!(
                            "{} is not a multiple of the {k} steps of size {h}",
                            self.fine_steps
                        ),
                    ));
                }
                Ok(k)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ())
    }

    fn plan(&self) -> Result<Plan> {
        let vf = self.system()?;
        if self.y0.len() != vf.dim() {
            return Err(config_error(
                "y0",
                format!(
                    "length {} does not match {}x{} matrices",
                    self.y0.len(),
                    vf.dim(),
                    vf.dim()
                ),
            ));
        }
        if self.methods.is_empty() {
            return Err(config_error("methods", "need at least one method"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(config_error("methods", format!("{m} listed twice")));
            }
            self.spec(*m).validate()?;
        }
        if self.paths == 0 {
            return Err(config_error("paths", "must be at least 1"));
        }
        let steps = self.step_counts()?;
        Ok(Plan {
            vf,
            y0: DVector::from_vec(self.y0.clone()),
            steps,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_error("json", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub t_or_h: f64,
    pub method: Method,
    pub mse: f64,
    pub stderr: f64,
    pub paths: usize,
}

/// Mean-square errors per grid point and method, keeping per-path squared
/// errors so paired differences can be formed.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub grid: Grid,
    pub points: Vec<f64>,
    pub methods: Vec<Method>,
    pub rows: Vec<ErrorRow>,
    /// `squared[row][path]`.
    squared: Vec<Vec<f64>>,
}

impl ErrorReport {
    fn index(&self, point: usize, method: Method) -> Option<usize> {
        let m = self.methods.iter().position(|&x| x == method)?;
        (point < self.points.len()).then(|| point * self.methods.len() + m)
    }

    pub fn row(&self, point: usize, method: Method) -> Option<&ErrorRow> {
        self.index(point, method).map(|i| &self.rows[i])
    }

    /// Paired estimate of `MSE(a) − MSE(b)` at one grid point.
    pub fn gap(&self, point: usize, a: Method, b: Method) -> Option<MeanEstimate> {
        let (ia, ib) = (self.index(point, a)?, self.index(point, b)?);
        let diff: Vec<f64> = self.squared[ia]
            .iter()
            .zip(&self.squared[ib])
            .map(|(x, y)| x - y)
            .collect();
        Some(MeanEstimate::from_samples(&diff))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_or_h,method,mse,stderr,paths\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                r.t_or_h, r.method, r.mse, r.stderr, r.paths
            ));
        }
        out
    }
}

/// Strong mean-square errors of each method against the reference, over
/// `paths` meshes shared by all methods.
pub fn global_error_experiment(config: &ExperimentConfig, exec: Exec) -> Result<ErrorReport> {
    let plan = config.plan()?;
    let methods = config.methods.clone();
    let d = plan.vf.d();
    let steppers: Vec<Vec<Stepper>> = plan
        .steps
        .iter()
        .map(|&k| {
            let h = config.t_final / k as f64;
            methods
                .iter()
                .map(|&m| Stepper::new(config.spec(m), &plan.vf, h))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let (points, checkpoints): (Vec<f64>, Vec<usize>) = match config.grid {
        Grid::Time => {
            let k = plan.steps[0];
            let per = config.fine_steps / k;
            (1..=k)
                .map(|c| (c as f64 * config.t_final / k as f64, c * per))
                .unzip()
        }
        Grid::Step => (config.h.clone(), vec![config.fine_steps]),
    };

    let run_path = |p: u64| -> Result<Vec<f64>> {
        let mesh = sample_mesh(config.seed, p, d, config.t_final, config.fine_steps)?;
        let refs = reference_at(&mesh, &plan.vf, &plan.y0, &checkpoints)?;
        let mut acc = SignatureAccumulator::new(d, config.order);
        let mut out = Vec::with_capacity(points.len() * methods.len());
        for (hi, &k) in plan.steps.iter().enumerate() {
            let per = config.fine_steps / k;
            let mut ys = vec![plan.y0.clone(); methods.len()];
            for c in 0..k {
                acc.reset();
                for s in c * per..(c + 1) * per {
                    acc.push(mesh.step(s));
                }
                for (y, stepper) in ys.iter_mut().zip(&steppers[hi]) {
                    *y = stepper.step(y, &acc)?;
                }
                let record = match config.grid {
                    Grid::Time => Some(&refs[c]),
                    Grid::Step if c + 1 == k => Some(&refs[0]),
                    Grid::Step => None,
                };
                if let Some(reference) = record {
                    out.extend(ys.iter().map(|y| (y - reference).norm_squared()));
                }
            }
        }
        Ok(out)
    };

    let width = points.len() * methods.len();
    let mut squared = vec![Vec::with_capacity(config.paths); width];
    let mut start = 0;
    while start < config.paths {
        let len = CHUNK.min(config.paths - start);
        let batch = exec.map_range(len, |i| run_path((start + i) as u64));
        for values in batch {
            for (column, x) in squared.iter_mut().zip(values?) {
                column.push(x);
            }
        }
        start += len;
    }

    let rows = squared
        .iter()
        .enumerate()
        .map(|(i, samples)| {
            let est = MeanEstimate::from_samples(samples);
            ErrorRow {
                t_or_h: points[i / methods.len()],
                method: methods[i % methods.len()],
                mse: est.mean,
                stderr: est.stderr,
                paths: est.count,
            }
        })
        .collect();
    Ok(ErrorReport {
        grid: config.grid,
        points,
        methods,
        rows,
        squared,
    })
}

/// Least-squares slope of `log √mse` against `log h`.
pub fn convergence_slope(h: &[f64], mse: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = mse.iter().map(|m| 0.5 * m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Sampled one-step `𝔼|y_ref − y_taylor|² − 𝔼|y_ref − y_method|²` with Taylor
/// at the same order and no corrections on either side.
#[allow(clippy::too_many_arguments)]
pub fn local_excess_sample(
    vf: &LinearVectorFieldSet,
    y0: &DVector<f64>,
    h: f64,
    spec: StepperSpec,
    fine_steps: usize,
    paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<MeanEstimate> {
    vf.check_state(y0)?;
    let taylor = Stepper::new(
        StepperSpec::new(Method::Taylor, spec.order).with_corrections(false),
        vf,
        h,
    )?;
    let method = Stepper::new(spec, vf, h)?;
    let estimates = accumulate(exec, paths, 1, |p| {
        let mesh = sample_mesh(seed, p, vf.d(), h, fine_steps)?;
        let reference = reference_solution(&mesh, vf, y0)?;
        let mut acc = SignatureAccumulator::new(vf.d(), spec.order);
        for s in 0..fine_steps {
            acc.push(mesh.step(s));
        }
        let et = (taylor.step(y0, &acc)? - &reference).norm_squared();
        let em = (method.step(y0, &acc)? - &reference).norm_squared();
        Ok(vec![et - em])
    })?;
    Ok(estimates[0])
}

/// Sampled `𝔼(J_u J_v)` over one step of length `h` for all
/// `1 ≤ |u| ≤ |v| ≤ depth` in canonical order (`u ≤ v`).
pub fn sample_moments(
    d: usize,
    depth: usize,
    h: f64,
    fine_steps: usize,
    paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<(Word, Word, MeanEstimate)>> {
    let words = words_up_to(d, depth);
    let pairs: Vec<(usize, usize)> = (0..words.len())
        .flat_map(|i| (i..words.len()).map(move |j| (i, j)))
        .collect();
    let estimates = accumulate(exec, paths, pairs.len(), |p| {
        let mesh = sample_mesh(seed, p, d, h, fine_steps)?;
        let mut acc = SignatureAccumulator::new(d, depth);
        for s in 0..fine_steps {
            acc.push(mesh.step(s));
        }
        let values: Vec<f64> = words.iter().map(|w| acc.get(w)).collect();
        Ok(pairs.iter().map(|&(i, j)| values[i] * values[j]).collect())
    })?;
    Ok(pairs
        .iter()
        .zip(estimates)
        .map(|(&(i, j), e)| (words[i].clone(), words[j].clone(), e))
        .collect())
}
