//! One-step integrators for `dy = Σ a_i y ∘ dW^i`: stochastic Taylor,
//! exponential Lie (Magnus) and sinh-log, truncated at word length `n`.
//!
//! Each method is a truncated series `Σ_x k_x(J) a_x` plus an optional
//! deterministic correction. The correction is `Σ_x 𝔼(R_x) a_x` over words of
//! length `n+1` and `n+2`, where `R` is the signature minus the method's
//! reconstruction in the tensor algebra; without it the nonzero mean of those
//! terms accumulates and the global order drops.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{q, rational_to_f64, EpsPoly, Rational};
use crate::coeffs::{lie_series, signature, transform_series, CoefficientSet, GradedTensorSeries};
use crate::error::{Error, Result};
use crate::excess::LinearVectorFieldSet;
use crate::integrate::iterated::SignatureAccumulator;
use crate::integrate::linalg::{mat_exp, mat_sqrt};
use crate::moments::{eval_moment, expect_single_poly, MomentValue};
use crate::words::{words_of_length, Word, WordPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Taylor,
    Lie,
    #[serde(rename = "sinhlog")]
    SinhLog,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Taylor, Method::Lie, Method::SinhLog];

    pub fn name(self) -> &'static str {
        match self {
            Method::Taylor => "taylor",
            Method::Lie => "lie",
            Method::SinhLog => "sinhlog",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config {
                field: "method".into(),
                reason: format!("unknown method {s:?}; expected taylor, lie or sinhlog"),
            })
    }
}

/// Method, truncation length `n` (2 for strong order one, 3 for three
/// halves), top-coefficient perturbation `ε` (sinh-log only) and whether the
/// mean correction is applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperSpec {
    pub method: Method,
    pub order: usize,
    pub eps: f64,
    pub corrections: bool,
}

impl StepperSpec {
    pub fn new(method: Method, order: usize) -> Self {
        StepperSpec {
            method,
            order,
            eps: 0.0,
            corrections: true,
        }
    }

    pub fn with_corrections(self, corrections: bool) -> Self {
        StepperSpec {
            corrections,
            ..self
        }
    }

    pub fn with_eps(self, eps: f64) -> Self {
        StepperSpec { eps, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.order, 2 | 3) {
            return Err(Error::Config {
                field: "order".into(),
                reason: format!("expected 2 or 3, got {}", self.order),
            });
        }
        if self.method == Method::Lie && self.order != 2 {
            return Err(Error::Config {
                field: "order".into(),
                reason: "the Lie method is available at order 2 only".into(),
            });
        }
        if self.method != Method::SinhLog && self.eps != 0.0 {
            return Err(Error::Config {
                field: "eps".into(),
                reason: format!("eps applies to sinhlog only, not {}", self.method),
            });
        }
        if !self.eps.is_finite() {
            return Err(Error::Config {
                field: "eps".into(),
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// `X = Σ_i i⊗i`, the grade-one part of the signature.
fn grade_one(d: usize, n_max: usize) -> GradedTensorSeries<EpsPoly> {
    let mut x = GradedTensorSeries::zero(n_max);
    for w in words_of_length(d, 1) {
        x.add_entry(w.clone(), w.to_poly());
    }
    x
}

/// Truncated series `ψ̂` (or `φ̂ − 1` for Taylor) as right word `↦` left
/// polynomial in `J`, with `ε` symbolic.
pub fn truncated_series(method: Method, n: usize, d: usize) -> Result<GradedTensorSeries<EpsPoly>> {
    let s = signature(n, d)?;
    Ok(match method {
        Method::Taylor => s
            .map_coeffs(|c| EpsPoly::constant(*c))
            .minus(&GradedTensorSeries::unit(n)),
        Method::SinhLog => transform_series(&s, &CoefficientSet::SinhLog),
        Method::Lie => lie_series(n, d)?.map_coeffs(|c| EpsPoly::constant(*c)),
    })
}

/// `𝔼(R_x)` for `n+1 ≤ |x| ≤ n+2`, exact in `t` and `ε`.
pub fn correction_terms(
    method: Method,
    n: usize,
    d: usize,
) -> Result<BTreeMap<Word, MomentValue<EpsPoly>>> {
    let top = n + 2;
    let s = signature(top, d)?.map_coeffs(|c| EpsPoly::constant(*c));
    let psi = truncated_series(method, n, d)?.truncated(top);
    let reconstructed = match method {
        Method::Taylor => GradedTensorSeries::unit(top).plus(&psi),
        Method::SinhLog => {
            let x = grade_one(d, top);
            let mut power = x.clone();
            for _ in 0..n {
                power = power.mul(&x);
            }
            psi.minus(&power.scaled(&EpsPoly::eps())).sinh_log_inverse()
        }
        Method::Lie => psi.exp(),
    };
    let remainder = s.minus(&reconstructed);
    let mut out = BTreeMap::new();
    for (x, poly) in remainder.iter() {
        if x.len() <= n {
            debug_assert!(poly.is_zero(), "remainder below grade n+1 at {x}");
            continue;
        }
        let value = expect_single_poly(poly);
        if !value.is_zero() {
            out.insert(x.clone(), value);
        }
    }
    Ok(out)
}

type Corrections = Arc<BTreeMap<Word, MomentValue<EpsPoly>>>;

fn cached_corrections(method: Method, n: usize, d: usize) -> Result<Corrections> {
    type Cache = Mutex<HashMap<(Method, usize, usize), Corrections>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (method, n, d);
    if let Some(hit) = cache.lock().expect("correction cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let value = Arc::new(correction_terms(method, n, d)?);
    cache
        .lock()
        .expect("correction cache poisoned")
        .insert(key, value.clone());
    Ok(value)
}

/// Read access to the iterated integrals of one step.
pub trait IteratedIntegrals {
    fn value(&self, w: &Word) -> f64;
}

impl IteratedIntegrals for SignatureAccumulator {
    fn value(&self, w: &Word) -> f64 {
        self.get(w)
    }
}

impl IteratedIntegrals for BTreeMap<Word, f64> {
    fn value(&self, w: &Word) -> f64 {
        self.get(w).copied().unwrap_or(0.0)
    }
}

struct Term {
    matrix: DMatrix<f64>,
    weights: Vec<(Word, f64)>,
}

/// A method specialised to a vector-field set and a step size.
pub struct Stepper {
    spec: StepperSpec,
    terms: Vec<Term>,
    letters: Vec<DMatrix<f64>>,
    correction: DMatrix<f64>,
    dim: usize,
}

impl Stepper {
    pub fn new(spec: StepperSpec, vf: &LinearVectorFieldSet, h: f64) -> Result<Self> {
        spec.validate()?;
        let d = vf.d();
        let series = truncated_series(spec.method, spec.order, d)?;
        let eps = spec.eps;
        let terms = series
            .iter()
            .filter(|(x, _)| !x.is_empty())
            .map(|(x, poly)| Term {
                matrix: vf.word_matrix(x),
                weights: poly
                    .iter()
                    .map(|(u, c)| (u.clone(), c.eval_f64(eps)))
                    .collect(),
            })
            .filter(|t| t.weights.iter().any(|(_, c)| *c != 0.0))
            .collect();
        let dim = vf.dim();
        let mut correction = DMatrix::zeros(dim, dim);
        if spec.corrections {
            for (x, value) in cached_corrections(spec.method, spec.order, d)?.iter() {
                let c = eval_moment(value, h, |p| p.eval_f64(eps));
                correction += vf.word_matrix(x) * c;
            }
        }
        Ok(Stepper {
            spec,
            terms,
            letters: vf.matrices().to_vec(),
            correction,
            dim,
        })
    }

    pub fn spec(&self) -> &StepperSpec {
        &self.spec
    }

    pub fn correction(&self) -> &DMatrix<f64> {
        &self.correction
    }

    /// Depth of iterated integrals the step reads.
    pub fn depth(&self) -> usize {
        self.spec.order
    }

    /// `Σ_x k_x(J) a_x + correction`, plus `−ε(Σ J_i a_i)^{n+1}` for sinh-log.
    pub fn series_matrix(&self, j: &impl IteratedIntegrals) -> DMatrix<f64> {
        let mut m = self.correction.clone();
        for term in &self.terms {
            let k: f64 = term.weights.iter().map(|(u, c)| c * j.value(u)).sum();
            if k != 0.0 {
                m += &term.matrix * k;
            }
        }
        if self.spec.method == Method::SinhLog && self.spec.eps != 0.0 {
            let mut x = DMatrix::zeros(self.dim, self.dim);
            for (i, a) in self.letters.iter().enumerate() {
                x += a * j.value(&Word::letter(i as u8 + 1));
            }
            let mut power = x.clone();
            for _ in 0..self.spec.order {
                power = &power * &x;
            }
            m -= power * self.spec.eps;
        }
        m
    }

    /// Step propagator acting on `y`.
    pub fn propagator(&self, j: &impl IteratedIntegrals) -> Result<DMatrix<f64>> {
        let m = self.series_matrix(j);
        let id = DMatrix::identity(self.dim, self.dim);
        Ok(match self.spec.method {
            Method::Taylor => id + m,
            Method::Lie => mat_exp(&m),
            Method::SinhLog => {
                let root = mat_sqrt(&(&id + &m * &m))?;
                m + root
            }
        })
    }

    pub fn step(&self, y: &DVector<f64>, j: &impl IteratedIntegrals) -> Result<DVector<f64>> {
        Ok(self.propagator(j)? * y)
    }
}

/// Corrections in the tensor algebra at `ε = 0` and `t = 1` as a word
/// polynomial, for display and comparison.
pub fn correction_polynomial(method: Method, n: usize, d: usize) -> Result<WordPoly> {
    Ok(cached_corrections(method, n, d)?
        .iter()
        .map(|(x, value)| {
            let c: Rational = value
                .iter()
                .map(|(_, p)| p.coefficient(0))
                .fold(q(0, 1), |a, b| a + b);
            (x.clone(), c)
        })
        .collect())
}

/// `Σ_x c_x a_x` for a word polynomial.
pub fn poly_matrix(vf: &LinearVectorFieldSet, p: &WordPoly) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(vf.dim(), vf.dim());
    for (x, c) in p.iter() {
        m += vf.word_matrix(x) * rational_to_f64(*c);
    }
    m
}
