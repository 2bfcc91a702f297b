//! Mean-square excess of the partial sinh-log integrator over stochastic
//! Taylor, `E = E0 − εE1 − ε²E2`, for driftless linear vector fields
//! `V_i∘y = a_i y`.
//!
//! With `K_w` the remainder coefficient of a word of length `n+1` and
//! `J̄_w = J_w − K_w`, the excess at leading order is
//! `Σ_{u,v} 𝔼(J̄_u K_v + K_u J̄_v + J̄_u J̄_v) (V_u y₀)ᵀ(V_v y₀)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, Matrix4};
use num_traits::Zero;

use crate::algebra::{rational_to_f64, EpsPoly, LinComb};
use crate::coeffs::sinhlog_closed_form;
use crate::error::{Error, Result};
use crate::moments::{expect_strat_product, MomentValue, TPower};
use crate::par::Exec;
use crate::words::{check_alphabet_size, words_of_length, Word, WordPoly};

/// `d` square matrices of a common size `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearVectorFieldSet {
    matrices: Vec<DMatrix<f64>>,
}

impl LinearVectorFieldSet {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Dimension("need at least one vector field".into()))?;
        check_alphabet_size(matrices.len())?;
        let n = first.nrows();
        for (i, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "field {} is {}x{}, expected {n}x{n}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(LinearVectorFieldSet { matrices })
    }

    /// Builds from row-major nested vectors.
    pub fn from_rows(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let matrices = rows
            .iter()
            .map(|m| {
                let n = m.len();
                if m.iter().any(|r| r.len() != n) {
                    return Err(Error::Dimension(
                        "vector field matrix must be square".into(),
                    ));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(matrices)
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrix(&self, letter: u8) -> &DMatrix<f64> {
        &self.matrices[letter as usize - 1]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// `V_w∘y = a_{w_n} ⋯ a_{w_1} y`: the first letter acts first.
    pub fn word_matrix(&self, w: &Word) -> DMatrix<f64> {
        let n = self.dim();
        w.as_slice()
            .iter()
            .fold(DMatrix::identity(n, n), |acc, &l| self.matrix(l) * acc)
    }

    pub fn apply_word(&self, w: &Word, y: &DVector<f64>) -> DVector<f64> {
        w.as_slice()
            .iter()
            .fold(y.clone(), |acc, &l| self.matrix(l) * acc)
    }

    pub fn check_state(&self, y0: &DVector<f64>) -> Result<()> {
        if y0.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has length {}, vector fields act on {}",
                y0.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `(K_w, J̄_w)` for the partial sinh-log remainder with symbolic `ε`.
pub fn remainder_coefficient(w: &Word) -> Result<(WordPoly<EpsPoly>, WordPoly<EpsPoly>)> {
    let k = sinhlog_closed_form(w, &EpsPoly::eps())?;
    let bar = w.to_poly::<EpsPoly>() - k.clone();
    Ok((k, bar))
}

/// Exact `𝔼(J̄_u K_v + K_u J̄_v + J̄_u J̄_v)` for all `|u| = |v| = n+1` over
/// `{1..d}`; each value is `p(ε)·t^{n+1}`.
pub fn excess_terms(n: usize, d: usize) -> Result<BTreeMap<(Word, Word), MomentValue<EpsPoly>>> {
    let table = ExcessTable::get(n, d)?;
    Ok(table.exact.clone())
}

/// Precomputed excess table: the exact moments and their `ε`-coefficients.
pub struct ExcessTable {
    n: usize,
    words: Vec<Word>,
    exact: BTreeMap<(Word, Word), MomentValue<EpsPoly>>,
    /// Row-major over `words × words`; `[c0, c1, c2]` of `t^{n+1}`.
    coefficients: Vec<[f64; 3]>,
}

impl ExcessTable {
    fn build(n: usize, d: usize) -> Result<Self> {
        check_alphabet_size(d)?;
        if n == 0 || n + 1 > 4 || d > 3 {
            return Err(Error::Unsupported(format!(
                "excess table needs 1 <= n <= 3 and d <= 3, got n = {n}, d = {d}"
            )));
        }
        let words = words_of_length(d, n + 1);
        let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let len = words.len();
        // Gram matrix 𝔼(J_x J_y) / t^{n+1}.
        let mut gram = vec![EpsPoly::zero(); len * len];
        for (i, x) in words.iter().enumerate() {
            for (j, y) in words.iter().enumerate().skip(i) {
                let c = expect_strat_product(x, y).coefficient(&TPower(n + 1));
                gram[i * len + j] = EpsPoly::constant(c);
                gram[j * len + i] = EpsPoly::constant(c);
            }
        }
        let ks: Vec<Vec<(usize, EpsPoly)>> = words
            .iter()
            .map(|w| {
                let (k, _) = remainder_coefficient(w)?;
                Ok(k.iter().map(|(x, c)| (index[x], c.clone())).collect())
            })
            .collect::<Result<_>>()?;

        let mut exact = BTreeMap::new();
        let mut coefficients = Vec::with_capacity(len * len);
        for (i, u) in words.iter().enumerate() {
            for (j, v) in words.iter().enumerate() {
                // 𝔼(J_u J_v) − 𝔼(K_u K_v)
                let mut value = gram[i * len + j].clone();
                for (x, cx) in &ks[i] {
                    for (y, cy) in &ks[j] {
                        let g = &gram[x * len + y];
                        if !g.is_zero() {
                            value = value - cx.clone() * cy.clone() * g.clone();
                        }
                    }
                }
                coefficients.push([0, 1, 2].map(|p| rational_to_f64(value.coefficient(p))));
                exact.insert((u.clone(), v.clone()), LinComb::term(TPower(n + 1), value));
            }
        }
        Ok(ExcessTable {
            n,
            words,
            exact,
            coefficients,
        })
    }

    /// Shared table for `(n, d)`, built once per process.
    pub fn get(n: usize, d: usize) -> Result<Arc<ExcessTable>> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<ExcessTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().expect("excess cache poisoned").get(&(n, d)) {
            return Ok(hit.clone());
        }
        let table = Arc::new(Self::build(n, d)?);
        cache
            .lock()
            .expect("excess cache poisoned")
            .insert((n, d), table.clone());
        Ok(table)
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn exact(&self) -> &BTreeMap<(Word, Word), MomentValue<EpsPoly>> {
        &self.exact
    }

    /// `(E0, E1, E2)` for data `y0` and step `h`.
    pub fn contract(&self, vf: &LinearVectorFieldSet, y0: &DVector<f64>, h: f64) -> [f64; 3] {
        let z: Vec<DVector<f64>> = self.words.iter().map(|w| vf.apply_word(w, y0)).collect();
        let mut sums = [0.0; 3];
        for (i, zi) in z.iter().enumerate() {
            for (j, zj) in z.iter().enumerate() {
                let c = &self.coefficients[i * z.len() + j];
                if c.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let dot = zi.dot(zj);
                for p in 0..3 {
                    sums[p] += c[p] * dot;
                }
            }
        }
        let scale = h.powi(self.n as i32 + 1);
        [sums[0] * scale, -sums[1] * scale, -sums[2] * scale]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcessBreakdown {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub eps: f64,
}

impl ExcessBreakdown {
    /// `E0 − εE1 − ε²E2`.
    pub fn total(&self) -> f64 {
        self.e0 - self.eps * self.e1 - self.eps * self.eps * self.e2
    }

    pub fn at(&self, eps: f64) -> f64 {
        ExcessBreakdown {
            eps,
            ..self.clone()
        }
        .total()
    }
}

pub fn evaluate_excess(
    vf: &LinearVectorFieldSet,
    y0: &DVector<f64>,
    h: f64,
    n: usize,
    eps: f64,
) -> Result<ExcessBreakdown> {
    vf.check_state(y0)?;
    let [e0, e1, e2] = ExcessTable::get(n, vf.d())?.contract(vf, y0, h);
    Ok(ExcessBreakdown { e0, e1, e2, eps })
}

/// The 4×4 matrix `b(ε)` of the order-one excess for two fields.
///
/// Parametrised so that the exponential Lie series sits at `ε = 1/6`, the
/// opposite sign to the remainder's `ε` used everywhere else in this module.
/// The `(1,4)` and `(3,4)` entries are `−3ε(ε − 5/12)`; the variant
/// `−3ε(3ε − 5/12)` is inconsistent with `𝔼(J₁²J₂⁴) = 3t³` and does not give
/// the known eigenvalues of `b(1/6)`.
pub fn b_matrix(eps: f64) -> Matrix4<f64> {
    let e = eps;
    let diag = 5.0 / 24.0 - (e - 0.25) * (3.0 * e - 5.0 / 12.0);
    let corner = -(e - 0.25) * (3.0 * e - 5.0 / 12.0);
    let b12 = -e * (3.0 * e - 11.0 / 12.0);
    let b14 = -3.0 * e * (e - 5.0 / 12.0);
    let b22 = -e * (3.0 * e - 2.0 / 3.0);
    let b24 = -e * (3.0 * e - 0.5);
    let b44 = -5.0 * e * (3.0 * e - 1.0);
    Matrix4::new(
        diag, b12, corner, b14, //
        b12, b22, b12, b24, //
        corner, b12, diag, b14, //
        b14, b24, b14, b44,
    )
}

/// `h³((U₁₁₂y₀)ᵀB(−ε)(U₁₁₂y₀) + (U₂₂₁y₀)ᵀB(−ε)(U₂₂₁y₀))` with the rows of
/// `U` taken as literal matrix products; `eps` is the remainder's `ε`, hence
/// the flip into the parametrisation of [`b_matrix`].
pub fn quadratic_form(
    vf: &LinearVectorFieldSet,
    y0: &DVector<f64>,
    h: f64,
    eps: f64,
) -> Result<f64> {
    if vf.d() != 2 {
        return Err(Error::Dimension(
            "quadratic form is defined for two fields".into(),
        ));
    }
    vf.check_state(y0)?;
    let (a1, a2) = (vf.matrix(1), vf.matrix(2));
    let u112 = [a1 * a1 * a2, a1 * a2 * a1, a2 * a1 * a1, a2 * a2 * a2];
    let u221 = [a2 * a2 * a1, a2 * a1 * a2, a1 * a2 * a2, a1 * a1 * a1];
    let b = b_matrix(-eps);
    let form = |u: &[DMatrix<f64>; 4]| {
        let z: Vec<DVector<f64>> = u.iter().map(|m| m * y0).collect();
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += b[(i, j)] * z[i].dot(&z[j]);
            }
        }
        s
    };
    Ok(h.powi(3) * (form(&u112) + form(&u221)))
}

const RELATIVE_FLOOR: f64 = 1e-30;

/// `|evaluate_excess − quadratic_form| / max(|quadratic_form|, floor)` at `n = 2`.
pub fn excess_vs_quadratic_form(
    vf: &LinearVectorFieldSet,
    y0: &DVector<f64>,
    h: f64,
    eps: f64,
) -> Result<f64> {
    let direct = evaluate_excess(vf, y0, h, 2, eps)?.total();
    let reference = quadratic_form(vf, y0, h, eps)?;
    Ok((direct - reference).abs() / reference.abs().max(RELATIVE_FLOOR))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    const SYMMETRY_TOL: f64 = 1e-12;
    const OFF_TOL: f64 = 1e-13;
    const MAX_SWEEPS: usize = 100;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            n,
            m.ncols()
        )));
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = (m + m.transpose()) * 0.5;
    let off = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) >= OFF_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                method: "jacobi",
                iterations: sweeps,
                residual: off(&a),
            });
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akr) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let (apk, ark) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
            }
        }
        sweeps += 1;
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

pub fn b_eigenvalues(eps: f64) -> Result<[f64; 4]> {
    let b = b_matrix(eps);
    let eig = eig_sym(&DMatrix::from_fn(4, 4, |i, j| b[(i, j)]))?;
    Ok([eig[0], eig[1], eig[2], eig[3]])
}

/// Grid point `(u0, v0, E)` with `y₀ = (u0, v0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub u0: f64,
    pub v0: f64,
    pub excess: f64,
}

/// Axis specification `lo..=hi` with `points` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if self.points <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }
}

/// Row-major (`v0` outer, `u0` inner) grid of the excess for `N = 2`.
pub fn excess_grid(
    vf: &LinearVectorFieldSet,
    u_axis: Axis,
    v_axis: Axis,
    h: f64,
    n: usize,
    eps: f64,
    exec: Exec,
) -> Result<Vec<GridPoint>> {
    if vf.dim() != 2 {
        return Err(Error::Dimension(
            "excess grid needs two-dimensional state".into(),
        ));
    }
    if u_axis.points == 0 || v_axis.points == 0 {
        return Err(Error::Config {
            field: "resolution".into(),
            reason: "grid needs at least one point per axis".into(),
        });
    }
    let table = ExcessTable::get(n, vf.d())?;
    let total = u_axis.points * v_axis.points;
    Ok(exec.map_range(total, |k| {
        let (u0, v0) = (
            u_axis.value(k % u_axis.points),
            v_axis.value(k / u_axis.points),
        );
        let [e0, e1, e2] = table.contract(vf, &DVector::from_vec(vec![u0, v0]), h);
        GridPoint {
            u0,
            v0,
            excess: ExcessBreakdown { e0, e1, e2, eps }.total(),
        }
    }))
}

pub fn grid_csv(points: &[GridPoint]) -> String {
    let mut out = String::from("u0,v0,E\n");
    for p in points {
        out.push_str(&format!("{},{},{:e}\n", p.u0, p.v0, p.excess));
    }
    out
}

/// Eigenvalues of `b(ε)` (descending) for each `ε`.
pub fn eps_sweep(eps_values: &[f64], exec: Exec) -> Result<Vec<(f64, [f64; 4])>> {
    exec.map_range(eps_values.len(), |i| {
        b_eigenvalues(eps_values[i]).map(|l| (eps_values[i], l))
    })
    .into_iter()
    .collect()
}

/// `count` evenly spaced values over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let axis = Axis {
        lo,
        hi,
        points: count,
    };
    (0..count).map(|i| axis.value(i)).collect()
}

pub fn sweep_csv(rows: &[(f64, [f64; 4])]) -> String {
    let mut out = String::from("eps,l1,l2,l3,l4\n");
    for (eps, l) in rows {
        out.push_str(&format!(
            "{eps},{:e},{:e},{:e},{:e}\n",
            l[0], l[1], l[2], l[3]
        ));
    }
    out
}

/// Convenience: `ε`-polynomial moment value as plain `EpsPoly` of `t^{n+1}`.
pub fn excess_coefficient(table: &ExcessTable, u: &Word, v: &Word) -> EpsPoly {
    table
        .exact
        .get(&(u.clone(), v.clone()))
        .map(|m| m.coefficient(&TPower(table.n + 1)))
        .unwrap_or_else(EpsPoly::zero)
}
