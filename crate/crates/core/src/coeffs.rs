//! Series coefficients `K∘w` for power series `F(x) = Σ C_k (x − 1)^k` of the
//! flow, computed three independent ways, plus the exponential Lie series.
//!
//! Route one expands `Σ C_k (S − 1⊗1)^k` for the signature `S` in the tensor
//! algebra with shuffle on the left and concatenation on the right. Route two
//! applies the operator `Σ C_{k+1}(c^{n−k} ш s^k)` to the word. Route three
//! is the closed form for the (partial) sinh-log set,
//! `K∘w = ½(w − α∘w) + ε·a₁ш…шa_{n+1}`.

use std::collections::BTreeMap;

use num_traits::One;

use crate::algebra::{q, Coeff, EpsPoly, Rational};
use crate::error::{Error, Result};
use crate::opalg::{coefficient_operator, evaluate_poly};
use crate::words::{
    antipode, check_alphabet_size, concat, full_shuffle_of_letters, words_of_length, Word, WordPoly,
};

/// The sequence `{C_k}` defining `F`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientSet {
    /// `C_k = (−1)^{k−1}/k`.
    Log,
    /// `C₁ = 1`, `C_k = ½(−1)^{k−1}` for `k ≥ 2`.
    SinhLog,
    /// Sinh-log with `C_{n+1} = ½(−1)ⁿ + ε`, `ε` symbolic; `n ≥ 1`.
    PartialSinhLog { n: usize },
    /// Explicit `C₁, C₂, …`; missing entries are zero.
    Custom(Vec<EpsPoly>),
}

impl CoefficientSet {
    pub fn custom(values: Vec<EpsPoly>) -> Result<Self> {
        if values.first() != Some(&EpsPoly::one()) {
            return Err(Error::CoefficientSet("C_1 must equal 1".into()));
        }
        Ok(CoefficientSet::Custom(values))
    }

    pub fn partial_sinh_log(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::CoefficientSet(
                "partial sinh-log perturbs C_(n+1) with n >= 1".into(),
            ));
        }
        Ok(CoefficientSet::PartialSinhLog { n })
    }

    /// `C_k` for `k ≥ 1`.
    pub fn coefficient(&self, k: usize) -> EpsPoly {
        assert!(k >= 1, "coefficients are indexed from 1");
        let alternating_half = || {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            EpsPoly::constant(q(sign, 2))
        };
        match self {
            CoefficientSet::Log => {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                EpsPoly::constant(q(sign, k as i64))
            }
            CoefficientSet::SinhLog if k == 1 => EpsPoly::one(),
            CoefficientSet::SinhLog => alternating_half(),
            CoefficientSet::PartialSinhLog { .. } if k == 1 => EpsPoly::one(),
            CoefficientSet::PartialSinhLog { n } if k == n + 1 => {
                alternating_half() + EpsPoly::eps()
            }
            CoefficientSet::PartialSinhLog { .. } => alternating_half(),
            CoefficientSet::Custom(values) => values.get(k - 1).cloned().unwrap_or_default(),
        }
    }
}

/// Truncated element of `K⟨A⟩ ⊗ K⟨A⟩`, stored as right (concatenation) word
/// `↦` left (shuffle) component. Only right words of length `≤ n_max` are
/// kept.
#[derive(Clone, PartialEq)]
pub struct GradedTensorSeries<R: Coeff = Rational> {
    n_max: usize,
    entries: BTreeMap<Word, WordPoly<R>>,
}

impl<R: Coeff> std::fmt::Debug for GradedTensorSeries<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

impl<R: Coeff> GradedTensorSeries<R> {
    pub fn zero(n_max: usize) -> Self {
        GradedTensorSeries {
            n_max,
            entries: BTreeMap::new(),
        }
    }

    /// `1 ⊗ 1`.
    pub fn unit(n_max: usize) -> Self {
        let mut out = Self::zero(n_max);
        out.add_entry(Word::empty(), WordPoly::monomial(Word::empty()));
        out
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Adds `left ⊗ right`; silently drops terms above the truncation grade.
    pub fn add_entry(&mut self, right: Word, left: WordPoly<R>) {
        if right.len() > self.n_max || left.is_zero() {
            return;
        }
        let slot = self.entries.entry(right).or_default();
        *slot += left;
        if slot.is_zero() {
            self.entries.retain(|_, v| !v.is_zero());
        }
    }

    pub fn get(&self, right: &Word) -> WordPoly<R> {
        self.entries.get(right).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &WordPoly<R>)> {
        self.entries.iter()
    }

    /// Entries whose right word has length `g`.
    pub fn grade(&self, g: usize) -> impl Iterator<Item = (&Word, &WordPoly<R>)> {
        self.entries.iter().filter(move |(k, _)| k.len() == g)
    }

    pub fn len_grade(&self, g: usize) -> usize {
        self.grade(g).count()
    }

    pub fn scaled(&self, factor: &R) -> Self {
        let mut out = Self::zero(self.n_max);
        for (k, v) in &self.entries {
            out.add_entry(k.clone(), v.scaled(factor));
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_entry(k.clone(), v.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(&-R::one()))
    }

    /// Product `(u⊗x)(v⊗y) = (u ш v)⊗(xy)`, truncated at `n_max`.
    pub fn mul(&self, other: &Self) -> Self {
        let n_max = self.n_max.min(other.n_max);
        let mut out = Self::zero(n_max);
        for (x, p) in &self.entries {
            for (y, r) in &other.entries {
                if x.len() + y.len() <= n_max {
                    out.add_entry(concat(x, y), p.shuffle(r));
                }
            }
        }
        out
    }

    /// `Σ_{k≥1} c_k X^k` for a series `X` without constant term; `c_k` for
    /// `k > n_max` cannot contribute.
    pub fn power_series(&self, coefficient: impl Fn(usize) -> R) -> Self {
        debug_assert!(self.get(&Word::empty()).is_zero());
        let mut out = Self::zero(self.n_max);
        let mut power = self.clone();
        for k in 1..=self.n_max {
            let c = coefficient(k);
            if !c.is_zero() {
                out = out.plus(&power.scaled(&c));
            }
            power = power.mul(self);
        }
        out
    }

    /// Converts the left-component coefficients into another ring.
    pub fn map_coeffs<S: Coeff>(&self, f: impl Fn(&R) -> S) -> GradedTensorSeries<S> {
        let mut out = GradedTensorSeries::zero(self.n_max);
        for (k, v) in &self.entries {
            out.add_entry(k.clone(), v.map_coeffs(&f));
        }
        out
    }

    /// Same series with a lower truncation grade.
    pub fn truncated(&self, n_max: usize) -> Self {
        let mut out = Self::zero(n_max);
        for (k, v) in &self.entries {
            out.add_entry(k.clone(), v.clone());
        }
        out
    }
}

impl<R: Coeff> GradedTensorSeries<R> {
    /// `exp X = 1 + Σ X^k / k!`.
    pub fn exp(&self) -> Self {
        let mut factorial = Rational::one();
        let mut factors = vec![Rational::one()];
        for k in 1..=self.n_max {
            factorial *= Rational::from_integer(k as i64);
            factors.push(factorial.recip());
        }
        Self::unit(self.n_max).plus(&self.power_series(|k| R::from_rational(factors[k])))
    }

    /// Inverse of `sinh log`: `X + √(1 + X²)`.
    pub fn sinh_log_inverse(&self) -> Self {
        // √(1+y) = Σ binom(1/2, j) y^j
        let square = self.mul(self);
        let mut binom = Rational::one();
        let mut root = Self::unit(self.n_max);
        let mut power = Self::unit(self.n_max);
        for j in 1..=self.n_max / 2 {
            let half = q(1, 2);
            binom = binom * (half - Rational::from_integer(j as i64 - 1))
                / Rational::from_integer(j as i64);
            power = power.mul(&square);
            root = root.plus(&power.scaled(&R::from_rational(binom)));
        }
        root.plus(self)
    }
}

/// Pulled-back flow `1⊗1 + Σ w⊗w` through grade `n_max`.
pub fn signature(n_max: usize, d: usize) -> Result<GradedTensorSeries> {
    check_alphabet_size(d)?;
    if n_max == 0 {
        return Err(Error::Unsupported("signature needs n_max >= 1".into()));
    }
    let mut out = GradedTensorSeries::unit(n_max);
    for g in 1..=n_max {
        for word in words_of_length(d, g) {
            out.add_entry(word.clone(), word.to_poly());
        }
    }
    Ok(out)
}

/// `Σ_k C_k (S − 1⊗1)^k`: right word `w` carries `K∘w`.
pub fn transform_series(
    series: &GradedTensorSeries,
    coefficients: &CoefficientSet,
) -> GradedTensorSeries<EpsPoly> {
    let lifted = series.map_coeffs(|c| EpsPoly::constant(*c));
    let shifted = lifted.minus(&GradedTensorSeries::unit(series.n_max()));
    shifted.power_series(|k| coefficients.coefficient(k))
}

/// `K∘w` through the operator `Σ_k C_{k+1}(c^{n−k} ш s^k)`.
pub fn coefficient_via_operator(
    w: &Word,
    coefficients: &CoefficientSet,
) -> Result<WordPoly<EpsPoly>> {
    let n = w.len().checked_sub(1).ok_or(Error::EmptyWord)?;
    let op = coefficient_operator(n, |k| coefficients.coefficient(k));
    evaluate_poly(&op, w)
}

/// `½(w − α∘w) + ε·a₁ш…шa_{n+1}`.
pub fn sinhlog_closed_form<R: Coeff>(w: &Word, eps: &R) -> Result<WordPoly<R>> {
    let half = R::from_rational(q(1, 2));
    let mut out = (w.to_poly::<R>() - antipode::<R>(w)).scaled(&half);
    if !eps.is_zero() {
        out.add_scaled(&full_shuffle_of_letters::<R>(w)?, eps);
    }
    Ok(out)
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// Weight of `J_u` in the exponential-Lie coefficient `K_[w]`:
/// `Σ_σ (−1)^{e(σ)} / (|w|² C(|w|−1, e(σ))) · σ⁻¹∘w`, where `e(σ)` counts
/// descents of `σ` and `σ∘w` places `a_{σ(i)}` at position `i`.
pub fn lie_coefficient(w: &Word) -> Result<WordPoly> {
    let n = w.len();
    if n == 0 {
        return Err(Error::EmptyWord);
    }
    let letters = w.as_slice();
    let mut out = WordPoly::zero();
    for sigma in permutations(n) {
        let descents = sigma.windows(2).filter(|p| p[0] > p[1]).count();
        let mut inverse = vec![0; n];
        for (i, &s) in sigma.iter().enumerate() {
            inverse[s] = i;
        }
        let permuted = Word::new(inverse.iter().map(|&i| letters[i]).collect())?;
        let sign = if descents % 2 == 0 { 1 } else { -1 };
        let weight = q(sign, (n * n) as i64 * binomial(n - 1, descents));
        out.add_term(permuted, weight);
    }
    Ok(out)
}

/// Right-nested bracket `[a₁,[a₂,…,[a_{n−1},aₙ]…]]` as a concatenation
/// polynomial.
pub fn bracket_expand(w: &Word) -> Result<WordPoly> {
    let letters = w.as_slice();
    let (&last, init) = letters.split_last().ok_or(Error::EmptyWord)?;
    let mut acc = Word::letter(last).to_poly::<Rational>();
    for &a in init.iter().rev() {
        let x = Word::letter(a).to_poly::<Rational>();
        acc = x.concat(&acc) - acc.concat(&x);
    }
    Ok(acc)
}

/// `Σ_{1≤|w|≤n_max} K_[w] ⊗ V_[w]` with the bracket expanded into words.
pub fn lie_series(n_max: usize, d: usize) -> Result<GradedTensorSeries> {
    check_alphabet_size(d)?;
    let mut out = GradedTensorSeries::zero(n_max);
    for g in 1..=n_max {
        for word in words_of_length(d, g) {
            let k = lie_coefficient(&word)?;
            for (x, c) in bracket_expand(&word)?.iter() {
                out.add_entry(x.clone(), k.scaled(c));
            }
        }
    }
    Ok(out)
}

/// `exp` of the truncated exponential Lie series; reproduces the signature
/// when the Lie coefficients are right.
pub fn exp_of_lie_truncation(n_max: usize, d: usize) -> Result<GradedTensorSeries> {
    if n_max > 5 {
        return Err(Error::Unsupported(format!(
            "exp_of_lie_truncation limited to n_max <= 5, got {n_max}"
        )));
    }
    Ok(lie_series(n_max, d)?.exp())
}
