//! Coefficient rings and sparse linear combinations.
//!
//! Everything on the algebraic side of the crate is exact: coefficients are
//! `Rational` (a reduced `i64` fraction) or `EpsPoly`, a polynomial in the
//! free parameter of the partial sinh-log coefficient set. `LinComb` is a
//! finite formal sum of keys (words, operator words, powers of `t`) and is
//! the single container used for all of them.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::Rational64;

/// Shorthand for `p/q`.
pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p, d)
}

/// A commutative coefficient ring usable inside a [`LinComb`].
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_rational(value: Rational) -> Self;

    /// Sign and magnitude for printing inside a signed sum. Coefficients
    /// without a well defined sign report `false` and print in full.
    fn split_sign(&self) -> (bool, String);

    fn scale(&self, factor: Rational) -> Self {
        self.clone() * Self::from_rational(factor)
    }
}

impl Coeff for Rational {
    fn from_rational(value: Rational) -> Self {
        value
    }

    fn split_sign(&self) -> (bool, String) {
        (self.is_negative(), self.abs().to_string())
    }
}

/// Polynomial in `eps` with rational coefficients; index `i` holds the
/// coefficient of `eps^i`. Trailing zeros are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EpsPoly(Vec<Rational>);

impl EpsPoly {
    pub fn constant(value: Rational) -> Self {
        Self::from_coefficients(vec![value])
    }

    /// The indeterminate itself.
    pub fn eps() -> Self {
        Self::from_coefficients(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_coefficients(mut coefficients: Vec<Rational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        EpsPoly(coefficients)
    }

    pub fn coefficient(&self, power: usize) -> Rational {
        self.0.get(power).copied().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, eps: Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * eps + c)
    }

    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * eps + rational_to_f64(*c))
    }
}

pub fn rational_to_f64(value: Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

impl Zero for EpsPoly {
    fn zero() -> Self {
        EpsPoly(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl One for EpsPoly {
    fn one() -> Self {
        Self::constant(Rational::one())
    }
}

impl Add for EpsPoly {
    type Output = EpsPoly;
    fn add(self, rhs: EpsPoly) -> EpsPoly {
        let len = self.0.len().max(rhs.0.len());
        EpsPoly::from_coefficients(
            (0..len)
                .map(|i| self.coefficient(i) + rhs.coefficient(i))
                .collect(),
        )
    }
}

impl Sub for EpsPoly {
    type Output = EpsPoly;
    fn sub(self, rhs: EpsPoly) -> EpsPoly {
        self + (-rhs)
    }
}

impl Neg for EpsPoly {
    type Output = EpsPoly;
    fn neg(self) -> EpsPoly {
        EpsPoly(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Mul for EpsPoly {
    type Output = EpsPoly;
    fn mul(self, rhs: EpsPoly) -> EpsPoly {
        if self.is_zero() || rhs.is_zero() {
            return EpsPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        EpsPoly::from_coefficients(out)
    }
}

impl fmt::Display for EpsPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (power, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match power {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}*eps", c.abs())?,
                _ => write!(f, "{}*eps^{}", c.abs(), power)?,
            }
        }
        Ok(())
    }
}

impl Coeff for EpsPoly {
    fn from_rational(value: Rational) -> Self {
        EpsPoly::constant(value)
    }

    fn split_sign(&self) -> (bool, String) {
        let nonzero: Vec<_> = self.0.iter().filter(|c| !c.is_zero()).collect();
        if nonzero.len() == 1 && self.0.len() == 1 {
            let c = self.0[0];
            (c.is_negative(), c.abs().to_string())
        } else {
            (false, format!("({self})"))
        }
    }
}

/// Keys whose values are finite sequences of letters, so that the shuffle
/// product can be defined generically.
pub trait Letters: Ord + Clone {
    type Letter: Copy + Ord;

    fn letters(&self) -> &[Self::Letter];
    fn from_letters(letters: Vec<Self::Letter>) -> Self;

    fn len(&self) -> usize {
        self.letters().len()
    }

    fn is_empty(&self) -> bool {
        self.letters().is_empty()
    }
}

/// Finite formal sum `Σ c_k · k` with no stored zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinComb<K: Ord, R = Rational> {
    terms: BTreeMap<K, R>,
}

impl<K: Ord, R> Default for LinComb<K, R> {
    fn default() -> Self {
        LinComb {
            terms: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone, R: Coeff> LinComb<K, R> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(key: K, coefficient: R) -> Self {
        let mut out = Self::zero();
        out.add_term(key, coefficient);
        out
    }

    pub fn monomial(key: K) -> Self {
        Self::term(key, R::one())
    }

    pub fn add_term(&mut self, key: K, coefficient: R) {
        if coefficient.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            btree_map::Entry::Vacant(slot) => {
                slot.insert(coefficient);
            }
            btree_map::Entry::Occupied(mut slot) => {
                let sum = slot.get().clone() + coefficient;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, factor: &R) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone() * factor.clone());
        }
    }

    pub fn coefficient(&self, key: &K) -> R {
        self.terms.get(key).cloned().unwrap_or_else(R::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &R)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: &R) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, factor);
        out
    }

    pub fn map_keys<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> K2) -> LinComb<K2, R> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_term(f(k), c.clone());
        }
        out
    }

    /// Linear extension of `f`, which maps each key to a combination.
    pub fn flat_map<K2: Ord + Clone>(
        &self,
        mut f: impl FnMut(&K) -> LinComb<K2, R>,
    ) -> LinComb<K2, R> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_scaled(&f(k), c);
        }
        out
    }

    pub fn map_coeffs<S: Coeff>(&self, mut f: impl FnMut(&R) -> S) -> LinComb<K, S> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    /// Sum of all coefficients.
    pub fn coefficient_sum(&self) -> R {
        self.terms.values().cloned().fold(R::zero(), |a, b| a + b)
    }
}

impl<K: Letters, R: Coeff> LinComb<K, R> {
    /// Bilinear shuffle product.
    pub fn shuffle(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (u, cu) in &self.terms {
            for (v, cv) in &other.terms {
                let coefficient = cu.clone() * cv.clone();
                for_each_interleaving(u.letters(), v.letters(), |w| {
                    out.add_term(K::from_letters(w.to_vec()), coefficient.clone());
                });
            }
        }
        out
    }

    /// Bilinear concatenation product.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (u, cu) in &self.terms {
            for (v, cv) in &other.terms {
                let mut letters = u.letters().to_vec();
                letters.extend_from_slice(v.letters());
                out.add_term(K::from_letters(letters), cu.clone() * cv.clone());
            }
        }
        out
    }

    /// Keep only the terms whose key has the given length.
    pub fn graded_part(&self, grade: usize) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if k.len() == grade {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }
}

/// Shuffle of two plain words, with multiplicities.
pub fn shuffle_words<W: Letters, R: Coeff>(u: &W, v: &W) -> LinComb<W, R> {
    LinComb::monomial(u.clone()).shuffle(&LinComb::monomial(v.clone()))
}

/// Calls `visit` once per interleaving of `u` and `v` that preserves the
/// internal order of both (C(|u|+|v|, |u|) calls in total).
pub fn for_each_interleaving<T: Copy>(u: &[T], v: &[T], mut visit: impl FnMut(&[T])) {
    let mut buf = Vec::with_capacity(u.len() + v.len());
    interleave(u, v, &mut buf, &mut visit);
}

fn interleave<T: Copy>(u: &[T], v: &[T], buf: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
    match (u.split_first(), v.split_first()) {
        (None, None) => visit(buf),
        (Some((&a, rest)), None) | (None, Some((&a, rest))) => {
            buf.push(a);
            interleave(rest, &[], buf, visit);
            buf.pop();
        }
        (Some((&a, u_rest)), Some((&b, v_rest))) => {
            buf.push(a);
            interleave(u_rest, v, buf, visit);
            buf.pop();
            buf.push(b);
            interleave(u, v_rest, buf, visit);
            buf.pop();
        }
    }
}

impl<K: Ord + Clone, R: Coeff> Add for LinComb<K, R> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<K: Ord + Clone, R: Coeff> AddAssign for LinComb<K, R> {
    fn add_assign(&mut self, rhs: Self) {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
    }
}

impl<K: Ord + Clone, R: Coeff> Sub for LinComb<K, R> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<K: Ord + Clone, R: Coeff> SubAssign for LinComb<K, R> {
    fn sub_assign(&mut self, rhs: Self) {
        for (k, c) in rhs.terms {
            self.add_term(k, -c);
        }
    }
}

impl<K: Ord + Clone, R: Coeff> Neg for LinComb<K, R> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map_coeffs(|c| -c.clone())
    }
}

impl<K: Ord + Clone, R: Coeff> FromIterator<(K, R)> for LinComb<K, R> {
    fn from_iter<I: IntoIterator<Item = (K, R)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in iter {
            out.add_term(k, c);
        }
        out
    }
}

impl<K: Ord + fmt::Display, R: Coeff> fmt::Display for LinComb<K, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let (negative, magnitude) = c.split_sign();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{magnitude}*{k}")?;
        }
        Ok(())
    }
}

impl<K: Ord + fmt::Display, R: Coeff> fmt::Debug for LinComb<K, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_poly_arithmetic() {
        let a = EpsPoly::from_coefficients(vec![q(1, 2), q(1, 1)]);
        let sq = a.clone() * a.clone();
        assert_eq!(
            sq,
            EpsPoly::from_coefficients(vec![q(1, 4), q(1, 1), q(1, 1)])
        );
        assert_eq!(sq.degree(), Some(2));
        assert!((a.clone() - a).is_zero());
        assert_eq!(EpsPoly::eps().eval(q(1, 3)), q(1, 3));
    }

    #[test]
    fn eps_poly_display() {
        let a = EpsPoly::from_coefficients(vec![q(-1, 2), q(0, 1), q(3, 1)]);
        assert_eq!(a.to_string(), "-1/2 + 3*eps^2");
        assert_eq!(EpsPoly::zero().to_string(), "0");
    }

    #[test]
    fn interleaving_count() {
        let mut n = 0;
        for_each_interleaving(&[1, 2, 3], &[4, 5], |_| n += 1);
        assert_eq!(n, 10);
        let mut m = 0;
        for_each_interleaving::<u8>(&[], &[], |w| {
            assert!(w.is_empty());
            m += 1
        });
        assert_eq!(m, 1);
    }
}
