//! Concatenation–shuffle operators on the two-letter alphabet `{c, s}`.
//!
//! An operator word `b = c^{n₁} s c^{n₂} s … s c^{n_k}` of grade `n` acts on
//! a word `w` of length `n + 1`: `w` is cut into consecutive subwords of
//! lengths `n₁+1, …, n_k+1` and the pieces are shuffled together. The gluing
//! product `b₁ ⊗ b₂ ↦ b₁ s b₂` makes this action a homomorphism into the
//! shuffle algebra.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::algebra::{Coeff, Letters, LinComb, Rational};
use crate::error::{Error, Result};
use crate::words::{Word, WordPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    /// Concatenate across this slot.
    C,
    /// Shuffle across this slot.
    S,
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct OpWord(Vec<Op>);

pub type OpPoly<R = Rational> = LinComb<OpWord, R>;

impl OpWord {
    pub fn empty() -> Self {
        OpWord(Vec::new())
    }

    pub fn new(ops: Vec<Op>) -> Self {
        OpWord(ops)
    }

    pub fn c_pow(n: usize) -> Self {
        OpWord(vec![Op::C; n])
    }

    pub fn s_pow(n: usize) -> Self {
        OpWord(vec![Op::S; n])
    }

    pub fn grade(&self) -> usize {
        self.0.len()
    }

    pub fn ops(&self) -> &[Op] {
        &self.0
    }

    /// Lengths `n₁, …, n_k` of the maximal `c`-runs separated by `s`.
    pub fn c_runs(&self) -> Vec<usize> {
        let mut runs = vec![0];
        for op in &self.0 {
            match op {
                Op::C => *runs.last_mut().expect("non-empty") += 1,
                Op::S => runs.push(0),
            }
        }
        runs
    }

    pub fn to_poly<R: Coeff>(&self) -> OpPoly<R> {
        LinComb::monomial(self.clone())
    }
}

impl Ord for OpWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for OpWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Letters for OpWord {
    type Letter = Op;

    fn letters(&self) -> &[Op] {
        &self.0
    }

    fn from_letters(letters: Vec<Op>) -> Self {
        OpWord(letters)
    }
}

impl fmt::Display for OpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for op in &self.0 {
            f.write_str(match op {
                Op::C => "c",
                Op::S => "s",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for OpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for OpWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "e" || s.is_empty() {
            return Ok(OpWord::empty());
        }
        s.chars()
            .map(|ch| match ch {
                'c' => Ok(Op::C),
                's' => Ok(Op::S),
                _ => Err(Error::InvalidOpWord(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(OpWord)
    }
}

/// Homogeneous grade of a polynomial, `None` when zero or mixed.
pub fn grade_of<R: Coeff>(b: &OpPoly<R>) -> Option<usize> {
    let mut grades = b.keys().map(OpWord::grade);
    let first = grades.next()?;
    grades.all(|g| g == first).then_some(first)
}

/// Shuffle gluing product `b₁ ⊗ b₂ ↦ b₁ s b₂`, extended bilinearly.
pub fn glue<R: Coeff>(b1: &OpPoly<R>, b2: &OpPoly<R>) -> OpPoly<R> {
    let mut out = OpPoly::zero();
    for (u, cu) in b1.iter() {
        for (v, cv) in b2.iter() {
            let mut ops = u.0.clone();
            ops.push(Op::S);
            ops.extend_from_slice(&v.0);
            out.add_term(OpWord(ops), cu.clone() * cv.clone());
        }
    }
    out
}

pub fn op_shuffle<R: Coeff>(b1: &OpPoly<R>, b2: &OpPoly<R>) -> OpPoly<R> {
    b1.shuffle(b2)
}

/// The action `ζ(b ⊗ w)`.
pub fn evaluate<R: Coeff>(b: &OpWord, w: &Word) -> Result<WordPoly<R>> {
    if w.len() != b.grade() + 1 {
        return Err(Error::GradeMismatch {
            grade: b.grade(),
            len: w.len(),
        });
    }
    let mut out = WordPoly::monomial(Word::empty());
    let mut start = 0;
    for run in b.c_runs() {
        let piece = w.slice(start, start + run + 1);
        out = out.shuffle(&piece.to_poly());
        start += run + 1;
    }
    Ok(out)
}

/// Bilinear extension of [`evaluate`].
pub fn evaluate_poly<R: Coeff>(b: &OpPoly<R>, w: &Word) -> Result<WordPoly<R>> {
    let mut out = WordPoly::zero();
    for (op, c) in b.iter() {
        out.add_scaled(&evaluate::<R>(op, w)?, c);
    }
    Ok(out)
}

/// `c^{n-k} ш s^k` as a polynomial.
pub fn c_shuffle_s<R: Coeff>(n: usize, k: usize) -> OpPoly<R> {
    OpWord::c_pow(n - k)
        .to_poly::<R>()
        .shuffle(&OpWord::s_pow(k).to_poly())
}

/// `(c − s)ⁿ = Σ_k (−1)^k (c^{n−k} ш s^k)`.
pub fn cs_power<R: Coeff>(n: usize) -> OpPoly<R> {
    let mut out = OpPoly::zero();
    for k in 0..=n {
        let sign = if k % 2 == 0 { R::one() } else { -R::one() };
        out.add_scaled(&c_shuffle_s::<R>(n, k), &sign);
    }
    out
}

/// `αₙ = −(c − s)ⁿ`, the antipode on words of length `n + 1`.
pub fn antipode_operator<R: Coeff>(n: usize) -> OpPoly<R> {
    -cs_power::<R>(n)
}

/// Right-hand side of the repeated partial-integration recursion
/// `αₙ = −cⁿ − Σ_{k<n} c^k s α_{n−k−1}`, with each `α_j` itself built by the
/// same recursion down to `α₀ = −1` (the antipode on single letters).
pub fn partial_integration_rhs<R: Coeff>(n: usize) -> OpPoly<R> {
    let mut alphas: Vec<OpPoly<R>> = vec![LinComb::term(OpWord::empty(), -R::one())];
    for m in 1..=n {
        let mut next = LinComb::term(OpWord::c_pow(m), -R::one());
        for k in 0..m {
            next -= glue(&OpWord::c_pow(k).to_poly(), &alphas[m - k - 1]);
        }
        alphas.push(next);
    }
    alphas.swap_remove(n)
}

/// `Σ_k C_{k+1} (c^{n−k} ш s^k)`, the operator whose action on any word of
/// length `n + 1` is the transformed-series coefficient for that word.
pub fn coefficient_operator<R: Coeff>(n: usize, coefficient: impl Fn(usize) -> R) -> OpPoly<R> {
    let mut out = OpPoly::zero();
    for k in 0..=n {
        let c = coefficient(k + 1);
        if !c.is_zero() {
            out.add_scaled(&c_shuffle_s::<R>(n, k), &c);
        }
    }
    out
}

/// Convenience for tests: the constant `1` at grade 0.
pub fn unit<R: Coeff>() -> OpPoly<R> {
    LinComb::term(OpWord::empty(), R::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;
    use crate::words::{antipode, w, words_of_length};

    fn op(s: &str) -> OpWord {
        s.parse().unwrap()
    }

    fn opp(terms: &[(i64, &str)]) -> OpPoly {
        terms.iter().map(|&(c, s)| (op(s), q(c, 1))).collect()
    }

    fn wp(terms: &[(i64, &str)]) -> WordPoly {
        terms.iter().map(|&(c, s)| (w(s), q(c, 1))).collect()
    }

    #[test]
    fn glue_examples() {
        assert_eq!(
            glue(&opp(&[(1, "c")]), &opp(&[(1, "c")])),
            opp(&[(1, "csc")])
        );
        assert_eq!(
            glue(&opp(&[(1, "cc")]), &opp(&[(1, "s")])),
            opp(&[(1, "ccss")])
        );
        let c = opp(&[(1, "c")]);
        assert_eq!(glue(&glue(&c, &c), &c), glue(&c, &glue(&c, &c)));
        assert_eq!(glue(&glue(&c, &c), &c), opp(&[(1, "cscsc")]));
    }

    #[test]
    fn op_shuffle_examples() {
        assert_eq!(
            op_shuffle(&opp(&[(1, "c")]), &opp(&[(1, "s")])),
            opp(&[(1, "cs"), (1, "sc")])
        );
        assert_eq!(
            op_shuffle(&opp(&[(1, "cc")]), &opp(&[(1, "s")])),
            opp(&[(1, "ccs"), (1, "csc"), (1, "scc")])
        );
        assert_eq!(op_shuffle(&opp(&[(1, "c")]), &unit()), opp(&[(1, "c")]));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            evaluate::<Rational>(&op("cc"), &w("123")).unwrap(),
            wp(&[(1, "123")])
        );
        let all6 = wp(&[
            (1, "123"),
            (1, "132"),
            (1, "213"),
            (1, "231"),
            (1, "312"),
            (1, "321"),
        ]);
        assert_eq!(evaluate::<Rational>(&op("ss"), &w("123")).unwrap(), all6);
        assert_eq!(
            evaluate::<Rational>(&op("cs"), &w("123")).unwrap(),
            wp(&[(1, "123"), (1, "132"), (1, "312")])
        );
        assert_eq!(
            evaluate::<Rational>(&op("sc"), &w("123")).unwrap(),
            wp(&[(1, "123"), (1, "213"), (1, "231")])
        );
        assert_eq!(
            evaluate::<Rational>(&OpWord::empty(), &w("2")).unwrap(),
            wp(&[(1, "2")])
        );
        assert_eq!(
            evaluate::<Rational>(&op("cs"), &w("12")),
            Err(Error::GradeMismatch { grade: 2, len: 2 })
        );
    }

    #[test]
    fn cs_power_examples() {
        assert_eq!(cs_power::<Rational>(1), opp(&[(1, "c"), (-1, "s")]));
        assert_eq!(
            cs_power::<Rational>(2),
            opp(&[(1, "cc"), (-1, "cs"), (-1, "sc"), (1, "ss")])
        );
        assert_eq!(cs_power::<Rational>(0), opp(&[(1, "e")]));
    }

    #[test]
    fn antipode_operator_examples() {
        assert_eq!(
            evaluate_poly(&antipode_operator::<Rational>(1), &w("12")).unwrap(),
            wp(&[(1, "21")])
        );
        assert_eq!(
            evaluate_poly(&antipode_operator::<Rational>(2), &w("123")).unwrap(),
            antipode(&w("123"))
        );
        assert_eq!(
            antipode_operator::<Rational>(2),
            opp(&[(-1, "cc"), (1, "cs"), (1, "sc"), (-1, "ss")])
        );
    }

    #[test]
    fn partial_integration_examples() {
        assert_eq!(
            partial_integration_rhs::<Rational>(1),
            opp(&[(-1, "c"), (1, "s")])
        );
        assert_eq!(
            partial_integration_rhs::<Rational>(2),
            antipode_operator::<Rational>(2)
        );
        let rhs3 = partial_integration_rhs::<Rational>(3);
        for word in words_of_length(2, 4) {
            assert_eq!(evaluate_poly(&rhs3, &word).unwrap(), antipode(&word));
        }
    }

    #[test]
    fn c_runs_account_for_grade() {
        for s in ["e", "c", "s", "cscc", "sscs", "ccc"] {
            let b = op(s);
            let runs = b.c_runs();
            assert_eq!(
                runs.iter().sum::<usize>() + runs.len() - 1,
                b.grade(),
                "{s}"
            );
        }
    }

    #[test]
    fn text_round_trip() {
        assert_eq!(op("csc").to_string(), "csc");
        assert!("cx".parse::<OpWord>().is_err());
        assert_eq!(grade_of(&cs_power::<Rational>(3)), Some(3));
    }
}
