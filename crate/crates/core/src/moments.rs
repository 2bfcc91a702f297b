//! Exact one-step moments of products of multiple Stratonovich integrals.
//!
//! Each `J_w` is rewritten as a combination of Itô integrals `I_u` over
//! multi-indices containing `0` (the `dt` channel). `𝔼(I_u I_v)` then follows
//! from the Itô product rule: for `u = u′a`, `v = v′b`,
//!
//! ```text
//! d/dt 𝔼(I_u I_v) = [a=0] 𝔼(I_{u′} I_v) + [b=0] 𝔼(I_u I_{v′}) + [a=b≠0] 𝔼(I_{u′} I_{v′})
//! ```
//!
//! with `𝔼(I_∅ I_∅) = 1`. Every nonzero value is a single monomial `q·tᵐ`.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_traits::{One, Zero};

use crate::algebra::{q, rational_to_f64, Coeff, EpsPoly, LinComb, Rational};
use crate::error::{Error, Result};
use crate::words::{Word, WordPoly};

/// Sequence over `{0, 1, …, 9}`; `0` is the time channel.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&e| e > 9) {
            return Err(Error::LetterOutOfAlphabet { letter: bad, d: 9 });
        }
        Ok(MultiIndex(entries))
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Non-zero entries, `ℓ(u)`.
    pub fn letters(&self) -> usize {
        self.0.iter().filter(|&&e| e != 0).count()
    }

    /// Zero entries, `n(u)`.
    pub fn zeros(&self) -> usize {
        self.0.len() - self.letters()
    }

    fn split_last(&self) -> Option<(MultiIndex, u8)> {
        let (&last, init) = self.0.split_last()?;
        Some((MultiIndex(init.to_vec()), last))
    }

    fn nonzero_subsequence(&self) -> impl Iterator<Item = &u8> {
        self.0.iter().filter(|&&e| e != 0)
    }
}

impl From<&Word> for MultiIndex {
    fn from(w: &Word) -> Self {
        MultiIndex(w.as_slice().to_vec())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for e in &self.0 {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "e" || s.is_empty() {
            return Ok(MultiIndex::empty());
        }
        s.chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|v| v as u8)
                    .ok_or(Error::InvalidLetter { letter: ch })
            })
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }
}

/// Itô combination `Σ c_u I_u`.
pub type ItoCombo = LinComb<MultiIndex, Rational>;

/// Power of `t`; prints as `1`, `t`, `t^m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TPower(pub usize);

impl fmt::Display for TPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "1"),
            1 => write!(f, "t"),
            m => write!(f, "t^{m}"),
        }
    }
}

/// `Σ q·tᵐ`.
pub type MomentValue<R = Rational> = LinComb<TPower, R>;

fn monomial<R: Coeff>(power: usize, coefficient: R) -> MomentValue<R> {
    LinComb::term(TPower(power), coefficient)
}

/// Evaluates a moment at a concrete step length.
pub fn eval_moment<R: Coeff>(value: &MomentValue<R>, t: f64, coeff: impl Fn(&R) -> f64) -> f64 {
    value
        .iter()
        .map(|(p, c)| coeff(c) * t.powi(p.0 as i32))
        .sum()
}

pub fn eval_rational_moment(value: &MomentValue, t: f64) -> f64 {
    eval_moment(value, t, |c| rational_to_f64(*c))
}

/// Stratonovich-to-Itô conversion: `J_w = Σ_{u∈𝔻(w)} (½)^{n(u)} I_u`, where
/// `𝔻(w)` is the closure of `{w}` under replacing two adjacent equal non-zero
/// entries by one `0`.
pub fn strat_to_ito(w: &Word) -> ItoCombo {
    let start = MultiIndex::from(w);
    let mut seen: HashMap<MultiIndex, usize> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for i in 0..u.len().saturating_sub(1) {
            let (a, b) = (u.0[i], u.0[i + 1]);
            if a != 0 && a == b {
                let mut next = u.0[..i].to_vec();
                next.push(0);
                next.extend_from_slice(&u.0[i + 2..]);
                let next = MultiIndex(next);
                let zeros = next.zeros();
                match seen.get(&next) {
                    // Every replacement adds exactly one zero and removes two
                    // letters, so the zero count is fixed by the length.
                    Some(&z) => assert_eq!(z, zeros, "inconsistent zero count for {next}"),
                    None => {
                        seen.insert(next.clone(), zeros);
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    seen.into_iter()
        .map(|(u, zeros)| (u, q(1, 1 << zeros)))
        .collect()
}

type Monomial = Option<(usize, Rational)>;

/// Memoised `𝔼(I_u I_v)` table. Reads run concurrently; inserts are
/// serialised by the lock and idempotent, so results are deterministic.
#[derive(Default)]
pub struct MomentEngine {
    ito: RwLock<HashMap<(MultiIndex, MultiIndex), Monomial>>,
    strat: RwLock<HashMap<(Word, Word), MomentValue>>,
}

impl MomentEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide engine.
    pub fn global() -> &'static MomentEngine {
        static ENGINE: OnceLock<MomentEngine> = OnceLock::new();
        ENGINE.get_or_init(MomentEngine::new)
    }

    fn ito_monomial(&self, u: &MultiIndex, v: &MultiIndex) -> Monomial {
        if u.is_empty() && v.is_empty() {
            return Some((0, Rational::one()));
        }
        if !u.nonzero_subsequence().eq(v.nonzero_subsequence()) {
            return None;
        }
        let key = if u <= v {
            (u.clone(), v.clone())
        } else {
            (v.clone(), u.clone())
        };
        if let Some(hit) = self.ito.read().expect("moment cache poisoned").get(&key) {
            return *hit;
        }

        let mut derivative: HashMap<usize, Rational> = HashMap::new();
        let mut add = |m: Monomial| {
            if let Some((p, c)) = m {
                *derivative.entry(p).or_insert_with(Rational::zero) += c;
            }
        };
        let last_u = u.split_last();
        let last_v = v.split_last();
        if let Some((u_init, 0)) = &last_u {
            add(self.ito_monomial(u_init, v));
        }
        if let Some((v_init, 0)) = &last_v {
            add(self.ito_monomial(u, v_init));
        }
        if let (Some((u_init, a)), Some((v_init, b))) = (&last_u, &last_v) {
            if *a != 0 && a == b {
                add(self.ito_monomial(u_init, v_init));
            }
        }
        derivative.retain(|_, c| !c.is_zero());
        debug_assert!(derivative.len() <= 1, "moment is not a monomial");
        let value = derivative.into_iter().next().map(|(p, c)| {
            let m = p + 1;
            (m, c / Rational::from_integer(m as i64))
        });

        self.ito
            .write()
            .expect("moment cache poisoned")
            .insert(key, value);
        value
    }

    pub fn expect_ito_product(&self, u: &MultiIndex, v: &MultiIndex) -> MomentValue {
        match self.ito_monomial(u, v) {
            Some((p, c)) => monomial(p, c),
            None => MomentValue::zero(),
        }
    }

    pub fn expect_strat_product(&self, u: &Word, v: &Word) -> MomentValue {
        let key = if u <= v {
            (u.clone(), v.clone())
        } else {
            (v.clone(), u.clone())
        };
        if let Some(hit) = self.strat.read().expect("moment cache poisoned").get(&key) {
            return hit.clone();
        }
        let mut out = MomentValue::zero();
        let (cu, cv) = (strat_to_ito(u), strat_to_ito(v));
        for (iu, a) in cu.iter() {
            for (iv, b) in cv.iter() {
                if let Some((p, c)) = self.ito_monomial(iu, iv) {
                    out.add_term(TPower(p), *a * *b * c);
                }
            }
        }
        self.strat
            .write()
            .expect("moment cache poisoned")
            .insert(key, out.clone());
        out
    }

    /// Bilinear extension to word polynomials over any coefficient ring.
    pub fn expect_poly_product<R: Coeff>(
        &self,
        p: &WordPoly<R>,
        r: &WordPoly<R>,
    ) -> MomentValue<R> {
        let mut out = MomentValue::zero();
        for (u, a) in p.iter() {
            for (v, b) in r.iter() {
                for (power, c) in self.expect_strat_product(u, v).iter() {
                    out.add_term(*power, a.clone() * b.clone() * R::from_rational(*c));
                }
            }
        }
        out
    }

    pub fn expect_single(&self, w: &Word) -> MomentValue {
        self.expect_strat_product(w, &Word::empty())
    }
}

pub fn expect_ito_product(u: &MultiIndex, v: &MultiIndex) -> MomentValue {
    MomentEngine::global().expect_ito_product(u, v)
}

pub fn expect_strat_product(u: &Word, v: &Word) -> MomentValue {
    MomentEngine::global().expect_strat_product(u, v)
}

pub fn expect_poly_product<R: Coeff>(p: &WordPoly<R>, r: &WordPoly<R>) -> MomentValue<R> {
    MomentEngine::global().expect_poly_product(p, r)
}

pub fn expect_single(w: &Word) -> MomentValue {
    MomentEngine::global().expect_single(w)
}

/// `𝔼(J_w)` for a polynomial carrying `ε`.
pub fn expect_single_poly(p: &WordPoly<EpsPoly>) -> MomentValue<EpsPoly> {
    let unit = Word::empty().to_poly::<EpsPoly>();
    expect_poly_product(p, &unit)
}
