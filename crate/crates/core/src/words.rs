//! Words over the alphabet `{1, …, d}` and the word algebra: concatenation,
//! shuffle, antipode and reversal.
//!
//! A word prints as its digit string (`"121"`); the empty word prints as
//! `"e"`. Words order by length first and lexicographically within a length,
//! so every [`WordPoly`] serialises deterministically.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::algebra::{Coeff, Letters, LinComb, Rational};
use crate::error::{Error, Result};

pub const MAX_ALPHABET: usize = 9;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

/// Exact rational combination of words.
pub type WordPoly<R = Rational> = LinComb<Word, R>;

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = letters
            .iter()
            .find(|&&l| l == 0 || l as usize > MAX_ALPHABET)
        {
            return Err(Error::LetterOutOfAlphabet {
                letter: bad,
                d: MAX_ALPHABET as u8,
            });
        }
        Ok(Word(letters))
    }

    pub fn letter(letter: u8) -> Self {
        Word::new(vec![letter]).expect("letter in 1..=9")
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks every letter lies in `1..=d`.
    pub fn check_alphabet(&self, d: usize) -> Result<()> {
        check_alphabet_size(d)?;
        match self.0.iter().find(|&&l| l as usize > d) {
            Some(&letter) => Err(Error::LetterOutOfAlphabet { letter, d: d as u8 }),
            None => Ok(()),
        }
    }

    /// Subword `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn to_poly<R: Coeff>(&self) -> WordPoly<R> {
        LinComb::monomial(self.clone())
    }
}

pub fn check_alphabet_size(d: usize) -> Result<()> {
    if (1..=MAX_ALPHABET).contains(&d) {
        Ok(())
    } else {
        Err(Error::AlphabetSize(d))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Letters for Word {
    type Letter = u8;

    fn letters(&self) -> &[u8] {
        &self.0
    }

    fn from_letters(letters: Vec<u8>) -> Self {
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "e" || s.is_empty() {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|ch| match ch.to_digit(10) {
                Some(v) if v >= 1 => Ok(v as u8),
                _ => Err(Error::InvalidLetter { letter: ch }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// Parses a word literal; panics on malformed input. Intended for tests and
/// fixed tables.
pub fn w(s: &str) -> Word {
    s.parse().expect("valid word literal")
}

pub fn concat(u: &Word, v: &Word) -> Word {
    let mut letters = u.0.clone();
    letters.extend_from_slice(&v.0);
    Word(letters)
}

pub fn shuffle<R: Coeff>(p: &WordPoly<R>, q: &WordPoly<R>) -> WordPoly<R> {
    p.shuffle(q)
}

/// Unsigned reversal.
pub fn reversal(w: &Word) -> Word {
    Word(w.0.iter().rev().copied().collect())
}

/// Signed reversal `(-1)^|w| · reverse(w)`.
pub fn antipode<R: Coeff>(w: &Word) -> WordPoly<R> {
    let sign = if w.len().is_multiple_of(2) {
        R::one()
    } else {
        -R::one()
    };
    LinComb::term(reversal(w), sign)
}

pub fn antipode_poly<R: Coeff>(p: &WordPoly<R>) -> WordPoly<R> {
    p.flat_map(antipode)
}

/// `a₁ ш a₂ ш … ш aₙ` for `w = a₁…aₙ`.
pub fn full_shuffle_of_letters<R: Coeff>(w: &Word) -> Result<WordPoly<R>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(w.0
        .iter()
        .map(|&l| Word::letter(l).to_poly::<R>())
        .reduce(|acc, p| acc.shuffle(&p))
        .expect("non-empty"))
}

/// All words of length `len` over `{1..d}`, in canonical order.
pub fn words_of_length(d: usize, len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=d as u8).map(move |l| {
                    let mut letters = w.0.clone();
                    letters.push(l);
                    Word(letters)
                })
            })
            .collect();
    }
    out
}

/// All words with `1 <= len <= max_len`.
pub fn words_up_to(d: usize, max_len: usize) -> Vec<Word> {
    (1..=max_len)
        .flat_map(|len| words_of_length(d, len))
        .collect()
}
