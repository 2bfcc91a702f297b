//! Exact identity suites over the word and operator algebras, run as one
//! report. The antipode is injectable so a corrupted version can serve as a
//! negative control.

use std::fmt;

use num_traits::Zero;

use crate::algebra::{q, EpsPoly, Rational};
use crate::coeffs::{
    coefficient_via_operator, signature, sinhlog_closed_form, transform_series, CoefficientSet,
};
use crate::error::Result;
use crate::moments::MomentEngine;
use crate::opalg::{antipode_operator, cs_power, evaluate_poly, partial_integration_rhs};
use crate::words::{antipode, reversal, words_of_length, words_up_to, Word, WordPoly};

pub type AntipodeFn = fn(&Word) -> WordPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyResult {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl FamilyResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for FamilyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<24} {} checked, {} failed",
            self.name,
            self.checked,
            self.failures.len()
        )?;
        if let Some(first) = self.failures.first() {
            write!(f, " (first: {first})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub families: Vec<FamilyResult>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyResult::passed)
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for family in &self.families {
            writeln!(f, "{family}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Largest operator grade `n`; word lengths go up to `n + 1`.
    pub max_grade: usize,
    pub d: usize,
    pub antipode: AntipodeFn,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            max_grade: 5,
            d: 2,
            antipode: antipode::<Rational>,
        }
    }
}

/// Antipode with the sign of every length-3 image flipped.
pub fn corrupted_antipode(w: &Word) -> WordPoly {
    let a = antipode::<Rational>(w);
    if w.len() == 3 {
        -a
    } else {
        a
    }
}

fn family(name: &'static str, checks: impl IntoIterator<Item = (String, bool)>) -> FamilyResult {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (label, ok) in checks {
        checked += 1;
        if !ok {
            failures.push(label);
        }
    }
    FamilyResult {
        name,
        checked,
        failures,
    }
}

/// `ζ(Σ(−1)^k c^{n−k} ш s^k)∘w = −α∘w` for `|w| = n + 1`.
pub fn antipode_identity(config: &SuiteConfig) -> Result<FamilyResult> {
    let mut checks = Vec::new();
    for n in 0..=config.max_grade {
        let op = cs_power::<Rational>(n);
        for w in words_of_length(config.d, n + 1) {
            let lhs = evaluate_poly(&op, &w)?;
            checks.push((format!("n={n} w={w}"), lhs == -(config.antipode)(&w)));
        }
    }
    Ok(family("antipode", checks))
}

/// Operator recursion for `α_n` against `−(c − s)^n`.
pub fn partial_integration_identity(config: &SuiteConfig) -> Result<FamilyResult> {
    let checks = (0..=config.max_grade).map(|n| {
        (
            format!("n={n}"),
            partial_integration_rhs::<Rational>(n) == antipode_operator::<Rational>(n),
        )
    });
    Ok(family("partial-integration", checks))
}

/// Series, operator and closed-form routes to the sinh-log coefficients,
/// both at `ε = 0` and with symbolic `ε`.
pub fn coefficient_triple(config: &SuiteConfig) -> Result<FamilyResult> {
    let max_len = config.max_grade.min(5);
    let s = signature(max_len, config.d)?;
    let mut checks = Vec::new();
    let plain = transform_series(&s, &CoefficientSet::SinhLog);
    for w in words_up_to(config.d, max_len) {
        let via_op = coefficient_via_operator(&w, &CoefficientSet::SinhLog)?;
        let closed = sinhlog_closed_form(&w, &EpsPoly::zero())?;
        let series = plain.get(&w);
        checks.push((format!("eps=0 w={w}"), series == via_op && via_op == closed));
    }
    for n in 1..max_len {
        let set = CoefficientSet::partial_sinh_log(n)?;
        let series = transform_series(&s.truncated(n + 1), &set);
        for w in words_up_to(config.d, n + 1) {
            let via_op = coefficient_via_operator(&w, &set)?;
            // ε only reaches the top grade.
            let eps = if w.len() == n + 1 {
                EpsPoly::eps()
            } else {
                EpsPoly::zero()
            };
            let closed = sinhlog_closed_form(&w, &eps)?;
            checks.push((
                format!("eps n={n} w={w}"),
                series.get(&w) == via_op && via_op == closed,
            ));
        }
    }
    Ok(family("coefficient-triple", checks))
}

/// `𝔼(J_u J_v) = 𝔼(J_{ρ∘u} J_{ρ∘v})`.
pub fn reversal_invariance(config: &SuiteConfig, engine: &MomentEngine) -> FamilyResult {
    let words = words_up_to(config.d, config.max_grade.min(4));
    let mut checks = Vec::new();
    for u in &words {
        for v in &words {
            let lhs = engine.expect_strat_product(u, v);
            let rhs = engine.expect_strat_product(&reversal(u), &reversal(v));
            checks.push((format!("u={u} v={v}"), lhs == rhs));
        }
    }
    family("reversal-invariance", checks)
}

/// `𝔼(J_a J_w) = ½𝔼(J_a(J_w − J_{α∘w}))` for single letters `a`.
pub fn single_letter_identity(config: &SuiteConfig, engine: &MomentEngine) -> FamilyResult {
    let mut checks = Vec::new();
    for a in 1..=config.d as u8 {
        let letter = Word::letter(a).to_poly::<Rational>();
        for w in words_up_to(config.d, config.max_grade) {
            let lhs = engine.expect_poly_product(&letter, &w.to_poly());
            let half_diff = (w.to_poly::<Rational>() - (config.antipode)(&w)).scaled(&q(1, 2));
            let rhs = engine.expect_poly_product(&letter, &half_diff);
            checks.push((format!("a={a} w={w}"), lhs == rhs));
        }
    }
    family("single-letter", checks)
}

pub fn run_suite(config: &SuiteConfig) -> Result<IdentityReport> {
    let engine = MomentEngine::global();
    Ok(IdentityReport {
        families: vec![
            antipode_identity(config)?,
            partial_integration_identity(config)?,
            coefficient_triple(config)?,
            reversal_invariance(config, engine),
            single_letter_identity(config, engine),
        ],
    })
}
