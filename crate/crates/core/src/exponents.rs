//! Repetition measures of automatic sequences, each reduced to the supremum
//! or largest special point of `quo` over a pair language compiled from a
//! first-order formula.
//!
//! Every pair language puts a length in track 1 and a period (or a gap
//! against a length) in track 2, so that `quo` is the measured ratio.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::automaton::{AutomatonError, Dfa, Dfao};
use crate::logic::{self, CompilationEnv, LogicError};
use crate::numeral::{DigitOrder, ExtRational, Rational};
use crate::quotient::{
    check_pair_closure, largest_special_point, prepare, sup_quo, Comparator, PairClosureReport,
    QuotientError, Relation, Witness,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("not a sequence automaton: {0}")]
    InvalidSequence(String),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Critical,
    C1,
    C2,
    Ice1,
    Ice2,
    Dio,
    RecurrenceConstant,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Critical => "critical",
            Measure::C1 => "c1",
            Measure::C2 => "c2",
            Measure::Ice1 => "ice1",
            Measure::Ice2 => "ice2",
            Measure::Dio => "dio",
            Measure::RecurrenceConstant => "recurrence",
        }
    }

    /// Measures reported as a supremum, for which attainment is meaningful.
    pub fn is_supremum(self) -> bool {
        matches!(
            self,
            Measure::Critical | Measure::C1 | Measure::Ice1 | Measure::RecurrenceConstant
        )
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ExponentResult {
    pub measure: Measure,
    pub value: ExtRational,
    /// `None` for measures defined as largest special points.
    pub attained: Option<bool>,
    pub witness: Witness,
    /// The canonical pair language the value was read from.
    pub language: Dfa,
}

/// Validates a sequence automaton and brings it to msd-first minimal form.
pub fn normalize(a: &Dfao) -> Result<Dfao, ExponentError> {
    if a.tracks() != 1 {
        return Err(ExponentError::InvalidSequence(format!(
            "expected 1 input track, found {}",
            a.tracks()
        )));
    }
    let seq = a.to_msd()?.minimize();
    if !seq.is_zero_invariant() {
        return Err(ExponentError::InvalidSequence(
            "output depends on leading zeros".into(),
        ));
    }
    Ok(seq)
}

/// Compiles a formula with free variables `vars` (numerator track first) and
/// makes the result canonical.
pub fn pair_language(a: &Dfao, formula: &str, vars: [&str; 2]) -> Result<Dfa, ExponentError> {
    let seq = normalize(a)?;
    let parsed = logic::parse(formula)?;
    let dfa = logic::compile(&parsed, &CompilationEnv::for_sequence(&seq, &vars))?;
    Ok(prepare(&dfa)?)
}

const PERIOD: &str = "p >= 1 & E i . A j . j + p < q -> seq[i+j] = seq[i+p+j]";

const RECURRENT_PERIOD: &str = "p >= 1 & E i . ((A j . j + p < q -> seq[i+j] = seq[i+p+j]) & \
     (A j2 . (A m . m < q -> seq[i+m] = seq[j2+m]) -> \
     E l . l > j2 & (A m2 . m2 < q -> seq[i+m2] = seq[l+m2])))";

const PREFIX_PERIOD: &str = "p >= 1 & A j . j + p < q -> seq[j] = seq[j+p]";

const DIOPHANTINE: &str = "E i . E l . E p . s = i + l & t = i + p & l >= p & p >= 1 & \
     A j . j + p < l -> seq[i+j] = seq[i+p+j]";

const RECURRENT: &str = "A i . A q . E j . j > i & A m . m < q -> seq[i+m] = seq[j+m]";

const GAP: &str = "l >= 1 & E i . (A j . j < l -> seq[i+j] = seq[i+n+j]) & \
     (A t . (0 < t & t < n) -> E j2 . j2 < l & ~(seq[i+j2] = seq[i+t+j2]))";

/// `(q, p)` such that some factor of length `q` has period `p ≥ 1`.
pub fn period_language(a: &Dfao) -> Result<Dfa, ExponentError> {
    pair_language(a, PERIOD, ["q", "p"])
}

/// `(q, p)` such that some factor of length `q` with period `p` occurs
/// infinitely often.
pub fn recurrent_period_language(a: &Dfao) -> Result<Dfa, ExponentError> {
    pair_language(a, RECURRENT_PERIOD, ["q", "p"])
}

/// `(q, p)` such that the prefix of length `q` has period `p ≥ 1`.
pub fn prefix_period_language(a: &Dfao) -> Result<Dfa, ExponentError> {
    pair_language(a, PREFIX_PERIOD, ["q", "p"])
}

/// `(i + ℓ, i + p)` such that the factor of length `ℓ` at `i` has period
/// `p ≤ ℓ`.
pub fn diophantine_language(a: &Dfao) -> Result<Dfa, ExponentError> {
    pair_language(a, DIOPHANTINE, ["s", "t"])
}

/// `(n, ℓ)` such that some length-`ℓ` factor occurs again `n` positions
/// later and not in between.
pub fn gap_language(a: &Dfao) -> Result<Dfa, ExponentError> {
    pair_language(a, GAP, ["n", "l"])
}

fn supremum(measure: Measure, language: Dfa) -> Result<ExponentResult, ExponentError> {
    let r = sup_quo(&language)?;
    Ok(ExponentResult {
        measure,
        value: r.value,
        attained: Some(r.attained),
        witness: r.witness,
        language,
    })
}

fn special(measure: Measure, language: Dfa) -> Result<ExponentResult, ExponentError> {
    let s = largest_special_point(&language)?;
    Ok(ExponentResult {
        measure,
        value: s.value,
        attained: None,
        witness: Witness::Pump(s.pump),
        language,
    })
}

pub fn critical_exponent(a: &Dfao) -> Result<ExponentResult, ExponentError> {
    supremum(Measure::Critical, period_language(a)?)
}

pub fn recurrent_critical_exponent(a: &Dfao) -> Result<ExponentResult, ExponentError> {
    supremum(Measure::C1, recurrent_period_language(a)?)
}

pub fn special_exponent(a: &Dfao) -> Result<ExponentResult, ExponentError> {
    special(Measure::C2, period_language(a)?)
}

/// `(ice₁, ice₂)`: supremum and largest special point over prefixes.
pub fn initial_critical_exponents(a: &Dfao) -> Result<(ExponentResult, ExponentResult), ExponentError> {
    let language = prefix_period_language(a)?;
    Ok((
        supremum(Measure::Ice1, language.clone())?,
        special(Measure::Ice2, language)?,
    ))
}

pub fn diophantine_exponent(a: &Dfao) -> Result<ExponentResult, ExponentError> {
    special(Measure::Dio, diophantine_language(a)?)
}

/// Runs the pipeline for one measure.
pub fn measure(a: &Dfao, which: Measure) -> Result<ExponentResult, ExponentError> {
    match which {
        Measure::Critical => critical_exponent(a),
        Measure::C1 => recurrent_critical_exponent(a),
        Measure::C2 => special_exponent(a),
        Measure::Ice1 => supremum(Measure::Ice1, prefix_period_language(a)?),
        Measure::Ice2 => special(Measure::Ice2, prefix_period_language(a)?),
        Measure::Dio => diophantine_exponent(a),
        Measure::RecurrenceConstant => match linear_recurrence(a)? {
            RecurrenceVerdict::NotRecurrent => Err(ExponentError::InvalidSequence(
                "the sequence is not recurrent".into(),
            )),
            RecurrenceVerdict::Recurrent(r) => Ok(r),
        },
    }
}

/// Whether every factor occurs infinitely often.
pub fn is_recurrent(a: &Dfao) -> Result<bool, ExponentError> {
    let seq = normalize(a)?;
    let f = logic::parse(RECURRENT)?;
    Ok(logic::evaluate_sentence(&f, &CompilationEnv::for_sequence(&seq, &[]))?)
}

#[derive(Debug, Clone)]
pub enum RecurrenceVerdict {
    NotRecurrent,
    /// Linearly recurrent with optimal constant `value` when finite.
    Recurrent(ExponentResult),
}

impl RecurrenceVerdict {
    pub fn is_linear(&self) -> bool {
        matches!(self, RecurrenceVerdict::Recurrent(r) if r.value != ExtRational::Infinite)
    }
}

/// Decides linear recurrence and computes the optimal constant.
pub fn linear_recurrence(a: &Dfao) -> Result<RecurrenceVerdict, ExponentError> {
    if !is_recurrent(a)? {
        return Ok(RecurrenceVerdict::NotRecurrent);
    }
    Ok(RecurrenceVerdict::Recurrent(supremum(
        Measure::RecurrenceConstant,
        gap_language(a)?,
    )?))
}

/// Closure conditions of the pair languages whose special points are read
/// as accumulation points, each restricted to quotients at least 1.
pub fn closure_audit(a: &Dfao) -> Result<Vec<(&'static str, PairClosureReport)>, ExponentError> {
    let ge1 = Comparator::new(a.radix(), Rational::one(), Relation::Ge).dfa()?;
    let mut out = Vec::new();
    for (name, language) in [
        ("period", period_language(a)?),
        ("prefix-period", prefix_period_language(a)?),
    ] {
        let restricted = language.intersect(&ge1)?;
        out.push((name, check_pair_closure(&restricted)?));
    }
    Ok(out)
}

/// Whether every accepted pair with numerator at least the denominator has
/// quotient at least 1; always true, checked as an automaton identity.
pub fn orientation_holds(language: &Dfa) -> Result<bool, ExponentError> {
    let radix = language.radix();
    let below = Comparator::new(radix, Rational::one(), Relation::Lt).dfa()?;
    let ge = logic::compile(
        &logic::parse("p <= q")?,
        &CompilationEnv::new(radix, None, &["q", "p"]),
    )?;
    debug_assert_eq!(language.order(), DigitOrder::Msd);
    Ok(language.intersect(&ge)?.intersect(&below)?.is_empty())
}

/// Numerator and denominator behind a witness: the pair itself for a word,
/// the per-pump increments for a pump with finite limit.
pub fn witness_pair(w: &Witness) -> Option<(String, String)> {
    match w {
        Witness::Word(x) => Some((x.value(0).to_string(), x.value(1).to_string())),
        Witness::Pump(p) if !p.increments[1].is_zero() => Some((
            p.increments[0].to_string(),
            p.increments[1].to_string(),
        )),
        Witness::Pump(_) => None,
    }
}
