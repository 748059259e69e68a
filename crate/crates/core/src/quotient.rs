//! Suprema and largest special points of `quo_k(L)` for regular pair
//! languages `L`.
//!
//! All solvers take a *canonical* two-track msd-first automaton: no accepted
//! word starts with `[0,0]` and every accepted word has a nonzero second
//! track. [`prepare`] turns an arbitrary pair automaton into one.
//!
//! The workhorse is a linear functional `f(x) = c₁[π₁x] + c₂[π₂x]`. Reading
//! a symbol maps `f` to `k·f + c₁a₁ + c₂a₂`, which is monotone in `f`, so the
//! largest value of `f` over the words reaching a state is computed by a
//! fixpoint over states alone. With `β = P/Q`, `L ∩ L_{>β}` is nonempty iff
//! `max (Q[π₁x] − P[π₂x]) > 0`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::automaton::{explore, state_limit, AutomatonError, Dfa, PumpDecomposition, StateId};
use crate::logic::{self, CompilationEnv, Formula, LogicError, Term};
use crate::numeral::{pow_k, quo, DigitOrder, DigitWord, ExtRational, NumeralError, Radix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error("the language is empty, so quo has no supremum")]
    EmptyLanguage,
    #[error("the language is finite, so it has no special point")]
    FiniteLanguage,
    #[error("an accepted word has second-track value 0; restrict to nonzero denominators first")]
    ZeroDenominator,
    #[error("an accepted word starts with the all-zero symbol; canonicalize first")]
    NotCanonical,
    #[error("expected a 2-track msd-first automaton, found {tracks} tracks ({order})")]
    Shape { tracks: usize, order: DigitOrder },
    #[error("gamma is undefined when u and v are all zeros")]
    UndefinedGamma,
    #[error("candidate enumeration exceeded the budget of {0} items")]
    BudgetExceeded(usize),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Numeral(#[from] NumeralError),
}

/// `γ(u, v) = A₁/A₂` with `A_j = [π_j(uv)] − [π_j(u)]`, the limit of
/// `quo(u vⁱ w)` as `i → ∞`.
pub fn gamma(u: &DigitWord, v: &DigitWord) -> Result<ExtRational, QuotientError> {
    if u.tracks() != 2 || v.tracks() != 2 || u.radix() != v.radix() {
        return Err(QuotientError::Shape {
            tracks: v.tracks(),
            order: v.order(),
        });
    }
    if v.is_empty() {
        return Err(QuotientError::Internal("gamma needs a nonempty v".into()));
    }
    let pump = PumpDecomposition::new(u.clone(), v.clone(), 0);
    pump_gamma(&pump)
}

fn pump_gamma(pump: &PumpDecomposition) -> Result<ExtRational, QuotientError> {
    ExtRational::ratio(pump.increments[0].clone(), pump.increments[1].clone())
        .ok_or(QuotientError::UndefinedGamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Lt,
        Relation::Le,
        Relation::Eq,
        Relation::Ge,
        Relation::Gt,
        Relation::Ne,
    ];

    /// Whether `x ⋈ y` given `x.cmp(y)`.
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
            Relation::Eq => ord == Ordering::Equal,
            Relation::Ge => ord != Ordering::Less,
            Relation::Gt => ord == Ordering::Greater,
            Relation::Ne => ord != Ordering::Equal,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Ne => "!=",
        })
    }
}

/// The pair language `L_{⋈β} = {(p, q) : p·Q ⋈ q·P}` for `β = P/Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparator {
    pub radix: Radix,
    pub threshold: Rational,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Diff {
    Neg,
    Pos,
    Val(BigInt),
}

impl Comparator {
    pub fn new(radix: Radix, threshold: Rational, relation: Relation) -> Self {
        Comparator {
            radix,
            threshold,
            relation,
        }
    }

    fn p(&self) -> &BigUint {
        self.threshold.numer()
    }

    fn q(&self) -> &BigUint {
        self.threshold.denom()
    }

    /// Exact test on values.
    pub fn holds_values(&self, p: &BigUint, q: &BigUint) -> bool {
        self.relation.holds((p * self.q()).cmp(&(q * self.p())))
    }

    pub fn holds(&self, word: &DigitWord) -> bool {
        self.holds_values(&word.value(0), &word.value(1))
    }

    /// Automaton built least-significant digit first: the state holds the
    /// carries of the running products `p·Q` and `q·P` and the comparison of
    /// the low-order digits produced so far. Reversed to msd-first.
    pub fn dfa(&self) -> Result<Dfa, QuotientError> {
        let radix = self.radix;
        let k = BigUint::from(radix.k());
        let (big_p, big_q) = (self.p().clone(), self.q().clone());
        let sigma = radix.alphabet_size(2)?;
        let init = (BigUint::zero(), BigUint::zero(), Ordering::Equal);
        let (delta, keys) = explore(init, sigma, |(c1, c2, verdict), a| {
            let d = radix.unpack(a, 2);
            let t1 = &big_q * d[0] + c1;
            let t2 = &big_p * d[1] + c2;
            let (d1, d2) = (&t1 % &k, &t2 % &k);
            // a more significant digit overrides the verdict so far
            let verdict = d1.cmp(&d2).then(*verdict);
            (t1 / &k, t2 / &k, verdict)
        })?;
        let accepting = keys
            .iter()
            .map(|(c1, c2, verdict)| self.relation.holds(c1.cmp(c2).then(*verdict)))
            .collect();
        // minimizing first keeps the subsets of the reversal small
        let lsd = Dfa::from_parts(radix, 2, DigitOrder::Lsd, 0, delta, accepting)?.minimize()?;
        Ok(lsd.reverse()?.with_zero_invariant(true))
    }

    /// Automaton read most-significant digit first, tracking the exact
    /// difference `p·Q − q·P` of the prefixes until its sign can no longer
    /// change.
    pub fn dfa_msd(&self) -> Result<Dfa, QuotientError> {
        let radix = self.radix;
        let k = BigInt::from(radix.k());
        let big_p = BigInt::from(self.p().clone());
        let big_q = BigInt::from(self.q().clone());
        let upper = big_p.clone().max(BigInt::one());
        let lower = -big_q.clone();
        let sigma = radix.alphabet_size(2)?;
        let (delta, keys) = explore(Diff::Val(BigInt::zero()), sigma, |s, a| match s {
            Diff::Val(v) => {
                let d = radix.unpack(a, 2);
                let next = &k * v + &big_q * d[0] - &big_p * d[1];
                if next >= upper {
                    Diff::Pos
                } else if next <= lower {
                    Diff::Neg
                } else {
                    Diff::Val(next)
                }
            }
            sink => sink.clone(),
        })?;
        let accepting = keys
            .iter()
            .map(|s| {
                let ord = match s {
                    Diff::Neg => Ordering::Less,
                    Diff::Pos => Ordering::Greater,
                    Diff::Val(v) => v.cmp(&BigInt::zero()),
                };
                self.relation.holds(ord)
            })
            .collect();
        Ok(Dfa::from_parts(radix, 2, DigitOrder::Msd, 0, delta, accepting)?
            .minimize()?
            .with_zero_invariant(true))
    }

    /// A word of `L(dfa) ∩ L_{⋈β}`, if any. The automaton must be two-track
    /// msd-first; no comparator automaton is materialized.
    pub fn witness_in(&self, dfa: &Dfa) -> Result<Option<DigitWord>, QuotientError> {
        require_pair_msd(dfa)?;
        let big_p = BigInt::from(self.p().clone());
        let big_q = BigInt::from(self.q().clone());
        let above = [big_q.clone(), -big_p.clone()];
        let below = [-big_q.clone(), big_p.clone()];
        let zero = BigInt::zero();
        let one = BigInt::one();
        let found = match self.relation {
            Relation::Gt => functional_witness(dfa, &above, &one),
            Relation::Ge => functional_witness(dfa, &above, &zero),
            Relation::Lt => functional_witness(dfa, &below, &one),
            Relation::Le => functional_witness(dfa, &below, &zero),
            Relation::Ne => functional_witness(dfa, &above, &one)
                .or_else(|| functional_witness(dfa, &below, &one)),
            Relation::Eq => match equal_witness(dfa, &big_p, &big_q) {
                Ok(w) => w,
                // fall back to a not necessarily shortest witness
                Err(AutomatonError::TooManyStates(_)) => {
                    functional_witness(dfa, &above, &zero).filter(|w| {
                        let x = dfa.word(w.clone());
                        self.holds(&x)
                    })
                }
                Err(e) => return Err(e.into()),
            },
        };
        Ok(found.map(|w| dfa.word(w)))
    }

    pub fn intersection_is_empty(&self, dfa: &Dfa) -> Result<bool, QuotientError> {
        Ok(self.witness_in(dfa)?.is_none())
    }
}

fn require_pair_msd(dfa: &Dfa) -> Result<(), QuotientError> {
    if dfa.tracks() != 2 || dfa.order() != DigitOrder::Msd {
        return Err(QuotientError::Shape {
            tracks: dfa.tracks(),
            order: dfa.order(),
        });
    }
    Ok(())
}

/// Per-symbol increment `Σ c_j a_j` of a functional.
fn increments(dfa: &Dfa, coeffs: &[BigInt]) -> Vec<BigInt> {
    let radix = dfa.radix();
    (0..dfa.alphabet_size() as u32)
        .map(|a| {
            radix
                .unpack(a, dfa.tracks())
                .iter()
                .zip(coeffs)
                .map(|(&d, c)| c * d)
                .sum()
        })
        .collect()
}

/// Largest value of `f(x) = Σ c_j [π_j x]` over accepted words, up to
/// saturation, with a word attaining it. Returns early once some accepted
/// word reaches `target`.
///
/// Values at or above `max(Σ c_j⁻, 1)` stay there under every extension and
/// are clamped to it; likewise values at or below `−max(Σ c_j⁺, 1)`. Values
/// strictly between the clamps are exact.
fn max_functional(
    dfa: &Dfa,
    coeffs: &[BigInt],
    target: Option<&BigInt>,
) -> Option<(BigInt, Vec<u32>)> {
    let k = BigInt::from(dfa.radix().k());
    let inc = increments(dfa, coeffs);
    let neg: BigInt = coeffs.iter().filter(|c| c.is_negative()).map(|c| -c).sum();
    let pos: BigInt = coeffs.iter().filter(|c| c.is_positive()).cloned().sum();
    let upper = neg.max(BigInt::one());
    let lower = -pos.max(BigInt::one());
    let clamp = |v: BigInt| {
        if v >= upper {
            upper.clone()
        } else if v <= lower {
            lower.clone()
        } else {
            v
        }
    };

    const NONE: u32 = u32::MAX;
    // (value, parent entry, symbol); parents always precede children
    let mut entries: Vec<(BigInt, u32, u32)> = vec![(BigInt::zero(), NONE, 0)];
    let n = dfa.num_states();
    let mut cur = vec![NONE; n];
    cur[dfa.initial() as usize] = 0;
    let mut frontier = vec![dfa.initial()];
    let mut queued = vec![false; n];
    let reached = |cur: &[u32], entries: &[(BigInt, u32, u32)], states: &[StateId]| {
        states
            .iter()
            .filter(|&&q| dfa.is_accepting(q))
            .map(|&q| cur[q as usize])
            .max_by(|&a, &b| entries[a as usize].0.cmp(&entries[b as usize].0))
    };
    loop {
        if let (Some(t), Some(e)) = (target, reached(&cur, &entries, &frontier)) {
            if entries[e as usize].0 >= *t {
                break;
            }
        }
        let mut next = cur.clone();
        let mut changed = Vec::new();
        for &q in &frontier {
            let e = cur[q as usize];
            let value = entries[e as usize].0.clone();
            let base = &k * &value;
            for (a, d) in inc.iter().enumerate() {
                let t = dfa.step(q, a as u32) as usize;
                let candidate = clamp(&base + d);
                let better = next[t] == NONE || candidate > entries[next[t] as usize].0;
                if better {
                    next[t] = entries.len() as u32;
                    entries.push((candidate, e, a as u32));
                    if !queued[t] {
                        queued[t] = true;
                        changed.push(t as StateId);
                    }
                }
            }
        }
        if changed.is_empty() {
            break;
        }
        for &t in &changed {
            queued[t as usize] = false;
        }
        cur = next;
        frontier = changed;
    }
    let all: Vec<StateId> = (0..n as StateId).filter(|&q| cur[q as usize] != NONE).collect();
    let best = reached(&cur, &entries, &all)?;
    let mut word = Vec::new();
    let mut e = best;
    while entries[e as usize].1 != NONE {
        word.push(entries[e as usize].2);
        e = entries[e as usize].1;
    }
    word.reverse();
    Some((entries[best as usize].0.clone(), word))
}

fn functional_witness(dfa: &Dfa, coeffs: &[BigInt], threshold: &BigInt) -> Option<Vec<u32>> {
    max_functional(dfa, coeffs, Some(threshold))
        .filter(|(v, _)| v >= threshold)
        .map(|(_, w)| w)
}

/// Shortest word of `L(dfa)` with `p·Q = q·P`, by breadth-first search over
/// (state, prefix difference) pairs.
fn equal_witness(
    dfa: &Dfa,
    big_p: &BigInt,
    big_q: &BigInt,
) -> Result<Option<Vec<u32>>, AutomatonError> {
    let k = BigInt::from(dfa.radix().k());
    let inc = increments(dfa, &[big_q.clone(), -big_p.clone()]);
    let upper = big_p.clone().max(BigInt::one());
    let lower = -big_q.clone();
    let limit = state_limit();
    let start = (dfa.initial(), BigInt::zero());
    let mut nodes: Vec<((StateId, BigInt), u32, u32)> = vec![(start.clone(), u32::MAX, 0)];
    let mut seen: HashMap<(StateId, BigInt), ()> = HashMap::from([(start, ())]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let ((q, s), _, _) = &nodes[i];
        if dfa.is_accepting(*q) && s.is_zero() {
            let mut word = Vec::new();
            let mut j = i;
            while nodes[j].1 != u32::MAX {
                word.push(nodes[j].2);
                j = nodes[j].1 as usize;
            }
            word.reverse();
            return Ok(Some(word));
        }
        let (q, s) = (*q, s.clone());
        for (a, d) in inc.iter().enumerate() {
            let next = &k * &s + d;
            if next >= upper || next <= lower {
                continue;
            }
            let key = (dfa.step(q, a as u32), next);
            if seen.contains_key(&key) {
                continue;
            }
            if nodes.len() >= limit {
                return Err(AutomatonError::TooManyStates(limit));
            }
            seen.insert(key.clone(), ());
            nodes.push((key, i as u32, a as u32));
            queue.push_back(nodes.len() - 1);
        }
    }
    Ok(None)
}

/// Two-track words whose second track has a nonzero digit.
pub fn nonzero_denominator(radix: Radix) -> Result<Dfa, QuotientError> {
    let sigma = radix.alphabet_size(2)?;
    let mut delta = Vec::with_capacity(2 * sigma);
    for s in 0..2u32 {
        for a in 0..sigma as u32 {
            delta.push(if s == 1 || radix.digit(a, 1, 2) != 0 { 1 } else { 0 });
        }
    }
    Ok(Dfa::from_parts(radix, 2, DigitOrder::Msd, 0, delta, vec![false, true])?.with_zero_invariant(true))
}

/// Restricts to nonzero denominators and removes leading-zero encodings.
pub fn prepare(dfa: &Dfa) -> Result<Dfa, QuotientError> {
    require_pair_msd(dfa)?;
    Ok(dfa.intersect(&nonzero_denominator(dfa.radix())?)?.canonicalize()?)
}

/// Checks the solver preconditions.
pub fn check_canonical(dfa: &Dfa) -> Result<(), QuotientError> {
    require_pair_msd(dfa)?;
    let live = dfa.live_states();
    if live[dfa.step(dfa.initial(), 0) as usize] {
        return Err(QuotientError::NotCanonical);
    }
    let zero_den = nonzero_denominator(dfa.radix())?.complement();
    if !dfa.intersect(&zero_den)?.is_empty() {
        return Err(QuotientError::ZeroDenominator);
    }
    Ok(())
}

/// The run's first repeated state splits `x = u v w` with `|uv| ≤ n`.
fn first_repeat_pump(dfa: &Dfa, word: &[u32]) -> Option<PumpDecomposition> {
    let mut first_seen: HashMap<StateId, usize> = HashMap::new();
    let mut q = dfa.initial();
    for (i, &a) in word.iter().enumerate() {
        if let Some(&j) = first_seen.get(&q) {
            return Some(PumpDecomposition::new(
                dfa.word(word[..j].to_vec()),
                dfa.word(word[j..i].to_vec()),
                q,
            ));
        }
        first_seen.insert(q, i);
        q = dfa.step(q, a);
    }
    let i = word.len();
    first_seen.get(&q).map(|&j| {
        PumpDecomposition::new(dfa.word(word[..j].to_vec()), dfa.word(word[j..i].to_vec()), q)
    })
}

/// Decides whether `sup quo(L) = ∞`: true iff some accepted word has
/// `quo ≥ k^n`, `n` the number of live states. On true, returns a pump with
/// `A₂ = 0 < A₁`.
pub fn is_sup_infinite(dfa: &Dfa) -> Result<Option<PumpDecomposition>, QuotientError> {
    check_canonical(dfa)?;
    let n = dfa.live_count();
    let threshold = Rational::new(pow_k(dfa.radix(), n), BigUint::one())?;
    let cmp = Comparator::new(dfa.radix(), threshold, Relation::Ge);
    let Some(word) = cmp.witness_in(dfa)? else {
        return Ok(None);
    };
    let pump = first_repeat_pump(dfa, word.symbols())
        .ok_or_else(|| QuotientError::Internal(format!("witness {word} is too short to pump")))?;
    if !(pump.increments[1].is_zero() && !pump.increments[0].is_zero()) {
        return Err(QuotientError::Internal(format!(
            "pump ({}, {}) of witness {word} does not have A2 = 0 < A1",
            pump.u, pump.v
        )));
    }
    Ok(Some(pump))
}

/// Where a candidate value comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateSource {
    /// An accepted word of length `< n`; the value is its quotient.
    Word(DigitWord),
    /// A pump with `|uv| ≤ n`; the value is its `γ`.
    Pump(PumpDecomposition),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub value: Rational,
    pub source: CandidateSource,
}

/// Maximum values of `f` over words of each exact length, with back
/// pointers.
struct Layers {
    value: Vec<Vec<Option<BigInt>>>,
    back: Vec<Vec<(StateId, u32)>>,
}

impl Layers {
    fn build(dfa: &Dfa, start: StateId, inc: &[BigInt], k: &BigInt, depth: usize) -> Layers {
        let n = dfa.num_states();
        let mut value = vec![vec![None; n]];
        value[0][start as usize] = Some(BigInt::zero());
        let mut back = vec![vec![(0, 0); n]];
        for m in 0..depth {
            let mut next: Vec<Option<BigInt>> = vec![None; n];
            let mut ptr = vec![(0, 0); n];
            for q in 0..n {
                let Some(v) = &value[m][q] else { continue };
                let base = k * v;
                for (a, d) in inc.iter().enumerate() {
                    let t = dfa.step(q as StateId, a as u32) as usize;
                    let cand = &base + d;
                    if next[t].as_ref().map_or(true, |cur| cand > *cur) {
                        next[t] = Some(cand);
                        ptr[t] = (q as StateId, a as u32);
                    }
                }
            }
            value.push(next);
            back.push(ptr);
        }
        Layers { value, back }
    }

    fn word(&self, mut m: usize, mut q: StateId) -> Vec<u32> {
        let mut out = Vec::with_capacity(m);
        while m > 0 {
            let (p, a) = self.back[m][q as usize];
            out.push(a);
            q = p;
            m -= 1;
        }
        out.reverse();
        out
    }
}

/// Maximum of `f(v)` over closed walks of each length `1..=depth` at `q`.
fn cycle_values(dfa: &Dfa, q: StateId, inc: &[BigInt], k: &BigInt, depth: usize) -> Vec<Option<BigInt>> {
    let n = dfa.num_states();
    let mut layer: Vec<Option<BigInt>> = vec![None; n];
    layer[q as usize] = Some(BigInt::zero());
    let mut out = vec![None];
    for _ in 0..depth {
        let mut next: Vec<Option<BigInt>> = vec![None; n];
        for s in 0..n {
            let Some(v) = &layer[s] else { continue };
            let base = k * v;
            for (a, d) in inc.iter().enumerate() {
                let t = dfa.step(s as StateId, a as u32) as usize;
                let cand = &base + d;
                if next[t].as_ref().map_or(true, |cur| cand > *cur) {
                    next[t] = Some(cand);
                }
            }
        }
        out.push(next[q as usize].clone());
        layer = next;
    }
    out
}

enum Best {
    Word(usize, StateId),
    Pump(StateId, usize, usize),
}

/// Shared state for the candidate search over one automaton.
struct Search<'a> {
    dfa: &'a Dfa,
    n: usize,
    live: Vec<bool>,
    k: BigInt,
}

impl<'a> Search<'a> {
    fn new(dfa: &'a Dfa) -> Self {
        let live = dfa.live_states();
        Search {
            dfa,
            n: live.iter().filter(|&&b| b).count(),
            live,
            k: BigInt::from(dfa.radix().k()),
        }
    }

    /// The element of the candidate family maximizing `Q·N − P·D` for
    /// `β = P/Q`, with its gain. The family is every accepted word of length
    /// `< n` (if `words`) and every pump `(u, v)` with `|uv| ≤ n`.
    fn best_for(&self, beta: &Rational, words: bool) -> Result<Option<(BigInt, Candidate)>, QuotientError> {
        let dfa = self.dfa;
        let n = self.n;
        let coeffs = [BigInt::from(beta.denom().clone()), -BigInt::from(beta.numer().clone())];
        let inc = increments(dfa, &coeffs);
        let fwd = Layers::build(dfa, dfa.initial(), &inc, &self.k, n);
        let mut best: Option<(BigInt, Best)> = None;
        let offer = |gain: BigInt, which: Best, best: &mut Option<(BigInt, Best)>| {
            if best.as_ref().map_or(true, |(g, _)| gain > *g) {
                *best = Some((gain, which));
            }
        };
        if words {
            for m in 0..n {
                for q in 0..dfa.num_states() as StateId {
                    if let (true, Some(v)) = (dfa.is_accepting(q), &fwd.value[m][q as usize]) {
                        offer(v.clone(), Best::Word(m, q), &mut best);
                    }
                }
            }
        }
        let loops: Vec<StateId> = (0..dfa.num_states() as StateId)
            .filter(|&q| self.live[q as usize])
            .collect();
        let cycles: Vec<Vec<Option<BigInt>>> = loops
            .par_iter()
            .map(|&q| cycle_values(dfa, q, &inc, &self.k, n))
            .collect();
        let scale: Vec<BigInt> = (0..=n)
            .map(|l| num_traits::pow(self.k.clone(), l) - 1)
            .collect();
        for (&q, cyc) in loops.iter().zip(&cycles) {
            for l in 1..=n {
                let Some(c) = &cyc[l] else { continue };
                for m in 0..=n - l {
                    if let Some(u) = &fwd.value[m][q as usize] {
                        offer(u * &scale[l] + c, Best::Pump(q, m, l), &mut best);
                    }
                }
            }
        }
        let Some((gain, which)) = best else {
            return Ok(None);
        };
        let candidate = match which {
            Best::Word(m, q) => {
                let word = dfa.word(fwd.word(m, q));
                let value = quo(&word).map_err(|_| QuotientError::ZeroDenominator)?;
                Candidate {
                    value,
                    source: CandidateSource::Word(word),
                }
            }
            Best::Pump(q, m, l) => {
                let u = dfa.word(fwd.word(m, q));
                let v = dfa.word(Layers::build(dfa, q, &inc, &self.k, l).word(l, q));
                let pump = PumpDecomposition::new(u, v, q);
                match pump_gamma(&pump)? {
                    ExtRational::Finite(value) => Candidate {
                        value,
                        source: CandidateSource::Pump(pump),
                    },
                    ExtRational::Infinite => {
                        return Err(QuotientError::Internal(format!(
                            "pump ({}, {}) has A2 = 0 although quo is bounded",
                            pump.u, pump.v
                        )))
                    }
                }
            }
        };
        Ok(Some((gain, candidate)))
    }

    /// Strictly increasing chain of candidates ending at the maximum of the
    /// family (a fractional-programming iteration from `start`).
    fn chain(&self, start: Candidate, words: bool) -> Result<Vec<Candidate>, QuotientError> {
        let mut chain = vec![start];
        loop {
            let beta = &chain.last().expect("nonempty").value;
            match self.best_for(beta, words)? {
                Some((gain, next)) if gain.is_positive() => {
                    if next.value <= *beta {
                        return Err(QuotientError::Internal(format!(
                            "candidate {} with positive gain does not exceed {beta}",
                            next.value
                        )));
                    }
                    chain.push(next);
                }
                _ => return Ok(chain),
            }
        }
    }
}

/// Candidates that provably contain `sup quo(L)` when it is finite: an
/// increasing chain of quotients of accepted words of length `< n` and of
/// pump limits `γ(u, v)` with `|uv| ≤ n`, whose last element is the
/// maximum over all of them.
pub fn candidate_chain(dfa: &Dfa) -> Result<Vec<Candidate>, QuotientError> {
    check_canonical(dfa)?;
    let word = dfa.shortest_accepted().ok_or(QuotientError::EmptyLanguage)?;
    let start = Candidate {
        value: quo(&word)?,
        source: CandidateSource::Word(word),
    };
    Search::new(dfa).chain(start, true)
}

/// Literal candidate sets: `s1` holds the quotient of every accepted word of
/// length `< n`, `s2` the finite `γ(u, v)` of every simple pump.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub s1: BTreeSet<Rational>,
    pub s2: BTreeMap<Rational, PumpDecomposition>,
    pub infinite_pumps: Vec<PumpDecomposition>,
}

impl CandidateSet {
    /// `s1 ∪ s2` in increasing order, without duplicates.
    pub fn values(&self) -> Vec<Rational> {
        let all: BTreeSet<Rational> = self.s1.iter().chain(self.s2.keys()).cloned().collect();
        all.into_iter().collect()
    }
}

/// Enumerates the literal candidate sets. Exponential in general; fails
/// once more than `budget` words and pumps have been visited.
pub fn candidates(dfa: &Dfa, budget: usize) -> Result<CandidateSet, QuotientError> {
    check_canonical(dfa)?;
    let n = dfa.live_count();
    let mut set = CandidateSet::default();
    let mut visited = 0usize;
    let mut tick = || {
        visited += 1;
        if visited > budget {
            Err(QuotientError::BudgetExceeded(budget))
        } else {
            Ok(())
        }
    };
    if n > 0 {
        for w in dfa.enumerate_accepted(n - 1) {
            tick()?;
            set.s1.insert(quo(&w)?);
        }
    }
    for pump in dfa.pump_decompositions() {
        tick()?;
        match pump_gamma(&pump)? {
            ExtRational::Finite(g) => {
                set.s2.entry(g).or_insert(pump);
            }
            ExtRational::Infinite => set.infinite_pumps.push(pump),
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Word(DigitWord),
    Pump(PumpDecomposition),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Word(w) => write!(f, "word {w}"),
            Witness::Pump(p) => write!(f, "pump u={} v={}", p.u, p.v),
        }
    }
}

/// `sup quo(L)`, whether it is attained, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupResult {
    pub value: ExtRational,
    pub attained: bool,
    pub witness: Witness,
}

fn above(dfa: &Dfa, beta: &Rational) -> Comparator {
    Comparator::new(dfa.radix(), beta.clone(), Relation::Gt)
}

/// Computes `sup quo(L)` for a canonical `L`.
pub fn sup_quo(dfa: &Dfa) -> Result<SupResult, QuotientError> {
    check_canonical(dfa)?;
    if dfa.is_empty() {
        return Err(QuotientError::EmptyLanguage);
    }
    if let Some(pump) = is_sup_infinite(dfa)? {
        return Ok(SupResult {
            value: ExtRational::Infinite,
            attained: false,
            witness: Witness::Pump(pump),
        });
    }
    let chain = candidate_chain(dfa)?;
    // least candidate with nothing above it
    let mut alpha = None;
    for c in &chain {
        if above(dfa, &c.value).intersection_is_empty(dfa)? {
            alpha = Some(c);
            break;
        }
    }
    let alpha = alpha.ok_or_else(|| {
        QuotientError::Internal("no candidate bounds the language from above".into())
    })?;
    if alpha.value != chain.last().expect("nonempty").value {
        return Err(QuotientError::Internal(format!(
            "candidate {} bounds the language but the chain continues",
            alpha.value
        )));
    }
    let equal = Comparator::new(dfa.radix(), alpha.value.clone(), Relation::Eq);
    let (attained, witness) = match (equal.witness_in(dfa)?, &alpha.source) {
        (Some(word), _) => (true, Witness::Word(word)),
        (None, CandidateSource::Pump(p)) => (false, Witness::Pump(p.clone())),
        (None, CandidateSource::Word(w)) => {
            return Err(QuotientError::Internal(format!(
                "accepted word {w} has the supremum as quotient but no equal word was found"
            )))
        }
    };
    Ok(SupResult {
        value: ExtRational::Finite(alpha.value.clone()),
        attained,
        witness,
    })
}

/// `sup quo(L)` by filtering the literal candidate sets in increasing order.
/// Exponential; for cross-checking on small automata.
pub fn sup_quo_exhaustive(dfa: &Dfa, budget: usize) -> Result<ExtRational, QuotientError> {
    check_canonical(dfa)?;
    if dfa.is_empty() {
        return Err(QuotientError::EmptyLanguage);
    }
    if is_sup_infinite(dfa)?.is_some() {
        return Ok(ExtRational::Infinite);
    }
    for beta in candidates(dfa, budget)?.values() {
        if above(dfa, &beta).intersection_is_empty(dfa)? {
            return Ok(ExtRational::Finite(beta));
        }
    }
    Err(QuotientError::Internal("no candidate qualifies".into()))
}

/// Largest special point of `quo(L)` with a pump realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialPoint {
    pub value: ExtRational,
    pub pump: PumpDecomposition,
}

/// A pump with `A₂ = 0 < A₁`, if any: a live cycle whose second track is
/// all zeros, reachable from the initial state through such symbols.
fn infinite_pump(dfa: &Dfa) -> Option<PumpDecomposition> {
    let live = dfa.live_states();
    let sigma = dfa.alphabet_size() as u32;
    let radix = dfa.radix();
    let flat: Vec<u32> = (0..sigma).filter(|&a| radix.digit(a, 1, 2) == 0).collect();
    let bfs = |from: StateId| {
        let mut parent: HashMap<StateId, (StateId, u32)> = HashMap::new();
        let mut order = vec![from];
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for &a in &flat {
                let t = dfa.step(q, a);
                if live[t as usize] && t != from && !parent.contains_key(&t) {
                    parent.insert(t, (q, a));
                    order.push(t);
                }
            }
            i += 1;
        }
        (order, parent)
    };
    let path = |parent: &HashMap<StateId, (StateId, u32)>, from: StateId, to: StateId| {
        let mut out = Vec::new();
        let mut q = to;
        while q != from {
            let (p, a) = parent[&q];
            out.push(a);
            q = p;
        }
        out.reverse();
        out
    };
    if !live[dfa.initial() as usize] {
        return None;
    }
    let (reach, from_init) = bfs(dfa.initial());
    for &q in &reach {
        let (around, from_q) = bfs(q);
        // last edge closing the cycle back into q
        for &p in &around {
            for &a in &flat {
                if dfa.step(p, a) == q {
                    let u = path(&from_init, dfa.initial(), q);
                    let mut v = path(&from_q, q, p);
                    v.push(a);
                    return Some(PumpDecomposition::new(dfa.word(u), dfa.word(v), q));
                }
            }
        }
    }
    None
}

/// Largest special point of `quo(L)` for a canonical infinite `L`: the
/// maximum of `γ(u, v)` over pumps with `|uv| ≤ n`, or `∞` when a pump has
/// `A₂ = 0`.
pub fn largest_special_point(dfa: &Dfa) -> Result<SpecialPoint, QuotientError> {
    check_canonical(dfa)?;
    if !dfa.is_infinite() {
        return Err(QuotientError::FiniteLanguage);
    }
    if let Some(pump) = infinite_pump(dfa) {
        if pump.increments[0].is_zero() {
            return Err(QuotientError::Internal("flat pump with A1 = 0".into()));
        }
        return Ok(SpecialPoint {
            value: ExtRational::Infinite,
            pump,
        });
    }
    let first = dfa
        .pump_decompositions()
        .next()
        .ok_or_else(|| QuotientError::Internal("infinite language without a pump".into()))?;
    let start = match pump_gamma(&first)? {
        ExtRational::Finite(value) => Candidate {
            value,
            source: CandidateSource::Pump(first),
        },
        ExtRational::Infinite => {
            return Err(QuotientError::Internal("missed a flat pump".into()))
        }
    };
    let chain = Search::new(dfa).chain(start, false)?;
    let last = chain.into_iter().last().expect("nonempty");
    match last.source {
        CandidateSource::Pump(pump) => Ok(SpecialPoint {
            value: ExtRational::Finite(last.value),
            pump,
        }),
        CandidateSource::Word(_) => Err(QuotientError::Internal("word in a pump-only chain".into())),
    }
}

/// Largest special point over the literal simple pumps. Exponential; for
/// cross-checking.
pub fn largest_special_point_exhaustive(dfa: &Dfa, budget: usize) -> Result<ExtRational, QuotientError> {
    check_canonical(dfa)?;
    if !dfa.is_infinite() {
        return Err(QuotientError::FiniteLanguage);
    }
    let set = candidates(dfa, budget)?;
    if !set.infinite_pumps.is_empty() {
        return Ok(ExtRational::Infinite);
    }
    set.s2
        .keys()
        .last()
        .cloned()
        .map(ExtRational::Finite)
        .ok_or_else(|| QuotientError::Internal("infinite language without a pump".into()))
}

/// Outcome of one closure condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Pass,
    Fail(DigitWord),
    NotChecked,
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Pass => f.write_str("pass"),
            Check::Fail(w) => write!(f, "fail (counterexample {w})"),
            Check::NotChecked => f.write_str("not-checked"),
        }
    }
}

/// Structural conditions under which every special point other than 1 is an
/// accumulation point of `quo(L)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairClosureReport {
    /// No accepted word starts with `[0,0]`.
    pub no_leading_zeros: Check,
    /// `quo(L)` is infinite; no decision procedure is implemented.
    pub infinitely_many_quotients: Check,
    /// No accepted pair has `p < q`.
    pub no_quotient_below_one: Check,
    /// `(p, q) ∈ L` with `p > q` implies `(p − 1, q) ∈ L`.
    pub closed_under_decrement: Check,
}

fn to_check(w: Option<DigitWord>) -> Check {
    w.map_or(Check::Pass, Check::Fail)
}

pub fn check_pair_closure(dfa: &Dfa) -> Result<PairClosureReport, QuotientError> {
    require_pair_msd(dfa)?;
    let radix = dfa.radix();
    let leading = {
        let zero_first = Dfa::from_transitions(
            radix,
            2,
            DigitOrder::Msd,
            2,
            0,
            &(0..radix.alphabet_size(2)? as u32)
                .map(|a| (1, a, 1))
                .chain([(0, 0, 1)])
                .collect::<Vec<_>>(),
            &[1],
        )?;
        dfa.intersect(&zero_first)?.shortest_accepted()
    };
    let below_one = Comparator::new(radix, Rational::one(), Relation::Lt);
    let small = dfa.intersect(&below_one.dfa()?)?.shortest_accepted();

    let member = Arc::new(dfa.zero_padded()?);
    let rel = |a: Term, b: Term| Formula::Relation {
        name: "L".into(),
        dfa: member.clone(),
        args: vec![a, b],
    };
    let formula = Formula::and(
        Formula::and(rel(Term::var("p"), Term::var("q")), logic::parse("q < p")?),
        Formula::not(Formula::exists(
            "r",
            Formula::and(logic::parse("r + 1 = p")?, rel(Term::var("r"), Term::var("q"))),
        )),
    );
    let env = CompilationEnv::new(radix, None, &["p", "q"]);
    let bad = logic::compile(&formula, &env)?.canonicalize()?.shortest_accepted();
    Ok(PairClosureReport {
        no_leading_zeros: to_check(leading),
        infinitely_many_quotients: Check::NotChecked,
        no_quotient_below_one: to_check(small),
        closed_under_decrement: to_check(bad),
    })
}
