//! Brute-force measurements on finite prefixes, used as independent ground
//! truth for the automata pipelines. Everything here is deliberately naive.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::automaton::{AutomatonError, Dfa, Dfao};
use crate::numeral::{quo, Rational};

/// The first `len` terms of a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixSample {
    pub symbols: Vec<u32>,
    /// Hash of the msd-first automaton the terms came from.
    pub source: u64,
}

impl PrefixSample {
    pub fn from_symbols(symbols: Vec<u32>) -> Self {
        PrefixSample { symbols, source: 0 }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Terms `0..len`, using that the msd-first state of `n` is the state of
/// `⌊n/k⌋` followed by the digit `n mod k`.
pub fn sequence_prefix(a: &Dfao, len: usize) -> Result<PrefixSample, AutomatonError> {
    let a = a.to_msd()?;
    let k = a.radix().k() as usize;
    let mut states = Vec::with_capacity(len);
    for n in 0..len {
        let s = if n == 0 {
            a.initial()
        } else {
            a.step(states[n / k], (n % k) as u32)
        };
        states.push(s);
    }
    let mut h = DefaultHasher::new();
    (a.radix().k(), a.initial(), a.transitions(), a.outputs()).hash(&mut h);
    Ok(PrefixSample {
        symbols: states.iter().map(|&s| a.output_of_state(s)).collect(),
        source: h.finish(),
    })
}

/// A factor `s[position..position+length]` with period `period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Repetition {
    pub position: usize,
    pub length: usize,
    pub period: usize,
}

impl Repetition {
    pub fn exponent(&self) -> Rational {
        Rational::from_u64(self.length as u64, self.period as u64).expect("period ≥ 1")
    }
}

/// Largest `|w|/p` over factors `w` with a period `p ≤ max_period`. Ties go
/// to the smaller position, then the smaller period.
pub fn scan_max_exponent(s: &PrefixSample, max_period: usize) -> Option<Repetition> {
    let x = &s.symbols;
    let mut best: Option<Repetition> = None;
    let mut offer = |r: Repetition| {
        let better = match &best {
            None => true,
            Some(b) => match (r.length * b.period).cmp(&(b.length * r.period)) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => (r.position, r.period) < (b.position, b.period),
            },
        };
        if better {
            best = Some(r);
        }
    };
    for p in 1..=max_period.min(x.len()) {
        // maximal runs of i with x[i] = x[i+p]; a run [i, i+r) gives a factor
        // of length r + p at i
        let mut i = 0;
        while i + p <= x.len() {
            let mut r = 0;
            while i + r + p < x.len() && x[i + r] == x[i + r + p] {
                r += 1;
            }
            offer(Repetition {
                position: i,
                length: r + p,
                period: p,
            });
            i += r + 1;
        }
    }
    best
}

/// Largest exponent of a prefix: for each `p`, the longest prefix with
/// period `p` has length `p + lce(0, p)`.
pub fn scan_ice(s: &PrefixSample) -> Option<Repetition> {
    let x = &s.symbols;
    let mut best: Option<Repetition> = None;
    for p in 1..=x.len() {
        let mut r = 0;
        while p + r < x.len() && x[r] == x[p + r] {
            r += 1;
        }
        let cand = Repetition {
            position: 0,
            length: p + r,
            period: p,
        };
        if best.map_or(true, |b| cand.length * b.period > b.length * cand.period) {
            best = Some(cand);
        }
    }
    best
}

/// Two consecutive occurrences of a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub position: usize,
    pub length: usize,
    pub gap: usize,
}

impl Gap {
    pub fn ratio(&self) -> Rational {
        Rational::from_u64(self.gap as u64, self.length as u64).expect("length ≥ 1")
    }
}

/// Largest `gap/ℓ` over factors of length `ℓ ≤ max_len` and consecutive
/// occurrences inside the sample. Only gaps whose both ends lie in the
/// sample are counted, so the value never exceeds the true constant.
pub fn scan_recurrence(s: &PrefixSample, max_len: usize) -> Option<Gap> {
    let x = &s.symbols;
    let mut best: Option<Gap> = None;
    for l in 1..=max_len.min(x.len()) {
        let mut last: HashMap<&[u32], usize> = HashMap::new();
        for i in 0..=x.len() - l {
            if let Some(prev) = last.insert(&x[i..i + l], i) {
                let cand = Gap {
                    position: prev,
                    length: l,
                    gap: i - prev,
                };
                if best.map_or(true, |b| cand.gap * b.length > b.gap * cand.length) {
                    best = Some(cand);
                }
            }
        }
    }
    best
}

/// `(length, quo)` of every accepted word of length `≤ max_len` with a
/// nonzero second track, by length and then value.
pub fn brute_quo_profile(l: &Dfa, max_len: usize) -> Vec<(usize, Rational)> {
    let mut out: Vec<(usize, Rational)> = l
        .enumerate_accepted(max_len)
        .filter_map(|w| quo(&w).ok().map(|r| (w.len(), r)))
        .collect();
    out.sort();
    out
}
