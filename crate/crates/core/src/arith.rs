//! Primitive relations on base-k numerals, built as msd-first automata.
//!
//! All results are minimal, accept every zero-padding of a member tuple, and
//! carry the zero-invariance hint.

use num_bigint::BigUint;

use crate::automaton::{explore, AutomatonError, Dfa, Dfao, StateId};
use crate::numeral::{digits_msd, DigitOrder, Radix};

fn build<K, F, A>(
    radix: Radix,
    tracks: usize,
    init: K,
    step: F,
    accept: A,
) -> Result<Dfa, AutomatonError>
where
    K: std::hash::Hash + Eq + Clone,
    F: FnMut(&K, u32) -> K,
    A: Fn(&K) -> bool,
{
    let sigma = radix.alphabet_size(tracks)?;
    let (delta, keys) = explore(init, sigma, step)?;
    let accepting = keys.iter().map(accept).collect();
    Ok(Dfa::from_parts(radix, tracks, DigitOrder::Msd, 0, delta, accepting)?
        .minimize()?
        .with_zero_invariant(true))
}

/// `{(x, y) : x = y}`.
pub fn eq_rel(radix: Radix) -> Result<Dfa, AutomatonError> {
    // None is the dead state
    build(
        radix,
        2,
        Some(()),
        |s, a| {
            let d = radix.unpack(a, 2);
            s.filter(|_| d[0] == d[1])
        },
        |s| s.is_some(),
    )
}

/// `{(x, y) : x < y}`.
pub fn lt_rel(radix: Radix) -> Result<Dfa, AutomatonError> {
    // ordering of the prefixes read so far
    build(
        radix,
        2,
        std::cmp::Ordering::Equal,
        |&s, a| {
            let d = radix.unpack(a, 2);
            s.then(d[0].cmp(&d[1]))
        },
        |&s| s == std::cmp::Ordering::Less,
    )
}

/// `{(x, y, z) : x + y = z}`. Built least-significant digit first, where
/// the carry flows with the input, then reversed.
pub fn add_rel(radix: Radix) -> Result<Dfa, AutomatonError> {
    let k = radix.k() as i64;
    let sigma = radix.alphabet_size(3)?;
    // state: incoming carry in {0, 1}; -1 is dead
    let (delta, keys) = explore(0i64, sigma, move |&c, a| {
        if c < 0 {
            return -1;
        }
        let d = radix.unpack(a, 3);
        let sum = d[0] as i64 + d[1] as i64 + c - d[2] as i64;
        if sum == 0 || sum == k {
            sum / k
        } else {
            -1
        }
    })?;
    let accepting = keys.iter().map(|&c| c == 0).collect();
    Ok(Dfa::from_parts(radix, 3, DigitOrder::Lsd, 0, delta, accepting)?
        .reverse()?
        .with_zero_invariant(true))
}

/// `{x : x = value}`.
pub fn const_eq(radix: Radix, value: &BigUint) -> Result<Dfa, AutomatonError> {
    let digits = digits_msd(value, radix);
    // position in the digit string once the leading zeros are skipped;
    // usize::MAX is dead
    let len = digits.len();
    build(
        radix,
        1,
        0usize,
        move |&i, a| {
            if i == usize::MAX {
                usize::MAX
            } else if i == 0 && a == 0 {
                0
            } else if i < len && digits[i] == a {
                i + 1
            } else {
                usize::MAX
            }
        },
        move |&i| i == len,
    )
}

fn require_sequence(dfao: &Dfao) -> Result<(), AutomatonError> {
    if dfao.tracks() != 1 || dfao.order() != DigitOrder::Msd {
        return Err(AutomatonError::Incompatible(
            "sequence automata must be single-track and msd-first".into(),
        ));
    }
    if !dfao.is_zero_invariant() {
        return Err(AutomatonError::Invalid(
            "sequence automaton output depends on leading zeros".into(),
        ));
    }
    Ok(())
}

/// `{(i, j) : T[i] = T[j]}` for the sequence `T` of `dfao`.
pub fn seq_eq(dfao: &Dfao) -> Result<Dfa, AutomatonError> {
    require_sequence(dfao)?;
    let radix = dfao.radix();
    let init: (StateId, StateId) = (dfao.initial(), dfao.initial());
    build(
        radix,
        2,
        init,
        |&(p, q), a| {
            let d = radix.unpack(a, 2);
            (dfao.step(p, d[0]), dfao.step(q, d[1]))
        },
        |&(p, q)| dfao.output_of_state(p) == dfao.output_of_state(q),
    )
}

/// `{i : T[i] = value}`.
pub fn seq_const(dfao: &Dfao, value: u32) -> Result<Dfa, AutomatonError> {
    require_sequence(dfao)?;
    if !dfao.output_alphabet().contains(&value) {
        return Err(AutomatonError::Invalid(format!(
            "{value} is not an output of the sequence automaton"
        )));
    }
    build(
        dfao.radix(),
        1,
        dfao.initial(),
        |&p, a| dfao.step(p, a),
        |&p| dfao.output_of_state(p) == value,
    )
}
