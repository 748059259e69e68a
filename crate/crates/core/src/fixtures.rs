//! Small automatic sequences used by tests, examples and the command line.

use crate::automaton::Dfao;
use crate::numeral::{DigitOrder, Radix};

fn binary() -> Radix {
    Radix::new(2).expect("2 is a valid base")
}

fn msd(delta: Vec<u32>, output: Vec<u32>) -> Dfao {
    Dfao::from_parts(binary(), 1, DigitOrder::Msd, 0, delta, output).expect("well-formed fixture")
}

/// Thue–Morse: parity of the number of 1s in the binary expansion.
pub fn thue_morse() -> Dfao {
    msd(vec![0, 1, 1, 0], vec![0, 1])
}

/// Rudin–Shapiro: parity of the number of `11` blocks. State `2·parity +
/// last bit`.
pub fn rudin_shapiro() -> Dfao {
    let mut delta = vec![0; 8];
    for parity in 0..2u32 {
        for last in 0..2u32 {
            for d in 0..2u32 {
                let flip = last & d;
                delta[((2 * parity + last) * 2 + d) as usize] = 2 * (parity ^ flip) + d;
            }
        }
    }
    msd(delta, vec![0, 0, 1, 1])
}

/// Ternary Thue word `t[n+1] − t[n] + 1`. Built least significant digit
/// first, where the state holds the parities of `n` and `n + 1` read so far
/// and the carry of the increment, then converted to msd-first.
pub fn vtm() -> Dfao {
    // state = 4·carry + 2·parity(n+1) + parity(n); initial carry 1
    let state = |c: u32, p1: u32, p0: u32| 4 * c + 2 * p1 + p0;
    let mut delta = vec![0; 16];
    let mut output = vec![0; 8];
    for c in 0..2u32 {
        for p1 in 0..2u32 {
            for p0 in 0..2u32 {
                let s = state(c, p1, p0);
                for d in 0..2u32 {
                    let e = d + c;
                    delta[(s * 2 + d) as usize] = state(e / 2, p1 ^ (e % 2), p0 ^ d);
                }
                // a pending carry is one more leading 1 of n + 1
                let t_next = p1 ^ c;
                output[s as usize] = t_next + 1 - p0;
            }
        }
    }
    let lsd = Dfao::from_parts(binary(), 1, DigitOrder::Lsd, state(1, 0, 0), delta, output)
        .expect("well-formed fixture");
    lsd.to_msd().expect("reversal of a valid automaton")
}

/// The all-zero sequence.
pub fn zero() -> Dfao {
    msd(vec![0, 0], vec![0])
}

/// `1 0 0 0 …`, the characteristic sequence of `{0}`.
pub fn one_then_zeros() -> Dfao {
    msd(vec![0, 1, 1, 1], vec![1, 0])
}

/// `0 1 0 1 …`.
pub fn periodic01() -> Dfao {
    msd(vec![0, 1, 0, 1], vec![0, 1])
}

/// Every fixture with its name.
pub fn all() -> Vec<(&'static str, Dfao)> {
    vec![
        ("thue-morse", thue_morse()),
        ("rudin-shapiro", rudin_shapiro()),
        ("vtm", vtm()),
        ("zero", zero()),
        ("one-then-zeros", one_then_zeros()),
        ("periodic01", periodic01()),
    ]
}
