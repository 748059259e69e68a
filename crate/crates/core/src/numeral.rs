//! Base-k digit words, canonical encodings of naturals and tuples, and the
//! quotient map `quo_k` on two-track words.
//!
//! A symbol over `d` tracks is a tuple `(x_1, ..., x_d)` of base-k digits. It
//! is packed into a single `u32` with track 0 as the most significant base-k
//! digit, so that symbol indices enumerate tuples in lexicographic order.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

/// Largest alphabet (`k^d`) any automaton in this crate is allowed to use.
pub const MAX_ALPHABET: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumeralError {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u32),
    #[error("digit {digit} out of range for base {base}")]
    InvalidDigit { digit: u32, base: u32 },
    #[error("expected a {expected}-track word, got {found} tracks")]
    TrackCount { expected: usize, found: usize },
    #[error("tracks have different lengths")]
    RaggedTracks,
    #[error("alphabet of size {0} exceeds the supported maximum")]
    AlphabetTooLarge(u128),
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("digit order mismatch: expected {expected}, found {found}")]
    OrderMismatch {
        expected: DigitOrder,
        found: DigitOrder,
    },
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}

/// The numeration base `k` together with its digit alphabet `{0, ..., k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Radix(u32);

impl Radix {
    pub fn new(k: u32) -> Result<Self, NumeralError> {
        if k < 2 {
            return Err(NumeralError::InvalidBase(k));
        }
        Ok(Radix(k))
    }

    pub fn k(self) -> u32 {
        self.0
    }

    /// Number of symbols over `tracks` tracks, `k^tracks`.
    pub fn alphabet_size(self, tracks: usize) -> Result<usize, NumeralError> {
        let mut size: u128 = 1;
        for _ in 0..tracks {
            size *= self.0 as u128;
            if size > MAX_ALPHABET as u128 {
                return Err(NumeralError::AlphabetTooLarge(size));
            }
        }
        Ok(size as usize)
    }

    /// Packs a digit tuple into a symbol index.
    pub fn pack(self, digits: &[u32]) -> u32 {
        digits.iter().fold(0, |acc, &d| acc * self.0 + d)
    }

    /// Unpacks a symbol index into its `tracks` digits.
    pub fn unpack(self, symbol: u32, tracks: usize) -> Vec<u32> {
        let mut out = vec![0; tracks];
        let mut s = symbol;
        for slot in out.iter_mut().rev() {
            *slot = s % self.0;
            s /= self.0;
        }
        out
    }

    /// Digit of `symbol` on `track`, for a symbol over `tracks` tracks.
    pub fn digit(self, symbol: u32, track: usize, tracks: usize) -> u32 {
        let shift = (tracks - 1 - track) as u32;
        (symbol / self.0.pow(shift)) % self.0
    }

    pub fn check_digit(self, digit: u32) -> Result<(), NumeralError> {
        if digit >= self.0 {
            Err(NumeralError::InvalidDigit {
                digit,
                base: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// Which end of a digit word carries the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DigitOrder {
    Msd,
    Lsd,
}

impl DigitOrder {
    pub fn flipped(self) -> Self {
        match self {
            DigitOrder::Msd => DigitOrder::Lsd,
            DigitOrder::Lsd => DigitOrder::Msd,
        }
    }
}

impl fmt::Display for DigitOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DigitOrder::Msd => "msd",
            DigitOrder::Lsd => "lsd",
        })
    }
}

/// A finite word over `Σ_k^d` with an explicit digit-order marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitWord {
    radix: Radix,
    tracks: usize,
    order: DigitOrder,
    symbols: Vec<u32>,
}

impl DigitWord {
    pub fn empty(radix: Radix, tracks: usize, order: DigitOrder) -> Self {
        DigitWord {
            radix,
            tracks,
            order,
            symbols: Vec::new(),
        }
    }

    /// Builds a word from packed symbol indices.
    pub fn from_symbols(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
        symbols: Vec<u32>,
    ) -> Result<Self, NumeralError> {
        let size = radix.alphabet_size(tracks)? as u32;
        if let Some(&bad) = symbols.iter().find(|&&s| s >= size) {
            return Err(NumeralError::InvalidDigit {
                digit: bad,
                base: radix.k(),
            });
        }
        Ok(DigitWord {
            radix,
            tracks,
            order,
            symbols,
        })
    }

    /// Builds a word from a sequence of digit tuples.
    pub fn from_tuples(
        radix: Radix,
        order: DigitOrder,
        tuples: &[Vec<u32>],
    ) -> Result<Self, NumeralError> {
        let tracks = tuples.first().map_or(1, Vec::len);
        let mut symbols = Vec::with_capacity(tuples.len());
        for t in tuples {
            if t.len() != tracks {
                return Err(NumeralError::RaggedTracks);
            }
            for &d in t {
                radix.check_digit(d)?;
            }
            symbols.push(radix.pack(t));
        }
        Self::from_symbols(radix, tracks, order, symbols)
    }

    /// Builds a single-track word from its digits.
    pub fn from_digits(
        radix: Radix,
        order: DigitOrder,
        digits: &[u32],
    ) -> Result<Self, NumeralError> {
        for &d in digits {
            radix.check_digit(d)?;
        }
        Self::from_symbols(radix, 1, order, digits.to_vec())
    }

    /// Zips equal-length tracks into one word.
    pub fn from_tracks(
        radix: Radix,
        order: DigitOrder,
        tracks: &[Vec<u32>],
    ) -> Result<Self, NumeralError> {
        let len = tracks.first().map_or(0, Vec::len);
        if tracks.iter().any(|t| t.len() != len) {
            return Err(NumeralError::RaggedTracks);
        }
        let tuples: Vec<Vec<u32>> = (0..len)
            .map(|i| tracks.iter().map(|t| t[i]).collect())
            .collect();
        if tuples.is_empty() {
            return Ok(DigitWord::empty(radix, tracks.len().max(1), order));
        }
        Self::from_tuples(radix, order, &tuples)
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn tracks(&self) -> usize {
        self.tracks
    }

    pub fn order(&self) -> DigitOrder {
        self.order
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The digits of one track, in the word's own order.
    pub fn track(&self, track: usize) -> Vec<u32> {
        self.symbols
            .iter()
            .map(|&s| self.radix.digit(s, track, self.tracks))
            .collect()
    }

    /// Numeric value of one track, read in the word's declared order.
    pub fn value(&self, track: usize) -> BigUint {
        let k = BigUint::from(self.radix.k());
        let digits = self.track(track);
        let fold = |acc: BigUint, d: &u32| acc * &k + BigUint::from(*d);
        match self.order {
            DigitOrder::Msd => digits.iter().fold(BigUint::zero(), fold),
            DigitOrder::Lsd => digits.iter().rev().fold(BigUint::zero(), fold),
        }
    }

    /// Reverses the symbol sequence and flips the order marker, so the
    /// represented values are unchanged.
    pub fn reversed(&self) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.reverse();
        DigitWord {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order.flipped(),
            symbols,
        }
    }

    pub fn concat(&self, other: &DigitWord) -> DigitWord {
        debug_assert_eq!(self.tracks, other.tracks);
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        DigitWord {
            symbols,
            ..self.clone()
        }
    }

    pub fn repeat(&self, times: usize) -> DigitWord {
        DigitWord {
            symbols: self.symbols.repeat(times),
            ..self.clone()
        }
    }

    pub fn require_order(&self, order: DigitOrder) -> Result<(), NumeralError> {
        if self.order != order {
            return Err(NumeralError::OrderMismatch {
                expected: order,
                found: self.order,
            });
        }
        Ok(())
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return f.write_str("ε");
        }
        if self.tracks == 1 {
            for &s in &self.symbols {
                if self.radix.k() <= 10 {
                    write!(f, "{s}")?;
                } else {
                    write!(f, "[{s}]")?;
                }
            }
            return Ok(());
        }
        for &s in &self.symbols {
            let digits = self.radix.unpack(s, self.tracks);
            let parts: Vec<String> = digits.iter().map(u32::to_string).collect();
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

/// Base-k digits of `n`, most significant first, without leading zeros.
pub fn digits_msd(n: &BigUint, radix: Radix) -> Vec<u32> {
    if n.is_zero() {
        return Vec::new();
    }
    let mut digits: Vec<u32> = n
        .to_radix_le(radix.k())
        .into_iter()
        .map(u32::from)
        .collect();
    while digits.last() == Some(&0) {
        digits.pop();
    }
    digits.reverse();
    digits
}

/// Canonical MSD-first encoding `(n)_k`. Zero encodes as the empty word.
pub fn encode(n: &BigUint, radix: Radix) -> DigitWord {
    DigitWord {
        radix,
        tracks: 1,
        order: DigitOrder::Msd,
        symbols: digits_msd(n, radix),
    }
}

/// Value of a single-track word in its declared order.
pub fn decode(word: &DigitWord) -> Result<BigUint, NumeralError> {
    if word.tracks != 1 {
        return Err(NumeralError::TrackCount {
            expected: 1,
            found: word.tracks,
        });
    }
    Ok(word.value(0))
}

/// Decodes raw digits, validating each against the base.
pub fn decode_digits(
    digits: &[u32],
    order: DigitOrder,
    radix: Radix,
) -> Result<BigUint, NumeralError> {
    decode(&DigitWord::from_digits(radix, order, digits)?)
}

/// Canonical MSD encoding of a tuple: shorter values padded with leading
/// zeros, and no leading all-zero symbol.
pub fn encode_tuple(values: &[BigUint], radix: Radix) -> DigitWord {
    let per_track: Vec<Vec<u32>> = values.iter().map(|v| digits_msd(v, radix)).collect();
    let len = per_track.iter().map(Vec::len).max().unwrap_or(0);
    let padded: Vec<Vec<u32>> = per_track
        .into_iter()
        .map(|d| {
            let mut p = vec![0; len - d.len()];
            p.extend(d);
            p
        })
        .collect();
    let symbols = (0..len)
        .map(|i| {
            let tuple: Vec<u32> = padded.iter().map(|t| t[i]).collect();
            radix.pack(&tuple)
        })
        .collect();
    DigitWord {
        radix,
        tracks: values.len(),
        order: DigitOrder::Msd,
        symbols,
    }
}

/// Canonical encoding `(m, n)_k` of a pair.
pub fn encode_pair(m: &BigUint, n: &BigUint, radix: Radix) -> DigitWord {
    encode_tuple(&[m.clone(), n.clone()], radix)
}

/// `quo_k(w) = [π₁(w)]_k / [π₂(w)]_k`, reduced.
pub fn quo(word: &DigitWord) -> Result<Rational, NumeralError> {
    if word.tracks != 2 {
        return Err(NumeralError::TrackCount {
            expected: 2,
            found: word.tracks,
        });
    }
    Rational::new(word.value(0), word.value(1))
}

/// Non-negative exact rational, always in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(Ratio<BigUint>);

impl Rational {
    pub fn new(numer: BigUint, denom: BigUint) -> Result<Self, NumeralError> {
        if denom.is_zero() {
            return Err(NumeralError::ZeroDenominator);
        }
        Ok(Rational(Ratio::new(numer, denom)))
    }

    pub fn from_u64(numer: u64, denom: u64) -> Result<Self, NumeralError> {
        Self::new(BigUint::from(numer), BigUint::from(denom))
    }

    pub fn integer(n: u64) -> Self {
        Rational(Ratio::from_integer(BigUint::from(n)))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    /// The mediant `(a+b)/(c+d)` of `a/c` and `b/d` (computed from the
    /// reduced representations).
    pub fn mediant(&self, other: &Rational) -> Rational {
        Rational(Ratio::new(
            self.numer() + other.numer(),
            self.denom() + other.denom(),
        ))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl std::str::FromStr for Rational {
    type Err = NumeralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumeralError::ParseRational(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigUint = n.parse().map_err(|_| bad())?;
        let d: BigUint = d.parse().map_err(|_| bad())?;
        Rational::new(n, d).map_err(|_| bad())
    }
}

/// A rational or the distinguished value `Infinite`, ordered with
/// `Infinite` above every finite value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinite)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }

    /// `a/b` for naturals with `b > 0`, or `Infinite` when `b = 0 < a`.
    pub fn ratio(numer: BigUint, denom: BigUint) -> Option<Self> {
        if denom.is_zero() {
            if numer.is_zero() {
                None
            } else {
                Some(ExtRational::Infinite)
            }
        } else {
            Some(ExtRational::Finite(Rational(Ratio::new(numer, denom))))
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Infinite, ExtRational::Infinite) => Ordering::Equal,
            (ExtRational::Infinite, _) => Ordering::Greater,
            (_, ExtRational::Infinite) => Ordering::Less,
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => r.fmt(f),
            ExtRational::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for ExtRational {
    type Err = NumeralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(ExtRational::Infinite)
        } else {
            s.parse().map(ExtRational::Finite)
        }
    }
}

/// `k^e` as a big integer.
pub fn pow_k(radix: Radix, e: usize) -> BigUint {
    num_traits::pow(BigUint::from(radix.k()), e)
}
