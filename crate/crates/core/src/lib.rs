//! Exact critical exponents and related quantities of automatic sequences.

pub mod arith;
pub mod automaton;
pub mod exponents;
pub mod fixtures;
pub mod format;
pub mod logic;
pub mod numeral;
pub mod oracle;
pub mod quotient;
