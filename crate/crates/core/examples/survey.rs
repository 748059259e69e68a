//! Prints every repetition measure of the bundled fixture sequences.

use std::time::Instant;

use critex_core::exponents::{self, Measure, RecurrenceVerdict};
use critex_core::fixtures;

fn main() {
    for (name, seq) in fixtures::all() {
        for which in [Measure::Critical, Measure::C1, Measure::C2, Measure::Ice1, Measure::Ice2, Measure::Dio] {
            let start = Instant::now();
            let shown = match exponents::measure(&seq, which) {
                Ok(r) => match r.attained {
                    Some(a) => format!("{} attained={a} states={}", r.value, r.language.num_states()),
                    None => format!("{} states={}", r.value, r.language.num_states()),
                },
                Err(e) => format!("error: {e}"),
            };
            println!("{name:>15} {which:>10} {shown} ({:.2?})", start.elapsed());
        }
        let verdict = match exponents::linear_recurrence(&seq) {
            Ok(RecurrenceVerdict::NotRecurrent) => "not recurrent".to_string(),
            Ok(RecurrenceVerdict::Recurrent(r)) => format!("C = {}", r.value),
            Err(e) => format!("error: {e}"),
        };
        println!("{name:>15} {:>10} {verdict}", "recurrence");
    }
}
