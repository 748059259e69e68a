//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion that all passed. Time limits are pinned per criterion.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use critex_core::automaton::{Dfa, Dfao};
use critex_core::exponents::{self, RecurrenceVerdict};
use critex_core::fixtures;
use critex_core::numeral::{encode_pair, DigitOrder, DigitWord, ExtRational, Radix, Rational};
use critex_core::oracle;
use critex_core::quotient::{
    candidates, gamma, is_sup_infinite, largest_special_point, prepare, sup_quo, Comparator, Relation,
    Witness,
};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    elapsed: Duration,
    result: Result<String, String>,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.result.is_ok() && self.limit.map_or(true, |l| self.elapsed <= l)
    }
}

fn run(
    id: usize,
    name: &'static str,
    limit: Option<u64>,
    body: impl FnOnce() -> Result<String, String>,
) -> Outcome {
    let start = Instant::now();
    let result = body();
    Outcome {
        id,
        name,
        limit: limit.map(Duration::from_secs),
        elapsed: start.elapsed(),
        result,
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fin(p: u64, q: u64) -> ExtRational {
    ExtRational::Finite(Rational::from_u64(p, q).unwrap())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn critical(a: &Dfao, value: ExtRational, attained: bool) -> Result<String, String> {
    let r = exponents::critical_exponent(a).map_err(err)?;
    check(r.value == value && r.attained == Some(attained), || {
        format!("got {} attained={:?}", r.value, r.attained)
    })?;
    Ok(format!("value={} attained={attained}", r.value))
}

fn criterion_thue_morse() -> Result<String, String> {
    critical(&fixtures::thue_morse(), fin(2, 1), true)
}

fn criterion_zero() -> Result<String, String> {
    let r = exponents::critical_exponent(&fixtures::zero()).map_err(err)?;
    check(r.value == ExtRational::Infinite, || format!("got {}", r.value))?;
    Ok("value=inf".into())
}

fn criterion_rudin_shapiro() -> Result<String, String> {
    let tool = critical(&fixtures::rudin_shapiro(), fin(4, 1), true)?;
    let sample = oracle::sequence_prefix(&fixtures::rudin_shapiro(), 1 << 14).map_err(err)?;
    let scan = oracle::scan_max_exponent(&sample, 64).ok_or("empty sample")?;
    check(scan.exponent() == Rational::from_u64(4, 1).unwrap(), || {
        format!("oracle exponent {}", scan.exponent())
    })?;
    let block = &sample.symbols[scan.position..scan.position + scan.length];
    check(scan.position == 7 && block == [0, 0, 0, 0], || {
        format!("oracle witness {scan:?}")
    })?;
    Ok(format!("{tool}; oracle 4/1 with 0000 at 7"))
}

fn criterion_vtm() -> Result<String, String> {
    let a = fixtures::vtm();
    let sample = oracle::sequence_prefix(&a, 1 << 14).map_err(err)?;
    let scan = oracle::scan_max_exponent(&sample, sample.len() / 2).ok_or("empty sample")?;
    check(scan.exponent() < Rational::from_u64(2, 1).unwrap(), || {
        format!("fixture has a square: {scan:?}")
    })?;
    let tool = critical(&a, fin(2, 1), false)?;
    let c2 = exponents::special_exponent(&a).map_err(err)?;
    check(c2.value == fin(2, 1), || format!("c2 = {}", c2.value))?;
    Ok(format!("squarefree prefix 2^14; {tool}; c2=2/1"))
}

fn random_language(rng: &mut ChaCha8Rng, radix: Radix) -> Dfa {
    loop {
        let n = rng.gen_range(1..=4usize);
        let delta = (0..n * 4).map(|_| rng.gen_range(0..n as u32)).collect();
        let accepting = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let raw = Dfa::from_parts(radix, 2, DigitOrder::Msd, 0, delta, accepting).unwrap();
        let l = prepare(&raw).unwrap();
        if !l.is_empty() {
            return l;
        }
    }
}

/// Exact maximum of `quo` over accepted words of length `≤ depth`. Per
/// state, a prefix with values `(a, b)` dominates `(a', b')` when `a ≥ a'`
/// and `b ≤ b'`, since every common completion keeps that order; only the
/// undominated prefixes are extended.
fn brute_max(l: &Dfa, depth: usize) -> Option<(u64, u64)> {
    let better = |x: (u64, u64), y: (u64, u64)| (x.0 as u128) * (y.1 as u128) > (y.0 as u128) * (x.1 as u128);
    let n = l.num_states();
    let mut layer: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
    layer[l.initial() as usize].push((0, 0));
    let mut best: Option<(u64, u64)> = None;
    for m in 0..=depth {
        for (q, pairs) in layer.iter().enumerate() {
            if !l.is_accepting(q as u32) {
                continue;
            }
            for &(a, b) in pairs.iter().filter(|p| p.1 > 0) {
                if best.map_or(true, |x| better((a, b), x)) {
                    best = Some((a, b));
                }
            }
        }
        if m == depth {
            break;
        }
        let mut next: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
        for (q, pairs) in layer.iter().enumerate() {
            for s in 0..4u32 {
                let d = l.radix().unpack(s, 2);
                let t = l.step(q as u32, s) as usize;
                next[t].extend(pairs.iter().map(|&(a, b)| (2 * a + d[0] as u64, 2 * b + d[1] as u64)));
            }
        }
        for pairs in &mut next {
            // by b ascending, then a descending; keep strictly rising a
            pairs.sort_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)));
            let mut kept: Vec<(u64, u64)> = Vec::new();
            for &p in pairs.iter() {
                if kept.last().map_or(true, |k| p.0 > k.0) {
                    kept.push(p);
                }
            }
            *pairs = kept;
        }
        layer = next;
    }
    best
}

fn infinite_above(l: &Dfa, beta: &Rational) -> Result<bool, String> {
    // the msd-first route avoids a subset construction for large denominators
    let cmp = Comparator::new(l.radix(), beta.clone(), Relation::Gt).dfa_msd().map_err(err)?;
    Ok(l.intersect(&cmp).map_err(err)?.is_infinite())
}

fn cross_validate(l: &Dfa) -> Result<(), String> {
    let radix = l.radix();
    let sup = sup_quo(l).map_err(err)?;
    let cands = candidates(l, 1 << 22).map_err(err)?;
    let above = |beta: &Rational| {
        Comparator::new(radix, beta.clone(), Relation::Gt)
            .intersection_is_empty(l)
            .map_err(err)
    };
    // (a)
    match &sup.value {
        ExtRational::Finite(alpha) => {
            check(above(alpha)?, || format!("L above {alpha} is nonempty"))?;
            for beta in cands.values().iter().filter(|b| *b < alpha) {
                check(!above(beta)?, || format!("smaller candidate {beta} qualifies"))?;
            }
        }
        ExtRational::Infinite => {
            check(is_sup_infinite(l).map_err(err)?.is_some(), || "no unbounded pump".into())?;
            for beta in cands.values() {
                check(!above(&beta)?, || format!("candidate {beta} bounds an unbounded language"))?;
            }
        }
    }
    // (b)
    if let Some((a, b)) = brute_max(l, 12) {
        let brute = fin(a, b);
        check(brute <= sup.value, || format!("brute {brute} exceeds {}", sup.value))?;
        if let (true, Witness::Word(w)) = (sup.attained, &sup.witness) {
            if w.len() <= 12 {
                check(brute == sup.value, || format!("brute {brute} below attained {}", sup.value))?;
            }
        }
    }
    // (c)
    if l.is_infinite() {
        let sigma = largest_special_point(l).map_err(err)?.value;
        match sigma {
            ExtRational::Finite(s) => {
                for d in [1u64, 2, 4, 8] {
                    let eps = Rational::from_u64(1, d).unwrap();
                    let ok = if s > eps {
                        let beta = Rational::new(
                            s.numer() * eps.denom() - eps.numer() * s.denom(),
                            s.denom() * eps.denom(),
                        )
                        .map_err(err)?;
                        infinite_above(l, &beta)?
                    } else {
                        // every quotient exceeds a negative threshold
                        l.is_infinite()
                    };
                    check(ok, || format!("few words above {s} - 1/{d}"))?;
                }
            }
            ExtRational::Infinite => {
                for m in [1u64, 10, 100, 1000] {
                    let ok = infinite_above(l, &Rational::from_u64(m, 1).unwrap())?;
                    check(ok, || format!("special point inf but few words above {m}"))?;
                }
            }
        }
    }
    Ok(())
}

fn criterion_cross_validation() -> Result<String, String> {
    let radix = Radix::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let languages: Vec<Dfa> = (0..100).map(|_| random_language(&mut rng, radix)).collect();
    let failures: Vec<String> = languages
        .par_iter()
        .enumerate()
        .filter_map(|(i, l)| cross_validate(l).err().map(|e| format!("#{i}: {e}")))
        .collect();
    check(failures.is_empty(), || failures.join("; "))?;
    let infinite = languages.iter().filter(|l| l.is_infinite()).count();
    Ok(format!("100 languages ({infinite} infinite), 0 failures"))
}

fn random_ratio(rng: &mut ChaCha8Rng) -> (u64, u64) {
    (rng.gen_range(0..1000), rng.gen_range(1..1000))
}

fn mediant_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..10_000 {
        let (a, c) = random_ratio(rng);
        let (b, d) = random_ratio(rng);
        let (x, y) = (Rational::from_u64(a, c).unwrap(), Rational::from_u64(b, d).unwrap());
        if x == y {
            continue;
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let m = Rational::from_u64(a + b, c + d).unwrap();
        check(lo < m && m < hi, || format!("mediant of {a}/{c}, {b}/{d}"))?;
        check(lo.mediant(&hi) > lo && lo.mediant(&hi) < hi, || format!("mediant() of {lo}, {hi}"))?;
    }
    Ok(())
}

fn random_word(rng: &mut ChaCha8Rng, radix: Radix, min: usize, max: usize) -> DigitWord {
    let len = rng.gen_range(min..=max);
    let symbols = (0..len).map(|_| rng.gen_range(0..4)).collect();
    DigitWord::from_symbols(radix, 2, DigitOrder::Msd, symbols).unwrap()
}

fn ext_quo(x: &DigitWord) -> Option<ExtRational> {
    ExtRational::ratio(x.value(0), x.value(1))
}

fn trichotomy_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let radix = Radix::new(2).unwrap();
    let mut done = 0;
    while done < 10_000 {
        let u = random_word(rng, radix, 0, 3);
        let v = random_word(rng, radix, 1, 3);
        let w = random_word(rng, radix, 0, 3);
        let pumped: Vec<DigitWord> = (0..=10).map(|i| u.concat(&v.repeat(i)).concat(&w)).collect();
        // quo(uw) must be defined for the chain to start
        let Some(q) = pumped.iter().map(ext_quo).collect::<Option<Vec<_>>>() else {
            continue;
        };
        done += 1;
        let uv = u.concat(&v);
        let limit = match (uv.value(0).bits(), uv.value(1).bits()) {
            (0, 0) => ext_quo(&w).ok_or("quo(w) undefined")?,
            (_, 0) => ExtRational::Infinite,
            _ => gamma(&u, &v).map_err(err)?,
        };
        let case = q[0].cmp(&limit);
        for i in 0..=10 {
            check(q[i].cmp(&limit) == case, || format!("sign change at i={i} for u={u} v={v} w={w}"))?;
            if i > 0 {
                let step = q[i - 1].cmp(&q[i]);
                let want = case;
                check(step == want, || format!("not monotone at i={i} for u={u} v={v} w={w}"))?;
            }
        }
        // convergence: B₁A₂ − A₁B₂ is invariant under pumping, so the
        // distance to a finite limit is that constant over A₂ times a
        // denominator that grows like k^{i|v|}
        if let ExtRational::Finite(_) = limit {
            let a1 = uv.value(0) - u.value(0);
            let a2 = uv.value(1) - u.value(1);
            if a2.bits() > 0 {
                let cross = |x: &DigitWord| {
                    let l = x.value(0) * &a2;
                    let r = &a1 * x.value(1);
                    if l >= r {
                        (true, l - r)
                    } else {
                        (false, r - l)
                    }
                };
                let first = cross(&pumped[0]);
                for x in &pumped {
                    check(cross(x) == first, || format!("cross term varies for u={u} v={v} w={w}"))?;
                }
                let den = pumped[10].value(1);
                check(den >= BigUint::from(1u32) << (9 * v.len()), || {
                    format!("denominator does not grow for u={u} v={v} w={w}")
                })?;
            }
        } else if let ExtRational::Infinite = limit {
            if uv.value(0).bits() > 0 {
                for i in 1..=10 {
                    check(pumped[i].value(0) > pumped[i - 1].value(0), || {
                        format!("numerator does not grow for u={u} v={v} w={w}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn comparator_suite(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let radix = Radix::new(2).unwrap();
    let mut cache: HashMap<(u64, u64, Relation), Dfa> = HashMap::new();
    for _ in 0..10_000 {
        let (pp, qq) = (rng.gen_range(0..24u64), rng.gen_range(1..24u64));
        let (p, q) = (rng.gen_range(0..4096u64), rng.gen_range(0..4096u64));
        let pad = rng.gen_range(0..3);
        let word = DigitWord::from_symbols(radix, 2, DigitOrder::Msd, vec![0; pad])
            .unwrap()
            .concat(&encode_pair(&BigUint::from(p), &BigUint::from(q), radix));
        let lhs = p as u128 * qq as u128;
        let rhs = q as u128 * pp as u128;
        for rel in Relation::ALL {
            let dfa = cache.entry((pp, qq, rel)).or_insert_with(|| {
                Comparator::new(radix, Rational::from_u64(pp, qq).unwrap(), rel)
                    .dfa()
                    .unwrap()
            });
            let want = match rel {
                Relation::Lt => lhs < rhs,
                Relation::Le => lhs <= rhs,
                Relation::Eq => lhs == rhs,
                Relation::Ge => lhs >= rhs,
                Relation::Gt => lhs > rhs,
                Relation::Ne => lhs != rhs,
            };
            check(dfa.accepts(&word).unwrap() == want, || {
                format!("({p},{q}) {rel} {pp}/{qq} with {pad} leading zeros")
            })?;
        }
    }
    Ok(())
}

fn criterion_property_suites() -> Result<String, String> {
    mediant_suite(&mut ChaCha8Rng::seed_from_u64(61)).map_err(|e| format!("mediant: {e}"))?;
    trichotomy_suite(&mut ChaCha8Rng::seed_from_u64(62)).map_err(|e| format!("trichotomy: {e}"))?;
    comparator_suite(&mut ChaCha8Rng::seed_from_u64(63)).map_err(|e| format!("comparator: {e}"))?;
    Ok("mediant, trichotomy/convergence, comparators: 10^4 cases each".into())
}

fn criterion_ordering_chain() -> Result<String, String> {
    let one = fin(1, 1);
    let mut shown = Vec::new();
    for (name, a) in fixtures::all() {
        let c = exponents::critical_exponent(&a).map_err(err)?.value;
        let c2 = exponents::special_exponent(&a).map_err(err)?.value;
        let (i1, i2) = exponents::initial_critical_exponents(&a).map_err(err)?;
        let (i1, i2) = (i1.value, i2.value);
        check(one <= c2 && c2 <= c, || format!("{name}: 1 <= c2={c2} <= c={c}"))?;
        check(i2 <= i1 && i1 <= c, || format!("{name}: ice2={i2} <= ice1={i1} <= c={c}"))?;
        shown.push(format!("{name} c={c} c2={c2} ice1={i1} ice2={i2}"));
    }
    Ok(shown.join(", "))
}

fn criterion_linear_recurrence() -> Result<String, String> {
    match exponents::linear_recurrence(&fixtures::zero()).map_err(err)? {
        RecurrenceVerdict::Recurrent(r) if r.value == fin(1, 1) => {}
        other => return Err(format!("zero: {other:?}")),
    }
    if !matches!(
        exponents::linear_recurrence(&fixtures::one_then_zeros()).map_err(err)?,
        RecurrenceVerdict::NotRecurrent
    ) {
        return Err("one-then-zeros reported recurrent".into());
    }
    let tm = match exponents::linear_recurrence(&fixtures::thue_morse()).map_err(err)? {
        RecurrenceVerdict::Recurrent(r) => r.value,
        RecurrenceVerdict::NotRecurrent => return Err("thue-morse reported not recurrent".into()),
    };
    let ExtRational::Finite(c) = &tm else {
        return Err("thue-morse constant is infinite".into());
    };
    let sample = oracle::sequence_prefix(&fixtures::thue_morse(), 1 << 16).map_err(err)?;
    let bound = oracle::scan_recurrence(&sample, 8).ok_or("empty sample")?.ratio();
    check(bound <= *c, || format!("oracle {bound} exceeds {c}"))?;
    Ok(format!("zero C=1/1, one-then-zeros not recurrent, thue-morse C={c} >= oracle {bound}"))
}

#[test]
fn acceptance() {
    let outcomes = vec![
        run(1, "thue-morse critical exponent", Some(120), criterion_thue_morse),
        run(2, "constant-zero critical exponent", Some(5), criterion_zero),
        run(3, "rudin-shapiro critical exponent", Some(300), criterion_rudin_shapiro),
        run(4, "ternary thue word", Some(300), criterion_vtm),
        run(5, "solver cross-validation", Some(60), criterion_cross_validation),
        run(6, "property suites", Some(60), criterion_property_suites),
        run(7, "ordering chain on fixtures", None, criterion_ordering_chain),
        run(8, "linear recurrence", Some(300), criterion_linear_recurrence),
    ];
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        let limit = o.limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
        let detail = match &o.result {
            Ok(s) => s.clone(),
            Err(e) => format!("error: {e}"),
        };
        println!(
            "criterion {} {verdict} [{}] ({:.2?}, limit {limit}): {detail}",
            o.id, o.name, o.elapsed
        );
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
