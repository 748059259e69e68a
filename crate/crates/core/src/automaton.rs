//! Finite automata over tuple-digit alphabets.
//!
//! Every [`Dfa`] is complete: missing transitions are routed to an explicit
//! dead state when the machine is built, so complement is a flip of the
//! accepting set. Minimization renumbers states in breadth-first discovery
//! order (symbols ascending), which makes minimal machines for equal
//! languages identical.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::numeral::{pow_k, DigitOrder, DigitWord, NumeralError, Radix};

pub type StateId = u32;

const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error(transparent)]
    Numeral(#[from] NumeralError),
    #[error("incompatible automata: {0}")]
    Incompatible(String),
    #[error("track index {index} out of range for a {tracks}-track automaton")]
    TrackOutOfRange { index: usize, tracks: usize },
    #[error("intermediate automaton exceeds {0} states (raise CRITEX_MAX_STATES)")]
    TooManyStates(usize),
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

/// Upper bound on the size of any automaton built during a computation.
/// Read once from `CRITEX_MAX_STATES`.
pub fn state_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("CRITEX_MAX_STATES")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_STATES)
    })
}

/// Breadth-first construction of a deterministic machine whose states are
/// identified by hashable keys. Returns the transition table and the keys,
/// indexed by state id; the initial key gets id 0.
pub(crate) fn explore<K, F>(
    init: K,
    sigma: usize,
    mut step: F,
) -> Result<(Vec<StateId>, Vec<K>), AutomatonError>
where
    K: Hash + Eq + Clone,
    F: FnMut(&K, u32) -> K,
{
    let limit = state_limit();
    let mut ids: HashMap<K, StateId> = HashMap::new();
    let mut keys = vec![init.clone()];
    ids.insert(init, 0);
    let mut delta: Vec<StateId> = Vec::new();
    let mut next = 0usize;
    while next < keys.len() {
        let key = keys[next].clone();
        for a in 0..sigma as u32 {
            let target = step(&key, a);
            let id = match ids.get(&target) {
                Some(&id) => id,
                None => {
                    let id = keys.len() as StateId;
                    if keys.len() >= limit {
                        return Err(AutomatonError::TooManyStates(limit));
                    }
                    ids.insert(target.clone(), id);
                    keys.push(target);
                    id
                }
            };
            delta.push(id);
        }
        next += 1;
    }
    Ok((delta, keys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    And,
    Or,
}

/// Deterministic complete automaton over `Σ_k^d`.
#[derive(Debug, Clone)]
pub struct Dfa {
    radix: Radix,
    tracks: usize,
    order: DigitOrder,
    initial: StateId,
    delta: Vec<StateId>,
    accepting: Vec<bool>,
    zero_invariant: bool,
}

/// Structural equality; the zero-invariance hint is not compared.
impl PartialEq for Dfa {
    fn eq(&self, other: &Self) -> bool {
        self.radix == other.radix
            && self.tracks == other.tracks
            && self.order == other.order
            && self.initial == other.initial
            && self.delta == other.delta
            && self.accepting == other.accepting
    }
}

impl Eq for Dfa {}

impl Dfa {
    /// Builds a complete machine from a full transition table
    /// (`delta[s * k^d + a]`).
    pub fn from_parts(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
        initial: StateId,
        delta: Vec<StateId>,
        accepting: Vec<bool>,
    ) -> Result<Self, AutomatonError> {
        let sigma = radix.alphabet_size(tracks)?;
        let n = accepting.len();
        if n == 0 {
            return Err(AutomatonError::Invalid("no states".into()));
        }
        if delta.len() != n * sigma {
            return Err(AutomatonError::Invalid(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                n * sigma
            )));
        }
        if initial as usize >= n || delta.iter().any(|&t| t as usize >= n) {
            return Err(AutomatonError::Invalid("state index out of range".into()));
        }
        Ok(Dfa {
            radix,
            tracks,
            order,
            initial,
            delta,
            accepting,
            zero_invariant: false,
        })
    }

    /// Builds a machine from a partial transition list; missing entries go
    /// to an added dead state.
    pub fn from_transitions(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
        num_states: usize,
        initial: StateId,
        transitions: &[(StateId, u32, StateId)],
        accepting: &[StateId],
    ) -> Result<Self, AutomatonError> {
        let sigma = radix.alphabet_size(tracks)?;
        let dead = num_states as StateId;
        let mut delta = vec![dead; (num_states + 1) * sigma];
        for &(from, sym, to) in transitions {
            if from as usize >= num_states || to as usize >= num_states {
                return Err(AutomatonError::Invalid(format!(
                    "transition {from} -> {to} references a missing state"
                )));
            }
            if sym as usize >= sigma {
                return Err(AutomatonError::Invalid(format!("symbol {sym} out of range")));
            }
            delta[from as usize * sigma + sym as usize] = to;
        }
        let mut acc = vec![false; num_states + 1];
        for &q in accepting {
            if q as usize >= num_states {
                return Err(AutomatonError::Invalid(format!(
                    "accepting state {q} out of range"
                )));
            }
            acc[q as usize] = true;
        }
        Dfa::from_parts(radix, tracks, order, initial, delta, acc)
    }

    /// The language of all words over `Σ_k^d`.
    pub fn accept_all(radix: Radix, tracks: usize, order: DigitOrder) -> Result<Self, AutomatonError> {
        let sigma = radix.alphabet_size(tracks)?;
        let mut dfa = Dfa::from_parts(radix, tracks, order, 0, vec![0; sigma], vec![true])?;
        dfa.zero_invariant = true;
        Ok(dfa)
    }

    /// The empty language.
    pub fn empty_language(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
    ) -> Result<Self, AutomatonError> {
        let mut dfa = Dfa::accept_all(radix, tracks, order)?;
        dfa.accepting[0] = false;
        Ok(dfa)
    }

    /// Accepts exactly the given words (all over the same alphabet).
    pub fn from_words(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
        words: &[Vec<u32>],
    ) -> Result<Self, AutomatonError> {
        // trie
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        let mut children: HashMap<(StateId, u32), StateId> = HashMap::new();
        let mut count: StateId = 1;
        for w in words {
            let mut q = 0;
            for &a in w {
                q = *children.entry((q, a)).or_insert_with(|| {
                    let id = count;
                    count += 1;
                    transitions.push((q, a, id));
                    id
                });
            }
            accepting.push(q);
        }
        Dfa::from_transitions(
            radix,
            tracks,
            order,
            count as usize,
            0,
            &transitions,
            &accepting,
        )?
        .minimize()
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

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.delta.len() / self.accepting.len()
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting[state as usize]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn zero_invariant(&self) -> bool {
        self.zero_invariant
    }

    /// Declares that the language is invariant under zero padding on the
    /// most-significant side (the caller vouches for it).
    pub fn with_zero_invariant(mut self, flag: bool) -> Self {
        self.zero_invariant = flag;
        self
    }

    #[inline]
    pub fn step(&self, state: StateId, symbol: u32) -> StateId {
        self.delta[state as usize * self.alphabet_size() + symbol as usize]
    }

    pub fn run(&self, symbols: &[u32]) -> StateId {
        symbols.iter().fold(self.initial, |q, &a| self.step(q, a))
    }

    pub fn accepts_symbols(&self, symbols: &[u32]) -> bool {
        self.is_accepting(self.run(symbols))
    }

    pub fn accepts(&self, word: &DigitWord) -> Result<bool, AutomatonError> {
        self.check_word(word)?;
        Ok(self.accepts_symbols(word.symbols()))
    }

    fn check_word(&self, word: &DigitWord) -> Result<(), AutomatonError> {
        if word.radix() != self.radix || word.tracks() != self.tracks {
            return Err(AutomatonError::Incompatible(format!(
                "word over {} tracks base {} given to a {}-track base-{} automaton",
                word.tracks(),
                word.radix().k(),
                self.tracks,
                self.radix.k()
            )));
        }
        word.require_order(self.order)?;
        Ok(())
    }

    /// The symbol whose digits are all zero.
    pub fn zero_symbol(&self) -> u32 {
        0
    }

    pub(crate) fn word(&self, symbols: Vec<u32>) -> DigitWord {
        DigitWord::from_symbols(self.radix, self.tracks, self.order, symbols)
            .expect("symbols come from this automaton's alphabet")
    }

    fn check_compatible(&self, other: &Dfa) -> Result<(), AutomatonError> {
        if self.radix != other.radix || self.tracks != other.tracks || self.order != other.order {
            return Err(AutomatonError::Incompatible(format!(
                "(base {}, {} tracks, {}) vs (base {}, {} tracks, {})",
                self.radix.k(),
                self.tracks,
                self.order,
                other.radix.k(),
                other.tracks,
                other.order
            )));
        }
        Ok(())
    }

    /// Intersection or union, minimized.
    pub fn product(&self, other: &Dfa, mode: ProductMode) -> Result<Dfa, AutomatonError> {
        self.check_compatible(other)?;
        let sigma = self.alphabet_size();
        let (delta, keys) = explore((self.initial, other.initial), sigma, |&(p, q), a| {
            (self.step(p, a), other.step(q, a))
        })?;
        let accepting = keys
            .iter()
            .map(|&(p, q)| match mode {
                ProductMode::And => self.is_accepting(p) && other.is_accepting(q),
                ProductMode::Or => self.is_accepting(p) || other.is_accepting(q),
            })
            .collect();
        let dfa = Dfa {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order,
            initial: 0,
            delta,
            accepting,
            zero_invariant: self.zero_invariant && other.zero_invariant,
        };
        dfa.minimize()
    }

    pub fn intersect(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.product(other, ProductMode::And)
    }

    pub fn union(&self, other: &Dfa) -> Result<Dfa, AutomatonError> {
        self.product(other, ProductMode::Or)
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            accepting: self.accepting.iter().map(|&b| !b).collect(),
            ..self.clone()
        }
    }

    /// Erases one track. The result accepts `{x with track removed : x ∈ L}`.
    pub fn project(&self, drop_track: usize) -> Result<Nfa, AutomatonError> {
        if self.tracks < 2 || drop_track >= self.tracks {
            return Err(AutomatonError::TrackOutOfRange {
                index: drop_track,
                tracks: self.tracks,
            });
        }
        let tracks = self.tracks - 1;
        let small_sigma = self.radix.alphabet_size(tracks)?;
        let sigma = self.alphabet_size();
        let n = self.num_states();
        let mut delta = vec![Vec::new(); n * small_sigma];
        for a in 0..sigma as u32 {
            let mut digits = self.radix.unpack(a, self.tracks);
            digits.remove(drop_track);
            let b = self.radix.pack(&digits) as usize;
            for s in 0..n {
                let t = self.delta[s * sigma + a as usize];
                let slot = &mut delta[s * small_sigma + b];
                if !slot.contains(&t) {
                    slot.push(t);
                }
            }
        }
        Ok(Nfa {
            radix: self.radix,
            tracks,
            order: self.order,
            initial: vec![self.initial],
            delta,
            accepting: self.accepting.clone(),
        })
    }

    /// Accepts the reversals of the words of `self`; the order marker flips,
    /// so the represented tuples are unchanged.
    pub fn reverse(&self) -> Result<Dfa, AutomatonError> {
        let sigma = self.alphabet_size();
        let n = self.num_states();
        let mut delta = vec![Vec::new(); n * sigma];
        for s in 0..n {
            for a in 0..sigma {
                let t = self.delta[s * sigma + a] as usize;
                delta[t * sigma + a].push(s as StateId);
            }
        }
        let initial = (0..n as StateId).filter(|&s| self.is_accepting(s)).collect();
        let mut accepting = vec![false; n];
        accepting[self.initial as usize] = true;
        let nfa = Nfa {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order.flipped(),
            initial,
            delta,
            accepting,
        };
        Ok(nfa.determinize()?.minimize()?.with_zero_invariant(self.zero_invariant))
    }

    /// Minimal complete equivalent machine with canonical state numbering.
    pub fn minimize(&self) -> Result<Dfa, AutomatonError> {
        let sigma = self.alphabet_size();
        let reachable = self.reachable_order();
        let mut index = vec![u32::MAX; self.num_states()];
        for (i, &s) in reachable.iter().enumerate() {
            index[s as usize] = i as u32;
        }
        let n = reachable.len();
        let mut delta = Vec::with_capacity(n * sigma);
        for &s in &reachable {
            for a in 0..sigma {
                delta.push(index[self.delta[s as usize * sigma + a] as usize]);
            }
        }
        let class: Vec<u32> = reachable
            .iter()
            .map(|&s| u32::from(self.is_accepting(s)))
            .collect();
        let block = hopcroft(n, sigma, &delta, &class);
        let (delta, reps) = quotient(n, sigma, &delta, &block, 0);
        let accepting = reps.iter().map(|&r| class[r as usize] == 1).collect();
        Ok(Dfa {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order,
            initial: 0,
            delta,
            accepting,
            zero_invariant: self.zero_invariant,
        })
    }

    /// Reachable states in breadth-first discovery order (symbols ascending).
    fn reachable_order(&self) -> Vec<StateId> {
        let sigma = self.alphabet_size();
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial as usize] = true;
        let mut i = 0;
        while i < order.len() {
            let s = order[i] as usize;
            for a in 0..sigma {
                let t = self.delta[s * sigma + a];
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// States that are reachable from the initial state and can reach an
    /// accepting state.
    pub fn live_states(&self) -> Vec<bool> {
        let sigma = self.alphabet_size();
        let n = self.num_states();
        let mut reach = vec![false; n];
        for s in self.reachable_order() {
            reach[s as usize] = true;
        }
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in 0..n {
            for a in 0..sigma {
                rev[self.delta[s * sigma + a] as usize].push(s as StateId);
            }
        }
        let mut coreach = self.accepting.clone();
        let mut stack: Vec<StateId> = (0..n as StateId).filter(|&s| coreach[s as usize]).collect();
        while let Some(t) = stack.pop() {
            for &s in &rev[t as usize] {
                if !coreach[s as usize] {
                    coreach[s as usize] = true;
                    stack.push(s);
                }
            }
        }
        (0..n).map(|s| reach[s] && coreach[s]).collect()
    }

    /// Number of live states; the `n` of the pumping arguments.
    pub fn live_count(&self) -> usize {
        self.live_states().into_iter().filter(|&b| b).count()
    }

    /// Shortest accepted word (lexicographically least among the shortest),
    /// or `None` when the language is empty.
    pub fn shortest_accepted(&self) -> Option<DigitWord> {
        let sigma = self.alphabet_size();
        let n = self.num_states();
        let mut parent: Vec<Option<(StateId, u32)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial as usize] = true;
        while let Some(s) = queue.pop_front() {
            if self.is_accepting(s) {
                let mut symbols = Vec::new();
                let mut cur = s;
                while let Some((p, a)) = parent[cur as usize] {
                    symbols.push(a);
                    cur = p;
                }
                symbols.reverse();
                return Some(self.word(symbols));
            }
            for a in 0..sigma as u32 {
                let t = self.step(s, a);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((s, a));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_accepted().is_none()
    }

    /// True iff the language is infinite: some cycle lies among the live
    /// states.
    pub fn is_infinite(&self) -> bool {
        let live = self.live_states();
        let sigma = self.alphabet_size();
        let n = self.num_states();
        // iterative three-colour DFS restricted to live states
        let mut colour = vec![0u8; n];
        for root in 0..n {
            if !live[root] || colour[root] != 0 {
                continue;
            }
            let mut stack = vec![(root as StateId, 0u32)];
            colour[root] = 1;
            while let Some(&mut (s, ref mut cursor)) = stack.last_mut() {
                if *cursor as usize == sigma {
                    colour[s as usize] = 2;
                    stack.pop();
                    continue;
                }
                let t = self.step(s, *cursor);
                *cursor += 1;
                if !live[t as usize] {
                    continue;
                }
                match colour[t as usize] {
                    0 => {
                        colour[t as usize] = 1;
                        stack.push((t, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            }
        }
        false
    }

    /// Removes every word that starts with the all-zero symbol.
    pub fn canonicalize(&self) -> Result<Dfa, AutomatonError> {
        if self.order != DigitOrder::Msd {
            return Err(AutomatonError::Incompatible(
                "canonicalize needs an msd-first automaton".into(),
            ));
        }
        let sigma = self.alphabet_size();
        let n = self.num_states();
        let fresh = n as StateId;
        let dead = fresh + 1;
        let mut delta = self.delta.clone();
        for a in 0..sigma {
            delta.push(if a == 0 {
                dead
            } else {
                self.delta[self.initial as usize * sigma + a]
            });
        }
        delta.extend(std::iter::repeat(dead).take(sigma));
        let mut accepting = self.accepting.clone();
        accepting.push(self.is_accepting(self.initial));
        accepting.push(false);
        let dfa = Dfa {
            initial: fresh,
            delta,
            accepting,
            zero_invariant: false,
            ..self.clone()
        };
        dfa.minimize()
    }

    /// Inverse of [`Dfa::canonicalize`]: accepts `0^i w` for every `w` in the
    /// canonical part of the language. The result is zero-invariant.
    pub fn zero_padded(&self) -> Result<Dfa, AutomatonError> {
        let canon = self.canonicalize()?;
        let sigma = canon.alphabet_size();
        let n = canon.num_states();
        let fresh = n as StateId;
        let mut delta = canon.delta.clone();
        for a in 0..sigma {
            delta.push(if a == 0 {
                fresh
            } else {
                canon.delta[canon.initial as usize * sigma + a]
            });
        }
        let mut accepting = canon.accepting.clone();
        accepting.push(canon.is_accepting(canon.initial));
        let dfa = Dfa {
            initial: fresh,
            delta,
            accepting,
            zero_invariant: true,
            ..canon
        };
        dfa.minimize()
    }

    /// Exact check that the language is unchanged by one leading zero
    /// symbol (msd) or trailing zero symbol (lsd).
    pub fn check_zero_invariance(&self) -> Result<bool, AutomatonError> {
        match self.order {
            DigitOrder::Msd => {
                let after_zero = self.step(self.initial, 0);
                Ok(self.equivalent_states(self.initial, after_zero))
            }
            DigitOrder::Lsd => self.reverse()?.check_zero_invariance(),
        }
    }

    /// Whether two states accept the same language.
    pub fn equivalent_states(&self, p: StateId, q: StateId) -> bool {
        let sigma = self.alphabet_size();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![(p, q)];
        seen.insert((p, q));
        while let Some((a, b)) = stack.pop() {
            if self.is_accepting(a) != self.is_accepting(b) {
                return false;
            }
            for s in 0..sigma as u32 {
                let next = (self.step(a, s), self.step(b, s));
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        true
    }

    /// Whether two machines accept the same language.
    pub fn equivalent(&self, other: &Dfa) -> Result<bool, AutomatonError> {
        self.check_compatible(other)?;
        let sigma = self.alphabet_size();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![(self.initial, other.initial)];
        seen.insert((self.initial, other.initial));
        while let Some((a, b)) = stack.pop() {
            if self.is_accepting(a) != other.is_accepting(b) {
                return Ok(false);
            }
            for s in 0..sigma as u32 {
                let next = (self.step(a, s), other.step(b, s));
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        Ok(true)
    }

    /// Every accepted word of length at most `max_len`, each once, ordered by
    /// length and then lexicographically by symbol index.
    pub fn enumerate_accepted(&self, max_len: usize) -> AcceptedWords<'_> {
        AcceptedWords::new(self, max_len)
    }

    /// Pump decompositions `(u, v)` where `u` labels a simple path from the
    /// initial state to a live loop state and `v` labels a simple cycle at
    /// that state avoiding the states of `u`. Guarantees `|uv| <= n` for
    /// `n` the number of live states.
    pub fn pump_decompositions(&self) -> PumpDecompositions<'_> {
        PumpDecompositions::new(self)
    }

    /// Transition table, `delta[s * k^d + a]`.
    pub fn transitions(&self) -> &[StateId] {
        &self.delta
    }
}

/// Nondeterministic automaton with a set of initial states.
#[derive(Debug, Clone)]
pub struct Nfa {
    radix: Radix,
    tracks: usize,
    order: DigitOrder,
    initial: Vec<StateId>,
    delta: Vec<Vec<StateId>>,
    accepting: Vec<bool>,
}

impl Nfa {
    pub fn new(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
        initial: Vec<StateId>,
        delta: Vec<Vec<StateId>>,
        accepting: Vec<bool>,
    ) -> Result<Self, AutomatonError> {
        let sigma = radix.alphabet_size(tracks)?;
        let n = accepting.len();
        if delta.len() != n * sigma {
            return Err(AutomatonError::Invalid("transition table size mismatch".into()));
        }
        let bad = |s: &StateId| *s as usize >= n;
        if initial.iter().any(bad) || delta.iter().flatten().any(bad) {
            return Err(AutomatonError::Invalid("state index out of range".into()));
        }
        Ok(Nfa {
            radix,
            tracks,
            order,
            initial,
            delta,
            accepting,
        })
    }

    pub fn tracks(&self) -> usize {
        self.tracks
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    fn sigma(&self) -> usize {
        self.delta.len() / self.accepting.len().max(1)
    }

    /// Replaces the initial set by every state reachable from it through
    /// all-zero symbols.
    pub fn close_initial_under_zero(&mut self) {
        let sigma = self.sigma();
        let mut seen = vec![false; self.num_states()];
        let mut stack = self.initial.clone();
        for &s in &stack {
            seen[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for &t in &self.delta[s as usize * sigma] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        self.initial = (0..self.num_states() as StateId)
            .filter(|&s| seen[s as usize])
            .collect();
    }

    pub fn accepts_symbols(&self, symbols: &[u32]) -> bool {
        let sigma = self.sigma();
        let mut current = self.initial.clone();
        for &a in symbols {
            let mut next: Vec<StateId> = current
                .iter()
                .flat_map(|&s| self.delta[s as usize * sigma + a as usize].iter().copied())
                .collect();
            next.sort_unstable();
            next.dedup();
            current = next;
        }
        current.iter().any(|&s| self.accepting[s as usize])
    }

    /// Subset construction. The result is complete (the empty subset is the
    /// dead state) but not minimized.
    pub fn determinize(&self) -> Result<Dfa, AutomatonError> {
        let sigma = self.sigma();
        let n = self.num_states();
        let mut init = self.initial.clone();
        init.sort_unstable();
        init.dedup();
        let mut mark = vec![false; n];
        let (delta, keys) = explore(init, sigma, |set: &Vec<StateId>, a| {
            let mut out = Vec::new();
            for &s in set {
                for &t in &self.delta[s as usize * sigma + a as usize] {
                    if !mark[t as usize] {
                        mark[t as usize] = true;
                        out.push(t);
                    }
                }
            }
            for &t in &out {
                mark[t as usize] = false;
            }
            out.sort_unstable();
            out
        })?;
        let accepting = keys
            .iter()
            .map(|set| set.iter().any(|&s| self.accepting[s as usize]))
            .collect();
        Ok(Dfa {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order,
            initial: 0,
            delta,
            accepting,
            zero_invariant: false,
        })
    }
}

/// Hopcroft partition refinement on a complete machine whose states are all
/// reachable. `class` gives the initial partition; returns a block id per
/// state.
fn hopcroft(n: usize, sigma: usize, delta: &[StateId], class: &[u32]) -> Vec<u32> {
    // inverse transitions in CSR form, grouped by (symbol, target)
    let mut offsets = vec![0usize; sigma * n + 1];
    for s in 0..n {
        for a in 0..sigma {
            offsets[a * n + delta[s * sigma + a] as usize + 1] += 1;
        }
    }
    for i in 1..offsets.len() {
        offsets[i] += offsets[i - 1];
    }
    let mut fill = offsets.clone();
    let mut sources = vec![0 as StateId; n * sigma];
    for s in 0..n {
        for a in 0..sigma {
            let key = a * n + delta[s * sigma + a] as usize;
            sources[fill[key]] = s as StateId;
            fill[key] += 1;
        }
    }

    let mut elems: Vec<StateId> = (0..n as StateId).collect();
    elems.sort_by_key(|&s| class[s as usize]);
    let mut loc = vec![0usize; n];
    for (i, &s) in elems.iter().enumerate() {
        loc[s as usize] = i;
    }
    let mut block_of = vec![0u32; n];
    let mut start: Vec<usize> = Vec::new();
    let mut end: Vec<usize> = Vec::new();
    for (i, &s) in elems.iter().enumerate() {
        if i == 0 || class[s as usize] != class[elems[i - 1] as usize] {
            start.push(i);
            end.push(i);
        }
        let b = start.len() - 1;
        block_of[s as usize] = b as u32;
        end[b] = i + 1;
    }

    let mut in_work = vec![false; start.len()];
    let mut work: Vec<u32> = Vec::new();
    let largest = (0..start.len()).max_by_key(|&b| end[b] - start[b]).unwrap_or(0);
    for b in 0..start.len() {
        if b != largest {
            in_work[b] = true;
            work.push(b as u32);
        }
    }

    let mut marked = vec![0usize; start.len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut splitter: Vec<StateId> = Vec::new();
    while let Some(b) = work.pop() {
        in_work[b as usize] = false;
        splitter.clear();
        splitter.extend_from_slice(&elems[start[b as usize]..end[b as usize]]);
        for a in 0..sigma {
            for &t in &splitter {
                let key = a * n + t as usize;
                for &p in &sources[offsets[key]..offsets[key + 1]] {
                    let y = block_of[p as usize] as usize;
                    if marked[y] == 0 {
                        touched.push(y as u32);
                    }
                    let target_pos = start[y] + marked[y];
                    let cur = loc[p as usize];
                    let other = elems[target_pos];
                    elems.swap(cur, target_pos);
                    loc[other as usize] = cur;
                    loc[p as usize] = target_pos;
                    marked[y] += 1;
                }
            }
            for &y in &touched {
                let y = y as usize;
                let m = marked[y];
                marked[y] = 0;
                if m == end[y] - start[y] {
                    continue;
                }
                // the marked prefix becomes a new block
                let z = start.len();
                start.push(start[y]);
                end.push(start[y] + m);
                marked.push(0);
                in_work.push(false);
                start[y] += m;
                for i in start[z]..end[z] {
                    block_of[elems[i] as usize] = z as u32;
                }
                if in_work[y] || (end[z] - start[z]) <= (end[y] - start[y]) {
                    in_work[z] = true;
                    work.push(z as u32);
                } else {
                    in_work[y] = true;
                    work.push(y as u32);
                }
            }
            touched.clear();
        }
    }
    block_of
}

/// Builds the quotient machine of a partition, numbering blocks in
/// breadth-first order from `init`. Returns the new table and one
/// representative old state per new state.
fn quotient(
    n: usize,
    sigma: usize,
    delta: &[StateId],
    block: &[u32],
    init: StateId,
) -> (Vec<StateId>, Vec<StateId>) {
    let blocks = block.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
    let mut rep = vec![u32::MAX; blocks];
    for s in (0..n).rev() {
        rep[block[s] as usize] = s as StateId;
    }
    let mut new_id = vec![u32::MAX; blocks];
    let mut reps = vec![init];
    new_id[block[init as usize] as usize] = 0;
    let mut out = Vec::new();
    let mut i = 0;
    while i < reps.len() {
        let s = reps[i] as usize;
        for a in 0..sigma {
            let tb = block[delta[s * sigma + a] as usize] as usize;
            if new_id[tb] == u32::MAX {
                new_id[tb] = reps.len() as u32;
                reps.push(rep[tb]);
            }
            out.push(new_id[tb]);
        }
        i += 1;
    }
    (out, reps)
}

/// Iterator behind [`Dfa::enumerate_accepted`].
pub struct AcceptedWords<'a> {
    dfa: &'a Dfa,
    max_len: usize,
    // can_finish[r][s]: s reaches acceptance in exactly r steps
    can_finish: Vec<Vec<bool>>,
    target_len: usize,
    stack: Vec<(StateId, u32)>,
    symbols: Vec<u32>,
    started: bool,
}

impl<'a> AcceptedWords<'a> {
    fn new(dfa: &'a Dfa, max_len: usize) -> Self {
        let n = dfa.num_states();
        let sigma = dfa.alphabet_size();
        let mut can_finish = vec![dfa.accepting.clone()];
        for r in 1..=max_len {
            let prev = &can_finish[r - 1];
            let row = (0..n)
                .map(|s| (0..sigma as u32).any(|a| prev[dfa.step(s as StateId, a) as usize]))
                .collect();
            can_finish.push(row);
        }
        AcceptedWords {
            dfa,
            max_len,
            can_finish,
            target_len: 0,
            stack: Vec::new(),
            symbols: Vec::new(),
            started: false,
        }
    }

    fn start_length(&mut self) -> bool {
        while self.target_len <= self.max_len {
            if self.can_finish[self.target_len][self.dfa.initial as usize] {
                self.stack = vec![(self.dfa.initial, 0)];
                self.symbols.clear();
                return true;
            }
            self.target_len += 1;
        }
        false
    }
}

impl Iterator for AcceptedWords<'_> {
    type Item = DigitWord;

    fn next(&mut self) -> Option<DigitWord> {
        if !self.started {
            self.started = true;
            if !self.start_length() {
                return None;
            }
        }
        let sigma = self.dfa.alphabet_size() as u32;
        loop {
            if self.stack.is_empty() {
                self.target_len += 1;
                if !self.start_length() {
                    return None;
                }
            }
            let depth = self.stack.len() - 1;
            if depth == self.target_len {
                let word = self.dfa.word(self.symbols.clone());
                self.stack.pop();
                self.symbols.pop();
                return Some(word);
            }
            let remaining = self.target_len - depth - 1;
            let top = self.stack.last_mut().expect("non-empty");
            let (state, cursor) = *top;
            if cursor == sigma {
                self.stack.pop();
                self.symbols.pop();
                continue;
            }
            top.1 += 1;
            let t = self.dfa.step(state, cursor);
            if self.can_finish[remaining][t as usize] {
                self.stack.push((t, 0));
                self.symbols.push(cursor);
            }
        }
    }
}

/// `x = u v w` pumping data: reading `u` from the initial state reaches
/// `loop_state`, reading `v` from there returns to it, and `loop_state` is
/// live, so `u v^i w` is accepted for all `i` for some `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpDecomposition {
    pub u: DigitWord,
    pub v: DigitWord,
    pub loop_state: StateId,
    /// `[π_j(uv)]_k - [π_j(u)]_k` for every track `j`.
    pub increments: Vec<BigUint>,
}

impl PumpDecomposition {
    pub fn new(u: DigitWord, v: DigitWord, loop_state: StateId) -> Self {
        let scale = pow_k(u.radix(), v.len()) - BigUint::one();
        let increments = (0..u.tracks())
            .map(|j| u.value(j) * &scale + v.value(j))
            .collect();
        PumpDecomposition {
            u,
            v,
            loop_state,
            increments,
        }
    }

    /// `u v^i w`.
    pub fn pumped(&self, i: usize, w: &DigitWord) -> DigitWord {
        self.u.concat(&self.v.repeat(i)).concat(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Path,
    Cycle,
}

#[derive(Debug, Clone, Copy)]
struct PumpFrame {
    state: StateId,
    phase: Phase,
    cursor: u32,
    has_edge: bool,
}

/// Iterator behind [`Dfa::pump_decompositions`].
pub struct PumpDecompositions<'a> {
    dfa: &'a Dfa,
    live: Vec<bool>,
    on_path: Vec<bool>,
    stack: Vec<PumpFrame>,
    symbols: Vec<u32>,
    loop_state: StateId,
    u_len: usize,
}

impl<'a> PumpDecompositions<'a> {
    fn new(dfa: &'a Dfa) -> Self {
        let live = dfa.live_states();
        let mut on_path = vec![false; dfa.num_states()];
        let mut stack = Vec::new();
        if live[dfa.initial as usize] {
            on_path[dfa.initial as usize] = true;
            stack.push(PumpFrame {
                state: dfa.initial,
                phase: Phase::Path,
                cursor: 0,
                has_edge: false,
            });
        }
        PumpDecompositions {
            dfa,
            live,
            on_path,
            stack,
            symbols: Vec::new(),
            loop_state: 0,
            u_len: 0,
        }
    }

    fn pop(&mut self) {
        let frame = self.stack.pop().expect("non-empty");
        if frame.has_edge {
            self.on_path[frame.state as usize] = false;
            self.symbols.pop();
        }
    }
}

impl Iterator for PumpDecompositions<'_> {
    type Item = PumpDecomposition;

    fn next(&mut self) -> Option<PumpDecomposition> {
        let sigma = self.dfa.alphabet_size() as u32;
        while let Some(top) = self.stack.last_mut() {
            match top.phase {
                Phase::Path => {
                    if top.cursor == 0 {
                        // first try closing a cycle at this state
                        top.cursor = 1;
                        let q = top.state;
                        self.loop_state = q;
                        self.u_len = self.symbols.len();
                        self.stack.push(PumpFrame {
                            state: q,
                            phase: Phase::Cycle,
                            cursor: 0,
                            has_edge: false,
                        });
                        continue;
                    }
                    let a = top.cursor - 1;
                    if a == sigma {
                        self.pop();
                        continue;
                    }
                    top.cursor += 1;
                    let t = self.dfa.step(top.state, a);
                    if self.live[t as usize] && !self.on_path[t as usize] {
                        self.on_path[t as usize] = true;
                        self.symbols.push(a);
                        self.stack.push(PumpFrame {
                            state: t,
                            phase: Phase::Path,
                            cursor: 0,
                            has_edge: true,
                        });
                    }
                }
                Phase::Cycle => {
                    let a = top.cursor;
                    if a == sigma {
                        self.pop();
                        continue;
                    }
                    top.cursor += 1;
                    let t = self.dfa.step(top.state, a);
                    if t == self.loop_state {
                        let u = self.dfa.word(self.symbols[..self.u_len].to_vec());
                        let mut v = self.symbols[self.u_len..].to_vec();
                        v.push(a);
                        let v = self.dfa.word(v);
                        return Some(PumpDecomposition::new(u, v, self.loop_state));
                    }
                    if self.live[t as usize] && !self.on_path[t as usize] {
                        self.on_path[t as usize] = true;
                        self.symbols.push(a);
                        self.stack.push(PumpFrame {
                            state: t,
                            phase: Phase::Cycle,
                            cursor: 0,
                            has_edge: true,
                        });
                    }
                }
            }
        }
        None
    }
}

/// Deterministic automaton with output: the `n`-th term of the represented
/// sequence is the output of the state reached on the base-k digits of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfao {
    radix: Radix,
    tracks: usize,
    order: DigitOrder,
    initial: StateId,
    delta: Vec<StateId>,
    output: Vec<u32>,
}

impl Dfao {
    pub fn from_parts(
        radix: Radix,
        tracks: usize,
        order: DigitOrder,
        initial: StateId,
        delta: Vec<StateId>,
        output: Vec<u32>,
    ) -> Result<Self, AutomatonError> {
        // reuse the structural checks of Dfa
        Dfa::from_parts(radix, tracks, order, initial, delta.clone(), vec![false; output.len()])?;
        Ok(Dfao {
            radix,
            tracks,
            order,
            initial,
            delta,
            output,
        })
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

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.output.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.delta.len() / self.output.len()
    }

    pub fn outputs(&self) -> &[u32] {
        &self.output
    }

    pub fn transitions(&self) -> &[StateId] {
        &self.delta
    }

    #[inline]
    pub fn step(&self, state: StateId, symbol: u32) -> StateId {
        self.delta[state as usize * self.alphabet_size() + symbol as usize]
    }

    pub fn output_of_state(&self, state: StateId) -> u32 {
        self.output[state as usize]
    }

    /// Sorted distinct output symbols of reachable states.
    pub fn output_alphabet(&self) -> Vec<u32> {
        let as_dfa = self.shape();
        let mut out: Vec<u32> = as_dfa
            .reachable_order()
            .iter()
            .map(|&s| self.output[s as usize])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn shape(&self) -> Dfa {
        Dfa {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order,
            initial: self.initial,
            delta: self.delta.clone(),
            accepting: vec![false; self.output.len()],
            zero_invariant: false,
        }
    }

    pub fn run(&self, symbols: &[u32]) -> StateId {
        symbols.iter().fold(self.initial, |q, &a| self.step(q, a))
    }

    pub fn output_for(&self, word: &DigitWord) -> Result<u32, AutomatonError> {
        if word.tracks() != self.tracks || word.radix() != self.radix {
            return Err(AutomatonError::Incompatible("word/automaton alphabet mismatch".into()));
        }
        word.require_order(self.order)?;
        Ok(self.output[self.run(word.symbols()) as usize])
    }

    /// The `n`-th term of a single-track sequence.
    pub fn term(&self, n: &BigUint) -> u32 {
        let mut digits = crate::numeral::digits_msd(n, self.radix);
        if self.order == DigitOrder::Lsd {
            digits.reverse();
        }
        self.output[self.run(&digits) as usize]
    }

    /// Terms `0..count`, computed by a digit-incremental sweep.
    pub fn prefix(&self, count: usize) -> Vec<u32> {
        (0..count).map(|i| self.term(&BigUint::from(i))).collect()
    }

    /// Minimal Moore machine with canonical numbering.
    pub fn minimize(&self) -> Dfao {
        let sigma = self.alphabet_size();
        let shape = self.shape();
        let reachable = shape.reachable_order();
        let mut index = vec![u32::MAX; self.num_states()];
        for (i, &s) in reachable.iter().enumerate() {
            index[s as usize] = i as u32;
        }
        let n = reachable.len();
        let mut delta = Vec::with_capacity(n * sigma);
        for &s in &reachable {
            for a in 0..sigma {
                delta.push(index[self.delta[s as usize * sigma + a] as usize]);
            }
        }
        let class: Vec<u32> = reachable.iter().map(|&s| self.output[s as usize]).collect();
        let block = hopcroft(n, sigma, &delta, &class);
        let (delta, reps) = quotient(n, sigma, &delta, &block, 0);
        let output = reps.iter().map(|&r| class[r as usize]).collect();
        Dfao {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order,
            initial: 0,
            delta,
            output,
        }
    }

    /// Whether the output is unchanged by leading zeros (msd) or trailing
    /// zeros (lsd), checked exactly as Moore equivalence.
    pub fn is_zero_invariant(&self) -> bool {
        match self.order {
            DigitOrder::Msd => {
                let p = self.initial;
                let q = self.step(p, 0);
                let sigma = self.alphabet_size() as u32;
                let mut seen = std::collections::HashSet::new();
                let mut stack = vec![(p, q)];
                seen.insert((p, q));
                while let Some((a, b)) = stack.pop() {
                    if self.output[a as usize] != self.output[b as usize] {
                        return false;
                    }
                    for s in 0..sigma {
                        let next = (self.step(a, s), self.step(b, s));
                        if seen.insert(next) {
                            stack.push(next);
                        }
                    }
                }
                true
            }
            DigitOrder::Lsd => self
                .reversed()
                .map(|d| d.is_zero_invariant())
                .unwrap_or(false),
        }
    }

    /// The machine reading digits in the opposite order. A state of the
    /// result records, for every original state `s`, the output reached from
    /// `s` on the (reversed) input read so far.
    pub fn reversed(&self) -> Result<Dfao, AutomatonError> {
        let sigma = self.alphabet_size();
        let n = self.num_states();
        let init: Vec<u32> = self.output.clone();
        let (delta, keys) = explore(init, sigma, |g: &Vec<u32>, a| {
            (0..n).map(|s| g[self.step(s as StateId, a) as usize]).collect()
        })?;
        let output = keys.iter().map(|g| g[self.initial as usize]).collect();
        let reversed = Dfao {
            radix: self.radix,
            tracks: self.tracks,
            order: self.order.flipped(),
            initial: 0,
            delta,
            output,
        };
        Ok(reversed.minimize())
    }

    /// The same sequence read most-significant digit first.
    pub fn to_msd(&self) -> Result<Dfao, AutomatonError> {
        match self.order {
            DigitOrder::Msd => Ok(self.clone()),
            DigitOrder::Lsd => self.reversed(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k2() -> Radix {
        Radix::new(2).unwrap()
    }

    fn pair_syms(tuples: &[[u32; 2]]) -> Vec<u32> {
        tuples.iter().map(|t| k2().pack(t)).collect()
    }

    /// {[1,1]}·{[0,1]}*
    fn ones_then_01() -> Dfa {
        let r = k2();
        Dfa::from_transitions(
            r,
            2,
            DigitOrder::Msd,
            2,
            0,
            &[(0, r.pack(&[1, 1]), 1), (1, r.pack(&[0, 1]), 1)],
            &[1],
        )
        .unwrap()
    }

    fn single_word() -> Dfa {
        Dfa::from_words(k2(), 2, DigitOrder::Msd, &[pair_syms(&[[1, 0], [0, 1]])]).unwrap()
    }

    fn random_dfa(rng: &mut ChaCha8Rng, tracks: usize, max_states: usize) -> Dfa {
        let r = k2();
        let sigma = r.alphabet_size(tracks).unwrap();
        let n = rng.gen_range(1..=max_states);
        let delta = (0..n * sigma).map(|_| rng.gen_range(0..n as u32)).collect();
        let accepting = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        Dfa::from_parts(r, tracks, DigitOrder::Msd, 0, delta, accepting).unwrap()
    }

    fn random_word(rng: &mut ChaCha8Rng, sigma: usize, max_len: usize) -> Vec<u32> {
        let len = rng.gen_range(0..=max_len);
        (0..len).map(|_| rng.gen_range(0..sigma as u32)).collect()
    }

    fn all_words(sigma: usize, max_len: usize) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for a in 0..sigma as u32 {
                    let mut x: Vec<u32> = w.clone();
                    x.push(a);
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn product_examples() {
        let a = ones_then_01();
        let all = Dfa::accept_all(k2(), 2, DigitOrder::Msd).unwrap();
        assert!(a.intersect(&a).unwrap().equivalent(&a).unwrap());
        assert!(a.intersect(&a.complement()).unwrap().is_empty());
        assert_eq!(all.intersect(&a).unwrap(), a.minimize().unwrap());
        let lsd = Dfa::accept_all(k2(), 2, DigitOrder::Lsd).unwrap();
        assert!(matches!(
            a.intersect(&lsd),
            Err(AutomatonError::Incompatible(_))
        ));
    }

    #[test]
    fn complement_examples() {
        let empty = Dfa::empty_language(k2(), 2, DigitOrder::Msd).unwrap();
        let all = Dfa::accept_all(k2(), 2, DigitOrder::Msd).unwrap();
        assert_eq!(empty.complement().minimize().unwrap(), all);
        let a = ones_then_01();
        assert_eq!(
            a.complement().complement().minimize().unwrap(),
            a.minimize().unwrap()
        );
        let w = Dfa::from_words(k2(), 2, DigitOrder::Msd, &[pair_syms(&[[1, 1]])]).unwrap();
        let c = w.complement();
        assert!(!c.accepts_symbols(&pair_syms(&[[1, 1]])));
        assert!(c.accepts_symbols(&pair_syms(&[[0, 1]])));
    }

    #[test]
    fn project_and_determinize_examples() {
        let p = single_word().project(1).unwrap().determinize().unwrap();
        let expected = Dfa::from_words(k2(), 1, DigitOrder::Msd, &[vec![1, 0]]).unwrap();
        assert!(p.equivalent(&expected).unwrap());

        let empty = Dfa::empty_language(k2(), 2, DigitOrder::Msd).unwrap();
        assert!(empty.project(0).unwrap().determinize().unwrap().is_empty());

        // {(m, n) : m = n} over msd words
        let r = k2();
        let eq = Dfa::from_transitions(
            r,
            2,
            DigitOrder::Msd,
            1,
            0,
            &[(0, r.pack(&[0, 0]), 0), (0, r.pack(&[1, 1]), 0)],
            &[0],
        )
        .unwrap();
        let projected = eq.project(1).unwrap().determinize().unwrap().minimize().unwrap();
        assert_eq!(projected, Dfa::accept_all(r, 1, DigitOrder::Msd).unwrap());

        assert!(matches!(
            eq.project(2),
            Err(AutomatonError::TrackOutOfRange { .. })
        ));

        // two initial states: {0} ∪ {1}
        let nfa = Nfa::new(
            r,
            1,
            DigitOrder::Msd,
            vec![0, 1],
            vec![vec![2], vec![], vec![], vec![2], vec![], vec![]],
            vec![false, false, true],
        )
        .unwrap();
        let d = nfa.determinize().unwrap();
        assert!(d.accepts_symbols(&[0]));
        assert!(d.accepts_symbols(&[1]));
        assert!(!d.accepts_symbols(&[]));
    }

    #[test]
    fn minimize_examples() {
        let a = ones_then_01();
        let m = a.minimize().unwrap();
        assert_eq!(m.minimize().unwrap(), m);
        // a redundant presentation of the same language
        let r = k2();
        let b = Dfa::from_transitions(
            r,
            2,
            DigitOrder::Msd,
            3,
            0,
            &[
                (0, r.pack(&[1, 1]), 1),
                (1, r.pack(&[0, 1]), 2),
                (2, r.pack(&[0, 1]), 1),
            ],
            &[1, 2],
        )
        .unwrap();
        assert_eq!(b.minimize().unwrap(), m);
        let four = Dfa::from_parts(
            r,
            1,
            DigitOrder::Msd,
            0,
            vec![1, 2, 3, 0, 0, 1, 2, 3],
            vec![true; 4],
        )
        .unwrap();
        assert_eq!(four.minimize().unwrap().num_states(), 1);
    }

    #[test]
    fn minimize_preserves_membership_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let words = all_words(2, 8);
        for _ in 0..200 {
            let a = random_dfa(&mut rng, 1, 6);
            let m = a.minimize().unwrap();
            assert!(m.num_states() <= a.num_states());
            for w in &words {
                assert_eq!(a.accepts_symbols(w), m.accepts_symbols(w));
            }
            // no two states of a minimal machine are equivalent
            for p in 0..m.num_states() as StateId {
                for q in p + 1..m.num_states() as StateId {
                    assert!(!m.equivalent_states(p, q));
                }
            }
        }
    }

    #[test]
    fn operations_agree_with_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let a = random_dfa(&mut rng, 2, 4);
            let b = random_dfa(&mut rng, 2, 4);
            let and = a.intersect(&b).unwrap();
            let or = a.union(&b).unwrap();
            let not = a.complement();
            let rev = a.reverse().unwrap();
            let proj = a.project(0).unwrap();
            let det = proj.determinize().unwrap();
            for _ in 0..1000 {
                let w = random_word(&mut rng, 4, 10);
                let (x, y) = (a.accepts_symbols(&w), b.accepts_symbols(&w));
                assert_eq!(and.accepts_symbols(&w), x && y);
                assert_eq!(or.accepts_symbols(&w), x || y);
                assert_eq!(not.accepts_symbols(&w), !x);
                let mut r = w.clone();
                r.reverse();
                assert_eq!(rev.accepts_symbols(&r), x);
                let erased: Vec<u32> = w.iter().map(|&s| k2().digit(s, 1, 2)).collect();
                assert_eq!(det.accepts_symbols(&erased), proj.accepts_symbols(&erased));
                if x {
                    assert!(det.accepts_symbols(&erased));
                }
            }
        }
    }

    #[test]
    fn emptiness_examples() {
        let empty = Dfa::empty_language(k2(), 2, DigitOrder::Msd).unwrap();
        assert!(empty.is_empty());
        let all = Dfa::accept_all(k2(), 2, DigitOrder::Msd).unwrap();
        assert!(all.shortest_accepted().unwrap().is_empty());
        assert_eq!(
            single_word().shortest_accepted().unwrap().to_string(),
            "[1,0][0,1]"
        );
    }

    #[test]
    fn infinitude_examples() {
        assert!(ones_then_01().is_infinite());
        assert!(!single_word().is_infinite());
        assert!(!Dfa::empty_language(k2(), 2, DigitOrder::Msd).unwrap().is_infinite());
        assert!(Dfa::accept_all(k2(), 1, DigitOrder::Msd).unwrap().is_infinite());
    }

    #[test]
    fn canonicalize_examples() {
        let r = k2();
        let all = Dfa::accept_all(r, 2, DigitOrder::Msd).unwrap();
        let c = all.canonicalize().unwrap();
        assert!(!c.accepts_symbols(&pair_syms(&[[0, 0], [1, 1]])));
        assert!(c.accepts_symbols(&pair_syms(&[[0, 1], [0, 0]])));
        assert!(c.accepts_symbols(&[]));
        assert!(!c.zero_invariant());

        let l = Dfa::from_words(
            r,
            2,
            DigitOrder::Msd,
            &[pair_syms(&[[0, 0], [1, 1]]), pair_syms(&[[1, 1]])],
        )
        .unwrap();
        let expected = Dfa::from_words(r, 2, DigitOrder::Msd, &[pair_syms(&[[1, 1]])]).unwrap();
        assert_eq!(l.canonicalize().unwrap(), expected);
        assert_eq!(c.canonicalize().unwrap(), c);
    }

    #[test]
    fn canonicalize_never_accepts_leading_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words = all_words(4, 6);
        for _ in 0..50 {
            let a = random_dfa(&mut rng, 2, 4).canonicalize().unwrap();
            for w in words.iter().filter(|w| w.first() == Some(&0)) {
                assert!(!a.accepts_symbols(w));
            }
            let padded = a.zero_padded().unwrap();
            assert!(padded.check_zero_invariance().unwrap());
            for w in &words {
                let stripped: Vec<u32> = w.iter().copied().skip_while(|&s| s == 0).collect();
                assert_eq!(padded.accepts_symbols(w), a.accepts_symbols(&stripped));
            }
        }
    }

    #[test]
    fn enumerate_examples() {
        let words: Vec<String> = single_word()
            .enumerate_accepted(2)
            .map(|w| w.to_string())
            .collect();
        assert_eq!(words, vec!["[1,0][0,1]"]);
        let all = Dfa::accept_all(k2(), 1, DigitOrder::Msd).unwrap();
        let words: Vec<String> = all.enumerate_accepted(1).map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["ε", "0", "1"]);
        let empty = Dfa::empty_language(k2(), 1, DigitOrder::Msd).unwrap();
        assert_eq!(empty.enumerate_accepted(5).count(), 0);
    }

    #[test]
    fn enumerate_matches_filtering() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let a = random_dfa(&mut rng, 1, 5);
            let got: Vec<Vec<u32>> = a
                .enumerate_accepted(7)
                .map(|w| w.symbols().to_vec())
                .collect();
            let mut expected: Vec<Vec<u32>> = all_words(2, 7)
                .into_iter()
                .filter(|w| a.accepts_symbols(w))
                .collect();
            expected.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn pump_examples() {
        let pumps: Vec<_> = ones_then_01().canonicalize().unwrap().pump_decompositions().collect();
        assert!(pumps
            .iter()
            .any(|p| p.u.to_string() == "[1,1]" && p.v.to_string() == "[0,1]"));
        assert_eq!(single_word().pump_decompositions().count(), 0);

        let r = k2();
        let star = Dfa::from_transitions(r, 2, DigitOrder::Msd, 1, 0, &[(0, r.pack(&[1, 0]), 0)], &[0])
            .unwrap();
        let pumps: Vec<_> = star.pump_decompositions().collect();
        assert!(pumps.iter().any(|p| p.u.is_empty() && p.v.to_string() == "[1,0]"));
    }

    #[test]
    fn pump_decompositions_are_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..60 {
            let a = random_dfa(&mut rng, 2, 4).canonicalize().unwrap();
            let n = a.live_count();
            for p in a.pump_decompositions() {
                assert!(!p.v.is_empty());
                assert!(p.u.len() + p.v.len() <= n);
                assert_eq!(a.run(p.u.symbols()), p.loop_state);
                let back = p.v.symbols().iter().fold(p.loop_state, |q, &s| a.step(q, s));
                assert_eq!(back, p.loop_state);
                // witnesses w: accepted words from the loop state
                let from_loop = Dfa {
                    initial: p.loop_state,
                    ..a.clone()
                };
                for w in from_loop.enumerate_accepted(6).take(5) {
                    for i in 0..3 {
                        assert!(a.accepts_symbols(p.pumped(i, &w).symbols()));
                    }
                }
            }
        }
    }

    #[test]
    fn reverse_examples() {
        let a = ones_then_01();
        assert!(a.reverse().unwrap().reverse().unwrap().equivalent(&a.minimize().unwrap()).unwrap());
        let rev = single_word().reverse().unwrap();
        assert_eq!(rev.order(), DigitOrder::Lsd);
        let words: Vec<String> = rev.enumerate_accepted(3).map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["[0,1][1,0]"]);
        let pal = Dfa::from_words(
            k2(),
            2,
            DigitOrder::Msd,
            &[pair_syms(&[[1, 0], [0, 1], [1, 0]]), pair_syms(&[[1, 1]])],
        )
        .unwrap();
        let rp = pal.reverse().unwrap();
        for w in pal.enumerate_accepted(4) {
            assert!(rp.accepts_symbols(w.symbols()));
        }
        assert_eq!(rp.enumerate_accepted(4).count(), 2);
    }

    #[test]
    fn dfao_reversal_preserves_terms() {
        let r = k2();
        // Rudin-Shapiro: state = (parity of "11" count, last bit)
        let mut delta = Vec::new();
        for s in 0..4u32 {
            let (par, last) = (s / 2, s % 2);
            for b in 0..2u32 {
                let npar = if last == 1 && b == 1 { 1 - par } else { par };
                delta.push(npar * 2 + b);
            }
        }
        let rs = Dfao::from_parts(r, 1, DigitOrder::Msd, 0, delta, vec![0, 0, 1, 1]).unwrap();
        assert!(rs.is_zero_invariant());
        let lsd = rs.reversed().unwrap();
        assert_eq!(lsd.order(), DigitOrder::Lsd);
        assert!(lsd.is_zero_invariant());
        for n in 0..300u32 {
            assert_eq!(rs.term(&n.into()), lsd.term(&n.into()));
        }
        assert_eq!(lsd.to_msd().unwrap().minimize(), rs.minimize());
    }
}
