//! First-order formulas over natural-number positions and one automatic
//! sequence, compiled to automata.
//!
//! A compiled formula accepts the padded msd-first encodings of exactly the
//! tuples of its free variables that satisfy it; tracks follow the order of
//! [`CompilationEnv::free`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::arith;
use crate::automaton::{AutomatonError, Dfa, Dfao};
use crate::numeral::{DigitOrder, Radix};

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {}", span.start)]
    UnknownIdentifier { name: String, span: Span },
    #[error("variable `{name}` at {} is already bound or free", span.start)]
    Shadowing { name: String, span: Span },
    #[error("variable/track mismatch: {0}")]
    Mismatch(String),
    #[error("formula mentions seq but no sequence automaton was supplied")]
    NoSequence,
    #[error("sentence expected, found free variables {0:?}")]
    FreeVariables(Vec<String>),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String, Span),
    Const(BigUint),
    Add(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Cmp(CmpOp, Term, Term),
    /// `seq[a] = seq[b]`
    SeqEq(Term, Term),
    /// `seq[a] = c`
    SeqConst(Term, u32),
    /// A precompiled relation applied to terms; the automaton's tracks
    /// correspond to `args` in order. Not produced by the parser.
    Relation {
        name: String,
        dfa: Arc<Dfa>,
        args: Vec<Term>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Span, Box<Formula>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string(), Span::default())
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v, _) => out.push(v),
            Term::Const(_) => {}
            Term::Add(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Value under an assignment, if every variable is assigned.
    pub fn eval(&self, assignment: &HashMap<String, BigUint>) -> Option<BigUint> {
        match self {
            Term::Var(v, _) => assignment.get(v).cloned(),
            Term::Const(c) => Some(c.clone()),
            Term::Add(a, b) => Some(a.eval(assignment)? + b.eval(assignment)?),
        }
    }
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, f: Formula) -> Formula {
        Formula::Quant(Quantifier::Exists, var.to_string(), Span::default(), Box::new(f))
    }

    pub fn forall(var: &str, f: Formula) -> Formula {
        Formula::Quant(Quantifier::Forall, var.to_string(), Span::default(), Box::new(f))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut terms: Vec<&str> = Vec::new();
        match self {
            Formula::Cmp(_, a, b) | Formula::SeqEq(a, b) => {
                a.collect_vars(&mut terms);
                b.collect_vars(&mut terms);
            }
            Formula::SeqConst(a, _) => a.collect_vars(&mut terms),
            Formula::Relation { args, .. } => {
                for a in args {
                    a.collect_vars(&mut terms);
                }
            }
            Formula::Not(f) => f.free_vars_into(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Quant(_, v, _, f) => {
                bound.push(v.clone());
                f.free_vars_into(bound, out);
                bound.pop();
            }
        }
        for v in terms {
            if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
    }

    fn mentions_seq(&self) -> bool {
        match self {
            Formula::SeqEq(..) | Formula::SeqConst(..) => true,
            Formula::Cmp(..) | Formula::Relation { .. } => false,
            Formula::Not(f) | Formula::Quant(_, _, _, f) => f.mentions_seq(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.mentions_seq() || b.mentions_seq()
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v, _) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Add(a, b) => write!(f, "{a}+{b}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Ne => "!=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                write!(f, "{a} {sym} {b}")
            }
            Formula::SeqEq(a, b) => write!(f, "seq[{a}] = seq[{b}]"),
            Formula::SeqConst(a, c) => write!(f, "seq[{a}] = {c}"),
            Formula::Relation { name, args, .. } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{name}({})", args.join(", "))
            }
            Formula::Not(x) => write!(f, "~({x})"),
            Formula::And(a, b) => write!(f, "({a}) & ({b})"),
            Formula::Or(a, b) => write!(f, "({a}) | ({b})"),
            Formula::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            Formula::Quant(q, v, _, x) => {
                let k = if *q == Quantifier::Exists { "E" } else { "A" };
                write!(f, "{k} {v} . {x}")
            }
        }
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigUint),
    Exists,
    Forall,
    Seq,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    And,
    Or,
    Arrow,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Span)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            match &text[start..i] {
                "E" => Tok::Exists,
                "A" => Tok::Forall,
                "seq" => Tok::Seq,
                word => Tok::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Num(text[start..i].parse().expect("ascii digits"))
        } else {
            let two = text.get(i..i + 2);
            let (tok, len) = match (two, c) {
                (Some("->"), _) => (Tok::Arrow, 2),
                (Some("!="), _) => (Tok::Ne, 2),
                (Some("<="), _) => (Tok::Le, 2),
                (Some(">="), _) => (Tok::Ge, 2),
                (_, b'.') => (Tok::Dot, 1),
                (_, b'(') => (Tok::LParen, 1),
                (_, b')') => (Tok::RParen, 1),
                (_, b'[') => (Tok::LBracket, 1),
                (_, b']') => (Tok::RBracket, 1),
                (_, b'+') => (Tok::Plus, 1),
                (_, b'=') => (Tok::Eq, 1),
                (_, b'<') => (Tok::Lt, 1),
                (_, b'>') => (Tok::Gt, 1),
                (_, b'~') => (Tok::Not, 1),
                (_, b'&') => (Tok::And, 1),
                (_, b'|') => (Tok::Or, 1),
                _ => {
                    return Err(LogicError::Syntax {
                        pos: i,
                        msg: format!("unexpected character {:?}", c as char),
                    })
                }
            };
            i += len;
            tok
        };
        out.push((tok, Span { start, end: i }));
    }
    out.push((
        Tok::End,
        Span {
            start: text.len(),
            end: text.len(),
        },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: &str) -> Result<T, LogicError> {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Err(LogicError::Syntax {
            pos: self.span().start,
            msg: format!("{msg}, found {found}"),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, LogicError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.error(&format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Exists | Tok::Forall => self.quantified(),
            _ => self.atom(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, LogicError> {
        let q = if self.bump().0 == Tok::Exists {
            Quantifier::Exists
        } else {
            Quantifier::Forall
        };
        let (name, span) = match self.bump() {
            (Tok::Ident(name), span) => (name, span),
            _ => {
                self.pos -= 1;
                return self.error("expected a variable after the quantifier");
            }
        };
        let bound = if *self.peek() == Tok::Lt {
            self.bump();
            Some(self.term()?)
        } else {
            None
        };
        self.expect(Tok::Dot, "`.`")?;
        let body = self.formula()?;
        let body = match bound {
            None => body,
            Some(t) => {
                let guard = Formula::Cmp(CmpOp::Lt, Term::Var(name.clone(), span), t);
                match q {
                    Quantifier::Exists => Formula::and(guard, body),
                    Quantifier::Forall => Formula::implies(guard, body),
                }
            }
        };
        Ok(Formula::Quant(q, name, span, Box::new(body)))
    }

    fn atom(&mut self) -> Result<Formula, LogicError> {
        if *self.peek() == Tok::Seq {
            let lhs = self.seq_index()?;
            let negate = match self.peek() {
                Tok::Eq => false,
                Tok::Ne => true,
                _ => return self.error("expected `=` or `!=` after seq[...]"),
            };
            self.bump();
            let atom = match self.peek().clone() {
                Tok::Seq => Formula::SeqEq(lhs, self.seq_index()?),
                Tok::Num(c) => {
                    self.bump();
                    let c = u32::try_from(&c).map_err(|_| LogicError::Syntax {
                        pos: self.toks[self.pos - 1].1.start,
                        msg: "output symbol too large".into(),
                    })?;
                    Formula::SeqConst(lhs, c)
                }
                _ => return self.error("expected seq[...] or an output symbol"),
            };
            return Ok(if negate { Formula::not(atom) } else { atom });
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return self.error("expected a comparison"),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Cmp(op, lhs, rhs))
    }

    fn seq_index(&mut self) -> Result<Term, LogicError> {
        self.expect(Tok::Seq, "`seq`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let t = self.term()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(t)
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let mut t = self.primary()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            t = Term::Add(Box::new(t), Box::new(self.primary()?));
        }
        Ok(t)
    }

    fn primary(&mut self) -> Result<Term, LogicError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().1;
                Ok(Term::Var(name, span))
            }
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Const(n))
            }
            _ => self.error("expected a variable or a constant"),
        }
    }
}

/// Parses the formula language: `E`/`A` quantifiers (optionally bounded as
/// `A j < t .`), `~`, `&`, `|`, right-associative `->`, comparisons
/// `= != < <= > >=` between sums of variables and constants, and
/// `seq[t] = seq[t]` / `seq[t] = c`.
pub fn parse(text: &str) -> Result<Formula, LogicError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(f)
}

// ------------------------------------------------------------- compiling

/// Context for compilation: the radix, the optional subject sequence, and
/// the free variables in track order.
#[derive(Debug, Clone)]
pub struct CompilationEnv {
    pub radix: Radix,
    pub sequence: Option<Dfao>,
    pub free: Vec<String>,
}

impl CompilationEnv {
    pub fn new(radix: Radix, sequence: Option<Dfao>, free: &[&str]) -> Self {
        CompilationEnv {
            radix,
            sequence,
            free: free.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Environment for formulas about the sequence of `dfao`.
    pub fn for_sequence(dfao: &Dfao, free: &[&str]) -> Self {
        CompilationEnv::new(dfao.radix(), Some(dfao.clone()), free)
    }
}

type VarId = u32;

/// A relation over the variables `vars` (sorted, distinct); track `i` of
/// `dfa` carries `vars[i]`.
#[derive(Debug, Clone)]
struct Rel {
    vars: Vec<VarId>,
    dfa: Dfa,
}

struct Compiler<'a> {
    env: &'a CompilationEnv,
    next_id: VarId,
    scope: Vec<(String, VarId)>,
    eq: Option<Dfa>,
    lt: Option<Dfa>,
    add: Option<Dfa>,
    seq_eq: Option<Dfa>,
}

impl<'a> Compiler<'a> {
    fn new(env: &'a CompilationEnv) -> Self {
        let scope: Vec<(String, VarId)> = env
            .free
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as VarId))
            .collect();
        Compiler {
            env,
            next_id: scope.len() as VarId,
            scope,
            eq: None,
            lt: None,
            add: None,
            seq_eq: None,
        }
    }

    fn fresh(&mut self) -> VarId {
        self.next_id += 1;
        self.next_id - 1
    }

    fn lookup(&self, name: &str, span: Span) -> Result<VarId, LogicError> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, id)| id)
            .ok_or_else(|| LogicError::UnknownIdentifier {
                name: name.to_string(),
                span,
            })
    }

    fn sequence(&self) -> Result<&'a Dfao, LogicError> {
        self.env.sequence.as_ref().ok_or(LogicError::NoSequence)
    }

    fn cached(slot: &mut Option<Dfa>, make: impl FnOnce() -> Result<Dfa, AutomatonError>) -> Result<Dfa, LogicError> {
        if slot.is_none() {
            *slot = Some(make()?);
        }
        Ok(slot.clone().expect("filled"))
    }

    /// Reinterprets `dfa`, whose track `i` carries `args[i]`, over the sorted
    /// variable list `target ⊇ args`. Repeated arguments restrict to the
    /// diagonal.
    fn lift(&self, dfa: &Dfa, args: &[VarId], target: &[VarId]) -> Result<Dfa, LogicError> {
        if args == target {
            return Ok(dfa.clone());
        }
        let radix = self.env.radix;
        let big_sigma = radix.alphabet_size(target.len()).map_err(AutomatonError::from)?;
        let positions: Vec<usize> = args
            .iter()
            .map(|a| target.iter().position(|t| t == a).expect("target covers args"))
            .collect();
        let to_small: Vec<u32> = (0..big_sigma as u32)
            .map(|big| {
                let digits = radix.unpack(big, target.len());
                let small: Vec<u32> = positions.iter().map(|&p| digits[p]).collect();
                radix.pack(&small)
            })
            .collect();
        let n = dfa.num_states();
        let mut delta = Vec::with_capacity(n * big_sigma);
        for s in 0..n as u32 {
            for &a in &to_small {
                delta.push(dfa.step(s, a));
            }
        }
        let lifted = Dfa::from_parts(
            radix,
            target.len(),
            DigitOrder::Msd,
            dfa.initial(),
            delta,
            dfa.accepting().to_vec(),
        )?;
        Ok(lifted.minimize()?.with_zero_invariant(dfa.zero_invariant()))
    }

    fn atom(&self, dfa: &Dfa, args: &[VarId]) -> Result<Rel, LogicError> {
        let mut vars = args.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let dfa = self.lift(dfa, args, &vars)?;
        Ok(Rel { vars, dfa })
    }

    fn combine(&self, a: &Rel, b: &Rel, and: bool) -> Result<Rel, LogicError> {
        let mut vars: Vec<VarId> = a.vars.iter().chain(&b.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let x = self.lift(&a.dfa, &a.vars, &vars)?;
        let y = self.lift(&b.dfa, &b.vars, &vars)?;
        let dfa = if and { x.intersect(&y)? } else { x.union(&y)? };
        Ok(Rel { vars, dfa })
    }

    fn negate(&self, a: Rel) -> Rel {
        Rel {
            vars: a.vars,
            dfa: a.dfa.complement(),
        }
    }

    fn exists(&self, rel: Rel, var: VarId) -> Result<Rel, LogicError> {
        let Some(track) = rel.vars.iter().position(|&v| v == var) else {
            return Ok(rel);
        };
        let mut vars = rel.vars.clone();
        vars.remove(track);
        let radix = self.env.radix;
        if vars.is_empty() {
            let dfa = if rel.dfa.is_empty() {
                Dfa::empty_language(radix, 0, DigitOrder::Msd)?
            } else {
                Dfa::accept_all(radix, 0, DigitOrder::Msd)?
            };
            return Ok(Rel { vars, dfa });
        }
        let mut nfa = rel.dfa.project(track)?;
        // the witness may be longer than the remaining components
        nfa.close_initial_under_zero();
        let dfa = nfa.determinize()?.minimize()?.with_zero_invariant(true);
        Ok(Rel { vars, dfa })
    }

    /// Lowers a term to a variable plus defining constraints over fresh
    /// auxiliary variables.
    fn lower(
        &mut self,
        term: &Term,
        constraints: &mut Vec<Rel>,
        aux: &mut Vec<VarId>,
    ) -> Result<VarId, LogicError> {
        match term {
            Term::Var(name, span) => self.lookup(name, *span),
            Term::Const(c) => {
                let z = self.fresh();
                aux.push(z);
                let dfa = arith::const_eq(self.env.radix, c)?;
                constraints.push(self.atom(&dfa, &[z])?);
                Ok(z)
            }
            Term::Add(a, b) => {
                let x = self.lower(a, constraints, aux)?;
                let y = self.lower(b, constraints, aux)?;
                let z = self.fresh();
                aux.push(z);
                let radix = self.env.radix;
                let add = Self::cached(&mut self.add, || arith::add_rel(radix))?;
                constraints.push(self.atom(&add, &[x, y, z])?);
                Ok(z)
            }
        }
    }

    fn with_terms(
        &mut self,
        terms: &[&Term],
        base: impl FnOnce(&mut Self, &[VarId]) -> Result<Rel, LogicError>,
    ) -> Result<Rel, LogicError> {
        let mut constraints = Vec::new();
        let mut aux = Vec::new();
        let mut ids = Vec::new();
        for t in terms {
            ids.push(self.lower(t, &mut constraints, &mut aux)?);
        }
        let mut rel = base(self, &ids)?;
        // innermost definitions last, so each projection sees its users
        for c in constraints.iter().rev() {
            rel = self.combine(&rel, c, true)?;
        }
        for &z in aux.iter().rev() {
            rel = self.exists(rel, z)?;
        }
        Ok(rel)
    }

    fn compile(&mut self, f: &Formula) -> Result<Rel, LogicError> {
        let radix = self.env.radix;
        match f {
            Formula::Cmp(op, a, b) => {
                let op = *op;
                self.with_terms(&[a, b], |c, ids| {
                    let (x, y) = (ids[0], ids[1]);
                    let eq = Self::cached(&mut c.eq, || arith::eq_rel(radix))?;
                    let lt = Self::cached(&mut c.lt, || arith::lt_rel(radix))?;
                    Ok(match op {
                        CmpOp::Eq => c.atom(&eq, &[x, y])?,
                        CmpOp::Ne => c.negate(c.atom(&eq, &[x, y])?),
                        CmpOp::Lt => c.atom(&lt, &[x, y])?,
                        CmpOp::Gt => c.atom(&lt, &[y, x])?,
                        CmpOp::Le => c.combine(&c.atom(&lt, &[x, y])?, &c.atom(&eq, &[x, y])?, false)?,
                        CmpOp::Ge => c.combine(&c.atom(&lt, &[y, x])?, &c.atom(&eq, &[x, y])?, false)?,
                    })
                })
            }
            Formula::SeqEq(a, b) => {
                let seq = self.sequence()?;
                self.with_terms(&[a, b], |c, ids| {
                    let dfa = Self::cached(&mut c.seq_eq, || arith::seq_eq(seq))?;
                    c.atom(&dfa, ids)
                })
            }
            Formula::SeqConst(a, value) => {
                let seq = self.sequence()?;
                let dfa = arith::seq_const(seq, *value)?;
                self.with_terms(&[a], |c, ids| c.atom(&dfa, ids))
            }
            Formula::Relation { name, dfa, args } => {
                if dfa.tracks() != args.len() || dfa.radix() != radix || dfa.order() != DigitOrder::Msd {
                    return Err(LogicError::Mismatch(format!(
                        "relation {name} has {} tracks but {} arguments",
                        dfa.tracks(),
                        args.len()
                    )));
                }
                let terms: Vec<&Term> = args.iter().collect();
                let dfa = dfa.clone();
                self.with_terms(&terms, |c, ids| c.atom(&dfa, ids))
            }
            Formula::Not(x) => {
                let r = self.compile(x)?;
                Ok(self.negate(r))
            }
            Formula::And(a, b) => {
                let (x, y) = (self.compile(a)?, self.compile(b)?);
                self.combine(&x, &y, true)
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.compile(a)?, self.compile(b)?);
                self.combine(&x, &y, false)
            }
            Formula::Implies(a, b) => {
                let x = self.compile(a)?;
                let y = self.compile(b)?;
                self.combine(&self.negate(x), &y, false)
            }
            Formula::Quant(q, name, span, body) => {
                if self.scope.iter().any(|(n, _)| n == name) {
                    return Err(LogicError::Shadowing {
                        name: name.clone(),
                        span: *span,
                    });
                }
                let id = self.fresh();
                self.scope.push((name.clone(), id));
                let inner = self.compile(body);
                self.scope.pop();
                let inner = inner?;
                Ok(match q {
                    Quantifier::Exists => self.exists(inner, id)?,
                    Quantifier::Forall => {
                        let neg = self.exists(self.negate(inner), id)?;
                        self.negate(neg)
                    }
                })
            }
        }
    }
}

/// Compiles `formula` to an automaton over the tracks `env.free`.
pub fn compile(formula: &Formula, env: &CompilationEnv) -> Result<Dfa, LogicError> {
    let mut seen = BTreeSet::new();
    for v in &env.free {
        if !seen.insert(v) {
            return Err(LogicError::Mismatch(format!("`{v}` listed twice")));
        }
    }
    let free = formula.free_vars();
    if let Some(extra) = free.iter().find(|v| !env.free.contains(v)) {
        return Err(LogicError::UnknownIdentifier {
            name: extra.clone(),
            span: Span::default(),
        });
    }
    if let Some(unused) = env.free.iter().find(|v| !free.contains(v)) {
        return Err(LogicError::Mismatch(format!(
            "`{unused}` is listed as free but does not occur free"
        )));
    }
    if formula.mentions_seq() && env.sequence.is_none() {
        return Err(LogicError::NoSequence);
    }
    let mut compiler = Compiler::new(env);
    let rel = compiler.compile(formula)?;
    let all: Vec<VarId> = (0..env.free.len() as VarId).collect();
    let dfa = compiler.lift(&rel.dfa, &rel.vars, &all)?;
    Ok(dfa.with_zero_invariant(true))
}

/// Truth value of a formula without free variables.
pub fn evaluate_sentence(formula: &Formula, env: &CompilationEnv) -> Result<bool, LogicError> {
    let free = formula.free_vars();
    if !free.is_empty() {
        return Err(LogicError::FreeVariables(free));
    }
    let env = CompilationEnv {
        free: Vec::new(),
        ..env.clone()
    };
    let dfa = compile(formula, &env)?;
    Ok(dfa.is_accepting(dfa.initial()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeral::{encode_tuple, DigitWord};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tm() -> Dfao {
        let r = Radix::new(2).unwrap();
        Dfao::from_parts(r, 1, DigitOrder::Msd, 0, vec![0, 1, 1, 0], vec![0, 1]).unwrap()
    }

    fn accepts(dfa: &Dfa, values: &[u64]) -> bool {
        let big: Vec<BigUint> = values.iter().map(|&v| BigUint::from(v)).collect();
        let w = encode_tuple(&big, dfa.radix());
        dfa.accepts(&w).unwrap()
    }

    /// Direct interpretation; quantifiers must be bounded by `box_size`.
    fn eval_direct(f: &Formula, env: &mut HashMap<String, BigUint>, seq: &[u32], box_size: u64) -> bool {
        let val = |t: &Term, env: &HashMap<String, BigUint>| -> usize {
            let v: BigUint = t.eval(env).unwrap();
            usize::try_from(&v).unwrap()
        };
        match f {
            Formula::Cmp(op, a, b) => {
                let (x, y) = (val(a, env), val(b, env));
                match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    CmpOp::Ge => x >= y,
                }
            }
            Formula::SeqEq(a, b) => seq[val(a, env)] == seq[val(b, env)],
            Formula::SeqConst(a, c) => seq[val(a, env)] == *c,
            Formula::Relation { .. } => unreachable!(),
            Formula::Not(x) => !eval_direct(x, env, seq, box_size),
            Formula::And(a, b) => eval_direct(a, env, seq, box_size) && eval_direct(b, env, seq, box_size),
            Formula::Or(a, b) => eval_direct(a, env, seq, box_size) || eval_direct(b, env, seq, box_size),
            Formula::Implies(a, b) => !eval_direct(a, env, seq, box_size) || eval_direct(b, env, seq, box_size),
            Formula::Quant(q, v, _, body) => {
                let mut result = *q == Quantifier::Forall;
                for x in 0..box_size {
                    env.insert(v.clone(), BigUint::from(x));
                    let b = eval_direct(body, env, seq, box_size);
                    env.remove(v);
                    if *q == Quantifier::Exists && b {
                        result = true;
                        break;
                    }
                    if *q == Quantifier::Forall && !b {
                        result = false;
                        break;
                    }
                }
                result
            }
        }
    }

    #[test]
    fn parse_examples() {
        let f = parse("E i . seq[i] = 1").unwrap();
        assert!(matches!(f, Formula::Quant(Quantifier::Exists, ref v, _, ref b)
            if v == "i" && matches!(**b, Formula::SeqConst(_, 1))));
        let g = parse("A j . j < q -> seq[i+j] = seq[i+p+j]").unwrap();
        let Formula::Quant(Quantifier::Forall, _, _, body) = &g else {
            panic!("forall expected")
        };
        assert!(matches!(**body, Formula::Implies(..)));
        assert_eq!(g.free_vars(), vec!["q", "i", "p"]);
        assert!(matches!(parse("E i ."), Err(LogicError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x = "), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse("x # y"), Err(LogicError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("a = 1 | b = 1 & c = 1 -> d = 1 -> e = 1").unwrap();
        let Formula::Implies(lhs, rhs) = f else {
            panic!("implication at the root")
        };
        assert!(matches!(*lhs, Formula::Or(_, ref r) if matches!(**r, Formula::And(..))));
        assert!(matches!(*rhs, Formula::Implies(..)));
        let g = parse("~x = 1 & y = 1").unwrap();
        assert!(matches!(g, Formula::And(ref l, _) if matches!(**l, Formula::Not(_))));
        // quantifier body extends to the right
        let h = parse("x = 0 & E y . y = x | y = 1").unwrap();
        assert!(matches!(h, Formula::And(_, ref r) if matches!(**r, Formula::Quant(..))));
        let b = parse("A j < q . seq[j] = 0").unwrap();
        assert!(matches!(b, Formula::Quant(_, _, _, ref body) if matches!(**body, Formula::Implies(..))));
    }

    #[test]
    fn compile_examples() {
        let t = tm();
        let env = CompilationEnv::for_sequence(&t, &["x"]);
        let d = compile(&parse("seq[x] = 1").unwrap(), &env).unwrap();
        assert!(accepts(&d, &[1]));
        assert!(accepts(&d, &[2]));
        assert!(!d.accepts_symbols(&[]));
        let s = compile(&parse("E x . seq[x] = 1").unwrap(), &CompilationEnv::for_sequence(&t, &[])).unwrap();
        assert_eq!(s.tracks(), 0);
        assert!(s.is_accepting(s.initial()));
        let taut = compile(&parse("x = x").unwrap(), &env).unwrap();
        assert_eq!(taut, Dfa::accept_all(t.radix(), 1, DigitOrder::Msd).unwrap());
    }

    #[test]
    fn sentence_examples() {
        let env = CompilationEnv::for_sequence(&tm(), &[]);
        assert!(evaluate_sentence(&parse("E i . seq[i] = 1").unwrap(), &env).unwrap());
        assert!(!evaluate_sentence(&parse("A i . seq[i] = 0").unwrap(), &env).unwrap());
        assert!(evaluate_sentence(&parse("A i . i = i").unwrap(), &env).unwrap());
        assert!(matches!(
            evaluate_sentence(&parse("x = 1").unwrap(), &env),
            Err(LogicError::FreeVariables(_))
        ));
        // Thue-Morse has no factor xxx: no cube of length-1 period
        assert!(!evaluate_sentence(
            &parse("E i . seq[i] = seq[i+1] & seq[i+1] = seq[i+2]").unwrap(),
            &env
        )
        .unwrap());
        // every n has n < m for some m
        assert!(evaluate_sentence(&parse("A n . E m . n < m").unwrap(), &env).unwrap());
        assert!(!evaluate_sentence(&parse("E n . A m . m <= n").unwrap(), &env).unwrap());
        assert!(evaluate_sentence(&parse("A x . A y . x + y = y + x").unwrap(), &env).unwrap());
    }

    #[test]
    fn environment_errors() {
        let t = tm();
        let f = parse("x = y").unwrap();
        assert!(matches!(
            compile(&f, &CompilationEnv::for_sequence(&t, &["x"])),
            Err(LogicError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            compile(&f, &CompilationEnv::for_sequence(&t, &["x", "y", "z"])),
            Err(LogicError::Mismatch(_))
        ));
        let g = parse("E x . E x . x = 0").unwrap();
        assert!(matches!(
            compile(&g, &CompilationEnv::for_sequence(&t, &[])),
            Err(LogicError::Shadowing { .. })
        ));
        let h = parse("x = 0 & E x . x = 1").unwrap();
        assert!(matches!(
            compile(&h, &CompilationEnv::for_sequence(&t, &["x"])),
            Err(LogicError::Shadowing { .. })
        ));
        let r = Radix::new(2).unwrap();
        assert!(matches!(
            compile(&parse("seq[x] = 0").unwrap(), &CompilationEnv::new(r, None, &["x"])),
            Err(LogicError::NoSequence)
        ));
    }

    #[test]
    fn track_order_follows_env() {
        let r = Radix::new(2).unwrap();
        let f = parse("x < y").unwrap();
        let xy = compile(&f, &CompilationEnv::new(r, None, &["x", "y"])).unwrap();
        let yx = compile(&f, &CompilationEnv::new(r, None, &["y", "x"])).unwrap();
        assert!(accepts(&xy, &[2, 5]));
        assert!(!accepts(&xy, &[5, 2]));
        assert!(accepts(&yx, &[5, 2]));
    }

    #[test]
    fn repeated_variables_and_constants() {
        let r = Radix::new(3).unwrap();
        let env = CompilationEnv::new(r, None, &["x", "y"]);
        let d = compile(&parse("x + x + 2 = y").unwrap(), &env).unwrap();
        for x in 0..30 {
            for y in 0..70 {
                assert_eq!(accepts(&d, &[x, y]), 2 * x + 2 == y);
            }
        }
    }

    const FUZZ_FORMULAS: &[&str] = &[
        "seq[x] = seq[y+1] | x + 2 < y",
        "E j < 4 . seq[x+j] != seq[y+j]",
        "A j < y . seq[x+j] = seq[x+y+j]",
        "x <= y & ~(seq[x] = 0) -> E z < 3 . seq[y+z] = 1",
        "x >= y + 1 | seq[x+y] = seq[2]",
    ];

    #[test]
    fn compiled_membership_matches_direct_evaluation() {
        let t = tm();
        let seq = t.prefix(200);
        let env = CompilationEnv::for_sequence(&t, &["x", "y"]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for text in FUZZ_FORMULAS {
            let f = parse(text).unwrap();
            let d = compile(&f, &env).unwrap();
            assert!(d.check_zero_invariance().unwrap(), "{text}");
            for _ in 0..1000 {
                let (x, y) = (rng.gen_range(0..40u64), rng.gen_range(0..40u64));
                let mut assignment = HashMap::from([
                    ("x".to_string(), BigUint::from(x)),
                    ("y".to_string(), BigUint::from(y)),
                ]);
                let expected = eval_direct(&f, &mut assignment, &seq, 50);
                assert_eq!(accepts(&d, &[x, y]), expected, "{text} at ({x}, {y})");
            }
        }
    }

    #[test]
    fn double_negation_and_quantifier_exchange() {
        let t = tm();
        let env = CompilationEnv::for_sequence(&t, &["x"]);
        for text in ["E y . seq[x+y] = seq[y]", "A y . y < x -> seq[y] = 0"] {
            let f = parse(text).unwrap();
            let nn = Formula::not(Formula::not(f.clone()));
            assert_eq!(compile(&f, &env).unwrap(), compile(&nn, &env).unwrap());
        }
        let a = parse("E y . E z . x + y = z & seq[z] = 1 & seq[y] = 0").unwrap();
        let b = parse("E z . E y . x + y = z & seq[z] = 1 & seq[y] = 0").unwrap();
        assert_eq!(compile(&a, &env).unwrap(), compile(&b, &env).unwrap());
    }

    #[test]
    fn relation_atoms_apply_to_terms() {
        let r = Radix::new(2).unwrap();
        let lt = Arc::new(arith::lt_rel(r).unwrap());
        let f = Formula::Relation {
            name: "lt".into(),
            dfa: lt,
            args: vec![
                Term::Add(Box::new(Term::var("x")), Box::new(Term::Const(1u32.into()))),
                Term::var("y"),
            ],
        };
        let d = compile(&f, &CompilationEnv::new(r, None, &["x", "y"])).unwrap();
        assert!(accepts(&d, &[1, 3]));
        assert!(!accepts(&d, &[2, 3]));
        let padded = DigitWord::from_symbols(r, 2, DigitOrder::Msd, vec![0, 0]).unwrap();
        assert!(d.accepts(&padded.concat(&encode_tuple(&[1u32.into(), 3u32.into()], r))).unwrap());
    }
}
