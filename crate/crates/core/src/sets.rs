//! Symbolic subsets of a group and their exact evaluation on windows.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{Elem, GroupSpec, Window};
use crate::semigroup::SemigroupOracle;

/// Default number of extra word-length levels granted to semigroup
/// enumeration beyond the window radius.
pub const DEFAULT_SLACK: u32 = 4;

/// Three-valued membership answer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Membership {
    In,
    Out,
    /// Semigroup enumeration ran out of budget before deciding.
    Unknown,
}

impl Membership {
    fn from_bool(b: bool) -> Self {
        if b {
            Membership::In
        } else {
            Membership::Out
        }
    }

    fn not(self) -> Self {
        match self {
            Membership::In => Membership::Out,
            Membership::Out => Membership::In,
            Membership::Unknown => Membership::Unknown,
        }
    }

    fn and(self, other: Membership) -> Self {
        match (self, other) {
            (Membership::Out, _) | (_, Membership::Out) => Membership::Out,
            (Membership::In, Membership::In) => Membership::In,
            _ => Membership::Unknown,
        }
    }

    fn or(self, other: Membership) -> Self {
        self.not().and(other.not()).not()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SetExpr {
    All,
    Empty,
    /// Sorted, without duplicates.
    Finite(Vec<Elem>),
    Ball(u32),
    Translate(Elem, Box<SetExpr>),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersect(Box<SetExpr>, Box<SetExpr>),
    Diff(Box<SetExpr>, Box<SetExpr>),
    Semigroup { gens: Vec<Elem>, include_identity: bool },
    /// `{(a, b) : alpha <= a * gamma + b <= beta}` in the affine group.
    Slab { alpha: BigRational, beta: BigRational, gamma: BigRational },
    /// The first `n` elements of the greedy small-set sequence.
    Greedy(usize),
}

impl SetExpr {
    pub fn finite(elems: impl IntoIterator<Item = Elem>) -> SetExpr {
        let mut v: Vec<Elem> = elems.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            SetExpr::Empty
        } else {
            SetExpr::Finite(v)
        }
    }

    pub fn semigroup(gens: Vec<Elem>, include_identity: bool) -> SetExpr {
        SetExpr::Semigroup { gens, include_identity }
    }

    pub fn slab(alpha: BigRational, beta: BigRational, gamma: BigRational) -> SetExpr {
        SetExpr::Slab { alpha, beta, gamma }
    }

    /// `t * a`, collapsing nested translations and translating finite sets
    /// eagerly.
    pub fn translate(t: &Elem, a: &SetExpr) -> SetExpr {
        if t.is_identity() {
            return a.clone();
        }
        match a {
            SetExpr::All | SetExpr::Empty => a.clone(),
            SetExpr::Finite(v) => SetExpr::finite(v.iter().map(|x| t.op(x))),
            SetExpr::Translate(u, inner) => SetExpr::translate(&t.op(u), inner),
            _ => SetExpr::Translate(t.clone(), Box::new(a.clone())),
        }
    }

    pub fn union(a: SetExpr, b: SetExpr) -> SetExpr {
        match (a, b) {
            (SetExpr::Empty, x) | (x, SetExpr::Empty) => x,
            (SetExpr::All, _) | (_, SetExpr::All) => SetExpr::All,
            (SetExpr::Finite(x), SetExpr::Finite(y)) => SetExpr::finite(x.into_iter().chain(y)),
            (a, b) if a == b => a,
            (a, b) => SetExpr::Union(Box::new(a), Box::new(b)),
        }
    }

    pub fn intersect(a: SetExpr, b: SetExpr) -> SetExpr {
        match (a, b) {
            (SetExpr::Empty, _) | (_, SetExpr::Empty) => SetExpr::Empty,
            (SetExpr::All, x) | (x, SetExpr::All) => x,
            (SetExpr::Finite(x), SetExpr::Finite(y)) => SetExpr::finite(x.into_iter().filter(|g| y.binary_search(g).is_ok())),
            (a, b) if a == b => a,
            (a, b) => SetExpr::Intersect(Box::new(a), Box::new(b)),
        }
    }

    pub fn diff(a: SetExpr, b: SetExpr) -> SetExpr {
        match (a, b) {
            (SetExpr::Empty, _) | (_, SetExpr::All) => SetExpr::Empty,
            (x, SetExpr::Empty) => x,
            (SetExpr::Finite(x), SetExpr::Finite(y)) => SetExpr::finite(x.into_iter().filter(|g| y.binary_search(g).is_err())),
            (a, b) if a == b => SetExpr::Empty,
            (a, b) => SetExpr::Diff(Box::new(a), Box::new(b)),
        }
    }

    pub fn union_all(parts: impl IntoIterator<Item = SetExpr>) -> SetExpr {
        parts.into_iter().fold(SetExpr::Empty, SetExpr::union)
    }

    pub fn parse(group: GroupSpec, text: &str) -> Result<SetExpr> {
        let mut p = Parser { group, text, pos: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos < text.len() {
            return Err(Error::parse(p.pos, format!("unexpected '{}'", &text[p.pos..])));
        }
        Ok(e)
    }

    fn visit_elems<'a>(&'a self, out: &mut Vec<&'a Elem>) {
        match self {
            SetExpr::Finite(v) => out.extend(v),
            SetExpr::Translate(t, a) => {
                out.push(t);
                a.visit_elems(out);
            }
            SetExpr::Union(a, b) | SetExpr::Intersect(a, b) | SetExpr::Diff(a, b) => {
                a.visit_elems(out);
                b.visit_elems(out);
            }
            SetExpr::Semigroup { gens, .. } => out.extend(gens),
            _ => {}
        }
    }

    fn has_slab(&self) -> bool {
        match self {
            SetExpr::Slab { .. } => true,
            SetExpr::Translate(_, a) => a.has_slab(),
            SetExpr::Union(a, b) | SetExpr::Intersect(a, b) | SetExpr::Diff(a, b) => a.has_slab() || b.has_slab(),
            _ => false,
        }
    }

    /// Checks that every element mentioned belongs to `group` and that
    /// slabs only occur in the affine group.
    pub fn validate(&self, group: GroupSpec) -> Result<()> {
        let mut elems = Vec::new();
        self.visit_elems(&mut elems);
        for g in elems {
            group.check(g)?;
        }
        if self.has_slab() && group != GroupSpec::DyadicAffine {
            return Err(Error::Unsupported(format!("slab sets need the affine group, not {group}")));
        }
        Ok(())
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn join(elems: &[Elem]) -> String {
    elems.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::All => write!(f, "all"),
            SetExpr::Empty => write!(f, "empty"),
            SetExpr::Finite(v) => write!(f, "finite{{{}}}", join(v)),
            SetExpr::Ball(r) => write!(f, "ball({r})"),
            SetExpr::Translate(t, a) => write!(f, "{t}*{a}"),
            SetExpr::Union(a, b) => write!(f, "({a}|{b})"),
            SetExpr::Intersect(a, b) => write!(f, "({a}&{b})"),
            SetExpr::Diff(a, b) => write!(f, "({a}\\{b})"),
            SetExpr::Semigroup { gens, include_identity } => {
                write!(f, "semigroup({}{})", join(gens), if *include_identity { ";e" } else { "" })
            }
            SetExpr::Slab { alpha, beta, gamma } => {
                write!(f, "slab({},{},{})", fmt_rational(alpha), fmt_rational(beta), fmt_rational(gamma))
            }
            SetExpr::Greedy(n) => write!(f, "greedy({n})"),
        }
    }
}

struct Parser<'a> {
    group: GroupSpec,
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.text.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<SetExpr> {
        let mut acc = self.term()?;
        while self.eat(b'|') {
            let rhs = self.term()?;
            acc = SetExpr::Union(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SetExpr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'&') {
                let rhs = self.factor()?;
                acc = SetExpr::Intersect(Box::new(acc), Box::new(rhs));
            } else if self.eat(b'\\') {
                let rhs = self.factor()?;
                acc = SetExpr::Diff(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn elem(&mut self) -> Result<Elem> {
        self.ws();
        let (g, used) = self.group.parse_elem_prefix(&self.text[self.pos..], self.pos)?;
        self.pos += used;
        Ok(g)
    }

    fn factor(&mut self) -> Result<SetExpr> {
        self.ws();
        let start = self.pos;
        if let Ok((t, used)) = self.group.parse_elem_prefix(&self.text[start..], start) {
            self.pos = start + used;
            if self.eat(b'*') {
                let inner = self.factor()?;
                return Ok(SetExpr::Translate(t, Box::new(inner)));
            }
            self.pos = start;
        }
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        self.atom()
    }

    fn ident(&mut self) -> &str {
        self.ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn natural(&mut self) -> Result<u64> {
        self.ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.text[start..self.pos].parse().map_err(|_| Error::parse(start, "expected a nonnegative integer"))
    }

    fn rational(&mut self) -> Result<BigRational> {
        self.ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut end = self.pos;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || b"+-/ ".contains(&bytes[end])) {
            end += 1;
        }
        let raw = self.text[start..end].trim_end();
        let (p, q) = match raw.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (raw, "1"),
        };
        let p: BigInt = p.parse().map_err(|_| Error::parse(start, "expected a rational p/q"))?;
        let q: BigInt = q.parse().map_err(|_| Error::parse(start, "expected a rational p/q"))?;
        if q.is_zero() {
            return Err(Error::parse(start, "zero denominator"));
        }
        self.pos = start + raw.len();
        Ok(BigRational::new(p, q))
    }

    fn elem_list(&mut self, terminators: &[u8]) -> Result<Vec<Elem>> {
        let mut out = Vec::new();
        if self.peek().is_some_and(|c| terminators.contains(&c)) {
            return Ok(out);
        }
        loop {
            out.push(self.elem()?);
            if !self.eat(b',') {
                return Ok(out);
            }
        }
    }

    fn atom(&mut self) -> Result<SetExpr> {
        let start = self.pos;
        let name = self.ident().to_string();
        match name.as_str() {
            "all" => Ok(SetExpr::All),
            "empty" => Ok(SetExpr::Empty),
            "finite" => {
                self.expect(b'{')?;
                let elems = self.elem_list(b"}")?;
                self.expect(b'}')?;
                Ok(SetExpr::finite(elems))
            }
            "ball" => {
                self.expect(b'(')?;
                let at = self.pos;
                let r = u32::try_from(self.natural()?).map_err(|_| Error::parse(at, "radius too large"))?;
                self.expect(b')')?;
                Ok(SetExpr::Ball(r))
            }
            "semigroup" => {
                self.expect(b'(')?;
                let gens = self.elem_list(b";)")?;
                if gens.is_empty() {
                    return Err(Error::parse(self.pos, "semigroup needs at least one generator"));
                }
                let include_identity = if self.eat(b';') {
                    let at = self.pos;
                    if self.ident() != "e" {
                        return Err(Error::parse(at, "expected 'e' after ';'"));
                    }
                    true
                } else {
                    false
                };
                self.expect(b')')?;
                Ok(SetExpr::Semigroup { gens, include_identity })
            }
            "slab" => {
                self.expect(b'(')?;
                let alpha = self.rational()?;
                self.expect(b',')?;
                let beta = self.rational()?;
                self.expect(b',')?;
                let gamma = self.rational()?;
                self.expect(b')')?;
                Ok(SetExpr::Slab { alpha, beta, gamma })
            }
            "greedy" => {
                self.expect(b'(')?;
                let at = self.pos;
                let n = self.natural()?;
                if n == 0 {
                    return Err(Error::parse(at, "greedy count must be positive"));
                }
                self.expect(b')')?;
                Ok(SetExpr::Greedy(n as usize))
            }
            "" => Err(Error::parse(start, "expected a set expression")),
            other => Err(Error::parse(start, format!("unknown set constructor '{other}'"))),
        }
    }
}

/// Result of filtering a window by a set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Materialized {
    /// Members, in window order.
    pub elements: Vec<Elem>,
    /// Window points whose membership could not be decided within budget.
    pub undecided: Vec<Elem>,
}

impl Materialized {
    pub fn is_exact(&self) -> bool {
        self.undecided.is_empty()
    }

    /// The member list, or a budget error naming the first undecided point.
    pub fn exact(self) -> Result<Vec<Elem>> {
        match self.undecided.first() {
            Some(g) => Err(Error::Budget { elem: g.to_string() }),
            None => Ok(self.elements),
        }
    }
}

/// Evaluation context for set expressions over one group. Holds the
/// semigroup budget slack and internally synchronized caches.
pub struct Universe {
    group: GroupSpec,
    slack: u32,
    semigroups: Mutex<HashMap<(Vec<Elem>, bool), Arc<SemigroupOracle>>>,
    greedy: Mutex<HashMap<usize, Arc<HashSet<Elem>>>>,
}

impl Universe {
    pub fn new(group: GroupSpec) -> Self {
        Universe::with_slack(group, DEFAULT_SLACK)
    }

    pub fn with_slack(group: GroupSpec, slack: u32) -> Self {
        Universe { group, slack, semigroups: Mutex::new(HashMap::new()), greedy: Mutex::new(HashMap::new()) }
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn slack(&self) -> u32 {
        self.slack
    }

    /// Word-length budget for semigroup enumeration on `w`.
    pub fn budget(&self, w: &Window) -> u32 {
        w.radius() + self.slack
    }

    fn oracle(&self, gens: &[Elem], include_identity: bool) -> Arc<SemigroupOracle> {
        let mut map = self.semigroups.lock().unwrap();
        map.entry((gens.to_vec(), include_identity))
            .or_insert_with(|| Arc::new(SemigroupOracle::new(self.group, gens, include_identity)))
            .clone()
    }

    fn greedy_set(&self, n: usize) -> Option<Arc<HashSet<Elem>>> {
        if let Some(s) = self.greedy.lock().unwrap().get(&n) {
            return Some(s.clone());
        }
        let elems = crate::smallsets::greedy_small_set(self.group, n).ok()?;
        let set = Arc::new(elems.into_iter().collect::<HashSet<_>>());
        self.greedy.lock().unwrap().insert(n, set.clone());
        Some(set)
    }

    /// Whether semigroup membership for these generators is decided exactly
    /// regardless of budget.
    pub fn semigroup_is_exact(&self, gens: &[Elem]) -> bool {
        self.oracle(gens, false).is_exact()
    }

    pub fn member(&self, a: &SetExpr, g: &Elem, budget: u32) -> Membership {
        match a {
            SetExpr::All => Membership::In,
            SetExpr::Empty => Membership::Out,
            SetExpr::Finite(v) => Membership::from_bool(v.binary_search(g).is_ok()),
            SetExpr::Ball(r) => Membership::from_bool(self.group.word_length(g, *r).is_some_and(|l| l <= *r)),
            SetExpr::Translate(t, inner) => self.member(inner, &t.inverse().op(g), budget),
            SetExpr::Union(x, y) => {
                let m = self.member(x, g, budget);
                if m == Membership::In {
                    return m;
                }
                m.or(self.member(y, g, budget))
            }
            SetExpr::Intersect(x, y) => {
                let m = self.member(x, g, budget);
                if m == Membership::Out {
                    return m;
                }
                m.and(self.member(y, g, budget))
            }
            SetExpr::Diff(x, y) => {
                let m = self.member(x, g, budget);
                if m == Membership::Out {
                    return m;
                }
                m.and(self.member(y, g, budget).not())
            }
            SetExpr::Semigroup { gens, include_identity } => self.oracle(gens, *include_identity).member(g, budget),
            SetExpr::Slab { alpha, beta, gamma } => match g {
                Elem::Affine { log_a, b } => {
                    let a = if *log_a >= 0 {
                        BigRational::from_integer(BigInt::one() << *log_a as u64)
                    } else {
                        BigRational::new(BigInt::one(), BigInt::one() << log_a.unsigned_abs())
                    };
                    let v = a * gamma + b.to_rational();
                    Membership::from_bool(alpha <= &v && &v <= beta)
                }
                _ => Membership::Out,
            },
            SetExpr::Greedy(n) => match self.greedy_set(*n) {
                Some(s) => Membership::from_bool(s.contains(g)),
                None => Membership::Unknown,
            },
        }
    }

    /// Exact membership, or a budget error.
    pub fn contains(&self, a: &SetExpr, g: &Elem, budget: u32) -> Result<bool> {
        match self.member(a, g, budget) {
            Membership::In => Ok(true),
            Membership::Out => Ok(false),
            Membership::Unknown => Err(Error::Budget { elem: g.to_string() }),
        }
    }

    pub fn materialize(&self, a: &SetExpr, w: &Window) -> Materialized {
        let budget = self.budget(w);
        let mut out = Materialized::default();
        if let SetExpr::Finite(v) = a {
            out.elements = w.elements().iter().filter(|g| v.binary_search(g).is_ok()).cloned().collect();
            return out;
        }
        for g in w.elements() {
            match self.member(a, g, budget) {
                Membership::In => out.elements.push(g.clone()),
                Membership::Out => {}
                Membership::Unknown => out.undecided.push(g.clone()),
            }
        }
        out
    }
}
