//! Exact group arithmetic for free groups, free abelian groups and the
//! dyadic affine group `<2x, x+1>`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use smallvec::{smallvec, SmallVec};
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Letters used for free generators; `e` is reserved for the identity.
pub const FREE_LETTERS: &[u8] = b"abcdfghijklmnopqrstuvwxyz";

/// Coordinates of an element of `Z^d`, stored inline for small `d`.
pub type Coords = SmallVec<[i64; 4]>;

/// A group element in canonical normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Elem {
    /// Freely reduced word; letter `i` (1-based) is `+i`, its inverse `-i`.
    Word(Vec<i8>),
    /// Integer vector in `Z^d`.
    Vector(Coords),
    /// The affine map `x -> 2^log_a * x + b`.
    Affine { log_a: i64, b: Dyadic },
}

impl Elem {
    pub fn word(letters: &[i8]) -> Elem {
        Elem::Word(reduce(letters.iter().copied()))
    }

    pub fn vector(coords: &[i64]) -> Elem {
        Elem::Vector(Coords::from_slice(coords))
    }

    pub fn affine(log_a: i64, b: Dyadic) -> Elem {
        Elem::Affine { log_a, b }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Elem::Word(w) => w.is_empty(),
            Elem::Vector(v) => v.iter().all(|x| *x == 0),
            Elem::Affine { log_a, b } => *log_a == 0 && b.is_zero(),
        }
    }

    /// Group product `self * other`.
    ///
    /// Panics if the operands come from different group families; use
    /// [`GroupSpec::mul`] for checked multiplication of untrusted input.
    pub fn op(&self, other: &Elem) -> Elem {
        match (self, other) {
            (Elem::Word(x), Elem::Word(y)) => {
                let mut out = x.clone();
                for &l in y {
                    if out.last() == Some(&-l) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                Elem::Word(out)
            }
            (Elem::Vector(x), Elem::Vector(y)) => {
                assert_eq!(x.len(), y.len(), "mixed-rank vectors");
                Elem::Vector(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            // (a1, b1)(a2, b2) = (a1 a2, a1 b2 + b1): composition x -> g(h(x)).
            (Elem::Affine { log_a: k1, b: b1 }, Elem::Affine { log_a: k2, b: b2 }) => Elem::Affine {
                log_a: k1 + k2,
                b: b2.shl(*k1).add(b1),
            },
            _ => panic!("mixed-group operands {self} and {other}"),
        }
    }

    pub fn inverse(&self) -> Elem {
        match self {
            Elem::Word(w) => Elem::Word(w.iter().rev().map(|l| -l).collect()),
            Elem::Vector(v) => Elem::Vector(v.iter().map(|x| -x).collect()),
            Elem::Affine { log_a, b } => Elem::Affine { log_a: -log_a, b: b.shl(-log_a).neg() },
        }
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Elem {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = identity_like(self);
        for _ in 0..n.unsigned_abs() {
            acc = acc.op(&base);
        }
        acc
    }

    /// `self * x * self^-1`.
    pub fn conjugate(&self, x: &Elem) -> Elem {
        self.op(x).op(&self.inverse())
    }
}

fn identity_like(g: &Elem) -> Elem {
    match g {
        Elem::Word(_) => Elem::Word(Vec::new()),
        Elem::Vector(v) => Elem::Vector(smallvec![0; v.len()]),
        Elem::Affine { .. } => Elem::Affine { log_a: 0, b: Dyadic::zero() },
    }
}

fn reduce(letters: impl IntoIterator<Item = i8>) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::new();
    for l in letters {
        if l == 0 {
            continue;
        }
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn letter_name(l: i8) -> char {
    FREE_LETTERS[(l.unsigned_abs() - 1) as usize] as char
}

fn letter_index(c: u8) -> Option<i8> {
    FREE_LETTERS.iter().position(|&x| x == c).map(|i| (i + 1) as i8)
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Word(w) if w.is_empty() => write!(f, "e"),
            Elem::Word(w) => {
                for (i, &l) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", letter_name(l))?;
                    if l < 0 {
                        write!(f, "^-1")?;
                    }
                }
                Ok(())
            }
            Elem::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Elem::Affine { log_a, b } => write!(f, "({},{})", Dyadic::from_int(1).shl(*log_a), b),
        }
    }
}

/// The finitely generated groups supported by the toolkit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum GroupSpec {
    /// Free group on `k` letters.
    Free(u8),
    /// Free abelian group `Z^d`.
    Zn(u8),
    /// The subgroup `<2x, x+1>` of the affine group of the line.
    DyadicAffine,
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Free(k) => write!(f, "free:{k}"),
            GroupSpec::Zn(d) => write!(f, "zn:{d}"),
            GroupSpec::DyadicAffine => write!(f, "bs12"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "bs12" || s == "dyadic-affine" {
            return Ok(GroupSpec::DyadicAffine);
        }
        let (kind, n) = s.split_once(':').ok_or_else(|| Error::parse(0, format!("unknown group spec '{s}'")))?;
        let n: u8 = n
            .trim()
            .parse()
            .map_err(|_| Error::parse(kind.len() + 1, format!("bad rank in '{s}'")))?;
        match kind.trim() {
            "free" if (1..=FREE_LETTERS.len() as u8).contains(&n) => Ok(GroupSpec::Free(n)),
            "zn" if n >= 1 => Ok(GroupSpec::Zn(n)),
            _ => Err(Error::parse(0, format!("unknown or out-of-range group spec '{s}'"))),
        }
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl GroupSpec {
    pub fn identity(&self) -> Elem {
        match self {
            GroupSpec::Free(_) => Elem::Word(Vec::new()),
            GroupSpec::Zn(d) => Elem::Vector(smallvec![0; *d as usize]),
            GroupSpec::DyadicAffine => Elem::Affine { log_a: 0, b: Dyadic::zero() },
        }
    }

    /// Canonical symmetric generating set, each generator followed by its inverse.
    pub fn generators(&self) -> Vec<Elem> {
        match self {
            GroupSpec::Free(k) => (1..=*k as i8).flat_map(|i| [Elem::Word(vec![i]), Elem::Word(vec![-i])]).collect(),
            GroupSpec::Zn(d) => {
                let d = *d as usize;
                (0..d)
                    .flat_map(|i| {
                        let mut p: Coords = smallvec![0; d];
                        p[i] = 1;
                        let n = p.iter().map(|x| -x).collect();
                        [Elem::Vector(p), Elem::Vector(n)]
                    })
                    .collect()
            }
            GroupSpec::DyadicAffine => vec![
                Elem::affine(1, Dyadic::zero()),
                Elem::affine(-1, Dyadic::zero()),
                Elem::affine(0, Dyadic::from_int(1)),
                Elem::affine(0, Dyadic::from_int(-1)),
            ],
        }
    }

    /// Checks that `g` is an element of this group.
    pub fn check(&self, g: &Elem) -> Result<()> {
        let ok = match (self, g) {
            (GroupSpec::Free(k), Elem::Word(w)) => {
                w.iter().all(|l| *l != 0 && l.unsigned_abs() <= *k) && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupSpec::Zn(d), Elem::Vector(v)) => v.len() == *d as usize,
            (GroupSpec::DyadicAffine, Elem::Affine { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::WrongGroup { elem: g.to_string(), group: self.to_string() })
        }
    }

    pub fn mul(&self, g: &Elem, h: &Elem) -> Result<Elem> {
        if self.check(g).is_err() || self.check(h).is_err() {
            return Err(Error::MixedGroups(format!("{g} * {h} in {self}")));
        }
        Ok(g.op(h))
    }

    pub fn inv(&self, g: &Elem) -> Result<Elem> {
        self.check(g)?;
        Ok(g.inverse())
    }

    /// Word length with respect to [`GroupSpec::generators`]. For the affine
    /// group this is a breadth-first search and gives up beyond `cap`.
    pub fn word_length(&self, g: &Elem, cap: u32) -> Option<u32> {
        match g {
            Elem::Word(w) => Some(w.len() as u32),
            Elem::Vector(v) => Some(v.iter().map(|x| x.unsigned_abs()).sum::<u64>() as u32),
            Elem::Affine { .. } => balls().length_of(*self, g, cap),
        }
    }

    /// All elements of word length exactly `r`, in canonical order.
    pub fn sphere(&self, r: u32) -> Arc<Vec<Elem>> {
        balls().level(*self, r)
    }

    /// The ball of radius `r` in canonical (length, then discovery) order.
    pub fn ball(&self, r: u32) -> Window {
        let mut elements = Vec::new();
        for i in 0..=r {
            elements.extend(self.sphere(i).iter().cloned());
        }
        Window::from_parts(*self, r, elements, false)
    }

    /// Canonical enumeration of the whole group, sphere by sphere.
    pub fn enumerate(&self) -> impl Iterator<Item = Elem> + '_ {
        (0u32..).flat_map(move |r| {
            let s = self.sphere(r);
            (0..s.len()).map(move |i| s[i].clone())
        })
    }

    pub fn parse_elem(&self, text: &str) -> Result<Elem> {
        let (g, used) = self.parse_elem_prefix(text, 0)?;
        let rest = &text[used..];
        if let Some(off) = rest.find(|c: char| !c.is_whitespace()) {
            return Err(Error::parse(used + off, format!("unexpected trailing input '{}'", &rest[off..])));
        }
        Ok(g)
    }

    /// Parses an element at the start of `text`; returns it with the number
    /// of bytes consumed. `base` offsets reported error positions.
    pub fn parse_elem_prefix(&self, text: &str, base: usize) -> Result<(Elem, usize)> {
        let mut cur = Cursor { s: text.as_bytes(), pos: 0, base };
        let g = match self {
            GroupSpec::Free(k) => cur.free_word(*k)?,
            GroupSpec::Zn(d) => cur.vector(*d as usize)?,
            GroupSpec::DyadicAffine => cur.affine()?,
        };
        Ok((g, cur.pos))
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    base: usize,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.base + self.pos, msg)
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.err("expected integer"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        text.parse().map_err(|_| self.err("bad integer"))
    }

    fn free_word(&mut self, k: u8) -> Result<Elem> {
        let mut letters = Vec::new();
        let mut tokens = 0;
        loop {
            let save = self.pos;
            self.ws();
            let Some(c) = self.peek() else {
                self.pos = save;
                break;
            };
            let next_alpha = self.s.get(self.pos + 1).is_some_and(|c| c.is_ascii_alphanumeric());
            if c == b'e' && !next_alpha {
                self.pos += 1;
                tokens += 1;
                continue;
            }
            match letter_index(c) {
                Some(i) if i as u8 <= k => {
                    self.pos += 1;
                    let mut exp: i64 = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let n = self.integer()?;
                        exp = i64::try_from(n).map_err(|_| self.err("exponent too large"))?;
                    }
                    let l = if exp < 0 { -i } else { i };
                    for _ in 0..exp.unsigned_abs() {
                        letters.push(l);
                    }
                    tokens += 1;
                }
                _ => {
                    self.pos = save;
                    break;
                }
            }
        }
        if tokens == 0 {
            return Err(self.err(format!("expected a word in free:{k}")));
        }
        Ok(Elem::Word(reduce(letters)))
    }

    fn vector(&mut self, d: usize) -> Result<Elem> {
        self.ws();
        if d == 1 && self.peek() != Some(b'(') {
            let n = self.integer()?;
            return Ok(Elem::vector(&[i64::try_from(n).map_err(|_| self.err("integer too large"))?]));
        }
        self.expect(b'(')?;
        let mut out = Coords::with_capacity(d);
        for i in 0..d {
            if i > 0 {
                self.expect(b',')?;
            }
            let n = self.integer()?;
            out.push(i64::try_from(n).map_err(|_| self.err("integer too large"))?);
        }
        self.expect(b')')?;
        Ok(Elem::Vector(out))
    }

    fn dyadic(&mut self) -> Result<Dyadic> {
        let p = self.integer()?;
        self.ws();
        if self.peek() != Some(b'/') {
            return Ok(Dyadic::new(p, 0));
        }
        self.pos += 1;
        self.ws();
        let at = self.pos;
        let q = if self.s[self.pos..].starts_with(b"2^") {
            self.pos += 2;
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| self.err("bad power of two"))?;
            BigInt::one() << k
        } else {
            self.integer()?
        };
        Dyadic::from_ratio(p, q).ok_or_else(|| Error::parse(self.base + at, "denominator must be a power of two"))
    }

    fn affine(&mut self) -> Result<Elem> {
        self.expect(b'(')?;
        let at = self.pos;
        let a = self.dyadic()?;
        self.expect(b',')?;
        let b = self.dyadic()?;
        self.expect(b')')?;
        let log_a = power_of_two_log(&a).ok_or_else(|| Error::parse(self.base + at, "slope must be a power of two"))?;
        Ok(Elem::affine(log_a, b))
    }
}

fn power_of_two_log(a: &Dyadic) -> Option<i64> {
    let n = a.numerator();
    if !n.is_positive() {
        return None;
    }
    let tz = n.trailing_zeros()?;
    if (n >> tz) != BigInt::one() {
        return None;
    }
    Some(tz as i64 - a.denominator_exponent() as i64)
}

struct BallLevels {
    levels: Vec<Arc<Vec<Elem>>>,
    length: HashMap<Elem, u32>,
}

struct BallCache {
    inner: Mutex<HashMap<GroupSpec, BallLevels>>,
}

fn balls() -> &'static BallCache {
    static CACHE: OnceLock<BallCache> = OnceLock::new();
    CACHE.get_or_init(|| BallCache { inner: Mutex::new(HashMap::new()) })
}

impl BallCache {
    fn with_levels<R>(&self, group: GroupSpec, r: u32, f: impl FnOnce(&BallLevels) -> R) -> R {
        let mut map = self.inner.lock().unwrap();
        let entry = map.entry(group).or_insert_with(|| {
            let e = group.identity();
            let mut length = HashMap::new();
            length.insert(e.clone(), 0);
            BallLevels { levels: vec![Arc::new(vec![e])], length }
        });
        let gens = group.generators();
        while entry.levels.len() <= r as usize {
            let depth = entry.levels.len() as u32;
            let prev = entry.levels.last().unwrap().clone();
            let mut next = Vec::new();
            for x in prev.iter() {
                for s in &gens {
                    let y = x.op(s);
                    if !entry.length.contains_key(&y) {
                        entry.length.insert(y.clone(), depth);
                        next.push(y);
                    }
                }
            }
            entry.levels.push(Arc::new(next));
        }
        f(entry)
    }

    fn level(&self, group: GroupSpec, r: u32) -> Arc<Vec<Elem>> {
        self.with_levels(group, r, |l| l.levels[r as usize].clone())
    }

    fn length_of(&self, group: GroupSpec, g: &Elem, cap: u32) -> Option<u32> {
        for r in 0..=cap {
            if let Some(n) = self.with_levels(group, r, |l| l.length.get(g).copied()) {
                return Some(n);
            }
        }
        None
    }
}

/// A finite region of the group on which certificates are checked.
#[derive(Clone, Debug)]
pub struct Window {
    group: GroupSpec,
    radius: u32,
    elements: Vec<Elem>,
    lookup: HashSet<Elem>,
    explicit: bool,
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.radius == other.radius && self.explicit == other.explicit && self.elements == other.elements
    }
}

impl Eq for Window {}

impl Window {
    fn from_parts(group: GroupSpec, radius: u32, elements: Vec<Elem>, explicit: bool) -> Self {
        let lookup = elements.iter().cloned().collect();
        Window { group, radius, elements, lookup, explicit }
    }

    /// An explicit finite window. `radius` is the word-length depth used for
    /// semigroup membership budgets.
    pub fn explicit(group: GroupSpec, elements: Vec<Elem>, radius: u32) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &elements {
            group.check(g)?;
            if !seen.insert(g.clone()) {
                return Err(Error::Precondition(format!("window element {g} listed twice")));
            }
        }
        Ok(Window::from_parts(group, radius, elements, true))
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &Elem) -> bool {
        self.lookup.contains(g)
    }

    /// Hex SHA-256 over the group and the ordered element list.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.group.to_string().as_bytes());
        for g in &self.elements {
            h.update(b"\n");
            h.update(g.to_string().as_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Positive words of length at most `len` in `gens`, in breadth-first order
/// with duplicates removed (as elements).
pub fn positive_words(gens: &[Elem], identity: &Elem, len: u32) -> Vec<Elem> {
    let mut out = vec![identity.clone()];
    let mut seen: HashSet<Elem> = out.iter().cloned().collect();
    let mut frontier = out.clone();
    for _ in 0..len {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = x.op(g);
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
