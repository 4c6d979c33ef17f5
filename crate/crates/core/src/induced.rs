//! Induced actions `Y = X × Γ/Γ₀` and token-level transport of
//! paradoxical witnesses from a subgroup to the ambient group.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Elem, GroupSpec};
use crate::report::ValidationReport;

/// A subgroup `Γ₀` with a canonical transversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupSpec {
    /// `<w>` in a free group, stored as `w = c v c^-1` with `v` cyclically
    /// reduced.
    Cyclic { rank: u8, w: Elem, conj: Vec<i8>, core: Vec<i8> },
    /// Vectors of `Z^d` supported on the listed coordinates.
    Coords { dim: u8, coords: Vec<usize> },
    /// `{(1, b)}` in the affine group.
    Kernel,
}

impl SubgroupSpec {
    pub fn cyclic(group: GroupSpec, w: Elem) -> Result<Self> {
        let (GroupSpec::Free(rank), Elem::Word(letters)) = (group, &w) else {
            return Err(Error::Unsupported(format!("cyclic subgroups need a free group, not {group}")));
        };
        group.check(&w)?;
        if letters.is_empty() {
            return Err(Error::Unsupported("the trivial subgroup has no cyclic generator".into()));
        }
        let mut i = 0;
        let mut j = letters.len();
        while j - i >= 2 && letters[i] == -letters[j - 1] {
            i += 1;
            j -= 1;
        }
        Ok(SubgroupSpec::Cyclic { rank, conj: letters[..i].to_vec(), core: letters[i..j].to_vec(), w })
    }

    pub fn coords(group: GroupSpec, coords: Vec<usize>) -> Result<Self> {
        let GroupSpec::Zn(dim) = group else {
            return Err(Error::Unsupported(format!("coordinate subgroups need zn, not {group}")));
        };
        if coords.iter().any(|&c| c >= dim as usize) {
            return Err(Error::Unsupported(format!("coordinate out of range for {group}")));
        }
        let mut coords = coords;
        coords.sort_unstable();
        coords.dedup();
        Ok(SubgroupSpec::Coords { dim, coords })
    }

    pub fn parse(group: GroupSpec, text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "kernel" {
            return if group == GroupSpec::DyadicAffine {
                Ok(SubgroupSpec::Kernel)
            } else {
                Err(Error::Unsupported(format!("the kernel subgroup needs bs12, not {group}")))
            };
        }
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| Error::Unsupported(format!("unknown subgroup '{text}'")))?;
        match kind {
            "cyclic" => SubgroupSpec::cyclic(group, group.parse_elem(rest)?),
            "coords" => {
                let coords = rest
                    .split(',')
                    .map(|c| c.trim().parse::<usize>().map_err(|_| Error::parse(kind.len() + 1, "bad coordinate list")))
                    .collect::<Result<Vec<_>>>()?;
                SubgroupSpec::coords(group, coords)
            }
            _ => Err(Error::Unsupported(format!("unknown subgroup '{text}'"))),
        }
    }

    pub fn group(&self) -> GroupSpec {
        match self {
            SubgroupSpec::Cyclic { rank, .. } => GroupSpec::Free(*rank),
            SubgroupSpec::Coords { dim, .. } => GroupSpec::Zn(*dim),
            SubgroupSpec::Kernel => GroupSpec::DyadicAffine,
        }
    }

    /// `g = rep * r` with `r` in the subgroup and `rep` canonical for the
    /// coset `g Γ₀`.
    pub fn normalize(&self, g: &Elem) -> Result<(Elem, Elem)> {
        self.group().check(g)?;
        let rep = match (self, g) {
            (SubgroupSpec::Cyclic { conj, core, .. }, Elem::Word(_)) => {
                let c = Elem::Word(conj.clone());
                let v = Elem::Word(core.clone());
                let v_inv = v.inverse();
                // minimise |h v^k| over the coset h<v>, h = g c
                let mut h = g.op(&c);
                for (step, back) in [(&v, &v_inv), (&v_inv, &v)] {
                    while ends_with(&h, step) {
                        h = h.op(back);
                    }
                }
                let mut best: Option<Elem> = None;
                for k in -3..=3 {
                    let cand = h.op(&v.pow(k));
                    if best.as_ref().is_none_or(|b| shortlex_less(&cand, b)) {
                        best = Some(cand);
                    }
                }
                best.unwrap().op(&c.inverse())
            }
            (SubgroupSpec::Coords { coords, .. }, Elem::Vector(v)) => {
                let mut out = v.clone();
                for &i in coords {
                    out[i] = 0;
                }
                Elem::Vector(out)
            }
            (SubgroupSpec::Kernel, Elem::Affine { log_a, .. }) => Elem::affine(*log_a, crate::dyadic::Dyadic::zero()),
            _ => return Err(Error::Unsupported(format!("cannot normalize {g}"))),
        };
        let r = rep.inverse().op(g);
        Ok((rep, r))
    }

    pub fn contains(&self, g: &Elem) -> Result<bool> {
        Ok(self.normalize(g)?.0.is_identity())
    }
}

fn ends_with(h: &Elem, v: &Elem) -> bool {
    match (h, v) {
        (Elem::Word(h), Elem::Word(v)) => h.ends_with(v),
        _ => false,
    }
}

fn shortlex_less(x: &Elem, y: &Elem) -> bool {
    match (x, y) {
        (Elem::Word(a), Elem::Word(b)) => {
            let key = |w: &Vec<i8>| (w.len(), w.iter().map(|&l| (l.unsigned_abs(), l < 0)).collect::<Vec<_>>());
            key(a) < key(b)
        }
        _ => x < y,
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupSpec::Cyclic { w, .. } => write!(f, "cyclic:{w}"),
            SubgroupSpec::Coords { coords, .. } => {
                write!(f, "coords:{}", coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
            }
            SubgroupSpec::Kernel => write!(f, "kernel"),
        }
    }
}

/// Partial action of `Γ₀` on opaque tokens; the identity fixes everything.
#[derive(Clone, Debug, Default)]
pub struct ActionTable {
    entries: HashMap<(Elem, String), String>,
}

impl ActionTable {
    pub fn new() -> Self {
        ActionTable::default()
    }

    pub fn insert(&mut self, r: Elem, x: &str, y: &str) {
        self.entries.insert((r, x.to_string()), y.to_string());
    }

    pub fn act(&self, r: &Elem, x: &str) -> Result<String> {
        if r.is_identity() {
            return Ok(x.to_string());
        }
        self.entries
            .get(&(r.clone(), x.to_string()))
            .cloned()
            .ok_or_else(|| Error::IncompleteTable { r: r.to_string(), x: x.to_string() })
    }
}

/// A point `(t_α, x)` of the induced space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct YPoint {
    pub rep: Elem,
    pub x: String,
}

/// `s.(t_α, x) = (t_β, r.x)` where `s t_α = t_β r`.
pub fn induced_act(h: &SubgroupSpec, table: &ActionTable, s: &Elem, p: &YPoint) -> Result<YPoint> {
    let (rep, r) = h.normalize(&s.op(&p.rep))?;
    Ok(YPoint { rep, x: table.act(&r, &p.x)? })
}

/// A witness for `E` in a `Γ₀`-space, given by tokens and asserted facts:
/// the listed pairs of parts are disjoint and each family covers `E` after
/// translation. Part indices in the facts are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenWitness {
    pub set: String,
    pub parts: Vec<String>,
    pub translators: Vec<Elem>,
    pub disjoint: Vec<(usize, usize)>,
    pub covers: Vec<Vec<usize>>,
}

impl TokenWitness {
    fn split(&self) -> usize {
        self.covers.first().map_or(0, |c| c.len())
    }

    /// Shape checks: lengths agree, translators lie in `Γ₀`, every pair of
    /// parts is asserted disjoint, and the families are `1..n`, `n+1..n+m`.
    pub fn check_shape(&self, h: &SubgroupSpec) -> Result<()> {
        let k = self.parts.len();
        if self.translators.len() != k {
            return Err(Error::InvalidWitness(format!("{k} parts but {} translators", self.translators.len())));
        }
        for t in &self.translators {
            if !h.contains(t)? {
                return Err(Error::InvalidWitness(format!("translator {t} is not in {h}")));
            }
        }
        let n = self.split();
        let expect = [(1..=n).collect::<Vec<_>>(), (n + 1..=k).collect()];
        if self.covers.len() != 2 || self.covers[0] != expect[0] || self.covers[1] != expect[1] {
            return Err(Error::InvalidWitness("cover families must be 1..n and n+1..n+m".into()));
        }
        for i in 1..=k {
            for j in i + 1..=k {
                if !self.disjoint.contains(&(i, j)) && !self.disjoint.contains(&(j, i)) {
                    return Err(Error::InvalidWitness(format!("parts {i} and {j} are not asserted disjoint")));
                }
            }
        }
        if let Some(&(i, j)) = self.disjoint.iter().find(|&&(i, j)| i == 0 || j == 0 || i > k || j > k || i == j) {
            return Err(Error::InvalidWitness(format!("bad disjointness fact ({i},{j})")));
        }
        Ok(())
    }
}

/// The transported witness: `F = π({t}×E)`, `F_j = π({t}×E_j)` and
/// `s_j = t t_j t^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedWitness {
    pub t: Elem,
    pub set: (Elem, String),
    pub parts: Vec<(Elem, String)>,
    pub translators: Vec<Elem>,
    pub split: usize,
}

pub fn induce_witness(h: &SubgroupSpec, xw: &TokenWitness, t: &Elem) -> Result<InducedWitness> {
    h.group().check(t)?;
    xw.check_shape(h)?;
    let t_inv = t.inverse();
    Ok(InducedWitness {
        t: t.clone(),
        set: (t.clone(), xw.set.clone()),
        parts: xw.parts.iter().map(|e| (t.clone(), e.clone())).collect(),
        translators: xw.translators.iter().map(|tj| t.op(tj).op(&t_inv)).collect(),
        split: xw.split(),
    })
}

/// Token-level replay: `s_j t = t t_j`, every set lives in the `t`-fiber,
/// and the asserted facts have the required shape.
pub fn check_induced(h: &SubgroupSpec, xw: &TokenWitness, out: &InducedWitness) -> ValidationReport {
    let mut report = ValidationReport::new();
    report.record("facts", xw.check_shape(h).map_err(|e| e.to_string()));
    let lengths = out.parts.len() == xw.parts.len() && out.translators.len() == xw.translators.len();
    report.record("shape", if lengths { Ok(()) } else { Err("part counts differ".into()) });
    if !lengths {
        return report;
    }
    let conj = out
        .translators
        .iter()
        .zip(&xw.translators)
        .enumerate()
        .find(|(_, (sj, tj))| sj.op(&out.t) != out.t.op(tj))
        .map(|(j, _)| format!("s_{} t != t t_{}", j + 1, j + 1));
    report.record("conjugation", conj.map_or(Ok(()), Err));
    let fiber = std::iter::once(&out.set)
        .chain(&out.parts)
        .zip(std::iter::once(&xw.set).chain(&xw.parts))
        .find(|((rep, tok), x)| rep != &out.t || tok != *x)
        .map(|((rep, tok), _)| format!("({rep}, {tok}) is not the image of the t-fiber"));
    report.record("fiber", fiber.map_or(Ok(()), Err));
    // s_j (t, E_j) and (t, t_j E_j) lie over the same coset
    let mut coset = Ok(());
    for (sj, tj) in out.translators.iter().zip(&xw.translators) {
        let lhs = h.normalize(&sj.op(&out.t));
        let rhs = h.normalize(&out.t.op(tj));
        match (lhs, rhs) {
            (Ok((a, _)), Ok((b, _))) if a == b => {}
            (Ok(_), Ok(_)) => {
                coset = Err(format!("s_j t and t t_j lie in different cosets for t_j = {tj}"));
                break;
            }
            (Err(e), _) | (_, Err(e)) => {
                coset = Err(e.to_string());
                break;
            }
        }
    }
    report.record("coset", coset);
    report.record("split", if out.split == xw.split() { Ok(()) } else { Err("split differs".into()) });
    report
}

/// Whether two induced witnesses live over distinct cosets in every pair
/// of entries.
pub fn fibers_disjoint(h: &SubgroupSpec, a: &InducedWitness, b: &InducedWitness) -> Result<bool> {
    let ra = h.normalize(&a.t)?.0;
    let rb = h.normalize(&b.t)?.0;
    Ok(ra != rb)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqEFacts {
    pub disjoint: Vec<(usize, usize)>,
    pub covers: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedOutput {
    pub sj: Vec<String>,
    pub fj: Vec<(String, String)>,
}

/// JSON form: `xTokens` is `[E, E_1, .., E_k]`, `gamma0Elems` the `t_j`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenWitnessDoc {
    pub x_tokens: Vec<String>,
    pub gamma0_elems: Vec<String>,
    pub eq_e_facts: EqEFacts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<InducedOutput>,
}

impl TokenWitnessDoc {
    pub fn witness(&self, group: GroupSpec) -> Result<TokenWitness> {
        let (set, parts) = self
            .x_tokens
            .split_first()
            .ok_or_else(|| Error::InvalidWitness("xTokens must start with the set token".into()))?;
        Ok(TokenWitness {
            set: set.clone(),
            parts: parts.to_vec(),
            translators: self.gamma0_elems.iter().map(|s| group.parse_elem(s)).collect::<Result<_>>()?,
            disjoint: self.eq_e_facts.disjoint.clone(),
            covers: self.eq_e_facts.covers.clone(),
        })
    }

    pub fn from_witness(xw: &TokenWitness, out: Option<&InducedWitness>) -> Self {
        TokenWitnessDoc {
            x_tokens: std::iter::once(xw.set.clone()).chain(xw.parts.iter().cloned()).collect(),
            gamma0_elems: xw.translators.iter().map(|g| g.to_string()).collect(),
            eq_e_facts: EqEFacts { disjoint: xw.disjoint.clone(), covers: xw.covers.clone() },
            t: out.map(|o| o.t.to_string()),
            output: out.map(|o| InducedOutput {
                sj: o.translators.iter().map(|g| g.to_string()).collect(),
                fj: o.parts.iter().map(|(r, x)| (r.to_string(), x.clone())).collect(),
            }),
        }
    }
}

impl FromStr for TokenWitnessDoc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidWitness(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GroupSpec {
        GroupSpec::Free(2)
    }

    fn el(g: GroupSpec, s: &str) -> Elem {
        g.parse_elem(s).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let h = SubgroupSpec::parse(f2(), "cyclic:a").unwrap();
        let (rep, r) = h.normalize(&el(f2(), "b a a")).unwrap();
        assert_eq!((rep.to_string(), r.to_string()), ("b".into(), "a a".into()));
        let (rep, r) = h.normalize(&el(f2(), "a^-3")).unwrap();
        assert!(rep.is_identity());
        assert_eq!(r, el(f2(), "a^-3"));
        let z2 = GroupSpec::Zn(2);
        let h = SubgroupSpec::parse(z2, "coords:0").unwrap();
        let (rep, r) = h.normalize(&el(z2, "(3,5)")).unwrap();
        assert_eq!((rep.to_string(), r.to_string()), ("(0,5)".into(), "(3,0)".into()));
        let bs = GroupSpec::DyadicAffine;
        let h = SubgroupSpec::parse(bs, "kernel").unwrap();
        let (rep, r) = h.normalize(&el(bs, "(2,1)")).unwrap();
        assert_eq!((rep.to_string(), r.to_string()), ("(2,0)".into(), "(1,1/2)".into()));
    }

    #[test]
    fn conjugated_generator_has_canonical_reps() {
        let h = SubgroupSpec::parse(f2(), "cyclic:b a b b^-1 b^-1").unwrap();
        let w = el(f2(), "b a b^-1");
        let g = el(f2(), "a b a^-1");
        let (rep, _) = h.normalize(&g).unwrap();
        for k in -4..=4 {
            let (r2, x) = h.normalize(&g.op(&w.pow(k))).unwrap();
            assert_eq!(r2, rep);
            assert!(h.contains(&x).unwrap());
            assert_eq!(r2.op(&x), g.op(&w.pow(k)));
        }
        assert_eq!(h.normalize(&rep).unwrap().1, f2().identity());
    }

    #[test]
    fn unsupported_subgroups() {
        assert!(SubgroupSpec::parse(GroupSpec::Zn(2), "kernel").is_err());
        assert!(SubgroupSpec::parse(f2(), "coords:0").is_err());
        assert!(SubgroupSpec::parse(f2(), "cyclic:e").is_err());
        assert!(SubgroupSpec::parse(f2(), "normal:a").is_err());
    }

    #[test]
    fn action_on_points() {
        let h = SubgroupSpec::parse(f2(), "cyclic:a").unwrap();
        let mut table = ActionTable::new();
        table.insert(el(f2(), "a"), "x", "y");
        let p = YPoint { rep: f2().identity(), x: "x".into() };
        assert_eq!(induced_act(&h, &table, &f2().identity(), &p).unwrap(), p);
        let q = induced_act(&h, &table, &el(f2(), "a"), &p).unwrap();
        assert_eq!(q, YPoint { rep: f2().identity(), x: "y".into() });
        let moved = induced_act(&h, &table, &el(f2(), "b"), &p).unwrap();
        assert_eq!(moved.rep, el(f2(), "b"));
        assert!(matches!(induced_act(&h, &table, &el(f2(), "a a"), &p), Err(Error::IncompleteTable { .. })));
    }

    fn two_piece() -> TokenWitness {
        TokenWitness {
            set: "E".into(),
            parts: vec!["E1".into(), "E2".into()],
            translators: vec![el(f2(), "a"), el(f2(), "a^-2")],
            disjoint: vec![(1, 2)],
            covers: vec![vec![1], vec![2]],
        }
    }

    #[test]
    fn transport_into_free_group() {
        let h = SubgroupSpec::parse(f2(), "cyclic:a").unwrap();
        let xw = two_piece();
        let id = induce_witness(&h, &xw, &f2().identity()).unwrap();
        assert_eq!(id.translators, xw.translators);
        let t = el(f2(), "b");
        let out = induce_witness(&h, &xw, &t).unwrap();
        assert_eq!(out.translators[0], el(f2(), "b a b^-1"));
        assert_eq!(out.translators[1], el(f2(), "b a^-2 b^-1"));
        assert!(check_induced(&h, &xw, &out).passed());
        let other = induce_witness(&h, &xw, &el(f2(), "b b")).unwrap();
        assert!(fibers_disjoint(&h, &out, &other).unwrap());

        let mut bad = out.clone();
        bad.translators[1] = el(f2(), "a^-2");
        assert!(!check_induced(&h, &xw, &bad).check("conjugation").unwrap().passed);
    }

    #[test]
    fn malformed_witnesses_rejected() {
        let h = SubgroupSpec::parse(f2(), "cyclic:a").unwrap();
        let mut xw = two_piece();
        xw.translators[0] = el(f2(), "b");
        assert!(induce_witness(&h, &xw, &f2().identity()).is_err());
        let mut xw = two_piece();
        xw.disjoint.clear();
        assert!(induce_witness(&h, &xw, &f2().identity()).is_err());
        let mut xw = two_piece();
        xw.covers = vec![vec![1, 2]];
        assert!(induce_witness(&h, &xw, &f2().identity()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let xw = two_piece();
        let h = SubgroupSpec::parse(f2(), "cyclic:a").unwrap();
        let out = induce_witness(&h, &xw, &el(f2(), "b")).unwrap();
        let doc = TokenWitnessDoc::from_witness(&xw, Some(&out));
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"xTokens\"") && text.contains("\"eqEFacts\""));
        let back: TokenWitnessDoc = text.parse().unwrap();
        assert_eq!(back.witness(f2()).unwrap(), xw);
    }
}
