//! Doubling matchings, paradoxical witnesses and type-semigroup comparisons
//! on windows.

use std::collections::{HashMap, HashSet};

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::group::{Elem, GroupSpec, Window};
use crate::matching::BipartiteGraph;
use crate::pwt::{pwt_compose, Pwt};
use crate::report::ValidationReport;
use crate::sets::{Membership, SetExpr, Universe};

/// Pieces `A_j` with translators `t_j` such that the first `split` of them
/// satisfy `A = U t_j A_j` and so do the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParadoxWitness {
    pub set: SetExpr,
    pub parts: Vec<(SetExpr, Elem)>,
    pub split: usize,
}

impl ParadoxWitness {
    pub fn families(&self) -> (&[(SetExpr, Elem)], &[(SetExpr, Elem)]) {
        self.parts.split_at(self.split.min(self.parts.len()))
    }
}

/// Two translators per point of `A ∩ W` with globally distinct images in `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchCert {
    pub set: SetExpr,
    pub translators: Vec<Elem>,
    pub window: Window,
    /// `(x, s1(x), s2(x))` in window order.
    pub assignment: Vec<(Elem, Elem, Elem)>,
}

/// A finite `D ⊆ A ∩ W` with `|N_S(D) ∩ A| < 2|D|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeficiencyCert {
    pub set: SetExpr,
    pub translators: Vec<Elem>,
    pub window: Window,
    pub violator: Vec<Elem>,
    /// `|N_S(D) ∩ A|`.
    pub neighborhood: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Doubling {
    Match(MatchCert),
    Deficiency(DeficiencyCert),
}

fn checked_translators(u: &Universe, s: &[Elem]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Precondition("translator set must be nonempty".into()));
    }
    for t in s {
        u.group().check(t)?;
    }
    Ok(())
}

/// Bipartite graph from `A ∩ W` (one left vertex per point) to `S·(A∩W) ∩ A`.
fn neighborhood_graph(u: &Universe, s: &[Elem], points: &[Elem], target: &SetExpr, budget: u32) -> Result<BipartiteGraph> {
    let mut graph = BipartiteGraph::with_capacity(points.len(), points.len() * 2, s.len());
    let mut verdict: FxHashMap<Elem, bool> = FxHashMap::default();
    let all = matches!(target, SetExpr::All);
    for (i, x) in points.iter().enumerate() {
        for (ti, t) in s.iter().enumerate() {
            let y = t.op(x);
            let inside = if all {
                true
            } else if let Some(&b) = verdict.get(&y) {
                b
            } else {
                let b = match u.member(target, &y, budget) {
                    Membership::In => true,
                    Membership::Out => false,
                    Membership::Unknown => return Err(Error::Budget { elem: y.to_string() }),
                };
                verdict.insert(y.clone(), b);
                b
            };
            if inside {
                graph.add_edge(i, y, ti);
            }
        }
    }
    Ok(graph)
}

/// Decides whether `A ∩ W` doubles into `A` with displacements in `S`.
pub fn doubling_matching(u: &Universe, a: &SetExpr, s: &[Elem], w: &Window) -> Result<Doubling> {
    checked_translators(u, s)?;
    let budget = u.budget(w);
    let points = u.materialize(a, w).exact()?;
    let k = points.len();
    let mut graph = neighborhood_graph(u, s, &points, a, budget)?;
    for i in 0..k {
        graph.add_copy(i);
    }
    let m = graph.max_matching();
    if m.size() == 2 * k {
        let assignment = points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let s1 = s[graph.label_of(i, m.partner(i).unwrap())].clone();
                let s2 = s[graph.label_of(k + i, m.partner(k + i).unwrap())].clone();
                (x.clone(), s1, s2)
            })
            .collect();
        return Ok(Doubling::Match(MatchCert { set: a.clone(), translators: s.to_vec(), window: w.clone(), assignment }));
    }
    let (left, right) = graph.alternating_reach(&m);
    let violator: Vec<Elem> = (0..k).filter(|&i| left[i] || left[k + i]).map(|i| points[i].clone()).collect();
    let neighborhood = right.iter().filter(|r| **r).count();
    debug_assert!(neighborhood < 2 * violator.len());
    Ok(Doubling::Deficiency(DeficiencyCert {
        set: a.clone(),
        translators: s.to_vec(),
        window: w.clone(),
        violator,
        neighborhood,
    }))
}

/// Finite witness read off from a matching: for each family `i` and each
/// translator `s` used, the piece `{s x : s_i(x) = s}` with translator `s^-1`.
pub fn witness_from_matching(c: &MatchCert) -> ParadoxWitness {
    let mut parts = Vec::new();
    let mut split = 0;
    for family in 0..2 {
        let mut groups: Vec<(Elem, Vec<Elem>)> = Vec::new();
        for (x, s1, s2) in &c.assignment {
            let s = if family == 0 { s1 } else { s2 };
            let y = s.op(x);
            match groups.iter_mut().find(|(t, _)| t == s) {
                Some((_, v)) => v.push(y),
                None => groups.push((s.clone(), vec![y])),
            }
        }
        for (s, ys) in groups {
            parts.push((SetExpr::finite(ys), s.inverse()));
        }
        if family == 0 {
            split = parts.len();
        }
    }
    ParadoxWitness { set: c.set.clone(), parts, split }
}

/// When each family of the matching uses a single translator, the symbolic
/// witness `A = s^-1 (sA) = t^-1 (tA)`.
pub fn lift_uniform(c: &MatchCert) -> Option<ParadoxWitness> {
    let (_, s, t) = c.assignment.first()?;
    if c.assignment.iter().any(|(_, a, b)| a != s || b != t) || s == t {
        return None;
    }
    Some(ParadoxWitness {
        set: c.set.clone(),
        parts: vec![
            (SetExpr::translate(s, &c.set), s.inverse()),
            (SetExpr::translate(t, &c.set), t.inverse()),
        ],
        split: 1,
    })
}

/// Window points plus the explicit points of finite pieces.
fn check_points(wit: &ParadoxWitness, w: &Window) -> Vec<Elem> {
    let mut seen: HashSet<Elem> = w.elements().iter().cloned().collect();
    let mut out: Vec<Elem> = w.elements().to_vec();
    for (p, _) in &wit.parts {
        if let SetExpr::Finite(v) = p {
            for x in v {
                if seen.insert(x.clone()) {
                    out.push(x.clone());
                }
            }
        }
    }
    out
}

pub fn witness_check(u: &Universe, wit: &ParadoxWitness, w: &Window) -> ValidationReport {
    let budget = u.budget(w);
    let mut report = ValidationReport::new();
    if wit.split > wit.parts.len() {
        report.record("shape", Err(format!("split {} exceeds {} parts", wit.split, wit.parts.len())));
        return report;
    }
    let member = |a: &SetExpr, x: &Elem| -> std::result::Result<bool, String> {
        u.contains(a, x, budget).map_err(|e| e.to_string())
    };
    let points = check_points(wit, w);
    let mut disjoint = Ok(());
    let mut contained = Ok(());
    for x in &points {
        let mut hits = Vec::new();
        for (j, (p, _)) in wit.parts.iter().enumerate() {
            match member(p, x) {
                Ok(true) => hits.push(j),
                Ok(false) => {}
                Err(e) => {
                    disjoint = disjoint.and(Err(e));
                }
            }
        }
        if hits.len() > 1 && disjoint.is_ok() {
            disjoint = Err(format!("{x} lies in pieces {hits:?}"));
        }
        if !hits.is_empty() && contained.is_ok() {
            match member(&wit.set, x) {
                Ok(true) => {}
                Ok(false) => contained = Err(format!("{x} is in piece {} but not in the set", hits[0])),
                Err(e) => contained = Err(e),
            }
        }
    }
    report.record("disjoint", disjoint);
    report.record("contained", contained);
    let (first, second) = wit.families();
    for (name, family) in [("cover-first", first), ("cover-second", second)] {
        let mut outcome = Ok(());
        for x in w.elements() {
            let in_set = match member(&wit.set, x) {
                Ok(b) => b,
                Err(e) => {
                    outcome = Err(e);
                    break;
                }
            };
            let mut covered = false;
            let mut failure = None;
            for (p, t) in family {
                match member(p, &t.inverse().op(x)) {
                    Ok(true) => {
                        covered = true;
                        break;
                    }
                    Ok(false) => {}
                    Err(e) => failure = Some(e),
                }
            }
            if let Some(e) = failure.filter(|_| !covered) {
                outcome = Err(e);
                break;
            }
            if in_set && !covered {
                outcome = Err(format!("{x} is not covered"));
                break;
            }
            if covered && !in_set {
                outcome = Err(format!("{x} is covered but lies outside the set"));
                break;
            }
        }
        report.record(name, outcome);
    }
    report
}

/// A positive word in two letters, `false` for `s` and `true` for `t`.
pub type Word2 = Vec<bool>;

fn word2_string(w: &Word2) -> String {
    if w.is_empty() {
        return "e".into();
    }
    w.iter().map(|&b| if b { "t" } else { "s" }).collect::<Vec<_>>().join("")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub earlier: Word2,
    pub later: Word2,
    pub value: Elem,
}

impl Collision {
    pub fn describe(&self) -> String {
        format!("{} = {} = {}", word2_string(&self.earlier), word2_string(&self.later), self.value)
    }
}

/// Positive words in `s, t` of length at most `len`, breadth-first with `s`
/// before `t`, as `(word, value)` pairs; stops at the first repeated value.
pub fn enumerate_positive(s: &Elem, t: &Elem, identity: &Elem, len: u32) -> std::result::Result<Vec<(Word2, Elem)>, Collision> {
    let mut out: Vec<(Word2, Elem)> = vec![(Vec::new(), identity.clone())];
    let mut seen: HashMap<Elem, usize> = HashMap::from([(identity.clone(), 0)]);
    let mut start = 0;
    for _ in 0..len {
        let end = out.len();
        for i in start..end {
            for (bit, g) in [(false, s), (true, t)] {
                let mut word = out[i].0.clone();
                word.push(bit);
                let value = out[i].1.op(g);
                if let Some(&j) = seen.get(&value) {
                    return Err(Collision { earlier: out[j].0.clone(), later: word, value });
                }
                seen.insert(value.clone(), out.len());
                out.push((word, value));
            }
        }
        start = end;
    }
    Ok(out)
}

/// The witness `A = s^-1 (sA) = t^-1 (tA)` for `A = semigroup(s,t;e)`,
/// after checking that positive words up to length `len` are distinct.
pub fn free_semigroup_witness(group: GroupSpec, s: &Elem, t: &Elem, len: u32) -> Result<std::result::Result<ParadoxWitness, Collision>> {
    if len == 0 {
        return Err(Error::Precondition("word length bound must be at least 1".into()));
    }
    group.check(s)?;
    group.check(t)?;
    if let Err(c) = enumerate_positive(s, t, &group.identity(), len) {
        return Ok(Err(c));
    }
    let a = SetExpr::semigroup(vec![s.clone(), t.clone()], true);
    Ok(Ok(ParadoxWitness {
        parts: vec![(SetExpr::translate(s, &a), s.inverse()), (SetExpr::translate(t, &a), t.inverse())],
        set: a,
        split: 1,
    }))
}

/// The window of positive words in `s, t` of length at most `len`.
pub fn positive_window(group: GroupSpec, s: &Elem, t: &Elem, len: u32) -> Result<Window> {
    let words = crate::group::positive_words(&[s.clone(), t.clone()], &group.identity(), len);
    Window::explicit(group, words, len)
}

/// The base maps `A -> A` of a witness: family `i` sends
/// `t_j A_j \ U_{k<j} t_k A_k` to `A_j` by `t_j^-1`.
pub fn base_maps(wit: &ParadoxWitness) -> (Pwt, Pwt) {
    let build = |family: &[(SetExpr, Elem)]| {
        let mut pieces = Vec::new();
        let mut before = SetExpr::Empty;
        for (p, t) in family {
            let image = SetExpr::translate(t, p);
            pieces.push((SetExpr::diff(image.clone(), before.clone()), t.inverse()));
            before = SetExpr::union(before, image);
        }
        Pwt::new(wit.set.clone(), pieces)
    };
    let (first, second) = wit.families();
    (build(first), build(second))
}

/// `n` maps `A -> A` with pairwise disjoint images: the first `n` leaves of
/// the binary tree of depth `ceil(log2 n)` over the base maps, `+` first.
pub fn iterate_disjoint(u: &Universe, wit: &ParadoxWitness, n: usize, w: &Window) -> Result<Vec<Pwt>> {
    if n < 2 {
        return Err(Error::Precondition("need at least two maps".into()));
    }
    let report = witness_check(u, wit, w);
    if let Some(c) = report.first_failure() {
        return Err(Error::InvalidWitness(format!("{}: {}", c.name, c.detail.clone().unwrap_or_default())));
    }
    let (plus, minus) = base_maps(wit);
    let depth = usize::BITS - (n - 1).leading_zeros();
    let mut out = Vec::with_capacity(n);
    for leaf in 0..n {
        // bit (depth-1-k) of leaf selects the k-th outermost map
        let mut acc: Option<Pwt> = None;
        for k in (0..depth).rev() {
            let map = if (leaf >> (depth - 1 - k)) & 1 == 0 { &plus } else { &minus };
            acc = Some(match acc {
                None => map.clone(),
                Some(inner) => pwt_compose(u, map, &inner, w)?,
            });
        }
        out.push(acc.unwrap());
    }
    Ok(out)
}

/// An integral assignment of `m` copies of each point of `A ∩ W` into `B`
/// with each target used at most `n` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowCert {
    pub m: usize,
    pub n: usize,
    pub set_a: SetExpr,
    pub set_b: SetExpr,
    pub translators: Vec<Elem>,
    pub window: Window,
    /// For each point, the translator used by each copy.
    pub assignment: Vec<(Elem, Vec<Elem>)>,
}

/// `D ⊆ A ∩ W` with `n |N_S(D) ∩ B| < m |D|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowDeficiency {
    pub m: usize,
    pub n: usize,
    pub set_a: SetExpr,
    pub set_b: SetExpr,
    pub translators: Vec<Elem>,
    pub window: Window,
    pub violator: Vec<Elem>,
    pub neighborhood: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeOrder {
    Flow(FlowCert),
    Deficiency(FlowDeficiency),
}

/// Decides `m[A ∩ W] <= n[B]` with displacements in `S` by max-flow.
pub fn type_order(u: &Universe, m: usize, a: &SetExpr, n: usize, b: &SetExpr, s: &[Elem], w: &Window) -> Result<TypeOrder> {
    if m == 0 || n == 0 {
        return Err(Error::Precondition("multiplicities must be at least 1".into()));
    }
    checked_translators(u, s)?;
    let budget = u.budget(w);
    let points = u.materialize(a, w).exact()?;
    let graph = neighborhood_graph(u, s, &points, b, budget)?;
    let k = points.len();
    let r = graph.right_len();
    // source, sink, k*m copies, r targets
    let source = 0;
    let sink = 1;
    let copy = |i: usize, c: usize| 2 + i * m + c;
    let target = |j: usize| 2 + k * m + j;
    let mut net = FlowNetwork::new(2 + k * m + r);
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k * m];
    for i in 0..k {
        for c in 0..m {
            net.add_edge(source, copy(i, c), 1);
            for j in graph.neighbors(i) {
                let id = net.add_edge(copy(i, c), target(j), 1);
                edges[i * m + c].push((id, j));
            }
        }
    }
    for j in 0..r {
        net.add_edge(target(j), sink, n as i64);
    }
    let total = net.max_flow(source, sink);
    if total == (k * m) as i64 {
        let assignment = points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let used = (0..m)
                    .map(|c| {
                        let &(_, j) = edges[i * m + c].iter().find(|(id, _)| net.flow(*id) == 1).expect("saturated copy");
                        s[graph.label_of(i, j)].clone()
                    })
                    .collect();
                (x.clone(), used)
            })
            .collect();
        return Ok(TypeOrder::Flow(FlowCert {
            m,
            n,
            set_a: a.clone(),
            set_b: b.clone(),
            translators: s.to_vec(),
            window: w.clone(),
            assignment,
        }));
    }
    let reach = net.residual_reach(source);
    // copies on the source side of the cut with no edge across it
    let mut in_d = vec![false; k];
    for i in 0..k {
        for c in 0..m {
            if reach[copy(i, c)] && edges[i * m + c].iter().all(|&(_, j)| reach[target(j)]) {
                in_d[i] = true;
            }
        }
    }
    let violator: Vec<Elem> = (0..k).filter(|&i| in_d[i]).map(|i| points[i].clone()).collect();
    let mut nbhd: HashSet<usize> = HashSet::new();
    for i in (0..k).filter(|&i| in_d[i]) {
        nbhd.extend(graph.neighbors(i));
    }
    let neighborhood = nbhd.len();
    debug_assert!(n * neighborhood < m * violator.len());
    Ok(TypeOrder::Deficiency(FlowDeficiency {
        m,
        n,
        set_a: a.clone(),
        set_b: b.clone(),
        translators: s.to_vec(),
        window: w.clone(),
        violator,
        neighborhood,
    }))
}
