//! Piecewise translations, equidecomposition witnesses and bounded covers.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::{Elem, GroupSpec, Window};
use crate::report::ValidationReport;
use crate::sets::{Membership, SetExpr, Universe};

/// A map `x -> t_i * x` for `x` in piece `P_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pwt {
    pub domain: SetExpr,
    pub pieces: Vec<(SetExpr, Elem)>,
    /// The finite set `S` of allowed displacements.
    pub displacements: Vec<Elem>,
}

impl Pwt {
    /// Builds a map whose displacement set is exactly its translators.
    pub fn new(domain: SetExpr, pieces: Vec<(SetExpr, Elem)>) -> Self {
        let mut displacements: Vec<Elem> = Vec::new();
        for (_, t) in &pieces {
            if !displacements.contains(t) {
                displacements.push(t.clone());
            }
        }
        Pwt { domain, pieces, displacements }
    }

    pub fn identity(group: GroupSpec, domain: SetExpr) -> Self {
        Pwt::new(domain.clone(), vec![(domain, group.identity())])
    }

    pub fn translators(&self) -> impl Iterator<Item = &Elem> {
        self.pieces.iter().map(|(_, t)| t)
    }

    /// The image set `U t_i P_i`.
    pub fn image(&self) -> SetExpr {
        SetExpr::union_all(self.pieces.iter().map(|(p, t)| SetExpr::translate(t, p)))
    }
}

fn yes(u: &Universe, a: &SetExpr, g: &Elem, budget: u32) -> Result<bool> {
    u.contains(a, g, budget)
}

/// `sigma(g)`.
pub fn pwt_apply(u: &Universe, sigma: &Pwt, g: &Elem, budget: u32) -> Result<Elem> {
    if !yes(u, &sigma.domain, g, budget)? {
        return Err(Error::OutsideDomain { elem: g.to_string() });
    }
    let mut hit: Option<&Elem> = None;
    let mut count = 0;
    for (p, t) in &sigma.pieces {
        if yes(u, p, g, budget)? {
            count += 1;
            hit.get_or_insert(t);
        }
    }
    match (hit, count) {
        (Some(t), 1) => Ok(t.op(g)),
        (None, _) => Err(Error::OutsideDomain { elem: g.to_string() }),
        (_, count) => Err(Error::PieceOverlap { elem: g.to_string(), count }),
    }
}

/// `tau . sigma`, after checking on `w` that `sigma` maps into the domain
/// of `tau`.
pub fn pwt_compose(u: &Universe, tau: &Pwt, sigma: &Pwt, w: &Window) -> Result<Pwt> {
    let budget = u.budget(w);
    for x in u.materialize(&sigma.domain, w).exact()? {
        let y = pwt_apply(u, sigma, &x, budget)?;
        if !yes(u, &tau.domain, &y, budget)? {
            return Err(Error::NotComposable { elem: x.to_string() });
        }
    }
    let mut pieces = Vec::new();
    for (p, t) in &sigma.pieces {
        for (q, s) in &tau.pieces {
            let pulled = SetExpr::translate(&t.inverse(), q);
            let piece = match p {
                SetExpr::Finite(v) => {
                    let mut keep = Vec::new();
                    for x in v {
                        if yes(u, &pulled, x, budget)? {
                            keep.push(x.clone());
                        }
                    }
                    SetExpr::finite(keep)
                }
                _ => SetExpr::intersect(p.clone(), pulled),
            };
            if piece != SetExpr::Empty {
                pieces.push((piece, s.op(t)));
            }
        }
    }
    let mut displacements = Vec::new();
    for t in &sigma.displacements {
        for s in &tau.displacements {
            let st = s.op(t);
            if !displacements.contains(&st) {
                displacements.push(st);
            }
        }
    }
    Ok(Pwt { domain: sigma.domain.clone(), pieces, displacements })
}

/// Checks disjointness, cover, injectivity and the displacement bound on `w`.
pub fn pwt_validate(u: &Universe, sigma: &Pwt, w: &Window) -> ValidationReport {
    let budget = u.budget(w);
    let mut report = ValidationReport::new();
    let mut disjoint = Ok(());
    let mut cover = Ok(());
    let mut injective = Ok(());
    let mut images: HashMap<Elem, Elem> = HashMap::new();
    for x in w.elements() {
        let in_domain = u.member(&sigma.domain, x, budget);
        let mut hits = Vec::new();
        let mut undecided = in_domain == Membership::Unknown;
        for (i, (p, _)) in sigma.pieces.iter().enumerate() {
            match u.member(p, x, budget) {
                Membership::In => hits.push(i),
                Membership::Out => {}
                Membership::Unknown => undecided = true,
            }
        }
        if undecided {
            if cover.is_ok() {
                cover = Err(format!("membership of {x} undecided within budget {budget}"));
            }
            continue;
        }
        if hits.len() > 1 && disjoint.is_ok() {
            disjoint = Err(format!("{x} lies in pieces {hits:?}"));
        }
        match (in_domain == Membership::In, hits.is_empty()) {
            (true, true) if cover.is_ok() => cover = Err(format!("{x} is in the domain but in no piece")),
            (false, false) if cover.is_ok() => cover = Err(format!("{x} is in piece {} but not in the domain", hits[0])),
            _ => {}
        }
        if in_domain == Membership::In && hits.len() == 1 {
            let y = sigma.pieces[hits[0]].1.op(x);
            if let Some(prev) = images.insert(y.clone(), x.clone()) {
                if injective.is_ok() {
                    injective = Err(format!("{prev} and {x} both map to {y}"));
                }
            }
        }
    }
    report.record("disjoint", disjoint);
    report.record("cover", cover);
    report.record("injective", injective);
    let stray = sigma.pieces.iter().map(|(_, t)| t).find(|t| !sigma.displacements.contains(t));
    report.record(
        "displacement",
        match stray {
            Some(t) => Err(format!("translator {t} is not in the displacement set")),
            None => Ok(()),
        },
    );
    report
}

/// Finite partitions `A = U A_j`, `B = U B_j` with `A_j = t_j B_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquiWitness {
    pub set_a: SetExpr,
    pub set_b: SetExpr,
    pub parts_a: Vec<SetExpr>,
    pub parts_b: Vec<SetExpr>,
    pub translators: Vec<Elem>,
}

fn partition_check(u: &Universe, whole: &SetExpr, parts: &[SetExpr], w: &Window, budget: u32) -> (Result<()>, Result<()>) {
    let mut disjoint = Ok(());
    let mut cover = Ok(());
    for x in w.elements() {
        let mut count = 0;
        for p in parts {
            match u.contains(p, x, budget) {
                Ok(true) => count += 1,
                Ok(false) => {}
                Err(e) => return (Err(e.clone()), Err(e)),
            }
        }
        let inside = match u.contains(whole, x, budget) {
            Ok(b) => b,
            Err(e) => return (Err(e.clone()), Err(e)),
        };
        if count > 1 && disjoint.is_ok() {
            disjoint = Err(Error::PieceOverlap { elem: x.to_string(), count });
        }
        if inside != (count > 0) && cover.is_ok() {
            cover = Err(Error::InvalidWitness(if inside {
                format!("{x} is in the set but in no part")
            } else {
                format!("{x} is in a part but not in the set")
            }));
        }
    }
    (disjoint, cover)
}

fn as_detail(r: Result<()>) -> std::result::Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn check_equi_witness(u: &Universe, wit: &EquiWitness, w: &Window) -> ValidationReport {
    let budget = u.budget(w);
    let mut report = ValidationReport::new();
    let shape = wit.parts_a.len() == wit.parts_b.len() && wit.parts_a.len() == wit.translators.len();
    report.record("shape", if shape { Ok(()) } else { Err("part and translator lists differ in length".into()) });
    if !shape {
        return report;
    }
    let (d, c) = partition_check(u, &wit.set_a, &wit.parts_a, w, budget);
    report.record("a-disjoint", as_detail(d));
    report.record("a-cover", as_detail(c));
    let (d, c) = partition_check(u, &wit.set_b, &wit.parts_b, w, budget);
    report.record("b-disjoint", as_detail(d));
    report.record("b-cover", as_detail(c));
    let mut matched = Ok(());
    'outer: for (j, ((pa, pb), t)) in wit.parts_a.iter().zip(&wit.parts_b).zip(&wit.translators).enumerate() {
        let t_inv = t.inverse();
        for x in w.elements() {
            // x in A_j  <=>  t^-1 x in B_j, and y in B_j  <=>  t y in A_j
            let forward = (u.contains(pa, x, budget), u.contains(pb, &t_inv.op(x), budget));
            let backward = (u.contains(pb, x, budget), u.contains(pa, &t.op(x), budget));
            for (lhs, rhs) in [forward, backward] {
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(_), Ok(_)) => {
                        matched = Err(format!("part {j}: translator {t} fails at {x}"));
                        break 'outer;
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        matched = Err(e.to_string());
                        break 'outer;
                    }
                }
            }
        }
    }
    report.record("translate", matched);
    report
}

/// Why [`bounded_check`] found no cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotFound {
    /// No translate `t B` with `t` in the search ball contains this point,
    /// so no cover exists within that ball.
    Refuted { uncovered: Elem },
    /// Membership could not be decided within the budget.
    Undecided { elem: Elem },
}

/// A finite `F` within `ball(r)` with `A ∩ W ⊆ U_{t in F} t B`, chosen by
/// greedy set cover (largest gain first, ties by ball order).
pub fn bounded_check(u: &Universe, a: &SetExpr, b: &SetExpr, r: u32, w: &Window) -> std::result::Result<Vec<Elem>, NotFound> {
    let budget = u.budget(w);
    let m = u.materialize(a, w);
    if let Some(g) = m.undecided.first() {
        return Err(NotFound::Undecided { elem: g.clone() });
    }
    let target = m.elements;
    let candidates = u.group().ball(r);
    let mut covers: Vec<Vec<usize>> = Vec::with_capacity(candidates.len());
    for t in candidates.elements() {
        let t_inv = t.inverse();
        let mut hit = Vec::new();
        for (i, x) in target.iter().enumerate() {
            match u.member(b, &t_inv.op(x), budget) {
                Membership::In => hit.push(i),
                Membership::Out => {}
                Membership::Unknown => return Err(NotFound::Undecided { elem: t_inv.op(x) }),
            }
        }
        covers.push(hit);
    }
    let mut covered = vec![false; target.len()];
    for c in &covers {
        for &i in c {
            covered[i] = true;
        }
    }
    if let Some(i) = covered.iter().position(|c| !c) {
        return Err(NotFound::Refuted { uncovered: target[i].clone() });
    }
    let mut done = vec![false; target.len()];
    let mut left = target.len();
    let mut chosen = Vec::new();
    while left > 0 {
        let (best, gain) = covers
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.iter().filter(|&&i| !done[i]).count()))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        for &i in &covers[best] {
            if !done[i] {
                done[i] = true;
            }
        }
        left -= gain;
        chosen.push(candidates.elements()[best].clone());
    }
    Ok(chosen)
}

/// Whether `A ∩ W ⊆ U_{t in F} t B`.
pub fn covers(u: &Universe, a: &SetExpr, b: &SetExpr, f: &[Elem], w: &Window) -> Result<bool> {
    let budget = u.budget(w);
    for x in u.materialize(a, w).exact()? {
        let mut ok = false;
        for t in f {
            if u.contains(b, &t.inverse().op(&x), budget)? {
                ok = true;
                break;
            }
        }
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
