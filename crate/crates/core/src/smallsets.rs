//! Greedy small sets, pair intersections, absorbing points and the
//! one-copy smallness semidecider.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::group::{Elem, GroupSpec, Window};
use crate::matching::BipartiteGraph;
use crate::pwt::Pwt;
use crate::sets::{Membership, SetExpr, Universe};

const ENUMERATION_LIMIT: usize = 20_000_000;

/// The first `n` terms of the greedy sequence avoiding `x_k x_l^-1 x_m`
/// over earlier terms, in the canonical enumeration order of `group`.
pub fn greedy_small_set(group: GroupSpec, n: usize) -> Result<Vec<Elem>> {
    if n == 0 {
        return Err(Error::Precondition("greedy count must be positive".into()));
    }
    let mut chosen: Vec<Elem> = Vec::with_capacity(n);
    let mut inverses: Vec<Elem> = Vec::with_capacity(n);
    let mut forbidden: HashSet<Elem> = HashSet::new();
    for (examined, g) in group.enumerate().enumerate() {
        if chosen.len() == n {
            break;
        }
        if examined >= ENUMERATION_LIMIT {
            return Err(Error::Exhausted(format!(
                "greedy({n}) in {group}: only {} terms after {ENUMERATION_LIMIT} elements",
                chosen.len()
            )));
        }
        if forbidden.contains(&g) {
            continue;
        }
        let i = chosen.len();
        chosen.push(g.clone());
        inverses.push(g.inverse());
        for k in 0..=i {
            for l in 0..=i {
                let kl = chosen[k].op(&inverses[l]);
                let m_range = if k == i || l == i { 0..=i } else { i..=i };
                for m in m_range {
                    forbidden.insert(kl.op(&chosen[m]));
                }
            }
        }
    }
    Ok(chosen)
}

/// Re-checks the defining exclusion; returns the first offending index.
pub fn verify_exclusion(seq: &[Elem]) -> std::result::Result<(), usize> {
    for n in 0..seq.len() {
        for k in 0..n {
            for l in 0..n {
                let kl = seq[k].op(&seq[l].inverse());
                for m in 0..n {
                    if kl.op(&seq[m]) == seq[n] {
                        return Err(n);
                    }
                }
            }
        }
    }
    Ok(())
}

/// `max |sA ∩ A|` over `s` in `ball(r)` minus the identity, with the first
/// attaining `s` in ball order.
pub fn check_pair_intersections(group: GroupSpec, a: &[Elem], r: u32) -> (usize, Option<Elem>) {
    let lookup: HashSet<&Elem> = a.iter().collect();
    let mut best = (0, None);
    for s in group.ball(r).elements() {
        if s.is_identity() {
            continue;
        }
        let n = a.iter().filter(|x| lookup.contains(&s.op(x))).count();
        if best.1.is_none() || n > best.0 {
            best = (n, Some(s.clone()));
        }
    }
    best
}

/// First `g` in `w` with `F g ⊆ A`, read off from `∩_{t in F^-1} t A`.
pub fn absorbing_check(u: &Universe, a: &SetExpr, f: &[Elem], w: &Window) -> Result<Option<Elem>> {
    if f.is_empty() {
        return Err(Error::Precondition("F must be nonempty".into()));
    }
    let inter = f
        .iter()
        .map(|t| SetExpr::translate(&t.inverse(), a))
        .fold(SetExpr::All, SetExpr::intersect);
    let m = u.materialize(&inter, w);
    if let Some(g) = m.undecided.first() {
        // an undecided point before the first member makes the answer unknown
        let pos = |x: &Elem| w.elements().iter().position(|y| y == x);
        if m.elements.first().is_none_or(|first| pos(g) < pos(first)) {
            return Err(Error::Budget { elem: g.to_string() });
        }
    }
    Ok(m.elements.into_iter().next())
}

/// The same answer as [`absorbing_check`], by testing `f g ∈ A` directly.
pub fn absorbing_scan(u: &Universe, a: &SetExpr, f: &[Elem], w: &Window) -> Result<Option<Elem>> {
    if f.is_empty() {
        return Err(Error::Precondition("F must be nonempty".into()));
    }
    let budget = u.budget(w);
    'next: for g in w.elements() {
        for t in f {
            if !u.contains(a, &t.op(g), budget)? {
                continue 'next;
            }
        }
        return Ok(Some(g.clone()));
    }
    Ok(None)
}

/// Looks for an injective map `A ∩ W -> Γ \ B` with displacements in `S`.
/// `None` is inconclusive beyond this `S` and `W`.
pub fn small_check(u: &Universe, a: &SetExpr, b: &SetExpr, s: &[Elem], w: &Window) -> Result<Option<Pwt>> {
    let budget = u.budget(w);
    let left = u.materialize(a, w).exact()?;
    let mut graph = BipartiteGraph::new(left.len());
    for (i, x) in left.iter().enumerate() {
        for (ti, t) in s.iter().enumerate() {
            let y = t.op(x);
            match u.member(b, &y, budget) {
                Membership::Out => graph.add_edge(i, y, ti),
                Membership::In => {}
                Membership::Unknown => return Err(Error::Budget { elem: y.to_string() }),
            }
        }
    }
    let matching = graph.max_matching();
    if matching.size() < left.len() {
        return Ok(None);
    }
    let mut groups: Vec<(Elem, Vec<Elem>)> = Vec::new();
    for (i, x) in left.iter().enumerate() {
        let t = s[graph.label_of(i, matching.partner(i).unwrap())].clone();
        match groups.iter_mut().find(|(g, _)| *g == t) {
            Some((_, v)) => v.push(x.clone()),
            None => groups.push((t, vec![x.clone()])),
        }
    }
    let pieces = groups.into_iter().map(|(t, xs)| (SetExpr::finite(xs), t)).collect();
    let mut pwt = Pwt::new(SetExpr::finite(left), pieces);
    pwt.displacements = s.to_vec();
    Ok(Some(pwt))
}
