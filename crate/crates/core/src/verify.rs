//! Solver-free replay of certificates. Only membership, group arithmetic
//! and the witness checkers are used here.

use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use num_rational::BigRational;

use crate::cert::{parse_all, Certificate, CpTerm, Payload};
use crate::crossed::{pi_witness, verify_pi_witness, CPElem, PIWitness};
use crate::error::Result;
use crate::group::{Elem, GroupSpec, Window};
use crate::paradox::{witness_check, ParadoxWitness};
use crate::report::ValidationReport;
use crate::sets::{SetExpr, Universe};

/// Re-checks every fact stated by `cert`. Content that fails to parse is
/// reported as a failed check.
pub fn verify(cert: &Certificate) -> ValidationReport {
    let mut report = ValidationReport::new();
    let digest = cert.compute_digest();
    report.record(
        "digest",
        if digest == cert.digest { Ok(()) } else { Err(format!("stored {} but content hashes to {digest}", cert.digest)) },
    );
    if let Err(e) = replay(cert, &mut report) {
        report.record("parse", Err(e.to_string()));
    }
    report
}

fn replay(cert: &Certificate, report: &mut ValidationReport) -> Result<()> {
    let group = cert.group_spec()?;
    let w = cert.window.build(group)?;
    let window_digest = w.digest();
    report.record(
        "window",
        if window_digest == cert.checked_on { Ok(()) } else { Err("checkedOn does not match the window".into()) },
    );
    let u = Universe::new(group);
    match &cert.payload {
        Payload::Match { set, translators, assignment } => {
            let a = SetExpr::parse(group, set)?;
            let s = parse_all(group, translators)?;
            let mut rows = Vec::with_capacity(assignment.len());
            for [x, s1, s2] in assignment {
                rows.push((group.parse_elem(x)?, group.parse_elem(s1)?, group.parse_elem(s2)?));
            }
            replay_match(&u, &a, &s, &w, &rows, report)
        }
        Payload::Deficiency { set, translators, violator, neighborhood } => {
            let a = SetExpr::parse(group, set)?;
            let s = parse_all(group, translators)?;
            let d = parse_all(group, violator)?;
            replay_deficiency(&u, (2, &a), (1, &a), &s, &w, &d, *neighborhood, report)
        }
        Payload::Witness { set, parts, split } => {
            let wit = witness(group, set, parts, *split)?;
            report.merge("", witness_check(&u, &wit, &w));
            Ok(())
        }
        Payload::Flow { m, n, set, set_b, translators, assignment } => {
            let a = SetExpr::parse(group, set)?;
            let b = SetExpr::parse(group, set_b)?;
            let s = parse_all(group, translators)?;
            let mut rows = Vec::with_capacity(assignment.len());
            for (x, ys) in assignment {
                rows.push((group.parse_elem(x)?, parse_all(group, ys)?));
            }
            replay_flow(&u, (*m, &a), (*n, &b), &s, &w, &rows, report)
        }
        Payload::FlowDeficiency { m, n, set, set_b, translators, violator, neighborhood } => {
            let a = SetExpr::parse(group, set)?;
            let b = SetExpr::parse(group, set_b)?;
            let s = parse_all(group, translators)?;
            let d = parse_all(group, violator)?;
            replay_deficiency(&u, (*m, &a), (*n, &b), &s, &w, &d, *neighborhood, report)
        }
        Payload::CpWitness { set, parts, split, v, w: w_terms } => {
            let wit = witness(group, set, parts, *split)?;
            let pw = PIWitness { p: wit.set.clone(), v: cp_elem(group, v)?, w: cp_elem(group, w_terms)? };
            let rebuilt = pi_witness(&u, &wit, &w);
            report.record(
                "derivation",
                match rebuilt {
                    Ok(r) if r == pw => Ok(()),
                    Ok(_) => Err("v, w differ from the ones determined by the parts".into()),
                    Err(e) => Err(e.to_string()),
                },
            );
            report.merge("", verify_pi_witness(&u, &pw, &w));
            Ok(())
        }
    }
}

fn witness(group: GroupSpec, set: &str, parts: &[[String; 2]], split: usize) -> Result<ParadoxWitness> {
    let mut out = Vec::with_capacity(parts.len());
    for [a, t] in parts {
        out.push((SetExpr::parse(group, a)?, group.parse_elem(t)?));
    }
    Ok(ParadoxWitness { set: SetExpr::parse(group, set)?, parts: out, split })
}

fn cp_elem(group: GroupSpec, terms: &[CpTerm]) -> Result<CPElem> {
    let mut x = CPElem::zero();
    for term in terms {
        let q = BigRational::from_str(&term.q)
            .map_err(|_| crate::error::Error::Certificate(format!("bad coefficient '{}'", term.q)))?;
        x = x.add(&CPElem::term(q, SetExpr::parse(group, &term.set)?, group.parse_elem(&term.t)?));
    }
    Ok(x)
}

/// The points of `A ∩ W`, or the first undecided point.
fn domain(u: &Universe, a: &SetExpr, w: &Window) -> Result<HashSet<Elem>> {
    Ok(u.materialize(a, w).exact()?.into_iter().collect())
}

/// Every row's point is in `A ∩ W`, listed once, and every such point has
/// a row.
fn check_domain<'a>(
    dom: &HashSet<Elem>,
    points: impl Iterator<Item = &'a Elem>,
    report: &mut ValidationReport,
) {
    let mut seen = HashSet::new();
    let mut outcome = Ok(());
    for x in points {
        if !dom.contains(x) {
            outcome = Err(format!("{x} is not a point of the set in the window"));
            break;
        }
        if !seen.insert(x.clone()) {
            outcome = Err(format!("{x} is assigned twice"));
            break;
        }
    }
    if outcome.is_ok() && seen.len() != dom.len() {
        outcome = Err(format!("{} of {} points are unassigned", dom.len() - seen.len(), dom.len()));
    }
    report.record("domain", outcome);
}

fn replay_match(
    u: &Universe,
    a: &SetExpr,
    s: &[Elem],
    w: &Window,
    rows: &[(Elem, Elem, Elem)],
    report: &mut ValidationReport,
) -> Result<()> {
    let dom = domain(u, a, w)?;
    check_domain(&dom, rows.iter().map(|r| &r.0), report);
    let budget = u.budget(w);
    let allowed: HashSet<&Elem> = s.iter().collect();
    let bad = rows.iter().flat_map(|(x, s1, s2)| [(x, s1), (x, s2)]).find(|(_, t)| !allowed.contains(t));
    report.record("translators", bad.map_or(Ok(()), |(x, t)| Err(format!("{t} at {x} is not in S"))));
    let mut images: HashMap<Elem, (Elem, Elem)> = HashMap::new();
    let mut inside = Ok(());
    let mut injective = Ok(());
    for (x, s1, s2) in rows {
        for t in [s1, s2] {
            let y = t.op(x);
            if inside.is_ok() && !u.contains(a, &y, budget)? {
                inside = Err(format!("{t}*{x} = {y} is not in the set"));
            }
            if let Some((x0, t0)) = images.insert(y.clone(), (x.clone(), t.clone())) {
                if injective.is_ok() {
                    injective = Err(format!("collision: {t0}*{x0} = {t}*{x} = {y}"));
                }
            }
        }
    }
    report.record("images", inside);
    report.record("injective", injective);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn replay_deficiency(
    u: &Universe,
    (m, a): (usize, &SetExpr),
    (n, b): (usize, &SetExpr),
    s: &[Elem],
    w: &Window,
    d: &[Elem],
    claimed: usize,
    report: &mut ValidationReport,
) -> Result<()> {
    let dom = domain(u, a, w)?;
    let budget = u.budget(w);
    let distinct: HashSet<&Elem> = d.iter().collect();
    let subset = if d.is_empty() {
        Err("the violator is empty".to_string())
    } else if distinct.len() != d.len() {
        Err("the violator lists a point twice".to_string())
    } else {
        d.iter().find(|x| !dom.contains(*x)).map_or(Ok(()), |x| Err(format!("{x} is not a point of the set in the window")))
    };
    report.record("violator", subset);
    let mut nbhd = HashSet::new();
    for x in d {
        for t in s {
            let y = t.op(x);
            if !nbhd.contains(&y) && u.contains(b, &y, budget)? {
                nbhd.insert(y);
            }
        }
    }
    report.record(
        "neighborhood",
        if nbhd.len() == claimed { Ok(()) } else { Err(format!("claimed {claimed} but recomputed {}", nbhd.len())) },
    );
    report.record(
        "deficiency",
        if n * nbhd.len() < m * d.len() {
            Ok(())
        } else {
            Err(format!("{n}*|N(D)| = {} is not below {m}*|D| = {}", n * nbhd.len(), m * d.len()))
        },
    );
    Ok(())
}

fn replay_flow(
    u: &Universe,
    (m, a): (usize, &SetExpr),
    (n, b): (usize, &SetExpr),
    s: &[Elem],
    w: &Window,
    rows: &[(Elem, Vec<Elem>)],
    report: &mut ValidationReport,
) -> Result<()> {
    let dom = domain(u, a, w)?;
    check_domain(&dom, rows.iter().map(|r| &r.0), report);
    let budget = u.budget(w);
    let allowed: HashSet<&Elem> = s.iter().collect();
    let arity = rows.iter().find(|(_, ys)| ys.len() != m);
    report.record("copies", arity.map_or(Ok(()), |(x, ys)| Err(format!("{x} has {} targets, not {m}", ys.len()))));
    let mut load: HashMap<Elem, usize> = HashMap::new();
    let mut moves = Ok(());
    let mut inside = Ok(());
    for (x, ts) in rows {
        for t in ts {
            if moves.is_ok() && !allowed.contains(t) {
                moves = Err(format!("{t} at {x} is not in S"));
            }
            let y = t.op(x);
            if inside.is_ok() && !u.contains(b, &y, budget)? {
                inside = Err(format!("{t}*{x} = {y} is not in the target set"));
            }
            *load.entry(y).or_default() += 1;
        }
    }
    report.record("translators", moves);
    report.record("images", inside);
    let over = load.iter().filter(|(_, &k)| k > n).min_by_key(|(y, _)| (*y).clone());
    report.record("capacity", over.map_or(Ok(()), |(y, k)| Err(format!("{y} receives {k} > {n}"))));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradox::{doubling_matching, free_semigroup_witness, positive_window, type_order, Doubling, TypeOrder};

    fn el(g: GroupSpec, s: &str) -> Elem {
        g.parse_elem(s).unwrap()
    }

    fn resealed(mut c: Certificate) -> Certificate {
        c.digest = c.compute_digest();
        c
    }

    #[test]
    fn own_certificates_verify() {
        let z = GroupSpec::Zn(1);
        let u = Universe::new(z);
        let s: Vec<Elem> = z.ball(1).elements().to_vec();
        let Doubling::Deficiency(d) = doubling_matching(&u, &SetExpr::All, &s, &z.ball(3)).unwrap() else { panic!() };
        assert!(verify(&Certificate::from_deficiency(&d)).passed());

        let f = GroupSpec::Free(2);
        let uf = Universe::new(f);
        let sf: Vec<Elem> = f.ball(1).elements().to_vec();
        let Doubling::Match(m) = doubling_matching(&uf, &SetExpr::All, &sf, &f.ball(2)).unwrap() else { panic!() };
        assert!(verify(&Certificate::from_match(&m)).passed());

        let TypeOrder::Flow(fc) = type_order(&u, 1, &SetExpr::All, 2, &SetExpr::All, &s, &z.ball(3)).unwrap() else {
            panic!()
        };
        assert!(verify(&Certificate::from_flow(&fc)).passed());
        let TypeOrder::Deficiency(fd) = type_order(&u, 2, &SetExpr::All, 1, &SetExpr::All, &s, &z.ball(3)).unwrap()
        else {
            panic!()
        };
        assert!(verify(&Certificate::from_flow_deficiency(&fd)).passed());
    }

    #[test]
    fn forged_match_names_collision() {
        let f = GroupSpec::Free(2);
        let uf = Universe::new(f);
        let s: Vec<Elem> = f.ball(1).elements().to_vec();
        let Doubling::Match(m) = doubling_matching(&uf, &SetExpr::All, &s, &f.ball(2)).unwrap() else { panic!() };
        let mut c = Certificate::from_match(&m);
        let Payload::Match { assignment, .. } = &mut c.payload else { panic!() };
        assignment[1][1] = assignment[0][1].clone();
        assignment[1][0] = assignment[0][0].clone();
        let r = verify(&c);
        assert_eq!(r.first_failure().unwrap().name, "digest");
        let r = verify(&resealed(c));
        assert!(r.check("digest").unwrap().passed);
        assert!(r.check("injective").unwrap().detail.as_deref().unwrap().starts_with("collision"));
    }

    #[test]
    fn forged_deficiency_rejected() {
        let z = GroupSpec::Zn(1);
        let u = Universe::new(z);
        let s: Vec<Elem> = z.ball(1).elements().to_vec();
        let Doubling::Deficiency(d) = doubling_matching(&u, &SetExpr::All, &s, &z.ball(3)).unwrap() else { panic!() };
        let mut c = Certificate::from_deficiency(&d);
        let Payload::Deficiency { violator, neighborhood, .. } = &mut c.payload else { panic!() };
        violator.truncate(1);
        *neighborhood = 3;
        let r = verify(&resealed(c));
        assert!(r.check("neighborhood").unwrap().passed);
        assert!(!r.check("deficiency").unwrap().passed);
    }

    #[test]
    fn witness_and_cp_witness() {
        let g = GroupSpec::DyadicAffine;
        let u = Universe::new(g);
        let (s, t) = (el(g, "(2,0)"), el(g, "(2,1)"));
        let wit = free_semigroup_witness(g, &s, &t, 4).unwrap().unwrap();
        let w = positive_window(g, &s, &t, 4).unwrap();
        assert!(verify(&Certificate::from_witness(&wit, &w)).passed());
        let pw = pi_witness(&u, &wit, &w).unwrap();
        let c = Certificate::from_pi_witness(&wit, &pw, &w);
        assert!(verify(&c).passed());
        let mut bad = c.clone();
        let Payload::CpWitness { v, .. } = &mut bad.payload else { panic!() };
        v[0].t = "(1/4,0)".into();
        let r = verify(&resealed(bad));
        assert!(!r.check("v*v = p").unwrap().passed);
    }

    #[test]
    fn unparsable_content_is_a_failed_check() {
        let z = GroupSpec::Zn(1);
        let u = Universe::new(z);
        let s: Vec<Elem> = z.ball(1).elements().to_vec();
        let Doubling::Deficiency(d) = doubling_matching(&u, &SetExpr::All, &s, &z.ball(3)).unwrap() else { panic!() };
        let mut c = Certificate::from_deficiency(&d);
        c.group = "zn:0".into();
        let r = verify(&resealed(c));
        assert!(!r.check("parse").unwrap().passed);
    }
}
