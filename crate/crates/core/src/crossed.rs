//! Finite sums `Σ f_t u_t` with coefficients that are rational
//! combinations of set indicators, and the projection identities built
//! from paradoxical witnesses.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{Elem, Window};
use crate::paradox::{witness_check, ParadoxWitness};
use crate::report::ValidationReport;
use crate::sets::{SetExpr, Universe};

/// `Σ q_i 1_{A_i}`, sorted by set with no zero or repeated terms.
pub type Coeff = Vec<(BigRational, SetExpr)>;

fn normalize(terms: impl IntoIterator<Item = (BigRational, SetExpr)>) -> Coeff {
    let mut merged: BTreeMap<SetExpr, BigRational> = BTreeMap::new();
    for (q, a) in terms {
        if a == SetExpr::Empty || q.is_zero() {
            continue;
        }
        *merged.entry(a).or_insert_with(BigRational::zero) += q;
    }
    merged.into_iter().filter(|(_, q)| !q.is_zero()).map(|(a, q)| (q, a)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CPElem {
    terms: BTreeMap<Elem, Coeff>,
}

impl CPElem {
    pub fn zero() -> Self {
        CPElem::default()
    }

    pub fn term(q: BigRational, a: SetExpr, t: Elem) -> Self {
        let mut x = CPElem::zero();
        x.push(t, vec![(q, a)]);
        x
    }

    /// `1_A u_e`.
    pub fn indicator(a: SetExpr, identity: Elem) -> Self {
        CPElem::term(BigRational::one(), a, identity)
    }

    /// `u_t`.
    pub fn unitary(t: Elem) -> Self {
        CPElem::term(BigRational::one(), SetExpr::All, t)
    }

    fn push(&mut self, t: Elem, c: Coeff) {
        let entry = self.terms.remove(&t).unwrap_or_default();
        let merged = normalize(entry.into_iter().chain(c));
        if !merged.is_empty() {
            self.terms.insert(t, merged);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Elem, &Coeff)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<Elem> {
        self.terms.keys().cloned().collect()
    }

    pub fn coeff(&self, t: &Elem) -> Option<&Coeff> {
        self.terms.get(t)
    }

    pub fn add(&self, other: &CPElem) -> CPElem {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.push(t.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> CPElem {
        let mut out = CPElem::zero();
        for (t, c) in &self.terms {
            out.push(t.clone(), c.iter().map(|(p, a)| (p * q, a.clone())).collect());
        }
        out
    }

    pub fn sub(&self, other: &CPElem) -> CPElem {
        self.add(&other.scale(&-BigRational::one()))
    }

    /// `(f u_t)(g u_r) = f (t.g) u_{tr}`.
    pub fn mul(&self, other: &CPElem) -> CPElem {
        let mut out = CPElem::zero();
        for (t, f) in &self.terms {
            for (r, g) in &other.terms {
                let mut c = Vec::new();
                for (p, a) in f {
                    for (q, b) in g {
                        c.push((p * q, SetExpr::intersect(a.clone(), SetExpr::translate(t, b))));
                    }
                }
                out.push(t.op(r), c);
            }
        }
        out
    }

    /// `(f u_t)* = (t^-1.f) u_{t^-1}`.
    pub fn adjoint(&self) -> CPElem {
        let mut out = CPElem::zero();
        for (t, f) in &self.terms {
            let ti = t.inverse();
            out.push(ti.clone(), f.iter().map(|(q, a)| (q.clone(), SetExpr::translate(&ti, a))).collect());
        }
        out
    }
}

fn fmt_q(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for CPElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, c) in &self.terms {
            for (q, a) in c {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{}*[{}]u({})", fmt_q(q), a, t)?;
            }
        }
        Ok(())
    }
}

/// Value of the coefficient at `g`.
pub fn eval_coeff(u: &Universe, c: &Coeff, g: &Elem, budget: u32) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for (q, a) in c {
        if u.contains(a, g, budget)? {
            acc += q;
        }
    }
    Ok(acc)
}

/// First `(t, g)` with `g` in `w` where the `u_t` coefficient of `x` is nonzero.
pub fn first_nonzero(u: &Universe, x: &CPElem, w: &Window) -> Result<Option<(Elem, Elem)>> {
    let budget = u.budget(w);
    for (t, c) in &x.terms {
        for g in w.elements() {
            if !eval_coeff(u, c, g, budget)?.is_zero() {
                return Ok(Some((t.clone(), g.clone())));
            }
        }
    }
    Ok(None)
}

/// Whether `x` and `y` agree coefficientwise on `w`.
pub fn equal_on(u: &Universe, x: &CPElem, y: &CPElem, w: &Window) -> Result<bool> {
    Ok(first_nonzero(u, &x.sub(y), w)?.is_none())
}

/// `p = 1_A` with partial isometries `v, w` such that `v*v = p = w*w`,
/// `vv* ww* = 0` and `vv*, ww* <= p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PIWitness {
    pub p: SetExpr,
    pub v: CPElem,
    pub w: CPElem,
}

/// `v = Σ_{j<=n} 1_{A_j'} u_{t_j}^*` where `A_j'` is the part of `A_j` not
/// already reached by earlier translates; `w` likewise for the second family.
pub fn pi_witness(u: &Universe, wit: &ParadoxWitness, win: &Window) -> Result<PIWitness> {
    let report = witness_check(u, wit, win);
    if let Some(c) = report.first_failure() {
        return Err(Error::InvalidWitness(format!("{}: {}", c.name, c.detail.clone().unwrap_or_default())));
    }
    let build = |family: &[(SetExpr, Elem)]| {
        let mut out = CPElem::zero();
        let mut before = SetExpr::Empty;
        for (piece, t) in family {
            let image = SetExpr::translate(t, piece);
            let fresh = SetExpr::diff(image.clone(), before.clone());
            before = SetExpr::union(before, image);
            let ti = t.inverse();
            out = out.add(&CPElem::term(BigRational::one(), SetExpr::translate(&ti, &fresh), ti));
        }
        out
    };
    let (first, second) = wit.families();
    Ok(PIWitness { p: wit.set.clone(), v: build(first), w: build(second) })
}

pub fn verify_pi_witness(u: &Universe, pw: &PIWitness, win: &Window) -> ValidationReport {
    let identity = u.group().identity();
    let p = CPElem::indicator(pw.p.clone(), identity);
    let vv = pw.v.mul(&pw.v.adjoint());
    let ww = pw.w.mul(&pw.w.adjoint());
    let checks = [
        ("v*v = p", pw.v.adjoint().mul(&pw.v).sub(&p)),
        ("w*w = p", pw.w.adjoint().mul(&pw.w).sub(&p)),
        ("vv* ww* = 0", vv.mul(&ww)),
        ("p vv* = vv*", p.mul(&vv).sub(&vv)),
        ("p ww* = ww*", p.mul(&ww).sub(&ww)),
    ];
    let mut report = ValidationReport::new();
    for (name, diff) in checks {
        let outcome = match first_nonzero(u, &diff, win) {
            Ok(None) => Ok(()),
            Ok(Some((t, g))) => Err(format!("coefficient of u({t}) is nonzero at {g}")),
            Err(e) => Err(e.to_string()),
        };
        report.record(name, outcome);
    }
    report
}

/// `1_A x 1_A` with, for each `t != e` in its support, the number of window
/// points where the coefficient is nonzero.
pub fn corner_compress(u: &Universe, a: &SetExpr, x: &CPElem, win: &Window) -> Result<(CPElem, Vec<(Elem, usize)>)> {
    let pa = CPElem::indicator(a.clone(), u.group().identity());
    let y = pa.mul(x).mul(&pa);
    let budget = u.budget(win);
    let mut sizes = Vec::new();
    for (t, c) in y.terms() {
        if t.is_identity() {
            continue;
        }
        let mut n = 0;
        for g in win.elements() {
            if !eval_coeff(u, c, g, budget)?.is_zero() {
                n += 1;
            }
        }
        sizes.push((t.clone(), n));
    }
    Ok((y, sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::paradox::{free_semigroup_witness, positive_window};

    fn bs() -> GroupSpec {
        GroupSpec::DyadicAffine
    }

    fn el(s: &str) -> Elem {
        bs().parse_elem(s).unwrap()
    }

    fn a() -> SetExpr {
        SetExpr::parse(bs(), "semigroup((2,0),(2,1);e)").unwrap()
    }

    #[test]
    fn products_of_indicators() {
        let e = bs().identity();
        let x = CPElem::indicator(SetExpr::Ball(2), e.clone());
        let y = CPElem::indicator(a(), e.clone());
        assert_eq!(x.mul(&y), CPElem::indicator(SetExpr::intersect(SetExpr::Ball(2), a()), e.clone()));
        let s = el("(2,0)");
        let cov = CPElem::unitary(s.clone()).mul(&y);
        assert_eq!(cov, CPElem::term(BigRational::one(), SetExpr::translate(&s, &a()), s.clone()));
        let v = CPElem::term(BigRational::one(), SetExpr::translate(&s, &a()), s.clone());
        assert_eq!(v.adjoint(), CPElem::term(BigRational::one(), a(), s.inverse()));
        assert_eq!(v.adjoint().mul(&v), CPElem::indicator(a(), e.clone()));
        assert_eq!(x.adjoint(), x);
        assert_eq!(v.adjoint().adjoint(), v);
    }

    #[test]
    fn display_form() {
        let v = CPElem::term(BigRational::new(1.into(), 2.into()), SetExpr::Ball(1), el("(2,0)"));
        assert_eq!(v.to_string(), "1/2*[ball(1)]u((2,0))");
        assert_eq!(CPElem::zero().to_string(), "0");
    }

    #[test]
    fn example_witness_identities() {
        let s = el("(2,0)");
        let t = el("(2,1)");
        let u = Universe::new(bs());
        let wit = free_semigroup_witness(bs(), &s, &t, 6).unwrap().unwrap();
        let win = positive_window(bs(), &s, &t, 4).unwrap();
        let pw = pi_witness(&u, &wit, &win).unwrap();
        assert_eq!(pw.v, CPElem::term(BigRational::one(), SetExpr::translate(&s, &a()), s.clone()));
        assert_eq!(pw.w, CPElem::term(BigRational::one(), SetExpr::translate(&t, &a()), t.clone()));
        assert!(verify_pi_witness(&u, &pw, &win).passed());

        let tampered = PIWitness { v: CPElem::term(BigRational::one(), SetExpr::translate(&s, &a()), t.clone()), ..pw };
        let r = verify_pi_witness(&u, &tampered, &win);
        assert!(!r.check("v*v = p").unwrap().passed);
    }

    #[test]
    fn empty_projection_passes() {
        let u = Universe::new(bs());
        let pw = PIWitness { p: SetExpr::Empty, v: CPElem::zero(), w: CPElem::zero() };
        assert!(verify_pi_witness(&u, &pw, &bs().ball(2)).passed());
    }

    #[test]
    fn corner_of_greedy_set() {
        let z = GroupSpec::Zn(1);
        let u = Universe::new(z);
        let one = z.parse_elem("1").unwrap();
        let (y, sizes) = corner_compress(&u, &SetExpr::Greedy(50), &CPElem::unitary(one.clone()), &z.ball(60)).unwrap();
        assert_eq!(y.support(), vec![one]);
        assert!(sizes[0].1 <= 2);
        let f = CPElem::indicator(SetExpr::Ball(3), z.identity());
        let (y, sizes) = corner_compress(&u, &SetExpr::Greedy(50), &f, &z.ball(60)).unwrap();
        assert!(sizes.is_empty());
        assert_eq!(y.support(), vec![z.identity()]);
    }
}
