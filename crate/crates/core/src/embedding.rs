//! Injective Lipschitz embedding of the free group on `a, b` built from a
//! paradoxical witness, and transport of piecewise translations along it.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Elem, GroupSpec, Window};
use crate::paradox::{base_maps, witness_check, ParadoxWitness};
use crate::pwt::{pwt_apply, pwt_compose, Pwt};
use crate::sets::{SetExpr, Universe};

const F2: GroupSpec = GroupSpec::Free(2);

/// Four maps with disjoint images and a base point outside all of them;
/// `f(e) = s0` and `f(c x) = map_c(f(x))` for `c` in `a, a^-1, b, b^-1`.
pub struct EmbeddingData {
    pub group: GroupSpec,
    /// `sigma+`, `sigma-`, `tau+`, `tau-`.
    pub maps: [Pwt; 4],
    pub base: Elem,
    universe: Universe,
    budget: u32,
    memo: Mutex<HashMap<Vec<i8>, Elem>>,
}

fn letter_map(l: i8) -> usize {
    match l {
        1 => 0,
        -1 => 1,
        2 => 2,
        _ => 3,
    }
}

impl EmbeddingData {
    /// Assembles embedding data from explicit maps; `budget` bounds
    /// semigroup membership during evaluation.
    pub fn from_parts(group: GroupSpec, maps: [Pwt; 4], base: Elem, slack: u32, budget: u32) -> Self {
        EmbeddingData {
            group,
            maps,
            base,
            universe: Universe::with_slack(group, slack),
            budget,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn step(&self, map: usize, y: &Elem) -> Result<Elem> {
        pwt_apply(&self.universe, &self.maps[map], y, self.budget).map_err(|e| {
            let needed = match self.group.word_length(y, 24) {
                Some(r) => format!("a window of radius at least {r}"),
                None => "a window of radius above 24".to_string(),
            };
            Error::LeftWindow { elem: y.to_string(), reason: format!("{e}; rebuild on {needed} or raise the budget") }
        })
    }

    /// `f(x)` for a reduced word `x` in `a, b`.
    pub fn eval(&self, x: &Elem) -> Result<Elem> {
        let letters = match x {
            Elem::Word(w) if F2.check(x).is_ok() => w,
            _ => return Err(Error::Precondition(format!("{x:?} is not a reduced word in free:2"))),
        };
        let mut memo = self.memo.lock().unwrap();
        // longest memoized suffix
        let mut start = letters.len();
        let mut value = self.base.clone();
        for i in 0..=letters.len() {
            if let Some(v) = memo.get(&letters[i..]) {
                start = i;
                value = v.clone();
                break;
            }
        }
        for i in (0..start).rev() {
            value = self.step(letter_map(letters[i]), &value)?;
            memo.insert(letters[i..].to_vec(), value.clone());
        }
        Ok(value)
    }
}

/// Builds the four maps `sigma+ sigma_e sigma_d` for `e, d` in `+, -`, and
/// `s0 = sigma-(a0)` for the first `a0` of `A` in `w`.
pub fn build_embedding(u: &Universe, wit: &ParadoxWitness, w: &Window) -> Result<EmbeddingData> {
    let report = witness_check(u, wit, w);
    if let Some(c) = report.first_failure() {
        return Err(Error::InvalidWitness(format!("{}: {}", c.name, c.detail.clone().unwrap_or_default())));
    }
    let a0 = u
        .materialize(&wit.set, w)
        .exact()?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("the set has no points in the window".into()))?;
    let (plus, minus) = base_maps(wit);
    let pp = pwt_compose(u, &plus, &plus, w)?;
    let pm = pwt_compose(u, &plus, &minus, w)?;
    let mp = pwt_compose(u, &minus, &plus, w)?;
    let mm = pwt_compose(u, &minus, &minus, w)?;
    let maps = [
        pwt_compose(u, &plus, &pp, w)?,
        pwt_compose(u, &plus, &pm, w)?,
        pwt_compose(u, &plus, &mp, w)?,
        pwt_compose(u, &plus, &mm, w)?,
    ];
    let budget = u.budget(w);
    let base = pwt_apply(u, &minus, &a0, budget)?;
    Ok(EmbeddingData::from_parts(u.group(), maps, base, u.slack(), budget))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzReport {
    pub radius: u32,
    pub evaluated: usize,
    pub injective: bool,
    /// Observed `f(x) f(y)^-1` for `x y^-1` a generator.
    pub t_prime: Vec<Elem>,
    /// Translators of the four maps and their inverses, sorted.
    pub t: Vec<Elem>,
    pub violations: Vec<String>,
}

impl LipschitzReport {
    pub fn to_json(&self) -> Value {
        json!({
            "injective": self.injective,
            "L": self.radius,
            "evaluated": self.evaluated,
            "tSize": self.t.len(),
            "T": self.t.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "violations": self.violations,
        })
    }
}

/// Evaluates `f` on the radius-`l` ball of the free group and checks
/// injectivity, and that every observed displacement lies in `T`.
pub fn check_injective_lipschitz(e: &EmbeddingData, l: u32) -> Result<LipschitzReport> {
    if l == 0 {
        return Err(Error::Precondition("radius must be at least 1".into()));
    }
    let ball = F2.ball(l);
    let mut values: HashMap<Elem, Elem> = HashMap::with_capacity(ball.len());
    let mut seen: HashMap<Elem, Elem> = HashMap::with_capacity(ball.len());
    let mut violations = Vec::new();
    for x in ball.elements() {
        let v = e.eval(x)?;
        if let Some(prev) = seen.insert(v.clone(), x.clone()) {
            violations.push(format!("f({prev}) = f({x}) = {v}"));
        }
        values.insert(x.clone(), v);
    }
    let injective = violations.is_empty();
    let gens = F2.generators();
    let mut t_prime: BTreeSet<Elem> = BTreeSet::new();
    let mut pairs = Vec::new();
    for y in ball.elements() {
        for c in &gens {
            let x = c.op(y);
            if let Some(fx) = values.get(&x) {
                let d = fx.op(&values[y].inverse());
                t_prime.insert(d.clone());
                pairs.push((x, y.clone(), d));
            }
        }
    }
    let t: BTreeSet<Elem> =
        e.maps.iter().flat_map(|m| m.translators()).flat_map(|d| [d.clone(), d.inverse()]).collect();
    for (x, y, d) in pairs {
        if !t.contains(&d) {
            violations.push(format!("f({x}) f({y})^-1 = {d} is not in T"));
        }
    }
    Ok(LipschitzReport {
        radius: l,
        evaluated: ball.len(),
        injective,
        t_prime: t_prime.into_iter().collect(),
        t: t.into_iter().collect(),
        violations,
    })
}

/// The map `tau` on `f(dom sigma ∩ W)` with `tau(f(x)) = f(sigma(x))`,
/// one finite piece per observed displacement.
pub fn transported_pwt(f: &dyn Fn(&Elem) -> Result<Elem>, u: &Universe, sigma: &Pwt, w: &Window) -> Result<Pwt> {
    let budget = u.budget(w);
    let points = u.materialize(&sigma.domain, w).exact()?;
    let mut fvals: HashMap<Elem, Elem> = HashMap::new();
    let mut preimage: HashMap<Elem, Elem> = HashMap::new();
    let mut record = |x: &Elem| -> Result<Elem> {
        if let Some(v) = fvals.get(x) {
            return Ok(v.clone());
        }
        let v = f(x)?;
        if let Some(prev) = preimage.insert(v.clone(), x.clone()) {
            if &prev != x {
                return Err(Error::NotInjective { first: prev.to_string(), second: x.to_string(), image: v.to_string() });
            }
        }
        fvals.insert(x.clone(), v.clone());
        Ok(v)
    };
    let mut groups: Vec<(Elem, Vec<Elem>)> = Vec::new();
    let mut domain = Vec::new();
    for x in &points {
        let fx = record(x)?;
        let fy = record(&pwt_apply(u, sigma, x, budget)?)?;
        let d = fy.op(&fx.inverse());
        domain.push(fx.clone());
        match groups.iter_mut().find(|(t, _)| *t == d) {
            Some((_, v)) => v.push(fx),
            None => groups.push((d, vec![fx])),
        }
    }
    let pieces = groups.into_iter().map(|(d, xs)| (SetExpr::finite(xs), d)).collect();
    Ok(Pwt::new(SetExpr::finite(domain), pieces))
}
