//! Membership in finitely generated subsemigroups.
//!
//! When some homomorphism `h: G -> Z` is positive on every generator, a word
//! for `g` has at most `h(g) / min h(gen)` letters, so a backward search
//! `g = gen * x` decides membership exactly. Otherwise products are
//! enumerated forward up to a length budget and misses are reported as
//! undecided.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use crate::group::{Elem, GroupSpec};
use crate::Membership;

const NODE_CAP: usize = 1 << 20;
const FORWARD_CAP: usize = 1 << 21;

#[derive(Clone, Debug)]
enum Height {
    /// Weighted exponent sums (free groups) or coordinates (`Z^d`).
    Linear(Vec<i64>),
    /// `sign * log_2(a)` on the affine group.
    Slope(i64),
}

impl Height {
    fn value(&self, g: &Elem) -> i64 {
        match (self, g) {
            (Height::Linear(c), Elem::Word(w)) => w
                .iter()
                .map(|&l| {
                    let w = c[(l.unsigned_abs() - 1) as usize];
                    if l > 0 {
                        w
                    } else {
                        -w
                    }
                })
                .sum(),
            (Height::Linear(c), Elem::Vector(v)) => c.iter().zip(v).map(|(a, b)| a * b).sum(),
            (Height::Slope(sign), Elem::Affine { log_a, .. }) => sign * log_a,
            _ => 0,
        }
    }
}

fn abelianize(group: GroupSpec, g: &Elem) -> Vec<i64> {
    match (group, g) {
        (GroupSpec::Free(k), Elem::Word(w)) => {
            let mut v = vec![0; k as usize];
            for &l in w {
                v[(l.unsigned_abs() - 1) as usize] += if l > 0 { 1 } else { -1 };
            }
            v
        }
        (_, Elem::Vector(v)) => v.to_vec(),
        (_, Elem::Affine { log_a, .. }) => vec![*log_a],
        _ => Vec::new(),
    }
}

fn find_height(group: GroupSpec, gens: &[Elem]) -> Option<(Height, i64)> {
    if gens.is_empty() {
        return None;
    }
    let vecs: Vec<Vec<i64>> = gens.iter().map(|g| abelianize(group, g)).collect();
    let n = vecs[0].len();
    if group == GroupSpec::DyadicAffine {
        for sign in [1, -1] {
            let h = Height::Slope(sign);
            let min = gens.iter().map(|g| h.value(g)).min().unwrap();
            if min > 0 {
                return Some((h, min));
            }
        }
        return None;
    }
    let range: i64 = if n <= 4 { 2 } else { 1 };
    if n > 8 {
        let sum: Vec<i64> = (0..n).map(|i| vecs.iter().map(|v| v[i]).sum()).collect();
        let h = Height::Linear(sum);
        let min = gens.iter().map(|g| h.value(g)).min().unwrap();
        return (min > 0).then_some((h, min));
    }
    let side = (2 * range + 1) as usize;
    let total = side.pow(n as u32);
    let mut best: Option<(Height, i64)> = None;
    for code in 0..total {
        let mut c = Vec::with_capacity(n);
        let mut x = code;
        for _ in 0..n {
            c.push((x % side) as i64 - range);
            x /= side;
        }
        let min = vecs.iter().map(|v| v.iter().zip(&c).map(|(a, b)| a * b).sum::<i64>()).min().unwrap();
        if min > 0 {
            // Prefer weights that let the backward search terminate soonest.
            let scale: i64 = c.iter().map(|x| x.abs()).max().unwrap_or(1);
            let better = match &best {
                None => true,
                Some((Height::Linear(bc), bmin)) => {
                    let bscale: i64 = bc.iter().map(|x| x.abs()).max().unwrap_or(1);
                    min * bscale > bmin * scale
                }
                _ => false,
            };
            if better {
                best = Some((Height::Linear(c), min));
            }
        }
    }
    best
}

pub(crate) struct SemigroupOracle {
    gens: Vec<Elem>,
    inverses: Vec<Elem>,
    include_identity: bool,
    identity: Elem,
    height: Option<(Height, i64)>,
    /// For affine generators with nonnegative slopes, every product has
    /// translation part with denominator at most `2^max_den`.
    max_den: Option<u32>,
    memo: Mutex<HashMap<Elem, bool>>,
    forward: Mutex<Option<(u32, HashSet<Elem>)>>,
}

impl SemigroupOracle {
    pub(crate) fn new(group: GroupSpec, gens: &[Elem], include_identity: bool) -> Self {
        let max_den = if group == GroupSpec::DyadicAffine
            && gens.iter().all(|g| matches!(g, Elem::Affine { log_a, .. } if *log_a >= 0))
        {
            gens.iter()
                .map(|g| match g {
                    Elem::Affine { b, .. } => b.denominator_exponent(),
                    _ => 0,
                })
                .max()
        } else {
            None
        };
        SemigroupOracle {
            gens: gens.to_vec(),
            inverses: gens.iter().map(|g| g.inverse()).collect(),
            include_identity,
            identity: group.identity(),
            height: find_height(group, gens),
            max_den,
            memo: Mutex::new(HashMap::new()),
            forward: Mutex::new(None),
        }
    }

    pub(crate) fn is_exact(&self) -> bool {
        self.height.is_some()
    }

    pub(crate) fn member(&self, g: &Elem, budget: u32) -> Membership {
        if g == &self.identity && self.include_identity {
            return Membership::In;
        }
        if self.gens.is_empty() {
            return Membership::Out;
        }
        match &self.height {
            Some((h, min)) => {
                if g == &self.identity {
                    return Membership::Out;
                }
                let mut memo = self.memo.lock().unwrap();
                let mut nodes = 0;
                match self.reach(g, h, *min, &mut memo, &mut nodes, 0) {
                    Some(true) => Membership::In,
                    Some(false) => Membership::Out,
                    None => Membership::Unknown,
                }
            }
            None => self.forward_member(g, budget),
        }
    }

    fn reach(
        &self,
        g: &Elem,
        h: &Height,
        min: i64,
        memo: &mut HashMap<Elem, bool>,
        nodes: &mut usize,
        depth: usize,
    ) -> Option<bool> {
        if g == &self.identity {
            return Some(true);
        }
        if let Some(&b) = memo.get(g) {
            return Some(b);
        }
        let hg = h.value(g);
        if hg < min {
            memo.insert(g.clone(), false);
            return Some(false);
        }
        if let (Some(max_den), Elem::Affine { b, .. }) = (self.max_den, g) {
            if b.denominator_exponent() > max_den {
                memo.insert(g.clone(), false);
                return Some(false);
            }
        }
        *nodes += 1;
        if *nodes > NODE_CAP || depth > 4096 {
            return None;
        }
        for (gen, inv) in self.gens.iter().zip(&self.inverses) {
            if h.value(gen) > hg {
                continue;
            }
            let x = inv.op(g);
            match self.reach(&x, h, min, memo, nodes, depth + 1) {
                Some(true) => {
                    memo.insert(g.clone(), true);
                    return Some(true);
                }
                Some(false) => {}
                None => return None,
            }
        }
        memo.insert(g.clone(), false);
        Some(false)
    }

    fn forward_member(&self, g: &Elem, budget: u32) -> Membership {
        let mut cache = self.forward.lock().unwrap();
        let stale = match &*cache {
            Some((depth, _)) => *depth < budget,
            None => true,
        };
        if stale {
            let mut seen: HashSet<Elem> = HashSet::new();
            let mut frontier: Vec<Elem> = self.gens.clone();
            seen.extend(frontier.iter().cloned());
            for _ in 1..budget.max(1) {
                let mut next = Vec::new();
                for x in &frontier {
                    for s in &self.gens {
                        let y = x.op(s);
                        if seen.insert(y.clone()) {
                            next.push(y);
                        }
                    }
                }
                frontier = next;
                if seen.len() > FORWARD_CAP {
                    break;
                }
            }
            *cache = Some((budget, seen));
        }
        let (_, seen) = cache.as_ref().unwrap();
        if seen.contains(g) {
            Membership::In
        } else {
            Membership::Unknown
        }
    }
}
