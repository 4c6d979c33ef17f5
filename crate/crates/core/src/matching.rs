//! Hopcroft-Karp maximum bipartite matching with alternating reachability.

use std::collections::VecDeque;

use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use crate::group::Elem;

const NIL: usize = usize::MAX;

/// Left vertices are `0..n`; right vertices are group elements, indexed in
/// order of first appearance. Each edge carries a caller-chosen label,
/// usually the index of its translator. Copies of a left vertex share its
/// edge list.
pub struct BipartiteGraph {
    rows: Vec<usize>,
    lists: Vec<Vec<(usize, usize)>>,
    right: IndexSet<Elem, FxBuildHasher>,
}

pub struct Matching {
    left: Vec<usize>,
    right: Vec<usize>,
    size: usize,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.size
    }

    /// The right vertex matched to left vertex `i`.
    pub fn partner(&self, i: usize) -> Option<usize> {
        let r = self.left[i];
        (r != NIL).then_some(r)
    }
}

impl BipartiteGraph {
    pub fn new(left: usize) -> Self {
        BipartiteGraph::with_capacity(left, 0, 0)
    }

    /// Reserves room for `right` right vertices and `degree` edges per left vertex.
    pub fn with_capacity(left: usize, right: usize, degree: usize) -> Self {
        BipartiteGraph {
            rows: (0..left).collect(),
            lists: (0..left).map(|_| Vec::with_capacity(degree)).collect(),
            right: IndexSet::with_capacity_and_hasher(right, FxBuildHasher),
        }
    }

    fn edges(&self, i: usize) -> &[(usize, usize)] {
        &self.lists[self.rows[i]]
    }

    pub fn left_len(&self) -> usize {
        self.rows.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn right_elem(&self, r: usize) -> &Elem {
        &self.right[r]
    }

    pub fn add_edge(&mut self, left: usize, right: Elem, label: usize) {
        let (r, _) = self.right.insert_full(right);
        let list = &mut self.lists[self.rows[left]];
        if list.iter().any(|&(x, _)| x == r) {
            return;
        }
        list.push((r, label));
    }

    /// Adds a left vertex with the same edges as `other`, now and later.
    pub fn add_copy(&mut self, other: usize) -> usize {
        self.rows.push(self.rows[other]);
        self.rows.len() - 1
    }

    pub fn label_of(&self, left: usize, right: usize) -> usize {
        self.edges(left).iter().find(|&&(r, _)| r == right).expect("no such edge").1
    }

    pub fn neighbors(&self, left: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges(left).iter().map(|&(r, _)| r)
    }

    pub fn max_matching(&self) -> Matching {
        let n = self.rows.len();
        let mut m = Matching { left: vec![NIL; n], right: vec![NIL; self.right.len()], size: 0 };
        let mut dist = vec![0usize; n];
        let mut it = vec![0usize; n];
        let mut stack: Vec<usize> = Vec::new();
        // greedy start
        for i in 0..n {
            if let Some(&(r, _)) = self.edges(i).iter().find(|&&(r, _)| m.right[r] == NIL) {
                m.left[i] = r;
                m.right[r] = i;
                m.size += 1;
            }
        }
        let mut queue = VecDeque::new();
        loop {
            // layer the free left vertices
            queue.clear();
            for i in 0..n {
                if m.left[i] == NIL {
                    dist[i] = 0;
                    queue.push_back(i);
                } else {
                    dist[i] = usize::MAX;
                }
            }
            let mut found = false;
            while let Some(i) = queue.pop_front() {
                for &(r, _) in self.edges(i) {
                    let j = m.right[r];
                    if j == NIL {
                        found = true;
                    } else if dist[j] == usize::MAX {
                        dist[j] = dist[i] + 1;
                        queue.push_back(j);
                    }
                }
            }
            if !found {
                return m;
            }
            it.iter_mut().for_each(|x| *x = 0);
            for root in 0..n {
                if m.left[root] != NIL {
                    continue;
                }
                stack.clear();
                stack.push(root);
                while let Some(&i) = stack.last() {
                    if it[i] == self.edges(i).len() {
                        dist[i] = usize::MAX;
                        stack.pop();
                        continue;
                    }
                    let (r, _) = self.edges(i)[it[i]];
                    let j = m.right[r];
                    if j == NIL {
                        // augment along the stack
                        let mut r = r;
                        while let Some(i) = stack.pop() {
                            let prev = m.left[i];
                            m.left[i] = r;
                            m.right[r] = i;
                            r = prev;
                        }
                        m.size += 1;
                        break;
                    }
                    if dist[j] != usize::MAX && dist[j] == dist[i] + 1 {
                        stack.push(j);
                    } else {
                        it[i] += 1;
                    }
                }
            }
        }
    }

    /// Left and right vertices reachable from unmatched left vertices along
    /// alternating paths (any edge left to right, matched edge back).
    pub fn alternating_reach(&self, m: &Matching) -> (Vec<bool>, Vec<bool>) {
        let mut left = vec![false; self.rows.len()];
        let mut right = vec![false; self.right.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for i in 0..self.rows.len() {
            if m.left[i] == NIL {
                left[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &(r, _) in self.edges(i) {
                if right[r] {
                    continue;
                }
                right[r] = true;
                let j = m.right[r];
                if j != NIL && !left[j] {
                    left[j] = true;
                    queue.push_back(j);
                }
            }
        }
        (left, right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: i64) -> Elem {
        Elem::vector(&[i])
    }

    #[test]
    fn perfect_matching_found() {
        // 0 - {0,1}, 1 - {0}, 2 - {1,2}
        let mut g = BipartiteGraph::new(3);
        g.add_edge(0, e(0), 0);
        g.add_edge(0, e(1), 0);
        g.add_edge(1, e(0), 0);
        g.add_edge(2, e(1), 0);
        g.add_edge(2, e(2), 0);
        let m = g.max_matching();
        assert_eq!(m.size(), 3);
        assert_eq!(g.right_elem(m.partner(1).unwrap()), &e(0));
    }

    #[test]
    fn hall_violator_from_reachability() {
        // three left vertices share two right vertices
        let mut g = BipartiteGraph::new(3);
        for i in 0..3 {
            g.add_edge(i, e(0), 0);
            g.add_edge(i, e(1), 0);
        }
        let m = g.max_matching();
        assert_eq!(m.size(), 2);
        let (l, r) = g.alternating_reach(&m);
        assert_eq!(l.iter().filter(|x| **x).count(), 3);
        assert_eq!(r.iter().filter(|x| **x).count(), 2);
    }

    #[test]
    fn long_augmenting_paths() {
        // a path graph forces augmentations through the whole chain
        let n = 2000;
        let mut g = BipartiteGraph::new(n);
        for i in 0..n {
            g.add_edge(i, e(i as i64), 0);
            if i + 1 < n {
                g.add_edge(i + 1, e(i as i64), 0);
            }
        }
        assert_eq!(g.max_matching().size(), n);
    }
}
