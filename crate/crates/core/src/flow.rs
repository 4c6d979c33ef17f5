//! Dinic maximum flow on integer capacities.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i64,
    rev: usize,
}

pub struct FlowNetwork {
    graph: Vec<Vec<Edge>>,
    /// `(node, position)` of each forward edge, with its original capacity.
    handles: Vec<(usize, usize, i64)>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { graph: vec![Vec::new(); nodes], handles: Vec::new() }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let a = self.graph[from].len();
        let b = self.graph[to].len() + usize::from(from == to);
        self.graph[from].push(Edge { to, cap, rev: b });
        self.graph[to].push(Edge { to: from, cap: 0, rev: a });
        self.handles.push((from, a, cap));
        self.handles.len() - 1
    }

    /// Flow currently routed through edge `id`.
    pub fn flow(&self, id: usize) -> i64 {
        let (u, i, cap) = self.handles[id];
        cap - self.graph[u][i].cap
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.graph.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for e in &self.graph[u] {
                if e.cap > 0 && level[e.to] == usize::MAX {
                    level[e.to] = level[u] + 1;
                    q.push_back(e.to);
                }
            }
        }
        level
    }

    fn augment(&mut self, s: usize, t: usize, level: &[usize], it: &mut [usize]) -> i64 {
        // iterative blocking-flow search, one path per call
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = path.iter().map(|&(v, i)| self.graph[v][i].cap).min().unwrap_or(0);
                for &(v, i) in &path {
                    self.graph[v][i].cap -= push;
                    let (to, rev) = (self.graph[v][i].to, self.graph[v][i].rev);
                    self.graph[to][rev].cap += push;
                }
                return push;
            }
            let mut advanced = false;
            while it[u] < self.graph[u].len() {
                let e = &self.graph[u][it[u]];
                if e.cap > 0 && level[e.to] == level[u] + 1 {
                    path.push((u, it[u]));
                    u = e.to;
                    advanced = true;
                    break;
                }
                it[u] += 1;
            }
            if !advanced {
                match path.pop() {
                    Some((v, _)) => {
                        it[v] += 1;
                        u = v;
                    }
                    None => return 0,
                }
            }
        }
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0; self.graph.len()];
            loop {
                let f = self.augment(s, t, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn residual_reach(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != usize::MAX).collect()
    }
}
