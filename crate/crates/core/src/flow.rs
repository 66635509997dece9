//! Dinic max-flow on small dense networks.
//!
//! Capacities are `f64`. When callers pass integer-valued capacities below 2^53 every
//! augmentation is exact; otherwise residuals below `eps` are treated as saturated.

use std::collections::VecDeque;

pub(crate) struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    iter: Vec<usize>,
    eps: f64,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize, eps: f64) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
            eps,
        }
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0.0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > self.eps && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > self.eps && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.cap[e]));
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Flow currently on the `k`-th added edge.
    pub(crate) fn flow_on(&self, k: usize) -> f64 {
        self.cap[2 * k + 1]
    }
}

/// Max flow of the bipartite network `source → left → right → sink` with the given side
/// capacities and unbounded middle edges.
pub(crate) fn bipartite_flow(
    left: &[f64],
    right: &[f64],
    edges: impl Iterator<Item = (usize, usize)>,
    eps: f64,
) -> f64 {
    bipartite_flow_with(left, right, edges, eps).0
}

/// As [`bipartite_flow`], also returning the flow on each middle edge in input order.
pub(crate) fn bipartite_flow_with(
    left: &[f64],
    right: &[f64],
    edges: impl Iterator<Item = (usize, usize)>,
    eps: f64,
) -> (f64, Vec<(usize, usize, f64)>) {
    let (a, b) = (left.len(), right.len());
    let s = a + b;
    let t = s + 1;
    let mut net = FlowNetwork::new(a + b + 2, eps);
    let mut middle = Vec::new();
    for (i, &c) in left.iter().enumerate() {
        net.add_edge(s, i, c);
    }
    for (j, &c) in right.iter().enumerate() {
        net.add_edge(a + j, t, c);
    }
    let first = a + b;
    for (i, j) in edges {
        net.add_edge(i, a + j, f64::INFINITY);
        middle.push((i, j));
    }
    let total = net.max_flow(s, t);
    let flows = middle.into_iter().enumerate().map(|(k, (i, j))| (i, j, net.flow_on(first + k))).collect();
    (total, flows)
}
