//! Max-flow / min-cut on directed graphs with real capacities (Dinic's
//! algorithm with a CSR adjacency), used as the kernel of each binary
//! expansion move.

use crate::real::Real;

/// Directed arc spec: `(from, to, capacity, reverse_capacity)`.
pub type Arc<F> = (u32, u32, F, F);

pub struct FlowGraph<F: Real> {
    node_count: usize,
    // Paired edges: edge 2i runs forward, 2i+1 backward.
    to: Vec<u32>,
    cap: Vec<F>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    level: Vec<i32>,
    iter: Vec<u32>,
    eps: F,
}

impl<F: Real> FlowGraph<F> {
    pub fn build(node_count: usize, arcs: &[Arc<F>]) -> Self {
        let mut to = Vec::with_capacity(arcs.len() * 2);
        let mut cap = Vec::with_capacity(arcs.len() * 2);
        let mut deg = vec![0u32; node_count];
        for &(u, v, c, rc) in arcs {
            debug_assert!(c >= F::zero() && rc >= F::zero());
            to.push(v);
            cap.push(c);
            to.push(u);
            cap.push(rc);
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut adj_start = vec![0u32; node_count + 1];
        for i in 0..node_count {
            adj_start[i + 1] = adj_start[i] + deg[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![0u32; arcs.len() * 2];
        for (i, &(u, v, _, _)) in arcs.iter().enumerate() {
            let e = (2 * i) as u32;
            adj[fill[u as usize] as usize] = e;
            fill[u as usize] += 1;
            adj[fill[v as usize] as usize] = e + 1;
            fill[v as usize] += 1;
        }
        Self {
            node_count,
            to,
            cap,
            adj_start,
            adj,
            level: vec![-1; node_count],
            iter: vec![0; node_count],
            eps: F::c(1e-9),
        }
    }

    fn bfs(&mut self, s: u32, t: u32) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s as usize] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for ai in self.adj_start[u as usize]..self.adj_start[u as usize + 1] {
                let e = self.adj[ai as usize] as usize;
                let v = self.to[e] as usize;
                if self.cap[e] > self.eps && self.level[v] < 0 {
                    self.level[v] = self.level[u as usize] + 1;
                    queue.push_back(v as u32);
                }
            }
        }
        self.level[t as usize] >= 0
    }

    // One augmenting path in the level graph, iteratively (expansion graphs
    // can be deep enough to overflow a thread stack with recursion).
    fn augment(&mut self, s: u32, t: u32, path: &mut Vec<u32>) -> F {
        path.clear();
        let mut u = s;
        loop {
            if u == t {
                let mut bottleneck = F::infinity();
                for &e in path.iter() {
                    bottleneck = bottleneck.min(self.cap[e as usize]);
                }
                for &e in path.iter() {
                    let e = e as usize;
                    self.cap[e] = self.cap[e] - bottleneck;
                    self.cap[e ^ 1] = self.cap[e ^ 1] + bottleneck;
                }
                return bottleneck;
            }
            let mut advanced = false;
            while self.iter[u as usize]
                < self.adj_start[u as usize + 1] - self.adj_start[u as usize]
            {
                let ai = self.adj_start[u as usize] + self.iter[u as usize];
                let e = self.adj[ai as usize] as usize;
                let v = self.to[e];
                if self.cap[e] > self.eps && self.level[v as usize] == self.level[u as usize] + 1 {
                    path.push(e as u32);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u as usize] += 1;
            }
            if !advanced {
                self.level[u as usize] = -1;
                if u == s {
                    return F::zero();
                }
                let e = path.pop().expect("non-empty path") as usize;
                u = self.to[e ^ 1];
                self.iter[u as usize] += 1;
            }
        }
    }

    /// Run Dinic to completion; returns the total flow.
    pub fn max_flow(&mut self, s: u32, t: u32) -> F {
        assert!(s != t);
        let mut flow = F::zero();
        let mut path = Vec::new();
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.augment(s, t, &mut path);
                if pushed <= self.eps {
                    break;
                }
                flow = flow + pushed;
            }
        }
        flow
    }

    /// Source side of the minimum cut (call after `max_flow`).
    pub fn min_cut_side(&self, s: u32) -> Vec<bool> {
        let mut side = vec![false; self.node_count];
        let mut queue = std::collections::VecDeque::new();
        side[s as usize] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for ai in self.adj_start[u as usize]..self.adj_start[u as usize + 1] {
                let e = self.adj[ai as usize] as usize;
                let v = self.to[e] as usize;
                if self.cap[e] > self.eps && !side[v] {
                    side[v] = true;
                    queue.push_back(v as u32);
                }
            }
        }
        side
    }
}

/// Convenience wrapper: max flow plus the min-cut assignment (true =
/// source side).
pub fn max_flow<F: Real>(node_count: usize, arcs: &[Arc<F>], s: u32, t: u32) -> (F, Vec<bool>) {
    let mut g = FlowGraph::build(node_count, arcs);
    let flow = g.max_flow(s, t);
    let side = g.min_cut_side(s);
    (flow, side)
}

/// Brute-force minimum s-t cut by enumerating all partitions; test oracle
/// for graphs of up to ~20 nodes.
pub fn brute_force_min_cut<F: Real>(node_count: usize, arcs: &[Arc<F>], s: u32, t: u32) -> F {
    assert!(node_count <= 24);
    let free: Vec<u32> = (0..node_count as u32).filter(|&v| v != s && v != t).collect();
    let mut best = F::infinity();
    for mask in 0u32..1 << free.len() {
        let mut in_s = vec![false; node_count];
        in_s[s as usize] = true;
        for (i, &v) in free.iter().enumerate() {
            in_s[v as usize] = (mask >> i) & 1 != 0;
        }
        let mut cut = F::zero();
        for &(u, v, c, rc) in arcs {
            if in_s[u as usize] && !in_s[v as usize] {
                cut = cut + c;
            }
            if in_s[v as usize] && !in_s[u as usize] {
                cut = cut + rc;
            }
        }
        if cut < best {
            best = cut;
        }
    }
    best
}
