use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Network with non-negative capacities. Infinite capacity is allowed and
/// marks an uncuttable edge.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    /// `(u, v, capacity u->v, capacity v->u)`.
    arcs: Vec<(usize, usize, f64, f64)>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes {
            return Err(Error::InvalidNetwork(format!(
                "terminal out of range for {nodes} nodes"
            )));
        }
        if source == sink {
            return Err(Error::InvalidNetwork("source equals sink".into()));
        }
        Ok(Self {
            nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    fn check(&self, u: usize, v: usize, capacities: &[f64]) -> Result<()> {
        if u >= self.nodes || v >= self.nodes {
            return Err(Error::InvalidNetwork(format!("edge ({u}, {v}) out of range")));
        }
        if let Some(c) = capacities.iter().find(|c| c.is_nan() || **c < 0.0) {
            return Err(Error::InvalidNetwork(format!("capacity {c} on ({u}, {v})")));
        }
        Ok(())
    }

    /// Directed edge `u -> v`.
    pub fn add_edge(&mut self, u: usize, v: usize, capacity: f64) -> Result<()> {
        self.check(u, v, &[capacity])?;
        self.arcs.push((u, v, capacity, 0.0));
        Ok(())
    }

    /// Edges `u -> v` and `v -> u` sharing one residual pair, which is the
    /// same network as two `add_edge` calls with half the arcs.
    pub fn add_edge_pair(&mut self, u: usize, v: usize, forward: f64, backward: f64) -> Result<()> {
        self.check(u, v, &[forward, backward])?;
        self.arcs.push((u, v, forward, backward));
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Every directed edge with positive capacity, as `(u, v, capacity)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.arcs
            .iter()
            .flat_map(|&(u, v, f, b)| [(u, v, f), (v, u, b)])
            .filter(|e| e.2 > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub flow: f64,
    /// `true` for nodes on the source side of the minimum cut.
    pub source_side: Vec<bool>,
}

/// Residual graph in forward-star form; arc `2e` runs `u -> v` for input
/// pair `e` and arc `2e + 1` runs back.
struct Residual {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl Residual {
    fn build(net: &FlowNetwork) -> Self {
        let m = 2 * net.arcs.len();
        let mut r = Residual {
            head: vec![NONE; net.nodes],
            next: vec![NONE; m],
            to: Vec::with_capacity(m),
            cap: Vec::with_capacity(m),
        };
        let mut from = Vec::with_capacity(m);
        for &(u, v, f, b) in &net.arcs {
            from.extend([u, v]);
            r.to.extend([v, u]);
            r.cap.extend([f, b]);
        }
        // Link in reverse so that scanning from `head` follows input order.
        for a in (0..m).rev() {
            r.next[a] = r.head[from[a]];
            r.head[from[a]] = a;
        }
        r
    }

    #[inline]
    fn from(&self, a: usize) -> usize {
        self.to[a ^ 1]
    }

    /// Nodes reachable from `s` through arcs with residual capacity.
    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let mut a = self.head[u];
            while a != NONE {
                let v = self.to[a];
                if self.cap[a] > 0.0 && !seen[v] {
                    seen[v] = true;
                    q.push_back(v);
                }
                a = self.next[a];
            }
        }
        seen
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tree {
    Free,
    Source,
    Sink,
}

/// Search-tree state for the Boykov-Kolmogorov method. `parent[v]` is the
/// arc `parent -> v` in the source tree and `v -> parent` in the sink tree.
struct Forest {
    tree: Vec<Tree>,
    parent: Vec<usize>,
    /// The node at the other end of `parent[v]`.
    up: Vec<usize>,
    /// Time stamp and distance to the root, used to pick short new parents.
    stamp: Vec<u64>,
    dist: Vec<usize>,
    active: VecDeque<usize>,
    queued: Vec<bool>,
    orphans: VecDeque<usize>,
    time: u64,
}

impl Forest {
    fn new(n: usize, s: usize, t: usize) -> Self {
        let mut f = Forest {
            tree: vec![Tree::Free; n],
            parent: vec![NONE; n],
            up: vec![NONE; n],
            stamp: vec![0; n],
            dist: vec![0; n],
            active: VecDeque::new(),
            queued: vec![false; n],
            orphans: VecDeque::new(),
            time: 0,
        };
        f.tree[s] = Tree::Source;
        f.tree[t] = Tree::Sink;
        f.activate(s);
        f.activate(t);
        f
    }

    fn activate(&mut self, v: usize) {
        if !self.queued[v] {
            self.queued[v] = true;
            self.active.push_back(v);
        }
    }

    /// Grows both trees until they touch; returns the arc from the source
    /// tree into the sink tree.
    fn grow(&mut self, r: &Residual) -> Option<usize> {
        while let Some(&p) = self.active.front() {
            let side = self.tree[p];
            if side != Tree::Free {
                let mut a = r.head[p];
                while a != NONE {
                    let q = r.to[a];
                    // Residual capacity in the direction of growth.
                    let (open, toward) = match side {
                        Tree::Source => (r.cap[a] > 0.0, a),
                        _ => (r.cap[a ^ 1] > 0.0, a ^ 1),
                    };
                    if open {
                        if self.tree[q] == Tree::Free {
                            self.tree[q] = side;
                            self.parent[q] = toward;
                            self.up[q] = p;
                            self.stamp[q] = self.stamp[p];
                            self.dist[q] = self.dist[p] + 1;
                            self.activate(q);
                        } else if self.tree[q] != side {
                            return Some(toward);
                        }
                    }
                    a = r.next[a];
                }
            }
            self.active.pop_front();
            self.queued[p] = false;
        }
        None
    }

    /// Pushes the bottleneck along the path through `bridge`; nodes whose
    /// parent arc saturates become orphans.
    fn augment(&mut self, r: &mut Residual, bridge: usize, s: usize, t: usize) -> Result<f64> {
        let mut push = r.cap[bridge];
        let mut v = r.from(bridge);
        while v != s {
            push = push.min(r.cap[self.parent[v]]);
            v = self.up[v];
        }
        let mut v = r.to[bridge];
        while v != t {
            push = push.min(r.cap[self.parent[v]]);
            v = self.up[v];
        }
        if !push.is_finite() {
            return Err(Error::InvalidNetwork(
                "an infinite-capacity path joins source and sink".into(),
            ));
        }
        r.cap[bridge] -= push;
        r.cap[bridge ^ 1] += push;
        for start in [r.from(bridge), r.to[bridge]] {
            let mut v = start;
            while v != s && v != t {
                let a = self.parent[v];
                let next = self.up[v];
                r.cap[a] -= push;
                r.cap[a ^ 1] += push;
                if r.cap[a] <= 0.0 {
                    r.cap[a] = 0.0;
                    self.parent[v] = NONE;
                    self.orphans.push_back(v);
                }
                v = next;
            }
        }
        Ok(push)
    }

    /// Distance from `u` to its root, or `None` if `u` hangs from an orphan.
    fn root_distance(&mut self, u: usize, s: usize, t: usize) -> Option<usize> {
        let mut d = 0;
        let mut w = u;
        loop {
            if self.stamp[w] == self.time {
                d += self.dist[w];
                break;
            }
            if w == s || w == t {
                self.stamp[w] = self.time;
                self.dist[w] = 0;
                break;
            }
            if self.parent[w] == NONE {
                return None;
            }
            d += 1;
            w = self.up[w];
        }
        // Stamp the path so later searches stop early.
        let mut w = u;
        let mut dd = d;
        while self.stamp[w] != self.time {
            self.stamp[w] = self.time;
            self.dist[w] = dd;
            dd -= 1;
            w = self.up[w];
        }
        Some(d)
    }

    fn adopt(&mut self, r: &Residual, s: usize, t: usize) {
        while let Some(v) = self.orphans.pop_front() {
            let side = self.tree[v];
            let mut best = (NONE, usize::MAX, NONE);
            let mut a = r.head[v];
            while a != NONE {
                let u = r.to[a];
                // Arc that would join v to u in the tree's direction.
                let link = if side == Tree::Source { a ^ 1 } else { a };
                if self.tree[u] == side && r.cap[link] > 0.0 {
                    if let Some(d) = self.root_distance(u, s, t) {
                        if d < best.1 {
                            best = (link, d, u);
                        }
                    }
                }
                a = r.next[a];
            }
            if best.0 != NONE {
                self.parent[v] = best.0;
                self.up[v] = best.2;
                self.stamp[v] = self.time;
                self.dist[v] = best.1 + 1;
                continue;
            }
            // No valid parent: v leaves the tree and its children are orphaned.
            let mut a = r.head[v];
            while a != NONE {
                let u = r.to[a];
                if self.tree[u] == side {
                    let link = if side == Tree::Source { a ^ 1 } else { a };
                    if r.cap[link] > 0.0 {
                        self.activate(u);
                    }
                    if self.parent[u] != NONE && self.up[u] == v {
                        self.parent[u] = NONE;
                        self.orphans.push_back(u);
                    }
                }
                a = r.next[a];
            }
            self.tree[v] = Tree::Free;
        }
    }
}

/// Exact maximum flow by the Boykov-Kolmogorov augmenting-path method, which
/// keeps its search trees between augmentations and suits grid graphs. The
/// minimum cut is the set of nodes reachable from the source in the final
/// residual graph, which does not depend on the order of augmentations.
/// Arcs are scanned in insertion order, so the result is deterministic.
pub fn max_flow_min_cut(net: &FlowNetwork) -> Result<MinCut> {
    let mut r = Residual::build(net);
    let (s, t) = (net.source, net.sink);
    let mut forest = Forest::new(net.nodes, s, t);
    let mut flow = 0.0;
    while let Some(bridge) = forest.grow(&r) {
        forest.time += 1;
        flow += forest.augment(&mut r, bridge, s, t)?;
        forest.adopt(&r, s, t);
    }
    Ok(MinCut {
        flow,
        source_side: r.reachable(s),
    })
}
