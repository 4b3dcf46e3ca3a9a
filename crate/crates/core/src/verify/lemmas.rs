//! Named structural checks against a finished [`Construction`] or its parts.
//!
//! Each check rebuilds the relevant objects (paths, charges, depths) the way
//! the correctness argument describes them and measures them exactly.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::assembly::Construction;
use crate::hnets::ColoredNets;
use crate::incubator::IncubatorGraph;
use crate::metric::{ceil_log2, pow2, MetricSpace};
use crate::shortcut::{heavy_paths, vertical_hop_bound, SigmaCut};
use crate::single_sink::{ChargedEdge, SingleSinkSpanner};
use crate::spanner::{Spanner, Tags};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LemmaCheck {
    pub name: &'static str,
    pub checked: usize,
    /// Largest measured value divided by its limit; at most 1 on success.
    pub worst_ratio: f64,
    pub violations: Vec<String>,
}

impl LemmaCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            worst_ratio: 0.0,
            violations: Vec::new(),
        }
    }

    fn record(&mut self, value: f64, limit: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        let ratio = if limit > 0.0 {
            value / limit
        } else if value > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.worst_ratio = self.worst_ratio.max(ratio);
        if value > limit {
            self.violations
                .push(format!("{}: {value} > {limit}", what()));
        }
    }

    fn fail(&mut self, msg: String) {
        self.checked += 1;
        self.violations.push(msg);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every incubator is occupied by a same-color zombie from one of its
/// descendant leaves, and no point backs more than two zombies.
pub fn zombie_occupancy(g: &IncubatorGraph) -> LemmaCheck {
    let mut check = LemmaCheck::new("zombie-occupancy");
    let mut uses = vec![0usize; g.n];
    for u in 0..g.len() {
        let inc = g.incubators[u];
        match g.zombie[u] {
            None => check.fail(format!("incubator {u} ({inc:?}) is empty")),
            Some(z) => {
                uses[z] += 1;
                let leaves = g.descendant_leaves(u);
                if leaves.binary_search(&z).is_err() {
                    check.fail(format!("incubator {u} holds {z}, not a descendant leaf"));
                } else {
                    check.checked += 1;
                }
            }
        }
    }
    for (x, &c) in uses.iter().enumerate() {
        check.record(c as f64, 2.0, || format!("point {x} backs {c} zombies"));
    }
    check
}

/// `d(identity, zombie) <= 2 r_lo` for every incubator.
pub fn zombie_displacement(g: &IncubatorGraph, ms: &MetricSpace) -> LemmaCheck {
    let mut check = LemmaCheck::new("zombie-displacement");
    for u in 0..g.len() {
        let inc = g.incubators[u];
        let Some(z) = g.zombie[u] else {
            check.fail(format!("incubator {u} is empty"));
            continue;
        };
        check.record(ms.dist(inc.identity, z), 2.0 * pow2(inc.lo as i64), || {
            format!("incubator {u} ({inc:?}) with zombie {z}")
        });
    }
    check
}

/// Point sequence of the color-`c` tree path from `p` to the identity of
/// its level-`i` ancestor: up from the leaf of `p`, then down the chain of
/// that ancestor's identity. Returns `[p]` when `p` is itself in `N_i`.
pub fn c_path(g: &IncubatorGraph, nets: &ColoredNets, p: usize, i: usize) -> Option<Vec<usize>> {
    if nets.top_level[p] >= i {
        return Some(vec![p]);
    }
    let mut seq = Vec::new();
    let mut u = g.leaf(p);
    seq.push(g.zombie[u]?);
    while !g.incubators[u].contains_level(i) {
        u = g.parent[u]?;
        seq.push(g.zombie[u]?);
    }
    let w = g.incubators[u].identity;
    let mut cur = u;
    while g.incubators[cur].lo > 0 {
        cur = g.find(w, g.incubators[cur].lo - 1)?;
        seq.push(g.zombie[cur]?);
    }
    seq.dedup();
    Some(seq)
}

/// Path from `x ∉ N_i` to the identity of a level-`i` incubator of color
/// `c`, with one leading foreign hop when `x` has another color.
pub fn reach_path(
    g: &IncubatorGraph,
    nets: &ColoredNets,
    ms: &MetricSpace,
    x: usize,
    i: usize,
    c: usize,
) -> Option<Vec<usize>> {
    if nets.color[x] == c {
        return c_path(g, nets, x, i);
    }
    let p = nets.closest(ms, nets.top_level[x] + 1, c, x)?;
    let mut path = vec![x];
    path.extend(c_path(g, nets, p, i)?);
    Some(path)
}

fn path_length(ms: &MetricSpace, path: &[usize]) -> f64 {
    path.windows(2).map(|w| ms.dist(w[0], w[1])).sum()
}

fn missing_hop(h: &Spanner, path: &[usize]) -> Option<(usize, usize)> {
    path.windows(2)
        .find(|w| !h.contains(w[0], w[1]))
        .map(|w| (w[0], w[1]))
}

/// Reachability paths for every level `i`, point `x ∉ N_i` and color `c`:
/// all hops present in `h`, length at most `16 r_i` (same color) or
/// `17 r_i` (with the foreign hop).
pub fn reachability(
    g: &IncubatorGraph,
    nets: &ColoredNets,
    ms: &MetricSpace,
    h: &Spanner,
) -> LemmaCheck {
    let mut check = LemmaCheck::new("reachability-path");
    for i in 0..=nets.top {
        let r = pow2(i as i64);
        for x in (0..ms.len()).filter(|&x| nets.top_level[x] < i) {
            for c in 0..nets.colors() {
                let Some(path) = reach_path(g, nets, ms, x, i, c) else {
                    check.fail(format!("no path for x={x}, i={i}, c={c}"));
                    continue;
                };
                if let Some((a, b)) = missing_hop(h, &path) {
                    check.fail(format!("x={x}, i={i}, c={c}: hop {a}-{b} missing"));
                    continue;
                }
                let end = *path.last().expect("nonempty");
                if !nets.in_level(i, end) || nets.color[end] != c {
                    check.fail(format!("x={x}, i={i}, c={c}: ends at {end} off N_{i}^{c}"));
                }
                let limit = if nets.color[x] == c {
                    16.0 * r
                } else {
                    17.0 * r
                };
                check.record(path_length(ms, &path), limit, || {
                    format!("x={x}, i={i}, c={c}")
                });
            }
        }
    }
    check
}

/// Witness path between `x` and `y` avoiding every color but `c` in its
/// interior: climb both ends to level `i - q`, then one cross edge.
pub fn stretch_witness(
    g: &IncubatorGraph,
    nets: &ColoredNets,
    ms: &MetricSpace,
    x: usize,
    y: usize,
    c: usize,
) -> Option<Vec<usize>> {
    let d = ms.dist(x, y);
    let i = ceil_log2(d) - 1;
    let q = ceil_log2(68.0 / g.eps);
    if i < q {
        return Some(vec![x, y]);
    }
    let j = (i - q) as usize;
    let side = |p: usize| {
        if nets.in_level(j, p) {
            Some(vec![p])
        } else {
            reach_path(g, nets, ms, p, j, c)
        }
    };
    let mut path = side(x)?;
    let mut back = side(y)?;
    back.reverse();
    if path.last() == back.first() {
        back.remove(0);
    }
    path.extend(back);
    Some(path)
}

/// Witness paths for all pairs and all colors: present in `h`, interior of
/// color `c`, at most two foreign hops and one pure cross hop, stretch at
/// most `1 + eps`.
pub fn stretch_witnesses(
    g: &IncubatorGraph,
    nets: &ColoredNets,
    ms: &MetricSpace,
    h: &Spanner,
) -> LemmaCheck {
    let mut check = LemmaCheck::new("stretch-witness");
    let n = ms.len();
    for x in 0..n {
        for y in x + 1..n {
            for c in 0..nets.colors() {
                let Some(path) = stretch_witness(g, nets, ms, x, y, c) else {
                    check.fail(format!("no witness for {x}-{y}, color {c}"));
                    continue;
                };
                if let Some((a, b)) = missing_hop(h, &path) {
                    check.fail(format!("{x}-{y}, color {c}: hop {a}-{b} missing"));
                    continue;
                }
                if let Some(&bad) = path[1..path.len() - 1]
                    .iter()
                    .find(|&&p| nets.color[p] != c)
                {
                    check.fail(format!(
                        "{x}-{y}, color {c}: interior point {bad} off color"
                    ));
                }
                let tags: Vec<Tags> = path
                    .windows(2)
                    .map(|w| h.get(w[0], w[1]).expect("present").tags)
                    .collect();
                let foreign = path
                    .windows(2)
                    .zip(&tags)
                    .filter(|(w, t)| {
                        t.contains(Tags::FOREIGN) && nets.color[w[0]] != nets.color[w[1]]
                    })
                    .count();
                let pure_cross = tags.iter().filter(|&&t| t == Tags::CROSS).count();
                if foreign > 2 || pure_cross > 1 {
                    check.fail(format!(
                        "{x}-{y}, color {c}: {foreign} foreign and {pure_cross} pure cross hops"
                    ));
                }
                let d = ms.dist(x, y);
                check.record(path_length(ms, &path), (1.0 + g.eps) * d, || {
                    format!("{x}-{y}, color {c}")
                });
            }
        }
    }
    check
}

/// Weight of a single-sink spanner against `(1 + eps')(k + 1) Σ d(x, v)`,
/// plus the per-point charging behind it.
pub fn single_sink_weight(h: &SingleSinkSpanner, ms: &MetricSpace, pts: &[usize]) -> LemmaCheck {
    let mut check = LemmaCheck::new("single-sink-weight");
    let v = h.sink;
    let factor = (1.0 + h.eps_prime) * (h.k as f64 + 1.0);
    let star: f64 = pts.iter().map(|&x| ms.dist(x, v)).sum();
    check.record(h.weight(ms), factor * star, || {
        format!("sink {v} total weight")
    });
    let mut charged: HashMap<usize, usize> = HashMap::new();
    for e in &h.charges {
        *charged.entry(e.charged).or_default() += 1;
        let w = ms.dist(e.u, e.v);
        check.record(w, (1.0 + h.eps_prime) * ms.dist(e.charged, v), || {
            format!("edge {}-{} charged to {}", e.u, e.v, e.charged)
        });
    }
    for (&x, &count) in &charged {
        check.record(count as f64, h.k as f64 + 1.0, || {
            format!("point {x} charged {count} edges")
        });
    }
    check
}

/// Group-forest depth at most `log2 m + 2 Gamma + 2`, and portal degrees
/// within the group edges.
pub fn group_forest(h: &SingleSinkSpanner) -> LemmaCheck {
    let mut check = LemmaCheck::new("group-forest");
    let groups = &h.groups;
    let mut depth = vec![0usize; groups.groups.len()];
    for j in 1..groups.groups.len() {
        depth[j] = depth[groups.parent[j]] + 1;
    }
    let m: usize = groups.groups[1..].iter().map(Vec::len).sum();
    let bound = (m.max(1) as f64).log2() + 2.0 * h.partition.gamma as f64 + 2.0;
    let max_depth = depth.iter().copied().max().unwrap_or(0);
    check.record(max_depth as f64, bound, || {
        format!("sink {} group depth", h.sink)
    });
    let deg = distinct_degrees(&h.charges[..h.group_edges]);
    let kk = h.k as f64 + 1.0;
    let sink_limit = (2.0 * h.partition.gamma as f64 + 1.0) * kk;
    for (&x, &d) in &deg {
        let limit = if x == h.sink { sink_limit } else { 3.0 * kk };
        check.record(d as f64, limit, || format!("portal {x} group degree"));
    }
    check
}

fn distinct_degrees(edges: &[ChargedEdge]) -> HashMap<usize, usize> {
    let pairs: BTreeSet<(usize, usize)> = edges.iter().map(|e| (e.u, e.v)).collect();
    let mut deg = HashMap::new();
    for (u, v) in pairs {
        *deg.entry(u).or_default() += 1;
        *deg.entry(v).or_default() += 1;
    }
    deg
}

/// Degrees within the cluster wiring at most `(2^(2 dim + 1) + 1)(k + 1)`.
pub fn cluster_degree(h: &SingleSinkSpanner, dim: usize) -> LemmaCheck {
    let mut check = LemmaCheck::new("cluster-degree");
    let limit = (2f64.powi(2 * dim as i32 + 1) + 1.0) * (h.k as f64 + 1.0);
    for (x, d) in distinct_degrees(&h.charges[h.group_edges..]) {
        check.record(d as f64, limit, || format!("sink {}: point {x}", h.sink));
    }
    check
}

/// Recursion depth of the cluster wiring at most `ceil(log2 |C|) + 1`.
pub fn add_depth(h: &SingleSinkSpanner) -> LemmaCheck {
    let mut check = LemmaCheck::new("add-depth");
    for &(size, depth) in &h.cluster_depths {
        let limit = ceil_log2(size.max(1) as f64) as f64 + 1.0;
        check.record(depth as f64, limit, || format!("cluster of {size} points"));
    }
    check
}

/// Skeleton hop contract inside every shortcut subtree: each vertical pair
/// is joined by an upward skeleton path within the hop allowance, and no
/// incubator gains more than three shortcut edges.
pub fn shortcut_contract(g: &IncubatorGraph, cut: &SigmaCut) -> LemmaCheck {
    let mut check = LemmaCheck::new("shortcut-contract");
    let mut extra = vec![0usize; g.len()];
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
    for &(a, b) in &g.shortcut_edges {
        extra[a] += 1;
        extra[b] += 1;
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for (u, &e) in extra.iter().enumerate() {
        check.record(e as f64, 3.0, || format!("incubator {u} shortcut degree"));
    }
    for &root in &cut.subtree_roots {
        let paths = heavy_paths(g, root);
        let p_max = paths.iter().map(Vec::len).max().unwrap_or(1);
        let mut is_head = HashMap::new();
        for p in &paths {
            is_head.insert(p[0], ());
        }
        for desc in g.tree_preorder(root) {
            let mut chain = vec![desc];
            let mut light = vec![0usize];
            let mut cur = desc;
            while cur != root {
                let step = usize::from(is_head.contains_key(&cur));
                cur = g.parent[cur].expect("below the subtree root");
                chain.push(cur);
                light.push(light.last().unwrap() + step);
            }
            let pos: HashMap<usize, usize> =
                chain.iter().enumerate().map(|(i, &u)| (u, i)).collect();
            let mut hops = vec![usize::MAX; chain.len()];
            hops[0] = 0;
            for i in 0..chain.len() {
                let h = hops[i];
                if i + 1 < chain.len() {
                    hops[i + 1] = hops[i + 1].min(h + 1);
                }
                for nb in &neighbors[chain[i]] {
                    if let Some(&j) = pos.get(nb) {
                        if j > i {
                            hops[j] = hops[j].min(h + 1);
                        }
                    }
                }
            }
            for (i, &h) in hops.iter().enumerate().skip(1) {
                let limit = vertical_hop_bound(light[i], p_max);
                check.record(h as f64, limit as f64, || {
                    format!(
                        "incubator {desc} up to {} ({} light edges)",
                        chain[i], light[i]
                    )
                });
            }
        }
    }
    check
}

/// Shortcut weight per subtree against `(ceil(log2 p_max) + 1)` times the
/// subtree's tree weight.
pub fn shortcut_weight_budget(c: &Construction) -> LemmaCheck {
    let mut check = LemmaCheck::new("shortcut-weight");
    for s in &c.shortcut_report.subtrees {
        let factor = ceil_log2(s.p_max.max(1) as f64) as f64 + 1.0;
        check.record(s.shortcut_weight, factor * s.tree_weight, || {
            format!("subtree at incubator {}", s.root)
        });
    }
    check
}

/// Star replacement weight: each single-sink spanner stays within
/// `(1 + eps')(k + 1)` times the star it replaces.
pub fn star_replacement(c: &Construction) -> LemmaCheck {
    let mut check = LemmaCheck::new("star-replacement");
    let ns = &c.normalized;
    for (x, h) in &c.sinks {
        let star: f64 = c.in_neighbors[x].iter().map(|&y| ns.dist(*x, y)).sum();
        let limit = (1.0 + h.eps_prime) * (h.k as f64 + 1.0) * star;
        check.record(h.weight(ns), limit, || format!("sink {x}"));
    }
    check
}

/// Degree over local tree edges at most `2 (4^dim + 1)`.
pub fn local_tree_degree(h: &Spanner, dim: usize) -> LemmaCheck {
    let mut check = LemmaCheck::new("local-tree-degree");
    let limit = 2.0 * (4f64.powi(dim as i32) + 1.0);
    for (x, d) in h
        .degrees_where(|t| t.contains(Tags::LOCAL_TREE))
        .into_iter()
        .enumerate()
    {
        check.record(d as f64, limit, || format!("point {x}"));
    }
    check
}

/// Outgoing cross edges per point at most `(k + 1) gamma^(2 dim)`.
pub fn cross_out_degree(h: &Spanner, k: usize, gamma: f64, dim: usize) -> LemmaCheck {
    let mut check = LemmaCheck::new("cross-out-degree");
    let limit = (k as f64 + 1.0) * gamma.powi(2 * dim as i32);
    let mut out = vec![0usize; h.n()];
    for (_, _, e) in h.edges() {
        if let (true, Some((from, _))) = (e.tags.contains(Tags::CROSS), e.orientation) {
            out[from] += 1;
        }
    }
    for (x, d) in out.into_iter().enumerate() {
        check.record(d as f64, limit, || format!("point {x}"));
    }
    check
}

fn absorb(acc: &mut LemmaCheck, part: LemmaCheck) {
    acc.checked += part.checked;
    acc.worst_ratio = acc.worst_ratio.max(part.worst_ratio);
    acc.violations.extend(part.violations);
}

/// All checks that are cheap enough for desk-scale inputs. The degree
/// bounds take `config.dim` as the Euclidean dimension.
pub fn run_all(c: &Construction) -> Vec<LemmaCheck> {
    let ns = &c.normalized;
    let dim = c.config.dim;
    let mut out = vec![
        zombie_occupancy(&c.graph),
        zombie_displacement(&c.graph, ns),
        reachability(&c.graph, &c.nets, ns, &c.base),
        stretch_witnesses(&c.graph, &c.nets, ns, &c.base),
        local_tree_degree(&c.base, dim),
        cross_out_degree(&c.base, c.config.k, c.graph.gamma, dim),
        shortcut_contract(&c.graph, &c.cut),
        shortcut_weight_budget(c),
        star_replacement(c),
    ];
    let mut weight = LemmaCheck::new("single-sink-weight");
    let mut forest = LemmaCheck::new("group-forest");
    let mut cluster = LemmaCheck::new("cluster-degree");
    let mut depth = LemmaCheck::new("add-depth");
    for (x, h) in &c.sinks {
        let mut pts = c.in_neighbors[x].clone();
        pts.push(*x);
        absorb(&mut weight, single_sink_weight(h, ns, &pts));
        absorb(&mut forest, group_forest(h));
        absorb(&mut cluster, cluster_degree(h, dim));
        absorb(&mut depth, add_depth(h));
    }
    out.extend([weight, forest, cluster, depth]);
    out
}
