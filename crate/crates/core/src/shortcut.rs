//! Shortcutting the low levels of the incubator trees.
//!
//! Subtrees hanging from level `sigma` are decomposed into heavy paths and
//! each heavy path receives a recursive set of shortcut edges. Every shortcut
//! joins an ancestor to a descendant on the same heavy path, so any vertical
//! tree path can be traded for a few skeleton hops whose induced length never
//! exceeds that of the original path.

use rayon::prelude::*;

use crate::incubator::IncubatorGraph;
use crate::metric::{ceil_log2, floor_log2, MetricSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaCut {
    pub r_hat: f64,
    /// `floor(log2 r_hat)`, `i64::MIN` when `r_hat` is zero.
    pub sigma: i64,
    /// Roots of the subtrees to shortcut, per color in color order.
    pub subtree_roots: Vec<usize>,
}

pub fn compute_sigma(k: usize, delta: f64, n: usize, gamma: f64) -> SigmaCut {
    let r_hat = (k * k) as f64 * delta / ((n * n) as f64 * gamma);
    let sigma = if r_hat > 0.0 {
        floor_log2(r_hat)
    } else {
        i64::MIN
    };
    SigmaCut {
        r_hat,
        sigma,
        subtree_roots: Vec::new(),
    }
}

impl SigmaCut {
    /// Fills in the incubators whose level interval contains `sigma`; when
    /// `sigma` reaches the top level the color roots themselves.
    pub fn resolve_roots(&mut self, g: &IncubatorGraph, top: usize) {
        self.subtree_roots = if self.sigma < 0 {
            Vec::new()
        } else if self.sigma >= top as i64 {
            g.roots.clone()
        } else {
            let s = self.sigma as usize;
            let mut roots: Vec<usize> = (0..g.len())
                .filter(|&u| g.incubators[u].contains_level(s))
                .collect();
            roots.sort_by_key(|&u| (g.incubators[u].color, g.incubators[u].identity));
            roots
        };
    }
}

/// Shortcut edges among positions `0..p` of one path, as position pairs
/// `(a, b)` with `a < b - 1`.
pub fn path_shortcuts(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut push = |a: usize, b: usize| {
        if a + 1 < b && !out.contains(&(a, b)) {
            out.push((a, b));
        }
    };
    let mut stack = vec![(0usize, p.saturating_sub(1))];
    while let Some((lo, hi)) = stack.pop() {
        if hi < lo + 2 {
            continue;
        }
        let m = lo + (hi - lo) / 2;
        push(lo, m);
        push(m, hi);
        push(m - 1, hi);
        push(lo, m + 1);
        if m >= lo + 2 {
            stack.push((lo + 1, m - 1));
        }
        if hi >= m + 2 {
            stack.push((m + 1, hi - 1));
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeStats {
    pub root: usize,
    pub size: usize,
    /// Longest heavy path, in incubators.
    pub p_max: usize,
    pub shortcut_weight: f64,
    pub tree_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShortcutReport {
    pub subtrees: Vec<SubtreeStats>,
}

/// Heavy paths of the subtree under `root`, each listed top to bottom. The
/// heavy child has the most leaves below it, ties to the smaller identity.
pub fn heavy_paths(g: &IncubatorGraph, root: usize) -> Vec<Vec<usize>> {
    let order = g.tree_preorder(root);
    let mut leaves = vec![0usize; g.len()];
    for &u in order.iter().rev() {
        leaves[u] = if g.is_leaf(u) {
            1
        } else {
            g.children[u].iter().map(|&c| leaves[c]).sum()
        };
    }
    let mut paths = Vec::new();
    let mut heads = vec![root];
    while let Some(head) = heads.pop() {
        let mut path = vec![head];
        let mut cur = head;
        while !g.is_leaf(cur) {
            let heavy = *g.children[cur]
                .iter()
                .max_by(|&&a, &&b| {
                    leaves[a]
                        .cmp(&leaves[b])
                        .then(g.incubators[b].identity.cmp(&g.incubators[a].identity))
                })
                .expect("internal incubator has children");
            for &c in g.children[cur].iter().rev() {
                if c != heavy {
                    heads.push(c);
                }
            }
            path.push(heavy);
            cur = heavy;
        }
        paths.push(path);
    }
    paths
}

/// Adds shortcut edges to every subtree of `cut`. Requires assigned zombies
/// only for the weight statistics.
pub fn shortcut_trees(
    g: &IncubatorGraph,
    cut: &SigmaCut,
    ms: &MetricSpace,
) -> (IncubatorGraph, ShortcutReport) {
    let per_subtree: Vec<(Vec<(usize, usize)>, SubtreeStats)> = cut
        .subtree_roots
        .par_iter()
        .map(|&root| {
            let paths = heavy_paths(g, root);
            let mut edges = Vec::new();
            for path in &paths {
                for (a, b) in path_shortcuts(path.len()) {
                    edges.push((path[a], path[b]));
                }
            }
            let zdist = |a: usize, b: usize| match (g.zombie[a], g.zombie[b]) {
                (Some(x), Some(y)) => ms.dist(x, y),
                _ => 0.0,
            };
            let members = g.tree_preorder(root);
            let tree_weight = members
                .iter()
                .filter(|&&u| u != root)
                .map(|&u| zdist(u, g.parent[u].expect("non-root has a parent")))
                .sum();
            let shortcut_weight = edges.iter().map(|&(a, b)| zdist(a, b)).sum();
            let stats = SubtreeStats {
                root,
                size: members.len(),
                p_max: paths.iter().map(Vec::len).max().unwrap_or(0),
                shortcut_weight,
                tree_weight,
            };
            (edges, stats)
        })
        .collect();
    let mut out = g.clone();
    let mut report = ShortcutReport::default();
    for (edges, stats) in per_subtree {
        out.shortcut_edges.extend(edges);
        report.subtrees.push(stats);
    }
    (out, report)
}

/// Allowed skeleton hops for a vertical pair crossing `light` light edges
/// inside a subtree whose longest heavy path has `p_max` incubators.
pub fn vertical_hop_bound(light: usize, p_max: usize) -> usize {
    let lg = ceil_log2(p_max.max(1) as f64) as usize;
    light * (lg + 1) + 2 * lg
}

/// Fewest skeleton hops from `desc` up to its ancestor `anc`, moving only
/// upward along the ancestor chain. `None` if `anc` is not an ancestor.
pub fn vertical_skeleton_hops(g: &IncubatorGraph, anc: usize, desc: usize) -> Option<usize> {
    let mut chain = vec![desc];
    let mut cur = desc;
    while cur != anc {
        cur = g.parent[cur]?;
        chain.push(cur);
    }
    let pos = |u: usize| chain.iter().position(|&w| w == u);
    let mut up: Vec<Vec<usize>> = vec![Vec::new(); chain.len()];
    for (i, _) in chain.iter().enumerate().skip(1) {
        up[i - 1].push(i);
    }
    for &(a, b) in &g.shortcut_edges {
        if let (Some(pa), Some(pb)) = (pos(a), pos(b)) {
            let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
            up[lo].push(hi);
        }
    }
    let mut hops = vec![usize::MAX; chain.len()];
    hops[0] = 0;
    for i in 0..chain.len() {
        if hops[i] == usize::MAX {
            continue;
        }
        for &j in &up[i] {
            hops[j] = hops[j].min(hops[i] + 1);
        }
    }
    Some(hops[chain.len() - 1])
}

/// Light edges (child not the heavy child of its parent) between `desc` and
/// its ancestor `anc`, given the heavy paths of the enclosing subtree.
pub fn light_edges_between(
    paths: &[Vec<usize>],
    g: &IncubatorGraph,
    anc: usize,
    desc: usize,
) -> usize {
    let mut head_of = std::collections::HashMap::new();
    for path in paths {
        for &u in path {
            head_of.insert(u, path[0]);
        }
    }
    let mut light = 0;
    let mut cur = desc;
    while cur != anc {
        if head_of.get(&cur) == Some(&cur) {
            light += 1;
        }
        cur = g.parent[cur].expect("anc is an ancestor of desc");
    }
    light
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incubator::{gamma_for, Incubator};

    fn monotone_hops(p: usize, edges: &[(usize, usize)], s: usize) -> Vec<usize> {
        let mut up = vec![Vec::new(); p];
        for i in 1..p {
            up[i - 1].push(i);
        }
        for &(a, b) in edges {
            up[a].push(b);
        }
        let mut d = vec![usize::MAX; p];
        d[s] = 0;
        for u in s..p {
            for &w in &up[u] {
                d[w] = d[w].min(d[u] + 1);
            }
        }
        d
    }

    #[test]
    fn sigma_examples() {
        let cut = compute_sigma(1, 1000.0, 10, 578.0);
        assert!((cut.r_hat - 0.0173).abs() < 1e-4);
        assert_eq!(cut.sigma, -6);

        let cut = compute_sigma(2, 2f64.powi(40), 16, 578.0);
        assert_eq!(cut.r_hat, 4.0 * 2f64.powi(40) / (256.0 * 578.0));
        // 2^34 / 578 lies in [2^24, 2^25)
        assert_eq!(cut.sigma, 24);

        assert_eq!(compute_sigma(0, 100.0, 5, gamma_for(0.25)).sigma, i64::MIN);
    }

    #[test]
    fn path_of_seven() {
        let edges = path_shortcuts(7);
        let lg = 3;
        for s in 0..7 {
            let d = monotone_hops(7, &edges, s);
            assert!(d[s..].iter().all(|&h| h <= 2 * lg), "from {s}: {d:?}");
        }
    }

    #[test]
    fn short_paths_need_nothing() {
        assert!(path_shortcuts(0).is_empty());
        assert!(path_shortcuts(1).is_empty());
        assert!(path_shortcuts(2).is_empty());
        assert_eq!(path_shortcuts(3), vec![(0, 2)]);
    }

    #[test]
    fn path_contract_exhaustive() {
        for p in 1..=300usize {
            let edges = path_shortcuts(p);
            let mut extra = vec![0; p];
            for &(a, b) in &edges {
                assert!(a + 1 < b && b < p);
                extra[a] += 1;
                extra[b] += 1;
            }
            assert!(extra.iter().all(|&e| e <= 3), "p = {p}: degree {extra:?}");
            let lg = ceil_log2(p as f64) as usize;
            let from_head = monotone_hops(p, &edges, 0);
            assert!(from_head.iter().all(|&h| h <= lg), "p = {p}: head hops");
            for s in 0..p {
                let d = monotone_hops(p, &edges, s);
                assert!(d[p - 1] <= lg, "p = {p}: {s} to tail");
                assert!(
                    d[s..].iter().all(|&h| h <= 2 * lg),
                    "p = {p}: pairs from {s}"
                );
            }
        }
    }

    fn star(leaves: usize) -> IncubatorGraph {
        let m = leaves + 1;
        let mut incubators: Vec<Incubator> = (0..leaves)
            .map(|x| Incubator {
                identity: x,
                lo: 0,
                hi: 0,
                color: 0,
            })
            .collect();
        incubators.push(Incubator {
            identity: 0,
            lo: 1,
            hi: 1,
            color: 0,
        });
        let mut parent = vec![Some(leaves); m];
        parent[leaves] = None;
        let mut lookup: Vec<Vec<usize>> = (0..leaves).map(|x| vec![x]).collect();
        lookup[0].push(leaves);
        IncubatorGraph {
            eps: 0.25,
            gamma: gamma_for(0.25),
            n: leaves,
            incubators,
            parent,
            children: {
                let mut c = vec![Vec::new(); m];
                c[leaves] = (0..leaves).collect();
                c
            },
            foreign_edges: Vec::new(),
            cross_edges: Vec::new(),
            shortcut_edges: Vec::new(),
            zombie: vec![None; m],
            roots: vec![leaves],
            lookup,
        }
    }

    #[test]
    fn star_gets_no_shortcuts() {
        let g = star(5);
        let ms =
            MetricSpace::from_points(&(0..5).map(|i| vec![2.0 * i as f64]).collect::<Vec<_>>())
                .unwrap();
        let mut cut = compute_sigma(1, 8.0, 5, 1.0);
        cut.sigma = 5;
        cut.resolve_roots(&g, 1);
        assert_eq!(cut.subtree_roots, vec![5]);
        let (out, report) = shortcut_trees(&g, &cut, &ms);
        assert!(out.shortcut_edges.is_empty());
        assert_eq!(report.subtrees[0].p_max, 2);
        let paths = heavy_paths(&g, 5);
        assert_eq!(paths[0], vec![5, 0]);
        assert_eq!(paths.len(), 5);
    }

    #[test]
    fn negative_sigma_is_identity() {
        let g = star(3);
        let ms = MetricSpace::from_points(&[vec![0.0], vec![2.0], vec![4.0]]).unwrap();
        let mut cut = compute_sigma(1, 1000.0, 10, 578.0);
        cut.resolve_roots(&g, 1);
        assert!(cut.subtree_roots.is_empty());
        assert_eq!(shortcut_trees(&g, &cut, &ms).0, g);
    }

    #[test]
    fn vertical_hops_on_chain() {
        // caterpillar: spine 0..p with a leaf hanging off each spine node
        let p = 20;
        let mut incubators = Vec::new();
        let mut parent = Vec::new();
        for i in 0..p {
            incubators.push(Incubator {
                identity: 0,
                lo: p - i,
                hi: p - i,
                color: 0,
            });
            parent.push(if i == 0 { None } else { Some(i - 1) });
        }
        for i in 0..p {
            incubators.push(Incubator {
                identity: i + 1,
                lo: 0,
                hi: 0,
                color: 0,
            });
            parent.push(Some(i));
        }
        let m = incubators.len();
        let mut children = vec![Vec::new(); m];
        for (u, par) in parent.iter().enumerate() {
            if let Some(par) = *par {
                children[par].push(u);
            }
        }
        let g = IncubatorGraph {
            eps: 0.25,
            gamma: gamma_for(0.25),
            n: p + 1,
            incubators,
            parent,
            children,
            foreign_edges: Vec::new(),
            cross_edges: Vec::new(),
            shortcut_edges: Vec::new(),
            zombie: vec![None; m],
            roots: vec![0],
            lookup: Vec::new(),
        };
        let cut = SigmaCut {
            r_hat: 1.0,
            sigma: 0,
            subtree_roots: vec![0],
        };
        let ms = MetricSpace::from_points(&[vec![0.0]]).unwrap();
        let (g2, report) = shortcut_trees(&g, &cut, &ms);
        let paths = heavy_paths(&g2, 0);
        let p_max = report.subtrees[0].p_max;
        for desc in 0..m {
            let mut anc = desc;
            loop {
                let hops = vertical_skeleton_hops(&g2, anc, desc).unwrap();
                let light = light_edges_between(&paths, &g2, anc, desc);
                assert!(hops <= vertical_hop_bound(light, p_max), "{anc} -> {desc}");
                match g2.parent[anc] {
                    Some(a) => anc = a,
                    None => break,
                }
            }
        }
        let mut extra = vec![0; m];
        for &(a, b) in &g2.shortcut_edges {
            extra[a] += 1;
            extra[b] += 1;
        }
        assert!(extra.iter().all(|&e| e <= 3));
    }
}
