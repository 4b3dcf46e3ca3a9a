//! Incubator graphs, climbing zombies and the induced point spanner.
//!
//! An incubator is a net point at a contiguous interval of levels. Local tree
//! edges join an incubator to its parent in the same color; foreign tree edges
//! join the topmost incubator of a point to the nearest net point of every
//! other color one level up; cross edges join nearby net points of one level.
//! After lonely chains are merged, every internal incubator has at least two
//! local children and zombie climbing fills each incubator with a point from
//! one of its descendant leaves.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hnets::ColoredNets;
use crate::metric::{pow2, MetricSpace};
use crate::spanner::{Spanner, Tags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Incubator {
    pub identity: usize,
    /// Lowest level of the interval.
    pub lo: usize,
    /// Highest level of the interval.
    pub hi: usize,
    pub color: usize,
}

impl Incubator {
    pub fn contains_level(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn is_super(&self) -> bool {
        self.hi > self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CrossEdge {
    pub level: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncubatorGraph {
    pub eps: f64,
    pub gamma: f64,
    /// Number of points.
    pub n: usize,
    pub incubators: Vec<Incubator>,
    /// Local parent of every incubator; `None` at color roots.
    pub parent: Vec<Option<usize>>,
    /// Local children, ascending by incubator index.
    pub children: Vec<Vec<usize>>,
    /// `(child, foreign parent)` incubator pairs.
    pub foreign_edges: Vec<(usize, usize)>,
    pub cross_edges: Vec<CrossEdge>,
    /// Incubator pairs joined by shortcutting, `(ancestor, descendant)`.
    pub shortcut_edges: Vec<(usize, usize)>,
    pub zombie: Vec<Option<usize>>,
    /// Root incubator of each color tree.
    pub roots: Vec<usize>,
    /// `lookup[x][i]` is the incubator holding point `x` at level `i`.
    pub lookup: Vec<Vec<usize>>,
}

pub fn gamma_for(eps: f64) -> f64 {
    34.0 + 272.0 / eps
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::Epsilon(eps))
    }
}

impl IncubatorGraph {
    pub fn len(&self) -> usize {
        self.incubators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incubators.is_empty()
    }

    /// Incubator of point `x` at level `i`, if `x ∈ N_i`.
    pub fn find(&self, x: usize, i: usize) -> Option<usize> {
        self.lookup[x].get(i).copied()
    }

    pub fn leaf(&self, x: usize) -> usize {
        self.lookup[x][0]
    }

    pub fn is_leaf(&self, u: usize) -> bool {
        self.children[u].is_empty()
    }

    /// Ancestor of `u` (possibly `u` itself) whose interval contains level `i`.
    pub fn ancestor_at(&self, mut u: usize, i: usize) -> Option<usize> {
        while self.incubators[u].hi < i {
            u = self.parent[u]?;
        }
        self.incubators[u].contains_level(i).then_some(u)
    }

    /// Identities of the leaves below `u`.
    pub fn descendant_leaves(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![u];
        while let Some(w) = stack.pop() {
            if self.is_leaf(w) {
                out.push(self.incubators[w].identity);
            } else {
                stack.extend(&self.children[w]);
            }
        }
        out.sort_unstable();
        out
    }

    /// Incubators of color tree `c` in depth-first preorder.
    pub fn tree_preorder(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(w) = stack.pop() {
            out.push(w);
            stack.extend(self.children[w].iter().rev());
        }
        out
    }

    pub fn zombie_of(&self, u: usize) -> Result<usize> {
        self.zombie[u].ok_or(Error::ZombiesMissing)
    }
}

/// Incubator graph before merging: one incubator per `(x, i)` with
/// `x ∈ N_i`.
pub fn build_unmerged(nets: &ColoredNets, ms: &MetricSpace, eps: f64) -> Result<IncubatorGraph> {
    check_eps(eps)?;
    let n = nets.len();
    let gamma = gamma_for(eps);
    let mut incubators = Vec::new();
    let mut lookup = vec![Vec::new(); n];
    for x in 0..n {
        for i in 0..=nets.top_level[x] {
            lookup[x].push(incubators.len());
            incubators.push(Incubator {
                identity: x,
                lo: i,
                hi: i,
                color: nets.color[x],
            });
        }
    }
    let m = incubators.len();
    let mut parent = vec![None; m];
    let mut children = vec![Vec::new(); m];
    let mut foreign_edges = Vec::new();
    for x in 0..n {
        let c = nets.color[x];
        for i in 0..(nets.top_level[x] + 1).min(nets.top) {
            let u = lookup[x][i];
            let p = nets.closest(ms, i + 1, c, x).expect("nets are nonempty");
            let pu = lookup[p][i + 1];
            parent[u] = Some(pu);
            children[pu].push(u);
        }
        let t = nets.top_level[x];
        if t < nets.top {
            for c2 in (0..nets.colors()).filter(|&c2| c2 != c) {
                let p = nets.closest(ms, t + 1, c2, x).expect("nets are nonempty");
                foreign_edges.push((lookup[x][t], lookup[p][t + 1]));
            }
        }
    }
    for ch in &mut children {
        ch.sort_unstable();
    }
    let mut cross_edges = Vec::new();
    for i in 0..=nets.top {
        let r = gamma * pow2(i as i64);
        let level = nets.level(i);
        for (pos, &u) in level.iter().enumerate() {
            for &v in &level[pos + 1..] {
                if ms.dist(u, v) <= r {
                    cross_edges.push(CrossEdge {
                        level: i,
                        a: lookup[u][i],
                        b: lookup[v][i],
                    });
                }
            }
        }
    }
    let roots = (0..nets.colors())
        .map(|c| lookup[nets.net(nets.top, c)[0]][nets.top])
        .collect();
    Ok(IncubatorGraph {
        eps,
        gamma,
        n,
        incubators,
        parent,
        children,
        foreign_edges,
        cross_edges,
        shortcut_edges: Vec::new(),
        zombie: vec![None; m],
        roots,
        lookup,
    })
}

/// Collapses every lonely incubator (a single local child with the same
/// identity) into that child, repeatedly, so each chain becomes one super
/// incubator. Edges internal to a merged group vanish; all others are
/// re-targeted.
pub fn merge_lonely(g: &IncubatorGraph) -> IncubatorGraph {
    let m = g.incubators.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&u| (g.incubators[u].lo, u));
    let mut rep: Vec<usize> = (0..m).collect();
    for &u in &order {
        if let [only] = g.children[u][..] {
            if g.incubators[only].identity == g.incubators[u].identity {
                rep[u] = rep[only];
            }
        }
    }
    let mut groups: Vec<usize> = (0..m).filter(|&u| rep[u] == u).collect();
    groups.sort_by_key(|&u| (g.incubators[u].identity, g.incubators[u].lo));
    let mut new_index = vec![usize::MAX; m];
    for (idx, &u) in groups.iter().enumerate() {
        new_index[u] = idx;
    }
    let map = |u: usize| new_index[rep[u]];
    let mut incubators: Vec<Incubator> = groups.iter().map(|&u| g.incubators[u]).collect();
    for u in 0..m {
        let t = &mut incubators[map(u)];
        t.lo = t.lo.min(g.incubators[u].lo);
        t.hi = t.hi.max(g.incubators[u].hi);
    }
    let k = incubators.len();
    let mut parent = vec![None; k];
    let mut children = vec![Vec::new(); k];
    for u in 0..m {
        if let Some(p) = g.parent[u] {
            let (a, b) = (map(u), map(p));
            if a != b {
                parent[a] = Some(b);
                children[b].push(a);
            }
        }
    }
    for ch in &mut children {
        ch.sort_unstable();
        ch.dedup();
    }
    let foreign_edges = g
        .foreign_edges
        .iter()
        .map(|&(a, b)| (map(a), map(b)))
        .collect();
    let cross_edges = g
        .cross_edges
        .iter()
        .map(|e| CrossEdge {
            level: e.level,
            a: map(e.a),
            b: map(e.b),
        })
        .collect();
    let shortcut_edges = g
        .shortcut_edges
        .iter()
        .map(|&(a, b)| (map(a), map(b)))
        .filter(|(a, b)| a != b)
        .collect();
    let zombie = vec![None; k];
    let lookup = g
        .lookup
        .iter()
        .map(|row| row.iter().map(|&u| map(u)).collect())
        .collect();
    IncubatorGraph {
        eps: g.eps,
        gamma: g.gamma,
        n: g.n,
        incubators,
        parent,
        children,
        foreign_edges,
        cross_edges,
        shortcut_edges,
        zombie,
        roots: g.roots.iter().map(|&r| map(r)).collect(),
        lookup,
    }
}

pub fn build_incubator_graph(
    nets: &ColoredNets,
    ms: &MetricSpace,
    eps: f64,
) -> Result<IncubatorGraph> {
    Ok(merge_lonely(&build_unmerged(nets, ms, eps)?))
}

/// Zombie climbing. Leaves are handled in ascending identity, color by
/// color; each leaf keeps its own zombie and sends one clone up the tree to
/// the first empty ancestor. Clones reaching an occupied root disappear.
pub fn assign_zombies(g: &IncubatorGraph) -> Result<IncubatorGraph> {
    if let Some(u) = (0..g.len()).find(|&u| g.children[u].len() == 1) {
        return Err(Error::Unmerged(u));
    }
    let mut out = g.clone();
    out.zombie = vec![None; g.len()];
    let mut leaves: Vec<usize> = (0..g.len()).filter(|&u| g.is_leaf(u)).collect();
    leaves.sort_by_key(|&u| (g.incubators[u].color, g.incubators[u].identity));
    for leaf in leaves {
        let z = g.incubators[leaf].identity;
        out.zombie[leaf] = Some(z);
        let mut cur = leaf;
        while let Some(p) = g.parent[cur] {
            cur = p;
            if out.zombie[cur].is_none() {
                out.zombie[cur] = Some(z);
                break;
            }
        }
    }
    Ok(out)
}

/// Point spanner induced by the incubator graph: skeleton edges (local tree,
/// shortcut) join zombies, foreign and cross edges join identities.
pub fn induce_spanner(g: &IncubatorGraph, ms: &MetricSpace) -> Result<Spanner> {
    let mut s = Spanner::new(g.n);
    let id = |u: usize| g.incubators[u].identity;
    for u in 0..g.len() {
        if let Some(p) = g.parent[u] {
            s.add_metric(ms, g.zombie_of(u)?, g.zombie_of(p)?, Tags::LOCAL_TREE);
        }
    }
    for &(a, b) in &g.shortcut_edges {
        s.add_metric(ms, g.zombie_of(a)?, g.zombie_of(b)?, Tags::SHORTCUT);
    }
    for &(a, b) in &g.foreign_edges {
        s.add_metric(ms, id(a), id(b), Tags::FOREIGN);
    }
    for e in &g.cross_edges {
        s.add_metric(ms, id(e.a), id(e.b), Tags::CROSS);
    }
    Ok(s)
}

/// Orients every edge carrying a FOREIGN or CROSS tag toward the endpoint
/// with the higher top level, breaking ties toward the larger index. A
/// foreign parent always sits strictly higher than its child, so foreign
/// edges come out child to parent.
pub fn direct_edges(s: &Spanner, nets: &ColoredNets) -> Spanner {
    let mut out = s.clone();
    let to_orient: Vec<(usize, usize)> = s
        .edges()
        .filter(|(_, _, e)| e.tags.intersects(Tags::FOREIGN | Tags::CROSS))
        .map(|(u, v, _)| (u, v))
        .collect();
    for (u, v) in to_orient {
        if (nets.top_level[u], u) < (nets.top_level[v], v) {
            out.set_orientation(u, v);
        } else {
            out.set_orientation(v, u);
        }
    }
    out
}

/// Total weight of the distinct point edges induced by the level-`i` tree
/// edges (child at level `i`) together with the level-`i` cross edges.
pub fn level_edge_weights(g: &IncubatorGraph, ms: &MetricSpace, top: usize) -> Result<Vec<f64>> {
    let mut pairs = vec![BTreeSet::new(); top + 1];
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    for u in 0..g.len() {
        if let Some(p) = g.parent[u] {
            let (a, b) = (g.zombie_of(u)?, g.zombie_of(p)?);
            if a != b {
                pairs[g.incubators[u].hi].insert(key(a, b));
            }
        }
    }
    for &(a, b) in &g.foreign_edges {
        let inc = g.incubators[a];
        pairs[inc.hi].insert(key(inc.identity, g.incubators[b].identity));
    }
    for e in &g.cross_edges {
        pairs[e.level].insert(key(g.incubators[e.a].identity, g.incubators[e.b].identity));
    }
    Ok(pairs
        .iter()
        .map(|set| set.iter().map(|&(a, b)| ms.dist(a, b)).sum())
        .collect())
}
