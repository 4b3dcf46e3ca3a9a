//! Fault-tolerant single-sink spanners.
//!
//! Points are partitioned into rings around the sink `v` with radii growing
//! by `1/eps'`. Each ring is covered by a greedy net whose clusters elect up
//! to `k + 1` portals. Portals are linked toward the sink through groups of
//! size `k + 1`, and every cluster is wired to its portals by a recursive
//! halving procedure.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::metric::MetricSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub ring: usize,
    pub center: usize,
    /// Members in ascending index.
    pub members: Vec<usize>,
    /// The `min(k + 1, |members|)` lowest-index members.
    pub portals: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingPartition {
    pub sink: usize,
    pub eps_prime: f64,
    /// `radii[i] = (1/eps')^i`.
    pub radii: Vec<f64>,
    /// `rings[i]`, ascending; `rings[0] = [sink]`.
    pub rings: Vec<Vec<usize>>,
    /// Net of each ring, ascending; empty for ring 0.
    pub nets: Vec<Vec<usize>>,
    pub clusters: Vec<Cluster>,
    /// `ceil(eps'^(-4 dim))`, saturating.
    pub gamma: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortalGroups {
    /// `groups[0] = [sink]`, then portals in ascending `(d(v, .), index)`.
    pub groups: Vec<Vec<usize>>,
    /// `parent[j]` for `j >= 1`; `parent[0] = 0`.
    pub parent: Vec<usize>,
}

/// One spanner edge and the endpoint it is charged to in the weight bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChargedEdge {
    pub u: usize,
    pub v: usize,
    pub charged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSinkSpanner {
    pub sink: usize,
    pub k: usize,
    pub eps_prime: f64,
    pub partition: RingPartition,
    pub groups: PortalGroups,
    /// Distinct edges as `(min, max)` point pairs.
    pub edges: BTreeSet<(usize, usize)>,
    /// Portal-group edges followed by cluster edges.
    pub charges: Vec<ChargedEdge>,
    /// Number of leading `charges` that link portal groups.
    pub group_edges: usize,
    /// Deepest nesting of edge-adding recursive calls over all clusters.
    pub add_depth: usize,
    /// Per cluster, its size and recursion depth.
    pub cluster_depths: Vec<(usize, usize)>,
}

impl SingleSinkSpanner {
    pub fn weight(&self, ms: &MetricSpace) -> f64 {
        self.edges.iter().map(|&(a, b)| ms.dist(a, b)).sum()
    }
}

pub fn gamma_bound(eps_prime: f64, dim: usize) -> u64 {
    let g = (1.0 / eps_prime).powi((4 * dim) as i32).ceil();
    if g.is_finite() && g < u64::MAX as f64 {
        g as u64
    } else {
        u64::MAX
    }
}

/// `max(0, ceil((j - 2 gamma - 1) / 2))`.
pub fn group_parent(j: usize, gamma: u64) -> usize {
    let x = j as i128 - 2 * gamma as i128 - 1;
    if x <= 0 {
        0
    } else {
        ((x + 1) / 2) as usize
    }
}

/// Greedy `r`-net of `pts` (ascending index) and nearest-center clusters.
fn net_clusters(ms: &MetricSpace, pts: &[usize], r: f64) -> Vec<(usize, Vec<usize>)> {
    let mut net: Vec<usize> = Vec::new();
    for &x in pts {
        if net.iter().all(|&y| ms.dist(x, y) > r) {
            net.push(x);
        }
    }
    let mut clusters: Vec<(usize, Vec<usize>)> = net.iter().map(|&y| (y, Vec::new())).collect();
    for &x in pts {
        let mut best = 0;
        for (idx, &y) in net.iter().enumerate() {
            let (d, b) = (ms.dist(x, y), ms.dist(x, net[best]));
            if d < b || (d == b && y < net[best]) {
                best = idx;
            }
        }
        clusters[best].1.push(x);
    }
    clusters
}

fn portals_of(members: &[usize], k: usize) -> Vec<usize> {
    members[..members.len().min(k + 1)].to_vec()
}

pub fn ring_partition(
    ms: &MetricSpace,
    pts: &[usize],
    v: usize,
    k: usize,
    eps_prime: f64,
    dim: usize,
) -> Result<RingPartition> {
    if !(eps_prime > 0.0 && eps_prime <= 1.0 / 6.0) {
        return Err(Error::SingleSinkEpsilon(eps_prime));
    }
    if !pts.contains(&v) {
        return Err(Error::SinkNotInSet(v));
    }
    let mut sorted: Vec<usize> = pts.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let inv = 1.0 / eps_prime;
    let mut radii = vec![1.0];
    let mut rings: Vec<Vec<usize>> = vec![vec![v]];
    for &x in sorted.iter().filter(|&&x| x != v) {
        let d = ms.dist(v, x);
        let mut i = 1;
        loop {
            if radii.len() <= i {
                radii.push(inv.powi(i as i32));
                rings.push(Vec::new());
            }
            if d <= radii[i] {
                break;
            }
            i += 1;
        }
        rings[i].push(x);
    }
    let mut nets = vec![Vec::new(); rings.len()];
    let mut clusters = Vec::new();
    for i in 1..rings.len() {
        for (center, members) in net_clusters(ms, &rings[i], eps_prime * radii[i - 1]) {
            nets[i].push(center);
            clusters.push(Cluster {
                ring: i,
                center,
                portals: portals_of(&members, k),
                members,
            });
        }
        nets[i].sort_unstable();
    }
    Ok(RingPartition {
        sink: v,
        eps_prime,
        radii,
        rings,
        nets,
        clusters,
        gamma: gamma_bound(eps_prime, dim),
    })
}

/// Groups portals by distance to `v` and links each group completely to
/// its parent group.
pub fn group_portals(
    ms: &MetricSpace,
    portals: &[usize],
    v: usize,
    k: usize,
    gamma: u64,
) -> (PortalGroups, Vec<ChargedEdge>) {
    let mut q = portals.to_vec();
    q.sort_by(|&a, &b| ms.dist(v, a).total_cmp(&ms.dist(v, b)).then(a.cmp(&b)));
    let mut groups = vec![vec![v]];
    groups.extend(q.chunks(k + 1).map(<[usize]>::to_vec));
    let parent: Vec<usize> = (0..groups.len()).map(|j| group_parent(j, gamma)).collect();
    let mut edges = Vec::new();
    for j in 1..groups.len() {
        for &a in &groups[j] {
            for &b in &groups[parent[j]] {
                edges.push(ChargedEdge {
                    u: a.min(b),
                    v: a.max(b),
                    charged: a,
                });
            }
        }
    }
    (PortalGroups { groups, parent }, edges)
}

/// Recursive cluster wiring. `c` is the cluster (ascending), `q` its
/// portals, `r` its radius. Returns the nesting depth of edge-adding calls.
pub fn add_cluster_edges(
    ms: &MetricSpace,
    c: &[usize],
    q: &[usize],
    r: f64,
    k: usize,
    out: &mut Vec<ChargedEdge>,
) -> usize {
    let rest: Vec<usize> = c.iter().copied().filter(|x| !q.contains(x)).collect();
    if rest.is_empty() {
        return 0;
    }
    let half = rest.len().div_ceil(2);
    let mut depth = 0;
    for part in [&rest[..half], &rest[half..]] {
        if part.is_empty() {
            continue;
        }
        for (_, members) in net_clusters(ms, part, r / 2.0) {
            let qz = portals_of(&members, k);
            for &a in q {
                for &b in &qz {
                    out.push(ChargedEdge {
                        u: a.min(b),
                        v: a.max(b),
                        charged: b,
                    });
                }
            }
            depth = depth.max(add_cluster_edges(ms, &members, &qz, r / 2.0, k, out));
        }
    }
    depth + 1
}

pub fn build_vftsss(
    ms: &MetricSpace,
    pts: &[usize],
    v: usize,
    k: usize,
    eps_prime: f64,
    dim: usize,
) -> Result<SingleSinkSpanner> {
    let partition = ring_partition(ms, pts, v, k, eps_prime, dim)?;
    let portals: Vec<usize> = partition
        .clusters
        .iter()
        .flat_map(|c| c.portals.iter().copied())
        .collect();
    let (groups, mut charges) = group_portals(ms, &portals, v, k, partition.gamma);
    let group_edges = charges.len();
    let mut add_depth = 0;
    let mut cluster_depths = Vec::new();
    for cl in &partition.clusters {
        let r = eps_prime * partition.radii[cl.ring - 1];
        let depth = add_cluster_edges(ms, &cl.members, &cl.portals, r, k, &mut charges);
        cluster_depths.push((cl.members.len(), depth));
        add_depth = add_depth.max(depth);
    }
    let edges = charges.iter().map(|e| (e.u, e.v)).collect();
    Ok(SingleSinkSpanner {
        sink: v,
        k,
        eps_prime,
        partition,
        groups,
        edges,
        charges,
        group_edges,
        add_depth,
        cluster_depths,
    })
}
