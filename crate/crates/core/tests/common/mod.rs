#![allow(dead_code)]

use ftspanner::cli::{generate, GenKind};
use ftspanner::MetricSpace;

/// Kruskal over all pairs with a plain union-find; returns the tree's edge
/// weights in ascending order.
pub fn kruskal_weights(ms: &MetricSpace) -> Vec<f64> {
    let n = ms.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n / 2);
    for u in 0..n {
        for v in u + 1..n {
            pairs.push((ms.dist(u, v), u, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for (w, u, v) in pairs {
        let (a, b) = (root(&mut parent, u), root(&mut parent, v));
        if a != b {
            parent[a] = b;
            out.push(w);
        }
    }
    out
}

/// Edge weights of `metric.mst`, ascending.
pub fn mst_weights(ms: &MetricSpace) -> Vec<f64> {
    let mut w: Vec<f64> = ms.mst().edges.iter().map(|&(u, v)| ms.dist(u, v)).collect();
    w.sort_by(f64::total_cmp);
    w
}

pub fn planar(n: usize, seed: u64) -> MetricSpace {
    MetricSpace::from_points(&generate(GenKind::UniformCube, n, 2, seed)).unwrap()
}

pub fn fixture(kind: GenKind, n: usize, seed: u64) -> MetricSpace {
    let dim = if kind == GenKind::ExpSpreadLine { 1 } else { 2 };
    MetricSpace::from_points(&generate(kind, n, dim, seed)).unwrap()
}
