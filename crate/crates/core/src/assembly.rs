//! End-to-end construction of the bounded-degree fault-tolerant spanner.
//!
//! The base spanner is built with stretch parameter `eps / 3`. Its skeleton
//! edges are kept as they are; every other edge is directed and the star of
//! edges entering each point `x` is replaced by a single-sink spanner rooted
//! at `x` with parameter `eps / 30`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hnets::{build_nets, ColoredNets};
use crate::incubator::{
    assign_zombies, build_incubator_graph, direct_edges, induce_spanner, IncubatorGraph,
};
use crate::metric::{Backend, MetricSpace};
use crate::shortcut::{compute_sigma, shortcut_trees, ShortcutReport, SigmaCut};
use crate::single_sink::{build_vftsss, SingleSinkSpanner};
use crate::spanner::{Spanner, Tags};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub eps: f64,
    pub k: usize,
    /// Doubling dimension assumed for the single-sink net bound.
    pub dim: usize,
    pub seed: u64,
    /// Check the triangle inequality of explicit matrices.
    pub validate: bool,
    pub exhaustive_verify: bool,
}

impl BuildConfig {
    pub fn new(eps: f64, k: usize, dim: usize) -> Self {
        Self {
            eps,
            k,
            dim,
            seed: 0,
            validate: false,
            exhaustive_verify: false,
        }
    }

    /// Parameter of the base spanner.
    pub fn eps0(&self) -> f64 {
        self.eps / 3.0
    }

    /// Parameter of the single-sink spanners.
    pub fn eps_prime(&self) -> f64 {
        self.eps / 30.0
    }
}

/// Every intermediate artifact of a build, over the normalized space.
#[derive(Debug, Clone)]
pub struct Construction {
    pub config: BuildConfig,
    pub normalized: MetricSpace,
    pub scale: f64,
    pub nets: ColoredNets,
    /// Merged, zombie-assigned and shortcut incubator graph.
    pub graph: IncubatorGraph,
    pub cut: SigmaCut,
    pub shortcut_report: ShortcutReport,
    /// Base spanner with oriented non-skeleton edges.
    pub base: Spanner,
    /// Single-sink spanners keyed by sink.
    pub sinks: BTreeMap<usize, SingleSinkSpanner>,
    /// In-neighbors of each sink among the replaced edges.
    pub in_neighbors: BTreeMap<usize, Vec<usize>>,
    /// Final spanner, weights in the input metric.
    pub spanner: Spanner,
}

pub fn check_config(ms: &MetricSpace, cfg: &BuildConfig) -> Result<()> {
    if !(cfg.eps > 0.0 && cfg.eps < 0.5) {
        return Err(Error::Epsilon(cfg.eps));
    }
    let n = ms.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    if cfg.k + 2 > n {
        return Err(Error::FaultParameter { k: cfg.k, n });
    }
    if cfg.validate && matches!(ms.backend(), Backend::Matrix) {
        ms.validate_triangle()?;
    }
    Ok(())
}

/// Base spanner on an already normalized space: nets, incubators, zombies,
/// shortcuts, induced edges with orientation.
pub fn build_base(
    ns: &MetricSpace,
    k: usize,
    eps0: f64,
) -> Result<(
    ColoredNets,
    IncubatorGraph,
    SigmaCut,
    ShortcutReport,
    Spanner,
)> {
    let nets = build_nets(ns, k)?;
    let g = assign_zombies(&build_incubator_graph(&nets, ns, eps0)?)?;
    let mut cut = compute_sigma(k, ns.diameter(), ns.len(), g.gamma);
    cut.resolve_roots(&g, nets.top);
    let (g, report) = shortcut_trees(&g, &cut, ns);
    let base = direct_edges(&induce_spanner(&g, ns)?, &nets);
    Ok((nets, g, cut, report, base))
}

pub fn build_construction(ms: &MetricSpace, cfg: &BuildConfig) -> Result<Construction> {
    check_config(ms, cfg)?;
    let (ns, scale) = ms.normalize()?;
    let (nets, graph, cut, shortcut_report, base) = build_base(&ns, cfg.k, cfg.eps0())?;

    let mut in_neighbors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (_, _, e) in base.edges() {
        if e.tags.is_skeleton() {
            continue;
        }
        let (from, to) = e.orientation.expect("non-skeleton edges are oriented");
        in_neighbors.entry(to).or_default().push(from);
    }
    let built: Vec<(usize, SingleSinkSpanner)> = in_neighbors
        .par_iter()
        .map(|(&x, ins)| {
            let mut pts = ins.clone();
            pts.push(x);
            build_vftsss(&ns, &pts, x, cfg.k, cfg.eps_prime(), cfg.dim).map(|h| (x, h))
        })
        .collect::<Result<_>>()?;
    let sinks: BTreeMap<usize, SingleSinkSpanner> = built.into_iter().collect();

    let mut spanner = Spanner::new(ms.len());
    for (u, v, e) in base.edges() {
        if e.tags.is_skeleton() {
            spanner.add_metric(ms, u, v, e.tags);
        }
    }
    for h in sinks.values() {
        for &(u, v) in &h.edges {
            spanner.add_metric(ms, u, v, Tags::SINGLE_SINK);
        }
    }
    Ok(Construction {
        config: *cfg,
        normalized: ns,
        scale,
        nets,
        graph,
        cut,
        shortcut_report,
        base,
        sinks,
        in_neighbors,
        spanner,
    })
}

pub fn build_spanner(ms: &MetricSpace, cfg: &BuildConfig) -> Result<Spanner> {
    Ok(build_construction(ms, cfg)?.spanner)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_single_edge() {
        let ms = MetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let s = build_spanner(&ms, &BuildConfig::new(0.3, 0, 2)).unwrap();
        assert_eq!(s.edge_count(), 1);
        assert_eq!(s.get(0, 1).unwrap().weight, 5.0);
    }

    #[test]
    fn parameter_checks() {
        let ms = MetricSpace::from_points(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert!(matches!(
            build_spanner(&ms, &BuildConfig::new(0.7, 1, 1)),
            Err(Error::Epsilon(_))
        ));
        assert!(matches!(
            build_spanner(&ms, &BuildConfig::new(0.3, 2, 1)),
            Err(Error::FaultParameter { k: 2, n: 3 })
        ));
        let bad = MetricSpace::from_matrix(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ])
        .unwrap();
        let mut cfg = BuildConfig::new(0.3, 0, 1);
        assert!(build_spanner(&bad, &cfg).is_ok());
        cfg.validate = true;
        assert!(matches!(build_spanner(&bad, &cfg), Err(Error::Matrix(_))));
    }

    #[test]
    fn deterministic_and_metric_weights() {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                vec![
                    (i * 7 % 5) as f64 * 1.3,
                    (i * 3 % 7) as f64 * 0.7 + i as f64 * 0.01,
                ]
            })
            .collect();
        let ms = MetricSpace::from_points(&pts).unwrap();
        let cfg = BuildConfig::new(0.4, 1, 2);
        let a = build_construction(&ms, &cfg).unwrap();
        let b = build_construction(&ms, &cfg).unwrap();
        assert_eq!(a.spanner, b.spanner);
        for (u, v, e) in a.spanner.edges() {
            assert_eq!(e.weight, ms.dist(u, v));
        }
        for (x, h) in &a.sinks {
            let star: f64 = a.in_neighbors[x]
                .iter()
                .map(|&y| a.normalized.dist(*x, y))
                .sum();
            let bound = (1.0 + cfg.eps_prime()) * (cfg.k as f64 + 1.0) * star;
            assert!(h.weight(&a.normalized) <= bound);
        }
    }
}
