//! Brute-force oracles for spanner guarantees.
//!
//! Everything here works from a [`MetricSpace`] and a [`Spanner`] alone:
//! shortest paths are recomputed from scratch for every failure set. The
//! construction-aware lemma checks live in [`lemmas`].

pub mod lemmas;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::metric::MetricSpace;
use crate::spanner::{Spanner, Tags};

/// Failure sets up to this many are enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum FaultMode {
    Exhaustive,
    Sampled {
        seed: u64,
        trials: usize,
    },
    /// Exhaustive when the number of sets is within [`EXHAUSTIVE_LIMIT`],
    /// sampled otherwise.
    Auto {
        seed: u64,
        trials: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Violation {
    Stretch {
        failed: Vec<usize>,
        x: usize,
        y: usize,
        stretch: f64,
        limit: f64,
    },
    Disconnected {
        failed: Vec<usize>,
        x: usize,
        y: usize,
    },
    HopUnreachable {
        failed: Vec<usize>,
        x: usize,
        y: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub failed: Vec<usize>,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StretchReport {
    /// Worst finite ratio over surviving pairs of all tested sets.
    pub max_stretch: f64,
    pub witness: Option<Witness>,
    pub sets_tested: usize,
    pub exhaustive: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DegreeCensus {
    pub max_degree: usize,
    /// Max degree counting only edges carrying each tag.
    pub by_tag: BTreeMap<String, usize>,
    /// Max degree over skeleton-tagged edges.
    pub skeleton: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub stretch: StretchReport,
    pub hop_diameter: Option<usize>,
    pub degrees: DegreeCensus,
    pub lightness: f64,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Lexicographic successor of a sorted `k`-subset of `0..n`.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut s: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(s.clone());
        if !next_subset(&mut s, n) {
            break;
        }
    }
    out
}

/// Failure sets to test. Sets of exactly `min(k, n - 2)` points suffice:
/// any smaller set avoiding a pair extends to one of full size avoiding it,
/// and failing extra points never shortens a path.
pub fn failure_sets(
    s: &Spanner,
    n: usize,
    k: usize,
    mode: FaultMode,
    extra: &[Vec<usize>],
) -> (Vec<Vec<usize>>, bool) {
    let size = k.min(n.saturating_sub(2));
    let exhaustive = match mode {
        FaultMode::Exhaustive => true,
        FaultMode::Sampled { .. } => false,
        FaultMode::Auto { .. } => binomial(n, size) <= EXHAUSTIVE_LIMIT,
    };
    let mut sets = if exhaustive {
        all_subsets(n, size)
    } else {
        let (seed, trials) = match mode {
            FaultMode::Sampled { seed, trials } | FaultMode::Auto { seed, trials } => {
                (seed, trials)
            }
            FaultMode::Exhaustive => unreachable!(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sets: Vec<Vec<usize>> = (0..trials)
            .map(|_| {
                let mut v = sample(&mut rng, n, size).into_vec();
                v.sort_unstable();
                v
            })
            .collect();
        let deg = s.degrees();
        let mut by_degree: Vec<usize> = (0..n).collect();
        by_degree.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
        let mut top: Vec<usize> = by_degree[..size].to_vec();
        top.sort_unstable();
        sets.push(top);
        sets
    };
    for e in extra.iter().filter(|_| !exhaustive) {
        let mut e: Vec<usize> = e.iter().copied().filter(|&x| x < n).collect();
        e.sort_unstable();
        e.dedup();
        e.truncate(size);
        sets.push(e);
    }
    (sets, exhaustive)
}

/// Single-source shortest paths in `H \ failed`, O(n^2) array Dijkstra.
pub fn dijkstra(adj: &[Vec<(usize, f64)>], alive: &[bool], src: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[src] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !done[v] && alive[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u])
            {
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for &(w, len) in &adj[u] {
            if alive[w] && dist[u] + len < dist[w] {
                dist[w] = dist[u] + len;
            }
        }
    }
    dist
}

struct SetOutcome {
    worst: Option<(f64, Witness)>,
    violations: Vec<Violation>,
}

fn check_set(adj: &[Vec<(usize, f64)>], ms: &MetricSpace, failed: &[usize], t: f64) -> SetOutcome {
    let n = adj.len();
    let mut alive = vec![true; n];
    for &f in failed {
        alive[f] = false;
    }
    let mut worst: Option<(f64, Witness)> = None;
    let mut violations = Vec::new();
    for x in (0..n).filter(|&x| alive[x]) {
        let dist = dijkstra(adj, &alive, x);
        for y in (x + 1..n).filter(|&y| alive[y]) {
            let d = ms.dist(x, y);
            if dist[y].is_infinite() {
                violations.push(Violation::Disconnected {
                    failed: failed.to_vec(),
                    x,
                    y,
                });
                continue;
            }
            if dist[y] > t * d {
                violations.push(Violation::Stretch {
                    failed: failed.to_vec(),
                    x,
                    y,
                    stretch: dist[y] / d,
                    limit: t,
                });
            }
            let ratio = dist[y] / d;
            if worst.as_ref().is_none_or(|(w, _)| ratio > *w) {
                worst = Some((
                    ratio,
                    Witness {
                        failed: failed.to_vec(),
                        x,
                        y,
                    },
                ));
            }
        }
    }
    SetOutcome { worst, violations }
}

fn better(a: &(f64, Witness), b: &(f64, Witness)) -> Ordering {
    // larger ratio first, then lexicographically smaller witness
    b.0.total_cmp(&a.0)
        .then_with(|| (&a.1.failed, a.1.x, a.1.y).cmp(&(&b.1.failed, b.1.x, b.1.y)))
}

/// Stretch of `s` under vertex failures, checked against `t`.
pub fn fault_stretch(
    s: &Spanner,
    ms: &MetricSpace,
    k: usize,
    t: f64,
    mode: FaultMode,
    extra: &[Vec<usize>],
) -> StretchReport {
    let adj = s.adjacency();
    let (sets, exhaustive) = failure_sets(s, ms.len(), k, mode, extra);
    let outcomes: Vec<SetOutcome> = sets.par_iter().map(|f| check_set(&adj, ms, f, t)).collect();
    let mut worst: Option<(f64, Witness)> = None;
    let mut violations = Vec::new();
    for o in outcomes {
        if let Some(w) = o.worst {
            if worst
                .as_ref()
                .is_none_or(|cur| better(&w, cur) == Ordering::Less)
            {
                worst = Some(w);
            }
        }
        violations.extend(o.violations);
    }
    StretchReport {
        max_stretch: worst.as_ref().map_or(1.0, |w| w.0),
        witness: worst.map(|w| w.1),
        sets_tested: sets.len(),
        exhaustive,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HopReport {
    /// Smallest `h` giving every surviving pair a `t`-path of at most `h`
    /// edges; `None` if some pair has no `t`-path at all.
    pub hops: Option<usize>,
    pub witness: Option<(usize, usize)>,
}

/// Hop-bounded shortest paths from `src`: `layers[h][y]` is the shortest
/// `src`-`y` walk with at most `h` edges avoiding failed points.
fn hop_layers(
    adj: &[Vec<(usize, f64)>],
    alive: &[bool],
    src: usize,
    mut done: impl FnMut(usize, &[f64]) -> bool,
) -> Option<usize> {
    let n = adj.len();
    let mut cur = vec![f64::INFINITY; n];
    cur[src] = 0.0;
    for h in 0..n {
        if done(h, &cur) {
            return Some(h);
        }
        let mut next = cur.clone();
        for u in (0..n).filter(|&u| alive[u] && cur[u].is_finite()) {
            for &(w, len) in &adj[u] {
                if alive[w] && cur[u] + len < next[w] {
                    next[w] = cur[u] + len;
                }
            }
        }
        if next == cur {
            return None;
        }
        cur = next;
    }
    done(n, &cur).then_some(n)
}

/// Hop-diameter at stretch `t` with `failed` removed.
pub fn hop_bounded_stretch(s: &Spanner, ms: &MetricSpace, t: f64, failed: &[usize]) -> HopReport {
    let n = ms.len();
    let adj = s.adjacency();
    let mut alive = vec![true; n];
    for &f in failed {
        alive[f] = false;
    }
    let per_source: Vec<std::result::Result<usize, (usize, usize)>> = (0..n)
        .into_par_iter()
        .filter(|&x| alive[x])
        .map(|x| {
            let ok = |_: usize, d: &[f64]| {
                (0..n).all(|y| y == x || !alive[y] || d[y] <= t * ms.dist(x, y))
            };
            hop_layers(&adj, &alive, x, ok).ok_or_else(|| {
                let dist = dijkstra(&adj, &alive, x);
                let y = (0..n)
                    .find(|&y| y != x && alive[y] && dist[y] > t * ms.dist(x, y))
                    .unwrap_or(x);
                (x, y)
            })
        })
        .collect();
    let mut hops = 0;
    for r in per_source {
        match r {
            Ok(h) => hops = hops.max(h),
            Err(w) => {
                return HopReport {
                    hops: None,
                    witness: Some(w),
                }
            }
        }
    }
    HopReport {
        hops: Some(hops),
        witness: None,
    }
}

pub fn degree_census(s: &Spanner) -> DegreeCensus {
    let max = |d: Vec<usize>| d.into_iter().max().unwrap_or(0);
    let by_tag = Tags::all()
        .iter_names()
        .map(|(name, tag)| (name.to_string(), max(s.degrees_where(|t| t.contains(tag)))))
        .collect();
    DegreeCensus {
        max_degree: max(s.degrees()),
        by_tag,
        skeleton: max(s.degrees_where(Tags::is_skeleton)),
    }
}

pub fn lightness(s: &Spanner, ms: &MetricSpace) -> f64 {
    s.total_weight() / ms.mst().weight
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RootedReport {
    pub max_stretch: f64,
    /// Over all tested sets, the hops needed for every survivor to reach
    /// the root within the stretch limit.
    pub max_hops: Option<usize>,
    pub sets_tested: usize,
    pub violations: Vec<Violation>,
}

/// Root stretch of a single-sink spanner over `pts`, exhaustive over failure
/// sets of `min(k, |pts| - 1)` non-root points.
pub fn rooted_fault_stretch(
    s: &Spanner,
    ms: &MetricSpace,
    pts: &[usize],
    root: usize,
    k: usize,
    t: f64,
) -> RootedReport {
    let adj = s.adjacency();
    let others: Vec<usize> = pts.iter().copied().filter(|&x| x != root).collect();
    let size = k.min(others.len().saturating_sub(1));
    let sets: Vec<Vec<usize>> = all_subsets(others.len(), size)
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| others[i]).collect())
        .collect();
    let mut in_pts = vec![false; ms.len()];
    for &p in pts {
        in_pts[p] = true;
    }
    let results: Vec<(f64, Option<usize>, Vec<Violation>)> = sets
        .par_iter()
        .map(|failed| {
            let mut alive = in_pts.clone();
            for &f in failed {
                alive[f] = false;
            }
            let dist = dijkstra(&adj, &alive, root);
            let mut worst: f64 = 1.0;
            let mut violations = Vec::new();
            for &x in others.iter().filter(|&&x| alive[x]) {
                let d = ms.dist(root, x);
                if dist[x].is_infinite() {
                    violations.push(Violation::Disconnected {
                        failed: failed.clone(),
                        x: root,
                        y: x,
                    });
                } else {
                    worst = worst.max(dist[x] / d);
                    if dist[x] > t * d {
                        violations.push(Violation::Stretch {
                            failed: failed.clone(),
                            x: root,
                            y: x,
                            stretch: dist[x] / d,
                            limit: t,
                        });
                    }
                }
            }
            let ok = |_: usize, d: &[f64]| {
                others
                    .iter()
                    .all(|&x| !alive[x] || d[x] <= t * ms.dist(root, x))
            };
            let hops = hop_layers(&adj, &alive, root, ok);
            (worst, hops, violations)
        })
        .collect();
    let mut report = RootedReport {
        max_stretch: 1.0,
        max_hops: Some(0),
        sets_tested: sets.len(),
        violations: Vec::new(),
    };
    for (w, h, v) in results {
        report.max_stretch = report.max_stretch.max(w);
        report.max_hops = match (report.max_hops, h) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        report.violations.extend(v);
    }
    report
}

/// Stretch, hop-diameter (failure-free, skipped when `hop_limit_n` is
/// below `n`), degrees and lightness in one report.
pub fn verify_spanner(
    s: &Spanner,
    ms: &MetricSpace,
    k: usize,
    t: f64,
    mode: FaultMode,
    extra: &[Vec<usize>],
    hop_limit_n: usize,
) -> VerificationReport {
    let stretch = fault_stretch(s, ms, k, t, mode, extra);
    let mut violations = stretch.violations.clone();
    let hop_diameter = if ms.len() <= hop_limit_n {
        let hop = hop_bounded_stretch(s, ms, t, &[]);
        if let (None, Some((x, y))) = (hop.hops, hop.witness) {
            violations.push(Violation::HopUnreachable {
                failed: Vec::new(),
                x,
                y,
            });
        }
        hop.hops
    } else {
        None
    };
    VerificationReport {
        stretch,
        hop_diameter,
        degrees: degree_census(s),
        lightness: lightness(s, ms),
        violations,
    }
}
