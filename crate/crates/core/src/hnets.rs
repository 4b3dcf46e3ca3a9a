//! Colored hierarchical nets.
//!
//! Every point receives one of `k + 1` colors. Color `c` has its own chain of
//! nets `N_0^c ⊇ N_1^c ⊇ … ⊇ N_ell^c` where `N_i^c` is an `r_i`-packing and
//! `r_i = 2^i`. Level `ell` holds exactly one point per color.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{ceil_log2, pow2, MetricSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredNets {
    pub k: usize,
    /// Top level `ell = ceil(log2 diameter)`.
    pub top: usize,
    /// Color of each point, `0..=k`.
    pub color: Vec<usize>,
    /// Highest level containing each point.
    pub top_level: Vec<usize>,
    /// `members[i][c]` lists `N_i^c` in ascending order.
    pub members: Vec<Vec<Vec<usize>>>,
}

impl ColoredNets {
    pub fn colors(&self) -> usize {
        self.k + 1
    }

    pub fn len(&self) -> usize {
        self.color.len()
    }

    pub fn is_empty(&self) -> bool {
        self.color.is_empty()
    }

    pub fn radius(i: usize) -> f64 {
        pow2(i as i64)
    }

    /// Whether `x ∈ N_i`.
    pub fn in_level(&self, i: usize, x: usize) -> bool {
        self.top_level[x] >= i
    }

    pub fn net(&self, i: usize, c: usize) -> &[usize] {
        &self.members[i][c]
    }

    /// `N_i`, all colors, ascending.
    pub fn level(&self, i: usize) -> Vec<usize> {
        let mut all: Vec<usize> = self.members[i].iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Closest member of `N_i^c` to `x`, lowest index on ties.
    pub fn closest(&self, ms: &MetricSpace, i: usize, c: usize, x: usize) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &y in &self.members[i][c] {
            let d = ms.dist(x, y);
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, y));
            }
        }
        best.map(|(_, y)| y)
    }

    /// JSON debug dump: level -> color -> member ids.
    pub fn dump(&self) -> serde_json::Value {
        let mut levels = BTreeMap::new();
        for (i, per_color) in self.members.iter().enumerate() {
            let colors: BTreeMap<String, &Vec<usize>> = per_color
                .iter()
                .enumerate()
                .map(|(c, m)| (c.to_string(), m))
                .collect();
            levels.insert(i.to_string(), colors);
        }
        serde_json::to_value(levels).expect("net dump serializes")
    }
}

/// Top-down greedy construction. Level `ell` is seeded with points `0..=k`.
pub fn build_nets(ms: &MetricSpace, k: usize) -> Result<ColoredNets> {
    let n = ms.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    if k + 2 > n {
        return Err(Error::FaultParameter { k, n });
    }
    let top = ceil_log2(ms.diameter()).max(0) as usize;
    let colors = k + 1;
    const UNCOLORED: usize = usize::MAX;
    let mut color = vec![UNCOLORED; n];
    let mut top_level = vec![0usize; n];
    let mut members = vec![vec![Vec::new(); colors]; top + 1];
    for c in 0..colors {
        color[c] = c;
        top_level[c] = top;
        members[top][c].push(c);
    }
    for i in (0..top).rev() {
        let r = pow2(i as i64);
        for c in 0..colors {
            let mut net = members[i + 1][c].clone();
            for u in 0..n {
                if color[u] != UNCOLORED {
                    continue;
                }
                if net.iter().all(|&y| ms.dist(u, y) > r) {
                    net.push(u);
                    color[u] = c;
                    top_level[u] = i;
                }
            }
            net.sort_unstable();
            members[i][c] = net;
        }
    }
    if let Some(x) = color.iter().position(|&c| c == UNCOLORED) {
        return Err(Error::Points(format!(
            "point {x} left uncolored; the space is not normalized"
        )));
    }
    Ok(ColoredNets {
        k,
        top,
        color,
        top_level,
        members,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum NetViolation {
    /// `x ∈ N_{level+1}^c` but `x ∉ N_level^c`.
    Nesting {
        level: usize,
        color: usize,
        point: usize,
    },
    Packing {
        level: usize,
        color: usize,
        a: usize,
        b: usize,
        dist: f64,
    },
    /// No member of `N_level^c` within `r_level` of `point ∉ N_level`.
    Covering {
        level: usize,
        color: usize,
        point: usize,
    },
    TopLevelSize {
        color: usize,
        size: usize,
    },
    /// The top-level points of two colors coincide.
    TopLevelShared {
        point: usize,
    },
    ColorMismatch {
        level: usize,
        color: usize,
        point: usize,
    },
    Uncolored {
        point: usize,
    },
}

impl fmt::Display for NetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Nesting {
                level,
                color,
                point,
            } => write!(
                f,
                "nesting: point {point} in N_{}^{color} but not in N_{level}^{color}",
                level + 1
            ),
            Self::Packing {
                level,
                color,
                a,
                b,
                dist,
            } => write!(
                f,
                "packing: N_{level}^{color} members {a} and {b} at distance {dist} <= {}",
                pow2(*level as i64)
            ),
            Self::Covering {
                level,
                color,
                point,
            } => write!(
                f,
                "covering: point {point} has no N_{level}^{color} member within {}",
                pow2(*level as i64)
            ),
            Self::TopLevelSize { color, size } => {
                write!(
                    f,
                    "top level of color {color} has {size} points, expected 1"
                )
            }
            Self::TopLevelShared { point } => {
                write!(f, "point {point} is the top-level point of several colors")
            }
            Self::ColorMismatch {
                level,
                color,
                point,
            } => write!(
                f,
                "color: point {point} sits in N_{level}^{color} with a different color"
            ),
            Self::Uncolored { point } => write!(f, "point {point} is in no N_0 net"),
        }
    }
}

/// Exhaustive nesting, packing, covering and coloring check.
pub fn validate_nets(nets: &ColoredNets, ms: &MetricSpace) -> Vec<NetViolation> {
    let n = ms.len();
    let colors = nets.colors();
    let levels = nets.members.len();
    let mut out = Vec::new();
    let sets: Vec<Vec<Vec<bool>>> = nets
        .members
        .iter()
        .map(|per_color| {
            per_color
                .iter()
                .map(|m| {
                    let mut mark = vec![false; n];
                    for &x in m {
                        mark[x] = true;
                    }
                    mark
                })
                .collect()
        })
        .collect();

    for c in 0..colors {
        let size = nets.members[levels - 1][c].len();
        if size != 1 {
            out.push(NetViolation::TopLevelSize { color: c, size });
        }
    }
    let mut tops: Vec<usize> = nets.members[levels - 1].iter().flatten().copied().collect();
    tops.sort_unstable();
    for w in tops.windows(2) {
        if w[0] == w[1] {
            out.push(NetViolation::TopLevelShared { point: w[0] });
        }
    }

    for i in 0..levels {
        let r = pow2(i as i64);
        for c in 0..colors {
            let net = &nets.members[i][c];
            if i + 1 < levels {
                for &x in &nets.members[i + 1][c] {
                    if !sets[i][c][x] {
                        out.push(NetViolation::Nesting {
                            level: i,
                            color: c,
                            point: x,
                        });
                    }
                }
            }
            for &x in net {
                if nets.color.get(x) != Some(&c) {
                    out.push(NetViolation::ColorMismatch {
                        level: i,
                        color: c,
                        point: x,
                    });
                }
            }
            for (a_pos, &a) in net.iter().enumerate() {
                for &b in &net[a_pos + 1..] {
                    let d = ms.dist(a, b);
                    if d <= r {
                        out.push(NetViolation::Packing {
                            level: i,
                            color: c,
                            a,
                            b,
                            dist: d,
                        });
                    }
                }
            }
        }
        if i == 0 {
            continue;
        }
        for x in 0..n {
            if (0..colors).any(|c| sets[i][c][x]) {
                continue;
            }
            for c in 0..colors {
                if !nets.members[i][c].iter().any(|&y| ms.dist(x, y) <= r) {
                    out.push(NetViolation::Covering {
                        level: i,
                        color: c,
                        point: x,
                    });
                }
            }
        }
    }
    for x in 0..n {
        if !(0..colors).any(|c| sets[0][c][x]) {
            out.push(NetViolation::Uncolored { point: x });
        }
    }
    out
}
