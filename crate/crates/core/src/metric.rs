//! Finite metric spaces.
//!
//! A [`MetricSpace`] is immutable once built and keeps a dense `n x n`
//! distance table regardless of backend, so `dist` is a constant-time lookup.
//! The construction pipeline assumes the space has been [normalized]
//! (minimum inter-point distance greater than one).
//!
//! [normalized]: MetricSpace::normalize

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// Row-major coordinates, `dim` values per point, Euclidean distance.
    Coordinates { dim: usize, coords: Vec<f64> },
    /// Explicit distance matrix supplied by the caller.
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    backend: Backend,
    dist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MstResult {
    pub edges: Vec<(usize, usize)>,
    pub weight: f64,
}

impl MetricSpace {
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Points(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_coords(dim, coords)
    }

    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 && !coords.is_empty() {
            return Err(Error::Points("dimension must be positive".into()));
        }
        if dim > 0 && !coords.len().is_multiple_of(dim) {
            return Err(Error::Points(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Points(format!("coordinate {bad} is not finite")));
        }
        let n = coords.len().checked_div(dim).unwrap_or(0);
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            let a = &coords[i * dim..(i + 1) * dim];
            for j in (i + 1)..n {
                let b = &coords[j * dim..(j + 1) * dim];
                let d = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self {
            n,
            backend: Backend::Coordinates { dim, coords },
            dist,
        })
    }

    /// Explicit matrix backend. Checks shape, symmetry, a zero diagonal and
    /// finite non-negative entries; the triangle inequality is only checked by
    /// [`validate_triangle`](Self::validate_triangle).
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Matrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::Matrix(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Matrix(format!(
                        "entry ({i}, {j}) = {d} is not a finite non-negative distance"
                    )));
                }
                if d != dist[j * n + i] {
                    return Err(Error::Matrix(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            backend: Backend::Matrix,
            dist,
        })
    }

    pub fn validate_triangle(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    if self.dist(i, j) > self.dist(i, m) + self.dist(m, j) {
                        return Err(Error::Matrix(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{m}) + d({m},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Coordinate dimension, `None` for the matrix backend.
    pub fn dim(&self) -> Option<usize> {
        match &self.backend {
            Backend::Coordinates { dim, .. } => Some(*dim),
            Backend::Matrix => None,
        }
    }

    pub fn point(&self, i: usize) -> Option<&[f64]> {
        match &self.backend {
            Backend::Coordinates { dim, coords } => Some(&coords[i * dim..(i + 1) * dim]),
            Backend::Matrix => None,
        }
    }

    /// Closest pair `(distance, i, j)` with `i < j`, lowest indices on ties.
    pub fn min_distance(&self) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                if best.is_none_or(|(b, _, _)| d < b) {
                    best = Some((d, i, j));
                }
            }
        }
        best
    }

    /// Uniformly rescales the space so that its minimum inter-point distance
    /// becomes 2. Returns the rescaled space and the factor applied. A space
    /// whose minimum is already 2 up to rounding of the coordinates is
    /// returned unchanged with factor 1.
    pub fn normalize(&self) -> Result<(MetricSpace, f64)> {
        if self.n < 2 {
            return Err(Error::TooFewPoints {
                need: 2,
                got: self.n,
            });
        }
        let (min, i, j) = self.min_distance().expect("n >= 2");
        if min == 0.0 {
            return Err(Error::DuplicatePoints(i, j));
        }
        let scale = 2.0 / min;
        if (min - 2.0).abs() <= 2e-12 {
            return Ok((self.clone(), 1.0));
        }
        let scaled = match &self.backend {
            Backend::Coordinates { dim, coords } => {
                Self::from_coords(*dim, coords.iter().map(|c| c * scale).collect())?
            }
            Backend::Matrix => Self {
                n: self.n,
                backend: Backend::Matrix,
                dist: self.dist.iter().map(|d| d * scale).collect(),
            },
        };
        Ok((scaled, scale))
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Exact minimum spanning tree of the complete distance graph (dense Prim).
    pub fn mst(&self) -> MstResult {
        let n = self.n;
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        let mut weight = 0.0;
        if n == 0 {
            return MstResult { edges, weight };
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        let mut link = vec![0usize; n];
        in_tree[0] = true;
        for v in 1..n {
            best[v] = self.dist(0, v);
        }
        for _ in 1..n {
            let mut next = usize::MAX;
            for v in 0..n {
                if !in_tree[v] && (next == usize::MAX || best[v] < best[next]) {
                    next = v;
                }
            }
            in_tree[next] = true;
            weight += best[next];
            let (a, b) = if link[next] < next {
                (link[next], next)
            } else {
                (next, link[next])
            };
            edges.push((a, b));
            for v in 0..n {
                if !in_tree[v] {
                    let d = self.dist(next, v);
                    if d < best[v] {
                        best[v] = d;
                        link[v] = next;
                    }
                }
            }
        }
        MstResult { edges, weight }
    }

    /// Restriction of the space to `ids` (re-indexed in the given order).
    pub fn subspace(&self, ids: &[usize]) -> MetricSpace {
        let m = ids.len();
        let mut dist = vec![0.0; m * m];
        for (a, &i) in ids.iter().enumerate() {
            for (b, &j) in ids.iter().enumerate() {
                dist[a * m + b] = self.dist(i, j);
            }
        }
        let backend = match &self.backend {
            Backend::Coordinates { dim, coords } => Backend::Coordinates {
                dim: *dim,
                coords: ids
                    .iter()
                    .flat_map(|&i| coords[i * dim..(i + 1) * dim].iter().copied())
                    .collect(),
            },
            Backend::Matrix => Backend::Matrix,
        };
        MetricSpace {
            n: m,
            backend,
            dist,
        }
    }
}

/// `2^i` for any integer level; exact for every level that fits in an `f64`.
pub fn pow2(i: i64) -> f64 {
    2f64.powi(i as i32)
}

/// Exact `floor(log2 x)` for positive finite `x`, read off the exponent bits.
pub fn floor_log2(x: f64) -> i64 {
    assert!(x > 0.0 && x.is_finite(), "floor_log2 of {x}");
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        // subnormal
        -1074 + (63 - mantissa.leading_zeros() as i64)
    } else {
        exp - 1023
    }
}

/// Exact `ceil(log2 x)` for positive finite `x`.
pub fn ceil_log2(x: f64) -> i64 {
    let f = floor_log2(x);
    if pow2(f) == x {
        f
    } else {
        f + 1
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PointFile {
    dim: usize,
    points: Vec<Vec<f64>>,
}

/// Loads a metric from disk. `.csv` files hold one point per line; `.json`
/// files hold either `{"dim": d, "points": [...]}` or an `n x n` matrix.
pub fn load(path: &Path) -> Result<MetricSpace> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("json") => parse_json(&fs::read_to_string(path)?),
        _ => parse_csv(&fs::read_to_string(path)?),
    }
}

pub fn parse_csv(text: &str) -> Result<MetricSpace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {line}: `{field}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(row);
    }
    MetricSpace::from_points(&points)
}

pub fn parse_json(text: &str) -> Result<MetricSpace> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.is_array() {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value)?;
        MetricSpace::from_matrix(rows)
    } else {
        let file: PointFile = serde_json::from_value(value)?;
        if file.points.iter().any(|p| p.len() != file.dim) {
            return Err(Error::Points(format!(
                "every point must have {} coordinates",
                file.dim
            )));
        }
        if file.points.is_empty() {
            return MetricSpace::from_coords(file.dim.max(1), Vec::new());
        }
        MetricSpace::from_points(&file.points)
    }
}

pub fn points_to_csv(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn points_to_json(dim: usize, points: &[Vec<f64>]) -> Result<String> {
    let file = PointFile {
        dim,
        points: points.to_vec(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Writes points as CSV or JSON depending on the file extension.
pub fn save_points(path: &Path, dim: usize, points: &[Vec<f64>]) -> Result<()> {
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let text = if is_json {
        points_to_json(dim, points)?
    } else {
        points_to_csv(points)
    };
    fs::write(path, text)?;
    Ok(())
}
