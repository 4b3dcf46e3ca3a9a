//! Undirected weighted spanners over point ids with provenance tags.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricSpace;

bitflags! {
    /// Provenance classes of a point edge; an edge induced several ways
    /// carries the union.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
    pub struct Tags: u8 {
        const LOCAL_TREE = 1;
        const SHORTCUT = 1 << 1;
        const FOREIGN = 1 << 2;
        const CROSS = 1 << 3;
        const SINGLE_SINK = 1 << 4;
    }
}

impl Tags {
    pub const SKELETON: Tags = Tags::LOCAL_TREE.union(Tags::SHORTCUT);

    pub fn is_skeleton(self) -> bool {
        self.intersects(Self::SKELETON)
    }

    /// `A|B|C` in declaration order; empty sets render as `NONE`.
    pub fn label(self) -> String {
        if self.is_empty() {
            return "NONE".into();
        }
        self.iter_names()
            .map(|(name, _)| name)
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn parse(s: &str) -> Result<Tags> {
        let s = s.trim();
        if s.is_empty() || s == "NONE" {
            return Ok(Tags::empty());
        }
        s.split('|').try_fold(Tags::empty(), |acc, name| {
            Tags::from_name(name.trim())
                .map(|t| acc | t)
                .ok_or_else(|| Error::Parse(format!("unknown edge tag `{name}`")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeData {
    pub weight: f64,
    pub tags: Tags,
    /// `(from, to)` for edges that carry a direction.
    pub orientation: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spanner {
    n: usize,
    edges: BTreeMap<(usize, usize), EdgeData>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Spanner {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Inserts `{u, v}` or unions `tags` into the existing edge. Self-loops
    /// are ignored.
    pub fn add(&mut self, u: usize, v: usize, weight: f64, tags: Tags) {
        assert!(u < self.n && v < self.n, "edge ({u}, {v}) out of range");
        if u == v {
            return;
        }
        self.edges
            .entry(key(u, v))
            .and_modify(|e| e.tags |= tags)
            .or_insert(EdgeData {
                weight,
                tags,
                orientation: None,
            });
    }

    pub fn add_metric(&mut self, ms: &MetricSpace, u: usize, v: usize, tags: Tags) {
        self.add(u, v, ms.dist(u, v), tags);
    }

    pub fn set_orientation(&mut self, from: usize, to: usize) {
        if let Some(e) = self.edges.get_mut(&key(from, to)) {
            e.orientation = Some((from, to));
        }
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&EdgeData> {
        self.edges.get(&key(u, v))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&key(u, v))
    }

    pub fn remove(&mut self, u: usize, v: usize) -> Option<EdgeData> {
        self.edges.remove(&key(u, v))
    }

    /// Edges in ascending `(u, v)` order with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &EdgeData)> + '_ {
        self.edges.iter().map(|(&(u, v), e)| (u, v, e))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().map(|e| e.weight).sum()
    }

    /// Sorted adjacency lists `(neighbor, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(u, v), e) in &self.edges {
            adj[u].push((v, e.weight));
            adj[v].push((u, e.weight));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.degrees_where(|_| true)
    }

    pub fn degrees_where(&self, keep: impl Fn(Tags) -> bool) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for (&(u, v), e) in &self.edges {
            if keep(e.tags) {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        deg
    }

    /// Edges whose tag set meets `tags`.
    pub fn filter(&self, keep: impl Fn(&EdgeData) -> bool) -> Spanner {
        Spanner {
            n: self.n,
            edges: self
                .edges
                .iter()
                .filter(|(_, e)| keep(e))
                .map(|(&k, &e)| (k, e))
                .collect(),
        }
    }

    /// Unions another spanner over the same points into this one. Tags merge;
    /// an existing orientation is kept.
    pub fn merge(&mut self, other: &Spanner) {
        for (&k, e) in &other.edges {
            self.edges
                .entry(k)
                .and_modify(|mine| {
                    mine.tags |= e.tags;
                    if mine.orientation.is_none() {
                        mine.orientation = e.orientation;
                    }
                })
                .or_insert(*e);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# n={}\nu,v,weight,tags,orientation\n", self.n);
        for (&(u, v), e) in &self.edges {
            let orient = e
                .orientation
                .map(|(a, b)| format!("{a}->{b}"))
                .unwrap_or_default();
            writeln!(out, "{u},{v},{},{},{orient}", e.weight, e.tags.label())
                .expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Spanner> {
        let mut n = None;
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix('#') {
                if let Some(val) = rest.trim().strip_prefix("n=") {
                    n = Some(val.trim().parse::<usize>().map_err(|_| {
                        Error::Parse(format!("bad point count `{val}` in spanner header"))
                    })?);
                }
            }
        }
        let n = n.ok_or_else(|| Error::Parse("spanner file lacks a `# n=` header".into()))?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut sp = Spanner::new(n);
        for record in reader.records() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("");
            let num = |i: usize| -> Result<usize> {
                field(i)
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad vertex `{}`", field(i))))
            };
            let (u, v) = (num(0)?, num(1)?);
            if u >= n || v >= n {
                return Err(Error::Parse(format!("edge ({u}, {v}) exceeds n = {n}")));
            }
            let weight: f64 = field(2)
                .parse()
                .map_err(|_| Error::Parse(format!("bad weight `{}`", field(2))))?;
            let tags = Tags::parse(field(3))?;
            sp.add(u, v, weight, tags);
            let orient = field(4);
            if !orient.is_empty() {
                let (a, b) = orient
                    .split_once("->")
                    .ok_or_else(|| Error::Parse(format!("bad orientation `{orient}`")))?;
                let a: usize = a.trim().parse().map_err(|_| Error::Parse(orient.into()))?;
                let b: usize = b.trim().parse().map_err(|_| Error::Parse(orient.into()))?;
                if key(a, b) != key(u, v) {
                    return Err(Error::Parse(format!(
                        "orientation {orient} does not match edge ({u}, {v})"
                    )));
                }
                sp.set_orientation(a, b);
            }
        }
        Ok(sp)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph spanner {\n");
        for i in 0..self.n {
            writeln!(out, "  {i};").expect("writing to a String");
        }
        for (&(u, v), e) in &self.edges {
            let dir = e
                .orientation
                .map(|(a, b)| {
                    format!(
                        ", dir=\"{}\"",
                        if a == u && b == v { "forward" } else { "back" }
                    )
                })
                .unwrap_or_default();
            writeln!(
                out,
                "  {u} -- {v} [weight={}, tags=\"{}\"{dir}];",
                e.weight,
                e.tags.label()
            )
            .expect("writing to a String");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let file = SpannerFile {
            schema: 1,
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|(&(u, v), e)| JsonEdge {
                    u,
                    v,
                    weight: e.weight,
                    tags: e.tags.iter_names().map(|(s, _)| s.to_string()).collect(),
                    orientation: e.orientation,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Spanner> {
        let file: SpannerFile = serde_json::from_str(text)?;
        let mut sp = Spanner::new(file.n);
        for e in file.edges {
            if e.u >= file.n || e.v >= file.n {
                return Err(Error::Parse(format!("edge ({}, {}) exceeds n", e.u, e.v)));
            }
            let tags = Tags::parse(&e.tags.join("|"))?;
            sp.add(e.u, e.v, e.weight, tags);
            if let Some((a, b)) = e.orientation {
                sp.set_orientation(a, b);
            }
        }
        Ok(sp)
    }
}

#[derive(Serialize, Deserialize)]
struct SpannerFile {
    schema: u32,
    n: usize,
    edges: Vec<JsonEdge>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    u: usize,
    v: usize,
    weight: f64,
    tags: Vec<String>,
    orientation: Option<(usize, usize)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Spanner {
        let mut s = Spanner::new(4);
        s.add(0, 1, 0.1 + 0.2, Tags::LOCAL_TREE);
        s.add(1, 0, 0.3, Tags::CROSS);
        s.add(2, 3, 1e-17, Tags::FOREIGN);
        s.set_orientation(3, 2);
        s.add(1, 1, 5.0, Tags::CROSS);
        s
    }

    #[test]
    fn tags_union_and_self_loops() {
        let s = sample();
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.get(0, 1).unwrap().tags, Tags::LOCAL_TREE | Tags::CROSS);
        assert!(s.get(0, 1).unwrap().tags.is_skeleton());
        assert_eq!(s.degrees(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let text = s.to_csv();
        assert!(text.starts_with("# n=4\n"));
        assert_eq!(Spanner::from_csv(&text).unwrap(), s);
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        assert_eq!(Spanner::from_json(&s.to_json().unwrap()).unwrap(), s);
    }

    #[test]
    fn dot_lists_tags() {
        let dot = sample().to_dot();
        assert!(dot.contains("0 -- 1"));
        assert!(dot.contains("LOCAL_TREE|CROSS"));
        assert!(dot.contains("dir=\"back\""));
    }

    #[test]
    fn tag_parsing() {
        assert_eq!(Tags::parse("NONE").unwrap(), Tags::empty());
        assert_eq!(
            Tags::parse("CROSS|SHORTCUT").unwrap(),
            Tags::CROSS | Tags::SHORTCUT
        );
        assert!(Tags::parse("BOGUS").is_err());
    }

    #[test]
    fn rejects_missing_header() {
        assert!(Spanner::from_csv("u,v,weight,tags,orientation\n0,1,1,CROSS,\n").is_err());
    }
}
