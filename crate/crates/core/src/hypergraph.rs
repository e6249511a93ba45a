//! Vertices, edges and t-tight Berge-paths of the complete k-graph on the
//! naturals, together with the definitional checks everything else is
//! verified against.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ColouringOracle;

/// A vertex of the complete k-graph on the naturals; always `>= 1`.
pub type Vertex = u32;

/// A colour id in `1..=r`.
pub type Colour = u32;

/// Which colour-count formula a parameter triple is used with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `r = s(k - t + 1)`: every colouring admits a partition into `s` paths.
    Partition,
    /// `r = s(k - t + 1) + 1`: the block colouring defeats `s` paths.
    Adversary,
}

/// The triple `(s, k, t)` and the colour count `r` it is used with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct Params {
    pub s: u32,
    pub k: u32,
    pub t: u32,
    pub r: u32,
}

#[derive(Deserialize)]
struct RawParams {
    s: u32,
    k: u32,
    t: u32,
    r: u32,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::with_colours(raw.s, raw.k, raw.t, raw.r)
    }
}

impl Params {
    pub fn new(s: u32, k: u32, t: u32, mode: Mode) -> Result<Self> {
        check_triple(s, k, t)?;
        let base = s
            .checked_mul(k - t + 1)
            .ok_or_else(|| Error::Param("s(k-t+1) overflows".into()))?;
        let r = match mode {
            Mode::Partition => base,
            Mode::Adversary => base + 1,
        };
        if r > 64 {
            return Err(Error::Param(format!("r = {r} exceeds the supported 64 colours")));
        }
        Ok(Params { s, k, t, r })
    }

    pub fn partition(s: u32, k: u32, t: u32) -> Result<Self> {
        Self::new(s, k, t, Mode::Partition)
    }

    pub fn adversary(s: u32, k: u32, t: u32) -> Result<Self> {
        Self::new(s, k, t, Mode::Adversary)
    }

    /// Builds parameters for an externally supplied colour count, inferring
    /// the mode. Fails when `r` matches neither formula.
    pub fn with_colours(s: u32, k: u32, t: u32, r: u32) -> Result<Self> {
        check_triple(s, k, t)?;
        for mode in [Mode::Partition, Mode::Adversary] {
            let p = Self::new(s, k, t, mode)?;
            if p.r == r {
                return Ok(p);
            }
        }
        Err(Error::Param(format!(
            "r = {r} matches neither s(k-t+1) = {} nor s(k-t+1)+1 for (s,k,t) = ({s},{k},{t})",
            s * (k - t + 1)
        )))
    }

    pub fn mode(&self) -> Mode {
        if self.r == self.s * (self.k - self.t + 1) {
            Mode::Partition
        } else {
            Mode::Adversary
        }
    }

    /// `k - t + 1`, the number of colour blocks / forbidden positions.
    pub fn slack(&self) -> u32 {
        self.k - self.t + 1
    }
}

fn check_triple(s: u32, k: u32, t: u32) -> Result<()> {
    if s < 1 {
        return Err(Error::Param("s must be at least 1".into()));
    }
    if t < 2 {
        return Err(Error::Param(format!("t = {t} must be at least 2")));
    }
    if k < t {
        return Err(Error::Param(format!("k = {k} must be at least t = {t}")));
    }
    Ok(())
}

/// A k-edge: a strictly increasing sequence of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(Vec<Vertex>);

impl Edge {
    /// Wraps an already strictly increasing vertex list.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Param(format!("edge {vertices:?} is not strictly increasing")));
        }
        if vertices.first() == Some(&0) {
            return Err(Error::Param("vertex ids start at 1".into()));
        }
        Ok(Edge(vertices))
    }

    /// Sorts the vertices; fails on repeats.
    pub fn from_unsorted(mut vertices: Vec<Vertex>) -> Result<Self> {
        vertices.sort_unstable();
        Self::new(vertices)
    }

    /// No checks; for internal callers that build sorted lists themselves.
    pub(crate) fn from_sorted_unchecked(vertices: Vec<Vertex>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Edge(vertices)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn contains_all(&self, vs: &[Vertex]) -> bool {
        vs.iter().all(|&v| self.contains(v))
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.0.last().copied()
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A t-tight Berge-path: the core in path order and one witness edge per
/// window of `t` consecutive core vertices. A single vertex with no edges is
/// the length-0 path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BergePath {
    pub colour: Colour,
    pub core: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl BergePath {
    pub fn single(colour: Colour, v: Vertex) -> Self {
        BergePath { colour, core: vec![v], edges: Vec::new() }
    }

    /// Number of witness edges.
    pub fn length(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub detail: String,
    pub indices: Vec<usize>,
}

/// Outcome of a definitional check. `ok` holds iff `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn new() -> Self {
        VerifyReport { ok: true, violations: Vec::new() }
    }

    pub fn push(&mut self, rule: impl Into<String>, detail: impl Into<String>, indices: Vec<usize>) {
        self.violations.push(Violation { rule: rule.into(), detail: detail.into(), indices });
        self.ok = false;
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn absorb(&mut self, prefix: &str, lead: usize, other: VerifyReport) {
        for v in other.violations {
            let mut indices = vec![lead];
            indices.extend(v.indices);
            self.push(format!("{prefix}.{}", v.rule), format!("path {lead}: {}", v.detail), indices);
        }
    }
}

/// The windows `{v_i, ..., v_{i+t-1}}` of a core, each returned sorted.
pub fn consecutive_tuples(core: &[Vertex], t: usize) -> Result<Vec<Vec<Vertex>>> {
    if t < 2 {
        return Err(Error::Param(format!("t = {t} must be at least 2")));
    }
    Ok(core
        .windows(t)
        .map(|w| {
            let mut s = w.to_vec();
            s.sort_unstable();
            s
        })
        .collect())
}

pub fn verify_berge_path(
    path: &BergePath,
    params: &Params,
    oracle: Option<&ColouringOracle>,
) -> VerifyReport {
    let mut report = VerifyReport::new();
    let k = params.k as usize;
    let t = params.t as usize;

    if path.core.is_empty() {
        report.push("core-nonempty", "core has no vertices", vec![]);
        return report;
    }
    if path.colour < 1 || path.colour > params.r {
        report.push(
            "colour-range",
            format!("colour {} outside 1..={}", path.colour, params.r),
            vec![],
        );
    }
    for (i, &v) in path.core.iter().enumerate() {
        if v == 0 {
            report.push("vertex-positive", "core vertex 0", vec![i]);
        }
    }

    let mut first_seen: HashMap<Vertex, usize> = HashMap::new();
    for (i, &v) in path.core.iter().enumerate() {
        if let Some(&j) = first_seen.get(&v) {
            report.push("core-distinct", format!("vertex {v} repeats in the core"), vec![j, i]);
        } else {
            first_seen.insert(v, i);
        }
    }

    let mut edge_seen: HashMap<&Edge, usize> = HashMap::new();
    for (i, e) in path.edges.iter().enumerate() {
        if e.len() != k {
            report.push("edge-arity", format!("edge {e} has {} vertices, expected {k}", e.len()), vec![i]);
        }
        if e.0.windows(2).any(|w| w[0] >= w[1]) || e.0.first() == Some(&0) {
            report.push("edge-canonical", format!("edge {e} is not a sorted set of positive ids"), vec![i]);
        }
        if let Some(&j) = edge_seen.get(e) {
            report.push("edges-distinct", format!("edge {e} is used twice"), vec![j, i]);
        } else {
            edge_seen.insert(e, i);
        }
    }

    let expected_core = if path.edges.is_empty() { 1 } else { path.edges.len() + t - 1 };
    if path.core.len() != expected_core {
        report.push(
            "length",
            format!(
                "core has {} vertices but {} edges require {expected_core}",
                path.core.len(),
                path.edges.len()
            ),
            vec![],
        );
    }

    for (i, (window, e)) in path.core.windows(t).zip(path.edges.iter()).enumerate() {
        if let Some(&v) = window.iter().find(|&&v| !e.0.contains(&v)) {
            report.push(
                "tuple-containment",
                format!("edge {e} misses core vertex {v} of window {i}"),
                vec![i],
            );
        }
    }

    if let Some(oracle) = oracle {
        for (i, e) in path.edges.iter().enumerate() {
            if e.len() != k {
                continue;
            }
            match oracle.colour(e) {
                Ok(c) if c == path.colour => {}
                Ok(c) => report.push(
                    "monochromatic",
                    format!("edge {e} has colour {c}, path colour is {}", path.colour),
                    vec![i],
                ),
                Err(err) => report.push("colour-query", format!("edge {e}: {err}"), vec![i]),
            }
        }
    }
    report
}

/// Checks that `paths` core-partition a superset of `[prefix_n]` into at most
/// `s` monochromatic t-tight Berge-paths of pairwise different colours.
pub fn verify_family(
    paths: &[BergePath],
    prefix_n: u32,
    params: &Params,
    oracle: &ColouringOracle,
) -> VerifyReport {
    let mut report = VerifyReport::new();
    if prefix_n < 1 {
        report.push("prefix", "prefix must be at least 1", vec![]);
    }
    if paths.len() > params.s as usize {
        report.push(
            "path-count",
            format!("{} paths exceed s = {}", paths.len(), params.s),
            vec![],
        );
    }
    for (i, p) in paths.iter().enumerate() {
        let sub = verify_berge_path(p, params, Some(oracle));
        report.absorb("path", i, sub);
    }

    let mut colour_owner: HashMap<Colour, usize> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        if let Some(&j) = colour_owner.get(&p.colour) {
            report.push(
                "distinct-colours",
                format!("paths {j} and {i} both have colour {}", p.colour),
                vec![j, i],
            );
        } else {
            colour_owner.insert(p.colour, i);
        }
    }

    let mut owner: HashMap<Vertex, usize> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        let distinct: BTreeSet<Vertex> = p.core.iter().copied().collect();
        for v in distinct {
            if let Some(&j) = owner.get(&v) {
                report.push(
                    "cores-disjoint",
                    format!("vertex {v} lies in the cores of paths {j} and {i}"),
                    vec![j, i],
                );
            } else {
                owner.insert(v, i);
            }
        }
    }

    let missing: Vec<Vertex> = (1..=prefix_n).filter(|v| !owner.contains_key(v)).collect();
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(20).map(|v| v.to_string()).collect();
        report.push(
            "prefix-coverage",
            format!(
                "{} vertices of [1,{prefix_n}] uncovered: {}{}",
                missing.len(),
                shown.join(","),
                if missing.len() > 20 { ",..." } else { "" }
            ),
            missing.iter().map(|&v| v as usize).collect(),
        );
    }
    report
}

/// Largest `n` with `[n]` contained in the union of the cores.
pub fn covered_prefix(paths: &[BergePath]) -> u32 {
    let all: HashSet<Vertex> = paths.iter().flat_map(|p| p.core.iter().copied()).collect();
    let mut n = 0;
    while all.contains(&(n + 1)) {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(vs: &[Vertex]) -> Edge {
        Edge::from_unsorted(vs.to_vec()).unwrap()
    }

    #[test]
    fn tuples_of_short_core_are_empty() {
        assert!(consecutive_tuples(&[5], 2).unwrap().is_empty());
    }

    #[test]
    fn tuples_graph_case() {
        assert_eq!(consecutive_tuples(&[1, 2, 3], 2).unwrap(), vec![vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn tuples_sliding_window_as_sets() {
        assert_eq!(
            consecutive_tuples(&[4, 7, 2, 9], 3).unwrap(),
            vec![vec![2, 4, 7], vec![2, 7, 9]]
        );
    }

    #[test]
    fn tuples_reject_small_t() {
        assert!(matches!(consecutive_tuples(&[1, 2], 1), Err(Error::Param(_))));
    }

    #[test]
    fn single_vertex_path_is_valid() {
        for (s, k, t) in [(1, 2, 2), (2, 3, 2), (1, 4, 3)] {
            let p = Params::partition(s, k, t).unwrap();
            assert!(verify_berge_path(&BergePath::single(1, 3), &p, None).ok);
        }
    }

    #[test]
    fn pairs_inside_their_edges() {
        let p = Params::partition(1, 3, 2).unwrap();
        let path = BergePath { colour: 1, core: vec![1, 2, 3], edges: vec![edge(&[1, 2, 9]), edge(&[2, 3, 7])] };
        assert!(verify_berge_path(&path, &p, None).ok);
    }

    #[test]
    fn duplicate_edge_rejected() {
        let p = Params::partition(1, 2, 2).unwrap();
        let path = BergePath { colour: 1, core: vec![1, 2, 3], edges: vec![edge(&[1, 2]), edge(&[1, 2])] };
        let r = verify_berge_path(&path, &p, None);
        assert!(!r.ok);
        assert!(r.has_rule("edges-distinct"));
        assert!(r.has_rule("tuple-containment"));
    }

    #[test]
    fn wrong_length_and_repeat() {
        let p = Params::partition(1, 3, 3).unwrap();
        let path = BergePath { colour: 1, core: vec![1, 2], edges: vec![] };
        assert!(verify_berge_path(&path, &p, None).has_rule("length"));
        let path = BergePath { colour: 1, core: vec![1, 2, 1], edges: vec![edge(&[1, 2, 3])] };
        let r = verify_berge_path(&path, &p, None);
        assert!(r.has_rule("core-distinct"));
        assert!(!r.ok);
    }

    #[test]
    fn edge_arity_checked() {
        let p = Params::partition(1, 3, 2).unwrap();
        let path = BergePath { colour: 1, core: vec![1, 2], edges: vec![edge(&[1, 2])] };
        assert!(verify_berge_path(&path, &p, None).has_rule("edge-arity"));
    }

    #[test]
    fn params_validation() {
        assert!(Params::partition(1, 2, 3).is_err());
        assert!(Params::partition(0, 3, 2).is_err());
        assert!(Params::partition(1, 3, 1).is_err());
        assert_eq!(Params::partition(2, 4, 3).unwrap().r, 4);
        assert_eq!(Params::adversary(2, 4, 3).unwrap().r, 5);
        assert_eq!(Params::with_colours(1, 2, 2, 2).unwrap().mode(), Mode::Adversary);
        assert_eq!(Params::with_colours(1, 3, 3, 1).unwrap().mode(), Mode::Partition);
        assert!(Params::with_colours(1, 3, 2, 7).is_err());
    }

    #[test]
    fn params_json_is_validated() {
        let ok: Params = serde_json::from_str(r#"{"s":1,"k":3,"t":2,"r":2}"#).unwrap();
        assert_eq!(ok, Params::partition(1, 3, 2).unwrap());
        assert!(serde_json::from_str::<Params>(r#"{"s":1,"k":2,"t":3,"r":2}"#).is_err());
    }

    #[test]
    fn edge_json_shape() {
        assert_eq!(serde_json::to_string(&edge(&[3, 1, 2])).unwrap(), "[1,2,3]");
        let p = BergePath { colour: 2, core: vec![4, 1], edges: vec![edge(&[1, 4])] };
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"colour":2,"core":[4,1],"edges":[[1,4]]}"#
        );
    }
}
