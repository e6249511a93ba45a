//! Deterministic edge-colouring sources over the complete k-graph.
//!
//! Three sources are supported: a seeded pseudo-random colouring, an
//! explicit table that must be total on its declared window, and the
//! adversarial block colouring from [`crate::adversary`]. All of them are
//! pure functions of the queried edge.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversary::BlockLayout;
use crate::combin::for_each_subset;
use crate::error::{Error, Result};
use crate::hypergraph::{Colour, Edge, Vertex};

/// On-disk description of a colouring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColouringSpec {
    Explicit { k: u32, r: u32, window: u32, edges: Vec<EdgeColour> },
    Random { k: u32, r: u32, seed: u64 },
    Adversarial { s: u32, k: u32, t: u32, blocks: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColour {
    pub e: Vec<Vertex>,
    pub c: Colour,
}

#[derive(Debug, Clone)]
enum Source {
    Random { seed: u64 },
    Explicit { window: u32, table: HashMap<Edge, Colour> },
    Adversarial(BlockLayout),
}

/// A total, deterministic map from k-edges to colours in `1..=r`.
#[derive(Debug, Clone)]
pub struct ColouringOracle {
    k: u32,
    r: u32,
    source: Source,
}

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based hash of `(seed, edge)`: each vertex id advances a SplitMix64
/// stream keyed by the seed. Independent of query order.
fn edge_hash(seed: u64, vertices: &[Vertex]) -> u64 {
    let mut h = mix64(seed.wrapping_add(GAMMA));
    for &v in vertices {
        h = mix64(h.wrapping_add(GAMMA).wrapping_add(u64::from(v)));
    }
    mix64(h ^ vertices.len() as u64)
}

/// Seeded pseudo-random colouring, uniform over `1..=r`.
///
/// The colour of an edge is `floor(h * r / 2^64) + 1`, where `h` is a
/// SplitMix64 stream keyed by the seed and fed the sorted vertex ids.
pub fn make_random_oracle(r: u32, k: u32, seed: u64) -> ColouringOracle {
    assert!(r >= 1 && k >= 2, "random oracle needs r >= 1 and k >= 2");
    ColouringOracle { k, r, source: Source::Random { seed } }
}

/// Loads a colouring file and requires it to be of the explicit kind.
pub fn load_explicit_oracle(path: &Path) -> Result<ColouringOracle> {
    let oracle = load_oracle(path)?;
    if !matches!(oracle.source, Source::Explicit { .. }) {
        return Err(Error::Load(format!("{}: not an explicit colouring", path.display())));
    }
    Ok(oracle)
}

/// Loads any colouring file.
pub fn load_oracle(path: &Path) -> Result<ColouringOracle> {
    let text = fs::read_to_string(path)?;
    let spec: ColouringSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    ColouringOracle::from_spec(&spec)
}

impl ColouringOracle {
    pub fn from_spec(spec: &ColouringSpec) -> Result<Self> {
        match spec {
            ColouringSpec::Random { k, r, seed } => {
                if *r < 1 || *k < 2 {
                    return Err(Error::Load(format!("random colouring needs r >= 1 and k >= 2, got r={r}, k={k}")));
                }
                Ok(make_random_oracle(*r, *k, *seed))
            }
            ColouringSpec::Explicit { k, r, window, edges } => {
                let mut table = HashMap::with_capacity(edges.len());
                for item in edges {
                    let e = Edge::from_unsorted(item.e.clone())
                        .map_err(|err| Error::Load(format!("edge {:?}: {err}", item.e)))?;
                    table.insert(e, item.c);
                }
                Self::explicit(*k, *r, *window, table)
            }
            ColouringSpec::Adversarial { s, k, t, blocks } => {
                let layout = BlockLayout::from_sizes(*s, *k, *t, blocks.clone())
                    .map_err(|e| Error::Load(e.to_string()))?;
                Ok(Self::adversarial(layout))
            }
        }
    }

    /// Explicit table colouring; must colour every k-subset of `[window]`
    /// and nothing outside it.
    pub fn explicit(k: u32, r: u32, window: u32, table: HashMap<Edge, Colour>) -> Result<Self> {
        if k < 2 || r < 1 {
            return Err(Error::Load(format!("explicit colouring needs k >= 2 and r >= 1, got k={k}, r={r}")));
        }
        let mut offenders: Vec<(&Edge, &Colour)> = table
            .iter()
            .filter(|(e, &c)| {
                e.len() != k as usize || c < 1 || c > r || e.max_vertex().is_some_and(|m| m > window)
            })
            .collect();
        offenders.sort();
        if let Some((e, &c)) = offenders.first() {
            let why = if e.len() != k as usize {
                format!("edge {e} has {} vertices, expected {k}", e.len())
            } else if c < 1 || c > r {
                format!("edge {e} has colour {c} outside 1..={r}")
            } else {
                format!("edge {e} lies outside window {window}")
            };
            return Err(Error::Load(why));
        }
        let all: Vec<Vertex> = (1..=window).collect();
        let mut missing = None;
        for_each_subset(&all, k as usize, |vs| {
            if table.contains_key(&Edge::from_sorted_unchecked(vs.to_vec())) {
                true
            } else {
                missing = Some(Edge::from_sorted_unchecked(vs.to_vec()));
                false
            }
        });
        if let Some(e) = missing {
            return Err(Error::Load(format!("edge {e} uncoloured")));
        }
        Ok(ColouringOracle { k, r, source: Source::Explicit { window, table } })
    }

    /// Builds an explicit oracle by tabulating `f` over `[window]`.
    pub fn tabulate(k: u32, r: u32, window: u32, mut f: impl FnMut(&[Vertex]) -> Colour) -> Result<Self> {
        let all: Vec<Vertex> = (1..=window).collect();
        let mut table = HashMap::new();
        for_each_subset(&all, k as usize, |vs| {
            table.insert(Edge::from_sorted_unchecked(vs.to_vec()), f(vs));
            true
        });
        Self::explicit(k, r, window, table)
    }

    pub fn adversarial(layout: BlockLayout) -> Self {
        ColouringOracle { k: layout.k, r: layout.r, source: Source::Adversarial(layout) }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Largest vertex id guaranteed colourable; `None` when unbounded.
    pub fn window_hint(&self) -> Option<u32> {
        match &self.source {
            Source::Explicit { window, .. } => Some(*window),
            _ => None,
        }
    }

    pub fn layout(&self) -> Option<&BlockLayout> {
        match &self.source {
            Source::Adversarial(l) => Some(l),
            _ => None,
        }
    }

    pub fn colour(&self, e: &Edge) -> Result<Colour> {
        self.colour_of(e.vertices())
    }

    /// Colour of a strictly increasing vertex slice of length `k`.
    pub fn colour_of(&self, vertices: &[Vertex]) -> Result<Colour> {
        if vertices.len() != self.k as usize {
            return Err(Error::Param(format!(
                "edge {vertices:?} has {} vertices, oracle is {}-uniform",
                vertices.len(),
                self.k
            )));
        }
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        match &self.source {
            Source::Random { seed } => {
                if self.r == 1 {
                    return Ok(1);
                }
                let h = edge_hash(*seed, vertices);
                Ok(((u128::from(h) * u128::from(self.r)) >> 64) as Colour + 1)
            }
            Source::Explicit { window, table } => {
                let max = *vertices.last().expect("k >= 2");
                if max > *window {
                    return Err(Error::OutOfWindow(format!(
                        "vertex {max} beyond explicit window {window}"
                    )));
                }
                table
                    .get(&Edge::from_sorted_unchecked(vertices.to_vec()))
                    .copied()
                    .ok_or_else(|| Error::Param(format!("edge {vertices:?} is not a set of positive ids")))
            }
            Source::Adversarial(layout) => Ok(layout.colour_of(vertices)),
        }
    }

    /// The JSON descriptor for this colouring. Explicit tables are emitted in
    /// lexicographic edge order.
    pub fn spec(&self) -> ColouringSpec {
        match &self.source {
            Source::Random { seed } => ColouringSpec::Random { k: self.k, r: self.r, seed: *seed },
            Source::Explicit { window, table } => {
                let mut edges: Vec<EdgeColour> = table
                    .iter()
                    .map(|(e, &c)| EdgeColour { e: e.vertices().to_vec(), c })
                    .collect();
                edges.sort_by(|a, b| a.e.cmp(&b.e));
                ColouringSpec::Explicit { k: self.k, r: self.r, window: *window, edges }
            }
            Source::Adversarial(layout) => ColouringSpec::Adversarial {
                s: layout.s,
                k: layout.k,
                t: layout.t,
                blocks: layout.sizes().to_vec(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::for_each_subset;

    fn e(vs: &[Vertex]) -> Edge {
        Edge::from_unsorted(vs.to_vec()).unwrap()
    }

    #[test]
    fn single_colour() {
        let o = make_random_oracle(1, 3, 99);
        assert_eq!(o.colour(&e(&[1, 5, 9])).unwrap(), 1);
    }

    #[test]
    fn explicit_lookup() {
        let mut table = HashMap::new();
        table.insert(e(&[1, 2, 3]), 2);
        let o = ColouringOracle::explicit(3, 2, 3, table).unwrap();
        assert_eq!(o.colour(&e(&[1, 2, 3])).unwrap(), 2);
    }

    #[test]
    fn random_is_deterministic_across_instances() {
        let a = make_random_oracle(3, 3, 7);
        let b = make_random_oracle(3, 3, 7);
        for vs in [[1, 2, 3], [4, 9, 17], [2, 3, 100]] {
            let x = a.colour(&e(&vs)).unwrap();
            assert_eq!(x, a.colour(&e(&vs)).unwrap());
            assert_eq!(x, b.colour(&e(&vs)).unwrap());
        }
    }

    #[test]
    fn random_range() {
        let o = make_random_oracle(2, 3, 0);
        let c = o.colour(&e(&[1, 2, 3])).unwrap();
        assert!(c == 1 || c == 2);
    }

    #[test]
    fn random_frequency_on_twelve_vertices() {
        // Exhaustive count over C(12,3) = 220 edges.
        let o = make_random_oracle(2, 3, 0);
        let all: Vec<Vertex> = (1..=12).collect();
        let (mut ones, mut total) = (0usize, 0usize);
        for_each_subset(&all, 3, |vs| {
            total += 1;
            if o.colour_of(vs).unwrap() == 1 {
                ones += 1;
            }
            true
        });
        assert_eq!(total, 220);
        let freq = ones as f64 / total as f64;
        assert!((0.35..=0.65).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn wrong_arity_is_a_parameter_error() {
        let o = make_random_oracle(2, 3, 0);
        assert!(matches!(o.colour(&e(&[1, 2])), Err(Error::Param(_))));
    }

    #[test]
    fn explicit_out_of_window() {
        let o = ColouringOracle::tabulate(2, 2, 3, |_| 1).unwrap();
        assert!(matches!(o.colour(&e(&[1, 4])), Err(Error::OutOfWindow(_))));
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_total_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.json",
            r#"{"kind":"explicit","k":2,"r":2,"window":3,"edges":[{"e":[1,2],"c":1},{"e":[1,3],"c":2},{"e":[2,3],"c":2}]}"#,
        );
        let o = load_explicit_oracle(&p).unwrap();
        assert_eq!(o.colour(&e(&[1, 2])).unwrap(), 1);
        assert_eq!(o.colour(&e(&[1, 3])).unwrap(), 2);
        assert_eq!(o.colour(&e(&[2, 3])).unwrap(), 2);
    }

    #[test]
    fn load_rejects_missing_edge() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.json",
            r#"{"kind":"explicit","k":2,"r":2,"window":3,"edges":[{"e":[1,2],"c":1},{"e":[2,3],"c":2}]}"#,
        );
        let err = load_explicit_oracle(&p).unwrap_err().to_string();
        assert!(err.contains("edge {1,3} uncoloured"), "{err}");
    }

    #[test]
    fn load_rejects_colour_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.json",
            r#"{"kind":"explicit","k":2,"r":2,"window":2,"edges":[{"e":[1,2],"c":5}]}"#,
        );
        assert!(matches!(load_explicit_oracle(&p), Err(Error::Load(_))));
    }

    #[test]
    fn load_rejects_wrong_arity_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.json",
            r#"{"kind":"explicit","k":2,"r":2,"window":3,"edges":[{"e":[1,2,3],"c":1}]}"#,
        );
        assert!(matches!(load_explicit_oracle(&p), Err(Error::Load(_))));
        let p = write(&dir, "d.json", "{not json");
        assert!(matches!(load_explicit_oracle(&p), Err(Error::Load(_))));
    }

    #[test]
    fn spec_round_trip() {
        let o = ColouringOracle::tabulate(2, 3, 4, |vs| (vs[0] + vs[1]) % 3 + 1).unwrap();
        let back = ColouringOracle::from_spec(&o.spec()).unwrap();
        for vs in [[1, 2], [1, 4], [3, 4]] {
            assert_eq!(o.colour_of(&vs).unwrap(), back.colour_of(&vs).unwrap());
        }
        let json = serde_json::to_string(&make_random_oracle(4, 3, 11).spec()).unwrap();
        assert_eq!(json, r#"{"kind":"random","k":3,"r":4,"seed":11}"#);
    }

    proptest::proptest! {
        #[test]
        fn purity_over_repeated_queries(seed in 0u64..1000, a in 1u32..50, b in 51u32..100, c in 101u32..200) {
            let o = make_random_oracle(5, 3, seed);
            let first = o.colour_of(&[a, b, c]).unwrap();
            for _ in 0..10 {
                proptest::prop_assert_eq!(o.colour_of(&[a, b, c]).unwrap(), first);
            }
        }
    }
}
