use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::combin::{binomial, for_each_subset};
use crate::error::{Error, Result};
use crate::hypergraph::{verify_family, BergePath, Colour, Edge, Params, Vertex};
use crate::oracle::ColouringOracle;

/// Guards for the exhaustive cover search.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    /// Refuse windows with more than this many k-edges.
    pub max_edges: u64,
    /// Refuse to expand more than this many search nodes.
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_edges: 500_000, node_budget: 200_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverSearchResult {
    pub coverable: bool,
    pub witness: Option<Vec<BergePath>>,
    pub nodes_explored: u64,
}

/// Decides whether `[window]` can be core-partitioned by at most `s`
/// monochromatic t-tight Berge-paths of pairwise different colours.
///
/// The search is complete. Paths are taken in increasing colour order and
/// each core is grown by ascending vertex id, closing a path before trying
/// to extend it, so the witness is the first family in that order.
pub fn brute_force_cover_check(
    oracle: &ColouringOracle,
    window: u32,
    params: &Params,
    limits: SearchLimits,
) -> Result<CoverSearchResult> {
    if oracle.k() != params.k || oracle.r() != params.r {
        return Err(Error::Param(format!(
            "oracle is ({}-uniform, {} colours) but params are k={}, r={}",
            oracle.k(),
            oracle.r(),
            params.k,
            params.r
        )));
    }
    if window == 0 || window > 64 {
        return Err(Error::Size(format!("cover search supports windows 1..=64, got {window}")));
    }
    let edge_count = binomial(u64::from(window), u64::from(params.k));
    if edge_count > limits.max_edges {
        return Err(Error::Size(format!(
            "C({window},{}) = {edge_count} edges exceeds the limit of {}",
            params.k, limits.max_edges
        )));
    }
    if let Some(hint) = oracle.window_hint() {
        if hint < window {
            return Err(Error::OutOfWindow(format!("colouring covers only [{hint}]")));
        }
    }

    let mut search = Search::new(oracle, window, params, limits)?;
    let found = search.open_path(0, 1, 0)?;
    let witness = if found {
        let paths = search.witness();
        let check = verify_family(&paths, window, params, oracle);
        if !check.ok {
            return Err(Error::Invariant(format!("cover search produced an invalid family: {:?}", check.violations)));
        }
        Some(paths)
    } else {
        None
    };
    Ok(CoverSearchResult { coverable: found, witness, nodes_explored: search.nodes })
}

#[derive(Hash, PartialEq, Eq)]
struct MemoKey {
    visited: u64,
    path: usize,
    colour: Colour,
    tail: Vec<Vertex>,
    closable: bool,
}

struct Search<'a> {
    oracle: &'a ColouringOracle,
    n: u32,
    s: usize,
    t: usize,
    r: Colour,
    full: u64,
    budget: u64,
    nodes: u64,
    /// Only when k > t: every window edge as (vertex mask, colour).
    edges: Vec<(u64, Colour)>,
    candidates: HashMap<(u64, Colour), Vec<usize>>,
    /// Only when k = t: failed states.
    memo: Option<HashSet<MemoKey>>,
    cores: Vec<Vec<Vertex>>,
    colours: Vec<Colour>,
    // Matching of the open path's windows onto distinct edges (k > t).
    window_edge: Vec<usize>,
    edge_window: HashMap<usize, usize>,
    window_cands: Vec<Vec<usize>>,
    done_edges: Vec<Vec<Edge>>,
}

impl<'a> Search<'a> {
    fn new(oracle: &'a ColouringOracle, n: u32, params: &Params, limits: SearchLimits) -> Result<Self> {
        let tight = params.k == params.t;
        let mut edges = Vec::new();
        if !tight {
            let all: Vec<Vertex> = (1..=n).collect();
            let mut err = None;
            for_each_subset(&all, params.k as usize, |vs| match oracle.colour_of(vs) {
                Ok(c) => {
                    edges.push((mask(vs), c));
                    true
                }
                Err(e) => {
                    err = Some(e);
                    false
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(Search {
            oracle,
            n,
            s: params.s as usize,
            t: params.t as usize,
            r: params.r,
            full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            budget: limits.node_budget,
            nodes: 0,
            edges,
            candidates: HashMap::new(),
            memo: tight.then(HashSet::new),
            cores: Vec::new(),
            colours: Vec::new(),
            window_edge: Vec::new(),
            edge_window: HashMap::new(),
            window_cands: Vec::new(),
            done_edges: Vec::new(),
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget { what: "cover search", budget: self.budget });
        }
        Ok(())
    }

    /// Opens path `j` with a colour of at least `min_colour`.
    fn open_path(&mut self, j: usize, min_colour: Colour, visited: u64) -> Result<bool> {
        if j == self.s {
            return Ok(false);
        }
        for c in min_colour..=self.r {
            for v in 1..=self.n {
                if visited & bit(v) != 0 {
                    continue;
                }
                self.cores.push(vec![v]);
                self.colours.push(c);
                let saved = self.take_matching();
                if self.grow(j, c, visited | bit(v))? {
                    return Ok(true);
                }
                self.restore_matching(saved);
                self.cores.pop();
                self.colours.pop();
            }
        }
        Ok(false)
    }

    fn grow(&mut self, j: usize, c: Colour, visited: u64) -> Result<bool> {
        self.tick()?;
        let len = self.cores[j].len();
        let key = self.memo.as_ref().map(|_| {
            let core = &self.cores[j];
            MemoKey {
                visited,
                path: j,
                colour: c,
                tail: core[len.saturating_sub(self.t - 1)..].to_vec(),
                closable: len == 1 || len >= self.t,
            }
        });
        if let (Some(memo), Some(key)) = (&self.memo, &key) {
            if memo.contains(key) {
                return Ok(false);
            }
        }

        if len == 1 || len >= self.t {
            if visited == self.full {
                self.close_path();
                return Ok(true);
            }
            let saved = self.take_matching();
            self.close_path();
            if self.open_path(j + 1, c + 1, visited)? {
                return Ok(true);
            }
            self.done_edges.pop();
            self.restore_matching(saved);
        }

        for v in 1..=self.n {
            if visited & bit(v) != 0 {
                continue;
            }
            let snapshot = (self.window_edge.clone(), self.edge_window.clone(), self.window_cands.len());
            if len + 1 >= self.t {
                let core = &self.cores[j];
                let mut window: Vec<Vertex> = core[len + 1 - self.t..].to_vec();
                window.push(v);
                if !self.add_window(&window, c)? {
                    self.window_edge = snapshot.0;
                    self.edge_window = snapshot.1;
                    self.window_cands.truncate(snapshot.2);
                    continue;
                }
            }
            self.cores[j].push(v);
            if self.grow(j, c, visited | bit(v))? {
                return Ok(true);
            }
            self.cores[j].pop();
            self.window_edge = snapshot.0;
            self.edge_window = snapshot.1;
            self.window_cands.truncate(snapshot.2);
        }

        if let (Some(memo), Some(key)) = (&mut self.memo, key) {
            memo.insert(key);
        }
        Ok(false)
    }

    /// Records a new window of the open path; false when it cannot get a
    /// witness edge distinct from the others.
    fn add_window(&mut self, window: &[Vertex], c: Colour) -> Result<bool> {
        if self.memo.is_some() {
            let mut sorted = window.to_vec();
            sorted.sort_unstable();
            return Ok(self.oracle.colour_of(&sorted)? == c);
        }
        let wm = window.iter().fold(0u64, |m, &v| m | bit(v));
        let edges = &self.edges;
        let cands = self
            .candidates
            .entry((wm, c))
            .or_insert_with(|| {
                edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(em, ec))| ec == c && em & wm == wm)
                    .map(|(i, _)| i)
                    .collect()
            })
            .clone();
        if cands.is_empty() {
            return Ok(false);
        }
        self.window_cands.push(cands);
        self.window_edge.push(usize::MAX);
        let w = self.window_cands.len() - 1;
        let mut seen = HashSet::new();
        Ok(self.augment(w, &mut seen))
    }

    fn augment(&mut self, w: usize, seen: &mut HashSet<usize>) -> bool {
        for i in 0..self.window_cands[w].len() {
            let e = self.window_cands[w][i];
            if !seen.insert(e) {
                continue;
            }
            let free = match self.edge_window.get(&e) {
                None => true,
                Some(&other) => self.augment(other, seen),
            };
            if free {
                self.window_edge[w] = e;
                self.edge_window.insert(e, w);
                return true;
            }
        }
        false
    }

    fn close_path(&mut self) {
        let j = self.done_edges.len();
        let edges = if self.memo.is_some() {
            self.cores[j]
                .windows(self.t)
                .map(|w| Edge::from_unsorted(w.to_vec()).expect("distinct core vertices"))
                .collect()
        } else {
            self.window_edge.iter().map(|&e| self.edge_of(e)).collect()
        };
        self.done_edges.push(edges);
        self.window_edge.clear();
        self.edge_window.clear();
        self.window_cands.clear();
    }

    fn take_matching(&self) -> (Vec<usize>, HashMap<usize, usize>, Vec<Vec<usize>>) {
        (self.window_edge.clone(), self.edge_window.clone(), self.window_cands.clone())
    }

    fn restore_matching(&mut self, saved: (Vec<usize>, HashMap<usize, usize>, Vec<Vec<usize>>)) {
        self.window_edge = saved.0;
        self.edge_window = saved.1;
        self.window_cands = saved.2;
    }

    fn edge_of(&self, i: usize) -> Edge {
        let m = self.edges[i].0;
        Edge::from_sorted_unchecked((1..=self.n).filter(|&v| m & bit(v) != 0).collect())
    }

    fn witness(&self) -> Vec<BergePath> {
        self.cores
            .iter()
            .zip(&self.colours)
            .zip(&self.done_edges)
            .map(|((core, &colour), edges)| BergePath { colour, core: core.clone(), edges: edges.clone() })
            .collect()
    }
}

fn bit(v: Vertex) -> u64 {
    1u64 << (v - 1)
}

fn mask(vs: &[Vertex]) -> u64 {
    vs.iter().fold(0, |m, &v| m | bit(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::default_block_sizes;
    use crate::hypergraph::Params;
    use crate::oracle::make_random_oracle;

    #[test]
    fn one_colour_is_coverable_by_the_natural_order() {
        for (k, t, n) in [(2, 2, 7), (3, 3, 7), (4, 4, 6)] {
            let p = Params::partition(1, k, t).unwrap();
            let o = make_random_oracle(1, k, 0);
            let res = brute_force_cover_check(&o, n, &p, SearchLimits::default()).unwrap();
            assert!(res.coverable);
            let w = res.witness.unwrap();
            assert_eq!(w.len(), 1);
            assert_eq!(w[0].core, (1..=n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn graph_layout_on_eight_is_not_coverable() {
        let layout = default_block_sizes(1, 2, 2, 8).unwrap();
        let o = ColouringOracle::adversarial(layout);
        let p = Params::adversary(1, 2, 2).unwrap();
        let res = brute_force_cover_check(&o, 8, &p, SearchLimits::default()).unwrap();
        assert!(!res.coverable);
        assert!(res.witness.is_none());
    }

    #[test]
    fn guards() {
        let p = Params::partition(1, 3, 2).unwrap();
        let o = make_random_oracle(2, 3, 0);
        let tight = SearchLimits { max_edges: 10, node_budget: 1 };
        assert!(matches!(brute_force_cover_check(&o, 8, &p, tight), Err(Error::Size(_))));
        let tiny = SearchLimits { max_edges: 1000, node_budget: 3 };
        assert!(matches!(brute_force_cover_check(&o, 8, &p, tiny), Err(Error::Budget { .. })));
        assert!(matches!(brute_force_cover_check(&o, 65, &p, SearchLimits::default()), Err(Error::Size(_))));
    }

    #[test]
    fn two_paths_need_distinct_colours() {
        // Graph 2-colouring of [4]: colour 1 on {1,2}, colour 2 elsewhere.
        let o = ColouringOracle::tabulate(2, 2, 4, |vs| if vs == [1, 2] { 1 } else { 2 }).unwrap();
        let p = Params::partition(2, 2, 2).unwrap();
        let res = brute_force_cover_check(&o, 4, &p, SearchLimits::default()).unwrap();
        assert!(res.coverable);
        let w = res.witness.unwrap();
        let colours: Vec<_> = w.iter().map(|p| p.colour).collect();
        assert!(colours.windows(2).all(|c| c[0] < c[1]));
    }
}
