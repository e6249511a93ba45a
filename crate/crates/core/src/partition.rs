//! Builds `s` monochromatic t-tight Berge-paths of different colours whose
//! cores partition a prefix `[n]`, for colourings with `s(k-t+1)` colours.
//!
//! Each path takes the vertices of one colour class in increasing order.
//! Between two consecutive class vertices it threads `t-2` or `t-1` fresh
//! vertices from the chain set of the later one, so every new window of `t`
//! core vertices has a witness edge that no other window uses.

use std::collections::HashSet;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{covered_prefix, verify_family, BergePath, Colour, Edge, Mode, Params, Vertex};
use crate::oracle::{ColouringOracle, ColouringSpec};
use crate::ramsey::{build_clique_chain, default_q_schedule, ColourBlocks, CliqueChain};

/// Colour classes over the anchored prefix of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColourClasses {
    /// Colour of each class; the colours of the selected block, ascending.
    pub colours: Vec<Colour>,
    /// Sorted members of each class.
    pub members: Vec<Vec<Vertex>>,
}

impl ColourClasses {
    pub fn class_of(&self, v: Vertex) -> Option<usize> {
        self.members.iter().position(|m| m.binary_search(&v).is_ok())
    }
}

/// Puts each anchor `v` into the class of `min(χ(v) ∩ C_{i*})`.
pub fn assign_colour_classes(chain: &CliqueChain, blocks: &ColourBlocks) -> Result<ColourClasses> {
    let id = chain.selected_block;
    if id == 0 || id > blocks.len() {
        return Err(Error::Invariant(format!("chain selected block {id} of {}", blocks.len())));
    }
    let colours = blocks.block(id).to_vec();
    let mask = blocks.mask(id);
    let mut members = vec![Vec::new(); colours.len()];
    for (i, &a) in chain.anchors.iter().enumerate() {
        let c = chain.witness_colours[i]
            .intersect(mask)
            .min()
            .ok_or_else(|| Error::Invariant(format!("anchor {a} has no colour in block {id}")))?;
        let slot = colours.binary_search(&c).expect("colour lies in its block");
        members[slot].push(a);
    }
    Ok(ColourClasses { colours, members })
}

/// What one call of [`extend_path`] did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub path: usize,
    pub anchor: Vertex,
    pub intermediates: Vec<Vertex>,
    pub probe: Vertex,
    /// Whether the probe joined the core.
    pub probe_used: bool,
    /// Core vertices appended, in order.
    pub appended: Vec<Vertex>,
    /// Witness edges added, in order.
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Extended(StepRecord),
    /// The path's class has no vertex left outside `X`.
    Exhausted,
}

/// Partial paths plus the used-vertex set `X` and used-edge set `Y`.
#[derive(Debug, Clone)]
pub struct BuilderState<'a> {
    pub params: Params,
    pub window: u32,
    pub chain: &'a CliqueChain,
    pub classes: ColourClasses,
    pub paths: Vec<BergePath>,
    used_vertices: Vec<bool>,
    used_edges: HashSet<Edge>,
    edge_vertices: Vec<bool>,
    cursors: Vec<usize>,
    pub steps: Vec<StepRecord>,
}

impl<'a> BuilderState<'a> {
    pub fn new(params: Params, window: u32, chain: &'a CliqueChain, classes: ColourClasses) -> Self {
        let paths = classes.colours.iter().map(|&c| BergePath { colour: c, core: Vec::new(), edges: Vec::new() }).collect();
        let n = classes.colours.len();
        BuilderState {
            params,
            window,
            chain,
            classes,
            paths,
            used_vertices: vec![false; window as usize + 1],
            used_edges: HashSet::new(),
            edge_vertices: vec![false; window as usize + 1],
            cursors: vec![0; n],
            steps: Vec::new(),
        }
    }

    /// Whether `v` lies in `X`.
    pub fn is_used(&self, v: Vertex) -> bool {
        self.used_vertices.get(v as usize).copied().unwrap_or(false)
    }

    /// Whether `v` lies in some edge of `Y`.
    pub fn in_used_edge(&self, v: Vertex) -> bool {
        self.edge_vertices.get(v as usize).copied().unwrap_or(false)
    }

    pub fn used_edges(&self) -> &HashSet<Edge> {
        &self.used_edges
    }

    fn mark_vertex(&mut self, v: Vertex) {
        self.used_vertices[v as usize] = true;
    }

    fn mark_edge(&mut self, e: Edge) {
        for &v in e.vertices() {
            self.edge_vertices[v as usize] = true;
        }
        self.used_edges.insert(e);
    }

    fn next_anchor(&mut self, i: usize) -> Option<Vertex> {
        let members = &self.classes.members[i];
        while self.cursors[i] < members.len() && self.is_used(members[self.cursors[i]]) {
            self.cursors[i] += 1;
        }
        members.get(self.cursors[i]).copied()
    }

    fn fresh_vertex(&self, set: &[Vertex], anchor: Vertex) -> Result<Vertex> {
        set.iter()
            .copied()
            .find(|&v| !self.is_used(v) && !self.in_used_edge(v))
            .ok_or_else(|| {
                Error::Inconclusive(format!("chain set of anchor {anchor} has no fresh vertex left in window {}", self.window))
            })
    }

    /// Smallest edge of colour `c` containing the window `f` and not in `Y`.
    fn witness(&self, oracle: &ColouringOracle, f: &[Vertex], c: Colour) -> Result<Edge> {
        let mut f = f.to_vec();
        f.sort_unstable();
        find_witness(oracle, self.window, &f, c, &self.used_edges)?.ok_or_else(|| {
            Error::Inconclusive(format!("no unused colour-{c} edge over {f:?} in window {}", self.window))
        })
    }

    /// Whether every vertex of `[n]` lies in `X`.
    pub fn covers(&self, n: u32) -> bool {
        (1..=n).all(|v| self.is_used(v))
    }
}

/// Smallest edge (lexicographically) of colour `c` in `[window]` that
/// contains the sorted set `f` and is not in `used`.
pub fn find_witness(
    oracle: &ColouringOracle,
    window: u32,
    f: &[Vertex],
    c: Colour,
    used: &HashSet<Edge>,
) -> Result<Option<Edge>> {
    let k = oracle.k() as usize;
    let extra = k - f.len();
    let others: Vec<Vertex> = (1..=window).filter(|v| f.binary_search(v).is_err()).collect();
    let mut found = None;
    let mut err = None;
    let mut buf = Vec::with_capacity(k);
    crate::combin::for_each_subset(&others, extra, |xs| {
        buf.clear();
        buf.extend_from_slice(f);
        buf.extend_from_slice(xs);
        buf.sort_unstable();
        match oracle.colour_of(&buf) {
            Ok(col) if col == c => {
                let e = Edge::new(buf.clone()).expect("sorted distinct");
                if used.contains(&e) {
                    true
                } else {
                    found = Some(e);
                    false
                }
            }
            Ok(_) => true,
            Err(e) => {
                err = Some(e);
                false
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

fn last_window(core: &[Vertex], tail: &[Vertex], t: usize) -> Option<Vec<Vertex>> {
    let total = core.len() + tail.len();
    if total < t {
        return None;
    }
    let from_core = t.saturating_sub(tail.len());
    let mut w = core[core.len() - from_core..].to_vec();
    w.extend_from_slice(&tail[tail.len() + from_core - t..]);
    Some(w)
}

/// One extension step of path `i`: `t-2` intermediates from the anchor's
/// chain set, then the anchor itself, with the probe vertex in between when
/// it needs its own witness edge.
pub fn extend_path(state: &mut BuilderState<'_>, i: usize, oracle: &ColouringOracle) -> Result<StepOutcome> {
    let t = state.params.t as usize;
    let Some(a) = state.next_anchor(i) else {
        return Ok(StepOutcome::Exhausted);
    };
    let chain = state.chain;
    let pool = chain
        .set_of(a)
        .ok_or_else(|| Error::Invariant(format!("vertex {a} is not a chain anchor")))?;
    let c = state.paths[i].colour;
    state.mark_vertex(a);

    let mut record = StepRecord {
        path: i,
        anchor: a,
        intermediates: Vec::new(),
        probe: 0,
        probe_used: false,
        appended: Vec::new(),
        edges: Vec::new(),
    };

    for _ in 0..t.saturating_sub(2) {
        let b = state.fresh_vertex(pool, a)?;
        state.mark_vertex(b);
        state.paths[i].core.push(b);
        record.intermediates.push(b);
        record.appended.push(b);
        if let Some(f) = last_window(&state.paths[i].core, &[], t) {
            let e = state.witness(oracle, &f, c)?;
            state.paths[i].edges.push(e.clone());
            record.edges.push(e.clone());
            state.mark_edge(e);
        }
    }

    let b = state.fresh_vertex(pool, a)?;
    record.probe = b;
    let core = &state.paths[i].core;
    let e1 = match last_window(core, &[b], t) {
        Some(f) => Some(state.witness(oracle, &f, c)?),
        None => None,
    };
    let f2 = last_window(core, &[b, a], t).expect("core holds at least t-2 vertices");
    let e2 = state.witness(oracle, &f2, c)?;

    let path = &mut state.paths[i];
    let new_edges = match e1 {
        Some(e1) if e1 == e2 => {
            path.core.push(a);
            path.edges.push(e1.clone());
            vec![e1]
        }
        e1 => {
            path.core.push(b);
            path.core.push(a);
            record.probe_used = true;
            record.appended.push(b);
            let mut v: Vec<Edge> = e1.into_iter().collect();
            v.push(e2);
            path.edges.extend(v.iter().cloned());
            v
        }
    };
    record.appended.push(a);
    if record.probe_used {
        state.mark_vertex(b);
    }
    for e in new_edges {
        record.edges.push(e.clone());
        state.mark_edge(e);
    }
    let n = record.appended.len();
    if n != t && n + 1 != t {
        return Err(Error::Invariant(format!("step appended {n} vertices with t = {t}")));
    }
    debug!("path {i} (colour {c}): anchor {a}, appended {:?}", record.appended);
    state.steps.push(record.clone());
    Ok(StepOutcome::Extended(record))
}

/// Knobs for [`cover_prefix`].
#[derive(Debug, Clone)]
pub struct CoverConfig {
    /// Starting window; `8nk` when unset.
    pub window: Option<u32>,
    /// Largest window tried before giving up.
    pub max_window: u32,
    /// Node budget per homogeneous-set search.
    pub budget: u64,
    /// Minimum chain set size per anchor; the default schedule when unset.
    pub q_schedule: Option<Vec<usize>>,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig { window: None, max_window: 1 << 14, budget: 1_000_000, q_schedule: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub steps: u64,
    pub window: u32,
    pub restarts: u32,
}

/// A path family together with everything needed to re-check it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub params: Params,
    pub colouring: ColouringSpec,
    pub covered_prefix: u32,
    pub paths: Vec<BergePath>,
    pub stats: Stats,
}

/// Result of one run at a fixed window.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub paths: Vec<BergePath>,
    pub steps: Vec<StepRecord>,
    pub chain: CliqueChain,
    pub classes: ColourClasses,
}

/// Builds the chain and classes over `[window]` and extends the paths round
/// robin until `[n]` is covered.
pub fn build_at_window(
    oracle: &ColouringOracle,
    params: &Params,
    n: u32,
    window: u32,
    config: &CoverConfig,
) -> Result<Attempt> {
    let blocks = ColourBlocks::default_for(params)?;
    let schedule = config.q_schedule.clone().unwrap_or_else(|| default_q_schedule(params.t, n));
    if schedule.len() < n as usize {
        return Err(Error::Param(format!("q schedule covers {} anchors, prefix is {n}", schedule.len())));
    }
    let chain = build_clique_chain(oracle, window, params, &blocks, &schedule, config.budget)?;
    let classes = assign_colour_classes(&chain, &blocks)?;
    let mut state = BuilderState::new(*params, window, &chain, classes.clone());
    let count = state.paths.len();
    let mut done = vec![false; count];
    while !state.covers(n) && done.iter().any(|d| !d) {
        for (i, finished) in done.iter_mut().enumerate() {
            if *finished {
                continue;
            }
            if let StepOutcome::Exhausted = extend_path(&mut state, i, oracle)? {
                *finished = true;
            }
        }
    }
    if !state.covers(n) {
        return Err(Error::Invariant(format!("classes exhausted before [{n}] was covered")));
    }
    let paths = state.paths.into_iter().filter(|p| !p.core.is_empty()).collect();
    Ok(Attempt { paths, steps: state.steps, chain, classes })
}

/// Covers `[n]` by at most `s` monochromatic t-tight Berge-paths of
/// different colours, growing the window on inconclusive attempts. The
/// returned certificate has been checked with [`verify_family`].
pub fn cover_prefix(oracle: &ColouringOracle, params: &Params, n: u32, config: &CoverConfig) -> Result<Certificate> {
    if n < 1 {
        return Err(Error::Param("prefix must be at least 1".into()));
    }
    if params.mode() != Mode::Partition {
        return Err(Error::Param(format!("partition needs r = s(k-t+1) colours, got r = {}", params.r)));
    }
    if oracle.k() != params.k || oracle.r() != params.r {
        return Err(Error::Param(format!(
            "colouring is {}-uniform with {} colours, params need k = {}, r = {}",
            oracle.k(),
            oracle.r(),
            params.k,
            params.r
        )));
    }
    let mut max_window = config.max_window;
    if let Some(hint) = oracle.window_hint() {
        max_window = max_window.min(hint);
    }
    let default_window = 8u64 * u64::from(n) * u64::from(params.k);
    let mut window = config.window.map_or(default_window, u64::from).min(u64::from(max_window)) as u32;
    if window < n + params.k {
        return Err(Error::Param(format!("window {window} is too small for prefix {n}")));
    }
    let mut restarts = 0;
    loop {
        info!("building over window {window}");
        match build_at_window(oracle, params, n, window, config) {
            Ok(attempt) => {
                let covered = covered_prefix(&attempt.paths);
                let report = verify_family(&attempt.paths, covered, params, oracle);
                if !report.ok {
                    return Err(Error::Invariant(format!("builder output failed verification: {:?}", report.violations)));
                }
                return Ok(Certificate {
                    params: *params,
                    colouring: oracle.spec(),
                    covered_prefix: covered,
                    paths: attempt.paths,
                    stats: Stats { steps: attempt.steps.len() as u64, window, restarts },
                });
            }
            Err(Error::Inconclusive(msg)) => {
                if window >= max_window {
                    return Err(Error::WindowExhausted { max_window, last: msg });
                }
                info!("window {window} inconclusive: {msg}");
                window = window.saturating_mul(2).min(max_window);
                restarts += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::verify_berge_path;
    use crate::oracle::make_random_oracle;
    use crate::ramsey::ColourSet;

    fn chain_with(chi: Vec<ColourSet>, block: usize) -> CliqueChain {
        let n = chi.len() as u32;
        CliqueChain {
            arity: 1,
            window: n + 4,
            anchors: (1..=n).collect(),
            sets: (1..=n).map(|a| (a + 1..=n + 4).collect()).collect(),
            witness_colours: chi,
            history: vec![vec![block]; n as usize],
            selected_block: block,
        }
    }

    #[test]
    fn classes_use_smallest_colour_in_block() {
        let p = Params::partition(2, 4, 3).unwrap();
        let blocks = ColourBlocks::default_for(&p).unwrap();
        let chain = chain_with(
            vec![ColourSet::from_colours(&[3, 4]), ColourSet::from_colours(&[1, 4]), ColourSet::singleton(4)],
            2,
        );
        let classes = assign_colour_classes(&chain, &blocks).unwrap();
        assert_eq!(classes.colours, vec![3, 4]);
        assert_eq!(classes.members, vec![vec![1], vec![2, 3]]);
        assert_eq!(classes.class_of(3), Some(1));
    }

    #[test]
    fn classes_reject_missing_block_colour() {
        let p = Params::partition(1, 3, 2).unwrap();
        let blocks = ColourBlocks::default_for(&p).unwrap();
        let chain = chain_with(vec![ColourSet::singleton(1), ColourSet::singleton(2)], 1);
        assert!(matches!(assign_colour_classes(&chain, &blocks), Err(Error::Invariant(_))));
    }

    #[test]
    fn graph_case_one_colour_by_hand() {
        // k = t = 2, one colour, anchors 1..=4, window 8.
        let p = Params::partition(1, 2, 2).unwrap();
        let o = make_random_oracle(1, 2, 0);
        let chain = chain_with(vec![ColourSet::singleton(1); 4], 1);
        let blocks = ColourBlocks::default_for(&p).unwrap();
        let classes = assign_colour_classes(&chain, &blocks).unwrap();
        let mut state = BuilderState::new(p, 8, &chain, classes);
        let StepOutcome::Extended(r) = extend_path(&mut state, 0, &o).unwrap() else { panic!() };
        assert_eq!(r.anchor, 1);
        assert!(r.intermediates.is_empty());
        assert_eq!(r.appended, vec![2, 1]);
        assert_eq!(r.edges, vec![Edge::new(vec![1, 2]).unwrap()]);
        // 2 is used, so 3 is the next anchor and 4 the probe. With k = t
        // the two probe windows are different edges, so the probe stays.
        let StepOutcome::Extended(r) = extend_path(&mut state, 0, &o).unwrap() else { panic!() };
        assert_eq!(r.anchor, 3);
        assert_eq!(r.appended, vec![4, 3]);
        assert!(r.probe_used);
        assert_eq!(state.paths[0].core, vec![2, 1, 4, 3]);
        assert!(verify_berge_path(&state.paths[0], &p, Some(&o)).ok);
        assert_eq!(extend_path(&mut state, 0, &o).unwrap(), StepOutcome::Exhausted);
        assert_eq!(state.paths[0].core.len(), 4);
    }

    #[test]
    fn probe_dropped_when_one_edge_serves_both() {
        // k = 3, t = 2; only {1,2,4} has colour 2.
        let p = Params::partition(1, 3, 2).unwrap();
        let o = ColouringOracle::tabulate(3, 2, 8, |vs| if vs == [1, 2, 4] { 2 } else { 1 }).unwrap();
        let chain = chain_with(vec![ColourSet::singleton(1); 4], 1);
        let blocks = ColourBlocks::default_for(&p).unwrap();
        let classes = assign_colour_classes(&chain, &blocks).unwrap();
        let mut state = BuilderState::new(p, 8, &chain, classes);
        let StepOutcome::Extended(r) = extend_path(&mut state, 0, &o).unwrap() else { panic!() };
        assert_eq!(r.appended, vec![2, 1]);
        assert_eq!(r.edges, vec![Edge::new(vec![1, 2, 3]).unwrap()]);
        let StepOutcome::Extended(r) = extend_path(&mut state, 0, &o).unwrap() else { panic!() };
        assert_eq!((r.anchor, r.probe), (3, 4));
        assert!(!r.probe_used);
        assert_eq!(r.appended, vec![3]);
        assert_eq!(r.edges, vec![Edge::new(vec![1, 3, 4]).unwrap()]);
        assert!(!state.is_used(4));
        assert!(verify_berge_path(&state.paths[0], &p, Some(&o)).ok);
    }

    #[test]
    fn one_colour_tight_cover() {
        let p = Params::partition(1, 3, 3).unwrap();
        let o = make_random_oracle(1, 3, 0);
        let cert = cover_prefix(&o, &p, 12, &CoverConfig::default()).unwrap();
        assert_eq!(cert.paths.len(), 1);
        assert!(cert.covered_prefix >= 12);
        assert!(verify_family(&cert.paths, 12, &p, &o).ok);
    }

    #[test]
    fn random_two_colours_graph_like() {
        let p = Params::partition(1, 3, 2).unwrap();
        let o = make_random_oracle(2, 3, 11);
        let cert = cover_prefix(&o, &p, 20, &CoverConfig::default()).unwrap();
        assert!(verify_family(&cert.paths, 20, &p, &o).ok);
        assert_eq!(cert.stats.window, 8 * 20 * 3);
    }

    #[test]
    fn rejects_adversary_mode() {
        let p = Params::adversary(1, 3, 2).unwrap();
        let o = make_random_oracle(3, 3, 0);
        assert!(matches!(cover_prefix(&o, &p, 5, &CoverConfig::default()), Err(Error::Param(_))));
    }

    #[test]
    fn window_cap_reported() {
        let p = Params::partition(1, 3, 3).unwrap();
        let o = make_random_oracle(1, 3, 0);
        let config = CoverConfig { window: Some(20), max_window: 20, ..CoverConfig::default() };
        let err = cover_prefix(&o, &p, 15, &config).unwrap_err();
        assert!(matches!(err, Error::WindowExhausted { max_window: 20, .. }), "{err}");
    }

    #[test]
    fn windows_inside_last_window() {
        assert_eq!(last_window(&[1, 2, 3], &[9], 3), Some(vec![2, 3, 9]));
        assert_eq!(last_window(&[1], &[8, 9], 3), Some(vec![1, 8, 9]));
        assert_eq!(last_window(&[], &[8, 9], 3), None);
        assert_eq!(last_window(&[4, 5], &[8, 9], 2), Some(vec![8, 9]));
    }
}
