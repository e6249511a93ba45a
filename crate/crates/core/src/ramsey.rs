//! Finite-window surrogates for the infinite Ramsey machinery: induced
//! multi-colourings of an anchor's link, homogeneous-set search,
//! maximally-monochromatic selection and nested clique-chains.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use log::debug;
use serde::{Serialize, Serializer};

use crate::combin::{for_each_subset, next_combination};
use crate::error::{Error, Result};
use crate::hypergraph::{Colour, Params, Vertex};
use crate::oracle::ColouringOracle;

/// A subset of `[r]` as a bitmask; colour `c` is bit `c - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ColourSet(u64);

impl ColourSet {
    pub const EMPTY: ColourSet = ColourSet(0);

    pub fn full(r: u32) -> Self {
        debug_assert!((1..=64).contains(&r));
        ColourSet(u64::MAX >> (64 - r))
    }

    pub fn singleton(c: Colour) -> Self {
        ColourSet(1 << (c - 1))
    }

    pub fn from_colours(cs: &[Colour]) -> Self {
        ColourSet(cs.iter().fold(0, |m, &c| m | 1 << (c - 1)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, c: Colour) -> bool {
        (1..=64).contains(&c) && self.0 >> (c - 1) & 1 == 1
    }

    pub fn insert(&mut self, c: Colour) {
        self.0 |= 1 << (c - 1);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn intersect(self, other: ColourSet) -> ColourSet {
        ColourSet(self.0 & other.0)
    }

    pub fn union(self, other: ColourSet) -> ColourSet {
        ColourSet(self.0 | other.0)
    }

    pub fn is_superset(self, other: ColourSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn min(self) -> Option<Colour> {
        (self.0 != 0).then(|| self.0.trailing_zeros() + 1)
    }

    pub fn colours(self) -> Vec<Colour> {
        (0..64).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }
}

impl fmt::Debug for ColourSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.colours())
    }
}

impl Serialize for ColourSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.colours().serialize(s)
    }
}

/// A partition of `[r]` into `k - t + 1` blocks of `s` colours. Blocks are
/// numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColourBlocks {
    blocks: Vec<Vec<Colour>>,
    masks: Vec<ColourSet>,
}

impl ColourBlocks {
    pub fn new(blocks: Vec<Vec<Colour>>, params: &Params) -> Result<Self> {
        let want = params.slack() as usize;
        if blocks.len() != want {
            return Err(Error::Param(format!("{} colour blocks given, k-t+1 = {want} required", blocks.len())));
        }
        let mut seen = ColourSet::EMPTY;
        let mut masks = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != params.s as usize {
                return Err(Error::Param(format!("block {} has {} colours, s = {}", i + 1, b.len(), params.s)));
            }
            let m = ColourSet::from_colours(b);
            if b.iter().any(|&c| c < 1 || c > params.r) || m.len() as usize != b.len() || !seen.intersect(m).is_empty() {
                return Err(Error::Param(format!("block {} = {b:?} overlaps or leaves [r]", i + 1)));
            }
            seen = seen.union(m);
            masks.push(m);
        }
        let mut blocks = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        Ok(ColourBlocks { blocks, masks })
    }

    /// `C_i = {(i-1)s + 1, ..., is}`.
    pub fn default_for(params: &Params) -> Result<Self> {
        if params.r != params.s * params.slack() {
            return Err(Error::Param(format!("colour blocks need r = s(k-t+1), got r = {}", params.r)));
        }
        let s = params.s;
        let blocks = (0..params.slack()).map(|i| (i * s + 1..=(i + 1) * s).collect()).collect();
        Self::new(blocks, params)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Colours of block `id` (1-based), ascending.
    pub fn block(&self, id: usize) -> &[Colour] {
        &self.blocks[id - 1]
    }

    pub fn mask(&self, id: usize) -> ColourSet {
        self.masks[id - 1]
    }

    pub fn ids(&self) -> Vec<usize> {
        (1..=self.blocks.len()).collect()
    }

    /// Block ids in `among` whose colours meet `set`.
    pub fn hits(&self, set: ColourSet, among: &[usize]) -> Vec<usize> {
        among.iter().copied().filter(|&b| !self.mask(b).intersect(set).is_empty()).collect()
    }
}

/// Colours of every edge in `[window]` containing `{anchor} ∪ f`.
pub fn induced_multicolouring(
    oracle: &ColouringOracle,
    window: u32,
    anchor: Vertex,
    f: &[Vertex],
) -> Result<ColourSet> {
    let labels = LinkLabels::new(oracle, window, anchor, f.len())?;
    let mut sorted = f.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Param(format!("{f:?} repeats a vertex")));
    }
    labels.compute(&sorted)
}

/// Labels `(t-1)`-sets (or any fixed arity `j < k`) of an anchor's link by
/// their induced colour sets over a finite window.
pub struct LinkLabels<'a> {
    oracle: &'a ColouringOracle,
    window: u32,
    anchor: Vertex,
    arity: usize,
    full: ColourSet,
    cache: HashMap<Vec<Vertex>, ColourSet>,
}

impl<'a> LinkLabels<'a> {
    pub fn new(oracle: &'a ColouringOracle, window: u32, anchor: Vertex, arity: usize) -> Result<Self> {
        let k = oracle.k() as usize;
        if arity >= k {
            return Err(Error::Param(format!("label arity {arity} must be below k = {k}")));
        }
        if (window as usize) < k {
            return Err(Error::Param(format!("window {window} cannot host a {k}-edge")));
        }
        if anchor < 1 || anchor > window {
            return Err(Error::OutOfWindow(format!("anchor {anchor} outside [{window}]")));
        }
        Ok(LinkLabels {
            oracle,
            window,
            anchor,
            arity,
            full: ColourSet::full(oracle.r()),
            cache: HashMap::new(),
        })
    }

    pub fn anchor(&self) -> Vertex {
        self.anchor
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Label of a sorted `arity`-set, memoised.
    pub fn label(&mut self, f: &[Vertex]) -> Result<ColourSet> {
        if let Some(&c) = self.cache.get(f) {
            return Ok(c);
        }
        let c = self.compute(f)?;
        self.cache.insert(f.to_vec(), c);
        Ok(c)
    }

    /// Label of a sorted `arity`-set without touching the memo table.
    pub fn compute(&self, f: &[Vertex]) -> Result<ColourSet> {
        if f.len() != self.arity {
            return Err(Error::Param(format!("label set {f:?} does not have {} vertices", self.arity)));
        }
        if f.contains(&self.anchor) {
            return Err(Error::Param(format!("anchor {} lies in {f:?}", self.anchor)));
        }
        if let Some(&m) = f.iter().max() {
            if m > self.window || f.contains(&0) {
                return Err(Error::OutOfWindow(format!("{f:?} outside [{}]", self.window)));
            }
        }
        let k = self.oracle.k() as usize;
        let mut fixed: Vec<Vertex> = Vec::with_capacity(self.arity + 1);
        fixed.extend_from_slice(f);
        fixed.push(self.anchor);
        fixed.sort_unstable();
        let extra = k - fixed.len();
        let free = self.window as usize - fixed.len();
        let mut edge = vec![0; k];
        let mut acc = ColourSet::EMPTY;
        if extra == 0 {
            return Ok(ColourSet::singleton(self.oracle.colour_of(&fixed)?));
        }
        let mut idx: Vec<usize> = (0..extra).collect();
        loop {
            // Map ranks among the free vertices to vertex ids.
            for (slot, &rank) in edge.iter_mut().zip(idx.iter()) {
                let mut v = rank as Vertex + 1;
                for &x in &fixed {
                    if x <= v {
                        v += 1;
                    }
                }
                *slot = v;
            }
            edge[extra..].copy_from_slice(&fixed);
            edge.sort_unstable();
            acc.insert(self.oracle.colour_of(&edge)?);
            if acc == self.full || !next_combination(&mut idx, free) {
                return Ok(acc);
            }
        }
    }
}

/// Outcome of a homogeneous-set search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Homogeneous {
    Found(Vec<Vertex>),
    Absent,
    /// Node budget ran out before the search space was exhausted.
    Inconclusive { nodes: u64 },
}

/// Lexicographically least `q`-subset `S` of `pool` whose every
/// `arity`-subset `f` satisfies `admissible(f)`; `f` is passed sorted.
///
/// Depth-first extension by smallest admissible vertex with chronological
/// backtracking; complete below the node budget.
pub fn search_homogeneous(
    pool: &[Vertex],
    q: usize,
    arity: usize,
    budget: u64,
    mut admissible: impl FnMut(&[Vertex]) -> Result<bool>,
) -> Result<Homogeneous> {
    let mut pool = pool.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if q > pool.len() {
        return Ok(Homogeneous::Absent);
    }
    let mut chosen = Vec::with_capacity(q);
    let mut nodes = 0u64;
    let mut f = Vec::with_capacity(arity);
    match dfs(&pool, 0, q, arity, budget, &mut nodes, &mut chosen, &mut f, &mut admissible)? {
        Some(true) => Ok(Homogeneous::Found(chosen)),
        Some(false) => Ok(Homogeneous::Absent),
        None => Ok(Homogeneous::Inconclusive { nodes }),
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    pool: &[Vertex],
    start: usize,
    q: usize,
    arity: usize,
    budget: u64,
    nodes: &mut u64,
    chosen: &mut Vec<Vertex>,
    f: &mut Vec<Vertex>,
    admissible: &mut impl FnMut(&[Vertex]) -> Result<bool>,
) -> Result<Option<bool>> {
    if chosen.len() == q {
        return Ok(Some(true));
    }
    for i in start..pool.len() {
        if pool.len() - i < q - chosen.len() {
            break;
        }
        *nodes += 1;
        if *nodes > budget {
            return Ok(None);
        }
        let v = pool[i];
        let ok = if arity == 0 || chosen.len() + 1 < arity {
            true
        } else {
            let mut err = None;
            let ok = for_each_subset(chosen, arity - 1, |sub| {
                f.clear();
                f.extend_from_slice(sub);
                f.push(v);
                match admissible(f) {
                    Ok(b) => b,
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            ok
        };
        if ok {
            chosen.push(v);
            match dfs(pool, i + 1, q, arity, budget, nodes, chosen, f, admissible)? {
                Some(true) => return Ok(Some(true)),
                None => return Ok(None),
                Some(false) => {}
            }
            chosen.pop();
        }
    }
    Ok(Some(false))
}

/// Lexicographically least `q`-subset of `pool` all of whose `arity`-subsets
/// carry colour `c`. `labels` must be total on the `arity`-subsets of `pool`
/// (keys sorted).
pub fn find_homogeneous_set(
    labels: &HashMap<Vec<Vertex>, ColourSet>,
    pool: &[Vertex],
    c: Colour,
    q: usize,
    arity: usize,
    budget: u64,
) -> Result<Homogeneous> {
    search_homogeneous(pool, q, arity, budget, |f| {
        labels
            .get(f)
            .map(|l| l.contains(c))
            .ok_or_else(|| Error::Precondition(format!("no label for {f:?}")))
    })
}

/// Intersection of the labels over all `arity`-subsets of `set`.
fn common_colours(labels: &mut LinkLabels<'_>, set: &[Vertex]) -> Result<ColourSet> {
    let mut acc = labels.full;
    let mut err = None;
    for_each_subset(set, labels.arity, |f| match labels.label(f) {
        Ok(l) => {
            acc = acc.intersect(l);
            !acc.is_empty()
        }
        Err(e) => {
            err = Some(e);
            false
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// A homogeneous set picked for one anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub set: Vec<Vertex>,
    /// Colours shared by every label on the set.
    pub psi: ColourSet,
    /// Block ids from `D` that `psi` meets.
    pub achieved: Vec<usize>,
}

/// Requirement sets tried by the selector: every transversal of a non-empty
/// subfamily of the blocks in `d` (one colour per chosen block), followed by
/// every remaining single colour.
fn requirement_sets(blocks: &ColourBlocks, d: &[usize], r: u32) -> Vec<ColourSet> {
    let mut out: Vec<ColourSet> = vec![ColourSet::EMPTY];
    let product: usize = d.iter().map(|&b| blocks.block(b).len() + 1).product();
    if product <= 4096 {
        for &b in d {
            let mut next = Vec::with_capacity(out.len() * (blocks.block(b).len() + 1));
            for &partial in &out {
                next.push(partial);
                for &c in blocks.block(b) {
                    let mut x = partial;
                    x.insert(c);
                    next.push(x);
                }
            }
            out = next;
        }
    }
    out.retain(|s| !s.is_empty());
    for c in 1..=r {
        let single = ColourSet::singleton(c);
        if !out.contains(&single) {
            out.push(single);
        }
    }
    out
}

/// Picks a `q`-subset of `pool` homogeneous under the anchor's labels that
/// meets as many blocks of `d` as the candidate searches allow. Ties go to the
/// lexicographically least set, then the smallest shared colour.
pub fn select_max_mono_clique(
    labels: &mut LinkLabels<'_>,
    pool: &[Vertex],
    blocks: &ColourBlocks,
    d: &[usize],
    q: usize,
    budget: u64,
) -> Result<Selection> {
    if pool.contains(&labels.anchor) {
        return Err(Error::Param(format!("pool contains the anchor {}", labels.anchor)));
    }
    if pool.len() < q {
        return Err(Error::Inconclusive(format!(
            "anchor {}: pool of {} vertices is smaller than q = {q}",
            labels.anchor,
            pool.len()
        )));
    }
    let arity = labels.arity;
    let mut best: Option<(usize, Vec<Vertex>, Colour, ColourSet)> = None;
    let mut hit_budget = false;
    let r = labels.oracle.r();
    for required in requirement_sets(blocks, d, r) {
        let outcome = search_homogeneous(pool, q, arity, budget, |f| Ok(labels.label(f)?.is_superset(required)))?;
        let set = match outcome {
            Homogeneous::Found(set) => set,
            Homogeneous::Absent => continue,
            Homogeneous::Inconclusive { nodes } => {
                debug!("anchor {}: search for {required:?} gave up after {nodes} nodes", labels.anchor);
                hit_budget = true;
                continue;
            }
        };
        let psi = common_colours(labels, &set)?;
        let score = blocks.hits(psi, d).len();
        let min_colour = psi.min().expect("homogeneous sets share a colour");
        let better = match &best {
            None => true,
            Some((bs, bset, bc, _)) => {
                score > *bs || (score == *bs && (set < *bset || (set == *bset && min_colour < *bc)))
            }
        };
        if better {
            best = Some((score, set, min_colour, psi));
        }
    }
    match best {
        Some((_, set, _, psi)) => Ok(Selection { achieved: blocks.hits(psi, d), set, psi }),
        None => Err(Error::Inconclusive(format!(
            "anchor {}: no homogeneous {q}-set in a pool of {}{}",
            labels.anchor,
            pool.len(),
            if hit_budget { " within the node budget" } else { "" }
        ))),
    }
}

/// Greedily adds pool vertices (ascending) while every label on the set still
/// contains `keep`.
fn saturate(labels: &LinkLabels<'_>, pool: &[Vertex], core: Vec<Vertex>, keep: ColourSet) -> Result<Vec<Vertex>> {
    let arity = labels.arity;
    let mut set = core;
    set.sort_unstable();
    let mut f = Vec::with_capacity(arity);
    for &v in pool {
        if set.binary_search(&v).is_ok() {
            continue;
        }
        let mut err = None;
        let ok = arity == 0
            || for_each_subset(&set, arity - 1, |sub| {
                f.clear();
                f.extend_from_slice(sub);
                f.push(v);
                f.sort_unstable();
                match labels.compute(&f) {
                    Ok(l) => l.is_superset(keep),
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                }
            });
        if let Some(e) = err {
            return Err(e);
        }
        if ok {
            let pos = set.binary_search(&v).unwrap_err();
            set.insert(pos, v);
        }
    }
    Ok(set)
}

/// Per-anchor diagnostics record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnchorRecord {
    pub anchor: Vertex,
    pub set_size: usize,
    pub chi: ColourSet,
    #[serde(rename = "D")]
    pub d: Vec<usize>,
}

/// Nested homogeneous sets `V(K_1) ⊇ V(K_2) ⊇ ...`, one per anchor `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueChain {
    pub arity: usize,
    pub window: u32,
    pub anchors: Vec<Vertex>,
    /// Sorted vertex set per anchor.
    pub sets: Vec<Vec<Vertex>>,
    pub witness_colours: Vec<ColourSet>,
    /// Surviving block ids after each anchor.
    pub history: Vec<Vec<usize>>,
    /// Block id hit by every anchor's colour set.
    pub selected_block: usize,
}

impl CliqueChain {
    pub fn set_of(&self, anchor: Vertex) -> Option<&[Vertex]> {
        self.anchors.binary_search(&anchor).ok().map(|i| self.sets[i].as_slice())
    }

    pub fn chi(&self, anchor: Vertex) -> Option<ColourSet> {
        self.anchors.binary_search(&anchor).ok().map(|i| self.witness_colours[i])
    }

    pub fn records(&self) -> Vec<AnchorRecord> {
        (0..self.anchors.len())
            .map(|i| AnchorRecord {
                anchor: self.anchors[i],
                set_size: self.sets[i].len(),
                chi: self.witness_colours[i],
                d: self.history[i].clone(),
            })
            .collect()
    }
}

/// Minimum set size per anchor `1..=n`: `q_a = (t+2)(n-a+1) + t`.
pub fn default_q_schedule(t: u32, n: u32) -> Vec<usize> {
    (1..=n).map(|a| ((t + 2) * (n - a + 1) + t) as usize).collect()
}

/// Builds the chain for anchors `1..=q_schedule.len()` over `[window]`.
///
/// Each anchor's set is chosen by [`select_max_mono_clique`] against the
/// blocks still alive, then saturated with every further pool vertex that
/// keeps its colour set. Fails as inconclusive when a pool runs dry or no
/// block survives.
pub fn build_clique_chain(
    oracle: &ColouringOracle,
    window: u32,
    params: &Params,
    blocks: &ColourBlocks,
    q_schedule: &[usize],
    budget: u64,
) -> Result<CliqueChain> {
    let arity = (params.t - 1) as usize;
    if q_schedule.is_empty() {
        return Err(Error::Param("empty q schedule".into()));
    }
    if q_schedule.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Param("q schedule must be non-increasing".into()));
    }
    if *q_schedule.last().expect("non-empty") < arity {
        return Err(Error::Param(format!("final q must be at least t-1 = {arity}")));
    }
    let mut chain = CliqueChain {
        arity,
        window,
        anchors: Vec::new(),
        sets: Vec::new(),
        witness_colours: Vec::new(),
        history: Vec::new(),
        selected_block: 0,
    };
    let mut d = blocks.ids();
    let mut pool: Vec<Vertex> = (2..=window).collect();
    for (i, &q) in q_schedule.iter().enumerate() {
        let anchor = i as Vertex + 1;
        if anchor > window {
            return Err(Error::Inconclusive(format!("anchor {anchor} beyond window {window}")));
        }
        pool.retain(|&v| v != anchor);
        let mut labels = LinkLabels::new(oracle, window, anchor, arity)?;
        let sel = select_max_mono_clique(&mut labels, &pool, blocks, &d, q, budget).map_err(|e| match e {
            Error::Inconclusive(msg) => {
                Error::Inconclusive(format!("{msg}; surviving blocks {d:?} after {} anchors", chain.anchors.len()))
            }
            other => other,
        })?;
        d = sel.achieved.clone();
        if d.is_empty() {
            return Err(Error::Inconclusive(format!(
                "no colour block survives anchor {anchor}; history {:?}",
                chain.history
            )));
        }
        let set = saturate(&labels, &pool, sel.set, sel.psi)?;
        debug!("anchor {anchor}: |K| = {}, chi = {:?}, D = {d:?}", set.len(), sel.psi);
        chain.anchors.push(anchor);
        chain.witness_colours.push(sel.psi);
        chain.history.push(d.clone());
        pool = set.clone();
        chain.sets.push(set);
    }
    chain.selected_block = d[0];
    Ok(chain)
}

/// Recomputes each anchor's shared colour set from scratch.
pub fn clique_colouring(
    chain: &CliqueChain,
    oracle: &ColouringOracle,
    window: u32,
) -> Result<BTreeMap<Vertex, ColourSet>> {
    let mut out = BTreeMap::new();
    for (i, &a) in chain.anchors.iter().enumerate() {
        let mut acc = ColourSet::full(oracle.r());
        let mut err = None;
        for_each_subset(&chain.sets[i], chain.arity, |f| match induced_multicolouring(oracle, window, a, f) {
            Ok(l) => {
                acc = acc.intersect(l);
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
        out.insert(a, acc);
    }
    Ok(out)
}
