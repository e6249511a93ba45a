//! The block colouring with `s(k-t+1)+1` colours that no `s` monochromatic
//! t-tight Berge-paths can cover, plus the structural checks behind it and an
//! exhaustive cover search for small windows.

mod cover;
mod layout;

pub use cover::{brute_force_cover_check, CoverSearchResult, SearchLimits};
pub use layout::{default_block_sizes, default_layout, lex_subsets, BlockLayout};

use serde::Serialize;

use crate::combin::for_each_subset;
use crate::error::{Error, Result};
use crate::hypergraph::{BergePath, Colour, Edge, Vertex, VerifyReport};

/// Colour of `e` under the layout's rule.
pub fn adversary_colour(layout: &BlockLayout, e: &Edge) -> Result<Colour> {
    if e.len() != layout.k as usize {
        return Err(Error::Param(format!("edge {e} is not a {}-edge", layout.k)));
    }
    Ok(layout.colour_of(e.vertices()))
}

/// Every edge in `[window]` that meets `B_C` and has a colour in `C` must
/// have at least `k - t + 1` vertices in the blocks before `B_C`.
pub fn check_eq1(layout: &BlockLayout, c: &[Colour], window: u32) -> VerifyReport {
    check_eq1_with(layout, c, window, |vs| layout.colour_of(vs))
}

/// [`check_eq1`] against an arbitrary colour rule on the same blocks.
pub fn check_eq1_with(
    layout: &BlockLayout,
    c: &[Colour],
    window: u32,
    colour: impl Fn(&[Vertex]) -> Colour,
) -> VerifyReport {
    let mut report = VerifyReport::new();
    let Some(ci) = layout.index_of(c) else {
        report.push("block", format!("{c:?} is not an {}-subset of [{}]", layout.s, layout.r), vec![]);
        return report;
    };
    let c_mask = c.iter().fold(0u64, |m, &x| m | 1 << (x - 1));
    let need = (layout.k - layout.t + 1) as usize;
    let all: Vec<Vertex> = (1..=window).collect();
    for_each_subset(&all, layout.k as usize, |vs| {
        let mut meets = false;
        let mut earlier = 0usize;
        for &v in vs {
            let b = layout.block_index(v);
            meets |= b == ci;
            earlier += usize::from(b < ci);
        }
        if meets && earlier < need {
            let col = colour(vs);
            if c_mask >> (col - 1) & 1 == 1 {
                report.push(
                    "eq1",
                    format!("edge {vs:?} has colour {col} in C but only {earlier} vertices before B_C"),
                    vs.iter().map(|&v| v as usize).collect(),
                );
            }
        }
        true
    });
    report
}

/// Per-path counts behind the covering bound for one block `C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathCounts {
    pub colour: Colour,
    /// Windows of `t` consecutive core vertices meeting `B_C`.
    pub f_count: u64,
    /// Vertices in the blocks before `B_C`.
    pub earlier: u64,
    pub eq2_bound: u64,
    pub eq2_holds: bool,
    /// Core vertices inside `B_C`.
    pub in_block: u64,
    pub eq3_bound: u64,
    pub eq3_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    pub block: Vec<Colour>,
    pub paths: Vec<PathCounts>,
    pub ok: bool,
}

/// Computes `|F_i|`, `|X_i ∩ B_C|` and both bounds for each path. Every path
/// must be monochromatic under the layout in a colour from `C`.
pub fn counting_diagnostics(layout: &BlockLayout, paths: &[BergePath], c: &[Colour]) -> Result<CountingReport> {
    let ci = layout
        .index_of(c)
        .ok_or_else(|| Error::Param(format!("{c:?} is not an {}-subset of [{}]", layout.s, layout.r)))?;
    let t = layout.t as usize;
    let earlier = layout.before(ci);
    let mut out = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        if !c.contains(&p.colour) {
            return Err(Error::Precondition(format!("path {i} has colour {} outside C = {c:?}", p.colour)));
        }
        for e in &p.edges {
            let col = adversary_colour(layout, e)?;
            if col != p.colour {
                return Err(Error::Precondition(format!(
                    "path {i}: edge {e} has colour {col}, path colour is {}",
                    p.colour
                )));
            }
        }
        let in_c = |v: &Vertex| layout.block_index(*v) == ci;
        let f_count = p.core.windows(t).filter(|w| w.iter().any(in_c)).count() as u64;
        let in_block = p.core.iter().filter(|v| in_c(v)).count() as u64;
        let eq2_bound = layout.t as u64 * earlier;
        let eq3_bound = f_count + layout.t as u64 - 1;
        out.push(PathCounts {
            colour: p.colour,
            f_count,
            earlier,
            eq2_bound,
            eq2_holds: f_count <= eq2_bound,
            in_block,
            eq3_bound,
            eq3_holds: in_block <= eq3_bound,
        });
    }
    let ok = out.iter().all(|p| p.eq2_holds && p.eq3_holds);
    Ok(CountingReport { block: c.to_vec(), paths: out, ok })
}
