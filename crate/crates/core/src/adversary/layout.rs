use serde::Serialize;

use crate::combin::{binomial, next_combination};
use crate::error::{Error, Result};
use crate::hypergraph::{Colour, Params, Vertex, VerifyReport};

/// All `s`-subsets of `[r]`, each sorted, in lexicographic order.
pub fn lex_subsets(r: u32, s: u32) -> Result<Vec<Vec<Colour>>> {
    if s < 1 || s > r {
        return Err(Error::Param(format!("need 1 <= s <= r, got s={s}, r={r}")));
    }
    let mut idx: Vec<usize> = (0..s as usize).collect();
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| i as Colour + 1).collect());
        if !next_combination(&mut idx, r as usize) {
            return Ok(out);
        }
    }
}

/// Partition of the vertex line into consecutive blocks `B_I`, one per
/// `s`-subset `I` of `[r]` in lexicographic order. The final block is
/// unbounded; `window` only records how far it has been realised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockLayout {
    pub s: u32,
    pub k: u32,
    pub t: u32,
    pub r: u32,
    order: Vec<Vec<Colour>>,
    masks: Vec<u64>,
    sizes: Vec<u64>,
    /// `ends[i]` is the last vertex of block `i` for every non-final block.
    ends: Vec<u64>,
    window: u64,
}

impl BlockLayout {
    /// Minimal sizes of the non-final blocks: `st` for the first block, then
    /// `|B_I| = st * sum_{J before I} (|B_J| + 1)`.
    pub fn minimal_sizes(s: u32, k: u32, t: u32) -> Result<Vec<u64>> {
        let p = Params::adversary(s, k, t)?;
        let count = binomial(u64::from(p.r), u64::from(s));
        let st = u64::from(s) * u64::from(t);
        let mut sizes: Vec<u64> = Vec::with_capacity(count as usize - 1);
        let mut acc: u64 = 0;
        for i in 0..count - 1 {
            let size = if i == 0 {
                st
            } else {
                st.checked_mul(acc)
                    .ok_or_else(|| Error::Param(format!("block sizes overflow for ({s},{k},{t})")))?
            };
            sizes.push(size);
            acc = acc
                .checked_add(size + 1)
                .ok_or_else(|| Error::Param(format!("block sizes overflow for ({s},{k},{t})")))?;
        }
        Ok(sizes)
    }

    /// Smallest window that hosts every non-final block at minimal size and
    /// leaves at least one vertex for the final block.
    pub fn minimal_window(s: u32, k: u32, t: u32) -> Result<u64> {
        Ok(Self::minimal_sizes(s, k, t)?.iter().sum::<u64>() + 1)
    }

    /// Layout from explicit block sizes in lexicographic order; the last entry
    /// is the currently realised size of the unbounded final block.
    pub fn from_sizes(s: u32, k: u32, t: u32, sizes: Vec<u64>) -> Result<Self> {
        let p = Params::adversary(s, k, t)?;
        let order = lex_subsets(p.r, s)?;
        if sizes.len() != order.len() {
            return Err(Error::Param(format!(
                "{} block sizes given, C({},{}) = {} required",
                sizes.len(),
                p.r,
                s,
                order.len()
            )));
        }
        if let Some(i) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::Param(format!("block {i} is empty")));
        }
        let masks = order.iter().map(|set| set.iter().fold(0u64, |m, &c| m | 1 << (c - 1))).collect();
        let mut ends = Vec::with_capacity(sizes.len() - 1);
        let mut acc = 0u64;
        for &n in &sizes[..sizes.len() - 1] {
            acc = acc.checked_add(n).ok_or_else(|| Error::Param("block sizes overflow".into()))?;
            ends.push(acc);
        }
        let window = acc
            .checked_add(*sizes.last().expect("non-empty"))
            .ok_or_else(|| Error::Param("block sizes overflow".into()))?;
        Ok(BlockLayout { s, k, t, r: p.r, order, masks, sizes, ends, window })
    }

    pub fn order(&self) -> &[Vec<Colour>] {
        &self.order
    }

    /// Block sizes aligned with [`Self::order`]; the last one is the realised
    /// part of the final block.
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn params(&self) -> Params {
        Params { s: self.s, k: self.k, t: self.t, r: self.r }
    }

    /// Grows the final block so that the layout covers `[window]`.
    pub fn extend_to(&mut self, window: u64) {
        if window > self.window {
            let last = self.sizes.len() - 1;
            self.sizes[last] += window - self.window;
            self.window = window;
        }
    }

    /// Position of `I(x)` in the lexicographic order; the final block absorbs
    /// every vertex past the last finite block.
    pub fn block_index(&self, x: Vertex) -> usize {
        self.ends.partition_point(|&end| end < u64::from(x))
    }

    /// The `s`-subset `I` with `x` in `B_I`.
    pub fn block_of(&self, x: Vertex) -> Result<&[Colour]> {
        if x == 0 || u64::from(x) > self.window {
            return Err(Error::OutOfWindow(format!("vertex {x} outside layout window 1..={}", self.window)));
        }
        Ok(&self.order[self.block_index(x)])
    }

    /// Index of the block labelled by `c`, if `c` is one of the `s`-subsets.
    pub fn index_of(&self, c: &[Colour]) -> Option<usize> {
        let mut sorted = c.to_vec();
        sorted.sort_unstable();
        self.order.binary_search(&sorted).ok()
    }

    /// Vertex range `(first, last)` of block `i` within the realised window.
    pub fn block_range(&self, i: usize) -> (u64, u64) {
        let first = if i == 0 { 1 } else { self.ends[i - 1] + 1 };
        let last = if i < self.ends.len() { self.ends[i] } else { self.window };
        (first, last)
    }

    /// Number of vertices in blocks strictly before block `i`.
    pub fn before(&self, i: usize) -> u64 {
        if i == 0 {
            0
        } else {
            self.ends[i - 1]
        }
    }

    /// Colour of a sorted k-edge: order the vertices by block (ties by id),
    /// forbid every colour in the blocks of the first `k - t + 1`, and take
    /// the smallest colour left.
    pub fn colour_of(&self, vertices: &[Vertex]) -> Colour {
        debug_assert_eq!(vertices.len(), self.k as usize);
        let mut keyed: Vec<(usize, Vertex)> = vertices.iter().map(|&v| (self.block_index(v), v)).collect();
        keyed.sort_unstable();
        let slack = (self.k - self.t + 1) as usize;
        let forbidden = keyed[..slack].iter().fold(0u64, |m, &(b, _)| m | self.masks[b]);
        let allowed = !forbidden & (u64::MAX >> (64 - self.r));
        debug_assert!(allowed != 0, "at most s(k-t+1) < r colours are forbidden");
        allowed.trailing_zeros() + 1
    }

    /// Checks the block-growth inequality for every non-final block.
    pub fn check_growth(&self) -> VerifyReport {
        let mut report = VerifyReport::new();
        let st = u64::from(self.s) * u64::from(self.t);
        let mut acc = 0u64;
        for (i, &n) in self.sizes.iter().enumerate().take(self.sizes.len() - 1) {
            let bound = if i == 0 { st } else { st.saturating_mul(acc) };
            if n < bound {
                report.push(
                    "growth",
                    format!("block {:?} has {n} vertices, needs at least {bound}", self.order[i]),
                    vec![i],
                );
            }
            acc = acc.saturating_add(n + 1);
        }
        report
    }
}

/// Default layout on `window`: minimal non-final blocks, final block takes the
/// remainder.
pub fn default_block_sizes(s: u32, k: u32, t: u32, window: u64) -> Result<BlockLayout> {
    let mut sizes = BlockLayout::minimal_sizes(s, k, t)?;
    let used: u64 = sizes.iter().sum();
    if window <= used {
        return Err(Error::Param(format!(
            "window {window} too small for ({s},{k},{t}); the default layout needs at least {}",
            used + 1
        )));
    }
    sizes.push(window - used);
    BlockLayout::from_sizes(s, k, t, sizes)
}

/// Default layout realised on its minimal window.
pub fn default_layout(s: u32, k: u32, t: u32) -> Result<BlockLayout> {
    default_block_sizes(s, k, t, BlockLayout::minimal_window(s, k, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_subsets_small() {
        assert_eq!(lex_subsets(2, 1).unwrap(), vec![vec![1], vec![2]]);
        assert_eq!(lex_subsets(3, 2).unwrap(), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        let four = lex_subsets(4, 2).unwrap();
        assert_eq!(four.len(), 6);
        assert_eq!(four.first().unwrap(), &vec![1, 2]);
        assert_eq!(four.last().unwrap(), &vec![3, 4]);
        assert!(four.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(lex_subsets(2, 3), Err(Error::Param(_))));
    }

    #[test]
    fn sizes_for_graph_case() {
        let l = default_block_sizes(1, 2, 2, 8).unwrap();
        assert_eq!(l.sizes(), &[2, 6]);
    }

    #[test]
    fn sizes_for_one_three_two() {
        // |B_1| = st = 2, |B_2| = st * (2 + 1) = 6, |B_3| = remainder.
        let l = default_block_sizes(1, 3, 2, 20).unwrap();
        assert_eq!(l.sizes(), &[2, 6, 12]);
        assert!(l.check_growth().ok);
    }

    #[test]
    fn window_below_minimum_reports_requirement() {
        let need = BlockLayout::minimal_window(2, 3, 2).unwrap();
        let err = default_block_sizes(2, 3, 2, 100).unwrap_err().to_string();
        assert!(err.contains(&need.to_string()), "{err}");
    }

    #[test]
    fn block_lookup() {
        let l = default_block_sizes(1, 2, 2, 8).unwrap();
        assert_eq!(l.block_of(1).unwrap(), &[1]);
        assert_eq!(l.block_of(2).unwrap(), &[1]);
        assert_eq!(l.block_of(5).unwrap(), &[2]);
        assert!(matches!(l.block_of(9), Err(Error::OutOfWindow(_))));
        assert!(matches!(l.block_of(0), Err(Error::OutOfWindow(_))));
    }

    #[test]
    fn rule_values() {
        let l = default_block_sizes(1, 2, 2, 8).unwrap();
        assert_eq!(l.colour_of(&[1, 5]), 2);
        assert_eq!(l.colour_of(&[5, 6]), 1);
        let tight = default_layout(1, 3, 3).unwrap();
        // only the first vertex's block is forbidden when k = t
        assert_eq!(tight.colour_of(&[1, 5, 9]), 2);
        assert_eq!(tight.colour_of(&[5, 6, 9]), 1);
    }

    #[test]
    fn extend_grows_final_block() {
        let mut l = default_block_sizes(1, 2, 2, 8).unwrap();
        l.extend_to(20);
        assert_eq!(l.sizes(), &[2, 18]);
        assert_eq!(l.block_of(20).unwrap(), &[2]);
    }
}
