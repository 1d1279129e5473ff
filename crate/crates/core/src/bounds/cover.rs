//! Exact rectangle covering number of a support pattern: maximal
//! rectangles by Close-by-One, then iterative-deepening branch and bound.

use alloc::vec;
use alloc::vec::Vec;

use super::{BoundsError, Rectangle, SupportPattern};

/// Largest `n_rows * n_cols` handled exactly.
pub const MAX_EXACT_CELLS: usize = 400;
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

const WORDS: usize = MAX_EXACT_CELLS.div_ceil(64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverOutcome {
    Exact { value: usize, cover: Vec<Rectangle>, nodes: u64 },
    /// Budget ran out. Covers of size below `best_lower` are ruled out and
    /// one of size `best_upper` is known.
    TimedOut { best_lower: usize, best_upper: usize, nodes: u64 },
}

impl CoverOutcome {
    pub fn lower_bound(&self) -> usize {
        match self {
            CoverOutcome::Exact { value, .. } => *value,
            CoverOutcome::TimedOut { best_lower, .. } => *best_lower,
        }
    }

    pub fn upper_bound(&self) -> usize {
        match self {
            CoverOutcome::Exact { value, .. } => *value,
            CoverOutcome::TimedOut { best_upper, .. } => *best_upper,
        }
    }

    pub fn nodes(&self) -> u64 {
        match self {
            CoverOutcome::Exact { nodes, .. } | CoverOutcome::TimedOut { nodes, .. } => *nodes,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut b = Bits::new(n);
        (0..n).for_each(|i| b.set(i));
        b
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }

    /// Agreement on the indices below `j`.
    fn agrees_below(&self, o: &Bits, j: usize) -> bool {
        let (w, b) = (j / 64, j % 64);
        self.0[..w] == o.0[..w] && (b == 0 || (self.0[w] ^ o.0[w]) & ((1u64 << b) - 1) == 0)
    }
}

/// Cell set over at most `MAX_EXACT_CELLS` cells.
type Cells = [u64; WORDS];

fn cells_count(c: &Cells) -> u32 {
    c.iter().map(|w| w.count_ones()).sum()
}

fn cells_and_not(a: &Cells, b: &Cells) -> Cells {
    core::array::from_fn(|i| a[i] & !b[i])
}

fn cells_and(a: &Cells, b: &Cells) -> Cells {
    core::array::from_fn(|i| a[i] & b[i])
}

fn cells_ones(c: &Cells) -> impl Iterator<Item = usize> + '_ {
    c.iter().enumerate().flat_map(|(w, &bits)| {
        let mut x = bits;
        core::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let b = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + b)
        })
    })
}

fn support_rows(p: &SupportPattern) -> Vec<Bits> {
    (0..p.n_rows())
        .map(|r| {
            let mut b = Bits::new(p.n_cols());
            (0..p.n_cols()).filter(|&c| p.is_support(r, c)).for_each(|c| b.set(c));
            b
        })
        .collect()
}

/// All inclusion-maximal zero-avoiding rectangles, in a deterministic
/// order. Stops early, returning `None`, once more than `limit` are found.
fn enumerate_maximal(p: &SupportPattern, limit: u64) -> Option<Vec<Rectangle>> {
    let supp = support_rows(p);
    let n = p.n_rows();
    let extent = |cols: &Bits| {
        let mut r = Bits::new(n);
        (0..n).filter(|&i| cols.is_subset(&supp[i])).for_each(|i| r.set(i));
        r
    };
    let mut out = Vec::new();
    let all_cols = Bits::full(p.n_cols());
    let top_rows = extent(&all_cols);
    if !top_rows.is_empty() && !all_cols.is_empty() {
        out.push((top_rows.clone(), all_cols.clone()));
    }
    // Close-by-One over row indices
    let mut stack = vec![(top_rows, all_cols, 0usize)];
    while let Some((rows, cols, start)) = stack.pop() {
        for j in (start..n).rev() {
            if rows.get(j) {
                continue;
            }
            let c2 = cols.and(&supp[j]);
            if c2.is_empty() {
                continue;
            }
            let r2 = extent(&c2);
            if !r2.agrees_below(&rows, j) {
                continue;
            }
            out.push((r2.clone(), c2.clone()));
            if out.len() as u64 > limit {
                return None;
            }
            stack.push((r2, c2, j + 1));
        }
    }
    let mut rects: Vec<Rectangle> =
        out.into_iter().map(|(r, c)| Rectangle { rows: r.ones().collect(), cols: c.ones().collect() }).collect();
    rects.sort();
    Some(rects)
}

/// All maximal rectangles of the support.
pub fn maximal_rectangles(p: &SupportPattern) -> Vec<Rectangle> {
    enumerate_maximal(p, u64::MAX).expect("unbounded enumeration")
}

struct Search<'a> {
    p: &'a SupportPattern,
    masks: Vec<Cells>,
    /// Rectangle indices covering each cell, largest first.
    by_cell: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn cell(&self, i: usize) -> (usize, usize) {
        (i / self.p.n_cols(), i % self.p.n_cols())
    }

    /// Cells pairwise unable to share a rectangle; each needs its own.
    fn fooling_bound(&self, uncovered: &Cells) -> usize {
        let mut set: Vec<(usize, usize)> = Vec::new();
        for i in cells_ones(uncovered) {
            let (r, c) = self.cell(i);
            if set.iter().all(|&(r2, c2)| !self.p.is_support(r, c2) || !self.p.is_support(r2, c)) {
                set.push((r, c));
            }
        }
        set.len()
    }

    /// `Some(found)`, or `None` when the budget is spent.
    fn dfs(&mut self, uncovered: &Cells, depth: usize) -> Option<bool> {
        if cells_count(uncovered) == 0 {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if depth == 0 || self.fooling_bound(uncovered) > depth {
            return Some(false);
        }
        let left = cells_count(uncovered);
        let mut gains: Vec<u32> = self.masks.iter().map(|m| cells_count(&cells_and(m, uncovered))).collect();
        let branch = cells_ones(uncovered).min_by_key(|&i| self.by_cell[i].len()).expect("nonempty");
        let mut options = self.by_cell[branch].clone();
        options.sort_by_key(|&ri| (core::cmp::Reverse(gains[ri]), ri));
        gains.sort_unstable_by(|a, b| b.cmp(a));
        if gains.iter().take(depth).sum::<u32>() < left {
            return Some(false);
        }
        let mut tried: Vec<Cells> = Vec::new();
        for ri in options {
            let gain = cells_and(&self.masks[ri], uncovered);
            // a rectangle whose useful part is inside one already tried is dominated
            if tried.iter().any(|t| cells_and_not(&gain, t).iter().all(|w| *w == 0)) {
                continue;
            }
            tried.push(gain);
            self.chosen.push(ri);
            let rest = cells_and_not(uncovered, &self.masks[ri]);
            match self.dfs(&rest, depth - 1)? {
                true => return Some(true),
                false => {
                    self.chosen.pop();
                }
            }
        }
        Some(false)
    }

    fn greedy(&self, all: &Cells) -> Vec<usize> {
        let mut uncovered = *all;
        let mut picked = Vec::new();
        while cells_count(&uncovered) > 0 {
            let best = (0..self.masks.len())
                .max_by_key(|&i| (cells_count(&cells_and(&self.masks[i], &uncovered)), core::cmp::Reverse(i)))
                .expect("support is covered by maximal rectangles");
            uncovered = cells_and_not(&uncovered, &self.masks[best]);
            picked.push(best);
        }
        picked
    }
}

/// Minimum number of zero-avoiding rectangles covering the support. This
/// lower-bounds the nonnegative rank of every matrix with this pattern.
///
/// `budget` caps rectangle enumeration plus search nodes.
pub fn rectangle_cover_lower_bound(p: &SupportPattern, budget: u64) -> Result<CoverOutcome, BoundsError> {
    let cells = p.n_rows() * p.n_cols();
    if cells > MAX_EXACT_CELLS {
        return Err(BoundsError::TooLarge { cells, limit: MAX_EXACT_CELLS });
    }
    if p.support_count() == 0 {
        return Ok(CoverOutcome::Exact { value: 0, cover: Vec::new(), nodes: 0 });
    }
    let nonzero_rows = (0..p.n_rows()).filter(|&r| (0..p.n_cols()).any(|c| p.is_support(r, c))).count();
    let nonzero_cols = (0..p.n_cols()).filter(|&c| (0..p.n_rows()).any(|r| p.is_support(r, c))).count();
    let mut all: Cells = [0; WORDS];
    for r in 0..p.n_rows() {
        for c in (0..p.n_cols()).filter(|&c| p.is_support(r, c)) {
            let i = r * p.n_cols() + c;
            all[i / 64] |= 1 << (i % 64);
        }
    }
    let Some(rects) = enumerate_maximal(p, budget) else {
        let probe = Search { p, masks: Vec::new(), by_cell: Vec::new(), nodes: 0, budget, chosen: Vec::new() };
        return Ok(CoverOutcome::TimedOut {
            best_lower: probe.fooling_bound(&all).max(1),
            best_upper: nonzero_rows.min(nonzero_cols),
            nodes: budget,
        });
    };
    let masks: Vec<Cells> = rects
        .iter()
        .map(|rect| {
            let mut m: Cells = [0; WORDS];
            for &r in &rect.rows {
                for &c in &rect.cols {
                    let i = r * p.n_cols() + c;
                    m[i / 64] |= 1 << (i % 64);
                }
            }
            m
        })
        .collect();
    let mut by_cell = vec![Vec::new(); cells];
    for (ri, m) in masks.iter().enumerate() {
        for i in cells_ones(m) {
            by_cell[i].push(ri);
        }
    }
    for list in &mut by_cell {
        list.sort_by_key(|&ri| (core::cmp::Reverse(cells_count(&masks[ri])), ri));
    }
    let mut s = Search { p, masks, by_cell, nodes: rects.len() as u64, budget, chosen: Vec::new() };
    let greedy = s.greedy(&all);
    let upper = greedy.len();
    let lower = s.fooling_bound(&all).max(1);
    let to_rects = |idx: &[usize]| idx.iter().map(|&i| rects[i].clone()).collect::<Vec<_>>();
    for d in lower..upper {
        s.chosen.clear();
        match s.dfs(&all, d) {
            Some(true) => return Ok(CoverOutcome::Exact { value: d, cover: to_rects(&s.chosen), nodes: s.nodes }),
            Some(false) => {}
            None => return Ok(CoverOutcome::TimedOut { best_lower: d, best_upper: upper, nodes: s.nodes }),
        }
    }
    Ok(CoverOutcome::Exact { value: upper, cover: to_rects(&greedy), nodes: s.nodes })
}
