//! L-ary partition-refinement tree over matched plain/cipher position sets.
//!
//! Every leaf owns a contiguous range of two position arrays, one for the
//! plain side and one for the cipher side. Refining a leaf stably
//! counting-sorts both ranges by element value and hands each value's
//! sub-range to a child, so the node storage never exceeds one entry per grid
//! position per side and positions inside a leaf stay in row-major order.

use crate::error::{Error, Result};
use crate::permutation::PermutationMap;

pub type NodeId = usize;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    cardinality: usize,
    /// `(value, child)` for every value present when the node was split,
    /// ascending by value. Absent values have no child.
    children: Vec<(u16, NodeId)>,
}

/// A leaf's matched sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leaf<'a> {
    pub id: NodeId,
    pub plain_set: &'a [u32],
    pub cipher_set: &'a [u32],
}

impl Leaf<'_> {
    pub fn cardinality(&self) -> usize {
        self.plain_set.len()
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryTree {
    rows: usize,
    cols: usize,
    levels: usize,
    plain_order: Vec<u32>,
    cipher_order: Vec<u32>,
    nodes: Vec<Node>,
    /// Leaves that can still split (cardinality > 1).
    active: Vec<NodeId>,
    leaf_count: usize,
    refinements: usize,
    positions_processed: u64,
    // scratch, sized `levels`
    plain_count: Vec<u32>,
    cipher_count: Vec<u32>,
    touched: Vec<u16>,
    buf: Vec<u32>,
}

impl RecoveryTree {
    /// One root leaf holding every position of the `rows x cols` grid on both
    /// sides; elements take `levels` distinct values.
    pub fn new(rows: usize, cols: usize, levels: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("grid must be non-empty, got {rows}x{cols}")));
        }
        if !(2..=1 << 16).contains(&levels) {
            return Err(Error::Shape(format!("levels must lie in 2..=65536, got {levels}")));
        }
        let size = rows * cols;
        if size > u32::MAX as usize {
            return Err(Error::Shape(format!("grid of {size} positions is too large")));
        }
        let order: Vec<u32> = (0..size as u32).collect();
        Ok(Self {
            rows,
            cols,
            levels,
            plain_order: order.clone(),
            cipher_order: order,
            nodes: vec![Node {
                start: 0,
                cardinality: size,
                children: Vec::new(),
            }],
            active: if size > 1 { vec![0] } else { Vec::new() },
            leaf_count: 1,
            refinements: 0,
            positions_processed: 0,
            plain_count: vec![0; levels],
            cipher_count: vec![0; levels],
            touched: Vec::new(),
            buf: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn grid_size(&self) -> usize {
        self.plain_order.len()
    }

    /// Number of pairs absorbed so far.
    pub fn refinements(&self) -> usize {
        self.refinements
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Positions moved by refinement so far, each side counted separately.
    pub fn positions_processed(&self) -> u64 {
        self.positions_processed
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn cardinality(&self, id: NodeId) -> usize {
        self.nodes[id].cardinality
    }

    /// `(value, child)` links of a node; empty for leaves.
    pub fn children(&self, id: NodeId) -> impl Iterator<Item = (usize, NodeId)> + '_ {
        self.nodes[id].children.iter().map(|&(v, c)| (v as usize, c))
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Plain and cipher sets of a node. Internal nodes hand their contents to
    /// their children and hold empty sets.
    pub fn sets(&self, id: NodeId) -> (&[u32], &[u32]) {
        let n = &self.nodes[id];
        let r = n.start..n.start + n.cardinality;
        (&self.plain_order[r.clone()], &self.cipher_order[r])
    }

    pub fn leaves(&self) -> impl Iterator<Item = Leaf<'_>> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.children.is_empty())
            .map(move |(id, _)| {
                let (plain_set, cipher_set) = self.sets(id);
                Leaf {
                    id,
                    plain_set,
                    cipher_set,
                }
            })
    }

    /// Share of grid positions sitting in singleton leaves.
    pub fn singleton_fraction(&self) -> f64 {
        let unresolved: usize = self.active.iter().map(|&id| self.nodes[id].cardinality).sum();
        1.0 - unresolved as f64 / self.grid_size() as f64
    }

    /// `log2` of the number of bijections consistent with every pair seen,
    /// the sum of `log2(|leaf|!)` over all leaves.
    pub fn residual_ambiguity(&self) -> f64 {
        self.active
            .iter()
            .map(|&id| log2_factorial(self.nodes[id].cardinality))
            .sum()
    }

    /// Splits every leaf of cardinality > 1 by the values of one
    /// plain/cipher pair, given as flattened row-major grids.
    ///
    /// Either every leaf is split or, when some leaf's per-value counts differ
    /// between the two sides, none is and the tree is left as it was.
    pub fn refine(&mut self, plain: &[u8], cipher: &[u8]) -> Result<()> {
        self.refine_with(plain, cipher, |v| v as usize)
    }

    /// [`refine`](Self::refine) for element types wider than a byte.
    pub fn refine_wide(&mut self, plain: &[u16], cipher: &[u16]) -> Result<()> {
        self.refine_with(plain, cipher, |v| v as usize)
    }

    fn refine_with<T: Copy>(&mut self, plain: &[T], cipher: &[T], value: impl Fn(T) -> usize) -> Result<()> {
        let size = self.grid_size();
        for (side, grid) in [("plain", plain), ("cipher", cipher)] {
            if grid.len() != size {
                return Err(Error::Shape(format!(
                    "{side} grid has {} elements, tree covers {size}",
                    grid.len()
                )));
            }
        }
        for grid in [plain, cipher] {
            if let Some(p) = grid.iter().position(|&v| value(v) >= self.levels) {
                return Err(Error::ValueOutOfRange {
                    position: p,
                    value: value(grid[p]) as u32,
                    levels: self.levels as u32,
                });
            }
        }

        let active = std::mem::take(&mut self.active);
        for &id in &active {
            if let Err((v, plain_n, cipher_n)) = self.tally(id, plain, cipher, &value) {
                self.active = active;
                return Err(Error::InconsistentPair {
                    pair: self.refinements,
                    leaf: id,
                    value: v as u32,
                    plain: plain_n,
                    cipher: cipher_n,
                });
            }
        }

        let mut next_active = Vec::with_capacity(active.len() * 2);
        for id in active {
            self.split(id, plain, cipher, &value, &mut next_active);
        }
        self.active = next_active;
        self.refinements += 1;
        Ok(())
    }

    /// Counts values on both sides of leaf `id`, leaving the plain counts in
    /// `plain_count` for the touched values. Reports the first mismatch.
    fn tally<T: Copy>(
        &mut self,
        id: NodeId,
        plain: &[T],
        cipher: &[T],
        value: &impl Fn(T) -> usize,
    ) -> std::result::Result<(), (usize, usize, usize)> {
        let Node { start, cardinality, .. } = self.nodes[id];
        let range = start..start + cardinality;
        self.touched.clear();
        for &p in &self.plain_order[range.clone()] {
            let v = value(plain[p as usize]);
            if self.plain_count[v] == 0 {
                self.touched.push(v as u16);
            }
            self.plain_count[v] += 1;
        }
        for &p in &self.cipher_order[range] {
            self.cipher_count[value(cipher[p as usize])] += 1;
        }
        let mut mismatch = None;
        for &v in &self.touched {
            let v = v as usize;
            if mismatch.is_none() && self.plain_count[v] != self.cipher_count[v] {
                mismatch = Some((v, self.plain_count[v] as usize, self.cipher_count[v] as usize));
            }
        }
        // a cipher value absent on the plain side shows up as a mismatch on
        // some touched value, since both sides hold `cardinality` entries
        for &p in &self.cipher_order[start..start + cardinality] {
            self.cipher_count[value(cipher[p as usize])] = 0;
        }
        for &v in &self.touched {
            self.plain_count[v as usize] = 0;
        }
        match mismatch {
            Some(m) => Err(m),
            None => Ok(()),
        }
    }

    fn split<T: Copy>(
        &mut self,
        id: NodeId,
        plain: &[T],
        cipher: &[T],
        value: &impl Fn(T) -> usize,
        next_active: &mut Vec<NodeId>,
    ) {
        let Node { start, cardinality, .. } = self.nodes[id];
        let range = start..start + cardinality;

        self.touched.clear();
        for &p in &self.plain_order[range.clone()] {
            let v = value(plain[p as usize]);
            if self.plain_count[v] == 0 {
                self.touched.push(v as u16);
            }
            self.plain_count[v] += 1;
        }
        self.touched.sort_unstable();

        // exclusive prefix sums become the children's offsets
        let mut offset = start;
        let mut children = Vec::with_capacity(self.touched.len());
        for &v in &self.touched {
            let n = self.plain_count[v as usize] as usize;
            let child = self.nodes.len();
            self.nodes.push(Node {
                start: offset,
                cardinality: n,
                children: Vec::new(),
            });
            children.push((v, child));
            if n > 1 {
                next_active.push(child);
            }
            self.plain_count[v as usize] = offset as u32;
            self.cipher_count[v as usize] = offset as u32;
            offset += n;
        }

        stable_partition(&mut self.plain_order[range.clone()], &mut self.buf, start, plain, value, &mut self.plain_count);
        stable_partition(&mut self.cipher_order[range], &mut self.buf, start, cipher, value, &mut self.cipher_count);
        for &v in &self.touched {
            self.plain_count[v as usize] = 0;
            self.cipher_count[v as usize] = 0;
        }

        self.leaf_count += children.len() - 1;
        self.positions_processed += 2 * cardinality as u64;
        let node = &mut self.nodes[id];
        node.cardinality = 0;
        node.children = children;
    }

    /// Pairs the k-th plain position of every leaf with its k-th cipher
    /// position, both in row-major order.
    pub fn estimate_map(&self) -> PermutationMap {
        let mut target = vec![0usize; self.grid_size()];
        // leaves tile both order arrays with aligned ranges
        for (&p, &c) in self.plain_order.iter().zip(&self.cipher_order) {
            target[p as usize] = c as usize;
        }
        PermutationMap::from_raw(self.rows, self.cols, target)
    }

    /// Whether `w` maps every leaf's plain set onto exactly its cipher set.
    pub fn admits(&self, w: &PermutationMap) -> bool {
        if w.rows() != self.rows || w.cols() != self.cols {
            return false;
        }
        let mut leaf_of_cipher = vec![usize::MAX; self.grid_size()];
        for leaf in self.leaves() {
            for &c in leaf.cipher_set {
                leaf_of_cipher[c as usize] = leaf.id;
            }
        }
        self.leaves().all(|leaf| {
            leaf.plain_set
                .iter()
                .all(|&p| leaf_of_cipher[w.targets()[p as usize]] == leaf.id)
        })
    }
}

/// Reorders `slice` (positions `start..`) so positions with equal values are
/// contiguous, ascending by value, keeping their relative order. `cursor[v]`
/// holds the absolute offset where value `v`'s block begins.
fn stable_partition<T: Copy>(
    slice: &mut [u32],
    buf: &mut Vec<u32>,
    start: usize,
    grid: &[T],
    value: &impl Fn(T) -> usize,
    cursor: &mut [u32],
) {
    buf.clear();
    buf.resize(slice.len(), 0);
    for &p in slice.iter() {
        let v = value(grid[p as usize]);
        buf[cursor[v] as usize - start] = p;
        cursor[v] += 1;
    }
    slice.copy_from_slice(buf);
}

pub(crate) fn log2_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) / std::f64::consts::LN_2
}
