use num_complex::Complex64;

use crate::{synthesize_codeword, AreaGrid, CodebookError, Codeword, Coverage};

/// Coverage of codeword `which` (1 or 2) at layer `s` of a tree with
/// `leaves` leaves: leaf `i` belongs to it iff `floor((i-1) / (leaves >> s))`
/// has parity `which - 1`.
pub fn layer_coverage(leaves: usize, s: usize, which: usize) -> Coverage {
    let block = leaves >> s;
    (1..=leaves).filter(|i| ((i - 1) / block) % 2 == which - 1).collect()
}

/// Binary-tree codebook over the reflective areas.
///
/// Layers `1..S-1` hold two codewords each; the bottom layer holds one
/// codeword per reflective area. `2^S = P/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalCodebook {
    pub depth: usize,
    /// `layers[s-1]` is layer `s`.
    pub layers: Vec<[Codeword; 2]>,
    pub leaves: Vec<Codeword>,
}

impl HierarchicalCodebook {
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn layer(&self, s: usize) -> &[Codeword; 2] {
        &self.layers[s - 1]
    }

    pub fn leaf(&self, index: usize) -> &Codeword {
        &self.leaves[index - 1]
    }

    /// One row per codeword, upper layers first.
    pub fn export_rows(&self) -> Vec<CodebookRow> {
        let mut rows = Vec::new();
        for (s, pair) in self.layers.iter().enumerate() {
            for (w, cw) in pair.iter().enumerate() {
                rows.push(CodebookRow::new(format!("{}.{}", s + 1, w + 1), cw));
            }
        }
        for (i, cw) in self.leaves.iter().enumerate() {
            rows.push(CodebookRow::new(format!("{}.{}", self.depth, i + 1), cw));
        }
        rows
    }
}

/// Flat export form of a codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookRow {
    /// `layer.position`, e.g. `2.1`.
    pub path: String,
    pub coverage: Vec<usize>,
    pub q: Vec<Complex64>,
}

impl CodebookRow {
    fn new(path: String, cw: &Codeword) -> Self {
        CodebookRow { path, coverage: cw.coverage.iter().copied().collect(), q: cw.q.iter().copied().collect() }
    }
}

/// Builds the full tree (all codewords precomputed).
pub fn build_hierarchical_codebook(
    grid: &AreaGrid,
    gain: f64,
) -> Result<HierarchicalCodebook, CodebookError> {
    let p = grid.len();
    if p < 2 || !p.is_power_of_two() {
        return Err(CodebookError::NotPowerOfTwo(p));
    }
    let n = grid.reflective_count();
    let depth = n.trailing_zeros() as usize;
    let mut layers = Vec::new();
    for s in 1..depth {
        let a = synthesize_codeword(&layer_coverage(n, s, 1), grid, gain)?;
        let b = synthesize_codeword(&layer_coverage(n, s, 2), grid, gain)?;
        layers.push([a, b]);
    }
    let leaves = (1..=n)
        .map(|i| synthesize_codeword(&Coverage::from([i]), grid, gain))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HierarchicalCodebook { depth: depth.max(1), layers, leaves })
}
