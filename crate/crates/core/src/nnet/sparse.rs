//! Block-sparse matrices with 16x1 nonzero blocks, the storage scheme of
//! the recurrent sample-rate weights.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::nnet::dense::DenseMatrix;
use crate::scalar::Real;

/// Rows per nonzero block.
pub const BLOCK_ROWS: usize = 16;

/// One 16x1 nonzero block: 16 consecutive rows in a single column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseBlock<S: Real> {
    pub row_start: usize,
    pub col: usize,
    pub values: [S; BLOCK_ROWS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix<S: Real> {
    rows: usize,
    cols: usize,
    blocks: Vec<SparseBlock<S>>,
}

impl<S: Real> BlockSparseMatrix<S> {
    /// Validates block alignment, bounds, and coordinate uniqueness.
    /// Blocks are stored column-major for a cache-friendly matvec.
    pub fn new(rows: usize, cols: usize, mut blocks: Vec<SparseBlock<S>>) -> Result<Self> {
        if rows % BLOCK_ROWS != 0 {
            return Err(Error::ShapeMismatch(format!(
                "row count {rows} not a multiple of {BLOCK_ROWS}"
            )));
        }
        let mut seen = HashSet::new();
        for b in &blocks {
            if b.row_start % BLOCK_ROWS != 0 || b.row_start + BLOCK_ROWS > rows || b.col >= cols {
                return Err(Error::ShapeMismatch(format!(
                    "block ({}, {}) out of bounds for {rows}x{cols}",
                    b.row_start, b.col
                )));
            }
            if !seen.insert((b.row_start, b.col)) {
                return Err(Error::invalid(format!(
                    "duplicate block at ({}, {})",
                    b.row_start, b.col
                )));
            }
        }
        blocks.sort_by_key(|b| (b.col, b.row_start));
        Ok(Self { rows, cols, blocks })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn blocks(&self) -> &[SparseBlock<S>] {
        &self.blocks
    }

    /// Number of stored (nonzero) weights.
    pub fn nonzeros(&self) -> usize {
        self.blocks.len() * BLOCK_ROWS
    }

    pub fn density(&self) -> f64 {
        self.nonzeros() as f64 / (self.rows * self.cols) as f64
    }

    /// `y = M x`; equals the dense matvec of the materialized matrix.
    pub fn matvec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "sparse matvec: {}x{} against vector of {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![S::zero(); self.rows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// Matvec into a pre-zeroed output slice (hot path of the sample loop).
    pub fn matvec_into(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for b in &self.blocks {
            let xv = x[b.col];
            let out = &mut y[b.row_start..b.row_start + BLOCK_ROWS];
            for (o, &v) in out.iter_mut().zip(&b.values) {
                *o += v * xv;
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for b in &self.blocks {
            for (i, &v) in b.values.iter().enumerate() {
                m.set(b.row_start + i, b.col, v);
            }
        }
        m
    }
}

/// Prunes a dense matrix to 16x1 blocks, keeping the highest-L2-norm
/// blocks until `floor(target_density * rows * cols / 16)` remain.
pub fn prune_to_blocks<S: Real>(
    dense: &DenseMatrix<S>,
    target_density: f64,
) -> Result<BlockSparseMatrix<S>> {
    if !(target_density > 0.0 && target_density <= 1.0) {
        return Err(Error::invalid(format!(
            "target density must be in (0, 1], got {target_density}"
        )));
    }
    let (rows, cols) = (dense.rows(), dense.cols());
    if rows % BLOCK_ROWS != 0 {
        return Err(Error::ShapeMismatch(format!(
            "row count {rows} not a multiple of {BLOCK_ROWS}"
        )));
    }
    let mut scored: Vec<(f64, SparseBlock<S>)> = Vec::with_capacity(rows / BLOCK_ROWS * cols);
    for row_start in (0..rows).step_by(BLOCK_ROWS) {
        for col in 0..cols {
            let mut values = [S::zero(); BLOCK_ROWS];
            let mut norm2 = 0.0f64;
            for i in 0..BLOCK_ROWS {
                let v = dense.get(row_start + i, col);
                values[i] = v;
                norm2 += v.to_f64c() * v.to_f64c();
            }
            scored.push((
                norm2,
                SparseBlock {
                    row_start,
                    col,
                    values,
                },
            ));
        }
    }
    // Deterministic order: norm descending, then coordinates.
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (a.1.row_start, a.1.col).cmp(&(b.1.row_start, b.1.col)))
    });
    let keep = (((target_density * (rows * cols) as f64) / BLOCK_ROWS as f64).floor() as usize)
        .min(scored.len())
        .max(1);
    let blocks = scored.into_iter().take(keep).map(|(_, b)| b).collect();
    BlockSparseMatrix::new(rows, cols, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_dense(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f32> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn empty_block_set_gives_zero_vector() {
        let m = BlockSparseMatrix::<f32>::new(32, 8, vec![]).unwrap();
        let y = m.matvec(&vec![1.0; 8]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_block_copies_scaled_entries() {
        let mut values = [0.0f32; 16];
        for (i, v) in values.iter_mut().enumerate() {
            *v = i as f32;
        }
        let m = BlockSparseMatrix::new(
            32,
            4,
            vec![SparseBlock {
                row_start: 16,
                col: 2,
                values,
            }],
        )
        .unwrap();
        let mut x = vec![0.0f32; 4];
        x[2] = 2.0;
        let y = m.matvec(&x).unwrap();
        assert!(y[..16].iter().all(|&v| v == 0.0));
        for i in 0..16 {
            assert_eq!(y[16 + i], 2.0 * i as f32);
        }
    }

    #[test]
    fn sparse_matvec_matches_dense_oracle() {
        let dense = random_dense(384, 384, 42);
        let sparse = prune_to_blocks(&dense, 0.1).unwrap();
        let materialized = sparse.to_dense();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let x: Vec<f32> = (0..384).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ys = sparse.matvec(&x).unwrap();
            let yd = materialized.matvec(&x).unwrap();
            let max = ys
                .iter()
                .zip(&yd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f32, f32::max);
            assert!(max < 1e-6, "max diff {max}");
        }
    }

    #[test]
    fn prune_full_density_round_trips() {
        let dense = random_dense(48, 7, 1);
        let sparse = prune_to_blocks(&dense, 1.0).unwrap();
        assert_eq!(sparse.to_dense(), dense);
        assert!((sparse.density() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prune_reference_block_count() {
        let dense = random_dense(384, 384, 2);
        let sparse = prune_to_blocks(&dense, 0.2).unwrap();
        assert_eq!(sparse.blocks().len(), 1843);
        let target = 0.2;
        assert!((sparse.density() - target).abs() <= 1.0 / (384.0 * 384.0) * 16.0);
    }

    #[test]
    fn prune_keeps_largest_norms() {
        let dense = random_dense(64, 32, 3);
        let sparse = prune_to_blocks(&dense, 0.25).unwrap();
        let kept: std::collections::HashSet<(usize, usize)> = sparse
            .blocks()
            .iter()
            .map(|b| (b.row_start, b.col))
            .collect();
        let norm = |row_start: usize, col: usize| -> f64 {
            (0..16)
                .map(|i| {
                    let v = dense.get(row_start + i, col) as f64;
                    v * v
                })
                .sum()
        };
        let min_kept = kept
            .iter()
            .map(|&(r, c)| norm(r, c))
            .fold(f64::INFINITY, f64::min);
        for row_start in (0..64).step_by(16) {
            for col in 0..32 {
                if !kept.contains(&(row_start, col)) {
                    assert!(norm(row_start, col) <= min_kept + 1e-12);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = BlockSparseMatrix::<f32>::new(32, 8, vec![]).unwrap();
        assert!(m.matvec(&vec![0.0; 7]).is_err());
    }

    #[test]
    fn duplicate_blocks_rejected() {
        let b = SparseBlock {
            row_start: 0,
            col: 0,
            values: [0.0f32; 16],
        };
        assert!(BlockSparseMatrix::new(16, 1, vec![b, b]).is_err());
    }

    #[test]
    fn invalid_density_rejected() {
        let dense = random_dense(16, 4, 9);
        assert!(prune_to_blocks(&dense, 0.0).is_err());
        assert!(prune_to_blocks(&dense, 1.5).is_err());
    }
}
