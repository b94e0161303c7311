//! Sparse complex operators on a finite-dimensional space.
//!
//! Entries are kept sorted row-major with no duplicates and no explicit
//! zeros. The coordinate-list text format is `dim n nnz k` on the first line
//! followed by one `row col re im` line per entry.

use crate::error::MatrepError;
use num_complex::Complex64;

const PRUNE_EPS: f64 = 0.0; // explicit zeros only; inexact entries are kept

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOperator {
    /// Build from triplets, validating indices and rejecting duplicates.
    pub fn new(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self, MatrepError> {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets
            .into_iter()
            .filter(|(_, _, v)| v.norm_sqr() > PRUNE_EPS)
            .collect();
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(MatrepError::EntryOutOfRange { row: r, col: c, dim });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(MatrepError::DuplicateEntry(w[0].0, w[0].1));
            }
        }
        Ok(SparseOperator { dim, entries })
    }

    /// Build from triplets that may repeat coordinates; repeats are summed.
    pub fn from_accumulated(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self, MatrepError> {
        let mut map = std::collections::BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(MatrepError::EntryOutOfRange { row: r, col: c, dim });
            }
            *map.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        Ok(SparseOperator {
            dim,
            entries: map
                .into_iter()
                .filter(|(_, v)| v.norm_sqr() > PRUNE_EPS)
                .map(|((r, c), v)| (r, c, v))
                .collect(),
        })
    }

    pub fn zero(dim: usize) -> Self {
        SparseOperator { dim, entries: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOperator {
            dim,
            entries: (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect(),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        SparseOperator {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, i, Complex64::new(v, 0.0)))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c, _)| r == c)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        if k == Complex64::new(0.0, 0.0) {
            return SparseOperator::zero(self.dim);
        }
        SparseOperator {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * k)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrepError> {
        if self.dim != other.dim {
            return Err(MatrepError::DimMismatch(self.dim, other.dim));
        }
        SparseOperator::from_accumulated(
            self.dim,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrepError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut entries: Vec<(usize, usize, Complex64)> =
            self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseOperator { dim: self.dim, entries }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, MatrepError> {
        if self.dim != other.dim {
            return Err(MatrepError::DimMismatch(self.dim, other.dim));
        }
        // index rows of `other` for the inner loop
        let mut row_start = vec![usize::MAX; other.dim + 1];
        for (pos, &(r, _, _)) in other.entries.iter().enumerate() {
            if row_start[r] == usize::MAX {
                row_start[r] = pos;
            }
        }
        row_start[other.dim] = other.entries.len();
        for r in (0..other.dim).rev() {
            if row_start[r] == usize::MAX {
                row_start[r] = row_start[r + 1];
            }
        }
        let mut map = std::collections::BTreeMap::new();
        for &(i, k, v) in &self.entries {
            for &(_, j, w) in &other.entries[row_start[k]..row_start[k + 1]] {
                *map.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += v * w;
            }
        }
        Ok(SparseOperator {
            dim: self.dim,
            entries: map
                .into_iter()
                .filter(|(_, v)| v.norm_sqr() > PRUNE_EPS)
                .map(|((r, c), v)| (r, c, v))
                .collect(),
        })
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Apply the conjugate transpose without materializing it.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            y[c] += v.conj() * x[r];
        }
        y
    }

    /// Euclidean norm of each column, i.e. `||A e_j||` per basis vector.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0f64; self.dim];
        for &(_, c, v) in &self.entries {
            sq[c] += v.norm_sqr();
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// Compress to the subspace selected by `mask`: P A P with P the diagonal
    /// 0/1 projection.
    pub fn restrict(&self, mask: &[bool]) -> Self {
        SparseOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|&&(r, c, _)| mask[r] && mask[c])
                .copied()
                .collect(),
        }
    }

    /// Coordinate-list text form.
    pub fn to_coo_text(&self) -> String {
        let mut out = format!("dim {} nnz {}\n", self.dim, self.entries.len());
        for &(r, c, v) in &self.entries {
            out.push_str(&format!("{} {} {} {}\n", r, c, v.re, v.im));
        }
        out
    }

    pub fn from_coo_text(text: &str) -> Result<Self, MatrepError> {
        let bad = |msg: &str| MatrepError::BadOperatorFile(msg.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "dim" || parts[2] != "nnz" {
            return Err(bad("expected header `dim n nnz k`"));
        }
        let dim: usize = parts[1].parse().map_err(|_| bad("bad dimension"))?;
        let nnz: usize = parts[3].parse().map_err(|_| bad("bad nnz"))?;
        let mut triplets = Vec::with_capacity(nnz);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad("expected `row col re im`"));
            }
            let r: usize = f[0].parse().map_err(|_| bad("bad row"))?;
            let c: usize = f[1].parse().map_err(|_| bad("bad col"))?;
            let re: f64 = f[2].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = f[3].parse().map_err(|_| bad("bad imaginary part"))?;
            triplets.push((r, c, Complex64::new(re, im)));
        }
        if triplets.len() != nnz {
            return Err(bad("nnz does not match the entry count"));
        }
        SparseOperator::new(dim, triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_and_adjoint() {
        // shift on C^3
        let s = SparseOperator::new(3, vec![(1, 0, c(1.0)), (2, 1, c(1.0))]).unwrap();
        let sts = s.adjoint().matmul(&s).unwrap();
        // S*S = diag(1,1,0)
        assert_eq!(sts, SparseOperator::diagonal(&[1.0, 1.0, 0.0]));
        let p = s.matmul(&s.adjoint()).unwrap();
        assert_eq!(p, SparseOperator::diagonal(&[0.0, 1.0, 1.0]));
    }

    #[test]
    fn rejects_out_of_range_and_duplicates() {
        assert!(SparseOperator::new(2, vec![(2, 0, c(1.0))]).is_err());
        assert!(SparseOperator::new(2, vec![(0, 0, c(1.0)), (0, 0, c(2.0))]).is_err());
    }

    #[test]
    fn explicit_zeros_are_pruned() {
        let op = SparseOperator::new(2, vec![(0, 0, c(0.0)), (1, 1, c(2.0))]).unwrap();
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn coo_round_trip() {
        let op = SparseOperator::new(
            3,
            vec![(0, 1, Complex64::new(1.5, -0.5)), (2, 2, c(2.0))],
        )
        .unwrap();
        let text = op.to_coo_text();
        assert!(text.starts_with("dim 3 nnz 2"));
        assert_eq!(SparseOperator::from_coo_text(&text).unwrap(), op);
    }

    #[test]
    fn restriction_masks_rows_and_columns() {
        let op = SparseOperator::new(
            2,
            vec![(0, 0, c(1.0)), (0, 1, c(1.0)), (1, 1, c(1.0))],
        )
        .unwrap();
        let r = op.restrict(&[true, false]);
        assert_eq!(r, SparseOperator::new(2, vec![(0, 0, c(1.0))]).unwrap());
    }
}
