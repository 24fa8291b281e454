//! Square sparse operators in compressed row form.
//!
//! Entries are kept sorted by `(row, col)`, which makes every derived
//! operation (products, adjoints, serialization) bit-deterministic. The
//! `hermitian` flag is structural metadata set by constructors that can
//! guarantee it; expectation values of flagged operators must come out real
//! up to a small residue.

use num_complex::Complex64;

use crate::{Error, Result, Truncation};

use super::Beam;

/// Entrywise bound used when a hermitian flag is asserted on numeric data.
pub const HERMITICITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets; duplicate positions are
    /// summed, exact zeros dropped.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        assert!(dim <= u32::MAX as usize, "dimension exceeds u32 index range");
        let mut entries: Vec<(u32, u32, Complex64)> = triplets
            .into_iter()
            .inspect(|&(r, c, _)| debug_assert!(r < dim && c < dim))
            .map(|(r, c, v)| (r as u32, c as u32, v))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut merged: Vec<(u32, u32, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(merged.len());
        let mut vals = Vec::with_capacity(merged.len());
        let mut cur_row = 0usize;
        for (r, c, v) in merged {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            while cur_row < r as usize {
                cur_row += 1;
                row_ptr[cur_row] = cols.len();
            }
            cols.push(c);
            vals.push(v);
        }
        while cur_row < dim {
            cur_row += 1;
            row_ptr[cur_row] = cols.len();
        }
        Self { dim, row_ptr, cols, vals, hermitian: false }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_triplets(dim, std::iter::empty())
    }

    pub fn identity(dim: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let mut op = Self::from_triplets(dim, (0..dim).map(|i| (i, i, one)));
        op.hermitian = true;
        op
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut op = Self::from_triplets(
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        );
        op.hermitian = diag.iter().all(|v| v.im == 0.0);
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn hermitian(&self) -> bool {
        self.hermitian
    }

    /// Asserts hermiticity as structural metadata. Debug builds verify the
    /// claim numerically.
    pub(crate) fn flagged_hermitian(mut self) -> Self {
        debug_assert!(
            self.hermiticity_deviation() <= HERMITICITY_TOL,
            "operator flagged hermitian deviates by {:e}",
            self.hermiticity_deviation()
        );
        self.hermitian = true;
        self
    }

    /// Largest entrywise deviation between the operator and its adjoint.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&(col as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.cols[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::from_triplets(
            self.dim,
            self.iter().chain(other.iter()),
        );
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out.hermitian = self.hermitian && factor.im == 0.0;
        out
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<u32> = Vec::new();
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for (m, a) in self.row(r) {
                for (c, b) in other.row(m) {
                    if scratch[c].re == 0.0 && scratch[c].im == 0.0 {
                        touched.push(c as u32);
                    }
                    scratch[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = scratch[c as usize];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
                scratch[c as usize] = Complex64::new(0.0, 0.0);
            }
            touched.clear();
            row_ptr[r + 1] = cols.len();
        }
        Ok(Self { dim: self.dim, row_ptr, cols, vals, hermitian: false })
    }

    /// Product of an operator with itself; hermitian inputs give hermitian
    /// squares, which the flag preserves.
    pub fn square(&self) -> Self {
        let mut sq = self.compose(self).expect("same dimension");
        sq.hermitian = self.hermitian;
        sq
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_triplets(
            self.dim,
            self.iter().map(|(r, c, v)| (c, r, v.conj())),
        );
        out.hermitian = self.hermitian;
        out
    }

    /// Kronecker product; the left factor owns the major index, matching the
    /// beam-A-major basis order of the full space.
    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        let od = other.dim;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (ra, ca, va) in self.iter() {
            for (rb, cb, vb) in other.iter() {
                triplets.push((ra * od + rb, ca * od + cb, va * vb));
            }
        }
        let mut out = Self::from_triplets(d, triplets);
        out.hermitian = self.hermitian && other.hermitian;
        out
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            *out = acc;
        }
        y
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Trace of `self * other` without materializing the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.check_dim(other)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, c, v) in self.iter() {
            let w = other.get(c, r);
            if w.re != 0.0 || w.im != 0.0 {
                acc += v * w;
            }
        }
        Ok(acc)
    }

    /// Largest entrywise magnitude of `self - other` over the union pattern.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            let mut it_a = self.row(r).peekable();
            let mut it_b = other.row(r).peekable();
            loop {
                match (it_a.peek().copied(), it_b.peek().copied()) {
                    (Some((ca, va)), Some((cb, vb))) => {
                        if ca == cb {
                            worst = worst.max((va - vb).norm());
                            it_a.next();
                            it_b.next();
                        } else if ca < cb {
                            worst = worst.max(va.norm());
                            it_a.next();
                        } else {
                            worst = worst.max(vb.norm());
                            it_b.next();
                        }
                    }
                    (Some((_, va)), None) => {
                        worst = worst.max(va.norm());
                        it_a.next();
                    }
                    (None, Some((_, vb))) => {
                        worst = worst.max(vb.norm());
                        it_b.next();
                    }
                    (None, None) => break,
                }
            }
        }
        worst
    }

    /// Whether every entry connects basis states with equal per-beam photon
    /// totals, i.e. the operator commutes with both beam number operators.
    pub fn conserves_beam_totals(&self, trunc: &Truncation) -> bool {
        assert_eq!(self.dim, trunc.total_dim(), "operator is not on the full space");
        self.iter().all(|(r, c, _)| {
            let or = trunc.occupation(r);
            let oc = trunc.occupation(c);
            or.beam_total(Beam::A) == oc.beam_total(Beam::A)
                && or.beam_total(Beam::B) == oc.beam_total(Beam::B)
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::from_element(
            self.dim,
            self.dim,
            Complex64::new(0.0, 0.0),
        );
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_accumulate_and_sort() {
        let op = SparseOperator::from_triplets(
            3,
            vec![(2, 1, c(1.0, 0.0)), (0, 0, c(2.0, 0.0)), (2, 1, c(0.5, -1.0))],
        );
        assert_eq!(op.nnz(), 2);
        assert_eq!(op.get(2, 1), c(1.5, -1.0));
        assert_eq!(op.get(0, 0), c(2.0, 0.0));
        assert_eq!(op.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn adjoint_is_an_involution() {
        let op = SparseOperator::from_triplets(
            4,
            vec![(0, 3, c(1.0, 2.0)), (2, 2, c(-1.0, 0.5)), (3, 1, c(0.0, -4.0))],
        );
        assert_eq!(op.adjoint().adjoint(), op);
        assert_eq!(op.adjoint().get(3, 0), c(1.0, -2.0));
    }

    #[test]
    fn compose_matches_dense_product() {
        let a = SparseOperator::from_triplets(
            3,
            vec![(0, 1, c(1.0, 1.0)), (1, 2, c(2.0, 0.0)), (2, 0, c(0.0, 1.0))],
        );
        let b = SparseOperator::from_triplets(
            3,
            vec![(1, 1, c(3.0, 0.0)), (2, 0, c(1.0, -1.0)), (0, 2, c(0.5, 0.0))],
        );
        let dense = a.to_dense() * b.to_dense();
        let prod = a.compose(&b).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                assert!((prod.get(r, col) - dense[(r, col)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn compose_dimension_mismatch_is_reported() {
        let a = SparseOperator::identity(2);
        let b = SparseOperator::identity(3);
        assert!(matches!(
            a.compose(&b),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn kron_indices_are_left_major() {
        let a = SparseOperator::from_triplets(2, vec![(0, 1, c(2.0, 0.0))]);
        let b = SparseOperator::from_triplets(3, vec![(2, 0, c(0.0, 1.0))]);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        assert_eq!(k.get(2, 3), c(0.0, 2.0));
        assert_eq!(k.nnz(), 1);
    }

    #[test]
    fn trace_product_agrees_with_composed_trace() {
        let a = SparseOperator::from_triplets(
            3,
            vec![(0, 1, c(1.0, 2.0)), (1, 0, c(1.0, -2.0)), (2, 2, c(3.0, 0.0))],
        );
        let b = SparseOperator::from_triplets(
            3,
            vec![(0, 0, c(1.0, 0.0)), (1, 0, c(0.0, 1.0)), (0, 1, c(0.0, -1.0))],
        );
        let direct = a.compose(&b).unwrap().trace();
        let lazy = a.trace_product(&b).unwrap();
        assert!((direct - lazy).norm() < 1e-15);
    }
}
