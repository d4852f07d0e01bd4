//! Small dense matrices over a finite field.
//!
//! Everything here is at most 10x6, so matrices are plain row-major `Vec`s
//! and elimination is textbook Gauss-Jordan. Pivots are always the first
//! nonzero entry reading down a column, which keeps elimination traces
//! reproducible.

use std::fmt;

use crate::error::{Error, Result};
use crate::galois::FieldSpec;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Mat {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        for &v in &data {
            field.check(v)?;
        }
        Ok(Mat {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows<const C: usize>(field: FieldSpec, rows: &[[u8; C]]) -> Result<Self> {
        let data = rows.iter().flatten().copied().collect();
        Mat::new(field, rows.len(), C, data)
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Mat {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        debug_assert!(self.field.contains(v));
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    fn check_same_shape(&self, other: &Mat, op: &str) -> Result<()> {
        self.check_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn check_field(&self, other: &Mat) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.order(),
                right: other.field.order(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.check_same_shape(other, "add")?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(self.with_data(data))
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.check_same_shape(other, "subtract")?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(self.with_data(data))
    }

    pub fn scale(&self, s: u8) -> Mat {
        let f = self.field;
        self.with_data(self.data.iter().map(|&a| f.mul(s, a)).collect())
    }

    fn with_data(&self, data: Vec<u8>) -> Mat {
        Mat {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0u8;
                for k in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(r, k), other.get(k, c)));
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    /// Row vector times matrix, `vᵀ·self`.
    pub fn left_mul_vec(&self, v: Vec2) -> Result<Vec2> {
        if self.rows != 2 || self.cols != 2 {
            return Err(Error::Dimension(format!(
                "expected a 2x2 matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let f = self.field;
        let x = v.0;
        Ok(Vec2([
            f.add(f.mul(x[0], self.get(0, 0)), f.mul(x[1], self.get(1, 0))),
            f.add(f.mul(x[0], self.get(0, 1)), f.mul(x[1], self.get(1, 1))),
        ]))
    }

    /// Matrix times column vector, `self·v`.
    pub fn mul_vec(&self, v: Vec2) -> Result<Vec2> {
        self.transpose().left_mul_vec(v)
    }

    /// Reduced row echelon form and the pivot columns.
    fn rref(&self) -> (Mat, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for c in 0..m.cols {
                let v = f.mul(inv, m.get(row, c));
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                let factor = m.get(r, col);
                if r != row && factor != 0 {
                    for c in 0..m.cols {
                        let v = f.sub(m.get(r, c), f.mul(factor, m.get(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det2(&self) -> Result<u8> {
        self.require_2x2()?;
        let f = self.field;
        Ok(f.sub(f.mul(self.get(0, 0), self.get(1, 1)), f.mul(self.get(0, 1), self.get(1, 0))))
    }

    fn require_2x2(&self) -> Result<()> {
        if self.rows != 2 || self.cols != 2 {
            return Err(Error::Dimension(format!(
                "expected a 2x2 matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Inverse of a 2x2 matrix via its adjugate.
    pub fn inv2(&self) -> Result<Mat> {
        let det = self.det2()?;
        if det == 0 {
            return Err(Error::Singular);
        }
        let f = self.field;
        let d = f.inv(det)?;
        let (a, b, c, e) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
        Mat::new(
            f,
            2,
            2,
            vec![f.mul(d, e), f.mul(d, f.neg(b)), f.mul(d, f.neg(c)), f.mul(d, a)],
        )
    }

    /// Inverse of a square matrix by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(self.field, n))?;
        let (reduced, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        reduced.block(0, n, n, n)
    }

    /// A nonzero ω with `self·ω = 0`, for a 2x2 matrix of rank 1.
    ///
    /// With (c, d) the first nonzero row, ω = c·e2 − d·e1 = [−d, c].
    pub fn null_vec2(&self) -> Result<Vec2> {
        self.require_2x2()?;
        let rank = self.rank();
        if rank != 1 {
            return Err(Error::NotRankOne(rank));
        }
        let r = if self.row(0).iter().any(|&v| v != 0) { 0 } else { 1 };
        let (c, d) = (self.get(r, 0), self.get(r, 1));
        Ok(Vec2([self.field.neg(d), c]))
    }

    /// Sub-matrix of `h` rows and `w` columns starting at (`r0`, `c0`).
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Result<Mat> {
        if r0 + h > self.rows || c0 + w > self.cols {
            return Err(Error::Dimension(format!(
                "block {h}x{w} at ({r0},{c0}) exceeds {}x{}",
                self.rows, self.cols
            )));
        }
        let mut out = Mat::zeros(self.field, h, w);
        for r in 0..h {
            for c in 0..w {
                out.set(r, c, self.get(r0 + r, c0 + c));
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, below: &Mat) -> Result<Mat> {
        self.check_field(below)?;
        if self.cols != below.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns over {}",
                self.cols, below.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(Mat {
            field: self.field,
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn hstack(&self, right: &Mat) -> Result<Mat> {
        self.check_field(right)?;
        if self.rows != right.rows {
            return Err(Error::Dimension(format!(
                "cannot place {} rows beside {}",
                self.rows, right.rows
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + right.data.len());
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(right.row(r));
        }
        Ok(Mat {
            field: self.field,
            rows: self.rows,
            cols: self.cols + right.cols,
            data,
        })
    }

    /// Assembles a matrix from a grid of blocks; `None` is a zero block.
    /// Each block row must have a common height and each block column a
    /// common width.
    pub fn from_blocks(field: FieldSpec, grid: &[Vec<Option<&Mat>>]) -> Result<Mat> {
        let heights: Vec<usize> = grid
            .iter()
            .map(|row| row.iter().flatten().map(|m| m.rows).next().unwrap_or(0))
            .collect();
        let ncols = grid.first().map_or(0, Vec::len);
        let widths: Vec<usize> = (0..ncols)
            .map(|c| {
                grid.iter()
                    .filter_map(|row| row.get(c).copied().flatten())
                    .map(|m| m.cols)
                    .next()
                    .unwrap_or(0)
            })
            .collect();
        let mut out: Option<Mat> = None;
        for (r, row) in grid.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Dimension("ragged block grid".into()));
            }
            let mut line: Option<Mat> = None;
            for (c, cell) in row.iter().enumerate() {
                let piece = match cell {
                    Some(m) => {
                        if m.rows != heights[r] || m.cols != widths[c] {
                            return Err(Error::Dimension(format!(
                                "block ({r},{c}) is {}x{}, expected {}x{}",
                                m.rows, m.cols, heights[r], widths[c]
                            )));
                        }
                        (*m).clone()
                    }
                    None => Mat::zeros(field, heights[r], widths[c]),
                };
                line = Some(match line {
                    None => piece,
                    Some(l) => l.hstack(&piece)?,
                });
            }
            let line = line.unwrap_or_else(|| Mat::zeros(field, heights[r], 0));
            out = Some(match out {
                None => line,
                Some(o) => o.vstack(&line)?,
            });
        }
        Ok(out.unwrap_or_else(|| Mat::zeros(field, 0, 0)))
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// A length-2 vector; used both as a column and, transposed, as a 1x2
/// download coefficient row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vec2(pub [u8; 2]);

impl Vec2 {
    pub const E1: Vec2 = Vec2([1, 0]);
    pub const E2: Vec2 = Vec2([0, 1]);

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0]
    }

    pub fn add(self, field: FieldSpec, other: Vec2) -> Vec2 {
        Vec2([field.add(self.0[0], other.0[0]), field.add(self.0[1], other.0[1])])
    }

    pub fn scale(self, field: FieldSpec, s: u8) -> Vec2 {
        Vec2([field.mul(s, self.0[0]), field.mul(s, self.0[1])])
    }

    pub fn dot(self, field: FieldSpec, other: Vec2) -> u8 {
        field.add(field.mul(self.0[0], other.0[0]), field.mul(self.0[1], other.0[1]))
    }

    /// Scaled so the first nonzero entry is 1. The zero vector is returned
    /// unchanged.
    pub fn normalized(self, field: FieldSpec) -> Vec2 {
        match self.0.iter().find(|&&v| v != 0) {
            Some(&lead) => self.scale(field, field.inv(lead).expect("nonzero")),
            None => self,
        }
    }

    /// `Some(c)` with `self = c·base`, when `base` is nonzero.
    pub fn ratio_to(self, field: FieldSpec, base: Vec2) -> Option<u8> {
        let idx = base.0.iter().position(|&v| v != 0)?;
        let c = field.div(self.0[idx], base.0[idx]).ok()?;
        (base.scale(field, c) == self).then_some(c)
    }

    pub fn to_row(self, field: FieldSpec) -> Mat {
        Mat {
            field,
            rows: 1,
            cols: 2,
            data: self.0.to_vec(),
        }
    }

    /// Stacks two row vectors into a 2x2 matrix.
    pub fn stack(field: FieldSpec, top: Vec2, bottom: Vec2) -> Mat {
        Mat {
            field,
            rows: 2,
            cols: 2,
            data: vec![top.0[0], top.0[1], bottom.0[0], bottom.0[1]],
        }
    }

    pub fn to_hex(self) -> String {
        format!("{:02x}{:02x}", self.0[0], self.0[1])
    }

    pub fn from_hex(s: &str) -> Result<Vec2> {
        if s.len() != 4 || !s.is_ascii() {
            return Err(Error::Parse(format!("expected 4 hex digits, got {s:?}")));
        }
        let a = u8::from_str_radix(&s[..2], 16).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let b = u8::from_str_radix(&s[2..], 16).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(Vec2([a, b]))
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.0[0], self.0[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: FieldSpec = FieldSpec::GF4;
    const W: u8 = 2;
    const W1: u8 = 3;

    fn m2(rows: [[u8; 2]; 2]) -> Mat {
        Mat::from_rows(F, &rows).unwrap()
    }

    #[test]
    fn multiply_examples() {
        let x = m2([[1, W], [W1, 0]]);
        assert_eq!(Mat::identity(F, 2).mul(&x).unwrap(), x);
        let a1 = m2([[W1, 0], [W, 1]]);
        assert_eq!(a1.mul(&a1.inv2().unwrap()).unwrap(), Mat::identity(F, 2));
        // e2ᵀ·A1ᵀ
        let row = Vec2::E2.to_row(F).mul(&a1.transpose()).unwrap();
        assert_eq!(row.entries(), &[0, 1]);
        assert_eq!(a1.transpose().left_mul_vec(Vec2::E2).unwrap(), Vec2([0, 1]));
        assert!(matches!(x.mul(&Mat::zeros(F, 3, 1)), Err(Error::Dimension(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Mat::identity(F, 2).rank(), 2);
        assert_eq!(Mat::zeros(F, 2, 2).rank(), 0);
        assert_eq!(m2([[W1, 0], [W, 1]]).rank(), 2);
        assert_eq!(m2([[W, W1], [W1, 1]]).rank(), 1);
        assert_eq!(Mat::identity(F, 6).rank(), 6);
    }

    #[test]
    fn inv2_examples() {
        assert_eq!(Mat::identity(F, 2).inv2().unwrap(), Mat::identity(F, 2));
        assert!(matches!(m2([[1, 1], [1, 1]]).inv2(), Err(Error::Singular)));
        assert_eq!(m2([[W1, 0], [W, 1]]).inv2().unwrap(), m2([[W, 0], [W1, 1]]));
        assert!(matches!(Mat::identity(F, 3).inv2(), Err(Error::Dimension(_))));
    }

    #[test]
    fn null_vec2_examples() {
        assert_eq!(m2([[1, 0], [0, 0]]).null_vec2().unwrap(), Vec2([0, 1]));
        let a = m2([[W, 0], [0, 0]]);
        let omega = a.null_vec2().unwrap();
        assert_eq!(omega, Vec2([0, W]));
        assert_eq!(a.mul_vec(omega).unwrap(), Vec2([0, 0]));
        assert!(matches!(Mat::identity(F, 2).null_vec2(), Err(Error::NotRankOne(2))));
        assert!(matches!(Mat::zeros(F, 2, 2).null_vec2(), Err(Error::NotRankOne(0))));
        // zero top row falls through to the bottom row
        assert_eq!(m2([[0, 0], [W, 1]]).null_vec2().unwrap(), Vec2([1, W]));
    }

    #[test]
    fn general_inverse_matches_adjugate() {
        let a = m2([[1, W], [W1, W]]);
        assert_eq!(a.inverse().unwrap(), a.inv2().unwrap());
        assert!(matches!(m2([[W, W1], [W1, 1]]).inverse(), Err(Error::Singular)));
    }

    #[test]
    fn block_assembly() {
        let i = Mat::identity(F, 2);
        let a = m2([[1, W], [W1, 0]]);
        let g = Mat::from_blocks(F, &[vec![Some(&i), None], vec![Some(&i), Some(&a)]]).unwrap();
        assert_eq!((g.rows(), g.cols()), (4, 4));
        assert_eq!(g.block(2, 2, 2, 2).unwrap(), a);
        assert!(g.block(0, 1, 2, 2).unwrap().row(0) == [0, 0]);
        assert!(g.block(3, 3, 2, 2).is_err());
    }

    #[test]
    fn vec2_helpers() {
        assert_eq!(Vec2([W, W]).normalized(F), Vec2([1, 1]));
        assert_eq!(Vec2([0, W1]).normalized(F), Vec2([0, 1]));
        assert_eq!(Vec2([W1, W1]).ratio_to(F, Vec2([1, 1])), Some(W1));
        assert_eq!(Vec2([W1, 1]).ratio_to(F, Vec2([1, 1])), None);
        assert_eq!(Vec2::from_hex("0302").unwrap(), Vec2([3, 2]));
        assert_eq!(Vec2([3, 2]).to_hex(), "0302");
        assert!(Vec2::from_hex("03g2").is_err());
    }

    fn arb_mat(rows: usize, cols: usize) -> impl Strategy<Value = Mat> {
        proptest::collection::vec(0u8..4, rows * cols)
            .prop_map(move |d| Mat::new(F, rows, cols, d).unwrap())
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(m in (1usize..7, 1usize..7).prop_flat_map(|(r, c)| arb_mat(r, c))) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn invertible_2x2_roundtrip(m in arb_mat(2, 2)) {
            if m.det2().unwrap() != 0 {
                prop_assert_eq!(m.mul(&m.inv2().unwrap()).unwrap(), Mat::identity(F, 2));
                prop_assert_eq!(m.inv2().unwrap().mul(&m).unwrap(), Mat::identity(F, 2));
            } else {
                prop_assert!(m.inv2().is_err());
            }
        }

        #[test]
        fn null_vector_is_in_kernel(m in arb_mat(2, 2)) {
            if m.rank() == 1 {
                let w = m.null_vec2().unwrap();
                prop_assert!(!w.is_zero());
                prop_assert_eq!(m.mul_vec(w).unwrap(), Vec2([0, 0]));
            }
        }

        #[test]
        fn inverse_roundtrip_6x6(m in arb_mat(6, 6)) {
            match m.inverse() {
                Ok(inv) => prop_assert_eq!(m.mul(&inv).unwrap(), Mat::identity(F, 6)),
                Err(_) => prop_assert!(m.rank() < 6),
            }
        }
    }
}
