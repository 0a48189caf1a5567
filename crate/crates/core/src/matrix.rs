//! Dense matrices over GF(p): row reduction and linear solving.

use std::fmt;

use crate::error::{shape, Result};
use crate::field::PrimeField;

/// Row-major dense matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Output of [`Matrix::rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// A consistent linear system: one particular solution plus a basis of the
/// homogeneous solution space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub particular: Vec<u32>,
    pub nullspace: Vec<Vec<u32>>,
}

impl Solution {
    pub fn is_unique(&self) -> bool {
        self.nullspace.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Solution),
    NoSolution,
}

impl Matrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        field.check_word(&data)?;
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, size: usize) -> Self {
        let mut m = Matrix::zeros(field, size, size);
        for i in 0..size {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("ragged rows"));
        }
        Matrix::new(field, rows.len(), cols, rows.concat())
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    /// Row vector times matrix: `x * self`.
    pub fn left_mul(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.rows {
            return Err(shape(format!(
                "vector of length {} against {} rows",
                x.len(),
                self.rows
            )));
        }
        let f = self.field;
        let mut out = vec![0u32; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0 {
                continue;
            }
            for (o, &g) in out.iter_mut().zip(self.row(r)) {
                *o = f.mul_add(*o, xr, g);
            }
        }
        Ok(out)
    }

    /// Matrix times column vector: `self * v`.
    pub fn right_mul(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.mul_add(acc, a, b))
            })
            .collect())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            data.extend(other.left_mul(self.row(r))?);
        }
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Kronecker product; row `(a, b)` of the result is `a * other.rows + b`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let f = self.field;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(f, rows, cols);
        for a in 0..self.rows {
            for b in 0..other.rows {
                let r = a * other.rows + b;
                for c in 0..self.cols {
                    let s = self.get(a, c);
                    if s == 0 {
                        continue;
                    }
                    for d in 0..other.cols {
                        out.set(r, c * other.cols + d, f.mul(s, other.get(b, d)));
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    pub fn rref(&self) -> Rref {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            m.scale_row(r, inv);
            for i in 0..m.rows {
                if i != r {
                    let factor = m.get(i, c);
                    if factor != 0 {
                        m.axpy_row(i, r, f.neg(factor));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            matrix: m,
            rank: pivots.len(),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Solves `self * x = b`.
    pub fn solve(&self, b: &[u32]) -> Result<SolveOutcome> {
        if b.len() != self.rows {
            return Err(shape(format!(
                "right-hand side has length {}, matrix has {} rows",
                b.len(),
                self.rows
            )));
        }
        self.field.check_word(b)?;
        let f = self.field;
        let width = self.cols + 1;
        let mut aug = Matrix::zeros(f, self.rows, width);
        for (r, &rhs) in b.iter().enumerate() {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, rhs);
        }
        let red = aug.rref();
        if red.pivots.last() == Some(&self.cols) {
            return Ok(SolveOutcome::NoSolution);
        }
        let m = &red.matrix;
        let mut particular = vec![0u32; self.cols];
        for (r, &pc) in red.pivots.iter().enumerate() {
            particular[pc] = m.get(r, self.cols);
        }
        let mut is_pivot = vec![false; self.cols];
        for &pc in &red.pivots {
            is_pivot[pc] = true;
        }
        let nullspace = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![0u32; self.cols];
                v[free] = 1;
                for (r, &pc) in red.pivots.iter().enumerate() {
                    v[pc] = f.neg(m.get(r, free));
                }
                v
            })
            .collect();
        Ok(SolveOutcome::Solved(Solution {
            particular,
            nullspace,
        }))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: u32) {
        let f = self.field;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = f.mul(*v, s);
        }
    }

    // row[dst] += s * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, s: u32) {
        let f = self.field;
        for c in 0..self.cols {
            let v = f.mul_add(self.get(dst, c), s, self.get(src, c));
            self.set(dst, c, v);
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn mat(p: u32, rows: &[&[u32]]) -> Matrix {
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::from_rows(gf(p), &rows).unwrap()
    }

    #[test]
    fn rref_examples() {
        let a = mat(2, &[&[1, 0, 1], &[0, 1, 1]]);
        let r = a.rref();
        assert_eq!(r.matrix, a);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rank, 2);

        let r = mat(2, &[&[1, 1], &[1, 1]]).rref();
        assert_eq!(r.matrix, mat(2, &[&[1, 1], &[0, 0]]));
        assert_eq!(r.rank, 1);

        // det = 2*2 - 1*1 = 3 = 0 mod 3, so this one is singular.
        let r = mat(3, &[&[2, 1], &[1, 2]]).rref();
        assert_eq!(r.rank, 1);
        assert_eq!(r.matrix, mat(3, &[&[1, 2], &[0, 0]]));
    }

    #[test]
    fn solve_examples() {
        let id = Matrix::identity(gf(2), 2);
        match id.solve(&[1, 0]).unwrap() {
            SolveOutcome::Solved(s) => {
                assert_eq!(s.particular, vec![1, 0]);
                assert!(s.is_unique());
            }
            SolveOutcome::NoSolution => panic!(),
        }
        match mat(2, &[&[1, 1]]).solve(&[1]).unwrap() {
            SolveOutcome::Solved(s) => {
                assert_eq!(s.particular, vec![1, 0]);
                assert_eq!(s.nullspace, vec![vec![1, 1]]);
            }
            SolveOutcome::NoSolution => panic!(),
        }
        assert_eq!(
            mat(2, &[&[1, 0], &[1, 0]]).solve(&[0, 1]).unwrap(),
            SolveOutcome::NoSolution
        );
        assert!(id.solve(&[1]).is_err());
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = Matrix::identity(gf(3), 2);
        let i3 = Matrix::identity(gf(3), 3);
        assert_eq!(i2.kron(&i3), Matrix::identity(gf(3), 6));
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix> {
        (
            prop::sample::select(vec![2u32, 3, 5, 7]),
            1usize..6,
            1usize..6,
        )
            .prop_flat_map(|(p, r, c)| {
                prop::collection::vec(0..p, r * c)
                    .prop_map(move |d| Matrix::new(gf(p), r, c, d).unwrap())
            })
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(m in arb_matrix()) {
            let once = m.rref();
            let twice = once.matrix.rref();
            prop_assert_eq!(&once.matrix, &twice.matrix);
            prop_assert_eq!(once.rank, twice.rank);
            // Row space preserved: stacking does not increase the rank.
            let mut rows = m.row_vecs();
            rows.extend(once.matrix.row_vecs());
            prop_assert_eq!(Matrix::from_rows(m.field(), &rows).unwrap().rank(), once.rank);
        }

        #[test]
        fn solutions_satisfy_the_system(m in arb_matrix(), seed in any::<u64>()) {
            let p = m.field().modulus() as u64;
            let b: Vec<u32> = (0..m.rows())
                .map(|i| ((seed >> (i * 3)) % p) as u32)
                .collect();
            if let SolveOutcome::Solved(s) = m.solve(&b).unwrap() {
                prop_assert_eq!(m.right_mul(&s.particular).unwrap(), b.clone());
                for v in &s.nullspace {
                    prop_assert!(m.right_mul(v).unwrap().iter().all(|&x| x == 0));
                }
                prop_assert_eq!(s.nullspace.len(), m.cols() - m.rank());
            }
        }
    }
}
