//! Dense integer matrices and Smith normal form.
//!
//! Entries are arbitrary precision integers, so no boundary matrix or
//! intermediate elimination value can overflow. The reduction uses a
//! deterministic pivot rule (smallest nonzero absolute value, ties by row
//! then column), which pins down the intermediate matrices as well as the
//! invariant factors; callers rely on that for reproducible reports.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::fmt;

/// A dense rows x cols matrix over the integers, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    /// Builds a matrix from explicit rows, which must all have equal length.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        assert!(
            rows.iter().all(|r| r.len() == width),
            "all rows must have the same length"
        );
        Self {
            rows: height,
            cols: width,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Convenience constructor for literal matrices.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Matrix product; panics on a dimension mismatch.
    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(
            self.cols, other.rows,
            "dimension mismatch in matrix product"
        );
        let mut out = IntegerMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let left = self.get(i, k);
                if left.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = left * other.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row_i -= q * row_k
    fn row_sub_mul(&mut self, i: usize, k: usize, q: &BigInt) {
        for j in 0..self.cols {
            let delta = q * self.get(k, j);
            let value = self.get(i, j) - delta;
            self.set(i, j, value);
        }
    }

    /// col_j -= q * col_k
    fn col_sub_mul(&mut self, j: usize, k: usize, q: &BigInt) {
        for i in 0..self.rows {
            let delta = q * self.get(i, k);
            let value = self.get(i, j) - delta;
            self.set(i, j, value);
        }
    }

    /// row_dst += row_src
    fn row_add(&mut self, dst: usize, src: usize) {
        for j in 0..self.cols {
            let value = self.get(dst, j) + self.get(src, j);
            self.set(dst, j, value);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let value = -self.get(i, j);
            self.set(i, j, value);
        }
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Diagonal of the Smith normal form, padded with zeros to min(rows, cols).
/// The nonzero entries are the invariant factors and divide each other in
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    diagonal: Vec<BigInt>,
    rank: usize,
}

impl SmithForm {
    pub fn diagonal(&self) -> &[BigInt] {
        &self.diagonal
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The nonzero diagonal prefix.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.diagonal[..self.rank]
    }

    /// Invariant factors greater than one, i.e. the torsion coefficients of
    /// the cokernel.
    pub fn torsion_factors(&self) -> Vec<BigInt> {
        self.invariant_factors()
            .iter()
            .filter(|d| **d > BigInt::from(1))
            .cloned()
            .collect()
    }
}

impl fmt::Display for SmithForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagonal.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Reduces a copy of the matrix to Smith normal form by unimodular row and
/// column operations and returns its diagonal.
pub fn smith_normal_form(matrix: &IntegerMatrix) -> SmithForm {
    let mut a = matrix.clone();
    let rows = a.rows();
    let cols = a.cols();
    let limit = rows.min(cols);
    let mut k = 0;
    'outer: while k < limit {
        'restart: loop {
            let Some((pi, pj)) = select_pivot(&a, k) else {
                // remaining block is zero, diagonal is complete
                break 'outer;
            };
            a.swap_rows(k, pi);
            a.swap_cols(k, pj);
            // Clear the pivot column with Euclidean steps. A nonzero
            // remainder is strictly smaller than the pivot, so restarting
            // the pivot search makes progress.
            for i in (k + 1)..rows {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let q = a.get(i, k) / a.get(k, k);
                if !q.is_zero() {
                    a.row_sub_mul(i, k, &q);
                }
                if !a.get(i, k).is_zero() {
                    continue 'restart;
                }
            }
            // Same for the pivot row.
            for j in (k + 1)..cols {
                if a.get(k, j).is_zero() {
                    continue;
                }
                let q = a.get(k, j) / a.get(k, k);
                if !q.is_zero() {
                    a.col_sub_mul(j, k, &q);
                }
                if !a.get(k, j).is_zero() {
                    continue 'restart;
                }
            }
            // The invariant factors must divide each other, so the pivot
            // has to divide everything left below it. Pulling an offending
            // row up creates a remainder for the next round.
            let pivot = a.get(k, k).clone();
            for i in (k + 1)..rows {
                for j in (k + 1)..cols {
                    if !(a.get(i, j) % &pivot).is_zero() {
                        a.row_add(k, i);
                        continue 'restart;
                    }
                }
            }
            break 'restart;
        }
        if a.get(k, k).is_negative() {
            a.negate_row(k);
        }
        k += 1;
    }
    let diagonal: Vec<BigInt> = (0..limit).map(|i| a.get(i, i).clone()).collect();
    let rank = diagonal.iter().filter(|d| !d.is_zero()).count();
    SmithForm { diagonal, rank }
}

/// Smallest nonzero entry by absolute value in the trailing block starting
/// at (k, k); ties resolved by row, then column.
fn select_pivot(a: &IntegerMatrix, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in k..a.rows() {
        for j in k..a.cols() {
            let value = a.get(i, j);
            if value.is_zero() {
                continue;
            }
            let abs = value.abs();
            match &best {
                Some((min, _, _)) if *min <= abs => {}
                _ => best = Some((abs, i, j)),
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}
