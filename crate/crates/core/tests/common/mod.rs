//! Independent oracles shared by the integration tests: rational and mod-2
//! rank by Gaussian elimination, and Euler characteristics. These never call
//! into the Smith normal form code they are checking.

#![allow(dead_code)]

use asyntop::homology::HomologySignature;
use asyntop::scheme::SimplicialScheme;
use asyntop::snf::IntegerMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub fn rational_rank(matrix: &IntegerMatrix) -> usize {
    let mut rows: Vec<Vec<BigRational>> = (0..matrix.rows())
        .map(|i| {
            (0..matrix.cols())
                .map(|j| BigRational::from(matrix.get(i, j).clone()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..matrix.cols() {
        let Some(pivot) = (rank..matrix.rows()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = &row[col] / &pivot_row[col];
                for (entry, lead) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *entry -= lead * &factor;
                }
            }
        }
        rank += 1;
        if rank == matrix.rows() {
            break;
        }
    }
    rank
}

pub fn f2_rank(matrix: &IntegerMatrix) -> usize {
    let two = BigInt::from(2);
    let mut rows: Vec<Vec<bool>> = (0..matrix.rows())
        .map(|i| {
            (0..matrix.cols())
                .map(|j| !(matrix.get(i, j) % &two).is_zero())
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..matrix.cols() {
        let Some(pivot) = (rank..matrix.rows()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] {
                for (entry, lead) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *entry ^= *lead;
                }
            }
        }
        rank += 1;
        if rank == matrix.rows() {
            break;
        }
    }
    rank
}

/// Alternating sum of simplex counts over all degrees.
pub fn euler_characteristic(scheme: &SimplicialScheme) -> i64 {
    let Some(dimension) = scheme.dimension() else {
        return 0;
    };
    (0..=dimension)
        .map(|n| {
            let count = scheme.simplices_with_len(n + 1).len() as i64;
            if n % 2 == 0 {
                count
            } else {
                -count
            }
        })
        .sum()
}

/// Alternating sum of Betti numbers; equals the Euler characteristic.
pub fn betti_alternating_sum(signature: &HomologySignature) -> i64 {
    signature
        .groups()
        .iter()
        .enumerate()
        .map(|(n, group)| {
            let betti = group.betti as i64;
            if n % 2 == 0 {
                betti
            } else {
                -betti
            }
        })
        .sum()
}
