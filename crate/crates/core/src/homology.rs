//! Incidence matrices, Hodge Laplacians, Betti numbers, Euler characteristic.
//!
//! Two independent Betti paths are kept side by side: the authoritative one
//! computes exact integer ranks of the boundary matrices by fraction-free
//! elimination (no tolerances), and the spectral one counts near-zero
//! eigenvalues of the Hodge Laplacians. They are cross-checked in tests and
//! the Euler characteristic is asserted both ways on every snapshot.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::complex::{Simplex, SimplicialComplex};

/// Relative eigenvalue tolerance for the spectral kernel count.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error("boundary order {k} out of range 1..={d}")]
    OrderOutOfRange { k: usize, d: usize },
    #[error("symmetric eigensolver failed to converge for L_{k}")]
    EigenFailure { k: usize },
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

/// Oriented incidence matrix B_k (rows: (k−1)-simplices, columns: k-simplices).
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    pub k: usize,
    pub matrix: DMatrix<i64>,
    pub rows: Vec<Simplex>,
    pub cols: Vec<Simplex>,
}

/// L_k with its up and down components, exact integer entries.
#[derive(Debug, Clone)]
pub struct HodgeLaplacian {
    pub k: usize,
    pub matrix: DMatrix<i64>,
    pub up: DMatrix<i64>,
    pub down: DMatrix<i64>,
}

/// Topological state of a complex at one evolution step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologySnapshot {
    pub step: usize,
    pub simplex_counts: Vec<usize>,
    pub betti: Vec<usize>,
    pub euler: i64,
}

/// Build B_k: entry (α′, α) is (−1)^p when α′ is α with its p-th vertex
/// (ascending order) removed, 0 otherwise. Every column has exactly k+1
/// nonzeros.
pub fn boundary_matrix(c: &SimplicialComplex, k: usize) -> Result<BoundaryMatrix, HomologyError> {
    let d = c.dimension().map_or(0, |d| d);
    if k < 1 || k > d {
        return Err(HomologyError::OrderOutOfRange { k, d });
    }
    let rows: Vec<Simplex> = c.simplices(k - 1).cloned().collect();
    let cols: Vec<Simplex> = c.simplices(k).cloned().collect();
    let mut matrix = DMatrix::<i64>::zeros(rows.len(), cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (p, face) in col.faces().into_iter().enumerate() {
            let i = c
                .index_of(&face)
                .expect("closure guarantees every face is stored");
            matrix[(i, j)] = if p % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(BoundaryMatrix {
        k,
        matrix,
        rows,
        cols,
    })
}

/// L_k = B_kᵀ B_k + B_{k+1} B_{k+1}ᵀ with B_0 and B_{d+1} empty.
pub fn hodge_laplacian(c: &SimplicialComplex, k: usize) -> Result<HodgeLaplacian, HomologyError> {
    let d = c
        .dimension()
        .ok_or(HomologyError::OrderOutOfRange { k, d: 0 })?;
    if k > d {
        return Err(HomologyError::OrderOutOfRange { k, d });
    }
    let n = c.count(k);
    let down = if k >= 1 {
        let b = boundary_matrix(c, k)?.matrix;
        b.transpose() * &b
    } else {
        DMatrix::zeros(n, n)
    };
    let up = if k < d {
        let b = boundary_matrix(c, k + 1)?.matrix;
        &b * b.transpose()
    } else {
        DMatrix::zeros(n, n)
    };
    let matrix = &down + &up;
    debug_assert_eq!(matrix, matrix.transpose());
    Ok(HodgeLaplacian {
        k,
        matrix,
        up,
        down,
    })
}

/// Exact rank over the rationals via fraction-free (Bareiss) elimination.
/// Entries are kept in i128 while they fit and fall back to arbitrary
/// precision on overflow, so the result is exact with no tolerance.
pub fn rank_exact(m: &DMatrix<i64>) -> usize {
    rank_bareiss_i128(m).unwrap_or_else(|| rank_bareiss_bigint(m))
}

fn rank_bareiss_i128(m: &DMatrix<i64>) -> Option<usize> {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..cols).map(|j| i128::from(m[(i, j)])).collect())
        .collect();
    let mut prev: i128 = 1;
    let mut r = 0;
    while r < rows && r < cols {
        // smallest nonzero pivot in the trailing block keeps growth down
        let mut pivot: Option<(usize, usize)> = None;
        for i in r..rows {
            for j in r..cols {
                if a[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(r, pi);
        if pj != r {
            for row in a.iter_mut() {
                row.swap(r, pj);
            }
        }
        let piv = a[r][r];
        for i in r + 1..rows {
            for j in r + 1..cols {
                let num = a[i][j]
                    .checked_mul(piv)?
                    .checked_sub(a[i][r].checked_mul(a[r][j])?)?;
                a[i][j] = num / prev; // exact by the Bareiss identity
            }
            a[i][r] = 0;
        }
        prev = piv;
        r += 1;
    }
    Some(r)
}

fn rank_bareiss_bigint(m: &DMatrix<i64>) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| (0..cols).map(|j| BigInt::from(m[(i, j)])).collect())
        .collect();
    let mut prev = BigInt::from(1);
    let mut r = 0;
    while r < rows && r < cols {
        let mut pivot: Option<(usize, usize)> = None;
        for i in r..rows {
            for j in r..cols {
                if !a[i][j].is_zero()
                    && pivot
                        .as_ref()
                        .is_none_or(|&(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(r, pi);
        if pj != r {
            for row in a.iter_mut() {
                row.swap(r, pj);
            }
        }
        for i in r + 1..rows {
            for j in r + 1..cols {
                let num = &a[i][j] * &a[r][r] - &a[i][r] * &a[r][j];
                a[i][j] = num / &prev;
            }
            a[i][r] = BigInt::zero();
        }
        prev = a[r][r].clone();
        r += 1;
    }
    r
}

/// Betti numbers by exact boundary ranks: β_k = N_k − rank B_k − rank B_{k+1}.
pub fn betti_exact(c: &SimplicialComplex) -> Vec<usize> {
    let counts = c.simplex_counts();
    if counts.is_empty() {
        return Vec::new();
    }
    let d = counts.len() - 1;
    let mut ranks = vec![0usize; d + 2]; // rank B_0 = rank B_{d+1} = 0
    for k in 1..=d {
        ranks[k] = rank_exact(&boundary_matrix(c, k).expect("k in range").matrix);
    }
    (0..=d)
        .map(|k| {
            let b = counts[k] as i64 - ranks[k] as i64 - ranks[k + 1] as i64;
            debug_assert!(b >= 0, "negative Betti number at order {k}");
            b.max(0) as usize
        })
        .collect()
}

/// Betti numbers as zero-eigenvalue multiplicities of the Hodge Laplacians,
/// with `tol` relative to the largest eigenvalue of each L_k.
pub fn betti_spectral(c: &SimplicialComplex, tol: f64) -> Result<Vec<usize>, HomologyError> {
    debug_assert!(tol > 0.0);
    let Some(d) = c.dimension() else {
        return Ok(Vec::new());
    };
    let mut betti = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let l = hodge_laplacian(c, k)?;
        let lf = l.matrix.map(|x| x as f64);
        let eigen = lf
            .symmetric_eigen_try(1e-13, 100_000)
            .ok_or(HomologyError::EigenFailure { k })?;
        let lambda_max = eigen.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let kernel = if lambda_max <= 0.0 {
            // zero operator: the whole space is kernel
            eigen.eigenvalues.len()
        } else {
            let threshold = tol * lambda_max;
            eigen
                .eigenvalues
                .iter()
                .filter(|&&lambda| lambda <= threshold)
                .count()
        };
        betti.push(kernel);
    }
    Ok(betti)
}

trait SymmetricEigenTry {
    fn symmetric_eigen_try(self, eps: f64, max_niter: usize) -> Option<nalgebra::SymmetricEigen<f64, nalgebra::Dyn>>;
}

impl SymmetricEigenTry for DMatrix<f64> {
    fn symmetric_eigen_try(
        self,
        eps: f64,
        max_niter: usize,
    ) -> Option<nalgebra::SymmetricEigen<f64, nalgebra::Dyn>> {
        if self.nrows() == 0 {
            // nalgebra's eigensolver rejects empty matrices; the kernel of a
            // 0×0 operator is empty anyway
            return Some(nalgebra::SymmetricEigen {
                eigenvectors: DMatrix::zeros(0, 0),
                eigenvalues: nalgebra::DVector::zeros(0),
            });
        }
        nalgebra::SymmetricEigen::try_new(self, eps, max_niter)
    }
}

/// χ from Betti numbers, asserting the Euler–Poincaré identity against the
/// alternating sum of simplex counts. A mismatch is a bug, not a data error.
pub fn euler_characteristic(counts: &[usize], betti: &[usize]) -> Result<i64, HomologyError> {
    let alt = |v: &[usize]| -> i64 {
        v.iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    };
    let from_counts = alt(counts);
    let from_betti = alt(betti);
    if from_counts != from_betti {
        return Err(HomologyError::Consistency(format!(
            "Euler–Poincaré violated: Σ(−1)^k N_k = {from_counts} but Σ(−1)^k β_k = {from_betti}"
        )));
    }
    Ok(from_betti)
}

/// Exact algebraic identities: B_k B_{k+1} = 0 and the vanishing products
/// L_k^up L_k^down = L_k^down L_k^up = 0, all in integer arithmetic.
pub fn verify_identities(c: &SimplicialComplex) -> Result<(), HomologyError> {
    let Some(d) = c.dimension() else {
        return Ok(());
    };
    for k in 1..d {
        let b_k = boundary_matrix(c, k)?.matrix;
        let b_next = boundary_matrix(c, k + 1)?.matrix;
        if !(&b_k * &b_next).iter().all(|&x| x == 0) {
            return Err(HomologyError::Consistency(format!(
                "B_{k} B_{} has a nonzero entry",
                k + 1
            )));
        }
    }
    for k in 1..d {
        // both components are nonzero only for interior orders
        let l = hodge_laplacian(c, k)?;
        if !(&l.up * &l.down).iter().all(|&x| x == 0) {
            return Err(HomologyError::Consistency(format!(
                "L_{k}^up L_{k}^down has a nonzero entry"
            )));
        }
        if !(&l.down * &l.up).iter().all(|&x| x == 0) {
            return Err(HomologyError::Consistency(format!(
                "L_{k}^down L_{k}^up has a nonzero entry"
            )));
        }
    }
    Ok(())
}

impl TopologySnapshot {
    /// Exact-path snapshot with all identity checks; any failure here must
    /// abort the run.
    pub fn compute(c: &SimplicialComplex, step: usize) -> Result<Self, HomologyError> {
        verify_identities(c)?;
        let simplex_counts = c.simplex_counts();
        let betti = betti_exact(c);
        let euler = euler_characteristic(&simplex_counts, &betti)?;
        Ok(TopologySnapshot {
            step,
            simplex_counts,
            betti,
            euler,
        })
    }
}

/// Boundary matrix as labeled CSV for external verification.
pub fn boundary_matrix_csv(b: &BoundaryMatrix) -> String {
    let mut out = String::from("simplex");
    for col in &b.cols {
        out.push(',');
        out.push_str(&col.label());
    }
    out.push('\n');
    for (i, row) in b.rows.iter().enumerate() {
        out.push_str(&row.label());
        for j in 0..b.cols.len() {
            out.push(',');
            out.push_str(&b.matrix[(i, j)].to_string());
        }
        out.push('\n');
    }
    out
}
