//! Dense matrices over an arbitrary [`Scalar`] field with Gaussian-elimination
//! rank and solve. Exact ranks over F_p back all "almost surely" claims;
//! `f64` matrices additionally get an SVD rank for conditioning diagnostics.

use rand::Rng;

use crate::field::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

/// Result of [`Matrix::solve`].
#[derive(Clone, Debug)]
pub struct SolveOutcome<F> {
    /// Rank of the coefficient matrix.
    pub rank: usize,
    /// Whether the augmented system is consistent.
    pub consistent: bool,
    /// The unique solution, present iff `rank == cols` and the system is
    /// consistent.
    pub solution: Option<Vec<F>>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| F::sample(rng))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copy `block` into `self` with its top-left entry at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix<F>) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols,
                "block out of bounds");
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
    }

    pub fn matmul(&self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let src = k * rhs.cols;
                let dst = i * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[dst + j] = out.data[dst + j] + a * rhs.data[src + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    acc = acc + *a * *b;
                }
                acc
            })
            .collect()
    }

    /// Exact rank by row reduction.
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        reduce_in_place(&mut m, self.rows, self.cols)
    }

    /// Solve `self * x = rhs` by elimination on the augmented matrix.
    pub fn solve(&self, rhs: &[F]) -> SolveOutcome<F> {
        assert_eq!(rhs.len(), self.rows);
        let (rows, cols) = (self.rows, self.cols);
        let acols = cols + 1;
        let mut aug = Vec::with_capacity(rows * acols);
        for r in 0..rows {
            aug.extend_from_slice(self.row(r));
            aug.push(rhs[r]);
        }
        let mut pivot_cols = Vec::new();
        let mut rank = 0usize;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| !aug[r * acols + col].is_zero()) else {
                continue;
            };
            if p != rank {
                for j in col..acols {
                    aug.swap(p * acols + j, rank * acols + j);
                }
            }
            let inv = aug[rank * acols + col].inv().expect("nonzero pivot");
            for j in col..acols {
                aug[rank * acols + j] = aug[rank * acols + j] * inv;
            }
            for r in 0..rows {
                if r == rank {
                    continue;
                }
                let f = aug[r * acols + col];
                if f.is_zero() {
                    continue;
                }
                for j in col..acols {
                    let sub = f * aug[rank * acols + j];
                    aug[r * acols + j] = aug[r * acols + j] - sub;
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        let consistent = (rank..rows).all(|r| aug[r * acols + cols].is_zero());
        let solution = if consistent && rank == cols {
            // Reduced row-echelon with full column rank: pivot row i solves x_i.
            Some((0..cols).map(|i| aug[i * acols + cols]).collect())
        } else {
            None
        };
        SolveOutcome { rank, consistent, solution }
    }
}

impl<F> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (r, c): (usize, usize)) -> &F {
        &self.data[r * self.cols + c]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut F {
        &mut self.data[r * self.cols + c]
    }
}

fn reduce_in_place<F: Scalar>(m: &mut [F], rows: usize, cols: usize) -> usize {
    let mut rank = 0usize;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r * cols + col].is_zero()) else {
            continue;
        };
        if p != rank {
            let (a, b) = if p < rank { (p, rank) } else { (rank, p) };
            let (head, tail) = m.split_at_mut(b * cols);
            head[a * cols + col..a * cols + cols].swap_with_slice(&mut tail[col..cols]);
        }
        let inv = m[rank * cols + col].inv().expect("nonzero pivot");
        for j in col..cols {
            m[rank * cols + j] = m[rank * cols + j] * inv;
        }
        // Eliminate below only; rank needs echelon form, not RREF.
        let (pivot_rows, below) = m.split_at_mut((rank + 1) * cols);
        let prow = &pivot_rows[rank * cols..];
        for r in 0..rows - rank - 1 {
            let row = &mut below[r * cols..(r + 1) * cols];
            let f = row[col];
            if f.is_zero() {
                continue;
            }
            for j in col..cols {
                let sub = f * prow[j];
                row[j] = row[j] - sub;
            }
        }
        rank += 1;
    }
    rank
}

/// Numerical rank of a float matrix via SVD with tolerance
/// `max(rows, cols) * eps * sigma_max`.
pub fn svd_rank(m: &Matrix<f64>) -> usize {
    let dm = nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)]);
    let svd = dm.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = m.rows().max(m.cols()) as f64 * f64::EPSILON * smax;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fp(v: u64) -> Fp {
        Fp::new(v)
    }

    #[test]
    fn rank_of_known_matrices() {
        let id: Matrix<Fp> = Matrix::identity(4);
        assert_eq!(id.rank(), 4);
        let z: Matrix<Fp> = Matrix::zeros(3, 5);
        assert_eq!(z.rank(), 0);
        // Rank-1 outer product.
        let m = Matrix::from_fn(3, 3, |r, c| fp(((r + 1) * (c + 2)) as u64));
        assert_eq!(m.rank(), 1);
        // Two independent rows plus their sum.
        let m = Matrix::from_fn(3, 3, |r, c| match r {
            0 => fp([1, 2, 3][c]),
            1 => fp([4, 5, 6][c]),
            _ => fp([5, 7, 9][c]),
        });
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn random_square_matrices_have_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [1, 2, 5, 17, 40] {
            let m: Matrix<Fp> = Matrix::random(n, n, &mut rng);
            assert_eq!(m.rank(), n);
        }
    }

    #[test]
    fn solve_recovers_known_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (rows, cols) in [(4, 4), (7, 4), (12, 9)] {
            let a: Matrix<Fp> = Matrix::random(rows, cols, &mut rng);
            let x: Vec<Fp> = (0..cols).map(|_| crate::field::Scalar::sample(&mut rng)).collect();
            let b = a.mul_vec(&x);
            let out = a.solve(&b);
            assert!(out.consistent);
            assert_eq!(out.rank, cols);
            assert_eq!(out.solution.unwrap(), x);
        }
    }

    #[test]
    fn solve_detects_inconsistency_and_deficiency() {
        // x + y = 1 and x + y = 2 is inconsistent.
        let a = Matrix::from_fn(2, 2, |_, _| fp(1));
        let out = a.solve(&[fp(1), fp(2)]);
        assert!(!out.consistent);
        assert!(out.solution.is_none());
        // Underdetermined: consistent but no unique solution.
        let a = Matrix::from_fn(1, 2, |_, c| fp(c as u64 + 1));
        let out = a.solve(&[fp(3)]);
        assert!(out.consistent);
        assert_eq!(out.rank, 1);
        assert!(out.solution.is_none());
    }

    #[test]
    fn product_rank_is_min_for_random_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Matrix<Fp> = Matrix::random(6, 3, &mut rng);
        let b: Matrix<Fp> = Matrix::random(3, 8, &mut rng);
        assert_eq!(a.matmul(&b).rank(), 3);
    }

    #[test]
    fn svd_rank_matches_exact_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Matrix<f64> = Matrix::random(8, 3, &mut rng);
        let b: Matrix<f64> = Matrix::random(3, 6, &mut rng);
        assert_eq!(svd_rank(&a.matmul(&b)), 3);
        let id: Matrix<f64> = Matrix::identity(5);
        assert_eq!(svd_rank(&id), 5);
    }
}
