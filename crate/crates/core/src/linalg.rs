//! Diagonally pivoted Cholesky factorization for small dense symmetric
//! positive (semi)definite systems.

/// Factorization stops when the next pivot falls below this fraction of
/// the first (largest) pivot.
pub const PIVOT_RATIO: f64 = 1e-10;

/// `P A P^T = L L^T`, where row `k` of `P A P^T` is row `perm[k]` of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotedCholesky {
    dim: usize,
    perm: Vec<usize>,
    // row-major lower triangle, dim x dim
    lower: Vec<f64>,
}

/// Indices (into the original matrix) that were left unpivoted when the
/// factorization broke down.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDeficient {
    pub rank: usize,
    pub dependent: Vec<usize>,
}

impl PivotedCholesky {
    /// Factors the row-major symmetric `dim x dim` matrix `a`. Only values
    /// on and below the diagonal are read.
    pub fn new(a: &[f64], dim: usize) -> Result<Self, RankDeficient> {
        assert_eq!(a.len(), dim * dim, "matrix buffer has wrong size");
        let mut work = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                work[i * dim + j] = a[i * dim + j];
                work[j * dim + i] = a[i * dim + j];
            }
        }
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut lower = vec![0.0; dim * dim];
        let mut largest = 0.0f64;

        for k in 0..dim {
            let (p, pivot) = (k..dim).map(|i| (i, work[i * dim + i])).fold(
                (k, f64::NEG_INFINITY),
                |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                },
            );
            if k == 0 {
                largest = pivot;
            }
            if pivot.is_nan() || pivot <= 0.0 || pivot < PIVOT_RATIO * largest {
                return Err(RankDeficient {
                    rank: k,
                    dependent: perm[k..].to_vec(),
                });
            }
            if p != k {
                perm.swap(k, p);
                for c in 0..dim {
                    work.swap(k * dim + c, p * dim + c);
                }
                for r in 0..dim {
                    work.swap(r * dim + k, r * dim + p);
                }
                for c in 0..k {
                    lower.swap(k * dim + c, p * dim + c);
                }
            }
            let d = pivot.sqrt();
            lower[k * dim + k] = d;
            for i in k + 1..dim {
                lower[i * dim + k] = work[i * dim + k] / d;
            }
            for i in k + 1..dim {
                let lik = lower[i * dim + k];
                for j in k + 1..=i {
                    let v = work[i * dim + j] - lik * lower[j * dim + k];
                    work[i * dim + j] = v;
                    work[j * dim + i] = v;
                }
            }
        }
        Ok(Self { dim, perm, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Pivots `d_k = L_kk^2` in factorization order.
    pub fn pivots(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim).map(|k| self.lower[k * self.dim + k].powi(2))
    }

    /// Solves `L w = P b`.
    pub fn whiten(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut w: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for k in 0..n {
            let row = &self.lower[k * n..k * n + k];
            let v = w[k] - row.iter().zip(&w[..k]).map(|(l, x)| l * x).sum::<f64>();
            w[k] = v / self.lower[k * n + k];
        }
        w
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut w = self.whiten(b);
        for k in (0..n).rev() {
            let v = w[k]
                - (k + 1..n)
                    .map(|r| self.lower[r * n + k] * w[r])
                    .sum::<f64>();
            w[k] = v / self.lower[k * n + k];
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = w[k];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
            .collect()
    }

    #[test]
    fn solves_spd_system() {
        let a = [4.0, 1.0, 0.5, 1.0, 9.0, -2.0, 0.5, -2.0, 3.0];
        let b = [1.0, -2.0, 0.25];
        let f = PivotedCholesky::new(&a, 3).unwrap();
        let x = f.solve(&b);
        for (got, want) in matvec(&a, &x).iter().zip(b) {
            assert!((got - want).abs() < 1e-13);
        }
        let pivots: Vec<f64> = f.pivots().collect();
        assert!(pivots.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn whitening_gives_inverse_quadratic_form() {
        let a = [2.0, 0.3, 0.3, 1.0];
        let f = PivotedCholesky::new(&a, 2).unwrap();
        let b = [1.0, 2.0];
        let w = f.whiten(&b);
        let x = f.solve(&b);
        let quad_w: f64 = w.iter().map(|v| v * v).sum();
        let quad_x: f64 = b.iter().zip(&x).map(|(p, q)| p * q).sum();
        assert!((quad_w - quad_x).abs() < 1e-13);
    }

    #[test]
    fn reports_dependent_columns() {
        // Column 2 = column 0 + column 1 in the generating vectors.
        let v = [
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
            [1.0, 1.0, 2.0],
            [2.0, 0.0, 2.0],
        ];
        let mut a = [0.0; 9];
        for row in &v {
            for i in 0..3 {
                for j in 0..3 {
                    a[i * 3 + j] += row[i] * row[j];
                }
            }
        }
        let err = PivotedCholesky::new(&a, 3).unwrap_err();
        assert_eq!(err.rank, 2);
        assert_eq!(err.dependent.len(), 1);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert!(PivotedCholesky::new(&a, 2).is_err());
        let a = [-1.0, 0.0, 0.0, -2.0];
        assert!(PivotedCholesky::new(&a, 2).is_err());
    }
}
