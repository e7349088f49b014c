//! Alias matrices and contamination patterns for the linear-effect model.
//!
//! The OLS alias matrix is `A = (Z_1^T Z_1)^-1 Z_1^T Z`, obtained by
//! solving the `m x m` system rather than assuming `Z_1^T Z_1 = nI`, so
//! designs of any strength can be diagnosed. `lambda = tr(A^T A)`.

use serde::Serialize;

use crate::basis::DesignBases;
use crate::contrast::{dot, ContrastMatrix, Selection};
use crate::design::{Design, ExponentTuple};
use crate::error::{Error, Result};
use crate::indicator::SplitGrid;
use crate::linalg::PivotedCholesky;

/// Row-major `m x c` alias matrix; row `j` is the linear effect of factor `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasMatrix {
    selection: Selection,
    rows: usize,
    tuples: Vec<ExponentTuple>,
    data: Vec<f64>,
}

impl AliasMatrix {
    pub fn selection(&self) -> Selection {
        self.selection
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[ExponentTuple] {
        &self.tuples
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    /// `tr(A^T A)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// The fitted linear-effect model of one design: `Z_1` and the factored
/// information matrix, reused for every alias class.
#[derive(Debug, Clone)]
pub struct LinearModel<'a> {
    design: &'a Design,
    bases: DesignBases,
    z1: ContrastMatrix,
    info: PivotedCholesky,
}

impl<'a> LinearModel<'a> {
    pub fn new(design: &'a Design) -> Result<Self> {
        let bases = DesignBases::for_design(design)?;
        let z1 = ContrastMatrix::linear(design, &bases);
        let info = PivotedCholesky::new(&z1.cross(&z1), z1.cols()).map_err(|e| {
            let mut factors = e.dependent;
            factors.sort_unstable();
            Error::SingularLinearModel { factors }
        })?;
        Ok(Self {
            design,
            bases,
            z1,
            info,
        })
    }

    pub fn design(&self) -> &Design {
        self.design
    }

    pub fn linear_contrasts(&self) -> &ContrastMatrix {
        &self.z1
    }

    pub fn contrasts(&self, selection: Selection) -> Result<ContrastMatrix> {
        ContrastMatrix::with_bases(self.design, &self.bases, selection)
    }

    pub fn alias_matrix(&self, selection: Selection) -> Result<AliasMatrix> {
        let z = self.contrasts(selection)?;
        Ok(self.alias_of(&z))
    }

    fn alias_of(&self, z: &ContrastMatrix) -> AliasMatrix {
        let m = self.z1.cols();
        let c = z.cols();
        let mut data = vec![0.0; m * c];
        for col in 0..c {
            let rhs: Vec<f64> = (0..m)
                .map(|j| dot(self.z1.column(j), z.column(col)))
                .collect();
            for (j, v) in self.info.solve(&rhs).into_iter().enumerate() {
                data[j * c + col] = v;
            }
        }
        AliasMatrix {
            selection: z.selection(),
            rows: m,
            tuples: z.tuples().to_vec(),
            data,
        }
    }

    /// `(lambda_2, .., lambda_{m'})`.
    pub fn contamination_pattern(&self) -> Result<ContaminationPattern> {
        let values = (2..=self.design.max_degree())
            .map(|k| Ok(self.alias_matrix(Selection::Degree(k))?.frobenius_sq()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ContaminationPattern {
            variant: Variant::Ols,
            first_degree: 2,
            values,
        })
    }

    /// `lambda_{i,j} = tr(A_{i,j}^T A_{i,j})` over `i + j <= m`.
    pub fn lambda_split(&self) -> Result<SplitGrid> {
        self.design.require_three_level()?;
        let m = self.design.factors();
        let mut grid = SplitGrid::zeros(m);
        for i in 0..=m {
            for j in 0..=m - i {
                if i + 2 * j < 2 {
                    continue;
                }
                let a = self.alias_matrix(Selection::Class { ones: i, twos: j })?;
                grid.add(i, j, a.frobenius_sq());
            }
        }
        Ok(grid)
    }
}

pub fn alias_matrix(design: &Design, selection: Selection) -> Result<AliasMatrix> {
    LinearModel::new(design)?.alias_matrix(selection)
}

pub fn contamination_pattern(design: &Design) -> Result<ContaminationPattern> {
    LinearModel::new(design)?.contamination_pattern()
}

pub fn lambda_split(design: &Design) -> Result<SplitGrid> {
    design.require_three_level()?;
    LinearModel::new(design)?.lambda_split()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Linear-effect model, ordinary least squares.
    Ols,
    /// Intercept-only model.
    GeneralMean,
    /// Linear-effect model, generalized least squares.
    Gls,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContaminationPattern {
    pub variant: Variant,
    /// Degree of `values[0]`.
    pub first_degree: usize,
    pub values: Vec<f64>,
}

impl ContaminationPattern {
    /// Value at degree `k`; zero outside the stored range.
    pub fn get(&self, k: usize) -> f64 {
        k.checked_sub(self.first_degree)
            .and_then(|i| self.values.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degrees(&self) -> std::ops::Range<usize> {
        self.first_degree..self.first_degree + self.values.len()
    }
}

/// `(lambda'_1, .., lambda'_{m'})` with `A'_k = n^-1 Z_0^T Z_k`.
pub fn mean_contamination(design: &Design) -> Result<ContaminationPattern> {
    let bases = DesignBases::for_design(design)?;
    let z0 = ContrastMatrix::with_bases(design, &bases, Selection::Mean)?;
    let n = design.runs() as f64;
    let values = (1..=design.max_degree())
        .map(|k| {
            let zk = ContrastMatrix::with_bases(design, &bases, Selection::Degree(k))?;
            Ok(z0
                .cross(&zk)
                .into_iter()
                .map(|s| {
                    let a = s / n;
                    a * a
                })
                .sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ContaminationPattern {
        variant: Variant::GeneralMean,
        first_degree: 1,
        values,
    })
}

/// Dense symmetric positive-definite error covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    dim: usize,
    data: Vec<f64>,
    factor: PivotedCholesky,
}

pub const SYMMETRY_TOL: f64 = 1e-12;

impl Covariance {
    /// Row-major `dim x dim` matrix.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        for i in 0..dim {
            for j in 0..i {
                if (data[i * dim + j] - data[j * dim + i]).abs() > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let factor = PivotedCholesky::new(&data, dim).map_err(|_| Error::NotPositiveDefinite)?;
        Ok(Self { dim, data, factor })
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = scale;
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// `lambda*_k = tr(A*_k^T A*_k)` with
/// `A*_k = (Z_1^T S^-1 Z_1)^-1 Z_1^T S^-1 Z_k`, evaluated by whitening every
/// contrast column through the Cholesky factor of `S`.
pub fn gls_contamination(design: &Design, sigma: &Covariance) -> Result<ContaminationPattern> {
    if sigma.dim() != design.runs() {
        return Err(Error::DimensionMismatch {
            expected: design.runs(),
            found: sigma.dim(),
        });
    }
    let bases = DesignBases::for_design(design)?;
    let z1 = ContrastMatrix::linear(design, &bases);
    let m = z1.cols();
    let w1: Vec<Vec<f64>> = (0..m).map(|j| sigma.factor.whiten(z1.column(j))).collect();
    let mut info = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            info[a * m + b] = dot(&w1[a], &w1[b]);
        }
    }
    let reduced = PivotedCholesky::new(&info, m).map_err(|e| {
        let mut factors = e.dependent;
        factors.sort_unstable();
        Error::SingularLinearModel { factors }
    })?;

    let mut values = Vec::new();
    for k in 2..=design.max_degree() {
        let zk = ContrastMatrix::with_bases(design, &bases, Selection::Degree(k))?;
        let mut total = 0.0;
        for c in 0..zk.cols() {
            let wk = sigma.factor.whiten(zk.column(c));
            let rhs: Vec<f64> = w1.iter().map(|w| dot(w, &wk)).collect();
            total += reduced.solve(&rhs).iter().map(|v| v * v).sum::<f64>();
        }
        values.push(total);
    }
    Ok(ContaminationPattern {
        variant: Variant::Gls,
        first_degree: 2,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::indicator::beta_pattern;

    const DISPLAY_TOL: f64 = 5e-4 + 1e-12;

    fn assert_three_decimals(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= DISPLAY_TOL, "{got:?} vs {want:?}");
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn reference_contamination_patterns() {
        let d1 = contamination_pattern(&builtin::d1()).unwrap();
        assert_three_decimals(
            d1.values(),
            &[0.844, 2.203, 4.078, 2.109, 3.797, 0.688, 0.281],
        );
        let d2 = contamination_pattern(&builtin::d2()).unwrap();
        assert_three_decimals(
            d2.values(),
            &[0.844, 2.203, 3.984, 3.141, 2.953, 0.781, 0.094],
        );
        let d1p = contamination_pattern(&builtin::d1_prime()).unwrap();
        assert_three_decimals(d1p.values(), &[0.0, 6.0, 0.0, 4.5, 0.0, 3.5, 0.0]);
    }

    #[test]
    fn strength_two_alias_matches_scaled_cross_product() {
        let d = builtin::d1();
        let bases = DesignBases::for_design(&d).unwrap();
        let z1 = ContrastMatrix::linear(&d, &bases);
        for k in 2..=8 {
            let a = alias_matrix(&d, Selection::Degree(k)).unwrap();
            let zk = ContrastMatrix::new(&d, Selection::Degree(k)).unwrap();
            let cross = z1.cross(&zk);
            for r in 0..a.rows() {
                for c in 0..a.cols() {
                    let shortcut = cross[r * zk.cols() + c] / d.runs() as f64;
                    assert!((a.get(r, c) - shortcut).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn full_factorial_has_no_contamination() {
        let d = Design::full_factorial(&[3, 3]).unwrap();
        let lambda = contamination_pattern(&d).unwrap();
        assert_eq!(lambda.degrees(), 2..5);
        assert!(lambda.values().iter().all(|v| v.abs() < 1e-12));
        let split = lambda_split(&d).unwrap();
        assert!(split.iter().all(|(_, _, v)| v.abs() < 1e-12));
        let mean = mean_contamination(&d).unwrap();
        assert!(mean.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn collinear_linear_contrasts_are_named() {
        let rows: Vec<Vec<usize>> = (0..9).map(|i| vec![i % 3, i / 3, i % 3]).collect();
        let d = Design::new(&rows, &[3, 3, 3]).unwrap();
        match contamination_pattern(&d) {
            Err(Error::SingularLinearModel { factors }) => {
                assert_eq!(factors.len(), 1);
                assert!(factors[0] == 0 || factors[0] == 2);
            }
            other => panic!("expected singular model, got {other:?}"),
        }
    }

    #[test]
    fn mean_contamination_is_beta() {
        for d in [builtin::d1(), builtin::d2()] {
            let beta = beta_pattern(&d).unwrap();
            let mean = mean_contamination(&d).unwrap();
            for (a, b) in beta.values().iter().zip(mean.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(mean_contamination(&builtin::d2()).unwrap().get(8).abs() < 1e-12);
    }

    #[test]
    fn lambda_split_boundary_is_zero() {
        let split = lambda_split(&builtin::d1()).unwrap();
        // p + q = m + 1 lies outside the grid.
        for p in 0..=5i64 {
            assert_eq!(split.get(p, 5 - p), 0.0);
        }
    }

    #[test]
    fn gls_with_scalar_covariance_is_ols() {
        let d = builtin::d1();
        let ols = contamination_pattern(&d).unwrap();
        for scale in [1.0, 4.0] {
            let sigma = Covariance::scaled_identity(18, scale).unwrap();
            let gls = gls_contamination(&d, &sigma).unwrap();
            for (a, b) in ols.values().iter().zip(gls.values()) {
                assert!((a - b).abs() < 1e-12, "scale {scale}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn covariance_validation() {
        assert!(matches!(
            Covariance::new(2, vec![1.0, 0.5, 0.4, 1.0]),
            Err(Error::NotSymmetric { .. })
        ));
        assert_eq!(
            Covariance::new(2, vec![1.0, 2.0, 2.0, 1.0]),
            Err(Error::NotPositiveDefinite)
        );
        assert!(Covariance::new(2, vec![1.0; 3]).is_err());
        let sigma = Covariance::scaled_identity(9, 1.0).unwrap();
        assert!(matches!(
            gls_contamination(&builtin::d1(), &sigma),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
