//! Numeric checks of the identities linking contamination to the
//! beta-wordlength pattern for three-level designs.
//!
//! Every check evaluates both sides from independently computed
//! quantities: the left side from alias matrices (linear solves on contrast
//! matrices), the right side from indicator-function coefficients.
//! Out-of-range `beta_{i,j}` and `xi_{i,j}` read as zero.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::contamination::{ContaminationPattern, LinearModel};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::indicator::{
    beta_split_from, xi_grid_from, BetaPattern, IndicatorCoefficients, SplitGrid,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    None,
    Degree { k: usize },
    Class { p: usize, q: usize },
}

impl std::fmt::Display for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Params::None => write!(f, "-"),
            Params::Degree { k } => write!(f, "k={k}"),
            Params::Class { p, q } => write!(f, "(p,q)=({p},{q})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub params: Params,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Named intermediate terms of the right-hand side.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<(String, f64)>,
}

impl IdentityReport {
    fn new(name: &str, params: Params, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        Self {
            name: name.to_string(),
            params,
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual < tolerance,
            terms: Vec::new(),
        }
    }

    fn with_terms(mut self, terms: Vec<(String, f64)>) -> Self {
        self.terms = terms;
        self
    }
}

/// Everything the checks read, computed once per design.
#[derive(Debug, Clone)]
pub struct ThreeLevelAnalysis {
    pub factors: usize,
    pub strength: usize,
    pub mirror_symmetric: bool,
    pub beta: BetaPattern,
    pub beta_split: SplitGrid,
    pub xi: SplitGrid,
    pub lambda: ContaminationPattern,
    pub lambda_split: SplitGrid,
}

impl ThreeLevelAnalysis {
    pub fn new(design: &Design) -> Result<Self> {
        design.require_three_level()?;
        let ind = IndicatorCoefficients::new(design)?;
        let model = LinearModel::new(design)?;
        Ok(Self {
            factors: design.factors(),
            strength: design.strength(),
            mirror_symmetric: design.is_mirror_symmetric(),
            beta: BetaPattern::from_indicator(&ind),
            beta_split: beta_split_from(&ind),
            xi: xi_grid_from(&ind),
            lambda: model.contamination_pattern()?,
            lambda_split: model.lambda_split()?,
        })
    }

    pub fn max_degree(&self) -> usize {
        2 * self.factors
    }

    fn b(&self, i: i64, j: i64) -> f64 {
        self.beta_split.get(i, j)
    }

    fn xi(&self, i: i64, j: i64) -> f64 {
        self.xi.get(i, j)
    }

    fn require_strength_two(&self, check: &str) -> Result<()> {
        if self.strength < 2 {
            return Err(precondition(
                check,
                format!("design strength is {}, need at least 2", self.strength),
            ));
        }
        Ok(())
    }

    /// `lambda_{p,q} = (p+1) b_{p+1,q} + (p+1)/2 b_{p+1,q-1} + (q+1)/2 b_{p-1,q+1}
    ///  + (m-p-q+1) b_{p-1,q} + sqrt(2) xi_{p-1,q}`.
    pub fn split_contamination(&self, p: usize, q: usize, tol: f64) -> Result<IdentityReport> {
        self.require_strength_two("split-contamination")?;
        if p + 2 * q < 2 {
            return Err(precondition(
                "split-contamination",
                format!("p + 2q = {} < 2", p + 2 * q),
            ));
        }
        let (pi, qi, m) = (p as i64, q as i64, self.factors as i64);
        let terms = vec![
            ("(p+1)b[p+1,q]".into(), (pi + 1) as f64 * self.b(pi + 1, qi)),
            (
                "(p+1)/2 b[p+1,q-1]".into(),
                (pi + 1) as f64 / 2.0 * self.b(pi + 1, qi - 1),
            ),
            (
                "(q+1)/2 b[p-1,q+1]".into(),
                (qi + 1) as f64 / 2.0 * self.b(pi - 1, qi + 1),
            ),
            (
                "(m-p-q+1)b[p-1,q]".into(),
                (m - pi - qi + 1) as f64 * self.b(pi - 1, qi),
            ),
            ("sqrt2 xi[p-1,q]".into(), SQRT_2 * self.xi(pi - 1, qi)),
        ];
        let rhs = terms.iter().map(|(_, v)| v).sum();
        let lhs = self.lambda_split.get(pi, qi);
        Ok(
            IdentityReport::new("split-contamination", Params::Class { p, q }, lhs, rhs, tol)
                .with_terms(terms),
        )
    }

    /// All `(p, q)` with `p + 2q >= 2` and `p + q <= m + 1`.
    pub fn split_contamination_domain(&self) -> Vec<(usize, usize)> {
        let m = self.factors;
        (0..=m + 1)
            .flat_map(|p| (0..=m + 1 - p).map(move |q| (p, q)))
            .filter(|&(p, q)| p + 2 * q >= 2)
            .collect()
    }

    /// `lambda_k = (1 + k - 3/2 ceil(k/2)) beta_{k+1} + (m - (k-1)/2) beta_{k-1} + B`.
    pub fn contamination_from_beta(&self, k: usize, tol: f64) -> Result<IdentityReport> {
        self.require_strength_two("contamination-from-beta")?;
        if k < 2 || k > self.max_degree() {
            return Err(precondition(
                "contamination-from-beta",
                format!("k = {k} outside 2..={}", self.max_degree()),
            ));
        }
        let ki = k as i64;
        let ceil = (ki + 1) / 2;
        let m = self.factors as f64;
        let b_beta: f64 = 1.5
            * (0..ceil)
                .map(|j| (ceil - j) as f64 * self.b(ki - 2 * j + 1, j))
                .sum::<f64>();
        let b_xi: f64 = SQRT_2 * (0..ceil).map(|j| self.xi(ki - 2 * j - 1, j)).sum::<f64>();
        let lead = (1 + ki) as f64 - 1.5 * ceil as f64;
        let tail = m - (k as f64 - 1.0) / 2.0;
        let terms = vec![
            ("lead*beta[k+1]".into(), lead * self.beta.get(k + 1)),
            ("tail*beta[k-1]".into(), tail * self.beta.get(k - 1)),
            ("B_beta".into(), b_beta),
            ("B_xi".into(), b_xi),
        ];
        let rhs = terms.iter().map(|(_, v)| v).sum();
        let lhs = self.lambda.get(k);
        Ok(IdentityReport::new(
            "contamination-from-beta",
            Params::Degree { k },
            lhs,
            rhs,
            tol,
        )
        .with_terms(terms))
    }

    /// Valid only when `m = r + 1`:
    /// `lambda_k = rho beta_{k+1} + (r + 1 - (k-1)/2) beta_{k-1}`.
    pub fn saturated_contamination(&self, k: usize, tol: f64) -> Result<IdentityReport> {
        self.require_strength_two("saturated-contamination")?;
        let r = self.strength;
        if self.factors != r + 1 {
            return Err(precondition(
                "saturated-contamination",
                format!("needs m = r + 1, got m = {} and r = {r}", self.factors),
            ));
        }
        let top = self.max_degree();
        if k < 2 || k > top {
            return Err(precondition(
                "saturated-contamination",
                format!("k = {k} outside 2..={top}"),
            ));
        }
        let rho = saturated_rho(k, r, top);
        let tail = (r + 1) as f64 - (k as f64 - 1.0) / 2.0;
        let terms = vec![
            ("rho".into(), rho),
            ("rho*beta[k+1]".into(), rho * self.beta.get(k + 1)),
            ("tail*beta[k-1]".into(), tail * self.beta.get(k - 1)),
        ];
        let rhs = terms[1].1 + terms[2].1;
        let lhs = self.lambda.get(k);
        Ok(IdentityReport::new(
            "saturated-contamination",
            Params::Degree { k },
            lhs,
            rhs,
            tol,
        )
        .with_terms(terms))
    }

    /// Forward: mirror-symmetric implies every even-degree `lambda_k`
    /// vanishes. Converse: vanishing even-degree contamination implies
    /// mirror symmetry; a violation has residual 1.
    pub fn mirror_even_zero(&self, tol: f64) -> (IdentityReport, IdentityReport) {
        let even_max = self
            .lambda
            .degrees()
            .filter(|k| k % 2 == 0)
            .map(|k| self.lambda.get(k).abs())
            .fold(0.0, f64::max);
        let forward_lhs = if self.mirror_symmetric { even_max } else { 0.0 };
        let forward = IdentityReport::new(
            "mirror-implies-even-zero",
            Params::None,
            forward_lhs,
            0.0,
            tol,
        )
        .with_terms(vec![
            (
                "mirror_symmetric".into(),
                f64::from(u8::from(self.mirror_symmetric)),
            ),
            ("max_even_lambda".into(), even_max),
        ]);
        let even_zero = even_max < tol;
        let converse_lhs = f64::from(u8::from(even_zero && !self.mirror_symmetric));
        let converse = IdentityReport::new(
            "even-zero-implies-mirror",
            Params::None,
            converse_lhs,
            0.0,
            tol,
        )
        .with_terms(vec![
            ("even_lambda_zero".into(), f64::from(u8::from(even_zero))),
            (
                "mirror_symmetric".into(),
                f64::from(u8::from(self.mirror_symmetric)),
            ),
        ]);
        (forward, converse)
    }

    /// `beta_k = sum_j beta_{k-2j,j}` for `k = 1..=m'` and
    /// `lambda_k = sum_j lambda_{k-2j,j}` for `k = 2..=m'`.
    pub fn decompositions(&self, tol: f64) -> Vec<IdentityReport> {
        let mut out = Vec::new();
        for k in 1..=self.max_degree() {
            let ki = k as i64;
            let rhs = (0..=ki / 2).map(|j| self.b(ki - 2 * j, j)).sum();
            out.push(IdentityReport::new(
                "beta-decomposition",
                Params::Degree { k },
                self.beta.get(k),
                rhs,
                tol,
            ));
        }
        for k in 2..=self.max_degree() {
            let ki = k as i64;
            let rhs = (0..=ki / 2)
                .map(|j| self.lambda_split.get(ki - 2 * j, j))
                .sum();
            out.push(IdentityReport::new(
                "lambda-decomposition",
                Params::Degree { k },
                self.lambda.get(k),
                rhs,
                tol,
            ));
        }
        out
    }

    /// Truncated at order `r`, the pattern is `(0, .., 0, (r+1) beta_{r+1})`.
    pub fn truncated_contamination(&self, tol: f64) -> Result<Vec<IdentityReport>> {
        self.require_strength_two("truncated-contamination")?;
        let r = self.strength;
        Ok((2..=r.min(self.max_degree()))
            .map(|k| {
                let rhs = if k < r {
                    0.0
                } else {
                    (r + 1) as f64 * self.beta.get(r + 1)
                };
                IdentityReport::new(
                    "truncated-contamination",
                    Params::Degree { k },
                    self.lambda.get(k),
                    rhs,
                    tol,
                )
            })
            .collect())
    }

    /// `beta_{i,j} = 0` and `xi_{i,j} = 0` whenever `0 < i + j <= r`.
    pub fn low_order_splits(&self, tol: f64) -> Vec<IdentityReport> {
        let mut out = Vec::new();
        for (i, j, v) in self.beta_split.iter() {
            if i + j > 0 && i + j <= self.strength {
                out.push(IdentityReport::new(
                    "low-order-beta-split",
                    Params::Class { p: i, q: j },
                    v,
                    0.0,
                    tol,
                ));
            }
        }
        for (i, j, v) in self.xi.iter() {
            if i + j > 0 && i + j <= self.strength {
                out.push(IdentityReport::new(
                    "low-order-xi",
                    Params::Class { p: i, q: j },
                    v,
                    0.0,
                    tol,
                ));
            }
        }
        out
    }

    /// For mirror-symmetric designs, `beta_{i,j} = 0` when `i + 2j` is odd.
    /// Empty for other designs.
    pub fn mirror_parity(&self, tol: f64) -> Vec<IdentityReport> {
        if !self.mirror_symmetric {
            return Vec::new();
        }
        self.beta_split
            .iter()
            .filter(|(i, j, _)| (i + 2 * j) % 2 == 1)
            .map(|(i, j, v)| {
                IdentityReport::new("mirror-parity", Params::Class { p: i, q: j }, v, 0.0, tol)
            })
            .collect()
    }
}

/// Coefficient of `beta_{k+1}` when `m = r + 1`.
pub fn saturated_rho(k: usize, r: usize, max_degree: usize) -> f64 {
    if k == max_degree {
        0.0
    } else if k <= r {
        (k + 1) as f64
    } else {
        (3 * r + 2 - k) as f64 / 2.0
    }
}

fn precondition(check: &str, reason: String) -> Error {
    Error::Precondition {
        check: check.to_string(),
        reason,
    }
}

pub fn check_split_contamination(
    design: &Design,
    p: usize,
    q: usize,
    tol: f64,
) -> Result<IdentityReport> {
    ThreeLevelAnalysis::new(design)?.split_contamination(p, q, tol)
}

pub fn check_contamination_from_beta(
    design: &Design,
    k: usize,
    tol: f64,
) -> Result<IdentityReport> {
    ThreeLevelAnalysis::new(design)?.contamination_from_beta(k, tol)
}

pub fn check_saturated_contamination(
    design: &Design,
    k: usize,
    tol: f64,
) -> Result<IdentityReport> {
    ThreeLevelAnalysis::new(design)?.saturated_contamination(k, tol)
}

pub fn check_mirror_even_zero(
    design: &Design,
    tol: f64,
) -> Result<(IdentityReport, IdentityReport)> {
    Ok(ThreeLevelAnalysis::new(design)?.mirror_even_zero(tol))
}

pub fn check_decompositions(design: &Design, tol: f64) -> Result<Vec<IdentityReport>> {
    Ok(ThreeLevelAnalysis::new(design)?.decompositions(tol))
}

pub fn check_truncated_contamination(design: &Design, tol: f64) -> Result<Vec<IdentityReport>> {
    ThreeLevelAnalysis::new(design)?.truncated_contamination(tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCheck {
    pub check: String,
    pub reason: String,
}

/// Result of running every applicable check on one design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub reports: Vec<IdentityReport>,
    /// Required checks whose preconditions failed; these count as failures.
    pub precondition_failures: Vec<SkippedCheck>,
    /// Checks that do not apply to this design (e.g. `saturated-contamination` when `m != r + 1`).
    pub not_applicable: Vec<SkippedCheck>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.precondition_failures.is_empty() && self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityReport> {
        self.reports.iter().filter(|r| !r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.reports.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

pub fn verify_all(design: &Design, tol: f64) -> Verification {
    let mut out = Verification {
        reports: Vec::new(),
        precondition_failures: Vec::new(),
        not_applicable: Vec::new(),
    };
    let analysis = match ThreeLevelAnalysis::new(design) {
        Ok(a) => a,
        Err(e) => {
            out.precondition_failures.push(SkippedCheck {
                check: "all".into(),
                reason: e.to_string(),
            });
            return out;
        }
    };
    verify_analysis(&analysis, tol, &mut out);
    out
}

fn verify_analysis(a: &ThreeLevelAnalysis, tol: f64, out: &mut Verification) {
    let mut record = |res: Result<Vec<IdentityReport>>, check: &str| match res {
        Ok(reports) => out.reports.extend(reports),
        Err(e) => out.precondition_failures.push(SkippedCheck {
            check: check.into(),
            reason: e.to_string(),
        }),
    };

    let split_contamination = a
        .split_contamination_domain()
        .into_iter()
        .map(|(p, q)| a.split_contamination(p, q, tol))
        .collect();
    record(split_contamination, "split-contamination");
    let contamination_from_beta = (2..=a.max_degree())
        .map(|k| a.contamination_from_beta(k, tol))
        .collect();
    record(contamination_from_beta, "contamination-from-beta");
    record(Ok(a.decompositions(tol)), "decompositions");
    record(Ok(a.low_order_splits(tol)), "low-order-splits");
    record(a.truncated_contamination(tol), "truncated-contamination");
    let (fwd, conv) = a.mirror_even_zero(tol);
    record(Ok(vec![fwd, conv]), "mirror-even-zero");
    record(Ok(a.mirror_parity(tol)), "mirror-parity");

    if a.strength >= 2 && a.factors == a.strength + 1 {
        let saturated_contamination = (2..=a.max_degree())
            .map(|k| a.saturated_contamination(k, tol))
            .collect();
        record(saturated_contamination, "saturated-contamination");
    } else {
        out.not_applicable.push(SkippedCheck {
            check: "saturated-contamination".into(),
            reason: format!("needs m = r + 1 (m = {}, r = {})", a.factors, a.strength),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn split_contamination_worked_cases() {
        let a = ThreeLevelAnalysis::new(&builtin::d1()).unwrap();
        let r22 = a.split_contamination(2, 2, DEFAULT_TOLERANCE).unwrap();
        let by_hand = 1.5 * a.b(3, 1) + 1.5 * a.b(1, 3) + a.b(1, 2) + SQRT_2 * a.xi(1, 2);
        assert!((r22.rhs - by_hand).abs() < 1e-12);
        assert!(r22.pass, "{r22:?}");
        let r03 = a.split_contamination(0, 3, DEFAULT_TOLERANCE).unwrap();
        assert!((r03.rhs - (a.b(1, 3) + 0.5 * a.b(1, 2))).abs() < 1e-12);
        assert!(r03.pass);
        for p in 0..=5 {
            let r = a.split_contamination(p, 5 - p, DEFAULT_TOLERANCE).unwrap();
            assert_eq!(r.lhs, 0.0);
            assert!(r.rhs.abs() < 1e-9 && r.pass);
        }
        assert!(a.split_contamination(1, 0, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn contamination_from_beta_reduces_at_strength() {
        let a = ThreeLevelAnalysis::new(&builtin::d1()).unwrap();
        for k in 2..=8 {
            let r = a.contamination_from_beta(k, DEFAULT_TOLERANCE).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert!((a.lambda.get(2) - 3.0 * a.beta.get(3)).abs() < 1e-9);
        assert!(a.contamination_from_beta(1, DEFAULT_TOLERANCE).is_err());
        assert!(a.contamination_from_beta(9, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn saturated_contamination_rejects_d1() {
        let a = ThreeLevelAnalysis::new(&builtin::d1()).unwrap();
        assert!(matches!(
            a.saturated_contamination(2, DEFAULT_TOLERANCE),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn saturated_rho_cases() {
        // r = 2, m = 3, m' = 6
        let rho: Vec<f64> = (2..=6).map(|k| saturated_rho(k, 2, 6)).collect();
        assert_eq!(rho, vec![3.0, 2.5, 2.0, 1.5, 0.0]);
    }

    #[test]
    fn mirror_even_zero_on_reference_designs() {
        let a = ThreeLevelAnalysis::new(&builtin::d1_prime()).unwrap();
        let (f, c) = a.mirror_even_zero(DEFAULT_TOLERANCE);
        assert!(a.mirror_symmetric && f.pass && c.pass);
        let a = ThreeLevelAnalysis::new(&builtin::d1()).unwrap();
        let (f, c) = a.mirror_even_zero(DEFAULT_TOLERANCE);
        assert!(!a.mirror_symmetric && f.pass && c.pass);
        assert!(a.lambda.get(2) > 0.8);
    }

    #[test]
    fn full_factorial_passes_everything() {
        let d = Design::full_factorial(&[3, 3]).unwrap();
        let v = verify_all(&d, DEFAULT_TOLERANCE);
        assert!(v.passed(), "{v:?}");
        assert!(v.max_residual() < 1e-12);
        assert_eq!(v.not_applicable.len(), 1);
    }

    #[test]
    fn low_strength_is_a_precondition_failure() {
        let mut rows = builtin::d1().to_rows();
        rows[0][0] = (rows[0][0] + 1) % 3;
        let d = Design::new(&rows, &[3; 4]).unwrap();
        assert!(d.strength() < 2);
        let v = verify_all(&d, DEFAULT_TOLERANCE);
        assert!(!v.passed());
        assert!(v
            .precondition_failures
            .iter()
            .any(|s| s.check == "split-contamination"));
    }

    #[test]
    fn non_three_level_design_fails_verification() {
        let d = Design::full_factorial(&[2, 2]).unwrap();
        let v = verify_all(&d, DEFAULT_TOLERANCE);
        assert!(!v.passed());
        assert_eq!(v.precondition_failures[0].check, "all");
    }
}
