//! Orthonormal polynomial contrasts on the level set `{0, .., s-1}`.
//!
//! The basis is built by Gram-Schmidt on the monomials `1, x, x^2, ..` under
//! the uniform counting measure, in exact rational arithmetic. Each value is
//! then converted to a float once: `c_u(x) = sign(p_u(x)) * sqrt(p_u(x)^2 * s / |p_u|^2)`
//! where `p_u` is the monic orthogonal polynomial of degree `u`. Normalization
//! is `sum_x c_u(x) c_v(x) = s * delta_uv` and every `c_u` has a positive
//! leading coefficient.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::design::Design;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    levels: usize,
    // values[u * levels + x] = c_u(x)
    values: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn new(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::TooFewLevels { factor: 0, levels });
        }
        let points: Vec<BigRational> = (0..levels)
            .map(|x| BigRational::from_integer(BigInt::from(x)))
            .collect();
        let dot = |a: &[BigRational], b: &[BigRational]| -> BigRational {
            a.iter()
                .zip(b)
                .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
        };

        let mut monic: Vec<Vec<BigRational>> = Vec::with_capacity(levels);
        for degree in 0..levels {
            let mut p: Vec<BigRational> = points
                .iter()
                .map(|x| num_traits::pow(x.clone(), degree))
                .collect();
            for q in &monic {
                let coef = dot(&p, q) / dot(q, q);
                for (pi, qi) in p.iter_mut().zip(q) {
                    *pi -= &coef * qi;
                }
            }
            monic.push(p);
        }

        let s = BigRational::from_integer(BigInt::from(levels));
        let mut values = Vec::with_capacity(levels * levels);
        for p in &monic {
            let scale = &s / dot(p, p);
            for px in p {
                let squared = (px * px * &scale).to_f64().expect("basis value is finite");
                let v = squared.sqrt();
                values.push(if px.is_negative() { -v } else { v });
            }
        }
        Ok(Self { levels, values })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `c_degree(level)`.
    pub fn value(&self, degree: usize, level: usize) -> f64 {
        self.values[degree * self.levels + level]
    }

    /// `(c_degree(0), .., c_degree(s-1))`.
    pub fn polynomial(&self, degree: usize) -> &[f64] {
        &self.values[degree * self.levels..(degree + 1) * self.levels]
    }
}

/// One basis per factor of a design. Factors with equal level counts share
/// identical tables.
#[derive(Debug, Clone)]
pub struct DesignBases {
    bases: Vec<OrthonormalBasis>,
}

impl DesignBases {
    pub fn new(levels: &[usize]) -> Result<Self> {
        let mut cache: Vec<OrthonormalBasis> = Vec::new();
        let mut bases = Vec::with_capacity(levels.len());
        for (factor, &s) in levels.iter().enumerate() {
            let basis = match cache.iter().find(|b| b.levels() == s) {
                Some(b) => b.clone(),
                None => {
                    let b = OrthonormalBasis::new(s)
                        .map_err(|_| Error::TooFewLevels { factor, levels: s })?;
                    cache.push(b.clone());
                    b
                }
            };
            bases.push(basis);
        }
        Ok(Self { bases })
    }

    pub fn for_design(design: &Design) -> Result<Self> {
        Self::new(design.levels())
    }

    pub fn factor(&self, j: usize) -> &OrthonormalBasis {
        &self.bases[j]
    }

    pub fn factors(&self) -> usize {
        self.bases.len()
    }

    /// `C_t(x) = prod_j c_{t_j}(x_j)`, multiplied in factor order.
    pub fn contrast_value(&self, t: &[usize], row: &[usize]) -> f64 {
        debug_assert_eq!(t.len(), row.len());
        t.iter()
            .zip(row)
            .zip(&self.bases)
            .fold(1.0, |acc, ((&tj, &xj), basis)| acc * basis.value(tj, xj))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_level_closed_form() {
        let b = OrthonormalBasis::new(3).unwrap();
        let r = 1.5f64.sqrt();
        let h = 2f64.sqrt();
        assert_eq!(b.polynomial(0), &[1.0, 1.0, 1.0]);
        for (got, want) in b.polynomial(1).iter().zip([-r, 0.0, r]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        for (got, want) in b.polynomial(2).iter().zip([h / 2.0, -h, h / 2.0]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn two_level_basis() {
        let b = OrthonormalBasis::new(2).unwrap();
        assert_eq!(b.polynomial(0), &[1.0, 1.0]);
        assert_eq!(b.polynomial(1), &[-1.0, 1.0]);
    }

    #[test]
    fn fewer_than_two_levels_is_an_error() {
        assert!(OrthonormalBasis::new(1).is_err());
        assert!(OrthonormalBasis::new(0).is_err());
    }

    #[test]
    fn orthonormal_up_to_nine_levels() {
        for s in 2..=9 {
            let b = OrthonormalBasis::new(s).unwrap();
            for u in 0..s {
                for v in 0..s {
                    let dot: f64 = (0..s).map(|x| b.value(u, x) * b.value(v, x)).sum();
                    let want = if u == v { s as f64 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "s={s} u={u} v={v}: {dot}");
                }
            }
        }
    }

    fn forward_difference(values: &[f64], order: usize) -> Vec<f64> {
        let mut d = values.to_vec();
        for _ in 0..order {
            d = d.windows(2).map(|w| w[1] - w[0]).collect();
        }
        d
    }

    #[test]
    fn degree_is_exact_with_positive_leading_coefficient() {
        for s in 2..=9 {
            let b = OrthonormalBasis::new(s).unwrap();
            for u in 0..s {
                let p = b.polynomial(u);
                // The u-th difference of a degree-u polynomial is u! times its leading coefficient.
                let du = forward_difference(p, u);
                assert!(du.iter().all(|&d| d > 1e-9), "s={s} u={u}: {du:?}");
                if u + 1 < s {
                    let next = forward_difference(p, u + 1);
                    assert!(next.iter().all(|d| d.abs() < 1e-9), "s={s} u={u}");
                }
            }
        }
    }

    #[test]
    fn three_level_product_rules() {
        let b = OrthonormalBasis::new(3).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for x in 0..3 {
            let (c0, c1, c2) = (b.value(0, x), b.value(1, x), b.value(2, x));
            assert!((c1 * c1 - (r * c2 + c0)).abs() < 1e-12);
            assert!((c1 * c2 - r * c1).abs() < 1e-12);
            assert!((c2 * c2 - (-r * c2 + c0)).abs() < 1e-12);
        }
    }

    #[test]
    fn contrast_values() {
        let bases = DesignBases::new(&[3; 4]).unwrap();
        assert_eq!(bases.contrast_value(&[0; 4], &[2, 1, 0, 2]), 1.0);
        let v = bases.contrast_value(&[1, 0, 0, 0], &[2, 0, 1, 1]);
        assert!((v - 1.224744871391589).abs() < 1e-12);
        let v = bases.contrast_value(&[1, 1, 0, 0], &[0, 0, 2, 1]);
        assert!((v - 1.5).abs() < 1e-12);
    }
}
