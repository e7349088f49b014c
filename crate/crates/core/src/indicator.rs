//! Indicator-function coefficients and the beta-wordlength pattern.
//!
//! For every tuple `t`, `b_t = N^-1 sum_{x in D} C_t(x)` and `b_0 = n / N`,
//! so `b_t / b_0 = n^-1 sum_{x in D} C_t(x)`. Sums run over the design rows
//! in stored order, which makes every value reproducible bit for bit.

use serde::Serialize;

use crate::basis::DesignBases;
use crate::design::{Design, ExponentTuple, TupleSpace};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct IndicatorCoefficients {
    space: TupleSpace,
    runs: usize,
    // sums[index] = sum over runs of C_t(x)
    sums: Vec<f64>,
}

impl IndicatorCoefficients {
    pub fn new(design: &Design) -> Result<Self> {
        let space = TupleSpace::new(design.levels())?;
        let bases = DesignBases::for_design(design)?;
        let sums = space
            .iter()
            .map(|t| {
                design
                    .rows()
                    .map(|row| bases.contrast_value(t.entries(), row))
                    .sum()
            })
            .collect();
        Ok(Self {
            space,
            runs: design.runs(),
            sums,
        })
    }

    pub fn space(&self) -> &TupleSpace {
        &self.space
    }

    /// `b_0 = n / N`.
    pub fn b0(&self) -> f64 {
        self.runs as f64 / self.space.len() as f64
    }

    /// `b_t` for the tuple at lexicographic `index`.
    pub fn coefficient(&self, index: usize) -> f64 {
        self.sums[index] / self.space.len() as f64
    }

    pub fn coefficient_of(&self, t: &[usize]) -> f64 {
        self.coefficient(self.space.index_of(t))
    }

    /// `b_t / b_0`, computed as `n^-1 sum_x C_t(x)`.
    pub fn ratio(&self, index: usize) -> f64 {
        self.sums[index] / self.runs as f64
    }

    pub fn ratio_of(&self, t: &[usize]) -> f64 {
        self.ratio(self.space.index_of(t))
    }

    /// `(t, b_t)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (ExponentTuple, f64)> + '_ {
        (0..self.space.len()).map(|i| (self.space.tuple_at(i), self.coefficient(i)))
    }
}

/// `(beta_1, .., beta_{m'})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BetaPattern(pub Vec<f64>);

impl BetaPattern {
    pub fn from_indicator(ind: &IndicatorCoefficients) -> Self {
        let max_degree: usize = ind.space().levels().iter().map(|s| s - 1).sum();
        let mut beta = vec![0.0; max_degree];
        for (index, t) in ind.space().iter().enumerate() {
            let k = t.norm1();
            if k > 0 {
                let r = ind.ratio(index);
                beta[k - 1] += r * r;
            }
        }
        Self(beta)
    }

    /// `beta_k` for `k >= 1`; zero outside `1..=m'`.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.0.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_degree(&self) -> usize {
        self.0.len()
    }
}

pub fn beta_pattern(design: &Design) -> Result<BetaPattern> {
    Ok(BetaPattern::from_indicator(&IndicatorCoefficients::new(
        design,
    )?))
}

/// A triangular grid `g[i][j]` defined for `i + j <= bound`, read as zero
/// everywhere else (negative indices included).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitGrid {
    bound: usize,
    values: Vec<Vec<f64>>,
}

impl SplitGrid {
    pub(crate) fn zeros(bound: usize) -> Self {
        let values = (0..=bound).map(|i| vec![0.0; bound - i + 1]).collect();
        Self { bound, values }
    }

    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        self.values[i][j] += v;
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn get(&self, i: i64, j: i64) -> f64 {
        if i < 0 || j < 0 || (i + j) as usize > self.bound {
            return 0.0;
        }
        self.values[i as usize][j as usize]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
    }
}

/// `beta_{i,j}`: sum of `(b_t/b_0)^2` over tuples with `i` ones and `j` twos.
pub fn beta_split(design: &Design) -> Result<SplitGrid> {
    design.require_three_level()?;
    Ok(beta_split_from(&IndicatorCoefficients::new(design)?))
}

pub(crate) fn beta_split_from(ind: &IndicatorCoefficients) -> SplitGrid {
    let m = ind.space().levels().len();
    let mut grid = SplitGrid::zeros(m);
    for (index, t) in ind.space().iter().enumerate() {
        let r = ind.ratio(index);
        grid.add(t.count_of(1), t.count_of(2), r * r);
    }
    grid
}

/// `xi_{i,j} = sum_l sum (b_{t|t_l=0}/b_0)(b_{t|t_l=2}/b_0)`, the inner sum
/// running once over each assignment of the other `m - 1` coordinates that
/// holds `i` ones and `j` twos.
pub fn xi_grid(design: &Design) -> Result<SplitGrid> {
    design.require_three_level()?;
    Ok(xi_grid_from(&IndicatorCoefficients::new(design)?))
}

pub(crate) fn xi_grid_from(ind: &IndicatorCoefficients) -> SplitGrid {
    let space = ind.space();
    let m = space.levels().len();
    let mut grid = SplitGrid::zeros(m - 1);
    for l in 0..m {
        for (index, t) in space.iter().enumerate() {
            if t.entries()[l] != 0 {
                continue;
            }
            let mut raised = t.entries().to_vec();
            raised[l] = 2;
            let product = ind.ratio(index) * ind.ratio_of(&raised);
            grid.add(t.count_of(1), t.count_of(2), product);
        }
    }
    grid
}
