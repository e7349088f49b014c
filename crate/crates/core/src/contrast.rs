//! Contrast matrices `Z` over a design: one column `X_t` per selected tuple.

use serde::Serialize;

use crate::basis::DesignBases;
use crate::design::{Design, ExponentTuple, TupleSpace};
use crate::error::Result;

/// Which tuples become columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// The single all-ones column `Z_0`.
    Mean,
    /// All tuples of total degree `k` (`Z_k`); `Degree(1)` is the linear model.
    Degree(usize),
    /// Tuples with `ones + twos` nonzero entries and total degree
    /// `ones + 2 * twos` (`Z_{i,j}`).
    Class { ones: usize, twos: usize },
}

impl Selection {
    pub fn matches(&self, t: &ExponentTuple) -> bool {
        match *self {
            Selection::Mean => t.norm1() == 0,
            Selection::Degree(k) => t.norm1() == k,
            Selection::Class { ones, twos } => {
                t.norm0() == ones + twos && t.norm1() == ones + 2 * twos
            }
        }
    }
}

/// Column-major `n x c` matrix with the tuple behind each column.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMatrix {
    selection: Selection,
    runs: usize,
    tuples: Vec<ExponentTuple>,
    data: Vec<f64>,
}

impl ContrastMatrix {
    pub fn new(design: &Design, selection: Selection) -> Result<Self> {
        let bases = DesignBases::for_design(design)?;
        Self::with_bases(design, &bases, selection)
    }

    pub fn with_bases(design: &Design, bases: &DesignBases, selection: Selection) -> Result<Self> {
        let tuples: Vec<ExponentTuple> = match selection {
            Selection::Mean => vec![ExponentTuple::zero(design.factors())],
            _ => TupleSpace::new(design.levels())?
                .iter()
                .filter(|t| selection.matches(t))
                .collect(),
        };
        Ok(Self::from_tuples(design, bases, selection, tuples))
    }

    /// `Z_1` with columns in factor order (column `j` is the linear contrast of factor `j`).
    pub fn linear(design: &Design, bases: &DesignBases) -> Self {
        let m = design.factors();
        let tuples = (0..m).map(|j| ExponentTuple::linear(m, j)).collect();
        Self::from_tuples(design, bases, Selection::Degree(1), tuples)
    }

    fn from_tuples(
        design: &Design,
        bases: &DesignBases,
        selection: Selection,
        tuples: Vec<ExponentTuple>,
    ) -> Self {
        let mut data = Vec::with_capacity(tuples.len() * design.runs());
        for t in &tuples {
            data.extend(
                design
                    .rows()
                    .map(|row| bases.contrast_value(t.entries(), row)),
            );
        }
        Self {
            selection,
            runs: design.runs(),
            tuples,
            data,
        }
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    pub fn rows(&self) -> usize {
        self.runs
    }

    pub fn cols(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[ExponentTuple] {
        &self.tuples
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.runs..(c + 1) * self.runs]
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.data[c * self.runs + i]
    }

    /// `self^T other` as a row-major `self.cols() x other.cols()` buffer.
    pub fn cross(&self, other: &ContrastMatrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cols() * other.cols());
        for a in 0..self.cols() {
            let ca = self.column(a);
            for b in 0..other.cols() {
                out.push(dot(ca, other.column(b)));
            }
        }
        out
    }

    /// CSV with a header row of tuple labels (e.g. `t0120`).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .tuples
            .iter()
            .map(|t| {
                let digits: String = t.entries().iter().map(|d| d.to_string()).collect();
                format!("t{digits}")
            })
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.runs {
            let row: Vec<String> = (0..self.cols())
                .map(|c| self.get(i, c).to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
