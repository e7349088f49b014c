//! Orthogonal-array designs and the level relabelings applied to them.
//!
//! A [`Design`] stores runs as rows. Levels of factor `j` are the integers
//! `0..s_j`. Run order carries no meaning, so equality questions
//! ([`Design::same_runs`], [`Design::is_mirror_symmetric`]) compare run
//! multisets.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Design {
    runs: usize,
    levels: Vec<usize>,
    cells: Vec<usize>,
}

impl Design {
    /// Validates a runs-as-rows integer matrix against declared level counts.
    pub fn new(rows: &[Vec<usize>], levels: &[usize]) -> Result<Self> {
        if rows.is_empty() || levels.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let m = levels.len();
        let mut cells = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: m,
                    found: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Self::from_cells(rows.len(), levels.to_vec(), cells)
    }

    /// Validates a row-major cell buffer of `runs * levels.len()` entries.
    pub fn from_cells(runs: usize, levels: Vec<usize>, cells: Vec<usize>) -> Result<Self> {
        if runs == 0 || levels.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let m = levels.len();
        if cells.len() != runs * m {
            return Err(Error::DimensionMismatch {
                expected: runs * m,
                found: cells.len(),
            });
        }
        if let Some((factor, &s)) = levels.iter().enumerate().find(|(_, &s)| s < 2) {
            return Err(Error::TooFewLevels { factor, levels: s });
        }
        for (idx, &value) in cells.iter().enumerate() {
            let factor = idx % m;
            if value >= levels[factor] {
                return Err(Error::LevelOutOfRange {
                    row: idx / m,
                    factor,
                    value,
                    levels: levels[factor],
                });
            }
        }
        Ok(Self {
            runs,
            levels,
            cells,
        })
    }

    /// The full factorial over `levels`, runs in lexicographic order.
    pub fn full_factorial(levels: &[usize]) -> Result<Self> {
        let rows: Vec<Vec<usize>> = levels
            .iter()
            .map(|&s| 0..s)
            .multi_cartesian_product()
            .collect();
        Self::new(&rows, levels)
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn factors(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn row(&self, i: usize) -> &[usize] {
        let m = self.factors();
        &self.cells[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cells.chunks(self.factors())
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.factors() + j]
    }

    /// `N = s_1 * ... * s_m`, or `None` on overflow.
    pub fn full_size(&self) -> Option<usize> {
        self.levels
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
    }

    /// `m' = sum_j (s_j - 1)`, the largest polynomial degree.
    pub fn max_degree(&self) -> usize {
        self.levels.iter().map(|s| s - 1).sum()
    }

    pub fn is_three_level(&self) -> bool {
        self.levels.iter().all(|&s| s == 3)
    }

    pub(crate) fn require_three_level(&self) -> Result<()> {
        match self.levels.iter().enumerate().find(|(_, &s)| s != 3) {
            Some((factor, &levels)) => Err(Error::NotThreeLevel { factor, levels }),
            None => Ok(()),
        }
    }

    /// Largest `r` such that every `r`-column projection holds each level
    /// combination equally often. Returns 0 when even single columns are
    /// unbalanced.
    pub fn strength(&self) -> usize {
        let m = self.factors();
        let mut strength = 0;
        // Balance at r implies balance at every r' < r, so stop at the first failure.
        for r in 1..=m {
            if (0..m)
                .combinations(r)
                .all(|cols| self.projection_balanced(&cols))
            {
                strength = r;
            } else {
                break;
            }
        }
        strength
    }

    fn projection_balanced(&self, cols: &[usize]) -> bool {
        let cells: usize = cols.iter().map(|&c| self.levels[c]).product();
        if !self.runs.is_multiple_of(cells) {
            return false;
        }
        let mut counts = vec![0usize; cells];
        for row in self.rows() {
            let idx = cols
                .iter()
                .fold(0usize, |acc, &c| acc * self.levels[c] + row[c]);
            counts[idx] += 1;
        }
        let expected = self.runs / cells;
        counts.iter().all(|&c| c == expected)
    }

    pub fn apply_permutation(&self, perm: &LevelPermutation) -> Result<Self> {
        if perm.levels() != self.levels.as_slice() {
            if perm.factors() != self.factors() {
                return Err(Error::DimensionMismatch {
                    expected: self.factors(),
                    found: perm.factors(),
                });
            }
            let factor = perm
                .levels()
                .iter()
                .zip(&self.levels)
                .position(|(a, b)| a != b)
                .unwrap_or(0);
            return Err(Error::InvalidPermutation {
                factor,
                reason: format!(
                    "maps {} levels but the factor has {}",
                    perm.levels()[factor],
                    self.levels[factor]
                ),
            });
        }
        let m = self.factors();
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(idx, &x)| perm.image(idx % m, x))
            .collect();
        Ok(Self {
            runs: self.runs,
            levels: self.levels.clone(),
            cells,
        })
    }

    /// Reverses the level order of every factor: `x -> s_j - 1 - x`.
    pub fn mirror_image(&self) -> Self {
        let m = self.factors();
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(idx, &x)| self.levels[idx % m] - 1 - x)
            .collect();
        Self {
            runs: self.runs,
            levels: self.levels.clone(),
            cells,
        }
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        self.same_runs(&self.mirror_image())
    }

    /// Projection onto the given columns, run order preserved.
    pub fn column_subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDesign);
        }
        let m = self.factors();
        let mut seen = vec![false; m];
        for &c in indices {
            if c >= m {
                return Err(Error::ColumnOutOfRange {
                    index: c,
                    columns: m,
                });
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::DuplicateColumn { index: c });
            }
        }
        let levels = indices.iter().map(|&c| self.levels[c]).collect();
        let cells = self
            .rows()
            .flat_map(|row| indices.iter().map(move |&c| row[c]))
            .collect();
        Ok(Self {
            runs: self.runs,
            levels,
            cells,
        })
    }

    /// Rows sorted lexicographically; two designs with equal sorted runs
    /// are the same design.
    pub fn sorted_runs(&self) -> Vec<&[usize]> {
        let mut rows: Vec<&[usize]> = self.rows().collect();
        rows.sort_unstable();
        rows
    }

    pub fn same_runs(&self, other: &Self) -> bool {
        self.levels == other.levels
            && self.runs == other.runs
            && self.sorted_runs() == other.sorted_runs()
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.rows().map(<[usize]>::to_vec).collect()
    }
}

/// Per-factor bijections on `{0, .., s_j - 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelPermutation {
    maps: Vec<Vec<usize>>,
}

impl LevelPermutation {
    pub fn identity(levels: &[usize]) -> Self {
        Self {
            maps: levels.iter().map(|&s| (0..s).collect()).collect(),
        }
    }

    /// `x -> s_j - 1 - x` on every factor.
    pub fn reversal(levels: &[usize]) -> Self {
        Self {
            maps: levels.iter().map(|&s| (0..s).rev().collect()).collect(),
        }
    }

    pub fn new(maps: Vec<Vec<usize>>) -> Result<Self> {
        for (factor, map) in maps.iter().enumerate() {
            check_bijection(factor, map)?;
        }
        Ok(Self { maps })
    }

    /// Replaces the map of one factor; `image[x]` is the new label of level `x`.
    pub fn with_factor(mut self, factor: usize, image: Vec<usize>) -> Result<Self> {
        if factor >= self.maps.len() {
            return Err(Error::ColumnOutOfRange {
                index: factor,
                columns: self.maps.len(),
            });
        }
        if image.len() != self.maps[factor].len() {
            return Err(Error::InvalidPermutation {
                factor,
                reason: format!(
                    "image has {} entries, factor has {} levels",
                    image.len(),
                    self.maps[factor].len()
                ),
            });
        }
        check_bijection(factor, &image)?;
        self.maps[factor] = image;
        Ok(self)
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if self.levels() != next.levels() {
            return Err(Error::DimensionMismatch {
                expected: self.factors(),
                found: next.factors(),
            });
        }
        let maps = self
            .maps
            .iter()
            .zip(&next.maps)
            .map(|(a, b)| a.iter().map(|&x| b[x]).collect())
            .collect();
        Ok(Self { maps })
    }

    pub fn factors(&self) -> usize {
        self.maps.len()
    }

    pub fn levels(&self) -> Vec<usize> {
        self.maps.iter().map(Vec::len).collect()
    }

    pub fn image(&self, factor: usize, level: usize) -> usize {
        self.maps[factor][level]
    }

    pub fn map(&self, factor: usize) -> &[usize] {
        &self.maps[factor]
    }
}

fn check_bijection(factor: usize, map: &[usize]) -> Result<()> {
    let s = map.len();
    let mut hit = vec![false; s];
    for &y in map {
        if y >= s {
            return Err(Error::InvalidPermutation {
                factor,
                reason: format!("level {y} outside 0..{s}"),
            });
        }
        if std::mem::replace(&mut hit[y], true) {
            return Err(Error::InvalidPermutation {
                factor,
                reason: format!("level {y} appears twice"),
            });
        }
    }
    Ok(())
}

/// An exponent tuple `t`: entry `t_j` is the polynomial degree in factor `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ExponentTuple(Vec<usize>);

impl ExponentTuple {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(m: usize) -> Self {
        Self(vec![0; m])
    }

    /// Unit tuple with degree 1 in `factor`.
    pub fn linear(m: usize, factor: usize) -> Self {
        let mut t = vec![0; m];
        t[factor] = 1;
        Self(t)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Number of nonzero entries.
    pub fn norm0(&self) -> usize {
        self.0.iter().filter(|&&t| t != 0).count()
    }

    /// Total polynomial degree.
    pub fn norm1(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn count_of(&self, degree: usize) -> usize {
        self.0.iter().filter(|&&t| t == degree).count()
    }
}

/// The tuple set `T = S_1 x ... x S_m` with a mixed-radix index that
/// follows lexicographic order (factor 1 most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpace {
    levels: Vec<usize>,
    size: usize,
}

/// Largest factor count for which all `N` tuples are materialized.
pub const MAX_ENUMERATED_FACTORS: usize = 12;

impl TupleSpace {
    pub fn new(levels: &[usize]) -> Result<Self> {
        if levels.len() > MAX_ENUMERATED_FACTORS {
            return Err(Error::TooManyFactors {
                factors: levels.len(),
                limit: MAX_ENUMERATED_FACTORS,
            });
        }
        let size = levels.iter().product();
        Ok(Self {
            levels: levels.to_vec(),
            size,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn index_of(&self, t: &[usize]) -> usize {
        t.iter()
            .zip(&self.levels)
            .fold(0, |acc, (&tj, &s)| acc * s + tj)
    }

    pub fn tuple_at(&self, mut index: usize) -> ExponentTuple {
        let mut t = vec![0; self.levels.len()];
        for (slot, &s) in t.iter_mut().zip(&self.levels).rev() {
            *slot = index % s;
            index /= s;
        }
        ExponentTuple(t)
    }

    /// All tuples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = ExponentTuple> + '_ {
        (0..self.size).map(|i| self.tuple_at(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff3x2() -> Design {
        Design::full_factorial(&[3, 3]).unwrap()
    }

    #[test]
    fn minimal_design_is_valid() {
        let d = Design::new(&[vec![0]], &[2]).unwrap();
        assert_eq!((d.runs(), d.factors()), (1, 1));
    }

    #[test]
    fn out_of_range_cell_is_rejected() {
        let err = Design::new(&[vec![0, 3], vec![1, 2]], &[3, 3]).unwrap_err();
        assert!(matches!(
            err,
            Error::LevelOutOfRange {
                row: 0,
                factor: 1,
                value: 3,
                ..
            }
        ));
    }

    #[test]
    fn ragged_and_empty_matrices_are_rejected() {
        assert!(matches!(
            Design::new(&[vec![0, 1], vec![1]], &[2, 2]),
            Err(Error::RaggedRow { row: 1, .. })
        ));
        assert_eq!(Design::new(&[], &[2]), Err(Error::EmptyDesign));
        assert_eq!(Design::new(&[vec![]], &[]), Err(Error::EmptyDesign));
        assert!(matches!(
            Design::new(&[vec![0]], &[1]),
            Err(Error::TooFewLevels { .. })
        ));
    }

    #[test]
    fn full_factorial_strength() {
        let d = ff3x2();
        assert_eq!(d.runs(), 9);
        assert_eq!(d.strength(), 2);
    }

    #[test]
    fn constant_column_has_strength_zero() {
        let rows: Vec<Vec<usize>> = (0..18).map(|i| vec![i % 3, 0]).collect();
        let d = Design::new(&rows, &[3, 3]).unwrap();
        assert_eq!(d.strength(), 0);
    }

    #[test]
    fn pointwise_permutation() {
        let d = Design::new(&[vec![2, 0, 1, 0]], &[3; 4]).unwrap();
        let shift = LevelPermutation::new(vec![vec![1, 2, 0]; 4]).unwrap();
        assert_eq!(d.apply_permutation(&shift).unwrap().row(0), &[0, 1, 2, 1]);
        let id = LevelPermutation::identity(&[3; 4]);
        assert_eq!(d.apply_permutation(&id).unwrap(), d);
    }

    #[test]
    fn permutation_dimension_mismatch() {
        let d = ff3x2();
        let p = LevelPermutation::identity(&[3, 3, 3]);
        assert!(matches!(
            d.apply_permutation(&p),
            Err(Error::DimensionMismatch { .. })
        ));
        let p = LevelPermutation::identity(&[3, 2]);
        assert!(matches!(
            d.apply_permutation(&p),
            Err(Error::InvalidPermutation { factor: 1, .. })
        ));
    }

    #[test]
    fn non_bijection_is_rejected() {
        assert!(LevelPermutation::new(vec![vec![0, 0, 1]]).is_err());
        assert!(LevelPermutation::new(vec![vec![0, 3, 1]]).is_err());
        assert!(LevelPermutation::identity(&[3])
            .with_factor(0, vec![1, 0])
            .is_err());
    }

    #[test]
    fn composition_applies_left_first() {
        let a = LevelPermutation::new(vec![vec![1, 2, 0]]).unwrap();
        let b = LevelPermutation::new(vec![vec![2, 0, 1]]).unwrap();
        assert_eq!(a.then(&b).unwrap(), LevelPermutation::identity(&[3]));
        let a = LevelPermutation::new(vec![vec![1, 0, 2]]).unwrap();
        let b = LevelPermutation::new(vec![vec![0, 2, 1]]).unwrap();
        // 0 -> 1 -> 2, 1 -> 0 -> 0, 2 -> 2 -> 1
        assert_eq!(a.then(&b).unwrap().map(0), &[2, 0, 1]);
    }

    #[test]
    fn mirror_reverses_levels() {
        let d = Design::new(&[vec![2, 0, 1, 0]], &[3; 4]).unwrap();
        assert_eq!(d.mirror_image().row(0), &[0, 2, 1, 2]);
        assert_eq!(d.mirror_image().mirror_image(), d);
    }

    #[test]
    fn single_center_run_is_mirror_symmetric() {
        let d = Design::new(&[vec![1, 1, 1]], &[3; 3]).unwrap();
        assert!(d.is_mirror_symmetric());
        let d = Design::new(&[vec![0, 1, 1]], &[3; 3]).unwrap();
        assert!(!d.is_mirror_symmetric());
    }

    #[test]
    fn column_subset_checks_indices() {
        let d = Design::full_factorial(&[3, 2, 3]).unwrap();
        let p = d.column_subset(&[2, 0]).unwrap();
        assert_eq!(p.levels(), &[3, 3]);
        assert_eq!(p.row(5), &[d.cell(5, 2), d.cell(5, 0)]);
        assert_eq!(d.column_subset(&[0, 1, 2]).unwrap(), d);
        assert!(matches!(
            d.column_subset(&[3]),
            Err(Error::ColumnOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            d.column_subset(&[1, 1]),
            Err(Error::DuplicateColumn { index: 1 })
        ));
    }

    #[test]
    fn tuple_norms() {
        let t = ExponentTuple::new(vec![0, 2, 1, 2]);
        assert_eq!(t.norm0(), 3);
        assert_eq!(t.norm1(), 5);
        assert_eq!(t.count_of(2), 2);
    }

    #[test]
    fn tuple_space_is_lexicographic() {
        let space = TupleSpace::new(&[2, 3]).unwrap();
        let all: Vec<Vec<usize>> = space.iter().map(|t| t.entries().to_vec()).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        for (i, t) in space.iter().enumerate() {
            assert_eq!(space.index_of(t.entries()), i);
        }
        assert!(TupleSpace::new(&[2; 13]).is_err());
    }
}
