//! Catalogs of derived designs and their ranking under minimum
//! beta-aberration and minimum contamination.
//!
//! Ranking first snaps every pattern value onto a grid of spacing `eps`
//! and then sorts the snapped vectors exactly, so the order is total even
//! where the tolerance comparison is not transitive.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::contamination::{contamination_pattern, ContaminationPattern};
use crate::design::{Design, LevelPermutation};
use crate::error::{Error, Result};
use crate::indicator::{beta_pattern, BetaPattern};

/// Pattern equality tolerance.
pub const PATTERN_EPS: f64 = 1e-9;
/// Agreement with values printed to three decimals.
pub const DISPLAY_TOL: f64 = 5e-4;

/// Sequential comparison: the first position where the values differ by
/// more than `eps` decides.
pub fn lex_compare(a: &[f64], b: &[f64], eps: f64) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::PatternLength {
            left: a.len(),
            right: b.len(),
        });
    }
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > eps {
            return Ok(if x < y {
                Ordering::Less
            } else {
                Ordering::Greater
            });
        }
    }
    Ok(Ordering::Equal)
}

fn within(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
}

fn snap(values: &[f64], eps: f64) -> Vec<i64> {
    values.iter().map(|v| (v / eps).round() as i64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Minimum beta-aberration over `(beta_1, .., beta_{m'})`.
    Beta,
    /// Minimum contamination over `(lambda_2, .., lambda_{m'})`.
    Lambda,
}

/// Per-factor level relabelings tried during enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PermutationSet {
    Identity,
    /// The `s` cyclic shifts `x -> x + c mod s`.
    Cyclic,
    /// All `s!` permutations.
    All,
}

impl PermutationSet {
    pub fn maps(&self, levels: usize) -> Vec<Vec<usize>> {
        match self {
            PermutationSet::Identity => vec![(0..levels).collect()],
            PermutationSet::Cyclic => (0..levels)
                .map(|c| (0..levels).map(|x| (x + c) % levels).collect())
                .collect(),
            PermutationSet::All => (0..levels).permutations(levels).collect(),
        }
    }
}

/// When two enumerated designs count as the same catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupRule {
    /// Both patterns agree.
    Both,
    /// Either pattern agrees.
    Either,
}

/// One column subset of a base design under one assignment of level maps.
#[derive(Debug, Clone)]
pub struct DerivedDesign {
    /// 0-based columns of the base design.
    pub columns: Vec<usize>,
    /// Level map applied to each chosen column.
    pub perms: Vec<Vec<usize>>,
    pub design: Design,
}

/// Every `m`-column subset of `base` under every combination of per-column
/// level maps, in lexicographic column order with maps varying fastest.
pub fn derived_designs(
    base: &Design,
    m: usize,
    perms: PermutationSet,
) -> Result<Vec<DerivedDesign>> {
    if m == 0 || m > base.factors() {
        return Err(Error::FactorCountOutOfRange {
            requested: m,
            available: base.factors(),
        });
    }
    let mut out = Vec::new();
    for cols in (0..base.factors()).combinations(m) {
        let subset = base.column_subset(&cols)?;
        let choices: Vec<Vec<Vec<usize>>> =
            cols.iter().map(|&c| perms.maps(base.levels()[c])).collect();
        for assignment in choices.iter().map(|c| c.iter()).multi_cartesian_product() {
            let maps: Vec<Vec<usize>> = assignment.into_iter().cloned().collect();
            let design = subset.apply_permutation(&LevelPermutation::new(maps.clone())?)?;
            out.push(DerivedDesign {
                columns: cols.clone(),
                perms: maps,
                design,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Base columns, 0-based.
    pub columns: Vec<usize>,
    /// Level map applied to each selected column.
    pub perms: Vec<Vec<usize>>,
    #[serde(skip)]
    pub design: Design,
    pub beta: BetaPattern,
    pub lambda: ContaminationPattern,
    pub beta_rank: Option<usize>,
    pub lambda_rank: Option<usize>,
}

impl CatalogEntry {
    pub fn evaluate(columns: Vec<usize>, perms: Vec<Vec<usize>>, design: Design) -> Result<Self> {
        let beta = beta_pattern(&design)?;
        let lambda = contamination_pattern(&design)?;
        Ok(Self {
            name: None,
            columns,
            perms,
            design,
            beta,
            lambda,
            beta_rank: None,
            lambda_rank: None,
        })
    }

    pub fn pattern(&self, criterion: Criterion) -> &[f64] {
        match criterion {
            Criterion::Beta => self.beta.values(),
            Criterion::Lambda => self.lambda.values(),
        }
    }

    pub fn rank(&self, criterion: Criterion) -> Option<usize> {
        match criterion {
            Criterion::Beta => self.beta_rank,
            Criterion::Lambda => self.lambda_rank,
        }
    }

    /// Columns 1-based, marked `´` for `{0,1,2}->{1,2,0}`, `˘` for
    /// `{0,1,2}->{2,0,1}` and `[...]` for any other relabeling.
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        self.columns
            .iter()
            .zip(&self.perms)
            .map(|(c, p)| format!("{}{}", c + 1, perm_mark(p)))
            .join(",")
    }

    /// Level maps as digit strings, e.g. `201,012,012`.
    pub fn perm_codes(&self) -> String {
        self.perms
            .iter()
            .map(|p| p.iter().map(|d| d.to_string()).collect::<String>())
            .join(",")
    }
}

fn perm_mark(p: &[usize]) -> String {
    if p.iter().enumerate().all(|(i, &v)| i == v) {
        String::new()
    } else if p == [1, 2, 0] {
        "´".into()
    } else if p == [2, 0, 1] {
        "˘".into()
    } else {
        format!("[{}]", p.iter().map(|d| d.to_string()).collect::<String>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub total: usize,
    pub consistent: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    /// Designs evaluated before deduplication.
    pub raw_count: usize,
    pub rule: DedupRule,
    pub eps: f64,
}

impl Catalog {
    /// A catalog of named designs, no deduplication.
    pub fn from_designs(designs: Vec<(String, Design)>) -> Result<Self> {
        let raw_count = designs.len();
        let entries = designs
            .into_iter()
            .map(|(name, design)| {
                let columns = (0..design.factors()).collect();
                let perms = design.levels().iter().map(|&s| (0..s).collect()).collect();
                let mut e = CatalogEntry::evaluate(columns, perms, design)?;
                e.name = Some(name);
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entries,
            raw_count,
            rule: DedupRule::Both,
            eps: PATTERN_EPS,
        })
    }

    /// Every `m`-column subset of `base` under every combination of per-column
    /// level maps from `perms`, deduplicated by `rule` in enumeration order
    /// (first occurrence kept).
    pub fn enumerate(
        base: &Design,
        m: usize,
        perms: PermutationSet,
        rule: DedupRule,
        eps: f64,
    ) -> Result<Self> {
        let jobs = derived_designs(base, m, perms)?;
        let raw_count = jobs.len();
        let evaluated = jobs
            .into_par_iter()
            .map(|d| CatalogEntry::evaluate(d.columns, d.perms, d.design))
            .collect::<Result<Vec<_>>>()?;

        let mut entries: Vec<CatalogEntry> = Vec::new();
        for e in evaluated {
            let dup = entries.iter().any(|k| {
                let same_beta = within(k.beta.values(), e.beta.values(), eps);
                let same_lambda = within(k.lambda.values(), e.lambda.values(), eps);
                match rule {
                    DedupRule::Both => same_beta && same_lambda,
                    DedupRule::Either => same_beta || same_lambda,
                }
            });
            if !dup {
                entries.push(e);
            }
        }
        Ok(Self {
            entries,
            raw_count,
            rule,
            eps,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dense ranks (1 = best) of every entry under `criterion`.
    pub fn ranks(&self, criterion: Criterion) -> Vec<usize> {
        let keys: Vec<Vec<i64>> = self
            .entries
            .iter()
            .map(|e| snap(e.pattern(criterion), self.eps))
            .collect();
        let order: BTreeMap<&Vec<i64>, usize> = keys
            .iter()
            .sorted()
            .dedup()
            .enumerate()
            .map(|(i, k)| (k, i + 1))
            .collect();
        keys.iter().map(|k| order[k]).collect()
    }

    pub fn rank(&mut self, criterion: Criterion) {
        let ranks = self.ranks(criterion);
        for (e, r) in self.entries.iter_mut().zip(ranks) {
            match criterion {
                Criterion::Beta => e.beta_rank = Some(r),
                Criterion::Lambda => e.lambda_rank = Some(r),
            }
        }
    }

    pub fn rank_all(&mut self) {
        self.rank(Criterion::Beta);
        self.rank(Criterion::Lambda);
    }

    pub fn consistency_rate(&self) -> Result<ConsistencyReport> {
        if self.entries.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        let consistent = self
            .ranks(Criterion::Beta)
            .iter()
            .zip(self.ranks(Criterion::Lambda))
            .filter(|(a, b)| **a == *b)
            .count();
        let total = self.entries.len();
        Ok(ConsistencyReport {
            total,
            consistent,
            rate: consistent as f64 / total as f64,
        })
    }

    pub fn best(&self, criterion: Criterion) -> Result<Vec<&CatalogEntry>> {
        if self.entries.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        Ok(self
            .entries
            .iter()
            .zip(self.ranks(criterion))
            .filter(|(_, r)| *r == 1)
            .map(|(e, _)| e)
            .collect())
    }

    /// Entries ranked best by either criterion or ranked differently by the two.
    pub fn notable(&self) -> Vec<&CatalogEntry> {
        let beta = self.ranks(Criterion::Beta);
        let lambda = self.ranks(Criterion::Lambda);
        self.entries
            .iter()
            .zip(beta.iter().zip(&lambda))
            .filter(|(_, (b, l))| **b == 1 || **l == 1 || b != l)
            .map(|(e, _)| e)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn lex_compare_cases() {
        let less = lex_compare(&[0.0, 0.125, 0.75], &[0.0, 0.281, 0.797], PATTERN_EPS).unwrap();
        assert_eq!(less, Ordering::Less);
        let a = [0.0, 0.281, 0.797, 1.406];
        assert_eq!(lex_compare(&a, &a, PATTERN_EPS).unwrap(), Ordering::Equal);
        let b = [0.0, 0.281, 0.844, 1.0];
        assert_eq!(lex_compare(&a, &b, PATTERN_EPS).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(&b, &a, PATTERN_EPS).unwrap(), Ordering::Greater);
        assert_eq!(
            lex_compare(&[1.0, 2.0], &[1.0 + 1e-12, 1.0], PATTERN_EPS).unwrap(),
            Ordering::Greater
        );
        assert!(lex_compare(&[1.0], &[1.0, 2.0], PATTERN_EPS).is_err());
    }

    #[test]
    fn permutation_sets() {
        assert_eq!(PermutationSet::Identity.maps(3), vec![vec![0, 1, 2]]);
        assert_eq!(
            PermutationSet::Cyclic.maps(3),
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]
        );
        assert_eq!(PermutationSet::All.maps(3).len(), 6);
    }

    fn d1_d2() -> Catalog {
        Catalog::from_designs(vec![
            ("D1".into(), builtin::d1()),
            ("D2".into(), builtin::d2()),
        ])
        .unwrap()
    }

    #[test]
    fn headline_rank_swap() {
        let mut cat = d1_d2();
        cat.rank_all();
        assert_eq!(cat.ranks(Criterion::Beta), vec![1, 2]);
        assert_eq!(cat.ranks(Criterion::Lambda), vec![2, 1]);
        assert_eq!(cat.entries[0].beta_rank, Some(1));
        let c = cat.consistency_rate().unwrap();
        assert_eq!((c.total, c.consistent, c.rate), (2, 0, 0.0));
        assert_eq!(cat.best(Criterion::Lambda).unwrap()[0].label(), "D2");
        assert_eq!(cat.best(Criterion::Beta).unwrap()[0].label(), "D1");
    }

    #[test]
    fn singleton_and_duplicate_catalogs() {
        let cat = Catalog::from_designs(vec![("D1".into(), builtin::d1())]).unwrap();
        assert_eq!(cat.ranks(Criterion::Lambda), vec![1]);
        assert_eq!(cat.consistency_rate().unwrap().rate, 1.0);
        assert_eq!(cat.best(Criterion::Beta).unwrap().len(), 1);

        let cat = Catalog::from_designs(vec![
            ("D1".into(), builtin::d1()),
            ("D2".into(), builtin::d2()),
            ("D1 again".into(), builtin::d1().mirror_image()),
        ])
        .unwrap();
        assert_eq!(cat.ranks(Criterion::Beta), vec![1, 2, 1]);
        assert_eq!(cat.ranks(Criterion::Lambda), vec![2, 1, 2]);
    }

    #[test]
    fn empty_catalog_errors() {
        let cat = Catalog::from_designs(vec![]).unwrap();
        assert_eq!(cat.consistency_rate(), Err(Error::EmptyCatalog));
        assert!(cat.best(Criterion::Beta).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let base = builtin::l18();
        let cat = Catalog::enumerate(
            &base,
            3,
            PermutationSet::Cyclic,
            DedupRule::Both,
            PATTERN_EPS,
        )
        .unwrap();
        assert_eq!(cat.raw_count, 35 * 27);
        let cat = Catalog::enumerate(
            &base,
            7,
            PermutationSet::Identity,
            DedupRule::Both,
            PATTERN_EPS,
        )
        .unwrap();
        assert_eq!((cat.raw_count, cat.len()), (1, 1));
        assert!(Catalog::enumerate(
            &base,
            8,
            PermutationSet::Identity,
            DedupRule::Both,
            PATTERN_EPS
        )
        .is_err());
        assert!(Catalog::enumerate(
            &base,
            0,
            PermutationSet::Identity,
            DedupRule::Both,
            PATTERN_EPS
        )
        .is_err());
    }

    #[test]
    fn d1_as_base_reproduces_itself() {
        let cat = Catalog::enumerate(
            &builtin::d1(),
            4,
            PermutationSet::Identity,
            DedupRule::Both,
            PATTERN_EPS,
        )
        .unwrap();
        assert_eq!(cat.len(), 1);
        let beta = beta_pattern(&builtin::d1()).unwrap();
        assert_eq!(cat.entries[0].beta, beta);
    }

    #[test]
    fn labels() {
        let base = builtin::l18();
        let d = base.column_subset(&[0, 1, 4]).unwrap();
        let e = CatalogEntry::evaluate(
            vec![0, 1, 4],
            vec![vec![2, 0, 1], vec![0, 1, 2], vec![1, 2, 0]],
            d,
        )
        .unwrap();
        assert_eq!(e.label(), "1˘,2,5´");
        assert_eq!(e.perm_codes(), "201,012,120");
        assert_eq!(perm_mark(&[0, 2, 1]), "[021]");
    }
}
