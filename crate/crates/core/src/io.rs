//! Text formats and report emission.
//!
//! Design file: a header `n m s_1 .. s_m`, then `n` rows of `m` integers
//! (runs as rows). With `transpose`, the body holds `m` rows of `n`
//! integers instead. Blank lines and lines starting with `#` are skipped.
//!
//! Covariance file: a line holding `n`, then `n` rows of `n` reals.

use std::fmt::Write as _;

use serde::Serialize;

use crate::builtin;
use crate::contamination::{gls_contamination, Covariance, LinearModel};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::identities::Verification;
use crate::indicator::{
    beta_split_from, xi_grid_from, BetaPattern, IndicatorCoefficients, SplitGrid,
};
use crate::ranking::{Catalog, Criterion};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| parse_err(line, format!("cannot parse `{tok}`")))
        })
        .collect()
}

pub fn parse_design(text: &str, transpose: bool) -> Result<Design> {
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header: Vec<usize> = parse_fields(hline, header)?;
    if header.len() < 2 {
        return Err(parse_err(hline, "header must be `n m s_1 .. s_m`"));
    }
    let (n, m) = (header[0], header[1]);
    if header.len() != m + 2 {
        return Err(parse_err(
            hline,
            format!(
                "header declares m = {m} but lists {} level counts",
                header.len() - 2
            ),
        ));
    }
    let levels = header[2..].to_vec();
    let (outer, inner) = if transpose { (m, n) } else { (n, m) };

    let mut body: Vec<Vec<usize>> = Vec::with_capacity(outer);
    let mut last_line = hline;
    for (ln, l) in lines {
        last_line = ln;
        if body.len() == outer {
            return Err(parse_err(
                ln,
                format!("expected {outer} data rows, found more"),
            ));
        }
        let row: Vec<usize> = parse_fields(ln, l)?;
        if row.len() != inner {
            return Err(parse_err(
                ln,
                format!("expected {inner} values, found {}", row.len()),
            ));
        }
        if !transpose {
            for (j, (&x, &s)) in row.iter().zip(&levels).enumerate() {
                if x >= s {
                    return Err(parse_err(
                        ln,
                        format!("level {x} of factor {} outside 0..{s}", j + 1),
                    ));
                }
            }
        }
        body.push(row);
    }
    if body.len() != outer {
        return Err(parse_err(
            last_line,
            format!("expected {outer} data rows, found {}", body.len()),
        ));
    }
    let rows = if transpose {
        (0..n)
            .map(|i| body.iter().map(|f| f[i]).collect())
            .collect()
    } else {
        body
    };
    Design::new(&rows, &levels)
}

pub fn write_design(design: &Design) -> String {
    let mut out = format!("{} {}", design.runs(), design.factors());
    for s in design.levels() {
        let _ = write!(out, " {s}");
    }
    out.push('\n');
    for row in design.rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_covariance(text: &str) -> Result<Covariance> {
    let mut lines = data_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let header: Vec<usize> = parse_fields(hline, header)?;
    let [n] = header[..] else {
        return Err(parse_err(hline, "size line must hold a single integer"));
    };
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (ln, l) in lines {
        let row: Vec<f64> = parse_fields(ln, l)?;
        if row.len() != n {
            return Err(parse_err(
                ln,
                format!("expected {n} values, found {}", row.len()),
            ));
        }
        rows += 1;
        if rows > n {
            return Err(parse_err(ln, format!("expected {n} rows, found more")));
        }
        data.extend(row);
    }
    if rows != n {
        return Err(parse_err(hline, format!("expected {n} rows, found {rows}")));
    }
    Covariance::new(n, data)
}

/// `builtin:<name>` or a path to a design file.
pub fn load_design(source: &str, transpose: bool) -> Result<Design> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin::by_name(name).ok_or_else(|| {
            Error::Input(format!(
                "unknown builtin `{name}` (known: {})",
                builtin::NAMES.join(", ")
            ))
        });
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| Error::Input(format!("cannot read `{source}`: {e}")))?;
    parse_design(&text, transpose)
}

/// Everything `eval` reports for one design.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub source: String,
    pub runs: usize,
    pub factors: usize,
    pub levels: Vec<usize>,
    pub strength: usize,
    pub mirror_symmetric: bool,
    pub beta: BetaPattern,
    /// `(lambda_2, ..)`; absent when the linear model is singular.
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gls_lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_split: Option<SplitGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<SplitGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_split: Option<SplitGrid>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn build(
        source: &str,
        design: &Design,
        splits: bool,
        sigma: Option<&Covariance>,
    ) -> Result<Self> {
        let ind = IndicatorCoefficients::new(design)?;
        let strength = design.strength();
        let mut warnings = Vec::new();
        if strength < 2 {
            warnings.push(format!(
                "strength {strength} < 2: contamination uses the full least-squares alias matrix"
            ));
        }
        let model = LinearModel::new(design);
        let lambda = match &model {
            Ok(m) => Some(m.contamination_pattern()?.values),
            Err(e) => {
                warnings.push(e.to_string());
                None
            }
        };
        let gls_lambda = sigma
            .map(|s| gls_contamination(design, s).map(|p| p.values))
            .transpose()?;
        let three = design.is_three_level();
        let (beta_split, xi, lambda_split) = if splits && three {
            let lambda_split = match &model {
                Ok(m) => Some(m.lambda_split()?),
                Err(_) => None,
            };
            (
                Some(beta_split_from(&ind)),
                Some(xi_grid_from(&ind)),
                lambda_split,
            )
        } else {
            if splits {
                warnings.push("split quantities need every factor at 3 levels".into());
            }
            (None, None, None)
        };
        Ok(Self {
            source: source.to_string(),
            runs: design.runs(),
            factors: design.factors(),
            levels: design.levels().to_vec(),
            strength,
            mirror_symmetric: design.is_mirror_symmetric(),
            beta: BetaPattern::from_indicator(&ind),
            lambda,
            gls_lambda,
            beta_split,
            xi,
            lambda_split,
            warnings,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `quantity,k,value` line per pattern entry, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,k,value\n");
        for (i, v) in self.beta.values().iter().enumerate() {
            let _ = writeln!(out, "beta,{},{}", i + 1, v);
        }
        if let Some(lambda) = &self.lambda {
            for (i, v) in lambda.iter().enumerate() {
                let _ = writeln!(out, "lambda,{},{}", i + 2, v);
            }
        }
        if let Some(gls) = &self.gls_lambda {
            for (i, v) in gls.iter().enumerate() {
                let _ = writeln!(out, "gls_lambda,{},{}", i + 2, v);
            }
        }
        for (name, grid) in [
            ("beta_split", &self.beta_split),
            ("xi", &self.xi),
            ("lambda_split", &self.lambda_split),
        ] {
            if let Some(g) = grid {
                for (i, j, v) in g.iter() {
                    let _ = writeln!(out, "{name},{i}:{j},{v}");
                }
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "design            {}", self.source);
        let _ = writeln!(
            out,
            "runs x factors    {} x {} (levels {})",
            self.runs,
            self.factors,
            self.levels
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(out, "strength          {}", self.strength);
        let _ = writeln!(out, "mirror-symmetric  {}", self.mirror_symmetric);
        let _ = writeln!(out, "beta  (k=1..)     {}", fmt3(self.beta.values()));
        match &self.lambda {
            Some(l) => {
                let _ = writeln!(out, "lambda (k=2..)    {}", fmt3(l));
            }
            None => {
                let _ = writeln!(out, "lambda (k=2..)    n/a");
            }
        }
        if let Some(g) = &self.gls_lambda {
            let _ = writeln!(out, "gls lambda (k=2..) {}", fmt3(g));
        }
        for (name, grid) in [
            ("beta_{i,j}", &self.beta_split),
            ("xi_{i,j}", &self.xi),
            ("lambda_{i,j}", &self.lambda_split),
        ] {
            if let Some(g) = grid {
                let _ = writeln!(out, "{name}");
                for (i, row) in g.rows().iter().enumerate() {
                    let _ = writeln!(out, "  i={i}: {}", fmt3(row));
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Three-decimal display; `-0.000` prints as `0.000`.
pub fn fmt3(values: &[f64]) -> String {
    let parts: Vec<String> = values
        .iter()
        .map(|v| {
            let s = format!("{v:.3}");
            if s == "-0.000" {
                "0.000".into()
            } else {
                s
            }
        })
        .collect();
    format!("({})", parts.join(", "))
}

pub fn verification_table(source: &str, v: &Verification) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "identity checks for {source}");
    let _ = writeln!(
        out,
        "{:<22} {:<14} {:>14} {:>14} {:>10}  status",
        "check", "params", "lhs", "rhs", "residual"
    );
    for r in &v.reports {
        let _ = writeln!(
            out,
            "{:<22} {:<14} {:>14.9} {:>14.9} {:>10.2e}  {}",
            r.name,
            r.params.to_string(),
            r.lhs,
            r.rhs,
            r.residual,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    for s in &v.precondition_failures {
        let _ = writeln!(out, "{:<22} precondition failed: {}", s.check, s.reason);
    }
    for s in &v.not_applicable {
        let _ = writeln!(out, "{:<22} not applicable: {}", s.check, s.reason);
    }
    let failed = v.failures().count();
    let _ = writeln!(
        out,
        "{} checks, {} failed, {} precondition failures, max residual {:.2e}",
        v.reports.len(),
        failed,
        v.precondition_failures.len(),
        v.max_residual()
    );
    out
}

pub fn verification_csv(v: &Verification) -> String {
    let mut out = String::from("check,params,lhs,rhs,residual,pass\n");
    for r in &v.reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            r.params.to_string().replace(',', ";"),
            r.lhs,
            r.rhs,
            r.residual,
            r.pass
        );
    }
    for s in &v.precondition_failures {
        let _ = writeln!(out, "{},precondition,,,,false", s.check);
    }
    out
}

/// Catalog rows sorted by contamination rank, then beta rank.
fn sorted_rows(catalog: &Catalog, notable_only: bool) -> Vec<(usize, usize, usize)> {
    let beta = catalog.ranks(Criterion::Beta);
    let lambda = catalog.ranks(Criterion::Lambda);
    let mut rows: Vec<(usize, usize, usize)> = (0..catalog.len())
        .filter(|&i| !notable_only || beta[i] == 1 || lambda[i] == 1 || beta[i] != lambda[i])
        .map(|i| (lambda[i], beta[i], i))
        .collect();
    rows.sort_unstable();
    rows
}

/// Full catalog as CSV; every pattern entry at full precision.
pub fn catalog_csv(catalog: &Catalog) -> String {
    let Some(first) = catalog.entries.first() else {
        return "columns,perms,lambda_rank,beta_rank\n".into();
    };
    let mut out = String::from("columns,perms,lambda_rank,beta_rank");
    for k in first.lambda.degrees() {
        let _ = write!(out, ",lambda_{k}");
    }
    for k in 1..=first.beta.max_degree() {
        let _ = write!(out, ",beta_{k}");
    }
    out.push('\n');
    for (lr, br, i) in sorted_rows(catalog, false) {
        let e = &catalog.entries[i];
        let _ = write!(out, "\"{}\",\"{}\",{lr},{br}", e.label(), e.perm_codes());
        for v in e.lambda.values().iter().chain(e.beta.values()) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
struct CatalogJson<'a> {
    raw_count: usize,
    distinct: usize,
    rule: crate::ranking::DedupRule,
    eps: f64,
    consistency: Option<crate::ranking::ConsistencyReport>,
    entries: Vec<CatalogRowJson<'a>>,
}

#[derive(Debug, Clone, Serialize)]
struct CatalogRowJson<'a> {
    label: String,
    columns: Vec<usize>,
    perms: &'a [Vec<usize>],
    lambda_rank: usize,
    beta_rank: usize,
    lambda: &'a [f64],
    beta: &'a [f64],
}

pub fn catalog_json(catalog: &Catalog) -> String {
    let entries = sorted_rows(catalog, false)
        .into_iter()
        .map(|(lr, br, i)| {
            let e = &catalog.entries[i];
            CatalogRowJson {
                label: e.label(),
                columns: e.columns.iter().map(|c| c + 1).collect(),
                perms: &e.perms,
                lambda_rank: lr,
                beta_rank: br,
                lambda: e.lambda.values(),
                beta: e.beta.values(),
            }
        })
        .collect();
    let doc = CatalogJson {
        raw_count: catalog.raw_count,
        distinct: catalog.len(),
        rule: catalog.rule,
        eps: catalog.eps,
        consistency: catalog.consistency_rate().ok(),
        entries,
    };
    serde_json::to_string_pretty(&doc).expect("catalog serializes")
}

/// Summary table: best and inconsistently ranked entries with
/// `(lambda_2, lambda_3, lambda_4)` and `(beta_3, beta_4, beta_5)`.
pub fn catalog_table(catalog: &Catalog) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:<30} {:<30}",
        "columns", "(l2,l3,l4)^rank", "(b3,b4,b5)^rank"
    );
    for (lr, br, i) in sorted_rows(catalog, true) {
        let e = &catalog.entries[i];
        let lam: Vec<f64> = (2..=4).map(|k| e.lambda.get(k)).collect();
        let beta: Vec<f64> = (3..=5).map(|k| e.beta.get(k)).collect();
        let _ = writeln!(
            out,
            "{:<24} {:<30} {:<30}",
            e.label(),
            format!("{}^{lr}", fmt3(&lam)),
            format!("{}^{br}", fmt3(&beta))
        );
    }
    if let Ok(c) = catalog.consistency_rate() {
        let _ = writeln!(
            out,
            "consistent rate {}/{} ({:.1}%), {} designs evaluated",
            c.consistent,
            c.total,
            100.0 * c.rate,
            catalog.raw_count
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_runs_as_rows_with_comments() {
        let text = "# full factorial\n4 2 2 2\n0 0\n0 1\n\n1 0\n1 1\n";
        let d = parse_design(text, false).unwrap();
        assert_eq!(d, Design::full_factorial(&[2, 2]).unwrap());
    }

    #[test]
    fn transposed_layout() {
        let text = "3 2 3 3\n0 1 2\n2 1 0\n";
        let d = parse_design(text, true).unwrap();
        assert_eq!(d.to_rows(), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("2 2 3 3\n0 1\n0 3\n", 3),
            ("2 2 3 3\n0 1\n0\n", 3),
            ("2 2 3\n0 1\n", 1),
            ("2 2 3 3\n0 x\n1 1\n", 2),
            ("2 2 3 3\n0 1\n", 2),
            ("1 2 3 3\n0 1\n1 1\n", 3),
        ];
        for (text, line) in cases {
            match parse_design(text, false) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(parse_design("", false).is_err());
    }

    #[test]
    fn design_round_trip() {
        let d = builtin::d2();
        assert_eq!(parse_design(&write_design(&d), false).unwrap(), d);
    }

    #[test]
    fn covariance_file() {
        let c = parse_covariance("2\n2 0.5\n0.5 1\n").unwrap();
        assert_eq!(c.get(0, 1), 0.5);
        assert!(parse_covariance("2\n1 0\n").is_err());
        assert!(matches!(
            parse_covariance("2\n1 2\n2 1\n"),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn unknown_builtin() {
        assert!(load_design("builtin:nope", false).is_err());
        assert_eq!(load_design("builtin:L18", false).unwrap(), builtin::l18());
    }

    #[test]
    fn three_decimal_formatting() {
        assert_eq!(fmt3(&[0.28125, -1e-17, 5.0625]), "(0.281, 0.000, 5.062)");
    }
}
