use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mincontam::io::{self, EvalReport};
use mincontam::ranking::{Catalog, DedupRule, PermutationSet, PATTERN_EPS};
use mincontam::{identities, Design, Error, LevelPermutation};

#[derive(Parser)]
#[command(
    name = "mincontam",
    version,
    about = "Beta-wordlength and contamination patterns for multi-level designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Beta-wordlength and contamination patterns of one design.
    Eval {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        /// Also report beta_{i,j}, xi_{i,j} and lambda_{i,j}.
        #[arg(long)]
        splits: bool,
        /// Covariance file for the generalized least-squares pattern.
        #[arg(long, value_name = "FILE")]
        sigma: Option<PathBuf>,
    },
    /// Check the three-level identities numerically; exits 1 on any failure.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = identities::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Enumerate and rank column subsets of a base design.
    Search {
        /// Base design: `builtin:NAME` or a file.
        #[arg(long, default_value = "builtin:L18")]
        base: String,
        /// Number of columns per derived design.
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = PermsArg::Cyclic)]
        perms: PermsArg,
        #[arg(long, value_enum, default_value_t = DedupArg::Both)]
        dedup: DedupArg,
        /// Patterns closer than this are equal.
        #[arg(long, default_value_t = PATTERN_EPS)]
        eps: f64,
        #[arg(long)]
        transpose: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Relabel levels and print the resulting design.
    Permute {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the mirror image (every level x mapped to s - 1 - x).
    Mirror {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the orthogonal-array strength.
    Strength {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Args)]
struct Input {
    /// `builtin:NAME` (D1, D2, D1p, D2p, L18) or a design file.
    source: String,
    /// The file lists factors as rows instead of runs.
    #[arg(long)]
    transpose: bool,
    /// Relabel levels of a factor, e.g. `2:201` or `2:2,0,1` (1-based factor,
    /// image of levels 0,1,..). Repeatable; later maps apply after earlier ones.
    #[arg(long = "permute", value_name = "COL:IMAGE")]
    permute: Vec<String>,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum PermsArg {
    Identity,
    Cyclic,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum DedupArg {
    Both,
    Either,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Input(_)
            | Error::InvalidPermutation { .. }
            | Error::ColumnOutOfRange { .. }
            | Error::DuplicateColumn { .. }
            | Error::FactorCountOutOfRange { .. }
            | Error::EmptyDesign
            | Error::RaggedRow { .. }
            | Error::TooFewLevels { .. }
            | Error::LevelOutOfRange { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotSymmetric { .. }
            | Error::NotPositiveDefinite => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn parse_permute(spec: &str, levels: &[usize]) -> Result<(usize, Vec<usize>), Failure> {
    let bad = || Failure::Usage(format!("bad --permute `{spec}`; expected COL:IMAGE"));
    let (col, image) = spec.split_once(':').ok_or_else(bad)?;
    let col: usize = col.trim().parse().map_err(|_| bad())?;
    if col == 0 || col > levels.len() {
        return Err(Failure::Usage(format!(
            "--permute column {col} outside 1..={}",
            levels.len()
        )));
    }
    let image: Vec<usize> = if image.contains(',') {
        image
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    } else {
        image
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
            .collect::<Result<_, _>>()?
    };
    Ok((col - 1, image))
}

fn load(input: &Input) -> Result<Design, Failure> {
    let mut design = io::load_design(&input.source, input.transpose)?;
    for spec in &input.permute {
        let (col, image) = parse_permute(spec, design.levels())?;
        let perm = LevelPermutation::identity(design.levels()).with_factor(col, image)?;
        design = design.apply_permutation(&perm)?;
    }
    Ok(design)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Eval {
            input,
            output,
            splits,
            sigma,
        } => {
            let design = load(&input)?;
            let sigma = sigma
                .map(|p| {
                    let text = std::fs::read_to_string(&p).map_err(|e| {
                        Failure::Usage(format!("cannot read `{}`: {e}", p.display()))
                    })?;
                    io::parse_covariance(&text).map_err(Failure::from)
                })
                .transpose()?;
            let report = EvalReport::build(&input.source, &design, splits, sigma.as_ref())?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let text = match output.format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
                Format::Table => report.to_table(),
            };
            emit(&text, output.out.as_ref())
        }
        Command::Verify { input, output, tol } => {
            let design = load(&input)?;
            let v = identities::verify_all(&design, tol);
            let text = match output.format {
                Format::Json => serde_json::to_string_pretty(&v).expect("serializes") + "\n",
                Format::Csv => io::verification_csv(&v),
                Format::Table => io::verification_table(&input.source, &v),
            };
            emit(&text, output.out.as_ref())?;
            if v.passed() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "{} identity checks failed, {} precondition failures",
                    v.failures().count(),
                    v.precondition_failures.len()
                )))
            }
        }
        Command::Search {
            base,
            m,
            perms,
            dedup,
            eps,
            transpose,
            output,
        } => {
            let base = io::load_design(&base, transpose)?;
            let perms = match perms {
                PermsArg::Identity => PermutationSet::Identity,
                PermsArg::Cyclic => PermutationSet::Cyclic,
                PermsArg::All => PermutationSet::All,
            };
            let rule = match dedup {
                DedupArg::Both => DedupRule::Both,
                DedupArg::Either => DedupRule::Either,
            };
            if base.strength() < 2 {
                eprintln!("warning: base design has strength < 2");
            }
            let mut catalog = Catalog::enumerate(&base, m, perms, rule, eps)?;
            catalog.rank_all();
            let text = match output.format {
                Format::Json => io::catalog_json(&catalog) + "\n",
                Format::Csv => io::catalog_csv(&catalog),
                Format::Table => io::catalog_table(&catalog),
            };
            emit(&text, output.out.as_ref())
        }
        Command::Permute { input, out } => {
            let design = load(&input)?;
            emit(&io::write_design(&design), out.as_ref())
        }
        Command::Mirror { input, out } => {
            let design = load(&input)?;
            emit(&io::write_design(&design.mirror_image()), out.as_ref())
        }
        Command::Strength { input } => {
            let design = load(&input)?;
            println!("{}", design.strength());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
