//! Command-line front end.
//!
//! Subcommands: `check-expansion`, `sweep`, `compare-tables`, `oracle`,
//! `export-table`. Exit codes: 0 all checks passed, 1 adjudicated failures,
//! 2 usage or configuration error, 3 I/O error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::protocol::{CorrectionRuleset, FormulaSet, InputCoefficients, MEBasisConvention};
use crate::table_io::{compare_tables, TableFile};
use crate::verifier::{
    check_expansion, oracle_sweep, ref1_implied, sample_generic, sweep, ExpansionCheck,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "qudit-teleport",
    version,
    about = "Simulate and adjudicate a two-quNit entanglement teleportation protocol"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check both expansion formula sets against brute-force projection
    CheckExpansion(CommonOpts),
    /// Run the full protocol for every outcome and report fidelities
    Sweep(CommonOpts),
    /// Diff two correction tables (built-in or from files)
    CompareTables {
        #[command(flatten)]
        opts: CommonOpts,
        /// First table file; defaults to the built-in OURS_TABLE
        path_a: Option<PathBuf>,
        /// Second table file; defaults to the built-in BAAN_TABLE
        path_b: Option<PathBuf>,
    },
    /// Brute-force the correction for each outcome and compare with the
    /// configured ruleset
    Oracle(CommonOpts),
    /// Write a correction table to a file
    ExportTable(CommonOpts),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConventionFlag {
    #[value(name = "STD")]
    Std,
    #[value(name = "M2")]
    M2,
    #[value(name = "REF1_IMPLIED")]
    Ref1Implied,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RulesetFlag {
    #[value(name = "OURS_FORMULA")]
    OursFormula,
    #[value(name = "BAAN_FORMULA")]
    BaAnFormula,
    #[value(name = "OURS_TABLE")]
    OursTable,
    #[value(name = "BAAN_TABLE")]
    BaAnTable,
}

impl RulesetFlag {
    fn ruleset(self) -> CorrectionRuleset {
        match self {
            RulesetFlag::OursFormula => CorrectionRuleset::OursFormula,
            RulesetFlag::BaAnFormula => CorrectionRuleset::BaAnFormula,
            RulesetFlag::OursTable => CorrectionRuleset::OursTable,
            RulesetFlag::BaAnTable => CorrectionRuleset::BaAnTable,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatFlag {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct CommonOpts {
    /// Qudit dimension N
    #[arg(long, default_value_t = 3)]
    dimension: usize,
    /// ME-basis convention
    #[arg(long, value_enum, default_value_t = ConventionFlag::M2)]
    convention: ConventionFlag,
    /// Correction ruleset (table rulesets require dimension 3)
    #[arg(long, value_enum, default_value_t = RulesetFlag::OursFormula)]
    ruleset: RulesetFlag,
    /// Random coefficient vectors per outcome
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// RNG seed for coefficient sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fidelity tolerance for pass/fail decisions
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Fixed input coefficients, comma-separated complex literals (e.g.
    /// `0.6,0.8i`); must be normalized
    #[arg(long)]
    alpha: Option<String>,
    /// Report format
    #[arg(long, value_enum, default_value_t = FormatFlag::Text)]
    format: FormatFlag,
    /// Write the report (or exported table) here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Config {
    dimension: usize,
    convention: MEBasisConvention,
    ruleset: CorrectionRuleset,
    trials: usize,
    seed: u64,
    tolerance: f64,
    alpha: Option<InputCoefficients>,
    format: FormatFlag,
    output: Option<PathBuf>,
}

impl Config {
    fn resolve(opts: &CommonOpts) -> Result<Config> {
        if opts.dimension < 2 {
            return Err(Error::BadDimension(opts.dimension));
        }
        let ruleset = opts.ruleset.ruleset();
        if matches!(ruleset, CorrectionRuleset::OursTable | CorrectionRuleset::BaAnTable)
            && opts.dimension != 3
        {
            return Err(Error::TableDimension(ruleset.name().to_string(), opts.dimension));
        }
        if opts.trials < 1 {
            return Err(Error::InvalidFlag("--trials must be at least 1".into()));
        }
        if !opts.tolerance.is_finite() || opts.tolerance <= 0.0 {
            return Err(Error::InvalidFlag("--tolerance must be positive".into()));
        }
        let convention = match opts.convention {
            ConventionFlag::Std => MEBasisConvention::std(),
            ConventionFlag::M2 => MEBasisConvention::m2(),
            ConventionFlag::Ref1Implied => ref1_implied()?,
        };
        let alpha = match &opts.alpha {
            None => None,
            Some(text) => Some(parse_alpha(text, opts.dimension)?),
        };
        Ok(Config {
            dimension: opts.dimension,
            convention,
            ruleset,
            trials: opts.trials,
            seed: opts.seed,
            tolerance: opts.tolerance,
            alpha,
            format: opts.format,
            output: opts.output.clone(),
        })
    }

    /// Coefficients for commands that adjudicate: the fixed --alpha if
    /// given, otherwise a seeded generic vector.
    fn generic_alpha(&self) -> InputCoefficients {
        match &self.alpha {
            Some(c) => c.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                sample_generic(self.dimension, &mut rng)
            }
        }
    }
}

/// Parses one complex literal: `a`, `bi`, `a+bi`, `a-bi` (also bare `i`).
fn parse_complex(token: &str) -> Option<Complex64> {
    let s = token.trim();
    if s.is_empty() {
        return None;
    }
    if !s.ends_with('i') {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    }
    let body = &s[..s.len() - 1];
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    let imag_part = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok(),
        }
    };
    match split {
        None => imag_part(body).map(|im| Complex64::new(0.0, im)),
        Some(i) => {
            let re = body[..i].parse::<f64>().ok()?;
            let im = imag_part(&body[i..])?;
            Some(Complex64::new(re, im))
        }
    }
}

fn parse_alpha(text: &str, dimension: usize) -> Result<InputCoefficients> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != dimension {
        return Err(Error::InvalidFlag(format!(
            "--alpha needs {dimension} components, got {}",
            parts.len()
        )));
    }
    let mut alpha = Vec::with_capacity(dimension);
    for p in parts {
        let z = parse_complex(p)
            .ok_or_else(|| Error::InvalidFlag(format!("--alpha component `{p}` is not a complex literal")))?;
        alpha.push(z);
    }
    // normalization is required, never applied silently
    InputCoefficients::new(alpha)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses the process arguments and runs the selected command; returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::CheckExpansion(opts) => cmd_check_expansion(&Config::resolve(&opts)?),
        Command::Sweep(opts) => cmd_sweep(&Config::resolve(&opts)?),
        Command::CompareTables { opts, path_a, path_b } => {
            cmd_compare_tables(&Config::resolve(&opts)?, path_a.as_deref(), path_b.as_deref())
        }
        Command::Oracle(opts) => cmd_oracle(&Config::resolve(&opts)?),
        Command::ExportTable(opts) => cmd_export_table(&Config::resolve(&opts)?),
    }
}

#[derive(Serialize)]
struct ExpansionPairJson {
    m: usize,
    n: usize,
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct ExpansionCheckJson {
    formula: String,
    pairs: Vec<ExpansionPairJson>,
    match_count: usize,
    all_match: bool,
    max_deviation: f64,
}

#[derive(Serialize)]
struct ExpansionReportJson {
    dimension: usize,
    convention: String,
    tolerance: f64,
    seed: u64,
    checks: Vec<ExpansionCheckJson>,
    configured_formula: String,
    pass: bool,
}

fn expansion_check_json(check: &ExpansionCheck) -> ExpansionCheckJson {
    ExpansionCheckJson {
        formula: check.formula.name().to_string(),
        pairs: check
            .per_pair
            .iter()
            .map(|(&(m, n), &matches)| ExpansionPairJson { m, n, matches })
            .collect(),
        match_count: check.match_count(),
        all_match: check.all_match(),
        max_deviation: check.max_deviation,
    }
}

fn cmd_check_expansion(cfg: &Config) -> Result<i32> {
    let c = cfg.generic_alpha();
    let ours = check_expansion(&cfg.convention, FormulaSet::Ours, &c, cfg.tolerance)?;
    let baan = check_expansion(&cfg.convention, FormulaSet::BaAn, &c, cfg.tolerance)?;
    let configured = cfg.ruleset.formula();
    let pass = match configured {
        FormulaSet::Ours => ours.all_match(),
        FormulaSet::BaAn => baan.all_match(),
    };

    let text = match cfg.format {
        FormatFlag::Json => {
            let report = ExpansionReportJson {
                dimension: cfg.dimension,
                convention: cfg.convention.name().to_string(),
                tolerance: cfg.tolerance,
                seed: cfg.seed,
                checks: vec![expansion_check_json(&ours), expansion_check_json(&baan)],
                configured_formula: configured.name().to_string(),
                pass,
            };
            format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
        }
        FormatFlag::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "expansion check: dimension {}, convention {}, tolerance {:e}\n",
                cfg.dimension,
                cfg.convention.name(),
                cfg.tolerance
            ));
            out.push_str(" m n   OURS       BAAN\n");
            for (&(m, n), &ours_ok) in &ours.per_pair {
                let baan_ok = baan.per_pair[&(m, n)];
                out.push_str(&format!(
                    " {} {}   {:<8}   {:<8}\n",
                    m,
                    n,
                    if ours_ok { "match" } else { "MISMATCH" },
                    if baan_ok { "match" } else { "MISMATCH" },
                ));
            }
            let pairs = ours.per_pair.len();
            out.push_str(&format!(
                "OURS: {}/{} pairs match (max deviation {:.3e})\n",
                ours.match_count(),
                pairs,
                ours.max_deviation
            ));
            out.push_str(&format!(
                "BAAN: {}/{} pairs match (max deviation {:.3e})\n",
                baan.match_count(),
                pairs,
                baan.max_deviation
            ));
            out.push_str(&format!(
                "configured formula {} (ruleset {}): {}\n",
                configured.name(),
                cfg.ruleset.name(),
                if pass { "PASS" } else { "FAIL" }
            ));
            out
        }
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_sweep(cfg: &Config) -> Result<i32> {
    let c = match &cfg.alpha {
        Some(c) => c.clone(),
        None => InputCoefficients::uniform(cfg.dimension)?,
    };
    let report = sweep(&c, &cfg.convention, cfg.ruleset, cfg.trials, cfg.tolerance, cfg.seed)?;

    let text = match cfg.format {
        FormatFlag::Json => {
            format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
        }
        FormatFlag::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "sweep: dimension {}, convention {}, ruleset {}, trials {}, seed {}, tolerance {:e}\n",
                report.dimension, report.convention, report.ruleset, report.trials, report.seed,
                report.tolerance
            ));
            out.push_str(" l m n   probability    min_fidelity   max_fidelity   result\n");
            for s in &report.outcomes {
                out.push_str(&format!(
                    " {} {} {}   {:<12.10}   {:<12.10}   {:<12.10}   {}\n",
                    s.l,
                    s.m,
                    s.n,
                    s.probability,
                    s.min_fidelity,
                    s.max_fidelity,
                    if s.pass { "pass" } else { "FAIL" }
                ));
            }
            out.push_str(&format!(
                "passed {} of {} outcomes ({} failed)\n",
                report.pass_count,
                report.outcomes.len(),
                report.fail_count
            ));
            out
        }
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(if report.fail_count == 0 { 0 } else { 1 })
}

#[derive(Serialize)]
struct RowJson {
    perm: Vec<usize>,
    phase: Vec<u32>,
}

#[derive(Serialize)]
struct TableDiffJson {
    l: usize,
    m: usize,
    n: usize,
    a: RowJson,
    b: RowJson,
}

#[derive(Serialize)]
struct CompareReportJson {
    dimension: usize,
    table_a: String,
    table_b: String,
    differences: Vec<TableDiffJson>,
    diff_count: usize,
}

fn table_side(path: Option<&Path>, fallback: CorrectionRuleset, dim: usize) -> Result<(TableFile, String)> {
    match path {
        Some(p) => {
            let t = TableFile::read(p)?;
            let label = p.display().to_string();
            Ok((t, label))
        }
        None => Ok((
            TableFile::from_ruleset(fallback, dim)?,
            format!("{} (built-in)", fallback.name()),
        )),
    }
}

fn cmd_compare_tables(cfg: &Config, path_a: Option<&Path>, path_b: Option<&Path>) -> Result<i32> {
    // a file's own header decides its dimension; built-ins use --dimension
    let (a, label_a) = table_side(path_a, CorrectionRuleset::OursTable, cfg.dimension)?;
    let (b, label_b) = table_side(path_b, CorrectionRuleset::BaAnTable, a.dimension)?;
    let diffs = compare_tables(&a, &b)?;

    let text = match cfg.format {
        FormatFlag::Json => {
            let report = CompareReportJson {
                dimension: a.dimension,
                table_a: a.ruleset.clone(),
                table_b: b.ruleset.clone(),
                differences: diffs
                    .iter()
                    .map(|&o| {
                        let ra = a.row(o);
                        let rb = b.row(o);
                        TableDiffJson {
                            l: o.l,
                            m: o.m,
                            n: o.n,
                            a: RowJson { perm: ra.perm.clone(), phase: ra.phases.clone() },
                            b: RowJson { perm: rb.perm.clone(), phase: rb.phases.clone() },
                        }
                    })
                    .collect(),
                diff_count: diffs.len(),
            };
            format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
        }
        FormatFlag::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "comparing {} vs {} (dimension {})\n",
                label_a, label_b, a.dimension
            ));
            for &o in &diffs {
                let ra = a.row(o);
                let rb = b.row(o);
                out.push_str(&format!("{o} differs:\n"));
                out.push_str(&format!("  A: {}\n", render_row(&ra.perm, &ra.phases)));
                out.push_str(&format!("  B: {}\n", render_row(&rb.perm, &rb.phases)));
            }
            out.push_str(&format!("{} differing outcomes\n", diffs.len()));
            out
        }
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(if diffs.is_empty() { 0 } else { 1 })
}

fn render_row(perm: &[usize], phases: &[u32]) -> String {
    let p: Vec<String> = perm.iter().map(|x| x.to_string()).collect();
    let t: Vec<String> = phases.iter().map(|x| x.to_string()).collect();
    format!("perm=[{}] phase=[{}]", p.join(" "), t.join(" "))
}

#[derive(Serialize)]
struct OracleRowJson {
    l: usize,
    m: usize,
    n: usize,
    maximizers: Vec<(usize, usize)>,
    unique: bool,
    ruleset_choice: (usize, usize),
    #[serde(rename = "match")]
    matches: bool,
}

#[derive(Serialize)]
struct OracleReportJson {
    dimension: usize,
    convention: String,
    ruleset: String,
    tolerance: f64,
    seed: u64,
    outcomes: Vec<OracleRowJson>,
    match_count: usize,
    mismatch_count: usize,
}

fn cmd_oracle(cfg: &Config) -> Result<i32> {
    let c = cfg.generic_alpha();
    let results = oracle_sweep(&c, &cfg.convention, cfg.tolerance)?;
    let rows: Vec<OracleRowJson> = results
        .iter()
        .map(|(o, res)| {
            let choice = cfg.ruleset.indices(cfg.dimension, *o);
            OracleRowJson {
                l: o.l,
                m: o.m,
                n: o.n,
                maximizers: res.maximizers.clone(),
                unique: res.unique,
                ruleset_choice: choice,
                matches: res.maximizers.contains(&choice),
            }
        })
        .collect();
    let match_count = rows.iter().filter(|r| r.matches).count();
    let mismatch_count = rows.len() - match_count;

    let text = match cfg.format {
        FormatFlag::Json => {
            let report = OracleReportJson {
                dimension: cfg.dimension,
                convention: cfg.convention.name().to_string(),
                ruleset: cfg.ruleset.name().to_string(),
                tolerance: cfg.tolerance,
                seed: cfg.seed,
                outcomes: rows,
                match_count,
                mismatch_count,
            };
            format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
        }
        FormatFlag::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "oracle: dimension {}, convention {}, ruleset {}, tolerance {:e}\n",
                cfg.dimension,
                cfg.convention.name(),
                cfg.ruleset.name(),
                cfg.tolerance
            ));
            out.push_str(" l m n   maximizers (j,n)      unique   ruleset   match\n");
            for r in &rows {
                let maxi: Vec<String> =
                    r.maximizers.iter().map(|(j, n)| format!("({j},{n})")).collect();
                out.push_str(&format!(
                    " {} {} {}   {:<20}  {:<6}   ({},{})     {}\n",
                    r.l,
                    r.m,
                    r.n,
                    maxi.join(" "),
                    if r.unique { "yes" } else { "no" },
                    r.ruleset_choice.0,
                    r.ruleset_choice.1,
                    if r.matches { "yes" } else { "NO" }
                ));
            }
            out.push_str(&format!(
                "{} of {} outcomes match the configured ruleset\n",
                match_count,
                rows.len()
            ));
            out
        }
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(if mismatch_count == 0 { 0 } else { 1 })
}

fn cmd_export_table(cfg: &Config) -> Result<i32> {
    let path = cfg
        .output
        .as_deref()
        .ok_or_else(|| Error::InvalidFlag("export-table requires --output <path>".into()))?;
    let table = TableFile::from_ruleset(cfg.ruleset, cfg.dimension)?;
    table.write(path)?;
    println!("wrote {} rows to {}", table.rows().len(), path.display());
    Ok(0)
}
