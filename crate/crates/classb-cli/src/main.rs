//! `classb`: command-line frontend for the class-B family toolkit.
//!
//! Every subcommand prints JSON (default) or CSV on stdout; diagnostics go
//! to stderr. Exit codes: 0 success, 1 computation error, 2 usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use classb_core::expr::Number;
use classb_core::families::{self, FamilySpec, GridSpec};
use classb_core::moments::{self, MultiIndex, TableKind};
use classb_core::{closedforms, inference, oracle, selftest, tails, transforms};
use std::collections::BTreeMap;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "classb",
    about = "Class-B exponential statistical structures: moments, cumulants, \
             closure transforms, Fisher information and tail bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct FamilyArgs {
    /// Built-in family name (see `classb families`)
    #[arg(long)]
    family: Option<String>,
    /// Classical parameters, e.g. "n=5,p=0.3" or "lambda=2"
    #[arg(long, default_value = "")]
    params: String,
    /// JSON family definition file {name, dim, mean_vars, V, domain}
    #[arg(long)]
    vfile: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentKind {
    Raw,
    Central,
    Cumulant,
}

#[derive(Subcommand)]
enum Command {
    /// List built-in families and their parameter names
    Families {
        /// Print the full parameter mapping table
        #[arg(long)]
        describe: bool,
    },
    /// Symbolic or numeric moment tables
    #[command(alias = "cumulants")]
    Moments {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value = "cumulant")]
        kind: MomentKind,
        #[arg(long, default_value_t = 6)]
        order: u32,
        /// Evaluate at a point, e.g. "x=2" (or "theta=0.4" for chart
        /// families); omit for a symbolic table
        #[arg(long)]
        at: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Residuals of the defining equation on a (z, x) grid
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 5)]
        z_steps: usize,
        #[arg(long, default_value_t = 5)]
        x_steps: usize,
        #[arg(long, default_value_t = 0.5)]
        z_half_width: f64,
    },
    /// Affine image, iid sum, or sample mean of a family
    Transform {
        #[command(flatten)]
        family: FamilyArgs,
        /// Affine map "a11 a12, a21 a22; b1 b2" (univariate: "2; 1")
        #[arg(long)]
        affine: Option<String>,
        /// Sum of n iid copies
        #[arg(long)]
        convolve: Option<u32>,
        /// Mean of n iid copies
        #[arg(long)]
        mean: Option<u32>,
    },
    /// Fisher information matrix V^{-1}(x)
    Fisher {
        #[command(flatten)]
        family: FamilyArgs,
        /// Mean point "x=2" or "x1=1,x2=2" (defaults to the constructed mean)
        #[arg(long)]
        at: Option<String>,
        /// Print the symbolic inverse instead (dim <= 3)
        #[arg(long)]
        symbolic: bool,
    },
    /// Exponential tail bound with exponent, dual route and oracle tail
    Tailbound {
        #[command(flatten)]
        family: FamilyArgs,
        /// Threshold point, e.g. "2" (multivariate: "2 3")
        #[arg(long)]
        y: Option<String>,
        /// Univariate grid of thresholds, e.g. "1.5 2 3 5"
        #[arg(long)]
        grid: Option<String>,
        /// Base mean point (defaults to the constructed mean)
        #[arg(long)]
        x: Option<String>,
    },
    /// Combinatorial closed forms
    #[command(subcommand)]
    Closedform(ClosedForm),
    /// Brute-force oracles: enumeration, sampling, exact tails
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Run the full acceptance suite
    Selftest {
        /// Seed for the Monte Carlo parts (env CLASSB_SEED overrides the default)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum ClosedForm {
    /// Cumulant s_{k+1} of the quadratic-variance family V(x) = x(ax+b)
    Quadratic {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        k: usize,
        /// Print the symbolic expression in x as well
        #[arg(long)]
        symbolic: bool,
    },
    /// Cumulant s_{k+2} of the first-passage random walk
    Randomwalk {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: usize,
    },
    /// Stirling number of the second kind S(k, m)
    Stirling {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Raw moments by exact pmf summation
    Enumerate {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 6)]
        order: u32,
        #[arg(long, default_value_t = 1e-13)]
        tail_tol: f64,
    },
    /// Raw moments by adaptive quadrature (normal, gamma)
    Quadrature {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 6)]
        order: u32,
    },
    /// Seeded Monte Carlo draws (CSV, one row per draw)
    Sample {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact tail probability P(xi >= y)
    Tail {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        y: f64,
    },
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got `{item}`"))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse `{value}` as a number"))?;
        out.insert(key.trim().to_string(), v);
    }
    Ok(out)
}

fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split([' ', ','])
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse `{s}` as a number"))
        })
        .collect()
}

/// "a11 a12, a21 a22; b1 b2" -> (A, b)
fn parse_affine(text: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>), String> {
    let (a_text, b_text) = text
        .split_once(';')
        .ok_or("affine spec must be \"rows of A; b\"")?;
    let a: Vec<Vec<f64>> = a_text
        .split(',')
        .map(parse_vector)
        .collect::<Result<_, _>>()?;
    let b = parse_vector(b_text)?;
    Ok((a, b))
}

fn load_family(args: &FamilyArgs) -> Result<FamilySpec, String> {
    match (&args.family, &args.vfile) {
        (Some(name), None) => {
            let params = parse_pairs(&args.params)?;
            families::builtin(name, &params).map_err(|e| e.to_string())
        }
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
            families::from_definition_json(&text).map_err(|e| e.to_string())
        }
        (Some(_), Some(_)) => Err("pass either --family or --vfile, not both".into()),
        (None, None) => Err("one of --family or --vfile is required".into()),
    }
}

fn default_seed() -> u64 {
    std::env::var("CLASSB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(oracle::DEFAULT_SEED)
}

fn mean_or_at(f: &FamilySpec, at: &Option<String>) -> Result<Vec<f64>, String> {
    match at {
        Some(text) => {
            let map = parse_pairs(text)?;
            f.mean_vars
                .iter()
                .map(|v| {
                    map.get(v)
                        .copied()
                        .ok_or_else(|| format!("--at is missing `{v}`"))
                })
                .collect()
        }
        None => f
            .mean_point()
            .ok_or_else(|| "family has no constructed mean; pass --at".into()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Families { describe } => {
            if describe {
                print_json(
                    &families::describe_builtins()
                        .into_iter()
                        .map(|(name, params)| serde_json::json!({"name": name, "params": params}))
                        .collect::<Vec<_>>(),
                )?;
            } else {
                print_json(&families::builtin_names())?;
            }
        }
        Command::Moments {
            family,
            kind,
            order,
            at,
            format,
        } => {
            let f = load_family(&family)?;
            let table = match kind {
                MomentKind::Raw => moments::raw_moments(&f, order),
                MomentKind::Central => moments::central_moments(&f, order),
                MomentKind::Cumulant => moments::cumulants(&f, order),
            }
            .map_err(|e| e.to_string())?;
            let values = match &at {
                Some(text) => Some(
                    moments::evaluate_table(&table, &parse_pairs(text)?)
                        .map_err(|e| e.to_string())?,
                ),
                None => None,
            };
            match format {
                Format::Json => print_json(&table.export(values.as_ref()))?,
                Format::Csv => print!("{}", table.to_csv(values.as_ref())),
            }
        }
        Command::Verify {
            family,
            tol,
            z_steps,
            x_steps,
            z_half_width,
        } => {
            let f = load_family(&family)?;
            let grid = GridSpec {
                z_half_width,
                z_steps,
                x_steps,
                x_box: None,
            };
            let report = families::verify_eq1(&f, &grid, tol).map_err(|e| e.to_string())?;
            let pass = report.pass;
            let max_abs = report.max_abs;
            print_json(&report)?;
            if !pass {
                return Err(format!("residual {max_abs:.3e} exceeds tol {tol:.0e}"));
            }
        }
        Command::Transform {
            family,
            affine,
            convolve,
            mean,
        } => {
            let f = load_family(&family)?;
            let chosen = [affine.is_some(), convolve.is_some(), mean.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if chosen != 1 {
                return Err("pass exactly one of --affine, --convolve, --mean".into());
            }
            let result = if let Some(spec) = affine {
                let (a, b) = parse_affine(&spec)?;
                transforms::affine(&f, &a, &b)
            } else if let Some(n) = convolve {
                transforms::convolve_iid(&f, n)
            } else {
                transforms::sample_mean(&f, mean.unwrap())
            }
            .map_err(|e| e.to_string())?;
            print_json(&result.descriptor())?;
        }
        Command::Fisher {
            family,
            at,
            symbolic,
        } => {
            let f = load_family(&family)?;
            if symbolic {
                let matrix = inference::fisher_info_symbolic(&f).map_err(|e| e.to_string())?;
                let printed: Vec<Vec<String>> = matrix
                    .iter()
                    .map(|row| row.iter().map(|e| e.to_string()).collect())
                    .collect();
                print_json(&serde_json::json!({
                    "family": f.name,
                    "symbolic": true,
                    "information": printed,
                }))?;
            } else {
                let x = mean_or_at(&f, &at)?;
                let info = inference::fisher_info(&f, &x).map_err(|e| e.to_string())?;
                print_json(&serde_json::json!({
                    "family": f.name,
                    "x": x,
                    "information": info,
                }))?;
            }
        }
        Command::Tailbound { family, y, grid, x } => {
            let f = load_family(&family)?;
            let x = mean_or_at(&f, &x)?;
            let mut thresholds: Vec<Vec<f64>> = Vec::new();
            if let Some(y_text) = &y {
                thresholds.push(parse_vector(y_text)?);
            }
            if let Some(grid_text) = &grid {
                if f.dim != 1 {
                    return Err("--grid is univariate; pass --y for multivariate families".into());
                }
                for v in parse_vector(grid_text)? {
                    thresholds.push(vec![v]);
                }
            }
            if thresholds.is_empty() {
                return Err("pass --y or --grid".into());
            }
            let reports: Vec<tails::TailReport> = thresholds
                .iter()
                .map(|y| tails::tail_bound(&f, &x, y).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            if reports.len() == 1 {
                print_json(&reports[0])?;
            } else {
                print_json(&reports)?;
            }
        }
        Command::Closedform(cmd) => match cmd {
            ClosedForm::Quadratic {
                a,
                b,
                x,
                k,
                symbolic,
            } => {
                if symbolic {
                    let expr = closedforms::cumulant_quadratic_expr(
                        &Number::from_f64_exact(a).ok_or("a must be finite")?,
                        &Number::from_f64_exact(b).ok_or("b must be finite")?,
                        &classb_core::Expr::var("x"),
                        k,
                    )
                    .map_err(|e| e.to_string())?;
                    print_json(&serde_json::json!({
                        "order": k + 1,
                        "cumulant": expr.to_string(),
                        "at_x": x,
                        "value": expr
                            .eval(&BTreeMap::from([("x".to_string(), x)]))
                            .map_err(|e| e.to_string())?,
                    }))?;
                } else {
                    let value =
                        closedforms::cumulant_quadratic(a, b, x, k).map_err(|e| e.to_string())?;
                    print_json(&serde_json::json!({"order": k + 1, "value": value}))?;
                }
            }
            ClosedForm::Randomwalk { n, p, k } => {
                let value = closedforms::randomwalk_cumulant(n, p, k).map_err(|e| e.to_string())?;
                print_json(&serde_json::json!({"order": k + 2, "value": value}))?;
            }
            ClosedForm::Stirling { k, m } => {
                let value = closedforms::stirling2(k, m).map_err(|e| e.to_string())?;
                print_json(&serde_json::json!({
                    "k": k,
                    "m": m,
                    "value": value.to_string(),
                }))?;
            }
        },
        Command::Oracle(cmd) => match cmd {
            OracleCmd::Enumerate {
                family,
                params,
                order,
                tail_tol,
            } => {
                let p = parse_pairs(&params)?;
                let m = oracle::enumerate_moments(&family, &p, order, tail_tol)
                    .map_err(|e| e.to_string())?;
                print_json(&moment_map_json(&family, &m))?;
            }
            OracleCmd::Quadrature {
                family,
                params,
                order,
            } => {
                let p = parse_pairs(&params)?;
                let m =
                    oracle::quadrature_moments(&family, &p, order).map_err(|e| e.to_string())?;
                print_json(&moment_map_json(&family, &m))?;
            }
            OracleCmd::Sample {
                family,
                params,
                count,
                seed,
            } => {
                let p = parse_pairs(&params)?;
                let sample =
                    oracle::mc_sample(&family, &p, count, seed.unwrap_or_else(default_seed))
                        .map_err(|e| e.to_string())?;
                print!("{}", oracle::sample_to_csv(&sample));
            }
            OracleCmd::Tail { family, params, y } => {
                let p = parse_pairs(&params)?;
                let tail = oracle::exact_tail(&family, &p, y).map_err(|e| e.to_string())?;
                print_json(&serde_json::json!({"family": family, "y": y, "tail": tail}))?;
            }
        },
        Command::Selftest { seed, format } => {
            let report = selftest::run_all(seed.unwrap_or_else(default_seed));
            for r in &report.results {
                eprintln!(
                    "{} criterion {:>2}: {} ({:.2}s)",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.id,
                    r.name,
                    r.seconds
                );
            }
            match format {
                Format::Json => print_json(&report)?,
                Format::Csv => {
                    println!("id,name,passed,seconds");
                    for r in &report.results {
                        println!("{},\"{}\",{},{:.3}", r.id, r.name, r.passed, r.seconds);
                    }
                }
            }
            if !report.all_passed {
                return Err("selftest failed".into());
            }
        }
    }
    Ok(())
}

fn moment_map_json(family: &str, m: &BTreeMap<MultiIndex, f64>) -> serde_json::Value {
    serde_json::json!({
        "kind": TableKind::Raw,
        "family": family,
        "entries": m
            .iter()
            .map(|(k, v)| serde_json::json!({"k": k.0, "value": v}))
            .collect::<Vec<_>>(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
