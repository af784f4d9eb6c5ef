//! `gkz`: command-line front end for gkz-core.
//!
//! Indices of points and simplices are 1-based on input and output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use gkz_core::gamma::{default_samples, FamilyRegistry, Kind, SeriesConfig};
use gkz_core::input::{load_fan, parse_pairing};
use gkz_core::ktheory::{
    chi, euler_pairing, kc_label, monomial_label, pairing_matrix, ChiRegistry, KTheory, KcMonomial,
};
use gkz_core::verify::{CheckRegistry, Status, VerifyConfig};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "gkz",
    version,
    about = "Euler pairings, sector cohomology and Gamma series for toric GKZ systems"
)]
struct Cli {
    /// Fan description (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-6, allow_negative_numbers = true)]
    tolerance: f64,
    /// Series truncation K: bound on the positive part of the summation index.
    #[arg(long, global = true, default_value_t = 16)]
    truncation: u32,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// A sample point as `re,im;re,im;...`, one pair per point of the fan.
    /// Repeatable; defaults to points well inside the convergence region.
    #[arg(long = "log-x", global = true, allow_hyphen_values = true)]
    log_x: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Twisted sectors with their cohomology and integration data.
    Sectors,
    /// Euler characteristic of R^alpha G_I.
    Chi {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Interior simplex, e.g. `2` or `1,3`.
        #[arg(long)]
        simplex: String,
        #[arg(long, default_value = "character")]
        evaluator: String,
    },
    /// Matrix of Euler pairings between bases of K and K^c.
    PairingMatrix {
        /// JSON list of exponent vectors; defaults to a canonical basis.
        #[arg(long)]
        k_basis: Option<String>,
        /// JSON list of `{"alpha": [...], "simplex": [...]}`; defaults to a canonical basis.
        #[arg(long)]
        kc_basis: Option<String>,
        #[arg(long, default_value = "character")]
        evaluator: String,
    },
    /// Series coefficients of a solution family, and its values at the samples.
    Gamma {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        /// Shorthand for `--family gamma-circ`.
        #[arg(long)]
        compact: bool,
        #[arg(long, default_value = "gamma")]
        family: String,
    },
    /// Run verification checks; all of them when none are named.
    Verify {
        checks: Vec<String>,
        /// Candidate pairing table (JSON) for the `pairing` check.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Expected constant against the inverse Euler pairing, `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        scale: Option<String>,
    },
}

fn parse_ints(s: &str) -> anyhow::Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .with_context(|| format!("`{t}` is not an integer"))
        })
        .collect()
}

fn parse_complex(s: &str) -> anyhow::Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| -> anyhow::Result<f64> {
        let v: f64 = t.parse().with_context(|| format!("`{t}` is not a number"))?;
        if !v.is_finite() {
            bail!("`{t}` is not finite");
        }
        Ok(v)
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("`{s}` is not a complex number"),
    }
}

fn parse_sample(s: &str, n: usize) -> anyhow::Result<Vec<Complex64>> {
    let v: Vec<Complex64> = s.split(';').map(parse_complex).collect::<anyhow::Result<_>>()?;
    if v.len() != n {
        bail!("sample `{s}` has {} coordinates, the fan has {n} points", v.len());
    }
    Ok(v)
}

/// 1-based indices to 0-based.
fn zero_based(ix: &[i64], n: usize) -> anyhow::Result<Vec<usize>> {
    ix.iter()
        .map(|&i| {
            if i < 1 || i as usize > n {
                bail!("index {i} is out of range 1..={n}");
            }
            Ok(i as usize - 1)
        })
        .collect()
}

fn one_based(ix: &[usize]) -> Vec<usize> {
    ix.iter().map(|i| i + 1).collect()
}

/// Rounds every float in the report to 15 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            let r: f64 = format!("{x:.14e}").parse().unwrap_or(x);
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

struct Run {
    report: Value,
    /// Summary lines for `--format text`.
    text: Vec<String>,
    failed: bool,
}

impl Run {
    fn plain(report: Value) -> Self {
        Run {
            report,
            text: Vec::new(),
            failed: false,
        }
    }
}

fn sectors(kt: &KTheory) -> Value {
    let rows: Vec<Value> = kt
        .sectors
        .iter()
        .map(|s| {
            json!({
                "gamma": s.element.gamma,
                "coordinates": s.element.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "cone": one_based(&s.element.sigma),
                "quotient_rank": s.quotient.quotient_rank,
                "algebra_basis": s.algebra.labels(),
                "module_basis": s.module.labels(),
                "integral": s.module.integral.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "interior_simplices": s.quotient.interior.iter().map(|i| one_based(i)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"rank": kt.fan.rank, "points": kt.fan.points, "sectors": rows})
}

fn kc_from_json(v: &Value, n: usize) -> anyhow::Result<KcMonomial> {
    let alpha: Vec<i64> = serde_json::from_value(v.get("alpha").cloned().unwrap_or(Value::Null))
        .context("kc basis entry needs an integer list `alpha`")?;
    let simplex: Vec<i64> = serde_json::from_value(v.get("simplex").cloned().unwrap_or(Value::Null))
        .context("kc basis entry needs an index list `simplex`")?;
    if alpha.len() != n {
        bail!("alpha {alpha:?} needs {n} exponents");
    }
    Ok(KcMonomial::new(alpha, zero_based(&simplex, n)?))
}

fn run(cli: &Cli) -> anyhow::Result<Run> {
    let path = cli.input.as_ref().context("--input is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let fan = load_fan(&text).with_context(|| path.display().to_string())?;
    let n = fan.n();
    let samples = if cli.log_x.is_empty() {
        default_samples(&fan)
    } else {
        cli.log_x
            .iter()
            .map(|s| parse_sample(s, n))
            .collect::<anyhow::Result<_>>()?
    };
    let kt = KTheory::new(fan)?;

    match &cli.command {
        Command::Sectors => Ok(Run::plain(sectors(&kt))),
        Command::Chi {
            alpha,
            simplex,
            evaluator,
        } => {
            let alpha = parse_ints(alpha)?;
            if alpha.len() != n {
                bail!("--alpha needs {n} exponents");
            }
            let simplex = zero_based(&parse_ints(simplex)?, n)?;
            let value = if evaluator == "character" {
                chi(&kt, &alpha, &simplex)?
            } else {
                let ev = ChiRegistry::default().get(evaluator)?;
                euler_pairing(
                    &kt,
                    ev.as_ref(),
                    &vec![0; n],
                    &KcMonomial::new(alpha.clone(), simplex.clone()),
                )?
            };
            Ok(Run::plain(json!({
                "class": kc_label(&KcMonomial::new(alpha, simplex)),
                "evaluator": evaluator,
                "chi": value.to_string(),
            })))
        }
        Command::PairingMatrix {
            k_basis,
            kc_basis,
            evaluator,
        } => {
            let kb: Vec<Vec<i64>> = match k_basis {
                Some(s) => serde_json::from_str(s).context("--k-basis")?,
                None => kt.canonical_k_basis(),
            };
            if let Some(a) = kb.iter().find(|a| a.len() != n) {
                bail!("k basis entry {a:?} needs {n} exponents");
            }
            let kc: Vec<KcMonomial> = match kc_basis {
                Some(s) => {
                    let raw: Vec<Value> = serde_json::from_str(s).context("--kc-basis")?;
                    raw.iter().map(|v| kc_from_json(v, n)).collect::<anyhow::Result<_>>()?
                }
                None => kt.canonical_kc_basis(),
            };
            let ev = ChiRegistry::default().get(evaluator)?;
            let m = pairing_matrix(&kt, ev.as_ref(), &kb, &kc)?;
            let entries: Vec<Vec<i64>> = m
                .entries
                .iter()
                .map(|r| r.iter().map(|x| x.try_into().unwrap_or(i64::MAX)).collect())
                .collect();
            let text = entries.iter().map(|r| format!("{r:?}")).collect();
            Ok(Run {
                report: json!({
                    "evaluator": evaluator,
                    "k_basis": m.k_basis.iter().map(|a| monomial_label(a)).collect::<Vec<_>>(),
                    "kc_basis": m.kc_basis.iter().map(kc_label).collect::<Vec<_>>(),
                    "matrix": entries,
                    "determinant": m.determinant.to_string(),
                }),
                text,
                failed: false,
            })
        }
        Command::Gamma { c, compact, family } => {
            let c = parse_ints(c)?;
            if c.len() != kt.fan.rank {
                bail!("--c needs {} coordinates", kt.fan.rank);
            }
            let name = if *compact { "gamma-circ" } else { family.as_str() };
            let f = FamilyRegistry::default().get(name)?;
            let mut terms = f.terms(&kt, &c, cli.truncation)?;
            terms.sort_by(|a, b| (a.sector, &a.l).cmp(&(b.sector, &b.l)));
            let labels = |s: usize| match f.kind() {
                Kind::Plain => kt.sectors[s].algebra.labels(),
                Kind::Compact => kt.sectors[s].module.labels(),
            };
            let terms: Vec<Value> = terms
                .iter()
                .map(|t| {
                    let coeff: serde_json::Map<String, Value> = labels(t.sector)
                        .into_iter()
                        .zip(&t.coeff)
                        .filter(|(_, z)| z.norm() != 0.0)
                        .map(|(l, z)| (l, complex(*z)))
                        .collect();
                    json!({
                        "sector": kt.sectors[t.sector].element.gamma,
                        "l": t.l.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "coefficients": coeff,
                    })
                })
                .collect();
            let mut values = Vec::new();
            for lx in &samples {
                let cfg = SeriesConfig {
                    tolerance: cli.tolerance,
                    ..SeriesConfig::new(cli.truncation, lx.clone())
                };
                let v = f.evaluate(&kt, &c, &cfg)?;
                values.push(json!({
                    "log_x": lx.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
                    "sectors": v.sectors.iter().enumerate().map(|(s, comp)| json!({
                        "sector": kt.sectors[s].element.gamma,
                        "value": comp.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                    "tail": v.tail,
                    "warnings": v.warnings,
                }));
            }
            Ok(Run::plain(json!({
                "family": name,
                "c": c,
                "truncation": cli.truncation,
                "terms": terms,
                "values": values,
            })))
        }
        Command::Verify { checks, table, scale } => {
            let mut cfg = VerifyConfig::new(&kt);
            cfg.truncation = cli.truncation;
            cfg.tolerance = cli.tolerance;
            cfg.samples = samples;
            if let Some(p) = table {
                let t = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                cfg.table = Some(parse_pairing(&t, &kt.fan).with_context(|| p.display().to_string())?);
            }
            cfg.scale = scale.as_deref().map(parse_complex).transpose()?;
            let reports = CheckRegistry::default().run(checks, &kt, &cfg)?;
            let failed = reports.iter().any(|r| r.status == Status::Fail);
            let text = reports
                .iter()
                .map(|r| {
                    let s = match r.status {
                        Status::Pass => "PASS",
                        Status::Fail => "FAIL",
                        Status::Skipped => "SKIP",
                    };
                    format!("{s} {}", r.check)
                })
                .collect();
            Ok(Run {
                report: json!({"passed": !failed, "checks": reports}),
                text,
                failed,
            })
        }
    }
}

fn validate(cli: &Cli) -> anyhow::Result<()> {
    if !(cli.tolerance.is_finite() && cli.tolerance > 0.0) {
        bail!("--tolerance must be a positive number");
    }
    if cli.truncation == 0 {
        bail!("--truncation must be at least 1");
    }
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global()?;
    }
    Ok(())
}

fn emit(cli: &Cli, r: &mut Run) -> anyhow::Result<()> {
    round_floats(&mut r.report);
    let mut out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&r.report)?,
        Format::Text if !r.text.is_empty() => r.text.join("\n"),
        Format::Text => serde_json::to_string(&r.report)?,
    };
    out.push('\n');
    match &cli.output {
        Some(p) => fs::write(p, out).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = validate(&cli).and_then(|_| run(&cli)).and_then(|mut r| {
        emit(&cli, &mut r)?;
        Ok(r.failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
