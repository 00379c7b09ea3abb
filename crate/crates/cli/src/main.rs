//! `symsage` command-line front end.
//!
//! Reads signomials in the JSON schema of the core crate (file argument or
//! stdin) and prints JSON or aligned text. Exit codes: 0 success, 2 infeasible
//! or not in the requested class, 3 input error, 1 numerical failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use symsage::exactness::{self, ExactnessDecision};
use symsage::means::{self, Partition};
use symsage::sage;
use symsage::sonc::{self, Certificate, ProbeOptions};
use symsage::symmetry;
use symsage::{geometry, reference, Error, Flavor, Signomial, SupportSplit};

#[derive(Parser)]
#[command(name = "symsage", version, about = "AM/GM nonnegativity certificates and lower bounds for symmetric signomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for randomized zero-set probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Input {
    /// JSON file with the signomial; `-` reads stdin.
    #[arg(default_value = "-")]
    file: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// SAGE bound for signomials, SONC bound (through sig(f̃)) for polynomials.
    Bound {
        #[command(flatten)]
        input: Input,
        /// Solve on orbit representatives.
        #[arg(long)]
        symmetric: bool,
    },
    /// SAGE (signomials) or SONC (polynomials) membership with certificate.
    Member {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        symmetric: bool,
    },
    /// Diagonal exactness: t0, f*, the threshold constant and the certificate.
    Exact {
        #[command(flatten)]
        input: Input,
        /// Accept negative orbits on the boundary of the hull.
        #[arg(long)]
        relaxed_boundary: bool,
    },
    /// Zero-set class of a certified nonnegative symmetric input.
    Zeros {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1000)]
        probes: usize,
    },
    /// Looks for zeros incompatible with any SONC zero set.
    Obstruct {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 256)]
        rays: usize,
    },
    /// Generalized Muirhead certificate for m_λ − c·m_μ ≥ δ.
    Muirhead {
        /// Parts of λ, comma separated.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        n: usize,
    },
    /// SONC membership along α·m₍₆₎ + β·m₍₃,₃₎ for k = 2..kmax variables.
    ConeSeq {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
        /// Skip the solver cross-check.
        #[arg(long)]
        no_solver: bool,
    },
    /// Closed-form minima and SONC bounds of the reference families.
    Reference(ReferenceArgs),
    /// Circuit-level decomposition of a SAGE certificate.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        symmetric: bool,
    },
}

#[derive(Args)]
#[group(skip)]
#[command(group(ArgGroup::new("family").required(true).args(["quartic", "quadratic", "gap"])))]
struct ReferenceArgs {
    /// x⁴ + y⁴ + a·x²y² − b·(x²y + xy²).
    #[arg(long)]
    quartic: bool,
    /// Σxᵢ² + aΣxᵢ + bΣxᵢxⱼ in `--n` variables.
    #[arg(long)]
    quadratic: bool,
    /// Gap family for the listed k.
    #[arg(long, value_delimiter = ',')]
    gap: Option<Vec<u32>>,
    #[arg(short = 'a', allow_hyphen_values = true, default_value_t = 0.0)]
    a: f64,
    #[arg(short = 'b', allow_hyphen_values = true, default_value_t = 0.0)]
    b: f64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Also run the solver on the family member.
    #[arg(long)]
    solve: bool,
}

enum Failure {
    Input(Value),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(j) => Failure::Input(json!({"error": j.to_string(), "line": j.line(), "column": j.column()})),
            Error::Numerical(_) | Error::CircuitBudget { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Input(json!({"error": other.to_string()})),
        }
    }
}

struct Report {
    value: Value,
    code: u8,
}

impl Report {
    fn ok(value: Value) -> Self {
        Self { value, code: 0 }
    }

    fn rejected(value: Value) -> Self {
        Self { value, code: 2 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print(&report.value, cli.format);
            ExitCode::from(report.code)
        }
        Err(Failure::Input(v)) => {
            eprintln!("{}", serde_json::to_string(&v).expect("serializable"));
            ExitCode::from(3)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("{}", json!({ "error": msg }));
            ExitCode::from(1)
        }
    }
}

fn read_input(input: &Input) -> Result<Signomial, Failure> {
    let text = if input.file.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(json!({"error": format!("reading stdin: {e}")})))?;
        s
    } else {
        fs::read_to_string(&input.file)
            .map_err(|e| Failure::Input(json!({"error": format!("reading {}: {e}", input.file.display())})))?
    };
    Ok(Signomial::from_json(&text)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let tol = cli.tol;
    match &cli.command {
        Command::Bound { input, symmetric } => bound(&read_input(input)?, *symmetric, tol),
        Command::Member { input, symmetric } => member(&read_input(input)?, *symmetric, tol),
        Command::Exact { input, relaxed_boundary } => exact(&read_input(input)?, *relaxed_boundary, tol),
        Command::Zeros { input, probes } => zeros(&read_input(input)?, tol, cli.seed, *probes),
        Command::Obstruct { input, rays } => {
            let f = read_input(input)?;
            let (reason, orthants) = sonc::obstruction_scan(&f, cli.seed, *rays)?;
            let value = json!({ "obstruction": reason, "orthants": to_value(&orthants) });
            Ok(if reason.is_some() { Report::rejected(value) } else { Report::ok(value) })
        }
        Command::Muirhead { lambda, mu, c, n } => {
            let (l, m) = (Partition::parse(lambda)?, Partition::parse(mu)?);
            Ok(match means::muirhead_certificate(&l, &m, *c, *n)? {
                Some(cert) => Report::ok(json!({ "certified": true, "certificate": to_value(&cert) })),
                None => Report::rejected(json!({
                    "certified": false,
                    "lambda": l.to_string(),
                    "mu": m.to_string(),
                    "dominates_star": means::dominates_star_partitions(&l, &m, *n)?,
                })),
            })
        }
        Command::ConeSeq { alpha, beta, kmax, no_solver } => {
            let table = means::cone_sequence_experiment(*alpha, *beta, *kmax, !no_solver)?;
            Ok(Report::ok(to_value(&table)))
        }
        Command::Reference(args) => reference_report(args, tol),
        Command::Decompose { input, symmetric } => decompose(&read_input(input)?, *symmetric, tol),
    }
}

fn bound(f: &Signomial, symmetric: bool, tol: f64) -> Result<Report, Failure> {
    let (target, method) = match f.flavor() {
        Flavor::Signomial => (f.clone(), "sage"),
        Flavor::Polynomial => (sonc::tilde(f)?.to_signomial(), "sonc"),
    };
    let mut out = if symmetric {
        let (b, dec) = symmetry::symmetric_sage_bound(&target, tol)?;
        json!({ "bound": to_value(&b), "method": format!("symmetric-{method}"), "certificate": to_value(&dec) })
    } else {
        let b = sage::sage_bound(&target, tol)?;
        json!({
            "bound": to_value(&b.bound),
            "method": method,
            "finite_guaranteed": b.finite_guaranteed,
            "certificate": to_value(&b.decomposition),
        })
    };
    if f.flavor() == Flavor::Polynomial {
        out["dominating_orthant"] = to_value(&sonc::orthant_dominated(f)?);
    }
    Ok(Report::ok(out))
}

fn membership_target(f: &Signomial) -> Result<Signomial, Failure> {
    Ok(match f.flavor() {
        Flavor::Signomial => f.clone(),
        Flavor::Polynomial => sonc::tilde(f)?.to_signomial(),
    })
}

fn member(f: &Signomial, symmetric: bool, tol: f64) -> Result<Report, Failure> {
    let target = membership_target(f)?;
    let split = SupportSplit::by_sign(&target);
    let certificate = if symmetric {
        symmetry::is_symmetric_sage(&target, &split, tol)?.map(|d| to_value(&d))
    } else {
        sage::is_sage(&target, &split, tol)?.map(|d| to_value(&d))
    };
    Ok(match certificate {
        Some(c) => Report::ok(json!({ "member": true, "certificate": c })),
        None => Report::rejected(json!({ "member": false })),
    })
}

fn exact(f: &Signomial, relaxed: bool, tol: f64) -> Result<Report, Failure> {
    let sig = f.to_signomial();
    let decision = exactness::exactness_decide(&sig, relaxed, tol)?;
    let (status, bound, cert) = match decision {
        ExactnessDecision::NotInClass { reason, boundary_only } => {
            let mut value = json!({ "in_class": false, "reason": reason });
            if boundary_only {
                value["hint"] = json!("negative orbits touch the hull boundary; rerun with --relaxed-boundary");
            }
            return Ok(Report::rejected(value));
        }
        ExactnessDecision::Nonnegative { bound, certificate } => ("nonnegative", bound, certificate),
        ExactnessDecision::NegativeMinimum { bound, certificate } => ("negative_minimum", bound, certificate),
    };
    let t0 = cert.profile.t0;
    let w = cert.profile.w;
    Ok(Report::ok(json!({
        "in_class": true,
        "status": status,
        "t0": t0,
        "exp_t0": t0.exp(),
        "f_star": bound,
        "threshold_w": w - bound,
        "minimizer": cert.minimizer,
        "certificate": to_value(&*cert),
    })))
}

fn zeros(f: &Signomial, tol: f64, seed: u64, probes: usize) -> Result<Report, Failure> {
    let sig = f.to_signomial();
    let Some(dec) = symmetry::is_symmetric_sage(&sig, &SupportSplit::by_sign(&sig), tol)? else {
        return Ok(Report::rejected(json!({ "certified": false })));
    };
    let options = ProbeOptions { tol: tol.max(1e-8), seed, probes };
    let class = sonc::classify_zero_set(f, Certificate::Symmetric(&dec), &options)?;
    Ok(Report::ok(json!({ "certified": true, "zero_set": to_value(&class) })))
}

fn reference_report(args: &ReferenceArgs, tol: f64) -> Result<Report, Failure> {
    let solve = |n: usize, terms: &[(Vec<i64>, f64)]| -> Result<Value, Failure> {
        let f = Signomial::from_terms(
            n,
            Flavor::Polynomial,
            terms.iter().map(|(e, c)| (symsage::ExponentVector::from_ints(e), *c)),
        )?;
        Ok(to_value(&sonc::sonc_bound(&f, tol)?.bound))
    };
    if let Some(ks) = &args.gap {
        let rows = reference::gap_growth(ks)?;
        let mut out = Vec::new();
        for row in rows {
            let mut v = to_value(&row);
            if args.solve {
                let terms: Vec<(Vec<i64>, f64)> = reference::gap_polynomial(row.k).iter().map(|(e, c)| (e.to_vec(), *c)).collect();
                v["solver_sonc"] = solve(2, &terms)?;
            }
            out.push(v);
        }
        return Ok(Report::ok(json!({ "family": "gap", "rows": out })));
    }
    let (family, n, result, terms) = if args.quartic {
        ("quartic", 2, reference::quartic_reference(args.a, args.b), reference::quartic_polynomial(args.a, args.b))
    } else {
        let r = reference::quadratic_reference(args.n, args.a, args.b)?;
        ("quadratic", args.n, r, reference::quadratic_polynomial(args.n, args.a, args.b))
    };
    let mut out = to_value(&result);
    out["family"] = json!(family);
    out["n"] = json!(n);
    out["a"] = json!(args.a);
    out["b"] = json!(args.b);
    if args.solve {
        out["solver_sonc"] = solve(n, &terms)?;
    }
    Ok(Report::ok(out))
}

fn decompose(f: &Signomial, symmetric: bool, tol: f64) -> Result<Report, Failure> {
    let target = membership_target(f)?;
    let split = SupportSplit::by_sign(&target);
    if symmetric {
        return Ok(match symmetry::symmetric_witness_cone_decomposition(&target, &split, tol)? {
            Some(d) => Report::ok(json!({ "member": true, "decomposition": to_value(&d) })),
            None => Report::rejected(json!({ "member": false })),
        });
    }
    let Some(dec) = sage::is_sage(&target, &split, tol)? else {
        return Ok(Report::rejected(json!({ "member": false })));
    };
    let mut blocks = Vec::new();
    for c in &dec.components {
        blocks.push(symmetry::circuit_split(&c.component, &c.beta, &c.certificate.nu, geometry::DEFAULT_CIRCUIT_CAP)?);
    }
    Ok(Report::ok(json!({
        "member": true,
        "blocks": to_value(&blocks),
        "monomial_remainder": to_value(&dec.monomial_remainder.iter().map(|(e, c)| (e.to_string(), *c)).collect::<Vec<_>>()),
    })))
}

fn print(value: &Value, format: Format) {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
        Format::Text => render_text(value),
    };
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn is_flat(v: &Value) -> bool {
    v.as_object().is_some_and(|o| o.values().all(|x| !x.is_object() && !x.is_array()))
}

/// Top-level scalars as aligned `key value` lines, arrays of flat records as
/// tables, anything else as compact JSON.
fn render_text(value: &Value) -> String {
    let Some(obj) = value.as_object() else { return format!("{}\n", scalar(value)) };
    let width = obj.keys().map(|k| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    let mut tables = String::new();
    for (k, v) in obj {
        match v {
            Value::Array(rows) if !rows.is_empty() && rows.iter().all(is_flat) => {
                tables.push_str(&format!("\n{k}:\n{}", table(rows)));
            }
            Value::Object(_) | Value::Array(_) => {
                out.push_str(&format!("{k:<width$}  {}\n", serde_json::to_string(v).expect("serializable")));
            }
            _ => out.push_str(&format!("{k:<width$}  {}\n", scalar(v))),
        }
    }
    out + &tables
}

fn table(rows: &[Value]) -> String {
    let headers: Vec<String> = rows[0].as_object().expect("flat record").keys().cloned().collect();
    let cells: Vec<Vec<String>> =
        rows.iter().map(|r| headers.iter().map(|h| r.get(h).map(scalar).unwrap_or_default()).collect()).collect();
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(j, h)| cells.iter().map(|r| r[j].chars().count()).chain([h.chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |items: &[String]| -> String {
        let parts: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        format!("  {}\n", parts.join("  "))
    };
    let mut out = line(&headers);
    for r in &cells {
        out.push_str(&line(r));
    }
    out
}
