//! Command-line front end. [`run`] is the whole program; `main` only forwards
//! the process arguments and exit code.

pub mod verify;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use funtf_core::*;
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "funtf", version, about = "Frame potentials, 2-summing norms and unit norm tight frames")]
struct Cli {
    /// Emit JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for restarts and subset enumeration.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified interval for the 2-summing norm of an operator.
    Pi2 {
        /// Domain space: inline JSON, a file path, or '-' for stdin.
        #[arg(long)]
        space: String,
        /// Range space; defaults to the domain.
        #[arg(long)]
        range: Option<String>,
        /// 'identity', or a matrix given as rows of scalars.
        #[arg(long, default_value = "identity")]
        op: String,
        #[arg(long, default_value_t = 1e-6, value_parser = positive)]
        tol: f64,
        /// Sampled dual points for spaces without finitely many extreme points.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Frame potential π₂(S)² together with the naive potentials.
    Potential {
        #[arg(long)]
        frame: String,
        #[arg(long, default_value_t = 1e-6, value_parser = positive)]
        tol: f64,
    },
    /// FUNTF, Schauder, approximate or none.
    Classify {
        #[arg(long)]
        frame: String,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
    },
    /// Build a frame from one of the explicit families.
    Construct {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        len: Option<usize>,
        /// Diagonal weights, comma separated.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        copies: Option<usize>,
        /// Also save the frame as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal error due to m erasures, or the one-erasure optimality test.
    Erasure {
        #[arg(long)]
        frame: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Include the value of every subset.
        #[arg(long)]
        table: bool,
        /// Test erasure optimality instead of computing e_m.
        #[arg(long)]
        optimal: bool,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
    },
    /// Numerical search for a FUNTF of a given length on a real space.
    Search {
        #[arg(long)]
        space: String,
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Real ℓ1 only: keep every coordinate of every vector at least this large.
        #[arg(long)]
        min_coordinate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the published worked examples.
    VerifyPaper {
        /// Run only this check; repeatable.
        #[arg(long = "check")]
        checks: Vec<String>,
        /// List the check ids and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    /// Roots-of-unity construction for a diagonal summing to n.
    Dft,
    /// Any diagonal with integer sum at least n.
    Diagonal,
    /// A FUNTF of every length N ≥ n.
    Length,
    #[value(name = "ell1-n-plus-1")]
    Ell1NPlus1,
    #[value(name = "ell1-special")]
    Ell1Special,
    /// Unions of the real ℓ1 families and Auerbach bases.
    #[value(name = "ell1-length")]
    Ell1Length,
    /// Copies of an Auerbach basis.
    Auerbach,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

enum CliError {
    Usage(String),
    Domain(Error),
    Input { kind: &'static str, message: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Inline JSON when the argument starts with `{` or `[`, stdin for `-`,
/// otherwise a file path.
fn read_source(arg: &str) -> CliResult<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    let io = |e: std::io::Error| CliError::Input {
        kind: "io",
        message: format!("{arg}: {e}"),
    };
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        return Ok(s);
    }
    std::fs::read_to_string(arg).map_err(io)
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = read_source(arg)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        kind: "invalid_json",
        message: format!("{what}: {e}"),
    })
}

fn parse_operator(arg: &str, n: usize) -> CliResult<OperatorMatrix> {
    if arg == "identity" {
        return Ok(OperatorMatrix::identity(n));
    }
    let op: OperatorMatrix = parse_json(arg, "operator")?;
    if op.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: op.dim(),
        }
        .into());
    }
    Ok(op)
}

fn write_file(path: &PathBuf, frame: &FrameSystem) -> CliResult<()> {
    let text = serde_json::to_string_pretty(frame).expect("frames serialize");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Input {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    })
}

/// Columns padded to their widest cell; numeric-looking cells right aligned.
fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| {
                let pad = " ".repeat(w - c.chars().count());
                let numeric = c.starts_with(|ch: char| ch.is_ascii_digit() || ch == '-' || ch == '+');
                if numeric {
                    format!("{pad}{c}")
                } else {
                    format!("{c}{pad}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(headers.to_vec())];
    out.push(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        out.push(line(r.iter().map(|s| s.as_str()).collect()));
    }
    out.join("\n") + "\n"
}

fn kv(rows: Vec<(&str, String)>) -> String {
    let rows: Vec<Vec<String>> = rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
    table(&["quantity", "value"], &rows)
}

fn num(v: f64) -> String {
    format!("{v:.12}")
}

/// Up to 12 decimals with trailing zeros dropped; scientific when tiny or huge.
fn short(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e9).contains(&a) {
        let s = format!("{v:.12}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

fn scalar(z: C64, complex: bool) -> String {
    if !complex {
        return format!("{:.6}", z.re);
    }
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn entries(v: &[C64], complex: bool) -> String {
    let parts: Vec<String> = v.iter().map(|&z| scalar(z, complex)).collect();
    format!("({})", parts.join(", "))
}

fn classification_text(c: &Classification) -> String {
    match c {
        Classification::Funtf { lambda } => format!("funtf (λ = {})", num(*lambda)),
        Classification::Schauder => "schauder".into(),
        Classification::Approximate => "approximate".into(),
        Classification::None => "none".into(),
    }
}

fn frame_table(frame: &FrameSystem) -> CliResult<String> {
    let space = frame.space();
    let complex = space.is_complex();
    let mut rows = Vec::new();
    for (j, p) in frame.pairs().iter().enumerate() {
        rows.push(vec![
            (j + 1).to_string(),
            entries(p.x.entries(), complex),
            entries(p.f.entries(), complex),
            num(space.norm(&p.x)?),
            num(space.dual_norm(&p.f)?),
            scalar(p.f.apply(&p.x), complex),
        ]);
    }
    let n = frame.dim() as f64;
    let s = frame_operator(frame);
    let lambda = s.trace() / n;
    let mut out = table(&["j", "x_j", "f_j", "‖x_j‖", "‖f_j‖*", "f_j(x_j)"], &rows);
    out += &format!(
        "\nN = {}, n = {}, normalized = {}, ‖S − (tr S/n)I‖_F = {}\n",
        frame.len(),
        frame.dim(),
        frame.is_normalized(),
        sci(s.distance_to_scalar(lambda))
    );
    Ok(out)
}

fn pi2_rows(r: &Pi2Result) -> Vec<(&'static str, String)> {
    vec![
        ("lower", num(r.lower)),
        ("upper", num(r.upper)),
        ("width", sci(r.width())),
        ("certified", r.certified.to_string()),
        ("heuristic", r.heuristic.to_string()),
    ]
}

/// What a subcommand produced: the JSON value and its table rendering.
struct Output {
    json: serde_json::Value,
    human: String,
    exit: i32,
}

fn output<T: Serialize>(value: &T, human: String) -> Output {
    Output {
        json: serde_json::to_value(value).expect("result types serialize"),
        human,
        exit: 0,
    }
}

fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Pi2 {
            space,
            range,
            op,
            tol,
            budget,
        } => {
            let domain: SpaceSpec = parse_json(space, "space")?;
            let range: SpaceSpec = match range {
                Some(r) => parse_json(r, "range")?,
                None => domain.clone(),
            };
            let op = parse_operator(op, domain.dim())?;
            let mut opts = Pi2Options {
                tol: *tol,
                seed: cli.seed,
                ..Pi2Options::default()
            };
            if let Some(b) = budget {
                opts.budget = *b;
            }
            let r = pi2(&op, &domain, &range, &opts)?;
            Ok(output(&r, kv(pi2_rows(&r))))
        }
        Command::Potential { frame, tol } => {
            let frame: FrameSystem = parse_json(frame, "frame")?;
            let opts = Pi2Options {
                tol: *tol,
                seed: cli.seed,
                ..Pi2Options::default()
            };
            let fp = frame_potential(&frame, &opts)?;
            let bound = (frame.len() * frame.len()) as f64 / frame.dim() as f64;
            let sq = naive_potential_sq(&frame);
            let sym = naive_potential_sym(&frame);
            let tr = trace_lower_bound(&frame);
            let mut rows = pi2_rows(&fp);
            rows.extend([
                ("N²/n", num(bound)),
                ("trace bound", num(tr)),
                ("naive Σ|f_j(x_k)|²", num(sq)),
                ("naive Σ|f_j(x_k)f_k(x_j)|", num(sym)),
            ]);
            let value = json!({
                "frame_potential": fp,
                "lower_bound": bound,
                "trace_bound": tr,
                "naive_sq": sq,
                "naive_sym": sym,
            });
            Ok(output(&value, kv(rows)))
        }
        Command::Classify { frame, tol } => {
            let frame: FrameSystem = parse_json(frame, "frame")?;
            let c = classify(&frame, *tol)?;
            let human = frame_table(&frame)? + &format!("class: {}\n", classification_text(&c));
            Ok(output(&c, human))
        }
        Command::Construct {
            family,
            space,
            dim,
            len,
            lambdas,
            copies,
            out,
        } => {
            let space = |need: &str| -> CliResult<SpaceSpec> {
                match space {
                    Some(s) => parse_json(s, "space"),
                    None => Err(usage(format!("--family {need} needs --space"))),
                }
            };
            let need = |v: &Option<usize>, flag: &str, fam: &str| v.ok_or_else(|| usage(format!("--family {fam} needs --{flag}")));
            let frame = match family {
                Family::Dft => {
                    let s = space("dft")?;
                    let target = match lambdas {
                        Some(l) => DiagonalTarget::new(s, l.clone())?,
                        None => {
                            let n = s.dim() as f64;
                            DiagonalTarget::uniform(s, n)?
                        }
                    };
                    dft_funtf(&target)?
                }
                Family::Diagonal => {
                    let s = space("diagonal")?;
                    let l = lambdas.clone().ok_or_else(|| usage("--family diagonal needs --lambdas"))?;
                    funtf_from_diagonal(&DiagonalTarget::new(s, l)?)?
                }
                Family::Length => funtf_of_length(&space("length")?, need(len, "len", "length")?)?,
                Family::Ell1NPlus1 => ell1_funtf_n_plus_1(need(dim, "dim", "ell1-n-plus-1")?)?,
                Family::Ell1Special => {
                    ell1_special(need(dim, "dim", "ell1-special")?, need(len, "len", "ell1-special")?)?
                }
                Family::Ell1Length => {
                    ell1_funtf_of_length(need(dim, "dim", "ell1-length")?, need(len, "len", "ell1-length")?)?
                }
                Family::Auerbach => auerbach_copies(&space("auerbach")?, copies.unwrap_or(1))?,
            };
            if let Some(path) = out {
                write_file(path, &frame)?;
            }
            let human = frame_table(&frame)?;
            Ok(output(&frame, human))
        }
        Command::Erasure {
            frame,
            m,
            table: with_table,
            optimal,
            tol,
        } => {
            let frame: FrameSystem = parse_json(frame, "frame")?;
            if *optimal {
                let r = is_erasure_optimal(&frame, *tol)?;
                let rows: Vec<Vec<String>> = (0..frame.len())
                    .map(|j| vec![(j + 1).to_string(), num(r.products[j]), scalar(r.pairings[j], true)])
                    .collect();
                let human = table(&["j", "‖x_j‖‖f_j‖", "f_j(x_j)"], &rows)
                    + &format!(
                        "\nn/N = {}, optimal = {}, rescaled pairs form a FUNTF = {}\n",
                        num(r.target),
                        r.optimal,
                        r.rescaled_is_funtf
                    );
                return Ok(output(&r, human));
            }
            let r = erasure_error_with_table(&frame, *m, *with_table)?;
            let mut human = kv(vec![
                ("m", r.m.to_string()),
                ("e_m", num(r.value)),
                ("argmax subset", format!("{:?}", r.argmax_subset)),
                ("heuristic", r.heuristic.to_string()),
            ]);
            if let Some(rows) = &r.per_subset {
                let rows: Vec<Vec<String>> = rows.iter().map(|s| vec![format!("{:?}", s.subset), num(s.value)]).collect();
                human += "\n";
                human += &table(&["subset", "‖S − S_E‖"], &rows);
            }
            Ok(output(&r, human))
        }
        Command::Search {
            space,
            len,
            max_iters,
            restarts,
            min_coordinate,
            out,
        } => {
            let space: SpaceSpec = parse_json(space, "space")?;
            let opts = SearchOptions {
                seed: cli.seed,
                max_iters: *max_iters,
                restarts: *restarts,
                min_coordinate: *min_coordinate,
            };
            let r = search_funtf(&space, *len, &opts)?;
            if let Some(path) = out {
                write_file(path, &r.frame)?;
            }
            let human = kv(vec![
                ("success", r.success.to_string()),
                ("residual", sci(r.residual)),
                ("restart", r.restart.to_string()),
            ]) + "\n"
                + &frame_table(&r.frame)?;
            Ok(output(&r, human))
        }
        Command::VerifyPaper { checks, list } => {
            if *list {
                let ids = verify::check_ids();
                let rows: Vec<Vec<String>> = ids.iter().map(|(id, d)| vec![id.to_string(), d.to_string()]).collect();
                let value: Vec<_> = ids.iter().map(|(id, d)| json!({"id": id, "description": d})).collect();
                return Ok(output(&value, table(&["id", "description"], &rows)));
            }
            let report = verify::verify_paper(checks).map_err(CliError::Usage)?;
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.id.to_string(),
                        if c.passed { "PASS" } else { "FAIL" }.to_string(),
                        short(c.observed),
                        short(c.expected),
                        sci(c.tolerance),
                        format!("{:.2}s", c.seconds),
                    ]
                })
                .collect();
            let mut human = table(&["id", "result", "observed", "expected", "tolerance", "time"], &rows);
            for c in report.checks.iter().filter(|c| c.error.is_some()) {
                human += &format!("{}: {}\n", c.id, c.error.as_deref().unwrap_or_default());
            }
            human += &format!(
                "\n{} passed, {} failed in {:.1}s\n",
                report.passed, report.failed, report.seconds
            );
            let mut o = output(&report, human);
            o.exit = if report.failed == 0 { 0 } else { 1 };
            Ok(o)
        }
    }
}

/// Parses `argv` (program name first), runs the command and writes its result
/// to `out` and diagnostics to `err`. Returns the process exit code: 0 on
/// success, 1 on a domain or input error, 2 on a usage error.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t as usize).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Input {
                kind: "threads",
                message: e.to_string(),
            }),
        },
        None => execute(&cli),
    };
    match result {
        Ok(o) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&o.json).expect("json values serialize") + "\n"
            } else {
                o.human
            };
            let _ = out.write_all(text.as_bytes());
            o.exit
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(e) => {
            let (kind, message) = match e {
                CliError::Domain(d) => (d.kind(), d.to_string()),
                CliError::Input { kind, message } => (kind, message),
                CliError::Usage(_) => unreachable!(),
            };
            let obj = json!({"error": {"kind": kind, "message": message}});
            let _ = writeln!(out, "{obj}");
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
