//! The `cmtrace` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 precision
//! or budget failure.

pub mod cache;
pub mod emit;
pub mod tables;
pub mod verify;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use crate::analytic::{exact_formula_tj, regularized_average, trace, FSpec};
use crate::error::{Error, Result};
use crate::qexp::rational_string;
use crate::qform::{reduce_with_matrix, QuadForm};
use crate::thetalift::{disc_form_of, eisen_prediction, fourier_extract, theta_integral, LatticeSpec, KERNEL_BUDGET};
use cache::{cache_key, default_cache_dir, Cache, CACHE_VERSION};
use emit::Format;
use tables::{class_rows, discriminants, duke_rows, form_rows, named_series, poincare_rows, series_rows, trace_rows};
use verify::{run_check, Check, Level, Params, CHECKS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Config {
    /// `None` picks a per-input working precision.
    pub precision_bits: Option<usize>,
    pub threads: usize,
    pub cache_dir: PathBuf,
    pub use_cache: bool,
    pub default_c_max: u64,
    pub default_tol: f64,
}

#[derive(Parser, Debug)]
#[command(name = "cmtrace", version, about = "Traces of singular moduli, their generating series and the theta lift")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Working precision in bits (at least 64); default depends on the input.
    #[arg(long, global = true)]
    precision: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cache location; defaults to $CMTRACE_CACHE_DIR or ~/.cache/cmtrace.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce a positive definite form a,b,c.
    Reduce {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
    },
    /// Reduced forms, or Gamma_0^*(p) orbit representatives with --level.
    Forms {
        #[arg(long = "D")]
        d: i64,
        #[arg(long, default_value_t = 1)]
        level: u64,
    },
    /// Hurwitz class numbers.
    Classnum {
        #[arg(long)]
        range: Option<String>,
        #[arg(long = "D")]
        d: Option<i64>,
    },
    /// Certified traces t_f(D).
    Trace {
        #[arg(long, default_value = "J")]
        f: String,
        #[arg(long = "D")]
        d: Option<i64>,
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        dmax: Option<i64>,
        #[arg(long)]
        level: Option<u64>,
    },
    /// Exact q-expansion coefficients of a named series.
    Series {
        /// j, J, g, theta, eta, E<k>, J<m>, T<p>, plus-J<m>
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 20)]
        trunc: i64,
    },
    /// Run verification checks: fast, full, or a single check name.
    Verify {
        #[arg(default_value = "fast")]
        suite: String,
        #[arg(long)]
        dmax: Option<i64>,
        #[arg(long)]
        cmax: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Partial sums of the exact formula for t_J(D).
    Exactformula {
        #[arg(long = "D")]
        d: i64,
        #[arg(long)]
        cmax: Option<u64>,
    },
    /// Kloosterman-Bessel coefficients of weight k Poincare-type forms.
    Poincare {
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        n: Vec<u64>,
        #[arg(long)]
        cmax: Option<u64>,
    },
    /// Duke statistics over a range of discriminants.
    Duke {
        #[arg(long)]
        range: String,
        /// Keep only fundamental discriminants.
        #[arg(long)]
        fundamental: bool,
    },
    /// Numerical theta integral and its prediction.
    Theta {
        /// tau as u,v
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value = "1")]
        f: String,
        /// Coset index, or "avg" for (I_0 + I_1)/2.
        #[arg(long, default_value = "avg")]
        component: String,
        #[arg(long, default_value = "level4")]
        lattice: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Extract the coefficient of e(m tau) (m = D/4) instead.
        #[arg(long)]
        extract: Option<String>,
        #[arg(long, default_value_t = 8)]
        grid: usize,
    },
    /// Regularized average of f over the fundamental domain.
    Avg {
        #[arg(long, default_value = "J")]
        f: String,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Single-document output of a non-table command.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: serde_json::Value,
    pub outputs: serde_json::Value,
    /// Identities checked by this command.
    pub provenance: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub timing: f64,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionTooLow(..)
        | Error::PrecisionUnachievable(_)
        | Error::Uncertified { .. }
        | Error::BudgetExceeded(_)
        | Error::ToleranceNotMet(_)
        | Error::SolveFailed(_) => EXIT_PRECISION,
        _ => EXIT_USAGE,
    }
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let bad = || Error::InvalidArgument(format!("range {s} is not lo:hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidArgument(format!("{s} is not u,v"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_rational(s: &str) -> Result<Rational64> {
    s.trim().parse().map_err(|_| Error::InvalidArgument(format!("{s} is not a rational number")))
}

fn cached(cfg: &Config, op: &str, inputs: String, compute: impl FnOnce() -> Result<String>) -> Result<String> {
    if !cfg.use_cache {
        return compute();
    }
    let key = cache_key(op, &inputs, cfg.precision_bits, CACHE_VERSION);
    Cache::new(&cfg.cache_dir).get_or_compute(&key, compute)
}

fn report(command: &str, inputs: serde_json::Value, outputs: serde_json::Value, provenance: &[&str], t0: Instant) -> Report {
    Report {
        command: command.into(),
        inputs,
        outputs,
        provenance: provenance.iter().map(|s| s.to_string()).collect(),
        pass: None,
        timing: t0.elapsed().as_secs_f64(),
    }
}

/// Runs one command; returns the text to print and the exit code.
fn execute(cmd: Command, cfg: &Config, format: Format) -> Result<(String, i32)> {
    let t0 = Instant::now();
    let prec = cfg.precision_bits;
    let ok = |s: String| Ok((s, EXIT_OK));
    match cmd {
        Command::Reduce { form } => {
            let v: Vec<i64> = form.split(',').map(|t| t.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| Error::InvalidArgument(format!("form {form} is not a,b,c")))?;
            let [a, b, c] = v[..] else { return Err(Error::InvalidArgument(format!("form {form} is not a,b,c"))) };
            let f = QuadForm::new(a, b, c)?;
            let (r, m) = reduce_with_matrix(&f)?;
            let out = json!({"reduced": [r.a, r.b, r.c], "matrix": m.0, "D": f.big_d()});
            ok(emit::report(&report("reduce", json!({"form": [a, b, c]}), out, &[], t0), format)?)
        }
        Command::Forms { d, level } => {
            let inputs = format!("{d} {level} {format:?}");
            ok(cached(cfg, "forms", inputs, || emit::table(&form_rows(d, level)?, format))?)
        }
        Command::Classnum { range, d } => {
            let ds = match (range, d) {
                (Some(r), None) => {
                    let (lo, hi) = parse_range(&r)?;
                    discriminants(lo, hi)
                }
                (None, Some(d)) => vec![d],
                _ => return Err(Error::InvalidArgument("give exactly one of --range and --D".into())),
            };
            let inputs = format!("{ds:?} {format:?}");
            ok(cached(cfg, "classnum", inputs, || emit::table(&class_rows(&ds), format))?)
        }
        Command::Trace { f, d, range, dmax, level } => {
            let spec = FSpec::parse(&f)?;
            let p = level.unwrap_or(spec.level());
            let ds = match (d, range, dmax) {
                (Some(d), None, None) => vec![d],
                (None, Some(r), None) => {
                    let (lo, hi) = parse_range(&r)?;
                    discriminants(lo, hi)
                }
                (None, None, Some(m)) => discriminants(1, m),
                _ => return Err(Error::InvalidArgument("give exactly one of --D, --range and --dmax".into())),
            };
            let inputs = format!("{} {p} {ds:?} {format:?}", spec.name());
            ok(cached(cfg, "trace", inputs, || emit::table(&trace_rows(&spec, &ds, p, prec)?, format))?)
        }
        Command::Series { name, trunc } => {
            let inputs = format!("{name} {trunc} {format:?}");
            ok(cached(cfg, "series", inputs, || emit::table(&series_rows(&named_series(&name, trunc)?), format))?)
        }
        Command::Verify { suite, dmax, cmax, tol } => {
            let (level, names): (Level, Vec<&str>) = match suite.as_str() {
                "fast" => (Level::Fast, CHECKS.to_vec()),
                "full" => (Level::Full, CHECKS.to_vec()),
                s if CHECKS.contains(&s) => (Level::Fast, vec![s]),
                other => return Err(Error::InvalidArgument(format!("unknown suite {other}; use fast, full or one of {CHECKS:?}"))),
            };
            let params = Params { dmax, cmax, tol: tol.or(Some(cfg.default_tol)) };
            let checks: Vec<Check> = names.iter().map(|n| run_check(n, level, &params)).collect();
            let pass = checks.iter().all(|c| c.pass);
            let failing: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.anchor.as_str()).collect();
            let provenance: Vec<&str> = checks.iter().map(|c| c.anchor.as_str()).collect();
            let mut r = report("verify", json!({"suite": suite, "dmax": dmax, "cmax": cmax, "tol": params.tol}), serde_json::to_value(&checks).map_err(|e| Error::Io(e.to_string()))?, &provenance, t0);
            r.pass = Some(pass);
            for a in &failing {
                eprintln!("verification failed: {a}");
            }
            Ok((emit::report(&r, format)?, if pass { EXIT_OK } else { EXIT_VERIFY }))
        }
        Command::Exactformula { d, cmax } => {
            let c_max = cmax.unwrap_or(10_000) / 4 * 4;
            let p = prec.unwrap_or(128);
            let v = exact_formula_tj(d, c_max, p)?.to_f64();
            let first = exact_formula_tj(d, 4, p)?.to_f64();
            let t = trace(&FSpec::big_j(), d, 1, None)?;
            let out = json!({
                "D": d, "c_max": c_max, "value": v, "first_term": first,
                "trace": rational_string(&t.value_rounded),
                "difference": num_traits::ToPrimitive::to_f64(&t.value_rounded).unwrap_or(f64::NAN) - v,
                "precision": p,
            });
            ok(emit::report(&report("exactformula", json!({"D": d, "cmax": c_max}), out, &["exact formula for t_J(D)"], t0), format)?)
        }
        Command::Poincare { k, m, n, cmax } => {
            let c_max = cmax.unwrap_or(cfg.default_c_max);
            let p = prec.unwrap_or(128);
            let inputs = format!("{k} {m} {n:?} {c_max} {format:?}");
            ok(cached(cfg, "poincare", inputs, || emit::table(&poincare_rows(k, m, &n, c_max, p)?, format))?)
        }
        Command::Duke { range, fundamental } => {
            let (lo, hi) = parse_range(&range)?;
            let ds: Vec<i64> = discriminants(lo.max(3), hi).into_iter().filter(|&d| !fundamental || crate::qform::is_fundamental(d)).collect();
            let p = prec.unwrap_or(64);
            let inputs = format!("{ds:?} {format:?}");
            ok(cached(cfg, "duke", inputs, || emit::table(&duke_rows(&ds, p)?, format))?)
        }
        Command::Theta { tau, f, component, lattice, tol, extract, grid } => {
            let (u, v) = parse_pair(&tau)?;
            let spec = FSpec::parse(&f)?;
            let lat = LatticeSpec::parse(&lattice)?;
            let d = disc_form_of(&lat)?;
            let tol = tol.unwrap_or(cfg.default_tol);
            let comps: Vec<usize> = if component == "avg" {
                if lat != LatticeSpec::level4() {
                    return Err(Error::InvalidArgument("component avg is defined for level4".into()));
                }
                vec![0, 1]
            } else {
                vec![component.parse().map_err(|_| Error::InvalidArgument(format!("bad component {component}")))?]
            };
            if let Some(m) = extract {
                let m = parse_rational(&m)?;
                let h = if component == "avg" {
                    d.qvals.iter().position(|q| (m - q).is_integer()).ok_or_else(|| Error::InvalidArgument(format!("no coset has q = {m} mod 1")))?
                } else {
                    comps[0]
                };
                let c = fourier_extract(&d, h, m, v, &spec, grid, tol)?;
                let out = json!({"m": m.to_string(), "h": h, "D": (m * 4).to_string(), "v": v, "coefficient": [c.re, c.im], "err": c.err, "aliasing": c.aliasing, "grid": grid});
                return ok(emit::report(&report("theta", json!({"f": f, "lattice": lattice, "tol": tol}), out, &["Fourier coefficients of the theta lift are traces"], t0), format)?);
            }
            let tau_c = Complex64::new(u, v);
            let mut sum = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            for &h in &comps {
                let i = theta_integral(&d, h, tau_c, &spec, tol)?;
                sum += i.value();
                err += i.err;
            }
            let integral = sum / comps.len() as f64;
            let prediction = if component == "avg" { prediction_for(&spec, tau_c)? } else { None };
            let (abs_err, rel_err) = match prediction {
                Some(p) => ((integral - p).norm(), (integral - p).norm() / p.norm()),
                None => (f64::NAN, f64::NAN),
            };
            let out = ThetaReport {
                tau: [u, v],
                f: spec.name().to_string(),
                component,
                integral: [integral.re, integral.im],
                prediction: prediction.map(|p| [p.re, p.im]),
                abs_err: prediction.map(|_| abs_err),
                rel_err: prediction.map(|_| rel_err),
                quadrature_err: err / comps.len() as f64,
                tol,
                budget: KERNEL_BUDGET,
            };
            ok(emit::report(&out, format)?)
        }
        Command::Avg { f, tol } => {
            let spec = FSpec::parse(&f)?;
            let tol = tol.unwrap_or(1e-7);
            let r = regularized_average(&spec, tol)?;
            let out = json!({"f": spec.name(), "value": r.value, "err": r.err, "tol": tol});
            ok(emit::report(&report("avg", json!({"f": f, "tol": tol}), out, &["regularized average over the fundamental domain"], t0), format)?)
        }
    }
}

/// `{tau, f, component, integral, prediction, abs_err, rel_err, tol, budget}`.
#[derive(Debug, Serialize)]
pub struct ThetaReport {
    pub tau: [f64; 2],
    pub f: String,
    pub component: String,
    pub integral: [f64; 2],
    pub prediction: Option<[f64; 2]>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub quadrature_err: f64,
    pub tol: f64,
    /// Kernel term budget per evaluation.
    pub budget: usize,
}

/// Predicted `(I_0 + I_1)/2` at `tau`: the Eisenstein series for `f = 1`, the
/// plus-space form with the predicted principal part for `J_m`.
fn prediction_for(f: &FSpec, tau: Complex64) -> Result<Option<Complex64>> {
    if f.name() == "1" {
        return Ok(Some(eisen_prediction(tau, 200)));
    }
    let FSpec::Poly { poly, .. } = f else { return Ok(None) };
    let a = f.q_series(1)?;
    if !num_traits::Zero::is_zero(&a.coeff_int(0)?) {
        return Ok(None);
    }
    let pr: std::collections::BTreeMap<i64, num_rational::BigRational> =
        (1..=poly.degree() as i64).filter_map(|n| a.coeff_int(-n).ok().map(|c| (n, c))).filter(|(_, c)| !num_traits::Zero::is_zero(c)).collect();
    let pp = crate::qexp::predicted_series(&pr, 1)?;
    let s = crate::qexp::plus_space_solve(&pp, 80)?;
    let q = (Complex64::new(0.0, PI_HALF) * tau).exp();
    Ok(Some(s.eval_f64(q)))
}

const PI_HALF: f64 = std::f64::consts::FRAC_PI_2;

fn config(g: &Global) -> Result<Config> {
    if let Some(p) = g.precision {
        if p < 64 {
            return Err(Error::PrecisionTooLow(p, 64));
        }
    }
    let threads = g.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if threads < 1 {
        return Err(Error::InvalidArgument("--threads must be at least 1".into()));
    }
    Ok(Config {
        precision_bits: g.precision,
        threads,
        cache_dir: g.cache_dir.clone().unwrap_or_else(default_cache_dir),
        use_cache: !g.no_cache,
        default_c_max: 100_000,
        default_tol: 1e-3,
    })
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let format = cli.global.format;
    let result = pool.install(|| execute(cli.command, &cfg, format));
    match result {
        Ok((text, code)) => {
            let written = match &cli.global.out {
                Some(path) => std::fs::write(path, &text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(text.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
