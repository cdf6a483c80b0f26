//! The `ergodisk` command line.
//!
//! Exit codes: 0 success, 1 failed check (or I/O failure), 2 usage error,
//! 3 numeric divergence (the report is still written).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::acceptance::{run_suite, CriterionResult};
use crate::classify::{besov_multiplier_check, classify, one_in_closure, range_cloud, Status};
use crate::dynamics::{bloch_opnorm_bounds, full_trace, trace_degree};
use crate::error::Error;
use crate::function::{parse_spec, AnalyticFunction};
use crate::norms::{
    besov1_seminorm, besov_seminorm, bloch_norm, condition_31, little_bloch_limsup, sigma_psi, space_norm,
    sup_norm_hinf, SpaceTag,
};
use crate::quadrature::GridSpec;
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

pub const SEED_VAR: &str = "ERGODISK_SEED";

/// Interior samples drawn by `spectrum` when `--n` is absent.
const DEFAULT_CLOUD: u32 = 1024;
const DEFAULT_TRACE: u32 = 200;

#[derive(Debug, Parser)]
#[command(name = "ergodisk", version, about = "Mean ergodicity of multiplication operators on disk function spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norms and seminorms of a function.
    Norms(RunArgs),
    /// Power boundedness and (uniform) mean ergodicity of M_ψ.
    Classify(RunArgs),
    /// Iterate and Cesàro-mean norms applied to the constant 1.
    Trace(RunArgs),
    /// Sampled range of ψ and whether 1 lies in its closure.
    Spectrum(RunArgs),
    /// Run the acceptance suite.
    Check(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Bloch,
    LittleBloch,
    Besov,
    Besov1,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "bloch")]
    pub space: SpaceArg,
    /// Besov exponent, required with `--space besov`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Function spec, e.g. "poly 0 1" or "mobius 0.5".
    #[arg(long = "fn")]
    pub fn_spec: Option<String>,
    /// Trace length (default 200) or spectrum sample count (default 1024).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: Option<u32>,
    /// JSON file with grid settings; missing fields take defaults.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: bool,
}

/// Failure of a command, already mapped to an exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Io(_) | Error::Json(_) => EXIT_CHECK_FAILED,
            Error::NonFinite(_) => EXIT_DIVERGED,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("ergodisk: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> std::result::Result<i32, Failure> {
    match command {
        Command::Norms(a) => Context::new("norms", &a)?.norms(),
        Command::Classify(a) => Context::new("classify", &a)?.classify(),
        Command::Trace(a) => Context::new("trace", &a)?.trace(),
        Command::Spectrum(a) => Context::new("spectrum", &a)?.spectrum(),
        Command::Check(a) => check(&a),
    }
}

fn load_grid(path: Option<&Path>) -> std::result::Result<GridSpec, Failure> {
    let mut grid = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read grid file {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("bad grid file {}: {e}", p.display())))?
        }
        None => GridSpec::default(),
    };
    if let Ok(raw) = std::env::var(SEED_VAR) {
        grid.seed = parse_seed(&raw).ok_or_else(|| usage(format!("{SEED_VAR} must be an unsigned integer, got '{raw}'")))?;
    }
    grid.validate()?;
    Ok(grid)
}

fn parse_seed(raw: &str) -> Option<u64> {
    let raw = raw.trim();
    match raw.strip_prefix("0x").or_else(|| raw.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => raw.parse().ok(),
    }
}

fn check_tol(tol: f64) -> std::result::Result<(), Failure> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--tol must be finite and nonnegative, got {tol}")))
    }
}

fn resolve_space(a: &RunArgs) -> std::result::Result<SpaceTag, Failure> {
    match (a.space, a.p) {
        (SpaceArg::Besov, Some(p)) => Ok(SpaceTag::besov(p)?),
        (SpaceArg::Besov, None) => Err(usage("--space besov needs --p")),
        (_, Some(_)) => Err(usage("--p is only meaningful with --space besov")),
        (SpaceArg::Bloch, None) => Ok(SpaceTag::Bloch),
        (SpaceArg::LittleBloch, None) => Ok(SpaceTag::LittleBloch),
        (SpaceArg::Besov1, None) => Ok(SpaceTag::BesovOne),
    }
}

/// Everything a function command needs.
struct Context {
    command: &'static str,
    fn_text: String,
    psi: AnalyticFunction,
    space: SpaceTag,
    grid: GridSpec,
    tol: f64,
    n: Option<u32>,
    out: PathBuf,
    svg: bool,
}

impl Context {
    fn new(command: &'static str, a: &RunArgs) -> std::result::Result<Context, Failure> {
        let fn_text = a.fn_spec.clone().ok_or_else(|| usage(format!("{command} needs --fn <spec>")))?;
        let psi = parse_spec(&fn_text)?;
        let space = resolve_space(a)?;
        check_tol(a.tol)?;
        let grid = load_grid(a.grid.as_deref())?;
        Ok(Context { command, fn_text, psi, space, grid, tol: a.tol, n: a.n, out: a.out.clone(), svg: a.svg })
    }

    /// Writes `report.json` as the payload's fields plus the run envelope,
    /// and maps any diverged estimate in the payload to exit code 3.
    fn emit<T: Serialize>(&self, payload: &T) -> std::result::Result<i32, Failure> {
        let mut body = match serde_json::to_value(payload).map_err(Error::from)? {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        let diverged = any_diverged(&Value::Object(body.clone()));
        body.insert("command".into(), json!(self.command));
        body.insert("fn".into(), json!(self.fn_text));
        body.insert("psi".into(), json!(self.psi.render()));
        body.insert("space".into(), json!(self.space.to_string()));
        body.insert("grid".into(), serde_json::to_value(&self.grid).map_err(Error::from)?);
        body.insert("tol".into(), json!(self.tol));
        body.insert("diverged".into(), json!(diverged));
        report::write_json(&self.out, "report.json", &Value::Object(body))?;
        Ok(if diverged { EXIT_DIVERGED } else { EXIT_OK })
    }

    fn norms(&self) -> std::result::Result<i32, Failure> {
        let (psi, g) = (&self.psi, &self.grid);
        let mut norms = Map::new();
        let mut put = |k: &str, v: Value| {
            norms.insert(k.to_string(), v);
        };
        let sup = sup_norm_hinf(psi, g)?;
        let main = space_norm(psi, self.space, g)?;
        put("sup_norm_hinf", to_value(&sup)?);
        put("bloch", to_value(&bloch_norm(psi, g)?)?);
        put("sigma_psi", to_value(&sigma_psi(psi, g)?)?);
        match self.space {
            SpaceTag::LittleBloch => put("little_bloch_limsup", to_value(&little_bloch_limsup(psi, g)?)?),
            SpaceTag::Besov(p) => {
                put("besov", to_value(&besov_seminorm(psi, p, g)?)?);
                put("condition_integral", to_value(&condition_31(psi, p, g)?)?);
            }
            SpaceTag::BesovOne => put("besov1_seminorm", to_value(&besov1_seminorm(psi, g)?)?),
            SpaceTag::Bloch => {}
        }
        put("space_norm", to_value(&main)?);
        let code = self.emit(&json!({ "norms": norms }))?;
        println!(
            "norms {} of {}: {} ± {:.1e} (sup {})",
            self.space,
            self.psi.render(),
            main.value,
            main.error_estimate,
            sup.value
        );
        Ok(code)
    }

    fn classify(&self) -> std::result::Result<i32, Failure> {
        let r = classify(&self.psi, self.space, &self.grid, self.tol)?;
        let code = self.emit(&r)?;
        println!(
            "classify {} of {}: power_bounded={} mean_ergodic={} uniformly_mean_ergodic={}",
            self.space,
            self.psi.render(),
            status_text(&r.power_bounded.status),
            status_text(&r.mean_ergodic.status),
            status_text(&r.uniformly_mean_ergodic.status)
        );
        Ok(code)
    }

    fn trace(&self) -> std::result::Result<i32, Failure> {
        let n = self.n.unwrap_or(DEFAULT_TRACE);
        let one = AnalyticFunction::Constant(Complex64::new(1.0, 0.0));
        let degree = trace_degree(&self.psi, &one, n);
        let t = full_trace(&self.psi, &one, self.space, n, &self.grid, degree)?;
        let mut payload = Map::new();
        payload.insert("max_degree".into(), json!(degree));
        if matches!(self.space, SpaceTag::Bloch | SpaceTag::LittleBloch) {
            payload.insert("operator_norm_bounds".into(), to_value(&bloch_opnorm_bounds(&self.psi, &self.grid)?)?);
        }
        payload.insert("trace".into(), to_value(&t)?);
        report::write_trace_csv(&self.out, &t)?;
        if self.svg {
            report::write_trace_svg(&self.out, &t)?;
        }
        let code = self.emit(&payload)?;
        let last = t.entries.last().and_then(|e| e.cesaro_norm.as_ref()).map(|c| c.value);
        println!(
            "trace {} of {}: {} rows, last cesaro norm {}",
            self.space,
            self.psi.render(),
            t.entries.len(),
            last.map_or("n/a".to_string(), |v| v.to_string())
        );
        Ok(code)
    }

    fn spectrum(&self) -> std::result::Result<i32, Failure> {
        let n = self.n.unwrap_or(DEFAULT_CLOUD) as usize;
        let cloud = range_cloud(&self.psi, n, &self.grid)?;
        let closure = one_in_closure(&self.psi, self.tol, &self.grid)?;
        let sup = sup_norm_hinf(&self.psi, &self.grid)?;
        // Sampled values of ψ are spectral points of M_ψ; on Besov spaces with
        // a bounded multiplier the closed range is the whole spectrum.
        let mut payload = Map::new();
        let label = match self.space {
            SpaceTag::Besov(p) => {
                let m = besov_multiplier_check(&self.psi, p, &self.grid)?;
                let whole = m.status == Status::Holds;
                payload.insert("multiplier".into(), to_value(&m)?);
                if whole {
                    "spectrum"
                } else {
                    "subset of spectrum"
                }
            }
            _ => "subset of spectrum",
        };
        payload.insert("label".into(), json!(label));
        payload.insert("samples".into(), json!(cloud.len()));
        payload.insert("sup_norm_hinf".into(), to_value(&sup)?);
        payload.insert("one_in_closure".into(), to_value(&closure)?);
        report::write_cloud_csv(&self.out, &cloud)?;
        if self.svg {
            report::write_cloud_svg(&self.out, &cloud, &format!("{label}: range of {}", self.psi.render()))?;
        }
        let code = self.emit(&payload)?;
        println!(
            "spectrum of {} ({label}): {} samples, 1 in closure: {} (inf |1-psi| = {})",
            self.psi.render(),
            cloud.len(),
            status_text(&closure.answer.into()),
            closure.inf_distance.value
        );
        Ok(code)
    }
}

fn to_value<T: Serialize>(v: &T) -> std::result::Result<Value, Failure> {
    Ok(serde_json::to_value(v).map_err(Error::from)?)
}

fn any_diverged(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.get("diverged") == Some(&Value::Bool(true)) || m.values().any(any_diverged),
        Value::Array(a) => a.iter().any(any_diverged),
        _ => false,
    }
}

fn status_text(s: &Status) -> String {
    match s {
        Status::Holds => "holds".into(),
        Status::Fails => "fails".into(),
        Status::Undecided => "undecided".into(),
        Status::ConditionalOn { premise, resolves_to } => {
            format!("conditional({premise} -> {})", status_text(&(*resolves_to).into()))
        }
    }
}

fn criterion_line(c: &CriterionResult) -> String {
    format!("criterion {} [{}] {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.name)
}

/// Runs criteria 1 to 8 and writes `report.json`. When the output directory
/// already holds a report made with the same grid and tolerance, the new
/// bytes are compared against it and the determinism line is printed too.
fn check(a: &RunArgs) -> std::result::Result<i32, Failure> {
    check_tol(a.tol)?;
    let grid = load_grid(a.grid.as_deref())?;
    let suite = run_suite(&grid, a.tol);
    let mut body = match to_value(&suite)? {
        Value::Object(m) => m,
        _ => unreachable!("suite report is a struct"),
    };
    body.insert("command".into(), json!("check"));
    body.insert("tol".into(), json!(a.tol));
    let text = report::to_json(&Value::Object(body))?;

    let path = a.out.join("report.json");
    let previous = fs::read_to_string(&path).ok().filter(|old| comparable(old, &grid, a.tol));
    fs::create_dir_all(&a.out).map_err(Error::from)?;
    fs::write(&path, &text).map_err(Error::from)?;

    for c in &suite.criteria {
        println!("{}", criterion_line(c));
        if !c.passed {
            println!("  {}", c.detail);
        }
    }
    let mut passed = suite.passed;
    match previous {
        Some(old) => {
            let same = old == text;
            passed &= same;
            println!("criterion 9 [{}] determinism", if same { "PASS" } else { "FAIL" });
        }
        None => println!("criterion 9 [SKIP] determinism (rerun check with the same --out to compare)"),
    }
    let failed = suite.criteria.iter().filter(|c| !c.passed).count();
    println!("check: {} of {} criteria passed, report at {}", suite.criteria.len() - failed, suite.criteria.len(), path.display());
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn comparable(old: &str, grid: &GridSpec, tol: f64) -> bool {
    let Ok(v) = serde_json::from_str::<Value>(old) else { return false };
    let same_grid = serde_json::to_value(grid).ok().as_ref() == v.get("grid");
    same_grid && v.get("command") == Some(&json!("check")) && v.get("tol") == Some(&json!(tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_in_decimal_and_hex() {
        assert_eq!(parse_seed("42"), Some(42));
        assert_eq!(parse_seed("0xB10C"), Some(0xB10C));
        assert_eq!(parse_seed("-1"), None);
    }

    #[test]
    fn besov_requires_p_and_only_besov_takes_it() {
        let args = |space, p| RunArgs {
            space,
            p,
            fn_spec: None,
            n: None,
            grid: None,
            tol: 1e-9,
            out: PathBuf::from("out"),
            svg: false,
        };
        assert!(resolve_space(&args(SpaceArg::Besov, None)).is_err());
        assert!(resolve_space(&args(SpaceArg::Bloch, Some(2.0))).is_err());
        assert!(resolve_space(&args(SpaceArg::Besov, Some(1.0))).is_err());
        assert_eq!(resolve_space(&args(SpaceArg::Besov, Some(2.0))).ok(), Some(SpaceTag::Besov(2.0)));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["ergodisk", "norms", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["ergodisk", "norms", "--fn", "poly 0 ("]), EXIT_USAGE);
    }

    #[test]
    fn divergence_is_found_anywhere() {
        assert!(any_diverged(&json!({"a": [{"diverged": false}, {"b": {"diverged": true}}]})));
        assert!(!any_diverged(&json!({"a": [{"diverged": false}]})));
    }
}
