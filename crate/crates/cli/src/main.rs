//! `dirset`: solve Dirichlet problems, check cone algebra and boundary convexity,
//! analyze grid fields and run the acceptance suite.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
//! configuration errors. Configuration errors name the offending JSON pointer.

mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use dirset_core::cones::{free_dim, verify_battery, BatteryConfig, SetSpec};
use dirset_core::geometry::{boundary_sweep, construct_global_defining, domain_from_json, DefiningConfig, Verdict};
use dirset_core::grid::{quasiconvex_modulus, subaffine_report, sup_convolution, type_report, ProbeSettings};
use dirset_core::sampling::DEFAULT_SEED;
use dirset_core::solver::{solve_dirichlet, SolveConfig};
use dirset_core::suite::{run_criterion, CRITERIA};
use dirset_core::{ConeSet, Error, GridBox, GridField};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "dirset", version, about = "Dirichlet sets: solver, cone checks and boundary geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Dirichlet problem; writes solution.csv, report.json and manifest.json.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        out: OutDir,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run the cone-algebra invariants over the catalog; prints the reports as JSON.
    VerifyCones {
        /// Only sets whose name contains this string.
        #[arg(long = "set")]
        set: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Boundary convexity sweep; writes boundary.csv and manifest.json.
    CheckBoundary {
        domain: PathBuf,
        set: PathBuf,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        out: OutDir,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Construct a global defining function strict of ray type; writes defining.csv,
    /// defining.json and manifest.json.
    BuildDefining {
        domain: PathBuf,
        set: PathBuf,
        /// Lattice spacing of the sampled field; defaults to 1/64 of the longest box side.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        out: OutDir,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Subaffinity, type or sup-convolution reports for a grid CSV.
    Analyze(AnalyzeArgs),
    /// Free dimension of a set, as JSON.
    Freedim {
        set: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run the acceptance criteria (all of them unless ids are given).
    Suite {
        ids: Vec<usize>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Args)]
struct OutDir {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SeedArg {
    /// Overrides both the SEED environment variable and any seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
#[group(id = "mode", required = true, multiple = false, args = ["subaffine", "type_", "supconv"])]
struct AnalyzeArgs {
    grid: PathBuf,
    /// Set as a JSON file or inline JSON; required by --type.
    #[arg(long = "set")]
    set: Option<String>,
    #[arg(long)]
    subaffine: bool,
    #[arg(long = "type", id = "type_")]
    type_: bool,
    /// Sup-convolution parameter ε.
    #[arg(long, value_name = "EPS")]
    supconv: Option<f64>,
    /// Margin tolerance; defaults to 1e−5/h², ten times the solver's residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Randomized probes run alongside the pointwise check.
    #[arg(long, default_value_t = 100)]
    probes: usize,
    /// Writes analysis.json (and supconv.csv) with a manifest instead of only printing.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

/// A failed run: configuration problems exit 2, everything else 1.
enum Failure {
    Usage(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. }
            | Error::Expr(_)
            | Error::Json(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidGrid(_)
            | Error::EmptySetList => Failure::Usage(e),
            other => Failure::Run(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

type CmdResult = std::result::Result<bool, Failure>;

fn report_failure(f: &Failure) -> ExitCode {
    let (code, e) = match f {
        Failure::Usage(e) => (2, e),
        Failure::Run(e) => (1, e),
    };
    let pointer = match e {
        Error::Config { pointer, .. } => Some(pointer.clone()),
        _ => None,
    };
    let body = json!({ "error": e.to_string(), "pointer": pointer });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn seed_from(arg: &SeedArg, config: Option<u64>) -> std::result::Result<u64, Failure> {
    if let Some(s) = arg.seed {
        return Ok(s);
    }
    match std::env::var("SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Usage(Error::Config {
                pointer: "$SEED".into(),
                message: format!("not an unsigned integer: {v:?}"),
            })
        }),
        Err(_) => Ok(config.unwrap_or(DEFAULT_SEED)),
    }
}

fn read_input(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| {
        Failure::Usage(Error::Config {
            pointer: "/".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })
    })
}

fn utf8(path: &Path, bytes: &[u8]) -> std::result::Result<String, Failure> {
    String::from_utf8(bytes.to_vec()).map_err(|_| {
        Failure::Usage(Error::Config {
            pointer: "/".into(),
            message: format!("{} is not UTF-8", path.display()),
        })
    })
}

fn load_set(src: &str) -> std::result::Result<ConeSet, Failure> {
    Ok(SetSpec::from_json(src)?.build()?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn cmd_solve(config: &Path, out: &Path, seed: &SeedArg) -> CmdResult {
    let bytes = read_input(config)?;
    let mut cfg = SolveConfig::from_json(&utf8(config, &bytes)?)?;
    cfg.seed = Some(seed_from(seed, cfg.seed)?);
    let mut m = RunManifest::start("solve", &[(config.to_path_buf(), bytes)], cfg.seed.unwrap_or(DEFAULT_SEED));
    let (u, mut report) = solve_dirichlet(&cfg)?;
    // timing lives in the manifest so that the report is reproducible
    report.wall_time = None;
    std::fs::create_dir_all(out)?;
    m.write(&out.join("solution.csv"), u.to_csv_string().as_bytes())?;
    let body = json!({ "config": cfg, "report": report });
    m.write(&out.join("report.json"), to_json(&body).as_bytes())?;
    m.finish(out)?;
    print!("{}", to_json(&report));
    Ok(report.converged)
}

fn cmd_verify(set: Option<String>, samples: usize, seed: &SeedArg) -> CmdResult {
    let cfg = BatteryConfig {
        samples,
        seed: seed_from(seed, None)?,
        set_filter: set.clone(),
    };
    let reports = verify_battery(&cfg)?;
    if reports.is_empty() {
        return Err(Failure::Usage(Error::Config {
            pointer: "--set".into(),
            message: format!("no catalog set matches {:?}", set.unwrap_or_default()),
        }));
    }
    print!("{}", to_json(&reports));
    Ok(reports.iter().all(|r| r.pass))
}

fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_check_boundary(domain: &Path, set: &Path, samples: usize, out: &Path, seed: &SeedArg) -> CmdResult {
    let db = read_input(domain)?;
    let sb = read_input(set)?;
    let d = domain_from_json(&utf8(domain, &db)?)?;
    let f = load_set(&utf8(set, &sb)?)?;
    if f.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: f.dim(),
        }
        .into());
    }
    let seed = seed_from(seed, None)?;
    let mut m = RunManifest::start(
        "check-boundary",
        &[(domain.to_path_buf(), db), (set.to_path_buf(), sb)],
        seed,
    );
    let reports = boundary_sweep(&d, &f, samples, Some(seed))?;
    let n = d.dim();
    let mut csv = String::new();
    let cols: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("normal{i}")))
        .chain(["margin", "t_star", "verdict"].map(String::from))
        .collect();
    csv.push_str(&cols.join(","));
    csv.push('\n');
    let mut failures = 0;
    for r in &reports {
        let mut row: Vec<String> = r.point.iter().chain(&r.normal).map(|&v| csv_num(v)).collect();
        row.push(csv_num(r.margin));
        row.push(r.t_star.map(csv_num).unwrap_or_default());
        row.push(match r.verdict {
            Verdict::Strict => "strict".into(),
            Verdict::Fail => {
                failures += 1;
                "fail".into()
            }
        });
        let _ = writeln!(csv, "{}", row.join(","));
    }
    std::fs::create_dir_all(out)?;
    m.write(&out.join("boundary.csv"), csv.as_bytes())?;
    m.finish(out)?;
    let worst = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    print!(
        "{}",
        to_json(&json!({ "points": reports.len(), "failures": failures, "worst_margin": worst }))
    );
    Ok(failures == 0)
}

fn cmd_build_defining(domain: &Path, set: &Path, h: Option<f64>, out: &Path, seed: &SeedArg) -> CmdResult {
    let db = read_input(domain)?;
    let sb = read_input(set)?;
    let d = domain_from_json(&utf8(domain, &db)?)?;
    let f = load_set(&utf8(set, &sb)?)?;
    let seed = seed_from(seed, None)?;
    let mut m = RunManifest::start(
        "build-defining",
        &[(domain.to_path_buf(), db), (set.to_path_buf(), sb)],
        seed,
    );
    let mut cfg = DefiningConfig::for_dim(d.dim());
    cfg.seed = Some(seed);
    let (g, report) = match construct_global_defining(&d, &f, &f, &cfg) {
        Ok(v) => v,
        // a failed stage is a negative verdict, not a crash
        Err(e @ Error::ConstructionFailed { .. }) => return Err(Failure::Run(e)),
        Err(e) => return Err(e.into()),
    };
    let bb = d.bounding_box();
    let side = bb.lo.iter().zip(&bb.hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let h = h.unwrap_or(side / 64.0);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Failure::Usage(Error::Config {
            pointer: "--h".into(),
            message: format!("lattice spacing must be positive, got {h}"),
        }));
    }
    let mut field = GridField::on_box(&GridBox::new(bb.lo.clone(), bb.hi.clone())?, h)?;
    for k in 0..field.len() {
        let v = g.value(&field.coord(k))?;
        field.set(k, v);
    }
    std::fs::create_dir_all(out)?;
    m.write(&out.join("defining.csv"), field.to_csv_string().as_bytes())?;
    m.write(&out.join("defining.json"), to_json(&report).as_bytes())?;
    m.finish(out)?;
    print!("{}", to_json(&report));
    Ok(report.min_ray_defect > 0.0)
}

fn cmd_analyze(a: &AnalyzeArgs) -> CmdResult {
    let gb = read_input(&a.grid)?;
    let u = GridField::from_csv_str(&utf8(&a.grid, &gb)?)?;
    let mut inputs = vec![(a.grid.clone(), gb)];
    let set = match &a.set {
        None => None,
        Some(s) if s.trim_start().starts_with('{') => {
            inputs.push((PathBuf::from("--set"), s.as_bytes().to_vec()));
            Some(load_set(s)?)
        }
        Some(p) => {
            let path = PathBuf::from(p);
            let bytes = read_input(&path)?;
            let set = load_set(&utf8(&path, &bytes)?)?;
            inputs.push((path, bytes));
            Some(set)
        }
    };
    let seed = seed_from(&a.seed, None)?;
    let settings = ProbeSettings { trials: a.probes, seed };
    let tol = a.tol.unwrap_or(1e-5 / (u.h() * u.h()));
    let mut extra: Option<GridField> = None;
    let (body, pass) = if a.subaffine {
        let r = subaffine_report(&u, tol, settings)?;
        let pass = r.pass;
        (json!(r), pass)
    } else if a.type_ {
        let f = set.as_ref().ok_or_else(|| {
            Failure::Usage(Error::Config {
                pointer: "--set".into(),
                message: "--type needs a set".into(),
            })
        })?;
        let r = type_report(&u, f, tol, a.probes, settings)?;
        let pass = r.pass;
        (json!(r), pass)
    } else {
        let eps = a.supconv.expect("clap enforces one mode");
        let bound = u.max_abs();
        let s = sup_convolution(&u, eps, bound)?;
        let input_modulus = quasiconvex_modulus(&u)?;
        let output_modulus = quasiconvex_modulus(&s)?;
        let modulus_bound = 2.0 / eps;
        let shrink = ((s.lo()[0] - u.lo()[0]) / u.h()).round() as usize;
        let dominates = (0..s.len()).all(|k| {
            let idx: Vec<usize> = s.index_of(k).iter().map(|i| i + shrink).collect();
            s.get(k) >= u.get(u.flat(&idx))
        });
        let typed = match &set {
            Some(f) => Some(type_report(&s, f, tol, 0, settings)?),
            None => None,
        };
        let pass = dominates
            && output_modulus <= modulus_bound * (1.0 + 1e-12)
            && typed.as_ref().is_none_or(|r| r.pass);
        extra = Some(s);
        (
            json!({
                "eps": eps,
                "bound": bound,
                "points_removed_per_side": shrink,
                "dominates_input": dominates,
                "input_modulus": input_modulus,
                "output_modulus": output_modulus,
                "modulus_bound": modulus_bound,
                "type": typed,
                "pass": pass,
            }),
            pass,
        )
    };
    let text = to_json(&body);
    if let Some(out) = &a.out {
        let mut m = RunManifest::start("analyze", &inputs, seed);
        std::fs::create_dir_all(out)?;
        if let Some(s) = &extra {
            m.write(&out.join("supconv.csv"), s.to_csv_string().as_bytes())?;
        }
        m.write(&out.join("analysis.json"), text.as_bytes())?;
        m.finish(out)?;
    }
    print!("{text}");
    Ok(pass)
}

fn cmd_freedim(set: &Path, seed: &SeedArg) -> CmdResult {
    let bytes = read_input(set)?;
    let f = load_set(&utf8(set, &bytes)?)?;
    let r = free_dim(&f, Some(seed_from(seed, None)?))?;
    print!("{}", to_json(&r));
    Ok(true)
}

fn cmd_suite(ids: &[usize], as_json: bool, seed: &SeedArg) -> CmdResult {
    let seed = seed_from(seed, None)?;
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA) {
        return Err(Failure::Usage(Error::Config {
            pointer: "ids".into(),
            message: format!("criteria are numbered 1..={CRITERIA}, got {bad}"),
        }));
    }
    let ids: Vec<usize> = if ids.is_empty() { (1..=CRITERIA).collect() } else { ids.to_vec() };
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, seed);
        if !as_json {
            println!("{}", r.line());
        }
        results.push(r);
    }
    if as_json {
        print!("{}", to_json(&results));
    }
    Ok(results.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { config, out, seed } => cmd_solve(config, &out.out, seed),
        Command::VerifyCones { set, samples, seed } => cmd_verify(set.clone(), *samples, seed),
        Command::CheckBoundary {
            domain,
            set,
            samples,
            out,
            seed,
        } => cmd_check_boundary(domain, set, *samples, &out.out, seed),
        Command::BuildDefining {
            domain,
            set,
            h,
            out,
            seed,
        } => cmd_build_defining(domain, set, *h, &out.out, seed),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Freedim { set, seed } => cmd_freedim(set, seed),
        Command::Suite { ids, json, seed } => cmd_suite(ids, *json, seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => report_failure(&f),
    }
}
