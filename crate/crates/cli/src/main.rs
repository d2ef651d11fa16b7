use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wavespeed_core::fmt::g12;
use wavespeed_core::pde::{
    estimate_speed, SimConfig, DEFAULT_DT, DEFAULT_DX, DEFAULT_HALF_LENGTH, DEFAULT_T_END,
};
use wavespeed_core::scan::{
    emit_csv, emit_svg, figure2_dataset, scan_plane, Plane, RegionSample, Scale, ScanSpec, SvgStyle,
};
use wavespeed_core::supersol::{
    certify_candidate, choose_p_a, degenerate_build, degenerate_residuals, h_star, ResidualReport,
    SupersolCandidate, DEFAULT_TOL,
};
use wavespeed_core::theory::{classify, kstar_bounds, CriterionId, Sign, SignVerdict};
use wavespeed_core::{CompetitionParams, Error};

mod config;

use config::{layered, output_dir, FileConfig, Range, Usage};

const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_NO_CANDIDATE: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 70;

const CONFIG_HELP: &str = "\
Config files hold one `key = value` per line; `#` starts a comment.
Keys: L, dx, dt, t_end, tol, p, a, delta, plane, xrange, yrange, nx, ny,
log, with_pde, k2, r, out. Command-line flags override the file; the
WAVESPEED_OUT environment variable overrides `out`.

Exit status: classify 0 negative / 1 positive / 2 inconclusive; speed 3 when
the estimate did not converge; certify 0 certified / 1 not certified / 4 no
candidate; 64 invalid input; 70 runtime failure.";

#[derive(Debug, Parser)]
#[command(
    name = "wavespeed",
    version,
    about = "Sign of the bistable wave speed in the Lotka-Volterra competition system"
)]
#[command(after_help = CONFIG_HELP)]
struct Cli {
    /// Flat key = value file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Point {
    /// Diffusion ratio of V.
    d: f64,
    /// Growth rate of V.
    r: f64,
    /// Competition coefficient of V on U.
    k1: f64,
    /// Competition coefficient of U on V.
    k2: f64,
}

impl Point {
    fn params(&self) -> Result<CompetitionParams> {
        Ok(CompetitionParams::new(self.d, self.r, self.k1, self.k2)?)
    }
}

#[derive(Debug, Args)]
struct PdeFlags {
    /// Half-length of the domain [-L, L].
    #[arg(long = "L")]
    half_length: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

impl PdeFlags {
    fn config(&self, file: &FileConfig) -> Result<SimConfig> {
        Ok(SimConfig::new(
            layered(self.half_length, file, "L", DEFAULT_HALF_LENGTH)?,
            layered(self.dx, file, "dx", DEFAULT_DX)?,
            layered(self.dt, file, "dt", DEFAULT_DT)?,
            layered(self.t_end, file, "t_end", DEFAULT_T_END)?,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlaneArg {
    /// (d, k) with r = 1 and k1 = k2 = k.
    Sym,
    /// (k1, d/r) at fixed k2 and r.
    K1d,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every explicit criterion and combine them into a sign verdict.
    #[command(allow_negative_numbers = true)]
    Classify(Point),
    /// Measure the front speed by direct simulation.
    #[command(allow_negative_numbers = true)]
    Speed {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        pde: PdeFlags,
    },
    /// Build a supersolution and check its defining inequalities on a grid.
    #[command(allow_negative_numbers = true)]
    Certify {
        #[command(flatten)]
        point: Point,
        /// Exponent of the sigmoid profile (needs --a).
        #[arg(long, requires = "a", conflicts_with = "degenerate")]
        p: Option<f64>,
        /// Scale of the V component (needs --p).
        #[arg(long, requires = "p")]
        a: Option<f64>,
        /// Use the small-diffusion piecewise construction.
        #[arg(long)]
        degenerate: bool,
        /// Offset of the piecewise construction (default: its largest admissible value).
        #[arg(long, requires = "degenerate")]
        delta: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Classify a grid of parameters and write CSV and SVG region maps.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    plane: Option<PlaneArg>,
    /// Horizontal range lo:hi.
    #[arg(long)]
    xrange: Option<Range>,
    /// Vertical range lo:hi.
    #[arg(long)]
    yrange: Option<Range>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Logarithmic spacing on both axes.
    #[arg(long)]
    log: bool,
    /// Also simulate every tenth node in each direction.
    #[arg(long)]
    with_pde: bool,
    /// Fixed k2 of the k1d plane.
    #[arg(long)]
    k2: Option<f64>,
    /// Fixed r of the k1d plane.
    #[arg(long)]
    r: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    pde: PdeFlags,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidParameter { .. }
                | Error::StrongCompetitionViolated { .. }
                | Error::InvalidLv1 { .. }
                | Error::InadmissibleDelta { .. }
                | Error::Config(_)
                | Error::Scan(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Classify(point) => cmd_classify(&point.params()?),
        Command::Speed { point, pde } => {
            let cfg = pde.config(&file)?;
            cmd_speed(&point.params()?, &cfg)
        }
        Command::Certify {
            point,
            p,
            a,
            degenerate,
            delta,
            tol,
        } => {
            let params = point.params()?;
            let tol = layered(tol, &file, "tol", DEFAULT_TOL)?;
            if degenerate {
                let delta = delta.or(file.get("delta")?);
                cmd_certify_degenerate(&params, delta, tol)
            } else {
                let pa = match (p, a) {
                    (Some(p), Some(a)) => Some((p, a)),
                    _ => file.get::<f64>("p")?.zip(file.get::<f64>("a")?),
                };
                cmd_certify(&params, pa, tol)
            }
        }
        Command::Scan(args) => cmd_scan(&args, &file),
    }
}

fn labels(verdict: &SignVerdict) -> String {
    if verdict.fired.is_empty() {
        return "none".into();
    }
    verdict
        .fired
        .iter()
        .map(|f| {
            if f.reflected {
                format!("{} (reflected)", f.criterion.label())
            } else {
                f.criterion.label().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_params(params: &CompetitionParams) {
    println!(
        "params: d = {}, r = {}, k1 = {}, k2 = {}",
        g12(params.d()),
        g12(params.r()),
        g12(params.k1()),
        g12(params.k2())
    );
}

fn cmd_classify(params: &CompetitionParams) -> Result<u8> {
    let verdict = classify(params)?;
    print_params(params);
    println!("verdict: {}", verdict.sign.as_str());
    println!("fired: {}", labels(&verdict));
    let b = kstar_bounds(params.d(), params.r(), params.k2())?;
    println!(
        "kstar: {} < k* < {} (k2 = {}, d/r = {})",
        g12(b.k_lower),
        g12(b.k_upper),
        g12(params.k2()),
        g12(params.ratio())
    );
    Ok(match verdict.sign {
        Sign::Negative => 0,
        Sign::Positive => 1,
        Sign::Inconclusive => 2,
    })
}

fn cmd_speed(params: &CompetitionParams, cfg: &SimConfig) -> Result<u8> {
    let est = estimate_speed(params, cfg)?;
    let verdict = classify(params)?;
    print_params(params);
    println!(
        "grid: L = {}, dx = {}, dt = {}, t_end = {}",
        g12(cfg.grid.half_length()),
        g12(cfg.grid.dx()),
        g12(cfg.dt),
        g12(cfg.t_end)
    );
    println!("c_hat: {} +/- {}", g12(est.c_hat), g12(est.stderr));
    println!("converged: {}", est.converged);
    println!("theory: {} [{}]", verdict.sign.as_str(), labels(&verdict));
    let numeric = if est.c_hat < 0.0 {
        Sign::Negative
    } else {
        Sign::Positive
    };
    if est.converged && verdict.sign != Sign::Inconclusive && verdict.sign != numeric {
        println!("DISAGREEMENT: simulation gives {} speed", numeric.as_str());
    }
    Ok(if est.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn print_report(report: &ResidualReport) {
    println!(
        "max I: {} at x = {}",
        g12(report.max_i),
        g12(report.max_i_at)
    );
    println!(
        "max J: {} at x = {}",
        g12(report.max_j),
        g12(report.max_j_at)
    );
    if let Some(j) = report.jump_phi {
        println!("jump phi': {}", g12(j));
    }
    if let Some(j) = report.jump_psi {
        println!("jump psi': {}", g12(j));
    }
    println!("tol: {}", g12(report.tol));
    println!("certified: {}", report.certified);
}

fn cmd_certify(params: &CompetitionParams, pa: Option<(f64, f64)>, tol: f64) -> Result<u8> {
    print_params(params);
    let cand = match pa {
        Some((p, a)) => SupersolCandidate::new(p, a)?,
        None => match choose_p_a(params) {
            Some(c) => c,
            None => {
                println!("candidate: none");
                let q = params.reflect();
                if let Some(c) = choose_p_a(&q) {
                    println!(
                        "hint: the reflected tuple d = {}, r = {}, k1 = {}, k2 = {} admits p = {}, a = {}",
                        g12(q.d()),
                        g12(q.r()),
                        g12(q.k1()),
                        g12(q.k2()),
                        g12(c.p()),
                        g12(c.a())
                    );
                }
                return Ok(EXIT_NO_CANDIDATE);
            }
        },
    };
    let cert = certify_candidate(&cand, params, tol)?;
    println!("candidate: p = {}, a = {}", g12(cand.p()), g12(cand.a()));
    let c = &cert.conditions;
    println!(
        "conditions: a = {}, b = {}, c = {}, d = {}",
        c.a, c.b, c.c, c.d
    );
    print_report(&cert.report);
    Ok(if cert.report.certified { 0 } else { 1 })
}

fn cmd_certify_degenerate(params: &CompetitionParams, delta: Option<f64>, tol: f64) -> Result<u8> {
    print_params(params);
    let ds = match degenerate_build(params, delta) {
        Ok(ds) => ds,
        Err(Error::DegeneratePrecondition(why)) => {
            println!("candidate: none (requires {why})");
            return Ok(EXIT_NO_CANDIDATE);
        }
        Err(e) => return Err(e.into()),
    };
    println!(
        "candidate: delta = {}, gamma = {}, beta = {}",
        g12(ds.delta),
        g12(ds.gamma),
        g12(ds.beta)
    );
    println!("H*: {}", g12(h_star(params, ds.delta)?));
    let report = degenerate_residuals(&ds, params, tol)?;
    print_report(&report);
    Ok(if report.certified { 0 } else { 1 })
}

fn scan_spec(args: &ScanArgs, file: &FileConfig) -> Result<(ScanSpec, &'static str)> {
    let plane = match args.plane {
        Some(p) => p,
        None => match file.get::<String>("plane")?.as_deref() {
            None | Some("sym") => PlaneArg::Sym,
            Some("k1d") => PlaneArg::K1d,
            Some(other) => return Err(Usage(format!("unknown plane {other:?}")).into()),
        },
    };
    let (mut spec, name) = match plane {
        PlaneArg::Sym => (ScanSpec::symmetric_default(), "sym"),
        PlaneArg::K1d => {
            let k2 = layered(args.k2, file, "k2", 2.0)?;
            let r = layered(args.r, file, "r", 1.0)?;
            (ScanSpec::k1_ratio_default(k2, r), "k1d")
        }
    };
    if let Some(Range(lo, hi)) = args.xrange.or(file.get("xrange")?) {
        spec.x_range = (lo, hi);
    }
    if let Some(Range(lo, hi)) = args.yrange.or(file.get("yrange")?) {
        spec.y_range = (lo, hi);
    }
    spec.nx = layered(args.nx, file, "nx", spec.nx)?;
    spec.ny = layered(args.ny, file, "ny", spec.ny)?;
    if args.log || file.get::<bool>("log")?.unwrap_or(false) {
        spec.x_scale = Scale::Log;
        spec.y_scale = Scale::Log;
    }
    spec.with_pde = args.with_pde || file.get::<bool>("with_pde")?.unwrap_or(false);
    spec.pde_config = args.pde.config(file)?;
    spec.validate()?;
    Ok((spec, name))
}

fn cmd_scan(args: &ScanArgs, file: &FileConfig) -> Result<u8> {
    let (spec, name) = scan_spec(args, file)?;
    let (samples, verticals) = match spec.plane {
        Plane::K1Ratio { k2, r } => {
            let fig = figure2_dataset(k2, r, &spec)?;
            (fig.samples, fig.verticals)
        }
        Plane::Symmetric => (scan_plane(&spec)?, Vec::new()),
    };
    let dir = output_dir(args.out.clone(), file);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("scan_{name}.csv"));
    let svg_path = dir.join(format!("scan_{name}.svg"));
    emit_csv(&samples, &csv_path)?;
    let style = SvgStyle {
        verticals,
        ..SvgStyle::for_spec(&spec)
    };
    emit_svg(&samples, &svg_path, &style)?;

    println!("nodes: {} x {}", spec.nx, spec.ny);
    print_counts(&samples);
    println!("csv: {}", csv_path.display());
    println!("svg: {}", svg_path.display());
    Ok(0)
}

fn print_counts(samples: &[RegionSample]) {
    for id in CriterionId::ALL {
        let n = samples.iter().filter(|s| s.fires(id)).count();
        println!("{:<15} {n}", id.label());
    }
    for sign in [Sign::Negative, Sign::Positive, Sign::Inconclusive] {
        let n = samples.iter().filter(|s| s.combined.sign == sign).count();
        println!("{:<15} {n}", sign.as_str());
    }
    let simulated: Vec<_> = samples
        .iter()
        .filter_map(|s| s.c_num.map(|c| (s, c)))
        .collect();
    if !simulated.is_empty() {
        let disagree = simulated
            .iter()
            .filter(|(s, c)| {
                c.converged
                    && match s.combined.sign {
                        Sign::Negative => c.c_hat >= 0.0,
                        Sign::Positive => c.c_hat <= 0.0,
                        Sign::Inconclusive => false,
                    }
            })
            .count();
        println!("{:<15} {}", "simulated", simulated.len());
        println!("{:<15} {disagree}", "disagreements");
    }
}
