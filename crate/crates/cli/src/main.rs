mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use gacpath::dynamics::DynamicsError;
use gacpath::gac::{ellipse_ipns, Conic, EllipseParams, GacError};
use gacpath::intersect::{
    decompose_lines, degenerate_pair, intersect_conics, intersect_conics_cra, is_axis_aligned_pair,
    IntersectError,
};
use gacpath::planner::{plan, verify_path, PathRequest, PlanError};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "gacpath",
    version,
    about = "Conic intersection and switching-path planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct OutputArgs {
    /// Directory for the output files (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the SVG figure.
    #[arg(long)]
    no_svg: bool,
    /// Leave the timestamp comment out of the SVG.
    #[arg(long)]
    deterministic_svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a switching path for the system in a config file.
    Plan {
        #[arg(long)]
        config: PathBuf,
        /// Incidence tolerance for switch points (overrides the config).
        #[arg(long, allow_hyphen_values = true)]
        tolerance: Option<f64>,
        /// Runge-Kutta step used for orbit fitting (overrides the config).
        #[arg(long, allow_hyphen_values = true)]
        dt: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Intersect two co-centred ellipses given as `a,b,u,v,theta`.
    Intersect {
        #[arg(long, value_parser = parse_ellipse, allow_hyphen_values = true)]
        first: EllipseParams,
        #[arg(long, value_parser = parse_ellipse, allow_hyphen_values = true)]
        second: EllipseParams,
        /// Write an SVG figure into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        deterministic_svg: bool,
    },
    /// Regenerate one of the worked examples.
    Demo {
        name: DemoName,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    Example2,
    Example3,
    Example4,
    #[value(name = "example5-corrected")]
    Example5Corrected,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

fn dynamics_failure(e: DynamicsError) -> Failure {
    let code = if matches!(e, DynamicsError::NotOscillatory { .. }) {
        2
    } else {
        1
    };
    Failure::new(code, e)
}

fn plan_failure(e: PlanError) -> Failure {
    match e {
        PlanError::Dynamics(d @ DynamicsError::NotOscillatory { .. }) => Failure::new(2, d),
        PlanError::InvalidRequest(_) => Failure::new(1, e),
        other => Failure::new(3, other),
    }
}

/// Number with an optional `pi` factor: `0.5`, `pi`, `pi/6`, `2*pi/3`, `-pi/4`.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s),
    };
    let (num, den) = match rest.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (rest, None),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c
            .strip_suffix('*')
            .unwrap_or(c)
            .parse::<f64>()
            .map_err(|_| format!("bad number `{s}`"))?,
        None => return Err(format!("bad number `{s}`")),
    };
    let den = match den {
        Some(d) => d.parse::<f64>().map_err(|_| format!("bad number `{s}`"))?,
        None => 1.0,
    };
    Ok(sign * coeff * std::f64::consts::PI / den)
}

fn parse_ellipse(s: &str) -> Result<EllipseParams, String> {
    let v = s
        .split(',')
        .map(parse_real)
        .collect::<Result<Vec<_>, _>>()?;
    let [a, b, u, v, t] = v[..] else {
        return Err(format!("expected a,b,u,v,theta, got {} values", v.len()));
    };
    Ok(EllipseParams::new(a, b, u, v, t))
}

/// Fixed-point text without a sign on values that round to zero.
fn fixed(v: f64, digits: usize) -> String {
    let s = format!("{v:.digits$}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn fmt_vector(c: &[f64; 6]) -> String {
    const NAMES: [&str; 6] = ["n̄₊", "n̄₋", "n̄ₓ", "e₁", "e₂", "n₊"];
    let terms: Vec<String> = c
        .iter()
        .zip(NAMES)
        .filter(|(v, _)| v.abs() > 1e-12)
        .map(|(v, n)| format!("{:+.12} {n}", v))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ")
    }
}

fn ellipse(p: &EllipseParams, which: &str) -> Result<Conic, Failure> {
    ellipse_ipns(p)
        .map_err(|e: GacError| Failure::new(1, anyhow!(e).context(format!("{which} ellipse"))))
}

fn cmd_intersect(
    p1: &EllipseParams,
    p2: &EllipseParams,
    out: Option<&Path>,
    deterministic: bool,
) -> Result<(), Failure> {
    let (e1, e2) = (ellipse(p1, "first")?, ellipse(p2, "second")?);
    let fail = |e: IntersectError| Failure::new(4, e);
    let d = degenerate_pair(&e1, &e2).map_err(fail)?;
    let lines = decompose_lines(&d).map_err(fail)?;
    println!("degenerate conic: {}", fmt_vector(&d.ipns().coefficients()));
    println!(
        "normalized:       {}",
        fmt_vector(&d.ipns().normalized().coefficients())
    );
    for (i, l) in [lines.l1, lines.l2].iter().enumerate() {
        let y = fixed(l.normal.y, 12);
        let y = if y.starts_with('-') {
            y
        } else {
            format!("+{y}")
        };
        println!(
            "line {}: {} x {y} y = {}",
            i + 1,
            fixed(l.normal.x, 12),
            fixed(l.d, 12)
        );
    }
    let (points, circle) = if is_axis_aligned_pair(&e1, &e2) {
        let route = intersect_conics_cra(&e1, &e2).map_err(fail)?;
        println!(
            "route: circle {}",
            fmt_vector(&route.circle.normalized().coefficients())
        );
        (route.points, Some(route.circle))
    } else {
        println!("route: line pair");
        (intersect_conics(&e1, &e2).map_err(fail)?, None)
    };
    for p in &points {
        println!("point: ({}, {})", fixed(p.x, 12), fixed(p.y, 12));
    }
    if let Some(dir) = out {
        let svg = output::intersection_svg(
            &[&e1, &e2],
            &[lines.l1, lines.l2],
            circle.as_ref(),
            &points,
            !deterministic,
        );
        output::write(dir, Path::new("intersection.svg"), &svg)?;
    }
    Ok(())
}

fn run_plan(cfg: &RunConfig, args: &OutputArgs) -> Result<(), Failure> {
    let sys = cfg.system().map_err(dynamics_failure)?;
    let req: PathRequest = cfg.request(sys.clone());
    let path = plan(&req).map_err(plan_failure)?;
    let report = verify_path(&path, &sys, &req.tolerances);

    let dir = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let o = &cfg.output;
    output::write(&dir, &o.switch_points, &output::switch_points_csv(&path)?)?;
    output::write(&dir, &o.segments, &output::segments_json(&path, &report)?)?;
    if !args.no_svg {
        let svg = output::path_svg(&path, &sys, !args.deterministic_svg);
        output::write(&dir, &o.svg, &svg)?;
    }

    println!("switches: {}", path.switch_count());
    for sp in &path.switches {
        println!(
            "  {:<12} ({}, {})  family {} -> {}  after {:.6}",
            sp.kind.to_string(),
            fixed(sp.point.x, 6),
            fixed(sp.point.y, 6),
            sp.from_family,
            sp.to_family,
            sp.arc_duration_before
        );
    }
    println!("total duration: {:.6}", path.total_duration());
    print!("{report}");
    println!("artifacts: {}", dir.display());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(3, anyhow!("planned path failed verification")))
    }
}

fn cmd_plan(
    config: &Path,
    tolerance: Option<f64>,
    dt: Option<f64>,
    args: &OutputArgs,
) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(t) = tolerance {
        cfg.tolerances.incidence = t;
    }
    if let Some(dt) = dt {
        cfg.integration.dt = dt;
    }
    // re-validate with the overrides applied
    let cfg = RunConfig::parse(&cfg.to_toml()?).context("command-line overrides")?;
    run_plan(&cfg, args)
}

fn demo_config(a2: [f64; 4], target: [f64; 2]) -> RunConfig {
    RunConfig {
        system: config::SystemSection {
            a1: [0.0, 1.0, -2.0, 0.0],
            a2,
            start: [2.0, 5.0],
            target,
        },
        tolerances: Default::default(),
        integration: Default::default(),
        planner: Default::default(),
        output: Default::default(),
    }
}

fn cmd_demo(name: DemoName, args: &OutputArgs) -> Result<(), Failure> {
    let dir = |d: &str| {
        args.out
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(d))
    };
    let svg_dir = |d: &str| (!args.no_svg).then(|| dir(d));
    match name {
        DemoName::Example2 => cmd_intersect(
            &EllipseParams::centred(2.0, 4.0, 0.0),
            &EllipseParams::centred(4.0, 2.0, std::f64::consts::FRAC_PI_6),
            svg_dir("example2").as_deref(),
            args.deterministic_svg,
        ),
        DemoName::Example3 => cmd_intersect(
            &EllipseParams::centred(4.0, 2.0, 0.0),
            &EllipseParams::centred(2.0, 4.0, 0.0),
            svg_dir("example3").as_deref(),
            args.deterministic_svg,
        ),
        DemoName::Example4 => {
            let mut cfg = demo_config([0.0, 1.0, -0.5, 0.0], [12.0, 22.0]);
            cfg.output.dir = dir("example4");
            run_plan(
                &cfg,
                &OutputArgs {
                    out: None,
                    ..args.clone()
                },
            )
        }
        DemoName::Example5Corrected => {
            let mut cfg = demo_config([1.0, 1.0, -2.0, -1.0], [30.0, 22.0]);
            cfg.output.dir = dir("example5-corrected");
            run_plan(
                &cfg,
                &OutputArgs {
                    out: None,
                    ..args.clone()
                },
            )
        }
    }
}

fn main() -> ExitCode {
    // exit code 2 is reserved for non-oscillatory systems, so usage errors
    // report 1 instead of clap's default
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Plan {
            config,
            tolerance,
            dt,
            output,
        } => cmd_plan(config, *tolerance, *dt, output),
        Command::Intersect {
            first,
            second,
            out,
            deterministic_svg,
        } => cmd_intersect(first, second, out.as_deref(), *deterministic_svg),
        Command::Demo { name, output } => cmd_demo(*name, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
