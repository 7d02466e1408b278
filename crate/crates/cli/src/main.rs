//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on a numerical failure (a line
//! `iso3bp: <reason>: <message>` goes to stderr), 2 on usage or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use iso3bp::bifurcation::find_bifurcation;
use iso3bp::boundary::{newton_correct, BranchKind, CorrectorOptions, CurvePoint};
use iso3bp::continuation::{tangent_field, trace_branch, Branch, StopPolicy, ToleranceConfig};
use iso3bp::dynamics::{ExtendedState, Parameters, ReducedState};
use iso3bp::integrator::{integrate_to, IntegratorConfig};
use iso3bp::io::svg::{branch_plot, fr_plot, xy_plot, BranchView};
use iso3bp::io::{branch_file, fixtures, trajectory};
use iso3bp::periodic::{full_trajectory, locate_rational_theta, reduced_samples, verify_tables, RowLimits, Trajectory3D};

#[derive(Parser, Debug)]
#[command(name = "iso3bp", version, about = "Reduced-periodic orbits of a symmetric three-body family")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Absolute integration tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_abs: f64,
    /// Relative integration tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_rel: f64,
    #[arg(long, global = true, default_value_t = 20)]
    taylor_order: usize,
    /// Residual bound for pillar points.
    #[arg(long, global = true, default_value_t = 1e-6)]
    eps1: f64,
    /// Residual bound for predicted points.
    #[arg(long, global = true, default_value_t = 5e-5)]
    eps2: f64,
    /// Largest corrector displacement.
    #[arg(long, global = true, default_value_t = 5e-5)]
    eps3: f64,
    /// Predictor step length.
    #[arg(long, global = true, default_value_t = 1e-3)]
    h: f64,
    /// Predictor steps per segment.
    #[arg(long, global = true, default_value_t = 200)]
    k: usize,
    /// +1 starts toward increasing b, -1 toward decreasing b.
    #[arg(long, global = true, default_value_t = 1, allow_hyphen_values = true)]
    orientation: i8,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Branch,
    Svg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    OddEven,
    Odd,
}

impl From<Kind> for BranchKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::OddEven => BranchKind::OddEven,
            Kind::Odd => BranchKind::Odd,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Seed {
    #[arg(long, value_enum, default_value = "odd-even")]
    kind: Kind,
    /// Boundary time: a quarter period for odd/even points, half for odd.
    #[arg(long)]
    t: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Plot {
    /// F and R against t.
    Fr,
    /// x-y projection of the three bodies.
    Xy,
    /// Branch in the (a, b) plane.
    Ab,
    /// Branch in an oblique (T, a, b) view.
    Axonometric,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Correct a seed onto its solution curve.
    RefineSeed {
        #[command(flatten)]
        seed: Seed,
        /// Residual target.
        #[arg(long, default_value_t = 1e-11)]
        eps: f64,
    },
    /// Trace a solution curve from a seed and write a branch file.
    TraceBranch {
        #[command(flatten)]
        seed: Seed,
        #[arg(long)]
        max_pillars: Option<usize>,
        /// Stop once min R along a solution drops below this.
        #[arg(long)]
        collision_guard: Option<f64>,
    },
    /// Locate the crossing of the odd/even curve with the odd curve.
    FindBifurcation {
        /// Branch file; a second file traced from the same seed in the
        /// other orientation is joined to the first.
        #[arg(required = true, num_args = 1..=2)]
        branches: Vec<PathBuf>,
    },
    /// Find a point where Θ(T) = p π / q.
    LocatePeriodic {
        #[arg(required = true, num_args = 1..=2)]
        branches: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: i64,
        /// Also write the orbit over one period as CSV (or SVG with
        /// --format svg) to --out.
        #[arg(long)]
        trajectory: bool,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Integrate from (0, 10, b, 0, 0) and write samples.
    Integrate {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Include the ten sensitivity columns.
        #[arg(long)]
        extended: bool,
        /// Plot for --format svg.
        #[arg(long, value_enum, default_value = "fr")]
        plot: Plot,
    },
    /// Re-solve every published table row and check period, angle,
    /// closure and symmetry.
    VerifyTables {
        /// Only these row indices (0-based).
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
    },
    /// Render a branch file or trajectory CSV as SVG.
    Render {
        input: PathBuf,
        #[arg(long, value_enum)]
        plot: Plot,
        /// Named points to mark on branch plots.
        #[arg(long)]
        markers: bool,
    },
}

fn integrator(c: &Common) -> IntegratorConfig {
    IntegratorConfig {
        abs_tol: c.tol_abs,
        rel_tol: c.tol_rel,
        taylor_order: c.taylor_order,
        ..IntegratorConfig::default()
    }
}

fn tolerances(c: &Common) -> ToleranceConfig {
    ToleranceConfig {
        eps1: c.eps1,
        eps2: c.eps2,
        eps3: c.eps3,
        h: c.h,
        k: c.k,
        orientation: c.orientation,
        ..ToleranceConfig::default()
    }
}

/// Writes to `--out` or stdout.
fn emit(common: &Common, text: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_branches(paths: &[PathBuf]) -> anyhow::Result<Branch> {
    let first = branch_file::parse(&read(&paths[0])?)?;
    Ok(match paths.get(1) {
        Some(p) => first.joined_with(&branch_file::parse(&read(p)?)?),
        None => first,
    })
}

fn fmt3(c: [f64; 3]) -> String {
    format!("({:.16}, {:.16}, {:.16})", c[0], c[1], c[2])
}

fn refine(seed: &Seed, eps: f64, cfg: &IntegratorConfig) -> iso3bp::Result<(CurvePoint, usize)> {
    let kind: BranchKind = seed.kind.into();
    let guess = [seed.t, seed.a, seed.b];
    // a seed whose own solution cannot be integrated never reaches the curve
    let direction = tangent_field(guess, kind, cfg).map_err(|e| match e {
        iso3bp::Error::InvalidInput(_) => e,
        other => iso3bp::Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
            cause: Some(other.to_string()),
        },
    })?;
    let c = newton_correct(
        guess,
        kind,
        direction,
        &CorrectorOptions::with_eps(eps),
        cfg,
    )?;
    Ok((c.point, c.iterations))
}

fn trajectory_of(states: &[ReducedState]) -> Trajectory3D {
    Trajectory3D {
        samples: states.iter().map(|s| (s.t, iso3bp::dynamics::embed_positions(s))).collect(),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let common = &cli.common;
    let cfg = integrator(common);
    cfg.validate()?;
    match cli.command {
        Command::RefineSeed { seed, eps } => {
            let (pt, iterations) = refine(&seed, eps, &cfg)?;
            println!("kind       {}", pt.kind);
            println!("point      {}", fmt3(pt.coords()));
            println!("period     {:.16}", pt.period());
            println!("residual   {:e}", pt.residual_norm());
            println!("iterations {iterations}");
        }
        Command::TraceBranch {
            seed,
            max_pillars,
            collision_guard,
        } => {
            let tol = tolerances(common);
            tol.validate()?;
            let (start, _) = refine(&seed, (tol.eps1 * 1e-3).min(1e-11), &cfg)?;
            let defaults = StopPolicy::default();
            let stop = StopPolicy {
                max_pillars: max_pillars.unwrap_or(defaults.max_pillars),
                collision_guard: collision_guard.unwrap_or(defaults.collision_guard),
                ..defaults
            };
            let branch = trace_branch(&start, seed.kind.into(), &tol, &stop, &cfg)?;
            let text = branch_file::serialize(&branch);
            match &common.out {
                Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            let end = branch.points.last().expect("a branch holds its seed");
            eprintln!("points      {}", branch.points.len());
            eprintln!("pillars     {}", branch.pillar_count());
            eprintln!("termination {}", branch.termination.keyword());
            eprintln!("endpoint    {} period {:.10}", fmt3(end.coords()), end.period());
        }
        Command::FindBifurcation { branches } => {
            let branch = load_branches(&branches)?;
            let rep = find_bifurcation(&branch, &cfg)?;
            println!("B          {}", fmt3(rep.period_coords));
            println!("tau        {:.16}", rep.point.tau);
            println!("z_norm     {:e}", rep.z_norm);
            println!("coarse_min {:e}", rep.coarse_min);
            println!("odd_resid  {:e}", rep.odd_residual[0].abs().max(rep.odd_residual[1].abs()));
        }
        Command::LocatePeriodic {
            branches,
            p,
            q,
            trajectory,
            samples,
        } => {
            let branch = load_branches(&branches)?;
            let rec = locate_rational_theta(&branch, p, q, &cfg)?;
            println!("kind       {}", rec.kind);
            println!("point      {}", fmt3(rec.coords()));
            println!("theta      {:.16} ({p}π/{q})", rec.theta);
            println!("closure    {:e}", rec.closure_error);
            if trajectory {
                let text = match common.format {
                    Some(Format::Svg) => xy_plot(
                        &full_trajectory(&rec, 1, samples, &cfg)?,
                        &format!("Θ(T) = {p}π/{q}"),
                    ),
                    Some(Format::Branch) => bail!("trajectories are written as csv or svg"),
                    _ => trajectory::reduced_csv(&reduced_samples(rec.params(), rec.period, samples + 1, &cfg)?),
                };
                if common.out.is_none() {
                    bail!("--trajectory needs --out");
                }
                emit(common, &text)?;
            }
        }
        Command::Integrate {
            a,
            b,
            t_end,
            samples,
            extended,
            plot,
        } => {
            if samples < 2 {
                bail!("--samples must be at least 2");
            }
            let p = Parameters::new(a, b);
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Csv if extended => {
                    let (_, dense) = integrate_to(&ExtendedState::initial(p), p, t_end, &cfg, true)?;
                    let dense = dense.expect("dense output requested");
                    let states: Vec<ExtendedState> = (0..samples)
                        .map(|i| {
                            let t = t_end * i as f64 / (samples - 1) as f64;
                            dense.evaluate(t).expect("inside the dense span")
                        })
                        .collect();
                    trajectory::extended_csv(&states)
                }
                Format::Csv => trajectory::reduced_csv(&reduced_samples(p, t_end, samples, &cfg)?),
                Format::Svg => {
                    let states = reduced_samples(p, t_end, samples, &cfg)?;
                    let title = format!("a = {a}, b = {b}");
                    match plot {
                        Plot::Fr => fr_plot(&states, &title),
                        Plot::Xy => xy_plot(&trajectory_of(&states), &title),
                        _ => bail!("integrate plots F/R curves or the x-y projection"),
                    }
                }
                Format::Branch => bail!("integrate writes csv or svg"),
            };
            emit(common, &text)?;
        }
        Command::VerifyTables { rows } => {
            let limits = RowLimits::default();
            let reports: Vec<_> = verify_tables(&limits, &cfg)
                .into_iter()
                .filter(|r| rows.is_empty() || rows.contains(&r.index))
                .collect();
            let mut failing = Vec::new();
            for r in &reports {
                let status = match (r.passed, r.row.advisory) {
                    (true, _) => "pass",
                    (false, true) => "advisory",
                    (false, false) => {
                        failing.push(r.index);
                        "FAIL"
                    }
                };
                let sym = r.symmetry.map(|s| (s.origin_defect, s.quarter_defect)).unwrap_or((f64::NAN, f64::NAN));
                println!(
                    "{:>2} {:<16} {:<8} target {}π/{} dT {:.1e} dΘ {:.1e} closure {:.1e} sym {:.1e}/{:.1e}{}",
                    r.index,
                    r.row.label(),
                    status,
                    r.angle.0,
                    r.angle.1,
                    r.period_error,
                    r.theta_error,
                    r.closure_error,
                    sym.0,
                    sym.1,
                    r.failure.as_ref().map(|f| format!(" ({f})")).unwrap_or_default()
                );
            }
            let passed = reports.iter().filter(|r| r.passed).count();
            println!("{passed}/{} rows pass", reports.len());
            if !failing.is_empty() {
                eprintln!("iso3bp: table-mismatch: failing rows {failing:?}");
                return Err(NumericalExit.into());
            }
        }
        Command::Render { input, plot, markers } => {
            let text = read(&input)?;
            let svg = if text.starts_with(branch_file::MAGIC) {
                let branch = branch_file::parse(&text)?;
                let named: Vec<(&str, [f64; 3])> = if markers {
                    fixtures::NAMED_POINTS.iter().map(|n| (n.name, n.values())).collect()
                } else {
                    Vec::new()
                };
                let view = match plot {
                    Plot::Ab => BranchView::Ab,
                    Plot::Axonometric => BranchView::Axonometric,
                    _ => bail!("branch files render as --plot ab or --plot axonometric"),
                };
                branch_plot(&[&branch], &named, view, &format!("{} branch", branch.kind))
            } else {
                let states = trajectory::parse_reduced_csv(&text)?;
                let title = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                match plot {
                    Plot::Fr => fr_plot(&states, &title),
                    Plot::Xy => xy_plot(&trajectory_of(&states), &title),
                    _ => bail!("trajectory files render as --plot fr or --plot xy"),
                }
            };
            emit(common, &svg)?;
        }
    }
    Ok(())
}

/// Marker for a numerical failure already reported on stderr.
#[derive(Debug)]
struct NumericalExit;

impl std::fmt::Display for NumericalExit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("numerical failure")
    }
}

impl std::error::Error for NumericalExit {}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ISO3BP_THREADS") {
        let n: usize = v.parse().with_context(|| format!("ISO3BP_THREADS='{v}' is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("iso3bp: usage: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<NumericalExit>() => ExitCode::from(1),
        Err(e) => match e.downcast_ref::<iso3bp::Error>() {
            Some(err @ (iso3bp::Error::Parse { .. } | iso3bp::Error::InvalidInput(_))) => {
                eprintln!("iso3bp: {}: {err}", err.kind());
                ExitCode::from(2)
            }
            Some(err) => {
                eprintln!("iso3bp: {}: {err}", err.kind());
                ExitCode::from(1)
            }
            None => {
                eprintln!("iso3bp: usage: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
