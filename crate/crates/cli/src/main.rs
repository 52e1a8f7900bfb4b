//! `coulomb-eq`: equilibria of point charges on constrained planar spaces.

mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use coulomb_eq::bifurcation::{
    detect_threshold, fit_branch_exponent, polygon_bifurcation_set, torus_bifurcation_set, trace_pitchfork,
    ChargePath,
};
use coulomb_eq::inverse::{
    stabilizing_charges_aligned, stabilizing_charges_torus, stabilizing_charges_triangle, InverseResult,
};
use coulomb_eq::morse::{euler_count_check, EulerCheck};
use coulomb_eq::solver::find_critical_points;
use coulomb_eq::suite::{run_suite, SuiteKind};
use coulomb_eq::{ChargeVector, PolygonConfig, PotentialSpec, SolveSettings, Space, TorusConfig};

use manifest::{sidecar_path, write_json, RunManifest};

#[derive(Parser)]
#[command(name = "coulomb-eq", version, about = "Equilibria of point charges on constrained planar spaces")]
struct Cli {
    /// Worker threads (default: one per logical core)
    #[arg(long, global = true, env = "COULOMB_EQ_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find and classify all critical points of the energy
    Solve(SolveArgs),
    /// Trace a pitchfork along a charge path and export bifurcation curves
    Bifurcate(BifurcateArgs),
    /// Recover charges that make a configuration critical
    Inverse(InverseArgs),
    /// Run the verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// `polygon:<n>` or `torus:<r1>,<r2>,<r3>`
    #[arg(long)]
    space: Space,
    /// Comma-separated charges, one per point
    #[arg(long)]
    charges: ChargeVector,
    /// `coulomb`, `power:<k>` or `log`
    #[arg(long, default_value = "coulomb")]
    potential: PotentialSpec,
    #[command(flatten)]
    settings: SettingsArgs,
    /// Write the JSON here (with a sidecar manifest) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SettingsArgs {
    /// Grid seeds per chart dimension
    #[arg(long, default_value_t = SolveSettings::default().grid_density)]
    grid_density: usize,
    /// Gradient-norm tolerance for accepting a root
    #[arg(long, default_value_t = SolveSettings::default().newton_tol)]
    newton_tol: f64,
    /// Newton iterations per seed
    #[arg(long, default_value_t = SolveSettings::default().max_iters)]
    max_iters: usize,
    /// Chart distance below which two roots are merged
    #[arg(long, default_value_t = SolveSettings::default().dedup_tol)]
    dedup_tol: f64,
    /// Seed cap; larger grids are replaced by a Halton sample of this size
    #[arg(long, default_value_t = SolveSettings::default().max_seeds)]
    max_seeds: usize,
    /// Seed only from the chart grid, not from closed-form solutions
    #[arg(long)]
    no_closed_form_seeds: bool,
}

impl SettingsArgs {
    fn to_settings(&self) -> SolveSettings {
        SolveSettings {
            grid_density: self.grid_density,
            newton_tol: self.newton_tol,
            max_iters: self.max_iters,
            dedup_tol: self.dedup_tol,
            max_seeds: self.max_seeds,
            closed_form_seeds: !self.no_closed_form_seeds,
            ..SolveSettings::default()
        }
    }
}

#[derive(Args)]
struct BifurcateArgs {
    /// `polygon:3` or `torus:<r1>,<r2>,<r3>`
    #[arg(long)]
    space: Space,
    /// `q<i>:<start>:<end>@<q1>,<q2>,<q3>` with `_` at the varied position
    #[arg(long)]
    path: ChargePath,
    /// Samples along the path
    #[arg(long, default_value_t = 40)]
    steps: usize,
    /// Samples per bifurcation curve
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Width of the parameter window for the exponent fit
    #[arg(long, default_value_t = 0.05)]
    fit_window: f64,
    /// Directory for branches.csv, curves.csv and manifest.json
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "geometry")]
struct InverseGeometry {
    /// Triangle sides `|p2p3|,|p3p1|,|p1p2|`
    #[arg(long, value_delimiter = ',')]
    sides: Option<Vec<f64>>,
    /// Aligned triangle p1-p2-p3 given by `|p1p2|,|p2p3|` (summing to 1/2)
    #[arg(long, value_delimiter = ',')]
    aligned: Option<Vec<f64>>,
    /// JSON file: `{"points": [[x, y], ...]}` or `{"radii": [...], "angles": [a1, a2]}`
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args)]
struct InverseArgs {
    #[command(flatten)]
    geometry: InverseGeometry,
    /// Pair potential (torus input only; polygon relations are Coulomb)
    #[arg(long, default_value = "coulomb")]
    potential: PotentialSpec,
}

#[derive(Args)]
struct VerifyArgs {
    /// `quick` (the numbered criteria) or `full` (adds the dense scans)
    #[arg(long, default_value = "quick")]
    suite: SuiteKind,
    /// Write the report here (with a sidecar manifest) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsFile {
    points: Option<Vec<[f64; 2]>>,
    radii: Option<[f64; 3]>,
    angles: Option<[f64; 2]>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<coulomb_eq::Error>().is_some() || e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

/// Bad user input that the core library does not see (exit code 2).
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(InputError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bifurcate(a) => bifurcate(a),
        Command::Inverse(a) => inverse(a),
        Command::Verify(a) => verify(a),
    }
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>, manifest: &RunManifest, started: Instant) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            write_json(path, value)?;
            write_json(&sidecar_path(path), &manifest.with_wall_time(started.elapsed().as_secs_f64()))?;
        }
        None => print_json(value)?,
    }
    Ok(())
}

/// Pretty JSON on stdout; a closed pipe downstream is not an error.
fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let res = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(out))
        .and_then(|_| out.flush());
    match res {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn solve(a: SolveArgs) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let settings = a.settings.to_settings();
    if let Space::Polygon { n } = a.space {
        if n >= 4 {
            eprintln!(
                "note: for n = {n} the multistart search samples the chart and may miss critical points; \
                 no Euler check is available"
            );
        }
    }
    if a.charges.is_mixed_sign() {
        eprintln!("note: mixed-sign charges are outside the tested range");
    }
    let points = find_critical_points(&a.space, &a.charges, &a.potential, &settings)?;
    let summary = euler_count_check(&points, &a.space);
    let manifest = RunManifest::new(
        "solve",
        json!({
            "space": a.space.to_string(),
            "charges": a.charges.values(),
            "potential": a.potential.to_string(),
            "settings": settings,
        }),
    );
    let value = json!({
        "space": a.space.to_string(),
        "charges": a.charges.values(),
        "potential": a.potential.to_string(),
        "points": points.iter().map(report::point_record).collect::<Vec<_>>(),
        "summary": summary,
        "manifest": manifest,
    });
    emit(&value, a.out.as_ref(), &manifest, started)?;
    eprintln!(
        "{} min / {} saddle / {} max / {} degenerate, euler {}",
        summary.minima,
        summary.saddles,
        summary.maxima,
        summary.degenerate,
        report::euler_label(&summary.euler_check)
    );
    Ok(if summary.euler_check == EulerCheck::Failed { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn bifurcate(a: BifurcateArgs) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let curves = match &a.space {
        Space::Polygon { .. } => polygon_bifurcation_set(a.resolution)?,
        Space::Torus { radii } => torus_bifurcation_set(*radii, a.resolution)?,
    };
    let diagram = trace_pitchfork(&a.space, &a.path, a.steps)?;
    let threshold = detect_threshold(&a.space, &a.path)?;
    let fit = fit_branch_exponent(&a.space, &a.path, a.fit_window, 10)?;

    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let branches_path = a.out_dir.join("branches.csv");
    let curves_path = a.out_dir.join("curves.csv");
    std::fs::write(&branches_path, report::branches_csv(&diagram))
        .with_context(|| format!("writing {}", branches_path.display()))?;
    std::fs::write(&curves_path, report::curves_csv(&curves))
        .with_context(|| format!("writing {}", curves_path.display()))?;

    let manifest = RunManifest::new(
        "bifurcate",
        json!({
            "space": a.space.to_string(),
            "path": a.path.to_string(),
            "steps": a.steps,
            "resolution": a.resolution,
            "fit_window": a.fit_window,
        }),
    );
    write_json(&a.out_dir.join("manifest.json"), &manifest.with_wall_time(started.elapsed().as_secs_f64()))?;

    let value = json!({
        "space": a.space.to_string(),
        "path": a.path.to_string(),
        "tracked": diagram.tracked.to_string(),
        "threshold": threshold,
        "exponent": fit.exponent,
        "prefactor": fit.prefactor,
        "curves": curves.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "files": ["branches.csv", "curves.csv", "manifest.json"],
        "manifest": manifest,
    });
    print_json(&value)?;
    eprintln!("threshold {threshold}, fitted exponent {:.4}", fit.exponent);
    Ok(ExitCode::SUCCESS)
}

fn inverse(a: InverseArgs) -> anyhow::Result<ExitCode> {
    let g = &a.geometry;
    let (input, result): (serde_json::Value, InverseResult) = if let Some(s) = &g.sides {
        if s.len() != 3 {
            bail!(InputError(format!("--sides takes three lengths, got {}", s.len())));
        }
        (json!({ "sides": s }), stabilizing_charges_triangle(s[0], s[1], s[2])?)
    } else if let Some(d) = &g.aligned {
        if d.len() != 2 {
            bail!(InputError(format!("--aligned takes two lengths, got {}", d.len())));
        }
        (json!({ "aligned": d }), stabilizing_charges_aligned(d[0], d[1])?)
    } else if let Some(path) = &g.points {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: PointsFile =
            serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        inverse_from_file(file, &a.potential)?
    } else {
        bail!(InputError("one of --sides, --aligned or --points is required".into()));
    };
    let manifest = RunManifest::new("inverse", json!({ "input": input, "potential": a.potential.to_string() }));
    let value = json!({
        "kind": result.kind,
        "charges": result.charges,
        "family": result.family,
        "note": result.note,
        "manifest": manifest,
    });
    print_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn inverse_from_file(file: PointsFile, potential: &PotentialSpec) -> anyhow::Result<(serde_json::Value, InverseResult)> {
    match file {
        PointsFile { points: Some(p), radii: None, angles: None } => {
            if p.len() != 3 {
                bail!(InputError(format!("inverse problem needs three points, got {}", p.len())));
            }
            let pts: Vec<coulomb_eq::Point> = p.iter().map(|v| coulomb_eq::Point::new(v[0], v[1])).collect();
            let poly = PolygonConfig::from_points(pts)?;
            let q = poly.points();
            let l = [(q[1] - q[2]).norm(), (q[2] - q[0]).norm(), (q[0] - q[1]).norm()];
            Ok((json!({ "points": p }), stabilizing_charges_triangle(l[0], l[1], l[2])?))
        }
        PointsFile { points: None, radii: Some(r), angles: Some(ang) } => {
            let t = TorusConfig::new(r, ang)?;
            Ok((json!({ "radii": r, "angles": ang }), stabilizing_charges_torus(&t, potential)?))
        }
        _ => bail!(InputError("points file needs either `points` or both `radii` and `angles`".into())),
    }
}

fn verify(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let report = run_suite(a.suite);
    let manifest = RunManifest::new("verify", json!({ "suite": a.suite }));
    let value = json!({ "report": report, "manifest": manifest });
    emit(&value, a.out.as_ref(), &manifest, started)?;
    for o in &report.outcomes {
        eprintln!("{} {} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
