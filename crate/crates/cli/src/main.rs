//! `groundstate`: command-line driver for the ground-state solver.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 hypothesis failure,
//! 3 non-convergence.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod json;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use groundstate_core::curvature_ode::{
    classify_constant_curvature, integrate_profile_ode, ProfileDescriptor,
};
use groundstate_core::discretization::{read_field_csv, write_field_csv};
use groundstate_core::geometry::{
    check_pole_conditions, curvature_bounds_report, scalar_curvature, GrowthLaw, PsiProfile,
};
use groundstate_core::nonlinearity::check_structural_conditions;
use groundstate_core::spectral::lambda1_manifold;
use groundstate_core::symmetry::{foliated_schwarz_check, SymmetryReport};
use groundstate_core::variational::{
    hypothesis_gate, solve_ground_state, GroundStateResult, Initialization, SolverConfig,
};
use groundstate_core::{ConditionReport, DiscreteGeometry, Error, Result};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "groundstate",
    version,
    about = "Ground states of -Δu = f(r,u) on rotationally symmetric models"
)]
struct Cli {
    /// Run configuration (`key = value` lines); defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pole conditions, curvature bounds and sampled scalar curvature (CSV on stdout).
    Curvature,
    /// λ₁(B_R) along the configured radius schedule (CSV on stdout).
    Spectrum,
    /// Ground state: field CSV plus JSON summary.
    Solve(SolveArgs),
    /// Symmetry report of a stored field.
    Symmetry {
        #[arg(long)]
        field: PathBuf,
        /// Relative tolerance of the radial and monotonicity tests.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Warping profile of constant scalar curvature κ.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        /// Also integrate the profile ODE and write `r,psi,dpsi,psi_exact` samples here.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Every hypothesis the solver relies on, as a pass/fail table.
    CheckHypotheses,
}

#[derive(Args)]
struct SolveArgs {
    /// Restrict to radial fields.
    #[arg(long)]
    radial_only: bool,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    nsigma: Option<usize>,
    /// Start from a random field with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Solve even if the hypothesis checks fail.
    #[arg(long = "override")]
    override_hypotheses: bool,
    /// Skip the radial comparison run.
    #[arg(long)]
    no_compare_radial: bool,
    /// Field CSV destination.
    #[arg(long)]
    field: Option<PathBuf>,
    /// JSON summary destination (stdout if absent).
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::HypothesisViolation(_) => 2,
        Error::NonConvergence { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = load(cli.config.as_deref())?;
    match cli.command {
        Command::Curvature => curvature(&cfg),
        Command::Spectrum => spectrum(&cfg),
        Command::Solve(args) => solve(cfg, args),
        Command::Symmetry { field, tol } => symmetry(&cfg, &field, tol),
        Command::Classify { n, kappa, samples } => classify(n, kappa, samples.as_deref()),
        Command::CheckHypotheses => check_hypotheses(&cfg),
    }
}

fn verdict(report: &ConditionReport) -> u8 {
    if report.all_passed() {
        0
    } else {
        2
    }
}

fn curvature(cfg: &RunConfig) -> Result<u8> {
    let model = cfg.model()?;
    let grid: Vec<f64> = (1..=cfg.curvature_points)
        .map(|k| cfg.curvature_rmax * k as f64 / cfg.curvature_points as f64)
        .collect();
    let mut report = check_pole_conditions(model.profile(), 1e-10)?;
    report.extend(curvature_bounds_report(&model, &grid)?);
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "r,scalar_curvature,tangential_quotient,radial_quotient"
    )?;
    for &r in &grid {
        let (t, q) = model.profile().curvature_quotients(r);
        writeln!(out, "{r},{},{t},{q}", scalar_curvature(&model, r)?)?;
    }
    eprint!("{report}");
    Ok(verdict(&report))
}

fn spectrum(cfg: &RunConfig) -> Result<u8> {
    let sweep = lambda1_manifold(
        &cfg.model()?,
        &cfg.spectrum_schedule,
        cfg.spectrum_tol,
        cfg.spectrum_dr,
    )?;
    let mut out = io::stdout().lock();
    writeln!(out, "R,lambda1")?;
    for (r, l) in &sweep.entries {
        writeln!(out, "{r},{l}")?;
    }
    eprintln!(
        "plateau {} ({})",
        sweep.plateau,
        if sweep.converged {
            "converged"
        } else {
            "not converged"
        }
    );
    Ok(0)
}

fn psi_json(psi: &PsiProfile) -> Value {
    let law = |g: &GrowthLaw| match *g {
        GrowthLaw::Exp { a } => json!({"target": "exp", "a": json::num(a)}),
        GrowthLaw::ExpPower { a } => json!({"target": "exp_power", "a": json::num(a)}),
        GrowthLaw::PolyExp { a, b } => {
            json!({"target": "poly_exp", "a": json::num(a), "b": json::num(b)})
        }
        GrowthLaw::PolyExpPower { a, b } => {
            json!({"target": "poly_exp_power", "a": json::num(a), "b": json::num(b)})
        }
    };
    match psi {
        PsiProfile::Euclidean => json!({"kind": "euclidean"}),
        PsiProfile::Hyperbolic { alpha } => {
            json!({"kind": "hyperbolic", "alpha": json::num(*alpha)})
        }
        PsiProfile::Blended { target, r0 } => {
            let mut v = law(target);
            v["kind"] = json!("blended");
            v["r0"] = json::num(*r0);
            v
        }
        PsiProfile::Raw(target) => {
            let mut v = law(target);
            v["kind"] = json!("raw");
            v
        }
    }
}

fn symmetry_json(s: &SymmetryReport) -> Value {
    json!({
        "sign": s.sign.as_str(),
        "radial": s.is_radial,
        "monotone_sigma": s.is_sigma_monotone,
        "direction": s.direction.map(|d| d.as_str()),
        "axis_flipped": s.axis_flipped,
        "strict_rows": s.strict_rows as u64,
        "theta0": s.theta0_convention(),
        "foliated_schwarz": s.foliated_schwarz(),
        "polarization_energy_gap": json::num(s.polarization_energy_gap),
        "product_form_residual": json::num(s.product_form_residual),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p)?;
            writeln!(f, "{text}")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn solve(mut cfg: RunConfig, args: SolveArgs) -> Result<u8> {
    if let Some(v) = args.rmax {
        cfg.rmax = v;
    }
    if let Some(v) = args.nr {
        cfg.nr = v;
    }
    if let Some(v) = args.nsigma {
        cfg.nsigma = v;
    }
    if let Some(seed) = args.seed {
        cfg.solver.init = Initialization::RandomSeeded { seed };
    }
    if args.radial_only {
        cfg.solver.radial_only = true;
        if args.seed.is_none() {
            cfg.solver.init = Initialization::RadialBump;
        }
    }
    cfg.solver.override_hypotheses |= args.override_hypotheses;
    cfg.compare_radial &= !args.no_compare_radial;
    if let Some(p) = args.field {
        cfg.field_path = p;
    }
    if args.summary.is_some() {
        cfg.summary_path = args.summary;
    }
    cfg.validate()?;

    let geom = cfg.geometry()?;
    let f = cfg.nonlinearity()?;
    let result = solve_ground_state(&geom, &f, &cfg.solver)?;
    let radial = if cfg.compare_radial && !cfg.solver.radial_only {
        // The gate has already run on this exact problem.
        let rc = SolverConfig {
            override_hypotheses: true,
            radial_only: true,
            init: Initialization::RadialBump,
            ..cfg.solver.clone()
        };
        Some(solve_ground_state(&geom, &f, &rc)?)
    } else {
        None
    };

    let mut w = BufWriter::new(File::create(&cfg.field_path)?);
    write_field_csv(&result.field, &geom, &mut w)?;
    w.flush()?;

    let summary = summary_json(&cfg, &geom, &result, radial.as_ref());
    write_output(cfg.summary_path.as_deref(), &json::render(&summary))?;
    let converged = result.converged && radial.as_ref().is_none_or(|r| r.converged);
    if !converged {
        eprintln!("warning: solver stopped before reaching the residual tolerance");
    }
    Ok(if converged { 0 } else { 3 })
}

fn summary_json(
    cfg: &RunConfig,
    geom: &DiscreteGeometry,
    r: &GroundStateResult,
    radial: Option<&GroundStateResult>,
) -> Value {
    let mut v = json!({
        "geometry": {
            "n": cfg.n as u64,
            "psi": psi_json(&cfg.psi),
            "rmax": json::num(geom.r_max()),
            "nr": geom.nr() as u64,
            "nsigma": geom.nsigma() as u64,
        },
        "nonlinearity": {
            "lambda": json::num(cfg.lambda),
            "p": json::num(cfg.p),
            "mu": json::num(cfg.mu.unwrap_or(cfg.p + 1.0)),
            "weight": cfg.weight_label(),
        },
        "radial_only": cfg.solver.radial_only,
        "c": json::num(r.energy),
        "c_r": radial.map_or(Value::Null, |x| json::num(x.energy)),
        "residual": json::num(r.pde_residual),
        "residual_abs": json::num(r.pde_residual_abs),
        "nehari_residual": json::num(r.nehari_residual),
        "iterations": r.iterations as u64,
        "converged": r.converged,
        "field_csv": cfg.field_path.display().to_string(),
    });
    let sym = symmetry_json(&r.symmetry);
    for (k, x) in sym.as_object().expect("object literal") {
        v[k] = x.clone();
    }
    v
}

fn symmetry(cfg: &RunConfig, path: &Path, tol: Option<f64>) -> Result<u8> {
    let csv = read_field_csv(BufReader::new(File::open(path)?))?;
    let geom = DiscreteGeometry::build(cfg.model()?, csv.r_max, csv.nr, csv.nsigma)?;
    let field = csv.into_field(&geom)?;
    let report = foliated_schwarz_check(&field, &geom, tol.unwrap_or(cfg.solver.symmetry_tol))?;
    println!("{}", json::render(&symmetry_json(&report)));
    Ok(0)
}

fn classify(n: usize, kappa: f64, samples: Option<&Path>) -> Result<u8> {
    let d = classify_constant_curvature(n, kappa)?;
    match d {
        ProfileDescriptor::Euclidean => println!("euclidean"),
        ProfileDescriptor::Hyperbolic { alpha } => println!("hyperbolic alpha={alpha:.16e}"),
    }
    if let Some(path) = samples {
        let run = integrate_profile_ode(n, kappa, 5.0, 1e-3)?;
        let exact = d.profile();
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "r,psi,dpsi,psi_exact")?;
        for s in &run.samples {
            writeln!(w, "{},{},{},{}", s.r, s.psi, s.dpsi, exact.value(s.r))?;
        }
        w.flush()?;
        eprintln!("max relative deviation {:e}", run.max_rel_deviation);
    }
    Ok(0)
}

fn check_hypotheses(cfg: &RunConfig) -> Result<u8> {
    let model = cfg.model()?;
    let f = cfg.nonlinearity()?;
    let mut report = check_pole_conditions(model.profile(), 1e-10)?;
    let grid: Vec<f64> = (1..=cfg.curvature_points)
        .map(|k| cfg.curvature_rmax * k as f64 / cfg.curvature_points as f64)
        .collect();
    report.extend(curvature_bounds_report(&model, &grid)?);
    let sample: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .flat_map(|&r| {
            [1e-3, 0.1, 1.0, 10.0]
                .into_iter()
                .flat_map(move |s| [(r, s), (r, -s)])
        })
        .collect();
    report.extend(check_structural_conditions(&f, &sample, None)?);
    report.extend(hypothesis_gate(&cfg.geometry()?, &f, &cfg.solver)?);
    print!("{report}");
    Ok(verdict(&report))
}
