//! Batch front end for the quaternionic scattering toolkit.
//!
//! Subcommands: `phantom`, `forward`, `reconstruct`, `verify`, `sweep`.
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 positivity violation, 4 non-contractive solve, 5 division by zero.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use calderon3d::calculus::CauchyKernel;
use calderon3d::config::{Manifest, RunConfig};
use calderon3d::dirac::potentials_from_gamma;
use calderon3d::error::Error;
use calderon3d::grid::{sample_phantom, QField};
use calderon3d::io::{to_json_pretty, write_field, write_text};
use calderon3d::quat::Vec3;
use calderon3d::recon::{reconstruct_gamma, AnnulusRule};
use calderon3d::scatter::{admissibility, forward, SolverSettings};
use calderon3d::verify::{boundary_volume_ratio, run_suites};

#[derive(Parser)]
#[command(name = "calderon3d", version, about = "Forward and inverse scattering pipeline for complex conductivities")]
struct Cli {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed override for randomized verification properties.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the configured phantom and dump the conductivity and
    /// potential fields.
    Phantom,
    /// Synthesize scattering data for the configured (xi, k) lists.
    Forward,
    /// Run the full inverse pipeline and dump recovered fields and reports.
    Reconstruct,
    /// Run verification suites.
    Verify {
        /// Suite name (repeatable); overrides the config's suite list.
        #[arg(long)]
        suite: Vec<String>,
    },
    /// Reconstruct over a grid of annulus radii and grid sizes and emit a
    /// trend table.
    Sweep {
        /// Comma-separated inner annulus radii.
        #[arg(long, value_delimiter = ',', default_value = "16,32")]
        r_values: Vec<f64>,

        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',')]
        n_values: Vec<usize>,
    },
}

fn exit_for(e: &Error) -> ExitCode {
    let code = match e {
        Error::Config(_) | Error::Parse(_) => 2,
        Error::PositivityViolation { .. } => 3,
        Error::NonContractive { .. } => 4,
        Error::DivisionByZero => 5,
        _ => 1,
    };
    ExitCode::from(code)
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dump_field(dir: &Path, name: &str, f: &QField) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
    write_field(f, &mut file)
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<(), Error> {
    write_text(&dir.join("manifest.json"), &to_json_pretty(m)?)
}

fn cmd_phantom(cfg: &RunConfig, out: &Path) -> Result<(), Error> {
    let grid = cfg.grid.build();
    let gamma = sample_phantom(&cfg.phantom, grid)?;
    let pots = potentials_from_gamma(&gamma)?;
    dump_field(out, "gamma.field", &gamma)?;
    dump_field(out, "q1.field", &pots.q1)?;
    dump_field(out, "q2.field", &pots.q2)?;
    // spectral vs analytic potential on the sampled lattice
    let analytic = QField::from_fn(grid, |x| cfg.phantom.q2_at(x));
    let q2_err = pots.q2.rel_l2_error(&analytic);
    let min_re = gamma
        .values
        .iter()
        .map(|q| q.sc().re)
        .fold(f64::INFINITY, f64::min);
    let stats = json!({
        "min_re_gamma": min_re,
        "q2_spectral_vs_analytic_rel_l2": q2_err,
        "conjugacy_defect": pots.conjugacy_defect(),
    });
    write_manifest(out, &Manifest::new("phantom", cfg, stats))?;
    println!("phantom: min Re(gamma) = {min_re:.4}, q2 error = {q2_err:.3e}");
    Ok(())
}

fn cmd_forward(cfg: &RunConfig, out: &Path) -> Result<(), Error> {
    let grid = cfg.grid.build();
    let gamma = sample_phantom(&cfg.phantom, grid)?;
    let xis: Vec<Vec3> = cfg.forward.xis.iter().map(|v| Vec3(*v)).collect();
    let ks: Vec<Vec3> = cfg.forward.ks.iter().map(|v| Vec3(*v)).collect();
    let settings = SolverSettings {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
    };
    let table = forward(&gamma, "phantom", &xis, &ks, &settings)?;
    std::fs::create_dir_all(out)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    write_text(
        &out.join("scattering.csv"),
        std::str::from_utf8(&csv).expect("csv is utf-8"),
    )?;
    let mut cross = Vec::new();
    if cfg.forward.cross_check {
        for &xi in &xis {
            for &k in &ks {
                let adm = admissibility(xi, k)?;
                if adm.admissible {
                    let ratio = boundary_volume_ratio(
                        &gamma,
                        xi,
                        k,
                        cfg.forward.mesh_level,
                        &settings,
                    )?;
                    cross.push(json!({
                        "xi": xi.0, "k": k.0,
                        "boundary_over_volume": ratio,
                    }));
                }
            }
        }
    }
    let stats = json!({
        "entries": table.entries.len(),
        "cross_check": cross,
    });
    write_manifest(out, &Manifest::new("forward", cfg, stats))?;
    println!(
        "forward: {} entries -> {}",
        table.entries.len(),
        out.join("scattering.csv").display()
    );
    Ok(())
}

fn cmd_reconstruct(cfg: &RunConfig, out: &Path) -> Result<(), Error> {
    let grid = cfg.grid.build();
    let gamma_true = sample_phantom(&cfg.phantom, grid)?;
    let pots = potentials_from_gamma(&gamma_true)?;
    let kernel = CauchyKernel::new(grid);
    let rule = AnnulusRule::new(cfg.recon.r, cfg.recon.n_radial, cfg.recon.n_angular)?;
    let (table, q2_rec, rec, report) = reconstruct_gamma(
        &pots,
        &rule,
        cfg.recon.xi_max,
        cfg.solver.tol,
        cfg.solver.max_iter,
        &kernel,
        Some((&pots.q2, &gamma_true)),
    )?;
    std::fs::create_dir_all(out)?;
    dump_field(out, "q2_recovered.field", &q2_rec)?;
    dump_field(out, "gamma_recovered.field", &rec.gamma)?;
    write_text(&out.join("qhat.json"), &to_json_pretty(&table)?)?;
    write_text(&out.join("report.json"), &to_json_pretty(&report)?)?;
    write_text(
        &out.join("qhat_errors.csv"),
        &calderon3d::recon::qhat_error_csv(&table, &pots.q2),
    )?;
    let stats = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
    write_manifest(out, &Manifest::new("reconstruct", cfg, stats))?;
    println!(
        "reconstruct: qhat rel l2 = {:.3}, gamma rel l2 = {:.3}",
        report.qhat_rel_l2.unwrap_or(f64::NAN),
        report.gamma_rel_l2.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, out: &Path, suites: &[String]) -> Result<bool, Error> {
    let names: Vec<String> = if suites.is_empty() {
        cfg.suites.clone()
    } else {
        suites.to_vec()
    };
    for s in &names {
        if !calderon3d::config::SUITE_NAMES.contains(&s.as_str()) {
            return Err(Error::Config(format!("unknown suite '{s}'")));
        }
    }
    let report = run_suites(&names, cfg)?;
    for v in &report.verdicts {
        println!(
            "[{}] {}::{} — {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.suite,
            v.property,
            v.detail
        );
    }
    std::fs::create_dir_all(out)?;
    write_text(&out.join("verify.json"), &to_json_pretty(&report)?)?;
    write_manifest(out, &Manifest::new("verify", cfg, json!({"passed": report.passed})))?;
    Ok(report.passed)
}

fn cmd_sweep(cfg: &RunConfig, out: &Path, r_values: &[f64], n_values: &[usize]) -> Result<(), Error> {
    let n_values: Vec<usize> = if n_values.is_empty() {
        vec![cfg.grid.n]
    } else {
        n_values.to_vec()
    };
    let mut csv = String::from("n,r,qhat_rel_l2,gamma_rel_l2,gamma_rel_linf,vec_inconsistency\n");
    let mut reports = Vec::new();
    for &n in &n_values {
        let mut sub = cfg.clone();
        sub.grid.n = n;
        sub.validate()?;
        let grid = sub.grid.build();
        let gamma_true = sample_phantom(&sub.phantom, grid)?;
        let pots = potentials_from_gamma(&gamma_true)?;
        let kernel = CauchyKernel::new(grid);
        for &r in r_values {
            let rule = AnnulusRule::new(r, sub.recon.n_radial, sub.recon.n_angular)?;
            let (_, _, _, report) = reconstruct_gamma(
                &pots,
                &rule,
                sub.recon.xi_max,
                sub.solver.tol,
                sub.solver.max_iter,
                &kernel,
                Some((&pots.q2, &gamma_true)),
            )?;
            csv.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e}\n",
                n,
                r,
                report.qhat_rel_l2.unwrap_or(f64::NAN),
                report.gamma_rel_l2.unwrap_or(f64::NAN),
                report.gamma_rel_linf.unwrap_or(f64::NAN),
                report.vec_inconsistency,
            ));
            println!(
                "sweep: n = {n}, R = {r}: qhat {:.3}, gamma {:.3}",
                report.qhat_rel_l2.unwrap_or(f64::NAN),
                report.gamma_rel_l2.unwrap_or(f64::NAN)
            );
            reports.push(report);
        }
    }
    std::fs::create_dir_all(out)?;
    write_text(&out.join("sweep.csv"), &csv)?;
    let stats = serde_json::to_value(&reports).map_err(|e| Error::Parse(e.to_string()))?;
    write_manifest(out, &Manifest::new("sweep", cfg, stats))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Cmd::Phantom => cmd_phantom(&cfg, &cli.out),
        Cmd::Forward => cmd_forward(&cfg, &cli.out),
        Cmd::Reconstruct => cmd_reconstruct(&cfg, &cli.out),
        Cmd::Verify { suite } => {
            return match cmd_verify(&cfg, &cli.out, suite) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for(&e)
                }
            };
        }
        Cmd::Sweep { r_values, n_values } => cmd_sweep(&cfg, &cli.out, r_values, n_values),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
