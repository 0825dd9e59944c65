//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{dissipativity_scan, evolve, random_states, resolvent_sweep, w2_trace_bound};
use crate::checks::run_checks;
use crate::config::{load_config, RunConfig};
use crate::error::{Error, Result};
use crate::generator::{kernel_vector, smallest_singular_value_h0};
use crate::lab::Lab;
use crate::report;
use crate::spectrum::spectrum_leading;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fsilab", version, about = "Compressible Oseen flow coupled to a clamped beam: operator-level numerics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration
    #[arg(long)]
    pub config: PathBuf,
    /// output directory (overrides output.directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// random seed (overrides resolvent.seed)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// run the invariant suite
    Check(Common),
    /// backward Euler energy trace
    Simulate(Common),
    /// resolvent sweep over a_list x b_list x samples
    Resolvent(Common),
    /// rightmost eigenvalues on the zero-mean subspace
    Spectrum(Common),
    /// random dissipativity scan
    Dissipativity(Common),
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Config(_)
        | Error::InvalidGrid(_)
        | Error::InvalidParameter(_)
        | Error::AmbientTooLarge { .. }
        | Error::AmbientNotTangential(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let threads = std::env::var("FSILAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn prepare(c: &Common) -> Result<(RunConfig, PathBuf, u64)> {
    let mut cfg = load_config(&c.config)?;
    if let Some(s) = c.seed {
        cfg.resolvent.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output.directory = o.clone();
    }
    let dir = cfg.output.directory.clone();
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let seed = cfg.resolvent.seed;
    Ok((cfg, dir, seed))
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Check(c) => cmd_check(&c),
        Command::Simulate(c) => cmd_simulate(&c),
        Command::Resolvent(c) => cmd_resolvent(&c),
        Command::Spectrum(c) => cmd_spectrum(&c),
        Command::Dissipativity(c) => cmd_dissipativity(&c),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn cmd_check(c: &Common) -> Result<i32> {
    let (cfg, dir, seed) = prepare(c)?;
    let outcomes = run_checks(&cfg, seed)?;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<24} value {} limit {} ({})", o.name, report::fmt_f64(o.value), report::fmt_f64(o.limit), o.detail);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    let summary = serde_json::json!({
        "passed": failed.is_empty(),
        "failed": failed,
        "checks": outcomes,
    });
    write_json(&dir.join("check.json"), &summary)?;
    if failed.is_empty() {
        println!("all {} checks passed", outcomes.len());
        Ok(EXIT_OK)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(EXIT_NUMERICAL)
    }
}

fn cmd_simulate(c: &Common) -> Result<i32> {
    let (cfg, dir, seed) = prepare(c)?;
    let lab = Lab::new(cfg.lab_params())?;
    let phi0 = random_states(&lab.metric, 1, seed).remove(0);
    let (trace, _) = evolve(&lab.gen, &lab.metric, &phi0, cfg.evolve.dt, cfg.evolve.t_end)?;
    report::write_energy_csv(&dir.join("energy.csv"), &trace)?;
    if cfg.output.emit_plots {
        report::plot_energy(&dir.join("energy.svg"), &trace)?;
    }
    let e0 = trace.e_weighted[0];
    let e1 = *trace.e_weighted.last().expect("trace has the initial row");
    println!("steps {}  E_weighted(0) {}  E_weighted(T) {}", trace.times.len() - 1, report::fmt_f64(e0), report::fmt_f64(e1));
    Ok(EXIT_OK)
}

fn cmd_resolvent(c: &Common) -> Result<i32> {
    let (cfg, dir, seed) = prepare(c)?;
    let lab = Lab::new(cfg.lab_params())?;
    let r = &cfg.resolvent;
    let samples = random_states(&lab.metric, r.samples, seed);
    let table = resolvent_sweep(&lab.gen, &lab.metric, &r.b_list, &r.a_list, &samples, true)?;
    report::write_resolvent_csv(&dir.join("resolvent.csv"), &table)?;
    if cfg.output.emit_plots {
        report::plot_resolvent(&dir.join("resolvent.svg"), &table)?;
    }
    let ratios = table.decay_ratios();
    let worst = ratios.iter().map(|r| r.2).fold(0.0, f64::max);
    println!("cells {}  failures {}  worst last/first criterion ratio {}", table.records.len(), table.failures.len(), report::fmt_f64(worst));
    let pairs: Vec<(&[f64], &[faer::c64])> = table
        .records
        .iter()
        .zip(&table.solutions)
        .map(|(rec, sol)| (samples[rec.sample_id].as_slice(), sol.as_slice()))
        .collect();
    let tb = w2_trace_bound(&lab.gen, &lab.metric, &pairs);
    println!("w2 trace constant {}  interface residual {}", report::fmt_f64(tb.constant), report::fmt_f64(tb.interface_residual));
    for f in &table.failures {
        eprintln!("solve failed at a = {}, b = {}: {}", f.a, f.b, f.message);
    }
    Ok(if table.failures.is_empty() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_spectrum(c: &Common) -> Result<i32> {
    let (cfg, dir, _) = prepare(c)?;
    let lab = Lab::new(cfg.lab_params())?;
    let ev = spectrum_leading(&lab.gen, &lab.metric, cfg.spectrum.count)?;
    report::write_spectrum_csv(&dir.join("spectrum.csv"), &ev)?;
    if cfg.output.emit_plots {
        report::plot_spectrum(&dir.join("spectrum.svg"), &ev)?;
    }
    let k = kernel_vector(&lab.gen, &lab.metric)?;
    let smin = smallest_singular_value_h0(&lab.gen, &lab.metric, 80)?;
    if let Some(e) = ev.first() {
        println!("rightmost eigenvalue {} {:+}i", report::fmt_f64(e.re), e.im);
    }
    println!(
        "kernel residual {}  mean ratio {}  smallest singular value on zero-mean subspace {}",
        report::fmt_f64(k.residual),
        report::fmt_f64(k.mean_ratio),
        report::fmt_f64(smin)
    );
    Ok(if ev.iter().all(|e| e.converged) { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_dissipativity(c: &Common) -> Result<i32> {
    let (cfg, dir, seed) = prepare(c)?;
    let lab = Lab::new(cfg.lab_params())?;
    let d = dissipativity_scan(&lab.gen, &lab.metric, cfg.dissipativity.samples, seed, cfg.delta)?;
    report::write_dissipativity_csv(&dir.join("dissipativity.csv"), &d)?;
    if cfg.output.emit_plots {
        report::plot_dissipativity(&dir.join("dissipativity.svg"), &d)?;
    }
    let opt = |v: Option<f64>| v.map(report::fmt_f64).unwrap_or_else(|| "n/a".into());
    println!(
        "max q/norm^2 {}  r_U {}  xi {}  C_delta {}  C* {}",
        report::fmt_f64(d.max_ratio),
        report::fmt_f64(d.r_u),
        report::fmt_f64(d.xi),
        opt(d.c_delta),
        opt(d.c_star)
    );
    Ok(EXIT_OK)
}
