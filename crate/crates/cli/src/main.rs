use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nessim_cli::manifest::RunManifest;
use nessim_cli::{run_experiment, run_sweep, verify, CliError, Overrides};
use nessim_cli::solve;

#[derive(Parser, Debug)]
#[command(name = "nessim", version, about = "Dissipative Schrödinger dynamics in complex harmonic traps")]
struct Cli {
    /// Directory for run outputs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for sweeps (defaults to the available cores).
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Override the time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Override the number of grid points.
    #[arg(long, global = true)]
    n_points: Option<usize>,
    /// Reserved; the dynamics has no stochastic terms.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one config and write series, snapshots and manifest.
    Run { config: PathBuf },
    /// Run every point of a parameter sweep.
    Sweep { sweep_file: PathBuf },
    /// Solve a stationary eigenproblem.
    Solve { eigen_config: PathBuf },
    /// Run a config and check its expect block, writing nothing.
    Verify { config: PathBuf },
}

fn print_manifest(m: &RunManifest) {
    println!("config_hash  {}", m.config_hash);
    println!("fate         {}", m.fate);
    if let Some(a) = &m.abort {
        println!("abort        {a}");
    }
    if let Some(d) = &m.fits.decay {
        println!("xi_c         {:.6}", d.rate);
    }
    if let Some(r) = &m.fits.peak_relaxation {
        println!("A0 {:.6}  beta {:.6}  gamma_fit {:.4}  A0-1/gamma_fit {:.6}", r.a0, r.beta, r.gamma_fit, r.asymptote);
    }
    for c in m.expectations.iter().flatten() {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: expected {}, observed {}", c.name, c.expected, c.observed);
    }
}

fn expectation_status(m: &RunManifest) -> Result<(), CliError> {
    let checks = m.expectations.as_deref().unwrap_or_default();
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Mismatch { failed, total: checks.len() });
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if cli.seed.is_some() {
        log::info!("--seed is accepted but unused: the dynamics is deterministic");
    }
    if cli.parallelism == Some(0) {
        return Err(CliError::Usage("--parallelism must be at least 1".into()));
    }
    let overrides = Overrides { dt: cli.dt, n_points: cli.n_points };
    match &cli.command {
        Command::Run { config } => {
            let out = run_experiment(config, &cli.out_dir, &overrides)?;
            print_manifest(&out.manifest);
            expectation_status(&out.manifest)
        }
        Command::Verify { config } => {
            let out = verify(config, &overrides)?;
            print_manifest(&out.manifest);
            expectation_status(&out.manifest)
        }
        Command::Sweep { sweep_file } => {
            let workers = cli
                .parallelism
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let index = run_sweep(sweep_file, &cli.out_dir, workers, &overrides)?;
            for e in &index.runs {
                let params: Vec<String> = e.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
                match (&e.fate, &e.error) {
                    (_, Some(err)) => println!("{:03} {}  error: {err}", e.index, params.join(" ")),
                    (Some(f), None) => println!("{:03} {}  {f}", e.index, params.join(" ")),
                    _ => {}
                }
            }
            println!("{} runs, index at {}", index.runs.len(), cli.out_dir.join("index.json").display());
            Ok(())
        }
        Command::Solve { eigen_config } => {
            let s = solve::solve(eigen_config, &cli.out_dir, &overrides)?;
            println!("omega      {:.12}", s.omega);
            if let Some(w) = s.omega_unshifted {
                println!("omega_ref  {w:.12}");
            }
            println!("residual   {:.3e} after {} iterations", s.residual, s.iterations);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
