use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holo_sps::experiment::{
    run_convergence_ab, run_histograms, run_render, run_scatter_experiment, ExperimentConfig,
};
use holo_sps::metrics::fmt_float;
use holo_sps::Result;

/// Holographic search experiments: random vs sorted pixel selection.
#[derive(Parser, Debug)]
#[command(name = "holo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare random and sorted pixel selection from the same start.
    RunAb(Options),
    /// Per-pixel quantisation change vs error change, with square-law fit.
    Scatter(Options),
    /// Histograms of the back-projection and its quantisation changes.
    Hist(Options),
    /// One search with the configured selection; writes images and a trace.
    Render(Options),
}

#[derive(Args, Debug)]
struct Options {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// P5 PGM path, or `mandrill` / `usaf` for the built-in targets.
    #[arg(long)]
    image: Option<String>,
    #[arg(long)]
    resolution: Option<usize>,
    /// binary-phase, phase:<n>, phase:cont, binary-amplitude, amplitude:<n>, amplitude:cont
    #[arg(long)]
    scheme: Option<String>,
    /// ds-naive, ds-fast or sa
    #[arg(long)]
    algorithm: Option<String>,
    /// random or sps
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Make the target 180-degree rotation symmetric.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    symmetry: Option<bool>,
    /// Annealing temperature scale, or `auto`.
    #[arg(long)]
    t_coeff: Option<String>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    trace_stride: Option<u64>,
    #[arg(long)]
    recompute_interval: Option<u64>,
    /// Pixels sampled by `scatter`.
    #[arg(long)]
    samples: Option<usize>,
}

impl Options {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 14] = [
            ("image", self.image.clone()),
            ("resolution", self.resolution.map(|v| v.to_string())),
            ("scheme", self.scheme.clone()),
            ("algorithm", self.algorithm.clone()),
            ("selection", self.selection.clone()),
            ("iterations", self.iterations.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("symmetry", self.symmetry.map(|v| v.to_string())),
            ("t-coeff", self.t_coeff.clone()),
            ("t0", self.t0.map(|v| v.to_string())),
            ("out-dir", self.out_dir.as_ref().map(|p| p.display().to_string())),
            ("trace-stride", self.trace_stride.map(|v| v.to_string())),
            ("recompute-interval", self.recompute_interval.map(|v| v.to_string())),
            ("samples", self.samples.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunAb(opts) => {
            let config = opts.resolve()?;
            let report = run_convergence_ab(&config)?;
            print!("{}", report.summary(&config));
        }
        Command::Scatter(opts) => {
            let config = opts.resolve()?;
            let report = run_scatter_experiment(&config)?;
            println!("samples = {}", report.points.len());
            println!("fit_coefficient = {}", fmt_float(report.fit_coefficient));
            match report.pearson {
                Some(r) => println!("pearson = {}", fmt_float(r)),
                None => println!("pearson = undefined"),
            }
        }
        Command::Hist(opts) => {
            let config = opts.resolve()?;
            let report = run_histograms(&config)?;
            println!(
                "wrote {} magnitude, angle and change samples to {}",
                report.magnitude.total(),
                config.out_dir.display()
            );
        }
        Command::Render(opts) => {
            let config = opts.resolve()?;
            let result = run_render(&config)?;
            println!("initial_mse = {}", fmt_float(result.initial_mse));
            println!("final_mse = {}", fmt_float(result.final_mse));
            println!("accepted = {}", result.accepted);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("holo: {e}");
            ExitCode::FAILURE
        }
    }
}
