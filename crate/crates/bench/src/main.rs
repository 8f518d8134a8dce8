use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsi_core::baseline::default_memory_cap;
use rsi_core::tt::to_json_string;
use ttbench::experiments::{
    exp_gaussian, exp_oscillatory, exp_psi_squared, exp_relu, exp_scaling, GaussianParams, GaussianVariant,
    OscillatoryParams, Psi2Params, ReluParams, ScalingParams,
};
use ttbench::product::multiply_files;
use ttbench::{exit_code, write_csv, BenchError, Envelope, Outcome, Result, RunSettings};

#[derive(Parser, Debug)]
#[command(name = "ttbench", version, about = "Sketched tensor-train product experiments")]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Square a random spin-1 chain state and check the S^z S^z correlator.
    Psi2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        chi_in: usize,
        #[arg(long, default_value_t = 1)]
        psi_seed: u64,
    },
    /// Products of Gaussian bumps.
    Gaussian {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "separation")]
        variant: String,
        #[arg(long)]
        mu1: Option<f64>,
        #[arg(long)]
        mu2: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 10)]
        chi_in: usize,
    },
    /// Product of two oscillating functions over a range of oversampling.
    Oscillatory {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        chi_in: usize,
    },
    /// Runtime and operation-count growth with the bond dimension.
    Scaling {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        direct_runs: usize,
    },
    /// Positive part of a sign-changing bump.
    Relu {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        chi_in: usize,
        #[arg(long, default_value_t = 0.5)]
        mu: f64,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 0.5)]
        shift: f64,
    },
    /// Multiply two trains read from JSON files and write the result.
    Product {
        #[command(flatten)]
        common: Common,
        a: PathBuf,
        b: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// Output bond dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    chi_max: Vec<usize>,
    #[arg(long, default_value_t = f64::EPSILON)]
    eps_id: f64,
    /// Oversampling; a comma-separated list for the oscillatory sweep.
    #[arg(long, value_delimiter = ',')]
    oversample: Vec<usize>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds per parameter point.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long)]
    nbits: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Run parameter points concurrently; timings are marked untrusted.
    #[arg(long)]
    parallel: bool,
    /// Memory budget of the direct method in f64 entries.
    #[arg(long)]
    direct_mem_cap: Option<usize>,
}

impl Common {
    fn settings(&self, oversample_list: bool) -> Result<RunSettings> {
        if !oversample_list && self.oversample.len() > 1 {
            return Err(BenchError::Config("only one --oversample value is allowed here".into()));
        }
        if self.seeds == 0 {
            return Err(BenchError::Config("--seeds must be at least 1".into()));
        }
        let settings = RunSettings {
            eps_id: self.eps_id,
            oversample: self.oversample.first().copied().unwrap_or(5),
            seeds: (self.seed..self.seed + self.seeds).collect(),
            parallel: self.parallel,
            direct_mem_cap: self.direct_mem_cap.unwrap_or_else(default_memory_cap),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn chi_or(&self, default: Vec<usize>) -> Vec<usize> {
        if self.chi_max.is_empty() {
            default
        } else {
            self.chi_max.clone()
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit(&self, name: &str, outcome: Outcome) -> Result<()> {
        let mut sink = self.sink()?;
        match self.format {
            Format::Csv => {
                write_csv(&outcome.records, &mut sink)?;
                if !outcome.summary.is_empty() {
                    eprintln!("{}", serde_json::Value::Object(outcome.summary));
                }
                if self.parallel {
                    eprintln!("warning: parameter points ran concurrently; timings are not comparable");
                }
            }
            Format::Json => {
                let mut env = Envelope::new(name, outcome.records, !self.parallel);
                env.summary = outcome.summary;
                serde_json::to_writer_pretty(&mut sink, &env)?;
                writeln!(sink)?;
            }
        }
        sink.flush()?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.experiment {
        Experiment::Psi2 {
            common,
            n,
            d,
            chi_in,
            psi_seed,
        } => {
            let settings = common.settings(false)?;
            let params = Psi2Params {
                n,
                d,
                chi_in,
                chi_out: common.chi_or(Psi2Params::default().chi_out),
                psi_seed,
            };
            common.emit("psi2", exp_psi_squared(&params, &settings)?)
        }
        Experiment::Gaussian {
            common,
            variant,
            mu1,
            mu2,
            sigma,
            chi_in,
        } => {
            let settings = common.settings(false)?;
            let variant: GaussianVariant = variant.parse()?;
            let mut params = GaussianParams::new(variant);
            params.mu1 = mu1.unwrap_or(params.mu1);
            params.mu2 = mu2.unwrap_or(params.mu2);
            params.sigma = sigma.unwrap_or(params.sigma);
            params.chi_in = chi_in;
            params.n_bits = common.nbits.unwrap_or(params.n_bits);
            params.chi_out = common.chi_or(params.chi_out);
            common.emit("gaussian", exp_gaussian(&params, &settings)?)
        }
        Experiment::Oscillatory { common, chi_in } => {
            let settings = common.settings(true)?;
            let defaults = OscillatoryParams::default();
            let params = OscillatoryParams {
                n_bits: common.nbits.unwrap_or(defaults.n_bits),
                chi_in,
                chi_out: common.chi_or(defaults.chi_out),
                oversample: if common.oversample.is_empty() {
                    defaults.oversample
                } else {
                    common.oversample.clone()
                },
            };
            common.emit("oscillatory", exp_oscillatory(&params, &settings)?)
        }
        Experiment::Scaling {
            common,
            n,
            d,
            direct_runs,
        } => {
            let settings = common.settings(false)?;
            let params = ScalingParams {
                n,
                d,
                chi: common.chi_or(ScalingParams::default().chi),
                direct_runs,
                input_seed: common.seed + 1,
            };
            common.emit("scaling", exp_scaling(&params, &settings)?)
        }
        Experiment::Relu {
            common,
            chi_in,
            mu,
            sigma,
            shift,
        } => {
            let settings = common.settings(false)?;
            let defaults = ReluParams::default();
            let params = ReluParams {
                n_bits: common.nbits.unwrap_or(defaults.n_bits),
                chi_in,
                mu,
                sigma,
                shift,
                chi_out: common.chi_or(defaults.chi_out),
            };
            common.emit("relu", exp_relu(&params, &settings)?)
        }
        Experiment::Product { common, a, b } => {
            let settings = common.settings(false)?;
            let chi = match common.chi_max.as_slice() {
                [c] => *c,
                _ => return Err(BenchError::Config("product needs exactly one --chi-max value".into())),
            };
            let cfg = settings.rsi_config(chi, settings.seeds[0]);
            let report = multiply_files(&a, &b, &cfg)?;
            let mut sink = common.sink()?;
            sink.write_all(to_json_string(&report.output)?.as_bytes())?;
            writeln!(sink)?;
            sink.flush()?;
            eprintln!(
                "bonds {:?}, sketch dimension {}, seed {}, {} diagnostic(s)",
                report.output.bond_dims(),
                report.k,
                report.seed_used,
                report.diagnostics.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
