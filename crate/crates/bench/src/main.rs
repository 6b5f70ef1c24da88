use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensor_ring::io::{load_dten, load_trng, save_dten, save_trng};
use tensor_ring::{rse, AlsInit, ProjectionSpec, SolverConfig};

use tr_bench::data::{load_tensor, read_cifar10, read_coil100};
use tr_bench::harness::{compress_dataset, denoise_hsi, sweep_projection};
use tr_bench::noise::SnrLevel;
use tr_bench::synth::low_rank_tensor;
use tr_bench::{write_csv, BenchError, Method, NoiseSpec, Result, RunRecord};

#[derive(Parser)]
#[command(name = "trbench", version, about = "Tensor ring decomposition benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose one tensor (DTEN file or RGB image).
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        solver: SolverArgs,
        /// Sketch size per mode, for rtrals/rtrsvd.
        #[arg(long, value_delimiter = ',')]
        proj: Option<Vec<usize>>,
        /// Resample image inputs to SIDE x SIDE.
        #[arg(long)]
        side: Option<u32>,
        #[arg(long)]
        save_factors: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Projection-size sweep on a third-order tensor; modes 1 and 2 are
    /// sketched to each size, mode 3 is kept.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "25,50,75,100,125,150,175,200")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "trals,trsvd,rtrals,rtrsvd")]
        methods: Vec<Method>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Tolerance for trsvd/rtrsvd; defaults to --tol.
        #[arg(long)]
        svd_tol: Option<f64>,
        #[arg(long)]
        side: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compress a dataset tensor and report RSE and compression ratio.
    Compress {
        #[arg(long, value_enum)]
        dataset: Dataset,
        #[arg(long)]
        path: PathBuf,
        /// Keep only the first N CIFAR-10 images.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',')]
        proj: Option<Vec<usize>>,
        #[arg(long)]
        save_factors: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose noisy copies of a clean cube and score against the clean one.
    Denoise {
        /// Clean DTEN cube; a synthetic low-rank cube is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "64,64,16")]
        synthetic: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "3,3,2")]
        synthetic_ranks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "none,20,10,0")]
        snr: Vec<SnrLevel>,
        #[arg(long, value_delimiter = ',', default_value = "rtrals")]
        methods: Vec<Method>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Defaults to half of each spatial extent, spectral mode kept.
        #[arg(long, value_delimiter = ',')]
        proj: Option<Vec<usize>>,
        /// Write PGM band images here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the full tensor from a factor file.
    Reconstruct {
        #[arg(long)]
        factors: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Relative error of an approximation against a reference.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        approx: PathBuf,
    },
    /// Write a synthetic tensor of exact TR-rank.
    Synth {
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dataset {
    Cifar10,
    Coil100,
    Dten,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Svd,
    Random,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Target RSE for TR-SVD; relative-change stop for ALS.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 1)]
    batch: usize,
    /// ALS starting point.
    #[arg(long, value_enum, default_value = "svd")]
    init: InitArg,
    /// ALS starting points; the best fit is kept.
    #[arg(long, default_value_t = 1)]
    starts: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            ranks: self.ranks.clone(),
            tolerance: self.tol,
            max_sweeps: self.max_sweeps,
            seed: self.seed,
            sgd_step: self.step,
            sgd_batch: self.batch,
            als_init: match self.init {
                InitArg::Svd => AlsInit::Svd,
                InitArg::Random => AlsInit::Random,
            },
            als_starts: self.starts,
        };
        cfg.validate().map_err(|e| BenchError::Args(e.to_string()))?;
        if self.batch == 0 || self.step.is_nan() || self.step < 0.0 {
            return Err(BenchError::Args(
                "--step must be non-negative and --batch positive".into(),
            ));
        }
        Ok(cfg)
    }
}

fn projection(method: Method, proj: &Option<Vec<usize>>, shape: &[usize], seed: u64) -> Result<Option<ProjectionSpec>> {
    match proj {
        Some(k) => {
            let spec = ProjectionSpec::new(k.clone(), seed);
            spec.validate(shape).map_err(|e| BenchError::Args(e.to_string()))?;
            Ok(Some(spec))
        }
        None if method.is_randomized() => Err(BenchError::Args(format!("{method} needs --proj"))),
        None => Ok(None),
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string()
}

fn emit(records: &[RunRecord], out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => write_csv(BufWriter::new(File::create(path)?), records),
        None => write_csv(io::stdout().lock(), records),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose {
            input,
            method,
            solver,
            proj,
            side,
            save_factors,
            out,
        } => {
            let x = load_tensor(&input, side)?;
            let cfg = solver.config()?;
            let spec = projection(method, &proj, x.shape(), cfg.seed)?;
            let (rec, factors) = compress_dataset(&x, &dataset_name(&input), method, &cfg, spec.as_ref())?;
            if let Some(path) = save_factors {
                save_trng(&path, &factors)?;
            }
            emit(&[rec], &out)
        }
        Command::Sweep {
            input,
            sizes,
            methods,
            solver,
            svd_tol,
            side,
            out,
        } => {
            let x = load_tensor(&input, side)?;
            let cfg = solver.config()?;
            if svd_tol.is_some_and(|t| t.is_nan() || t < 0.0) {
                return Err(BenchError::Args("--svd-tol must be non-negative".into()));
            }
            let records = sweep_projection(&x, &dataset_name(&input), &sizes, &methods, &cfg, svd_tol, cfg.seed)?;
            emit(&records, &out)
        }
        Command::Compress {
            dataset,
            path,
            limit,
            method,
            solver,
            proj,
            save_factors,
            out,
        } => {
            let (x, name) = match dataset {
                Dataset::Cifar10 => (read_cifar10(&path, limit)?, "cifar10".to_string()),
                Dataset::Coil100 => (read_coil100(&path)?, "coil100".to_string()),
                Dataset::Dten => (
                    load_dten(&path).map_err(|e| BenchError::Data {
                        path: path.clone(),
                        reason: e.to_string(),
                    })?,
                    dataset_name(&path),
                ),
            };
            let cfg = solver.config()?;
            let spec = projection(method, &proj, x.shape(), cfg.seed)?;
            let (rec, factors) = compress_dataset(&x, &name, method, &cfg, spec.as_ref())?;
            if let Some(p) = save_factors {
                save_trng(&p, &factors)?;
            }
            emit(&[rec], &out)
        }
        Command::Denoise {
            input,
            synthetic,
            synthetic_ranks,
            snr,
            methods,
            solver,
            proj,
            dump_dir,
            out,
        } => {
            let cfg = solver.config()?;
            let (clean, name) = match &input {
                Some(p) => (load_tensor(p, None)?, dataset_name(p)),
                None => (
                    low_rank_tensor(&synthetic, &synthetic_ranks, cfg.seed)
                        .map_err(|e| BenchError::Args(e.to_string()))?,
                    "synthetic".to_string(),
                ),
            };
            let sizes = proj.unwrap_or_else(|| {
                let sh = clean.shape();
                let half = |i: usize| i.div_ceil(2);
                sh.iter()
                    .enumerate()
                    .map(|(n, &i)| if n < 2 { half(i) } else { i })
                    .collect()
            });
            let spec = ProjectionSpec::new(sizes, cfg.seed);
            spec.validate(clean.shape())
                .map_err(|e| BenchError::Args(e.to_string()))?;
            let noises: Vec<NoiseSpec> = snr
                .iter()
                .map(|l| NoiseSpec {
                    snr_db: l.0,
                    seed: cfg.seed,
                })
                .collect();
            let records = denoise_hsi(&clean, &name, &noises, &methods, &cfg, &spec, dump_dir.as_deref())?;
            emit(&records, &out)
        }
        Command::Reconstruct { factors, output } => {
            let f = load_trng(&factors).map_err(|e| BenchError::Data {
                path: factors.clone(),
                reason: e.to_string(),
            })?;
            save_dten(&output, &f.reconstruct_full())?;
            Ok(())
        }
        Command::Metrics { reference, approx } => {
            let read = |p: &PathBuf| {
                load_dten(p).map_err(|e| BenchError::Data {
                    path: p.clone(),
                    reason: e.to_string(),
                })
            };
            let (x, y) = (read(&reference)?, read(&approx)?);
            if x.shape() != y.shape() {
                return Err(BenchError::Args(format!(
                    "shapes differ: {:?} vs {:?}",
                    x.shape(),
                    y.shape()
                )));
            }
            let value = rse(&x, &y)?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "rse,{value:e}")?;
            Ok(())
        }
        Command::Synth {
            dims,
            ranks,
            seed,
            output,
        } => {
            let x = low_rank_tensor(&dims, &ranks, seed).map_err(|e| BenchError::Args(e.to_string()))?;
            save_dten(&output, &x)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
