use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use uda_recon::adapt::gradcheck_losses;
use uda_recon::autodiff::ParamStore;
use uda_recon::geometry::{read_mesh, save_mesh};
use uda_recon::metrics::{score_mesh, EvalReport};
use uda_recon::model::OccupancyModel;
use uda_recon::raster::rasterize;
use uda_recon::train::{adapt, monitor_cd, pretrain_csv, pretrain_source, reconstruct, run_experiment, Dataset, RunConfig};
use uda_recon::{Error, Result};

#[derive(Parser)]
#[command(name = "uda-recon", version, about = "Single-view occupancy reconstruction with unsupervised domain adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used for missing keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic source and target shapes.
    Dataset {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Also write mask and depth images as PGM.
        #[arg(long)]
        pgm: bool,
    },
    /// Train on the labelled source shapes only.
    Pretrain {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Adapt a pretrained checkpoint to the target shapes.
    Adapt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// `full` or one ablation flag such as `no_mmd`.
        #[arg(long, default_value = "full")]
        variant: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a mesh from the rendering of an input mesh.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Mesh whose rendering is the input view.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "full")]
        variant: String,
        /// Grid resolution; defaults to the configured evaluation grid.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Write the input mask and depth as PGM next to the output.
        #[arg(long)]
        pgm: bool,
    },
    /// Score reconstructions against references (files or directories of OBJ/PLY with matching names).
    Eval {
        #[arg(long)]
        recon: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = uda_recon::metrics::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare analytic loss gradients against central differences.
    Gradcheck {
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Full pipeline: dataset, pretraining, adaptation variants, evaluation.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated variants, e.g. `full,no_mmd`.
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<String>>,
        /// Comma-separated seeds; each run goes to `<out>/seed_<n>`.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
}

fn load_model(cfg: &RunConfig, path: &Path) -> Result<OccupancyModel> {
    OccupancyModel::from_params(cfg.model.clone(), &ParamStore::load(path)?)
}

fn mesh_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("obj" | "ply")))
        .collect();
    files.sort();
    Ok(files)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Dataset { common, out, pgm } => {
            let cfg = common.load()?;
            Dataset::generate(&cfg)?.write(&out, pgm)?;
            println!("wrote dataset to {}", out.display());
        }
        Command::Pretrain { common, out } => {
            let cfg = common.load()?;
            let data = Dataset::generate(&cfg)?;
            let pre = pretrain_source(&cfg, &data)?;
            pre.model.params().save(&out)?;
            let log = out.with_extension("csv");
            std::fs::write(&log, pretrain_csv(&pre.log)).map_err(|e| Error::io(&log, e))?;
            let last = pre.log.last().map_or(0.0, |e| e.accuracy);
            println!("epochs {} accuracy {last:.4} converged {}", pre.log.len(), pre.converged);
        }
        Command::Adapt {
            common,
            checkpoint,
            variant,
            out,
        } => {
            let cfg = common.load()?;
            let data = Dataset::generate(&cfg)?;
            let model = load_model(&cfg, &checkpoint)?;
            let v = cfg.variant(&variant)?;
            let monitor = |m: &OccupancyModel, levels: &[usize]| monitor_cd(&cfg, m, levels, &data.target_test[0]);
            let adapted = adapt(&cfg, &data.source, &data.target_train, &model, &v, monitor)?;
            adapted.model.params().save(&out)?;
            adapted.log.save(&out.with_extension("csv"))?;
            println!("adapted {variant} for {} epochs", adapted.log.epochs.len());
        }
        Command::Reconstruct {
            common,
            checkpoint,
            input,
            variant,
            grid,
            out,
            pgm,
        } => {
            let cfg = common.load()?;
            let model = load_model(&cfg, &checkpoint)?;
            let levels = cfg.variant(&variant)?.levels(model.config().levels);
            let mut mesh = read_mesh(&input)?;
            mesh.normalize()?;
            let raster = Arc::new(rasterize(&mesh, cfg.model.raster_resolution)?);
            if pgm {
                raster.write_pgm(&out.with_extension("mask.pgm"), &out.with_extension("depth.pgm"))?;
            }
            let r = reconstruct(&model, &levels, &raster, grid.unwrap_or(cfg.eval.grid), cfg.eval.min_fraction)?;
            match (&r.mesh, &r.failure) {
                (Some(m), _) => {
                    save_mesh(m, &out)?;
                    println!("wrote {} ({} faces)", out.display(), m.faces.len());
                }
                (None, reason) => {
                    println!("‡ reconstruction failed: {}", reason.as_deref().unwrap_or("unknown"));
                    return Ok(false);
                }
            }
        }
        Command::Eval {
            recon,
            reference,
            samples,
            seed,
        } => {
            let recon_files = mesh_files(&recon)?;
            let mut scores = Vec::new();
            for r in &recon_files {
                let reference_path = if reference.is_dir() {
                    reference.join(r.file_name().expect("file"))
                } else {
                    reference.clone()
                };
                let name = r.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
                scores.push(score_mesh(name, &read_mesh(r)?, &read_mesh(&reference_path)?, samples, seed)?);
            }
            let report = EvalReport::new(scores, samples, seed)?;
            print!("{}", report.to_csv());
            println!("# distances are {}", report.convention);
        }
        Command::Gradcheck { seeds } => {
            let mut ok = true;
            println!("{:<8} {:>5} {:>12} {:>8}", "term", "seed", "max_rel_err", "coords");
            for seed in 0..seeds {
                for c in gradcheck_losses(seed)? {
                    let pass = c.report.max_rel_error < 1e-3;
                    ok &= pass;
                    println!(
                        "{:<8} {:>5} {:>12.3e} {:>8} {}",
                        c.term,
                        c.seed,
                        c.report.max_rel_error,
                        c.report.coords_checked,
                        if pass { "ok" } else { "FAIL" }
                    );
                }
            }
            return Ok(ok);
        }
        Command::Experiment {
            common,
            out,
            variants,
            seeds,
        } => {
            let mut cfg = common.load()?;
            if let Some(v) = variants {
                cfg.variants = v;
            }
            if let Some(o) = out {
                cfg.output_dir = Some(o);
            }
            let seeds = seeds.unwrap_or_else(|| vec![cfg.seed]);
            let root = cfg.output_dir.clone();
            for &seed in &seeds {
                let mut run_cfg = cfg.clone();
                run_cfg.seed = seed;
                if seeds.len() > 1 {
                    run_cfg.output_dir = root.as_ref().map(|r| r.join(format!("seed_{seed}")));
                }
                let outcome = run_experiment(&run_cfg)?;
                print!("{}", outcome.table());
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
