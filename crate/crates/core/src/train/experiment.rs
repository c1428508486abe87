use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{save_mesh, to_obj_string, TriMesh};
use crate::metrics::{chamfer, score_mesh, EvalReport, MeshScore, MIN_SAMPLES};
use crate::model::OccupancyModel;
use crate::rng::derive_seed;

use super::adaptation::adapt;
use super::data::{Dataset, TestShape};
use super::log::{pretrain_csv, TrainLog};
use super::pretrain::{pretrain_source, PretrainOutcome};
use super::reconstruct::reconstruct;
use super::{stream, RunConfig};

pub const PRETRAINED: &str = "pretrained";

/// Reconstructions and scores of one model on the test shapes.
#[derive(Clone, Debug)]
pub struct VariantResult {
    pub name: String,
    pub model: OccupancyModel,
    pub log: Option<TrainLog>,
    /// One entry per test shape, `None` where extraction failed.
    pub meshes: Vec<Option<TriMesh>>,
    pub scores: Vec<MeshScore>,
    /// Names of the test shapes that could not be reconstructed.
    pub failures: Vec<String>,
}

impl VariantResult {
    /// Mean scores over all test shapes; `None` when any shape failed.
    pub fn report(&self, cfg: &RunConfig) -> Option<EvalReport> {
        if !self.failures.is_empty() {
            return None;
        }
        EvalReport::new(self.scores.clone(), cfg.eval.samples, cfg.seed).ok()
    }

    /// `(mean P2S, mean CD)`, `None` when any shape failed.
    pub fn means(&self) -> Option<(f64, f64)> {
        if !self.failures.is_empty() || self.scores.is_empty() {
            return None;
        }
        let n = self.scores.len() as f64;
        Some((
            self.scores.iter().map(|s| s.p2s).sum::<f64>() / n,
            self.scores.iter().map(|s| s.cd).sum::<f64>() / n,
        ))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub seed: u64,
    pub pretrain: PretrainOutcome,
    /// The pretrained-only row first, then the requested variants in order.
    pub variants: Vec<VariantResult>,
}

impl ExperimentOutcome {
    pub fn variant(&self, name: &str) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("variant,mesh,p2s,cd,failed\n");
        for v in &self.variants {
            for sc in &v.scores {
                let _ = writeln!(s, "{},{},{:.6},{:.6},0", v.name, sc.name, sc.p2s, sc.cd);
            }
            for f in &v.failures {
                let _ = writeln!(s, "{},{},,,1", v.name, f);
            }
        }
        s
    }

    /// Plain-text table of mean scores; failing variants are marked with `‡`.
    pub fn table(&self) -> String {
        let mut s = format!("seed {}\n{:<16} {:>9} {:>9}  failures\n", self.seed, "method", "P2S", "CD");
        for v in &self.variants {
            let total = v.scores.len() + v.failures.len();
            match v.means() {
                Some((p, c)) => {
                    let _ = writeln!(s, "{:<16} {p:>9.5} {c:>9.5}  0/{total}", v.name);
                }
                None => {
                    let _ = writeln!(s, "{:<16} {:>9} {:>9}  {}/{total}", v.name, "‡", "‡", v.failures.len());
                }
            }
        }
        s
    }
}

/// Reconstructs and scores every test shape with `model`.
pub fn evaluate(cfg: &RunConfig, name: &str, model: &OccupancyModel, levels: &[usize], tests: &[TestShape]) -> Result<VariantResult> {
    let mut meshes = Vec::with_capacity(tests.len());
    let mut scores = Vec::new();
    let mut failures = Vec::new();
    for (i, t) in tests.iter().enumerate() {
        let r = reconstruct(model, levels, &t.raster, cfg.eval.grid, cfg.eval.min_fraction)?;
        match &r.mesh {
            Some(m) => scores.push(score_mesh(
                &t.name,
                m,
                &t.mesh,
                cfg.eval.samples,
                derive_seed(cfg.seed, stream::EVAL, i as u64),
            )?),
            None => failures.push(t.name.clone()),
        }
        meshes.push(r.mesh);
    }
    Ok(VariantResult {
        name: name.to_string(),
        model: model.clone(),
        log: None,
        meshes,
        scores,
        failures,
    })
}

/// Chamfer distance of one held-out reconstruction, when monitoring is on.
pub fn monitor_cd(cfg: &RunConfig, model: &OccupancyModel, levels: &[usize], shape: &TestShape) -> Result<Option<f64>> {
    if cfg.adaptation.monitor_grid == 0 {
        return Ok(None);
    }
    let r = reconstruct(model, levels, &shape.raster, cfg.adaptation.monitor_grid, cfg.eval.min_fraction)?;
    r.mesh
        .map(|m| chamfer(&m, &shape.mesh, MIN_SAMPLES, derive_seed(cfg.seed, stream::EVAL, 0)))
        .transpose()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn persist_variant(dir: &Path, v: &VariantResult, tests: &[TestShape]) -> Result<()> {
    let mesh_dir = dir.join("meshes").join(&v.name);
    std::fs::create_dir_all(&mesh_dir).map_err(|e| Error::io(&mesh_dir, e))?;
    for (m, t) in v.meshes.iter().zip(tests) {
        if let Some(m) = m {
            save_mesh(m, &mesh_dir.join(format!("{}.obj", t.name)))?;
        }
    }
    let ckpt = dir.join("checkpoints");
    std::fs::create_dir_all(&ckpt).map_err(|e| Error::io(&ckpt, e))?;
    v.model.params().save(&ckpt.join(format!("{}.ckpt", v.name)))?;
    if let Some(log) = &v.log {
        log.save(&dir.join(format!("{}_log.csv", v.name)))?;
    }
    Ok(())
}

/// Dataset, pretraining, one adaptation per requested variant, then
/// reconstruction and scoring of the held-out target shapes. With an output
/// directory every stage is written as soon as it finishes.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let out = cfg.output_dir.as_deref();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        cfg.save(&dir.join("config.toml"))?;
    }
    let data = Dataset::generate(cfg)?;
    let pre = pretrain_source(cfg, &data)?;
    if let Some(dir) = out {
        write_text(&dir.join("pretrain_log.csv"), &pretrain_csv(&pre.log))?;
    }
    let mut outcome = ExperimentOutcome {
        seed: cfg.seed,
        pretrain: pre.clone(),
        variants: Vec::new(),
    };
    let base = evaluate(cfg, PRETRAINED, &pre.model, &pre.model.all_levels(), &data.target_test)?;
    if let Some(dir) = out {
        persist_variant(dir, &base, &data.target_test)?;
    }
    outcome.variants.push(base);
    for name in &cfg.variants {
        let variant = cfg.variant(name)?;
        let monitor = |m: &OccupancyModel, levels: &[usize]| monitor_cd(cfg, m, levels, &data.target_test[0]);
        let adapted = adapt(cfg, &data.source, &data.target_train, &pre.model, &variant, monitor)?;
        let levels = variant.levels(adapted.model.config().levels);
        let mut result = evaluate(cfg, name, &adapted.model, &levels, &data.target_test)?;
        result.log = Some(adapted.log);
        if let Some(dir) = out {
            persist_variant(dir, &result, &data.target_test)?;
        }
        outcome.variants.push(result);
    }
    if let Some(dir) = out {
        write_text(&dir.join("metrics.csv"), &outcome.to_csv())?;
        write_text(&dir.join("summary.txt"), &outcome.table())?;
    }
    Ok(outcome)
}

/// OBJ text of every reconstruction, in variant then test-shape order.
pub fn mesh_bytes(outcome: &ExperimentOutcome) -> Vec<String> {
    outcome
        .variants
        .iter()
        .flat_map(|v| v.meshes.iter().map(|m| m.as_ref().map(to_obj_string).unwrap_or_default()))
        .collect()
}
