use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{evaluate_model, EvalReport, LatentSource};
use super::train::train_selecting;
use super::TrainConfig;
use crate::canonical_json;
use crate::error::{Error, Result};
use crate::latentvqa::CombineMode;
use crate::synthdata::{generate_dataset, Split, SynthConfig, VqaRecord};

/// Full-scale accuracy gains over the baseline, in accuracy points, quoted
/// for comparison in the report footer.
pub const REFERENCE_DELTAS: [(&str, f64); 3] = [("caption", 0.70), ("category", 0.36), ("combined", 0.94)];

/// `(name, use_caption_latent, use_category_latent)`
const VARIANTS: [(&str, bool, bool); 4] = [
    ("baseline", false, false),
    ("+caption", true, false),
    ("+category", false, true),
    ("full", true, true),
];
const GT_CAPTION_ROW: &str = "full w/ gt captions";
const MODES: [CombineMode; 2] = [CombineMode::Mixture, CombineMode::Product];

/// Synthetic train/val data used by the `ablate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub n_train: usize,
    pub n_val: usize,
    pub sigma_v: f64,
    pub seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            n_train: 8000,
            n_val: 1000,
            sigma_v: 0.5,
            seed: 7,
        }
    }
}

impl DataSpec {
    pub fn generate(&self) -> Result<(Vec<VqaRecord>, Vec<VqaRecord>)> {
        let train = generate_dataset(&SynthConfig::new(self.n_train, self.sigma_v, self.seed, Split::Train))?;
        let val = generate_dataset(&SynthConfig::new(self.n_val, self.sigma_v, self.seed, Split::Val))?;
        Ok((train, val))
    }
}

/// Config file of the `ablate` command. The latent flags and seed of
/// `train` are overridden per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub train: TrainConfig,
    pub data: DataSpec,
    pub seeds: Vec<u64>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            data: DataSpec::default(),
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

impl AblationConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn run(&self) -> Result<AblationReport> {
        let (train, val) = self.data.generate()?;
        ablate(&self.train, &self.seeds, &train, &val)
    }
}

/// Validation results of one configuration across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub name: String,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// `mean - baseline mean`, in accuracy points.
    pub delta_points: f64,
    pub per_category: BTreeMap<String, f64>,
    pub category_accuracy: f64,
    pub mean_kl: f64,
    pub best_epochs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub combine_mode: CombineMode,
    pub rows: Vec<AblationRow>,
}

impl ModeTable {
    pub fn row(&self, name: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub seeds: Vec<u64>,
    pub n_train: usize,
    pub n_val: usize,
    pub eval_k: usize,
    pub tables: Vec<ModeTable>,
    pub reference_deltas: BTreeMap<String, f64>,
}

/// Trains the four latent configurations once per seed and evaluates each
/// on `val` in both combine modes, plus the full model with `z` drawn from
/// the caption posterior. Best epochs are selected per combine mode.
pub fn ablate(base: &TrainConfig, seeds: &[u64], train: &[VqaRecord], val: &[VqaRecord]) -> Result<AblationReport> {
    if seeds.is_empty() {
        return Err(Error::config("ablation needs at least one seed"));
    }
    // results[mode][row][seed]
    let mut results: Vec<Vec<Vec<(EvalReport, usize)>>> = vec![vec![Vec::new(); VARIANTS.len() + 1]; MODES.len()];

    for (v, &(name, caption, category)) in VARIANTS.iter().enumerate() {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.model.use_caption_latent = caption;
            cfg.model.use_category_latent = category;
            let modes: &[CombineMode] = if category { &MODES } else { &MODES[..1] };
            log::info!("training {name} seed {seed}");
            let (_, selections) = train_selecting(&cfg, train, val, modes)?;
            for (m, &mode) in MODES.iter().enumerate() {
                let sel = selections.iter().find(|s| s.mode == mode).unwrap_or(&selections[0]);
                let report = evaluate_model(&sel.model, seed, val, base.eval_k, Some(mode), LatentSource::Prior)?;
                results[m][v].push((report, sel.epoch));
                if caption && category {
                    let gt = evaluate_model(&sel.model, seed, val, base.eval_k, Some(mode), LatentSource::Caption)?;
                    results[m][VARIANTS.len()].push((gt, sel.epoch));
                }
            }
        }
    }

    let tables = MODES
        .iter()
        .zip(results)
        .map(|(&mode, rows)| {
            let names = VARIANTS.iter().map(|v| v.0).chain([GT_CAPTION_ROW]);
            let mut rows: Vec<AblationRow> = names.zip(rows).map(|(n, r)| summarize(n, &r)).collect();
            let base_mean = rows[0].mean;
            for row in &mut rows {
                row.delta_points = 100.0 * (row.mean - base_mean);
            }
            ModeTable {
                combine_mode: mode,
                rows,
            }
        })
        .collect();

    Ok(AblationReport {
        seeds: seeds.to_vec(),
        n_train: train.len(),
        n_val: val.len(),
        eval_k: base.eval_k,
        tables,
        reference_deltas: REFERENCE_DELTAS.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
    })
}

fn summarize(name: &str, runs: &[(EvalReport, usize)]) -> AblationRow {
    let accuracies: Vec<f64> = runs.iter().map(|(r, _)| r.accuracy).collect();
    let (mean, std_error) = mean_and_std_error(&accuracies);
    let mean_of = |f: &dyn Fn(&EvalReport) -> f64| runs.iter().map(|(r, _)| f(r)).sum::<f64>() / runs.len() as f64;
    let mut per_category = BTreeMap::new();
    for cat in runs[0].0.per_category.keys() {
        per_category.insert(
            cat.clone(),
            mean_of(&|r| r.per_category.get(cat).copied().unwrap_or(0.0)),
        );
    }
    AblationRow {
        name: name.to_string(),
        mean,
        std_error,
        delta_points: 0.0,
        per_category,
        category_accuracy: mean_of(&|r| r.category_accuracy),
        mean_kl: mean_of(&|r| r.mean_kl),
        best_epochs: runs.iter().map(|(_, e)| *e).collect(),
        accuracies,
    }
}

/// Sample mean and `s / sqrt(n)`; the error is 0 for a single value.
pub(crate) fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl AblationReport {
    pub fn table(&self, mode: CombineMode) -> Option<&ModeTable> {
        self.tables.iter().find(|t| t.combine_mode == mode)
    }

    /// Aligned plain-text rendering; accuracies in percent.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "validation accuracy (%), mean ± standard error over {} seed(s); {} train / {} val records; K = {}",
            self.seeds.len(),
            self.n_train,
            self.n_val,
            self.eval_k
        );
        for table in &self.tables {
            let cats: Vec<&String> = table.rows[0].per_category.keys().collect();
            let _ = writeln!(out, "\ncombine mode: {}", table.combine_mode.name());
            let mut header = format!("{:<20} {:>16} {:>8}", "configuration", "accuracy", "delta");
            for c in &cats {
                let _ = write!(header, " {:>8}", c);
            }
            let _ = write!(header, " {:>8} {:>8}", "cat_acc", "kl");
            let _ = writeln!(out, "{header}");
            for row in &table.rows {
                let acc = format!("{:.2} ± {:.2}", 100.0 * row.mean, 100.0 * row.std_error);
                let mut line = format!("{:<20} {:>16} {:>+8.2}", row.name, acc, row.delta_points);
                for c in &cats {
                    let _ = write!(line, " {:>8.2}", 100.0 * row.per_category[*c]);
                }
                let _ = write!(line, " {:>8.2} {:>8.3}", 100.0 * row.category_accuracy, row.mean_kl);
                let _ = writeln!(out, "{line}");
            }
        }
        let refs: Vec<String> = REFERENCE_DELTAS.iter().map(|(k, v)| format!("{k} +{v:.2}")).collect();
        let _ = writeln!(
            out,
            "\nreference deltas at full scale (accuracy points): {}",
            refs.join(", ")
        );
        out
    }

    /// Writes `report.txt` and `report.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let txt = dir.join("report.txt");
        std::fs::write(&txt, self.to_text()).map_err(|e| Error::io(&txt, e))?;
        let json = dir.join("report.json");
        let mut body = canonical_json::to_string(self)?;
        body.push('\n');
        std::fs::write(&json, body).map_err(|e| Error::io(&json, e))
    }
}
