use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{generate_scene, make_caption, make_question, render_features, Scene};
use crate::canonical_json;
use crate::error::{Error, Result};
use crate::numcore::{splitmix64, RngStream};

/// One example `(v, Q, C, A, d)`. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqaRecord {
    pub id: String,
    pub image_features: Vec<f64>,
    pub question: String,
    pub caption: String,
    pub answer: String,
    pub category: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    fn code(self) -> u64 {
        match self {
            Split::Train => 1,
            Split::Val => 2,
            Split::Test => 3,
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::config(format!("unknown split {other:?} (train|val|test)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_records: usize,
    pub sigma_v: f64,
    pub seed: u64,
    pub split: Split,
}

impl SynthConfig {
    pub fn new(n_records: usize, sigma_v: f64, seed: u64, split: Split) -> Self {
        Self {
            n_records,
            sigma_v,
            seed,
            split,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_records < 1 {
            return Err(Error::config("n_records must be at least 1"));
        }
        if !(self.sigma_v >= 0.0) || !self.sigma_v.is_finite() {
            return Err(Error::config(format!(
                "sigma_v must be finite and >= 0, got {}",
                self.sigma_v
            )));
        }
        Ok(())
    }

    /// Stream for record `index`; independent of `n_records`.
    fn record_rng(&self, index: usize) -> RngStream {
        RngStream::child(splitmix64(self.seed ^ self.split.code()), index as u64)
    }
}

/// Scene and record number `index` of the configured split.
pub fn generate_example(cfg: &SynthConfig, index: usize) -> (Scene, VqaRecord) {
    let mut rng = cfg.record_rng(index);
    let scene = generate_scene(&mut rng);
    let q = make_question(&scene, &mut rng);
    let image_features = render_features(&scene, &mut rng, cfg.sigma_v);
    let record = VqaRecord {
        id: format!("{}-{index:06}", cfg.split.name()),
        image_features,
        question: q.text,
        caption: make_caption(&scene),
        answer: q.answer,
        category: q.category,
    };
    (scene, record)
}

pub fn generate_dataset(cfg: &SynthConfig) -> Result<Vec<VqaRecord>> {
    cfg.validate()?;
    Ok((0..cfg.n_records).map(|i| generate_example(cfg, i).1).collect())
}

/// JSON lines, one record per line, keys in declaration order, floats with
/// 17 significant digits.
pub fn write_dataset(records: &[VqaRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for r in records {
        buf.extend(canonical_json::to_vec(r).map_err(|e| Error::data(format!("record {}: {e}", r.id)))?);
        buf.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<VqaRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub(crate) fn parse_dataset(text: &str) -> Result<Vec<VqaRecord>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 1;
            let record: VqaRecord =
                serde_json::from_str(line).map_err(|e| Error::data(format!("line {line_no}: {e}")))?;
            if let Some(pos) = record.image_features.iter().position(|x| !x.is_finite()) {
                return Err(Error::data(format!(
                    "line {line_no}: non-finite image feature at {pos}"
                )));
            }
            Ok(record)
        })
        .collect()
}
