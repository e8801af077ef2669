use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::canonical_json;
use crate::encoders::Vocabulary;
use crate::error::{Error, Result};
use crate::latentvqa::{CategoryTable, LvVqaModel, LvVqaParams};
use crate::numcore::Tensor;

pub const FORMAT_VERSION: u32 = 1;

/// A trained model together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub train_config: TrainConfig,
    pub model: LvVqaModel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format_version: u32,
    train_config: TrainConfig,
    category_table: CategoryTable,
    vocabulary: Vocabulary,
    params: BTreeMap<String, Tensor>,
}

impl Checkpoint {
    pub fn new(train_config: TrainConfig, model: LvVqaModel) -> Self {
        Self { train_config, model }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CheckpointFile {
            format_version: FORMAT_VERSION,
            train_config: self.train_config.clone(),
            category_table: self.model.table.clone(),
            vocabulary: self.model.vocab.clone(),
            params: self.model.params.to_map(),
        };
        Ok(canonical_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::config(format!(
                "unsupported checkpoint format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        let config = file.train_config.model.clone();
        config.validate()?;
        let table = file.category_table;
        let vocab = file.vocabulary;
        let params = LvVqaParams::from_map(
            &config,
            vocab.len(),
            table.n_answers(),
            table.n_categories(),
            &file.params,
        )?;
        Ok(Self {
            train_config: file.train_config,
            model: LvVqaModel {
                config,
                table,
                vocab,
                params,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::config(format!("{}: {j}", path.display())),
            other => other,
        })
    }
}
