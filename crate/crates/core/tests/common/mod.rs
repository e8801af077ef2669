#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use lvvqa::encoders::Vocabulary;
use lvvqa::latentvqa::{EncodedExample, LvVqaModel, ModelConfig};
use lvvqa::synthdata::{build_category_table, generate_dataset, Split, SynthConfig, VqaRecord};

pub fn records(n: usize, seed: u64) -> Vec<VqaRecord> {
    generate_dataset(&SynthConfig::new(n, 0.5, seed, Split::Train)).unwrap()
}

pub fn vocab_for(records: &[VqaRecord]) -> Vocabulary {
    Vocabulary::build(
        records
            .iter()
            .flat_map(|r| [r.question.as_str(), r.caption.as_str(), r.answer.as_str()]),
    )
}

/// Model over the synthetic table and vocabulary of `records`.
pub fn model_for(records: &[VqaRecord], config: ModelConfig, seed: u64) -> LvVqaModel {
    let table = build_category_table(records).unwrap();
    LvVqaModel::new(config, table, vocab_for(records), seed).unwrap()
}

pub fn encode_all(model: &LvVqaModel, records: &[VqaRecord]) -> Vec<EncodedExample> {
    records.iter().map(|r| model.encode(r).unwrap()).collect()
}

/// Every combination of the two latent flags.
pub fn flag_combinations() -> [(bool, bool); 4] {
    [(false, false), (true, false), (false, true), (true, true)]
}
