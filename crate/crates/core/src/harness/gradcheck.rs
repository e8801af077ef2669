use crate::encoders::Vocabulary;
use crate::error::Result;
use crate::latentvqa::{batch_loss_and_grad, LvVqaModel, LvVqaParams, ModelConfig};
use crate::numcore::{grad_check, splitmix64, GradCheckReport, RngStream};
use crate::synthdata::{build_category_table, generate_dataset, Split, SynthConfig};

pub const GRADCHECK_TOLERANCE: f64 = 1e-4;
const BATCH: usize = 4;
const NOISE_STREAM: u64 = 0x6763_6b;

/// Finite-difference check of the batch loss gradient on the first four
/// synthetic training records for `seed`, with frozen posterior noise and
/// `beta = 1`.
pub fn check_gradients(config: &ModelConfig, seed: u64, h: f64) -> Result<GradCheckReport> {
    let records = generate_dataset(&SynthConfig::new(BATCH, 0.5, seed, Split::Train))?;
    let table = build_category_table(&records)?;
    let vocab = Vocabulary::build(records.iter().flat_map(|r| [r.question.as_str(), r.caption.as_str()]));
    let model = LvVqaModel::new(config.clone(), table, vocab, seed)?;
    let examples = records.iter().map(|r| model.encode(r)).collect::<Result<Vec<_>>>()?;
    let batch: Vec<_> = examples.iter().collect();
    let mut rng = RngStream::new(splitmix64(seed ^ NOISE_STREAM));
    let noise: Vec<Vec<f64>> = (0..BATCH).map(|_| rng.normal_vec(config.d_z)).collect();

    let loss = |p: &LvVqaParams| {
        let mut g = p.zeros_like();
        batch_loss_and_grad(p, &model.config, &model.table, &batch, &noise, 1.0, &mut g).map(|l| (l.loss, g))
    };
    loss(&model.params)?;
    grad_check(
        |p: &LvVqaParams| loss(p).expect("batch validated above"),
        &model.params,
        h,
    )
}
