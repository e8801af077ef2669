//! Training, evaluation, checkpoints, the ablation runner and the CLI.

mod ablate;
mod checkpoint;
pub mod cli;
mod config;
mod eval;
mod gradcheck;
mod train;

pub use ablate::{ablate, AblationConfig, AblationReport, AblationRow, DataSpec, ModeTable, REFERENCE_DELTAS};
pub use checkpoint::{Checkpoint, FORMAT_VERSION};
pub use config::{beta_schedule, TrainConfig};
pub use eval::{argmax, consensus_accuracy, evaluate, evaluate_with_gt_captions, EvalReport};
pub use gradcheck::{check_gradients, GRADCHECK_TOLERANCE};
pub use train::{train, EpochLog, TrainOutput};
