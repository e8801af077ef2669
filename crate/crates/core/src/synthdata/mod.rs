//! Procedural stand-in for an image/question/caption corpus.
//!
//! Scenes hold one to four coloured shapes. Each record carries a noisy
//! 15-dim histogram of the scene as its image feature, one templated
//! question with its ground-truth answer and answer category, and an exact
//! caption listing every object.

mod caption;
mod dataset;
mod features;
mod question;
mod scene;
mod table;

pub use caption::make_caption;
pub use dataset::{generate_dataset, generate_example, read_dataset, write_dataset, Split, SynthConfig, VqaRecord};
pub use features::{render_features, FEATURE_DIM};
pub use question::{make_question, make_question_from, Question, Template};
pub use scene::{generate_scene, Color, Object, Scene, Shape, Size};
pub use table::build_category_table;
