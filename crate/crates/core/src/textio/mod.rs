//! Prompt and gold rendering for the two-task format, and parsing of model
//! responses back into [`RankedOutput`](crate::instance::RankedOutput).

pub mod extract;
pub mod invocation;
mod parse;
mod render;

pub use parse::{parse_model_output, FIRST_TASK_KEY, SECOND_TASK_KEY};
pub use render::{render_gold, render_prompt, PromptBundle, RenderedExample};
