use serde::{Deserialize, Serialize};

use crate::instance::TrainingInstance;
use crate::prompts::{toolset_json, Template};
use crate::textio::{FIRST_TASK_KEY, SECOND_TASK_KEY};

/// The three pieces a rendered prompt is assembled from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub system_and_task_text: &'static str,
    pub query_block: String,
    pub toolset_block: String,
}

impl PromptBundle {
    pub fn for_instance(instance: &TrainingInstance) -> Self {
        Self {
            system_and_task_text: Template::RankAndInvoke.text(),
            query_block: instance.query.clone(),
            toolset_block: toolset_json(&instance.toolset),
        }
    }

    pub fn render(&self) -> String {
        Template::RankAndInvoke.render(&[
            ("input_query", &self.query_block),
            ("tools", &self.toolset_block),
        ])
    }
}

/// One line of a rendered corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedExample {
    pub instance_id: String,
    pub prompt: String,
    pub gold: String,
}

impl RenderedExample {
    pub fn new(instance: &TrainingInstance) -> Self {
        Self {
            instance_id: instance.id.clone(),
            prompt: render_prompt(instance),
            gold: render_gold(instance),
        }
    }
}

pub fn render_prompt(instance: &TrainingInstance) -> String {
    PromptBundle::for_instance(instance).render()
}

/// The expected model answer: a two-key JSON object whose first value is the
/// rank label and whose second is a one-element list holding the invocation.
pub fn render_gold(instance: &TrainingInstance) -> String {
    let ranking = serde_json::to_string(&instance.rank_label).expect("strings serialize");
    let call = serde_json::to_string(&[instance.gold_call.to_string()]).expect("strings serialize");
    let first = serde_json::to_string(FIRST_TASK_KEY).expect("strings serialize");
    let second = serde_json::to_string(SECOND_TASK_KEY).expect("strings serialize");
    format!("{{{first}: {ranking}, {second}: {call}}}")
}
