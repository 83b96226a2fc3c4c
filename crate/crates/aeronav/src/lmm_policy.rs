//! The action-as-language baseline: one model call per step, answered with a
//! command and a rationale, over a 30-moment memory window.

use std::sync::Arc;

use aeronav_core::policy::{command_list, parse_action, Decision, MemoryMoment, MemoryWindow, Policy, PolicyError};
use aeronav_core::{Action, SemanticObservation};

use crate::gateway::{GatewayHandle, GatewayRequest, Message, Role};
use crate::prompts::{PromptKind, PromptSet};

pub const SYSTEM_PROMPT: &str = "You control an aerial delivery drone in a city. Follow the requested answer format exactly.";
pub const FALLBACK_RATIONALE: &str = "parse-failure fallback";
const REPROMPT: &str = "Your reply did not name a valid command. Reply again with exactly one command from the list, in the form ACTION: <command>.";

pub(crate) fn gimbal_text(obs: &SemanticObservation) -> String {
    format!("{:.1}", obs.camera_pose.pitch)
}

/// Entity lines of an observation folded into one line.
pub(crate) fn one_line(text: &str) -> String {
    text.lines().map(str::trim).collect::<Vec<_>>().join("; ")
}

/// Text after `LABEL:` on the first line carrying that label, if any.
pub(crate) fn labeled_line<'a>(text: &'a str, label: &str) -> Option<&'a str> {
    text.lines().find_map(|l| {
        let l = l.trim().trim_start_matches(['*', '#', '-', ' ']);
        let head = l.get(..label.len())?;
        if head.eq_ignore_ascii_case(label) && l[label.len()..].trim_start().starts_with(':') {
            Some(l[label.len()..].trim_start()[1..].trim())
        } else {
            None
        }
    })
}

/// Everything after the first `RATIONALE:` label, else the whole reply.
pub(crate) fn rationale_of(text: &str) -> String {
    let lower = text.to_ascii_lowercase();
    match lower.find("rationale:") {
        Some(i) => text[i + "rationale:".len()..].trim().to_string(),
        None => text.trim().to_string(),
    }
}

/// The command named by a reply: the `ACTION:` line when present, otherwise
/// the first command mentioned anywhere.
pub fn parse_reply_action(text: &str) -> Option<Action> {
    labeled_line(text, "action").and_then(parse_action).or_else(|| parse_action(text))
}

pub(crate) fn ask(gateway: &GatewayHandle, kind: PromptKind, messages: Vec<Message>) -> Result<String, PolicyError> {
    gateway
        .complete(&GatewayRequest::new(kind.tag(), messages))
        .map_err(|e| PolicyError::Backend(e.to_string()))
}

pub(crate) fn render(prompts: &PromptSet, kind: PromptKind, values: &[(&str, &str)]) -> Result<String, PolicyError> {
    prompts
        .render(kind, values)
        .map_err(|e| PolicyError::Backend(e.to_string()))
}

pub struct LanguagePolicy {
    gateway: GatewayHandle,
    prompts: Arc<PromptSet>,
    instruction: Option<String>,
    memory: MemoryWindow,
}

impl LanguagePolicy {
    pub fn new(gateway: GatewayHandle, prompts: Arc<PromptSet>) -> Self {
        Self {
            gateway,
            prompts,
            instruction: None,
            memory: MemoryWindow::default(),
        }
    }

    pub fn memory(&self) -> &MemoryWindow {
        &self.memory
    }

    fn memory_text(&self) -> String {
        if self.memory.is_empty() {
            return String::from("(no earlier moments; no actions taken yet)");
        }
        self.memory
            .entries()
            .into_iter()
            .map(|(i, m)| {
                let action = m.action.map_or("none", Action::name);
                format!(
                    "moment {i}: observation: {}; action: {action}; rationale: {}",
                    m.observation,
                    one_line(&m.rationale)
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl Policy for LanguagePolicy {
    fn name(&self) -> &str {
        "lmm"
    }

    fn requires_backend(&self) -> bool {
        true
    }

    fn reset(&mut self, instruction: &str, _initial: &SemanticObservation) -> Result<(), PolicyError> {
        self.instruction = Some(instruction.to_string());
        self.memory.clear();
        Ok(())
    }

    fn next_action(&mut self, observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        let instruction = self.instruction.clone().ok_or(PolicyError::NotReset)?;
        let obs_text = observation.to_prompt_text();
        let prompt = render(
            &self.prompts,
            PromptKind::Plain,
            &[
                ("step", &observation.step.to_string()),
                ("instruction", &instruction),
                ("gimbal", &gimbal_text(observation)),
                ("memory", &self.memory_text()),
                ("observation", &obs_text),
                ("commands", &command_list()),
            ],
        )?;
        let mut messages = vec![Message::system(SYSTEM_PROMPT), Message::user(prompt)];
        let first = ask(&self.gateway, PromptKind::Plain, messages.clone())?;
        let decision = match parse_reply_action(&first) {
            Some(a) => Decision::new(a, rationale_of(&first)),
            None => {
                messages.push(Message::text(Role::Assistant, first));
                messages.push(Message::user(REPROMPT));
                let second = ask(&self.gateway, PromptKind::Plain, messages)?;
                match parse_reply_action(&second) {
                    Some(a) => Decision::new(a, rationale_of(&second)),
                    None => Decision::new(Action::MoveForth, FALLBACK_RATIONALE),
                }
            }
        };
        self.memory.push(MemoryMoment {
            observation: one_line(&obs_text),
            action: Some(decision.action),
            rationale: decision.rationale.clone(),
        });
        Ok(decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_line_wins_over_prose() {
        let r = "I considered move_back.\nACTION: turn_left\nRATIONALE: the tower is on the left";
        assert_eq!(parse_reply_action(r), Some(Action::TurnLeft));
        assert_eq!(rationale_of(r), "the tower is on the left");
    }

    #[test]
    fn labeled_line_tolerates_markdown() {
        assert_eq!(labeled_line("**Action:** move up", "action"), Some("** move up"));
        assert_eq!(parse_reply_action("**Action:** move up"), Some(Action::MoveUp));
        assert_eq!(labeled_line("no label here", "action"), None);
    }
}
