//! Prompt templates with `{name}` placeholders.
//!
//! Built-in templates are compiled in from `prompts/`; a directory holding
//! files of the same names overrides them one by one.

use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    /// Action-as-language baseline.
    Plain,
    Localize,
    Plan,
    Imagine,
    Decide,
    /// Active perception: imagination and decision over the probe views.
    Perceive,
    /// Accept-or-replan check used by the imagination enhancement.
    Verify,
}

impl PromptKind {
    pub const ALL: [PromptKind; 7] = [
        PromptKind::Plain,
        PromptKind::Localize,
        PromptKind::Plan,
        PromptKind::Imagine,
        PromptKind::Decide,
        PromptKind::Perceive,
        PromptKind::Verify,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            PromptKind::Plain => "plain.txt",
            PromptKind::Localize => "localize.txt",
            PromptKind::Plan => "plan.txt",
            PromptKind::Imagine => "imagine.txt",
            PromptKind::Decide => "decide.txt",
            PromptKind::Perceive => "perceive.txt",
            PromptKind::Verify => "verify.txt",
        }
    }

    /// Request tag recorded by the gateway.
    pub fn tag(self) -> &'static str {
        match self {
            PromptKind::Plain => "plain",
            PromptKind::Localize => "Q_loc",
            PromptKind::Plan => "Q_plan",
            PromptKind::Imagine => "Q_imgn",
            PromptKind::Decide => "Q_DM",
            PromptKind::Perceive => "Q_imgn+Q_DM",
            PromptKind::Verify => "Q_verify",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            PromptKind::Plain => include_str!("../prompts/plain.txt"),
            PromptKind::Localize => include_str!("../prompts/localize.txt"),
            PromptKind::Plan => include_str!("../prompts/plan.txt"),
            PromptKind::Imagine => include_str!("../prompts/imagine.txt"),
            PromptKind::Decide => include_str!("../prompts/decide.txt"),
            PromptKind::Perceive => include_str!("../prompts/perceive.txt"),
            PromptKind::Verify => include_str!("../prompts/verify.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("template `{template}` uses `{{{name}}}` but no value was supplied")]
    MissingValue { template: &'static str, name: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    templates: Vec<(PromptKind, String)>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            templates: PromptKind::ALL.iter().map(|k| (*k, k.builtin().to_string())).collect(),
        }
    }
}

impl PromptSet {
    /// Built-ins, overridden by any same-named file in `dir`.
    pub fn load(dir: Option<&Path>) -> Result<Self, PromptError> {
        let mut set = Self::default();
        if let Some(dir) = dir {
            for (kind, text) in &mut set.templates {
                let path = dir.join(kind.file_name());
                if path.exists() {
                    *text = fs::read_to_string(&path).map_err(|e| PromptError::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                }
            }
        }
        Ok(set)
    }

    pub fn with_template(mut self, kind: PromptKind, text: impl Into<String>) -> Self {
        if let Some(slot) = self.templates.iter_mut().find(|(k, _)| *k == kind) {
            slot.1 = text.into();
        }
        self
    }

    pub fn template(&self, kind: PromptKind) -> &str {
        &self.templates.iter().find(|(k, _)| *k == kind).expect("every kind present").1
    }

    pub fn render(&self, kind: PromptKind, values: &[(&str, &str)]) -> Result<String, PromptError> {
        render(kind.file_name(), self.template(kind), values)
    }
}

/// Substitutes `{name}` for every `name` made of lowercase letters and
/// underscores. Other braces are copied through.
pub fn render(template_name: &'static str, template: &str, values: &[(&str, &str)]) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let name_len = after
            .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
            .unwrap_or(after.len());
        if name_len > 0 && after[name_len..].starts_with('}') {
            let name = &after[..name_len];
            let value = values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| PromptError::MissingValue {
                    template: template_name,
                    name: name.to_string(),
                })?;
            out.push_str(value);
            rest = &after[name_len + 1..];
        } else {
            out.push('{');
            rest = after;
        }
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fills_placeholders_and_keeps_other_braces() {
        let s = render("t", "a {x} {Y} {} {x_y}", &[("x", "1"), ("x_y", "2")]).unwrap();
        assert_eq!(s, "a 1 {Y} {} 2");
    }

    #[test]
    fn missing_value_is_reported() {
        let e = render("t", "{goal}", &[]).unwrap_err();
        assert!(matches!(e, PromptError::MissingValue { ref name, .. } if name == "goal"));
    }

    #[test]
    fn builtin_plain_prompt_uses_the_documented_placeholders() {
        let t = PromptSet::default();
        let text = t.template(PromptKind::Plain);
        for p in ["{instruction}", "{gimbal}", "{memory}", "{observation}", "{commands}"] {
            assert!(text.contains(p), "{p}");
        }
    }

    #[test]
    fn every_template_mentions_the_step() {
        let t = PromptSet::default();
        for k in PromptKind::ALL {
            assert!(t.template(k).contains("Step {step}"), "{:?}", k);
        }
    }
}
