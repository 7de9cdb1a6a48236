//! Template-based rendering of the robot's error explanations.
//!
//! Each level is composed from per-error fragments:
//!
//! | level   | text                                              |
//! |---------|---------------------------------------------------|
//! | Low     | `low_text`                                        |
//! | Medium1 | `verbose_descriptor`                              |
//! | Medium2 | `terse_descriptor` + justification + remedy       |
//! | High    | `detailed_descriptor` + justification + remedy    |
//!
//! The justification continues the descriptor's sentence (joined with a
//! space); the remedy starts a new sentence (joined with `". "`, or a space
//! when the preceding text already ends in terminal punctuation).
//!
//! With [`default_templates`], the IncorrectItem/High and OutOfRange/Medium2
//! cells are synthesized by this rule; the other six reproduce the original
//! sample dialog verbatim, inconsistencies included.

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loe::{ExplanationLevel, JustificationLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub enum ErrorKind {
    IncorrectItem,
    OutOfRange,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 2] = [ErrorKind::IncorrectItem, ErrorKind::OutOfRange];
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::IncorrectItem => "IncorrectItem",
            ErrorKind::OutOfRange => "OutOfRange",
        })
    }
}

/// Text fragments for one error kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ErrorTemplates {
    pub terse_descriptor: String,
    pub verbose_descriptor: String,
    /// Descriptor used in front of a justification at High; falls back to
    /// `verbose_descriptor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detailed_descriptor: Option<String>,
    pub justification_clause: String,
    pub remedy_clause: String,
}

impl ErrorTemplates {
    fn detailed(&self) -> &str {
        self.detailed_descriptor.as_deref().unwrap_or(&self.verbose_descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExplanationTemplateSet {
    pub low_text: String,
    pub fallback_text: String,
    pub incorrect_item: ErrorTemplates,
    pub out_of_range: ErrorTemplates,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template field `{0}` is empty")]
pub struct TemplateError(pub String);

impl ExplanationTemplateSet {
    pub fn for_kind(&self, kind: ErrorKind) -> &ErrorTemplates {
        match kind {
            ErrorKind::IncorrectItem => &self.incorrect_item,
            ErrorKind::OutOfRange => &self.out_of_range,
        }
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        let check = |name: String, v: &str| {
            if v.trim().is_empty() {
                Err(TemplateError(name))
            } else {
                Ok(())
            }
        };
        check("low_text".into(), &self.low_text)?;
        check("fallback_text".into(), &self.fallback_text)?;
        for (key, t) in [
            ("incorrect_item", &self.incorrect_item),
            ("out_of_range", &self.out_of_range),
        ] {
            check(format!("{key}.terse_descriptor"), &t.terse_descriptor)?;
            check(format!("{key}.verbose_descriptor"), &t.verbose_descriptor)?;
            if let Some(d) = &t.detailed_descriptor {
                check(format!("{key}.detailed_descriptor"), d)?;
            }
            check(format!("{key}.justification_clause"), &t.justification_clause)?;
            check(format!("{key}.remedy_clause"), &t.remedy_clause)?;
        }
        Ok(())
    }
}

impl Default for ExplanationTemplateSet {
    fn default() -> Self {
        default_templates()
    }
}

pub fn default_templates() -> ExplanationTemplateSet {
    ExplanationTemplateSet {
        low_text: "Error occurred".into(),
        fallback_text: "I am sorry, please ask different question.".into(),
        incorrect_item: ErrorTemplates {
            terse_descriptor: "Error".into(),
            verbose_descriptor: "Error, I am unable to put the item on the shelf".into(),
            detailed_descriptor: None,
            justification_clause: "due to incorrect item".into(),
            remedy_clause: "Swap the cube".into(),
        },
        out_of_range: ErrorTemplates {
            terse_descriptor: "Error".into(),
            verbose_descriptor: "Error I'm unable to reach the item on table".into(),
            detailed_descriptor: Some("Error I'm unable to reach the item on the table".into()),
            justification_clause: "because it is outside my camera vision".into(),
            remedy_clause: "Please move it inside the square".into(),
        },
    }
}

fn join_sentence(mut head: String, next: &str) -> String {
    if head.ends_with(['.', '!', '?']) {
        head.push(' ');
    } else {
        head.push_str(". ");
    }
    head.push_str(next);
    head
}

fn justified(descriptor: &str, t: &ErrorTemplates) -> String {
    join_sentence(format!("{descriptor} {}", t.justification_clause), &t.remedy_clause)
}

pub fn render(kind: ErrorKind, level: ExplanationLevel, templates: &ExplanationTemplateSet) -> String {
    let t = templates.for_kind(kind);
    match level {
        ExplanationLevel::Low => templates.low_text.clone(),
        ExplanationLevel::Medium1 => t.verbose_descriptor.clone(),
        ExplanationLevel::Medium2 => justified(&t.terse_descriptor, t),
        ExplanationLevel::High => justified(t.detailed(), t),
    }
}

pub fn fallback_utterance(templates: &ExplanationTemplateSet) -> &str {
    &templates.fallback_text
}

/// Whether `level` carries a justification (and therefore a remedy).
pub fn is_justified(level: ExplanationLevel) -> bool {
    level.justification() == JustificationLevel::High
}

#[cfg(test)]
mod tests {
    use super::*;
    use ErrorKind::*;
    use ExplanationLevel::*;

    #[test]
    fn sample_dialog_cells() {
        let t = default_templates();
        assert_eq!(render(IncorrectItem, Low, &t), "Error occurred");
        assert_eq!(
            render(IncorrectItem, Medium2, &t),
            "Error due to incorrect item. Swap the cube"
        );
        assert_eq!(
            render(OutOfRange, High, &t),
            "Error I'm unable to reach the item on the table because it is outside my camera vision. Please move it inside the square"
        );
        assert_eq!(
            render(IncorrectItem, Medium1, &t),
            "Error, I am unable to put the item on the shelf"
        );
        assert_eq!(
            render(OutOfRange, Medium1, &t),
            "Error I'm unable to reach the item on table"
        );
    }

    #[test]
    fn fallback() {
        let mut t = default_templates();
        assert_eq!(fallback_utterance(&t), "I am sorry, please ask different question.");
        t.fallback_text = "Rephrase please".into();
        assert_eq!(fallback_utterance(&t), "Rephrase please");
    }

    #[test]
    fn remedy_after_terminal_punctuation() {
        let mut t = default_templates();
        t.incorrect_item.justification_clause = "due to incorrect item!".into();
        assert_eq!(
            render(IncorrectItem, Medium2, &t),
            "Error due to incorrect item! Swap the cube"
        );
    }

    #[test]
    fn empty_field_rejected() {
        let mut t = default_templates();
        t.out_of_range.remedy_clause = " ".into();
        assert_eq!(t.validate(), Err(TemplateError("out_of_range.remedy_clause".into())));
        default_templates().validate().unwrap();
    }

    #[test]
    fn template_document() {
        let doc = toml::to_string(&default_templates()).unwrap();
        let back: ExplanationTemplateSet = toml::from_str(&doc).unwrap();
        assert_eq!(back, default_templates());
    }
}
