//! Rule-based classification of user utterances into dialog intents.
//!
//! Utterances are normalized to lowercase alphanumeric tokens and matched
//! against ordered keyword patterns. A pattern is a contiguous run of tokens;
//! a token ending in `*` matches any token with that prefix. Precedence is
//! Why > What > Continue, and anything unmatched is out of scope.

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::loe::Intent;

/// Raw user input, kept byte-exact for the transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance<'a> {
    pub raw: &'a str,
}

impl<'a> From<&'a str> for Utterance<'a> {
    fn from(raw: &'a str) -> Self {
        Self { raw }
    }
}

/// Lowercases, replaces every non-alphanumeric character with a space and
/// splits on whitespace.
pub fn normalize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PatternToken {
    Exact(String),
    Prefix(String),
}

impl PatternToken {
    fn matches(&self, token: &str) -> bool {
        match self {
            PatternToken::Exact(t) => t == token,
            PatternToken::Prefix(p) => token.starts_with(p.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("empty pattern in {0} rules")]
    EmptyPattern(&'static str),
    #[error("{0} rules must contain at least one pattern")]
    NoPatterns(&'static str),
}

/// A token or multi-token stem, written as plain text (`"tell me the error"`,
/// `"reason*"`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    tokens: Vec<PatternToken>,
}

impl Pattern {
    pub fn parse(text: &str) -> Self {
        let tokens = text
            .split_whitespace()
            .map(|t| {
                let t = t.to_lowercase();
                match t.strip_suffix('*') {
                    Some(p) if !p.is_empty() => PatternToken::Prefix(p.to_owned()),
                    _ => PatternToken::Exact(t),
                }
            })
            .collect();
        Self { tokens }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn matches(&self, tokens: &[String]) -> bool {
        let n = self.tokens.len();
        n > 0
            && tokens.len() >= n
            && tokens
                .windows(n)
                .any(|w| w.iter().zip(&self.tokens).all(|(t, p)| p.matches(t)))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match t {
                PatternToken::Exact(s) => f.write_str(s)?,
                PatternToken::Prefix(s) => write!(f, "{s}*")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Pattern::parse(&s))
    }
}

impl JsonSchema for Pattern {
    fn schema_name() -> std::borrow::Cow<'static, str> {
        "Pattern".into()
    }

    fn json_schema(generator: &mut schemars::SchemaGenerator) -> schemars::Schema {
        String::json_schema(generator)
    }
}

/// Keyword patterns per intent. Serialized as `{what: [...], why: [...], continue: [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub what: Vec<Pattern>,
    pub why: Vec<Pattern>,
    #[serde(rename = "continue", default)]
    pub continue_: Vec<Pattern>,
}

impl RuleSet {
    pub fn validate(&self) -> Result<(), RuleError> {
        for (name, list) in [("what", &self.what), ("why", &self.why), ("continue", &self.continue_)] {
            if list.iter().any(Pattern::is_empty) {
                return Err(RuleError::EmptyPattern(name));
            }
        }
        if self.what.is_empty() {
            return Err(RuleError::NoPatterns("what"));
        }
        if self.why.is_empty() {
            return Err(RuleError::NoPatterns("why"));
        }
        Ok(())
    }

    pub fn classify_tokens(&self, tokens: &[String]) -> Intent {
        let any = |list: &[Pattern]| list.iter().any(|p| p.matches(tokens));
        if any(&self.why) {
            Intent::Why
        } else if any(&self.what) {
            Intent::What
        } else if any(&self.continue_) {
            Intent::Continue
        } else {
            Intent::OutOfScope
        }
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        default_ruleset()
    }
}

fn patterns(list: &[&str]) -> Vec<Pattern> {
    list.iter().map(|p| Pattern::parse(p)).collect()
}

pub fn default_ruleset() -> RuleSet {
    RuleSet {
        what: patterns(&[
            "what",
            "which error",
            "tell me the error",
            "what happened",
            "what is wrong",
            "what is the mistake",
            "which",
            "whats",
            "wrong",
            "mistake*",
            "problem*",
            "issue*",
            "describe",
        ]),
        why: patterns(&["why", "reason*", "how come", "because of what", "explain why", "caus*"]),
        continue_: patterns(&[
            "continue",
            "proceed",
            "go on",
            "resume",
            "carry on",
            "keep going",
            "try again",
            "retry",
        ]),
    }
}

pub fn classify(utterance: &Utterance<'_>, rules: &RuleSet) -> Intent {
    rules.classify_tokens(&normalize(utterance.raw))
}

/// One labeled line of a paraphrase corpus (`<label>\t<utterance>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledUtterance {
    pub label: Intent,
    pub text: String,
}

#[derive(Debug, Error)]
#[error("corpus line {line}: {message}")]
pub struct CorpusError {
    pub line: usize,
    pub message: String,
}

pub fn parse_corpus(text: &str) -> Result<Vec<LabeledUtterance>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let err = |message: String| CorpusError { line: i + 1, message };
            let (label, text) = l.split_once('\t').ok_or_else(|| err("missing tab".into()))?;
            let label = match label {
                "What" => Intent::What,
                "Why" => Intent::Why,
                "Continue" => Intent::Continue,
                "OutOfScope" => Intent::OutOfScope,
                other => return Err(err(format!("unknown label `{other}`"))),
            };
            Ok(LabeledUtterance {
                label,
                text: text.to_owned(),
            })
        })
        .collect()
}

/// The bundled 24-line corpus; the first four lines are the utterances quoted
/// in the original study's sample dialog.
pub const BUNDLED_CORPUS: &str = include_str!("../data/intent_corpus.tsv");

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn c(text: &str) -> Intent {
        classify(&Utterance::from(text), &default_ruleset())
    }

    #[test]
    fn normalization() {
        assert_eq!(
            normalize("Why are you NOT able...?"),
            toks(&["why", "are", "you", "not", "able"])
        );
        assert_eq!(normalize("  continue "), toks(&["continue"]));
        assert_eq!(normalize("What is the error?"), toks(&["what", "is", "the", "error"]));
        assert!(normalize("").is_empty());
        assert!(normalize(" ?! ").is_empty());
    }

    #[test]
    fn classification_examples() {
        assert_eq!(c("What is the mistake with this"), Intent::What);
        assert_eq!(c("Why are you not able to reach the cube"), Intent::Why);
        assert_eq!(c("hello robot nice weather"), Intent::OutOfScope);
        assert_eq!(c("what is the error"), Intent::What);
        assert_eq!(c("why has the error occurred"), Intent::Why);
        assert_eq!(c("continue"), Intent::Continue);
        assert_eq!(c(""), Intent::OutOfScope);
    }

    #[test]
    fn why_beats_what() {
        assert_eq!(c("why, what happened"), Intent::Why);
        assert_eq!(c("what is the reason"), Intent::Why);
    }

    #[test]
    fn prefix_and_phrase_patterns() {
        let p = Pattern::parse("reason*");
        assert!(p.matches(&toks(&["the", "reasons"])));
        assert!(!p.matches(&toks(&["treason"])));
        let p = Pattern::parse("go on");
        assert!(p.matches(&toks(&["ok", "go", "on"])));
        assert!(!p.matches(&toks(&["go", "away", "on"])));
        assert_eq!(Pattern::parse("Tell  me the Error").to_string(), "tell me the error");
        assert!(Pattern::parse("").is_empty());
    }

    #[test]
    fn ruleset_validation() {
        default_ruleset().validate().unwrap();
        let mut r = default_ruleset();
        r.why.clear();
        assert_eq!(r.validate(), Err(RuleError::NoPatterns("why")));
        let mut r = default_ruleset();
        r.continue_.push(Pattern::parse("   "));
        assert_eq!(r.validate(), Err(RuleError::EmptyPattern("continue")));
    }

    #[test]
    fn ruleset_document() {
        let r: RuleSet = toml::from_str(
            r#"
what = ["what", "tell me the error"]
why = ["why", "reason*"]
continue = ["continue"]
"#,
        )
        .unwrap();
        assert_eq!(r.classify_tokens(&normalize("give me reasons")), Intent::Why);
        assert_eq!(r.classify_tokens(&normalize("describe it")), Intent::OutOfScope);
        let json = serde_json::to_string(&default_ruleset()).unwrap();
        assert_eq!(serde_json::from_str::<RuleSet>(&json).unwrap(), default_ruleset());
    }

    #[test]
    fn corpus_parses() {
        let corpus = parse_corpus(BUNDLED_CORPUS).unwrap();
        assert_eq!(corpus.len(), 24);
        assert!(parse_corpus("Maybe\thello").is_err());
        assert!(parse_corpus("no tab here").is_err());
    }
}
