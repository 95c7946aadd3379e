//! Run records and scoring of raw responses.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use slbench_core::evaluator::{
    evaluate, parse_response, EvalReport, LengthVerdict, MissingError, WrongError,
};
use slbench_core::{Class, Rule};

use crate::benchmark::{Datapoint, Setting};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorLabels {
    pub missing: Vec<MissingError>,
    pub wrong: Vec<WrongError>,
}

/// One model answer to one datapoint, with its scores. The raw response is
/// kept verbatim so that records can be re-scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub model: String,
    pub class: Class,
    pub k: usize,
    pub alphabet_size: usize,
    pub num_rules: usize,
    pub prompt_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    /// `None` when the model could not be reached.
    pub raw_response: Option<String>,
    pub parsed_rules: Vec<Rule>,
    #[serde(default)]
    pub parse_warnings: Vec<String>,
    #[serde(default)]
    pub parse_error: Option<String>,
    #[serde(default)]
    pub transport_error: Option<String>,
    pub precision: f64,
    pub recall: f64,
    pub compatible: bool,
    #[serde(default)]
    pub ambiguity: bool,
    pub errors: ErrorLabels,
    #[serde(default)]
    pub description_length: Option<LengthVerdict>,
    pub attempts: u32,
    #[serde(default)]
    pub started_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub usage: Option<Value>,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunRecord {
    /// A record for `p` scored from `raw_response` (or scored as a failure
    /// when there is none). Timing and usage fields are left empty.
    pub fn scored(p: &Datapoint, model: &str, prompt: &str, raw_response: Option<String>) -> Self {
        let mut r = Self {
            id: p.id.clone(),
            model: model.to_string(),
            class: p.class,
            k: p.k,
            alphabet_size: p.alphabet.len(),
            num_rules: p.num_rules,
            prompt_sha256: sha256_hex(prompt),
            prompt: Some(prompt.to_string()),
            raw_response,
            parsed_rules: Vec::new(),
            parse_warnings: Vec::new(),
            parse_error: None,
            transport_error: None,
            precision: 0.0,
            recall: 0.0,
            compatible: false,
            ambiguity: false,
            errors: ErrorLabels {
                missing: Vec::new(),
                wrong: Vec::new(),
            },
            description_length: None,
            attempts: 0,
            started_at: None,
            finished_at: None,
            usage: None,
        };
        r.rescore(p);
        r
    }

    /// Recomputes every derived field from the raw response.
    pub fn rescore(&mut self, p: &Datapoint) {
        let truth = p.ruleset();
        let report = match &self.raw_response {
            None => {
                self.parsed_rules.clear();
                self.parse_warnings.clear();
                self.parse_error = None;
                EvalReport::unparseable(&truth)
            }
            Some(text) => match parse_response(text, &p.alphabet, p.k, p.class) {
                Ok(predicted) => {
                    self.parsed_rules = predicted.rules.clone();
                    self.parse_warnings = predicted.parse_warnings.clone();
                    self.parse_error = None;
                    evaluate(&truth, &predicted, &p.dataset())
                        .unwrap_or_else(|_| EvalReport::unparseable(&truth))
                }
                Err(e) => {
                    self.parsed_rules.clear();
                    self.parse_warnings.clear();
                    self.parse_error = Some(e.to_string());
                    EvalReport::unparseable(&truth)
                }
            },
        };
        self.precision = report.precision;
        self.recall = report.recall;
        self.compatible = report.compatible;
        self.ambiguity = report.ambiguity_flag;
        self.errors = ErrorLabels {
            missing: report.missing_errors,
            wrong: report.wrong_errors,
        };
        self.description_length = report.description_length;
    }

    pub fn setting(&self) -> Setting {
        Setting {
            class: self.class,
            k: self.k,
            alphabet_size: self.alphabet_size,
            num_rules: self.num_rules,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{build_datapoint, GridCell};
    use crate::client::rules_block;

    fn point() -> Datapoint {
        let cell = GridCell {
            class: Class::ROsl,
            k: 2,
            alphabet_size: 5,
            num_rules: 3,
            count: 1,
        };
        build_datapoint(&cell, 0, 3, 2).unwrap()
    }

    #[test]
    fn echo_scores_perfectly() {
        let p = point();
        let r = RunRecord::scored(&p, "m", "prompt", Some(rules_block(&p)));
        assert_eq!((r.precision, r.recall, r.compatible), (1.0, 1.0, true));
        assert!(r.errors.missing.is_empty() && r.errors.wrong.is_empty());
        assert_eq!(r.prompt_sha256, sha256_hex("prompt"));
    }

    #[test]
    fn untagged_response_scores_zero() {
        let p = point();
        let r = RunRecord::scored(&p, "m", "prompt", Some("I think a -> b".into()));
        assert_eq!((r.precision, r.recall, r.compatible), (0.0, 0.0, false));
        assert!(r.parse_error.is_some());
        assert_eq!(r.errors.missing.len(), p.num_rules);
    }

    #[test]
    fn json_has_wire_fields() {
        let p = point();
        let r = RunRecord::scored(&p, "m", "prompt", Some(rules_block(&p)));
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "id",
            "model",
            "prompt_sha256",
            "raw_response",
            "parsed_rules",
            "precision",
            "recall",
            "compatible",
            "errors",
            "attempts",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: RunRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn sha_reference() {
        assert_eq!(
            sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
