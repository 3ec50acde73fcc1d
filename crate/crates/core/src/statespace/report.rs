// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Evidence attached to a failed condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    Point { x: Vec<f64> },
    Parameter { name: String, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub witness: Witness,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionStatus {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    pub checked_conditions: Vec<ConditionStatus>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        Self::new()
    }
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            verdict: Verdict::Valid,
            violations: Vec::new(),
            checked_conditions: Vec::new(),
        }
    }

    pub fn pass(&mut self, id: &str, detail: impl Into<String>) {
        self.push(id, Status::Pass, detail.into());
    }

    pub fn inconclusive(&mut self, id: &str, detail: impl Into<String>) {
        self.push(id, Status::Inconclusive, detail.into());
        if self.verdict == Verdict::Valid {
            self.verdict = Verdict::Inconclusive;
        }
    }

    pub fn fail(&mut self, id: &str, witness: Witness, detail: impl Into<String>) {
        let detail = detail.into();
        self.violations.push(Violation {
            condition: id.to_string(),
            witness,
            detail: detail.clone(),
        });
        self.push(id, Status::Fail, detail);
        self.verdict = Verdict::Invalid;
    }

    fn push(&mut self, id: &str, status: Status, detail: String) {
        self.checked_conditions.push(ConditionStatus {
            id: id.to_string(),
            status,
            detail,
        });
    }

    /// Appends the conditions of `other`, keeping the worst verdict.
    pub fn merge(&mut self, other: ValidationReport) {
        self.verdict = match (self.verdict, other.verdict) {
            (Verdict::Invalid, _) | (_, Verdict::Invalid) => Verdict::Invalid,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Valid,
        };
        self.violations.extend(other.violations);
        self.checked_conditions.extend(other.checked_conditions);
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn status_of(&self, id: &str) -> Option<Status> {
        let mut found = None;
        for c in self.checked_conditions.iter().filter(|c| c.id == id) {
            found = Some(match (found, c.status) {
                (Some(Status::Fail), _) | (_, Status::Fail) => Status::Fail,
                (Some(Status::Inconclusive), _) | (_, Status::Inconclusive) => Status::Inconclusive,
                _ => Status::Pass,
            });
        }
        found
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .violations
            .iter()
            .map(|v| v.condition.as_str())
            .collect();
        ids.dedup();
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_tracks_worst_status() {
        let mut r = ValidationReport::new();
        r.pass("a", "");
        assert!(r.is_valid());
        r.inconclusive("b", "sampled");
        assert_eq!(r.verdict, Verdict::Inconclusive);
        r.fail("c", Witness::Point { x: vec![0.0] }, "bad");
        assert_eq!(r.verdict, Verdict::Invalid);
        r.inconclusive("d", "");
        assert_eq!(r.verdict, Verdict::Invalid);
        assert_eq!(r.failed_ids(), vec!["c"]);
        assert_eq!(r.status_of("b"), Some(Status::Inconclusive));
        assert_eq!(r.status_of("zzz"), None);
    }

    #[test]
    fn merge_keeps_worst() {
        let mut a = ValidationReport::new();
        a.pass("x", "");
        let mut b = ValidationReport::new();
        b.inconclusive("y", "");
        a.merge(b);
        assert_eq!(a.verdict, Verdict::Inconclusive);
        assert_eq!(a.checked_conditions.len(), 2);
    }

    #[test]
    fn json_shape() {
        let mut r = ValidationReport::new();
        r.fail(
            "simplex.drift_inward",
            Witness::Parameter {
                name: "beta[1] + B[1][0]".into(),
                value: -0.1,
            },
            "must be > 0",
        );
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "invalid");
        assert_eq!(v["violations"][0]["witness"]["kind"], "parameter");
    }
}
