//! Pass/fail records for verification runs.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `left ≤ right + tolerance`.
    LessEqual,
    /// `|left − right| ≤ tolerance`.
    Equal,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    /// The mathematical statement being checked.
    pub paper_anchor: String,
    /// SHA-256 of the canonical description of the check inputs.
    pub inputs_digest: String,
    pub left_value: f64,
    pub right_value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        check_id: &str,
        paper_anchor: &str,
        inputs: &str,
        left: f64,
        right: f64,
        tolerance: f64,
        relation: Relation,
    ) -> Self {
        let pass = match relation {
            Relation::LessEqual => left <= right + tolerance,
            Relation::Equal => (left - right).abs() <= tolerance,
        };
        Self {
            check_id: check_id.into(),
            paper_anchor: paper_anchor.into(),
            inputs_digest: digest(inputs),
            left_value: left,
            right_value: right,
            tolerance,
            relation,
            pass,
        }
    }

    pub fn le(check_id: &str, anchor: &str, inputs: &str, left: f64, right: f64, tolerance: f64) -> Self {
        Self::new(check_id, anchor, inputs, left, right, tolerance, Relation::LessEqual)
    }

    pub fn eq(check_id: &str, anchor: &str, inputs: &str, left: f64, right: f64, tolerance: f64) -> Self {
        Self::new(check_id, anchor, inputs, left, right, tolerance, Relation::Equal)
    }

    /// One-line human summary.
    pub fn line(&self) -> String {
        let op = match self.relation {
            Relation::LessEqual => "<=",
            Relation::Equal => "~=",
        };
        format!(
            "{} {}: {:.6e} {op} {:.6e} (tol {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.check_id,
            self.left_value,
            self.right_value,
            self.tolerance
        )
    }
}

pub fn digest(inputs: &str) -> String {
    hex::encode(Sha256::digest(inputs.as_bytes()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn push(&mut self, record: CheckRecord) {
        self.summary.total += 1;
        if record.pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.checks.push(record);
    }

    pub fn extend<I: IntoIterator<Item = CheckRecord>>(&mut self, records: I) {
        records.into_iter().for_each(|r| self.push(r));
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(CheckRecord::le("a", "x", "", 1.0, 1.0, 0.0).pass);
        assert!(!CheckRecord::le("a", "x", "", 1.1, 1.0, 0.05).pass);
        assert!(CheckRecord::eq("a", "x", "", 1.0, 1.05, 0.06).pass);
        assert!(!CheckRecord::eq("a", "x", "", f64::NAN, 1.0, 1.0).pass);
    }

    #[test]
    fn summary_counts() {
        let mut r = VerificationReport::default();
        r.push(CheckRecord::le("a", "x", "s=1", 0.0, 1.0, 0.0));
        r.push(CheckRecord::le("b", "x", "s=1", 2.0, 1.0, 0.0));
        assert_eq!(r.summary, Summary { total: 2, passed: 1, failed: 1 });
        assert!(!r.all_pass());
        assert_eq!(r.checks[0].inputs_digest, r.checks[1].inputs_digest);
        assert_eq!(r.checks[0].inputs_digest.len(), 64);
    }
}
