//! Decision records emitted by the greedy constructions.

use serde::Serialize;
use std::io::Write;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRecord {
    pub stage: String,
    pub candidate: String,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub decision: String,
    /// Precision level of the bracket (grid cells of the operator bound).
    pub depth: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditLog {
    pub records: Vec<AuditRecord>,
}

impl AuditLog {
    pub fn push(&mut self, stage: impl Into<String>, candidate: impl ToString, lo: f64, hi: f64, decision: &str, depth: usize) {
        self.records.push(AuditRecord {
            stage: stage.into(),
            candidate: candidate.to_string(),
            bracket_lo: lo,
            bracket_hi: hi,
            decision: decision.into(),
            depth,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn with_decision<'a>(&'a self, decision: &'a str) -> impl Iterator<Item = &'a AuditRecord> + 'a {
        self.records.iter().filter(move |r| r.decision == decision)
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_has_required_fields() {
        let mut log = AuditLog::default();
        log.push("R", 3, 0.9, 1.1, "reject-straddle", 512);
        let line = log.to_jsonl();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        for key in ["stage", "candidate", "bracket_lo", "bracket_hi", "decision", "depth"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
