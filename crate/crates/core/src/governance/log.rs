use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::VerdictKind;
use crate::dsl::serialize_model;
use crate::governance::apply::{apply_patch, PatchError, VerificationReport};
use crate::governance::patch::Patch;
use crate::net::NetModel;

/// SHA-256 (hex) of the canonical text of `model`.
pub fn model_hash(model: &NetModel) -> String {
    hex::encode(Sha256::digest(serialize_model(model).text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedVerdict {
    pub predicate: String,
    pub before: Option<VerdictKind>,
    pub after: Option<VerdictKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: usize,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub patch_id: String,
    pub patch: Patch,
    pub pre_hash: String,
    pub post_hash: String,
    pub verdicts: Vec<LoggedVerdict>,
    pub prev_entry_hash: String,
    /// Hash over `prev_entry_hash` and every other field of this entry.
    pub entry_hash: String,
}

impl LogEntry {
    fn compute_hash(&self) -> String {
        let mut unsealed = self.clone();
        unsealed.entry_hash = String::new();
        let body = serde_json::to_string(&unsealed).expect("entries serialize");
        hex::encode(Sha256::digest(body.as_bytes()))
    }
}

#[derive(Debug, Error)]
pub enum GovernanceError {
    #[error("entry {seq}: hash chain broken (expected {expected}, found {found})")]
    HashChainBroken {
        seq: usize,
        expected: String,
        found: String,
    },
    #[error("entry {seq}: replaying the patch failed: {source}")]
    Replay { seq: usize, source: PatchError },
    #[error("log line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Append-only record of applied patches. Each entry's pre-model hash equals
/// the previous entry's post-model hash, and entries are sealed with a hash
/// that covers their predecessor's.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernanceLog {
    entries: Vec<LogEntry>,
}

impl GovernanceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends an entry for `patch`, which turned `pre` into `post`. Without
    /// a report the entry carries no verdicts.
    pub fn record_decision(
        &mut self,
        pre: &NetModel,
        post: &NetModel,
        patch: &Patch,
        report: Option<&VerificationReport>,
    ) -> Result<&LogEntry, GovernanceError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.record_decision_at(pre, post, patch, report, timestamp)
    }

    pub fn record_decision_at(
        &mut self,
        pre: &NetModel,
        post: &NetModel,
        patch: &Patch,
        report: Option<&VerificationReport>,
        timestamp: u64,
    ) -> Result<&LogEntry, GovernanceError> {
        let pre_hash = model_hash(pre);
        if let Some(last) = self.entries.last() {
            if last.post_hash != pre_hash {
                return Err(GovernanceError::HashChainBroken {
                    seq: self.entries.len(),
                    expected: last.post_hash.clone(),
                    found: pre_hash,
                });
            }
        }
        let mut entry = LogEntry {
            seq: self.entries.len(),
            timestamp,
            patch_id: patch.id(),
            patch: patch.clone(),
            pre_hash,
            post_hash: model_hash(post),
            verdicts: report
                .map(|r| r.comparisons.as_slice())
                .unwrap_or_default()
                .iter()
                .map(|c| LoggedVerdict {
                    predicate: c.name.clone(),
                    before: c.before.as_ref().map(|v| v.kind()),
                    after: c.after.as_ref().map(|v| v.kind()),
                })
                .collect(),
            prev_entry_hash: self.entries.last().map(|e| e.entry_hash.clone()).unwrap_or_default(),
            entry_hash: String::new(),
        };
        entry.entry_hash = entry.compute_hash();
        self.entries.push(entry);
        Ok(self.entries.last().unwrap())
    }

    /// Checks both hash chains end to end.
    pub fn verify_chain(&self) -> Result<(), GovernanceError> {
        let mut prev: Option<&LogEntry> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let broken = |expected: &str, found: &str| GovernanceError::HashChainBroken {
                seq: i,
                expected: expected.to_string(),
                found: found.to_string(),
            };
            let prev_seal = prev.map(|p| p.entry_hash.as_str()).unwrap_or("");
            if e.prev_entry_hash != prev_seal {
                return Err(broken(prev_seal, &e.prev_entry_hash));
            }
            if let Some(p) = prev {
                if p.post_hash != e.pre_hash {
                    return Err(broken(&p.post_hash, &e.pre_hash));
                }
            }
            let seal = e.compute_hash();
            if seal != e.entry_hash {
                return Err(broken(&seal, &e.entry_hash));
            }
            prev = Some(e);
        }
        Ok(())
    }

    /// Re-applies every logged patch to `genesis`, checking the recorded
    /// model hashes along the way.
    pub fn replay(&self, genesis: &NetModel) -> Result<NetModel, GovernanceError> {
        self.verify_chain()?;
        let mut model = genesis.clone();
        for e in &self.entries {
            let h = model_hash(&model);
            if h != e.pre_hash {
                return Err(GovernanceError::HashChainBroken {
                    seq: e.seq,
                    expected: e.pre_hash.clone(),
                    found: h,
                });
            }
            model = apply_patch(&model, &e.patch).map_err(|source| GovernanceError::Replay { seq: e.seq, source })?;
            let h = model_hash(&model);
            if h != e.post_hash {
                return Err(GovernanceError::HashChainBroken {
                    seq: e.seq,
                    expected: e.post_hash.clone(),
                    found: h,
                });
            }
        }
        Ok(model)
    }

    /// Reads a JSONL log; a missing file is an empty log.
    pub fn load(path: &Path) -> Result<Self, GovernanceError> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::new()),
            Err(e) => return Err(e.into()),
        };
        Self::from_jsonl(&text)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, GovernanceError> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| GovernanceError::Corrupt {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<LogEntry>, _>>()?;
        let log = GovernanceLog { entries };
        log.verify_chain()?;
        Ok(log)
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("entries serialize") + "\n")
            .collect()
    }

    /// Appends the last entry to `path`, never rewriting earlier lines.
    pub fn append_last(&self, path: &Path) -> Result<(), GovernanceError> {
        if let Some(e) = self.entries.last() {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(e).expect("entries serialize"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ExplorationBound;
    use crate::governance::{verify_patch, EditOp};
    use crate::net::{PlaceDef, TransitionDef};

    fn base() -> NetModel {
        NetModel {
            places: vec![PlaceDef::new("p", 1), PlaceDef::new("q", 0)],
            transitions: vec![TransitionDef::new("t").input("p", 1).output("q", 1)],
            ..NetModel::default()
        }
    }

    fn step(log: &mut GovernanceLog, model: &NetModel, patch: Patch) -> NetModel {
        let post = apply_patch(model, &patch).unwrap();
        let report = verify_patch(model, &patch, &ExplorationBound::default()).unwrap();
        log.record_decision_at(model, &post, &patch, Some(&report), 7).unwrap();
        post
    }

    #[test]
    fn chain_records_and_replays() {
        let genesis = base();
        let mut log = GovernanceLog::new();
        let m1 = step(
            &mut log,
            &genesis,
            Patch::new(vec![EditOp::SetCapacity {
                place: "q".into(),
                capacity: Some(2),
            }]),
        );
        assert_eq!(log.len(), 1);
        let m2 = step(
            &mut log,
            &m1,
            Patch::new(vec![EditOp::SetLabel {
                target: "t".into(),
                label: "move".into(),
            }]),
        );
        log.verify_chain().unwrap();
        let back = GovernanceLog::from_jsonl(&log.to_jsonl()).unwrap();
        assert_eq!(back, log);
        assert_eq!(model_hash(&back.replay(&genesis).unwrap()), model_hash(&m2));
    }

    #[test]
    fn stale_pre_model_breaks_the_chain() {
        let genesis = base();
        let mut log = GovernanceLog::new();
        let patch = Patch::new(vec![EditOp::SetLabel {
            target: "p".into(),
            label: "x".into(),
        }]);
        step(&mut log, &genesis, patch.clone());
        let report = verify_patch(&genesis, &patch, &ExplorationBound::default()).unwrap();
        let err = log
            .record_decision_at(&genesis, &genesis, &patch, Some(&report), 8)
            .unwrap_err();
        assert!(matches!(err, GovernanceError::HashChainBroken { .. }));
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn tampering_is_detected() {
        let genesis = base();
        let mut log = GovernanceLog::new();
        step(&mut log, &genesis, Patch::default().with_author("a"));
        let text = log.to_jsonl().replace("\"author\":\"a\"", "\"author\":\"b\"");
        assert!(matches!(
            GovernanceLog::from_jsonl(&text),
            Err(GovernanceError::HashChainBroken { .. })
        ));
    }
}
