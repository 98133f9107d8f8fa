//! Frozen log datasets: assembly, fingerprinting, and canonical
//! line-delimited export with a ground-truth sidecar.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::AttackChain;
use crate::scenario::ScenarioConfig;

use super::event::{Cause, LogEvent};
use super::DatasetError;

/// Dataset file schema version.
pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// The executed attack chain plus where on the timeline it started.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Seconds from scenario start to the chain's offset origin.
    pub attack_start_seconds: u64,
    pub chain: AttackChain,
}

/// A complete, time-ordered log dataset from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDataset {
    /// Hash of (scenario, seed identity); changes iff either changes.
    pub fingerprint: String,
    pub events: Vec<LogEvent>,
    pub ground_truth: Option<GroundTruth>,
}

/// Fingerprint of a run: SHA-256 over the canonical scenario rendering and
/// the seed identity (root seed plus stream label path).
pub fn run_fingerprint(scenario: &ScenarioConfig, seed_identity: &str) -> String {
    let canonical = scenario
        .to_toml()
        .expect("scenario serialization is infallible for valid configs");
    let mut hasher = Sha256::new();
    hasher.update(b"logbed.fingerprint.v1");
    hasher.update((canonical.len() as u64).to_le_bytes());
    hasher.update(canonical.as_bytes());
    hasher.update(seed_identity.as_bytes());
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Merges event streams into a dataset: sorts by `(timestamp, host,
/// insertion sequence)` and attaches the fingerprint and ground truth.
pub fn assemble_dataset(
    fingerprint: String,
    event_groups: Vec<Vec<LogEvent>>,
    ground_truth: Option<GroundTruth>,
) -> LogDataset {
    let mut indexed: Vec<(usize, LogEvent)> = event_groups
        .into_iter()
        .flatten()
        .enumerate()
        .collect();
    indexed.sort_by(|(ia, a), (ib, b)| {
        (a.timestamp, &a.host, ia).cmp(&(b.timestamp, &b.host, ib))
    });
    LogDataset {
        fingerprint,
        events: indexed.into_iter().map(|(_, e)| e).collect(),
        ground_truth,
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetHeader {
    schema_version: u32,
    kind: String,
    fingerprint: String,
    event_count: usize,
}

#[derive(Serialize, Deserialize)]
struct CauseRecord {
    event: usize,
    #[serde(flatten)]
    cause: Cause,
}

#[derive(Serialize, Deserialize)]
struct TruthFile {
    schema_version: u32,
    fingerprint: String,
    ground_truth: GroundTruth,
    causes: Vec<CauseRecord>,
}

/// Writes the dataset as canonical line-delimited JSON: one header line with
/// fingerprint and schema version, then one event per line with a stable key
/// order. Cause tags never enter this file; with `truth_path` given, they and
/// the executed chain go to the sidecar so datasets can be shared with or
/// without labels.
pub fn export_dataset(
    ds: &LogDataset,
    path: impl AsRef<Path>,
    truth_path: Option<&Path>,
) -> Result<(), DatasetError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = DatasetHeader {
        schema_version: DATASET_SCHEMA_VERSION,
        kind: "logbed-dataset".to_owned(),
        fingerprint: ds.fingerprint.clone(),
        event_count: ds.events.len(),
    };
    writeln!(file, "{}", serde_json::to_string(&header)?)?;
    for event in &ds.events {
        writeln!(file, "{}", serde_json::to_string(event)?)?;
    }
    file.flush()?;

    if let Some(truth_path) = truth_path {
        let Some(ground_truth) = &ds.ground_truth else {
            return Err(DatasetError::NoGroundTruth);
        };
        let causes = ds
            .events
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.cause.map(|cause| CauseRecord { event: i, cause }))
            .collect();
        let truth = TruthFile {
            schema_version: DATASET_SCHEMA_VERSION,
            fingerprint: ds.fingerprint.clone(),
            ground_truth: ground_truth.clone(),
            causes,
        };
        std::fs::write(truth_path, serde_json::to_string_pretty(&truth)?)?;
    }
    Ok(())
}

/// Reads a dataset back, reattaching ground truth and cause tags when a
/// sidecar is given. Malformed lines are reported with their line number.
pub fn import_dataset(
    path: impl AsRef<Path>,
    truth_path: Option<&Path>,
) -> Result<LogDataset, DatasetError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (_, header_line) = lines.next().ok_or(DatasetError::Malformed {
        line: 1,
        reason: "file is empty, expected header line".to_owned(),
    })?;
    let header: DatasetHeader =
        serde_json::from_str(&header_line?).map_err(|e| DatasetError::Malformed {
            line: 1,
            reason: format!("bad header: {e}"),
        })?;
    if header.schema_version != DATASET_SCHEMA_VERSION {
        return Err(DatasetError::SchemaVersion {
            found: header.schema_version,
            expected: DATASET_SCHEMA_VERSION,
        });
    }

    let mut events = Vec::with_capacity(header.event_count);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: LogEvent =
            serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
                line: line_no,
                reason: e.to_string(),
            })?;
        events.push(event);
    }
    if events.len() != header.event_count {
        return Err(DatasetError::Malformed {
            line: events.len() + 1,
            reason: format!(
                "header declares {} events but file contains {}",
                header.event_count,
                events.len()
            ),
        });
    }

    let mut ground_truth = None;
    if let Some(truth_path) = truth_path {
        let truth: TruthFile = serde_json::from_str(&std::fs::read_to_string(truth_path)?)
            .map_err(|e| DatasetError::Malformed {
                line: 0,
                reason: format!("bad ground-truth sidecar: {e}"),
            })?;
        if truth.fingerprint != header.fingerprint {
            return Err(DatasetError::FingerprintMismatch {
                dataset: header.fingerprint,
                sidecar: truth.fingerprint,
            });
        }
        for record in &truth.causes {
            let event = events
                .get_mut(record.event)
                .ok_or(DatasetError::Malformed {
                    line: 0,
                    reason: format!("sidecar cause references missing event {}", record.event),
                })?;
            event.cause = Some(record.cause);
        }
        ground_truth = Some(truth.ground_truth);
    }

    Ok(LogDataset {
        fingerprint: header.fingerprint,
        events,
        ground_truth,
    })
}

/// Returns a copy with all cause tags removed (an unlabeled dataset).
pub fn strip_causes(ds: &LogDataset) -> LogDataset {
    LogDataset {
        fingerprint: ds.fingerprint.clone(),
        events: ds
            .events
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.cause = None;
                e
            })
            .collect(),
        ground_truth: None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::event::LogSource;
    use super::*;
    use crate::adversary::{exemplary_killchain, KillChainTargets};
    use crate::scenario::default_scenario;

    fn sample_dataset() -> LogDataset {
        let chain = exemplary_killchain(&KillChainTargets {
            web_server: "dmzserver".into(),
            workstation: "client1".into(),
            lateral_host: "client2".into(),
        })
        .unwrap();
        let events = vec![
            LogEvent::new(10, "client2", LogSource::HostAudit, "P", 1),
            LogEvent::new(5, "client1", LogSource::Syslog, "postfix", 0)
                .with_field("message", "hello"),
            LogEvent::new(10, "client1", LogSource::NetworkIds, "suricata", 2100001)
                .with_field("signature", "X")
                .with_cause(Cause {
                    entry: 0,
                    step: crate::adversary::AttackStepName::MiscSqlmap,
                }),
        ];
        assemble_dataset(
            run_fingerprint(&default_scenario(), "7/run"),
            vec![events],
            Some(GroundTruth {
                attack_start_seconds: 900,
                chain,
            }),
        )
    }

    #[test]
    fn events_are_sorted_by_time_host_sequence() {
        let ds = sample_dataset();
        let keys: Vec<(u64, &str)> = ds
            .events
            .iter()
            .map(|e| (e.timestamp, e.host.as_str()))
            .collect();
        assert_eq!(keys, vec![(5, "client1"), (10, "client1"), (10, "client2")]);
    }

    #[test]
    fn fingerprint_tracks_config_and_seed() {
        let scenario = default_scenario();
        let a = run_fingerprint(&scenario, "7/run");
        assert_eq!(a, run_fingerprint(&scenario, "7/run"));
        assert_ne!(a, run_fingerprint(&scenario, "8/run"));
        let mut changed = scenario.clone();
        changed.client_count = 3; // no-op change keeps fingerprint
        assert_eq!(a, run_fingerprint(&changed, "7/run"));
        changed.warmup_seconds = 901;
        assert_ne!(a, run_fingerprint(&changed, "7/run"));
    }

    #[test]
    fn roundtrip_preserves_dataset_and_causes() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("ds.jsonl");
        let truth = dir.path().join("truth.json");
        export_dataset(&ds, &data, Some(&truth)).unwrap();
        let back = import_dataset(&data, Some(&truth)).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn export_is_byte_stable() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        export_dataset(&ds, &a, None).unwrap();
        export_dataset(&ds, &b, None).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn truncated_file_reports_line_number() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        export_dataset(&ds, &path, None).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.pop();
        std::fs::write(&path, lines.join("\n")).unwrap();
        match import_dataset(&path, None) {
            Err(DatasetError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn corrupt_line_reports_its_number() {
        let ds = sample_dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        export_dataset(&ds, &path, None).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replacen("\"timestamp\":5", "\"timestamp\":oops", 1);
        std::fs::write(&path, text).unwrap();
        match import_dataset(&path, None) {
            Err(DatasetError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn stripping_causes_removes_labels_only() {
        let ds = sample_dataset();
        let stripped = strip_causes(&ds);
        assert_eq!(stripped.events.len(), ds.events.len());
        assert!(stripped.events.iter().all(|e| e.cause.is_none()));
        assert!(stripped.ground_truth.is_none());
        assert_eq!(stripped.fingerprint, ds.fingerprint);
    }
}
