//! Simplified structural rule engine: host rules over Windows audit records
//! and network rules over the network sensor's alert observations, with
//! alert attribution to attack-chain steps.

mod rules;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::logemit::{GroundTruth, LogDataset, LogEvent};

pub use rules::{
    default_ruleset, load_ruleset, parse_ruleset, ruleset_to_toml, DetectionRule, FieldSel,
    Matcher, MatcherOp, RuleKind, DEFAULT_RULESET_TOML, RULESET_SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("failed to read ruleset: {0}")]
    Io(#[from] std::io::Error),
    #[error("ruleset does not parse: {0}")]
    Parse(String),
    #[error("ruleset declares schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("duplicate rule name {0:?}")]
    DuplicateName(String),
    #[error("rule {rule:?}: {reason}")]
    InvalidRule { rule: String, reason: String },
}

/// One alert: a rule matched one event.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Alert {
    pub rule: String,
    pub timestamp: u64,
    pub host: String,
    /// Index of the matched event within its dataset.
    pub event_index: usize,
}

/// Applies every rule to every event; each `(rule, matching event)` pair
/// yields one alert. Output is ordered like the dataset (and by rule within
/// one event). Pure function of its inputs; cause tags are invisible here.
pub fn apply_rules(ds: &LogDataset, rules: &[DetectionRule]) -> Vec<Alert> {
    let mut alerts = Vec::new();
    for (event_index, event) in ds.events.iter().enumerate() {
        for rule in rules {
            if rule.matches(event) {
                alerts.push(Alert {
                    rule: rule.name.clone(),
                    timestamp: event.timestamp,
                    host: event.host.clone(),
                    event_index,
                });
            }
        }
    }
    alerts
}

/// Per-chain-entry attribution windows: `[entry offset, next entry offset)`
/// on the absolute timeline, the last window extending to the end of data.
/// Alerts raised before the first entry are discarded as irrelevant.
pub fn attribute_alerts(alerts: &[Alert], truth: &GroundTruth) -> Vec<u64> {
    let starts: Vec<u64> = truth
        .chain
        .entries
        .iter()
        .map(|e| truth.attack_start_seconds + e.offset)
        .collect();
    let mut counts = vec![0u64; starts.len()];
    if starts.is_empty() {
        return counts;
    }
    for alert in alerts {
        if alert.timestamp < starts[0] {
            continue;
        }
        let idx = match starts.binary_search(&alert.timestamp) {
            Ok(i) => i,
            Err(insertion) => insertion - 1,
        };
        counts[idx] += 1;
    }
    counts
}

/// Number of chain entries with at least one attributed alert.
pub fn detected_steps(counts: &[u64]) -> usize {
    counts.iter().filter(|c| **c > 0).count()
}

/// Verifies that the alert-type set of the default-logging run is contained
/// in the best-practice run's; returns the first missing rule name otherwise.
pub fn superset_check(alerts_default: &[Alert], alerts_best: &[Alert]) -> Result<(), String> {
    let types = |alerts: &[Alert]| -> BTreeSet<String> {
        alerts.iter().map(|a| a.rule.clone()).collect()
    };
    let best = types(alerts_best);
    for rule in types(alerts_default) {
        if !best.contains(&rule) {
            return Err(rule);
        }
    }
    Ok(())
}

/// Per-rule alert totals, sorted by rule name.
pub fn per_rule_counts(alerts: &[Alert]) -> std::collections::BTreeMap<String, u64> {
    let mut counts = std::collections::BTreeMap::new();
    for alert in alerts {
        *counts.entry(alert.rule.clone()).or_insert(0) += 1;
    }
    counts
}

/// True when the event could ever be matched by a rule of this kind; used to
/// skip host rules on network records and vice versa.
pub(crate) fn kind_admits(kind: RuleKind, event: &LogEvent) -> bool {
    use crate::logemit::LogSource;
    match kind {
        RuleKind::Host => event.source.is_host_side(),
        RuleKind::Network => event.source == LogSource::NetworkIds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{AttackChain, AttackStepName, ChainEntry};
    use crate::logemit::{assemble_dataset, LogSource};

    fn dataset(events: Vec<LogEvent>) -> LogDataset {
        assemble_dataset("test".to_owned(), vec![events], None)
    }

    fn network_event(t: u64, signature: &str) -> LogEvent {
        LogEvent::new(t, "companyrouter", LogSource::NetworkIds, "suricata", 2100019)
            .with_field("signature", signature)
    }

    #[test]
    fn empty_dataset_yields_no_alerts() {
        let rules = default_ruleset();
        assert!(apply_rules(&dataset(vec![]), &rules).is_empty());
    }

    #[test]
    fn alerts_never_depend_on_cause_tags() {
        let rules = default_ruleset();
        let sig = "ET WEB_SERVER SQL Errors in HTTP 200 Response (error in your SQL syntax)";
        let plain = dataset(vec![network_event(10, sig)]);
        let tagged = dataset(vec![network_event(10, sig).with_cause(crate::logemit::Cause {
            entry: 0,
            step: AttackStepName::MiscSqlmap,
        })]);
        assert_eq!(apply_rules(&plain, &rules), apply_rules(&tagged, &rules));
        assert_eq!(apply_rules(&plain, &rules).len(), 1);
    }

    fn truth(offsets: &[u64]) -> GroundTruth {
        GroundTruth {
            attack_start_seconds: 900,
            chain: AttackChain {
                entries: offsets
                    .iter()
                    .map(|o| ChainEntry::full(AttackStepName::MiscSqlmap, "dmzserver", *o))
                    .collect(),
            },
        }
    }

    fn alert_at(t: u64) -> Alert {
        Alert {
            rule: "r".to_owned(),
            timestamp: t,
            host: "h".to_owned(),
            event_index: 0,
        }
    }

    #[test]
    fn alerts_fall_into_their_entry_window() {
        let truth = truth(&[0, 180, 360]);
        let alerts = vec![alert_at(900), alert_at(1079), alert_at(1080), alert_at(5000)];
        assert_eq!(attribute_alerts(&alerts, &truth), vec![2, 1, 1]);
    }

    #[test]
    fn alerts_before_first_step_are_discarded() {
        let truth = truth(&[0]);
        let alerts = vec![alert_at(899), alert_at(900)];
        assert_eq!(attribute_alerts(&alerts, &truth), vec![1]);
    }

    #[test]
    fn detected_steps_counts_nonzero_windows() {
        assert_eq!(detected_steps(&[3, 0, 1, 0]), 2);
        assert_eq!(detected_steps(&[0, 0]), 0);
        assert_eq!(detected_steps(&[]), 0);
    }

    #[test]
    fn superset_check_passes_on_empty_pair() {
        assert!(superset_check(&[], &[]).is_ok());
    }

    #[test]
    fn superset_check_names_missing_rule() {
        let d = vec![alert_at(1)];
        let err = superset_check(&d, &[]).unwrap_err();
        assert_eq!(err, "r");
    }
}
