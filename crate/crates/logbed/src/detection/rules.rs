//! Detection rules: flat conjunctions of field matchers over log events.
//!
//! A rule is either a host rule (Windows audit, advanced audit, shell logs)
//! or a network rule (network sensor alert observations). Every rule must
//! anchor itself to a source compatible with its kind, which keeps the two
//! worlds disjoint by construction, and no rule may reference the ground-truth
//! cause tag. The shipped default ruleset is pinned — a fixed rule version is
//! what makes alert counts reproducible across installations.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::logemit::{LogEvent, LogSource};

use super::RulesetError;

/// Ruleset file schema version.
pub const RULESET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Host,
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatcherOp {
    Equals,
    Prefix,
    Contains,
}

/// What part of an event a matcher inspects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldSel {
    Source,
    Provider,
    EventId,
    Field(String),
}

impl FieldSel {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "source" => Ok(FieldSel::Source),
            "provider" => Ok(FieldSel::Provider),
            "event_id" => Ok(FieldSel::EventId),
            other => {
                if let Some(name) = other.strip_prefix("fields.") {
                    if name == "cause" {
                        return Err("rules may not reference the cause tag".to_owned());
                    }
                    if name.is_empty() {
                        return Err("empty field name".to_owned());
                    }
                    Ok(FieldSel::Field(name.to_owned()))
                } else if other == "cause" {
                    Err("rules may not reference the cause tag".to_owned())
                } else {
                    Err(format!(
                        "unknown selector {other:?} (expected source, provider, event_id, or fields.<name>)"
                    ))
                }
            }
        }
    }

    fn render(&self) -> String {
        match self {
            FieldSel::Source => "source".to_owned(),
            FieldSel::Provider => "provider".to_owned(),
            FieldSel::EventId => "event_id".to_owned(),
            FieldSel::Field(name) => format!("fields.{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matcher {
    pub field: FieldSel,
    pub op: MatcherOp,
    pub value: String,
}

impl Matcher {
    fn matches(&self, event: &LogEvent) -> bool {
        let event_id;
        let actual: &str = match &self.field {
            FieldSel::Source => event.source.as_str(),
            FieldSel::Provider => &event.provider,
            FieldSel::EventId => {
                event_id = event.event_id.to_string();
                &event_id
            }
            FieldSel::Field(name) => match event.field(name) {
                Some(v) => v,
                None => return false,
            },
        };
        match self.op {
            MatcherOp::Equals => actual == self.value,
            MatcherOp::Prefix => actual.starts_with(&self.value),
            MatcherOp::Contains => actual.contains(&self.value),
        }
    }
}

/// A named detection rule: the conjunction of its matchers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionRule {
    pub name: String,
    pub kind: RuleKind,
    pub matchers: Vec<Matcher>,
}

impl DetectionRule {
    pub fn matches(&self, event: &LogEvent) -> bool {
        super::kind_admits(self.kind, event) && self.matchers.iter().all(|m| m.matches(event))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatcherFile {
    field: String,
    op: MatcherOp,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    name: String,
    kind: RuleKind,
    matchers: Vec<MatcherFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesetFile {
    schema_version: u32,
    #[serde(rename = "rule", default)]
    rules: Vec<RuleFile>,
}

fn allowed_sources(kind: RuleKind) -> &'static [LogSource] {
    match kind {
        RuleKind::Host => &[
            LogSource::HostAudit,
            LogSource::AdvancedHostAudit,
            LogSource::ShellLog,
        ],
        RuleKind::Network => &[LogSource::NetworkIds],
    }
}

fn convert(file: RulesetFile) -> Result<Vec<DetectionRule>, RulesetError> {
    if file.schema_version != RULESET_SCHEMA_VERSION {
        return Err(RulesetError::SchemaVersion {
            found: file.schema_version,
            expected: RULESET_SCHEMA_VERSION,
        });
    }
    let mut names = BTreeSet::new();
    let mut rules = Vec::with_capacity(file.rules.len());
    for raw in file.rules {
        if !names.insert(raw.name.clone()) {
            return Err(RulesetError::DuplicateName(raw.name));
        }
        let mut matchers = Vec::with_capacity(raw.matchers.len());
        for m in raw.matchers {
            let field = FieldSel::parse(&m.field).map_err(|reason| RulesetError::InvalidRule {
                rule: raw.name.clone(),
                reason,
            })?;
            matchers.push(Matcher {
                field,
                op: m.op,
                value: m.value,
            });
        }
        // every rule needs a source anchor compatible with its kind; this is
        // what guarantees host rules never fire on network records
        let anchored = matchers.iter().any(|m| {
            m.field == FieldSel::Source
                && m.op == MatcherOp::Equals
                && allowed_sources(raw.kind)
                    .iter()
                    .any(|s| s.as_str() == m.value)
        });
        if !anchored {
            return Err(RulesetError::InvalidRule {
                rule: raw.name,
                reason: format!(
                    "missing source anchor: a {:?} rule needs a matcher {{ field = \"source\", op = \"equals\" }} on one of {:?}",
                    raw.kind,
                    allowed_sources(raw.kind)
                        .iter()
                        .map(|s| s.as_str())
                        .collect::<Vec<_>>()
                ),
            });
        }
        rules.push(DetectionRule {
            name: raw.name,
            kind: raw.kind,
            matchers,
        });
    }
    Ok(rules)
}

/// Parses a ruleset from TOML text.
pub fn parse_ruleset(text: &str) -> Result<Vec<DetectionRule>, RulesetError> {
    let file: RulesetFile =
        toml::from_str(text).map_err(|e| RulesetError::Parse(e.to_string()))?;
    convert(file)
}

/// Loads a ruleset file.
pub fn load_ruleset(path: impl AsRef<Path>) -> Result<Vec<DetectionRule>, RulesetError> {
    parse_ruleset(&std::fs::read_to_string(path)?)
}

/// Renders rules back to the TOML file format.
pub fn ruleset_to_toml(rules: &[DetectionRule]) -> String {
    let file = RulesetFile {
        schema_version: RULESET_SCHEMA_VERSION,
        rules: rules
            .iter()
            .map(|r| RuleFile {
                name: r.name.clone(),
                kind: r.kind,
                matchers: r
                    .matchers
                    .iter()
                    .map(|m| MatcherFile {
                        field: m.field.render(),
                        op: m.op,
                        value: m.value.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string_pretty(&file).expect("ruleset serialization is infallible")
}

/// The pinned default ruleset: five host rules and twenty network rules.
pub fn default_ruleset() -> Vec<DetectionRule> {
    parse_ruleset(DEFAULT_RULESET_TOML).expect("shipped ruleset is valid")
}

/// The shipped ruleset file contents.
pub const DEFAULT_RULESET_TOML: &str = include_str!("default_ruleset.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ruleset_has_25_rules() {
        let rules = default_ruleset();
        assert_eq!(rules.len(), 25);
        let host: Vec<&str> = rules
            .iter()
            .filter(|r| r.kind == RuleKind::Host)
            .map(|r| r.name.as_str())
            .collect();
        assert_eq!(
            host,
            vec![
                "Autorun Keys Modification",
                "Direct Autorun Keys Modification",
                "Meterpreter or Cobalt Strike Getsystem Service Start",
                "Non Interactive PowerShell",
                "Windows PowerShell Web Request",
            ]
        );
        assert_eq!(rules.iter().filter(|r| r.kind == RuleKind::Network).count(), 20);
    }

    #[test]
    fn rule_referencing_cause_is_rejected() {
        let text = r#"
schema_version = 1

[[rule]]
name = "peek at ground truth"
kind = "network"
matchers = [
  { field = "source", op = "equals", value = "network_ids" },
  { field = "fields.cause", op = "equals", value = "misc_sqlmap" },
]
"#;
        match parse_ruleset(text) {
            Err(RulesetError::InvalidRule { reason, .. }) => {
                assert!(reason.contains("cause"), "{reason}");
            }
            other => panic!("expected invalid-rule error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let text = r#"
schema_version = 1

[[rule]]
name = "dup"
kind = "network"
matchers = [{ field = "source", op = "equals", value = "network_ids" }]

[[rule]]
name = "dup"
kind = "network"
matchers = [{ field = "source", op = "equals", value = "network_ids" }]
"#;
        assert!(matches!(
            parse_ruleset(text),
            Err(RulesetError::DuplicateName(n)) if n == "dup"
        ));
    }

    #[test]
    fn rule_without_source_anchor_is_rejected() {
        let text = r#"
schema_version = 1

[[rule]]
name = "floaty"
kind = "host"
matchers = [{ field = "provider", op = "equals", value = "PowerShell" }]
"#;
        assert!(matches!(
            parse_ruleset(text),
            Err(RulesetError::InvalidRule { .. })
        ));
    }

    #[test]
    fn host_rule_never_matches_network_event() {
        // even a maliciously crafted network event carrying host-ish fields
        let rules = default_ruleset();
        let event = LogEvent::new(1, "router", LogSource::NetworkIds, "Microsoft-Windows-Sysmon", 13)
            .with_field(
                "target_object",
                "HKLM\\SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Run\\x",
            );
        assert!(rules
            .iter()
            .filter(|r| r.kind == RuleKind::Host)
            .all(|r| !r.matches(&event)));
    }

    #[test]
    fn ruleset_roundtrips_through_toml() {
        let rules = default_ruleset();
        let text = ruleset_to_toml(&rules);
        let back = parse_ruleset(&text).unwrap();
        assert_eq!(rules, back);
    }

    #[test]
    fn prefix_and_contains_ops_work() {
        let rules = default_ruleset();
        let autorun = rules.iter().find(|r| r.name == "Autorun Keys Modification").unwrap();
        let event = LogEvent::new(
            1,
            "client1",
            LogSource::AdvancedHostAudit,
            "Microsoft-Windows-Sysmon",
            13,
        )
        .with_field(
            "target_object",
            "HKLM\\SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Run\\updater",
        );
        assert!(autorun.matches(&event));
        let other = LogEvent::new(
            1,
            "client1",
            LogSource::AdvancedHostAudit,
            "Microsoft-Windows-Sysmon",
            13,
        )
        .with_field("target_object", "HKCU\\Control Panel\\Desktop\\Wallpaper");
        assert!(!autorun.matches(&other));
    }
}
