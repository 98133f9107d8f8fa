//! Structured log events and their source taxonomy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::AttackStepName;

/// Where a log record was produced. Advanced host audit (Sysmon-style) and
/// verbose shell logging exist only under the best-practice logging profile.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum LogSource {
    HostAudit,
    AdvancedHostAudit,
    ShellLog,
    Syslog,
    NetworkIds,
    NetworkFlow,
    ProxyLog,
    FirewallLog,
    UserActivityLog,
}

impl LogSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LogSource::HostAudit => "host_audit",
            LogSource::AdvancedHostAudit => "advanced_host_audit",
            LogSource::ShellLog => "shell_log",
            LogSource::Syslog => "syslog",
            LogSource::NetworkIds => "network_ids",
            LogSource::NetworkFlow => "network_flow",
            LogSource::ProxyLog => "proxy_log",
            LogSource::FirewallLog => "firewall_log",
            LogSource::UserActivityLog => "user_activity_log",
        }
    }

    /// Sources produced on hosts (matchable by host rules).
    pub fn is_host_side(self) -> bool {
        matches!(
            self,
            LogSource::HostAudit | LogSource::AdvancedHostAudit | LogSource::ShellLog
        )
    }
}

/// Ground-truth tag linking an event to the chain entry that caused it.
/// Never readable by detection rules; exported only into the ground-truth
/// sidecar, not the dataset itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cause {
    /// Index of the chain entry.
    pub entry: usize,
    pub step: AttackStepName,
}

/// A single timestamped log record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEvent {
    /// Simulated seconds since scenario start.
    pub timestamp: u64,
    pub host: String,
    pub source: LogSource,
    pub provider: String,
    pub event_id: u32,
    #[serde(default)]
    pub fields: BTreeMap<String, String>,
    /// Internal ground truth; excluded from detection input and from the
    /// exported dataset (it travels in the sidecar).
    #[serde(skip)]
    pub cause: Option<Cause>,
}

impl LogEvent {
    pub fn new(
        timestamp: u64,
        host: impl Into<String>,
        source: LogSource,
        provider: impl Into<String>,
        event_id: u32,
    ) -> Self {
        Self {
            timestamp,
            host: host.into(),
            source,
            provider: provider.into(),
            event_id,
            fields: BTreeMap::new(),
            cause: None,
        }
    }

    pub fn with_field(mut self, key: &str, value: impl Into<String>) -> Self {
        self.fields.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_cause(mut self, cause: Cause) -> Self {
        self.cause = Some(cause);
        self
    }

    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(|s| s.as_str())
    }
}
