//! Attack chains: validation, seeded generation, and the exemplary
//! nine-step espionage kill chain.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::simkernel::{RngStream, SimEvent};

use super::digraph::PrereqDigraph;
use super::steps::{AttackStepName, Family};
use super::ChainError;

/// Chain file schema version.
pub const CHAIN_SCHEMA_VERSION: u32 = 1;

/// Phase of a chain entry. Only `infect_email_exe` splits into a send phase
/// (the mail leaves the attacker) and an open phase (the recipient runs the
/// attachment, which establishes the channel); everything else executes as a
/// single `full` entry.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Full,
    Send,
    Open,
}

/// One scheduled element of an attack chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEntry {
    pub step: AttackStepName,
    pub target: String,
    /// Seconds after attack start.
    pub offset: u64,
    #[serde(default, skip_serializing_if = "is_full")]
    pub phase: Phase,
}

fn is_full(p: &Phase) -> bool {
    *p == Phase::Full
}

impl ChainEntry {
    pub fn full(step: AttackStepName, target: impl Into<String>, offset: u64) -> Self {
        Self {
            step,
            target: target.into(),
            offset,
            phase: Phase::Full,
        }
    }

    /// Human label like `(3) infect_email_exe[open]` used in reports.
    pub fn label(&self, position: usize) -> String {
        match self.phase {
            Phase::Full => format!("({}) {}", position + 1, self.step),
            Phase::Send => format!("({}) {}[send]", position + 1, self.step),
            Phase::Open => format!("({}) {}[open]", position + 1, self.step),
        }
    }
}

/// An ordered, offset-scheduled attack chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AttackChain {
    pub entries: Vec<ChainEntry>,
}

impl AttackChain {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The `(step, target)` shape of the chain, ignoring offsets.
    pub fn shape(&self) -> Vec<(AttackStepName, String)> {
        self.entries
            .iter()
            .map(|e| (e.step, e.target.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub established_at: u64,
    pub alive: bool,
}

/// Attacker bookkeeping while a chain executes: which targets currently have
/// a live command-and-control channel, and which have an unopened infected
/// mail in their inbox. Channels persist for the rest of a run unless an
/// explicit kill is scripted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttackerState {
    channels: BTreeMap<String, Channel>,
    pending_mail: BTreeSet<String>,
}

impl AttackerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn has_live_channel(&self, target: &str) -> bool {
        self.channels.get(target).is_some_and(|c| c.alive)
    }

    pub fn live_targets(&self) -> Vec<&str> {
        self.channels
            .iter()
            .filter(|(_, c)| c.alive)
            .map(|(t, _)| t.as_str())
            .collect()
    }

    pub fn establish_channel(&mut self, target: &str, at: u64) {
        self.channels.insert(
            target.to_owned(),
            Channel {
                established_at: at,
                alive: true,
            },
        );
    }

    /// Marks a channel dead (simulated reboot or payload kill).
    pub fn kill_channel(&mut self, target: &str) {
        if let Some(c) = self.channels.get_mut(target) {
            c.alive = false;
        }
    }

    pub fn mail_sent(&mut self, target: &str) {
        self.pending_mail.insert(target.to_owned());
    }

    pub fn has_pending_mail(&self, target: &str) -> bool {
        self.pending_mail.contains(target)
    }

    fn take_pending_mail(&mut self, target: &str) -> bool {
        self.pending_mail.remove(target)
    }
}

/// Why a chain entry is invalid.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainViolation {
    #[error("step is not an entry node")]
    NotEntry,
    #[error("step may not follow {prev}")]
    NotSuccessor { prev: AttackStepName },
    #[error("no live channel on target {target:?}")]
    NoLiveChannel { target: String },
    #[error("open phase without a prior send to {target:?}")]
    OpenWithoutSend { target: String },
    #[error("phase {phase:?} only applies to infect_email_exe")]
    PhaseNotApplicable { phase: Phase },
    #[error("offset {offset} does not increase over previous offset {prev}")]
    OffsetNotIncreasing { offset: u64, prev: u64 },
}

/// First invalid entry of a chain, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("chain entry {index} ({step}) invalid: {reason}")]
pub struct ChainInvalid {
    pub index: usize,
    pub step: AttackStepName,
    pub reason: ChainViolation,
}

fn advance_entry(
    entry: &ChainEntry,
    index: usize,
    prev: Option<&ChainEntry>,
    digraph: &PrereqDigraph,
    state: &mut AttackerState,
) -> Result<(), ChainInvalid> {
    let fail = |reason| {
        Err(ChainInvalid {
            index,
            step: entry.step,
            reason,
        })
    };

    if entry.phase != Phase::Full && entry.step != AttackStepName::InfectEmailExe {
        return fail(ChainViolation::PhaseNotApplicable { phase: entry.phase });
    }
    if let Some(prev) = prev {
        if entry.offset <= prev.offset {
            return fail(ChainViolation::OffsetNotIncreasing {
                offset: entry.offset,
                prev: prev.offset,
            });
        }
        if !digraph.has_edge(prev.step, entry.step) {
            return fail(ChainViolation::NotSuccessor { prev: prev.step });
        }
    } else if !digraph.entry_nodes().contains(&entry.step) {
        return fail(ChainViolation::NotEntry);
    }

    match (entry.step.family(), entry.phase) {
        (Family::C2, _) => {
            if !state.has_live_channel(&entry.target) {
                return fail(ChainViolation::NoLiveChannel {
                    target: entry.target.clone(),
                });
            }
        }
        (Family::Infect, Phase::Send) => state.mail_sent(&entry.target),
        (Family::Infect, Phase::Open) => {
            if !state.take_pending_mail(&entry.target) {
                return fail(ChainViolation::OpenWithoutSend {
                    target: entry.target.clone(),
                });
            }
            state.establish_channel(&entry.target, entry.offset);
        }
        (Family::Infect, Phase::Full) => state.establish_channel(&entry.target, entry.offset),
        (Family::Misc, _) => {}
    }
    Ok(())
}

/// Simulates attacker state over the chain and returns the first violating
/// entry, if any. The empty chain is valid.
pub fn validate_chain(chain: &AttackChain, digraph: &PrereqDigraph) -> Result<(), ChainInvalid> {
    let mut state = AttackerState::new();
    let mut prev: Option<&ChainEntry> = None;
    for (index, entry) in chain.entries.iter().enumerate() {
        advance_entry(entry, index, prev, digraph, &mut state)?;
        prev = Some(entry);
    }
    Ok(())
}

/// Default spacing between generated attack steps, in seconds.
pub const DEFAULT_ATTACK_IDLE_SECONDS: u64 = 180;

/// Steps currently enabled given the previous step and attacker state. Entry
/// nodes stay enabled throughout; c2 steps additionally require a live
/// channel somewhere. Sorted for deterministic draws.
fn enabled_steps(
    digraph: &PrereqDigraph,
    prev: Option<AttackStepName>,
    state: &AttackerState,
) -> Vec<AttackStepName> {
    let base: Vec<AttackStepName> = match prev {
        None => digraph.entry_nodes().iter().copied().collect(),
        Some(p) => digraph.successors(p).iter().copied().collect(),
    };
    base.into_iter()
        .filter(|s| s.family() != Family::C2 || !state.live_targets().is_empty())
        .collect()
}

/// Pseudo-randomly generates a valid attack chain of the requested length.
///
/// At each position the step is drawn uniformly from the currently enabled
/// steps and the target uniformly from the eligible targets (all given
/// targets for infect/misc steps, the live-channel targets for c2 steps),
/// both from the position's labeled sub-stream. Entries are spaced
/// [`DEFAULT_ATTACK_IDLE_SECONDS`] apart.
pub fn generate_chain(
    digraph: &PrereqDigraph,
    stream: &RngStream,
    length: usize,
    targets: &[String],
) -> Result<AttackChain, ChainError> {
    generate_chain_spaced(digraph, stream, length, targets, DEFAULT_ATTACK_IDLE_SECONDS)
}

/// [`generate_chain`] with explicit step spacing.
pub fn generate_chain_spaced(
    digraph: &PrereqDigraph,
    stream: &RngStream,
    length: usize,
    targets: &[String],
    idle_seconds: u64,
) -> Result<AttackChain, ChainError> {
    if length > 0 && targets.is_empty() {
        return Err(ChainError::NoTargets);
    }
    let idle = idle_seconds.max(1);
    let mut state = AttackerState::new();
    let mut entries = Vec::with_capacity(length);
    let mut prev = None;
    for position in 0..length {
        let candidates = enabled_steps(digraph, prev, &state);
        if candidates.is_empty() {
            return Err(ChainError::NoEnabledStep { position });
        }
        let mut draw = stream.child(&["pos", &position.to_string()]);
        let step = candidates[draw.index(candidates.len())];
        let target = if step.family() == Family::C2 {
            let live = state.live_targets();
            live[draw.index(live.len())].to_owned()
        } else {
            targets[draw.index(targets.len())].clone()
        };
        let entry = ChainEntry::full(step, target, position as u64 * idle);
        if step.family() == Family::Infect {
            state.establish_channel(&entry.target, entry.offset);
        }
        prev = Some(step);
        entries.push(entry);
    }
    Ok(AttackChain { entries })
}

/// Hosts the exemplary kill chain acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KillChainTargets {
    /// Publicly reachable web server that gets probed and exploited.
    pub web_server: String,
    /// Workstation that receives and opens the phishing mail.
    pub workstation: String,
    /// Second workstation searched during lateral movement.
    pub lateral_host: String,
}

/// The nine-step espionage kill chain: probe and exploit the web server,
/// phish a workstation (send, then open), capture the screen, collect cached
/// credentials, search the network and download documents, download a custom
/// backdoor, register it for autostart, and execute it.
pub fn exemplary_killchain(targets: &KillChainTargets) -> Result<AttackChain, ChainError> {
    exemplary_killchain_spaced(targets, DEFAULT_ATTACK_IDLE_SECONDS)
}

/// [`exemplary_killchain`] with explicit step spacing.
pub fn exemplary_killchain_spaced(
    targets: &KillChainTargets,
    idle_seconds: u64,
) -> Result<AttackChain, ChainError> {
    if targets.web_server.is_empty()
        || targets.workstation.is_empty()
        || targets.lateral_host.is_empty()
        || targets.workstation == targets.lateral_host
    {
        return Err(ChainError::BadKillChainTargets);
    }
    let idle = idle_seconds.max(1);
    let ws = &targets.workstation;
    let at = |i: u64| i * idle;
    let entry = |step, target: &String, i: u64, phase| ChainEntry {
        step,
        target: target.clone(),
        offset: at(i),
        phase,
    };
    use AttackStepName::*;
    use Phase::*;
    let entries = vec![
        entry(MiscSqlmap, &targets.web_server, 0, Full),
        entry(InfectEmailExe, ws, 1, Send),
        entry(InfectEmailExe, ws, 2, Open),
        entry(C2TakeScreenshot, ws, 3, Full),
        entry(C2Mimikatz, ws, 4, Full),
        entry(C2Exfiltration, ws, 5, Full),
        entry(C2DownloadMalware, ws, 6, Full),
        entry(MiscSetAutostart, ws, 7, Full),
        entry(MiscExecuteMalware, ws, 8, Full),
    ];
    Ok(AttackChain { entries })
}

/// Prerequisite failure when executing a step out of order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrereqError {
    #[error("{step} requires a live channel on {target:?} and none exists")]
    MissingChannel { step: AttackStepName, target: String },
    #[error("{step} open phase requires a prior send to {target:?}")]
    MissingMail { step: AttackStepName, target: String },
}

/// Marker dispatched through the event queue when a chain entry executes; the
/// log emitter renders the entry's event bundle from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepExecution {
    pub entry_index: usize,
    pub step: AttackStepName,
    pub phase: Phase,
    pub target: String,
}

/// Executes one chain entry against attacker state: verifies channel
/// prerequisites, performs the state transition (infect establishes the
/// channel), and returns the execution marker event for the log emitter.
pub fn execute_step(
    entry: &ChainEntry,
    entry_index: usize,
    state: &mut AttackerState,
    at: u64,
) -> Result<Vec<SimEvent<StepExecution>>, PrereqError> {
    match (entry.step.family(), entry.phase) {
        (Family::C2, _) => {
            if !state.has_live_channel(&entry.target) {
                return Err(PrereqError::MissingChannel {
                    step: entry.step,
                    target: entry.target.clone(),
                });
            }
        }
        (Family::Infect, Phase::Send) => state.mail_sent(&entry.target),
        (Family::Infect, Phase::Open) => {
            if !state.take_pending_mail(&entry.target) {
                return Err(PrereqError::MissingMail {
                    step: entry.step,
                    target: entry.target.clone(),
                });
            }
            state.establish_channel(&entry.target, at);
        }
        (Family::Infect, Phase::Full) => state.establish_channel(&entry.target, at),
        (Family::Misc, _) => {}
    }
    Ok(vec![SimEvent::new(
        at,
        entry.target.clone(),
        StepExecution {
            entry_index,
            step: entry.step,
            phase: entry.phase,
            target: entry.target.clone(),
        },
    )])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    schema_version: u32,
    #[serde(default)]
    entries: Vec<ChainEntry>,
}

/// Writes a chain file (schema-versioned TOML, ordered step/target/offset).
pub fn save_chain(chain: &AttackChain, path: impl AsRef<Path>) -> Result<(), ChainError> {
    let file = ChainFile {
        schema_version: CHAIN_SCHEMA_VERSION,
        entries: chain.entries.clone(),
    };
    let text = toml::to_string_pretty(&file).map_err(|e| ChainError::Serialize(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a chain file. Structural validity against a digraph is checked
/// separately with [`validate_chain`].
pub fn load_chain(path: impl AsRef<Path>) -> Result<AttackChain, ChainError> {
    let text = std::fs::read_to_string(path)?;
    let file: ChainFile = toml::from_str(&text).map_err(|e| ChainError::Parse(e.to_string()))?;
    if file.schema_version != CHAIN_SCHEMA_VERSION {
        return Err(ChainError::SchemaVersion {
            found: file.schema_version,
            expected: CHAIN_SCHEMA_VERSION,
        });
    }
    Ok(AttackChain {
        entries: file.entries,
    })
}

#[cfg(test)]
mod tests {
    use super::super::digraph::build_default_digraph;
    use super::*;

    fn targets() -> Vec<String> {
        vec!["client1".to_owned(), "client2".to_owned()]
    }

    fn kill_targets() -> KillChainTargets {
        KillChainTargets {
            web_server: "dmzserver".to_owned(),
            workstation: "client1".to_owned(),
            lateral_host: "client2".to_owned(),
        }
    }

    #[test]
    fn empty_chain_is_valid() {
        let digraph = build_default_digraph();
        assert!(validate_chain(&AttackChain::default(), &digraph).is_ok());
    }

    #[test]
    fn bare_c2_step_is_invalid_at_index_zero() {
        let digraph = build_default_digraph();
        let chain = AttackChain {
            entries: vec![ChainEntry::full(AttackStepName::C2Mimikatz, "client1", 0)],
        };
        let err = validate_chain(&chain, &digraph).unwrap_err();
        assert_eq!(err.index, 0);
        assert_eq!(err.reason, ChainViolation::NotEntry);
    }

    #[test]
    fn c2_after_infect_on_same_target_is_valid() {
        let digraph = build_default_digraph();
        let chain = AttackChain {
            entries: vec![
                ChainEntry::full(AttackStepName::InfectEmailExe, "client1", 0),
                ChainEntry::full(AttackStepName::C2Exfiltration, "client1", 180),
            ],
        };
        assert!(validate_chain(&chain, &digraph).is_ok());
    }

    #[test]
    fn c2_against_other_target_is_invalid() {
        let digraph = build_default_digraph();
        let chain = AttackChain {
            entries: vec![
                ChainEntry::full(AttackStepName::InfectEmailExe, "client1", 0),
                ChainEntry::full(AttackStepName::C2Exfiltration, "client2", 180),
            ],
        };
        let err = validate_chain(&chain, &digraph).unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(
            err.reason,
            ChainViolation::NoLiveChannel {
                target: "client2".to_owned()
            }
        );
    }

    #[test]
    fn open_without_send_is_invalid() {
        let digraph = build_default_digraph();
        let chain = AttackChain {
            entries: vec![ChainEntry {
                step: AttackStepName::InfectEmailExe,
                target: "client1".to_owned(),
                offset: 0,
                phase: Phase::Open,
            }],
        };
        let err = validate_chain(&chain, &digraph).unwrap_err();
        assert_eq!(
            err.reason,
            ChainViolation::OpenWithoutSend {
                target: "client1".to_owned()
            }
        );
    }

    #[test]
    fn c2_directly_after_misc_is_not_a_successor() {
        let digraph = build_default_digraph();
        let chain = AttackChain {
            entries: vec![
                ChainEntry::full(AttackStepName::InfectEmailExe, "client1", 0),
                ChainEntry::full(AttackStepName::MiscSqlmap, "dmzserver", 180),
                ChainEntry::full(AttackStepName::C2Mimikatz, "client1", 360),
            ],
        };
        let err = validate_chain(&chain, &digraph).unwrap_err();
        assert_eq!(err.index, 2);
        assert_eq!(
            err.reason,
            ChainViolation::NotSuccessor {
                prev: AttackStepName::MiscSqlmap
            }
        );
    }

    #[test]
    fn generated_length_zero_is_empty() {
        let digraph = build_default_digraph();
        let stream = RngStream::derive(1, &["chain"]).unwrap();
        let chain = generate_chain(&digraph, &stream, 0, &targets()).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let digraph = build_default_digraph();
        let stream = RngStream::derive(42, &["chain"]).unwrap();
        let a = generate_chain(&digraph, &stream, 8, &targets()).unwrap();
        let b = generate_chain(&digraph, &stream, 8, &targets()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_chains_validate_over_many_seeds() {
        let digraph = build_default_digraph();
        for seed in 0..200 {
            let stream = RngStream::derive(seed, &["chain"]).unwrap();
            let length = (seed % 8 + 1) as usize;
            let chain = generate_chain(&digraph, &stream, length, &targets()).unwrap();
            assert_eq!(chain.len(), length);
            validate_chain(&chain, &digraph).unwrap_or_else(|e| {
                panic!("seed {seed}: generated chain invalid: {e} ({chain:?})")
            });
        }
    }

    #[test]
    fn generation_without_targets_fails() {
        let digraph = build_default_digraph();
        let stream = RngStream::derive(1, &["chain"]).unwrap();
        assert!(matches!(
            generate_chain(&digraph, &stream, 3, &[]),
            Err(ChainError::NoTargets)
        ));
    }

    #[test]
    fn exemplary_killchain_validates_and_has_nine_steps() {
        let digraph = build_default_digraph();
        let chain = exemplary_killchain(&kill_targets()).unwrap();
        assert_eq!(chain.len(), 9);
        validate_chain(&chain, &digraph).unwrap();
    }

    #[test]
    fn exemplary_killchain_offsets_are_spaced_by_default_idle() {
        let chain = exemplary_killchain(&kill_targets()).unwrap();
        for (i, entry) in chain.entries.iter().enumerate() {
            assert_eq!(entry.offset, i as u64 * 180);
        }
    }

    #[test]
    fn exemplary_killchain_requires_two_distinct_workstations() {
        let mut t = kill_targets();
        t.lateral_host = t.workstation.clone();
        assert!(matches!(
            exemplary_killchain(&t),
            Err(ChainError::BadKillChainTargets)
        ));
    }

    #[test]
    fn execute_step_establishes_channel_on_infect() {
        let mut state = AttackerState::new();
        let entry = ChainEntry::full(AttackStepName::InfectEmailExe, "client1", 0);
        execute_step(&entry, 0, &mut state, 900).unwrap();
        assert!(state.has_live_channel("client1"));
    }

    #[test]
    fn execute_step_rejects_c2_without_channel() {
        let mut state = AttackerState::new();
        let entry = ChainEntry::full(AttackStepName::C2Mimikatz, "client1", 0);
        let err = execute_step(&entry, 0, &mut state, 900).unwrap_err();
        assert_eq!(
            err,
            PrereqError::MissingChannel {
                step: AttackStepName::C2Mimikatz,
                target: "client1".to_owned()
            }
        );
    }

    #[test]
    fn killed_channel_blocks_c2() {
        let mut state = AttackerState::new();
        state.establish_channel("client1", 10);
        state.kill_channel("client1");
        let entry = ChainEntry::full(AttackStepName::C2TakeScreenshot, "client1", 20);
        assert!(execute_step(&entry, 0, &mut state, 20).is_err());
    }

    #[test]
    fn chain_file_roundtrip() {
        let chain = exemplary_killchain(&kill_targets()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.toml");
        save_chain(&chain, &path).unwrap();
        let loaded = load_chain(&path).unwrap();
        assert_eq!(chain, loaded);
    }
}
