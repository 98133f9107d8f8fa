//! Full simulation runs: wires the event queue, user emulation, adversary
//! execution, and log emission into a pure function of (scenario, chain,
//! seeded stream).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::adversary::{
    self, validate_chain, AttackChain, AttackerState, ChainError, ChainInvalid, PrereqError,
    PrereqDigraph,
};
use crate::logemit::{
    assemble_dataset, emit_attack_events, emit_noise, noise_profile_for, run_fingerprint,
    GroundTruth, LogDataset, LogEvent,
};
use crate::scenario::{HostKind, ScenarioConfig, ViolationList};
use crate::simkernel::{Engine, KernelError, RngStream, SimEvent};
use crate::useremu::{
    external_reply, log_events_for_action, EmailFsm, FileFsm, Mail, UserAction, WebFsm,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("scenario is invalid:\n{0}")]
    Scenario(ViolationList),
    #[error("attack chain is invalid: {0}")]
    Chain(#[from] ChainInvalid),
    #[error("digraph override is invalid: {0}")]
    Digraph(#[from] ChainError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("attack step failed at runtime: {0}")]
    Prereq(#[from] PrereqError),
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dataset: LogDataset,
    /// Ordered record of every processed event, for replay comparison.
    pub transcript: Vec<String>,
    pub processed_events: usize,
}

#[derive(Debug, Clone)]
enum Action {
    User(UserAction),
    MailDelivery { mail: Mail },
    Attack { entry_index: usize },
}

/// The digraph a scenario selects: its override or the built-in default.
pub fn scenario_digraph(scenario: &ScenarioConfig) -> Result<PrereqDigraph, ChainError> {
    match &scenario.digraph {
        Some(cfg) => adversary::digraph_from_config(cfg),
        None => Ok(adversary::build_default_digraph()),
    }
}

/// Stable identity of a run stream, the seed half of the fingerprint.
pub fn seed_identity(stream: &RngStream) -> String {
    format!("{}/{}", stream.root_seed(), stream.label_path().join("/"))
}

struct RunState {
    web: BTreeMap<String, WebFsm>,
    email: BTreeMap<String, EmailFsm>,
    file: BTreeMap<String, FileFsm>,
    inboxes: BTreeMap<String, Vec<Mail>>,
    attacker: AttackerState,
    logs: Vec<LogEvent>,
    transcript: Vec<String>,
    router: String,
    prereq_failure: Option<PrereqError>,
}

/// Runs one simulation to the scenario's horizon and assembles the dataset.
///
/// The chain is validated against the scenario's digraph before anything
/// runs; the attack starts at `warmup_seconds`. Identical (scenario, chain,
/// stream identity) yield byte-identical datasets and transcripts.
pub fn run_simulation(
    scenario: &ScenarioConfig,
    chain: &AttackChain,
    run_stream: &RngStream,
) -> Result<RunOutput, RunError> {
    let violations = crate::scenario::validate_scenario(scenario);
    if !violations.is_empty() {
        return Err(RunError::Scenario(ViolationList(violations)));
    }
    let digraph = scenario_digraph(scenario)?;
    validate_chain(chain, &digraph)?;

    let fingerprint = run_fingerprint(scenario, &seed_identity(run_stream));
    let clients: Vec<String> = scenario.client_ids().iter().map(|s| s.to_string()).collect();
    let router = scenario
        .host_of_kind(HostKind::CompanyRouter)
        .unwrap_or("companyrouter")
        .to_owned();

    let mut state = RunState {
        web: BTreeMap::new(),
        email: BTreeMap::new(),
        file: BTreeMap::new(),
        inboxes: BTreeMap::new(),
        attacker: AttackerState::new(),
        logs: Vec::new(),
        transcript: Vec::new(),
        router,
        prereq_failure: None,
    };

    let mut engine: Engine<Action> = Engine::new();

    for client in &clients {
        let web_stream = run_stream.child(&["client", client, "web"]);
        let email_stream = run_stream.child(&["client", client, "email"]);
        let file_stream = run_stream.child(&["client", client, "file"]);
        state.web.insert(
            client.clone(),
            WebFsm::new(client.clone(), web_stream, scenario.emulation.web.clone()),
        );
        state.email.insert(
            client.clone(),
            EmailFsm::new(client.clone(), email_stream, scenario.emulation.email.clone()),
        );
        state.file.insert(
            client.clone(),
            FileFsm::new(client.clone(), file_stream, scenario.emulation.file.clone()),
        );
        state.inboxes.insert(client.clone(), Vec::new());

        engine.schedule(SimEvent::new(0, client.clone(), Action::User(UserAction::WebTimer)))?;
        let first_poll = scenario.emulation.email.poll_interval_seconds.max(1);
        engine.schedule(SimEvent::new(
            first_poll,
            client.clone(),
            Action::User(UserAction::EmailPoll),
        ))?;
        let first_tick = scenario.emulation.file.interval_seconds.max(1);
        engine.schedule(SimEvent::new(
            first_tick,
            client.clone(),
            Action::User(UserAction::FileTick),
        ))?;
    }

    let attack_start = scenario.warmup_seconds;
    for (entry_index, entry) in chain.entries.iter().enumerate() {
        engine.schedule(SimEvent::new(
            attack_start + entry.offset,
            entry.target.clone(),
            Action::Attack { entry_index },
        ))?;
    }

    let scenario_ref = scenario;
    let chain_ref = chain;
    let attack_stream = run_stream.child(&["adversary"]);
    let processed = engine.run_until(scenario.run_seconds, |engine, event| {
        let SimEvent { at, origin, action } = event;
        dispatch(
            engine,
            &mut state,
            scenario_ref,
            chain_ref,
            &attack_stream,
            &clients,
            at,
            origin,
            action,
        );
    })?;

    if let Some(failure) = state.prereq_failure {
        return Err(RunError::Prereq(failure));
    }

    let noise = emit_noise(
        &noise_profile_for(scenario),
        scenario.run_seconds,
        &clients,
        run_stream,
    );

    let dataset = assemble_dataset(
        fingerprint,
        vec![state.logs, noise],
        Some(GroundTruth {
            attack_start_seconds: attack_start,
            chain: chain.clone(),
        }),
    );

    Ok(RunOutput {
        dataset,
        transcript: state.transcript,
        processed_events: processed,
    })
}

#[allow(clippy::too_many_arguments)]
fn dispatch(
    engine: &mut Engine<Action>,
    state: &mut RunState,
    scenario: &ScenarioConfig,
    chain: &AttackChain,
    attack_stream: &RngStream,
    clients: &[String],
    at: u64,
    origin: String,
    action: Action,
) {
    state.transcript.push(transcript_line(at, &origin, &action));
    match action {
        Action::User(user_action) => {
            let followups: Vec<SimEvent<UserAction>> = match &user_action {
                UserAction::WebTimer => state
                    .web
                    .get_mut(&origin)
                    .map(|fsm| fsm.step(at))
                    .unwrap_or_default(),
                UserAction::EmailPoll => {
                    let peers: Vec<String> =
                        clients.iter().filter(|c| **c != origin).cloned().collect();
                    let inbox = state.inboxes.entry(origin.clone()).or_default();
                    state
                        .email
                        .get_mut(&origin)
                        .map(|fsm| fsm.poll(at, inbox, &peers))
                        .unwrap_or_default()
                }
                UserAction::FileTick => state
                    .file
                    .get_mut(&origin)
                    .map(|fsm| fsm.tick(at))
                    .unwrap_or_default(),
                other => {
                    state
                        .logs
                        .extend(log_events_for_action(other, &origin, &state.router, at));
                    if let UserAction::MailSent { mail } = other {
                        route_mail(engine, at, mail.clone());
                    }
                    Vec::new()
                }
            };
            for ev in followups {
                engine
                    .schedule(SimEvent::new(ev.at, ev.origin, Action::User(ev.action)))
                    .expect("user modules never schedule into the past");
            }
        }
        Action::MailDelivery { mail } => {
            state.inboxes.entry(mail.to.clone()).or_default().push(mail);
        }
        Action::Attack { entry_index } => {
            let entry = &chain.entries[entry_index];
            match adversary::execute_step(entry, entry_index, &mut state.attacker, at) {
                Ok(executions) => {
                    for exec_event in executions {
                        let events =
                            emit_attack_events(&exec_event.action, scenario, at, attack_stream);
                        state.logs.extend(events);
                    }
                    // the phishing mail lands in the target inbox on send
                    if entry.step == crate::adversary::AttackStepName::InfectEmailExe
                        && entry.phase != crate::adversary::Phase::Open
                    {
                        let mail = Mail {
                            id: format!("attack-{entry_index}"),
                            from: "attacker".to_owned(),
                            to: entry.target.clone(),
                            subject: "invoice".to_owned(),
                            has_attachment: true,
                            has_link: false,
                            marker: "malicious".to_owned(),
                        };
                        state.inboxes.entry(entry.target.clone()).or_default().push(mail);
                    }
                }
                Err(failure) => {
                    if state.prereq_failure.is_none() {
                        state.prereq_failure = Some(failure);
                    }
                }
            }
        }
    }
}

fn route_mail(engine: &mut Engine<Action>, now: u64, mail: Mail) {
    if mail.to == crate::useremu::EXTERNAL_ADDRESS {
        // the external responder answers after a fixed delay
        let reply = external_reply(&mail);
        let _ = engine.schedule(SimEvent::new(
            now + 60,
            reply.to.clone(),
            Action::MailDelivery { mail: reply },
        ));
    } else {
        let _ = engine.schedule(SimEvent::new(
            now + 2,
            mail.to.clone(),
            Action::MailDelivery { mail },
        ));
    }
}

fn transcript_line(at: u64, origin: &str, action: &Action) -> String {
    let what = match action {
        Action::User(UserAction::WebTimer) => "web_timer".to_owned(),
        Action::User(UserAction::EmailPoll) => "email_poll".to_owned(),
        Action::User(UserAction::FileTick) => "file_tick".to_owned(),
        Action::User(UserAction::SessionStart) => "session_start".to_owned(),
        Action::User(UserAction::SessionEnd) => "session_end".to_owned(),
        Action::User(UserAction::PageOpen { site, .. }) => format!("page_open {site}"),
        Action::User(UserAction::AttachmentOpen { mail_id }) => {
            format!("attachment_open {mail_id}")
        }
        Action::User(UserAction::LinkOpen { mail_id }) => format!("link_open {mail_id}"),
        Action::User(UserAction::MailSent { mail }) => {
            format!("mail_sent {} -> {}", mail.id, mail.to)
        }
        Action::User(UserAction::FileAct {
            filename,
            action,
            noop,
        }) => format!("file_{} {filename} noop={noop}", action.as_str()),
        Action::MailDelivery { mail } => format!("mail_delivery {} -> {}", mail.id, mail.to),
        Action::Attack { entry_index } => format!("attack_entry {entry_index}"),
    };
    format!("t={at} origin={origin} {what}")
}

/// Convenience: the exemplary kill chain wired to a scenario's default hosts.
pub fn exemplary_chain_for(scenario: &ScenarioConfig) -> Result<AttackChain, ChainError> {
    let clients = scenario.client_ids();
    let web_server = scenario
        .host_of_kind(HostKind::DmzServer)
        .unwrap_or("dmzserver")
        .to_owned();
    let (workstation, lateral) = match (clients.first(), clients.get(1)) {
        (Some(a), Some(b)) => ((*a).to_owned(), (*b).to_owned()),
        _ => return Err(ChainError::BadKillChainTargets),
    };
    adversary::exemplary_killchain_spaced(
        &adversary::KillChainTargets {
            web_server,
            workstation,
            lateral_host: lateral,
        },
        scenario.attack_idle_seconds,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;

    fn stream(seed: u64) -> RngStream {
        RngStream::derive(seed, &["run"]).unwrap()
    }

    #[test]
    fn replay_produces_identical_transcripts_and_datasets() {
        let scenario = default_scenario();
        let chain = exemplary_chain_for(&scenario).unwrap();
        let a = run_simulation(&scenario, &chain, &stream(7)).unwrap();
        let b = run_simulation(&scenario, &chain, &stream(7)).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.processed_events, b.processed_events);
    }

    #[test]
    fn different_seeds_differ() {
        let scenario = default_scenario();
        let chain = exemplary_chain_for(&scenario).unwrap();
        let a = run_simulation(&scenario, &chain, &stream(7)).unwrap();
        let b = run_simulation(&scenario, &chain, &stream(8)).unwrap();
        assert_ne!(a.dataset.fingerprint, b.dataset.fingerprint);
        assert_ne!(a.transcript, b.transcript);
    }

    #[test]
    fn empty_chain_runs_and_produces_noise_and_user_activity() {
        let scenario = default_scenario();
        let out = run_simulation(&scenario, &AttackChain::default(), &stream(3)).unwrap();
        assert!(out.processed_events > 0);
        assert!(!out.dataset.events.is_empty());
        assert!(out.dataset.events.iter().all(|e| e.cause.is_none()));
    }

    #[test]
    fn dataset_events_are_sorted() {
        let scenario = default_scenario();
        let chain = exemplary_chain_for(&scenario).unwrap();
        let out = run_simulation(&scenario, &chain, &stream(1)).unwrap();
        assert!(out
            .dataset
            .events
            .windows(2)
            .all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn invalid_chain_is_rejected_before_running() {
        let scenario = default_scenario();
        let chain = AttackChain {
            entries: vec![crate::adversary::ChainEntry::full(
                crate::adversary::AttackStepName::C2Mimikatz,
                "client1",
                0,
            )],
        };
        assert!(matches!(
            run_simulation(&scenario, &chain, &stream(1)),
            Err(RunError::Chain(_))
        ));
    }

    #[test]
    fn clients_diverge_from_each_other() {
        let scenario = default_scenario();
        let out = run_simulation(&scenario, &AttackChain::default(), &stream(5)).unwrap();
        let activity = |client: &str| -> Vec<String> {
            out.dataset
                .events
                .iter()
                .filter(|e| e.host == client && e.source == crate::logemit::LogSource::UserActivityLog)
                .map(|e| format!("{} {:?}", e.timestamp, e.fields))
                .collect()
        };
        assert_ne!(activity("client1"), activity("client2"));
    }
}
