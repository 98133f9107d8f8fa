//! Seeded finite-state-machine emulation of benign user activity per client:
//! web surfing sessions, email exchange, and file manipulation.
//!
//! Each module owns a stream derived as `(root, "client", <id>, <module>)`,
//! so a client's full action transcript is a function of the root seed, its
//! id, and the emulation parameters: clients behave differently from each
//! other but identically across runs, and adding a client never perturbs the
//! transcripts of existing ones.

mod email;
mod file;
mod web;

use crate::logemit::{LogEvent, LogSource};
use crate::simkernel::SimEvent;

pub use email::{external_reply, EmailFsm, Mail, EXTERNAL_ADDRESS};
pub use file::{FileAction, FileFsm};
pub use web::{PageEntry, WebFsm, WebPhase};

/// User-emulation activity dispatched through the event queue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UserAction {
    /// Web module state timer (start or end of a session/inactivity period).
    WebTimer,
    /// A page open inside a browsing session.
    PageOpen { entry: PageEntry, site: String },
    /// Session boundary markers.
    SessionStart,
    SessionEnd,
    /// Inbox poll timer.
    EmailPoll,
    /// The module opened an attachment of a received mail.
    AttachmentOpen { mail_id: String },
    /// The module followed a hyperlink in a received mail.
    LinkOpen { mail_id: String },
    /// The module sent a mail.
    MailSent { mail: Mail },
    /// File module iteration timer.
    FileTick,
    /// One file manipulation; `noop` marks actions on files that do not
    /// exist, which are logged but change nothing.
    FileAct {
        filename: String,
        action: FileAction,
        noop: bool,
    },
}

/// Renders the log records a user action leaves behind: a user-activity
/// record on the client and, for web page opens, a proxy record on the
/// company router. None of these match any shipped detection rule.
pub fn log_events_for_action(
    action: &UserAction,
    client: &str,
    router: &str,
    at: u64,
) -> Vec<LogEvent> {
    let activity = |kind: &str| {
        LogEvent::new(at, client, LogSource::UserActivityLog, "user_emulation", 0)
            .with_field("action", kind)
    };
    match action {
        UserAction::WebTimer | UserAction::EmailPoll | UserAction::FileTick => vec![],
        UserAction::SessionStart => vec![activity("session_start")],
        UserAction::SessionEnd => vec![activity("session_end")],
        UserAction::PageOpen { entry, site } => vec![
            LogEvent::new(at, router, LogSource::ProxyLog, "squid", 0)
                .with_field("client", client)
                .with_field("url", format!("http://{site}.example/")),
            match entry {
                PageEntry::Search { term } => activity("web_search")
                    .with_field("term", term.clone())
                    .with_field("site", site.clone()),
                PageEntry::Direct => activity("page_open").with_field("site", site.clone()),
                PageEntry::LinkFollow => activity("link_follow").with_field("site", site.clone()),
            },
        ],
        UserAction::AttachmentOpen { mail_id } => {
            vec![activity("attachment_open").with_field("mail_id", mail_id.clone())]
        }
        UserAction::LinkOpen { mail_id } => {
            vec![activity("link_open").with_field("mail_id", mail_id.clone())]
        }
        UserAction::MailSent { mail } => vec![
            activity("mail_sent")
                .with_field("mail_id", mail.id.clone())
                .with_field("recipient", mail.to.clone()),
            LogEvent::new(at, "dmzserver", LogSource::Syslog, "postfix", 0)
                .with_field("message", "mail queued")
                .with_field("mail_id", mail.id.clone()),
        ],
        UserAction::FileAct {
            filename,
            action,
            noop,
        } => vec![activity("file_action")
            .with_field("filename", filename.clone())
            .with_field("file_op", action.as_str())
            .with_field("noop", if *noop { "true" } else { "false" })],
    }
}

pub(crate) fn timer(at: u64, client: &str, action: UserAction) -> SimEvent<UserAction> {
    SimEvent::new(at, client, action)
}
