//! Web-surfing module: alternates inactivity periods with browsing sessions.
//!
//! A session is planned eagerly when it starts: routines begin with either a
//! web search or a directly opened page, then follow a drawn number of links
//! with drawn delays, until the session window is exhausted. Dwell times are
//! exponential and link follows geometric — declared placeholder
//! distributions, configurable in the scenario.

use crate::scenario::WebParams;
use crate::simkernel::{RngStream, SimEvent};

use super::{timer, UserAction};

/// How a routine's first page was reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PageEntry {
    Search { term: String },
    Direct,
    LinkFollow,
}

/// What the next timer expiry begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WebPhase {
    StartInactivity,
    StartSession,
}

#[derive(Debug)]
pub struct WebFsm {
    client: String,
    phase: WebPhase,
    stream: RngStream,
    params: WebParams,
}

impl WebFsm {
    /// `stream` must be the client's web sub-stream
    /// (`root.child(["client", id, "web"])`).
    pub fn new(client: impl Into<String>, stream: RngStream, params: WebParams) -> Self {
        Self {
            client: client.into(),
            phase: WebPhase::StartInactivity,
            stream,
            params,
        }
    }

    pub fn phase(&self) -> WebPhase {
        self.phase
    }

    /// Advances the state machine at a timer expiry. In the inactivity phase
    /// this emits a single state timer and nothing else; in the session phase
    /// it plans the whole session (page opens, link follows, boundary
    /// markers) plus the end-of-session timer.
    pub fn step(&mut self, now: u64) -> Vec<SimEvent<UserAction>> {
        match self.phase {
            WebPhase::StartInactivity => {
                let dwell = self.stream.exp_seconds(self.params.mean_inactivity_seconds);
                self.phase = WebPhase::StartSession;
                vec![timer(now + dwell, &self.client, UserAction::WebTimer)]
            }
            WebPhase::StartSession => {
                self.phase = WebPhase::StartInactivity;
                self.plan_session(now)
            }
        }
    }

    fn draw_site(&mut self) -> String {
        if self.params.sites.is_empty() {
            return "site".to_owned();
        }
        let i = self.stream.index(self.params.sites.len());
        self.params.sites[i].clone()
    }

    fn draw_term(&mut self) -> String {
        if self.params.search_terms.is_empty() {
            return "term".to_owned();
        }
        let i = self.stream.index(self.params.search_terms.len());
        self.params.search_terms[i].clone()
    }

    fn plan_session(&mut self, now: u64) -> Vec<SimEvent<UserAction>> {
        let duration = self.stream.exp_seconds(self.params.mean_session_seconds);
        let until = now + duration;
        let mut events = vec![timer(now, &self.client, UserAction::SessionStart)];
        let mut t = now;
        while t < until {
            // routine: search or direct entry, then drawn link follows
            let entry = if self.stream.chance(0.5) {
                PageEntry::Search {
                    term: self.draw_term(),
                }
            } else {
                PageEntry::Direct
            };
            let site = self.draw_site();
            events.push(timer(
                t,
                &self.client,
                UserAction::PageOpen { entry, site },
            ));
            let follows = self.stream.geometric(self.params.mean_follows_per_routine);
            for _ in 0..follows {
                t += self.stream.exp_seconds(self.params.mean_click_delay_seconds);
                if t >= until {
                    break;
                }
                let site = self.draw_site();
                events.push(timer(
                    t,
                    &self.client,
                    UserAction::PageOpen {
                        entry: PageEntry::LinkFollow,
                        site,
                    },
                ));
            }
            t += self.stream.exp_seconds(self.params.mean_click_delay_seconds);
        }
        events.push(timer(until, &self.client, UserAction::SessionEnd));
        events.push(timer(until, &self.client, UserAction::WebTimer));
        events
    }
}
