//! Deterministic simulation substrate: virtual clock, ordered event queue,
//! and labeled random streams.
//!
//! A simulation run is a pure function of its scenario and root seed. Time is
//! counted in whole seconds from scenario start and advances only by
//! processing queued events; wall-clock time never enters. Ties between
//! events at the same second are broken by a total, documented key
//! `(timestamp, origin, insertion sequence)` so that replays are exact.

mod rng;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

pub use rng::{derive_stream, RngStream};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("label path must not be empty")]
    EmptyLabelPath,
    #[error("cannot schedule event at t={at} in the past (clock at {now})")]
    EventInPast { at: u64, now: u64 },
    #[error("cannot run to t={t_end} before current clock {now}")]
    HorizonInPast { t_end: u64, now: u64 },
}

/// Virtual clock in whole seconds since scenario start.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    now: u64,
}

impl SimClock {
    pub fn new() -> Self {
        Self { now: 0 }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    fn advance_to(&mut self, t: u64) {
        debug_assert!(t >= self.now, "clock must be monotone");
        self.now = t;
    }
}

/// A scheduled simulation event carrying an opaque action payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent<A> {
    /// Simulated time at which the event fires.
    pub at: u64,
    /// Host the event originates from (part of the tie-break key).
    pub origin: String,
    /// Payload dispatched to the owning module.
    pub action: A,
}

impl<A> SimEvent<A> {
    pub fn new(at: u64, origin: impl Into<String>, action: A) -> Self {
        Self {
            at,
            origin: origin.into(),
            action,
        }
    }
}

struct QueuedEvent<A> {
    event: SimEvent<A>,
    seq: u64,
}

impl<A> QueuedEvent<A> {
    fn key(&self) -> (u64, &str, u64) {
        (self.event.at, &self.event.origin, self.seq)
    }
}

impl<A> PartialEq for QueuedEvent<A> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<A> Eq for QueuedEvent<A> {}

impl<A> PartialOrd for QueuedEvent<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for QueuedEvent<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for earliest-first ordering.
        other.key().cmp(&self.key())
    }
}

/// Event queue plus clock; the single-threaded heart of a run.
pub struct Engine<A> {
    clock: SimClock,
    heap: BinaryHeap<QueuedEvent<A>>,
    next_seq: u64,
}

impl<A> Default for Engine<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> Engine<A> {
    pub fn new() -> Self {
        Self {
            clock: SimClock::new(),
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn now(&self) -> u64 {
        self.clock.now()
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    /// Enqueues an event. Events may not be scheduled in the past.
    pub fn schedule(&mut self, event: SimEvent<A>) -> Result<(), KernelError> {
        if event.at < self.clock.now() {
            return Err(KernelError::EventInPast {
                at: event.at,
                now: self.clock.now(),
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(QueuedEvent { event, seq });
        Ok(())
    }

    fn pop_due(&mut self, t_end: u64) -> Option<SimEvent<A>> {
        if self.heap.peek().map(|q| q.event.at)? <= t_end {
            let queued = self.heap.pop().expect("peeked");
            self.clock.advance_to(queued.event.at);
            Some(queued.event)
        } else {
            None
        }
    }

    /// Processes every event with `at <= t_end` in order, dispatching each to
    /// `handler`, then leaves the clock at `t_end`. Handlers may schedule
    /// further events. Returns the number of events processed.
    pub fn run_until(
        &mut self,
        t_end: u64,
        mut handler: impl FnMut(&mut Self, SimEvent<A>),
    ) -> Result<usize, KernelError> {
        if t_end < self.clock.now() {
            return Err(KernelError::HorizonInPast {
                t_end,
                now: self.clock.now(),
            });
        }
        let mut processed = 0;
        while let Some(event) = self.pop_due(t_end) {
            handler(self, event);
            processed += 1;
        }
        self.clock.advance_to(t_end);
        Ok(processed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(engine: &mut Engine<&'static str>, t_end: u64) -> Vec<(u64, String, &'static str)> {
        let mut seen = Vec::new();
        engine
            .run_until(t_end, |_, ev| seen.push((ev.at, ev.origin, ev.action)))
            .unwrap();
        seen
    }

    #[test]
    fn ties_break_by_origin_then_sequence() {
        let mut engine = Engine::new();
        engine.schedule(SimEvent::new(10, "hostB", "b")).unwrap();
        engine.schedule(SimEvent::new(10, "hostA", "a1")).unwrap();
        engine.schedule(SimEvent::new(10, "hostA", "a2")).unwrap();
        let order: Vec<&str> = drain(&mut engine, 20).into_iter().map(|e| e.2).collect();
        assert_eq!(order, vec!["a1", "a2", "b"]);
    }

    #[test]
    fn priority_order_over_insertion_order() {
        let mut engine = Engine::new();
        engine.schedule(SimEvent::new(5, "h", "late")).unwrap();
        engine.schedule(SimEvent::new(3, "h", "early")).unwrap();
        let order: Vec<&str> = drain(&mut engine, 10).into_iter().map(|e| e.2).collect();
        assert_eq!(order, vec!["early", "late"]);
    }

    #[test]
    fn scheduling_in_the_past_is_rejected() {
        let mut engine = Engine::new();
        engine.schedule(SimEvent::new(2, "h", "x")).unwrap();
        engine.run_until(2, |_, _| {}).unwrap();
        let err = engine.schedule(SimEvent::new(1, "h", "y")).unwrap_err();
        assert_eq!(err, KernelError::EventInPast { at: 1, now: 2 });
    }

    #[test]
    fn empty_queue_advances_clock() {
        let mut engine: Engine<()> = Engine::new();
        let processed = engine.run_until(3600, |_, _| {}).unwrap();
        assert_eq!(processed, 0);
        assert_eq!(engine.now(), 3600);
    }

    #[test]
    fn horizon_cuts_off_later_events() {
        let mut engine = Engine::new();
        for t in [1, 2, 3] {
            engine.schedule(SimEvent::new(t, "h", "e")).unwrap();
        }
        let processed = engine.run_until(2, |_, _| {}).unwrap();
        assert_eq!(processed, 2);
        assert_eq!(engine.now(), 2);
        assert_eq!(engine.pending(), 1);
    }

    #[test]
    fn handlers_can_schedule_followups() {
        let mut engine = Engine::new();
        engine.schedule(SimEvent::new(1, "h", "seed")).unwrap();
        let mut log = Vec::new();
        engine
            .run_until(10, |eng, ev| {
                log.push((ev.at, ev.action));
                if ev.action == "seed" {
                    eng.schedule(SimEvent::new(ev.at + 4, "h", "child")).unwrap();
                }
            })
            .unwrap();
        assert_eq!(log, vec![(1, "seed"), (5, "child")]);
    }

    #[test]
    fn run_until_before_clock_is_rejected() {
        let mut engine: Engine<()> = Engine::new();
        engine.run_until(5, |_, _| {}).unwrap();
        let err = engine.run_until(4, |_, _| {}).unwrap_err();
        assert_eq!(err, KernelError::HorizonInPast { t_end: 4, now: 5 });
    }
}
