//! The benign "noise floor": background operating-system events that are not
//! caused by attacks.
//!
//! The built-in profile lists the twenty most frequent Windows event types
//! with their calibrated mean per-run counts. Per-run counts are drawn from a
//! negative binomial (over-dispersed Poisson) so that repeated runs vary the
//! way real systems do; occurrences are spread uniformly over the run window
//! and across clients. None of these event types match any shipped detection
//! rule.

use crate::scenario::ScenarioConfig;
use crate::simkernel::RngStream;

use super::event::{LogEvent, LogSource};

/// Default negative-binomial dispersion for per-run counts. Configuration,
/// not a calibrated claim: the reference data shows per-type spreads only
/// graphically.
pub const DEFAULT_NOISE_DISPERSION: f64 = 150.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEntry {
    pub provider: String,
    pub event_id: u32,
    /// Mean number of occurrences per run (whole scenario, all clients).
    pub mean_count: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub entries: Vec<NoiseEntry>,
    pub dispersion: f64,
}

/// The twenty most frequent Windows event types under default logging, with
/// their mean per-run occurrence counts.
pub fn default_noise_profile() -> NoiseProfile {
    let rows: [(&str, u32, f64); 20] = [
        ("Microsoft-Windows-Security-Auditing", 5379, 4928.7),
        ("Microsoft-Windows-Security-Auditing", 5061, 1499.8),
        ("Microsoft-Windows-WindowsUpdateClient", 44, 1231.0),
        ("Microsoft-Windows-Kernel-General", 16, 537.0),
        ("PowerShell", 600, 504.6),
        ("Microsoft-Windows-Security-Auditing", 4624, 466.5),
        ("Microsoft-Windows-Security-Auditing", 4672, 407.7),
        ("Microsoft-Windows-DistributedCOM", 10010, 257.1),
        ("Microsoft-Windows-Security-Auditing", 4799, 255.2),
        ("Microsoft-Windows-WindowsUpdateClient", 19, 206.6),
        ("Microsoft-Windows-Security-Auditing", 4688, 202.2),
        ("Microsoft-Windows-WindowsUpdateClient", 43, 185.1),
        ("Microsoft-Windows-FilterManager", 6, 173.2),
        ("Windows Error Reporting", 1001, 137.2),
        ("ESENT", 642, 128.8),
        ("Microsoft-Windows-Security-Auditing", 4798, 120.3),
        ("Microsoft-Windows-Security-Auditing", 5058, 119.3),
        ("Microsoft-Windows-Security-Auditing", 4648, 108.7),
        ("Microsoft-Windows-Security-SPP", 1003, 101.1),
        ("Microsoft-Windows-Security-SPP", 16394, 71.0),
    ];
    NoiseProfile {
        entries: rows
            .iter()
            .map(|(provider, id, mean)| NoiseEntry {
                provider: (*provider).to_owned(),
                event_id: *id,
                mean_count: *mean,
            })
            .collect(),
        dispersion: DEFAULT_NOISE_DISPERSION,
    }
}

/// Resolves the noise profile a scenario asks for (overrides or built-in).
pub fn noise_profile_for(scenario: &ScenarioConfig) -> NoiseProfile {
    let mut profile = default_noise_profile();
    if let Some(d) = scenario.emulation.noise.dispersion {
        profile.dispersion = d;
    }
    if let Some(entries) = &scenario.emulation.noise.entries {
        profile.entries = entries
            .iter()
            .map(|e| NoiseEntry {
                provider: e.provider.clone(),
                event_id: e.event_id,
                mean_count: e.mean_count,
            })
            .collect();
    }
    profile
}

/// Draws the noise floor for one run: for each profile entry a per-run count
/// from the entry's labeled sub-stream, spread uniformly over the run window
/// and across the given hosts. Deterministic per `(stream identity, profile)`.
pub fn emit_noise(
    profile: &NoiseProfile,
    run_seconds: u64,
    hosts: &[String],
    stream: &RngStream,
) -> Vec<LogEvent> {
    assert!(run_seconds > 0, "run window must be non-empty");
    let mut out = Vec::new();
    if hosts.is_empty() {
        return out;
    }
    for entry in &profile.entries {
        let mut sub = stream.child(&["noise", &entry.provider, &entry.event_id.to_string()]);
        let count = sub.neg_binomial(entry.mean_count, profile.dispersion);
        for _ in 0..count {
            let t = sub.range(0..run_seconds);
            let host = hosts[sub.index(hosts.len())].clone();
            out.push(LogEvent::new(
                t,
                host,
                LogSource::HostAudit,
                entry.provider.clone(),
                entry.event_id,
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hosts() -> Vec<String> {
        vec!["client1".into(), "client2".into(), "client3".into()]
    }

    #[test]
    fn profile_has_twenty_entries_with_positive_means() {
        let profile = default_noise_profile();
        assert_eq!(profile.entries.len(), 20);
        assert!(profile.entries.iter().all(|e| e.mean_count >= 0.0));
        assert_eq!(profile.entries[0].event_id, 5379);
        assert!((profile.entries[0].mean_count - 4928.7).abs() < 1e-9);
    }

    #[test]
    fn zero_mean_entry_never_emits() {
        let profile = NoiseProfile {
            entries: vec![NoiseEntry {
                provider: "Test".into(),
                event_id: 1,
                mean_count: 0.0,
            }],
            dispersion: 10.0,
        };
        for seed in 0..20 {
            let stream = RngStream::derive(seed, &["run"]).unwrap();
            assert!(emit_noise(&profile, 3600, &hosts(), &stream).is_empty());
        }
    }

    #[test]
    fn counts_vary_across_seeds() {
        // direct multi-seed execution; with positive dispersion the per-run
        // counts of a mean-4928.7 entry cannot all collide
        let profile = NoiseProfile {
            entries: vec![NoiseEntry {
                provider: "Microsoft-Windows-Security-Auditing".into(),
                event_id: 5379,
                mean_count: 4928.7,
            }],
            dispersion: DEFAULT_NOISE_DISPERSION,
        };
        let counts: Vec<usize> = (0..50)
            .map(|seed| {
                let stream = RngStream::derive(seed, &["run"]).unwrap();
                emit_noise(&profile, 3600, &hosts(), &stream).len()
            })
            .collect();
        assert!(counts.windows(2).any(|w| w[0] != w[1]), "{counts:?}");
    }

    #[test]
    fn emission_is_deterministic() {
        let profile = default_noise_profile();
        let stream = RngStream::derive(11, &["run"]).unwrap();
        let a = emit_noise(&profile, 3600, &hosts(), &stream);
        let b = emit_noise(&profile, 3600, &hosts(), &stream);
        assert_eq!(a, b);
    }

    #[test]
    fn timestamps_stay_inside_run_window() {
        let profile = default_noise_profile();
        let stream = RngStream::derive(3, &["run"]).unwrap();
        let events = emit_noise(&profile, 600, &hosts(), &stream);
        assert!(events.iter().all(|e| e.timestamp < 600));
    }
}
