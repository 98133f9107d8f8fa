//! Prerequisite digraph over attack steps.
//!
//! The default digraph is reconstructed from the step-family semantics:
//! infect and misc steps are entry nodes; after an infect or c2 step every c2
//! step and every entry node may follow; after a misc step only entry nodes
//! may follow. Whether a c2 step actually executes additionally requires a
//! live channel on its target, which is checked against attacker state during
//! chain validation, not encoded in the digraph. The digraph is data and can
//! be overridden in the scenario file.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::scenario::{DigraphConfig, Violation};

use super::steps::{AttackStepName, Family};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrereqDigraph {
    entry_nodes: BTreeSet<AttackStepName>,
    successors: BTreeMap<AttackStepName, BTreeSet<AttackStepName>>,
}

impl PrereqDigraph {
    pub fn entry_nodes(&self) -> &BTreeSet<AttackStepName> {
        &self.entry_nodes
    }

    pub fn successors(&self, step: AttackStepName) -> &BTreeSet<AttackStepName> {
        static EMPTY: std::sync::OnceLock<BTreeSet<AttackStepName>> = std::sync::OnceLock::new();
        self.successors
            .get(&step)
            .unwrap_or_else(|| EMPTY.get_or_init(BTreeSet::new))
    }

    pub fn has_edge(&self, from: AttackStepName, to: AttackStepName) -> bool {
        self.successors(from).contains(&to)
    }

    pub fn nodes(&self) -> impl Iterator<Item = AttackStepName> + '_ {
        AttackStepName::ALL
            .into_iter()
            .filter(|s| self.entry_nodes.contains(s) || self.successors.contains_key(s))
    }

    /// Whether some valid chain visits every node at least once, simulating
    /// channel state with a single target.
    pub fn admits_covering_chain(&self) -> bool {
        let all: Vec<AttackStepName> = AttackStepName::ALL.to_vec();
        let bit = |s: AttackStepName| 1u16 << all.iter().position(|x| *x == s).unwrap();
        let full: u16 = (1 << all.len()) - 1;

        // BFS over (visited steps, previous step, channel live)
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<(u16, Option<AttackStepName>, bool)> = VecDeque::new();
        queue.push_back((0, None, false));
        while let Some((visited, prev, channel)) = queue.pop_front() {
            if visited == full {
                return true;
            }
            let candidates: Vec<AttackStepName> = match prev {
                None => self.entry_nodes.iter().copied().collect(),
                Some(p) => self.successors(p).iter().copied().collect(),
            };
            for next in candidates {
                let enabled = match next.family() {
                    Family::C2 => channel,
                    _ => true,
                };
                if !enabled {
                    continue;
                }
                let channel_after = channel || next.family() == Family::Infect;
                let state = (visited | bit(next), Some(next), channel_after);
                if seen.insert(state) {
                    queue.push_back(state);
                }
            }
        }
        false
    }
}

/// Builds the default prerequisite digraph over the twelve steps.
pub fn build_default_digraph() -> PrereqDigraph {
    let entry_nodes: BTreeSet<AttackStepName> = AttackStepName::ALL
        .into_iter()
        .filter(|s| s.family() != Family::C2)
        .collect();
    let c2_steps: BTreeSet<AttackStepName> = AttackStepName::ALL
        .into_iter()
        .filter(|s| s.family() == Family::C2)
        .collect();

    let mut successors = BTreeMap::new();
    for step in AttackStepName::ALL {
        let succ: BTreeSet<AttackStepName> = match step.family() {
            Family::Infect | Family::C2 => c2_steps.union(&entry_nodes).copied().collect(),
            Family::Misc => entry_nodes.clone(),
        };
        successors.insert(step, succ);
    }
    PrereqDigraph {
        entry_nodes,
        successors,
    }
}

/// Builds a digraph from a scenario override. The override must name known
/// steps; use [`validate_digraph_config`] first for detailed findings.
pub fn digraph_from_config(cfg: &DigraphConfig) -> Result<PrereqDigraph, super::ChainError> {
    let mut entry_nodes = BTreeSet::new();
    for name in &cfg.entry_nodes {
        entry_nodes.insert(name.parse::<AttackStepName>()?);
    }
    let mut successors: BTreeMap<AttackStepName, BTreeSet<AttackStepName>> = BTreeMap::new();
    for edge in &cfg.edges {
        let from = edge.from.parse::<AttackStepName>()?;
        let entry = successors.entry(from).or_default();
        for to in &edge.to {
            entry.insert(to.parse::<AttackStepName>()?);
        }
    }
    Ok(PrereqDigraph {
        entry_nodes,
        successors,
    })
}

/// Scenario-level validation of a digraph override.
pub fn validate_digraph_config(cfg: &DigraphConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |name: &str, field: String| {
        if name.parse::<AttackStepName>().is_err() {
            out.push(Violation {
                code: "digraph-unknown-step",
                field,
                message: format!("{name:?} is not an attack step"),
            });
        }
    };
    for (i, n) in cfg.entry_nodes.iter().enumerate() {
        check(n, format!("digraph.entry_nodes[{i}]"));
    }
    for (i, e) in cfg.edges.iter().enumerate() {
        check(&e.from, format!("digraph.edges[{i}].from"));
        for (j, t) in e.to.iter().enumerate() {
            check(t, format!("digraph.edges[{i}].to[{j}]"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    match digraph_from_config(cfg) {
        Ok(digraph) => {
            if cfg.entry_nodes.is_empty() {
                out.push(Violation {
                    code: "digraph-no-entry",
                    field: "digraph.entry_nodes".to_owned(),
                    message: "digraph has no entry nodes".to_owned(),
                });
            } else if !digraph.admits_covering_chain() {
                out.push(Violation {
                    code: "digraph-no-coverage",
                    field: "digraph".to_owned(),
                    message: "digraph admits no chain containing every step".to_owned(),
                });
            }
        }
        Err(e) => out.push(Violation {
            code: "digraph-invalid",
            field: "digraph".to_owned(),
            message: e.to_string(),
        }),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn misc_steps_are_entry_nodes() {
        let d = build_default_digraph();
        assert!(d.entry_nodes().contains(&AttackStepName::MiscSqlmap));
        assert!(d.entry_nodes().contains(&AttackStepName::MiscExfiltration));
    }

    #[test]
    fn c2_steps_are_not_entry_nodes() {
        let d = build_default_digraph();
        assert!(!d.entry_nodes().contains(&AttackStepName::C2Mimikatz));
        assert_eq!(d.entry_nodes().len(), 8);
    }

    #[test]
    fn infect_leads_to_c2() {
        let d = build_default_digraph();
        assert!(d.has_edge(
            AttackStepName::InfectEmailExe,
            AttackStepName::C2TakeScreenshot
        ));
    }

    #[test]
    fn misc_does_not_lead_to_c2() {
        let d = build_default_digraph();
        assert!(!d.has_edge(AttackStepName::MiscSqlmap, AttackStepName::C2Mimikatz));
        assert!(d.has_edge(AttackStepName::MiscSqlmap, AttackStepName::InfectEmailExe));
    }

    #[test]
    fn default_digraph_admits_covering_chain() {
        assert!(build_default_digraph().admits_covering_chain());
    }

    #[test]
    fn digraph_without_infect_entries_fails_coverage() {
        use crate::scenario::{DigraphConfig, DigraphEdgeConfig};
        // only misc entries and misc->misc edges: c2 steps unreachable
        let misc: Vec<String> = AttackStepName::ALL
            .into_iter()
            .filter(|s| s.family() == Family::Misc)
            .map(|s| s.as_str().to_owned())
            .collect();
        let cfg = DigraphConfig {
            entry_nodes: misc.clone(),
            edges: misc
                .iter()
                .map(|m| DigraphEdgeConfig {
                    from: m.clone(),
                    to: misc.clone(),
                })
                .collect(),
        };
        let violations = validate_digraph_config(&cfg);
        assert!(violations.iter().any(|v| v.code == "digraph-no-coverage"));
    }
}
