//! The attack-step catalog and its tactic coverage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ChainError;

/// The twelve implemented attack steps.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum AttackStepName {
    InfectEmailExe,
    InfectFlashdriveExe,
    C2ChangeWallpaper,
    C2DownloadMalware,
    C2Exfiltration,
    C2Mimikatz,
    C2TakeScreenshot,
    MiscDownloadMalware,
    MiscExecuteMalware,
    MiscExfiltration,
    MiscSetAutostart,
    MiscSqlmap,
}

/// Step family, derivable from the name prefix.
///
/// `Infect` steps create initial access and establish a command-and-control
/// channel; `C2` steps act over an existing live channel on the same target;
/// `Misc` steps are self-contained and can run independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Infect,
    C2,
    Misc,
}

impl AttackStepName {
    pub const ALL: [AttackStepName; 12] = [
        AttackStepName::InfectEmailExe,
        AttackStepName::InfectFlashdriveExe,
        AttackStepName::C2ChangeWallpaper,
        AttackStepName::C2DownloadMalware,
        AttackStepName::C2Exfiltration,
        AttackStepName::C2Mimikatz,
        AttackStepName::C2TakeScreenshot,
        AttackStepName::MiscDownloadMalware,
        AttackStepName::MiscExecuteMalware,
        AttackStepName::MiscExfiltration,
        AttackStepName::MiscSetAutostart,
        AttackStepName::MiscSqlmap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackStepName::InfectEmailExe => "infect_email_exe",
            AttackStepName::InfectFlashdriveExe => "infect_flashdrive_exe",
            AttackStepName::C2ChangeWallpaper => "c2_change_wallpaper",
            AttackStepName::C2DownloadMalware => "c2_download_malware",
            AttackStepName::C2Exfiltration => "c2_exfiltration",
            AttackStepName::C2Mimikatz => "c2_mimikatz",
            AttackStepName::C2TakeScreenshot => "c2_take_screenshot",
            AttackStepName::MiscDownloadMalware => "misc_download_malware",
            AttackStepName::MiscExecuteMalware => "misc_execute_malware",
            AttackStepName::MiscExfiltration => "misc_exfiltration",
            AttackStepName::MiscSetAutostart => "misc_set_autostart",
            AttackStepName::MiscSqlmap => "misc_sqlmap",
        }
    }

    pub fn family(self) -> Family {
        match self {
            AttackStepName::InfectEmailExe | AttackStepName::InfectFlashdriveExe => Family::Infect,
            AttackStepName::C2ChangeWallpaper
            | AttackStepName::C2DownloadMalware
            | AttackStepName::C2Exfiltration
            | AttackStepName::C2Mimikatz
            | AttackStepName::C2TakeScreenshot => Family::C2,
            AttackStepName::MiscDownloadMalware
            | AttackStepName::MiscExecuteMalware
            | AttackStepName::MiscExfiltration
            | AttackStepName::MiscSetAutostart
            | AttackStepName::MiscSqlmap => Family::Misc,
        }
    }

    /// ATT&CK tactics this step covers.
    pub fn tactics(self) -> &'static [Tactic] {
        use Tactic::*;
        match self {
            AttackStepName::InfectEmailExe => &[Reconnaissance, InitialAccess, Execution],
            AttackStepName::InfectFlashdriveExe => &[Execution],
            AttackStepName::C2ChangeWallpaper => &[Impact],
            AttackStepName::C2DownloadMalware => &[CommandAndControl],
            AttackStepName::C2Exfiltration => {
                &[LateralMovement, Collection, CommandAndControl, Exfiltration]
            }
            AttackStepName::C2Mimikatz => {
                &[PrivilegeEscalation, DefenseEvasion, CredentialAccess]
            }
            AttackStepName::C2TakeScreenshot => {
                &[Collection, CommandAndControl, Exfiltration]
            }
            AttackStepName::MiscDownloadMalware => &[Execution],
            AttackStepName::MiscExecuteMalware => &[Execution],
            AttackStepName::MiscExfiltration => &[Discovery, CommandAndControl],
            AttackStepName::MiscSetAutostart => &[Persistence],
            AttackStepName::MiscSqlmap => {
                &[Reconnaissance, ResourceDevelopment, InitialAccess, CredentialAccess]
            }
        }
    }
}

impl fmt::Display for AttackStepName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackStepName {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackStepName::ALL
            .into_iter()
            .find(|step| step.as_str() == s)
            .ok_or_else(|| ChainError::UnknownStep(s.to_owned()))
    }
}

/// The fourteen ATT&CK Enterprise tactics, in matrix column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tactic {
    Reconnaissance,
    ResourceDevelopment,
    InitialAccess,
    Execution,
    Persistence,
    PrivilegeEscalation,
    DefenseEvasion,
    CredentialAccess,
    Discovery,
    LateralMovement,
    Collection,
    CommandAndControl,
    Exfiltration,
    Impact,
}

impl Tactic {
    pub const ALL: [Tactic; 14] = [
        Tactic::Reconnaissance,
        Tactic::ResourceDevelopment,
        Tactic::InitialAccess,
        Tactic::Execution,
        Tactic::Persistence,
        Tactic::PrivilegeEscalation,
        Tactic::DefenseEvasion,
        Tactic::CredentialAccess,
        Tactic::Discovery,
        Tactic::LateralMovement,
        Tactic::Collection,
        Tactic::CommandAndControl,
        Tactic::Exfiltration,
        Tactic::Impact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tactic::Reconnaissance => "Reconnaissance",
            Tactic::ResourceDevelopment => "Resource Development",
            Tactic::InitialAccess => "Initial Access",
            Tactic::Execution => "Execution",
            Tactic::Persistence => "Persistence",
            Tactic::PrivilegeEscalation => "Privilege Escalation",
            Tactic::DefenseEvasion => "Defense Evasion",
            Tactic::CredentialAccess => "Credential Access",
            Tactic::Discovery => "Discovery",
            Tactic::LateralMovement => "Lateral Movement",
            Tactic::Collection => "Collection",
            Tactic::CommandAndControl => "Command and Control",
            Tactic::Exfiltration => "Exfiltration",
            Tactic::Impact => "Impact",
        }
    }
}

/// Step-by-tactic coverage matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    pub rows: Vec<(AttackStepName, [bool; 14])>,
}

impl CoverageMatrix {
    /// Column-wise OR over all rows.
    pub fn union(&self) -> [bool; 14] {
        let mut out = [false; 14];
        for (_, row) in &self.rows {
            for (cell, covered) in out.iter_mut().zip(row.iter()) {
                *cell |= covered;
            }
        }
        out
    }

    pub fn covers_all_tactics(&self) -> bool {
        self.union().iter().all(|c| *c)
    }
}

/// Builds the coverage matrix for the given steps.
pub fn tactic_coverage(steps: &[AttackStepName]) -> CoverageMatrix {
    let rows = steps
        .iter()
        .map(|&step| {
            let mut row = [false; 14];
            for tactic in step.tactics() {
                let col = Tactic::ALL.iter().position(|t| t == tactic).expect("known tactic");
                row[col] = true;
            }
            (step, row)
        })
        .collect();
    CoverageMatrix { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_follow_name_prefixes() {
        for step in AttackStepName::ALL {
            let expected = if step.as_str().starts_with("infect_") {
                Family::Infect
            } else if step.as_str().starts_with("c2_") {
                Family::C2
            } else {
                Family::Misc
            };
            assert_eq!(step.family(), expected, "{step}");
        }
    }

    #[test]
    fn every_step_covers_at_least_one_tactic() {
        for step in AttackStepName::ALL {
            assert!(!step.tactics().is_empty(), "{step}");
        }
    }

    #[test]
    fn sqlmap_row_matches_catalog() {
        use Tactic::*;
        assert_eq!(
            AttackStepName::MiscSqlmap.tactics(),
            &[Reconnaissance, ResourceDevelopment, InitialAccess, CredentialAccess]
        );
    }

    #[test]
    fn exfiltration_row_includes_exfiltration_and_lateral_movement() {
        let tactics = AttackStepName::C2Exfiltration.tactics();
        assert!(tactics.contains(&Tactic::Exfiltration));
        assert!(tactics.contains(&Tactic::LateralMovement));
    }

    #[test]
    fn all_steps_cover_all_fourteen_tactics() {
        let matrix = tactic_coverage(&AttackStepName::ALL);
        assert!(matrix.covers_all_tactics());
    }

    #[test]
    fn step_names_roundtrip() {
        for step in AttackStepName::ALL {
            assert_eq!(step.as_str().parse::<AttackStepName>().unwrap(), step);
        }
        assert!("rm_rf".parse::<AttackStepName>().is_err());
    }
}
