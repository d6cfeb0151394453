//! Per-sample activation records and MBF feature vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance group of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Clean,
    Noisy,
    Adversarial,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Clean, Group::Noisy, Group::Adversarial];

    pub fn code(self) -> u8 {
        match self {
            Group::Clean => 0,
            Group::Noisy => 1,
            Group::Adversarial => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::Clean => "clean",
            Group::Noisy => "noisy",
            Group::Adversarial => "adversarial",
        }
    }

    /// Detector label: benign (clean or noisy) is -1, adversarial is +1.
    pub fn label(self) -> f64 {
        match self {
            Group::Adversarial => 1.0,
            Group::Clean | Group::Noisy => -1.0,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown group `{s}`")))
    }
}

/// Attack that produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackId {
    None,
    Fgsm,
    Bim,
    Rpgd,
    DeepFool,
    CwL2,
}

impl AttackId {
    pub const ALL: [AttackId; 6] = [
        AttackId::None,
        AttackId::Fgsm,
        AttackId::Bim,
        AttackId::Rpgd,
        AttackId::DeepFool,
        AttackId::CwL2,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackId::None => "none",
            AttackId::Fgsm => "fgsm",
            AttackId::Bim => "bim",
            AttackId::Rpgd => "rpgd",
            AttackId::DeepFool => "deepfool",
            AttackId::CwL2 => "cwl2",
        }
    }
}

impl fmt::Display for AttackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown attack `{s}`")))
    }
}

/// One sample's flattened per-layer responses plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationRecord {
    pub sample_id: u64,
    pub group: Group,
    pub attack: AttackId,
    pub true_class: u16,
    pub layers: Vec<Vec<f64>>,
}

impl ActivationRecord {
    pub fn new(
        sample_id: u64,
        group: Group,
        attack: AttackId,
        true_class: u16,
        layers: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let record = Self { sample_id, group, attack, true_class, layers };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidParameter("record has no layers".into()));
        }
        if let Some(l) = self.layers.iter().position(|l| l.is_empty()) {
            return Err(Error::InvalidParameter(format!("layer {l} is empty")));
        }
        if (self.group == Group::Adversarial) != (self.attack != AttackId::None) {
            return Err(Error::InvalidParameter(format!(
                "group {} inconsistent with attack {}",
                self.group, self.attack
            )));
        }
        Ok(())
    }

    pub fn layer_lengths(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }
}

/// Concatenated layer-major magnitude features of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbfFeature {
    pub sample_id: u64,
    pub group: Group,
    pub attack: AttackId,
    pub values: Vec<f64>,
    /// Layers with fewer than two usable entries; their slots are zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_layers: Vec<usize>,
}

impl MbfFeature {
    pub fn label(&self) -> f64 {
        self.group.label()
    }

    pub fn has_warning(&self) -> bool {
        !self.degenerate_layers.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for g in Group::ALL {
            assert_eq!(Group::from_code(g.code()), Some(g));
            assert_eq!(g.name().parse::<Group>().unwrap(), g);
        }
        for a in AttackId::ALL {
            assert_eq!(AttackId::from_code(a.code()), Some(a));
            assert_eq!(a.name().parse::<AttackId>().unwrap(), a);
        }
        assert_eq!(AttackId::CwL2.code(), 5);
        assert!(Group::from_code(3).is_none());
    }

    #[test]
    fn record_invariants() {
        assert!(ActivationRecord::new(0, Group::Clean, AttackId::None, 0, vec![vec![1.0]]).is_ok());
        assert!(ActivationRecord::new(0, Group::Clean, AttackId::Bim, 0, vec![vec![1.0]]).is_err());
        assert!(ActivationRecord::new(0, Group::Adversarial, AttackId::None, 0, vec![vec![1.0]]).is_err());
        assert!(ActivationRecord::new(0, Group::Clean, AttackId::None, 0, vec![]).is_err());
        assert!(ActivationRecord::new(0, Group::Noisy, AttackId::None, 0, vec![vec![]]).is_err());
    }
}
