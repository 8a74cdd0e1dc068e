use std::fmt;
use std::str::FromStr;

use crate::error::{Result, VqcError};

pub const N_CLASSES: usize = 4;

/// Ulcer condition. `control` in source data is read as [`Label::None`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    None,
    Infection,
    Ischaemia,
    Both,
}

impl Label {
    pub const ALL: [Label; N_CLASSES] = [Label::None, Label::Infection, Label::Ischaemia, Label::Both];

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::None => "none",
            Label::Infection => "infection",
            Label::Ischaemia => "ischaemia",
            Label::Both => "both",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = VqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "control" => Ok(Label::None),
            "infection" => Ok(Label::Infection),
            "ischaemia" => Ok(Label::Ischaemia),
            "both" => Ok(Label::Both),
            other => Err(VqcError::invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// Fixes which classifier slot belongs to which label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelMap([Label; N_CLASSES]);

impl Default for LabelMap {
    fn default() -> Self {
        LabelMap(Label::ALL)
    }
}

impl LabelMap {
    pub fn new(order: [Label; N_CLASSES]) -> Result<Self> {
        for i in 0..N_CLASSES {
            for j in i + 1..N_CLASSES {
                if order[i] == order[j] {
                    return Err(VqcError::invalid(format!(
                        "label map lists {} twice",
                        order[i]
                    )));
                }
            }
        }
        Ok(LabelMap(order))
    }

    pub fn labels(&self) -> &[Label; N_CLASSES] {
        &self.0
    }

    pub fn label(&self, index: usize) -> Label {
        self.0[index]
    }

    pub fn index_of(&self, label: Label) -> usize {
        self.0
            .iter()
            .position(|&l| l == label)
            .expect("label map covers every label")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_case_insensitively_with_control_alias() {
        assert_eq!("Control".parse::<Label>().unwrap(), Label::None);
        assert_eq!("BOTH".parse::<Label>().unwrap(), Label::Both);
        assert!("ischemia".parse::<Label>().is_err());
    }

    #[test]
    fn label_map_rejects_duplicates() {
        assert!(LabelMap::new([Label::None, Label::None, Label::Both, Label::Infection]).is_err());
        let m = LabelMap::new([Label::Both, Label::None, Label::Infection, Label::Ischaemia]).unwrap();
        assert_eq!(m.index_of(Label::Both), 0);
        assert_eq!(m.label(3), Label::Ischaemia);
    }
}
