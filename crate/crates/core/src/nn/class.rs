use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of body-part groups the classifier distinguishes.
pub const NUM_CLASSES: usize = 5;

/// The five anatomical routing groups, with stable integer codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyPartClass {
    Abdominal = 0,
    AdultChest = 1,
    PediatricChest = 2,
    Spine = 3,
    Others = 4,
}

impl BodyPartClass {
    pub const ALL: [BodyPartClass; NUM_CLASSES] = [
        BodyPartClass::Abdominal,
        BodyPartClass::AdultChest,
        BodyPartClass::PediatricChest,
        BodyPartClass::Spine,
        BodyPartClass::Others,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BodyPartClass::Abdominal => "abdominal",
            BodyPartClass::AdultChest => "adult_chest",
            BodyPartClass::PediatricChest => "pediatric_chest",
            BodyPartClass::Spine => "spine",
            BodyPartClass::Others => "others",
        }
    }
}

impl fmt::Display for BodyPartClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BodyPartClass {
    type Err = String;

    /// Accepts either the snake_case name or the integer code.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(code) = s.parse::<usize>() {
            return Self::from_code(code).ok_or_else(|| format!("class code {code} out of range"));
        }
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown class {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_stable() {
        let codes: Vec<usize> = BodyPartClass::ALL.iter().map(|c| c.code()).collect();
        assert_eq!(codes, vec![0, 1, 2, 3, 4]);
        assert_eq!(
            BodyPartClass::from_code(2),
            Some(BodyPartClass::PediatricChest)
        );
        assert_eq!(BodyPartClass::from_code(5), None);
    }

    #[test]
    fn parse_names_and_codes() {
        assert_eq!("spine".parse::<BodyPartClass>(), Ok(BodyPartClass::Spine));
        assert_eq!("1".parse::<BodyPartClass>(), Ok(BodyPartClass::AdultChest));
        assert!("7".parse::<BodyPartClass>().is_err());
        assert!("chest".parse::<BodyPartClass>().is_err());
        let json = serde_json::to_string(&BodyPartClass::PediatricChest).unwrap();
        assert_eq!(json, "\"pediatric_chest\"");
    }
}
