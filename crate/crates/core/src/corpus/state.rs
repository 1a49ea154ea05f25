use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The eighteen scoped US states, in reporting order: the thirteen
/// Appalachian states first, then the five neighbouring states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    AL,
    GA,
    KY,
    MD,
    MS,
    NY,
    NC,
    OH,
    PA,
    SC,
    TN,
    VA,
    WV,
    MI,
    NJ,
    VT,
    ME,
    CT,
}

impl State {
    pub const ALL: [State; 18] = [
        State::AL,
        State::GA,
        State::KY,
        State::MD,
        State::MS,
        State::NY,
        State::NC,
        State::OH,
        State::PA,
        State::SC,
        State::TN,
        State::VA,
        State::WV,
        State::MI,
        State::NJ,
        State::VT,
        State::ME,
        State::CT,
    ];

    pub fn code(self) -> &'static str {
        match self {
            State::AL => "AL",
            State::GA => "GA",
            State::KY => "KY",
            State::MD => "MD",
            State::MS => "MS",
            State::NY => "NY",
            State::NC => "NC",
            State::OH => "OH",
            State::PA => "PA",
            State::SC => "SC",
            State::TN => "TN",
            State::VA => "VA",
            State::WV => "WV",
            State::MI => "MI",
            State::NJ => "NJ",
            State::VT => "VT",
            State::ME => "ME",
            State::CT => "CT",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            State::AL => "Alabama",
            State::GA => "Georgia",
            State::KY => "Kentucky",
            State::MD => "Maryland",
            State::MS => "Mississippi",
            State::NY => "New York",
            State::NC => "North Carolina",
            State::OH => "Ohio",
            State::PA => "Pennsylvania",
            State::SC => "South Carolina",
            State::TN => "Tennessee",
            State::VA => "Virginia",
            State::WV => "West Virginia",
            State::MI => "Michigan",
            State::NJ => "New Jersey",
            State::VT => "Vermont",
            State::ME => "Maine",
            State::CT => "Connecticut",
        }
    }

    /// Position in [`State::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_appalachian(self) -> bool {
        self.index() < 13
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let code = s.trim();
        State::ALL
            .iter()
            .copied()
            .find(|st| st.code() == code)
            .ok_or_else(|| Error::UnknownState(s.to_string()))
    }
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
