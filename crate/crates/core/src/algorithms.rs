//! The three built-in exploration algorithms, shipped as rule files.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::io::rulefile::parse_rule_file;
use crate::rules::RuleSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinId {
    /// Six robots, three fixed colors, range one. Not exclusive.
    A1Fixed,
    /// Five robots, five modifiable colors, range one. Exclusive.
    A1Modifiable,
    /// Seven robots without lights, range two. Exclusive.
    A2Nolights,
}

impl BuiltinId {
    pub const ALL: [BuiltinId; 3] = [
        BuiltinId::A1Fixed,
        BuiltinId::A1Modifiable,
        BuiltinId::A2Nolights,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinId::A1Fixed => "a1_fixed",
            BuiltinId::A1Modifiable => "a1_modifiable",
            BuiltinId::A2Nolights => "a2_nolights",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            BuiltinId::A1Fixed => include_str!("../rules/a1_fixed.rules"),
            BuiltinId::A1Modifiable => include_str!("../rules/a1_modifiable.rules"),
            BuiltinId::A2Nolights => include_str!("../rules/a2_nolights.rules"),
        }
    }

    /// Whether the algorithm never lets two robots cross one edge.
    pub fn exclusive(self) -> bool {
        !matches!(self, BuiltinId::A1Fixed)
    }
}

impl fmt::Display for BuiltinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BuiltinId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                format!("unknown built-in {s:?} (expected a1_fixed, a1_modifiable or a2_nolights)")
            })
    }
}

pub fn builtin(id: BuiltinId) -> RuleSet {
    parse_rule_file(id.source()).unwrap_or_else(|e| panic!("built-in {id} does not parse: {e}"))
}
