//! The six toxicity labels and their frozen order.
//!
//! Every per-label array in the crate (record labels, prediction rows,
//! model heads, metric blocks) is indexed by [`Label::index`].

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub const NUM_LABELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Toxic,
    SevereToxic,
    Obscene,
    Threat,
    Insult,
    IdentityHate,
}

impl Label {
    pub const ALL: [Label; NUM_LABELS] = [
        Label::Toxic,
        Label::SevereToxic,
        Label::Obscene,
        Label::Threat,
        Label::Insult,
        Label::IdentityHate,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name as it appears in the dataset header.
    pub fn name(self) -> &'static str {
        match self {
            Label::Toxic => "toxic",
            Label::SevereToxic => "severe_toxic",
            Label::Obscene => "obscene",
            Label::Threat => "threat",
            Label::Insult => "insult",
            Label::IdentityHate => "identity_hate",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown label `{s}`")))
    }
}
