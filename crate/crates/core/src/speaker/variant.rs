use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::{Order, TopologyKind};

/// The four model families: topology kind crossed with Markov order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "LTRSPHMM1")]
    Ltrsphmm1,
    #[serde(rename = "LTRSPHMM2")]
    Ltrsphmm2,
    #[serde(rename = "CSPHMM1")]
    Csphmm1,
    #[serde(rename = "CSPHMM2")]
    Csphmm2,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Ltrsphmm1,
        Variant::Ltrsphmm2,
        Variant::Csphmm1,
        Variant::Csphmm2,
    ];

    pub fn kind(self) -> TopologyKind {
        match self {
            Variant::Ltrsphmm1 | Variant::Ltrsphmm2 => TopologyKind::LeftToRight,
            Variant::Csphmm1 | Variant::Csphmm2 => TopologyKind::Circular,
        }
    }

    pub fn order(self) -> Order {
        match self {
            Variant::Ltrsphmm1 | Variant::Csphmm1 => Order::First,
            Variant::Ltrsphmm2 | Variant::Csphmm2 => Order::Second,
        }
    }

    pub fn from_parts(kind: TopologyKind, order: Order) -> Self {
        match (kind, order) {
            (TopologyKind::LeftToRight, Order::First) => Variant::Ltrsphmm1,
            (TopologyKind::LeftToRight, Order::Second) => Variant::Ltrsphmm2,
            (TopologyKind::Circular, Order::First) => Variant::Csphmm1,
            (TopologyKind::Circular, Order::Second) => Variant::Csphmm2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ltrsphmm1 => "LTRSPHMM1",
            Variant::Ltrsphmm2 => "LTRSPHMM2",
            Variant::Csphmm1 => "CSPHMM1",
            Variant::Csphmm2 => "CSPHMM2",
        }
    }

    /// Name of the purely acoustic counterpart.
    pub fn acoustic_name(self) -> &'static str {
        match self {
            Variant::Ltrsphmm1 => "LTRHMM1",
            Variant::Ltrsphmm2 => "LTRHMM2",
            Variant::Csphmm1 => "CHMM1",
            Variant::Csphmm2 => "CHMM2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}
