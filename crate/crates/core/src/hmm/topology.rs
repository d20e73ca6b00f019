use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TopologyKind {
    LeftToRight,
    Circular,
}

/// Markov order of the state chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    First,
    Second,
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        match o {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            other => Err(format!("unsupported order {other}")),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub order: Order,
    pub num_states: usize,
}

impl TopologySpec {
    pub fn new(kind: TopologyKind, order: Order, num_states: usize) -> Result<Self> {
        let spec = Self {
            kind,
            order,
            num_states,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TopologyKind::Circular if self.num_states < 2 => Err(Error::Topology(format!(
                "a circular topology needs at least 2 states, got {}",
                self.num_states
            ))),
            _ if self.num_states == 0 => Err(Error::Topology("no states".into())),
            _ => Ok(()),
        }
    }

    /// Allowed first-order moves: self-loop and successor, plus the wrap
    /// from the last state back to the first for circular chains.
    pub fn first_order_mask(&self) -> Vec<bool> {
        let n = self.num_states;
        let mut mask = vec![false; n * n];
        for i in 0..n {
            mask[i * n + i] = true;
            if i + 1 < n {
                mask[i * n + i + 1] = true;
            }
        }
        if self.kind == TopologyKind::Circular {
            mask[(n - 1) * n] = true;
        }
        mask
    }

    /// `(i, j, k)` is allowed exactly when `i -> j` and `j -> k` are.
    pub fn second_order_mask(&self) -> Vec<bool> {
        let n = self.num_states;
        let first = self.first_order_mask();
        let mut mask = vec![false; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    mask[(i * n + j) * n + k] = first[i * n + j] && first[j * n + k];
                }
            }
        }
        mask
    }

    /// Left-to-right chains start in the first state; circular ones anywhere.
    pub fn initial_mask(&self) -> Vec<bool> {
        match self.kind {
            TopologyKind::LeftToRight => (0..self.num_states).map(|i| i == 0).collect(),
            TopologyKind::Circular => vec![true; self.num_states],
        }
    }
}
