use serde::{Deserialize, Serialize};

/// Positional state of a net: token count per place (declaration order) and
/// firing count per counted transition (declaration order of counted ones).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marking {
    pub tokens: Vec<u32>,
    pub counters: Vec<u32>,
}

impl Marking {
    pub fn new(tokens: Vec<u32>, counters: Vec<u32>) -> Self {
        Marking { tokens, counters }
    }

    pub fn total_tokens(&self) -> u64 {
        self.tokens.iter().map(|&t| u64::from(t)).sum()
    }

    /// Componentwise `self >= other` over tokens and counters.
    pub fn covers(&self, other: &Marking) -> bool {
        self.tokens.iter().zip(&other.tokens).all(|(a, b)| a >= b)
            && self.counters.iter().zip(&other.counters).all(|(a, b)| a >= b)
    }
}
