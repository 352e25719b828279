//! Pauli channel labels for one- and two-site correlators.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("(I,I) is not a correlator channel")]
    IdentityPair,
    #[error("channel {0} missing and not forced to zero by the model symmetry")]
    Missing(ChannelId),
}

/// Pauli axis label; `I` denotes the identity (single-site channels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::I, Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::I => 0,
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::I => "1",
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// One of the 15 nontrivial channels `<sigma^alpha_i sigma^beta_j>`;
/// `I` on one side gives a single-site mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelId {
    pub alpha: Axis,
    pub beta: Axis,
}

impl ChannelId {
    pub fn new(alpha: Axis, beta: Axis) -> Result<Self, ChannelError> {
        if alpha == Axis::I && beta == Axis::I {
            return Err(ChannelError::IdentityPair);
        }
        Ok(Self { alpha, beta })
    }

    /// All 15 nontrivial channels.
    pub fn all() -> Vec<ChannelId> {
        let mut v = Vec::with_capacity(15);
        for &a in &Axis::ALL {
            for &b in &Axis::ALL {
                if a == Axis::I && b == Axis::I {
                    continue;
                }
                v.push(ChannelId { alpha: a, beta: b });
            }
        }
        v
    }

    /// The 9 genuine two-site channels.
    pub fn two_site() -> Vec<ChannelId> {
        Self::all()
            .into_iter()
            .filter(|c| c.alpha != Axis::I && c.beta != Axis::I)
            .collect()
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.alpha.label(), self.beta.label())
    }
}

/// Channel values for one ordered site pair (i, j). Unset entries are
/// either filled by an explicit symmetry default or reported missing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairChannels {
    values: [[Option<f64>; 4]; 4],
}

impl PairChannels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, ch: ChannelId, value: f64) {
        self.values[ch.alpha.index()][ch.beta.index()] = Some(value);
    }

    pub fn get(&self, ch: ChannelId) -> Option<f64> {
        self.values[ch.alpha.index()][ch.beta.index()]
    }

    /// Value with unset channels read as zero (used only after defaults
    /// have been applied and completeness checked).
    pub fn get_or_zero(&self, ch: ChannelId) -> f64 {
        self.get(ch).unwrap_or(0.0)
    }

    /// Fill the listed channels with zero where unset. The list is the
    /// model's explicit statement of symmetry-forced vanishing channels.
    pub fn apply_zero_defaults(&mut self, forced_zero: &[ChannelId]) {
        for &ch in forced_zero {
            if self.get(ch).is_none() {
                self.set(ch, 0.0);
            }
        }
    }

    /// Error with the first missing channel named, if any of the 15 is unset.
    pub fn require_complete(&self) -> Result<(), ChannelError> {
        for ch in ChannelId::all() {
            if self.get(ch).is_none() {
                return Err(ChannelError::Missing(ch));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_channels() {
        assert_eq!(ChannelId::all().len(), 15);
        assert_eq!(ChannelId::two_site().len(), 9);
        assert_eq!(
            ChannelId::new(Axis::I, Axis::I).unwrap_err(),
            ChannelError::IdentityPair
        );
    }

    #[test]
    fn missing_channel_is_named() {
        let mut ch = PairChannels::new();
        for c in ChannelId::all() {
            ch.set(c, 0.0);
        }
        let mut incomplete = PairChannels::new();
        for c in ChannelId::two_site() {
            incomplete.set(c, 0.0);
        }
        assert!(ch.require_complete().is_ok());
        let err = incomplete.require_complete().unwrap_err();
        assert!(matches!(err, ChannelError::Missing(_)));
    }
}
