use crate::{Error, Result};

/// Memory parameter `p ∈ [0, 1]` with the derived reinforcement
/// coefficient `q = 2p − 1`.
///
/// `q` is the canonical parameter: every formula downstream is written in
/// terms of it. When built from `q`, `p` is `(q + 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryParams {
    p: f64,
    q: f64,
}

impl MemoryParams {
    pub fn from_p(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::MemoryParameter(p));
        }
        Ok(Self {
            p,
            q: 2.0 * p - 1.0,
        })
    }

    pub fn from_q(q: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&q) {
            return Err(Error::MemoryParameter((q + 1.0) / 2.0));
        }
        Ok(Self {
            p: (q + 1.0) / 2.0,
            q,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Fails for `p = 1`, where the walk freezes into its first letter and
    /// the variance and limit statements no longer apply.
    pub fn require_subcritical(&self) -> Result<Self> {
        if self.q < 1.0 {
            Ok(*self)
        } else {
            Err(Error::DegenerateMemory(self.q))
        }
    }

    /// `p = 3/4`, exactly.
    pub fn is_critical(&self) -> bool {
        self.q == 0.5
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if (-1.0..1.0).contains(&q) {
        Ok(())
    } else if q == 1.0 {
        Err(Error::DegenerateMemory(q))
    } else {
        Err(Error::MemoryParameter((q + 1.0) / 2.0))
    }
}
