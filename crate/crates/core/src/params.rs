//! Primitive model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Group;

/// Move probabilities for nodes of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    /// Probability that a focal node attempts a swap move, in `[0, 1]`.
    pub p_swap: f64,
    /// Probability that a swap keeps the same-group endpoint, in `[0, 1]`.
    pub p_assort: f64,
    /// Per-edge deletion probability of a remove move, in `(0, 1]`.
    pub alpha: f64,
    /// Probability that a change move removes rather than adds, in `(0, 1)`.
    #[serde(default = "default_p_remove")]
    pub p_remove: f64,
}

fn default_p_remove() -> f64 {
    0.5
}

impl GroupParams {
    pub fn new(p_swap: f64, p_assort: f64, alpha: f64) -> Self {
        Self {
            p_swap,
            p_assort,
            alpha,
            p_remove: 0.5,
        }
    }

    pub fn with_p_remove(mut self, p_remove: f64) -> Self {
        self.p_remove = p_remove;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let closed = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must lie in [0, 1]",
                })
            }
        };
        closed("p_swap", self.p_swap)?;
        closed("p_assort", self.p_assort)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.p_remove > 0.0 && self.p_remove < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p_remove",
                value: self.p_remove,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(())
    }
}

/// Per-group move probabilities together with the group sizes `N_0`, `N_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub groups: [GroupParams; 2],
    pub group_sizes: [usize; 2],
}

impl ModelParams {
    pub fn new(groups: [GroupParams; 2], group_sizes: [usize; 2]) -> Result<Self> {
        let p = Self {
            groups,
            group_sizes,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.groups {
            g.validate()?;
        }
        for (i, &n) in self.group_sizes.iter().enumerate() {
            if n == 0 {
                return Err(Error::GroupTooSmall {
                    group: i,
                    size: 0,
                    required: 1,
                });
            }
        }
        Ok(())
    }

    pub fn group(&self, g: Group) -> &GroupParams {
        &self.groups[g.index()]
    }

    pub fn node_count(&self) -> usize {
        self.group_sizes[0] + self.group_sizes[1]
    }

    /// The parameter set of the density-versus-time reference run:
    /// `P^S = (0.7, 0.5)`, `P^A = (0.9, 0.8)`, `alpha = (0.2, 0.1)`,
    /// `N = (67, 33)`.
    pub fn reference_run() -> Self {
        Self::reference_run_sized([67, 33])
    }

    /// [`reference_run`](Self::reference_run) with other group sizes.
    pub fn reference_run_sized(group_sizes: [usize; 2]) -> Self {
        Self {
            groups: [
                GroupParams::new(0.7, 0.9, 0.2),
                GroupParams::new(0.5, 0.8, 0.1),
            ],
            group_sizes,
        }
    }
}
