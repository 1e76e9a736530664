//! Closed-form equilibrium of the evolution.
//!
//! Change moves fix the mean in-degree of each group at
//! `z* = (1 - P^R) / (alpha P^R)`. Swap moves then set the fraction `beta_r`
//! of group `r`'s in-edges that originate inside `r`:
//!
//! ```text
//!            P^S P^A + (1 - P^S)(1 - P^R)
//! beta_r = ---------------------------------------------------------------
//!          P^S (P^A + (1 - P^A) N_s/N_r) + (1 - P^S)(1 - P^R) N/N_r
//! ```
//!
//! and the predicted block densities follow from `e_rr = N_r z_r beta_r` and
//! `e_sr = N_r z_r (1 - beta_r)`. All formulas take `P^R` as a parameter; the
//! usual model is the special case `P^R = 1/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Group;
use crate::metrics::{classify, density_from_counts, CommunityType, DensityMatrix};
use crate::params::{GroupParams, ModelParams};

/// Equilibrium mean in-degree `(1 - P^R) / (alpha P^R)`; `1/alpha` at `P^R = 1/2`.
pub fn z_fixed_point(alpha: f64, p_remove: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "a positive removal probability is needed for a fixed point",
        });
    }
    if !(p_remove > 0.0 && p_remove < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p_remove",
            value: p_remove,
            reason: "must lie in (0, 1)",
        });
    }
    Ok((1.0 - p_remove) / (alpha * p_remove))
}

/// `beta_r` for a group of (possibly non-integer) size `n_r` facing a group
/// of size `n_s`.
pub fn beta_for_sizes(p: &GroupParams, n_r: f64, n_s: f64, group: Group) -> Result<f64> {
    let n = n_r + n_s;
    let change = (1.0 - p.p_swap) * (1.0 - p.p_remove);
    let numerator = p.p_swap * p.p_assort + change;
    let denominator = p.p_swap * (p.p_assort + (1.0 - p.p_assort) * n_s / n_r) + change * n / n_r;
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(Error::DegenerateEquilibrium {
            group: group.index(),
            denominator,
        });
    }
    let beta = numerator / denominator;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange {
            group: group.index(),
            value: beta,
        });
    }
    Ok(beta)
}

/// Equilibrium assortative fraction of group `r`'s in-edges.
pub fn beta_equilibrium(params: &ModelParams, r: Group) -> Result<f64> {
    params.validate()?;
    let n_r = params.group_sizes[r.index()] as f64;
    let n_s = params.group_sizes[r.other().index()] as f64;
    beta_for_sizes(params.group(r), n_r, n_s, r)
}

/// Predicted equilibrium of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub beta: [f64; 2],
    pub z_star: [f64; 2],
    /// Densities with `N_r` diagonal denominators (large-group form).
    pub omega: DensityMatrix,
    /// Densities with `N_r - 1` diagonal denominators, when both groups have
    /// at least two nodes.
    pub omega_exact: Option<DensityMatrix>,
    /// `z*_0 / z*_1`.
    pub b: f64,
    /// `N_0 / N_1`.
    pub c: f64,
}

impl MeanFieldSolution {
    /// Predicted block edge counts `e_rs`.
    pub fn expected_counts(&self, sizes: [f64; 2]) -> [[f64; 2]; 2] {
        let in_total = [sizes[0] * self.z_star[0], sizes[1] * self.z_star[1]];
        [
            [
                in_total[0] * self.beta[0],
                in_total[1] * (1.0 - self.beta[1]),
            ],
            [
                in_total[0] * (1.0 - self.beta[0]),
                in_total[1] * self.beta[1],
            ],
        ]
    }

    pub fn classify(&self) -> CommunityType {
        classify(&self.omega).expect("predicted densities are finite")
    }
}

/// Mean-field solution for real-valued group sizes.
pub fn solve_for_sizes(groups: &[GroupParams; 2], sizes: [f64; 2]) -> Result<MeanFieldSolution> {
    for (i, &n) in sizes.iter().enumerate() {
        if !(n > 0.0) {
            return Err(Error::InvalidParameter {
                name: "group_size",
                value: n,
                reason: if i == 0 {
                    "N_0 must be positive"
                } else {
                    "N_1 must be positive"
                },
            });
        }
    }
    let z_star = [
        z_fixed_point(groups[0].alpha, groups[0].p_remove)?,
        z_fixed_point(groups[1].alpha, groups[1].p_remove)?,
    ];
    let beta = [
        beta_for_sizes(&groups[0], sizes[0], sizes[1], Group::ZERO)?,
        beta_for_sizes(&groups[1], sizes[1], sizes[0], Group::ONE)?,
    ];
    let mut sol = MeanFieldSolution {
        beta,
        z_star,
        omega: DensityMatrix::from_entries([[0.0; 2]; 2])?,
        omega_exact: None,
        b: z_star[0] / z_star[1],
        c: sizes[0] / sizes[1],
    };
    let counts = sol.expected_counts(sizes);
    sol.omega = density_from_counts(counts, sizes, false)?;
    sol.omega_exact = density_from_counts(counts, sizes, true).ok();
    Ok(sol)
}

/// Predicted equilibrium densities for `params`.
pub fn omega_predicted(params: &ModelParams) -> Result<MeanFieldSolution> {
    params.validate()?;
    let sizes = params.group_sizes.map(|n| n as f64);
    solve_for_sizes(&params.groups, sizes)
}

/// Per-step probabilities of changing `e_rr`, given the current fraction
/// `beta_r`. The change-loss entry is per in-edge: the expected number of
/// within-group edges lost per step is `change_loss * z_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepProbabilities {
    pub swap_gain: f64,
    pub swap_loss: f64,
    pub change_gain: f64,
    pub change_loss: f64,
}

pub fn step_probabilities(
    params: &ModelParams,
    beta_r: f64,
    r: Group,
) -> Result<StepProbabilities> {
    if !(0.0..=1.0).contains(&beta_r) {
        return Err(Error::InvalidParameter {
            name: "beta_r",
            value: beta_r,
            reason: "must lie in [0, 1]",
        });
    }
    let p = params.group(r);
    let n = params.node_count() as f64;
    let frac_r = params.group_sizes[r.index()] as f64 / n;
    let frac_s = params.group_sizes[r.other().index()] as f64 / n;
    Ok(StepProbabilities {
        swap_gain: frac_r * p.p_swap * p.p_assort * (1.0 - beta_r) * frac_r,
        swap_loss: frac_r * p.p_swap * (1.0 - p.p_assort) * beta_r * frac_s,
        change_gain: (1.0 - p.p_swap) * (1.0 - p.p_remove) * frac_r * frac_r,
        change_loss: (1.0 - p.p_swap) * p.p_remove * frac_r * beta_r * p.alpha,
    })
}

/// Coefficients of the linear recurrence `e_rr <- slope * e_rr + intercept`
/// for a group whose in-edge total is held at `total_in`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCoefficients {
    pub slope: f64,
    pub intercept: f64,
}

impl RecurrenceCoefficients {
    pub fn new(params: &ModelParams, r: Group, total_in: f64) -> Result<Self> {
        params.validate()?;
        if !(total_in > 0.0) {
            return Err(Error::InvalidParameter {
                name: "total_in",
                value: total_in,
                reason: "in-edge total must be positive",
            });
        }
        let p = params.group(r);
        let n = params.node_count() as f64;
        let n_r = params.group_sizes[r.index()] as f64;
        let frac_r = n_r / n;
        let z = z_fixed_point(p.alpha, p.p_remove)?;
        let slope = 1.0
            - p.p_swap * n_r / (n * total_in)
                * (p.p_assort * frac_r + (1.0 - p.p_assort) * (1.0 - frac_r))
            - (1.0 - p.p_swap) * p.p_remove * p.alpha * z * n_r / (n * total_in);
        let intercept =
            (p.p_swap * p.p_assort + (1.0 - p.p_swap) * (1.0 - p.p_remove)) * frac_r * frac_r;
        Ok(Self { slope, intercept })
    }

    /// `intercept / (1 - slope)`.
    pub fn limit(&self) -> f64 {
        self.intercept / (1.0 - self.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceTrajectory {
    pub coefficients: RecurrenceCoefficients,
    /// `e_rr` after `0..=steps` steps.
    pub values: Vec<f64>,
    pub limit: f64,
}

/// Iterates the `e_rr` recurrence in closed form:
/// `e_rr(k) = B^k e_rr(0) + (B^k - 1)/(B - 1) C`.
pub fn recurrence_solve(
    params: &ModelParams,
    r: Group,
    e_rr0: f64,
    total_in: f64,
    steps: usize,
) -> Result<RecurrenceTrajectory> {
    let coefficients = RecurrenceCoefficients::new(params, r, total_in)?;
    let slope = coefficients.slope;
    if !(slope.abs() < 1.0) {
        return Err(Error::NonContractingRecurrence { slope });
    }
    let limit = coefficients.limit();
    let mut values = Vec::with_capacity(steps + 1);
    let mut power = 1.0f64;
    for _ in 0..=steps {
        // (B^k - 1)/(B - 1) C == (1 - B^k) * limit
        values.push(power * e_rr0 + (1.0 - power) * limit);
        power *= slope;
    }
    Ok(RecurrenceTrajectory {
        coefficients,
        values,
        limit,
    })
}

/// Maps parameters with any `P^R` to an equivalent set with `P^R = 1/2`:
/// `alpha' = alpha P^R / (1 - P^R)` and
/// `P^S' = P^S / (2 (1 - P^S)(1 - P^R) + P^S)`. Both the in-degree fixed
/// point and `beta_r` are unchanged.
///
/// Fails when `alpha'` would exceed 1, which is not a valid probability.
pub fn reparameterize_remove(params: &ModelParams) -> Result<ModelParams> {
    params.validate()?;
    let mut out = *params;
    for g in out.groups.iter_mut() {
        let pr = g.p_remove;
        let alpha = g.alpha * pr / (1.0 - pr);
        if alpha > 1.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "transformed removal probability exceeds 1",
            });
        }
        let p_swap = g.p_swap / (2.0 * (1.0 - g.p_swap) * (1.0 - pr) + g.p_swap);
        *g = GroupParams {
            p_swap,
            p_assort: g.p_assort,
            alpha,
            p_remove: 0.5,
        };
    }
    out.validate()?;
    Ok(out)
}
