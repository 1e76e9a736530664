use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{solve_for_sizes, MeanFieldSolution};
use crate::metrics::CommunityType;
use crate::params::GroupParams;

/// Mean in-degree of group 1 when turning ratios into concrete parameters.
pub const REFERENCE_MEAN_DEGREE: f64 = 10.0;
/// Size of group 1 when turning ratios into concrete parameters.
pub const REFERENCE_GROUP_SIZE: f64 = 1000.0;

/// Fixed coordinates of a plane: degree ratio `b = z_0/z_1`, size ratio
/// `c = N_0/N_1`, and the swap and remove probabilities shared by both groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub b: f64,
    pub c: f64,
    pub p_swap: f64,
    #[serde(default = "half")]
    pub p_remove: f64,
}

fn half() -> f64 {
    0.5
}

impl PhasePoint {
    pub fn new(b: f64, c: f64, p_swap: f64) -> Self {
        Self {
            b,
            c,
            p_swap,
            p_remove: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                })
            }
        };
        positive("b", self.b)?;
        positive("c", self.c)?;
        if !(self.p_swap > 0.0 && self.p_swap <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "p_swap",
                value: self.p_swap,
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

    /// Mean-field solution at `(P^A_0, P^A_1)`. Uses `z_1 = 10`, `N_1 = 1000`,
    /// `z_0 = b z_1`, `N_0 = c N_1`; the classification depends on the ratios
    /// only.
    pub fn solve(&self, p_assort: [f64; 2]) -> Result<MeanFieldSolution> {
        let z = [self.b * REFERENCE_MEAN_DEGREE, REFERENCE_MEAN_DEGREE];
        let sizes = [self.c * REFERENCE_GROUP_SIZE, REFERENCE_GROUP_SIZE];
        let groups = [0, 1].map(|g| GroupParams {
            p_swap: self.p_swap,
            p_assort: p_assort[g],
            alpha: (1.0 - self.p_remove) / (self.p_remove * z[g]),
            p_remove: self.p_remove,
        });
        solve_for_sizes(&groups, sizes)
    }

    pub fn classify(&self, p_assort: [f64; 2]) -> Result<CommunityType> {
        Ok(self.solve(p_assort)?.classify())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub resolution: usize,
}

impl Axis {
    pub fn unit(name: &str, resolution: usize) -> Self {
        Self {
            name: name.to_string(),
            min: 0.0,
            max: 1.0,
            resolution,
        }
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.resolution as f64
    }

    /// Center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    /// Index of the cell containing `x`, clamped to the axis.
    pub fn cell_of(&self, x: f64) -> usize {
        let i = ((x - self.min) / self.width()).floor();
        (i.max(0.0) as usize).min(self.resolution - 1)
    }
}

/// Classification of every cell of a `(P^A_0, P^A_1)` grid, evaluated at
/// cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub fixed: PhasePoint,
    pub pa0: Axis,
    pub pa1: Axis,
    /// Row-major by `pa0`: cell `(i, j)` is at `i * pa1.resolution + j`.
    pub cells: Vec<CommunityType>,
}

pub const PHASE_HEADER: &str = "pa0,pa1,kind,core,basin";

impl PhaseGrid {
    pub fn get(&self, i: usize, j: usize) -> CommunityType {
        self.cells[i * self.pa1.resolution + j]
    }

    /// Classification of the cell containing `(pa0, pa1)`.
    pub fn at(&self, pa0: f64, pa1: f64) -> CommunityType {
        self.get(self.pa0.cell_of(pa0), self.pa1.cell_of(pa1))
    }

    pub fn count(&self, pred: impl Fn(&CommunityType) -> bool) -> usize {
        self.cells.iter().filter(|t| pred(t)).count()
    }

    pub fn all_source_basin(&self) -> bool {
        self.cells.iter().all(CommunityType::is_source_basin)
    }

    /// CSV `pa0,pa1,kind,core,basin`, one row per cell; absent roles are
    /// empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{PHASE_HEADER}")?;
        for i in 0..self.pa0.resolution {
            for j in 0..self.pa1.resolution {
                let t = self.get(i, j);
                let role =
                    |g: Option<crate::graph::Group>| g.map(|g| g.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.pa0.center(i),
                    self.pa1.center(j),
                    t.code(),
                    role(t.core()),
                    role(t.basin()),
                )?;
            }
        }
        Ok(())
    }
}

/// Classifies the mean-field densities over a `resolution x resolution`
/// grid of the unit square in `(P^A_0, P^A_1)`.
pub fn scan_grid(fixed: PhasePoint, resolution: usize) -> Result<PhaseGrid> {
    fixed.validate()?;
    if resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            value: resolution as f64,
            reason: "at least two cells per axis",
        });
    }
    let pa0 = Axis::unit("pa0", resolution);
    let pa1 = Axis::unit("pa1", resolution);
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / resolution, k % resolution);
            fixed.classify([pa0.center(i), pa1.center(j)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseGrid {
        fixed,
        pa0,
        pa1,
        cells,
    })
}
