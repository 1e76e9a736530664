//! Critical swap probability below which every `(P^A_0, P^A_1)` cell is
//! source-basin.
//!
//! With both groups sharing a swap probability `x` and `b < 1`, each of the
//! assortative, disassortative and two core-periphery regions leaves the unit
//! square at a value of `x` given by an implicit rational equation in
//! `(x, b, c)`. The critical value is the smallest such root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOUNDARY_NAMES: [&str; 4] = ["A", "D", "first_cp", "second_cp"];

const SCAN_STEP: f64 = 1e-3;
const MAX_BISECTIONS: usize = 200;

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        return None;
    }
    let v = num / den;
    v.is_finite().then_some(v)
}

/// Left-hand side minus right-hand side of the four boundary equations at
/// swap probability `x`, in the order of [`BOUNDARY_NAMES`]:
///
/// * A: `(1-b)(1+x)(1+c-x+cx) / (2x(1+c-x+cx+b(1-c)(1+x))) = 1`
/// * D: `[bcx² + x(1-x)(b+2bc-1)/2 + (1-x)²(bc+b-c-1)/4]
///       / [x²(1-b+bc) + x(1-x)(c+1+bc+b)/2] = 0`
/// * first CP (group 1 core): `[(1-bc)x² + x(1-x)(1 + 1/(c+1) - b/(c+1) - bc)/2
///       + (1-x)²(c+1-bc-b)/4] / [x²(1-bc+b) + x(1-x)(c+1-bc²+b-bc)/2] = 1`
/// * second CP (group 0 core): `[bcx² + x(1-x)(2bc+b-c)/2 + (1-x)²(bc-c+b-1)/4]
///       / [x²(c+bc-b) + x(1-x)(c+1+bc-b)/2] = 0`
///
/// `None` marks a vanishing denominator. The first-CP expression does not
/// always match the onset seen on a grid: at `b = 0.5, c = 1` its root is
/// near 0.298 while the corner cell leaves source-basin at `x = 1/3`.
pub fn boundary_residuals(x: f64, b: f64, c: f64) -> [Option<f64>; 4] {
    let y = 1.0 - x;
    let a = ratio(
        (1.0 - b) * (1.0 + x) * (1.0 + c - x + c * x),
        2.0 * x * (1.0 + c - x + c * x + b * (1.0 - c) * (1.0 + x)),
    )
    .map(|v| v - 1.0);
    let d = ratio(
        b * c * x * x
            + 0.5 * x * y * (b + 2.0 * b * c - 1.0)
            + 0.25 * y * y * (b * c + b - c - 1.0),
        x * x * (1.0 - b + b * c) + 0.5 * x * y * (c + 1.0 + b * c + b),
    );
    let first_cp = ratio(
        (1.0 - b * c) * x * x
            + 0.5 * x * y * (1.0 + 1.0 / (c + 1.0) - b / (c + 1.0) - b * c)
            + 0.25 * y * y * (c + 1.0 - b * c - b),
        x * x * (1.0 - b * c + b) + 0.5 * x * y * (c + 1.0 - b * c * c + b - b * c),
    )
    .map(|v| v - 1.0);
    let second_cp = ratio(
        b * c * x * x + 0.5 * x * y * (2.0 * b * c + b - c) + 0.25 * y * y * (b * c - c + b - 1.0),
        x * x * (c + b * c - b) + 0.5 * x * y * (c + 1.0 + b * c - b),
    );
    [a, d, first_cp, second_cp]
}

/// Root search result for one boundary equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCandidate {
    pub name: String,
    /// Smallest root in `(0, 1)`, or `None` when the scan found no sign change.
    pub root: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub iterations: usize,
    pub residual: Option<f64>,
}

impl RootCandidate {
    pub fn is_rootless(&self) -> bool {
        self.root.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSwap {
    pub b: f64,
    pub c: f64,
    /// True when `b > 1` and the equations were solved for `(1/b, 1/c)`.
    pub relabeled: bool,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub first_cp: Option<f64>,
    pub second_cp: Option<f64>,
    pub psstar: f64,
    pub diagnostics: Vec<RootCandidate>,
}

fn residual(k: usize, x: f64, b: f64, c: f64) -> Option<f64> {
    boundary_residuals(x, b, c)[k]
}

/// Smallest root of boundary equation `k` located by a uniform scan of
/// `(0, 1)` and refined by bisection to a bracket narrower than `tol`.
fn find_root(k: usize, b: f64, c: f64, tol: f64) -> RootCandidate {
    let mut out = RootCandidate {
        name: BOUNDARY_NAMES[k].to_string(),
        root: None,
        bracket: None,
        iterations: 0,
        residual: None,
    };
    let steps = (1.0 / SCAN_STEP).round() as usize;
    let grid = |i: usize| i as f64 * SCAN_STEP;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..steps {
        let x = grid(i);
        let Some(fx) = residual(k, x, b, c) else {
            prev = None;
            continue;
        };
        if fx == 0.0 {
            out.root = Some(x);
            out.bracket = Some([x, x]);
            out.residual = Some(0.0);
            return out;
        }
        if let Some((x0, f0)) = prev {
            if f0.signum() != fx.signum() {
                if let Some((root, iters, res)) = bisect(k, b, c, (x0, f0), (x, fx), tol) {
                    out.root = Some(root);
                    out.bracket = Some([x0, x]);
                    out.iterations = iters;
                    out.residual = Some(res);
                    return out;
                }
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Bisection on a sign-change bracket. Returns `None` if the bracket held a
/// pole rather than a root.
fn bisect(
    k: usize,
    b: f64,
    c: f64,
    (mut lo, mut f_lo): (f64, f64),
    (mut hi, f_hi): (f64, f64),
    tol: f64,
) -> Option<(f64, usize, f64)> {
    let bound = f_lo.abs().max(f_hi.abs());
    let mut iters = 0;
    while hi - lo >= tol && iters < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(k, mid, b, c)?;
        iters += 1;
        if f_mid == 0.0 {
            return Some((mid, iters, 0.0));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let res = residual(k, root, b, c)?;
    (res.abs() <= bound).then_some((root, iters, res))
}

/// Critical swap probability for degree ratio `b` and size ratio `c`: the
/// smallest root in `(0, 1)` over the four boundary equations. For `b > 1`
/// the groups are relabeled and the equations solved at `(1/b, 1/c)`.
pub fn critical_swap(b: f64, c: f64, tol: f64) -> Result<CriticalSwap> {
    for (name, v) in [("b", b), ("c", c), ("tol", tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "must be positive",
            });
        }
    }
    let relabeled = b > 1.0;
    let (bb, cc) = if relabeled {
        (1.0 / b, 1.0 / c)
    } else {
        (b, c)
    };
    let diagnostics: Vec<RootCandidate> = (0..4).map(|k| find_root(k, bb, cc, tol)).collect();
    let psstar = diagnostics
        .iter()
        .filter_map(|d| d.root)
        .fold(f64::INFINITY, f64::min);
    if !psstar.is_finite() {
        return Err(Error::NoCriticalSwap { b, c });
    }
    Ok(CriticalSwap {
        b,
        c,
        relabeled,
        a: diagnostics[0].root,
        d: diagnostics[1].root,
        first_cp: diagnostics[2].root,
        second_cp: diagnostics[3].root,
        psstar,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{scan_grid, PhasePoint};

    #[test]
    fn equal_degrees_annihilate_the_assortative_equation() {
        for i in 1..100 {
            let x = i as f64 / 100.0;
            for c in [0.5, 1.0, 2.0, 5.0] {
                assert_eq!(boundary_residuals(x, 1.0, c)[0], Some(-1.0));
            }
        }
    }

    #[test]
    fn residuals_at_reference_point() {
        // Values from a 40-digit evaluation of each expression.
        let r = boundary_residuals(0.5, 0.5, 2.0);
        let expect = [-1.0 / 22.0, 11.0 / 30.0, -7.0 / 18.0, 7.0 / 34.0];
        for k in 0..4 {
            assert!((r[k].unwrap() - expect[k]).abs() < 1e-14, "{k}: {:?}", r[k]);
        }
    }

    #[test]
    fn sign_scan_brackets_a_root() {
        let xs: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let bracketed = (0..4).any(|k| {
            xs.windows(2).any(|w| {
                match (
                    boundary_residuals(w[0], 0.5, 2.0)[k],
                    boundary_residuals(w[1], 0.5, 2.0)[k],
                ) {
                    (Some(a), Some(b)) => a.signum() != b.signum(),
                    _ => false,
                }
            })
        });
        assert!(bracketed);
    }

    #[test]
    fn reference_critical_value() {
        let cs = critical_swap(0.5, 2.0, 1e-10).unwrap();
        assert!(cs.psstar > 0.0 && cs.psstar < 1.0);
        let roots: Vec<f64> = [cs.a, cs.d, cs.first_cp, cs.second_cp]
            .into_iter()
            .flatten()
            .collect();
        assert_eq!(roots.len(), 4);
        assert_eq!(
            cs.psstar,
            roots.iter().cloned().fold(f64::INFINITY, f64::min)
        );
        for d in &cs.diagnostics {
            assert!(d.residual.unwrap().abs() < 1e-8, "{d:?}");
        }
        assert!(!cs.relabeled);
    }

    #[test]
    fn tolerance_refinement_consistent() {
        let fine = critical_swap(0.5, 2.0, 1e-10).unwrap();
        let coarse = critical_swap(0.5, 2.0, 1e-6).unwrap();
        assert!((fine.psstar - coarse.psstar).abs() < 1e-6);
    }

    #[test]
    fn equal_degrees_flag_rootless_assortative_equation() {
        let cs = critical_swap(1.0, 2.0, 1e-9).unwrap();
        assert!(cs.diagnostics[0].is_rootless());
        assert!(cs.a.is_none());
        // No swap probability empties the plane of other types.
        for ps in [0.05, 0.2, 0.4, 0.6] {
            let grid = scan_grid(PhasePoint::new(1.0, 2.0, ps), 41).unwrap();
            assert!(!grid.all_source_basin());
        }
        assert!(matches!(
            critical_swap(1.0, 1.0, 1e-9),
            Err(Error::NoCriticalSwap { .. })
        ));
    }

    #[test]
    fn invalid_inputs() {
        assert!(critical_swap(0.0, 2.0, 1e-6).is_err());
        assert!(critical_swap(0.5, 2.0, 0.0).is_err());
    }

    #[test]
    fn larger_degree_ratio_is_relabeled() {
        let a = critical_swap(0.5, 2.0, 1e-10).unwrap();
        let b = critical_swap(2.0, 0.5, 1e-10).unwrap();
        assert!(b.relabeled);
        assert_eq!(a.psstar, b.psstar);
    }

    #[test]
    fn critical_value_matches_grid_onset() {
        for &(b, c) in &[(0.5, 2.0), (0.25, 3.0), (0.8, 0.5), (2.0, 0.5)] {
            let cs = critical_swap(b, c, 1e-10).unwrap();
            let below = scan_grid(PhasePoint::new(b, c, cs.psstar - 0.01), 201).unwrap();
            let above = scan_grid(PhasePoint::new(b, c, cs.psstar + 0.01), 201).unwrap();
            assert!(below.all_source_basin(), "b={b} c={c} psstar={}", cs.psstar);
            assert!(
                !above.all_source_basin(),
                "b={b} c={c} psstar={}",
                cs.psstar
            );
        }
    }
}
