use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::grid::PhaseGrid;
use crate::metrics::CommunityType;

/// A boundary between two labelled regions of a [`PhaseGrid`], as a chain of
/// `(pa0, pa1)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPolyline {
    pub pair: (String, String),
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Points live on a doubled lattice: cell `(i, j)` sits at `(2i, 2j)`, edge
/// midpoints and block centers at odd coordinates.
type Pt = (usize, usize);

fn pair_key(a: CommunityType, b: CommunityType) -> (String, String) {
    let (a, b) = (a.label(), b.label());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Traces every two-label interface of `grid` with marching squares on the
/// cell centers. Each 2x2 block contributes segments between the midpoints of
/// its mixed edges; where an interface meets a third label the segment ends at
/// the block center.
pub fn extract_boundaries(grid: &PhaseGrid) -> Vec<BoundaryPolyline> {
    let (n0, n1) = (grid.pa0.resolution, grid.pa1.resolution);
    let mut segments: BTreeMap<(String, String), Vec<(Pt, Pt)>> = BTreeMap::new();

    for i in 0..n0.saturating_sub(1) {
        for j in 0..n1.saturating_sub(1) {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let labels = corners.map(|(a, b)| grid.get(a, b));
            let center = (2 * i + 1, 2 * j + 1);
            let mut by_pair: BTreeMap<(String, String), Vec<Pt>> = BTreeMap::new();
            for k in 0..4 {
                let (p, q) = (corners[k], corners[(k + 1) % 4]);
                if labels[k] != labels[(k + 1) % 4] {
                    by_pair
                        .entry(pair_key(labels[k], labels[(k + 1) % 4]))
                        .or_default()
                        .push((p.0 + q.0, p.1 + q.1));
                }
            }
            for (pair, mids) in by_pair {
                let out = segments.entry(pair).or_default();
                match mids.len() {
                    2 => out.push((mids[0], mids[1])),
                    4 => {
                        // Saddle: keep the diagonal holding the first corner's
                        // label connected.
                        out.push((mids[0], mids[1]));
                        out.push((mids[2], mids[3]));
                    }
                    _ => out.extend(mids.into_iter().map(|m| (m, center))),
                }
            }
        }
    }

    let to_xy = |(x, y): Pt| {
        (
            grid.pa0.min + (x as f64 / 2.0 + 0.5) * grid.pa0.width(),
            grid.pa1.min + (y as f64 / 2.0 + 0.5) * grid.pa1.width(),
        )
    };
    let mut out = Vec::new();
    for (pair, segs) in segments {
        for (chain, closed) in chain_segments(&segs) {
            out.push(BoundaryPolyline {
                pair: pair.clone(),
                points: chain.into_iter().map(to_xy).collect(),
                closed,
            });
        }
    }
    out
}

/// Joins segments into maximal chains, breaking at points whose degree is not
/// two. Remaining cycles are emitted as closed chains.
fn chain_segments(segs: &[(Pt, Pt)]) -> Vec<(Vec<Pt>, bool)> {
    let mut adj: BTreeMap<Pt, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segs.iter().enumerate() {
        adj.entry(a).or_default().push(k);
        adj.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut chains = Vec::new();
    let other = |k: usize, p: Pt| if segs[k].0 == p { segs[k].1 } else { segs[k].0 };

    let walk = |start: Pt, first: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        let mut at = start;
        let mut k = first;
        loop {
            used[k] = true;
            at = other(k, at);
            chain.push(at);
            let next = match adj[&at].as_slice() {
                [x, y] => [*x, *y].into_iter().find(|&e| !used[e]),
                _ => None,
            };
            match next {
                Some(e) => k = e,
                None => break,
            }
        }
        chain
    };

    let ends: BTreeSet<Pt> = adj
        .iter()
        .filter(|(_, e)| e.len() != 2)
        .map(|(p, _)| *p)
        .collect();
    for &p in &ends {
        for &k in &adj[&p] {
            if !used[k] {
                chains.push((walk(p, k, &mut used), false));
            }
        }
    }
    for k in 0..segs.len() {
        if !used[k] {
            chains.push((walk(segs[k].0, k, &mut used), true));
        }
    }
    chains
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Group;
    use crate::phase::{scan_grid, Axis, PhasePoint};

    fn synthetic(res: usize, f: impl Fn(f64, f64) -> CommunityType) -> PhaseGrid {
        let pa0 = Axis::unit("pa0", res);
        let pa1 = Axis::unit("pa1", res);
        let cells = (0..res * res)
            .map(|k| f(pa0.center(k / res), pa1.center(k % res)))
            .collect();
        PhaseGrid {
            fixed: PhasePoint::new(0.5, 2.0, 1.0),
            pa0,
            pa1,
            cells,
        }
    }

    #[test]
    fn uniform_grid_has_no_boundary() {
        let g = synthetic(10, |_, _| CommunityType::Assortative);
        assert!(extract_boundaries(&g).is_empty());
    }

    #[test]
    fn straight_split_is_one_polyline_within_half_cell() {
        let res = 20;
        let g = synthetic(res, |x, y| {
            if x + 0.5 * y < 0.6 {
                CommunityType::Disassortative
            } else {
                CommunityType::Assortative
            }
        });
        let b = extract_boundaries(&g);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].pair, ("A".to_string(), "D".to_string()));
        assert!(!b[0].closed);
        let h = 1.0 / res as f64;
        for &(x, y) in &b[0].points {
            assert!(
                (x + 0.5 * y - 0.6).abs() <= 1.5 * h / 2.0 + 1e-12,
                "({x}, {y})"
            );
        }
    }

    #[test]
    fn enclosed_region_is_closed() {
        let g = synthetic(30, |x, y| {
            if (x - 0.5).powi(2) + (y - 0.5).powi(2) < 0.04 {
                CommunityType::SourceBasin { basin: Group::ONE }
            } else {
                CommunityType::Assortative
            }
        });
        let b = extract_boundaries(&g);
        assert_eq!(b.len(), 1);
        assert!(b[0].closed);
        assert_eq!(b[0].points.first(), b[0].points.last());
    }

    #[test]
    fn triple_junction_meets_at_block_center() {
        let g = synthetic(20, |x, y| {
            if x < 0.5 {
                CommunityType::Disassortative
            } else if y < 0.5 {
                CommunityType::Assortative
            } else {
                CommunityType::SourceBasin { basin: Group::ZERO }
            }
        });
        let b = extract_boundaries(&g);
        assert_eq!(b.len(), 3);
        let junction = (0.5, 0.5);
        for line in &b {
            let touches = [line.points[0], *line.points.last().unwrap()]
                .iter()
                .any(|&(x, y)| (x - junction.0).abs() < 1e-12 && (y - junction.1).abs() < 1e-12);
            assert!(touches, "{:?}", line.pair);
        }
    }

    #[test]
    fn reference_plane_boundaries() {
        let g = scan_grid(PhasePoint::new(0.5, 2.0, 1.0), 101).unwrap();
        let b = extract_boundaries(&g);
        let pairs: BTreeSet<_> = b.iter().map(|l| l.pair.clone()).collect();
        assert!(pairs.contains(&("A".to_string(), "SB1".to_string())));
        let width = g.pa0.width();
        for line in &b {
            for w in line.points.windows(2) {
                let d = ((w[0].0 - w[1].0).powi(2) + (w[0].1 - w[1].1).powi(2)).sqrt();
                assert!(d <= width + 1e-12);
            }
        }
    }
}
