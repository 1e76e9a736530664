//! Network evolution by swap and change moves.
//!
//! Each step draws a focal node `i` uniformly. With probability `P^S(g(i))`
//! it attempts a swap: one existing in-edge `k -> i` and one absent edge
//! `j -> i` are drawn, and one of `k`, `j` keeps the edge. If `k` and `j`
//! share a group the survivor is a fair coin flip; otherwise, with
//! probability `P^A(g(i))` the endpoint in `g(i)` survives, else the other.
//! Failing the swap draw, it attempts a change: with probability
//! `P^R(g(i))` each in-edge of `i` is deleted independently with probability
//! `alpha(g(i))`, otherwise one absent edge `j -> i` is added.
//!
//! Time advances by `1/N` per step, no-ops included.

use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LabeledDigraph, NodeId};
use crate::meanfield::z_fixed_point;
use crate::metrics::{density, DensityMatrix};
use crate::params::ModelParams;
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Swap,
    Remove,
    Add,
}

/// What a single step did to the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveOutcome {
    /// A swap compared existing edge `existing -> focal` with candidate
    /// `candidate -> focal`; `rewired` is true when the candidate replaced it.
    Swap {
        focal: NodeId,
        existing: NodeId,
        candidate: NodeId,
        rewired: bool,
    },
    /// A remove move deleted the in-edges from `removed` (possibly none).
    Remove { focal: NodeId, removed: Vec<NodeId> },
    /// An add move inserted `source -> focal`.
    Add { focal: NodeId, source: NodeId },
    /// The attempted move had nothing to act on: a swap at a node with no
    /// in-edge or no absent in-edge, or an add at a saturated node.
    NoOp { focal: NodeId, attempted: MoveKind },
}

impl MoveOutcome {
    pub fn focal(&self) -> NodeId {
        match *self {
            MoveOutcome::Swap { focal, .. }
            | MoveOutcome::Remove { focal, .. }
            | MoveOutcome::Add { focal, .. }
            | MoveOutcome::NoOp { focal, .. } => focal,
        }
    }

    pub fn kind(&self) -> MoveKind {
        match self {
            MoveOutcome::Swap { .. } => MoveKind::Swap,
            MoveOutcome::Remove { .. } => MoveKind::Remove,
            MoveOutcome::Add { .. } => MoveKind::Add,
            MoveOutcome::NoOp { attempted, .. } => *attempted,
        }
    }

    pub fn is_noop(&self) -> bool {
        matches!(self, MoveOutcome::NoOp { .. })
    }

    /// Change in the total number of edges.
    pub fn edge_delta(&self) -> i64 {
        match self {
            MoveOutcome::Remove { removed, .. } => -(removed.len() as i64),
            MoveOutcome::Add { .. } => 1,
            _ => 0,
        }
    }
}

/// Performs one step of the evolution on `g`.
pub fn step(g: &mut LabeledDigraph, params: &ModelParams, rng: &mut RngHandle) -> MoveOutcome {
    let focal = rng.random_range(0..g.node_count());
    let gi = g.group(focal);
    let p = params.group(gi);

    if rng.random::<f64>() < p.p_swap {
        let Some(existing) = g.sample_in_edge(focal, rng).expect("focal in range") else {
            return MoveOutcome::NoOp {
                focal,
                attempted: MoveKind::Swap,
            };
        };
        let Some(candidate) = g.sample_non_in_edge(focal, rng).expect("focal in range") else {
            return MoveOutcome::NoOp {
                focal,
                attempted: MoveKind::Swap,
            };
        };
        debug_assert!(candidate != focal && !g.has_edge(candidate, focal));
        let gk = g.group(existing);
        let gj = g.group(candidate);
        let keep_candidate = if gk == gj {
            rng.random::<bool>()
        } else {
            let assortative = rng.random::<f64>() < p.p_assort;
            // Exactly one of k, j is in the focal node's group.
            (gj == gi) == assortative
        };
        if keep_candidate {
            g.remove_edge(existing, focal);
            g.add_edge(candidate, focal)
                .expect("candidate is a valid non-edge");
        }
        return MoveOutcome::Swap {
            focal,
            existing,
            candidate,
            rewired: keep_candidate,
        };
    }

    if rng.random::<f64>() < p.p_remove {
        let degree = g.in_degree(focal);
        let count = if degree == 0 {
            0
        } else if p.alpha >= 1.0 {
            degree
        } else {
            Binomial::new(degree as u64, p.alpha)
                .expect("alpha validated in (0, 1)")
                .sample(rng) as usize
        };
        let removed = g.remove_random_in_edges(focal, count, rng);
        MoveOutcome::Remove { focal, removed }
    } else {
        match g.sample_non_in_edge(focal, rng).expect("focal in range") {
            Some(source) => {
                g.add_edge(source, focal).expect("sampled a valid non-edge");
                MoveOutcome::Add { focal, source }
            }
            None => MoveOutcome::NoOp {
                focal,
                attempted: MoveKind::Add,
            },
        }
    }
}

/// Step counter; `t = steps / N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimClock {
    pub steps: u64,
    pub node_count: usize,
}

impl SimClock {
    pub fn new(node_count: usize) -> Self {
        Self {
            steps: 0,
            node_count,
        }
    }

    pub fn tick(&mut self) {
        self.steps += 1;
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 / self.node_count as f64
    }
}

/// Fraction of each group's in-edges that come from inside the group,
/// `e_rr / (e_rr + e_sr)`; `None` when the group has no in-edges.
pub fn empirical_beta(g: &LabeledDigraph) -> [Option<f64>; 2] {
    let e = g.block_edge_counts().0;
    let frac = |own: u64, other: u64| {
        let total = own + other;
        (total > 0).then(|| own as f64 / total as f64)
    };
    [frac(e[0][0], e[1][0]), frac(e[1][1], e[0][1])]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub omega: DensityMatrix,
    pub mean_in_degree: [f64; 2],
    pub beta: [Option<f64>; 2],
}

impl TrajectorySample {
    pub fn observe(g: &LabeledDigraph, t: f64) -> Result<Self> {
        let omega = density(g)?;
        let e = g.block_edge_counts();
        let sizes = g.group_sizes();
        let mean_in_degree = [
            e.in_total(crate::graph::Group::ZERO) as f64 / sizes[0] as f64,
            e.in_total(crate::graph::Group::ONE) as f64 / sizes[1] as f64,
        ];
        Ok(Self {
            t,
            omega,
            mean_in_degree,
            beta: empirical_beta(g),
        })
    }
}

/// Averages of the samples inside a trailing time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowAverage {
    pub omega: [[f64; 2]; 2],
    pub mean_in_degree: [f64; 2],
    /// Mean over samples where the fraction was defined.
    pub beta: [Option<f64>; 2],
    pub samples: usize,
    pub t_from: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<TrajectorySample>,
}

pub const TRAJECTORY_HEADER: &str = "t,w00,w01,w10,w11,z0,z1,beta0,beta1";

impl TrajectoryRecord {
    /// Averages over samples with `t >= t_end - fraction * (t_end - t_start)`.
    pub fn window_average(&self, fraction: f64) -> Option<WindowAverage> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        let t_from = last.t - fraction * (last.t - first.t);
        let window: Vec<&TrajectorySample> =
            self.samples.iter().filter(|s| s.t >= t_from).collect();
        let n = window.len() as f64;
        let mut omega = [[0.0; 2]; 2];
        let mut z = [0.0; 2];
        let mut beta_sum = [0.0; 2];
        let mut beta_n = [0usize; 2];
        for s in &window {
            for r in 0..2 {
                for c in 0..2 {
                    omega[r][c] += s.omega.w[r][c] / n;
                }
                z[r] += s.mean_in_degree[r] / n;
                if let Some(b) = s.beta[r] {
                    beta_sum[r] += b;
                    beta_n[r] += 1;
                }
            }
        }
        let beta = [0, 1].map(|r| (beta_n[r] > 0).then(|| beta_sum[r] / beta_n[r] as f64));
        Some(WindowAverage {
            omega,
            mean_in_degree: z,
            beta,
            samples: window.len(),
            t_from,
        })
    }

    /// CSV with header `t,w00,w01,w10,w11,z0,z1,beta0,beta1`; an undefined
    /// fraction is written as an empty field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for s in &self.samples {
            let w = s.omega.w;
            let b = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.t,
                w[0][0],
                w[0][1],
                w[1][0],
                w[1][1],
                s.mean_in_degree[0],
                s.mean_in_degree[1],
                b(s.beta[0]),
                b(s.beta[1]),
            )?;
        }
        Ok(())
    }
}

/// A graph evolving under fixed parameters with its own random stream.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: LabeledDigraph,
    params: ModelParams,
    clock: SimClock,
    rng: RngHandle,
}

impl Simulation {
    pub fn new(graph: LabeledDigraph, params: ModelParams, rng: RngHandle) -> Result<Self> {
        params.validate()?;
        if graph.group_sizes() != params.group_sizes {
            return Err(Error::Mismatch(format!(
                "graph group sizes {:?} differ from parameter group sizes {:?}",
                graph.group_sizes(),
                params.group_sizes
            )));
        }
        let clock = SimClock::new(graph.node_count());
        Ok(Self {
            graph,
            params,
            clock,
            rng,
        })
    }

    /// Starts from a directed Erdős–Rényi graph with edge probability `q`.
    pub fn from_erdos_renyi(params: ModelParams, q: f64, mut rng: RngHandle) -> Result<Self> {
        params.validate()?;
        let [n0, n1] = params.group_sizes;
        let graph = LabeledDigraph::erdos_renyi(n0, n1, q, &mut rng)?;
        Self::new(graph, params, rng)
    }

    pub fn graph(&self) -> &LabeledDigraph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut LabeledDigraph {
        &mut self.graph
    }

    pub fn into_graph(self) -> LabeledDigraph {
        self.graph
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn rng_mut(&mut self) -> &mut RngHandle {
        &mut self.rng
    }

    pub fn step(&mut self) -> MoveOutcome {
        let outcome = step(&mut self.graph, &self.params, &mut self.rng);
        self.clock.tick();
        outcome
    }

    /// Runs `sweeps * N` steps. Samples the state now and after every
    /// `sample_every` sweeps.
    pub fn run(&mut self, sweeps: u64, sample_every: u64) -> Result<TrajectoryRecord> {
        if sweeps == 0 {
            return Err(Error::InvalidParameter {
                name: "sweeps",
                value: 0.0,
                reason: "at least one sweep required",
            });
        }
        if sample_every == 0 {
            return Err(Error::InvalidParameter {
                name: "sample_every",
                value: 0.0,
                reason: "sampling interval must be at least one sweep",
            });
        }
        let n = self.graph.node_count();
        let mut record = TrajectoryRecord::default();
        record
            .samples
            .push(TrajectorySample::observe(&self.graph, self.clock.time())?);
        for sweep in 1..=sweeps {
            for _ in 0..n {
                self.step();
            }
            #[cfg(debug_assertions)]
            {
                let e = self.graph.block_edge_counts();
                debug_assert_eq!(e.total(), self.graph.edge_count() as u64);
            }
            if sweep % sample_every == 0 {
                record
                    .samples
                    .push(TrajectorySample::observe(&self.graph, self.clock.time())?);
            }
        }
        Ok(record)
    }
}

/// Edge probability for an Erdős–Rényi start whose mean in-degree is the
/// size-weighted fixed point `(N_0 z*_0 + N_1 z*_1) / N`, pulled inside the
/// interval accepted by [`LabeledDigraph::erdos_renyi`].
pub fn equilibrium_edge_probability(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let n = params.node_count();
    let mut mean = 0.0;
    for (g, &size) in params.groups.iter().zip(&params.group_sizes) {
        mean += size as f64 * z_fixed_point(g.alpha, g.p_remove)?;
    }
    let q = mean / n as f64 / (n as f64 - 1.0).max(1.0);
    let (lo, hi) = if n <= 4 {
        (0.0, 1.0)
    } else {
        (2.0 / n as f64, 1.0 - 2.0 / n as f64)
    };
    let margin = 1e-9;
    Ok(q.clamp(lo + margin, hi - margin))
}

/// Runs `replicas` independent simulations in parallel, replica `i` seeded
/// with `base_seed + i`. Records come back in replica order.
pub fn run_replicas(
    params: &ModelParams,
    q: f64,
    base_seed: u64,
    replicas: usize,
    sweeps: u64,
    sample_every: u64,
) -> Result<Vec<TrajectoryRecord>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let rng = RngHandle::new(base_seed.wrapping_add(i));
            Simulation::from_erdos_renyi(*params, q, rng)?.run(sweeps, sample_every)
        })
        .collect()
}
