use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::RunConfig;
use super::Command;
use crate::dynamics::{equilibrium_edge_probability, run_replicas, WindowAverage};
use crate::error::{Error, Result};
use crate::graph::LabeledDigraph;
use crate::meanfield::omega_predicted;
use crate::metrics::{
    classify, density, density_degree_normalized_graph, density_from_counts, CommunityType,
    DensityMatrix, Normalization,
};
use crate::phase::{critical_swap, extract_boundaries, scan_grid, PhasePoint};

pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

const DEFAULT_SWEEPS: u64 = 500;
const DEFAULT_WINDOW: f64 = 0.2;
const DEFAULT_RESOLUTION: usize = 201;
const DEFAULT_TOL: f64 = 1e-10;

/// Runs `cmd` inside a worker pool sized by `jobs`.
pub fn run(cmd: &Command) -> Result<()> {
    let cfg = cmd.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(match cfg.jobs {
            Some(0) => return Err(Error::Usage("jobs must be at least 1".into())),
            Some(j) => j,
            None => 0,
        })
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cmd {
        Command::Simulate(_) => simulate(cfg),
        Command::Meanfield(_) => meanfield(cfg),
        Command::Classify(_) => classify_cmd(cfg),
        Command::Phase(_) => phase(cfg),
        Command::Psstar(_) => psstar(cfg),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn print_json(value: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Prints `value` and, when an output directory was requested, also writes
/// it to `<out>/<name>`.
fn emit(cfg: &RunConfig, name: &str, value: &Value) -> Result<()> {
    if let Some(dir) = &cfg.out {
        create_dir(dir)?;
        write_json(&dir.join(name), value)?;
    }
    print_json(value)
}

#[derive(Debug, Serialize)]
struct Summary {
    window: f64,
    replicas: usize,
    omega: [[f64; 2]; 2],
    mean_in_degree: [f64; 2],
    beta: [Option<f64>; 2],
    empirical_type: CommunityType,
    predicted_omega: [[f64; 2]; 2],
    predicted_omega_exact: Option<[[f64; 2]; 2]>,
    predicted_beta: [f64; 2],
    predicted_z: [f64; 2],
    predicted_type: CommunityType,
    /// Largest `|omega - predicted_omega|` entry.
    max_deviation: f64,
    per_replica: Vec<WindowAverage>,
}

fn mean_of(avgs: &[WindowAverage]) -> ([[f64; 2]; 2], [f64; 2], [Option<f64>; 2]) {
    let n = avgs.len() as f64;
    let mut omega = [[0.0; 2]; 2];
    let mut z = [0.0; 2];
    for a in avgs {
        for r in 0..2 {
            for s in 0..2 {
                omega[r][s] += a.omega[r][s] / n;
            }
            z[r] += a.mean_in_degree[r] / n;
        }
    }
    let beta = [0, 1].map(|r| {
        let vals: Vec<f64> = avgs.iter().filter_map(|a| a.beta[r]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    });
    (omega, z, beta)
}

fn simulate(mut cfg: RunConfig) -> Result<()> {
    let params = cfg.model()?;
    let sweeps = cfg.sweeps.unwrap_or(DEFAULT_SWEEPS);
    let sample_every = cfg.sample_every.unwrap_or(1);
    let replicas = cfg.replicas.unwrap_or(1);
    let window = cfg.window.unwrap_or(DEFAULT_WINDOW);
    let seed = cfg.seed.unwrap_or(0);
    if sweeps == 0 || sample_every == 0 || replicas == 0 {
        return Err(Error::Usage(
            "sweeps, sample_every and replicas must be at least 1".into(),
        ));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::Usage(format!("window {window} must lie in (0, 1]")));
    }
    let q = match cfg.q {
        Some(q) => q,
        None => equilibrium_edge_probability(&params)?,
    };
    let predicted = omega_predicted(&params)?;

    let dir = cfg.out_dir();
    cfg.sweeps = Some(sweeps);
    cfg.sample_every = Some(sample_every);
    cfg.replicas = Some(replicas);
    cfg.window = Some(window);
    cfg.seed = Some(seed);
    cfg.q = Some(q);
    cfg.out = Some(dir.clone());
    let [g0, g1] = params.groups;
    cfg.p_swap0 = Some(g0.p_swap);
    cfg.p_swap1 = Some(g1.p_swap);
    cfg.p_assort0 = Some(g0.p_assort);
    cfg.p_assort1 = Some(g1.p_assort);
    cfg.alpha0 = Some(g0.alpha);
    cfg.alpha1 = Some(g1.alpha);
    cfg.p_remove0 = Some(g0.p_remove);
    cfg.p_remove1 = Some(g1.p_remove);
    cfg.n0 = Some(params.group_sizes[0]);
    cfg.n1 = Some(params.group_sizes[1]);

    create_dir(&dir)?;
    let records = run_replicas(&params, q, seed, replicas, sweeps, sample_every)?;
    let mut files = Vec::new();
    let mut avgs = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let name = format!("traj_r{i}.csv");
        let mut out = create(&dir.join(&name))?;
        rec.write_csv(&mut out)?;
        out.flush()?;
        files.push(name);
        avgs.push(
            rec.window_average(window)
                .expect("run records at least one sample"),
        );
    }

    let (omega, mean_in_degree, beta) = mean_of(&avgs);
    let empirical_type = classify(&DensityMatrix::from_entries(omega)?)?;
    let mut max_deviation: f64 = 0.0;
    for r in 0..2 {
        for s in 0..2 {
            max_deviation = max_deviation.max((omega[r][s] - predicted.omega.w[r][s]).abs());
        }
    }
    let summary = Summary {
        window,
        replicas,
        omega,
        mean_in_degree,
        beta,
        empirical_type,
        predicted_omega: predicted.omega.w,
        predicted_omega_exact: predicted.omega_exact.map(|m| m.w),
        predicted_beta: predicted.beta,
        predicted_z: predicted.z_star,
        predicted_type: predicted.classify(),
        max_deviation,
        per_replica: avgs,
    };
    write_json(&dir.join("config.json"), &cfg.to_value())?;
    let run = json!({
        "build": BUILD_ID,
        "config": cfg.to_value(),
        "params": params,
        "seed": seed,
        "replica_seeds": (0..replicas as u64).map(|i| seed.wrapping_add(i)).collect::<Vec<_>>(),
        "sweeps": sweeps,
        "trajectories": files,
    });
    write_json(&dir.join("run.json"), &run)?;
    let summary = serde_json::to_value(&summary)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

fn meanfield(cfg: RunConfig) -> Result<()> {
    let params = cfg.model()?;
    let sol = omega_predicted(&params)?;
    let value = json!({
        "beta": sol.beta,
        "z": sol.z_star,
        "omega": sol.omega.w,
        "omega_exact": sol.omega_exact.map(|m| m.w),
        "b": sol.b,
        "c": sol.c,
        "type": sol.classify(),
        "params": params,
        "config": cfg.to_value(),
        "build": BUILD_ID,
    });
    emit(&cfg, "meanfield.json", &value)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OmegaFile {
    Bare([[f64; 2]; 2]),
    Named { omega: [[f64; 2]; 2] },
    Matrix { w: [[f64; 2]; 2] },
}

fn read_omega(path: &Path) -> Result<[[f64; 2]; 2]> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let parsed: OmegaFile =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: expected a 2x2 density matrix: {e}", path.display()),
        })?;
    Ok(match parsed {
        OmegaFile::Bare(w) | OmegaFile::Named { omega: w } | OmegaFile::Matrix { w } => w,
    })
}

fn classify_cmd(cfg: RunConfig) -> Result<()> {
    let sources = [
        cfg.omega.is_some(),
        cfg.omega_file.is_some(),
        cfg.graph.is_some(),
    ];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(Error::Usage(
            "give exactly one of inline densities (w00..w11), omega_file or graph".into(),
        ));
    }
    let m = if let Some(w) = cfg.omega {
        DensityMatrix::from_entries(w)?
    } else if let Some(path) = &cfg.omega_file {
        DensityMatrix::from_entries(read_omega(path)?)?
    } else {
        let path = cfg.graph.as_ref().expect("one source present");
        let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let g = LabeledDigraph::read_edge_list(BufReader::new(file))?;
        match cfg.normalization.unwrap_or(Normalization::PossiblePairs) {
            Normalization::PossiblePairs => density(&g)?,
            Normalization::PossiblePairsLargeN => {
                let sizes = g.group_sizes();
                density_from_counts(
                    g.block_edge_counts().as_f64(),
                    [sizes[0] as f64, sizes[1] as f64],
                    false,
                )?
            }
            Normalization::DegreeProduct => density_degree_normalized_graph(&g)?,
            Normalization::External => {
                return Err(Error::Usage(
                    "normalization `external` does not apply to graphs".into(),
                ))
            }
        }
    };
    let t = classify(&m)?;
    let mut value = serde_json::to_value(t)?;
    let obj = value.as_object_mut().expect("type serializes to an object");
    obj.insert("omega".into(), json!(m.w));
    obj.insert("normalization".into(), json!(m.normalization));
    obj.insert("config".into(), cfg.to_value());
    emit(&cfg, "classify.json", &value)
}

fn file_tag(x: f64) -> String {
    format!("ps{x}")
}

fn phase(mut cfg: RunConfig) -> Result<()> {
    let b = cfg.b.unwrap_or(0.5);
    let c = cfg.c.unwrap_or(2.0);
    let swaps = cfg.p_swap.clone().unwrap_or_else(|| vec![1.0]);
    let p_remove = cfg.p_remove.unwrap_or(0.5);
    let resolution = cfg.resolution.unwrap_or(DEFAULT_RESOLUTION);
    if swaps.is_empty() {
        return Err(Error::Usage("no swap probabilities to scan".into()));
    }
    let dir = cfg.out_dir();
    cfg.b = Some(b);
    cfg.c = Some(c);
    cfg.p_swap = Some(swaps.clone());
    cfg.p_remove = Some(p_remove);
    cfg.resolution = Some(resolution);
    cfg.out = Some(dir.clone());

    let mut grids = Vec::new();
    for &ps in &swaps {
        let point = PhasePoint {
            b,
            c,
            p_swap: ps,
            p_remove,
        };
        grids.push(scan_grid(point, resolution)?);
    }

    create_dir(&dir)?;
    let mut planes = Vec::new();
    for grid in &grids {
        let tag = file_tag(grid.fixed.p_swap);
        let csv = format!("phase_{tag}.csv");
        let mut out = create(&dir.join(&csv))?;
        grid.write_csv(&mut out)?;
        out.flush()?;
        let boundaries = format!("boundaries_{tag}.json");
        write_json(
            &dir.join(&boundaries),
            &serde_json::to_value(extract_boundaries(grid))?,
        )?;
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in &grid.cells {
            *counts.entry(t.label()).or_default() += 1;
        }
        planes.push(json!({
            "p_swap": grid.fixed.p_swap,
            "csv": csv,
            "boundaries": boundaries,
            "counts": counts,
            "all_source_basin": grid.all_source_basin(),
        }));
    }
    let critical = critical_swap(b, c, DEFAULT_TOL).ok().map(|cs| cs.psstar);
    let sidecar = json!({
        "build": BUILD_ID,
        "config": cfg.to_value(),
        "psstar": critical,
        "planes": planes,
    });
    write_json(&dir.join("phase.json"), &sidecar)?;
    print_json(&sidecar)
}

fn psstar(cfg: RunConfig) -> Result<()> {
    let b = cfg.b.unwrap_or(0.5);
    let c = cfg.c.unwrap_or(2.0);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let cs = critical_swap(b, c, tol)?;
    let mut value = serde_json::to_value(&cs)?;
    let obj = value
        .as_object_mut()
        .expect("result serializes to an object");
    obj.insert("config".into(), cfg.to_value());
    obj.insert("build".into(), json!(BUILD_ID));
    emit(&cfg, "psstar.json", &value)
}
