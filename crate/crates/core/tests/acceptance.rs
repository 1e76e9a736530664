//! End-to-end acceptance checks. Each criterion prints one `PASS` or `FAIL`
//! line; the process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use dircomm::dynamics::{run_replicas, TrajectoryRecord};
use dircomm::meanfield::{beta_equilibrium, reparameterize_remove, z_fixed_point};
use dircomm::metrics::density_degree_normalized;
use dircomm::phase::{critical_swap, scan_grid, PhasePoint};
use dircomm::{
    classify, omega_predicted, CommunityType, DensityMatrix, Group, GroupParams, ModelParams,
    RngHandle,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn mean_window(records: &[TrajectoryRecord], fraction: f64) -> ([[f64; 2]; 2], [f64; 2], [f64; 2]) {
    let n = records.len() as f64;
    let mut omega = [[0.0; 2]; 2];
    let mut z = [0.0; 2];
    let mut beta = [0.0; 2];
    for rec in records {
        let avg = rec.window_average(fraction).expect("samples recorded");
        for r in 0..2 {
            for s in 0..2 {
                omega[r][s] += avg.omega[r][s] / n;
            }
            z[r] += avg.mean_in_degree[r] / n;
            beta[r] += avg.beta[r].expect("in-edges present") / n;
        }
    }
    (omega, z, beta)
}

fn in_degree_fixed_point() -> Outcome {
    let g0 = GroupParams::new(0.5, 0.9, 0.2);
    let g1 = GroupParams::new(0.5, 0.8, 0.1);
    let params = ModelParams::new([g0, g1], [500, 500]).unwrap();
    let q = 7.5 / 999.0;
    let runs = run_replicas(&params, q, 11, 8, 300, 1).unwrap();
    let (_, z, _) = mean_window(&runs, 0.2);
    let target = [5.0, 10.0];
    let rel = [0, 1].map(|r| (z[r] - target[r]).abs() / target[r]);
    check(
        rel.iter().all(|&e| e < 0.05),
        format!("z = ({:.3}, {:.3}) vs (5, 10)", z[0], z[1]),
        format!("z = ({:.3}, {:.3}) off by {:?}", z[0], z[1], rel),
    )
}

fn beta_agreement() -> Outcome {
    let params = ModelParams::reference_run_sized([670, 330]);
    let predicted = [Group::ZERO, Group::ONE].map(|r| beta_equilibrium(&params, r).unwrap());
    if (predicted[0] - 0.878).abs() > 5e-4 || (predicted[1] - 0.478).abs() > 5e-4 {
        return Err(format!(
            "predicted beta {predicted:?} differs from (0.878, 0.478)"
        ));
    }
    let q = dircomm::dynamics::equilibrium_edge_probability(&params).unwrap();
    let runs = run_replicas(&params, q, 21, 8, 300, 1).unwrap();
    let (_, _, beta) = mean_window(&runs, 0.2);
    let err = [0, 1].map(|r| (beta[r] - predicted[r]).abs());
    check(
        err.iter().all(|&e| e <= 0.02),
        format!(
            "beta = ({:.4}, {:.4}) vs ({:.4}, {:.4})",
            beta[0], beta[1], predicted[0], predicted[1]
        ),
        format!("beta = {beta:?} vs {predicted:?}, errors {err:?}"),
    )
}

fn reference_run_densities() -> Outcome {
    let params = ModelParams::reference_run();
    let sol = omega_predicted(&params).unwrap();
    let expect = [[0.0655, 0.0780], [0.0185, 0.1448]];
    for r in 0..2 {
        for s in 0..2 {
            if (sol.omega.w[r][s] - expect[r][s]).abs() > 1e-4 {
                return Err(format!(
                    "predicted omega {:?} differs from {expect:?}",
                    sol.omega.w
                ));
            }
        }
    }
    if sol.classify() != (CommunityType::SourceBasin { basin: Group::ONE }) {
        return Err(format!("predicted type {:?}", sol.classify()));
    }
    let q = dircomm::dynamics::equilibrium_edge_probability(&params).unwrap();
    let runs = run_replicas(&params, q, 31, 16, 500, 1).unwrap();
    let (omega, _, _) = mean_window(&runs, 0.2);
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for s in 0..2 {
            worst = worst.max((omega[r][s] - sol.omega.w[r][s]).abs());
        }
    }
    check(
        worst <= 0.015,
        format!("max |omega - predicted| = {worst:.4}, predicted SB basin 1"),
        format!(
            "omega {omega:?} vs {:?}: max deviation {worst:.4}",
            sol.omega.w
        ),
    )
}

/// The four conditions of the pairwise ranking, written out per `(r, s)`.
fn conditions(w: [[f64; 2]; 2]) -> Vec<CommunityType> {
    let mut fired = Vec::new();
    let mn = |a: f64, b: f64| a.min(b);
    let mx = |a: f64, b: f64| a.max(b);
    for (r, s) in [(0, 1), (1, 0)] {
        let (rr, rs, sr, ss) = (w[r][r], w[r][s], w[s][r], w[s][s]);
        if mn(rr, ss) > mx(rs, sr) {
            fired.push(CommunityType::Assortative);
        }
        if mn(rr, rs) > mx(sr, ss) {
            fired.push(CommunityType::CorePeriphery {
                core: Group::new(r as u8).unwrap(),
            });
        }
        if mn(rs, sr) > mx(rr, ss) {
            fired.push(CommunityType::Disassortative);
        }
        if mn(rr, sr) > mx(rs, ss) {
            fired.push(CommunityType::SourceBasin {
                basin: Group::new(r as u8).unwrap(),
            });
        }
    }
    fired.dedup();
    fired
}

fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn classifier_enumeration() -> Outcome {
    let perms = permutations(&[0.1, 0.2, 0.3, 0.4]);
    let mut counts = std::collections::BTreeMap::new();
    for p in &perms {
        let w = [[p[0], p[1]], [p[2], p[3]]];
        let fired = conditions(w);
        let got = classify(&DensityMatrix::from_entries(w).unwrap()).unwrap();
        if fired.len() != 1 || fired[0] != got {
            return Err(format!("{w:?}: conditions {fired:?}, classifier {got:?}"));
        }
        *counts.entry(got.label()).or_insert(0) += 1;
    }
    if perms.len() != 24 || counts.len() != 6 || counts.values().any(|&n| n != 4) {
        return Err(format!("outcome counts {counts:?}"));
    }
    let ties = [
        [[0.3, 0.2], [0.2, 0.1]],
        [[0.2, 0.3], [0.1, 0.2]],
        [[0.1, 0.1], [0.1, 0.1]],
        [[0.4, 0.25], [0.1, 0.25]],
    ];
    for w in ties {
        let got = classify(&DensityMatrix::from_entries(w).unwrap()).unwrap();
        if got != CommunityType::Unclassified || !conditions(w).is_empty() {
            return Err(format!("tie {w:?} classified as {got:?}"));
        }
    }
    Ok(format!(
        "24 orderings, one condition each, outcomes {counts:?}; ties unclassified"
    ))
}

fn source_basin_needs_degree_difference() -> Outcome {
    let mut cells = 0;
    for c in [1.0, 2.0, 5.0] {
        for ps in [0.3, 0.7, 1.0] {
            let grid = scan_grid(PhasePoint::new(1.0, c, ps), 201).unwrap();
            let sb = grid.count(CommunityType::is_source_basin);
            if sb > 0 {
                return Err(format!("c={c} P^S={ps}: {sb} SB cells"));
            }
            cells += grid.cells.len();
        }
    }
    Ok(format!("{cells} cells at b = 1, none SB"))
}

fn core_periphery_needs_preference_difference() -> Outcome {
    let mut points = 0;
    for b in [0.5, 1.0, 2.0] {
        for c in [1.0, 2.0] {
            for ps in [0.3, 0.7, 1.0] {
                let p = PhasePoint::new(b, c, ps);
                for k in 0..=1000 {
                    let a = k as f64 / 1000.0;
                    let t = p.classify([a, a]).unwrap();
                    if t.is_core_periphery() {
                        return Err(format!("b={b} c={c} P^S={ps} P^A={a}: {t:?}"));
                    }
                    points += 1;
                }
            }
        }
    }
    Ok(format!("{points} diagonal points, none CP"))
}

fn degree_normalized_excludes_cp_and_sb() -> Outcome {
    let check_counts = |e: [[f64; 2]; 2]| -> Result<(), String> {
        let t = classify(&density_degree_normalized(e).unwrap()).unwrap();
        if t.is_core_periphery() || t.is_source_basin() {
            Err(format!("counts {e:?} give {t:?}"))
        } else {
            Ok(())
        }
    };
    let mut n = 0;
    for a in 1..=12 {
        for b in 1..=12 {
            for c in 1..=12 {
                for d in 1..=12 {
                    check_counts([[a as f64, b as f64], [c as f64, d as f64]])?;
                    n += 1;
                }
            }
        }
    }
    let mut rng = RngHandle::new(0xD);
    for i in 0..100_000 {
        let e = if i % 2 == 0 {
            [[(); 2]; 2].map(|row| row.map(|_| rng.random_range(1..=1000) as f64))
        } else {
            [[(); 2]; 2].map(|row| row.map(|_| rng.random_range(1e-3..1e3)))
        };
        check_counts(e)?;
        n += 1;
    }
    Ok(format!("{n} count vectors, none CP or SB"))
}

fn critical_swap_reference() -> Outcome {
    let cs = critical_swap(0.5, 2.0, 1e-10).map_err(|e| e.to_string())?;
    if !(cs.psstar > 0.0 && cs.psstar < 1.0) {
        return Err(format!("psstar {} outside (0, 1)", cs.psstar));
    }
    let below = scan_grid(PhasePoint::new(0.5, 2.0, cs.psstar - 0.01), 201).unwrap();
    let above = scan_grid(PhasePoint::new(0.5, 2.0, cs.psstar + 0.01), 201).unwrap();
    check(
        below.all_source_basin() && !above.all_source_basin(),
        format!(
            "psstar = {:.6}; all SB below, {} non-SB cells above",
            cs.psstar,
            above.count(|t| !t.is_source_basin())
        ),
        format!(
            "psstar = {}: below all SB {}, above all SB {}",
            cs.psstar,
            below.all_source_basin(),
            above.all_source_basin()
        ),
    )
}

fn remove_probability_invariance() -> Outcome {
    let mut rng = RngHandle::new(0xB);
    let mut worst_beta: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for _ in 0..10_000 {
        let mut groups = [GroupParams::new(0.0, 0.0, 0.0); 2];
        for g in groups.iter_mut() {
            let pr: f64 = rng.random_range(0.05..0.95);
            let alpha_max = ((1.0 - pr) / pr).min(1.0);
            *g = GroupParams::new(
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.01..=alpha_max),
            )
            .with_p_remove(pr);
        }
        let sizes = [rng.random_range(2..2000), rng.random_range(2..2000)];
        let p = ModelParams::new(groups, sizes).unwrap();
        let q = reparameterize_remove(&p).map_err(|e| format!("{p:?}: {e}"))?;
        for r in [Group::ZERO, Group::ONE] {
            let (a, b) = (
                beta_equilibrium(&p, r).unwrap(),
                beta_equilibrium(&q, r).unwrap(),
            );
            worst_beta = worst_beta.max((a - b).abs());
            let (gp, gq) = (p.group(r), q.group(r));
            let za = z_fixed_point(gp.alpha, gp.p_remove).unwrap();
            let zb = z_fixed_point(gq.alpha, gq.p_remove).unwrap();
            worst_z = worst_z.max((za - zb).abs() / za);
        }
    }
    check(
        worst_beta <= 1e-12 && worst_z <= 1e-12,
        format!("10000 draws: max |dbeta| = {worst_beta:.1e}, max rel |dz| = {worst_z:.1e}"),
        format!("max |dbeta| = {worst_beta:e}, max rel |dz| = {worst_z:e}"),
    )
}

fn reference_plane_anchors() -> Outcome {
    let grid = scan_grid(PhasePoint::new(0.5, 2.0, 1.0), 201).unwrap();
    let anchors = [
        ((0.95, 0.95), CommunityType::Assortative),
        ((0.05, 0.05), CommunityType::Disassortative),
        ((0.5, 0.5), CommunityType::SourceBasin { basin: Group::ONE }),
    ];
    for ((a0, a1), want) in anchors {
        let got = grid.at(a0, a1);
        let ok = match want {
            CommunityType::SourceBasin { .. } => got.is_source_basin(),
            _ => got == want,
        };
        if !ok {
            return Err(format!("({a0}, {a1}) is {got:?}, expected {want:?}"));
        }
    }
    let cp0 = grid.count(|t| *t == CommunityType::CorePeriphery { core: Group::ZERO });
    let cp1 = grid.count(|t| *t == CommunityType::CorePeriphery { core: Group::ONE });
    check(
        cp0 > 0 && cp1 > 0,
        format!("anchors A, D, SB hold; CP0 cells {cp0}, CP1 cells {cp1}"),
        format!("CP0 cells {cp0}, CP1 cells {cp1}"),
    )
}

fn determinism() -> Outcome {
    let params = ModelParams::reference_run();
    let csv = |seed| {
        let runs = run_replicas(&params, 0.07, seed, 2, 50, 1).unwrap();
        runs.iter()
            .map(|r| {
                let mut buf = Vec::new();
                r.write_csv(&mut buf).unwrap();
                buf
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (csv(5), csv(5));
    if a != b {
        return Err("library runs with one seed differ".into());
    }
    if a[0] == a[1] {
        return Err("replicas with different derived seeds coincide".into());
    }

    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_dircomm");
    let mut bodies = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(bin)
            .args([
                "simulate",
                "--sweeps",
                "40",
                "--replicas",
                "3",
                "--seed",
                "9",
                "--jobs",
                "2",
            ])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        if !status.success() {
            return Err(format!("simulate exited with {status}"));
        }
        let files: Vec<Vec<u8>> = (0..3)
            .map(|i| std::fs::read(out.join(format!("traj_r{i}.csv"))).unwrap())
            .collect();
        bodies.push(files);
    }
    check(
        bodies[0] == bodies[1],
        "identical seed and config give byte-identical trajectory CSVs".into(),
        "CLI trajectory CSVs differ between runs".into(),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("in-degree fixed point", in_degree_fixed_point),
        ("mean-field beta agreement", beta_agreement),
        ("reference run densities at N=100", reference_run_densities),
        ("classifier enumeration", classifier_enumeration),
        (
            "no source-basin without degree difference",
            source_basin_needs_degree_difference,
        ),
        (
            "no core-periphery on the preference diagonal",
            core_periphery_needs_preference_difference,
        ),
        (
            "degree-normalized density excludes CP and SB",
            degree_normalized_excludes_cp_and_sb,
        ),
        ("critical swap probability", critical_swap_reference),
        (
            "remove-probability invariance",
            remove_probability_invariance,
        ),
        ("reference plane anchors", reference_plane_anchors),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
