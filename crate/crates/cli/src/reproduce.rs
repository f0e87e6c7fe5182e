//! Figure recipes: fixed parameters, pinned seeds, one CSV per panel.

use std::collections::BTreeMap;

use anyhow::Result;
use homeodyn::analysis::SweepGrid;
use homeodyn::bifurcation::{ck_full_equilibrium, ck_equilibrium_branch, fhn_hopf_points};
use homeodyn::{ModelKind, ModelSystem};

use crate::commands::{
    ck_diagram, fhn_locus, run_simulation, run_sweep_cmd, sweep_summary, write_diagram, write_locus,
    write_simulation, write_sweep, Sweep,
};
use crate::config::{config_err, NoiseSpec, RunConfig};
use crate::output::{num, OutDir};

pub const FIGURES: &[&str] = &[
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13",
    "fig14",
];

pub const FHN_NOISE_SEED: u64 = 7;
pub const CK_NOISE_SEED: u64 = 20_240_917;

fn cfg(kind: ModelKind, sets: &[(&str, &str)]) -> Result<RunConfig> {
    let mut c = RunConfig::defaults(kind);
    for (k, v) in sets {
        c.apply(k, v)?;
    }
    Ok(c)
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn fhn_chair(alpha: &str, workers: usize) -> Result<Sweep> {
    let c = cfg(ModelKind::Fhn, &[("alpha", alpha)])?;
    run_sweep_cmd(&c, "J", SweepGrid::new(-3.0, 3.0, 0.05)?, None, workers)
}

/// Seat interval of an FHN chair curve: the Hopf band shrunk by 0.1.
fn fhn_seat(alpha: f64) -> Result<(f64, f64)> {
    let h = fhn_hopf_points(alpha, 30.0)?;
    Ok((h.j_minus + 0.1, h.j_plus - 0.1))
}

fn hopf_entries(alpha: f64) -> Result<Vec<(String, String)>> {
    let h = fhn_hopf_points(alpha, 30.0)?;
    Ok(vec![
        ("hopf_J_minus".into(), num(h.j_minus)),
        ("hopf_J_plus".into(), num(h.j_plus)),
    ])
}

fn ck_kc_sweep(workers: usize, noise: Option<&NoiseSpec>, grid: SweepGrid) -> Result<Sweep> {
    let mut c = cfg(ModelKind::ChayKeizer, &[])?;
    if noise.is_some() {
        c.seed = CK_NOISE_SEED;
    }
    run_sweep_cmd(&c, "kc", grid, noise, workers)
}

fn pbm_pair(out: &mut OutDir, tag: &str, g_kca: &str, input: &str, values: [f64; 2], workers: usize) -> Result<Vec<(String, String)>> {
    let base = cfg(ModelKind::Pbm, &[("gKCa", g_kca)])?;
    let grid = SweepGrid::new(values[0], values[1], values[1] - values[0])?;
    let sweep = run_sweep_cmd(&base, input, grid, None, workers)?;
    write_sweep(out, &format!("{tag}_averages.csv"), &sweep, &strs(&["V", "c", "c_er", "a"]))?;
    for v in values {
        let mut c = base.clone();
        c.apply(input, &v.to_string())?;
        c.discard = Some(1_200_000.0);
        let sim = run_simulation(&c, None, None)?;
        write_simulation(out, &format!("{tag}_{input}{v}_"), &sim)?;
    }
    let mut e = Vec::new();
    for obs in ["c", "a"] {
        let curve = sweep.curve(obs)?;
        if curve.averages.len() == 2 {
            let rel = (curve.averages[1] - curve.averages[0]).abs() / curve.averages[0].abs();
            e.push((format!("relative_change_mean_{obs}"), num(rel)));
        }
    }
    Ok(e)
}

/// Run one recipe, writing its CSVs into `out`. Returns the manifest
/// config entries.
pub fn reproduce(fig: &str, out: &mut OutDir, workers: usize) -> Result<BTreeMap<String, String>> {
    let mut info = BTreeMap::new();
    info.insert("figure".to_string(), fig.to_string());
    match fig {
        "fig2" => {
            let mut c = cfg(ModelKind::Fhn, &[("alpha", "1"), ("J", "0"), ("dt", "1e-4"), ("t_end", "100")])?;
            c.stride = Some(10);
            let sim = run_simulation(&c, None, Some(&[2.0, 0.0]))?;
            write_simulation(out, "fig2_", &sim)?;
        }
        "fig3" => {
            for j in ["0", "0.8"] {
                let mut c = cfg(ModelKind::Fhn, &[("alpha", "2"), ("J", j), ("t_end", "300")])?;
                c.discard = Some(100.0);
                let sim = run_simulation(&c, None, None)?;
                write_simulation(out, &format!("fig3_J{j}_"), &sim)?;
            }
        }
        "fig4" => {
            let s = fhn_chair("2", workers)?;
            write_sweep(out, "fig4_chair.csv", &s, &strs(&["y"]))?;
            let mut e = sweep_summary(&s, &strs(&["y"]), Some(fhn_seat(2.0)?), None)?;
            e.extend(hopf_entries(2.0)?);
            out.summary("fig4_summary.csv", &e)?;
        }
        "fig5" => {
            let s = fhn_chair("2", workers)?;
            write_sweep(out, "fig5_chair.csv", &s, &strs(&["x", "y"]))?;
            let e = sweep_summary(&s, &strs(&["x", "y"]), Some(fhn_seat(2.0)?), None)?;
            out.summary("fig5_summary.csv", &e)?;
            for j in ["-0.8", "0.8"] {
                let mut c = cfg(ModelKind::Fhn, &[("alpha", "2"), ("J", j), ("t_end", "300")])?;
                c.discard = Some(100.0);
                write_simulation(out, &format!("fig5_J{j}_"), &run_simulation(&c, None, None)?)?;
            }
        }
        "fig6" => {
            let s = fhn_chair("4", workers)?;
            write_sweep(out, "fig6_chair_alpha4.csv", &s, &strs(&["y"]))?;
            let mut e = sweep_summary(&s, &strs(&["y"]), Some(fhn_seat(4.0)?), None)?;
            e.extend(hopf_entries(4.0)?);
            out.summary("fig6_summary.csv", &e)?;
            let locus = fhn_locus(&cfg(ModelKind::Fhn, &[])?, SweepGrid::new(1.0, 5.0, 0.05)?)?;
            write_locus(out, "fig6_hopf_locus.csv", &locus)?;
        }
        "fig7" => {
            let grid = SweepGrid::new(-3.0, 3.0, 0.05)?;
            let mut sweeps = Vec::new();
            for sigma in [0.0, 10.0, 20.0, 30.0] {
                let mut c = cfg(ModelKind::Fhn, &[("alpha", "2.5")])?;
                c.seed = FHN_NOISE_SEED;
                let noise = NoiseSpec::parse(&format!("normal:sigma={sigma}"))?;
                let s = run_sweep_cmd(&c, "J", grid, Some(&noise), workers)?;
                write_sweep(out, &format!("fig7_sigma{sigma}.csv"), &s, &strs(&["y"]))?;
                sweeps.push((sigma, s));
            }
            let h = fhn_hopf_points(2.5, 30.0)?;
            let mut rows = Vec::new();
            for (sigma, s) in &sweeps {
                let e = sweep_summary(s, &strs(&["y"]), Some((h.j_minus, h.j_plus)), Some((&sweeps[0].1, 0.03)))?;
                let get = |k: &str| e.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone()).unwrap_or_default();
                rows.push(vec![
                    num(*sigma),
                    get("seat_slope_y"),
                    get("interval_left_y"),
                    get("interval_right_y"),
                    get("interval_length_y"),
                ]);
            }
            out.csv(
                "fig7_summary.csv",
                &["sigma", "seat_slope", "interval_left", "interval_right", "interval_length"],
                rows,
            )?;
            info.insert("seed".into(), FHN_NOISE_SEED.to_string());
        }
        "fig8" => {
            let sim = run_simulation(&cfg(ModelKind::ChayKeizer, &[])?, None, None)?;
            write_simulation(out, "fig8_", &sim)?;
        }
        "fig9" => {
            let c = cfg(ModelKind::ChayKeizer, &[])?;
            let (d, _) = ck_diagram(&c)?;
            write_diagram(out, "fig9_", &c, &d)?;
            let mut t = c.clone();
            t.discard = Some(10_000.0);
            write_simulation(out, "fig9_burst_", &run_simulation(&t, None, None)?)?;
        }
        "fig10" | "fig11" => {
            let s = ck_kc_sweep(workers, None, SweepGrid::new(0.01, 0.15, 0.002)?)?;
            let obs = strs(&["c", "V"]);
            write_sweep(out, &format!("{fig}_chair.csv"), &s, &obs)?;
            out.summary(&format!("{fig}_summary.csv"), &sweep_summary(&s, &obs, None, None)?)?;
            if fig == "fig10" {
                let ModelSystem::ChayKeizer(p0) = s.system else { unreachable!() };
                let branch = ck_equilibrium_branch(&p0, -75.0, -10.0, 2000)?;
                let rows = s.cfg.grid.values().into_iter().filter_map(|kc| {
                    let p = homeodyn::ChayKeizerParams { kc, ..p0 };
                    let eq = ck_full_equilibrium(&p, &branch).ok()?;
                    Some(vec![num(kc), num(eq.c), num(eq.v), eq.stable.to_string()])
                });
                out.csv("fig10_equilibria.csv", &["kc", "c", "V", "stable"], rows)?;
            } else {
                for kc in ["0.05", "0.09"] {
                    let mut c = cfg(ModelKind::ChayKeizer, &[("kc", kc)])?;
                    c.t_end = Some(80_000.0);
                    c.discard = Some(20_000.0);
                    write_simulation(out, &format!("fig11_kc{kc}_"), &run_simulation(&c, None, None)?)?;
                }
            }
        }
        "fig12" => {
            let grid = SweepGrid::new(0.01, 0.16, 0.005)?;
            let noise = NoiseSpec::parse("folded-normal:sigma=0.04,refresh=1000")?;
            let det = ck_kc_sweep(workers, None, grid)?;
            let st = ck_kc_sweep(workers, Some(&noise), grid)?;
            let obs = strs(&["c", "V"]);
            write_sweep(out, "fig12_deterministic.csv", &det, &obs)?;
            write_sweep(out, "fig12_stochastic.csv", &st, &obs)?;
            let e = sweep_summary(&st, &obs, None, Some((&det, 0.005)))?;
            out.summary("fig12_summary.csv", &e)?;
            for kc in ["0.03", "0.07", "0.14"] {
                let mut c = cfg(ModelKind::ChayKeizer, &[("kc", kc)])?;
                c.seed = CK_NOISE_SEED;
                write_simulation(out, &format!("fig12_kc{kc}_"), &run_simulation(&c, Some(&noise), None)?)?;
            }
            info.insert("seed".into(), CK_NOISE_SEED.to_string());
        }
        "fig13" => {
            let e = pbm_pair(out, "fig13", "25", "r", [0.18, 0.26], workers)?;
            out.summary("fig13_summary.csv", &e)?;
        }
        "fig14" => {
            let e = pbm_pair(out, "fig14", "600", "kPMCA", [0.1, 0.15], workers)?;
            out.summary("fig14_summary.csv", &e)?;
        }
        other => {
            return Err(config_err(format!(
                "unknown figure `{other}` (known: {})",
                FIGURES.join(", ")
            )))
        }
    }
    Ok(info)
}
