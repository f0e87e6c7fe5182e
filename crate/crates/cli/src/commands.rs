//! simulate / sweep / bifurcate. Each splits into a runner returning data
//! and a writer, so the figure recipes can reuse both.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use homeodyn::analysis::{
    classify_state, duty_cycle, oscillation_interval_length, period_estimate, seat_slope,
    sweep_point, time_average, ChairCurve, SweepConfig, SweepGrid, SweepPoint,
};
use homeodyn::bifurcation::{
    ck_bifurcation_diagram, ck_full_equilibrium, fhn_hopf_locus, BifurcationDiagram, DiagramConfig,
    HopfLocusPoint,
};
use homeodyn::stochastic::{noise_schedule, NoiseSchedule};
use homeodyn::{integrate, IntegratorConfig, Method, ModelKind, ModelSystem, Trajectory};
use rayon::prelude::*;

use crate::config::{config_err, NoiseSpec, RunConfig};
use crate::output::{num, opt_num, OutDir};

// ---------------------------------------------------------------- simulate

/// Default (dt, t_end, stride) of a single simulation.
fn simulate_defaults(kind: ModelKind, stochastic: bool) -> (f64, f64, usize) {
    match (kind, stochastic) {
        (ModelKind::Fhn, _) => (1e-3, 200.0, 10),
        (ModelKind::ChayKeizer, false) => (0.05, 60_000.0, 20),
        (ModelKind::ChayKeizer, true) => (0.01, 60_000.0, 100),
        (ModelKind::Pbm, false) => (0.05, 3_600_000.0, 200),
        (ModelKind::Pbm, true) => (0.01, 3_600_000.0, 1000),
    }
}

pub struct Simulation {
    pub system: ModelSystem,
    pub traj: Trajectory,
    pub noise: Option<(String, NoiseSchedule)>,
    pub discard: f64,
    pub config: BTreeMap<String, String>,
}

pub fn run_simulation(cfg: &RunConfig, noise: Option<&NoiseSpec>, x0: Option<&[f64]>) -> Result<Simulation> {
    let kind = cfg.system.kind();
    let (dt0, t_end0, stride0) = simulate_defaults(kind, noise.is_some());
    let method = cfg
        .method
        .unwrap_or(if noise.is_some() { Method::ForwardEuler } else { Method::Rk4 });
    let dt = cfg.dt.unwrap_or(dt0);
    let t_end = cfg.t_end.unwrap_or(t_end0);
    let stride = cfg.stride.unwrap_or(stride0);
    let discard = cfg.discard.unwrap_or(0.0);
    let icfg = IntegratorConfig::new(method, dt, t_end).with_stride(stride);
    icfg.validate().map_err(|e| config_err(e.to_string()))?;
    for w in cfg.system.validate().map_err(|e| config_err(e.to_string()))? {
        eprintln!("warning: {w}");
    }
    let process = noise.map(|n| n.process(cfg, None, dt)).transpose()?;
    let x0: Vec<f64> = x0.map_or_else(|| cfg.system.default_initial_state(), <[f64]>::to_vec);
    let traj = integrate(&cfg.system, &x0, &icfg, process.as_ref())?;
    let noise = process
        .as_ref()
        .map(|p| Ok::<_, homeodyn::Error>((p.target.clone(), noise_schedule(p, t_end, dt)?)))
        .transpose()?;

    let mut config = cfg.resolved_model();
    config.insert("method".into(), method.name().into());
    config.insert("dt".into(), format!("{dt:?}"));
    config.insert("t_end".into(), format!("{t_end:?}"));
    config.insert("stride".into(), stride.to_string());
    config.insert("discard".into(), format!("{discard:?}"));
    if let Some(n) = noise_spec_entry(noise.is_some(), process.as_ref()) {
        config.insert("noise".into(), n);
    }
    Ok(Simulation {
        system: cfg.system,
        traj,
        noise,
        discard,
        config,
    })
}

fn noise_spec_entry(on: bool, p: Option<&homeodyn::NoiseProcess>) -> Option<String> {
    let p = p.filter(|_| on)?;
    Some(format!(
        "{}:sigma={:?},mean={:?},refresh={:?},target={}",
        p.distribution.kind_name(),
        p.distribution.sigma(),
        p.distribution.mean(),
        p.refresh_interval,
        p.target
    ))
}

/// `<prefix>trajectory.csv` and `<prefix>summary.csv`.
pub fn write_simulation(out: &mut OutDir, prefix: &str, sim: &Simulation) -> Result<()> {
    let tr = &sim.traj;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(tr.labels().iter().cloned());
    if let Some((target, _)) = &sim.noise {
        header.push(format!("{target}_applied"));
    }
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..tr.len()).map(|i| {
        let t = tr.time(i);
        let mut r = vec![num(t)];
        r.extend(tr.state(i).iter().map(|&x| num(x)));
        if let Some((_, s)) = &sim.noise {
            // the value in force on the step that starts at t
            r.push(opt_num(s.value_at(t).or(s.values.last().copied())));
        }
        r
    });
    out.csv(&format!("{prefix}trajectory.csv"), &header_ref, rows)?;

    let mut entries = Vec::new();
    let window = if sim.discard > 0.0 {
        tr.resample_window(sim.discard, tr.final_time()).ok()
    } else {
        None
    };
    let w = window.as_ref().unwrap_or(tr);
    for label in tr.labels() {
        if let Ok(a) = time_average(w, label, 0.0) {
            entries.push((format!("mean_{label}"), num(a)));
        }
    }
    match classify_state(w, &sim.system) {
        Ok(s) => entries.push(("state".into(), s.name().into())),
        Err(e) => entries.push(("state".into(), format!("undetermined ({e})"))),
    }
    let (period_var, duty_var, duty_th) = match sim.system.kind() {
        ModelKind::Fhn => ("y", "x", 0.0),
        _ => ("c", "V", -55.0),
    };
    if let Ok(p) = period_estimate(w, period_var) {
        entries.push(("period".into(), num(p.mean)));
    }
    if let Ok(d) = duty_cycle(w, duty_var, duty_th, 0.0) {
        entries.push(("duty_cycle".into(), num(d)));
    }
    out.summary(&format!("{prefix}summary.csv"), &entries)
}

// ---------------------------------------------------------------- sweep

pub struct Sweep {
    pub system: ModelSystem,
    pub cfg: SweepConfig,
    /// In grid order; failures keep their message.
    pub points: Vec<Result<SweepPoint, String>>,
    /// Expected value of the noisy input at each grid point (e.g. the
    /// folded-normal mean of a pump rate), when the noise drives the input.
    pub effective: Option<Vec<f64>>,
    pub config: BTreeMap<String, String>,
}

pub fn sweep_config(cfg: &RunConfig, input: &str, grid: SweepGrid, noise: Option<&NoiseSpec>) -> Result<SweepConfig> {
    let kind = cfg.system.kind();
    let mut sc = SweepConfig::for_model(kind, input, grid);
    if let Some(n) = noise {
        let dt = cfg.dt.unwrap_or(match kind {
            ModelKind::Fhn => 1e-3,
            _ => 0.01,
        });
        let p = n.process(cfg, Some(input), dt)?;
        sc = sc.with_noise(kind, p);
    }
    if let Some(m) = cfg.method {
        sc.method = m;
    }
    if let Some(dt) = cfg.dt {
        sc.dt = dt;
    }
    if let Some(d) = cfg.discard {
        sc.transient_discard = d;
    }
    if let Some(w) = cfg.window {
        sc.averaging_window = w;
    }
    if let Some(s) = cfg.stride {
        sc.record_stride = s;
    }
    sc.warm_start = cfg.warm_start;
    sc.validate(&cfg.system).map_err(|e| config_err(e.to_string()))?;
    Ok(sc)
}

pub fn run_sweep_points(system: &ModelSystem, sc: &SweepConfig, workers: usize) -> Result<Vec<Result<SweepPoint, String>>> {
    let x0 = sc
        .initial_state
        .clone()
        .unwrap_or_else(|| system.default_initial_state());
    let n = sc.grid.len();
    if sc.warm_start {
        // continuation is inherently sequential
        let mut x = x0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = sweep_point(system, sc, i, &x).map_err(|e| e.to_string());
            if let Ok(p) = &r {
                x.clone_from(&p.final_state);
            }
            out.push(r);
        }
        return Ok(out);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("starting worker pool")?;
    Ok(pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| sweep_point(system, sc, i, &x0).map_err(|e| e.to_string()))
            .collect()
    }))
}

pub fn run_sweep_cmd(cfg: &RunConfig, input: &str, grid: SweepGrid, noise: Option<&NoiseSpec>, workers: usize) -> Result<Sweep> {
    cfg.system
        .get_param(input)
        .map_err(|_| config_err(format!("`{input}` is not a parameter of {}", cfg.system.kind().name())))?;
    for w in cfg.system.validate().map_err(|e| config_err(e.to_string()))? {
        eprintln!("warning: {w}");
    }
    let sc = sweep_config(cfg, input, grid, noise)?;
    let points = run_sweep_points(&cfg.system, &sc, workers)?;
    let effective = match &sc.noise {
        Some(p) if p.target == input => Some(
            grid.values()
                .iter()
                .map(|&x| p.distribution.with_mean(x).expected_value())
                .collect::<homeodyn::Result<Vec<f64>>>()?,
        ),
        _ => None,
    };
    let mut config = cfg.resolved_model();
    config.insert("input".into(), input.into());
    config.insert("range".into(), format!("{:?}:{:?}:{:?}", grid.lo, grid.hi, grid.step));
    config.insert("method".into(), sc.method.name().into());
    config.insert("dt".into(), format!("{:?}", sc.dt));
    config.insert("discard".into(), format!("{:?}", sc.transient_discard));
    config.insert("window".into(), format!("{:?}", sc.averaging_window));
    config.insert("stride".into(), sc.record_stride.to_string());
    config.insert("warm_start".into(), sc.warm_start.to_string());
    if let Some(n) = noise_spec_entry(true, sc.noise.as_ref()) {
        config.insert("noise".into(), n);
    }
    Ok(Sweep {
        system: cfg.system,
        cfg: sc,
        points,
        effective,
        config,
    })
}

impl Sweep {
    /// Chair curve of `observable` over the points that succeeded.
    pub fn curve(&self, observable: &str) -> Result<ChairCurve> {
        let idx = self
            .system
            .state_labels()
            .iter()
            .position(|l| *l == observable)
            .ok_or_else(|| config_err(format!("unknown observable `{observable}`")))?;
        let ok: Vec<&SweepPoint> = self.points.iter().filter_map(|p| p.as_ref().ok()).collect();
        Ok(ChairCurve::new(
            &self.cfg.input,
            observable,
            ok.iter().map(|p| p.input).collect(),
            ok.iter().map(|p| p.averages[idx]).collect(),
            ok.iter().map(|p| p.state).collect(),
        )?)
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.is_err()).count()
    }
}

pub fn parse_observables(system: &ModelSystem, list: Option<&str>) -> Result<Vec<String>> {
    let labels = system.state_labels();
    let obs: Vec<String> = match list {
        Some(s) => s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
        None => labels.iter().map(|s| s.to_string()).collect(),
    };
    for o in &obs {
        if !labels.contains(&o.as_str()) {
            return Err(config_err(format!(
                "unknown observable `{o}` (state variables: {})",
                labels.join(", ")
            )));
        }
    }
    Ok(obs)
}

/// One row per grid point: input, [expected noisy input], averages of the
/// observables, state, period, duty cycle, seed, error.
pub fn write_sweep(out: &mut OutDir, name: &str, sweep: &Sweep, observe: &[String]) -> Result<()> {
    let labels = sweep.system.state_labels();
    let idx: Vec<usize> = observe
        .iter()
        .map(|o| labels.iter().position(|l| l == o).expect("validated observable"))
        .collect();
    let mut header = vec![sweep.cfg.input.clone()];
    if sweep.effective.is_some() {
        header.push(format!("{}_expected", sweep.cfg.input));
    }
    header.extend(observe.iter().map(|o| format!("mean_{o}")));
    header.extend(["state", "period", "duty_cycle", "seed", "error"].map(String::from));
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = sweep.points.iter().enumerate().map(|(i, p)| {
        let mut r = vec![num(sweep.cfg.grid.value(i))];
        if let Some(e) = &sweep.effective {
            r.push(num(e[i]));
        }
        match p {
            Ok(p) => {
                r.extend(idx.iter().map(|&k| num(p.averages[k])));
                r.push(p.state.map_or(String::new(), |s| s.name().to_string()));
                r.push(opt_num(p.period));
                r.push(opt_num(p.duty_cycle));
                r.push(p.seed.map_or(String::new(), |s| s.to_string()));
                r.push(p.warnings.join("; "));
            }
            Err(e) => {
                r.extend(idx.iter().map(|_| String::new()));
                r.extend([String::new(), String::new(), String::new(), String::new(), e.clone()]);
            }
        }
        r
    });
    out.csv(name, &header_ref, rows)
}

/// Seat slope per observable over `seat` (default: the rhythmic band) and,
/// with a reference sweep, the oscillation-interval length.
pub fn sweep_summary(
    sweep: &Sweep,
    observe: &[String],
    seat: Option<(f64, f64)>,
    interval: Option<(&Sweep, f64)>,
) -> Result<Vec<(String, String)>> {
    let mut e = Vec::new();
    e.push(("points".into(), sweep.points.len().to_string()));
    e.push(("failed_points".into(), sweep.failures().to_string()));
    let first = sweep.curve(&observe[0])?;
    let band = first.rhythmic_band();
    if let Some((lo, hi)) = band {
        e.push(("rhythmic_lo".into(), num(lo)));
        e.push(("rhythmic_hi".into(), num(hi)));
    }
    if let Some((lo, hi)) = seat.or(band) {
        e.push(("seat_lo".into(), num(lo)));
        e.push(("seat_hi".into(), num(hi)));
        for o in observe {
            let c = sweep.curve(o)?;
            let v = seat_slope(&c, lo, hi).map_or_else(|err| format!("undetermined ({err})"), num);
            e.push((format!("seat_slope_{o}"), v));
        }
    }
    if let Some((reference, delta)) = interval {
        for o in observe {
            let (s, d) = common_curves(sweep, reference, o)?;
            let iv = oscillation_interval_length(&s, &d, delta)?;
            e.push((format!("interval_left_{o}"), opt_num(iv.left)));
            e.push((format!("interval_right_{o}"), opt_num(iv.right)));
            e.push((format!("interval_length_{o}"), num(iv.length)));
            if let Some(msg) = iv.diagnostic {
                e.push((format!("interval_note_{o}"), msg));
            }
        }
        e.push(("interval_delta".into(), num(delta)));
    }
    Ok(e)
}

/// Both curves restricted to grid points that succeeded in both sweeps.
fn common_curves(a: &Sweep, b: &Sweep, observable: &str) -> Result<(ChairCurve, ChairCurve)> {
    let k = a
        .system
        .state_labels()
        .iter()
        .position(|l| *l == observable)
        .ok_or_else(|| config_err(format!("unknown observable `{observable}`")))?;
    if a.points.len() != b.points.len() {
        return Err(config_err("reference sweep uses a different grid"));
    }
    let pairs: Vec<(&SweepPoint, &SweepPoint)> = a
        .points
        .iter()
        .zip(&b.points)
        .filter_map(|(p, q)| Some((p.as_ref().ok()?, q.as_ref().ok()?)))
        .collect();
    let build = |second: bool| {
        let picked: Vec<&SweepPoint> = pairs.iter().map(|&(p, q)| if second { q } else { p }).collect();
        ChairCurve::new(
            &a.cfg.input,
            observable,
            picked.iter().map(|p| p.input).collect(),
            picked.iter().map(|p| p.averages[k]).collect(),
            picked.iter().map(|p| p.state).collect(),
        )
    };
    Ok((build(false)?, build(true)?))
}

// ---------------------------------------------------------------- bifurcate

pub fn fhn_locus(cfg: &RunConfig, alpha: SweepGrid) -> Result<Vec<HopfLocusPoint>> {
    let mu = cfg.system.get_param("mu")?;
    Ok(fhn_hopf_locus(alpha.lo, alpha.hi, alpha.step, mu)?)
}

pub fn write_locus(out: &mut OutDir, name: &str, locus: &[HopfLocusPoint]) -> Result<()> {
    out.csv(
        name,
        &["alpha", "J_minus", "J_plus"],
        locus.iter().map(|q| vec![num(q.alpha), num(q.j_minus), num(q.j_plus)]),
    )
}

pub fn ck_diagram(cfg: &RunConfig) -> Result<(BifurcationDiagram, DiagramConfig)> {
    let ModelSystem::ChayKeizer(p) = cfg.system else {
        return Err(config_err("the fast-subsystem diagram is only defined for chay-keizer"));
    };
    let mut dc = DiagramConfig::default();
    if let Some(dt) = cfg.dt {
        dc.envelope.dt = dt;
    }
    Ok((ck_bifurcation_diagram(&p, &dc)?, dc))
}

/// branch.csv, special.csv, envelope.csv and a summary.
pub fn write_diagram(out: &mut OutDir, prefix: &str, cfg: &RunConfig, d: &BifurcationDiagram) -> Result<()> {
    out.csv(
        &format!("{prefix}branch.csv"),
        &["c", "V", "w", "trace", "det", "stable"],
        d.branch.iter().map(|b| {
            vec![num(b.c), num(b.v), num(b.w), num(b.trace), num(b.det), b.stable.to_string()]
        }),
    )?;
    out.csv(
        &format!("{prefix}special.csv"),
        &["kind", "c", "V", "aux"],
        d.special
            .iter()
            .map(|s| vec![s.kind.name().to_string(), num(s.c), num(s.v), num(s.aux)]),
    )?;
    out.csv(
        &format!("{prefix}envelope.csv"),
        &["c", "V_min", "V_max", "period", "spiking"],
        d.envelope.iter().map(|e| {
            vec![num(e.c), num(e.v_min), num(e.v_max), opt_num(e.period), e.spiking.to_string()]
        }),
    )?;
    let mut entries = vec![("slow_param".to_string(), d.slow_param.clone())];
    if let Some(h) = &d.homoclinic {
        entries.push(("homoclinic_c".into(), num(h.c)));
        entries.push(("homoclinic_bracket_lo".into(), num(h.bracket.0)));
        entries.push(("homoclinic_bracket_hi".into(), num(h.bracket.1)));
        entries.push(("period_near_homoclinic".into(), opt_num(h.period_near)));
        entries.push(("period_at_hopf_side".into(), opt_num(h.period_reference)));
        entries.push(("period_blowup".into(), h.period_blowup.to_string()));
    }
    if let ModelSystem::ChayKeizer(p) = cfg.system {
        if let Ok(eq) = ck_full_equilibrium(&p, &d.branch) {
            entries.push(("full_equilibrium_c".into(), num(eq.c)));
            entries.push(("full_equilibrium_V".into(), num(eq.v)));
            entries.push(("full_equilibrium_stable".into(), eq.stable.to_string()));
        }
    }
    for (i, w) in d.warnings.iter().enumerate() {
        entries.push((format!("warning_{i}"), w.clone()));
    }
    out.summary(&format!("{prefix}summary.csv"), &entries)
}
