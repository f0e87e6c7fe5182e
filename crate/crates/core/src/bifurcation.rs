//! Bifurcation structure: analytic FHN Hopf points and the Chay–Keizer
//! fast subsystem (critical manifold, folds, Hopf, periodic envelope and
//! homoclinic estimate) with `c` frozen as a parameter.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::analysis::period_estimate;
use crate::error::{Error, Result};
use crate::math;
use crate::models::{ChayKeizerParams, FhnParams};
use crate::ode::{integrate, integrate_observed, IntegratorConfig, Method, VectorField};

// ---------------------------------------------------------------- FHN

/// Trace and determinant of the FHN Jacobian at an equilibrium with
/// abscissa `x_star`.
pub fn fhn_jacobian_trace_det(x_star: f64, p: &FhnParams) -> (f64, f64) {
    let x2 = x_star * x_star;
    (p.mu * (1.0 - x2) - 1.0 / p.mu, x2 + p.alpha - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhnHopfPair {
    pub j_minus: f64,
    pub j_plus: f64,
    /// Equilibrium abscissa at `j_minus`.
    pub x_star_minus: f64,
    pub x_star_plus: f64,
}

/// Closed-form Hopf points. The trace vanishes at `x* = +-sqrt(1 - 1/mu^2)`
/// and the equilibrium cubic gives the input at each. Positive `x*` pairs
/// with the negative input, so `x_star_minus > 0`.
pub fn fhn_hopf_points(alpha: f64, mu: f64) -> Result<FhnHopfPair> {
    if !(mu > 0.0) || !mu.is_finite() || !alpha.is_finite() {
        return Err(Error::invalid("alpha and mu must be finite, mu > 0"));
    }
    let eps = 1.0 / (mu * mu);
    if !(alpha > eps) {
        return Err(Error::ConditionViolated(format!(
            "alpha = {alpha} must exceed 1/mu^2 = {eps}"
        )));
    }
    if !(alpha >= 1.0) {
        return Err(Error::ConditionViolated(format!(
            "alpha = {alpha} < 1 leaves the single-equilibrium regime"
        )));
    }
    let s = 1.0 - eps;
    let r = math::sqrt(s);
    let j_at_pos = (1.0 - alpha) * r - s * r / 3.0;
    Ok(FhnHopfPair {
        j_minus: j_at_pos,
        j_plus: -j_at_pos,
        x_star_minus: r,
        x_star_plus: -r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfLocusPoint {
    pub alpha: f64,
    pub j_minus: f64,
    pub j_plus: f64,
}

/// Hopf locus in the `(J, alpha)` plane sampled on `alpha_lo, alpha_lo +
/// step, ...` up to `alpha_hi` (inclusive within half a step).
pub fn fhn_hopf_locus(alpha_lo: f64, alpha_hi: f64, step: f64, mu: f64) -> Result<Vec<HopfLocusPoint>> {
    if !(alpha_hi >= alpha_lo) || !(step > 0.0) {
        return Err(Error::invalid("empty alpha range"));
    }
    let n = math::floor((alpha_hi - alpha_lo) / step + 0.5) as usize + 1;
    (0..n)
        .map(|i| {
            let alpha = alpha_lo + i as f64 * step;
            let h = fhn_hopf_points(alpha, mu)?;
            Ok(HopfLocusPoint {
                alpha,
                j_minus: h.j_minus,
                j_plus: h.j_plus,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- CK fast subsystem

/// The `(V, w)` subsystem of the Chay–Keizer model with `c` frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkFastSubsystem {
    params: ChayKeizerParams,
    c: f64,
    g_kca_eff: f64,
}

impl CkFastSubsystem {
    pub fn new(params: ChayKeizerParams, c: f64) -> Self {
        Self {
            params,
            c,
            g_kca_eff: params.g_kca * params.hill(c),
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    fn rhs(&self, v: f64, w: f64) -> [f64; 2] {
        let p = &self.params;
        let i_ca = p.g_ca * p.m_inf(v) * (v - p.v_ca);
        let i_k = p.g_k * w * (v - p.v_k);
        let i_kca = self.g_kca_eff * (v - p.v_k);
        let i_katp = p.g_katp * (v - p.v_k);
        [
            -(i_ca + i_k + i_kca + i_katp - p.i_ap) / p.cm,
            (p.w_inf(v) - w) / p.tau_w,
        ]
    }

    /// Central-difference Jacobian, step `1e-6` in each variable.
    pub fn jacobian(&self, v: f64, w: f64) -> [[f64; 2]; 2] {
        const H: f64 = 1e-6;
        let (fp, fm) = (self.rhs(v + H, w), self.rhs(v - H, w));
        let (gp, gm) = (self.rhs(v, w + H), self.rhs(v, w - H));
        [
            [(fp[0] - fm[0]) / (2.0 * H), (gp[0] - gm[0]) / (2.0 * H)],
            [(fp[1] - fm[1]) / (2.0 * H), (gp[1] - gm[1]) / (2.0 * H)],
        ]
    }

    pub fn residual(&self, v: f64, w: f64) -> [f64; 2] {
        self.rhs(v, w)
    }
}

impl VectorField for CkFastSubsystem {
    fn dim(&self) -> usize {
        2
    }

    #[inline]
    fn eval(&self, x: &[f64], dxdt: &mut [f64]) {
        let r = self.rhs(x[0], x[1]);
        dxdt[0] = r[0];
        dxdt[1] = r[1];
    }

    fn labels(&self) -> Vec<String> {
        alloc::vec!["V".into(), "w".into()]
    }
}

/// Eigenvalues of a real 2x2 matrix with the given trace and determinant,
/// as `(re, im)` pairs with the larger real part (or positive imaginary
/// part) first.
pub fn eigenvalues_2x2(trace: f64, det: f64) -> [(f64, f64); 2] {
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = math::sqrt(disc);
        [(half + r, 0.0), (half - r, 0.0)]
    } else {
        let im = math::sqrt(-disc);
        [(half, im), (half, -im)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub c: f64,
    pub v: f64,
    pub w: f64,
    pub trace: f64,
    pub det: f64,
    pub stable: bool,
}

/// Closed-form point of the critical manifold at voltage `v`, or `None`
/// where the required Hill fraction leaves `(0, 1)`.
pub fn ck_branch_point(p: &ChayKeizerParams, v: f64) -> Option<BranchPoint> {
    if v == p.v_k || !(p.g_kca > 0.0) {
        return None;
    }
    let w = p.w_inf(v);
    let i_ca = p.g_ca * p.m_inf(v) * (v - p.v_ca);
    let i_k = p.g_k * w * (v - p.v_k);
    let i_katp = p.g_katp * (v - p.v_k);
    let h = -(i_ca + i_k + i_katp - p.i_ap) / (p.g_kca * (v - p.v_k));
    if !(h > 0.0 && h < 1.0) {
        return None;
    }
    let c = p.k_omega * math::pow(h / (1.0 - h), 1.0 / p.p);
    let jac = CkFastSubsystem::new(*p, c).jacobian(v, w);
    let trace = jac[0][0] + jac[1][1];
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    Some(BranchPoint {
        c,
        v,
        w,
        trace,
        det,
        stable: trace < 0.0 && det > 0.0,
    })
}

/// Fast-subsystem equilibria sampled uniformly in V over `[v_lo, v_hi]`.
/// Samples whose Hill fraction falls outside `(0, 1)` mark the ends of the
/// branch and are dropped.
pub fn ck_equilibrium_branch(
    p: &ChayKeizerParams,
    v_lo: f64,
    v_hi: f64,
    n_samples: usize,
) -> Result<Vec<BranchPoint>> {
    if !(v_lo < v_hi) || n_samples < 2 {
        return Err(Error::invalid("need v_lo < v_hi and at least 2 samples"));
    }
    let dv = (v_hi - v_lo) / (n_samples - 1) as f64;
    Ok((0..n_samples)
        .filter_map(|i| ck_branch_point(p, v_lo + i as f64 * dv))
        .collect())
}

/// Vertex of the parabola through three points.
pub fn refine_extremum(x: [f64; 3], y: [f64; 3]) -> Result<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 || !a.is_finite() {
        return Err(Error::invalid("collinear points have no extremum"));
    }
    // y = y0 + d1 (t - x0) + a (t - x0)(t - x1)
    let xv = 0.5 * (x[0] + x[1]) - d1 / (2.0 * a);
    let yv = y[0] + d1 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1]);
    Ok((xv, yv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    SaddleNode,
    Hopf,
    Homoclinic,
}

impl SpecialKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecialKind::SaddleNode => "saddle-node",
            SpecialKind::Hopf => "hopf",
            SpecialKind::Homoclinic => "homoclinic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialPoint {
    pub kind: SpecialKind,
    pub c: f64,
    pub v: f64,
    /// Hopf: imaginary part of the critical pair. Homoclinic: bracket
    /// width. Saddle-node: 0.
    pub aux: f64,
}

/// Local extrema of `c` along the branch, refined by quadratic
/// interpolation. Returned in order of increasing V.
pub fn ck_detect_saddle_nodes(branch: &[BranchPoint]) -> Result<Vec<SpecialPoint>> {
    if branch.len() < 100 {
        return Err(Error::TooFewPoints {
            needed: 100,
            got: branch.len(),
        });
    }
    let mut out = Vec::new();
    for i in 1..branch.len() - 1 {
        let (a, b, c) = (branch[i - 1].c, branch[i].c, branch[i + 1].c);
        let is_max = b > a && b >= c;
        let is_min = b < a && b <= c;
        if !(is_max || is_min) {
            continue;
        }
        let (v, cv) = refine_extremum(
            [branch[i - 1].v, branch[i].v, branch[i + 1].v],
            [a, b, c],
        )?;
        out.push(SpecialPoint {
            kind: SpecialKind::SaddleNode,
            c: cv,
            v,
            aux: 0.0,
        });
    }
    Ok(out)
}

/// Points where the trace of the fast Jacobian changes sign while the
/// determinant stays positive (complex pair crossing the imaginary axis),
/// refined by bisection in V.
pub fn ck_detect_fast_hopf(p: &ChayKeizerParams, branch: &[BranchPoint]) -> Vec<SpecialPoint> {
    let mut out = Vec::new();
    for pair in branch.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.trace.signum() == b.trace.signum() || !(a.det > 0.0 && b.det > 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo.v + hi.v);
            if mid <= lo.v || mid >= hi.v {
                break;
            }
            let Some(m) = ck_branch_point(p, mid) else { break };
            if m.trace.signum() == lo.trace.signum() {
                lo = m;
            } else {
                hi = m;
            }
        }
        let best = if lo.trace.abs() <= hi.trace.abs() { lo } else { hi };
        if best.det - 0.25 * best.trace * best.trace <= 0.0 {
            continue;
        }
        out.push(SpecialPoint {
            kind: SpecialKind::Hopf,
            c: best.c,
            v: best.v,
            aux: eigenvalues_2x2(best.trace, best.det)[0].1,
        });
    }
    out
}

/// Full-system equilibrium: the branch point where the Ca2+ flux balances,
/// `kc c = -beta I_Ca`. Found by bisection on V between branch samples.
pub fn ck_full_equilibrium(p: &ChayKeizerParams, branch: &[BranchPoint]) -> Result<BranchPoint> {
    let g = |b: &BranchPoint| p.kc * b.c + p.beta * p.g_ca * p.m_inf(b.v) * (b.v - p.v_ca);
    for pair in branch.windows(2) {
        let (mut lo, mut hi) = (pair[0], pair[1]);
        if g(&lo).signum() == g(&hi).signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo.v + hi.v);
            if mid <= lo.v || mid >= hi.v {
                break;
            }
            let Some(m) = ck_branch_point(p, mid) else { break };
            if g(&m).signum() == g(&lo).signum() {
                lo = m;
            } else {
                hi = m;
            }
        }
        return Ok(if g(&lo).abs() <= g(&hi).abs() { lo } else { hi });
    }
    Err(Error::NoBracket("c-nullcline does not cross the branch".into()))
}

// ---------------------------------------------------------------- periodic branch

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub dt: f64,
    /// Transient discarded at every frozen c.
    pub discard: f64,
    pub window: f64,
    /// Minimum V peak-to-peak amplitude for an oscillation to count.
    pub amp_tol: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            discard: 2000.0,
            window: 2000.0,
            amp_tol: 1e-3,
        }
    }
}

impl EnvelopeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.discard >= 0.0 && self.window > 4.0 * self.dt) {
            return Err(Error::config("envelope needs dt > 0, discard >= 0, window > 4 dt"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    pub c: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub period: Option<f64>,
    pub spiking: bool,
    /// Final state of the run; lies on the orbit when `spiking`.
    pub orbit_state: [f64; 2],
}

struct FrozenRun {
    point: EnvelopePoint,
    final_state: [f64; 2],
}

/// Integrate the fast subsystem at frozen `c` and decide whether it keeps
/// oscillating: the amplitude over the last quarter of the window must be
/// at least half that over the first quarter and above `amp_tol`.
fn frozen_run(p: &ChayKeizerParams, c: f64, x0: [f64; 2], cfg: &EnvelopeConfig) -> Result<FrozenRun> {
    let sys = CkFastSubsystem::new(*p, c);
    let icfg = IntegratorConfig::new(Method::Rk4, cfg.dt, cfg.discard + cfg.window)
        .with_record_start(cfg.discard);
    let traj = integrate(&sys, &x0, &icfg, None)?;
    let v = traj.column_at(0);
    let q = (v.len() / 4).max(2);
    let amp = |s: &[f64]| {
        let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        hi - lo
    };
    let (v_min, v_max) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let first = amp(&v[..q]);
    let last = amp(&v[v.len() - q..]);
    let spiking = last > cfg.amp_tol && last >= 0.5 * first;
    let period = if spiking {
        period_estimate(&traj, "V").ok().map(|e| e.mean)
    } else {
        None
    };
    let fs = traj.final_state();
    Ok(FrozenRun {
        point: EnvelopePoint {
            c,
            v_min,
            v_max,
            period,
            spiking: spiking && period.is_some(),
            orbit_state: [fs[0], fs[1]],
        },
        final_state: [fs[0], fs[1]],
    })
}

/// Integrate the fast subsystem for `t` at frozen `c`; returns the final
/// state.
fn advance(p: &ChayKeizerParams, c: f64, x: [f64; 2], t: f64, dt: f64) -> Result<[f64; 2]> {
    let cfg = IntegratorConfig::new(Method::Rk4, dt, t);
    let f = integrate_observed(&CkFastSubsystem::new(*p, c), &x, &cfg, None, |_, _| {})?;
    Ok([f[0], f[1]])
}

/// Continue the orbit through `c_from -> c_to` in `k` small increments so
/// the state never jumps across the basin boundary of the coexisting
/// equilibrium.
fn creep(
    p: &ChayKeizerParams,
    c_from: f64,
    c_to: f64,
    k: usize,
    x: [f64; 2],
    cfg: &EnvelopeConfig,
) -> Result<[f64; 2]> {
    let mut x = x;
    for j in 1..k {
        let c = c_from + (c_to - c_from) * j as f64 / k as f64;
        x = advance(p, c, x, 300.0, cfg.dt)?;
    }
    Ok(x)
}

/// Stable periodic solutions of the fast subsystem for `c` stepping from
/// `c_start` to `c_stop`, each run started from the final state of the
/// previous one. `x0` seeds the first run (typically just off the Hopf
/// equilibrium).
///
/// When spiking stops between two grid values the step is retried in
/// finer increments before the periodic branch is declared ended.
pub fn ck_periodic_envelope(
    p: &ChayKeizerParams,
    c_start: f64,
    c_stop: f64,
    n_points: usize,
    x0: [f64; 2],
    cfg: &EnvelopeConfig,
) -> Result<Vec<EnvelopePoint>> {
    cfg.validate()?;
    if n_points < 2 || c_start == c_stop {
        return Err(Error::invalid("envelope needs two distinct c values"));
    }
    let dc = (c_stop - c_start) / (n_points - 1) as f64;
    let mut x = x0;
    let mut out: Vec<EnvelopePoint> = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let c = c_start + i as f64 * dc;
        let mut run = frozen_run(p, c, x, cfg)?;
        if let Some(prev) = out.last().filter(|e| e.spiking && !run.point.spiking) {
            for k in [8, 64] {
                let xs = creep(p, prev.c, c, k, prev.orbit_state, cfg)?;
                let retry = frozen_run(p, c, xs, cfg)?;
                if retry.point.spiking {
                    run = retry;
                    break;
                }
            }
        }
        x = run.final_state;
        out.push(run.point);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoclinicEstimate {
    pub c: f64,
    /// Last `c` with sustained spiking and first without.
    pub bracket: (f64, f64),
    /// Spike period within 1e-10 of the spiking end of the bracket.
    pub period_near: Option<f64>,
    /// Spike period at the Hopf-side reference point.
    pub period_reference: Option<f64>,
    /// `period_near > 10 * period_reference`.
    pub period_blowup: bool,
}

/// Bisect frozen `c` between sustained spiking (`c_spiking`, with `x_orbit`
/// a state on its periodic orbit) and decay to the lower equilibrium
/// (`c_quiet`) until the bracket is narrower than `tol`. Every trial starts
/// from the orbit at the current spiking end.
pub fn ck_homoclinic_bisect(
    p: &ChayKeizerParams,
    c_spiking: f64,
    c_quiet: f64,
    x_orbit: [f64; 2],
    tol: f64,
    cfg: &EnvelopeConfig,
) -> Result<(f64, f64, [f64; 2])> {
    cfg.validate()?;
    if !(tol > 0.0) {
        return Err(Error::invalid("bisection tolerance must be positive"));
    }
    let mut lo = c_spiking;
    let mut hi = c_quiet;
    let lo_run = frozen_run(p, lo, x_orbit, cfg)?;
    if !lo_run.point.spiking {
        return Err(Error::NoBracket(format!("no sustained spiking at c = {lo}")));
    }
    let mut x = lo_run.final_state;
    if frozen_run(p, hi, x, cfg)?.point.spiking {
        return Err(Error::NoBracket(format!("still spiking at c = {hi}")));
    }
    while (hi - lo).abs() >= tol {
        let mid = 0.5 * (lo + hi);
        let run = frozen_run(p, mid, x, cfg)?;
        if run.point.spiking {
            lo = mid;
            x = run.final_state;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi, x))
}

/// Homoclinic estimate from an envelope: bracket between its last
/// spiking point and the next one, then bisect.
pub fn ck_homoclinic_estimate(
    p: &ChayKeizerParams,
    envelope: &[EnvelopePoint],
    tol: f64,
    cfg: &EnvelopeConfig,
) -> Result<HomoclinicEstimate> {
    let last = envelope
        .iter()
        .rposition(|e| e.spiking)
        .ok_or_else(|| Error::NoBracket("envelope has no spiking point".into()))?;
    if last + 1 >= envelope.len() {
        return Err(Error::NoBracket("envelope ends while still spiking".into()));
    }
    let reference = envelope.iter().find(|e| e.spiking).and_then(|e| e.period);
    let e = envelope[last];
    let (lo, hi, x_lo) = ck_homoclinic_bisect(p, e.c, envelope[last + 1].c, e.orbit_state, tol, cfg)?;

    // The period diverges only logarithmically in the distance to the
    // homoclinic, so the cross-check needs a much tighter bracket.
    let long = EnvelopeConfig {
        window: cfg.window.max(5000.0),
        ..cfg.clone()
    };
    let (lo_fine, _, x_fine) = ck_homoclinic_bisect(p, lo, hi, x_lo, 1e-10, &long)?;
    let near = frozen_run(p, lo_fine, x_fine, &long)?.point.period;
    let period_blowup = match (near, reference) {
        (Some(n), Some(r)) => n > 10.0 * r,
        _ => false,
    };
    Ok(HomoclinicEstimate {
        c: 0.5 * (lo + hi),
        bracket: (lo, hi),
        period_near: near,
        period_reference: reference,
        period_blowup,
    })
}

// ---------------------------------------------------------------- diagram

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramConfig {
    pub v_lo: f64,
    pub v_hi: f64,
    pub n_samples: usize,
    pub envelope_points: usize,
    pub envelope: EnvelopeConfig,
    pub homoclinic_tol: f64,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        Self {
            v_lo: -75.0,
            v_hi: -10.0,
            n_samples: 2000,
            envelope_points: 60,
            envelope: EnvelopeConfig::default(),
            homoclinic_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationDiagram {
    pub slow_param: String,
    pub branch: Vec<BranchPoint>,
    pub special: Vec<SpecialPoint>,
    pub envelope: Vec<EnvelopePoint>,
    pub homoclinic: Option<HomoclinicEstimate>,
    pub warnings: Vec<String>,
}

impl BifurcationDiagram {
    pub fn points_of(&self, kind: SpecialKind) -> impl Iterator<Item = &SpecialPoint> {
        self.special.iter().filter(move |s| s.kind == kind)
    }
}

/// Fast-subsystem diagram: equilibrium branch, folds, Hopf points, the
/// periodic envelope from the first Hopf up to the right fold, and the
/// homoclinic estimate.
pub fn ck_bifurcation_diagram(p: &ChayKeizerParams, cfg: &DiagramConfig) -> Result<BifurcationDiagram> {
    let branch = ck_equilibrium_branch(p, cfg.v_lo, cfg.v_hi, cfg.n_samples)?;
    let mut warnings = Vec::new();
    let folds = ck_detect_saddle_nodes(&branch)?;
    if folds.len() != 2 {
        warnings.push(format!("expected 2 saddle-nodes, found {}", folds.len()));
    }
    let hopfs = ck_detect_fast_hopf(p, &branch);
    if hopfs.is_empty() {
        warnings.push("no fast Hopf bifurcation found".to_string());
    }
    let mut special: Vec<SpecialPoint> = folds.iter().chain(&hopfs).copied().collect();

    let mut envelope = Vec::new();
    let mut homoclinic = None;
    let upper_fold = folds.iter().copied().max_by(|a, b| a.v.total_cmp(&b.v));
    if let (Some(h), Some(fold)) = (hopfs.first(), upper_fold) {
        if fold.c > h.c {
            let x0 = [h.v + 0.5, p.w_inf(h.v)];
            let c0 = h.c + 1e-3 * (fold.c - h.c);
            envelope = ck_periodic_envelope(p, c0, fold.c, cfg.envelope_points, x0, &cfg.envelope)?;
            match ck_homoclinic_estimate(p, &envelope, cfg.homoclinic_tol, &cfg.envelope) {
                Ok(est) => {
                    let v = branch
                        .iter()
                        .filter(|b| b.v > folds.first().map_or(f64::NEG_INFINITY, |f| f.v) && b.v < fold.v)
                        .min_by(|a, b| (a.c - est.c).abs().total_cmp(&(b.c - est.c).abs()))
                        .map_or(f64::NAN, |b| b.v);
                    special.push(SpecialPoint {
                        kind: SpecialKind::Homoclinic,
                        c: est.c,
                        v,
                        aux: est.bracket.1 - est.bracket.0,
                    });
                    if !est.period_blowup {
                        warnings.push(format!(
                            "spike period near the homoclinic bracket ({:.1}) is under 10x the Hopf-side period ({:.1})",
                            est.period_near.unwrap_or(f64::NAN),
                            est.period_reference.unwrap_or(f64::NAN)
                        ));
                    }
                    homoclinic = Some(est);
                }
                Err(e) => warnings.push(e.to_string()),
            }
        } else {
            warnings.push("Hopf lies above the upper fold; envelope skipped".into());
        }
    }
    Ok(BifurcationDiagram {
        slow_param: "c".into(),
        branch,
        special,
        envelope,
        homoclinic,
        warnings,
    })
}

/// Record every state of a fast-subsystem run; handy for phase-plane
/// plots at frozen `c`.
pub fn ck_fast_trajectory(
    p: &ChayKeizerParams,
    c: f64,
    x0: [f64; 2],
    cfg: &IntegratorConfig,
) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::with_capacity(cfg.steps() + 1);
    integrate_observed(&CkFastSubsystem::new(*p, c), &x0, cfg, None, |_, x| {
        out.push([x[0], x[1]])
    })?;
    Ok(out)
}
