//! Time averages, duty cycles, state classification, chair-curve sweeps,
//! seat slopes and oscillation-interval lengths.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::models::{ModelKind, ModelSystem};
use crate::ode::{integrate_observed, IntegratorConfig, Method, Trajectory, VectorField};
use crate::stochastic::{point_seed, NoiseProcess};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DynamicState {
    Quiescent,
    Oscillatory,
    Bursting,
    Spiking,
}

impl DynamicState {
    pub fn name(self) -> &'static str {
        match self {
            DynamicState::Quiescent => "quiescent",
            DynamicState::Oscillatory => "oscillatory",
            DynamicState::Bursting => "bursting",
            DynamicState::Spiking => "spiking",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quiescent" => Ok(DynamicState::Quiescent),
            "oscillatory" => Ok(DynamicState::Oscillatory),
            "bursting" => Ok(DynamicState::Bursting),
            "spiking" => Ok(DynamicState::Spiking),
            other => Err(Error::invalid(format!("unknown state `{other}`"))),
        }
    }

    /// The states whose time-average the homeostatic seat is made of.
    pub fn is_rhythmic(self) -> bool {
        matches!(self, DynamicState::Oscillatory | DynamicState::Bursting)
    }
}

// ---------------------------------------------------------------- averages

fn window_start(traj: &Trajectory, transient_discard: f64) -> Result<usize> {
    if !(transient_discard >= 0.0) || transient_discard >= traj.duration() {
        return Err(Error::WindowOutOfRange {
            start: traj.t0() + transient_discard,
            stop: traj.final_time(),
            t0: traj.t0(),
            t_final: traj.final_time(),
        });
    }
    let first = math::ceil(transient_discard / traj.dt() - 1e-9) as usize;
    if first + 1 >= traj.len() {
        return Err(Error::EmptyWindow);
    }
    Ok(first)
}

/// Trapezoidal mean of `variable` over `[t0 + transient_discard, t_final]`.
pub fn time_average(traj: &Trajectory, variable: &str, transient_discard: f64) -> Result<f64> {
    let idx = traj.variable_index(variable)?;
    let first = window_start(traj, transient_discard)?;
    let n = traj.len();
    let mut sum = 0.0;
    for i in first + 1..n - 1 {
        sum += traj.state(i)[idx];
    }
    sum += 0.5 * (traj.state(first)[idx] + traj.state(n - 1)[idx]);
    Ok(sum / (n - 1 - first) as f64)
}

/// Fraction of the window spent with `variable > threshold`, crossings
/// located by linear interpolation between samples.
pub fn duty_cycle(
    traj: &Trajectory,
    variable: &str,
    threshold: f64,
    transient_discard: f64,
) -> Result<f64> {
    let idx = traj.variable_index(variable)?;
    let first = window_start(traj, transient_discard)?;
    let v: Vec<f64> = (first..traj.len()).map(|i| traj.state(i)[idx]).collect();
    let (lo, hi) = min_max(&v);
    if !(threshold > lo && threshold < hi) {
        return Err(Error::ThresholdOutOfRange {
            threshold,
            min: lo,
            max: hi,
        });
    }
    let mut above = 0.0;
    for w in v.windows(2) {
        let (a, b) = (w[0] - threshold, w[1] - threshold);
        above += if a > 0.0 && b > 0.0 {
            1.0
        } else if a <= 0.0 && b <= 0.0 {
            0.0
        } else if a > 0.0 {
            a / (a - b)
        } else {
            b / (b - a)
        };
    }
    Ok(above / (v.len() - 1) as f64)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    pub mean: f64,
    pub std_dev: f64,
    pub crossings: usize,
}

/// Mean spacing of upward crossings of the mid-range level.
///
/// A crossing only counts after the signal has dropped below the level by
/// 10% of its range, which keeps spike ripple on a slow variable from
/// registering as extra cycles.
pub fn period_estimate(traj: &Trajectory, variable: &str) -> Result<PeriodEstimate> {
    let v = traj.column(variable)?;
    let (lo, hi) = min_max(&v);
    if !(hi > lo) {
        return Err(Error::TooFewCrossings(0));
    }
    let level = 0.5 * (lo + hi);
    let rearm = level - 0.1 * (hi - lo);
    let mut armed = false;
    let mut times = Vec::new();
    for i in 1..v.len() {
        if v[i - 1] < rearm {
            armed = true;
        }
        if armed && v[i - 1] < level && v[i] >= level {
            let frac = (level - v[i - 1]) / (v[i] - v[i - 1]);
            times.push(traj.time(i - 1) + frac * traj.dt());
            armed = false;
        }
    }
    if times.len() < 3 {
        return Err(Error::TooFewCrossings(times.len()));
    }
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
    Ok(PeriodEstimate {
        mean,
        std_dev: math::sqrt(var),
        crossings: times.len(),
    })
}

// ---------------------------------------------------------------- classification

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeCriteria {
    pub variable: String,
    /// A spike is an upward crossing of this level...
    pub threshold: f64,
    /// ...after the variable has been below this one.
    pub rearm: f64,
    pub v_silent: f64,
    /// Minimum continuous time below `v_silent` for a silent phase.
    pub t_silent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub slow_variable: String,
    /// Slow-variable peak-to-peak range below which the run is quiescent.
    /// Only consulted when no spike criteria are set.
    pub eps_amp: f64,
    pub spikes: Option<SpikeCriteria>,
    /// Shortest trajectory that can be classified.
    pub min_duration: f64,
}

impl ClassifyConfig {
    pub fn for_model(kind: ModelKind) -> Self {
        let spikes = |t_silent: f64| SpikeCriteria {
            variable: "V".into(),
            threshold: -35.0,
            rearm: -38.0,
            v_silent: -55.0,
            t_silent,
        };
        match kind {
            ModelKind::Fhn => Self {
                slow_variable: "y".into(),
                // 1% of the relaxation-cycle y range, which spans the knees at +-2/3
                eps_amp: 0.01 * 4.0 / 3.0,
                spikes: None,
                min_duration: 60.0,
            },
            ModelKind::ChayKeizer => Self {
                slow_variable: "c".into(),
                eps_amp: 1e-3,
                spikes: Some(spikes(500.0)),
                min_duration: 20_000.0,
            },
            ModelKind::Pbm => Self {
                slow_variable: "c".into(),
                eps_amp: 1e-3,
                spikes: Some(spikes(1_000.0)),
                min_duration: 120_000.0,
            },
        }
    }
}

/// Times of spikes (upward threshold crossings with re-arming).
pub fn spike_times(traj: &Trajectory, crit: &SpikeCriteria) -> Result<Vec<f64>> {
    let idx = traj.variable_index(&crit.variable)?;
    let mut armed = false;
    let mut out = Vec::new();
    for i in 1..traj.len() {
        let (a, b) = (traj.state(i - 1)[idx], traj.state(i)[idx]);
        if a < crit.rearm {
            armed = true;
        }
        if armed && a < crit.threshold && b >= crit.threshold {
            out.push(traj.time(i));
            armed = false;
        }
    }
    Ok(out)
}

fn longest_run_below(traj: &Trajectory, idx: usize, level: f64) -> f64 {
    let mut best = 0usize;
    let mut run = 0usize;
    for s in traj.states() {
        if s[idx] < level {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best.saturating_sub(1) as f64 * traj.dt()
}

pub fn classify_state(traj: &Trajectory, system: &ModelSystem) -> Result<DynamicState> {
    classify_state_with(traj, &ClassifyConfig::for_model(system.kind()))
}

pub fn classify_state_with(traj: &Trajectory, cfg: &ClassifyConfig) -> Result<DynamicState> {
    if traj.duration() < cfg.min_duration {
        return Err(Error::Undetermined {
            duration: traj.duration(),
            needed: cfg.min_duration,
        });
    }
    match &cfg.spikes {
        None => {
            let (lo, hi) = min_max(&traj.column(&cfg.slow_variable)?);
            Ok(if hi - lo < cfg.eps_amp {
                DynamicState::Quiescent
            } else {
                DynamicState::Oscillatory
            })
        }
        Some(crit) => {
            if spike_times(traj, crit)?.is_empty() {
                return Ok(DynamicState::Quiescent);
            }
            let idx = traj.variable_index(&crit.variable)?;
            Ok(if longest_run_below(traj, idx, crit.v_silent) >= crit.t_silent {
                DynamicState::Bursting
            } else {
                DynamicState::Spiking
            })
        }
    }
}

// ---------------------------------------------------------------- sweeps

/// Inclusive grid `lo, lo + step, ...` ending within half a step of `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl SweepGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = Self { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    /// Parse `lo:hi:step`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::config(format!("range `{s}` is not lo:hi:step")));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("bad number `{p}` in range `{s}`")))?;
        }
        Self::new(v[0], v[1], v[2])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::config("range needs lo <= hi"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::config("range step must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        math::floor((self.hi - self.lo) / self.step + 0.5) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub input: String,
    pub grid: SweepGrid,
    pub method: Method,
    pub dt: f64,
    /// Stride of the stored trajectory used for classification, period and
    /// duty cycle. Averages always use every step.
    pub record_stride: usize,
    pub transient_discard: f64,
    pub averaging_window: f64,
    /// Template noise; if its target is the swept input, the draw mean is
    /// set to each grid value. Each point gets its own seed.
    pub noise: Option<NoiseProcess>,
    /// Seed each point with the final state of its predecessor.
    pub warm_start: bool,
    pub initial_state: Option<Vec<f64>>,
    pub classify: ClassifyConfig,
    /// `(variable, threshold)` for the duty cycle column.
    pub duty: (String, f64),
    /// Variable whose mid-range crossings give the period.
    pub period_variable: String,
}

impl SweepConfig {
    /// Deterministic defaults for sweeping `input` of a model.
    pub fn for_model(kind: ModelKind, input: &str, grid: SweepGrid) -> Self {
        let (dt, stride, discard, window, duty, period_var) = match kind {
            ModelKind::Fhn => (1e-3, 10, 600.0, 12_000.0, ("x", 0.0), "y"),
            ModelKind::ChayKeizer => (0.05, 4, 100_000.0, 300_000.0, ("V", -55.0), "c"),
            ModelKind::Pbm => (0.05, 20, 1_200_000.0, 2_400_000.0, ("V", -55.0), "c"),
        };
        Self {
            input: input.into(),
            grid,
            method: Method::Rk4,
            dt,
            record_stride: stride,
            transient_discard: discard,
            averaging_window: window,
            noise: None,
            warm_start: false,
            initial_state: None,
            classify: ClassifyConfig::for_model(kind),
            duty: (duty.0.into(), duty.1),
            period_variable: period_var.into(),
        }
    }

    /// Switch to forward Euler at the stochastic default step and attach
    /// `noise`.
    pub fn with_noise(mut self, kind: ModelKind, noise: NoiseProcess) -> Self {
        self.method = Method::ForwardEuler;
        self.dt = match kind {
            ModelKind::Fhn => 1e-3,
            _ => 0.01,
        };
        if kind != ModelKind::Fhn {
            self.record_stride *= 5;
        }
        self.noise = Some(noise);
        self
    }

    pub fn t_end(&self) -> f64 {
        self.transient_discard + self.averaging_window
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::new(self.method, self.dt, self.t_end())
            .with_stride(self.record_stride)
            .with_record_start(self.transient_discard)
    }

    pub fn validate(&self, system: &ModelSystem) -> Result<()> {
        self.grid.validate()?;
        system.get_param(&self.input)?;
        if !(self.transient_discard >= 0.0) || !(self.averaging_window > 0.0) {
            return Err(Error::config(
                "transient discard must be >= 0 and averaging window > 0",
            ));
        }
        self.integrator().validate()?;
        if let Some(n) = &self.noise {
            n.validate()?;
            system.get_param(&n.target)?;
        }
        if let Some(x0) = &self.initial_state {
            if x0.len() != system.dim() {
                return Err(Error::DimensionMismatch {
                    expected: system.dim(),
                    got: x0.len(),
                });
            }
        }
        Ok(())
    }

    /// Noise process used at grid point `index` (input value `input`).
    pub fn point_noise(&self, index: usize, input: f64) -> Option<NoiseProcess> {
        self.noise.as_ref().map(|n| {
            let mut p = n.clone();
            if p.target == self.input {
                p.distribution = p.distribution.with_mean(input);
            }
            p.seed = point_seed(n.seed, index);
            p
        })
    }
}

/// Everything measured at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub input: f64,
    /// Time average of every state variable, in label order.
    pub averages: Vec<f64>,
    pub state: Option<DynamicState>,
    pub period: Option<f64>,
    pub duty_cycle: Option<f64>,
    pub seed: Option<u64>,
    pub final_state: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Simulate one grid point: integrate `discard + window`, average every
/// state variable over the window at full step resolution, then classify
/// and measure period and duty cycle on the stored (strided) samples.
pub fn sweep_point(
    system: &ModelSystem,
    cfg: &SweepConfig,
    index: usize,
    x0: &[f64],
) -> Result<SweepPoint> {
    let input = cfg.grid.value(index);
    let mut sys = *system;
    sys.set_param(&cfg.input, input)?;
    let noise = cfg.point_noise(index, input);
    let icfg = cfg.integrator();

    let dim = sys.dim();
    let first = math::ceil(cfg.transient_discard / cfg.dt * (1.0 - 1e-12)) as usize;
    let first = first.div_ceil(cfg.record_stride) * cfg.record_stride;
    let n = icfg.steps();
    if first >= n {
        return Err(Error::config("averaging window shorter than one step"));
    }
    let mut sums = alloc::vec![0.0; dim];
    let mut ends = alloc::vec![0.0; dim];
    let mut data = Vec::with_capacity(((n - first) / cfg.record_stride + 1) * dim);
    let stride = cfg.record_stride;
    let final_state = integrate_observed(&sys, x0, &icfg, noise.as_ref(), |i, x| {
        if i < first {
            return;
        }
        if i == first || i == n {
            for (e, v) in ends.iter_mut().zip(x) {
                *e += 0.5 * v;
            }
        } else {
            for (s, v) in sums.iter_mut().zip(x) {
                *s += v;
            }
        }
        if (i - first) % stride == 0 {
            data.extend_from_slice(x);
        }
    })?;
    let averages: Vec<f64> = sums
        .iter()
        .zip(&ends)
        .map(|(s, e)| (s + e) / (n - first) as f64)
        .collect();

    let traj = Trajectory::new(
        first as f64 * cfg.dt,
        stride as f64 * cfg.dt,
        sys.labels(),
        data,
    )?;
    let mut warnings = Vec::new();
    let state = match classify_state_with(&traj, &cfg.classify) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    let mut period = None;
    let mut duty_cycle = None;
    if matches!(state, Some(s) if s != DynamicState::Quiescent) {
        if let Ok(p) = period_estimate(&traj, &cfg.period_variable) {
            if cfg.averaging_window < 10.0 * p.mean {
                warnings.push(format!(
                    "averaging window covers fewer than 10 periods ({:.3})",
                    p.mean
                ));
            }
            period = Some(p.mean);
        }
        duty_cycle = duty_cycle_of(&traj, &cfg.duty.0, cfg.duty.1).ok();
    }
    Ok(SweepPoint {
        input,
        averages,
        state,
        period,
        duty_cycle,
        seed: noise.map(|n| n.seed),
        final_state,
        warnings,
    })
}

fn duty_cycle_of(traj: &Trajectory, variable: &str, threshold: f64) -> Result<f64> {
    duty_cycle(traj, variable, threshold, 0.0)
}

/// All sweep points of a configuration, evaluated in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub input_name: String,
    pub labels: Vec<String>,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn chair_curve(&self, observable: &str) -> Result<ChairCurve> {
        let idx = self
            .labels
            .iter()
            .position(|l| l == observable)
            .ok_or_else(|| Error::UnknownVariable(observable.into()))?;
        Ok(ChairCurve {
            input_name: self.input_name.clone(),
            observable: observable.into(),
            inputs: self.points.iter().map(|p| p.input).collect(),
            averages: self.points.iter().map(|p| p.averages[idx]).collect(),
            states: self.points.iter().map(|p| p.state).collect(),
        })
    }
}

/// Sequential sweep over the whole grid. The first failing point aborts
/// with its input value attached.
pub fn run_sweep(system: &ModelSystem, cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate(system)?;
    let mut x = cfg
        .initial_state
        .clone()
        .unwrap_or_else(|| system.default_initial_state());
    let x_default = x.clone();
    let mut points = Vec::with_capacity(cfg.grid.len());
    for i in 0..cfg.grid.len() {
        let start = if cfg.warm_start { &x } else { &x_default };
        let p = sweep_point(system, cfg, i, start).map_err(|e| Error::SweepPoint {
            input: cfg.grid.value(i),
            source: alloc::boxed::Box::new(e),
        })?;
        x.clone_from(&p.final_state);
        points.push(p);
    }
    Ok(SweepTable {
        input_name: cfg.input.clone(),
        labels: system.labels(),
        points,
    })
}

/// Time-average of `observable` against the swept input.
pub fn chair_sweep(system: &ModelSystem, observable: &str, cfg: &SweepConfig) -> Result<ChairCurve> {
    if !system.state_labels().contains(&observable) {
        return Err(Error::UnknownVariable(observable.into()));
    }
    run_sweep(system, cfg)?.chair_curve(observable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChairCurve {
    pub input_name: String,
    pub observable: String,
    pub inputs: Vec<f64>,
    pub averages: Vec<f64>,
    /// `None` where the run was too short to classify.
    pub states: Vec<Option<DynamicState>>,
}

impl ChairCurve {
    pub fn new(
        input_name: &str,
        observable: &str,
        inputs: Vec<f64>,
        averages: Vec<f64>,
        states: Vec<Option<DynamicState>>,
    ) -> Result<Self> {
        if inputs.len() != averages.len() || inputs.len() != states.len() {
            return Err(Error::invalid("chair curve columns differ in length"));
        }
        if inputs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("chair curve inputs must be strictly increasing"));
        }
        if averages.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("chair curve averages must be finite"));
        }
        Ok(Self {
            input_name: input_name.into(),
            observable: observable.into(),
            inputs,
            averages,
            states,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// First and last input carrying a rhythmic label, if any.
    pub fn rhythmic_band(&self) -> Option<(f64, f64)> {
        let first = self.states.iter().position(|s| s.is_some_and(|s| s.is_rhythmic()))?;
        let last = self.states.iter().rposition(|s| s.is_some_and(|s| s.is_rhythmic()))?;
        Some((self.inputs[first], self.inputs[last]))
    }

    /// `(min, max)` of the averages over inputs in `[lo, hi]`.
    pub fn range_over(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let v: Vec<f64> = self
            .inputs
            .iter()
            .zip(&self.averages)
            .filter(|(x, _)| in_closed(**x, lo, hi))
            .map(|(_, a)| *a)
            .collect();
        if v.is_empty() {
            None
        } else {
            Some(min_max(&v))
        }
    }
}

fn in_closed(x: f64, lo: f64, hi: f64) -> bool {
    let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    x >= lo - tol && x <= hi + tol
}

/// Ordinary-least-squares slope of the averages on `[lo, hi]`.
pub fn seat_slope(curve: &ChairCurve, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .inputs
        .iter()
        .zip(&curve.averages)
        .filter(|(x, _)| in_closed(**x, lo, hi))
        .map(|(x, y)| (*x, *y))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationInterval {
    pub left: Option<f64>,
    pub right: Option<f64>,
    /// `right - left`, or 0 when either end is missing.
    pub length: f64,
    pub diagnostic: Option<String>,
}

/// Extent of the input range over which the stochastic curve behaves as
/// oscillatory.
///
/// Scanning inward from each end, the endpoint is the first input where
/// either the deterministic run is rhythmic, or the stochastic average
/// departs from the deterministic non-rhythmic branch (quiescent, or
/// tonic spiking for the bursters) by more than `delta`.
pub fn oscillation_interval_length(
    stoch: &ChairCurve,
    det: &ChairCurve,
    delta: f64,
) -> Result<OscillationInterval> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    if stoch.len() != det.len()
        || stoch
            .inputs
            .iter()
            .zip(&det.inputs)
            .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs()))
    {
        return Err(Error::invalid("curves must share the same input grid"));
    }
    let hit = |i: usize| {
        det.states[i].is_some_and(|s| s.is_rhythmic())
            || (stoch.averages[i] - det.averages[i]).abs() > delta
    };
    let n = det.len();
    let left = (0..n).find(|&i| hit(i)).map(|i| det.inputs[i]);
    let right = (0..n).rev().find(|&i| hit(i)).map(|i| det.inputs[i]);
    let (length, diagnostic) = match (left, right) {
        (Some(l), Some(r)) if r >= l => (r - l, None),
        (None, _) | (_, None) => (0.0, Some("no departure from the deterministic branch found".to_string())),
        _ => (0.0, Some("endpoints out of order".to_string())),
    };
    Ok(OscillationInterval {
        left,
        right,
        length,
        diagnostic,
    })
}
