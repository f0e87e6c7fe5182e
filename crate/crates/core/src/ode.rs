//! Fixed-step integration of autonomous vector fields.
//!
//! Only forward Euler and classical RK4 are provided. Stochastic runs
//! replace one parameter by a piecewise-constant random path whose refresh
//! times sit on the integration grid, so step size is never adapted.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::stochastic::{NoiseProcess, NoiseStream};

/// An autonomous vector field `dx/dt = f(x)` with optionally addressable
/// parameters (needed for parameter noise).
pub trait VectorField {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], dxdt: &mut [f64]);

    fn labels(&self) -> Vec<String>;

    /// Resolve a parameter name to a slot usable with [`set_param_slot`].
    ///
    /// [`set_param_slot`]: VectorField::set_param_slot
    fn param_slot(&self, _name: &str) -> Option<usize> {
        None
    }

    fn set_param_slot(&mut self, _slot: usize, _value: f64) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ForwardEuler,
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ForwardEuler => "forward-euler",
            Method::Rk4 => "rk4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "forward-euler" | "euler" => Ok(Method::ForwardEuler),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::config(alloc::format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    /// Store every k-th step.
    pub record_stride: usize,
    /// Samples before this time are not stored. Snapped up to the next
    /// stored step so that the trajectory stays on the stride grid.
    pub record_start: f64,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_end: f64) -> Self {
        Self {
            method,
            dt,
            t_end,
            record_stride: 1,
            record_start: 0.0,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_record_start(mut self, t: f64) -> Self {
        self.record_start = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::config("t_end must be positive"));
        }
        if self.record_stride == 0 {
            return Err(Error::config("record_stride must be at least 1"));
        }
        if !(self.record_start >= 0.0) || self.record_start > self.t_end {
            return Err(Error::config("record_start must lie in [0, t_end]"));
        }
        Ok(())
    }

    /// Number of integration steps, `floor(t_end / dt)`.
    pub fn steps(&self) -> usize {
        // tolerate t_end/dt landing a hair below an integer
        math::floor(self.t_end / self.dt * (1.0 + 1e-12)) as usize
    }

    fn first_recorded_step(&self) -> usize {
        let k = math::ceil(self.record_start / self.dt * (1.0 - 1e-12)) as usize;
        k.div_ceil(self.record_stride) * self.record_stride
    }
}

/// Uniformly sampled solution. Sample `i` sits at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    dt: f64,
    labels: Vec<String>,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, labels: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::config("trajectory dt must be positive"));
        }
        let dim = labels.len();
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len(),
            });
        }
        Ok(Self {
            t0,
            dt,
            labels,
            data,
        })
    }

    /// Build from per-sample closures; used for synthetic test signals.
    pub fn from_fn(
        t0: f64,
        dt: f64,
        n: usize,
        labels: &[&str],
        mut f: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(n * labels.len());
        for i in 0..n {
            let x = f(t0 + i as f64 * dt);
            if x.len() != labels.len() {
                return Err(Error::DimensionMismatch {
                    expected: labels.len(),
                    got: x.len(),
                });
            }
            data.extend_from_slice(&x);
        }
        Self::new(t0, dt, labels.iter().map(|s| s.to_string()).collect(), data)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn duration(&self) -> f64 {
        self.final_time() - self.t0
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim())
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.variable_index(name)?;
        Ok(self.column_at(idx))
    }

    pub fn column_at(&self, idx: usize) -> Vec<f64> {
        self.states().map(|s| s[idx]).collect()
    }

    /// Contiguous sub-trajectory covering `[t_start, t_stop]`; `dt` is kept.
    pub fn resample_window(&self, t_start: f64, t_stop: f64) -> Result<Trajectory> {
        let tol = 1e-9 * self.dt;
        let t_final = self.final_time();
        if !(t_start < t_stop) || t_start < self.t0 - tol || t_stop > t_final + tol {
            return Err(Error::WindowOutOfRange {
                start: t_start,
                stop: t_stop,
                t0: self.t0,
                t_final,
            });
        }
        let first = math::ceil((t_start - self.t0) / self.dt - 1e-9).max(0.0) as usize;
        let last = (math::floor((t_stop - self.t0) / self.dt + 1e-9) as usize).min(self.len() - 1);
        if last <= first {
            return Err(Error::EmptyWindow);
        }
        let d = self.dim();
        Ok(Trajectory {
            t0: self.time(first),
            dt: self.dt,
            labels: self.labels.clone(),
            data: self.data[first * d..(last + 1) * d].to_vec(),
        })
    }
}

/// Scratch space for one integration method.
pub(crate) struct Stepper {
    method: Method,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(method: Method, dim: usize) -> Self {
        Self {
            method,
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    #[inline]
    pub(crate) fn step<S: VectorField + ?Sized>(&mut self, f: &S, x: &mut [f64], dt: f64) {
        match self.method {
            Method::ForwardEuler => {
                f.eval(x, &mut self.k1);
                for (xi, ki) in x.iter_mut().zip(&self.k1) {
                    *xi += dt * ki;
                }
            }
            Method::Rk4 => {
                let h = 0.5 * dt;
                f.eval(x, &mut self.k1);
                for i in 0..x.len() {
                    self.tmp[i] = x[i] + h * self.k1[i];
                }
                f.eval(&self.tmp, &mut self.k2);
                for i in 0..x.len() {
                    self.tmp[i] = x[i] + h * self.k2[i];
                }
                f.eval(&self.tmp, &mut self.k3);
                for i in 0..x.len() {
                    self.tmp[i] = x[i] + dt * self.k3[i];
                }
                f.eval(&self.tmp, &mut self.k4);
                let s = dt / 6.0;
                for i in 0..x.len() {
                    x[i] += s * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
                }
            }
        }
    }
}

/// Integrate and hand every grid state (step 0 through `cfg.steps()`) to
/// `observer`. Returns the final state.
///
/// With noise, the target parameter is replaced by a fresh draw at every
/// refresh boundary (step indices that are multiples of the snapped refresh
/// interval) and held constant in between.
pub fn integrate_observed<S, F>(
    system: &S,
    x0: &[f64],
    cfg: &IntegratorConfig,
    noise: Option<&NoiseProcess>,
    mut observer: F,
) -> Result<Vec<f64>>
where
    S: VectorField + Clone,
    F: FnMut(usize, &[f64]),
{
    cfg.validate()?;
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x0.len(),
        });
    }
    if let Some(i) = x0.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(alloc::format!(
            "initial state component {i} is not finite"
        )));
    }

    let mut field = system.clone();
    let mut noise_state = match noise {
        Some(p) => {
            let slot = field
                .param_slot(&p.target)
                .ok_or_else(|| Error::UnknownParameter(p.target.clone()))?;
            Some((slot, NoiseStream::new(p, cfg.dt)?))
        }
        None => None,
    };

    let n = cfg.steps();
    let mut x = x0.to_vec();
    let mut stepper = Stepper::new(cfg.method, x.len());
    observer(0, &x);
    for i in 0..n {
        if let Some((slot, stream)) = noise_state.as_mut() {
            if i % stream.refresh_steps() == 0 {
                field.set_param_slot(*slot, stream.next_value());
            }
        }
        stepper.step(&field, &mut x, cfg.dt);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp {
                time: (i + 1) as f64 * cfg.dt,
            });
        }
        observer(i + 1, &x);
    }
    Ok(x)
}

/// Integrate `system` from `x0` and record a [`Trajectory`].
///
/// The result holds `floor(steps / stride) + 1` samples when recording
/// starts at zero; output is bit-for-bit reproducible for a fixed config and
/// noise seed.
pub fn integrate<S: VectorField + Clone>(
    system: &S,
    x0: &[f64],
    cfg: &IntegratorConfig,
    noise: Option<&NoiseProcess>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let stride = cfg.record_stride;
    let first = cfg.first_recorded_step();
    let n = cfg.steps();
    if first > n {
        return Err(Error::config("record_start leaves no samples"));
    }
    let dim = system.dim();
    let mut data = Vec::with_capacity(((n - first) / stride + 1) * dim);
    integrate_observed(system, x0, cfg, noise, |i, x| {
        if i >= first && (i - first) % stride == 0 {
            data.extend_from_slice(x);
        }
    })?;
    Trajectory::new(
        first as f64 * cfg.dt,
        stride as f64 * cfg.dt,
        system.labels(),
        data,
    )
}
