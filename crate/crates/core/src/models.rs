//! Model vector fields: FitzHugh–Nagumo, reduced Chay–Keizer and the
//! phantom bursting model.
//!
//! Units: FHN is dimensionless. For the two beta-cell models V is in mV,
//! conductances in pS, currents in fA, capacitance in fF, concentrations
//! in µM and time in ms, so `dV/dt` comes out in mV/ms.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::ode::VectorField;

macro_rules! param_table {
    (
        $(#[$meta:meta])*
        pub struct $name:ident {
            $( $(#[$fmeta:meta])* $field:ident : $key:literal = $default:expr, )*
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name {
            $( $(#[$fmeta])* pub $field: f64, )*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl $name {
            /// Parameter keys in declaration order.
            pub const NAMES: &'static [&'static str] = &[$($key),*];

            pub fn slot(name: &str) -> Option<usize> {
                Self::NAMES.iter().position(|k| *k == name)
            }

            pub fn get(&self, name: &str) -> Result<f64> {
                match name {
                    $( $key => Ok(self.$field), )*
                    _ => Err(Error::UnknownParameter(name.to_string())),
                }
            }

            pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
                match name {
                    $( $key => { self.$field = value; Ok(()) } )*
                    _ => Err(Error::UnknownParameter(name.to_string())),
                }
            }

            #[inline]
            fn set_slot(&mut self, slot: usize, value: f64) {
                let mut i = 0usize;
                $(
                    if i == slot {
                        self.$field = value;
                        return;
                    }
                    i += 1;
                )*
                let _ = i;
            }
        }
    };
}

param_table! {
    /// FitzHugh–Nagumo parameters.
    pub struct FhnParams {
        /// timescale separation
        mu: "mu" = 30.0,
        /// feedback strength
        alpha: "alpha" = 2.0,
        /// input stimulus
        j: "J" = 0.0,
    }
}

param_table! {
    /// Reduced Chay–Keizer parameters (defaults are the published table).
    pub struct ChayKeizerParams {
        g_ca: "gCa" = 1200.0,
        g_k: "gK" = 3000.0,
        g_kca: "gKCa" = 300.0,
        g_katp: "gKATP" = 230.0,
        cm: "Cm" = 5300.0,
        /// applied current, fA
        i_ap: "Iap" = 500.0,
        v_m: "vm" = -20.0,
        v_w: "vw" = -16.0,
        s_m: "sm" = 12.0,
        s_w: "sw" = 5.0,
        v_ca: "VCa" = 25.0,
        v_k: "VK" = -75.0,
        tau_w: "tau_w" = 16.0,
        /// Hill coefficient of the K(Ca) gate
        p: "p" = 5.0,
        k_omega: "KOmega" = 0.3,
        f: "f" = 0.001,
        beta: "beta" = 2.25e-6,
        /// Ca2+ pump rate, 1/ms
        kc: "kc" = 0.07,
    }
}

param_table! {
    /// Phantom bursting model parameters (defaults are the published table).
    pub struct PbmParams {
        g_ca: "gCa" = 1200.0,
        g_k: "gK" = 3000.0,
        g_kca: "gKCa" = 600.0,
        g_katp: "gKATP" = 500.0,
        cm: "Cm" = 5300.0,
        v_m: "vm" = -20.0,
        v_w: "vw" = -15.0,
        s_m: "sm" = 12.0,
        s_w: "sw" = 5.0,
        v_ca: "VCa" = 25.0,
        v_k: "VK" = -75.0,
        tau_w: "tau_w" = 18.0,
        beta: "beta" = 4.5e-6,
        /// metabolic half-activation of a, µM
        r: "r" = 0.225,
        s_a: "s_a" = 0.1,
        tau_a: "tau_a" = 300_000.0,
        kd: "Kd" = 0.4,
        p_leak: "p_leak" = 0.0002,
        serca_2b: "SERCA2b" = 0.02,
        serca_3: "SERCA3" = 0.2,
        k_pmca: "kPMCA" = 0.125,
        f_cyt: "f_cyt" = 0.001,
        f_er: "f_er" = 0.01,
        /// V_cyt / V_er
        vol_ratio: "vol_ratio" = 10.0,
    }
}

/// Increasing Boltzmann activation `1 / (1 + exp((v_half - v) / slope))`.
pub fn boltzmann(v: f64, v_half: f64, slope: f64) -> Result<f64> {
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::invalid("Boltzmann slope must be non-zero"));
    }
    Ok(boltzmann_unchecked(v, v_half, slope))
}

#[inline]
fn boltzmann_unchecked(v: f64, v_half: f64, slope: f64) -> f64 {
    1.0 / (1.0 + math::exp((v_half - v) / slope))
}

/// Hill fraction `c^p / (K^p + c^p)`.
#[inline]
pub fn hill(c: f64, k: f64, p: f64) -> f64 {
    let (cp, kp) = if p == 5.0 {
        (math::powi(c, 5), math::powi(k, 5))
    } else {
        (math::pow(c, p), math::pow(k, p))
    };
    cp / (kp + cp)
}

// ---------------------------------------------------------------- FHN

pub fn fhn_rhs(state: [f64; 2], p: &FhnParams) -> [f64; 2] {
    let [x, y] = state;
    [p.mu * (x - x * x * x / 3.0 - y), (p.j + p.alpha * x - y) / p.mu]
}

/// The unique equilibrium for `alpha > 1`: root of
/// `x^3/3 + (alpha - 1) x + J = 0`, `y = J + alpha x`.
pub fn fhn_equilibrium(p: &FhnParams) -> Result<(f64, f64)> {
    if !(p.alpha > 1.0) {
        return Err(Error::ConditionViolated(alloc::format!(
            "alpha = {} must exceed 1 for a unique equilibrium",
            p.alpha
        )));
    }
    let a = p.alpha - 1.0;
    let g = |x: f64| x * x * x / 3.0 + a * x + p.j;
    // g is strictly increasing; |x| <= |J|/a bounds the root.
    let bound = p.j.abs() / a + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    let mut x = 0.0;
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = gx / (x * x + a);
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            x -= step;
            break;
        }
        let newton = x - step;
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((x, p.j + p.alpha * x))
}

// ---------------------------------------------------------------- Chay–Keizer

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkCurrents {
    pub i_ca: f64,
    pub i_k: f64,
    pub i_kca: f64,
    pub i_katp: f64,
}

fn check_conc(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeConcentration { name, value })
    }
}

impl ChayKeizerParams {
    #[inline]
    pub fn m_inf(&self, v: f64) -> f64 {
        boltzmann_unchecked(v, self.v_m, self.s_m)
    }

    #[inline]
    pub fn w_inf(&self, v: f64) -> f64 {
        boltzmann_unchecked(v, self.v_w, self.s_w)
    }

    #[inline]
    pub fn hill(&self, c: f64) -> f64 {
        hill(c, self.k_omega, self.p)
    }

    #[inline]
    fn currents(&self, v: f64, w: f64, c: f64) -> CkCurrents {
        CkCurrents {
            i_ca: self.g_ca * self.m_inf(v) * (v - self.v_ca),
            i_k: self.g_k * w * (v - self.v_k),
            i_kca: self.g_kca * self.hill(c) * (v - self.v_k),
            i_katp: self.g_katp * (v - self.v_k),
        }
    }

    #[inline]
    fn rhs(&self, v: f64, w: f64, c: f64) -> [f64; 3] {
        let i = self.currents(v, w, c);
        [
            -(i.i_ca + i.i_k + i.i_kca + i.i_katp - self.i_ap) / self.cm,
            (self.w_inf(v) - w) / self.tau_w,
            -self.f * (self.beta * i.i_ca + self.kc * c),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("gCa", self.g_ca),
            ("gK", self.g_k),
            ("gKCa", self.g_kca),
            ("gKATP", self.g_katp),
            ("Cm", self.cm),
            ("tau_w", self.tau_w),
            ("KOmega", self.k_omega),
            ("f", self.f),
            ("beta", self.beta),
            ("kc", self.kc),
        ];
        for (k, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::config(alloc::format!("{k} must be non-negative")));
            }
        }
        if !(self.cm > 0.0 && self.tau_w > 0.0) {
            return Err(Error::config("Cm and tau_w must be positive"));
        }
        if !(self.p >= 1.0) {
            return Err(Error::config("Hill coefficient p must be >= 1"));
        }
        if self.s_m == 0.0 || self.s_w == 0.0 {
            return Err(Error::config("activation slopes must be non-zero"));
        }
        Ok(())
    }
}

pub fn ck_currents(state: [f64; 3], p: &ChayKeizerParams) -> Result<CkCurrents> {
    check_conc("c", state[2])?;
    Ok(p.currents(state[0], state[1], state[2]))
}

pub fn ck_rhs(state: [f64; 3], p: &ChayKeizerParams) -> Result<[f64; 3]> {
    check_conc("c", state[2])?;
    Ok(p.rhs(state[0], state[1], state[2]))
}

// ---------------------------------------------------------------- PBM

impl PbmParams {
    #[inline]
    pub fn m_inf(&self, v: f64) -> f64 {
        boltzmann_unchecked(v, self.v_m, self.s_m)
    }

    #[inline]
    pub fn w_inf(&self, v: f64) -> f64 {
        boltzmann_unchecked(v, self.v_w, self.s_w)
    }

    #[inline]
    pub fn a_inf(&self, c: f64) -> f64 {
        boltzmann_unchecked(c, self.r, self.s_a)
    }

    #[inline]
    fn rhs(&self, x: &[f64]) -> [f64; 5] {
        let (v, w, c, c_er, a) = (x[0], x[1], x[2], x[3], x[4]);
        let c5 = math::powi(c, 5);
        let i_ca = self.g_ca * self.m_inf(v) * (v - self.v_ca);
        let i_k = self.g_k * w * (v - self.v_k);
        let i_kca = self.g_kca * c5 / (math::powi(self.kd, 5) + c5) * (v - self.v_k);
        let i_katp = self.g_katp * a * (v - self.v_k);
        let j_mem = -(self.beta * i_ca + self.k_pmca * c);
        let j_serca = self.serca_2b + self.serca_3 * c;
        let j_leak = self.p_leak * (c_er - c);
        let j_er = j_leak - j_serca;
        [
            -(i_ca + i_k + i_kca + i_katp) / self.cm,
            (self.w_inf(v) - w) / self.tau_w,
            self.f_cyt * (j_mem + j_er),
            -self.f_er * self.vol_ratio * j_er,
            (self.a_inf(c) - a) / self.tau_a,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("gCa", self.g_ca),
            ("gK", self.g_k),
            ("gKCa", self.g_kca),
            ("gKATP", self.g_katp),
            ("beta", self.beta),
            ("Kd", self.kd),
            ("p_leak", self.p_leak),
            ("SERCA2b", self.serca_2b),
            ("SERCA3", self.serca_3),
            ("kPMCA", self.k_pmca),
            ("f_cyt", self.f_cyt),
            ("f_er", self.f_er),
            ("vol_ratio", self.vol_ratio),
        ];
        for (k, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::config(alloc::format!("{k} must be non-negative")));
            }
        }
        if !(self.cm > 0.0 && self.tau_w > 0.0 && self.tau_a > 0.0) {
            return Err(Error::config("Cm, tau_w and tau_a must be positive"));
        }
        if self.s_m == 0.0 || self.s_w == 0.0 || self.s_a == 0.0 {
            return Err(Error::config("activation slopes must be non-zero"));
        }
        Ok(())
    }
}

/// Right-hand side of the phantom bursting model for `(V, w, c, c_er, a)`.
/// `a` outside `[0, 1]` is accepted; it is a ratio, not a probability.
pub fn pbm_rhs(state: [f64; 5], p: &PbmParams) -> Result<[f64; 5]> {
    check_conc("c", state[2])?;
    check_conc("c_er", state[3])?;
    Ok(p.rhs(&state))
}

// ---------------------------------------------------------------- ModelSystem

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Fhn,
    ChayKeizer,
    Pbm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Fhn, ModelKind::ChayKeizer, ModelKind::Pbm];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fhn => "fhn",
            ModelKind::ChayKeizer => "chay-keizer",
            ModelKind::Pbm => "pbm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fhn" => Ok(ModelKind::Fhn),
            "chay-keizer" | "ck" => Ok(ModelKind::ChayKeizer),
            "pbm" => Ok(ModelKind::Pbm),
            other => Err(Error::config(alloc::format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timescale {
    Fast,
    Slow,
}

/// A model together with its parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSystem {
    Fhn(FhnParams),
    ChayKeizer(ChayKeizerParams),
    Pbm(PbmParams),
}

impl ModelSystem {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Fhn => ModelSystem::Fhn(FhnParams::default()),
            ModelKind::ChayKeizer => ModelSystem::ChayKeizer(ChayKeizerParams::default()),
            ModelKind::Pbm => ModelSystem::Pbm(PbmParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSystem::Fhn(_) => ModelKind::Fhn,
            ModelSystem::ChayKeizer(_) => ModelKind::ChayKeizer,
            ModelSystem::Pbm(_) => ModelKind::Pbm,
        }
    }

    pub fn state_labels(&self) -> &'static [&'static str] {
        match self {
            ModelSystem::Fhn(_) => &["x", "y"],
            ModelSystem::ChayKeizer(_) => &["V", "w", "c"],
            ModelSystem::Pbm(_) => &["V", "w", "c", "c_er", "a"],
        }
    }

    pub fn timescales(&self) -> &'static [Timescale] {
        use Timescale::*;
        match self {
            ModelSystem::Fhn(_) => &[Fast, Slow],
            ModelSystem::ChayKeizer(_) => &[Fast, Fast, Slow],
            ModelSystem::Pbm(_) => &[Fast, Fast, Slow, Slow, Slow],
        }
    }

    /// Slow variables ordered from fastest to slowest.
    pub fn slow_variables(&self) -> &'static [&'static str] {
        match self {
            ModelSystem::Fhn(_) => &["y"],
            ModelSystem::ChayKeizer(_) => &["c"],
            ModelSystem::Pbm(_) => &["c", "c_er", "a"],
        }
    }

    pub fn default_initial_state(&self) -> Vec<f64> {
        match self {
            ModelSystem::Fhn(_) => alloc::vec![0.1, 0.0],
            ModelSystem::ChayKeizer(_) => alloc::vec![-60.0, 0.0, 0.2],
            ModelSystem::Pbm(_) => alloc::vec![-60.0, 0.0, 0.1, 100.0, 0.46],
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelSystem::Fhn(_) => FhnParams::NAMES,
            ModelSystem::ChayKeizer(_) => ChayKeizerParams::NAMES,
            ModelSystem::Pbm(_) => PbmParams::NAMES,
        }
    }

    pub fn get_param(&self, name: &str) -> Result<f64> {
        match self {
            ModelSystem::Fhn(p) => p.get(name),
            ModelSystem::ChayKeizer(p) => p.get(name),
            ModelSystem::Pbm(p) => p.get(name),
        }
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::config(alloc::format!("{name} must be finite")));
        }
        match self {
            ModelSystem::Fhn(p) => p.set(name, value),
            ModelSystem::ChayKeizer(p) => p.set(name, value),
            ModelSystem::Pbm(p) => p.set(name, value),
        }
    }

    /// Parameter sanity checks. Returns human-readable warnings for values
    /// that are legal but outside the regime the analyses assume.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        match self {
            ModelSystem::Fhn(p) => {
                if !(p.mu > 0.0) {
                    return Err(Error::config("mu must be positive"));
                }
                if p.mu < 5.0 {
                    warnings.push(alloc::format!("mu = {} is not >> 1", p.mu));
                }
                if p.alpha <= 1.0 {
                    warnings.push(alloc::format!(
                        "alpha = {} <= 1: more than one equilibrium possible",
                        p.alpha
                    ));
                }
            }
            ModelSystem::ChayKeizer(p) => p.validate()?,
            ModelSystem::Pbm(p) => p.validate()?,
        }
        Ok(warnings)
    }
}

impl VectorField for ModelSystem {
    fn dim(&self) -> usize {
        self.state_labels().len()
    }

    #[inline]
    fn eval(&self, x: &[f64], dxdt: &mut [f64]) {
        match self {
            ModelSystem::Fhn(p) => {
                let r = fhn_rhs([x[0], x[1]], p);
                dxdt[..2].copy_from_slice(&r);
            }
            ModelSystem::ChayKeizer(p) => {
                let r = p.rhs(x[0], x[1], x[2]);
                dxdt[..3].copy_from_slice(&r);
            }
            ModelSystem::Pbm(p) => {
                let r = p.rhs(x);
                dxdt[..5].copy_from_slice(&r);
            }
        }
    }

    fn labels(&self) -> Vec<String> {
        self.state_labels().iter().map(|s| s.to_string()).collect()
    }

    fn param_slot(&self, name: &str) -> Option<usize> {
        match self {
            ModelSystem::Fhn(_) => FhnParams::slot(name),
            ModelSystem::ChayKeizer(_) => ChayKeizerParams::slot(name),
            ModelSystem::Pbm(_) => PbmParams::slot(name),
        }
    }

    fn set_param_slot(&mut self, slot: usize, value: f64) {
        match self {
            ModelSystem::Fhn(p) => p.set_slot(slot, value),
            ModelSystem::ChayKeizer(p) => p.set_slot(slot, value),
            ModelSystem::Pbm(p) => p.set_slot(slot, value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fhn(alpha: f64, j: f64) -> FhnParams {
        FhnParams {
            mu: 30.0,
            alpha,
            j,
        }
    }

    #[test]
    fn fhn_rhs_values() {
        assert_eq!(fhn_rhs([0.0, 0.0], &fhn(2.0, 0.0)), [0.0, 0.0]);
        let [dx, dy] = fhn_rhs([1.0, 0.0], &fhn(2.0, 0.0));
        assert!((dx - 20.0).abs() < 1e-12);
        assert!((dy - 2.0 / 30.0).abs() < 1e-15);
    }

    fn bisect_cubic(a: f64, j: f64) -> f64 {
        let g = |x: f64| x * x * x / 3.0 + a * x + j;
        let (mut lo, mut hi) = (-3.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fhn_equilibrium_matches_bisection() {
        let (x, y) = fhn_equilibrium(&fhn(2.0, 0.8)).unwrap();
        let xb = bisect_cubic(1.0, 0.8);
        assert!((x - xb).abs() < 1e-12);
        assert!((y - (0.8 + 2.0 * xb)).abs() < 1e-12);
        let r = fhn_rhs([x, y], &fhn(2.0, 0.8));
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn fhn_equilibrium_odd_symmetry() {
        assert_eq!(fhn_equilibrium(&fhn(2.0, 0.0)).unwrap(), (0.0, 0.0));
        let (xp, yp) = fhn_equilibrium(&fhn(2.0, 0.8)).unwrap();
        let (xm, ym) = fhn_equilibrium(&fhn(2.0, -0.8)).unwrap();
        assert!((xp + xm).abs() < 1e-14 && (yp + ym).abs() < 1e-14);
    }

    #[test]
    fn fhn_equilibrium_rejects_small_alpha() {
        assert!(fhn_equilibrium(&fhn(1.0, 0.1)).is_err());
        assert!(fhn_equilibrium(&fhn(0.5, 0.1)).is_err());
    }

    #[test]
    fn boltzmann_values() {
        assert_eq!(boltzmann(-20.0, -20.0, 12.0).unwrap(), 0.5);
        assert!((boltzmann(1e6, 0.0, 5.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(boltzmann(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ck_reversal_potentials() {
        let p = ChayKeizerParams::default();
        let i = ck_currents([p.v_ca, 0.3, 0.5], &p).unwrap();
        assert_eq!(i.i_ca, 0.0);
        let i = ck_currents([p.v_k, 0.3, 0.5], &p).unwrap();
        assert_eq!((i.i_k, i.i_kca, i.i_katp), (0.0, 0.0, 0.0));
        assert_eq!(p.hill(p.k_omega), 0.5);
    }

    #[test]
    fn ck_rhs_at_potassium_reversal() {
        let p = ChayKeizerParams::default();
        let w = p.w_inf(-75.0);
        let d = ck_rhs([-75.0, w, 0.0], &p).unwrap();
        let i_ca = p.g_ca * p.m_inf(-75.0) * (-75.0 - p.v_ca);
        assert_eq!(d[1], 0.0);
        // dc/dt = -f beta I_Ca, small but non-zero since I_Ca < 0 at -75 mV
        assert!((d[2] + p.f * p.beta * i_ca).abs() < 1e-20);
        assert!((d[0] + (i_ca - p.i_ap) / p.cm).abs() < 1e-12);
    }

    #[test]
    fn ck_kca_saturates() {
        let p = ChayKeizerParams::default();
        let i = ck_currents([-40.0, 0.1, 1e3], &p).unwrap();
        assert!((i.i_kca - p.g_kca * (-40.0 - p.v_k)).abs() < 1e-9);
    }

    #[test]
    fn negative_concentrations_rejected() {
        let p = ChayKeizerParams::default();
        assert!(ck_rhs([-60.0, 0.0, -0.1], &p).is_err());
        assert!(ck_currents([-60.0, 0.0, -0.1], &p).is_err());
        let q = PbmParams::default();
        assert!(pbm_rhs([-60.0, 0.0, 0.1, -1.0, 0.5], &q).is_err());
    }

    #[test]
    fn pbm_midpoint_and_zero_leak() {
        let p = PbmParams::default();
        assert_eq!(p.a_inf(p.r), 0.5);
        let a = 0.3;
        let d = pbm_rhs([-60.0, 0.1, p.r, 50.0, a], &p).unwrap();
        assert!((d[4] - (0.5 - a) / p.tau_a).abs() < 1e-18);

        // c_er = c: the leak vanishes and only SERCA uptake moves c_er
        let c = 0.2;
        let d = pbm_rhs([-60.0, 0.1, c, c, a], &p).unwrap();
        let j_serca = p.serca_2b + p.serca_3 * c;
        assert!((d[3] - p.f_er * p.vol_ratio * j_serca).abs() < 1e-15);
    }

    #[test]
    fn param_tables_roundtrip() {
        let mut m = ModelSystem::default_for(ModelKind::ChayKeizer);
        assert_eq!(m.get_param("kc").unwrap(), 0.07);
        m.set_param("kc", 0.09).unwrap();
        assert_eq!(m.get_param("kc").unwrap(), 0.09);
        let slot = m.param_slot("KOmega").unwrap();
        m.set_param_slot(slot, 0.4);
        assert_eq!(m.get_param("KOmega").unwrap(), 0.4);
        assert!(m.set_param("nope", 1.0).is_err());
        assert_eq!(PbmParams::NAMES.len(), 24);
    }

    #[test]
    fn table_defaults() {
        let p = ChayKeizerParams::default();
        assert_eq!(
            (p.g_ca, p.g_kca, p.g_k, p.g_katp, p.cm),
            (1200.0, 300.0, 3000.0, 230.0, 5300.0)
        );
        assert_eq!((p.i_ap, p.p, p.k_omega, p.tau_w, p.beta), (500.0, 5.0, 0.3, 16.0, 2.25e-6));
        assert_eq!((p.v_w, p.s_w, p.v_m, p.s_m), (-16.0, 5.0, -20.0, 12.0));
        assert_eq!((p.v_k, p.f, p.v_ca, p.kc), (-75.0, 0.001, 25.0, 0.07));

        let q = PbmParams::default();
        assert_eq!((q.g_ca, q.g_kca, q.g_k, q.g_katp, q.cm), (1200.0, 600.0, 3000.0, 500.0, 5300.0));
        assert_eq!((q.r, q.vol_ratio, q.kd, q.tau_w, q.tau_a), (0.225, 10.0, 0.4, 18.0, 300_000.0));
        assert_eq!((q.v_w, q.s_w, q.v_m, q.s_m), (-15.0, 5.0, -20.0, 12.0));
        assert_eq!((q.p_leak, q.s_a, q.v_k, q.f_cyt), (0.0002, 0.1, -75.0, 0.001));
        assert_eq!((q.v_ca, q.f_er, q.serca_3, q.serca_2b), (25.0, 0.01, 0.2, 0.02));
        assert_eq!((q.beta, q.k_pmca), (4.5e-6, 0.125));
    }

    #[test]
    fn timescale_tags() {
        use Timescale::*;
        let pbm = ModelSystem::default_for(ModelKind::Pbm);
        assert_eq!(pbm.timescales(), &[Fast, Fast, Slow, Slow, Slow]);
        assert_eq!(pbm.slow_variables().last(), Some(&"a"));
        let ck = ModelSystem::default_for(ModelKind::ChayKeizer);
        assert_eq!(ck.timescales(), &[Fast, Fast, Slow]);
    }
}
