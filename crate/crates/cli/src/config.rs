//! Run configuration: built-in defaults < `key = value` config file <
//! command-line flags and `--set` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use homeodyn::{Method, ModelKind, ModelSystem, NoiseProcess};

/// A user-facing configuration problem; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Integrator and sweep settings that are not model parameters.
pub const RUN_KEYS: &[&str] = &[
    "method", "dt", "t_end", "discard", "window", "stride", "seed", "warm_start",
];

/// Flat `key = value` file. `#` starts a comment, blank lines are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(|e| config_err(format!("{e:#}")))?;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            config_err(format!("{}:{}: expected key = value", path.display(), n + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| config_err(format!("`{s}` is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

pub fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| config_err(format!("`{key}`: `{v}` is not a finite number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| config_err(format!("`{key}`: `{v}` is not a non-negative integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(config_err(format!("`{key}`: `{v}` is not a boolean"))),
    }
}

/// Settings of one command. Integrator fields left `None` take the
/// command's model-specific default.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: ModelSystem,
    pub method: Option<Method>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub discard: Option<f64>,
    pub window: Option<f64>,
    pub stride: Option<usize>,
    pub seed: u64,
    pub warm_start: bool,
}

impl RunConfig {
    pub fn defaults(kind: ModelKind) -> Self {
        Self {
            system: ModelSystem::default_for(kind),
            method: None,
            dt: None,
            t_end: None,
            discard: None,
            window: None,
            stride: None,
            seed: 1,
            warm_start: false,
        }
    }

    /// Apply one assignment. Unknown keys are rejected.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "method" => {
                self.method = Some(Method::parse(value).map_err(|e| config_err(e.to_string()))?)
            }
            "dt" => self.dt = Some(parse_f64(key, value)?),
            "t_end" => self.t_end = Some(parse_f64(key, value)?),
            "discard" => self.discard = Some(parse_f64(key, value)?),
            "window" => self.window = Some(parse_f64(key, value)?),
            "stride" => self.stride = Some(parse_usize(key, value)?),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| config_err(format!("`seed`: `{value}` is not a u64")))?
            }
            "warm_start" => self.warm_start = parse_bool(key, value)?,
            _ => {
                let x = parse_f64(key, value)?;
                self.system.set_param(key, x).map_err(|_| {
                    config_err(format!(
                        "unknown key `{key}` for {} (parameters: {}; run keys: {})",
                        self.system.kind().name(),
                        self.system.param_names().join(", "),
                        RUN_KEYS.join(", ")
                    ))
                })?;
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, pairs: &[(String, String)]) -> Result<()> {
        for (k, v) in pairs {
            self.apply(k, v)?;
        }
        Ok(())
    }

    /// Model name and every parameter value, for the manifest.
    pub fn resolved_model(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("model".into(), self.system.kind().name().into());
        for name in self.system.param_names() {
            let v = self.system.get_param(name).expect("listed parameter");
            m.insert(format!("param.{name}"), format!("{v:?}"));
        }
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

/// `normal:sigma=10,refresh=0.001[,mean=..][,target=J]` or
/// `folded-normal:...`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub folded: bool,
    pub sigma: f64,
    pub refresh: Option<f64>,
    pub mean: Option<f64>,
    pub target: Option<String>,
}

impl NoiseSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let folded = match kind {
            "normal" => false,
            "folded-normal" | "folded" => true,
            other => return Err(config_err(format!("unknown noise distribution `{other}`"))),
        };
        let mut spec = NoiseSpec {
            folded,
            sigma: f64::NAN,
            refresh: None,
            mean: None,
            target: None,
        };
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = parse_assignment(part)?;
            match k.as_str() {
                "sigma" => spec.sigma = parse_f64(&k, &v)?,
                "refresh" => spec.refresh = Some(parse_f64(&k, &v)?),
                "mean" => spec.mean = Some(parse_f64(&k, &v)?),
                "target" => spec.target = Some(v),
                _ => return Err(config_err(format!("unknown noise key `{k}`"))),
            }
        }
        if !(spec.sigma >= 0.0) {
            return Err(config_err("noise needs sigma >= 0"));
        }
        Ok(spec)
    }

    /// Parameter the noise replaces when no `target=` is given.
    pub fn default_target(kind: ModelKind) -> Option<&'static str> {
        match kind {
            ModelKind::Fhn => Some("J"),
            ModelKind::ChayKeizer => Some("kc"),
            ModelKind::Pbm => None,
        }
    }

    /// Build the process. `fallback_target` is used when none was given;
    /// the mean defaults to the target's current value, the refresh to one
    /// integration step.
    pub fn process(&self, cfg: &RunConfig, fallback_target: Option<&str>, dt: f64) -> Result<NoiseProcess> {
        let target = self
            .target
            .as_deref()
            .or(fallback_target)
            .or(Self::default_target(cfg.system.kind()))
            .ok_or_else(|| config_err("noise needs target=<parameter> for this model"))?;
        let current = cfg
            .system
            .get_param(target)
            .map_err(|_| config_err(format!("noise target `{target}` is not a parameter")))?;
        let mean = self.mean.unwrap_or(current);
        let refresh = self.refresh.unwrap_or(dt);
        let p = if self.folded {
            NoiseProcess::folded_normal(target, mean, self.sigma, refresh, cfg.seed)
        } else {
            NoiseProcess::normal(target, mean, self.sigma, refresh, cfg.seed)
        };
        p.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(p)
    }

    #[cfg(test)]
    fn describe(&self) -> String {
        let mut s = format!(
            "{}:sigma={:?}",
            if self.folded { "folded-normal" } else { "normal" },
            self.sigma
        );
        if let Some(r) = self.refresh {
            s += &format!(",refresh={r:?}");
        }
        if let Some(m) = self.mean {
            s += &format!(",mean={m:?}");
        }
        if let Some(t) = &self.target {
            s += &format!(",target={t}");
        }
        s
    }
}
