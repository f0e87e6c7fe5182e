mod commands;
mod config;
mod output;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use homeodyn::analysis::SweepGrid;
use homeodyn::{ModelKind, VectorField};

use crate::commands::{
    ck_diagram, fhn_locus, parse_observables, run_simulation, run_sweep_cmd, sweep_summary, write_diagram,
    write_locus, write_simulation, write_sweep,
};
use crate::config::{config_err, parse_assignment, parse_f64, read_config_file, ConfigError, NoiseSpec, RunConfig};
use crate::output::{diff_dirs, Manifest, OutDir};

#[derive(Parser, Debug)]
#[command(name = "homeodyn", version, about = "Fast-slow oscillators, chair curves and fast-subsystem bifurcations")]
struct Cli {
    /// key = value file applied over the built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// transient discarded before averaging
    #[arg(long, global = true)]
    discard: Option<f64>,
    /// sweep workers (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// re-run and compare byte-for-byte with the existing contents of --out
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct ModelArgs {
    /// parameter or run-key override, repeatable: --set J=0.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// piecewise-constant parameter noise, e.g. folded-normal:sigma=0.04,refresh=1000
    #[arg(long)]
    noise: Option<String>,
    /// rk4 or euler
    #[arg(long)]
    method: Option<String>,
    /// keep every n-th sample
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one model and write its trajectory.
    Simulate {
        model: String,
        #[command(flatten)]
        m: ModelArgs,
        /// initial state, comma separated
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Time-averages against one parameter (chair curve).
    Sweep {
        model: String,
        input: String,
        /// lo:hi:step, endpoints inclusive
        #[arg(allow_hyphen_values = true)]
        range: String,
        #[command(flatten)]
        m: ModelArgs,
        /// comma-separated state variables to report (default: all)
        #[arg(long)]
        observe: Option<String>,
        /// averaging window after the discard
        #[arg(long)]
        window: Option<f64>,
        /// seat interval lo:hi for the slope (default: rhythmic band)
        #[arg(long, allow_hyphen_values = true)]
        seat: Option<String>,
        /// oscillation-interval threshold; also runs the deterministic reference
        #[arg(long)]
        delta: Option<f64>,
        /// start each point from the previous point's final state
        #[arg(long = "warm-start")]
        warm_start: bool,
    },
    /// Hopf locus (fhn) or fast-subsystem diagram (chay-keizer).
    Bifurcate {
        model: String,
        #[command(flatten)]
        m: ModelArgs,
        /// alpha range lo:hi:step for the fhn locus
        #[arg(long, default_value = "1:5:0.05")]
        alpha: String,
    },
    /// Regenerate the CSVs behind one figure (fig2 ... fig14).
    Reproduce { figure: String },
}

fn parse_model(s: &str) -> Result<ModelKind> {
    ModelKind::parse(s).map_err(|_| config_err(format!("unknown model `{s}` (fhn, chay-keizer, pbm)")))
}

fn parse_range(s: &str) -> Result<SweepGrid> {
    SweepGrid::parse(s).map_err(|e| config_err(e.to_string()))
}

fn parse_interval(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| config_err(format!("`{s}` is not lo:hi")))?;
    Ok((parse_f64("seat", a)?, parse_f64("seat", b)?))
}

/// defaults < config file < global flags < subcommand flags < --set
fn run_config(cli: &Cli, kind: ModelKind, m: &ModelArgs) -> Result<RunConfig> {
    let mut c = RunConfig::defaults(kind);
    if let Some(path) = &cli.config {
        c.apply_all(&read_config_file(path)?)?;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    c.dt = cli.dt.or(c.dt);
    c.t_end = cli.t_end.or(c.t_end);
    c.discard = cli.discard.or(c.discard);
    if let Some(meth) = &m.method {
        c.apply("method", meth)?;
    }
    c.stride = m.stride.or(c.stride);
    for s in &m.set {
        let (k, v) = parse_assignment(s)?;
        c.apply(&k, &v)?;
    }
    Ok(c)
}

fn noise_of(m: &ModelArgs) -> Result<Option<NoiseSpec>> {
    m.noise.as_deref().map(NoiseSpec::parse).transpose()
}

/// Arguments that reproduce the run, minus output placement and worker
/// count.
fn manifest_args() -> Vec<String> {
    let mut out = Vec::new();
    let mut it = std::env::args().skip(1);
    while let Some(a) = it.next() {
        match a.as_str() {
            "--check" => {}
            "--out" | "--workers" => {
                it.next();
            }
            _ if a.starts_with("--out=") || a.starts_with("--workers=") => {}
            _ => out.push(a),
        }
    }
    out
}

fn execute(cli: &Cli, dir: &Path) -> Result<Vec<String>> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut out = OutDir::create(dir)?;
    let args = manifest_args();
    let (name, seed, config) = match &cli.cmd {
        Command::Simulate { model, m, x0 } => {
            let c = run_config(cli, parse_model(model)?, m)?;
            let x0: Option<Vec<f64>> = x0
                .as_deref()
                .map(|s| s.split(',').map(|v| parse_f64("x0", v.trim())).collect())
                .transpose()?;
            if let Some(x) = &x0 {
                if x.len() != c.system.dim() {
                    return Err(config_err(format!("x0 needs {} values", c.system.dim())));
                }
            }
            let sim = run_simulation(&c, noise_of(m)?.as_ref(), x0.as_deref())?;
            write_simulation(&mut out, "", &sim)?;
            ("simulate", c.seed, sim.config)
        }
        Command::Sweep { model, input, range, m, observe, window, seat, delta, warm_start } => {
            let mut c = run_config(cli, parse_model(model)?, m)?;
            c.window = window.or(c.window);
            c.warm_start |= *warm_start;
            let grid = parse_range(range)?;
            let observe = parse_observables(&c.system, observe.as_deref())?;
            let seat = seat.as_deref().map(parse_interval).transpose()?;
            if delta.is_some_and(|d| !(d > 0.0)) {
                return Err(config_err("--delta must be positive"));
            }
            let noise = noise_of(m)?;
            let sweep = run_sweep_cmd(&c, input, grid, noise.as_ref(), workers)?;
            write_sweep(&mut out, "sweep.csv", &sweep, &observe)?;
            let reference = match (delta, &noise) {
                (Some(d), Some(_)) => {
                    let mut det = c.clone();
                    det.method = None;
                    det.dt = cli.dt;
                    let r = run_sweep_cmd(&det, input, grid, None, workers)?;
                    write_sweep(&mut out, "reference.csv", &r, &observe)?;
                    Some((r, *d))
                }
                (Some(d), None) => Some((run_sweep_cmd(&c, input, grid, None, workers)?, *d)),
                _ => None,
            };
            let summary = sweep_summary(&sweep, &observe, seat, reference.as_ref().map(|(r, d)| (r, *d)))?;
            out.summary("summary.csv", &summary)?;
            ("sweep", c.seed, sweep.config)
        }
        Command::Bifurcate { model, m, alpha } => {
            let kind = parse_model(model)?;
            let c = run_config(cli, kind, m)?;
            let mut config = c.resolved_model();
            match kind {
                ModelKind::Fhn => {
                    let grid = parse_range(alpha)?;
                    write_locus(&mut out, "hopf_locus.csv", &fhn_locus(&c, grid)?)?;
                    config.insert("alpha".into(), alpha.clone());
                }
                ModelKind::ChayKeizer => {
                    let (d, dc) = ck_diagram(&c)?;
                    write_diagram(&mut out, "", &c, &d)?;
                    config.insert("envelope_dt".into(), format!("{:?}", dc.envelope.dt));
                }
                ModelKind::Pbm => return Err(config_err("bifurcate supports fhn and chay-keizer")),
            }
            ("bifurcate", c.seed, config)
        }
        Command::Reproduce { figure } => {
            let info = reproduce::reproduce(figure, &mut out, workers)?;
            let seed = info.get("seed").and_then(|s| s.parse().ok()).unwrap_or(0);
            ("reproduce", seed, info)
        }
    };
    out.finish(Manifest::new(name, args, seed, config))
}

fn run(cli: &Cli) -> Result<()> {
    if !cli.check {
        let files = execute(cli, &cli.out)?;
        eprintln!("wrote {} files to {}", files.len(), cli.out.display());
        return Ok(());
    }
    Manifest::read(&cli.out).map_err(|e| config_err(format!("--check needs an existing run: {e:#}")))?;
    let tmp = std::env::temp_dir().join(format!("homeodyn-check-{}", std::process::id()));
    let result = execute(cli, &tmp);
    let outcome = result.map(|files| diff_dirs(&cli.out, &tmp, &files));
    let _ = std::fs::remove_dir_all(&tmp);
    let diffs = outcome?;
    if diffs.is_empty() {
        eprintln!("check passed: outputs in {} reproduce byte-for-byte", cli.out.display());
        Ok(())
    } else {
        Err(anyhow::anyhow!("check failed, differing files: {}", diffs.join(", ")))
    }
}

/// 1 for configuration problems, 2 for numerical failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
        if let Some(h) = cause.downcast_ref::<homeodyn::Error>() {
            use homeodyn::Error::*;
            return match h {
                InvalidConfig(_) | InvalidArgument(_) | UnknownParameter(_) | UnknownVariable(_)
                | DimensionMismatch { .. } => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&config_err("x")), 1);
        assert_eq!(exit_code(&homeodyn::Error::BlowUp { time: 1.0 }.into()), 2);
        assert_eq!(exit_code(&homeodyn::Error::UnknownParameter("q".into()).into()), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("check failed")), 2);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["homeodyn", "sweep", "fhn", "J", "-3:3:0.05", "--observe", "y", "--set", "alpha=2"]).unwrap();
        assert!(matches!(c.cmd, Command::Sweep { .. }));
    }
}
