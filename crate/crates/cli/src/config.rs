//! Command-line and key=value configuration.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use sads_udw::radial::{Method, SolverSettings};
use sads_udw::response::{DetectorSpec, Trajectory, Vacuum};
use sads_udw::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Mode,
    StaticRate,
    CircularRate,
    ScanPeaks,
    PeakFit,
    Wkb,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Mode => "mode",
            Task::StaticRate => "static-rate",
            Task::CircularRate => "circular-rate",
            Task::ScanPeaks => "scan-peaks",
            Task::PeakFit => "peak-fit",
            Task::Wkb => "wkb",
        }
    }

    fn needs_detector(self) -> bool {
        matches!(self, Task::StaticRate | Task::CircularRate | Task::ScanPeaks | Task::PeakFit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VacuumArg {
    Hh,
    Boulware,
    Both,
}

impl VacuumArg {
    pub fn list(self) -> Vec<Vacuum> {
        match self {
            VacuumArg::Hh => vec![Vacuum::HartleHawking],
            VacuumArg::Boulware => vec![Vacuum::Boulware],
            VacuumArg::Both => vec![Vacuum::HartleHawking, Vacuum::Boulware],
        }
    }
}

pub fn vacuum_tag(v: Vacuum) -> &'static str {
    match v {
        Vacuum::HartleHawking => "hh",
        Vacuum::Boulware => "boulware",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Series,
    Wronskian,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Series => Method::Series,
            MethodArg::Wronskian => Method::Wronskian,
            MethodArg::Auto => Method::Auto,
        }
    }
}

/// Sweeps of Schwarzschild-AdS detector rates. Units are canonical (AdS radius R = 1).
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "sads-udw", version, args_override_self = true, allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub task: Task,

    /// Horizon radius; a comma list for scan-peaks and peak-fit
    #[arg(long, value_delimiter = ',', required = true)]
    pub r_plus: Vec<f64>,

    /// Detector radius
    #[arg(long, conflicts_with = "radius_ratio")]
    pub radius: Option<f64>,

    /// Detector radius in units of r_+
    #[arg(long)]
    pub radius_ratio: Option<f64>,

    #[arg(long, value_enum, default_value = "hh")]
    pub vacuum: VacuumArg,

    /// Grid start (E/T_loc for static tasks, E for circular, omega for wkb)
    #[arg(long, default_value_t = -40.0)]
    pub e_min: f64,

    #[arg(long, default_value_t = 40.0)]
    pub e_max: f64,

    #[arg(long, default_value_t = 2001)]
    pub e_count: usize,

    #[arg(long, value_enum, default_value = "lin")]
    pub e_scale: Scale,

    /// Largest l summed (the cap when --l-adaptive is set; default 4, or 40 adaptive)
    #[arg(long)]
    pub l_max: Option<u32>,

    /// Stop summing once the tail falls below this relative tolerance
    #[arg(long)]
    pub l_adaptive: Option<f64>,

    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,

    #[arg(long, default_value_t = 1e-11)]
    pub rtol: f64,

    #[arg(long, default_value_t = 1e-13)]
    pub atol: f64,

    /// Convergence tolerance of the series boundary phase
    #[arg(long, default_value_t = 1e-8)]
    pub phase_tol: f64,

    #[arg(long, default_value_t = 1e-8)]
    pub wronskian_limit: f64,

    /// Mode frequency (mode task)
    #[arg(long)]
    pub omega: Option<f64>,

    /// Angular momentum (mode, wkb, peak-fit)
    #[arg(long, default_value_t = 0)]
    pub l: u32,

    /// Overtone number (peak-fit)
    #[arg(long, default_value_t = 0)]
    pub n: u32,

    /// Radial samples of the mode profile
    #[arg(long, default_value_t = 401)]
    pub points: usize,

    /// Frequency scan start for peak-fit
    #[arg(long, default_value_t = 0.3)]
    pub omega_min: f64,

    /// Frequency scan step for peak-fit
    #[arg(long, default_value_t = 0.002)]
    pub omega_step: f64,

    /// Required peak height over the local exponential baseline
    #[arg(long, default_value_t = 1.5)]
    pub prominence: f64,

    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// On-disk mode cache directory
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,

    #[arg(long)]
    pub out: PathBuf,

    /// key=value file; command-line flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Keys that do not change data files and stay out of their headers.
pub const RUN_ONLY_KEYS: [&str; 4] = ["workers", "cache_dir", "out", "config"];

/// Splices `--config` file entries in front of the real arguments so that the
/// command line wins.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let mut out = vec![args[0].clone()];
    out.extend(read_config(&path)?);
    out.extend(args.into_iter().skip(1));
    Ok(out)
}

fn read_config(path: &Path) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        let k = k.trim().replace('_', "-");
        if k == "config" {
            return Err(format!("{}:{}: nested config files are not supported", path.display(), i + 1));
        }
        out.push(OsString::from(format!("--{k}={}", v.trim())));
    }
    Ok(out)
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Plan {
    pub cli: Cli,
    pub geometries: Vec<Geometry>,
    pub settings: SolverSettings,
    pub method: Method,
    pub l_max: u32,
}

impl Plan {
    pub fn spec(&self, g: &Geometry, trajectory: Trajectory, vacuum: Vacuum) -> DetectorSpec {
        let radius = match (self.cli.radius, self.cli.radius_ratio) {
            (Some(r), _) => r,
            (None, Some(k)) => k * g.r_plus(),
            (None, None) => f64::NAN,
        };
        let spec = DetectorSpec::new(trajectory, radius, vacuum, self.l_max);
        match self.cli.l_adaptive {
            Some(tol) => spec.adaptive(tol),
            None => spec,
        }
    }

    pub fn trajectory(&self) -> Trajectory {
        if self.cli.task == Task::CircularRate {
            Trajectory::Circular
        } else {
            Trajectory::Static
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("--{name} must be positive and finite, got {v}"))
    }
}

/// Checks everything that can be checked without solving a mode.
pub fn validate(cli: Cli) -> Result<Plan, String> {
    let task = cli.task;
    for &rp in &cli.r_plus {
        positive("r-plus", rp)?;
    }
    match task {
        Task::ScanPeaks => {}
        Task::PeakFit if cli.r_plus.len() < 4 => {
            return Err("peak-fit needs at least 4 values of --r-plus".into())
        }
        Task::PeakFit => {}
        _ if cli.r_plus.len() != 1 => {
            return Err(format!("{} takes a single --r-plus", task.name()))
        }
        _ => {}
    }
    if cli.e_count < 2 {
        return Err(format!("--e-count must be at least 2, got {}", cli.e_count));
    }
    if !(cli.e_min < cli.e_max) || !cli.e_min.is_finite() || !cli.e_max.is_finite() {
        return Err(format!("need --e-min < --e-max, got [{}, {}]", cli.e_min, cli.e_max));
    }
    if cli.e_scale == Scale::Log && !(cli.e_min > 0.0) {
        return Err("a log grid needs --e-min > 0".into());
    }
    if task == Task::Wkb && !(cli.e_min > 0.0) {
        return Err("wkb samples omega on the grid: need --e-min > 0".into());
    }
    positive("rtol", cli.rtol)?;
    positive("atol", cli.atol)?;
    positive("phase-tol", cli.phase_tol)?;
    positive("wronskian-limit", cli.wronskian_limit)?;
    positive("prominence", cli.prominence)?;
    if let Some(tol) = cli.l_adaptive {
        positive("l-adaptive", tol)?;
    }
    if task == Task::Mode {
        positive("omega", cli.omega.ok_or("mode needs --omega")?)?;
        if cli.points < 2 {
            return Err("--points must be at least 2".into());
        }
    }
    if task == Task::PeakFit {
        if cli.radius_ratio.is_none() {
            return Err("peak-fit holds r/r_+ fixed: use --radius-ratio".into());
        }
        if cli.vacuum != VacuumArg::Hh {
            return Err("peak-fit scans the Hartle-Hawking rate: use --vacuum hh".into());
        }
        positive("omega-min", cli.omega_min)?;
        positive("omega-step", cli.omega_step)?;
    }
    if task.needs_detector() && cli.radius.is_none() && cli.radius_ratio.is_none() {
        return Err(format!("{} needs --radius or --radius-ratio", task.name()));
    }

    let geometries = cli
        .r_plus
        .iter()
        .map(|&rp| Geometry::new(rp).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let settings = SolverSettings {
        rtol: cli.rtol,
        atol: cli.atol,
        phase_tol: cli.phase_tol,
        wronskian_limit: cli.wronskian_limit,
        ..SolverSettings::default()
    };
    let l_max = cli.l_max.unwrap_or(if cli.l_adaptive.is_some() { 40 } else { 4 });
    let mut cli = cli;
    cli.l_max = Some(l_max);
    let plan = Plan {
        method: cli.method.into(),
        cli,
        geometries,
        settings,
        l_max,
    };
    if task.needs_detector() {
        for g in &plan.geometries {
            for v in plan.cli.vacuum.list() {
                plan.spec(g, plan.trajectory(), v)
                    .validate(g)
                    .map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(plan)
}

/// `key = value` lines of every setting that shapes the data.
pub fn echo(cli: &Cli) -> Vec<String> {
    let value = serde_json::to_value(cli).expect("config serialises");
    let map = value.as_object().expect("config is an object");
    map.iter()
        .filter(|(k, _)| !RUN_ONLY_KEYS.contains(&k.as_str()))
        .map(|(k, v)| {
            let v = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            format!("{} = {v}", k.replace('_', "-"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        let mut v = vec!["sads-udw"];
        v.extend_from_slice(args);
        Cli::try_parse_from(v).unwrap()
    }

    #[test]
    fn later_flags_override_earlier() {
        let cli = parse(&["static-rate", "--r-plus", "0.1", "--radius", "1", "--e-count", "5", "--e-count", "7", "--out", "x"]);
        assert_eq!(cli.e_count, 7);
        assert_eq!(cli.e_min, -40.0);
    }

    #[test]
    fn negative_grid_edges_parse() {
        let cli = parse(&["static-rate", "--r-plus", "0.1", "--radius", "1", "--e-min", "-3", "--e-max", "-1", "--out", "x"]);
        assert_eq!((cli.e_min, cli.e_max), (-3.0, -1.0));
    }

    #[test]
    fn grid_and_tolerance_checks() {
        let base = ["static-rate", "--r-plus", "0.1", "--radius", "1", "--out", "x"];
        let with = |extra: &[&str]| {
            let mut a = base.to_vec();
            a.extend_from_slice(extra);
            validate(parse(&a))
        };
        assert!(with(&[]).is_ok());
        assert!(with(&["--e-count", "1"]).is_err());
        assert!(with(&["--e-min", "2", "--e-max", "2"]).is_err());
        assert!(with(&["--rtol", "0"]).is_err());
        assert!(with(&["--l-adaptive", "-1"]).is_err());
        assert!(with(&["--radius", "0.05"]).is_err());
        assert!(with(&["--r-plus", "0.1,0.2"]).is_err());
    }

    #[test]
    fn echo_omits_run_only_keys() {
        let cli = parse(&["wkb", "--r-plus", "1", "--e-min", "2", "--out", "x", "--workers", "3"]);
        let lines = echo(&cli);
        assert!(lines.iter().any(|l| l == "task = wkb"));
        assert!(lines.iter().any(|l| l == "r-plus = 1.0"));
        assert!(!lines.iter().any(|l| l.starts_with("workers") || l.starts_with("out")));
    }
}
