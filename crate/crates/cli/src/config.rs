//! Run configuration: built-in defaults, overridden by a flat `key = value`
//! file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use optoent_core::{FilterSpec, RegimeTag, SweepVariable, SystemParams, TauMode};
use serde::{Deserialize, Serialize};

use crate::args::{
    CommonArgs, EntangleArgs, FormatArg, OptimizeArgs, ScaleArg, SpectraArgs, SweepArgs,
    TauModeArg, ValidateArgs, VariableArg,
};
use crate::error::{CliError, CliResult};

/// Overrides the quadrature tolerance below `--quad-tol` and above the file.
/// Intended for tests.
pub const ENV_QUAD_TOL: &str = "OPTOENT_QUAD_TOL";

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_SEARCH_TOL: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 64;
pub const DEFAULT_RNG_SEED: u64 = 1;
pub const DEFAULT_DRAWS: usize = 1000;

const KEYS: &[&str] = &[
    "gamma", "kappa1", "kappa2", "g1", "g2", "nm", "n1", "n2", "omega", "sigma", "tau1", "tau2",
    "quad_tol", "format", "output", "variable", "from", "to", "points", "scale", "tau_mode",
    "regime", "over", "bracket_lo", "bracket_hi", "seed", "search_tol", "rng_seed", "draws",
];

/// Parsed `key = value` file. Blank lines and `#` comments are skipped;
/// unknown and repeated keys are errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::config(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::config(format!("line {}: repeated key `{key}`", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::config(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(()),
        }
    }
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Scale(bool);

impl FromStr for Scale {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "log" => Ok(Scale(true)),
            "linear" => Ok(Scale(false)),
            _ => Err(()),
        }
    }
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        Scale(s == ScaleArg::Log)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Variable(SweepVariable);

impl FromStr for Variable {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "omega" => Ok(Variable(SweepVariable::Omega)),
            "tau" => Ok(Variable(SweepVariable::Tau)),
            _ => Err(()),
        }
    }
}

impl From<VariableArg> for Variable {
    fn from(v: VariableArg) -> Self {
        Variable(match v {
            VariableArg::Omega => SweepVariable::Omega,
            VariableArg::Tau => SweepVariable::Tau,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mode(TauMode);

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "fixed" => Ok(Mode(TauMode::Fixed)),
            "formula" => Ok(Mode(TauMode::Formula)),
            "optimize" => Ok(Mode(TauMode::Optimize)),
            _ => Err(()),
        }
    }
}

impl From<TauModeArg> for Mode {
    fn from(m: TauModeArg) -> Self {
        Mode(match m {
            TauModeArg::Fixed => TauMode::Fixed,
            TauModeArg::Formula => TauMode::Formula,
            TauModeArg::Optimize => TauMode::Optimize,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum CommandConfig {
    Entangle,
    Sweep {
        variable: SweepVariable,
        from: f64,
        to: f64,
        points: usize,
        log: bool,
        tau_mode: TauMode,
        regime: Option<RegimeTag>,
    },
    Optimize {
        over: SweepVariable,
        bracket: Option<(f64, f64)>,
        seed: Option<f64>,
        search_tol: f64,
        regime: Option<RegimeTag>,
    },
    Spectra {
        from: f64,
        to: f64,
        points: usize,
        log: bool,
    },
    Validate {
        rng_seed: u64,
        draws: usize,
    },
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemParams,
    pub filter: FilterSpec,
    pub quad_tol: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub command: CommandConfig,
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn env_quad_tol() -> CliResult<Option<f64>> {
    match std::env::var(ENV_QUAD_TOL) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(format!("bad value `{v}` for {ENV_QUAD_TOL}"))),
        Err(_) => Ok(None),
    }
}

fn parse_regime(s: &str) -> CliResult<RegimeTag> {
    s.parse().map_err(CliError::Config)
}

struct Base {
    file: ConfigFile,
    system: SystemParams,
    filter: FilterSpec,
    quad_tol: f64,
    format: Option<Format>,
    output: Option<PathBuf>,
    print: bool,
}

impl Base {
    fn kappa(&self) -> f64 {
        self.system.kappa1
    }

    fn finish(self, default_format: Format, command: CommandConfig) -> (RunConfig, bool) {
        (
            RunConfig {
                system: self.system,
                filter: self.filter,
                quad_tol: self.quad_tol,
                format: self.format.unwrap_or(default_format),
                output: self.output,
                command,
            },
            self.print,
        )
    }
}

/// Defaults: `γ = 1`, `κ = 10⁵`, `G = κ/10`, `σ = 10`, resonance.
fn resolve_common(a: &CommonArgs) -> CliResult<Base> {
    let file = match &a.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let gamma = pick(a.gamma, file.get("gamma")?, 1.0);
    let kappa1 = pick(a.kappa.or(a.kappa1), file.get("kappa1")?, 1e5);
    let kappa2 = pick(a.kappa.or(a.kappa2), file.get("kappa2")?, 1e5);
    let g1_flag = a.g.or(a.g1).or(a.g_over_kappa.map(|x| x * kappa1));
    let g2_flag = a.g.or(a.g2).or(a.g_over_kappa.map(|x| x * kappa2));
    let g1 = pick(g1_flag, file.get("g1")?, 1e4);
    let g2 = pick(g2_flag, file.get("g2")?, 1e4);
    let system = SystemParams::new(gamma, kappa1, kappa2, g1, g2)?.with_baths(
        pick(a.nm, file.get("nm")?, 0.0),
        pick(a.n1, file.get("n1")?, 0.0),
        pick(a.n2, file.get("n2")?, 0.0),
    )?;

    let omega = pick(
        a.omega.or(a.omega_over_kappa.map(|x| x * kappa1)),
        file.get("omega")?,
        0.0,
    );
    let sigma = pick(
        a.sigma.or(a.sigma_over_kappa.map(|x| x * kappa1)),
        file.get("sigma")?,
        10.0,
    );
    let mut filter = FilterSpec::new(omega, sigma)?;
    filter.tau1 = pick(a.tau1, file.get("tau1")?, 0.0);
    filter.tau2 = pick(a.tau2, file.get("tau2")?, 0.0);
    filter.validate()?;

    let quad_tol = pick(
        a.quad_tol.or(env_quad_tol()?),
        file.get("quad_tol")?,
        DEFAULT_QUAD_TOL,
    );
    let format = a.format.map(Format::from).or(file.get("format")?);
    let output = a.output.clone().or(file.get("output")?);
    Ok(Base {
        file,
        system,
        filter,
        quad_tol,
        format,
        output,
        print: a.print_config,
    })
}

fn scaled(value: Option<f64>, over_kappa: Option<f64>, kappa: f64) -> Option<f64> {
    value.or(over_kappa.map(|x| x * kappa))
}

pub fn resolve_entangle(a: &EntangleArgs) -> CliResult<(RunConfig, bool)> {
    Ok(resolve_common(&a.common)?.finish(Format::Json, CommandConfig::Entangle))
}

pub fn resolve_sweep(a: &SweepArgs) -> CliResult<(RunConfig, bool)> {
    let b = resolve_common(&a.common)?;
    let f = &b.file;
    let variable = pick(
        a.variable.map(Variable::from),
        f.get("variable")?,
        Variable(SweepVariable::Omega),
    )
    .0;
    if variable == SweepVariable::Tau && (a.from_over_kappa.is_some() || a.to_over_kappa.is_some()) {
        return Err(CliError::config("normalized bounds only apply to omega sweeps"));
    }
    let (from, to) = (
        scaled(a.from, a.from_over_kappa, b.kappa()).or(f.get("from")?),
        scaled(a.to, a.to_over_kappa, b.kappa()).or(f.get("to")?),
    );
    let (from, to) = match (variable, from, to) {
        (SweepVariable::Omega, from, to) => (
            from.unwrap_or(b.filter.bandwidth / 2.0),
            to.unwrap_or(b.kappa() / 2.0),
        ),
        (SweepVariable::Tau, Some(from), Some(to)) => (from, to),
        (SweepVariable::Tau, _, _) => {
            return Err(CliError::config("delay sweeps need explicit --from and --to"))
        }
    };
    let default_log = variable == SweepVariable::Omega && from > 0.0;
    let log = pick(a.scale.map(Scale::from), f.get("scale")?, Scale(default_log)).0;
    let tau_mode = if a.optimize_tau {
        TauMode::Optimize
    } else {
        pick(a.tau_mode.map(Mode::from), f.get("tau_mode")?, Mode(TauMode::Fixed)).0
    };
    let regime = match a.regime.clone().or(f.get("regime")?) {
        Some(s) => Some(parse_regime(&s)?),
        None => None,
    };
    let command = CommandConfig::Sweep {
        variable,
        from,
        to,
        points: pick(a.points, f.get("points")?, DEFAULT_POINTS),
        log,
        tau_mode,
        regime,
    };
    Ok(b.finish(Format::Csv, command))
}

pub fn resolve_optimize(a: &OptimizeArgs) -> CliResult<(RunConfig, bool)> {
    let b = resolve_common(&a.common)?;
    let f = &b.file;
    let over = pick(
        a.over.map(Variable::from),
        f.get("over")?,
        Variable(SweepVariable::Omega),
    )
    .0;
    if over == SweepVariable::Tau
        && (a.bracket_lo_over_kappa.is_some() || a.bracket_hi_over_kappa.is_some())
    {
        return Err(CliError::config("normalized brackets only apply to omega searches"));
    }
    let lo = scaled(a.bracket_lo, a.bracket_lo_over_kappa, b.kappa()).or(f.get("bracket_lo")?);
    let hi = scaled(a.bracket_hi, a.bracket_hi_over_kappa, b.kappa()).or(f.get("bracket_hi")?);
    let bracket = match (over, lo, hi) {
        (_, Some(lo), Some(hi)) => Some((lo, hi)),
        (SweepVariable::Omega, lo, hi) => Some((
            lo.unwrap_or(b.filter.bandwidth / 2.0),
            hi.unwrap_or(b.kappa() / 2.0),
        )),
        (SweepVariable::Tau, None, None) => None,
        (SweepVariable::Tau, _, _) => {
            return Err(CliError::config("give both bracket ends or neither"))
        }
    };
    let regime = match a.regime.clone().or(f.get("regime")?) {
        Some(s) => Some(parse_regime(&s)?),
        None => None,
    };
    let command = CommandConfig::Optimize {
        over,
        bracket,
        seed: a.seed.or(f.get("seed")?),
        search_tol: pick(a.search_tol, f.get("search_tol")?, DEFAULT_SEARCH_TOL),
        regime,
    };
    Ok(b.finish(Format::Json, command))
}

pub fn resolve_spectra(a: &SpectraArgs) -> CliResult<(RunConfig, bool)> {
    let b = resolve_common(&a.common)?;
    let f = &b.file;
    let from = pick(
        scaled(a.from, a.from_over_kappa, b.kappa()),
        f.get("from")?,
        -10.0 * b.kappa(),
    );
    let to = pick(scaled(a.to, a.to_over_kappa, b.kappa()), f.get("to")?, 10.0 * b.kappa());
    let log = pick(a.scale.map(Scale::from), f.get("scale")?, Scale(false)).0;
    let command = CommandConfig::Spectra {
        from,
        to,
        points: pick(a.points, f.get("points")?, 401),
        log,
    };
    Ok(b.finish(Format::Csv, command))
}

pub fn resolve_validate(a: &ValidateArgs) -> CliResult<(RunConfig, bool)> {
    let b = resolve_common(&a.common)?;
    let f = &b.file;
    let command = CommandConfig::Validate {
        rng_seed: pick(a.rng_seed, f.get("rng_seed")?, DEFAULT_RNG_SEED),
        draws: pick(a.draws, f.get("draws")?, DEFAULT_DRAWS),
    };
    Ok(b.finish(Format::Json, command))
}

impl RunConfig {
    /// The configuration as a file that resolves back to `self` when passed
    /// to the same command with no other flags.
    pub fn to_file_string(&self) -> String {
        let p = &self.system;
        let f = &self.filter;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        for (k, v) in [
            ("gamma", p.gamma),
            ("kappa1", p.kappa1),
            ("kappa2", p.kappa2),
            ("g1", p.g1),
            ("g2", p.g2),
            ("nm", p.nm),
            ("n1", p.n1),
            ("n2", p.n2),
            ("omega", f.center),
            ("sigma", f.bandwidth),
            ("tau1", f.tau1),
            ("tau2", f.tau2),
            ("quad_tol", self.quad_tol),
        ] {
            kv(k, v.to_string());
        }
        kv(
            "format",
            match self.format {
                Format::Csv => "csv",
                Format::Json => "json",
            }
            .into(),
        );
        if let Some(path) = &self.output {
            kv("output", path.display().to_string());
        }
        let var = |v: SweepVariable| match v {
            SweepVariable::Omega => "omega".to_string(),
            SweepVariable::Tau => "tau".to_string(),
        };
        let scale = |log: bool| if log { "log" } else { "linear" }.to_string();
        match &self.command {
            CommandConfig::Entangle => {}
            CommandConfig::Sweep {
                variable,
                from,
                to,
                points,
                log,
                tau_mode,
                regime,
            } => {
                kv("variable", var(*variable));
                kv("from", from.to_string());
                kv("to", to.to_string());
                kv("points", points.to_string());
                kv("scale", scale(*log));
                let mode = match tau_mode {
                    TauMode::Fixed => "fixed",
                    TauMode::Formula => "formula",
                    TauMode::Optimize => "optimize",
                };
                kv("tau_mode", mode.into());
                if let Some(r) = regime {
                    kv("regime", r.to_string());
                }
            }
            CommandConfig::Optimize {
                over,
                bracket,
                seed,
                search_tol,
                regime,
            } => {
                kv("over", var(*over));
                if let Some((lo, hi)) = bracket {
                    kv("bracket_lo", lo.to_string());
                    kv("bracket_hi", hi.to_string());
                }
                if let Some(s) = seed {
                    kv("seed", s.to_string());
                }
                kv("search_tol", search_tol.to_string());
                if let Some(r) = regime {
                    kv("regime", r.to_string());
                }
            }
            CommandConfig::Spectra {
                from,
                to,
                points,
                log,
            } => {
                kv("from", from.to_string());
                kv("to", to.to_string());
                kv("points", points.to_string());
                kv("scale", scale(*log));
            }
            CommandConfig::Validate { rng_seed, draws } => {
                kv("rng_seed", rng_seed.to_string());
                kv("draws", draws.to_string());
            }
        }
        out
    }
}
