use std::f64::consts::PI;

use num_complex::Complex64;
use optoent_core::approx::omega_opt;
use optoent_core::correlators::band_cross;
use optoent_core::model::{
    closed_form_criterion_message, is_stable_closed_form, is_stable_eigen,
};
use optoent_core::optimize::RowValues;
use optoent_core::{
    band_correlators_with, log_negativity, log_negativity_covariance, maximize_en_over_omega,
    maximize_en_over_tau, scattering_matrix, spectral_point, stability, sweep, AxisSpec,
    BandOptions, Correlators, Error as CoreError, SearchOptions, StabilityReport, SweepOptions,
    SweepVariable, SystemParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{CommandConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

/// What a command produced: a flat record or a table.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Record(Map<String, Value>),
    Table(Table),
}

/// Result of a command: the report is written even when `error` is set.
pub struct Outcome {
    pub report: Report,
    pub error: Option<CliError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome {
            report,
            error: None,
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "omega",
    "tau",
    "nn1",
    "nn2",
    "abs_m",
    "nbar1",
    "nbar2",
    "r12",
    "en_closed",
    "en_covariance",
    "en_approx",
    "regime",
];

pub const SPECTRA_COLUMNS: [&str; 6] = ["omega", "n1", "n2", "re_m", "im_m", "imbalance"];

pub fn execute(cfg: &RunConfig) -> CliResult<Outcome> {
    match &cfg.command {
        CommandConfig::Entangle => entangle(cfg).map(Outcome::from),
        CommandConfig::Sweep { .. } => run_sweep(cfg),
        CommandConfig::Optimize { .. } => optimize(cfg).map(Outcome::from),
        CommandConfig::Spectra { .. } => spectra(cfg).map(Outcome::from),
        CommandConfig::Validate { rng_seed, draws } => Ok(validate(cfg, *rng_seed, *draws)),
    }
}

fn band(cfg: &RunConfig) -> BandOptions {
    BandOptions::with_rel_tol(cfg.quad_tol)
}

fn require_stable(p: &SystemParams) -> CliResult<StabilityReport> {
    stability(p)
        .into_result()
        .map_err(|source| CliError::Unstable {
            source,
            criterion: closed_form_criterion_message(p),
        })
}

fn stability_warnings(p: &SystemParams) -> Vec<String> {
    if is_stable_closed_form(p) == is_stable_eigen(p) {
        Vec::new()
    } else {
        vec![format!(
            "closed-form stability criterion disagrees with the eigenvalue test: {}",
            closed_form_criterion_message(p)
        )]
    }
}

fn record(value: Value) -> Report {
    match value {
        Value::Object(map) => Report::Record(map),
        _ => unreachable!("reports are objects"),
    }
}

pub fn entangle(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.system;
    let report = require_stable(p)?;
    let mut warnings = stability_warnings(p);
    let c = band_correlators_with(p, &cfg.filter, &band(cfg))?;
    let (tmst, closed) = log_negativity(&c)?;
    let covariance = match log_negativity_covariance(&c) {
        Ok(r) => Some(r.en),
        Err(e) => {
            warnings.push(format!("covariance route failed: {e}"));
            None
        }
    };
    Ok(record(json!({
        "nn1": c.nn1,
        "nn2": c.nn2,
        "re_m": c.m.re,
        "im_m": c.m.im,
        "nbar1": tmst.nbar1,
        "nbar2": tmst.nbar2,
        "r12": tmst.r12,
        "en_closed": closed.en,
        "en_covariance": covariance,
        "stability": if report.marginal { "marginal" } else { "stable" },
        "max_real_part": report.max_real_part,
        "warnings": warnings,
    })))
}

fn err_cell(e: &CoreError) -> Cell {
    Cell::Text(format!("ERR:{}", e.code()))
}

fn sweep_row(omega: f64, tau: f64, values: &Result<RowValues, CoreError>) -> Vec<Cell> {
    let mut row = vec![Cell::Num(omega), Cell::Num(tau)];
    match values {
        Ok(v) => {
            let c = &v.correlators;
            row.extend(
                [
                    c.nn1,
                    c.nn2,
                    c.m.norm(),
                    v.tmst.nbar1,
                    v.tmst.nbar2,
                    v.tmst.r12,
                    v.en_closed,
                ]
                .map(Cell::Num),
            );
            row.push(match &v.en_covariance {
                Ok(x) => Cell::Num(*x),
                Err(e) => err_cell(e),
            });
            match v.en_approx {
                Some((tag, x)) => {
                    row.push(Cell::Num(x));
                    row.push(Cell::Text(tag.name().to_string()));
                }
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(Cell::Empty, 6));
            row.extend([err_cell(e), err_cell(e), err_cell(e), Cell::Empty]);
        }
    }
    row
}

fn run_sweep(cfg: &RunConfig) -> CliResult<Outcome> {
    let CommandConfig::Sweep {
        variable,
        from,
        to,
        points,
        log,
        tau_mode,
        regime,
    } = cfg.command
    else {
        unreachable!()
    };
    require_stable(&cfg.system)?;
    let axis = AxisSpec {
        variable,
        from,
        to,
        points,
        log,
    };
    let opts = SweepOptions {
        tau_mode,
        regime,
        search: SearchOptions {
            band: band(cfg),
            ..SearchOptions::default()
        },
    };
    let result = sweep(&cfg.system, &cfg.filter, &axis, &opts)?;
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    for r in &result.rows {
        table.push(sweep_row(r.omega, r.tau, &r.values));
    }
    let error = match result.rows.first() {
        Some(first) if result.failures() == result.rows.len() => {
            first.values.clone().err().map(CliError::Core)
        }
        _ => None,
    };
    Ok(Outcome {
        report: Report::Table(table),
        error,
    })
}

pub fn optimize(cfg: &RunConfig) -> CliResult<Report> {
    let CommandConfig::Optimize {
        over,
        bracket,
        seed,
        search_tol,
        regime,
    } = cfg.command
    else {
        unreachable!()
    };
    let p = &cfg.system;
    require_stable(p)?;
    let opts = SearchOptions {
        rel_tol: search_tol,
        band: band(cfg),
        ..SearchOptions::default()
    };
    let mut warnings = stability_warnings(p);
    let report = match over {
        SweepVariable::Omega => {
            let seed = match (seed, regime) {
                (Some(s), _) => Some(s),
                (None, Some(r)) => {
                    let a = omega_opt(p, &cfg.filter, r);
                    warnings.extend(a.warnings.iter().map(|w| w.to_string()));
                    Some(a.value)
                }
                (None, None) => None,
            };
            let bracket = bracket.expect("centre searches always resolve a bracket");
            maximize_en_over_omega(p, &cfg.filter, bracket, seed, &opts)?
        }
        SweepVariable::Tau => maximize_en_over_tau(p, &cfg.filter, bracket, seed, &opts)?,
    };
    if report.flat {
        warnings.push("objective is flat over the bracket".to_string());
    }
    Ok(record(json!({
        "over": over,
        "argmax": report.argmax,
        "value": report.value,
        "evaluations": report.evaluations,
        "bracket_lo": report.bracket.0,
        "bracket_hi": report.bracket.1,
        "analytic_seed": report.analytic_seed,
        "seed_value": report.seed_value,
        "flat": report.flat,
        "regime": regime.map(|r| r.name()),
        "warnings": warnings,
    })))
}

pub fn spectra(cfg: &RunConfig) -> CliResult<Report> {
    let CommandConfig::Spectra {
        from,
        to,
        points,
        log,
    } = cfg.command
    else {
        unreachable!()
    };
    require_stable(&cfg.system)?;
    let axis = AxisSpec {
        variable: SweepVariable::Omega,
        from,
        to,
        points,
        log,
    };
    let mut table = Table::new(SPECTRA_COLUMNS.to_vec());
    for omega in axis.values()? {
        let s = spectral_point(&cfg.system, omega)?;
        table.push(
            [omega, s.n1, s.n2, s.m.re, s.m.im, s.imbalance]
                .map(Cell::Num)
                .to_vec(),
        );
    }
    Ok(Report::Table(table))
}

pub const VALIDATE_COLUMNS: [&str; 6] = ["group", "checked", "failures", "worst", "limit", "status"];

pub const GROUPS: [&str; 5] = [
    "metric-preservation",
    "route-equivalence",
    "cross-density-formula",
    "delay-invariance",
    "stability-agreement",
];

struct GroupResult {
    checked: usize,
    failures: usize,
    worst: f64,
    limit: f64,
    error: Option<CoreError>,
}

impl GroupResult {
    fn new(limit: f64) -> Self {
        Self {
            checked: 0,
            failures: 0,
            worst: 0.0,
            limit,
            error: None,
        }
    }

    fn record(&mut self, deviation: f64) {
        self.checked += 1;
        self.worst = self.worst.max(deviation);
        if !(deviation <= self.limit) {
            self.failures += 1;
        }
    }

    fn run(mut self, body: impl FnOnce(&mut Self) -> Result<(), CoreError>) -> Self {
        if let Err(e) = body(&mut self) {
            self.error = Some(e);
        }
        self
    }

    fn passed(&self) -> bool {
        self.error.is_none() && self.failures == 0
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..hi.log10()))
}

fn random_stable(rng: &mut ChaCha8Rng) -> SystemParams {
    loop {
        let gamma = log_uniform(rng, 1e-2, 1e2);
        let k1 = gamma * log_uniform(rng, 1.0, 1e6);
        let k2 = gamma * log_uniform(rng, 1.0, 1e6);
        let g1 = k1 * log_uniform(rng, 1e-3, 1e2);
        let g2 = g1 * rng.gen_range(0.0..1.5);
        let p = SystemParams::new(gamma, k1, k2, g1, g2).expect("positive draws");
        if is_stable_eigen(&p) {
            return p;
        }
    }
}

fn metric_group(rng: &mut ChaCha8Rng, draws: usize) -> GroupResult {
    GroupResult::new(1e-10).run(|g| {
        for _ in 0..draws {
            let p = random_stable(rng);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let omega = sign * p.gamma * log_uniform(rng, 1e-3, 1e8);
            g.record(scattering_matrix(&p, omega)?.metric_defect());
        }
        Ok(())
    })
}

fn route_group(rng: &mut ChaCha8Rng, draws: usize) -> GroupResult {
    GroupResult::new(1e-9).run(|g| {
        for _ in 0..draws {
            let nn1 = log_uniform(rng, 1e-3, 1e3);
            let nn2 = log_uniform(rng, 1e-3, 1e3);
            let bound = (nn1 * (nn2 + 1.0)).min((nn1 + 1.0) * nn2);
            let modulus = (bound * rng.gen_range(0.0..1.0f64)).sqrt();
            let m = Complex64::from_polar(modulus, rng.gen_range(-PI..PI));
            let c = Correlators::from_moments(nn1, nn2, m);
            let closed = log_negativity(&c)?.1.en;
            let cov = log_negativity_covariance(&c)?.en;
            let a = nn1 + nn2 + 1.0;
            let direct = -(a - ((nn1 - nn2).powi(2) + 4.0 * c.m.norm_sqr()).sqrt()).ln();
            let mut dev = (closed - cov).abs();
            if direct > 0.0 {
                dev = dev.max((closed - direct).abs());
            }
            g.record(dev);
        }
        Ok(())
    })
}

/// Printed equal-linewidth, equal-coupling, zero-temperature cross density.
pub fn printed_cross_density(gamma: f64, kappa: f64, g: f64, omega: f64) -> Complex64 {
    let k2 = kappa * kappa + 4.0 * omega * omega;
    let num = Complex64::new(8.0 * g * g * kappa, 0.0) + Complex64::new(gamma, 2.0 * omega) * k2;
    let den = -(gamma * gamma + 4.0 * omega * omega) * k2 * k2 / (8.0 * g * g * kappa);
    num / den
}

fn cross_density_group(rng: &mut ChaCha8Rng, draws: usize) -> GroupResult {
    GroupResult::new(1e-8).run(|g| {
        for _ in 0..draws {
            let gamma = log_uniform(rng, 1e-1, 1e1);
            let kappa = gamma * log_uniform(rng, 1e2, 1e6);
            let coupling = kappa * log_uniform(rng, 1e-2, 1e2);
            let p = SystemParams::symmetric(gamma, kappa, coupling)?;
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let omega = sign * log_uniform(rng, 1e-2 * gamma, 1e2 * kappa);
            let m = spectral_point(&p, omega)?.m;
            let want = printed_cross_density(gamma, kappa, coupling, omega);
            g.record((m - want).norm() / want.norm());
        }
        Ok(())
    })
}

/// `|⟨D1D2⟩|` is unchanged by a delay with `σ|τ| <= 10⁻²` when `σ = κ/10⁴`.
fn delay_group(rng: &mut ChaCha8Rng, draws: usize, opts: &BandOptions) -> GroupResult {
    GroupResult::new(1e-3).run(|g| {
        for _ in 0..draws {
            let kappa = log_uniform(rng, 1e3, 1e6);
            let coupling = kappa * log_uniform(rng, 1e-2, 1e1);
            let p = SystemParams::symmetric(1.0, kappa, coupling)?;
            let sigma = kappa * 1e-4;
            let filt = optoent_core::FilterSpec::new(rng.gen_range(0.0..0.5) * kappa, sigma)?;
            let tau = rng.gen_range(-1e-2..1e-2) / sigma;
            let base = band_cross(&p, &filt, opts)?.norm();
            let moved = band_cross(&p, &filt.with_delay(tau), opts)?.norm();
            g.record((moved - base).abs() / base);
        }
        Ok(())
    })
}

/// Closed-form and eigenvalue stability on draws with `G_i >= 10 κ_i` and
/// `κ_i >= 10³ γ`, where the closed form applies.
fn stability_group(rng: &mut ChaCha8Rng, draws: usize) -> GroupResult {
    GroupResult::new(0.0).run(|g| {
        for _ in 0..draws {
            let k1 = log_uniform(rng, 1e3, 1e6);
            let k2 = log_uniform(rng, 1e3, 1e6);
            let g1 = k1 * log_uniform(rng, 1e1, 1e3);
            let g2 = k2 * log_uniform(rng, 1e1, 1e3);
            let p = SystemParams::new(1.0, k1, k2, g1, g2)?;
            g.record(f64::from(u8::from(is_stable_closed_form(&p) != is_stable_eigen(&p))));
        }
        Ok(())
    })
}

pub fn validate(cfg: &RunConfig, rng_seed: u64, draws: usize) -> Outcome {
    let opts = band(cfg);
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(rng_seed.wrapping_add(k));
    let delay_draws = (draws / 25).max(4);
    let results = [
        metric_group(&mut rng(0), draws),
        route_group(&mut rng(1), draws),
        cross_density_group(&mut rng(2), draws),
        delay_group(&mut rng(3), delay_draws, &opts),
        stability_group(&mut rng(4), draws),
    ];
    let mut table = Table::new(VALIDATE_COLUMNS.to_vec());
    let mut first_failure = None;
    for (name, r) in GROUPS.iter().zip(&results) {
        let passed = r.passed();
        if !passed && first_failure.is_none() {
            first_failure = Some(name.to_string());
        }
        let status = match &r.error {
            Some(e) => format!("ERR:{}", e.code()),
            None if passed => "pass".to_string(),
            None => "fail".to_string(),
        };
        table.push(vec![
            Cell::Text(name.to_string()),
            Cell::Int(r.checked as u64),
            Cell::Int(r.failures as u64),
            Cell::Num(r.worst),
            Cell::Num(r.limit),
            Cell::Text(status),
        ]);
    }
    Outcome {
        report: Report::Table(table),
        error: first_failure.map(CliError::Validation),
    }
}
