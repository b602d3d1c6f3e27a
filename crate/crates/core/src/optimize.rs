//! Numeric maximization of `E_n` over the filter centre and the delay, and the
//! sweep engine behind the figure recipes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{en_approx, tau_opt, RegimeTag};
use crate::correlators::{
    band_correlators_from, band_correlators_with, band_populations, BandOptions, BandPopulations,
    Correlators, FilterSpec,
};
use crate::entanglement::{log_negativity, log_negativity_covariance, TmstParams};
use crate::error::{Error, Result};
use crate::model::{stability, SystemParams};

pub const COARSE_POINTS: usize = 64;
/// Coarse-scan spread below this fraction of the peak marks the objective flat.
pub const FLAT_RTOL: f64 = 1e-3;
const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Relative tolerance on the argument.
    pub rel_tol: f64,
    pub coarse_points: usize,
    pub band: BandOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            coarse_points: COARSE_POINTS,
            band: BandOptions::default(),
        }
    }
}

impl SearchOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Domain(format!(
                "search tolerance {:e} must lie in (0, 1)",
                self.rel_tol
            )));
        }
        if self.coarse_points < 3 {
            return Err(Error::Domain("coarse scan needs at least 3 points".into()));
        }
        self.band.quad.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub argmax: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Final refinement interval.
    pub bracket: (f64, f64),
    pub analytic_seed: Option<f64>,
    pub seed_value: Option<f64>,
    pub flat: bool,
}

fn check_bracket(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || !(hi > lo) {
        return Err(Error::BracketTooSmall { lo, hi });
    }
    let scale = lo.abs().max(hi.abs());
    if hi - lo <= 64.0 * f64::EPSILON * scale {
        return Err(Error::BracketTooSmall { lo, hi });
    }
    Ok(())
}

/// Map between the search variable and the physical argument.
#[derive(Clone, Copy)]
enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn choose(lo: f64, hi: f64) -> Self {
        if lo > 0.0 && hi / lo > 10.0 {
            Scale::Log
        } else {
            Scale::Linear
        }
    }

    fn to_x(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.ln(),
        }
    }

    fn to_arg(self, x: f64) -> f64 {
        match self {
            Scale::Linear => x,
            Scale::Log => x.exp(),
        }
    }
}

/// Coarse scan followed by golden-section refinement around the best point.
fn maximize<F>(
    f: F,
    lo: f64,
    hi: f64,
    seed: Option<f64>,
    opts: &SearchOptions,
) -> Result<OptimumReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let eval = |v: f64| f(v).map_err(|e| Error::Evaluation {
        at: v,
        source: Box::new(e),
    });
    let scale = Scale::choose(lo, hi);
    let (xlo, xhi) = (scale.to_x(lo), scale.to_x(hi));
    let n = opts.coarse_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => scale.to_arg(xlo + (xhi - xlo) * i as f64 / (n - 1) as f64),
        })
        .collect();
    let values = grid
        .par_iter()
        .map(|&v| eval(v))
        .collect::<Result<Vec<f64>>>()?;
    let mut evaluations = n;

    let (mut best_i, mut vmin) = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > values[best_i] {
            best_i = i;
        }
        vmin = vmin.min(v);
    }
    let vmax = values[best_i];
    let flat = vmax - vmin <= FLAT_RTOL * vmax.abs();

    let mut best = (grid[best_i], vmax);
    let mut bracket = (grid[best_i.saturating_sub(1)], grid[(best_i + 1).min(n - 1)]);

    if !flat {
        let (mut a, mut b) = (scale.to_x(bracket.0), scale.to_x(bracket.1));
        let floor = match scale {
            Scale::Log => 0.0,
            Scale::Linear => 1e-9 * (hi - lo),
        };
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = eval(scale.to_arg(c))?;
        let mut fd = eval(scale.to_arg(d))?;
        evaluations += 2;
        for _ in 0..MAX_GOLDEN_STEPS {
            let mid = 0.5 * (a + b);
            let tol = match scale {
                Scale::Log => opts.rel_tol,
                Scale::Linear => opts.rel_tol * mid.abs().max(floor),
            };
            if b - a <= tol {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = eval(scale.to_arg(c))?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = eval(scale.to_arg(d))?;
            }
            evaluations += 1;
            for (x, v) in [(c, fc), (d, fd)] {
                if v > best.1 {
                    best = (scale.to_arg(x), v);
                }
            }
        }
        bracket = (scale.to_arg(a), scale.to_arg(b));
    }

    let seed_value = match seed {
        Some(s) => {
            evaluations += 1;
            let v = eval(s)?;
            if v > best.1 {
                best = (s, v);
            }
            Some(v)
        }
        None => None,
    };

    Ok(OptimumReport {
        argmax: best.0,
        value: best.1,
        evaluations,
        bracket,
        analytic_seed: seed,
        seed_value,
        flat,
    })
}

/// Exact `E_n` for one filter.
pub fn en_at(p: &SystemParams, filt: &FilterSpec, opts: &BandOptions) -> Result<f64> {
    let c = band_correlators_with(p, filt, opts)?;
    Ok(log_negativity(&c)?.1.en)
}

/// Maximizes `E_n` over the filter centre `ω ∈ [lo, hi]`, keeping the
/// bandwidth and delays of `template`. The seed, when given, is evaluated and
/// the result never falls below it.
pub fn maximize_en_over_omega(
    p: &SystemParams,
    template: &FilterSpec,
    bracket: (f64, f64),
    seed: Option<f64>,
    opts: &SearchOptions,
) -> Result<OptimumReport> {
    p.validate()?;
    template.validate()?;
    opts.validate()?;
    check_bracket(bracket.0, bracket.1)?;
    stability(p).into_result()?;
    maximize(
        |omega| en_at(p, &template.with_center(omega), &opts.band),
        bracket.0,
        bracket.1,
        seed,
        opts,
    )
}

fn en_with_delay(
    p: &SystemParams,
    filt: &FilterSpec,
    pops: &BandPopulations,
    tau: f64,
    opts: &BandOptions,
) -> Result<f64> {
    let f = filt.with_delay(filt.tau2 + tau);
    let c = band_correlators_from(p, &f, pops, opts)?;
    Ok(log_negativity(&c)?.1.en)
}

/// Maximizes `E_n` over the relative delay `τ = τ1 - τ2`.
///
/// The populations do not depend on `τ`, so they are integrated once; `E_n`
/// then grows monotonically with `|⟨D1D2⟩|` and serves as the objective. The
/// seed defaults to the closed-form delay at `|ω|`, and the bracket to
/// `[-seed, 10 seed]`.
pub fn maximize_en_over_tau(
    p: &SystemParams,
    filt: &FilterSpec,
    bracket: Option<(f64, f64)>,
    seed: Option<f64>,
    opts: &SearchOptions,
) -> Result<OptimumReport> {
    p.validate()?;
    filt.validate()?;
    opts.validate()?;
    let seed = seed.unwrap_or_else(|| tau_opt(p, filt.center).value);
    let (lo, hi) = match bracket {
        Some(b) => b,
        None => {
            let s = seed.abs();
            (-s, 10.0 * s)
        }
    };
    check_bracket(lo, hi)?;
    stability(p).into_result()?;
    let pops = band_populations(p, filt, &opts.band)?;
    maximize(
        |tau| en_with_delay(p, filt, &pops, tau, &opts.band),
        lo,
        hi,
        Some(seed),
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    Omega,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::Domain(format!(
                "sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::Domain("sweep bounds must be finite".into()));
        }
        if self.log && !(self.from > 0.0 && self.to > 0.0) {
            return Err(Error::Domain(
                "log sweep bounds must be positive".into(),
            ));
        }
        let n = self.points;
        let last = (n - 1) as f64;
        Ok((0..n)
            .map(|i| {
                if i == 0 {
                    self.from
                } else if i == n - 1 {
                    self.to
                } else if self.log {
                    (self.from.ln() + (self.to.ln() - self.from.ln()) * i as f64 / last).exp()
                } else {
                    self.from + (self.to - self.from) * i as f64 / last
                }
            })
            .collect())
    }
}

/// How each row of an `ω` sweep chooses its delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    /// Keep the template's delays.
    Fixed,
    /// Closed-form optimal delay at each `ω`.
    Formula,
    /// Numerically optimized delay at each `ω`.
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub tau_mode: TauMode,
    /// Regime used for the approximate column; classified per row if `None`.
    pub regime: Option<RegimeTag>,
    pub search: SearchOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tau_mode: TauMode::Fixed,
            regime: None,
            search: SearchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowValues {
    pub correlators: Correlators,
    pub tmst: TmstParams,
    pub en_closed: f64,
    pub en_covariance: std::result::Result<f64, Error>,
    pub en_approx: Option<(RegimeTag, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    /// Relative delay `τ1 - τ2` used for the row.
    pub tau: f64,
    pub values: std::result::Result<RowValues, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub axis: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.values.is_err()).count()
    }
}

fn sweep_point(
    p: &SystemParams,
    filt: FilterSpec,
    opts: &SweepOptions,
) -> (f64, std::result::Result<RowValues, Error>) {
    let tau = match opts.tau_mode {
        TauMode::Fixed => filt.delay(),
        TauMode::Formula => tau_opt(p, filt.center).value,
        TauMode::Optimize => match maximize_en_over_tau(p, &filt, None, None, &opts.search) {
            Ok(r) => r.argmax,
            Err(e) => return (filt.delay(), Err(e)),
        },
    };
    (tau, row_values(p, &filt.with_delay(filt.tau2 + tau), opts))
}

fn row_values(p: &SystemParams, filt: &FilterSpec, opts: &SweepOptions) -> Result<RowValues> {
    let band = &opts.search.band;
    stability(p).into_result()?;
    let pops = band_populations(p, filt, band)?;
    let correlators = band_correlators_from(p, filt, &pops, band)?;
    let (tmst, closed) = log_negativity(&correlators)?;
    let en_covariance = log_negativity_covariance(&correlators).map(|r| r.en);
    let en_approx = opts
        .regime
        .or_else(|| RegimeTag::classify(p, filt))
        .map(|r| (r, en_approx(r, p, filt).value));
    Ok(RowValues {
        correlators,
        tmst,
        en_closed: closed.en,
        en_covariance,
        en_approx,
    })
}

/// Evaluates one row per axis point. Rows are computed concurrently, returned
/// in axis order, and carry their own errors.
pub fn sweep(
    p: &SystemParams,
    template: &FilterSpec,
    axis: &AxisSpec,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    p.validate()?;
    template.validate()?;
    opts.search.validate()?;
    let values = axis.values()?;
    if axis.variable == SweepVariable::Tau && opts.tau_mode != TauMode::Fixed {
        return Err(Error::Domain(
            "a delay sweep cannot also choose the delay".into(),
        ));
    }
    let rows = values
        .par_iter()
        .map(|&v| {
            let filt = match axis.variable {
                SweepVariable::Omega => template.with_center(v),
                SweepVariable::Tau => template.with_delay(template.tau2 + v),
            };
            let (tau, values) = match filt.validate() {
                Ok(()) => sweep_point(p, filt, opts),
                Err(e) => (filt.delay(), Err(e)),
            };
            SweepRow {
                omega: filt.center,
                tau,
                values,
            }
        })
        .collect();
    Ok(SweepResult {
        variable: axis.variable,
        axis: values,
        rows,
    })
}
