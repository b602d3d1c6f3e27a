//! Closed-form approximations for the symmetric configuration
//! (`κ1 = κ2 = κ`, `G1 = G2 = G`, `γ` much smaller than `σ`, `κ`, `G`).
//!
//! Every formula is evaluated exactly as printed. Leaving a formula's window
//! of validity produces a [`RegimeWarning`], never an error.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlators::FilterSpec;
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeTag {
    /// `0 <= ω <= σ/2`, `σ << κ`: flat `E_n ≈ πγ/(2σ)`.
    ResonantPlateau,
    /// `σ/2 < ω < κ/2`, `σ << κ`, `G < κ`.
    SmallBandWeak,
    /// `σ/2 < ω < κ/2`, `σ << κ`, `G > κ`.
    SmallBandStrong,
    /// `κ/2 <~ ω <~ 7κ`, `σ = κ`, `G > κ`.
    LargeBandStrong,
}

impl RegimeTag {
    pub const ALL: [RegimeTag; 4] = [
        RegimeTag::ResonantPlateau,
        RegimeTag::SmallBandWeak,
        RegimeTag::SmallBandStrong,
        RegimeTag::LargeBandStrong,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegimeTag::ResonantPlateau => "resonant-plateau",
            RegimeTag::SmallBandWeak => "small-band-weak",
            RegimeTag::SmallBandStrong => "small-band-strong",
            RegimeTag::LargeBandStrong => "large-band-strong",
        }
    }

    /// Window in `ω` as `(lo, hi)` for the given `κ`, `σ`.
    pub fn omega_window(self, kappa: f64, sigma: f64) -> (f64, f64) {
        match self {
            RegimeTag::ResonantPlateau => (0.0, sigma / 2.0),
            RegimeTag::SmallBandWeak | RegimeTag::SmallBandStrong => (sigma / 2.0, kappa / 2.0),
            RegimeTag::LargeBandStrong => (kappa / 2.0, 7.0 * kappa),
        }
    }

    /// The regime whose window and coupling condition contain `(p, filt)`.
    pub fn classify(p: &SystemParams, filt: &FilterSpec) -> Option<RegimeTag> {
        if !is_symmetric(p) {
            return None;
        }
        let (kappa, g) = (p.kappa1, p.g1);
        let (omega, sigma) = (filt.center.abs(), filt.bandwidth);
        if sigma <= kappa / SMALL_BAND_RATIO {
            if omega <= sigma / 2.0 {
                return Some(RegimeTag::ResonantPlateau);
            }
            if omega < kappa / 2.0 {
                return Some(if g < kappa {
                    RegimeTag::SmallBandWeak
                } else {
                    RegimeTag::SmallBandStrong
                });
            }
        }
        if (sigma - kappa).abs() <= LARGE_BAND_RTOL * kappa
            && g > kappa
            && (kappa / 2.0..=7.0 * kappa).contains(&omega)
        {
            return Some(RegimeTag::LargeBandStrong);
        }
        None
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RegimeTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegimeTag::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown regime `{s}`"))
    }
}

/// `σ <= κ / 10` counts as small bandwidth.
pub const SMALL_BAND_RATIO: f64 = 10.0;
/// `|σ - κ| <= 1e-6 κ` counts as `σ = κ`.
pub const LARGE_BAND_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegimeWarning {
    OutsideWindow { omega: f64, lo: f64, hi: f64 },
    BandwidthNotSmall { sigma: f64, kappa: f64 },
    BandwidthNotKappa { sigma: f64, kappa: f64 },
    CouplingNotWeak { g: f64, kappa: f64 },
    CouplingNotStrong { g: f64, kappa: f64 },
    Asymmetric,
    /// The approximation does not depend on `ω`; no optimum exists.
    Flat,
    /// A negative frequency was folded onto `|ω|`.
    NegativeOmega { omega: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::OutsideWindow { omega, lo, hi } => {
                write!(f, "omega = {omega:e} outside validity window [{lo:e}, {hi:e}]")
            }
            RegimeWarning::BandwidthNotSmall { sigma, kappa } => {
                write!(f, "sigma = {sigma:e} is not small against kappa = {kappa:e}")
            }
            RegimeWarning::BandwidthNotKappa { sigma, kappa } => {
                write!(f, "sigma = {sigma:e} differs from kappa = {kappa:e}")
            }
            RegimeWarning::CouplingNotWeak { g, kappa } => {
                write!(f, "G = {g:e} is not below kappa = {kappa:e}")
            }
            RegimeWarning::CouplingNotStrong { g, kappa } => {
                write!(f, "G = {g:e} is not above kappa = {kappa:e}")
            }
            RegimeWarning::Asymmetric => {
                f.write_str("formula assumes kappa1 = kappa2 and G1 = G2; using kappa1, G1")
            }
            RegimeWarning::Flat => f.write_str("approximation is flat in omega"),
            RegimeWarning::NegativeOmega { omega } => {
                write!(f, "negative omega = {omega:e} replaced by |omega|")
            }
        }
    }
}

/// A closed-form value with the regime conditions it violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub value: f64,
    pub warnings: Vec<RegimeWarning>,
}

impl Approximation {
    pub fn in_regime(&self) -> bool {
        self.warnings.is_empty()
    }
}

fn is_symmetric(p: &SystemParams) -> bool {
    p.equal_kappa() && (p.g1 - p.g2).abs() <= 1e-12 * p.g1.max(p.g2)
}

struct Checks {
    warnings: Vec<RegimeWarning>,
    kappa: f64,
    g: f64,
}

impl Checks {
    fn new(p: &SystemParams) -> Self {
        let mut warnings = Vec::new();
        if !is_symmetric(p) {
            warnings.push(RegimeWarning::Asymmetric);
        }
        Self {
            warnings,
            kappa: p.kappa1,
            g: p.g1,
        }
    }

    fn window(&mut self, omega: f64, lo: f64, hi: f64, lo_open: bool, hi_open: bool) {
        let below = if lo_open { omega <= lo } else { omega < lo };
        let above = if hi_open { omega >= hi } else { omega > hi };
        if below || above {
            self.warnings
                .push(RegimeWarning::OutsideWindow { omega, lo, hi });
        }
    }

    fn small_band(&mut self, sigma: f64) {
        if sigma > self.kappa / SMALL_BAND_RATIO {
            self.warnings.push(RegimeWarning::BandwidthNotSmall {
                sigma,
                kappa: self.kappa,
            });
        }
    }

    fn weak(&mut self) {
        if !(self.g < self.kappa) {
            self.warnings.push(RegimeWarning::CouplingNotWeak {
                g: self.g,
                kappa: self.kappa,
            });
        }
    }

    fn strong(&mut self) {
        if !(self.g > self.kappa) {
            self.warnings.push(RegimeWarning::CouplingNotStrong {
                g: self.g,
                kappa: self.kappa,
            });
        }
    }

    fn done(self, value: f64) -> Approximation {
        Approximation {
            value,
            warnings: self.warnings,
        }
    }
}

/// `E_n ≈ πγ / (2σ)` for `0 <= ω <= σ/2`.
pub fn en_resonant_plateau(p: &SystemParams, filt: &FilterSpec) -> Approximation {
    let mut c = Checks::new(p);
    let sigma = filt.bandwidth;
    c.window(filt.center, 0.0, sigma / 2.0, false, false);
    c.small_band(sigma);
    c.done(PI * p.gamma / (2.0 * sigma))
}

/// `E_n ≈ -ln[(20G⁴σ² + 3κ²ω⁴) / (3ω²(64G⁴ + √2 κ²ω²))]`.
pub fn en_small_band_weak(p: &SystemParams, filt: &FilterSpec) -> Approximation {
    let mut c = Checks::new(p);
    let (kappa, g) = (c.kappa, c.g);
    let (omega, sigma) = (filt.center, filt.bandwidth);
    c.window(omega, sigma / 2.0, kappa / 2.0, true, true);
    c.small_band(sigma);
    c.weak();
    let num = 20.0 * g.powi(4) * sigma.powi(2) + 3.0 * kappa.powi(2) * omega.powi(4);
    let den = 3.0 * omega.powi(2) * (64.0 * g.powi(4) + SQRT_2 * kappa.powi(2) * omega.powi(2));
    c.done(-(num / den).ln())
}

/// `E_n ≈ -½ ln[(G⁸σ⁴ + G⁴σ²ω⁴κ² + 2ω¹⁰κ²) / (144 G⁸ω⁴)]`.
pub fn en_small_band_strong(p: &SystemParams, filt: &FilterSpec) -> Approximation {
    let mut c = Checks::new(p);
    let (kappa, g) = (c.kappa, c.g);
    let (omega, sigma) = (filt.center, filt.bandwidth);
    c.window(omega, sigma / 2.0, kappa / 2.0, true, true);
    c.small_band(sigma);
    c.strong();
    let num = g.powi(8) * sigma.powi(4)
        + g.powi(4) * sigma.powi(2) * omega.powi(4) * kappa.powi(2)
        + 2.0 * omega.powi(10) * kappa.powi(2);
    let den = 144.0 * g.powi(8) * omega.powi(4);
    c.done(-0.5 * (num / den).ln())
}

/// `E_n ≈ ln[√2 (3G⁴κ²(ω² + 3κ²/4) + G²κ²ω⁴ + ω⁸) / (3G⁴κ⁴ + 2G²ω²κ⁴ + ω⁸)]`.
pub fn en_large_band_strong(p: &SystemParams, filt: &FilterSpec) -> Approximation {
    let mut c = Checks::new(p);
    let (kappa, g) = (c.kappa, c.g);
    let (omega, sigma) = (filt.center, filt.bandwidth);
    c.window(omega, kappa / 2.0, 7.0 * kappa, false, false);
    if (sigma - kappa).abs() > LARGE_BAND_RTOL * kappa {
        c.warnings
            .push(RegimeWarning::BandwidthNotKappa { sigma, kappa });
    }
    c.strong();
    let (g2, g4, k2, k4) = (g * g, g.powi(4), kappa * kappa, kappa.powi(4));
    let (w2, w4, w8) = (omega * omega, omega.powi(4), omega.powi(8));
    let num = 3.0 * g4 * k2 * (w2 + 3.0 * k2 / 4.0) + g2 * k2 * w4 + w8;
    let den = 3.0 * g4 * k4 + 2.0 * g2 * w2 * k4 + w8;
    c.done((SQRT_2 * num / den).ln())
}

pub fn en_approx(regime: RegimeTag, p: &SystemParams, filt: &FilterSpec) -> Approximation {
    match regime {
        RegimeTag::ResonantPlateau => en_resonant_plateau(p, filt),
        RegimeTag::SmallBandWeak => en_small_band_weak(p, filt),
        RegimeTag::SmallBandStrong => en_small_band_strong(p, filt),
        RegimeTag::LargeBandStrong => en_large_band_strong(p, filt),
    }
}

/// Optimal filter centre of the chosen regime:
///
/// * small-band-weak: `6^{1/4} G (σ/κ)^{1/2}`
/// * small-band-strong: `(G⁸σ⁴ / 3κ²)^{1/5}`
/// * large-band-strong: `√(Gκ)`
/// * resonant-plateau: no optimum; returns `σ/4` flagged [`RegimeWarning::Flat`].
///
/// A formula value that falls outside its own window is flagged as well.
pub fn omega_opt(p: &SystemParams, filt: &FilterSpec, regime: RegimeTag) -> Approximation {
    let mut c = Checks::new(p);
    let (kappa, g) = (c.kappa, c.g);
    let sigma = filt.bandwidth;
    let value = match regime {
        RegimeTag::ResonantPlateau => {
            c.small_band(sigma);
            c.warnings.push(RegimeWarning::Flat);
            sigma / 4.0
        }
        RegimeTag::SmallBandWeak => {
            c.small_band(sigma);
            c.weak();
            6f64.powf(0.25) * g * (sigma / kappa).sqrt()
        }
        RegimeTag::SmallBandStrong => {
            c.small_band(sigma);
            c.strong();
            (g.powi(8) * sigma.powi(4) / (3.0 * kappa * kappa)).powf(0.2)
        }
        RegimeTag::LargeBandStrong => {
            if (sigma - kappa).abs() > LARGE_BAND_RTOL * kappa {
                c.warnings
                    .push(RegimeWarning::BandwidthNotKappa { sigma, kappa });
            }
            c.strong();
            (g * kappa).sqrt()
        }
    };
    if regime != RegimeTag::ResonantPlateau {
        let (lo, hi) = regime.omega_window(kappa, sigma);
        let open = regime != RegimeTag::LargeBandStrong;
        c.window(value, lo, hi, open, open);
    }
    c.done(value)
}

/// Optimal delay for the large-bandwidth case:
///
/// ```text
/// τ_opt ≈ 3G²κ(ω² - κ²/8) / (G⁴κ² + ω⁶)    ω >= κ/2
/// τ_opt ≈ πκ / (2(2+π)G²)                  0 <= ω < κ/2
/// ```
pub fn tau_opt(p: &SystemParams, omega: f64) -> Approximation {
    let mut c = Checks::new(p);
    let (kappa, g) = (c.kappa, c.g);
    if omega < 0.0 {
        c.warnings.push(RegimeWarning::NegativeOmega { omega });
    }
    let w = omega.abs();
    let value = if w >= kappa / 2.0 {
        3.0 * g * g * kappa * (w * w - kappa * kappa / 8.0) / (g.powi(4) * kappa * kappa + w.powi(6))
    } else {
        PI * kappa / (2.0 * (2.0 + PI) * g * g)
    };
    c.done(value)
}
