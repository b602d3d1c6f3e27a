//! Linearized three-mode optomechanical model.
//!
//! One mechanical mode `b` (damping `gamma`) couples to cavity 1 through a
//! beam-splitter interaction of strength `g1` and to cavity 2 through a
//! parametric (two-mode squeezing) interaction of strength `g2`. In the
//! rotating frame the Langevin equations close on the operator vector
//! `(b, d1, d2†)`:
//!
//! ```text
//! d/dt v = A v - L v_in,   L = diag(√γ, √κ1, √κ2)
//!
//!     | -γ/2    -i G1   -i G2 |
//! A = | -i G1   -κ1/2    0    |
//!     | +i G2    0      -κ2/2 |
//! ```
//!
//! This ordering is used by every other module.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two cavity linewidths count as equal.
pub const EQUAL_KAPPA_RTOL: f64 = 1e-12;

/// Relative band around zero in which the largest eigenvalue real part is
/// reported as marginal.
pub const MARGINAL_RTOL: f64 = 1e-12;

/// Physical rates and bath populations. All rates share one (arbitrary) unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mechanical damping rate γ.
    pub gamma: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Beam-splitter coupling to cavity 1.
    pub g1: f64,
    /// Parametric coupling to cavity 2.
    pub g2: f64,
    /// Mechanical bath population.
    pub nm: f64,
    pub n1: f64,
    pub n2: f64,
}

impl SystemParams {
    /// Zero-temperature parameters, validated.
    pub fn new(gamma: f64, kappa1: f64, kappa2: f64, g1: f64, g2: f64) -> Result<Self> {
        let p = Self {
            gamma,
            kappa1,
            kappa2,
            g1,
            g2,
            nm: 0.0,
            n1: 0.0,
            n2: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Equal linewidths and equal couplings, the symmetric configuration used
    /// throughout the figure recipes.
    pub fn symmetric(gamma: f64, kappa: f64, g: f64) -> Result<Self> {
        Self::new(gamma, kappa, kappa, g, g)
    }

    pub fn with_baths(mut self, nm: f64, n1: f64, n2: f64) -> Result<Self> {
        self.nm = nm;
        self.n1 = n1;
        self.n2 = n2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        let non_negative = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("nm", self.nm),
            ("n1", self.n1),
            ("n2", self.n2),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and >= 0",
                });
            }
        }
        Ok(())
    }

    /// Cooperativities `C_i = 4 G_i² / (γ κ_i)`.
    pub fn cooperativities(&self) -> (f64, f64) {
        (
            4.0 * self.g1 * self.g1 / (self.gamma * self.kappa1),
            4.0 * self.g2 * self.g2 / (self.gamma * self.kappa2),
        )
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.nm == 0.0 && self.n1 == 0.0 && self.n2 == 0.0
    }

    pub fn equal_kappa(&self) -> bool {
        (self.kappa1 - self.kappa2).abs() <= EQUAL_KAPPA_RTOL * self.kappa1.max(self.kappa2)
    }

    /// Largest rate or coupling; sets the scale for marginality checks.
    pub fn max_rate(&self) -> f64 {
        [self.gamma, self.kappa1, self.kappa2, self.g1, self.g2]
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Stable evaluation of `G1² x2 - G2² x1`, which cancels exactly for the
    /// symmetric configuration.
    pub(crate) fn coupling_imbalance(&self, x1: Complex64, x2: Complex64) -> Complex64 {
        let g1sq = self.g1 * self.g1;
        let dg = (self.g1 - self.g2) * (self.g1 + self.g2);
        (x2 - x1) * g1sq + x1 * dg
    }
}

/// Drift matrix `A` and noise coupling diagonal `L` in the `(b, d1, d2†)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub a: [[Complex64; 3]; 3],
    pub l: [f64; 3],
}

impl DriftMatrix {
    pub fn trace(&self) -> Complex64 {
        self.a[0][0] + self.a[1][1] + self.a[2][2]
    }
}

pub fn build_drift_matrix(p: &SystemParams) -> Result<DriftMatrix> {
    p.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    Ok(DriftMatrix {
        a: [
            [re(-p.gamma / 2.0), im(-p.g1), im(-p.g2)],
            [im(-p.g1), re(-p.kappa1 / 2.0), zero],
            [im(p.g2), zero, re(-p.kappa2 / 2.0)],
        ],
        l: [p.gamma.sqrt(), p.kappa1.sqrt(), p.kappa2.sqrt()],
    })
}

/// The drift matrix conjugated by `T = diag(1, i, -i)`, which makes it real:
///
/// ```text
/// | -γ/2    G1   -G2  |
/// | -G1   -κ1/2   0   |
/// | -G2     0   -κ2/2 |
/// ```
///
/// Same spectrum as `A`.
pub fn real_drift_matrix(p: &SystemParams) -> Matrix3<f64> {
    Matrix3::new(
        -p.gamma / 2.0,
        p.g1,
        -p.g2,
        -p.g1,
        -p.kappa1 / 2.0,
        0.0,
        -p.g2,
        0.0,
        -p.kappa2 / 2.0,
    )
}

/// Eigenvalues of the drift matrix.
pub fn drift_eigenvalues(p: &SystemParams) -> [Complex64; 3] {
    let ev = real_drift_matrix(p).complex_eigenvalues();
    [ev[0], ev[1], ev[2]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    /// Largest real part sits within `MARGINAL_RTOL * max_rate` of zero.
    pub marginal: bool,
    pub max_real_part: f64,
    pub eigenvalues: [Complex64; 3],
}

impl StabilityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.stable {
            Ok(self)
        } else {
            Err(Error::Unstable {
                max_real_part: self.max_real_part,
                marginal: self.marginal,
            })
        }
    }
}

pub fn stability(p: &SystemParams) -> StabilityReport {
    let eigenvalues = drift_eigenvalues(p);
    let max_real_part = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let marginal = max_real_part.abs() <= MARGINAL_RTOL * p.max_rate();
    StabilityReport {
        stable: max_real_part < 0.0 && !marginal,
        marginal,
        max_real_part,
        eigenvalues,
    }
}

/// Authoritative stability test: every drift eigenvalue strictly in the left
/// half plane, marginal spectra counted as unstable.
pub fn is_stable_eigen(p: &SystemParams) -> bool {
    stability(p).stable
}

/// Asymptotic stability criterion for `C_i >> 1`, `κ_i >> γ`:
/// `G1²/G2² > max(κ1/κ2, κ2/κ1)` for unequal linewidths, `G2 <= G1` for
/// equal ones.
///
/// Outside that regime (notably when `G` is not large compared with `κ`) it
/// can disagree with [`is_stable_eigen`], which is the one the rest of the
/// crate relies on.
pub fn is_stable_closed_form(p: &SystemParams) -> bool {
    if p.g2 == 0.0 {
        return true;
    }
    if p.equal_kappa() {
        return p.g2 <= p.g1;
    }
    let ratio = (p.g1 * p.g1) / (p.g2 * p.g2);
    ratio > (p.kappa1 / p.kappa2).max(p.kappa2 / p.kappa1)
}

/// Human-readable statement of the closed-form criterion and whether it holds.
pub fn closed_form_criterion_message(p: &SystemParams) -> String {
    if p.g2 == 0.0 {
        return "G2 = 0: no parametric drive, always stable".to_string();
    }
    if p.equal_kappa() {
        let verdict = if p.g2 <= p.g1 { "holds" } else { "violated" };
        return format!(
            "equal linewidths require G2 <= G1 ({verdict}: G1 = {:e}, G2 = {:e})",
            p.g1, p.g2
        );
    }
    let ratio = (p.g1 * p.g1) / (p.g2 * p.g2);
    let bound = (p.kappa1 / p.kappa2).max(p.kappa2 / p.kappa1);
    let verdict = if ratio > bound { "holds" } else { "violated" };
    format!("G1^2/G2^2 > max(k1/k2, k2/k1) {verdict}: {ratio:e} vs {bound:e}")
}
