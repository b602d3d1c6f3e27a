//! Filtered output modes and their second moments.
//!
//! A rectangular filter of width `σ` centred at `ω` selects
//!
//! ```text
//! D1 = σ^{-1/2} ∫_{ω-σ/2}^{ω+σ/2} dΩ e^{-iΩτ1} d1_out[Ω]
//! D2 = σ^{-1/2} ∫_{-ω-σ/2}^{-ω+σ/2} dΩ e^{-iΩτ2} d2_out[Ω]
//! ```
//!
//! Cavity 2 is filtered around `-ω`, which the `d2†` slot of the scattering
//! matrix maps back onto the same interval as cavity 1. The three moments are
//! band averages of the spectral densities:
//!
//! ```text
//! ⟨D1†D1⟩ = σ⁻¹ ∫ n1,   ⟨D2†D2⟩ = σ⁻¹ ∫ n2,   ⟨D1 D2⟩ = σ⁻¹ ∫ e^{-iΩ(τ1-τ2)} m.
//! ```
//!
//! Entanglement depends on `(⟨D1†D1⟩+1)⟨D2†D2⟩ - |⟨D1D2⟩|²`, which for strong
//! squeezing is many orders of magnitude below either product. It is
//! integrated directly (see [`Correlators::gram`]) instead of being formed by
//! subtraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stability, SystemParams};
use crate::quadrature::{graded_breakpoints, integrate, QuadOptions};
use crate::scattering::spectral_point;

/// Bandwidths below this multiple of `γ` are evaluated at the band centre.
pub const DEGENERATE_BANDWIDTH: f64 = 1e-6;

/// Tolerance on the physicality bounds, relative to the moments involved.
const PHYSICAL_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Centre `ω` of the cavity-1 band; cavity 2 is centred at `-ω`.
    pub center: f64,
    pub bandwidth: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl FilterSpec {
    pub fn new(center: f64, bandwidth: f64) -> Result<Self> {
        let f = Self {
            center,
            bandwidth,
            tau1: 0.0,
            tau2: 0.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_delay(mut self, tau1: f64) -> Self {
        self.tau1 = tau1;
        self
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: self.bandwidth,
                reason: "must be finite and > 0",
            });
        }
        for (name, value) in [
            ("omega", self.center),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    /// Relative delay `τ1 - τ2`, the only combination that enters.
    pub fn delay(&self) -> f64 {
        self.tau1 - self.tau2
    }

    pub fn band(&self) -> (f64, f64) {
        (
            self.center - 0.5 * self.bandwidth,
            self.center + 0.5 * self.bandwidth,
        )
    }
}

/// Band-averaged second moments of the filtered output modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    /// `⟨D1†D1⟩`
    pub nn1: f64,
    /// `⟨D2†D2⟩`
    pub nn2: f64,
    /// `⟨D1 D2⟩`
    pub m: Complex64,
    /// `nn2 - nn1`
    pub imbalance: f64,
    /// `(nn1 + 1) nn2 - |m|²`
    pub gram: f64,
}

impl Correlators {
    pub const VACUUM: Correlators = Correlators {
        nn1: 0.0,
        nn2: 0.0,
        m: Complex64::new(0.0, 0.0),
        imbalance: 0.0,
        gram: 0.0,
    };

    /// Builds the derived invariants by direct subtraction. Fine for moderate
    /// moments; [`band_correlators`] integrates them instead.
    pub fn from_moments(nn1: f64, nn2: f64, m: Complex64) -> Self {
        Self {
            nn1,
            nn2,
            m,
            imbalance: nn2 - nn1,
            gram: (nn1 + 1.0) * nn2 - m.norm_sqr(),
        }
    }

    /// `nn1 (nn2 + 1) - |m|²`
    pub fn gram_swapped(&self) -> f64 {
        self.gram - self.imbalance
    }

    /// Checks `nn_i >= 0` and `|m|² <= min(nn1 (nn2+1), (nn1+1) nn2)` up to a
    /// relative tolerance.
    pub fn check_physical(&self) -> Result<()> {
        let scale = (self.nn1 + 1.0) * (self.nn2 + 1.0);
        let tol = PHYSICAL_RTOL * scale;
        if !(self.nn1 >= -1e-12 && self.nn2 >= -1e-12) {
            return Err(Error::Unphysical(format!(
                "negative population ({:e}, {:e})",
                self.nn1, self.nn2
            )));
        }
        if self.gram < -tol || self.gram_swapped() < -tol {
            return Err(Error::Unphysical(format!(
                "|<D1 D2>|^2 exceeds the Cauchy-Schwarz bound (gram {:e}, {:e})",
                self.gram,
                self.gram_swapped()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandOptions {
    pub quad: QuadOptions,
    /// Width of the narrowest spectral structure at `Ω = 0`; defaults to `γ`.
    pub feature_scale: Option<f64>,
}

impl BandOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            quad: QuadOptions::with_rel_tol(rel_tol),
            feature_scale: None,
        }
    }
}

/// Delay-independent part of the band moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPopulations {
    pub nn1: f64,
    pub nn2: f64,
    pub imbalance: f64,
}

fn breakpoints(p: &SystemParams, filt: &FilterSpec, opts: &BandOptions) -> Vec<f64> {
    let (lo, hi) = filt.band();
    graded_breakpoints(lo, hi, opts.feature_scale.unwrap_or(p.gamma))
}

fn is_degenerate(p: &SystemParams, filt: &FilterSpec) -> bool {
    filt.bandwidth < DEGENERATE_BANDWIDTH * p.gamma
}

pub fn band_populations(
    p: &SystemParams,
    filt: &FilterSpec,
    opts: &BandOptions,
) -> Result<BandPopulations> {
    filt.validate()?;
    if is_degenerate(p, filt) {
        let sp = spectral_point(p, filt.center)?;
        return Ok(BandPopulations {
            nn1: sp.n1,
            nn2: sp.n2,
            imbalance: sp.imbalance,
        });
    }
    let r = integrate(
        |omega| {
            let sp = spectral_point(p, omega)?;
            Ok([sp.n1, sp.n2, sp.imbalance])
        },
        &breakpoints(p, filt, opts),
        &[0, 1, 2],
        &opts.quad,
    )?;
    let inv = 1.0 / filt.bandwidth;
    Ok(BandPopulations {
        nn1: (r.value[0] * inv).max(0.0),
        nn2: (r.value[1] * inv).max(0.0),
        imbalance: r.value[2] * inv,
    })
}

/// `⟨D1 D2⟩` only.
pub fn band_cross(p: &SystemParams, filt: &FilterSpec, opts: &BandOptions) -> Result<Complex64> {
    filt.validate()?;
    let tau = filt.delay();
    if is_degenerate(p, filt) {
        let sp = spectral_point(p, filt.center)?;
        return Ok(sp.m * Complex64::from_polar(1.0, -filt.center * tau));
    }
    let r = integrate(
        |omega| {
            let sp = spectral_point(p, omega)?;
            let z = sp.m * Complex64::from_polar(1.0, -omega * tau);
            Ok([z.re, z.im])
        },
        &breakpoints(p, filt, opts),
        &[0, 0],
        &opts.quad,
    )?;
    Ok(Complex64::new(r.value[0], r.value[1]) / filt.bandwidth)
}

/// Completes the moments for one delay given the delay-independent part.
///
/// The Gram determinant is `nn2 · σ⁻¹ ∫ |e^{-iΩτ} u − α w|²` with
/// `α = ⟨D1D2⟩ / nn2`: the residual of projecting the cavity-1 amplitude on
/// the cavity-2 amplitude. An error `δα` only enters at second order.
pub fn band_correlators_from(
    p: &SystemParams,
    filt: &FilterSpec,
    pops: &BandPopulations,
    opts: &BandOptions,
) -> Result<Correlators> {
    let m = band_cross(p, filt, opts)?;
    let tau = filt.delay();
    let gram = if pops.nn2 == 0.0 {
        0.0
    } else if is_degenerate(p, filt) {
        spectral_point(p, filt.center)?.gram()
    } else {
        let alpha = m / pops.nn2;
        // Each residual evaluation cancels terms of size |u|² + |α|²|w|², so
        // its integral is only known to round-off of their integrated size.
        let noise = 100.0 * f64::EPSILON * filt.bandwidth
            * (pops.nn1 + 1.0 + alpha.norm_sqr() * pops.nn2);
        let quad = QuadOptions {
            abs_tol: opts.quad.abs_tol.max(noise),
            ..opts.quad
        };
        let r = integrate(
            |omega| {
                let sp = spectral_point(p, omega)?;
                let phase = Complex64::from_polar(1.0, -omega * tau);
                let residual: f64 = (0..3)
                    .map(|j| (sp.u[j] * phase - alpha * sp.w[j]).norm_sqr())
                    .sum();
                Ok([residual])
            },
            &breakpoints(p, filt, opts),
            &[0],
            &quad,
        )?;
        pops.nn2 * r.value[0] / filt.bandwidth
    };
    Ok(Correlators {
        nn1: pops.nn1,
        nn2: pops.nn2,
        m,
        imbalance: pops.imbalance,
        gram,
    })
}

pub fn band_correlators_with(
    p: &SystemParams,
    filt: &FilterSpec,
    opts: &BandOptions,
) -> Result<Correlators> {
    p.validate()?;
    stability(p).into_result()?;
    let pops = band_populations(p, filt, opts)?;
    band_correlators_from(p, filt, &pops, opts)
}

/// Filtered-mode correlators at the default relative tolerance of `1e-10`.
pub fn band_correlators(p: &SystemParams, filt: &FilterSpec) -> Result<Correlators> {
    band_correlators_with(p, filt, &BandOptions::default())
}

/// Adaptive integral of a complex function over `[lo, hi]`, with graded
/// panels around zero when `0 ∈ [lo, hi]`.
pub fn integrate_band<F>(f: F, lo: f64, hi: f64, feature_scale: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty interval [{lo:e}, {hi:e}]")));
    }
    if !(feature_scale > 0.0) {
        return Err(Error::InvalidParameter {
            name: "feature_scale",
            value: feature_scale,
            reason: "must be > 0",
        });
    }
    let r = integrate(
        |x| {
            let z = f(x);
            Ok([z.re, z.im])
        },
        &graded_breakpoints(lo, hi, feature_scale),
        &[0, 0],
        &QuadOptions::with_rel_tol(tol),
    )?;
    Ok(Complex64::new(r.value[0], r.value[1]))
}
