//! Two-mode squeezed thermal state parameters and logarithmic negativity.
//!
//! The filtered pair `(D1, D2)` is Gaussian with moments `(nn1, nn2, m)` and
//! is equivalent to a two-mode squeezed thermal state with populations
//! `n̄1, n̄2` and squeezing `R12`. Two independent routes give `E_n`:
//!
//! * closed form, `E_n = -ln(n_R - √(n_R² - (1+2n̄1)(1+2n̄2)))` with
//!   `n_R = (n̄1 + n̄2 + 1) cosh 2R12`;
//! * covariance matrix: smallest symplectic eigenvalue `ν̃₋` of the partially
//!   transposed quadrature covariance, `E_n = -ln 2ν̃₋`.
//!
//! Vacuum quadrature variance is 1/2 throughout.
//!
//! The closed form is evaluated from the precomputed invariants `gram` and
//! `imbalance` of [`Correlators`], with every near-cancelling difference
//! rewritten as a quotient. The covariance route only sees the 4×4 matrix, so
//! it loses accuracy once `ε·nn` approaches `e^{-E_n}`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::correlators::Correlators;
use crate::error::{Error, Result};

/// Allowed deficit of the smallest symplectic eigenvalue below 1/2.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmstParams {
    pub nbar1: f64,
    pub nbar2: f64,
    pub r12: f64,
    /// `A = nn1 + nn2 + 1`
    pub a_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementResult {
    /// Logarithmic negativity, clamped at zero for separable states.
    pub en: f64,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub nu_tilde: f64,
    pub method: Method,
}

impl EntanglementResult {
    fn from_nu(nu_tilde: f64, method: Method) -> Self {
        Self {
            en: (-(2.0 * nu_tilde).ln()).max(0.0),
            nu_tilde,
            method,
        }
    }
}

fn clamp_sqrt_arg(x: f64, scale: f64) -> f64 {
    if x < 0.0 && x >= -1e-14 * scale {
        0.0
    } else {
        x
    }
}

pub fn tmst_from_correlators(c: &Correlators) -> Result<TmstParams> {
    if !(c.nn1 >= 0.0 && c.nn2 >= 0.0) {
        return Err(Error::Unphysical(format!(
            "negative population ({:e}, {:e})",
            c.nn1, c.nn2
        )));
    }
    let a = c.nn1 + c.nn2 + 1.0;
    let abs_m = c.m.norm();
    let delta = c.imbalance;

    // A² - 4|m|² = (1 - Δ)² + 4·gram
    let q_sq = (1.0 - delta).powi(2) + 4.0 * c.gram;
    if !(q_sq > 0.0) {
        return Err(Error::Unphysical(format!(
            "2|<D1 D2>| = {:e} is not below A = {a:e}",
            2.0 * abs_m
        )));
    }
    let q = q_sq.sqrt();

    let nbar1 = 2.0 * (c.gram - delta) / (q + 1.0 + delta);
    let nbar2 = 2.0 * c.gram / (q + 1.0 - delta);
    let floor = -1e-12 * a.max(1.0);
    if nbar1 < floor || nbar2 < floor {
        return Err(Error::Unphysical(format!(
            "negative thermal population (n1 = {nbar1:e}, n2 = {nbar2:e})"
        )));
    }

    // R = arctanh(2|m|/A)/2 = ln((A + 2|m|)/√(A² - 4|m|²))/2
    let r12 = 0.5 * ((a + 2.0 * abs_m) / q).ln();

    Ok(TmstParams {
        nbar1: nbar1.max(0.0),
        nbar2: nbar2.max(0.0),
        r12: r12.max(0.0),
        a_sum: a,
    })
}

pub fn log_negativity_closed(t: &TmstParams) -> Result<EntanglementResult> {
    let n_r = (t.nbar1 + t.nbar2 + 1.0) * (2.0 * t.r12).cosh();
    let prod = (1.0 + 2.0 * t.nbar1) * (1.0 + 2.0 * t.nbar2);
    let disc = n_r * n_r - prod;
    if disc < -1e-12 * n_r * n_r {
        return Err(Error::Domain(format!(
            "n_R^2 = {:e} below (1+2n1)(1+2n2) = {prod:e}",
            n_r * n_r
        )));
    }
    let disc = clamp_sqrt_arg(disc, n_r * n_r).max(0.0);
    // n_R - √(n_R² - P) = P / (n_R + √(n_R² - P))
    let arg = prod / (n_r + disc.sqrt());
    Ok(EntanglementResult::from_nu(0.5 * arg, Method::ClosedForm))
}

/// Quadrature covariance over `(X1, P1, X2, P2)`, `X = (D + D†)/√2`,
/// `P = (D - D†)/(i√2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub v: [[f64; 4]; 4],
}

impl CovarianceMatrix {
    pub fn from_correlators(c: &Correlators) -> Self {
        let a = c.nn1 + 0.5;
        let b = c.nn2 + 0.5;
        let (re, im) = (c.m.re, c.m.im);
        Self {
            v: [
                [a, 0.0, re, im],
                [0.0, a, im, -re],
                [re, im, b, 0.0],
                [im, -re, 0.0, b],
            ],
        }
    }

    fn block_det(&self, r: usize, c: usize) -> f64 {
        self.v[r][c] * self.v[r + 1][c + 1] - self.v[r][c + 1] * self.v[r + 1][c]
    }

    pub fn det(&self) -> f64 {
        Matrix4::from_fn(|i, j| self.v[i][j]).determinant()
    }

    fn smallest_symplectic(&self, seralian: f64) -> f64 {
        let det = self.det();
        let disc = clamp_sqrt_arg(seralian * seralian - 4.0 * det, seralian * seralian);
        if disc < 0.0 || seralian <= 0.0 {
            return f64::NAN;
        }
        // (Δ - √(Δ² - 4 det V))/2 = 2 det V / (Δ + √(Δ² - 4 det V))
        (2.0 * det / (seralian + disc.sqrt())).max(0.0).sqrt()
    }

    /// Smallest symplectic eigenvalue of `V` itself.
    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        let seralian = self.block_det(0, 0) + self.block_det(2, 2) + 2.0 * self.block_det(0, 2);
        self.smallest_symplectic(seralian)
    }

    /// Smallest symplectic eigenvalue after transposing mode 2 (`P2 → -P2`).
    pub fn min_partial_transpose_eigenvalue(&self) -> f64 {
        let seralian = self.block_det(0, 0) + self.block_det(2, 2) - 2.0 * self.block_det(0, 2);
        self.smallest_symplectic(seralian)
    }
}

pub fn log_negativity_covariance(c: &Correlators) -> Result<EntanglementResult> {
    let cov = CovarianceMatrix::from_correlators(c);
    let nu = cov.min_symplectic_eigenvalue();
    if !(nu >= 0.5 - SYMPLECTIC_TOL) {
        return Err(Error::Unphysical(format!(
            "smallest symplectic eigenvalue {nu:e} below 1/2"
        )));
    }
    let nu_tilde = cov.min_partial_transpose_eigenvalue();
    if !nu_tilde.is_finite() {
        return Err(Error::Domain("partial transpose spectrum undefined".into()));
    }
    Ok(EntanglementResult::from_nu(nu_tilde, Method::Covariance))
}

/// Closed-form route end to end: moments → TMST parameters → `E_n`.
pub fn log_negativity(c: &Correlators) -> Result<(TmstParams, EntanglementResult)> {
    let t = tmst_from_correlators(c)?;
    let e = log_negativity_closed(&t)?;
    Ok((t, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn moments(nn1: f64, nn2: f64, m: f64) -> Correlators {
        Correlators::from_moments(nn1, nn2, Complex64::new(m, 0.0))
    }

    #[test]
    fn vacuum() {
        let t = tmst_from_correlators(&Correlators::VACUUM).unwrap();
        assert_eq!((t.nbar1, t.nbar2, t.r12, t.a_sum), (0.0, 0.0, 0.0, 1.0));
        let e = log_negativity_closed(&t).unwrap();
        assert_eq!(e.en, 0.0);
        let c = log_negativity_covariance(&Correlators::VACUUM).unwrap();
        assert_eq!(c.en, 0.0);
        assert!((c.nu_tilde - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_tmst() {
        // A = 2, √(A² - 4|m|²) = √2.04, arctanh(0.7) = 0.867300527694053
        let t = tmst_from_correlators(&moments(0.5, 0.5, 0.7)).unwrap();
        let root = 2.04f64.sqrt();
        assert!((t.nbar1 - (root - 1.0) / 2.0).abs() < 1e-14);
        assert!((t.nbar2 - (root - 1.0) / 2.0).abs() < 1e-14);
        assert!((t.r12 - 0.867_300_527_694_053 / 2.0).abs() < 1e-14);
        assert!((t.nbar1 - 0.21414).abs() < 1e-5);
        assert!((t.r12 - 0.43365).abs() < 1e-5);

        let e = log_negativity_closed(&t).unwrap();
        assert!((e.en + 0.6f64.ln()).abs() < 1e-13, "{}", e.en);
        let cov = log_negativity_covariance(&moments(0.5, 0.5, 0.7)).unwrap();
        assert!((cov.en - e.en).abs() < 1e-9);
        assert_eq!(cov.method, Method::Covariance);
    }

    #[test]
    fn uncorrelated_state() {
        let t = tmst_from_correlators(&moments(1.0, 0.0, 0.0)).unwrap();
        assert!((t.nbar1 - 1.0).abs() < 1e-15);
        assert_eq!(t.nbar2, 0.0);
        assert_eq!(t.r12, 0.0);
        for (a, b) in [(1.0, 0.0), (3.0, 7.0), (0.0, 0.0)] {
            let e = log_negativity(&moments(a, b, 0.0)).unwrap().1;
            assert_eq!(e.en, 0.0);
            // argument 1 + 2 min(nn1, nn2)
            assert!((2.0 * e.nu_tilde - (1.0 + 2.0 * f64::min(a, b))).abs() < 1e-12);
        }
    }

    #[test]
    fn a_sum_identity() {
        let c = moments(2.5, 1.25, 1.9);
        let t = tmst_from_correlators(&c).unwrap();
        let lhs = (t.nbar1 + t.nbar2 + 1.0) * (2.0 * t.r12).cosh();
        assert!((lhs - t.a_sum).abs() < 1e-12 * t.a_sum);
    }

    #[test]
    fn rejects_unphysical() {
        assert!(tmst_from_correlators(&moments(0.5, 0.5, 1.0)).is_err());
        assert!(tmst_from_correlators(&moments(0.1, 0.1, 0.4)).is_err());
        assert!(tmst_from_correlators(&moments(-1.0, 0.1, 0.0)).is_err());
        assert!(log_negativity_covariance(&moments(0.1, 0.1, 0.4)).is_err());
    }

    #[test]
    fn phase_of_m_is_irrelevant() {
        let base = moments(3.0, 2.0, 2.2);
        let e0 = log_negativity_covariance(&base).unwrap().en;
        for phi in [0.3, 1.7, -2.9] {
            let c = Correlators::from_moments(3.0, 2.0, Complex64::from_polar(2.2, phi));
            assert!((log_negativity_covariance(&c).unwrap().en - e0).abs() < 1e-12);
            assert!((log_negativity(&c).unwrap().1.en - e0).abs() < 1e-12);
        }
    }

    #[test]
    fn precise_invariants_survive_large_moments() {
        // Pure two-mode squeezed vacuum with cosh 2R = 1 + 2·10¹², fed with the
        // exact invariants: n̄ = 0 and E_n = 2R.
        let n: f64 = 1e12;
        let m = (n * (n + 1.0)).sqrt();
        let c = Correlators {
            nn1: n,
            nn2: n,
            m: Complex64::new(m, 0.0),
            imbalance: 0.0,
            gram: 0.0,
        };
        let (t, e) = log_negativity(&c).unwrap();
        assert!(t.nbar1.abs() < 1e-9 && t.nbar2.abs() < 1e-9, "{t:?}");
        let r = (n.sqrt() + (n + 1.0).sqrt()).ln();
        assert!((e.en - 2.0 * r).abs() < 1e-9, "{} vs {}", e.en, 2.0 * r);
    }
}
