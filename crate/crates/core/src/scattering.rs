//! Frequency-domain input-output theory.
//!
//! With the Fourier convention `f(Ω) = (2π)^{-1/2} ∫ dt e^{iΩt} f(t)` the
//! Langevin equations become `(A + iΩ) v(Ω) = L v_in(Ω)`, and the boundary
//! condition `v_out = v_in + L v` gives
//!
//! ```text
//! s(Ω) = I + L (A + iΩ)⁻¹ L.
//! ```
//!
//! Because the third slot carries `d2†`, entry `(2, ·)` of `s(Ω)` describes
//! the cavity-2 output at frequency `-Ω`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_drift_matrix, SystemParams};

/// Bogoliubov metric `η = diag(+1, +1, -1)` preserved by `s`.
pub const METRIC: [f64; 3] = [1.0, 1.0, -1.0];

pub type Mat3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    pub omega: f64,
    pub s: Mat3,
}

impl ScatteringMatrix {
    /// `s η s†`.
    pub fn metric_product(&self) -> Mat3 {
        let mut out = [[ZERO; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                *entry = (0..3)
                    .map(|j| self.s[i][j] * METRIC[j] * self.s[k][j].conj())
                    .sum();
            }
        }
        out
    }

    /// Largest entrywise deviation of `s η s†` from `η`, each entry measured
    /// relative to `1 + Σ_j |s_ij| |s_kj|`, the magnitude of the terms that
    /// produce it.
    pub fn metric_defect(&self) -> f64 {
        let prod = self.metric_product();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for k in 0..3 {
                let target = if i == k { METRIC[i] } else { 0.0 };
                let scale: f64 = 1.0
                    + (0..3)
                        .map(|j| self.s[i][j].norm() * self.s[k][j].norm())
                        .sum::<f64>();
                worst = worst.max((prod[i][k] - target).norm() / scale);
            }
        }
        worst
    }
}

/// Adjugate of a 3×3 complex matrix (transpose of the cofactor matrix).
fn adjugate(m: &Mat3) -> Mat3 {
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let cof = [
        [minor(1, 2, 1, 2), -minor(1, 2, 0, 2), minor(1, 2, 0, 1)],
        [-minor(0, 2, 1, 2), minor(0, 2, 0, 2), -minor(0, 2, 0, 1)],
        [minor(0, 1, 1, 2), -minor(0, 1, 0, 2), minor(0, 1, 0, 1)],
    ];
    let mut adj = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            adj[i][j] = cof[j][i];
        }
    }
    adj
}

/// `(A + iΩ)⁻¹` with the determinant evaluated in factored form.
///
/// The generic cofactor expansion forms `G1² a2 - G2² a1` from two terms of
/// size `G²κ`; for equal couplings and linewidths these cancel exactly and
/// the determinant collapses to `(iΩ - γ/2)(iΩ - κ/2)²`.
fn resolvent(p: &SystemParams, omega: f64) -> Result<Mat3> {
    let drift = build_drift_matrix(p)?;
    let mut m = drift.a;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += Complex64::new(0.0, omega);
    }
    let (a0, a1, a2) = (m[0][0], m[1][1], m[2][2]);
    let det = a0 * a1 * a2 + p.coupling_imbalance(a1, a2);
    let scale = a0.norm() * a1.norm() * a2.norm() + p.max_rate().powi(3);
    if !(det.norm().is_finite()) || det.norm() <= f64::MIN_POSITIVE * scale.max(1.0) {
        return Err(Error::Singular { omega });
    }
    let mut inv = adjugate(&m);
    for row in inv.iter_mut() {
        for x in row.iter_mut() {
            *x /= det;
        }
    }
    Ok(inv)
}

pub fn scattering_matrix(p: &SystemParams, omega: f64) -> Result<ScatteringMatrix> {
    let inv = resolvent(p, omega)?;
    let l = [p.gamma.sqrt(), p.kappa1.sqrt(), p.kappa2.sqrt()];
    let mut s = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = inv[i][j] * (l[i] * l[j]);
            if i == j {
                s[i][j] += 1.0;
            }
        }
    }
    Ok(ScatteringMatrix { omega, s })
}

/// Output spectral densities at one frequency.
///
/// `u` and `w` are the cavity-1 and cavity-2† rows of `s` weighted by the
/// anti-normal-ordered bath occupations `C₊ = diag(N_m+1, N₁+1, N₂)`, so that
/// `n1 + 1 = |u|²`, `n2 = |w|²` and `m = ⟨u, w⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub omega: f64,
    pub n1: f64,
    pub n2: f64,
    /// Cross density entering `⟨D1 D2⟩`, without the delay phase.
    pub m: Complex64,
    /// `n2 - n1`, evaluated without cancellation.
    pub imbalance: f64,
    pub u: [Complex64; 3],
    pub w: [Complex64; 3],
}

impl SpectralPoint {
    /// `(n1 + 1) n2 - |m|²` via the Lagrange identity over `u ∧ w`.
    pub fn gram(&self) -> f64 {
        let (u, w) = (&self.u, &self.w);
        let mut g = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                g += (u[i] * w[j] - u[j] * w[i]).norm_sqr();
            }
        }
        g
    }
}

pub fn spectral_point(p: &SystemParams, omega: f64) -> Result<SpectralPoint> {
    let s = scattering_matrix(p, omega)?.s;
    let c_plus = [p.nm + 1.0, p.n1 + 1.0, p.n2];
    let c_minus = [p.nm, p.n1, p.n2 + 1.0];

    let (r1, r2) = (s[1], s[2]);
    let mut u = [ZERO; 3];
    let mut w = [ZERO; 3];
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    let mut m = ZERO;
    for j in 0..3 {
        n1 += r1[j].norm_sqr() * c_minus[j];
        n2 += r2[j].norm_sqr() * c_plus[j];
        m += r1[j] * r2[j].conj() * c_plus[j];
        let root = c_plus[j].sqrt();
        u[j] = r1[j] * root;
        w[j] = r2[j] * root;
    }

    // n2 - n1 = |s02|²(N2+1) + N2 + Nm(|s20|² - |s10|²) + N1(|s21|² - |s11|²),
    // from the row and column identities of s η s† = η.
    let mut imbalance = s[0][2].norm_sqr() * (p.n2 + 1.0) + p.n2;
    if p.nm != 0.0 {
        imbalance += p.nm * (s[2][0].norm_sqr() - s[1][0].norm_sqr());
    }
    if p.n1 != 0.0 {
        imbalance += p.n1 * (s[2][1].norm_sqr() - s[1][1].norm_sqr());
    }

    Ok(SpectralPoint {
        omega,
        n1: clamp_non_negative(n1),
        n2: clamp_non_negative(n2),
        m,
        imbalance,
        u,
        w,
    })
}

fn clamp_non_negative(x: f64) -> f64 {
    if (-1e-14..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(g: f64) -> SystemParams {
        SystemParams::symmetric(1.0, 1e5, g).unwrap()
    }

    #[test]
    fn bare_cavities_reflect_with_minus_one_on_resonance() {
        let p = SystemParams::new(1.0, 3.0, 5.0, 0.0, 0.0).unwrap();
        let s = scattering_matrix(&p, 0.0).unwrap().s;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { -1.0 } else { 0.0 };
                assert!((s[i][j] - expected).norm() < 1e-15, "{i}{j} {:?}", s[i][j]);
            }
        }
    }

    #[test]
    fn single_port_reflection_phase() {
        let kappa = 2.0;
        let p = SystemParams::new(1.0, kappa, kappa, 0.0, 0.0).unwrap();
        let omega = 0.7;
        let s = scattering_matrix(&p, omega).unwrap().s;
        let i = Complex64::i();
        let expected = (i * omega + kappa / 2.0) / (i * omega - kappa / 2.0);
        assert!((s[1][1] - expected).norm() < 1e-14);
    }

    #[test]
    fn high_frequency_limit_is_identity() {
        let p = SystemParams::new(1.0, 1e5, 1e5, 0.0, 0.0).unwrap();
        let s = scattering_matrix(&p, 1e8 * 1e5).unwrap().s;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((s[i][j] - expected).norm() < 1e-2);
            }
        }
    }

    #[test]
    fn metric_preserved_at_strong_coupling() {
        let s = scattering_matrix(&sym(1e6), 3.7e5).unwrap();
        assert!(s.metric_defect() < 1e-10);
    }

    #[test]
    fn vacuum_in_vacuum_out() {
        let p = SystemParams::new(1.0, 1e5, 2e5, 0.0, 0.0).unwrap();
        for omega in [-3e5, 0.0, 17.0] {
            let sp = spectral_point(&p, omega).unwrap();
            assert_eq!(sp.n1, 0.0);
            assert_eq!(sp.n2, 0.0);
            assert_eq!(sp.m, ZERO);
        }
    }

    #[test]
    fn far_detuned_densities_vanish() {
        let sp = spectral_point(&sym(1e4), 1e6).unwrap();
        assert!(sp.n1 < 1e-4 && sp.n2 < 1e-4);
    }

    #[test]
    fn zero_temperature_reduction() {
        let p = SystemParams::new(2.0, 1e3, 1.5e3, 400.0, 250.0).unwrap();
        let sp = spectral_point(&p, 33.0).unwrap();
        let s = scattering_matrix(&p, 33.0).unwrap().s;
        assert!((sp.n1 - s[1][2].norm_sqr()).abs() < 1e-12 * sp.n1);
        let n2 = s[2][0].norm_sqr() + s[2][1].norm_sqr();
        assert!((sp.n2 - n2).abs() < 1e-12 * n2);
        let m = s[1][0] * s[2][0].conj() + s[1][1] * s[2][1].conj();
        assert!((sp.m - m).norm() < 1e-12 * m.norm());
        assert!((sp.imbalance - (sp.n2 - sp.n1)).abs() < 1e-9 * sp.n2);
    }

    #[test]
    fn thermal_imbalance_matches_direct_difference() {
        let p = SystemParams::new(2.0, 1e3, 1.5e3, 400.0, 250.0)
            .unwrap()
            .with_baths(3.0, 0.5, 0.25)
            .unwrap();
        let sp = spectral_point(&p, -120.0).unwrap();
        assert!((sp.imbalance - (sp.n2 - sp.n1)).abs() < 1e-9 * sp.n2.max(1.0));
        let gram_direct = (sp.n1 + 1.0) * sp.n2 - sp.m.norm_sqr();
        assert!((sp.gram() - gram_direct).abs() < 1e-8 * (sp.n1 + 1.0) * sp.n2);
    }

    #[test]
    fn structured_determinant_matches_generic_expansion() {
        let p = SystemParams::new(1.3, 40.0, 70.0, 25.0, 19.0).unwrap();
        let inv = resolvent(&p, 4.2).unwrap();
        let mut m = build_drift_matrix(&p).unwrap().a;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += Complex64::new(0.0, 4.2);
        }
        for i in 0..3 {
            for j in 0..3 {
                let e: Complex64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((e - expected).norm() < 1e-13);
            }
        }
    }
}
