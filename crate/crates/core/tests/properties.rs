use std::f64::consts::PI;

use num_complex::Complex64;
use optoent_core::approx::{
    en_large_band_strong, en_resonant_plateau, en_small_band_strong, en_small_band_weak,
    omega_opt, tau_opt, RegimeTag,
};
use optoent_core::correlators::{
    band_correlators_from, band_correlators_with, band_populations, BandOptions,
};
use optoent_core::entanglement::{log_negativity, log_negativity_covariance, tmst_from_correlators};
use optoent_core::model::{build_drift_matrix, drift_eigenvalues, is_stable_eigen};
use optoent_core::optimize::{
    en_at, maximize_en_over_tau, sweep, AxisSpec, SearchOptions, SweepOptions, SweepVariable,
};
use optoent_core::{scattering_matrix, spectral_point, Correlators, FilterSpec, SystemParams};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

fn any_params() -> impl Strategy<Value = SystemParams> {
    (
        log_uniform(1e-2, 1e2),
        log_uniform(1.0, 1e6),
        log_uniform(1.0, 1e6),
        log_uniform(1e-2, 1e7),
        0.0..2.0f64,
        0.0..10.0f64,
        0.0..10.0f64,
        0.0..10.0f64,
    )
        .prop_map(|(gamma, r1, r2, g1, x, nm, n1, n2)| {
            SystemParams::new(gamma, gamma * r1, gamma * r2, g1, g1 * x)
                .unwrap()
                .with_baths(nm, n1, n2)
                .unwrap()
        })
}

fn stable_params() -> impl Strategy<Value = SystemParams> {
    any_params().prop_filter("stable", is_stable_eigen)
}

fn symmetric_params() -> impl Strategy<Value = SystemParams> {
    (log_uniform(0.1, 10.0), log_uniform(1e3, 1e6), log_uniform(1e-2, 1e2))
        .prop_map(|(gamma, kappa, ratio)| {
            SystemParams::symmetric(gamma, gamma * kappa, gamma * kappa * ratio).unwrap()
        })
}

fn physical_correlators() -> impl Strategy<Value = Correlators> {
    (
        log_uniform(1e-4, 1e3),
        log_uniform(1e-4, 1e3),
        0.0..1.0f64,
        -PI..PI,
    )
        .prop_map(|(nn1, nn2, frac, phase)| {
            let bound = (nn1 * (nn2 + 1.0)).min((nn1 + 1.0) * nn2);
            Correlators::from_moments(nn1, nn2, Complex64::from_polar((bound * frac).sqrt(), phase))
        })
}

fn fast() -> BandOptions {
    BandOptions::with_rel_tol(1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn drift_entries(p in any_params()) {
        let d = build_drift_matrix(&p).unwrap();
        let i = Complex64::i();
        prop_assert_eq!(d.a[0][0], Complex64::new(-p.gamma / 2.0, 0.0));
        prop_assert_eq!(d.a[1][1], Complex64::new(-p.kappa1 / 2.0, 0.0));
        prop_assert_eq!(d.a[2][2], Complex64::new(-p.kappa2 / 2.0, 0.0));
        prop_assert_eq!(d.a[0][1], -i * p.g1);
        prop_assert_eq!(d.a[1][0], -i * p.g1);
        prop_assert_eq!(d.a[0][2], -i * p.g2);
        prop_assert_eq!(d.a[2][0], i * p.g2);
        prop_assert_eq!(d.a[1][2], Complex64::new(0.0, 0.0));
        prop_assert_eq!(d.a[2][1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn no_parametric_drive_is_stable(p in any_params()) {
        let q = SystemParams::new(p.gamma, p.kappa1, p.kappa2, p.g1, 0.0).unwrap();
        prop_assert!(is_stable_eigen(&q));
    }

    #[test]
    fn eigenvalue_trace(p in any_params()) {
        let sum: f64 = drift_eigenvalues(&p).iter().map(|z| z.re).sum();
        let want = -(p.gamma + p.kappa1 + p.kappa2) / 2.0;
        prop_assert!((sum - want).abs() <= 1e-10 * want.abs(), "{} vs {}", sum, want);
    }

    #[test]
    fn metric_preserved(p in stable_params(), e in -3.0..8.0f64, neg in any::<bool>()) {
        let omega = if neg { -1.0 } else { 1.0 } * p.gamma * 10f64.powf(e);
        let s = scattering_matrix(&p, omega).unwrap();
        prop_assert!(s.metric_defect() <= 1e-10, "{:e}", s.metric_defect());
    }

    #[test]
    fn densities_non_negative(p in stable_params(), e in -3.0..8.0f64, neg in any::<bool>()) {
        let omega = if neg { -1.0 } else { 1.0 } * p.gamma * 10f64.powf(e);
        let sp = spectral_point(&p, omega).unwrap();
        prop_assert!(sp.n1 >= 0.0 && sp.n2 >= 0.0);
        prop_assert!(sp.gram() >= -1e-12 * (sp.n1 + 1.0) * sp.n2.max(1.0));
    }

    #[test]
    fn symmetric_densities_are_even(p in symmetric_params(), e in -2.0..8.0f64) {
        let omega = p.gamma * 10f64.powf(e);
        let a = spectral_point(&p, omega).unwrap();
        let b = spectral_point(&p, -omega).unwrap();
        prop_assert!((a.n1 - b.n1).abs() <= 1e-10 * a.n1.abs().max(1e-300));
        prop_assert!((a.n2 - b.n2).abs() <= 1e-10 * a.n2.abs().max(1e-300));
    }

    #[test]
    fn cross_density_matches_rational_form(p in symmetric_params(), e in 0.0..1.0f64, neg in any::<bool>()) {
        let (lo, hi) = (1e-2 * p.gamma, 1e2 * p.kappa1);
        let omega = if neg { -1.0 } else { 1.0 } * lo * (hi / lo).powf(e);
        let (gamma, kappa, g) = (p.gamma, p.kappa1, p.g1);
        let k2 = kappa * kappa + 4.0 * omega * omega;
        let want = (Complex64::new(8.0 * g * g * kappa, 0.0) + Complex64::new(gamma, 2.0 * omega) * k2)
            / (-(gamma * gamma + 4.0 * omega * omega) * k2 * k2 / (8.0 * g * g * kappa));
        let m = spectral_point(&p, omega).unwrap().m;
        prop_assert!((m - want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn closed_and_covariance_routes_agree(c in physical_correlators()) {
        let (_, closed) = log_negativity(&c).unwrap();
        let cov = log_negativity_covariance(&c).unwrap();
        prop_assert!((closed.en - cov.en).abs() < 1e-9);
        let a = c.nn1 + c.nn2 + 1.0;
        let direct = (-(a - ((c.nn1 - c.nn2).powi(2) + 4.0 * c.m.norm_sqr()).sqrt()).ln()).max(0.0);
        prop_assert!((closed.en - direct).abs() < 1e-9);
    }

    #[test]
    fn negativity_monotone_in_cross_modulus(c in physical_correlators(), f in 0.0..1.0f64) {
        let smaller = Correlators::from_moments(c.nn1, c.nn2, c.m * f);
        let big = log_negativity(&c).unwrap().1.en;
        let small = log_negativity(&smaller).unwrap().1.en;
        prop_assert!(small <= big + 1e-12);
    }

    #[test]
    fn negativity_ignores_cross_phase(c in physical_correlators(), phi in -PI..PI) {
        let rotated = Correlators::from_moments(c.nn1, c.nn2, c.m * Complex64::from_polar(1.0, phi));
        let a = log_negativity_covariance(&c).unwrap().en;
        let b = log_negativity_covariance(&rotated).unwrap().en;
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((log_negativity(&c).unwrap().1.en - log_negativity(&rotated).unwrap().1.en).abs() < 1e-12);
    }

    #[test]
    fn tmst_sum_identity(c in physical_correlators()) {
        let t = tmst_from_correlators(&c).unwrap();
        let lhs = (t.nbar1 + t.nbar2 + 1.0) * (2.0 * t.r12).cosh();
        prop_assert!((lhs - t.a_sum).abs() <= 1e-9 * t.a_sum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn band_moments_are_physical(
        p in stable_params(),
        w in log_uniform(1e-3, 1e2),
        s in log_uniform(1e-2, 10.0),
    ) {
        let k = p.kappa1.max(p.kappa2);
        let f = FilterSpec::new(w * p.gamma, s * k).unwrap();
        let c = band_correlators_with(&p, &f, &fast()).unwrap();
        prop_assert!(c.m.norm_sqr() <= c.nn1 * (c.nn2 + 1.0) * (1.0 + 1e-9));
        prop_assert!(c.gram >= 0.0);
    }

    #[test]
    fn delay_only_touches_cross_moment(
        p in stable_params(),
        w in log_uniform(1e-2, 1e2),
        tau in -1e-2..1e-2f64,
    ) {
        let f = FilterSpec::new(w * p.gamma, p.kappa1).unwrap();
        let a = band_correlators_with(&p, &f, &fast()).unwrap();
        let b = band_correlators_with(&p, &f.with_delay(tau / p.kappa1), &fast()).unwrap();
        prop_assert_eq!(a.nn1, b.nn1);
        prop_assert_eq!(a.nn2, b.nn2);
        prop_assert_eq!(a.imbalance, b.imbalance);
    }

    #[test]
    fn small_band_cross_modulus_ignores_delay(
        p in symmetric_params(),
        w in 0.0..1.0f64,
        st in -1e-2..1e-2f64,
    ) {
        let sigma = p.kappa1 / 1e4;
        let f = FilterSpec::new(w * p.kappa1, sigma).unwrap();
        let opts = BandOptions::default();
        let pops = band_populations(&p, &f, &opts).unwrap();
        let m0 = band_correlators_from(&p, &f, &pops, &opts).unwrap().m.norm();
        let mt = band_correlators_from(&p, &f.with_delay(st / sigma), &pops, &opts).unwrap().m.norm();
        prop_assert!((mt - m0).abs() < 1e-3 * m0);
    }

    #[test]
    fn narrow_band_tends_to_midpoint(p in stable_params(), w in log_uniform(1e-1, 1e2)) {
        let omega = w * p.gamma;
        let sp = spectral_point(&p, omega).unwrap();
        let err = |sigma: f64| {
            let f = FilterSpec::new(omega, sigma).unwrap();
            let c = band_correlators_with(&p, &f, &BandOptions::with_rel_tol(1e-12)).unwrap();
            ((c.nn2 - sp.n2) / sp.n2).abs()
        };
        let s = 1e-2 * p.gamma;
        let (e1, e2) = (err(s), err(s / 2.0));
        // second order: halving σ divides the error by about four
        prop_assert!(e2 <= 0.3 * e1 || e2 < 1e-11, "{:e} {:e}", e1, e2);
    }
}

fn scaled(p: &SystemParams, l: f64) -> SystemParams {
    SystemParams::new(p.gamma * l, p.kappa1 * l, p.kappa2 * l, p.g1 * l, p.g2 * l).unwrap()
}

#[test]
fn approximations_are_scale_invariant() {
    let cases = [
        (RegimeTag::ResonantPlateau, SystemParams::symmetric(1.0, 1e5, 1e4).unwrap(), 2.0, 10.0),
        (RegimeTag::SmallBandWeak, SystemParams::symmetric(1.0, 1e5, 1e4).unwrap(), 156.5, 10.0),
        (RegimeTag::SmallBandStrong, SystemParams::symmetric(1.0, 1e5, 1e6).unwrap(), 1e4, 10.0),
        (RegimeTag::LargeBandStrong, SystemParams::symmetric(1.0, 1e5, 1e6).unwrap(), 3e5, 1e5),
    ];
    for (regime, p, w, s) in cases {
        let f = FilterSpec::new(w, s).unwrap();
        let base = optoent_core::approx::en_approx(regime, &p, &f).value;
        let w_opt = omega_opt(&p, &f, regime).value;
        for l in [0.5, 2.0, 10.0] {
            let q = scaled(&p, l);
            let g = FilterSpec::new(w * l, s * l).unwrap();
            let v = optoent_core::approx::en_approx(regime, &q, &g).value;
            assert!((v - base).abs() <= 1e-12 * base.abs(), "{regime}: {v} vs {base}");
            let wq = omega_opt(&q, &g, regime).value;
            // the printed small-band-strong optimum has units of rate squared
            let power = if regime == RegimeTag::SmallBandStrong { 2 } else { 1 };
            let want = l.powi(power) * w_opt;
            assert!((wq - want).abs() <= 1e-12 * wq, "{regime}");
        }
        let t = tau_opt(&p, w).value;
        assert!((tau_opt(&scaled(&p, 2.0), 2.0 * w).value - t / 2.0).abs() <= 1e-12 * t);
    }
    let p = SystemParams::symmetric(1.0, 1e5, 1e4).unwrap();
    let f = FilterSpec::new(1.0, 10.0).unwrap();
    assert_eq!(en_resonant_plateau(&p, &f).value, PI / 20.0);
}

/// Offset of the true stationary point from `w`, relative to `w`, from one
/// Newton step on central differences.
fn newton_offset(f: impl Fn(f64) -> f64, w: f64) -> f64 {
    let h = 1e-3 * w;
    let d1 = (f(w + h) - f(w - h)) / (2.0 * h);
    let d2 = (f(w + h) - 2.0 * f(w) + f(w - h)) / (h * h);
    (d1 / d2).abs() / w
}

#[test]
fn weak_coupling_optimum_is_stationary() {
    let p = SystemParams::symmetric(1.0, 1e5, 1e4).unwrap();
    let f = FilterSpec::new(0.0, 10.0).unwrap();
    let w = omega_opt(&p, &f, RegimeTag::SmallBandWeak).value;
    let off = newton_offset(|x| en_small_band_weak(&p, &f.with_center(x)).value, w);
    assert!(off <= 1e-3, "stationary point is {:.2}% away", 100.0 * off);
}

#[test]
fn strong_coupling_optimum_is_stationary() {
    let p = SystemParams::symmetric(1.0, 1e5, 1e6).unwrap();
    let f = FilterSpec::new(0.0, 10.0).unwrap();
    let w = omega_opt(&p, &f, RegimeTag::SmallBandStrong).value;
    let off = newton_offset(|x| en_small_band_strong(&p, &f.with_center(x)).value, w);
    assert!(off <= 1e-3, "stationary point is {:.2}% away", 100.0 * off);
}

#[test]
fn large_band_optimum_is_stationary() {
    let p = SystemParams::symmetric(1.0, 1e5, 1e6).unwrap();
    let f = FilterSpec::new(0.0, 1e5).unwrap();
    let w = omega_opt(&p, &f, RegimeTag::LargeBandStrong).value;
    let off = newton_offset(|x| en_large_band_strong(&p, &f.with_center(x)).value, w);
    assert!(off <= 1e-3, "stationary point is {:.2}% away", 100.0 * off);
}

#[test]
fn optimal_delay_positive_and_bounded() {
    let kappa = 1e5;
    for g in [2e5, 1e6, 1e7] {
        let p = SystemParams::symmetric(1.0, kappa, g).unwrap();
        for i in 0..200 {
            let w = kappa / 8f64.sqrt() * (1.0 + 0.1 * i as f64);
            let t = tau_opt(&p, w).value;
            assert!(t > 0.0);
        }
    }
    let p = SystemParams::symmetric(1.0, kappa, 1e6).unwrap();
    for i in 0..=100 {
        let t = tau_opt(&p, 7.0 * kappa * i as f64 / 100.0).value;
        assert!(t > 0.0 && t < 1.0 / kappa, "{t:e}");
    }
}

#[test]
fn optimizer_never_below_seed() {
    let p = SystemParams::symmetric(1.0, 1e5, 1e6).unwrap();
    for w in [0.0, 3e4, 5e4, 1.5e5] {
        let f = FilterSpec::new(w, 1e5).unwrap();
        let r = maximize_en_over_tau(&p, &f, None, None, &SearchOptions::default()).unwrap();
        assert!(r.value >= r.seed_value.unwrap() - 1e-12);
        assert_eq!(r.analytic_seed, Some(tau_opt(&p, w).value));
    }
}

#[test]
fn cross_modulus_and_negativity_peak_together() {
    let p = SystemParams::symmetric(1.0, 1e5, 1e6).unwrap();
    let f = FilterSpec::new(8e4, 1e5).unwrap();
    let opts = BandOptions::default();
    let pops = band_populations(&p, &f, &opts).unwrap();
    let taus: Vec<f64> = (0..64).map(|i| 4e-7 * i as f64 / 63.0).collect();
    let (mut best_m, mut best_e) = ((0, 0.0), (0, 0.0));
    for (i, &t) in taus.iter().enumerate() {
        let c = band_correlators_from(&p, &f.with_delay(t), &pops, &opts).unwrap();
        let e = log_negativity(&c).unwrap().1.en;
        if c.m.norm() > best_m.1 {
            best_m = (i, c.m.norm());
        }
        if e > best_e.1 {
            best_e = (i, e);
        }
    }
    assert_eq!(best_m.0, best_e.0);
}

#[test]
fn sweeps_are_bitwise_reproducible() {
    let p = SystemParams::symmetric(1.0, 1e5, 1e4).unwrap();
    let f = FilterSpec::new(0.0, 10.0).unwrap();
    let axis = AxisSpec {
        variable: SweepVariable::Omega,
        from: 1.0,
        to: 1e3,
        points: 16,
        log: true,
    };
    let opts = SweepOptions::default();
    let a = sweep(&p, &f, &axis, &opts).unwrap();
    let b = sweep(&p, &f, &axis, &opts).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sweep(&p, &f, &axis, &opts).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, single);
    for (row, &w) in a.rows.iter().zip(&a.axis) {
        assert_eq!(row.omega, w);
        let v = row.values.as_ref().unwrap();
        assert!(v.en_closed >= 0.0);
        assert_eq!(v.en_closed.to_bits(), en_at(&p, &f.with_center(w), &BandOptions::default()).unwrap().to_bits());
    }
}
