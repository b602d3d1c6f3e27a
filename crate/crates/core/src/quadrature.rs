//! Globally adaptive 21-point Gauss-Kronrod quadrature for small
//! vector-valued integrands.
//!
//! All components share one subdivision. Components are gathered into
//! tolerance groups (for example the real and imaginary part of one complex
//! quantity); a group converges when its summed error estimate is below
//! `rel_tol` times the Euclidean norm of the group's integrals, below
//! `abs_tol`, or has hit the round-off floor of the rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const MIN_REL_TOL: f64 = 1e-14;
pub const MAX_REL_TOL: f64 = 1e-2;
pub const DEFAULT_MAX_PANELS: usize = 1 << 20;

// Kronrod abscissae (descending), Kronrod weights, and the weights of the
// embedded 10-point Gauss rule, which uses the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_814_525_240,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    /// Absolute error accepted for every group, for integrands whose
    /// evaluation is itself only accurate to an absolute level.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&self.rel_tol) {
            return Err(Error::InvalidTolerance(self.rel_tol));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be finite and >= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

type Gk<const N: usize> = ([f64; N], [f64; N], [f64; N]);

fn gauss_kronrod<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<Gk<N>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [[0.0; N]; 21];
    fv[10] = f(center)?;
    for j in 0..10 {
        let dx = half * XGK[j];
        fv[j] = f(center - dx)?;
        fv[20 - j] = f(center + dx)?;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut abs = [0.0; N];
    for k in 0..N {
        let fc = fv[10][k];
        let mut kronrod = WGK[10] * fc;
        let mut gauss = 0.0;
        let mut resabs = WGK[10] * fc.abs();
        for j in 0..10 {
            let pair = fv[j][k] + fv[20 - j][k];
            kronrod += WGK[j] * pair;
            resabs += WGK[j] * (fv[j][k].abs() + fv[20 - j][k].abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * pair;
            }
        }
        let mean = 0.5 * kronrod;
        let mut resasc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv[j][k] - mean).abs() + (fv[20 - j][k] - mean).abs());
        }
        let h = half.abs();
        value[k] = kronrod * half;
        abs[k] = resabs * h;
        error[k] = rescale_error((kronrod - gauss) * half, resabs * h, resasc * h);
    }
    Ok((value, error, abs))
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

struct Totals<const N: usize> {
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
}

fn group_targets<const N: usize>(
    totals: &Totals<N>,
    groups: &[usize; N],
    n_groups: usize,
    opts: &QuadOptions,
) -> (Vec<f64>, Vec<f64>) {
    let mut norm_sq = vec![0.0; n_groups];
    let mut abs = vec![0.0; n_groups];
    let mut err = vec![0.0; n_groups];
    for k in 0..N {
        norm_sq[groups[k]] += totals.value[k] * totals.value[k];
        abs[groups[k]] += totals.abs[k];
        err[groups[k]] += totals.error[k];
    }
    let targets = (0..n_groups)
        .map(|g| {
            (opts.rel_tol * norm_sq[g].sqrt())
                .max(100.0 * f64::EPSILON * abs[g])
                .max(opts.abs_tol)
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    (targets, err)
}

fn priority<const N: usize>(error: &[f64; N], groups: &[usize; N], targets: &[f64]) -> f64 {
    (0..N)
        .map(|k| error[k] / targets[groups[k]])
        .fold(0.0, f64::max)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the panels
/// delimited by the sorted breakpoints.
pub fn integrate<const N: usize, F>(
    f: F,
    breaks: &[f64],
    groups: &[usize; N],
    opts: &QuadOptions,
) -> Result<Integral<N>>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    opts.validate()?;
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let n_groups = groups.iter().copied().max().map_or(0, |g| g + 1);

    let mut initial = Vec::with_capacity(breaks.len() - 1);
    let mut totals = Totals {
        value: [0.0; N],
        error: [0.0; N],
        abs: [0.0; N],
    };
    for w in breaks.windows(2) {
        let (value, error, abs) = gauss_kronrod(&f, w[0], w[1])?;
        for k in 0..N {
            totals.value[k] += value[k];
            totals.error[k] += error[k];
            totals.abs[k] += abs[k];
        }
        initial.push((w[0], w[1], value, error, abs));
    }
    let mut evaluations = 21 * initial.len();
    let (targets, _) = group_targets(&totals, groups, n_groups, opts);

    let mut heap = BinaryHeap::with_capacity(initial.len() * 4);
    for (a, b, value, error, abs) in initial {
        heap.push(Panel {
            a,
            b,
            value,
            error,
            abs,
            priority: priority(&error, groups, &targets),
        });
    }
    let mut finished: Vec<Panel<N>> = Vec::new();

    loop {
        let (targets, err) = group_targets(&totals, groups, n_groups, opts);
        let converged = (0..n_groups).all(|g| err[g] <= targets[g]);
        if converged || heap.is_empty() || heap.len() + finished.len() >= opts.max_panels {
            // Recompute totals exactly before the final verdict.
            let mut panels: Vec<Panel<N>> = heap.into_vec();
            panels.extend(finished);
            panels.sort_by(|x, y| x.a.total_cmp(&y.a));
            let mut value = [0.0; N];
            let mut error = [0.0; N];
            for k in 0..N {
                value[k] = neumaier_sum(panels.iter().map(|p| p.value[k]));
                error[k] = panels.iter().map(|p| p.error[k]).sum();
            }
            if !converged {
                let (worst, target) = (0..n_groups)
                    .map(|g| (err[g], targets[g]))
                    .max_by(|x, y| (x.0 / x.1).total_cmp(&(y.0 / y.1)))
                    .unwrap_or((0.0, 0.0));
                return Err(Error::NonConvergence {
                    estimate: worst,
                    target,
                    panels: panels.len(),
                });
            }
            return Ok(Integral {
                value,
                error,
                panels: panels.len(),
                evaluations,
            });
        }

        let Some(panel) = heap.pop() else { unreachable!() };
        let mid = 0.5 * (panel.a + panel.b);
        if !(panel.a < mid && mid < panel.b) {
            finished.push(panel);
            continue;
        }
        let left = gauss_kronrod(&f, panel.a, mid)?;
        let right = gauss_kronrod(&f, mid, panel.b)?;
        evaluations += 42;
        for k in 0..N {
            totals.value[k] += left.0[k] + right.0[k] - panel.value[k];
            totals.error[k] += left.1[k] + right.1[k] - panel.error[k];
            totals.abs[k] += left.2[k] + right.2[k] - panel.abs[k];
        }
        for (a, b, (value, error, abs)) in [(panel.a, mid, left), (mid, panel.b, right)] {
            heap.push(Panel {
                a,
                b,
                value,
                error,
                abs,
                priority: priority(&error, groups, &targets),
            });
        }
    }
}

/// Breakpoints over `[lo, hi]` that resolve a structure of width `feature`
/// centred on zero: a split at zero, first panels of width `feature / 10`,
/// doubling outward. Without zero in the interval only the endpoints are
/// returned.
pub fn graded_breakpoints(lo: f64, hi: f64, feature: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    if lo <= 0.0 && 0.0 <= hi && feature > 0.0 {
        let first = feature / 10.0;
        let mut neg = Vec::new();
        let mut x = first;
        while -x > lo {
            neg.push(-x);
            x *= 2.0;
        }
        pts.extend(neg.into_iter().rev());
        if lo < 0.0 && 0.0 < hi {
            pts.push(0.0);
        }
        let mut x = first;
        while x < hi {
            pts.push(x);
            x *= 2.0;
        }
    }
    pts.push(hi);
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Integral<1>> {
        integrate(|x| Ok([f(x)]), &[lo, hi], &[0], &QuadOptions::with_rel_tol(tol))
    }

    #[test]
    fn polynomial_is_exact() {
        let r = scalar(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, 1e-12).unwrap();
        assert!((r.value[0] - 13.5).abs() < 1e-13);
        assert_eq!(r.panels, 1);
    }

    #[test]
    fn exponential() {
        let r = scalar(f64::exp, 0.0, 3.0, 1e-12).unwrap();
        let exact = 3f64.exp() - 1.0;
        assert!((r.value[0] - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn narrow_peak_needs_subdivision() {
        let w = 1e-3;
        let r = scalar(|x| w / (x * x + w * w), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 / w).atan();
        assert!((r.value[0] - exact).abs() < 1e-9 * exact);
        assert!(r.panels > 1);
    }

    #[test]
    fn groups_converge_independently() {
        // Component 1 is tiny next to component 0 but has its own group.
        let r = integrate(
            |x: f64| Ok([1e12 * (-x * x).exp(), 1e-6 * x.cos()]),
            &[0.0, 2.0],
            &[0, 1],
            &QuadOptions::with_rel_tol(1e-12),
        )
        .unwrap();
        let exact = 1e-6 * 2f64.sin();
        assert!((r.value[1] - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn rejects_unreachable_tolerance() {
        assert!(matches!(
            scalar(f64::exp, 0.0, 1.0, 1e-20),
            Err(Error::InvalidTolerance(_))
        ));
        assert!(matches!(
            scalar(f64::exp, 0.0, 1.0, 0.5),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn panel_budget_exhaustion_reports_estimate() {
        let opts = QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_panels: 4,
        };
        let err = integrate(|x: f64| Ok([(1.0 / x).sin()]), &[1e-6, 1.0], &[0], &opts).unwrap_err();
        match err {
            Error::NonConvergence { estimate, target, panels } => {
                assert!(estimate > target);
                assert_eq!(panels, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn integrand_errors_propagate() {
        let err = integrate(
            |x: f64| {
                if x > 0.5 {
                    Err(Error::Singular { omega: x })
                } else {
                    Ok([x])
                }
            },
            &[0.0, 1.0],
            &[0],
            &QuadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn graded_breakpoints_bracket_zero() {
        let pts = graded_breakpoints(-5.0, 3.0, 1.0);
        assert_eq!(pts.first(), Some(&-5.0));
        assert_eq!(pts.last(), Some(&3.0));
        assert!(pts.contains(&0.0));
        assert!(pts.contains(&0.1) && pts.contains(&-0.1));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));

        let edge = graded_breakpoints(0.0, 10.0, 1.0);
        assert_eq!(edge[0], 0.0);
        assert_eq!(edge[1], 0.1);

        assert_eq!(graded_breakpoints(2.0, 3.0, 1.0), vec![2.0, 3.0]);
    }
}
