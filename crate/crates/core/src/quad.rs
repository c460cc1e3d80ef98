//! Error-controlled adaptive quadrature and certified lattice sums.
//!
//! Integrals use a globally adaptive 7/15-point Gauss–Kronrod pair.
//! Subdivision always starts from the integrand's breakpoints, so kinks
//! of piecewise functions never sit inside an initial panel.

use std::collections::BinaryHeap;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcexpr::{FrequencyFunction, Interval};

/// Default maximum bisection depth of any panel.
pub const DEFAULT_MAX_DEPTH: usize = 60;

/// Hard cap on the number of panels per integral.
const MAX_PANELS: usize = 200_000;

/// A nonnegative estimate with a nonnegative error bound.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundWithError {
    pub estimate: f64,
    pub error: f64,
}

impl BoundWithError {
    pub const ZERO: BoundWithError = BoundWithError { estimate: 0.0, error: 0.0 };

    pub fn new(estimate: f64, error: f64) -> Self {
        debug_assert!(error >= 0.0);
        BoundWithError { estimate, error }
    }

    pub fn exact(value: f64) -> Self {
        BoundWithError { estimate: value, error: 0.0 }
    }

    /// The value of record.
    pub fn certified_upper(&self) -> f64 {
        self.estimate + self.error
    }

    pub fn scale(self, s: f64) -> Self {
        BoundWithError { estimate: self.estimate * s, error: self.error * s.abs() }
    }

    /// Apply a monotone nondecreasing map, keeping the bound conservative.
    pub fn map_monotone(self, f: impl Fn(f64) -> f64) -> Self {
        let est = f(self.estimate);
        let up = f(self.certified_upper());
        BoundWithError { estimate: est, error: (up - est).max(0.0) }
    }
}

impl Add for BoundWithError {
    type Output = BoundWithError;
    fn add(self, o: BoundWithError) -> BoundWithError {
        BoundWithError { estimate: self.estimate + o.estimate, error: self.error + o.error }
    }
}

/// Signed integral estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
///
/// With `absolute` set, the rule integrates `|f|`. A sign change among
/// the nodes or endpoints marks a kink of `|f|` inside the panel; the
/// error is then floored by the panel's whole mass, which forces
/// bisection to close in on the kink.
fn qk15(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64, absolute: bool) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = [0.0f64; 15];
    nodes[7] = f(center)?;
    for j in 0..7 {
        let dx = half * XGK[j];
        nodes[j] = f(center - dx)?;
        nodes[14 - j] = f(center + dx)?;
    }
    let sign_change = absolute && {
        let ends = [f(a)?, f(b)?];
        let all = nodes.iter().chain(ends.iter());
        all.clone().any(|v| *v > 0.0) && all.into_iter().any(|v| *v < 0.0)
    };
    if absolute {
        nodes.iter_mut().for_each(|v| *v = v.abs());
    }
    let (fv1, fv2): ([f64; 7], [f64; 7]) = {
        let mut l = [0.0; 7];
        let mut r = [0.0; 7];
        for j in 0..7 {
            l[j] = nodes[j];
            r[j] = nodes[14 - j];
        }
        (l, r)
    };
    let fc = nodes[7];
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    for j in 0..7 {
        resk += WGK[j] * (fv1[j] + fv2[j]);
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (fv1[j] + fv2[j]);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = err.max(resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5)));
    }
    if sign_change {
        err = err.max(result.abs());
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((result, err))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: usize,
    /// insertion index, breaks ties deterministically
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Adaptive integration settings.
#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    pub tol: f64,
    pub max_depth: usize,
}

impl QuadSettings {
    pub fn new(tol: f64) -> Self {
        QuadSettings { tol, max_depth: DEFAULT_MAX_DEPTH }
    }
}

/// Integrate `f` over `[a, b]`, splitting first at the given breakpoints.
pub fn integrate(
    f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: QuadSettings,
) -> Result<Integral> {
    integrate_impl(f, a, b, breakpoints, settings, false)
}

/// Integrate `|f|` over `[a, b]`, with kink-aware error estimates.
pub fn integrate_abs(
    f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: QuadSettings,
) -> Result<Integral> {
    integrate_impl(f, a, b, breakpoints, settings, true)
}

fn integrate_impl(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: QuadSettings,
    absolute: bool,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(crate::error::domain("integrate", format!("infinite limits [{a}, {b}]")));
    }
    if !(settings.tol > 0.0) {
        return Err(crate::error::domain("integrate", format!("tolerance {} must be positive", settings.tol)));
    }
    if a >= b {
        return Ok(Integral::default());
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|x| *x > a && *x < b));
    cuts.push(b);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    for w in cuts.windows(2) {
        let (value, error) = qk15(&mut f, w[0], w[1], absolute)?;
        heap.push(Panel { a: w[0], b: w[1], value, error, depth: 0, seq });
        seq += 1;
    }
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    let mut iterations = 0usize;
    loop {
        if total_err <= settings.tol {
            // confirm against drift of the running total
            total_err = heap.iter().map(|p| p.error).sum();
            if total_err <= settings.tol {
                break;
            }
        }
        iterations += 1;
        if iterations % 256 == 0 {
            total_err = heap.iter().map(|p| p.error).sum();
        }
        let worst = heap.pop().expect("nonempty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= settings.max_depth || mid <= worst.a || mid >= worst.b || heap.len() > MAX_PANELS {
            return Err(Error::NonConvergence { a: worst.a, b: worst.b, depth: worst.depth });
        }
        let (v1, e1) = qk15(&mut f, worst.a, mid, absolute)?;
        let (v2, e2) = qk15(&mut f, mid, worst.b, absolute)?;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, depth: worst.depth + 1, seq });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, depth: worst.depth + 1, seq: seq + 1 });
        seq += 2;
        total_err += e1 + e2 - worst.error;
    }
    // canonical left-to-right reduction
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).collect::<CompensatedSum>().total();
    let error = panels.iter().map(|p| p.error).collect::<CompensatedSum>().total();
    Ok(Integral { value, error })
}

/// `∫ₐᵇ |h⁽ᵈ⁾(ξ)| dξ` over the part of `[a, b]` inside the support of `h`.
pub fn l1_norm_deriv(h: &FrequencyFunction, d: usize, interval: Interval, tol: f64) -> Result<BoundWithError> {
    l1_norm_deriv_with(h, d, interval, QuadSettings::new(tol))
}

pub fn l1_norm_deriv_with(
    h: &FrequencyFunction,
    d: usize,
    interval: Interval,
    settings: QuadSettings,
) -> Result<BoundWithError> {
    if d > 3 {
        return Err(crate::error::domain("l1_norm_deriv", format!("derivative order {d} > 3")));
    }
    let region = h.support().intersect_interval(interval);
    if region.is_empty() {
        return Ok(BoundWithError::ZERO);
    }
    if !region.is_bounded() {
        return Err(Error::Unsupported(format!(
            "L¹ norm over unbounded region {:?}; clip the interval first",
            region.parts()
        )));
    }
    let total_len: f64 = region.parts().iter().map(Interval::len).sum();
    let mut value = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    for part in region.parts() {
        if part.len() == 0.0 {
            continue;
        }
        let share = QuadSettings { tol: settings.tol * part.len() / total_len, ..settings };
        let r = integrate_abs(|x| Ok(h.evaluate(x)?.deriv(d)), part.lo, part.hi, h.breakpoints(), share)?;
        value.add(r.value);
        error.add(r.error);
    }
    Ok(BoundWithError::new(value.total().max(0.0), error.total()))
}

/// As [`l1_norm_deriv`] with a tolerance relative to the norm itself.
///
/// A coarse pass fixes the scale; the absolute tolerance of the coarse pass
/// is loosened until it converges.
pub fn l1_norm_deriv_rel(h: &FrequencyFunction, d: usize, interval: Interval, rel: f64) -> Result<BoundWithError> {
    let mut coarse_tol = 1e-2;
    let rough = loop {
        match l1_norm_deriv(h, d, interval, coarse_tol) {
            Ok(r) => break r.certified_upper(),
            Err(Error::NonConvergence { .. }) if coarse_tol < 1e12 => coarse_tol *= 100.0,
            Err(e) => return Err(e),
        }
    };
    if rough == 0.0 {
        return Ok(BoundWithError::ZERO);
    }
    l1_norm_deriv(h, d, interval, rel * rough)
}

/// Summation of `term(l)` over `l ≠ 0`, in the order `1, −1, 2, −2, …`.
///
/// `tail(L)` must return a certified bound on `Σ_{|l| ≥ L} term(l)` once
/// one is available, and `None` before. Summation stops at the first `L`
/// whose tail bound is below `tol`; that bound is added to the error.
pub fn shift_sum(
    mut term: impl FnMut(i64) -> Result<BoundWithError>,
    mut tail: impl FnMut(i64) -> Option<f64>,
    tol: f64,
) -> Result<LatticeSum> {
    const NEGLIGIBLE_BY: i64 = 64;
    let mut est = CompensatedSum::new();
    let mut err = CompensatedSum::new();
    let mut quiet_run = 0;
    let mut l = 1i64;
    loop {
        if let Some(t) = tail(l) {
            if t < tol {
                err.add(t);
                return Ok(LatticeSum {
                    total: BoundWithError::new(est.total(), err.total()),
                    last_l: l - 1,
                    tail: t,
                });
            }
        }
        let a = term(l)?;
        let b = term(-l)?;
        for t in [a, b] {
            est.add(t.estimate);
            err.add(t.error);
        }
        // without an envelope, accept two consecutive vanishing shells
        let shell = a.certified_upper() + b.certified_upper();
        if shell == 0.0 || shell <= f64::EPSILON * 1e-3 * est.total() {
            quiet_run += 1;
        } else {
            quiet_run = 0;
        }
        if l >= NEGLIGIBLE_BY {
            if quiet_run >= 2 {
                return Ok(LatticeSum { total: BoundWithError::new(est.total(), err.total()), last_l: l, tail: 0.0 });
            }
            return Err(Error::MissingEnvelope(l));
        }
        l += 1;
    }
}

/// Result of [`shift_sum`] with truncation metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub total: BoundWithError,
    /// Largest `|l|` summed explicitly.
    pub last_l: i64,
    /// Certified tail bound added to the error.
    pub tail: f64,
}
