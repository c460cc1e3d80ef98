//! Numerical evaluation of the frame kernel, by a time-domain lattice sum
//! and by its Poisson-summed frequency form, for spot checks of the
//! kernel decay estimates.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::czconst::LatticeTail;
use crate::error::{domain, Error, Result};
use crate::funcexpr::{FrequencyFunction, Interval};
use crate::quad::{integrate, l1_norm_deriv_rel, QuadSettings};

/// A kernel value with its imaginary part and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    /// Imaginary part; zero up to roundoff for real kernels.
    pub imaginary: f64,
    /// Quadrature error plus certified truncation remainder.
    pub error: f64,
}

/// Parameters of a kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub x: f64,
    pub y: f64,
    pub j_min: i32,
    pub j_max: i32,
    pub k_truncation: i64,
    pub l_truncation: i64,
    pub tol: f64,
}

impl KernelQuery {
    pub fn validate(&self) -> Result<()> {
        if self.j_min > self.j_max {
            return Err(Error::Config(format!("j_min {} exceeds j_max {}", self.j_min, self.j_max)));
        }
        if self.k_truncation < 1 || self.l_truncation < 1 {
            return Err(Error::Config("truncations must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// Finite region outside which `|f|` integrates to at most `tol`, plus that tail mass.
fn effective_region(f: &FrequencyFunction, tol: f64) -> Result<(Vec<Interval>, f64)> {
    if f.support().is_bounded() {
        return Ok((f.support().parts().to_vec(), 0.0));
    }
    let env = f
        .envelope()
        .ok_or_else(|| Error::Unsupported("unbounded function without a decay envelope".into()))?;
    // two-sided Gaussian tail: 2∫_R^∞ a e^{−bξ²} ≤ a e^{−bR²}/(bR)
    let tail = |r: f64| env.amplitude * (-env.rate * r * r).exp() / (env.rate * r);
    let mut r = env.onset.max(1.0);
    while tail(r) > tol {
        r *= 1.25;
    }
    let clip = Interval::new(-r, r);
    let parts = f.support().intersect_interval(clip).parts().to_vec();
    Ok((parts, tail(r)))
}

/// `∫ f(ξ)·w(ξ) dξ` for a weight with `|w| ≤ 1`, over the effective region.
fn weighted_integral(f: &FrequencyFunction, w: impl Fn(f64) -> f64, tol: f64) -> Result<(f64, f64)> {
    let (parts, tail) = effective_region(f, tol / 2.0)?;
    let total_len: f64 = parts.iter().map(Interval::len).sum();
    let mut value = 0.0;
    let mut error = tail;
    for iv in parts.iter().filter(|iv| iv.len() > 0.0) {
        let s = QuadSettings::new(tol / 2.0 * iv.len() / total_len);
        let r = integrate(|x| Ok(f.value(x)? * w(x)), iv.lo, iv.hi, f.breakpoints(), s)?;
        value += r.value;
        error += r.error;
    }
    Ok((value, error))
}

/// Real part of `∫ f(ξ) e^{2πiξx} dξ`; a cosine integral.
pub fn inverse_transform(f: &FrequencyFunction, x: f64, tol: f64) -> Result<f64> {
    Ok(inverse_transform_complex(f, x, tol)?.value)
}

/// `∫ f(ξ) e^{2πiξx} dξ` with both parts.
pub fn inverse_transform_complex(f: &FrequencyFunction, x: f64, tol: f64) -> Result<KernelValue> {
    if f.is_identically_zero() {
        return Ok(KernelValue { value: 0.0, imaginary: 0.0, error: 0.0 });
    }
    let w = 2.0 * PI * x;
    let (re, e1) = weighted_integral(f, |t| (w * t).cos(), tol / 2.0)?;
    let (im, e2) = weighted_integral(f, |t| (w * t).sin(), tol / 2.0)?;
    Ok(KernelValue { value: re, imaginary: im, error: e1 + e2 })
}

/// Constant `c` with `|f̌(t)| ≤ c/|t|³`, from `‖f⁽³⁾‖₁/(2π)³`.
pub fn cubic_time_decay(f: &FrequencyFunction, tol: f64) -> Result<f64> {
    if f.is_identically_zero() {
        return Ok(0.0);
    }
    let (parts, tail) = effective_region(f, tol)?;
    let mut total = tail;
    for iv in parts {
        total += l1_norm_deriv_rel(f, 3, iv, 1e-8)?.certified_upper();
    }
    Ok(total / (2.0 * PI).powi(3))
}

/// A time-domain function with a cubic decay constant and a value cache.
pub struct TimeFunction<'a> {
    eval: Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>,
    /// `|f(t)| ≤ decay/|t|³`.
    pub decay: f64,
    cache: Mutex<HashMap<u64, f64>>,
}

impl<'a> TimeFunction<'a> {
    pub fn new(eval: impl Fn(f64) -> Result<f64> + Sync + 'a, decay: f64) -> Self {
        TimeFunction { eval: Box::new(eval), decay, cache: Mutex::new(HashMap::new()) }
    }

    /// The inverse transform of `f`, evaluated by quadrature to `tol`.
    pub fn from_frequency(f: &'a FrequencyFunction, tol: f64) -> Result<Self> {
        let decay = cubic_time_decay(f, tol)?;
        Ok(TimeFunction::new(move |t| inverse_transform(f, t, tol), decay))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        if let Some(v) = self.cache.lock().expect("cache lock").get(&t.to_bits()) {
            return Ok(*v);
        }
        let v = (self.eval)(t)?;
        self.cache.lock().expect("cache lock").insert(t.to_bits(), v);
        Ok(v)
    }

    /// Evaluate many arguments in parallel, filling the cache.
    pub fn prefetch(&self, args: &[f64]) -> Result<()> {
        use rayon::prelude::*;
        let vals: Vec<Result<(u64, f64)>> = args.par_iter().map(|&t| Ok((t.to_bits(), (self.eval)(t)?))).collect();
        let mut cache = self.cache.lock().expect("cache lock");
        for v in vals {
            let (k, v) = v?;
            cache.insert(k, v);
        }
        Ok(())
    }
}

/// Arguments `x − Bk` for `|k| ≤ K`, as used by [`kernel0_time`].
pub fn lattice_arguments(x: f64, step: f64, k_truncation: i64) -> Vec<f64> {
    (-k_truncation..=k_truncation).map(|k| x - step * k as f64).collect()
}

/// `K₀(x, y) = B Σ_{|k| ≤ K} ψ(x − Bk) φ(y − Bk)` with a certified tail.
pub fn kernel0_time(
    psi: &TimeFunction,
    phi: &TimeFunction,
    x: f64,
    y: f64,
    step: f64,
    k_truncation: i64,
    tol: f64,
) -> Result<KernelValue> {
    if !(step > 0.0) {
        return Err(Error::InvalidTranslation(step));
    }
    let mut value = 0.0;
    for k in -k_truncation..=k_truncation {
        let s = step * k as f64;
        let a = psi.value(x - s)?;
        if a != 0.0 {
            value += a * phi.value(y - s)?;
        }
    }
    value *= step;
    // for |k| > K both arguments exceed D = BK − max(|x|, |y|)
    let d = step * k_truncation as f64 - x.abs().max(y.abs());
    let remainder = if psi.decay == 0.0 || phi.decay == 0.0 {
        0.0
    } else if d <= step {
        f64::INFINITY
    } else {
        // 2B Σ_{m ≥ 1} c_ψ c_φ / (D + Bm)⁶ ≤ 2 c_ψ c_φ / (5 D⁵)
        2.0 * psi.decay * phi.decay / (5.0 * d.powi(5))
    };
    if remainder > tol {
        return Err(Error::Truncation { remainder, tol });
    }
    Ok(KernelValue { value, imaginary: 0.0, error: remainder })
}

/// `K₀(x, y) = Σ_l e^{−2πily/B} ∫ e^{2πiξ(x−y)} ψ̂(ξ) φ̂(ξ + l/B) dξ`.
pub fn kernel0_freq(
    psi: &FrequencyFunction,
    phi: &FrequencyFunction,
    x: f64,
    y: f64,
    step: f64,
    l_truncation: i64,
    tol: f64,
) -> Result<KernelValue> {
    if !(step > 0.0) {
        return Err(Error::InvalidTranslation(step));
    }
    if psi.is_identically_zero() || phi.is_identically_zero() {
        return Ok(KernelValue { value: 0.0, imaginary: 0.0, error: 0.0 });
    }
    let tail = LatticeTail::new(psi, phi, 0)?;
    let z = x - y;
    let term = |l: i64, share: f64| -> Result<KernelValue> {
        let h = psi.product(&phi.shift(l as f64 / step));
        if h.is_identically_zero() {
            return Ok(KernelValue { value: 0.0, imaginary: 0.0, error: 0.0 });
        }
        let i = inverse_transform_complex(&h, z, share)?;
        let theta = -2.0 * PI * l as f64 * y / step;
        let (c, s) = (theta.cos(), theta.sin());
        Ok(KernelValue {
            value: i.value * c - i.imaginary * s,
            imaginary: i.value * s + i.imaginary * c,
            error: i.error,
        })
    };
    let mut acc = term(0, tol / 4.0)?;
    let mut l = 1i64;
    loop {
        if let Some(t) = tail.at(l, step) {
            if t < tol / 4.0 {
                acc.error += t;
                return Ok(acc);
            }
        }
        if l > l_truncation {
            let remainder = tail.at(l, step).unwrap_or(f64::INFINITY);
            return Err(Error::Truncation { remainder, tol });
        }
        let share = tol / (4.0 * (l * l) as f64);
        for s in [l, -l] {
            let t = term(s, share)?;
            acc.value += t.value;
            acc.imaginary += t.imaginary;
            acc.error += t.error;
        }
        l += 1;
    }
}

/// Partial dilation sum of the kernel with its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSum {
    pub value: f64,
    /// Quadrature and lattice truncation error of the included terms.
    pub error: f64,
    /// `Σ_{j ∉ range} |A|ʲ min{σ₁, τ₁/(Aʲz)²}`.
    pub tail: f64,
}

/// `K(x, y) = Σ_{j_min ≤ j ≤ j_max} |A|ʲ K₀(Aʲx, Aʲy)`.
#[allow(clippy::too_many_arguments)]
pub fn kernel_sum(
    psi: &FrequencyFunction,
    phi: &FrequencyFunction,
    dilation: f64,
    step: f64,
    query: &KernelQuery,
    sigma1: f64,
    tau1: f64,
) -> Result<KernelSum> {
    query.validate()?;
    if query.x == query.y {
        return Err(Error::Diagonal(query.x));
    }
    if !(dilation.is_finite() && dilation.abs() > 1.0) {
        return Err(Error::InvalidDilation(dilation));
    }
    let m = dilation.abs();
    let z = (query.x - query.y).abs();
    let mut value = 0.0;
    let mut error = 0.0;
    for j in query.j_min..=query.j_max {
        let s = dilation.powi(j);
        let k = kernel0_freq(psi, phi, s * query.x, s * query.y, step, query.l_truncation, query.tol)?;
        value += m.powi(j) * k.value;
        error += m.powi(j) * k.error;
    }
    let envelope = |j: i32| m.powi(j) * sigma1.min(tau1 / (m.powi(j) * z).powi(2));
    let mut tail = 0.0;
    for j in (query.j_max + 1)..(query.j_max + 400) {
        tail += envelope(j);
    }
    for j in (query.j_min - 400)..query.j_min {
        tail += envelope(j);
    }
    Ok(KernelSum { value, error, tail })
}

/// One row of a kernel slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSample {
    pub x: f64,
    pub value: f64,
    pub error: f64,
}

/// `K₀(x, y)` along `x ∈ [lo, hi]` at fixed `y`.
pub fn kernel0_slice(
    psi: &FrequencyFunction,
    phi: &FrequencyFunction,
    y: f64,
    step: f64,
    range: (f64, f64),
    samples: usize,
    tol: f64,
) -> Result<Vec<SliceSample>> {
    use rayon::prelude::*;
    if samples < 2 {
        return Err(domain("kernel0_slice", "need at least two samples"));
    }
    let (lo, hi) = range;
    let n = samples - 1;
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = (lo * (n - i) as f64 + hi * i as f64) / n as f64;
            let k = kernel0_freq(psi, phi, x, y, step, 64, tol)?;
            Ok(SliceSample { x, value: k.value, error: k.error })
        })
        .collect()
}
