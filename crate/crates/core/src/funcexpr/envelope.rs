//! Gaussian decay envelopes and polynomial growth majorants.
//!
//! An [`Envelope`] `(a, b, ξ₀)` asserts `|f⁽ᵈ⁾(ξ)| ≤ a·exp(−bξ²)` for
//! `|ξ| ≥ ξ₀` and every derivative order `d ≤ 3`. A [`Majorant`] asserts
//! `|f⁽ᵈ⁾(ξ)| ≤ Σₖ wₖ|ξ|ᵏ` on the same kind of region. Both are closed
//! under the catalog's combinators, with a rate loss of [`RATE_LOSS`]
//! whenever a polynomial factor is absorbed into a Gaussian.

use serde::{Deserialize, Serialize};

/// Fraction of the Gaussian rate spent absorbing polynomial factors.
pub const RATE_LOSS: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub amplitude: f64,
    pub rate: f64,
    pub onset: f64,
}

impl Envelope {
    pub fn zero() -> Self {
        Envelope { amplitude: 0.0, rate: 1.0, onset: 0.0 }
    }

    /// Bound at a point with `|ξ| ≥ onset`.
    pub fn at(&self, xi: f64) -> f64 {
        self.amplitude * (-self.rate * xi * xi).exp()
    }

    /// Certified bound on `Σ_{l ≥ first} a·exp(−b(l/B − c)²)`, valid when
    /// `first/B − c ≥ max(onset, 0)` and `first/B − c > 0`.
    pub fn lattice_tail(&self, first: i64, step: f64, offset: f64) -> Option<f64> {
        let u0 = first as f64 / step - offset;
        if u0 <= 0.0 || u0 < self.onset {
            return None;
        }
        if self.amplitude == 0.0 {
            return Some(0.0);
        }
        let head = self.at(u0);
        // integral comparison: ∫_{u0}^∞ e^{−bu²} du ≤ e^{−b u0²} / (2 b u0)
        let integral = step * self.at(u0) / (2.0 * self.rate * u0);
        Some(head + integral)
    }

    /// Radius beyond which the envelope is below `floor`.
    pub fn negligible_radius(&self, floor: f64) -> f64 {
        if self.amplitude <= floor {
            return self.onset;
        }
        let r = ((self.amplitude.ln() - floor.ln()) / self.rate).sqrt();
        r.max(self.onset)
    }
}

/// Polynomial majorant in `|ξ|` with nonnegative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant {
    pub coeffs: Vec<f64>,
    pub onset: f64,
}

impl Majorant {
    pub fn constant(c: f64) -> Self {
        Majorant { coeffs: vec![c.abs()], onset: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &w| acc * x + w)
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.coeffs.iter_mut().for_each(|w| *w *= s.abs());
        self
    }

    pub fn add(&self, other: &Majorant) -> Majorant {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) + other.coeffs.get(k).copied().unwrap_or(0.0))
            .collect();
        Majorant { coeffs, onset: self.onset.max(other.onset) }
    }

    pub fn mul(&self, other: &Majorant) -> Majorant {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Majorant { coeffs, onset: self.onset.max(other.onset) }
    }

    /// Majorant of `W(|s||ξ| + |t|)`.
    pub fn compose_affine(&self, scale: f64, offset: f64) -> Majorant {
        let (s, t) = (scale.abs(), offset.abs());
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (k, w) in self.coeffs.iter().enumerate() {
            // (s x + t)^k = Σ_i C(k,i) s^i x^i t^{k-i}
            let mut binom = 1.0;
            for i in 0..=k {
                coeffs[i] += w * binom * s.powi(i as i32) * t.powi((k - i) as i32);
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
        }
        Majorant { coeffs, onset: (self.onset + t) / s }
    }

    /// `sup_{x ≥ x0} W(x)·exp(−c x²)`, bounded termwise.
    pub fn sup_against_gaussian(&self, c: f64, x0: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, w)| {
                if *w == 0.0 {
                    return 0.0;
                }
                let peak = (k as f64 / (2.0 * c)).sqrt();
                let x = peak.max(x0.max(0.0));
                w * x.powi(k as i32) * (-c * x * x).exp()
            })
            .sum()
    }
}

/// Envelope of `f·g` given an envelope of `f` and a majorant of `g`.
pub fn absorb_majorant(env: &Envelope, maj: &Majorant) -> Envelope {
    let onset = env.onset.max(maj.onset);
    let spent = RATE_LOSS * env.rate;
    // Leibniz: Σ_i C(d,i) ≤ 2^d ≤ 8 for d ≤ 3
    let amp = 8.0 * env.amplitude * maj.sup_against_gaussian(spent, onset);
    Envelope { amplitude: amp, rate: env.rate - spent, onset }
}

pub fn multiply_envelopes(a: &Envelope, b: &Envelope) -> Envelope {
    Envelope {
        amplitude: 8.0 * a.amplitude * b.amplitude,
        rate: a.rate + b.rate,
        onset: a.onset.max(b.onset),
    }
}

pub fn add_envelopes(a: &Envelope, b: &Envelope) -> Envelope {
    Envelope {
        amplitude: a.amplitude + b.amplitude,
        rate: a.rate.min(b.rate),
        onset: a.onset.max(b.onset),
    }
}

/// Envelope of `f(sξ + t)` from an envelope of `f`.
pub fn affine_envelope(env: &Envelope, scale: f64, offset: f64) -> Envelope {
    let s = scale.abs();
    let chain = s.max(1.0).powi(3);
    let theta = RATE_LOSS;
    // (sξ + t)² ≥ (1−θ)s²ξ² − (1/θ − 1)t²
    let penalty = if offset == 0.0 {
        1.0
    } else {
        (env.rate * (1.0 / theta - 1.0) * offset * offset).exp()
    };
    let rate = if offset == 0.0 { env.rate * s * s } else { (1.0 - theta) * s * s * env.rate };
    Envelope {
        amplitude: env.amplitude * chain * penalty,
        rate,
        onset: (env.onset + offset.abs()) / s,
    }
}

/// Envelope of `c·exp(−bξ²)` covering derivatives up to order 3.
pub fn gaussian_envelope(amplitude: f64, rate: f64) -> Envelope {
    let maj = gaussian_derivative_majorant(rate);
    let spent = RATE_LOSS * rate;
    Envelope {
        amplitude: amplitude.abs() * maj.sup_against_gaussian(spent, 0.0),
        rate: rate - spent,
        onset: 0.0,
    }
}

/// Coefficientwise max over `d ≤ 3` of the polynomials `P_d` with
/// `(e^{−bξ²})⁽ᵈ⁾ = P_d(ξ) e^{−bξ²}`, in absolute value.
fn gaussian_derivative_majorant(b: f64) -> Majorant {
    // P0 = 1, P1 = −2bξ, P2 = 4b²ξ² − 2b, P3 = −8b³ξ³ + 12b²ξ
    let rows = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 2.0 * b, 0.0, 0.0],
        [2.0 * b, 0.0, 4.0 * b * b, 0.0],
        [0.0, 12.0 * b * b, 0.0, 8.0 * b * b * b],
    ];
    let coeffs = (0..4).map(|k| rows.iter().map(|r| r[k]).fold(0.0, f64::max)).collect();
    Majorant { coeffs, onset: 0.0 }
}

/// Global bound on `|(c·e^{−bξ²})⁽ᵈ⁾|`, `d ≤ 3`.
pub fn gaussian_majorant(amplitude: f64, rate: f64) -> Majorant {
    let m = gaussian_derivative_majorant(rate).sup_against_gaussian(rate, 0.0);
    Majorant::constant(amplitude.abs() * m)
}

/// Majorant of a polynomial and its first three derivatives.
pub fn polynomial_majorant(coeffs: &[f64]) -> Majorant {
    let mut out = vec![0.0f64; coeffs.len().max(1)];
    let mut current: Vec<f64> = coeffs.to_vec();
    for _ in 0..4 {
        for (k, c) in current.iter().enumerate() {
            out[k] = out[k].max(c.abs());
        }
        current = current.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
    }
    Majorant { coeffs: out, onset: 0.0 }
}

/// `max_d sup_{[0,1]} |ρ⁽ᵈ⁾|` for the ramp polynomial, from
/// `ρ″ = 420ξ²(1−ξ)²(1−2ξ)` and `ρ‴ = 840ξ(1−ξ)(1−5ξ+5ξ²)`.
pub const RAMP_DERIVATIVE_BOUND: f64 = 210.0;
