//! Lattice-sum norm quantities of a frame pair and the kernel constants
//! derived from them.
//!
//! Every quantity is a sum over `l ∈ ℤ` of `‖(F·G(· + l/B))⁽ᵈ⁾‖₁` for a
//! pair of factors `(F, G)` built from the synthesizer `ψ̂` and analyzer
//! `φ̂`. Functions are real valued, so conjugation is the identity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::funcexpr::{Envelope, FrequencyFunction, Interval};
use crate::quad::{l1_norm_deriv, l1_norm_deriv_rel, shift_sum, BoundWithError};

/// The six frequency-domain norm quantities of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaTau {
    pub sigma1: BoundWithError,
    pub sigma2: BoundWithError,
    pub sigma3: BoundWithError,
    pub tau1: BoundWithError,
    pub tau2: BoundWithError,
    pub tau3: BoundWithError,
}

impl SigmaTau {
    pub fn zero() -> Self {
        SigmaTau {
            sigma1: BoundWithError::ZERO,
            sigma2: BoundWithError::ZERO,
            sigma3: BoundWithError::ZERO,
            tau1: BoundWithError::ZERO,
            tau2: BoundWithError::ZERO,
            tau3: BoundWithError::ZERO,
        }
    }

    pub fn sigma(&self, k: usize) -> BoundWithError {
        [self.sigma1, self.sigma2, self.sigma3][k - 1]
    }

    pub fn tau(&self, k: usize) -> BoundWithError {
        [self.tau1, self.tau2, self.tau3][k - 1]
    }
}

/// Kernel size and smoothness constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CZConstants {
    pub C1: BoundWithError,
    pub C2: BoundWithError,
    pub C3: BoundWithError,
    pub A: f64,
    pub B: f64,
}

/// Which decay regime a geometric dilation sum models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    /// `min(σ, τ/z²)`, summed with weight `|Aʲ|`.
    Quadratic,
    /// `min(σ, τ/|z|³)`, summed with weight `A²ʲ`.
    Cubic,
}

fn check_order(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(domain("czconst", format!("index {k} not in 1..=3")))
    }
}

fn check_step(step: f64) -> Result<()> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTranslation(step))
    }
}

/// The `(F, G)` factors for index `k`; `G` carries the lattice shift.
fn factors(k: usize, psi: &FrequencyFunction, phi: &FrequencyFunction) -> (FrequencyFunction, FrequencyFunction) {
    match k {
        1 => (psi.clone(), phi.clone()),
        2 => (psi.times_identity(), phi.clone()),
        _ => (phi.times_identity(), psi.clone()),
    }
}

/// Certified bound on `Σ_{|l| ≥ L} ‖(F·G(· + l/B))⁽ᵈ⁾‖₁`.
pub enum LatticeTail {
    /// Both factors compact: terms vanish once `L/B` exceeds `beyond`.
    Vanishes { beyond: f64 },
    /// One factor compact with radius `offset`; the other decays like `env`.
    /// `weight` bounds the Leibniz sum of the compact factor's L¹ norms.
    Decays { env: Envelope, offset: f64, weight: f64 },
}

impl LatticeTail {
    /// Needs one compactly supported factor; the other must be compact or carry an envelope.
    pub fn new(f: &FrequencyFunction, g: &FrequencyFunction, d: usize) -> Result<Self> {
        tail_model(f, g, d)
    }

    /// `None` until the lattice index is past the compact factor's reach.
    pub fn at(&self, first: i64, step: f64) -> Option<f64> {
        match self {
            LatticeTail::Vanishes { beyond } => (first as f64 / step > *beyond).then_some(0.0),
            LatticeTail::Decays { env, offset, weight } => {
                env.lattice_tail(first, step, *offset).map(|t| 2.0 * weight * t)
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]][n][k]
}

/// Signed hull offset `max(hi, −lo)`: for `ξ` in the hull shifted by
/// `−l/B`, `|ξ| ≥ |l|/B − offset`.
fn hull_offset(f: &FrequencyFunction) -> Option<f64> {
    if !f.support().is_bounded() {
        return None;
    }
    f.support().hull().map(|h| h.hi.max(-h.lo))
}

/// `Σᵢ C(d,i)‖G⁽ᵈ⁻ⁱ⁾‖₁`, to a relative accuracy that only affects the tail bound.
fn leibniz_weight(compact: &FrequencyFunction, d: usize) -> Result<f64> {
    let mut w = 0.0;
    for i in 0..=d {
        let fine = l1_norm_deriv_rel(compact, d - i, Interval::REAL_LINE, 1e-8)?;
        w += binomial(d, i) * fine.certified_upper();
    }
    Ok(w)
}

fn tail_model(f: &FrequencyFunction, g: &FrequencyFunction, d: usize) -> Result<LatticeTail> {
    match (hull_offset(f), hull_offset(g)) {
        (Some(cf), Some(cg)) => Ok(LatticeTail::Vanishes { beyond: cf + cg }),
        (None, Some(cg)) => {
            let env = f.envelope().ok_or_else(|| {
                Error::Unsupported("unbounded factor without a decay envelope".into())
            })?;
            Ok(LatticeTail::Decays { env, offset: cg, weight: leibniz_weight(g, d)? })
        }
        (Some(cf), None) => {
            let env = g.envelope().ok_or_else(|| {
                Error::Unsupported("unbounded factor without a decay envelope".into())
            })?;
            Ok(LatticeTail::Decays { env, offset: cf, weight: leibniz_weight(f, d)? })
        }
        (None, None) => Err(Error::Unsupported(
            "lattice sums need at least one compactly supported factor".into(),
        )),
    }
}

/// `Σ_l ‖(F·G(· + l/B))⁽ᵈ⁾‖₁` with a certified error.
pub fn lattice_norm(
    f: &FrequencyFunction,
    g: &FrequencyFunction,
    d: usize,
    step: f64,
    tol: f64,
) -> Result<BoundWithError> {
    check_step(step)?;
    if !(tol > 0.0) {
        return Err(domain("lattice_norm", format!("tolerance {tol} must be positive")));
    }
    if f.is_identically_zero() || g.is_identically_zero() {
        return Ok(BoundWithError::ZERO);
    }
    let term = |l: i64| {
        let h = f.product(&g.shift(l as f64 / step));
        let share = tol / (8.0 * ((l * l).max(1)) as f64);
        l1_norm_deriv(&h, d, Interval::REAL_LINE, share)
    };
    let model = tail_model(f, g, d)?;
    let centre = term(0)?;
    let rest = shift_sum(term, |first| model.at(first, step), tol / 4.0)?;
    Ok(centre + rest.total)
}

/// `σₖ(ψ, φ)` for `k ∈ {1, 2, 3}`.
pub fn sigma(k: usize, psi: &FrequencyFunction, phi: &FrequencyFunction, step: f64, tol: f64) -> Result<BoundWithError> {
    check_order(k)?;
    let (f, g) = factors(k, psi, phi);
    let s = lattice_norm(&f, &g, 0, step, tol)?;
    Ok(if k == 1 { s } else { s.scale(2.0 * PI) })
}

/// `τₖ(ψ, φ)` for `k ∈ {1, 2, 3}`.
pub fn tau(k: usize, psi: &FrequencyFunction, phi: &FrequencyFunction, step: f64, tol: f64) -> Result<BoundWithError> {
    check_order(k)?;
    let (f, g) = factors(k, psi, phi);
    let d = if k == 1 { 2 } else { 3 };
    Ok(lattice_norm(&f, &g, d, step, tol)?.scale(1.0 / (4.0 * PI * PI)))
}

/// All six quantities, computed concurrently and collected in fixed order.
pub fn sigma_tau(psi: &FrequencyFunction, phi: &FrequencyFunction, step: f64, tol: f64) -> Result<SigmaTau> {
    use rayon::prelude::*;
    let jobs: Vec<(bool, usize)> = (1..=3).flat_map(|k| [(true, k), (false, k)]).collect();
    let out: Vec<Result<BoundWithError>> = jobs
        .par_iter()
        .map(|&(is_sigma, k)| if is_sigma { sigma(k, psi, phi, step, tol) } else { tau(k, psi, phi, step, tol) })
        .collect();
    let mut it = out.into_iter();
    let mut next = || it.next().expect("six results");
    let (s1, t1, s2, t2, s3, t3) = (next()?, next()?, next()?, next()?, next()?, next()?);
    Ok(SigmaTau { sigma1: s1, sigma2: s2, sigma3: s3, tau1: t1, tau2: t2, tau3: t3 })
}

fn check_dilation(a: f64) -> Result<()> {
    if a.is_finite() && a.abs() > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDilation(a))
    }
}

/// `2|A|/(|A|−1)` or `|A|(2|A|+1)/(A²−1)`.
pub fn geometric_sum_prefactor(kind: DecayKind, a: f64) -> Result<f64> {
    check_dilation(a)?;
    let m = a.abs();
    Ok(match kind {
        DecayKind::Quadratic => 2.0 * m / (m - 1.0),
        DecayKind::Cubic => m * (2.0 * m + 1.0) / (m * m - 1.0),
    })
}

/// Monotone two-argument map applied to estimates and to certified uppers.
fn combine(a: BoundWithError, b: BoundWithError, f: impl Fn(f64, f64) -> f64) -> BoundWithError {
    let est = f(a.estimate.max(0.0), b.estimate.max(0.0));
    let up = f(a.certified_upper().max(0.0), b.certified_upper().max(0.0));
    BoundWithError::new(est, (up - est).max(0.0))
}

/// Assemble the kernel constants from the norm quantities.
pub fn cz_constants(st: &SigmaTau, a: f64, step: f64) -> Result<CZConstants> {
    check_dilation(a)?;
    check_step(step)?;
    let quad = geometric_sum_prefactor(DecayKind::Quadratic, a)?;
    let cubic = 4.0 * geometric_sum_prefactor(DecayKind::Cubic, a)?;
    let c1 = combine(st.sigma1, st.tau1, |s, t| quad * (s * t).sqrt());
    let c2 = combine(st.sigma2, st.tau2, |s, t| cubic * (s * t * t).cbrt());
    let c3 = combine(st.sigma3, st.tau3, |s, t| cubic * (s * t * t).cbrt());
    Ok(CZConstants { C1: c1, C2: c2, C3: c3, A: a, B: step })
}
