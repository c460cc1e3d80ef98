//! The Mexican hat frame pair and its compactly supported reference dual.
//!
//! The synthesizer is `ψ̂(ξ) = (2πξ)² exp(−2π²ξ²)` with dilation 2 and
//! translation 1. A C³ cutoff `κ` splits it into a low-pass part
//! `ψ̂* = (1−κ)ψ̂` and a perturbation `μ̂ = κψ̂`. The analyzer divides a
//! dyadic bump `β` by `ψ̂`, so `ψ̂*·φ̂ = β` and the dilations of `β`
//! sum to one.

use std::f64::consts::PI;

use crate::funcexpr::{ramp_jet, Expr, FrequencyFunction, Interval};
use crate::jets::Jet3;

pub const DILATION: f64 = 2.0;
pub const TRANSLATION: f64 = 1.0;

/// The C³ ramp and its jet.
pub fn ramp(xi: f64) -> Jet3 {
    ramp_jet(xi)
}

/// Named frequency functions of the example.
#[derive(Debug, Clone)]
pub struct MexicanHatCatalog {
    pub psi_hat: FrequencyFunction,
    pub ramp: FrequencyFunction,
    /// `κ(ξ) = ρ(6|ξ| − 2)`: 0 on `|ξ| ≤ 1/3`, 1 on `|ξ| ≥ 1/2`.
    pub cutoff: FrequencyFunction,
    /// `β(ξ) = ρ(12|ξ| − 1)·ρ(2 − 6|ξ|)`, supported on `1/12 ≤ |ξ| ≤ 1/3`.
    pub bump: FrequencyFunction,
    pub psi_star_hat: FrequencyFunction,
    pub mu_hat: FrequencyFunction,
    pub phi_hat: FrequencyFunction,
    pub dilation: f64,
    pub translation: f64,
}

impl MexicanHatCatalog {
    /// The reference analyzer coincides with the analyzer.
    pub fn phi_star_hat(&self) -> &FrequencyFunction {
        &self.phi_hat
    }
}

/// Expression for `ψ̂`.
pub fn psi_hat_expr() -> Expr {
    Expr::product(vec![
        Expr::Polynomial { coeffs: vec![0.0, 0.0, 4.0 * PI * PI] },
        Expr::Gaussian { amplitude: 1.0, rate: 2.0 * PI * PI },
    ])
}

fn cutoff_expr() -> Expr {
    Expr::even(Expr::affine(6.0, -2.0, Expr::Ramp))
}

fn bump_expr() -> Expr {
    Expr::even(Expr::product(vec![Expr::affine(12.0, -1.0, Expr::Ramp), Expr::affine(-6.0, 2.0, Expr::Ramp)]))
}

fn bump_support() -> Vec<Interval> {
    vec![Interval::new(-1.0 / 3.0, -1.0 / 12.0), Interval::new(1.0 / 12.0, 1.0 / 3.0)]
}

pub fn build_catalog() -> MexicanHatCatalog {
    let psi = psi_hat_expr();
    let one_minus_cutoff = Expr::sum(vec![
        Expr::Constant { value: 1.0 },
        Expr::product(vec![Expr::Constant { value: -1.0 }, cutoff_expr()]),
    ]);
    // 1 − κ vanishes for |ξ| ≥ 1/2; the clamp records that support
    let psi_star = Expr::clamp(Expr::product(vec![one_minus_cutoff, psi.clone()]), vec![Interval::new(-0.5, 0.5)]);
    let mu = Expr::product(vec![cutoff_expr(), psi.clone()]);
    let phi = Expr::clamp(Expr::quotient(bump_expr(), psi.clone()), bump_support());
    MexicanHatCatalog {
        psi_hat: psi.into(),
        ramp: Expr::Ramp.into(),
        cutoff: cutoff_expr().into(),
        bump: bump_expr().into(),
        psi_star_hat: psi_star.into(),
        mu_hat: mu.into(),
        phi_hat: phi.into(),
        dilation: DILATION,
        translation: TRANSLATION,
    }
}
