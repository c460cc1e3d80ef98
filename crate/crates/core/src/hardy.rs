//! Closed-form operator norm bounds on H¹, BMO and Lᵖ for a
//! Calderón–Zygmund operator with known L² norm and kernel constants.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Inputs shared by the norm bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CZONormInputs {
    /// Upper bound on the L² operator norm.
    pub l2_norm: f64,
    pub C2: f64,
    pub C3: f64,
    pub zeta: f64,
}

/// Target space of a norm bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Space {
    H1,
    Bmo,
    Lp(f64),
}

/// Constants of the atom and molecule estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MoleculeConstants {
    pub C4: f64,
    pub C5: f64,
    pub atom_h1_bound: f64,
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta.is_finite() && zeta >= 3.0 {
        Ok(())
    } else {
        Err(domain("zeta", format!("ζ = {zeta} must be finite and ≥ 3")))
    }
}

/// `D(ζ) = 7·√(ζ²(ζ²+3)/(ζ²−1)³)`, asymptotically `7/ζ`.
pub fn d_zeta(zeta: f64) -> Result<f64> {
    if !(zeta.is_finite() && zeta > 1.0) {
        return Err(domain("d_zeta", format!("ζ = {zeta} must exceed 1")));
    }
    let z2 = zeta * zeta;
    let m = z2 - 1.0;
    Ok(7.0 * (z2 * (z2 + 3.0) / (m * m * m)).sqrt())
}

/// Interpolation constant `c(p, r)` for `1 ≤ r < p ≤ 2`.
pub fn c_interp(p: f64, r: f64) -> Result<f64> {
    if !(r >= 1.0 && r < p && p <= 2.0) {
        return Err(domain("c_interp", format!("need 1 ≤ r < p ≤ 2, got p = {p}, r = {r}")));
    }
    if p == 2.0 {
        return Ok(1.0);
    }
    let s = p + r;
    let base = 2f64.powf(2.0 * p * r / s) * p * s * (2.0 - r) / ((s - p * r) * (p - r));
    let exponent = (2.0 - p) * s / (2.0 * p * (s - p * r));
    Ok(base.powf(exponent))
}

/// `c(p) = c(p, 1)`.
pub fn c_p(p: f64) -> Result<f64> {
    c_interp(p, 1.0)
}

fn weak_type_constant(zeta: f64, l2_norm: f64, c: f64) -> f64 {
    (32.0 * zeta).sqrt() * l2_norm + 8.0 * zeta / (zeta * zeta - 1.0) * c
}

fn check_inputs(i: &CZONormInputs) -> Result<()> {
    check_zeta(i.zeta)?;
    for (name, v) in [("l2_norm", i.l2_norm), ("C2", i.C2), ("C3", i.C3)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(domain("czo_norm_bound", format!("{name} = {v} must be finite and ≥ 0")));
        }
    }
    Ok(())
}

/// Operator norm bound on the given space.
pub fn czo_norm_bound(space: Space, i: &CZONormInputs) -> Result<f64> {
    check_inputs(i)?;
    let root = 2.0 * i.zeta.sqrt() * i.l2_norm;
    match space {
        Space::H1 => Ok(root + d_zeta(i.zeta)? * i.C3),
        Space::Bmo => Ok(root + d_zeta(i.zeta)? * i.C2),
        Space::Lp(p) => {
            if !(p.is_finite() && p > 1.0) {
                return Err(domain("czo_norm_bound", format!("exponent p = {p} must lie in (1, ∞)")));
            }
            if p == 2.0 {
                return Ok(i.l2_norm);
            }
            let (q, c) = if p < 2.0 { (p, i.C3) } else { (p / (p - 1.0), i.C2) };
            let theta = 2.0 / q - 1.0;
            let weak = weak_type_constant(i.zeta, i.l2_norm, c);
            Ok(c_p(q)? * weak.powf(theta) * i.l2_norm.powf(1.0 - theta))
        }
    }
}

pub fn molecule_constants(zeta: f64, c3: f64, l2_norm: f64) -> Result<MoleculeConstants> {
    check_zeta(zeta)?;
    let z2 = zeta * zeta;
    let m = z2 - 1.0;
    let c4 = (z2 * z2 * (z2 + 3.0) / (m * m * m)).sqrt() * c3 / (2.0 * 3f64.sqrt());
    Ok(MoleculeConstants {
        C4: c4,
        C5: weak_type_constant(zeta, l2_norm, c3),
        atom_h1_bound: 2.0 * zeta.sqrt() * l2_norm + d_zeta(zeta)? * c3,
    })
}
