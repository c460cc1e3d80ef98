//! Order-3 truncated Taylor arithmetic.
//!
//! A [`Jet3`] carries a function value together with its first three
//! derivatives at a point. Arithmetic on jets propagates derivatives
//! exactly (to roundoff) through sums, products, quotients and `exp`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Denominators with magnitude below this trigger [`Error::DivisionByZero`].
pub const DIVISION_FLOOR: f64 = 1e-300;

/// Value and derivatives `(f, f', f'', f''')` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet3 {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Jet3 {
    pub const ZERO: Jet3 = Jet3 { c0: 0.0, c1: 0.0, c2: 0.0, c3: 0.0 };
    pub const ONE: Jet3 = Jet3 { c0: 1.0, c1: 0.0, c2: 0.0, c3: 0.0 };

    pub const fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Jet3 { c0, c1, c2, c3 }
    }

    pub const fn constant(c: f64) -> Self {
        Jet3 { c0: c, c1: 0.0, c2: 0.0, c3: 0.0 }
    }

    /// Jet of the identity function at `x`.
    pub const fn variable(x: f64) -> Self {
        Jet3 { c0: x, c1: 1.0, c2: 0.0, c3: 0.0 }
    }

    /// The `d`-th derivative, `d` in `0..=3`.
    pub fn deriv(&self, d: usize) -> f64 {
        match d {
            0 => self.c0,
            1 => self.c1,
            2 => self.c2,
            3 => self.c3,
            _ => panic!("Jet3 holds derivatives up to order 3, got {d}"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.is_finite() && self.c2.is_finite() && self.c3.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        *self == Jet3::ZERO
    }

    pub fn scale(self, s: f64) -> Self {
        Jet3::new(self.c0 * s, self.c1 * s, self.c2 * s, self.c3 * s)
    }

    /// Quotient `self / b` by recursive Leibniz inversion.
    pub fn try_div(self, b: Jet3) -> Result<Jet3> {
        if !(b.c0.abs() >= DIVISION_FLOOR) {
            return Err(Error::DivisionByZero(b.c0.abs()));
        }
        let q0 = self.c0 / b.c0;
        let q1 = (self.c1 - q0 * b.c1) / b.c0;
        let q2 = (self.c2 - 2.0 * q1 * b.c1 - q0 * b.c2) / b.c0;
        let q3 = (self.c3 - 3.0 * q2 * b.c1 - 3.0 * q1 * b.c2 - q0 * b.c3) / b.c0;
        Ok(Jet3::new(q0, q1, q2, q3))
    }

    /// `exp` composed with the jet (Faà di Bruno to order 3).
    pub fn try_exp(self) -> Result<Jet3> {
        let e0 = self.c0.exp();
        if !e0.is_finite() {
            return Err(Error::ExpOverflow(self.c0));
        }
        let (a1, a2, a3) = (self.c1, self.c2, self.c3);
        Ok(Jet3::new(
            e0,
            e0 * a1,
            e0 * (a2 + a1 * a1),
            e0 * (a3 + 3.0 * a1 * a2 + a1 * a1 * a1),
        ))
    }

    /// Composition `g ∘ self` where `outer` is the jet of `g` at `self.c0`.
    pub fn compose(outer: Jet3, inner: Jet3) -> Jet3 {
        let (a1, a2, a3) = (inner.c1, inner.c2, inner.c3);
        Jet3::new(
            outer.c0,
            outer.c1 * a1,
            outer.c2 * a1 * a1 + outer.c1 * a2,
            outer.c3 * a1 * a1 * a1 + 3.0 * outer.c2 * a1 * a2 + outer.c1 * a3,
        )
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, b: Jet3) -> Jet3 {
        Jet3::new(self.c0 + b.c0, self.c1 + b.c1, self.c2 + b.c2, self.c3 + b.c3)
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, b: Jet3) -> Jet3 {
        Jet3::new(self.c0 - b.c0, self.c1 - b.c1, self.c2 - b.c2, self.c3 - b.c3)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, b: Jet3) -> Jet3 {
        let a = self;
        Jet3::new(
            a.c0 * b.c0,
            a.c1 * b.c0 + a.c0 * b.c1,
            a.c2 * b.c0 + 2.0 * a.c1 * b.c1 + a.c0 * b.c2,
            a.c3 * b.c0 + 3.0 * a.c2 * b.c1 + 3.0 * a.c1 * b.c2 + a.c0 * b.c3,
        )
    }
}

pub fn jet_add(a: Jet3, b: Jet3) -> Jet3 {
    a + b
}

pub fn jet_mul(a: Jet3, b: Jet3) -> Jet3 {
    a * b
}

pub fn jet_div(a: Jet3, b: Jet3) -> Result<Jet3> {
    a.try_div(b)
}

pub fn jet_exp(a: Jet3) -> Result<Jet3> {
    a.try_exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300) || (a - b).abs() < 1e-14
    }

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64, f64) {
        let [a, b, c] = crate::testutil::fd_derivs(f, x, h);
        (a, b, c)
    }

    fn cubic_jet(c: [f64; 4], x: f64) -> Jet3 {
        Jet3::new(
            c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3),
            c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x,
            2.0 * c[2] + 6.0 * c[3] * x,
            6.0 * c[3],
        )
    }

    #[test]
    fn add_examples() {
        assert_eq!(Jet3::new(1., 0., 0., 0.) + Jet3::new(0., 1., 0., 0.), Jet3::new(1., 1., 0., 0.));
        let a = Jet3::new(0.3, -1.2, 4.0, 7.5);
        assert_eq!(a + Jet3::ZERO, a);
        assert_eq!(jet_add(Jet3::new(1., 2., 2., 0.), Jet3::new(1., 3., 6., 6.)), Jet3::new(2., 5., 8., 6.));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(jet_mul(Jet3::new(1., 2., 2., 0.), Jet3::new(1., 1., 0., 0.)), Jet3::new(1., 3., 6., 6.));
        let a = Jet3::new(0.3, -1.2, 4.0, 7.5);
        assert_eq!(a * Jet3::ONE, a);
    }

    #[test]
    fn mul_matches_finite_differences_of_cubics() {
        let pc = [0.4, -1.1, 0.7, 2.3];
        let qc = [-0.9, 0.5, 1.9, -0.6];
        let cubic = |c: [f64; 4], x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3);
        let x = 0.7;
        let j = cubic_jet(pc, x) * cubic_jet(qc, x);
        let (d1, d2, d3) = fd(|t| cubic(pc, t) * cubic(qc, t), x, 1e-3);
        assert!(close(j.c1, d1, 1e-6), "{} vs {}", j.c1, d1);
        assert!(close(j.c2, d2, 1e-6), "{} vs {}", j.c2, d2);
        assert!(close(j.c3, d3, 1e-6), "{} vs {}", j.c3, d3);
    }

    #[test]
    fn div_examples() {
        let a = Jet3::new(0.8, 1.5, -2.0, 3.0);
        let q = jet_div(a, a).unwrap();
        assert!(close(q.c0, 1.0, 1e-15) && q.c1.abs() < 1e-15 && q.c2.abs() < 1e-14 && q.c3.abs() < 1e-13);
        // 1/(1+ξ) at ξ = 0
        let q = jet_div(Jet3::ONE, Jet3::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(q, Jet3::new(1.0, -1.0, 2.0, -6.0));
    }

    #[test]
    fn div_below_floor_signals() {
        assert!(matches!(jet_div(Jet3::ONE, Jet3::ZERO), Err(Error::DivisionByZero(_))));
        assert!(matches!(jet_div(Jet3::ONE, Jet3::constant(1e-301)), Err(Error::DivisionByZero(_))));
        assert!(jet_div(Jet3::ONE, Jet3::constant(1e-299)).is_ok());
    }

    #[test]
    fn exp_examples() {
        assert_eq!(jet_exp(Jet3::ZERO).unwrap(), Jet3::ONE);
        // exp(-2π²ξ²) at ξ = 0
        let x = Jet3::variable(0.0);
        let arg = (x * x).scale(-2.0 * PI * PI);
        let e = jet_exp(arg).unwrap();
        assert_eq!(e.c0, 1.0);
        assert_eq!(e.c1, 0.0);
        assert!(close(e.c2, -4.0 * PI * PI, 1e-15));
        assert_eq!(e.c3, 0.0);

        let g = |t: f64| (-2.0 * PI * PI * t * t).exp();
        let x = Jet3::variable(0.3);
        let e = jet_exp((x * x).scale(-2.0 * PI * PI)).unwrap();
        let (d1, d2, d3) = fd(g, 0.3, 1e-3);
        assert!(close(e.c1, d1, 1e-6));
        assert!(close(e.c2, d2, 1e-6));
        assert!(close(e.c3, d3, 1e-5), "{} vs {}", e.c3, d3);
    }

    #[test]
    fn exp_overflow_signals() {
        assert!(matches!(jet_exp(Jet3::constant(1000.0)), Err(Error::ExpOverflow(_))));
    }

    #[test]
    fn compose_matches_exp() {
        let inner = Jet3::new(0.2, 1.3, -0.4, 2.2);
        let e0 = inner.c0.exp();
        let outer = Jet3::new(e0, e0, e0, e0);
        let a = Jet3::compose(outer, inner);
        let b = jet_exp(inner).unwrap();
        for d in 0..4 {
            assert!(close(a.deriv(d), b.deriv(d), 1e-14));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn jet() -> impl Strategy<Value = Jet3> {
            (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
                .prop_map(|(a, b, c, d)| Jet3::new(a, b, c, d))
        }

        fn rel_eq(a: Jet3, b: Jet3, tol: f64) -> bool {
            let scale = [a.c0, a.c1, a.c2, a.c3, b.c0, b.c1, b.c2, b.c3]
                .iter()
                .fold(1.0f64, |m, v| m.max(v.abs()));
            (0..4).all(|d| (a.deriv(d) - b.deriv(d)).abs() <= tol * scale)
        }

        proptest! {
            #[test]
            fn mul_commutes(a in jet(), b in jet()) {
                prop_assert!(rel_eq(a * b, b * a, 1e-13));
            }

            #[test]
            fn mul_associates(a in jet(), b in jet(), c in jet()) {
                prop_assert!(rel_eq((a * b) * c, a * (b * c), 1e-13));
            }

            #[test]
            fn div_inverts_mul(a in jet(), b in jet()) {
                prop_assume!(b.c0.abs() > 0.5);
                let q = jet_div(a * b, b).unwrap();
                prop_assert!(rel_eq(q, a, 1e-11), "{:?} vs {:?}", q, a);
            }

            #[test]
            fn finite_inputs_stay_finite(a in jet(), b in jet()) {
                prop_assume!(b.c0.abs() > 1e-8);
                prop_assert!((a + b).is_finite());
                prop_assert!((a * b).is_finite());
                prop_assert!(jet_div(a, b).unwrap().is_finite());
                prop_assert!(jet_exp(a).unwrap().is_finite());
            }
        }
    }
}
