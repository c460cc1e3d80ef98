//! Frequency-domain function expressions.
//!
//! A [`FrequencyFunction`] is an immutable expression tree over a closed
//! catalog of primitives ([`Expr`]). Construction compiles the tree once,
//! caching supports, breakpoints and decay envelopes for every node, so
//! pointwise jet evaluation does no allocation.

mod envelope;
mod support;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use envelope::{Envelope, Majorant};
pub use support::{Interval, Support};

use crate::error::{Error, Result};
use crate::jets::Jet3;
use envelope::*;

/// Serializable expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Zero,
    Constant { value: f64 },
    /// `Σ coeffs[k] ξᵏ`
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude · exp(−rate ξ²)`
    Gaussian { amplitude: f64, rate: f64 },
    /// The C³ ramp: 0 for ξ ≤ 0, `35ξ⁴ − 84ξ⁵ + 70ξ⁶ − 20ξ⁷` on [0,1], 1 for ξ ≥ 1.
    Ramp,
    /// `inner(scale·ξ + offset)`
    Affine { scale: f64, offset: f64, inner: Box<Expr> },
    Sum { terms: Vec<Expr> },
    Product { factors: Vec<Expr> },
    Quotient { numerator: Box<Expr>, denominator: Box<Expr> },
    /// `inner(−ξ)`
    Reflect { inner: Box<Expr> },
    /// `inner(|ξ|)`
    Even { inner: Box<Expr> },
    /// `inner` restricted to a finite union of closed intervals.
    Clamp { inner: Box<Expr>, support: Vec<Interval> },
    /// `inner` together with a user-asserted decay envelope.
    Enveloped { inner: Box<Expr>, envelope: Envelope },
}

impl Expr {
    pub fn identity() -> Expr {
        Expr::Polynomial { coeffs: vec![0.0, 1.0] }
    }

    pub fn affine(scale: f64, offset: f64, inner: Expr) -> Expr {
        Expr::Affine { scale, offset, inner: Box::new(inner) }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product { factors }
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum { terms }
    }

    pub fn quotient(numerator: Expr, denominator: Expr) -> Expr {
        Expr::Quotient { numerator: Box::new(numerator), denominator: Box::new(denominator) }
    }

    pub fn even(inner: Expr) -> Expr {
        Expr::Even { inner: Box::new(inner) }
    }

    pub fn clamp(inner: Expr, support: Vec<Interval>) -> Expr {
        Expr::Clamp { inner: Box::new(inner), support }
    }

    /// Structural validation of parameters, run before compilation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            Expr::Zero | Expr::Ramp => Ok(()),
            Expr::Constant { value } if !value.is_finite() => bad(format!("constant value {value} is not finite")),
            Expr::Constant { .. } => Ok(()),
            Expr::Polynomial { coeffs } => {
                if coeffs.iter().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    bad("polynomial coefficients must be finite".into())
                }
            }
            Expr::Gaussian { amplitude, rate } => {
                if !amplitude.is_finite() || !(rate.is_finite() && *rate > 0.0) {
                    bad(format!("gaussian needs finite amplitude and rate > 0, got ({amplitude}, {rate})"))
                } else {
                    Ok(())
                }
            }
            Expr::Affine { scale, offset, inner } => {
                if !(scale.is_finite() && *scale != 0.0 && offset.is_finite()) {
                    return bad(format!("affine map needs finite nonzero scale, got scale={scale} offset={offset}"));
                }
                inner.validate()
            }
            Expr::Sum { terms } => terms.iter().try_for_each(Expr::validate),
            Expr::Product { factors } => factors.iter().try_for_each(Expr::validate),
            Expr::Quotient { numerator, denominator } => {
                numerator.validate()?;
                denominator.validate()
            }
            Expr::Reflect { inner } | Expr::Even { inner } => inner.validate(),
            Expr::Clamp { inner, support } => {
                for iv in support {
                    if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                        return bad(format!("clamp interval [{}, {}] must be finite and ordered", iv.lo, iv.hi));
                    }
                }
                inner.validate()
            }
            Expr::Enveloped { inner, envelope } => {
                let e = envelope;
                if !(e.amplitude >= 0.0 && e.rate > 0.0 && e.onset >= 0.0 && e.amplitude.is_finite() && e.rate.is_finite()) {
                    return bad("envelope needs amplitude ≥ 0, rate > 0, onset ≥ 0".into());
                }
                inner.validate()
            }
        }
    }
}

#[derive(Debug)]
enum Op {
    Zero,
    Constant(f64),
    Polynomial(Vec<f64>),
    Gaussian { amplitude: f64, rate: f64 },
    Ramp,
    Affine { scale: f64, offset: f64, inner: Node },
    Sum(Vec<Node>),
    Product(Vec<Node>),
    Quotient(Node, Node),
    Reflect(Node),
    Even(Node),
    Clamp(Node),
}

#[derive(Debug)]
struct Node {
    op: Box<Op>,
    support: Support,
    envelope: Option<Envelope>,
    majorant: Option<Majorant>,
}

impl Node {
    fn compile(expr: &Expr) -> Node {
        match expr {
            Expr::Zero => Node {
                op: Box::new(Op::Zero),
                support: Support::empty(),
                envelope: Some(Envelope::zero()),
                majorant: Some(Majorant::constant(0.0)),
            },
            Expr::Constant { value } => Node {
                op: Box::new(Op::Constant(*value)),
                support: if *value == 0.0 { Support::empty() } else { Support::real_line() },
                envelope: (*value == 0.0).then(Envelope::zero),
                majorant: Some(Majorant::constant(*value)),
            },
            Expr::Polynomial { coeffs } => {
                let zero = coeffs.iter().all(|c| *c == 0.0);
                Node {
                    op: Box::new(Op::Polynomial(coeffs.clone())),
                    support: if zero { Support::empty() } else { Support::real_line() },
                    envelope: zero.then(Envelope::zero),
                    majorant: Some(polynomial_majorant(coeffs)),
                }
            }
            Expr::Gaussian { amplitude, rate } => Node {
                op: Box::new(Op::Gaussian { amplitude: *amplitude, rate: *rate }),
                support: if *amplitude == 0.0 { Support::empty() } else { Support::real_line() },
                envelope: Some(gaussian_envelope(*amplitude, *rate)),
                majorant: Some(gaussian_majorant(*amplitude, *rate)),
            },
            Expr::Ramp => Node {
                op: Box::new(Op::Ramp),
                support: Support::interval(0.0, f64::INFINITY),
                envelope: None,
                majorant: Some(Majorant::constant(RAMP_DERIVATIVE_BOUND)),
            },
            Expr::Affine { scale, offset, inner } => {
                let inner = Node::compile(inner);
                Node {
                    support: inner.support.affine_preimage(*scale, *offset),
                    envelope: inner.envelope.map(|e| affine_envelope(&e, *scale, *offset)),
                    majorant: inner
                        .majorant
                        .as_ref()
                        .map(|m| m.compose_affine(*scale, *offset).scale(scale.abs().max(1.0).powi(3))),
                    op: Box::new(Op::Affine { scale: *scale, offset: *offset, inner }),
                }
            }
            Expr::Sum { terms } => {
                let nodes: Vec<Node> = terms.iter().map(Node::compile).collect();
                let support = nodes.iter().fold(Support::empty(), |s, n| s.union(&n.support));
                let envelope = nodes
                    .iter()
                    .try_fold(Envelope::zero(), |acc, n| n.envelope.as_ref().map(|e| add_envelopes(&acc, e)));
                let majorant = nodes
                    .iter()
                    .try_fold(Majorant::constant(0.0), |acc, n| n.majorant.as_ref().map(|m| acc.add(m)));
                Node { op: Box::new(Op::Sum(nodes)), support, envelope, majorant }
            }
            Expr::Product { factors } => {
                let nodes: Vec<Node> = factors.iter().map(Node::compile).collect();
                let support = if nodes.is_empty() {
                    Support::real_line()
                } else {
                    nodes.iter().skip(1).fold(nodes[0].support.clone(), |s, n| s.intersect(&n.support))
                };
                let (envelope, majorant) = product_bounds(&nodes);
                Node { op: Box::new(Op::Product(nodes)), support, envelope, majorant }
            }
            Expr::Quotient { numerator, denominator } => {
                let num = Node::compile(numerator);
                let den = Node::compile(denominator);
                Node {
                    support: num.support.clone(),
                    envelope: None,
                    majorant: None,
                    op: Box::new(Op::Quotient(num, den)),
                }
            }
            Expr::Reflect { inner } => {
                let inner = Node::compile(inner);
                Node {
                    support: inner.support.reflect(),
                    envelope: inner.envelope,
                    majorant: inner.majorant.clone(),
                    op: Box::new(Op::Reflect(inner)),
                }
            }
            Expr::Even { inner } => {
                let inner = Node::compile(inner);
                Node {
                    support: inner.support.even(),
                    envelope: inner.envelope,
                    majorant: inner.majorant.clone(),
                    op: Box::new(Op::Even(inner)),
                }
            }
            Expr::Clamp { inner, support } => {
                let inner = Node::compile(inner);
                Node {
                    support: inner.support.intersect(&Support::from_intervals(support.clone())),
                    envelope: inner.envelope,
                    majorant: inner.majorant.clone(),
                    op: Box::new(Op::Clamp(inner)),
                }
            }
            Expr::Enveloped { inner, envelope } => {
                let mut node = Node::compile(inner);
                node.envelope = Some(*envelope);
                node.majorant = Some(Majorant::constant(envelope.amplitude));
                node
            }
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match &*self.op {
            Op::Zero | Op::Constant(_) | Op::Polynomial(_) | Op::Gaussian { .. } => {}
            Op::Ramp => out.extend([0.0, 1.0]),
            Op::Affine { scale, offset, inner } => {
                let mut inner_bp = Vec::new();
                inner.breakpoints(&mut inner_bp);
                out.extend(inner_bp.into_iter().map(|b| (b - offset) / scale));
            }
            Op::Sum(nodes) | Op::Product(nodes) => nodes.iter().for_each(|n| n.breakpoints(out)),
            Op::Quotient(a, b) => {
                a.breakpoints(out);
                b.breakpoints(out);
            }
            Op::Reflect(inner) => {
                let mut inner_bp = Vec::new();
                inner.breakpoints(&mut inner_bp);
                out.extend(inner_bp.into_iter().map(|b| -b));
            }
            Op::Even(inner) => {
                let mut inner_bp = Vec::new();
                inner.breakpoints(&mut inner_bp);
                out.push(0.0);
                out.extend(inner_bp.into_iter().filter(|b| *b > 0.0).flat_map(|b| [b, -b]));
            }
            Op::Clamp(inner) => inner.breakpoints(out),
        }
        out.extend(self.support.endpoints());
    }

    fn eval(&self, xi: f64) -> Result<Jet3> {
        if !self.support.contains(xi) {
            return Ok(Jet3::ZERO);
        }
        match &*self.op {
            Op::Zero => Ok(Jet3::ZERO),
            Op::Constant(c) => Ok(Jet3::constant(*c)),
            Op::Polynomial(coeffs) => {
                let x = Jet3::variable(xi);
                Ok(coeffs.iter().rev().fold(Jet3::ZERO, |acc, &c| acc * x + Jet3::constant(c)))
            }
            Op::Gaussian { amplitude, rate } => {
                let x = Jet3::variable(xi);
                Ok((x * x).scale(-rate).try_exp()?.scale(*amplitude))
            }
            Op::Ramp => Ok(ramp_jet(xi)),
            Op::Affine { scale, offset, inner } => {
                let j = inner.eval(scale * xi + offset)?;
                Ok(Jet3::new(j.c0, j.c1 * scale, j.c2 * scale * scale, j.c3 * scale * scale * scale))
            }
            Op::Sum(nodes) => nodes.iter().try_fold(Jet3::ZERO, |acc, n| Ok(acc + n.eval(xi)?)),
            Op::Product(nodes) => {
                let mut acc = Jet3::ONE;
                for n in nodes {
                    let j = n.eval(xi)?;
                    if j.is_zero() {
                        return Ok(Jet3::ZERO);
                    }
                    acc = acc * j;
                }
                Ok(acc)
            }
            Op::Quotient(num, den) => {
                let a = num.eval(xi)?;
                if a.is_zero() {
                    return Ok(Jet3::ZERO);
                }
                a.try_div(den.eval(xi)?)
            }
            Op::Reflect(inner) => Ok(reflect_jet(inner.eval(-xi)?)),
            Op::Even(inner) => {
                if xi >= 0.0 {
                    inner.eval(xi)
                } else {
                    Ok(reflect_jet(inner.eval(-xi)?))
                }
            }
            Op::Clamp(inner) => inner.eval(xi),
        }
    }
}

fn reflect_jet(j: Jet3) -> Jet3 {
    Jet3::new(j.c0, -j.c1, j.c2, -j.c3)
}

fn product_bounds(nodes: &[Node]) -> (Option<Envelope>, Option<Majorant>) {
    let bounds = |n: &Node| -> Option<(Option<Envelope>, Majorant)> {
        let maj = n
            .majorant
            .clone()
            .or_else(|| n.envelope.map(|e| Majorant { coeffs: vec![e.amplitude], onset: e.onset }))?;
        Some((n.envelope, maj))
    };
    let Some(first) = nodes.first() else {
        return (None, Some(Majorant::constant(1.0)));
    };
    let Some(mut acc) = bounds(first) else {
        return (None, None);
    };
    for n in &nodes[1..] {
        let Some((env, maj)) = bounds(n) else {
            return (None, None);
        };
        // Leibniz: Σ_i C(d,i) ≤ 8 for d ≤ 3
        let combined_maj = acc.1.mul(&maj).scale(8.0);
        let combined_env = match (acc.0, env) {
            (Some(a), Some(b)) => Some(multiply_envelopes(&a, &b)),
            (Some(a), None) => Some(absorb_majorant(&a, &maj)),
            (None, Some(b)) => Some(absorb_majorant(&b, &acc.1)),
            (None, None) => None,
        };
        acc = (combined_env, combined_maj);
    }
    (acc.0, Some(acc.1))
}

/// Jet of the C³ ramp ρ.
pub fn ramp_jet(xi: f64) -> Jet3 {
    if xi <= 0.0 {
        return Jet3::ZERO;
    }
    if xi >= 1.0 {
        return Jet3::ONE;
    }
    let x = xi;
    let (x2, x3) = (x * x, x * x * x);
    let x4 = x2 * x2;
    let y = 1.0 - x;
    Jet3::new(
        x4 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3),
        140.0 * x3 * y * y * y,
        420.0 * x2 * y * y * (1.0 - 2.0 * x),
        840.0 * x * y * (1.0 - 5.0 * x + 5.0 * x2),
    )
}

/// An immutable compiled frequency-domain function.
#[derive(Debug, Clone)]
pub struct FrequencyFunction {
    expr: Arc<Expr>,
    root: Arc<Node>,
    breakpoints: Arc<Vec<f64>>,
}

impl PartialEq for FrequencyFunction {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

impl Serialize for FrequencyFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.expr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrequencyFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let expr = Expr::deserialize(d)?;
        FrequencyFunction::new(expr).map_err(serde::de::Error::custom)
    }
}

impl From<Expr> for FrequencyFunction {
    /// Panics on invalid parameters; use [`FrequencyFunction::new`] for untrusted input.
    fn from(expr: Expr) -> Self {
        FrequencyFunction::new(expr).expect("valid expression")
    }
}

impl FrequencyFunction {
    pub fn new(expr: Expr) -> Result<Self> {
        expr.validate()?;
        let root = Node::compile(&expr);
        let mut bp = Vec::new();
        root.breakpoints(&mut bp);
        bp.retain(|b| b.is_finite());
        bp.sort_by(f64::total_cmp);
        bp.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
        Ok(FrequencyFunction { expr: Arc::new(expr), root: Arc::new(root), breakpoints: Arc::new(bp) })
    }

    pub fn zero() -> Self {
        FrequencyFunction::from(Expr::Zero)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn support(&self) -> &Support {
        &self.root.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Decay envelope covering derivatives up to order 3, when one is known.
    pub fn envelope(&self) -> Option<Envelope> {
        if self.root.support.is_empty() {
            return Some(Envelope::zero());
        }
        self.root.envelope
    }

    /// Structurally the zero function (empty support).
    pub fn is_identically_zero(&self) -> bool {
        self.root.support.is_empty()
    }

    pub fn evaluate(&self, xi: f64) -> Result<Jet3> {
        if !xi.is_finite() {
            return Err(crate::error::domain("evaluate", format!("non-finite argument {xi}")));
        }
        self.root.eval(xi)
    }

    pub fn value(&self, xi: f64) -> Result<f64> {
        Ok(self.evaluate(xi)?.c0)
    }

    /// `ξ ↦ f(ξ + t)`.
    pub fn shift(&self, t: f64) -> FrequencyFunction {
        if t == 0.0 {
            return self.clone();
        }
        FrequencyFunction::from(Expr::affine(1.0, t, (*self.expr).clone()))
    }

    /// `ξ ↦ ξ·f(ξ)`.
    pub fn times_identity(&self) -> FrequencyFunction {
        FrequencyFunction::from(Expr::product(vec![Expr::identity(), (*self.expr).clone()]))
    }

    pub fn product(&self, other: &FrequencyFunction) -> FrequencyFunction {
        FrequencyFunction::from(Expr::product(vec![(*self.expr).clone(), (*other.expr).clone()]))
    }

    pub fn scaled(&self, c: f64) -> FrequencyFunction {
        FrequencyFunction::from(Expr::product(vec![Expr::Constant { value: c }, (*self.expr).clone()]))
    }

    /// `self − other`, short-circuiting structurally equal operands to zero.
    pub fn minus(&self, other: &FrequencyFunction) -> FrequencyFunction {
        if self == other {
            return FrequencyFunction::zero();
        }
        if other.is_identically_zero() {
            return self.clone();
        }
        FrequencyFunction::from(Expr::sum(vec![
            (*self.expr).clone(),
            Expr::product(vec![Expr::Constant { value: -1.0 }, (*other.expr).clone()]),
        ]))
    }
}

pub fn shift(f: &FrequencyFunction, t: f64) -> FrequencyFunction {
    f.shift(t)
}

pub fn times_identity(f: &FrequencyFunction) -> FrequencyFunction {
    f.times_identity()
}

pub fn product(f: &FrequencyFunction, g: &FrequencyFunction) -> FrequencyFunction {
    f.product(g)
}
