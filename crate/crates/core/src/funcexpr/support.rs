//! Finite unions of closed intervals, possibly unbounded.

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Distance from the origin to the nearest point of the interval.
    pub fn dist_to_origin(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else if self.lo > 0.0 {
            self.lo
        } else {
            -self.hi
        }
    }
}

/// Sorted, pairwise-disjoint union of closed intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Support {
    parts: Vec<Interval>,
}

impl Support {
    pub fn empty() -> Self {
        Support { parts: Vec::new() }
    }

    pub fn real_line() -> Self {
        Support { parts: vec![Interval::REAL_LINE] }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Support::from_intervals(vec![Interval::new(lo, hi)])
    }

    pub fn from_intervals(mut parts: Vec<Interval>) -> Self {
        parts.retain(|iv| iv.lo <= iv.hi);
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Support { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.parts.iter().all(Interval::is_bounded)
    }

    pub fn contains(&self, x: f64) -> bool {
        // parts are few; linear scan beats binary search here
        self.parts.iter().any(|iv| iv.contains(x))
    }

    /// Smallest interval containing the support, if nonempty.
    pub fn hull(&self) -> Option<Interval> {
        Some(Interval::new(self.parts.first()?.lo, self.parts.last()?.hi))
    }

    pub fn union(&self, other: &Support) -> Support {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        Support::from_intervals(parts)
    }

    /// Intersection of closed supports. Isolated touching points are dropped:
    /// a product of functions vanishing on the boundary of their supports
    /// is zero there.
    pub fn intersect(&self, other: &Support) -> Support {
        let mut parts = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                if let Some(iv) = a.intersect(b) {
                    if iv.lo < iv.hi || (a.lo == a.hi && b.lo == b.hi) {
                        parts.push(iv);
                    }
                }
            }
        }
        Support::from_intervals(parts)
    }

    pub fn intersect_interval(&self, iv: Interval) -> Support {
        self.intersect(&Support { parts: vec![iv] })
    }

    /// Preimage under `ξ ↦ sξ + t`, i.e. the support of `f(sξ + t)`.
    pub fn affine_preimage(&self, scale: f64, offset: f64) -> Support {
        let parts = self
            .parts
            .iter()
            .map(|iv| {
                let a = (iv.lo - offset) / scale;
                let b = (iv.hi - offset) / scale;
                if scale > 0.0 { Interval::new(a, b) } else { Interval::new(b, a) }
            })
            .collect();
        Support::from_intervals(parts)
    }

    pub fn reflect(&self) -> Support {
        self.affine_preimage(-1.0, 0.0)
    }

    /// Support of `f(|ξ|)` given the support of `f`.
    pub fn even(&self) -> Support {
        let right = self.intersect_interval(Interval::new(0.0, f64::INFINITY));
        right.union(&right.reflect())
    }

    /// Finite endpoints of all components.
    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.parts.iter().flat_map(|iv| [iv.lo, iv.hi]).filter(|x| x.is_finite())
    }
}
