#![allow(dead_code)]

use framecert::czconst::{cz_constants, sigma_tau, CZConstants, SigmaTau};
use framecert::funcexpr::FrequencyFunction;
use framecert::kernellab::{kernel0_freq, kernel0_time, kernel_sum, lattice_arguments, KernelQuery, TimeFunction};
use framecert::mexhat::{build_catalog, MexicanHatCatalog};
use rand::{Rng, SeedableRng};

pub type TestRng = rand::rngs::StdRng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// The perturbation pair `(μ̂, φ̂)` of the Mexican hat example with its constants.
pub struct PerturbationPair {
    pub catalog: MexicanHatCatalog,
    pub st: SigmaTau,
    pub cz: CZConstants,
}

impl PerturbationPair {
    pub fn new() -> Self {
        let catalog = build_catalog();
        let st = sigma_tau(&catalog.mu_hat, &catalog.phi_hat, 1.0, 1e-10).unwrap();
        let cz = cz_constants(&st, 2.0, 1.0).unwrap();
        PerturbationPair { catalog, st, cz }
    }

    pub fn psi(&self) -> &FrequencyFunction {
        &self.catalog.mu_hat
    }

    pub fn phi(&self) -> &FrequencyFunction {
        &self.catalog.phi_hat
    }
}

/// Catalog expressions with the region where their jets are sampled.
pub fn jet_targets(c: &MexicanHatCatalog) -> Vec<(&'static str, &FrequencyFunction, f64, f64)> {
    vec![
        ("psi_hat", &c.psi_hat, -1.5, 1.5),
        ("ramp", &c.ramp, -0.5, 1.5),
        ("cutoff", &c.cutoff, -1.0, 1.0),
        ("bump", &c.bump, -0.5, 0.5),
        ("psi_star_hat", &c.psi_star_hat, -0.75, 0.75),
        ("mu_hat", &c.mu_hat, -1.5, 1.5),
        ("phi_hat", &c.phi_hat, -0.4, 0.4),
    ]
}

const FD_STEP: f64 = 1e-4;

/// Richardson-extrapolated central difference of jet component `d − 1`.
fn fd_component(f: &FrequencyFunction, x: f64, d: usize) -> f64 {
    let c = |t: f64| f.evaluate(t).unwrap().deriv(d - 1);
    let central = |h: f64| (c(x + h) - c(x - h)) / (2.0 * h);
    (4.0 * central(FD_STEP / 2.0) - central(FD_STEP)) / 3.0
}

/// Largest relative deviation between jet derivatives and finite differences
/// over `n` random points at least `10h` away from every breakpoint.
///
/// Relative error uses `max(|jet|, 1e-4·scale_d)` in the denominator, where
/// `scale_d` is the largest `|f⁽ᵈ⁾|` seen over the sample.
pub fn jet_fd_deviation(f: &FrequencyFunction, lo: f64, hi: f64, n: usize, rng: &mut TestRng) -> f64 {
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x: f64 = rng.gen_range(lo..hi);
        if f.breakpoints().iter().all(|b| (b - x).abs() > 10.0 * FD_STEP) {
            points.push(x);
        }
    }
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        let jets: Vec<f64> = points.iter().map(|&x| f.evaluate(x).unwrap().deriv(d)).collect();
        let scale = jets.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        for (&x, &jet) in points.iter().zip(&jets) {
            let fd = fd_component(f, x, d);
            worst = worst.max((fd - jet).abs() / jet.abs().max(1e-4 * scale));
        }
    }
    worst
}

/// Half-integer probe grid; the arguments `x − k` repeat across grid points.
pub const PROBE: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Largest `|K₀ time − K₀ freq|` over the 5×5 probe grid.
pub fn dual_route_deviation(pair: &PerturbationPair) -> f64 {
    const K: i64 = 170;
    let mu = TimeFunction::from_frequency(pair.psi(), 1e-13).unwrap();
    let phi = TimeFunction::from_frequency(pair.phi(), 1e-13).unwrap();
    let mut args: Vec<f64> = PROBE.iter().flat_map(|&x| lattice_arguments(x, 1.0, K)).collect();
    args.sort_by(f64::total_cmp);
    args.dedup();
    mu.prefetch(&args).unwrap();
    phi.prefetch(&args).unwrap();
    let mut worst: f64 = 0.0;
    for &x in &PROBE {
        for &y in &PROBE {
            let t = kernel0_time(&mu, &phi, x, y, 1.0, K, 1e-9).unwrap();
            let f = kernel0_freq(pair.psi(), pair.phi(), x, y, 1.0, 64, 1e-12).unwrap();
            worst = worst.max((t.value - f.value).abs());
        }
    }
    worst
}

/// Worst ratio `|K₀| / (min{σ₁, τ₁/z²} + error)` over random points.
pub fn k0_decay_ratio(pair: &PerturbationPair, n: usize, rng: &mut TestRng) -> f64 {
    let s1 = pair.st.sigma1.certified_upper();
    let t1 = pair.st.tau1.certified_upper();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let y: f64 = rng.gen_range(-5.0..5.0);
        let z: f64 = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let k = kernel0_freq(pair.psi(), pair.phi(), y + z, y, 1.0, 64, 1e-12).unwrap();
        worst = worst.max(k.value.abs() / (s1.min(t1 / (z * z)) + k.error));
    }
    worst
}

/// Largest `j` with `2ʲ|z| ≤ 64`.
fn j_max_for(z: f64) -> i32 {
    (64.0 / z.abs()).log2().floor() as i32
}

/// Worst ratio `|K| / (C₁/|z| + tail + error)` for the dilation sum.
pub fn kernel_decay_ratio(pair: &PerturbationPair, n: usize, rng: &mut TestRng) -> f64 {
    let c1 = pair.cz.C1.certified_upper();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let y: f64 = rng.gen_range(-5.0..5.0);
        let z: f64 = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let q = KernelQuery { x: y + z, y, j_min: -20, j_max: j_max_for(z), k_truncation: 1, l_truncation: 64, tol: 1e-12 };
        let k = kernel_sum(pair.psi(), pair.phi(), 2.0, 1.0, &q, pair.st.sigma1.certified_upper(), pair.st.tau1.certified_upper())
            .unwrap();
        worst = worst.max(k.value.abs() / (c1 / z.abs() + k.tail + k.error));
    }
    worst
}

fn fd_x<F: Fn(f64) -> f64>(k: F, x: f64, h: f64) -> f64 {
    let central = |h: f64| (k(x + h) - k(x - h)) / (2.0 * h);
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

/// Worst ratio `|∂K₀/∂x| / (min{σ₂, τ₂/|z|³} + slack)` by finite differences.
pub fn k0_derivative_ratio(pair: &PerturbationPair, n: usize, rng: &mut TestRng) -> f64 {
    let s2 = pair.st.sigma2.certified_upper();
    let t2 = pair.st.tau2.certified_upper();
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let y: f64 = rng.gen_range(-5.0..5.0);
        let z: f64 = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let k = |x: f64| kernel0_freq(pair.psi(), pair.phi(), x, y, 1.0, 64, 1e-13).unwrap().value;
        let d = fd_x(k, y + z, h);
        // quadrature noise amplified by the difference quotient
        let slack = 1e-13 / h;
        worst = worst.max(d.abs() / (s2.min(t2 / z.abs().powi(3)) + slack));
    }
    worst
}

/// Worst ratio `|∂K/∂x| / (C₂/(4z²) + tail + slack)` for the dilation sum.
pub fn kernel_derivative_ratio(pair: &PerturbationPair, n: usize, rng: &mut TestRng) -> f64 {
    let c2 = pair.cz.C2.certified_upper();
    let s2 = pair.st.sigma2.certified_upper();
    let t2 = pair.st.tau2.certified_upper();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let y: f64 = rng.gen_range(-5.0..5.0);
        let z: f64 = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (j_min, j_max) = (-20, j_max_for(z));
        // step small against the finest scale 2^{-j_max}
        let h = 1e-3 * 2f64.powi(-j_max).min(1.0);
        let k = |x: f64| {
            let q = KernelQuery { x, y, j_min, j_max, k_truncation: 1, l_truncation: 64, tol: 1e-13 };
            kernel_sum(pair.psi(), pair.phi(), 2.0, 1.0, &q, 0.0, 0.0).unwrap().value
        };
        let d = fd_x(k, y + z, h);
        let envelope = |j: i32| 4f64.powi(j) * s2.min(t2 / (2f64.powi(j) * z.abs()).powi(3));
        let tail: f64 = ((j_max + 1)..(j_max + 200)).map(envelope).sum::<f64>() + ((j_min - 200)..j_min).map(envelope).sum::<f64>();
        let slack = 1e-13 * 2f64.powi(j_max + 1) / h;
        worst = worst.max(d.abs() / (c2 / (4.0 * z * z) + tail + slack));
    }
    worst
}

/// Largest `|K₀(x+B, y+B) − K₀(x, y)|` over random points.
pub fn periodicity_deviation(pair: &PerturbationPair, n: usize, rng: &mut TestRng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let x: f64 = rng.gen_range(-3.0..3.0);
        let y: f64 = rng.gen_range(-3.0..3.0);
        let a = kernel0_freq(pair.psi(), pair.phi(), x, y, 1.0, 64, 1e-13).unwrap().value;
        let b = kernel0_freq(pair.psi(), pair.phi(), x + 1.0, y + 1.0, 1.0, 64, 1e-13).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    worst
}
