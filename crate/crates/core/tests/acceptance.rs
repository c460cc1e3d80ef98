//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use common::*;
use framecert::certify::{certify, Certificate, FramePairConfig, Verdict};
use framecert::cli::to_json;
use framecert::czconst::{geometric_sum_prefactor, DecayKind};
use framecert::hardy::{c_interp, c_p, Space};
use framecert::mexhat::{build_catalog, ramp};
use rand::Rng;

/// Allowed excess over a published constant.
const CONSTANT_SLACK: f64 = 1.10;
/// Allowed excess over the published L² deviation.
const DELTA_SLACK: f64 = 1.15;
const NP_EQUALITY_REL: f64 = 1e-12;
const INTERP_EXACT: f64 = 1e-12;
const INTERP_ASYMPTOTIC: f64 = 0.02;
const ORACLE_MARGIN: f64 = -1e-12;
const PARTITION_ABS: f64 = 1e-10;
const JET_REL: f64 = 1e-5;
const DUAL_ROUTE_ABS: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn compare(name: &str, got: f64, published: f64, slack: f64) -> (bool, bool, String) {
    (got <= published * slack, got <= published, format!("{name} {got:.5e} (≤ {published})"))
}

fn table(rows: Vec<(bool, bool, String)>) -> Outcome {
    let pass = rows.iter().all(|r| r.0);
    let strict = rows.iter().all(|r| r.1);
    let body: Vec<String> = rows.into_iter().map(|r| r.2).collect();
    outcome(pass, format!("{}; strictly within published: {strict}", body.join(", ")))
}

fn sigma_tau_reproduction(cert: &Certificate) -> Outcome {
    let st = cert.sigma_tau.synthesizer_perturbation.expect("synthesizer piece");
    let published = [0.000045, 0.00022, 0.000067, 0.00086, 0.036, 0.014];
    let names = ["σ1", "σ2", "σ3", "τ1", "τ2", "τ3"];
    let got = [st.sigma1, st.sigma2, st.sigma3, st.tau1, st.tau2, st.tau3];
    table((0..6).map(|i| compare(names[i], got[i].certified_upper(), published[i], CONSTANT_SLACK)).collect())
}

fn cz_reproduction(cert: &Certificate) -> Outcome {
    let cz = cert.cz_constants.synthesizer_perturbation.expect("synthesizer piece");
    let prefactors_exact = geometric_sum_prefactor(DecayKind::Quadratic, 2.0).unwrap() == 4.0
        && (4.0 * geometric_sum_prefactor(DecayKind::Cubic, 2.0).unwrap() - 40.0 / 3.0).abs() < 1e-14;
    let mut t = table(vec![
        compare("C1", cz.C1.certified_upper(), 0.00079, CONSTANT_SLACK),
        compare("C2", cz.C2.certified_upper(), 0.088, CONSTANT_SLACK),
        compare("C3", cz.C3.certified_upper(), 0.032, CONSTANT_SLACK),
    ]);
    t.pass &= prefactors_exact;
    t.detail.push_str(&format!("; prefactors 4 and 40/3: {prefactors_exact}"));
    t
}

fn delta_reproduction(cert: &Certificate) -> Outcome {
    let d = cert.delta.synthesizer_perturbation.as_ref().expect("synthesizer piece");
    let (pass, strict, s) = compare("Δ", d.bound.certified_upper(), 0.00026, DELTA_SLACK);
    outcome(pass, format!("{s}, grid levels {}; strictly within published: {strict}", d.grid_levels))
}

fn frame_bounds(cert: &Certificate) -> Outcome {
    let cfg = FramePairConfig::mexican_hat();
    let c = build_catalog();
    let pair = framecert::certify::analyze_pair(&c.mu_hat, &c.phi_hat, 2.0, 1.0, &cfg.tolerances).unwrap().unwrap();
    let n1 = pair.n(Space::H1, 90.0).unwrap();
    let n_inf = pair.n(Space::Bmo, 180.0).unwrap();
    let o1 = cert.n1.synthesizer_perturbation.unwrap();
    let oi = cert.n_inf.synthesizer_perturbation.unwrap();
    let pass = n1 < 0.0075
        && n_inf < 0.011
        && o1.value <= n1
        && oi.value <= n_inf
        && cert.m1 < 1.0
        && cert.m_inf < 1.0
        && cert.verdict == Verdict::BijectiveH1LpBmo;
    outcome(
        pass,
        format!(
            "N1(90) {n1:.5e} < 0.0075, N∞(180) {n_inf:.5e} < 0.011, optima {:.5e} at ζ {:.1} and {:.5e} at ζ {:.1}, M1 {:.5e}, M∞ {:.5e}, verdict {:?}",
            o1.value, o1.zeta, oi.value, oi.zeta, cert.m1, cert.m_inf, cert.verdict
        ),
    )
}

fn lp_table(cert: &Certificate) -> Outcome {
    let delta = cert.delta.synthesizer_perturbation.as_ref().unwrap().bound.certified_upper();
    let mut pass = true;
    let mut cells = Vec::new();
    for p in [1.04, 1.2, 1.5, 2.0] {
        match cert.np_table.iter().find(|r| r.p == p && r.zeta == 50.0) {
            Some(r) => {
                pass &= r.value < 1.0;
                cells.push(format!("p={p}: {:.5e}", r.value));
                if p == 2.0 {
                    let rel = (r.value - delta).abs() / delta;
                    pass &= rel <= NP_EQUALITY_REL;
                    cells.push(format!("|N2 − Δ|/Δ = {rel:.1e}"));
                }
            }
            None => {
                pass = false;
                cells.push(format!("p={p}: missing"));
            }
        }
    }
    outcome(pass, cells.join(", "))
}

fn interpolation_constants() -> Outcome {
    let mut worst: f64 = (c_p(2.0).unwrap() - 1.0).abs();
    for r in [1.0, 1.2, 1.5, 1.9] {
        worst = worst.max((c_interp(2.0, r).unwrap() - 1.0).abs());
    }
    let p = 1.0001;
    let asym = c_p(p).unwrap() * (p - 1.0) / 4.0;
    let pass = worst <= INTERP_EXACT && (asym - 1.0).abs() <= INTERP_ASYMPTOTIC;
    outcome(pass, format!("max |c(2,r) − 1| = {worst:.1e}, c(p)(p−1)/4 at p=1.0001 = {asym:.5}"))
}

fn geometric_sum_oracle() -> Outcome {
    let mut r = rng(301);
    let mut margin = f64::INFINITY;
    for _ in 0..200 {
        let s: f64 = 10f64.powf(r.gen_range(-6.0..1.0));
        let t: f64 = 10f64.powf(r.gen_range(-6.0..1.0));
        let a: f64 = r.gen_range(1.05..6.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let z: f64 = 10f64.powf(r.gen_range(-2.0..2.0)) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let m = a.abs();
        let quad: f64 = (-80..=80).map(|j| m.powi(j) * s.min(t / (a.powi(j) * z).powi(2))).sum();
        let cubic: f64 = (-80..=80).map(|j| m.powi(2 * j) * s.min(t / (a.powi(j) * z).abs().powi(3))).sum();
        let qb = geometric_sum_prefactor(DecayKind::Quadratic, a).unwrap() * (s * t).sqrt() / z.abs();
        let cb = geometric_sum_prefactor(DecayKind::Cubic, a).unwrap() * (s * t * t).cbrt() / (z * z);
        margin = margin.min((qb - quad) / qb).min((cb - cubic) / cb);
    }
    outcome(margin >= ORACLE_MARGIN, format!("200 instances, smallest relative margin {margin:.3e}"))
}

fn partition_identities() -> Outcome {
    let c = build_catalog();
    let mut r = rng(302);
    let radius = |r: &mut TestRng| 10f64.powf(r.gen_range(-6.0..6.0)) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (mut e_ramp, mut e_bump, mut e_cald): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let x: f64 = r.gen_range(-2.0..3.0);
        e_ramp = e_ramp.max((ramp(x).c0 + ramp(1.0 - x).c0 - 1.0).abs());
    }
    for _ in 0..1000 {
        let x = radius(&mut r);
        let s: f64 = (-40..=40).map(|j| c.bump.value(2f64.powi(j) * x).unwrap()).sum();
        e_bump = e_bump.max((s - 1.0).abs());
    }
    for _ in 0..1000 {
        let x = radius(&mut r);
        let s: f64 = (-40..=40)
            .map(|j| {
                let y = 2f64.powi(j) * x;
                c.psi_star_hat.value(y).unwrap() * c.phi_hat.value(y).unwrap()
            })
            .sum();
        e_cald = e_cald.max((s - 1.0).abs());
    }
    let pass = e_ramp < PARTITION_ABS && e_bump < PARTITION_ABS && e_cald < PARTITION_ABS;
    outcome(pass, format!("ramp {e_ramp:.1e}, dyadic bump {e_bump:.1e}, Calderón {e_cald:.1e}"))
}

fn jet_correctness() -> Outcome {
    let c = build_catalog();
    let mut r = rng(303);
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (name, f, lo, hi) in jet_targets(&c) {
        let d = jet_fd_deviation(f, lo, hi, 500, &mut r);
        worst = worst.max(d);
        cells.push(format!("{name} {d:.1e}"));
    }
    outcome(worst < JET_REL, format!("500 points each, worst relative deviation: {}", cells.join(", ")))
}

fn kernel_checks() -> Outcome {
    let pair = PerturbationPair::new();
    let dual = dual_route_deviation(&pair);
    let k0 = k0_decay_ratio(&pair, 100, &mut rng(304));
    let k = kernel_decay_ratio(&pair, 100, &mut rng(305));
    let pass = dual < DUAL_ROUTE_ABS && k0 <= 1.0 && k <= 1.0;
    outcome(
        pass,
        format!("5×5 dual-route max deviation {dual:.2e}; worst |K0|/bound {k0:.3}; worst |K|/bound {k:.3} (100 points each)"),
    )
}

fn determinism() -> Outcome {
    let cfg = FramePairConfig::mexican_hat();
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| to_json(&certify(&cfg).unwrap()))
    };
    let a = run(1);
    let b = run(4);
    let c = run(4);
    let d = run(2);
    outcome(a == b && b == c && c == d, format!("{} bytes, identical across 1, 2 and 4 workers: {}", a.len(), a == b && b == c && c == d))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        }
    }
}

fn main() -> ExitCode {
    let start = std::time::Instant::now();
    let cert = certify(&FramePairConfig::mexican_hat());
    let elapsed = start.elapsed().as_secs_f64();
    let cert = match cert {
        Ok(c) => Some(c),
        Err(e) => {
            println!("certification failed: {e}");
            None
        }
    };
    let cert = cert.as_ref();
    let with_cert = |f: fn(&Certificate) -> Outcome| -> Box<dyn FnOnce() -> Outcome + '_> {
        Box::new(move || match cert {
            Some(c) => f(c),
            None => outcome(false, "no certificate"),
        })
    };
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("sigma/tau reproduction", with_cert(sigma_tau_reproduction)),
        ("kernel constants", with_cert(cz_reproduction)),
        ("L2 deviation", with_cert(delta_reproduction)),
        ("frame bounds and verdict", with_cert(frame_bounds)),
        ("Lp table", with_cert(lp_table)),
        ("interpolation constants", Box::new(interpolation_constants)),
        ("geometric sum oracle", Box::new(geometric_sum_oracle)),
        ("partition identities", Box::new(partition_identities)),
        ("jet correctness", Box::new(jet_correctness)),
        ("kernel dual route and decay", Box::new(kernel_checks)),
        ("determinism", Box::new(determinism)),
    ];
    println!("acceptance: Mexican hat certification took {elapsed:.2} s");
    let mut failures = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let o = guarded(check);
        if !o.pass {
            failures += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
