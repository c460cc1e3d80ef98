//! Bijectivity certificates for wavelet frame operators.
//!
//! The frame operator of a pair `(ψ, φ)` is compared with a reference pair
//! `(ψ*, φ*)` that reconstructs perfectly. The deviation splits as
//! `(S_ψ − S_ψ*)T_φ + S_ψ*(T_φ − T_φ*)`; each piece is a Calderón–Zygmund
//! operator whose H¹, BMO and Lᵖ norms are bounded from its L² norm and
//! kernel constants. Bijectivity follows when both summed bounds are
//! below one.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::czconst::{cz_constants, sigma_tau, CZConstants, SigmaTau};
use crate::error::{domain, Error, Result};
use crate::funcexpr::{Expr, FrequencyFunction};
use crate::hardy::{czo_norm_bound, CZONormInputs, Space};
use crate::mexhat::build_catalog;
use crate::quad::BoundWithError;

/// Numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance of each lattice-sum quantity.
    pub quadrature: f64,
    /// Points per unit-length period in the first sup grid.
    pub delta_initial_points: usize,
    /// Relative change of refined sups at which grid doubling stops.
    pub delta_grid: f64,
    pub delta_max_levels: usize,
    /// Acceptable deviation when verifying perfect reconstruction.
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-10,
            delta_initial_points: 257,
            delta_grid: 1e-8,
            delta_max_levels: 8,
            reconstruction: 1e-9,
        }
    }
}

/// Declarative description of a frame pair and its reference pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramePairConfig {
    pub synthesizer: FrequencyFunction,
    pub analyzer: FrequencyFunction,
    pub reference_synthesizer: FrequencyFunction,
    pub reference_analyzer: FrequencyFunction,
    /// Closed form of `ψ̂ − ψ̂*`, checked against the difference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesizer_perturbation: Option<FrequencyFunction>,
    /// Closed form of `φ̂ − φ̂*`, checked against the difference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyzer_perturbation: Option<FrequencyFunction>,
    pub dilation: f64,
    pub translation: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_zeta_max")]
    pub zeta_max: f64,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_np_zeta")]
    pub np_zeta: f64,
    /// Use `(S_ψ − S_ψ*)T_φ* + S_ψ(T_φ − T_φ*)` instead.
    #[serde(default)]
    pub alt_decomposition: bool,
    /// Skip the numerical check that the reference pair reconstructs perfectly.
    #[serde(default)]
    pub assert_perfect_reconstruction: bool,
}

fn default_zeta_max() -> f64 {
    1e4
}

fn default_p_grid() -> Vec<f64> {
    vec![1.04, 1.2, 1.5, 2.0]
}

fn default_np_zeta() -> f64 {
    50.0
}

impl FramePairConfig {
    /// The Mexican hat pair with its compactly supported reference.
    pub fn mexican_hat() -> Self {
        let c = build_catalog();
        FramePairConfig {
            synthesizer: c.psi_hat.clone(),
            analyzer: c.phi_hat.clone(),
            reference_synthesizer: c.psi_star_hat.clone(),
            reference_analyzer: c.phi_star_hat().clone(),
            synthesizer_perturbation: Some(c.mu_hat.clone()),
            analyzer_perturbation: None,
            dilation: c.dilation,
            translation: c.translation,
            tolerances: Tolerances::default(),
            zeta_max: default_zeta_max(),
            p_grid: default_p_grid(),
            np_zeta: default_np_zeta(),
            alt_decomposition: false,
            assert_perfect_reconstruction: false,
        }
    }

    /// The reference pair certified against itself.
    pub fn reference_only(psi_star: FrequencyFunction, phi_star: FrequencyFunction, dilation: f64, translation: f64) -> Self {
        FramePairConfig {
            synthesizer: psi_star.clone(),
            analyzer: phi_star.clone(),
            reference_synthesizer: psi_star,
            reference_analyzer: phi_star,
            synthesizer_perturbation: None,
            analyzer_perturbation: None,
            dilation,
            translation,
            tolerances: Tolerances::default(),
            zeta_max: default_zeta_max(),
            p_grid: default_p_grid(),
            np_zeta: default_np_zeta(),
            alt_decomposition: false,
            assert_perfect_reconstruction: false,
        }
    }

    /// Field-level validation; messages start with the offending field name.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if !(self.dilation.is_finite() && self.dilation.abs() > 1.0) {
            return bad("dilation", format!("|A| must exceed 1, got {}", self.dilation));
        }
        if !(self.translation.is_finite() && self.translation > 0.0) {
            return bad("translation", format!("B must be positive, got {}", self.translation));
        }
        if !(self.zeta_max.is_finite() && self.zeta_max >= 3.0) {
            return bad("zeta_max", format!("must be finite and ≥ 3, got {}", self.zeta_max));
        }
        if !(self.np_zeta.is_finite() && self.np_zeta >= 3.0) {
            return bad("np_zeta", format!("must be finite and ≥ 3, got {}", self.np_zeta));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return bad("p_grid", format!("exponents must lie in (1, ∞), got {p}"));
        }
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.quadrature.is_finite()) {
            return bad("tolerances.quadrature", format!("must be positive, got {}", t.quadrature));
        }
        if t.delta_initial_points < 3 {
            return bad("tolerances.delta_initial_points", format!("need at least 3, got {}", t.delta_initial_points));
        }
        if !(t.delta_grid > 0.0 && t.delta_grid.is_finite()) {
            return bad("tolerances.delta_grid", format!("must be positive, got {}", t.delta_grid));
        }
        if !(t.reconstruction > 0.0 && t.reconstruction.is_finite()) {
            return bad("tolerances.reconstruction", format!("must be positive, got {}", t.reconstruction));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// L² deviation

/// Outcome of the L² deviation bound, with grid metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub bound: BoundWithError,
    /// `sup |Σⱼ ψ̂(Aʲξ)φ̂(Aʲξ) − target|`.
    pub main_term: f64,
    /// `sup Σⱼ Σ_{l≠0} |ψ̂(Aʲξ)φ̂(Aʲξ + l/B)|`.
    pub row_sup: f64,
    /// `sup Σⱼ Σ_{l≠0} |ψ̂(Aʲξ − l/B)φ̂(Aʲξ)|`.
    pub column_sup: f64,
    pub grid_spacing: f64,
    pub grid_levels: usize,
    pub error_model: String,
}

/// Grid settings for the sups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGrid {
    pub initial_points: usize,
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl From<&Tolerances> for DeltaGrid {
    fn from(t: &Tolerances) -> Self {
        DeltaGrid { initial_points: t.delta_initial_points, rel_tol: t.delta_grid, max_levels: t.delta_max_levels }
    }
}

/// Radius outside which `f` and its derivatives are negligible or zero.
fn reach(f: &FrequencyFunction) -> Result<f64> {
    if f.support().is_bounded() {
        return Ok(f.support().hull().map_or(0.0, |h| h.hi.abs().max(h.lo.abs())));
    }
    f.envelope()
        .map(|e| e.negligible_radius(1e-300))
        .ok_or_else(|| Error::Unsupported("unbounded function without a decay envelope".into()))
}

struct DeltaProbe<'a> {
    psi: &'a FrequencyFunction,
    phi: &'a FrequencyFunction,
    dilation: f64,
    step: f64,
    target: f64,
    reach_psi: f64,
    reach_phi: f64,
}

/// Dilates below this radius contribute nothing measurable.
const INNER_RADIUS: f64 = 1e-10;

impl DeltaProbe<'_> {
    /// `(|t₀(ξ) − target|, row(ξ), column(ξ))`.
    fn eval(&self, xi: f64) -> Result<[f64; 3]> {
        let outer = self.reach_psi.max(self.reach_phi);
        let mut main = 0.0;
        let mut row = 0.0;
        let mut col = 0.0;
        let mut visit = |x: f64| -> Result<()> {
            let p = self.psi.value(x)?;
            let q = self.phi.value(x)?;
            main += p * q;
            if p != 0.0 {
                let lo = (self.step * (-self.reach_phi - x)).ceil() as i64;
                let hi = (self.step * (self.reach_phi - x)).floor() as i64;
                for l in (lo..=hi).filter(|l| *l != 0) {
                    row += (p * self.phi.value(x + l as f64 / self.step)?).abs();
                }
            }
            if q != 0.0 {
                let lo = (self.step * (x - self.reach_psi)).ceil() as i64;
                let hi = (self.step * (x + self.reach_psi)).floor() as i64;
                for l in (lo..=hi).filter(|l| *l != 0) {
                    col += (q * self.psi.value(x - l as f64 / self.step)?).abs();
                }
            }
            Ok(())
        };
        let mut x = xi;
        while x.abs() <= outer {
            visit(x)?;
            x *= self.dilation;
        }
        let mut x = xi / self.dilation;
        while x.abs() >= INNER_RADIUS {
            if x.abs() <= outer {
                visit(x)?;
            }
            x /= self.dilation;
        }
        Ok([(main - self.target).abs(), row, col])
    }
}

/// Golden-section maximization of a unimodal-near-peak function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if (b - a).abs() <= 1e-14 * a.abs().max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Daubechies-type bound on `‖ST − target·Id‖` over L².
///
/// The symbol deviation is taken over one dilation period `1 ≤ |ξ| ≤ |A|`,
/// and the lattice cross terms by the Schur test on their row and column
/// sums. Sups are estimated on a doubling grid with golden-section polish
/// around each grid maximizer; the error field is the change between the
/// last two levels.
pub fn daubechies_l2_bound(
    psi: &FrequencyFunction,
    phi: &FrequencyFunction,
    dilation: f64,
    step: f64,
    target: f64,
    grid: DeltaGrid,
) -> Result<DeltaReport> {
    if !(dilation.is_finite() && dilation.abs() > 1.0) {
        return Err(Error::InvalidDilation(dilation));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidTranslation(step));
    }
    if target != 0.0 && target != 1.0 {
        return Err(domain("daubechies_l2_bound", format!("target must be 0 or 1, got {target}")));
    }
    let error_model = "grid-resolution heuristic".to_string();
    if psi.is_identically_zero() || phi.is_identically_zero() {
        let main = target;
        return Ok(DeltaReport {
            bound: BoundWithError::exact(main),
            main_term: main,
            row_sup: 0.0,
            column_sup: 0.0,
            grid_spacing: 0.0,
            grid_levels: 0,
            error_model,
        });
    }
    let probe = DeltaProbe { psi, phi, dilation, step, target, reach_psi: reach(psi)?, reach_phi: reach(phi)? };
    let m = dilation.abs();
    // breakpoint images inside the period, both signs
    let mut special = Vec::new();
    for &b in psi.breakpoints().iter().chain(phi.breakpoints()) {
        if b == 0.0 {
            continue;
        }
        let mut r = b.abs();
        while r > m {
            r /= m;
        }
        while r < 1.0 {
            r *= m;
        }
        special.push(r);
        special.push(-r);
    }

    let mut prev: Option<[f64; 3]> = None;
    let mut change = [f64::INFINITY; 3];
    let mut spacing;
    for level in 0..=grid.max_levels {
        let per_sign = (grid.initial_points - 1) * (1 << level) + 1;
        spacing = (m - 1.0) / (per_sign - 1) as f64;
        let mut pts: Vec<f64> = (0..per_sign)
            .flat_map(|i| {
                let r = 1.0 + (m - 1.0) * i as f64 / (per_sign - 1) as f64;
                [r, -r]
            })
            .collect();
        pts.extend_from_slice(&special);
        let vals: Vec<Result<[f64; 3]>> = pts.par_iter().map(|&x| probe.eval(x)).collect();
        let mut best = [(0.0f64, f64::NEG_INFINITY); 3];
        for (x, v) in pts.iter().zip(vals) {
            let v = v?;
            for k in 0..3 {
                if v[k] > best[k].1 {
                    best[k] = (*x, v[k]);
                }
            }
        }
        let mut sups = [0.0; 3];
        for k in 0..3 {
            let (x0, v0) = best[k];
            let (lo, hi) = if x0 > 0.0 { (1.0, m) } else { (-m, -1.0) };
            let a = (x0 - spacing).max(lo);
            let b = (x0 + spacing).min(hi);
            let (_, vr) = golden_max(|x| Ok(probe.eval(x)?[k]), a, b)?;
            sups[k] = v0.max(vr);
        }
        if let Some(p) = prev {
            let mut converged = true;
            for k in 0..3 {
                change[k] = (sups[k] - p[k]).abs();
                // roundoff-level sups count as converged
                if change[k] > grid.rel_tol * sups[k] + 64.0 * f64::EPSILON {
                    converged = false;
                }
            }
            if converged {
                return Ok(assemble_delta(sups, change, spacing, level, error_model));
            }
        }
        prev = Some(sups);
    }
    let worst = change.iter().cloned().fold(0.0, f64::max);
    Err(Error::GridStall { change: worst, tol: grid.rel_tol })
}

fn assemble_delta(sups: [f64; 3], change: [f64; 3], spacing: f64, levels: usize, error_model: String) -> DeltaReport {
    let [main, row, col] = sups;
    let est = main + (row * col).sqrt();
    let up = main + change[0] + ((row + change[1]) * (col + change[2])).sqrt();
    DeltaReport {
        bound: BoundWithError::new(est, (up - est).max(0.0)),
        main_term: main,
        row_sup: row,
        column_sup: col,
        grid_spacing: spacing,
        grid_levels: levels,
        error_model,
    }
}

// ---------------------------------------------------------------------------
// Norm bounds and ζ optimization

/// Minimizer and value of a ζ objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaOpt {
    pub zeta: f64,
    pub value: f64,
}

/// Norm bound of a perturbation operator with L² bound `l2_norm` and kernel constants `cz`.
pub fn n_bound(space: Space, l2_norm: f64, cz: &CZConstants, zeta: f64) -> Result<f64> {
    let inputs = CZONormInputs { l2_norm, C2: cz.C2.certified_upper(), C3: cz.C3.certified_upper(), zeta };
    czo_norm_bound(space, &inputs)
}

const ZETA_SCAN_POINTS: usize = 64;

/// Log-grid scan of `[lo, hi]` then golden-section refinement in the best bracket.
pub fn optimize_zeta(objective: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<ZetaOpt> {
    if !(lo >= 3.0 && hi >= lo && hi.is_finite()) {
        return Err(domain("optimize_zeta", format!("range [{lo}, {hi}] must lie in [3, ∞)")));
    }
    let n = ZETA_SCAN_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo * (hi / lo).powf(i as f64 / (n - 1) as f64) })
        .collect();
    let mut best = ZetaOpt { zeta: lo, value: f64::INFINITY };
    let mut best_i = 0;
    for (i, &z) in grid.iter().enumerate() {
        let v = objective(z)?;
        if v < best.value {
            best = ZetaOpt { zeta: z, value: v };
            best_i = i;
        }
    }
    let a = grid[best_i.saturating_sub(1)];
    let b = grid[(best_i + 1).min(n - 1)];
    let (z, v) = golden_max(|z| Ok(-objective(z)?), a, b)?;
    if -v < best.value {
        best = ZetaOpt { zeta: z, value: -v };
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Perturbation pairs

/// Constants of one perturbation operator `S_f T_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAnalysis {
    pub sigma_tau: SigmaTau,
    pub cz: CZConstants,
    pub delta: DeltaReport,
}

impl PairAnalysis {
    pub fn l2_norm(&self) -> f64 {
        self.delta.bound.certified_upper()
    }

    pub fn n(&self, space: Space, zeta: f64) -> Result<f64> {
        n_bound(space, self.l2_norm(), &self.cz, zeta)
    }

    pub fn optimal(&self, space: Space, zeta_max: f64) -> Result<ZetaOpt> {
        optimize_zeta(|z| self.n(space, z), 3.0, zeta_max)
    }
}

/// σ/τ, kernel constants and L² bound of `S_f T_g`; `None` when a factor vanishes.
pub fn analyze_pair(
    f: &FrequencyFunction,
    g: &FrequencyFunction,
    dilation: f64,
    step: f64,
    tol: &Tolerances,
) -> Result<Option<PairAnalysis>> {
    if f.is_identically_zero() || g.is_identically_zero() {
        return Ok(None);
    }
    let (st, delta) = rayon::join(
        || sigma_tau(f, g, step, tol.quadrature),
        || daubechies_l2_bound(f, g, dilation, step, 0.0, DeltaGrid::from(tol)),
    );
    let st = st?;
    let cz = cz_constants(&st, dilation, step)?;
    Ok(Some(PairAnalysis { sigma_tau: st, cz, delta: delta? }))
}

/// Probe grid on which explicit perturbations are compared with differences.
fn check_perturbation(name: &str, explicit: &FrequencyFunction, a: &FrequencyFunction, b: &FrequencyFunction) -> Result<()> {
    for i in 0..=4000 {
        let x = -8.0 + 16.0 * i as f64 / 4000.0;
        let lhs = explicit.value(x)?;
        let va = a.value(x)?;
        let vb = b.value(x)?;
        if (lhs - (va - vb)).abs() > 1e-12 * (1.0 + va.abs() + vb.abs()) {
            return Err(Error::Config(format!("{name}: differs from the difference of the pair at ξ = {x}")));
        }
    }
    Ok(())
}

fn perturbation(
    name: &str,
    explicit: &Option<FrequencyFunction>,
    full: &FrequencyFunction,
    reference: &FrequencyFunction,
) -> Result<FrequencyFunction> {
    match explicit {
        Some(e) => {
            check_perturbation(name, e, full, reference)?;
            Ok(e.clone())
        }
        None => Ok(full.minus(reference)),
    }
}

/// The two operator pieces of the chosen decomposition.
struct Decomposition {
    synth: (FrequencyFunction, FrequencyFunction),
    anal: (FrequencyFunction, FrequencyFunction),
}

fn decompose(cfg: &FramePairConfig) -> Result<Decomposition> {
    let dpsi = perturbation("synthesizer_perturbation", &cfg.synthesizer_perturbation, &cfg.synthesizer, &cfg.reference_synthesizer)?;
    let dphi = perturbation("analyzer_perturbation", &cfg.analyzer_perturbation, &cfg.analyzer, &cfg.reference_analyzer)?;
    Ok(if cfg.alt_decomposition {
        Decomposition { synth: (dpsi, cfg.reference_analyzer.clone()), anal: (cfg.synthesizer.clone(), dphi) }
    } else {
        Decomposition { synth: (dpsi, cfg.analyzer.clone()), anal: (cfg.reference_synthesizer.clone(), dphi) }
    })
}

/// Values keyed by the two pieces of the decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMap<T> {
    pub synthesizer_perturbation: Option<T>,
    pub analyzer_perturbation: Option<T>,
}

impl<T> PairMap<T> {
    fn map<U>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<PairMap<U>> {
        Ok(PairMap {
            synthesizer_perturbation: self.synthesizer_perturbation.as_ref().map(&mut f).transpose()?,
            analyzer_perturbation: self.analyzer_perturbation.as_ref().map(&mut f).transpose()?,
        })
    }

    fn iter(&self) -> impl Iterator<Item = &T> {
        self.synthesizer_perturbation.iter().chain(self.analyzer_perturbation.iter())
    }
}

fn analyze_all(cfg: &FramePairConfig) -> Result<PairMap<PairAnalysis>> {
    let d = decompose(cfg)?;
    let (a, b) = rayon::join(
        || analyze_pair(&d.synth.0, &d.synth.1, cfg.dilation, cfg.translation, &cfg.tolerances),
        || analyze_pair(&d.anal.0, &d.anal.1, cfg.dilation, cfg.translation, &cfg.tolerances),
    );
    Ok(PairMap { synthesizer_perturbation: a?, analyzer_perturbation: b? })
}

/// `M_p` for `p ∈ {1, ∞}` (or any Lᵖ): the sum over both pieces of the ζ-optimized bounds.
pub fn m_bound(space: Space, cfg: &FramePairConfig) -> Result<f64> {
    cfg.validate()?;
    let pairs = analyze_all(cfg)?;
    let opt = pairs.map(|p| p.optimal(space, cfg.zeta_max))?;
    Ok(opt.iter().fold(0.0, |m, o| m + o.value))
}

// ---------------------------------------------------------------------------
// Certificate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "bijective_H1_Lp_BMO")]
    BijectiveH1LpBmo,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn from_bounds(m1: f64, m_inf: f64) -> Self {
        if m1 < 1.0 && m_inf < 1.0 {
            Verdict::BijectiveH1LpBmo
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpRow {
    pub p: f64,
    /// ζ at which `value` is evaluated.
    pub zeta: f64,
    /// Summed bound over both pieces at `zeta`.
    pub value: f64,
    pub per_pair: PairMap<f64>,
    /// Summed ζ-optimized bound.
    pub optimal_value: f64,
    pub below_one: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannRates {
    pub h1: f64,
    pub l2: f64,
    pub bmo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    /// `|f(0)|` for synthesizer, analyzer and both references.
    pub values_at_origin: [f64; 4],
    /// Checked numerically, or accepted as asserted.
    pub perfect_reconstruction: String,
    pub reconstruction_deviation: Option<BoundWithError>,
    /// Regularity and decay hypotheses are accepted as user assertions.
    pub asserted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub tolerances: Tolerances,
    pub zeta_range: [f64; 2],
    pub hypotheses: HypothesisCheck,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub inputs: FramePairConfig,
    pub sigma_tau: PairMap<SigmaTau>,
    pub cz_constants: PairMap<CZConstants>,
    pub delta: PairMap<DeltaReport>,
    pub n1: PairMap<ZetaOpt>,
    pub n_inf: PairMap<ZetaOpt>,
    pub m1: f64,
    pub m_inf: f64,
    pub np_table: Vec<NpRow>,
    pub verdict: Verdict,
    pub neumann_rates: NeumannRates,
    pub metadata: Metadata,
}

const ORIGIN_TOL: f64 = 1e-12;

fn check_hypotheses(cfg: &FramePairConfig) -> Result<HypothesisCheck> {
    let named = [
        ("synthesizer", &cfg.synthesizer),
        ("analyzer", &cfg.analyzer),
        ("reference_synthesizer", &cfg.reference_synthesizer),
        ("reference_analyzer", &cfg.reference_analyzer),
    ];
    let mut at_origin = [0.0; 4];
    for (k, (name, f)) in named.iter().enumerate() {
        at_origin[k] = f.value(0.0)?.abs();
        if at_origin[k] > ORIGIN_TOL {
            return Err(domain("hypotheses", format!("{name} must vanish at the origin, |f(0)| = {}", at_origin[k])));
        }
    }
    let (mode, deviation) = if cfg.assert_perfect_reconstruction {
        ("asserted".to_string(), None)
    } else {
        let d = daubechies_l2_bound(
            &cfg.reference_synthesizer,
            &cfg.reference_analyzer,
            cfg.dilation,
            cfg.translation,
            1.0,
            DeltaGrid::from(&cfg.tolerances),
        )?;
        if d.bound.certified_upper() > cfg.tolerances.reconstruction {
            return Err(domain(
                "hypotheses",
                format!(
                    "reference pair does not reconstruct perfectly: deviation bound {} > {}",
                    d.bound.certified_upper(),
                    cfg.tolerances.reconstruction
                ),
            ));
        }
        ("verified".to_string(), Some(d.bound))
    };
    Ok(HypothesisCheck {
        values_at_origin: at_origin,
        perfect_reconstruction: mode,
        reconstruction_deviation: deviation,
        asserted: vec![
            "all four functions lie in W^{3,1} ∩ W^{3,2}".into(),
            "synthesizer and analyzer satisfy the decay conditions of the kernel estimates".into(),
        ],
    })
}

/// Run the full certification.
pub fn certify(cfg: &FramePairConfig) -> Result<Certificate> {
    certify_with(cfg, false)
}

/// As [`certify`], optionally recording wall-clock time.
pub fn certify_with(cfg: &FramePairConfig, timings: bool) -> Result<Certificate> {
    let start = Instant::now();
    cfg.validate()?;
    let hypotheses = check_hypotheses(cfg)?;
    let pairs = analyze_all(cfg)?;

    let n1 = pairs.map(|p| p.optimal(Space::H1, cfg.zeta_max))?;
    let n_inf = pairs.map(|p| p.optimal(Space::Bmo, cfg.zeta_max))?;
    let m1: f64 = n1.iter().fold(0.0, |m, o| m + o.value);
    let m_inf: f64 = n_inf.iter().fold(0.0, |m, o| m + o.value);

    let mut np_table = Vec::with_capacity(cfg.p_grid.len());
    for &p in &cfg.p_grid {
        let per_pair = pairs.map(|a| a.n(Space::Lp(p), cfg.np_zeta))?;
        let opt = pairs.map(|a| a.optimal(Space::Lp(p), cfg.zeta_max))?;
        let optimal_value: f64 = opt.iter().fold(0.0, |m, o| m + o.value);
        np_table.push(NpRow {
            p,
            zeta: cfg.np_zeta,
            value: per_pair.iter().fold(0.0, |m, v| m + v),
            per_pair,
            optimal_value,
            below_one: optimal_value < 1.0,
        });
    }

    let verdict = Verdict::from_bounds(m1, m_inf);
    Ok(Certificate {
        inputs: cfg.clone(),
        sigma_tau: pairs.map(|p| Ok(p.sigma_tau))?,
        cz_constants: pairs.map(|p| Ok(p.cz))?,
        delta: pairs.map(|p| Ok(p.delta.clone()))?,
        n1,
        n_inf,
        m1,
        m_inf,
        np_table,
        verdict,
        neumann_rates: NeumannRates { h1: m1, l2: m1 / 2.0, bmo: m_inf },
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: cfg.tolerances,
            zeta_range: [3.0, cfg.zeta_max],
            hypotheses,
            timings: timings.then(|| Timings { total_seconds: start.elapsed().as_secs_f64() }),
        },
    })
}

/// Convenience: a frequency function from an expression, for configs built in code.
pub fn function(expr: Expr) -> Result<FrequencyFunction> {
    FrequencyFunction::new(expr)
}
