//! Command-line front end: argument parsing, config loading, certificate
//! serialization and plot-data emission.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::certify::{certify_with, Certificate, FramePairConfig, Verdict};
use crate::error::{Error, Result};
use crate::funcexpr::FrequencyFunction;
use crate::kernellab::kernel0_slice;
use crate::mexhat::build_catalog;

#[derive(Debug, Parser)]
#[command(name = "framecert", version, about = "Certified bounds for wavelet frame operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a frame pair described by a JSON config or a preset.
    Certify(CertifyArgs),
    /// Certify the built-in Mexican hat pair.
    MexicanHat(Overrides),
    /// Write a CSV slice of the level-0 kernel of the synthesizer perturbation.
    Kernel(KernelArgs),
    /// Write CSV samples of the preset's frequency functions.
    Plots(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    MexicanHat,
}

#[derive(Debug, Args)]
pub struct Source {
    /// JSON config file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub zeta_max: Option<f64>,
    /// Comma-separated Lᵖ exponents.
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    /// Use the alternative perturbation decomposition.
    #[arg(long)]
    pub alt_decomposition: bool,
    /// Record wall-clock time in the certificate (breaks byte reproducibility).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fixed second argument.
    #[arg(long, default_value_t = 0.0)]
    pub y: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub source: Source,
    /// Directory receiving one CSV per function.
    #[arg(long)]
    pub out: PathBuf,
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Line (1-based) of the first occurrence of `"key"` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// Parse and validate a config, with line-referenced messages.
pub fn parse_config(text: &str, origin: &str) -> Result<FramePairConfig> {
    let cfg: FramePairConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    cfg.validate().map_err(|e| match e {
        Error::Config(msg) => {
            let field = msg.split(':').next().unwrap_or_default();
            let key = field.rsplit('.').next().unwrap_or(field);
            match key_line(text, key) {
                Some(line) => Error::Config(format!("{origin}:{line}: {msg}")),
                None => Error::Config(format!("{origin}: {msg}")),
            }
        }
        other => other,
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<FramePairConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_config(&text, &path.display().to_string())
}

fn resolve(source: &Source) -> Result<FramePairConfig> {
    match (&source.config, source.preset) {
        (Some(p), _) => load_config(p),
        (None, Some(Preset::MexicanHat)) => Ok(FramePairConfig::mexican_hat()),
        (None, None) => Err(Error::Config("pass --config <path> or --preset mexican-hat".into())),
    }
}

fn apply(cfg: &mut FramePairConfig, o: &Overrides) -> Result<()> {
    if let Some(t) = o.tol {
        cfg.tolerances.quadrature = t;
    }
    if let Some(z) = o.zeta_max {
        cfg.zeta_max = z;
    }
    if let Some(p) = &o.p_grid {
        cfg.p_grid = p.clone();
    }
    if o.alt_decomposition {
        cfg.alt_decomposition = true;
    }
    cfg.validate()
}

/// JSON formatter writing every float with 17 significant digits.
struct SigFigs(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Deterministic pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Run `f` on a pool capped by `FRAMECERT_THREADS`, when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("FRAMECERT_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::Config(format!("FRAMECERT_THREADS must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            io::stdout().write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))?;
            Ok(())
        }
    }
}

fn run_certify(mut cfg: FramePairConfig, o: &Overrides) -> Result<Certificate> {
    apply(&mut cfg, o)?;
    let cert = with_thread_cap(|| certify_with(&cfg, o.timings))??;
    write_output(o.out.as_deref(), &to_json(&cert))?;
    eprintln!(
        "verdict: {} (m1 = {:.6e}, m_inf = {:.6e})",
        match cert.verdict {
            Verdict::BijectiveH1LpBmo => "bijective_H1_Lp_BMO",
            Verdict::Inconclusive => "inconclusive",
        },
        cert.m1,
        cert.m_inf
    );
    Ok(cert)
}

/// `2001` uniform samples over `[lo, hi]` as `xi,value` CSV.
pub fn sample_csv(f: &FrequencyFunction, lo: f64, hi: f64) -> Result<String> {
    const N: usize = 2000;
    let mut s = String::from("xi,value\n");
    for i in 0..=N {
        let x = (lo * (N - i) as f64 + hi * i as f64) / N as f64;
        s.push_str(&format!("{x:.16e},{:.16e}\n", f.value(x)?));
    }
    Ok(s)
}

/// Named functions with plotting ranges.
fn plot_set(source: &Source) -> Result<Vec<(&'static str, FrequencyFunction, f64, f64)>> {
    if source.config.is_none() && source.preset.is_none() || source.preset == Some(Preset::MexicanHat) {
        let c = build_catalog();
        return Ok(vec![
            ("psi_hat", c.psi_hat, -1.0, 1.0),
            ("ramp", c.ramp, -0.5, 1.5),
            ("cutoff", c.cutoff, -1.0, 1.0),
            ("bump", c.bump, -0.5, 0.5),
            ("psi_star_hat", c.psi_star_hat, -1.0, 1.0),
            ("mu_hat", c.mu_hat, -1.0, 1.0),
            ("phi_hat", c.phi_hat, -0.5, 0.5),
        ]);
    }
    let cfg = resolve(source)?;
    Ok(vec![
        ("synthesizer", cfg.synthesizer, -1.0, 1.0),
        ("analyzer", cfg.analyzer, -1.0, 1.0),
        ("reference_synthesizer", cfg.reference_synthesizer, -1.0, 1.0),
        ("reference_analyzer", cfg.reference_analyzer, -1.0, 1.0),
    ])
}

pub fn run_plots(source: &Source, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();
    for (name, f, lo, hi) in plot_set(source)? {
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, sample_csv(&f, lo, hi)?).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn run_kernel(a: &KernelArgs) -> Result<()> {
    let cfg = resolve(&a.source)?;
    let dpsi = match &cfg.synthesizer_perturbation {
        Some(p) => p.clone(),
        None => cfg.synthesizer.minus(&cfg.reference_synthesizer),
    };
    let rows = with_thread_cap(|| kernel0_slice(&dpsi, &cfg.analyzer, a.y, cfg.translation, (a.from, a.to), a.samples, a.tol))??;
    let mut s = String::from("x,value,error\n");
    for r in rows {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r.x, r.value, r.error));
    }
    write_output(a.out.as_deref(), &s)
}

/// Exit status: 0 bijective, 2 inconclusive, 1 error.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Certify(a) => resolve(&a.source).and_then(|cfg| run_certify(cfg, &a.overrides)).map(Some),
        Command::MexicanHat(o) => run_certify(FramePairConfig::mexican_hat(), o).map(Some),
        Command::Kernel(a) => run_kernel(a).map(|_| None),
        Command::Plots(a) => run_plots(&a.source, &a.out).map(|_| None),
    };
    match outcome {
        Ok(Some(cert)) if cert.verdict == Verdict::Inconclusive => 2,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
