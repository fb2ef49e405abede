//! Flat `key = value` run configuration with `[section]` headers.
//!
//! Every key has a documented default, unknown sections or keys are hard
//! errors, and every message carries the offending line number so configs
//! stay diff-friendly experiment records.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use muskat_core::contour::{PhysParams, QuadRule, QuadratureConfig, RegularizationParams, RhsForm};
use muskat_core::initdata::{ProfileKind, ProfileSpec};
use muskat_core::spectral::GridSpec;
use muskat_core::timestepping::{DiagnosticsOptions, Scheme, StepperConfig};

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub phys: PhysParams,
    pub reg: Option<RegularizationParams>,
    pub form: RhsForm,
    pub stepper: StepperConfig,
    pub quad: QuadratureConfig,
    pub profile: ProfileSpec,
    pub diag: DiagnosticsOptions,
    pub output_dir: PathBuf,
    pub write_snapshots: bool,
}

#[derive(Debug, Clone)]
struct RawEntry {
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug, Default)]
struct RawConfig {
    entries: Vec<(String, String, RawEntry)>, // (section, key, entry)
}

impl RawConfig {
    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        for (s, k, e) in &mut self.entries {
            if s == section && k == key && !e.used {
                e.used = true;
                return Some((e.value.clone(), e.line));
            }
        }
        None
    }

    fn unused(&self) -> Option<(&str, &str, usize)> {
        self.entries
            .iter()
            .find(|(_, _, e)| !e.used)
            .map(|(s, k, e)| (s.as_str(), k.as_str(), e.line))
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.iter().any(|(s, _, _)| s == section)
    }
}

const KNOWN_SECTIONS: &[&str] = &[
    "grid",
    "physics",
    "regularization",
    "stepper",
    "quadrature",
    "profile",
    "output",
];

fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    let mut section = String::new();
    for (idx, line_full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match line_full.find('#') {
            Some(p) => &line_full[..p],
            None => line_full,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                bail!("line {line_no}: malformed section header {line:?}");
            }
            section = line[1..line.len() - 1].trim().to_string();
            if !KNOWN_SECTIONS.contains(&section.as_str()) {
                bail!(
                    "line {line_no}: unknown section [{section}]; known sections: {}",
                    KNOWN_SECTIONS.join(", ")
                );
            }
            continue;
        }
        let Some(eq) = line.find('=') else {
            bail!("line {line_no}: expected `key = value`, got {line:?}");
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if section.is_empty() {
            bail!("line {line_no}: key {key:?} appears before any [section] header");
        }
        if key.is_empty() || value.is_empty() {
            bail!("line {line_no}: empty key or value");
        }
        raw.entries.push((
            section.clone(),
            key,
            RawEntry {
                value,
                line: line_no,
                used: false,
            },
        ));
    }
    Ok(raw)
}

fn get_f64(raw: &mut RawConfig, section: &str, key: &str, default: f64) -> Result<f64> {
    match raw.take(section, key) {
        None => Ok(default),
        Some((v, line)) => v
            .parse::<f64>()
            .map_err(|_| anyhow!("line {line}: [{section}] {key} = {v:?} is not a number")),
    }
}

fn get_usize(raw: &mut RawConfig, section: &str, key: &str, default: usize) -> Result<usize> {
    match raw.take(section, key) {
        None => Ok(default),
        Some((v, line)) => v
            .parse::<usize>()
            .map_err(|_| anyhow!("line {line}: [{section}] {key} = {v:?} is not a nonnegative integer")),
    }
}

fn get_u64(raw: &mut RawConfig, section: &str, key: &str, default: u64) -> Result<u64> {
    match raw.take(section, key) {
        None => Ok(default),
        Some((v, line)) => v
            .parse::<u64>()
            .map_err(|_| anyhow!("line {line}: [{section}] {key} = {v:?} is not a nonnegative integer")),
    }
}

fn get_bool(raw: &mut RawConfig, section: &str, key: &str, default: bool) -> Result<bool> {
    match raw.take(section, key) {
        None => Ok(default),
        Some((v, line)) => match v.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => bail!("line {line}: [{section}] {key} = {v:?} is not a boolean"),
        },
    }
}

/// Parse and validate a configuration file. Every constraint of the member
/// types is re-validated here; messages name the offending key and line.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_config_str(&text).with_context(|| format!("in config file {}", path.display()))
}

/// Default half-period: 16 pi.
pub fn default_half_period() -> f64 {
    16.0 * std::f64::consts::PI
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut raw = parse_raw(text)?;

    // [grid]
    let n = get_usize(&mut raw, "grid", "n", 256)?;
    let half_period = get_f64(&mut raw, "grid", "half_period", default_half_period())?;
    let grid = GridSpec::new(n, half_period).map_err(|e| anyhow!("[grid]: {e}"))?;

    // [physics] — defaults to the normalized preset (rho2 - rho1 = 2 pi)
    let preset = PhysParams::normalized();
    let rho1 = get_f64(&mut raw, "physics", "rho1", preset.rho1())?;
    let rho2_entry = raw.take("physics", "rho2");
    let rho2 = match &rho2_entry {
        None => preset.rho2(),
        Some((v, line)) => v
            .parse::<f64>()
            .map_err(|_| anyhow!("line {line}: [physics] rho2 = {v:?} is not a number"))?,
    };
    let phys = PhysParams::new(rho1, rho2).map_err(|e| match rho2_entry {
        Some((_, line)) => anyhow!("line {line}: [physics]: {e}"),
        None => anyhow!("[physics]: {e}"),
    })?;

    // [regularization] — optional; its presence selects the regularized model
    let reg = if raw.has_section("regularization") {
        let eps = get_f64(&mut raw, "regularization", "eps", 0.1)?;
        let big_c = raw.take("regularization", "big_c");
        let reg = match big_c {
            Some((v, line)) => {
                let c = v.parse::<f64>().map_err(|_| {
                    anyhow!("line {line}: [regularization] big_c = {v:?} is not a number")
                })?;
                RegularizationParams::new(eps, c)
                    .map_err(|e| anyhow!("line {line}: [regularization]: {e}"))?
            }
            None => RegularizationParams::with_calibrated_c(eps, &phys, grid)
                .map_err(|e| anyhow!("[regularization]: {e}"))?,
        };
        Some(reg)
    } else {
        None
    };

    // [stepper]
    let scheme = match raw.take("stepper", "scheme") {
        None => Scheme::IntegratingFactorRk4,
        Some((v, line)) => match v.as_str() {
            "integrating_factor_rk4" => Scheme::IntegratingFactorRk4,
            "explicit_rk4" => Scheme::ExplicitRk4,
            _ => bail!(
                "line {line}: [stepper] scheme = {v:?}; expected integrating_factor_rk4 or explicit_rk4"
            ),
        },
    };
    let cfl = get_f64(&mut raw, "stepper", "cfl", 0.5)?;
    let dt_max = get_f64(&mut raw, "stepper", "dt_max", 0.05)?;
    let t_final = get_f64(&mut raw, "stepper", "t_final", 1.0)?;
    let stepper =
        StepperConfig::new(scheme, cfl, dt_max, t_final).map_err(|e| anyhow!("[stepper]: {e}"))?;
    let form = match raw.take("stepper", "form") {
        None => {
            if reg.is_some() {
                RhsForm::Regularized
            } else {
                RhsForm::Muskat
            }
        }
        Some((v, line)) => match v.as_str() {
            "muskat" => RhsForm::Muskat,
            "arctan" => RhsForm::Arctan,
            "regularized" => RhsForm::Regularized,
            "linear" => RhsForm::Linear,
            _ => bail!(
                "line {line}: [stepper] form = {v:?}; expected muskat, arctan, regularized or linear"
            ),
        },
    };
    if form == RhsForm::Regularized && reg.is_none() {
        bail!("[stepper] form = regularized requires a [regularization] section");
    }

    // [quadrature]
    let alpha_points = get_usize(&mut raw, "quadrature", "alpha_points", grid.n())?;
    let tail_cut = get_f64(&mut raw, "quadrature", "tail_cut", grid.half_period())?;
    let rule = match raw.take("quadrature", "rule") {
        None => QuadRule::Midpoint,
        Some((v, line)) => match v.as_str() {
            "midpoint" => QuadRule::Midpoint,
            "trapezoid" => QuadRule::Trapezoid,
            _ => bail!("line {line}: [quadrature] rule = {v:?}; expected midpoint or trapezoid"),
        },
    };
    let copies = get_usize(&mut raw, "quadrature", "copies", 2)?;
    let quad = QuadratureConfig {
        alpha_points,
        tail_cut,
        rule,
        copies,
    };
    quad.validate(grid).map_err(|e| anyhow!("[quadrature]: {e}"))?;

    // [profile]
    let kind_entry = raw.take("profile", "kind");
    let amplitude = get_f64(&mut raw, "profile", "amplitude", 1.0)?;
    let width = get_f64(&mut raw, "profile", "width", 4.0)?;
    let mode = get_usize(&mut raw, "profile", "mode", 1)?;
    let seed = get_u64(&mut raw, "profile", "seed", 1)?;
    let keep_mean = get_bool(&mut raw, "profile", "keep_mean", false)?;
    let samples_file = raw.take("profile", "samples_file");
    let kind = match &kind_entry {
        None => ProfileKind::GaussianBump,
        Some((v, line)) => match v.as_str() {
            "gaussian_bump" => ProfileKind::GaussianBump,
            "compact_bump" => ProfileKind::CompactBump,
            "single_mode" => ProfileKind::SingleMode,
            "multi_mode" => ProfileKind::MultiMode,
            "custom_samples" => {
                let Some((file, fline)) = &samples_file else {
                    bail!("line {line}: kind = custom_samples requires samples_file");
                };
                let text = fs::read_to_string(file).with_context(|| {
                    format!("line {fline}: cannot read samples_file {file:?}")
                })?;
                let samples: Vec<f64> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(|l| {
                        // accept either bare values or `x value` rows
                        let last = l.split_whitespace().last().unwrap();
                        last.parse::<f64>()
                            .map_err(|_| anyhow!("line {fline}: bad sample {l:?} in {file:?}"))
                    })
                    .collect::<Result<_>>()?;
                ProfileKind::CustomSamples(samples)
            }
            _ => bail!(
                "line {line}: [profile] kind = {v:?}; expected gaussian_bump, compact_bump, single_mode, multi_mode or custom_samples"
            ),
        },
    };
    if samples_file.is_some() && !matches!(kind, ProfileKind::CustomSamples(_)) {
        bail!("[profile] samples_file is only valid with kind = custom_samples");
    }
    let mut profile = ProfileSpec::new(kind);
    profile.amplitude = amplitude;
    profile.width = width;
    profile.mode = mode;
    profile.seed = seed;
    profile.keep_mean = keep_mean;

    // [output]
    let dir = raw
        .take("output", "dir")
        .map(|(v, _)| v)
        .unwrap_or_else(|| "run-output".to_string());
    let cadence = get_usize(&mut raw, "output", "cadence", 16)?;
    let dissipation_decimate = get_usize(&mut raw, "output", "dissipation_decimate", 1)?;
    let wiener_delta = get_f64(&mut raw, "output", "wiener_delta", 0.1)?;
    let write_snapshots = get_bool(&mut raw, "output", "write_snapshots", true)?;
    if cadence == 0 {
        bail!("[output] cadence must be positive");
    }
    if dissipation_decimate == 0 || grid.n() % (2 * dissipation_decimate) != 0 {
        bail!("[output] dissipation_decimate must be positive with 2*decimate dividing n");
    }

    if let Some((section, key, line)) = raw.unused() {
        bail!("line {line}: unknown key {key:?} in section [{section}]");
    }

    Ok(RunConfig {
        grid,
        phys,
        reg,
        form,
        stepper,
        quad,
        profile,
        diag: DiagnosticsOptions {
            cadence,
            dissipation_decimate,
            wiener_delta,
        },
        output_dir: PathBuf::from(dir),
        write_snapshots,
    })
}

/// Resolve the output directory against the `MUSKAT_OUTPUT_ROOT` override.
pub fn resolve_output_dir(cfg: &RunConfig) -> PathBuf {
    if cfg.output_dir.is_absolute() {
        return cfg.output_dir.clone();
    }
    match std::env::var_os("MUSKAT_OUTPUT_ROOT") {
        Some(root) => PathBuf::from(root).join(&cfg.output_dir),
        None => cfg.output_dir.clone(),
    }
}
