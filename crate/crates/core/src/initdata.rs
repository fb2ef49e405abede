//! Library of initial interface profiles and the mollified approximation of
//! initial data with its provable properties.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::spectral::{self, GridFunction, GridSpec};
use crate::Result;

const PI: f64 = core::f64::consts::PI;

/// Profile families selectable from configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `a exp(-x^2 / w^2)`.
    GaussianBump,
    /// `a exp(-1 / (1 - (x/w)^2))` on `|x| < w`, zero outside.
    CompactBump,
    /// `a sin(pi m x / L)`.
    SingleMode,
    /// Seeded superposition of the first eight modes with decaying amplitudes.
    MultiMode,
    /// Caller-supplied samples (length must match the grid).
    CustomSamples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
    pub mode: usize,
    pub seed: u64,
    /// The evolution conserves the mean, so profiles are mean-free unless a
    /// nonzero mean is explicitly requested.
    pub keep_mean: bool,
}

impl ProfileSpec {
    pub fn new(kind: ProfileKind) -> Self {
        ProfileSpec {
            kind,
            amplitude: 1.0,
            width: 1.0,
            mode: 1,
            seed: 1,
            keep_mean: false,
        }
    }
}

/// Norms and resolvability of a built profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileReport {
    pub sup: f64,
    pub sup_slope: f64,
    pub l1: f64,
    /// Largest coefficient modulus in the top quarter of wavenumbers,
    /// relative to the peak coefficient.
    pub tail_fraction: f64,
    /// False when the spectral tail exceeds 1e-10 of the peak; callers should
    /// treat the profile as under-resolved (a warning, not an error).
    pub resolved: bool,
}

/// Amplitude giving a Gaussian bump `a exp(-x^2/w^2)` the requested maximum
/// slope: the slope peaks at `x = w/sqrt(2)` with value `(a/w) sqrt(2/e)`.
pub fn gaussian_amplitude_for_slope(slope: f64, width: f64) -> f64 {
    slope * width / libm::sqrt(2.0 / core::f64::consts::E)
}

fn splitmix64(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Build the requested profile and report its norms.
pub fn build_profile(spec: &ProfileSpec, grid: GridSpec) -> Result<(GridFunction, ProfileReport)> {
    if !spec.amplitude.is_finite() {
        return Err(Error::Profile("amplitude must be finite".into()));
    }
    if !(spec.width > 0.0) {
        return Err(Error::Profile(format!(
            "width must be positive, got {}",
            spec.width
        )));
    }
    let l = grid.half_period();
    let a = spec.amplitude;
    let w = spec.width;
    let g = match &spec.kind {
        ProfileKind::GaussianBump => GridFunction::from_fn(grid, |x| a * libm::exp(-x * x / (w * w))),
        ProfileKind::CompactBump => GridFunction::from_fn(grid, |x| {
            let u = x / w;
            if u.abs() < 1.0 {
                a * libm::exp(-1.0 / (1.0 - u * u))
            } else {
                0.0
            }
        }),
        ProfileKind::SingleMode => {
            if spec.mode == 0 || spec.mode >= grid.n() / 2 {
                return Err(Error::Profile(format!(
                    "mode must lie in 1..N/2, got {}",
                    spec.mode
                )));
            }
            let m = spec.mode as f64;
            GridFunction::from_fn(grid, |x| a * libm::sin(m * PI * x / l))
        }
        ProfileKind::MultiMode => {
            let mut state = spec.seed;
            let modes: Vec<(f64, f64, f64)> = (1..=8)
                .map(|m| {
                    let amp = a * libm::exp(-0.35 * m as f64) * (0.5 + 0.5 * splitmix64(&mut state));
                    let phase = 2.0 * PI * splitmix64(&mut state);
                    (m as f64, amp, phase)
                })
                .collect();
            GridFunction::from_fn(grid, |x| {
                modes
                    .iter()
                    .map(|&(m, amp, phase)| amp * libm::sin(m * PI * x / l + phase))
                    .sum()
            })
        }
        ProfileKind::CustomSamples(samples) => GridFunction::new(grid, samples.clone())?,
    };
    let g = if spec.keep_mean {
        g
    } else {
        let mean = g.mean();
        g.map(|v| v - mean)
    };

    let hat = spectral::forward_transform(&g);
    let n = grid.n();
    let peak = hat.bins().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let tail = hat
        .bins()
        .iter()
        .enumerate()
        .filter(|(r, _)| {
            let k = grid.wavenumber_of_bin(*r).unsigned_abs() as usize;
            k >= 3 * n / 8
        })
        .fold(0.0f64, |m, (_, c)| m.max(c.norm()));
    let tail_fraction = if peak > 0.0 { tail / peak } else { 0.0 };
    let report = ProfileReport {
        sup: g.sup_norm(),
        sup_slope: spectral::sup_slope(&g),
        l1: g.l1_norm(),
        tail_fraction,
        resolved: tail_fraction <= 1e-10,
    };
    Ok((g, report))
}

/// Compactly supported even bump of unit mass at scale `eps`:
/// `zeta_eps(x) = zeta(x/eps)/eps` with `zeta(x) = C exp(-1/(1-x^2))` on
/// `|x| < 1`. The continuous mass constant is computed by quadrature; the
/// discrete weights are renormalized to sum to exactly one.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    eps: f64,
    mass_constant: f64,
}

pub fn mollifier(eps: f64) -> Result<Mollifier> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Profile(format!("mollifier scale must be positive, got {eps}")));
    }
    let mass = crate::quad::composite_midpoint(
        |x| libm::exp(-1.0 / (1.0 - x * x)),
        -1.0,
        1.0,
        20_001,
    );
    Ok(Mollifier {
        eps,
        mass_constant: 1.0 / mass,
    })
}

impl Mollifier {
    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Pointwise kernel value `zeta_eps(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let u = x / self.eps;
        if u.abs() < 1.0 {
            self.mass_constant * libm::exp(-1.0 / (1.0 - u * u)) / self.eps
        } else {
            0.0
        }
    }

    /// Symmetric grid weights over the kernel support, renormalized so that
    /// `dx * sum w = 1` exactly. When the support falls inside one cell this
    /// degenerates to the discrete identity.
    pub fn discrete_weights(&self, grid: GridSpec) -> Vec<f64> {
        let dx = grid.dx();
        let radius = (self.eps / dx) as usize;
        let mut w: Vec<f64> = (-(radius as i64)..=radius as i64)
            .map(|i| self.eval(i as f64 * dx))
            .collect();
        let mass: f64 = w.iter().sum::<f64>() * dx;
        if mass > 0.0 {
            for v in &mut w {
                *v /= mass;
            }
        } else {
            // support below grid scale: single unit-mass spike
            w = alloc::vec![1.0 / dx];
        }
        w
    }
}

/// Mollified approximation of initial data:
/// `f0_eps(x) = (zeta_eps * f0)(x) / (1 + eps x^2)`, with the convolution as a
/// direct sum over the kernel's exact support and `x` measured from the torus
/// center.
///
/// The sup-norm bound `sup|f0_eps| <= sup|f0|` holds for every profile (the
/// convolution is an average and the divisor is at least one). The slope
/// bound `sup|d f0_eps| <= sup|d f0|` holds for small `eps` on odd-symmetric
/// data; positive bumps can exceed it by O(eps |x| f) at the downhill flank.
pub fn mollify_approx(f0: &GridFunction, eps: f64) -> Result<GridFunction> {
    let grid = f0.spec();
    let m = mollifier(eps)?;
    let w = m.discrete_weights(grid);
    let radius = (w.len() - 1) / 2;
    let n = grid.n();
    let dx = grid.dx();
    let f = f0.values();
    let values = (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (wi, &weight) in w.iter().enumerate() {
                let off = wi as i64 - radius as i64;
                let i = ((j as i64 - off).rem_euclid(n as i64)) as usize;
                acc += weight * f[i];
            }
            let x = grid.x(j);
            acc * dx / (1.0 + eps * x * x)
        })
        .collect();
    GridFunction::new(grid, values)
}
