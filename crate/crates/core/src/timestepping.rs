//! Time integration of the semi-discrete system. The stiff Fourier-diagonal
//! linear part is integrated exactly through its exponential (integrating
//! factor); the nonlinear remainder is treated explicitly by classical
//! four-stage Runge-Kutta. A fully explicit RK4 variant is kept for
//! comparison and failure-mode tests.

use alloc::vec::Vec;

use crate::contour::{self, PhysParams, QuadratureConfig, RegularizationParams, RhsForm};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::Error;
use crate::fft::C64;
use crate::spectral::{self, GridFunction, GridSpec, Spectrum};
use crate::Result;

/// Time integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    IntegratingFactorRk4,
    ExplicitRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Safety factor in (0, 1].
    pub cfl: f64,
    pub dt_max: f64,
    pub t_final: f64,
}

impl StepperConfig {
    pub fn new(scheme: Scheme, cfl: f64, dt_max: f64, t_final: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Params(alloc::format!(
                "cfl must lie in (0, 1], got {cfl}"
            )));
        }
        if !(dt_max > 0.0) || !(t_final > 0.0) {
            return Err(Error::Params("dt_max and t_final must be positive".into()));
        }
        Ok(StepperConfig {
            scheme,
            cfl,
            dt_max,
            t_final,
        })
    }
}

/// Snapshot times and decimated states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<GridFunction>,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, state: GridFunction) {
        if let Some(&last) = self.times.last() {
            assert!(t > last, "snapshot times must be strictly increasing");
        } else {
            assert!(t == 0.0, "trajectories start at t = 0");
        }
        self.times.push(t);
        self.states.push(state);
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn states(&self) -> &[GridFunction] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::new()
    }
}

/// Fourier symbol of the linear part at wavenumber `k`: `-rho |xi_k|` for the
/// plain system, plus `-eps C |xi_k|^{1-eps} - eps xi_k^2` when regularized.
/// Always nonpositive; the mean mode is untouched.
pub fn linear_symbol(
    k: i64,
    p: &PhysParams,
    r: Option<&RegularizationParams>,
    spec: GridSpec,
) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let xi = spec.xi(k).abs();
    let mut sym = -p.rho() * xi;
    if let Some(r) = r {
        sym += -r.eps() * r.big_c() * libm::pow(xi, 1.0 - r.eps()) - r.eps() * xi * xi;
    }
    sym
}

fn symbol_table(p: &PhysParams, r: Option<&RegularizationParams>, spec: GridSpec) -> Vec<f64> {
    (0..spec.n())
        .map(|bin| linear_symbol(spec.wavenumber_of_bin(bin), p, r, spec))
        .collect()
}

/// Proposed step size:
/// `dt = min(dt_max, cfl dx / (rho (1 + sup|f_x|^2)))`, and additionally
/// `dt <= cfl dx^2 / (2 eps)` for the explicit scheme with viscosity. The
/// integrating-factor scheme removes the linear stiffness constraints and is
/// limited by the nonlinear term alone.
pub fn choose_dt(
    g: &GridFunction,
    p: &PhysParams,
    r: Option<&RegularizationParams>,
    cfg: &StepperConfig,
) -> f64 {
    let dx = g.spec().dx();
    let slope = spectral::sup_slope(g);
    let mut dt = cfg.cfl * dx / (p.rho() * (1.0 + slope * slope));
    if cfg.scheme == Scheme::ExplicitRk4 {
        if let Some(r) = r {
            dt = dt.min(cfg.cfl * dx * dx / (2.0 * r.eps()));
        }
    }
    dt.min(cfg.dt_max)
}

fn add_scaled(bins: &mut [C64], other: &[C64], s: f64) {
    for (a, b) in bins.iter_mut().zip(other) {
        *a += b * s;
    }
}

fn to_field(spec: GridSpec, bins: Vec<C64>) -> GridFunction {
    spectral::inverse_unchecked(&Spectrum::from_bins(spec, bins).expect("bin count"))
}

/// One time step. The integrating-factor path advances the linear part
/// exactly via `exp(dt * symbol)` in Fourier space and applies RK4 stages to
/// the nonlinear remainder only; the explicit path applies RK4 to the full
/// right-hand side. Non-finite output is reported as an error.
pub fn step(
    g: &GridFunction,
    dt: f64,
    form: RhsForm,
    p: &PhysParams,
    r: Option<&RegularizationParams>,
    quad: &QuadratureConfig,
    scheme: Scheme,
) -> Result<GridFunction> {
    if !(dt > 0.0) {
        return Err(Error::Params(alloc::format!("dt must be positive, got {dt}")));
    }
    let spec = g.spec();
    let symbols = symbol_table(p, r, spec);
    let out = match scheme {
        Scheme::IntegratingFactorRk4 => {
            let e_half: Vec<f64> = symbols.iter().map(|&s| libm::exp(0.5 * dt * s)).collect();
            let e_full: Vec<f64> = symbols.iter().map(|&s| libm::exp(dt * s)).collect();
            let nl = |u: &GridFunction| -> Result<Vec<C64>> {
                Ok(spectral::forward_transform(&contour::nonlinear_remainder(form, u, p, r, quad)?)
                    .bins()
                    .to_vec())
            };
            let u_hat = spectral::forward_transform(g).bins().to_vec();
            let k1 = nl(g)?;

            let mut a = u_hat.clone();
            add_scaled(&mut a, &k1, 0.5 * dt);
            for (v, &e) in a.iter_mut().zip(&e_half) {
                *v *= e;
            }
            let k2 = nl(&to_field(spec, a))?;

            let mut b: Vec<C64> = u_hat.iter().zip(&e_half).map(|(&v, &e)| v * e).collect();
            add_scaled(&mut b, &k2, 0.5 * dt);
            let k3 = nl(&to_field(spec, b))?;

            let mut c: Vec<C64> = u_hat.iter().zip(&e_full).map(|(&v, &e)| v * e).collect();
            let k3_lifted: Vec<C64> = k3.iter().zip(&e_half).map(|(&v, &e)| v * e).collect();
            add_scaled(&mut c, &k3_lifted, dt);
            let k4 = nl(&to_field(spec, c))?;

            let mut out: Vec<C64> = u_hat.iter().zip(&e_full).map(|(&v, &e)| v * e).collect();
            let k1_lifted: Vec<C64> = k1.iter().zip(&e_full).map(|(&v, &e)| v * e).collect();
            add_scaled(&mut out, &k1_lifted, dt / 6.0);
            let k23: Vec<C64> = k2
                .iter()
                .zip(&k3)
                .zip(&e_half)
                .map(|((&x, &y), &e)| (x + y) * e)
                .collect();
            add_scaled(&mut out, &k23, dt / 3.0);
            add_scaled(&mut out, &k4, dt / 6.0);
            to_field(spec, out)
        }
        Scheme::ExplicitRk4 => {
            let rhs = |u: &GridFunction| -> Result<GridFunction> {
                let lin_bins: Vec<C64> = spectral::forward_transform(u)
                    .bins()
                    .iter()
                    .zip(&symbols)
                    .map(|(&v, &s)| v * s)
                    .collect();
                let lin = to_field(spec, lin_bins);
                let nl = contour::nonlinear_remainder(form, u, p, r, quad)?;
                Ok(lin.zip_with(&nl, |a, b| a + b))
            };
            let k1 = rhs(g)?;
            let u2 = g.zip_with(&k1, |u, k| u + 0.5 * dt * k);
            let k2 = rhs(&u2)?;
            let u3 = g.zip_with(&k2, |u, k| u + 0.5 * dt * k);
            let k3 = rhs(&u3)?;
            let u4 = g.zip_with(&k3, |u, k| u + dt * k);
            let k4 = rhs(&u4)?;
            let incr = k1.zip_with(&k2, |a, b| a + 2.0 * b);
            let incr = incr.zip_with(&k3, |a, b| a + 2.0 * b);
            let incr = incr.zip_with(&k4, |a, b| a + b);
            g.zip_with(&incr, |u, k| u + dt / 6.0 * k)
        }
    };
    if !out.is_finite() {
        return Err(Error::NonFinite("time step produced non-finite samples".into()));
    }
    Ok(out)
}

/// Why a run aborted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortKind {
    /// NaN/Inf appeared in the state.
    NonFinite,
    /// A run that started slope-subcritical reached `sup|f_x| >= 1`,
    /// a detected violation of the propagated slope bound.
    SlopeCritical,
}

/// Abort record carrying the last finite state for a dump.
#[derive(Debug, Clone)]
pub struct SimAbort {
    pub kind: AbortKind,
    pub t: f64,
    pub step_index: usize,
    pub last_state: GridFunction,
}

impl core::fmt::Display for SimAbort {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.kind {
            AbortKind::NonFinite => write!(
                f,
                "aborted at t = {} (step {}): non-finite state",
                self.t, self.step_index
            ),
            AbortKind::SlopeCritical => write!(
                f,
                "aborted at t = {} (step {}): slope reached 1 on a subcritical run",
                self.t, self.step_index
            ),
        }
    }
}

/// Snapshot/diagnostics cadence and diagnostic knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsOptions {
    /// Record every `cadence` steps (plus t = 0 and t_final).
    pub cadence: usize,
    /// Stride for the O(N^2) dissipation quadrature.
    pub dissipation_decimate: usize,
    /// The delta in the monitored `2 + delta` Wiener norm.
    pub wiener_delta: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            cadence: 16,
            dissipation_decimate: 1,
            wiener_delta: 0.1,
        }
    }
}

/// A completed run: decimated snapshots plus per-sample diagnostics.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub records: Vec<DiagnosticsRecord>,
    pub dt: f64,
    pub n_steps: usize,
}

/// Advance `f0` to `t_final`, recording snapshots and diagnostics every
/// `cadence` steps plus at both endpoints. The step size is fixed at the
/// start (states only flatten under the stable dynamics) and divides
/// `t_final` exactly. Aborts on non-finite states, and on slope reaching one
/// when the run started slope-subcritical.
pub fn simulate(
    f0: &GridFunction,
    p: &PhysParams,
    r: Option<&RegularizationParams>,
    form: RhsForm,
    stepper: &StepperConfig,
    quad: &QuadratureConfig,
    diag: &DiagnosticsOptions,
) -> core::result::Result<SimOutput, SimAbort> {
    assert!(diag.cadence > 0, "cadence must be positive");
    let dt_proposed = choose_dt(f0, p, r, stepper);
    let n_steps = libm::ceil(stepper.t_final / dt_proposed - 1e-12).max(1.0) as usize;
    let dt = stepper.t_final / n_steps as f64;
    let subcritical = spectral::sup_slope(f0) < 1.0;

    let mut trajectory = Trajectory::new();
    let mut records = Vec::new();
    let mut u = f0.clone();
    trajectory.push(0.0, u.clone());
    records.push(diagnostics::record_state(&u, 0.0, diag));

    for istep in 1..=n_steps {
        let t = istep as f64 * dt;
        u = match step(&u, dt, form, p, r, quad, stepper.scheme) {
            Ok(next) => next,
            Err(_) => {
                let last = trajectory.states().last().cloned().unwrap_or_else(|| f0.clone());
                return Err(SimAbort {
                    kind: AbortKind::NonFinite,
                    t,
                    step_index: istep,
                    last_state: last,
                });
            }
        };
        if istep % diag.cadence == 0 || istep == n_steps {
            if subcritical && spectral::sup_slope(&u) >= 1.0 {
                return Err(SimAbort {
                    kind: AbortKind::SlopeCritical,
                    t,
                    step_index: istep,
                    last_state: u,
                });
            }
            trajectory.push(t, u.clone());
            records.push(diagnostics::record_state(&u, t, diag));
        }
    }

    Ok(SimOutput {
        trajectory,
        records,
        dt,
        n_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridFunction;
    use approx::assert_abs_diff_eq;

    const PI: f64 = core::f64::consts::PI;

    fn grid(n: usize, l: f64) -> GridSpec {
        GridSpec::new(n, l).unwrap()
    }

    #[test]
    fn linear_symbol_examples() {
        let s = grid(128, 8.0);
        let p = PhysParams::normalized();
        assert_eq!(linear_symbol(0, &p, None, s), 0.0);
        assert_abs_diff_eq!(linear_symbol(1, &p, None, s), -p.rho() * PI / 8.0, epsilon = 1e-14);
        // eps -> 0 limit reduces to the plain symbol
        let tiny = RegularizationParams::new(1e-12, 1.0).unwrap();
        assert_abs_diff_eq!(
            linear_symbol(5, &p, Some(&tiny), s),
            linear_symbol(5, &p, None, s),
            epsilon = 1e-9
        );
        for k in 1..64 {
            assert!(linear_symbol(k, &p, None, s) < 0.0);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let s = grid(64, 8.0);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let z = GridFunction::zeros(s);
        let out = step(&z, 0.01, RhsForm::Muskat, &p, None, &quad, Scheme::IntegratingFactorRk4).unwrap();
        assert_eq!(out.sup_norm(), 0.0);
    }

    #[test]
    fn pure_linear_mode_decays_exactly() {
        let l = 8.0;
        let s = grid(128, l);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let mode = 3.0;
        let g = GridFunction::from_fn(s, |x| libm::sin(mode * PI * x / l));
        let dt = 0.05;
        let out = step(&g, dt, RhsForm::Linear, &p, None, &quad, Scheme::IntegratingFactorRk4).unwrap();
        let factor = libm::exp(dt * linear_symbol(3, &p, None, s));
        for (a, b) in out.values().iter().zip(g.values()) {
            assert!((a - factor * b).abs() < 1e-14);
        }
        // regularized symbol stacks onto the plain one
        let r = RegularizationParams::new(0.2, 2.0).unwrap();
        let out_r = step(&g, dt, RhsForm::Linear, &p, Some(&r), &quad, Scheme::IntegratingFactorRk4).unwrap();
        let xi: f64 = 3.0 * PI / l;
        let extra = -r.eps() * r.big_c() * libm::pow(xi, 0.8) - r.eps() * xi * xi;
        assert_abs_diff_eq!(
            linear_symbol(3, &p, Some(&r), s) - linear_symbol(3, &p, None, s),
            extra,
            epsilon = 1e-13
        );
        let factor_r = libm::exp(dt * linear_symbol(3, &p, Some(&r), s));
        for (a, b) in out_r.values().iter().zip(g.values()) {
            assert!((a - factor_r * b).abs() < 1e-14);
        }
    }

    #[test]
    fn choose_dt_rules() {
        let s = grid(128, 8.0);
        let p = PhysParams::normalized();
        let cfg = StepperConfig::new(Scheme::IntegratingFactorRk4, 0.5, 1e-3, 1.0).unwrap();
        // flat state hits dt_max
        let flat = GridFunction::zeros(s);
        assert_eq!(choose_dt(&flat, &p, None, &cfg), 1e-3);

        // advective regime: halving dx halves dt
        let cfg2 = StepperConfig::new(Scheme::IntegratingFactorRk4, 0.5, 1e9, 1.0).unwrap();
        let g1 = GridFunction::from_fn(s, |x| 0.2 * libm::sin(PI * x / 8.0));
        let s2 = grid(256, 8.0);
        let g2 = GridFunction::from_fn(s2, |x| 0.2 * libm::sin(PI * x / 8.0));
        let d1 = choose_dt(&g1, &p, None, &cfg2);
        let d2 = choose_dt(&g2, &p, None, &cfg2);
        assert_abs_diff_eq!(d1 / d2, 2.0, epsilon = 1e-6);

        // explicit scheme with large viscosity returns the viscous bound
        let r = RegularizationParams::new(0.25, 1.0).unwrap();
        let cfg3 = StepperConfig::new(Scheme::ExplicitRk4, 0.5, 1e9, 1.0).unwrap();
        let dt = choose_dt(&flat, &p, Some(&r), &cfg3);
        let dx = s.dx();
        assert_abs_diff_eq!(dt, 0.5 * dx * dx / 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fourth_order_in_dt() {
        let l = 8.0;
        let s = grid(64, l);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let g = GridFunction::from_fn(s, |x| 0.3 * libm::sin(PI * x / l) + 0.1 * libm::cos(2.0 * PI * x / l));
        let g = {
            let mean = g.mean();
            g.map(|v| v - mean)
        };
        let t_final = 0.2;
        let run = |n_steps: usize| {
            let dt = t_final / n_steps as f64;
            let mut u = g.clone();
            for _ in 0..n_steps {
                u = step(&u, dt, RhsForm::Muskat, &p, None, &quad, Scheme::IntegratingFactorRk4).unwrap();
            }
            u
        };
        let reference = run(256);
        let err = |u: &GridFunction| {
            u.values()
                .iter()
                .zip(reference.values())
                .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
        };
        let e1 = err(&run(8));
        let e2 = err(&run(16));
        let order = libm::log2(e1 / e2);
        assert!(order >= 3.7, "observed order {order}");
    }

    #[test]
    fn simulate_zero_data_and_mean_conservation() {
        let s = grid(64, 8.0);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let stepper = StepperConfig::new(Scheme::IntegratingFactorRk4, 0.5, 0.05, 0.3).unwrap();
        let diag = DiagnosticsOptions {
            cadence: 2,
            ..Default::default()
        };
        let zero = GridFunction::zeros(s);
        let out = simulate(&zero, &p, None, RhsForm::Muskat, &stepper, &quad, &diag).unwrap();
        for st in out.trajectory.states() {
            assert_eq!(st.sup_norm(), 0.0);
        }

        let g = GridFunction::from_fn(s, |x| 0.25 * libm::sin(PI * x / 8.0) + 0.1);
        let out = simulate(&g, &p, None, RhsForm::Muskat, &stepper, &quad, &diag).unwrap();
        let mean0 = out.trajectory.states()[0].mean();
        for st in out.trajectory.states() {
            assert!((st.mean() - mean0).abs() < 1e-12);
        }
        assert_abs_diff_eq!(*out.trajectory.times().last().unwrap(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn simulate_small_mode_tracks_linear_envelope() {
        let l = 8.0;
        let s = grid(128, l);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let stepper = StepperConfig::new(Scheme::IntegratingFactorRk4, 0.5, 0.01, 0.5).unwrap();
        let diag = DiagnosticsOptions {
            cadence: 10,
            ..Default::default()
        };
        let xi = PI / l;
        let slope = 0.02;
        let a0 = slope / xi;
        let g = GridFunction::from_fn(s, |x| a0 * libm::sin(PI * x / l));
        let out = simulate(&g, &p, None, RhsForm::Muskat, &stepper, &quad, &diag).unwrap();
        let rate = p.rho() * xi;
        for (t, st) in out.trajectory.times().iter().zip(out.trajectory.states()) {
            let amp = st.sup_norm();
            let want = a0 * libm::exp(-rate * t);
            assert!(
                (amp - want).abs() <= 3.0 * slope * slope * want + 1e-12,
                "t={t} amp={amp} want={want}"
            );
        }
    }

    #[test]
    fn determinism_bit_identical() {
        let s = grid(64, 8.0);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let stepper = StepperConfig::new(Scheme::IntegratingFactorRk4, 0.5, 0.02, 0.2).unwrap();
        let diag = DiagnosticsOptions::default();
        let g = GridFunction::from_fn(s, |x| 0.4 * libm::exp(-x * x / 4.0));
        let a = simulate(&g, &p, None, RhsForm::Muskat, &stepper, &quad, &diag).unwrap();
        let b = simulate(&g, &p, None, RhsForm::Muskat, &stepper, &quad, &diag).unwrap();
        for (x, y) in a.trajectory.states().iter().zip(b.trajectory.states()) {
            assert_eq!(x.values(), y.values());
        }
    }

    #[test]
    fn explicit_scheme_at_unit_cfl_blows_up_and_aborts() {
        // the advective dt bound with cfl = 1 puts the top mode outside the
        // explicit RK4 stability region, so broadband data must blow up
        let s = grid(128, 8.0);
        let p = PhysParams::normalized();
        let quad = QuadratureConfig::aligned(s);
        let stepper = StepperConfig::new(Scheme::ExplicitRk4, 1.0, 1e9, 40.0).unwrap();
        let diag = DiagnosticsOptions {
            cadence: 1_000_000,
            ..Default::default()
        };
        let mut state = 9u64;
        let g = GridFunction::from_fn(s, |_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            1e-3 * ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        });
        let err = simulate(&g, &p, None, RhsForm::Muskat, &stepper, &quad, &diag).unwrap_err();
        assert_eq!(err.kind, AbortKind::NonFinite);
        assert!(err.last_state.is_finite());
    }
}
