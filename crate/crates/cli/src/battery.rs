//! The `verify` cross-validation battery: form equivalence, series-vs-direct
//! T, kernel-vs-spectral fractional Laplacian, the balance residual, tail
//! control, maximum principles, the closed-form log-kernel integral, and the
//! explicit constants. Each check prints one pass/fail line.

use anyhow::Result;
use muskat_core::constants;
use muskat_core::contour::{
    eval_rhs_arctan, eval_rhs_muskat, eval_t, eval_t_series, t_tail_bound, RhsForm,
};
use muskat_core::diagnostics::{energy_balance_from_records, maximum_principle_monitor};
use muskat_core::initdata::build_profile;
use muskat_core::quad::composite_midpoint;
use muskat_core::spectral::{kernel_lambda_pow, lambda_pow, sup_slope, GridFunction, GridSpec};
use muskat_core::timestepping::{simulate, DiagnosticsOptions, Scheme, StepperConfig};

use crate::config::RunConfig;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, measured: f64, threshold: f64, detail: String) -> Self {
        CheckResult {
            name,
            passed: measured <= threshold,
            measured,
            threshold,
            detail,
        }
    }
}

fn rel_sup_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    let scale = a.sup_norm().max(b.sup_norm());
    if scale == 0.0 {
        return 0.0;
    }
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()))
        / scale
}

/// Rescale data so its slope stays inside the series' comfort zone.
fn capped_slope(g: &GridFunction, cap: f64) -> GridFunction {
    let s = sup_slope(g);
    if s > cap && s > 0.0 {
        g.scale(cap / s)
    } else {
        g.clone()
    }
}

/// Run every check against the configured grid, quadrature and profile.
pub fn run_battery(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();
    let (g, _) = build_profile(&cfg.profile, cfg.grid)?;

    // explicit constants reproduce
    results.push(match constants::verify_claims() {
        Ok(rep) => CheckResult::new(
            "constants_reproduction",
            (rep.c0 - constants::C0_DELTA0_REFERENCE).abs(),
            1e-10,
            format!("c0(0) = {:.16}", rep.c0),
        ),
        Err(e) => CheckResult::new("constants_reproduction", f64::INFINITY, 1e-10, e.to_string()),
    });

    // closed-form log-kernel integral int ln(1 + 1/a^2) da = 2 pi,
    // via log substitution on both sides of |a| = 1 plus the analytic
    // O(1/A) tail of the integrand
    {
        let seg = |a: f64, b: f64| {
            composite_midpoint(
                |t| {
                    let x = t.exp();
                    (1.0 / (x * x)).ln_1p() * x
                },
                a,
                b,
                200_000,
            )
        };
        let big_a: f64 = 1e3;
        let total = 2.0 * (seg(-40.0, 0.0) + seg(0.0, big_a.ln()) + 1.0 / big_a);
        results.push(CheckResult::new(
            "log_kernel_integral",
            (total - 2.0 * std::f64::consts::PI).abs(),
            1e-6,
            format!("quadrature gives {total:.9}"),
        ));
    }

    // the two nonlinear forms agree
    {
        let rm = eval_rhs_muskat(&g, &cfg.phys, &cfg.quad)?;
        let ra = eval_rhs_arctan(&g, &cfg.phys, &cfg.quad)?;
        let rel = rel_sup_diff(&rm, &ra);
        results.push(CheckResult::new(
            "form_equivalence",
            rel,
            1e-6,
            "sup-relative gap between operator split and divergence form".into(),
        ));
    }

    // direct T against its truncated series at capped slope
    {
        let gs = capped_slope(&g, 0.3);
        let t = eval_t(&gs, &cfg.quad)?;
        let ts = eval_t_series(&gs, 6, &cfg.quad)?;
        results.push(CheckResult::new(
            "t_series_consistency",
            rel_sup_diff(&t, &ts),
            1e-6,
            format!("slope capped at {:.3}", sup_slope(&gs)),
        ));
    }

    // kernel form of Lambda^s converges to the spectral symbol with order >= 1
    {
        let s_exp = 0.5;
        let err_at = |n: usize| -> Result<f64> {
            let spec = GridSpec::new(n, cfg.grid.half_period())?;
            let gh = GridFunction::from_fn(spec, |x| (-x * x / 9.0).exp());
            let gh = {
                let m = gh.mean();
                gh.map(|v| v - m)
            };
            let k = kernel_lambda_pow(&gh, s_exp, spec.half_period())?;
            let lam = lambda_pow(&gh, s_exp)?;
            Ok(rel_sup_diff(&k, &lam))
        };
        let n0 = cfg.grid.n().max(256);
        let e1 = err_at(n0)?;
        let e2 = err_at(2 * n0)?;
        let order = if e1 < 1e-13 && e2 < 1e-13 {
            2.0 // degenerate: both grids already exact
        } else {
            (e1 / e2.max(1e-300)).log2()
        };
        results.push(CheckResult::new(
            "kernel_vs_spectral_order",
            -order,
            -1.0,
            format!("errors {e1:.3e} -> {e2:.3e}, observed order {order:.2}"),
        ));
    }

    // short balance run plus maximum principles along it
    {
        let t_final = cfg.stepper.t_final.min(0.25);
        let stepper = StepperConfig::new(
            Scheme::IntegratingFactorRk4,
            cfg.stepper.cfl,
            cfg.stepper.dt_max.min(t_final / 8.0),
            t_final,
        )?;
        let diag = DiagnosticsOptions {
            cadence: 1,
            dissipation_decimate: cfg.diag.dissipation_decimate,
            wiener_delta: cfg.diag.wiener_delta,
        };
        let form = if cfg.form == RhsForm::Regularized {
            RhsForm::Regularized
        } else {
            RhsForm::Muskat
        };
        match simulate(&g, &cfg.phys, cfg.reg.as_ref(), form, &stepper, &cfg.quad, &diag) {
            Ok(out) => {
                let residual = energy_balance_from_records(&out.records, &cfg.phys)
                    .iter()
                    .fold(0.0f64, |m, r| m.max(r.relative_residual.abs()));
                results.push(CheckResult::new(
                    "balance_residual",
                    residual,
                    1e-3,
                    format!("short run to t = {t_final}"),
                ));
                let mp = maximum_principle_monitor(&out.trajectory, 1e-8);
                let ok = mp.sup_ok && mp.inf_ok && mp.slope_ok.unwrap_or(true);
                results.push(CheckResult::new(
                    "maximum_principles",
                    if ok { 0.0 } else { 1.0 },
                    0.5,
                    format!("slope max seen {:.6}", mp.slope_max_seen),
                ));
            }
            Err(abort) => {
                results.push(CheckResult::new(
                    "balance_residual",
                    f64::INFINITY,
                    1e-3,
                    format!("run aborted: {abort}"),
                ));
            }
        }
    }

    // tail control: the neglected alpha-tail must be small next to T itself
    {
        let t = eval_t(&g, &cfg.quad)?;
        let full_window = (cfg.quad.tail_cut - cfg.grid.half_period()).abs()
            < 1e-9 * cfg.grid.half_period()
            && cfg.quad.alpha_points == cfg.grid.n();
        let effective_radius = if full_window {
            (2.0 * cfg.quad.copies as f64 + 1.0) * cfg.grid.half_period()
        } else {
            cfg.quad.tail_cut
        };
        let bound = t_tail_bound(&g, effective_radius);
        let scale = t.sup_norm();
        let rel = if scale == 0.0 && bound == 0.0 {
            0.0
        } else {
            bound / scale.max(1e-300)
        };
        results.push(CheckResult::new(
            "tail_control",
            rel,
            0.02,
            format!("tail bound {bound:.3e} vs sup|T| {scale:.3e}"),
        ));
    }

    Ok(results)
}

/// Render the battery as a pass/fail table; returns overall success.
pub fn print_battery(results: &[CheckResult]) -> bool {
    let mut all_ok = true;
    println!("{:<28} {:>12} {:>12}  result", "check", "measured", "threshold");
    for r in results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        all_ok &= r.passed;
        println!(
            "{:<28} {:>12.3e} {:>12.3e}  {verdict}  ({})",
            r.name, r.measured, r.threshold, r.detail
        );
    }
    all_ok
}
