//! Parallel section functions `A_{K,H_ξ}(u)`, their Laplacian at the origin,
//! and the Fourier transform of `‖x‖_K^{−2}` built from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bodies::{AnalyticForm, StarBody};
use crate::error::{Error, Result};
use crate::geometry::{section_frame, SectionFrame, UnitDirection};
use crate::quadrature::{
    mc_section_volume_with, ray_parallel_sections, sphere_area, subsphere_rule, McConfig,
    McEstimate, RayTracer, Sampler, SectionWeight,
};

/// Finite-difference step for closed-form section functions.
pub const DEFAULT_STEP_ANALYTIC: f64 = 5e-2;
/// Finite-difference step for Monte Carlo section functions.
pub const DEFAULT_STEP_MC: f64 = 1e-2;
/// Finite-difference step for ray-quadrature section functions.
pub const DEFAULT_STEP_QUADRATURE: f64 = 5e-2;

/// Directions whose `x̃`-block norm is below this count as lying in the `x₃`-plane.
const BLOCK_ALIGNMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionMethod {
    /// Closed-form slice volumes (balls and the transformed counterexample).
    Analytic,
    /// Seeded Monte Carlo.
    MonteCarlo,
    /// Deterministic ray casting over subsphere rule nodes.
    Quadrature,
    /// Analytic when available, quadrature otherwise.
    Auto,
}

/// Settings shared by the section-function based transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtConfig {
    pub method: SectionMethod,
    /// Level of the subsphere rule for the quadrature method.
    pub level: usize,
    pub mc: McConfig,
    /// Finite-difference step; `None` picks the default for the method.
    pub h: Option<f64>,
}

impl Default for FtConfig {
    fn default() -> Self {
        Self {
            method: SectionMethod::Auto,
            level: 16,
            mc: McConfig {
                sampler: Sampler::Ray,
                ..McConfig::default()
            },
            h: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub method: SectionMethod,
    pub mc: Option<McEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianEstimate {
    pub value: f64,
    /// One-sigma style error: sampling or level error combined with the
    /// finite-difference truncation estimate.
    pub error_estimate: f64,
    pub truncation_estimate: f64,
    pub std_error: Option<f64>,
    pub method: SectionMethod,
    pub h: f64,
    /// `(|u|, A(u))` at the stencil points.
    pub stencil: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// A Fourier-transform value with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformValue {
    pub value: f64,
    pub error_estimate: f64,
    pub std_error: Option<f64>,
    pub method: SectionMethod,
    pub warnings: Vec<String>,
}

fn closed_form(body: &StarBody, xi: &UnitDirection) -> Result<AnalyticForm> {
    let form = body.analytic_form().ok_or_else(|| {
        Error::Unsupported(format!("no closed-form sections for `{}`", body.label()))
    })?;
    if let AnalyticForm::CounterexampleM { .. } = form {
        let c = xi.coords()[..4].iter().map(|v| v * v).sum::<f64>().sqrt();
        if c > BLOCK_ALIGNMENT_TOLERANCE {
            return Err(Error::Unsupported(
                "closed-form sections of the counterexample body need ξ in the x₃-plane".into(),
            ));
        }
    }
    Ok(form)
}

/// Radius beyond which `A(u)` vanishes.
fn support_radius(body: &StarBody, form: Option<AnalyticForm>) -> f64 {
    match form {
        Some(AnalyticForm::Ball { radius }) => radius,
        Some(AnalyticForm::CounterexampleM { b, .. }) => 1.0 / b,
        None => body.circumradius(),
    }
}

fn form_section(form: AnalyticForm, n: usize, u2: f64) -> f64 {
    match form {
        AnalyticForm::Ball { radius } => {
            let d = 2 * n - 2;
            let s = radius * radius - u2;
            if s <= 0.0 {
                0.0
            } else {
                sphere_area(d - 1) / d as f64 * s.powi(n as i32 - 1)
            }
        }
        AnalyticForm::CounterexampleM { a, b } => {
            if u2 > 1.0 / (b * b) {
                0.0
            } else {
                let h2 = (1.0 + u2) / (a * a - 1.0);
                PI * PI / 2.0 * h2 * h2
            }
        }
    }
}

/// Closed-form `A_{K,H_ξ}(u)` for balls (any ξ) and for the transformed
/// counterexample body with ξ in the `x₃`-plane, where
/// `A(u) = (π²/2) h(|u|)⁴` with `h(y)² = (1+y²)/(a²−1)` for `|u| ≤ 1/b`.
pub fn analytic_section(body: &StarBody, xi: &UnitDirection, u: [f64; 2]) -> Result<f64> {
    check_dims(body, xi)?;
    let form = closed_form(body, xi)?;
    Ok(form_section(form, body.n(), u[0] * u[0] + u[1] * u[1]))
}

/// Closed-form `ΔA_{K,H_ξ}(0)`: `−4(n−1) ω_{2n−2} R^{2n−4}` for a ball of
/// radius `R`, `4π²/(a²−1)²` for the transformed counterexample.
pub fn analytic_laplacian_at_zero(body: &StarBody, xi: &UnitDirection) -> Result<f64> {
    check_dims(body, xi)?;
    let n = body.n();
    Ok(match closed_form(body, xi)? {
        AnalyticForm::Ball { radius } => {
            let d = 2 * n - 2;
            let omega = sphere_area(d - 1) / d as f64;
            -4.0 * (n as f64 - 1.0) * omega * radius.powi(2 * n as i32 - 4)
        }
        AnalyticForm::CounterexampleM { a, .. } => 4.0 * PI * PI / (a * a - 1.0).powi(2),
    })
}

fn check_dims(body: &StarBody, xi: &UnitDirection) -> Result<()> {
    if body.n() < 2 {
        return Err(Error::Unsupported("complex hyperplanes need n >= 2".into()));
    }
    if xi.n() != body.n() {
        return Err(Error::InvalidParameter(format!(
            "direction has complex dimension {}, body {}",
            xi.n(),
            body.n()
        )));
    }
    Ok(())
}

fn resolve(method: SectionMethod, body: &StarBody, xi: &UnitDirection) -> SectionMethod {
    match method {
        SectionMethod::Auto => {
            if closed_form(body, xi).is_ok() {
                SectionMethod::Analytic
            } else {
                SectionMethod::Quadrature
            }
        }
        m => m,
    }
}

/// Ray quadrature of `A(u)` on the subsphere rule of `frame`.
fn quadrature_section(body: &StarBody, frame: &SectionFrame, u: [f64; 2], level: usize) -> Result<f64> {
    let reduced = u == [0.0, 0.0] && body.claims_rtheta_invariant();
    let rule = subsphere_rule(frame, level, reduced)?;
    let tracer = RayTracer::new(body, frame, &[u]);
    Ok(rule.integrate(|dir| {
        let mut v = [0.0];
        let mut r = [0.0];
        tracer.trace_ambient(dir, &mut v, &mut r);
        v[0]
    }))
}

/// `A_{K,H_ξ}(u)`, the euclidean volume of `K ∩ (H_ξ + u₁ξ + u₂ξ_⊥)`.
pub fn parallel_section(
    body: &StarBody,
    xi: &UnitDirection,
    u: [f64; 2],
    method: SectionMethod,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let config = FtConfig {
        method,
        mc: McConfig {
            samples,
            seed,
            sampler: Sampler::HitOrMiss,
        },
        ..FtConfig::default()
    };
    Ok(parallel_section_with(body, xi, u, &config)?.value)
}

pub fn parallel_section_with(
    body: &StarBody,
    xi: &UnitDirection,
    u: [f64; 2],
    config: &FtConfig,
) -> Result<SectionEstimate> {
    check_dims(body, xi)?;
    let method = resolve(config.method, body, xi);
    let frame = section_frame(xi);
    Ok(match method {
        SectionMethod::Analytic => SectionEstimate {
            value: analytic_section(body, xi, u)?,
            error_estimate: 0.0,
            method,
            mc: None,
        },
        SectionMethod::MonteCarlo => {
            let est = mc_section_volume_with(body, &frame, u, SectionWeight::Euclidean, &config.mc)?;
            SectionEstimate {
                value: est.value,
                error_estimate: est.std_error,
                method,
                mc: Some(est),
            }
        }
        SectionMethod::Quadrature | SectionMethod::Auto => {
            let fine = quadrature_section(body, &frame, u, config.level)?;
            let coarse = quadrature_section(body, &frame, u, (config.level / 2).max(1))?;
            SectionEstimate {
                value: fine,
                error_estimate: (fine - coarse).abs(),
                method: SectionMethod::Quadrature,
                mc: None,
            }
        }
    })
}

/// `ΔA(0)` by the radial stencil `4(A(h) − A(0))/h²`, Richardson-extrapolated
/// over `{h, h/2}`; the same extrapolation over `{h/2, h/4}` gives the
/// truncation estimate.
pub fn laplacian_a_at_zero(
    body: &StarBody,
    xi: &UnitDirection,
    h: f64,
    method: SectionMethod,
    samples: usize,
    seed: u64,
) -> Result<LaplacianEstimate> {
    let config = FtConfig {
        method,
        h: Some(h),
        mc: McConfig {
            samples,
            seed,
            sampler: Sampler::Ray,
        },
        ..FtConfig::default()
    };
    laplacian_a_at_zero_with(body, xi, &config)
}

pub fn laplacian_a_at_zero_with(
    body: &StarBody,
    xi: &UnitDirection,
    config: &FtConfig,
) -> Result<LaplacianEstimate> {
    check_dims(body, xi)?;
    if !body.claims_rtheta_invariant() {
        return Err(Error::Precondition(format!(
            "`{}` is not R_theta-invariant, so its parallel section function need not be radial",
            body.label()
        )));
    }
    let method = resolve(config.method, body, xi);
    let form = closed_form(body, xi).ok();
    let mut warnings = Vec::new();
    let default_h = match method {
        SectionMethod::Analytic => DEFAULT_STEP_ANALYTIC,
        SectionMethod::MonteCarlo => DEFAULT_STEP_MC,
        _ => DEFAULT_STEP_QUADRATURE,
    };
    let requested = config.h.unwrap_or(default_h);
    if !(requested > 0.0) {
        return Err(Error::InvalidParameter(format!("step h must be positive, got {requested}")));
    }
    let cap = 0.25 * support_radius(body, form);
    let h = if requested > cap {
        warnings.push(format!("step h = {requested} reduced to {cap} to stay inside the support of A"));
        cap
    } else {
        requested
    };
    let steps = [0.0, h, h / 2.0, h / 4.0];
    let offsets: Vec<[f64; 2]> = steps.iter().map(|t| [*t, 0.0]).collect();
    let frame = section_frame(xi);

    // Richardson weights on (A(0), A(h), A(h/2), A(h/4))
    let h2 = h * h;
    let fine = [-20.0 / h2, -4.0 / (3.0 * h2), 64.0 / (3.0 * h2), 0.0];
    let check = [-80.0 / h2, 0.0, -16.0 / (3.0 * h2), 256.0 / (3.0 * h2)];
    let apply = |w: &[f64; 4], a: &[f64]| w.iter().zip(a).map(|(w, a)| w * a).sum::<f64>();

    let (values, value, level_error, std_error) = match method {
        SectionMethod::Analytic => {
            let f = form.ok_or_else(|| Error::Unsupported("no closed form".into()))?;
            let a: Vec<f64> = steps.iter().map(|t| form_section(f, body.n(), t * t)).collect();
            let roundoff = 100.0 * f64::EPSILON * a[0].abs() * 20.0 / h2;
            (a.clone(), apply(&fine, &a), roundoff, None)
        }
        SectionMethod::Quadrature | SectionMethod::Auto => {
            let coarse_level = (config.level / 2).max(1);
            let mut a = Vec::new();
            let mut c = Vec::new();
            for u in &offsets {
                a.push(quadrature_section(body, &frame, *u, config.level)?);
                c.push(quadrature_section(body, &frame, *u, coarse_level)?);
            }
            let v = apply(&fine, &a);
            (a, v, (v - apply(&fine, &c)).abs(), None)
        }
        SectionMethod::MonteCarlo => match config.mc.sampler {
            Sampler::Ray => {
                let est = ray_parallel_sections(body, &frame, &offsets, config.mc.samples, config.mc.seed)?;
                let comb = est.combine(&fine);
                (est.means.clone(), comb.value, 0.0, Some(comb.std_error))
            }
            Sampler::HitOrMiss => {
                let mut a = Vec::new();
                let mut var = 0.0;
                for (i, u) in offsets.iter().enumerate() {
                    let cfg = McConfig {
                        seed: config.mc.seed.wrapping_add(i as u64),
                        ..config.mc
                    };
                    let e = mc_section_volume_with(body, &frame, *u, SectionWeight::Euclidean, &cfg)?;
                    var += (fine[i] * e.std_error).powi(2);
                    a.push(e.value);
                }
                let v = apply(&fine, &a);
                (a, v, 0.0, Some(var.sqrt()))
            }
        },
    };
    let mut values = values;
    if values.iter().any(|a| *a < 0.0) {
        warnings.push("negative slice volume estimate clamped at 0".into());
        values.iter_mut().for_each(|a| *a = a.max(0.0));
    }
    let value = if warnings.iter().any(|w| w.contains("clamped")) {
        apply(&fine, &values)
    } else {
        value
    };
    let truncation = (value - apply(&check, &values)).abs();
    let sampling = std_error.unwrap_or(0.0);
    let error_estimate = (sampling * sampling + (level_error + truncation).powi(2)).sqrt();
    Ok(LaplacianEstimate {
        value,
        error_estimate,
        truncation_estimate: truncation,
        std_error,
        method,
        h,
        stencil: steps.iter().copied().zip(values).collect(),
        warnings,
    })
}

/// `(‖x‖_K^{−2})^∧(ξ)`: `4π A_{K,H_ξ}(0)` for n = 2, `−4π ΔA_{K,H_ξ}(0)` for n = 3.
pub fn ft_norm_minus2(body: &StarBody, xi: &UnitDirection, config: &FtConfig) -> Result<TransformValue> {
    let four_pi = 4.0 * PI;
    match body.n() {
        2 => {
            let a = parallel_section_with(body, xi, [0.0, 0.0], config)?;
            Ok(TransformValue {
                value: four_pi * a.value,
                error_estimate: four_pi * a.error_estimate,
                std_error: a.mc.map(|m| four_pi * m.std_error),
                method: a.method,
                warnings: Vec::new(),
            })
        }
        3 => {
            let lap = laplacian_a_at_zero_with(body, xi, config)?;
            Ok(TransformValue {
                value: -four_pi * lap.value,
                error_estimate: four_pi * lap.error_estimate,
                std_error: lap.std_error.map(|s| four_pi * s),
                method: lap.method,
                warnings: lap.warnings,
            })
        }
        n => Err(Error::Unsupported(format!(
            "Fourier transform of the norm is implemented for n = 2 and n = 3, got n = {n}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{hyperbolic_transform, make_ball, make_counterexample_k, make_counterexample_m};
    use crate::rng::{seeded_rng, unit_vector};
    use crate::transforms::{ft_homogeneous_2n2, SphericalFunction};

    fn x3_dir() -> UnitDirection {
        UnitDirection::axis(3, 4)
    }

    #[test]
    fn counterexample_section_values() {
        let m = make_counterexample_m(2.0, 2.0).unwrap();
        let a0 = analytic_section(&m, &x3_dir(), [0.0, 0.0]).unwrap();
        assert!((a0 - PI * PI / 18.0).abs() < 1e-15);
        assert_eq!(analytic_section(&m, &x3_dir(), [0.0, 0.55]).unwrap(), 0.0);
        let lap = analytic_laplacian_at_zero(&m, &x3_dir()).unwrap();
        assert!((lap - 4.0 * PI * PI / 9.0).abs() < 1e-14);
        let mixed = UnitDirection::normalize(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(analytic_section(&m, &mixed, [0.0, 0.0]).is_err());
    }

    #[test]
    fn ball_section_values() {
        let b = make_ball(0.5, 2).unwrap();
        let xi = UnitDirection::axis(2, 0);
        assert!((analytic_section(&b, &xi, [0.0, 0.0]).unwrap() - PI / 4.0).abs() < 1e-15);
        let b3 = make_ball(0.5, 3).unwrap();
        let lap = analytic_laplacian_at_zero(&b3, &x3_dir()).unwrap();
        assert!((lap + PI * PI).abs() < 1e-13);
    }

    #[test]
    fn analytic_stencil_recovers_the_laplacian() {
        let m = make_counterexample_m(2.0, 2.0).unwrap();
        let est = laplacian_a_at_zero(&m, &x3_dir(), DEFAULT_STEP_ANALYTIC, SectionMethod::Analytic, 1, 0)
            .unwrap();
        assert!((est.value - 4.0 * PI * PI / 9.0).abs() < 1e-10, "{est:?}");
        let b3 = make_ball(0.5, 3).unwrap();
        let est = laplacian_a_at_zero(&b3, &x3_dir(), 0.05, SectionMethod::Analytic, 1, 0).unwrap();
        assert!((est.value + PI * PI).abs() < 1e-10, "{est:?}");
    }

    #[test]
    fn quadrature_laplacian_of_an_ellipsoid() {
        // slices orthogonal to the first axis have volume (π²/2)a₂²a₃²(1 − |u|²/a₁²)²,
        // so ΔA(0) = −4π² a₂² a₃² / a₁²
        let (a1, a2, a3) = (0.5, 0.45, 0.4);
        let e = StarBody::complex_ellipsoid(&[a1, a2, a3]).unwrap();
        let xi = UnitDirection::axis(3, 0);
        let want = -4.0 * PI * PI * a2 * a2 * a3 * a3 / (a1 * a1);
        let cfg = FtConfig {
            method: SectionMethod::Quadrature,
            level: 16,
            ..FtConfig::default()
        };
        let est = laplacian_a_at_zero_with(&e, &xi, &cfg).unwrap();
        assert!((est.value - want).abs() < 1e-6 * want.abs(), "{est:?} vs {want}");
        assert!(est.truncation_estimate < 1e-6 * want.abs());
    }

    #[test]
    fn golden_ft_value() {
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        let m = hyperbolic_transform(&k).unwrap();
        let v = ft_norm_minus2(&m, &x3_dir(), &FtConfig::default()).unwrap();
        assert_eq!(v.method, SectionMethod::Analytic);
        assert!((v.value + 16.0 * PI.powi(3) / 9.0).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn ball_ft_matches_the_classical_transform() {
        // ‖x‖^{-2} of a ball of radius R is R²|x|^{-2}; its transform on ℝ⁶ is 16π³R²
        let b = make_ball(0.5, 3).unwrap();
        let v = ft_norm_minus2(&b, &x3_dir(), &FtConfig::default()).unwrap();
        let want = crate::selftest::oracle::classical_ft_power(6, 2) * 0.25;
        assert!((v.value - want).abs() < 1e-9 * want, "{} vs {want}", v.value);
    }

    #[test]
    fn quadrature_and_analytic_agree_on_balls() {
        let b = make_ball(0.45, 3).unwrap();
        let xi = UnitDirection::normalize(&[0.3, -0.2, 0.5, 0.1, 0.7, 0.2]).unwrap();
        let q = parallel_section_with(
            &b,
            &xi,
            [0.1, 0.2],
            &FtConfig { method: SectionMethod::Quadrature, level: 8, ..FtConfig::default() },
        )
        .unwrap();
        let exact = analytic_section(&b, &xi, [0.1, 0.2]).unwrap();
        assert!((q.value - exact).abs() < 1e-11, "{q:?} vs {exact}");
    }

    #[test]
    fn n2_dual_route() {
        // 4π A(0) against 2π R_c(ρ²)
        let e = StarBody::complex_ellipsoid(&[0.55, 0.3]).unwrap();
        let mut rng = seeded_rng(3);
        let mut v = vec![0.0; 4];
        for _ in 0..20 {
            unit_vector(&mut rng, &mut v);
            let xi = UnitDirection::new(v.clone()).unwrap();
            let a = ft_norm_minus2(&e, &xi, &FtConfig::default()).unwrap();
            let r = ft_homogeneous_2n2(&SphericalFunction::radial_power(&e, 2), &xi, 8).unwrap();
            assert!((a.value - r).abs() < 1e-10 * r, "{} vs {r}", a.value);
        }
    }

    #[test]
    fn ray_monte_carlo_laplacian() {
        let b3 = make_ball(0.5, 3).unwrap();
        let xi = UnitDirection::normalize(&[0.3, -0.2, 0.5, 0.1, 0.7, 0.2]).unwrap();
        let est = laplacian_a_at_zero(&b3, &xi, DEFAULT_STEP_MC, SectionMethod::MonteCarlo, 20_000, 11).unwrap();
        let want = -PI * PI;
        let sigma = est.std_error.unwrap();
        assert!((est.value - want).abs() <= 3.0 * sigma + est.truncation_estimate, "{est:?}");
    }

    #[test]
    fn non_invariant_bodies_are_rejected() {
        let e = StarBody::real_ellipsoid(&[0.5, 0.3, 0.5, 0.5, 0.4, 0.4]).unwrap();
        let r = laplacian_a_at_zero(&e, &x3_dir(), 0.01, SectionMethod::Quadrature, 1, 0);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn unsupported_dimension() {
        let b = make_ball(0.5, 1).unwrap();
        assert!(ft_norm_minus2(&b, &UnitDirection::axis(1, 0), &FtConfig::default()).is_err());
    }
}
