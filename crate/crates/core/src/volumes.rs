//! Volumes and central complex-hyperplane section volumes under the Bergman
//! element, their euclidean counterparts, and the sandwich between them.

use serde::Serialize;

use crate::bodies::{hyperbolic_transform, StarBody};
use crate::error::{Error, Result};
use crate::geometry::{section_frame, UnitDirection};
use crate::quadrature::{radial_hyp_kernel, subsphere_rule, SphereRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ClosedFormQuadrature,
    Montecarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeResult {
    pub value: f64,
    pub method: VolumeMethod,
    /// Difference between the rule at `level` and at `level / 2`.
    pub error_estimate: f64,
    pub level: usize,
}

/// Quadrature level used when none is given: 32 for n ≤ 2, 24 above.
pub fn default_level(n: usize) -> usize {
    if n <= 2 {
        32
    } else {
        24
    }
}

/// Slack allowed on the sandwich ratios.
pub const SANDWICH_SLACK: f64 = 1e-8;

enum Domain<'a> {
    Sphere,
    Section(&'a UnitDirection),
}

fn rule_for(body: &StarBody, domain: &Domain, level: usize) -> Result<SphereRule> {
    let reduced = body.claims_rtheta_invariant();
    match domain {
        Domain::Sphere => SphereRule::new(body.n(), level, reduced),
        Domain::Section(xi) => {
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
            subsphere_rule(&section_frame(xi), level, reduced)
        }
    }
}

/// Integrates `g(ρ_K(σ))` at `level` and `level / 2`. With `guard`, a node
/// where `ρ_K ≥ 1` yields a singularity error naming that node.
fn integrate_radial<G: Fn(f64) -> f64 + Sync>(
    body: &StarBody,
    domain: Domain,
    level: usize,
    guard: bool,
    g: G,
) -> Result<VolumeResult> {
    if level == 0 {
        return Err(Error::InvalidParameter("quadrature level must be at least 1".into()));
    }
    let run = |level: usize| -> Result<f64> {
        let rule = rule_for(body, &domain, level)?;
        let value = rule.integrate(|x| {
            let rho = body.radial(x);
            if guard && !(rho < 1.0) {
                f64::NAN
            } else {
                g(rho)
            }
        });
        if value.is_nan() && guard {
            let mut bad = None;
            rule.for_each_node(|x, _| {
                let rho = body.radial(x);
                if bad.is_none() && !(rho < 1.0) {
                    bad = Some((rho, x.to_vec()));
                }
            });
            if let Some((radial, direction)) = bad {
                return Err(Error::Singularity {
                    radial,
                    limit: 1.0,
                    direction,
                });
            }
        }
        Ok(value)
    };
    let fine = run(level)?;
    let coarse = if level > 1 { run(level / 2)? } else { fine };
    Ok(VolumeResult {
        value: fine,
        method: VolumeMethod::ClosedFormQuadrature,
        error_estimate: (fine - coarse).abs(),
        level,
    })
}

fn scale(mut r: VolumeResult, factor: f64) -> VolumeResult {
    r.value *= factor;
    r.error_estimate *= factor;
    r
}

/// `HVol_{2n}(K) = 8ⁿ ∫_{S^{2n−1}} F_n(ρ_K) dσ` with the closed-form kernel
/// `F_n(ρ) = (1/2n)(ρ²/(1−ρ²))ⁿ`.
pub fn hvol(body: &StarBody, level: usize) -> Result<VolumeResult> {
    let n = body.n();
    let r = integrate_radial(body, Domain::Sphere, level, true, |rho| {
        radial_hyp_kernel(rho, n as u32)
    })?;
    Ok(scale(r, 8f64.powi(n as i32)))
}

/// `Vol_{2n}(K) = (1/2n) ∫ ρ_K^{2n} dσ`.
pub fn evol(body: &StarBody, level: usize) -> Result<VolumeResult> {
    let d = 2 * body.n() as i32;
    integrate_radial(body, Domain::Sphere, level, false, |rho| rho.powi(d) / d as f64)
}

/// `HVol_{2n−2}(K ∩ H_ξ) = 8^{n−1} ∫_{S^{2n−1} ∩ H_ξ} F_{n−1}(ρ_K) dσ`.
pub fn hvol_section(body: &StarBody, xi: &UnitDirection, level: usize) -> Result<VolumeResult> {
    let n = body.n();
    if n < 2 {
        return Err(Error::Unsupported("complex hyperplanes need n >= 2".into()));
    }
    let r = integrate_radial(body, Domain::Section(xi), level, true, |rho| {
        radial_hyp_kernel(rho, n as u32 - 1)
    })?;
    Ok(scale(r, 8f64.powi(n as i32 - 1)))
}

/// `Vol_{2n−2}(K ∩ H_ξ) = (1/(2n−2)) ∫_{S^{2n−1} ∩ H_ξ} ρ_K^{2n−2} dσ`.
pub fn evol_section(body: &StarBody, xi: &UnitDirection, level: usize) -> Result<VolumeResult> {
    if body.n() < 2 {
        return Err(Error::Unsupported("complex hyperplanes need n >= 2".into()));
    }
    let d = 2 * body.n() as i32 - 2;
    integrate_radial(body, Domain::Section(xi), level, false, |rho| rho.powi(d) / d as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeIdentity {
    pub hvol: f64,
    /// `8ⁿ Vol_{2n}(M)` for the transformed body `M`.
    pub scaled_evol: f64,
    pub residual: f64,
}

/// Relative residual of `HVol_{2n}(K) = 8ⁿ Vol_{2n}(M)`, where `M` is the
/// hyperbolic transform of `K`. Pointwise `F_n(ρ) = ρ_M^{2n}/(2n)` under
/// `v = r²/(1−r²)`, so with matched rules the residual is roundoff.
pub fn transform_volume_identity(body: &StarBody, level: usize) -> Result<VolumeIdentity> {
    let m = hyperbolic_transform(body)?;
    let h = hvol(body, level)?.value;
    let e = 8f64.powi(body.n() as i32) * evol(&m, level)?.value;
    Ok(VolumeIdentity {
        hvol: h,
        scaled_evol: e,
        residual: (h - e).abs() / h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub s: f64,
    pub n: usize,
    /// `HVol_{2n}(K) / (8ⁿ Vol_{2n}(K))`.
    pub volume_ratio: f64,
    /// `1/(1−s²)^{n+1}`.
    pub volume_bound: f64,
    /// `HVol_{2n−2}(K∩H_ξ) / (8^{n−1} Vol_{2n−2}(K∩H_ξ))` per direction.
    pub section_ratios: Vec<(Vec<f64>, f64)>,
    /// `1/(1−s²)^n`.
    pub section_bound: f64,
    pub holds: bool,
}

/// Checks `8ⁿ Vol(K) ≤ HVol(K) ≤ 8ⁿ Vol(K)/(1−s²)^{n+1}` and the section
/// analogue with exponent `n` for every direction given.
pub fn sandwich_check(
    body: &StarBody,
    s: f64,
    directions: &[UnitDirection],
    level: usize,
) -> Result<SandwichReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0, 1), got {s}")));
    }
    if body.circumradius() > s {
        return Err(Error::Precondition(format!(
            "circumradius {} of `{}` exceeds s = {s}",
            body.circumradius(),
            body.label()
        )));
    }
    let n = body.n();
    let q = 1.0 - s * s;
    let volume_bound = q.powi(-(n as i32 + 1));
    let section_bound = q.powi(-(n as i32));
    let volume_ratio =
        hvol(body, level)?.value / (8f64.powi(n as i32) * evol(body, level)?.value);
    let in_range = |r: f64, hi: f64| r >= 1.0 - SANDWICH_SLACK && r <= hi + SANDWICH_SLACK;
    let mut holds = in_range(volume_ratio, volume_bound);
    let mut section_ratios = Vec::with_capacity(directions.len());
    for xi in directions {
        let r = hvol_section(body, xi, level)?.value
            / (8f64.powi(n as i32 - 1) * evol_section(body, xi, level)?.value);
        holds &= in_range(r, section_bound);
        section_ratios.push((xi.coords().to_vec(), r));
    }
    Ok(SandwichReport {
        s,
        n,
        volume_ratio,
        volume_bound,
        section_ratios,
        section_bound,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{make_ball, make_counterexample_k, radial_perturbation};
    use crate::selftest::oracle::ball_hvol_reference;
    use crate::transforms::{radon_complex, SphericalFunction};
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        let b = make_ball(0.5, 2).unwrap();
        let h = hvol(&b, 8).unwrap();
        assert!((h.value - 32.0 * PI * PI / 9.0).abs() < 1e-9);
        assert!((h.value - ball_hvol_reference(0.5, 2)).abs() < 1e-8);
        let e = evol(&b, 8).unwrap();
        assert!((e.value - PI * PI / 32.0).abs() < 1e-14);
        let b1 = make_ball(0.6, 1).unwrap();
        let h1 = hvol(&b1, 4).unwrap().value;
        assert!((h1 - 8.0 * PI * 0.36 / 0.64).abs() < 1e-12);
    }

    #[test]
    fn ball_sections() {
        let b = make_ball(0.5, 2).unwrap();
        let xi = UnitDirection::normalize(&[0.2, 0.4, -0.1, 0.9]).unwrap();
        assert!((hvol_section(&b, &xi, 8).unwrap().value - 8.0 * PI / 3.0).abs() < 1e-12);
        let b3 = make_ball(0.5, 3).unwrap();
        let xi3 = UnitDirection::axis(3, 2);
        assert!((hvol_section(&b3, &xi3, 8).unwrap().value - 32.0 * PI * PI / 9.0).abs() < 1e-11);
        assert!(hvol_section(&make_ball(0.5, 1).unwrap(), &UnitDirection::axis(1, 0), 4).is_err());
    }

    #[test]
    fn section_equals_radon_of_kernel() {
        let e = StarBody::complex_ellipsoid(&[0.6, 0.35, 0.5]).unwrap();
        let g = SphericalFunction::new(
            3,
            "kernel",
            {
                let e = e.clone();
                move |x: &[f64]| radial_hyp_kernel(e.radial(x), 2)
            },
            true,
            true,
        );
        let xi = UnitDirection::normalize(&[0.3, 0.1, -0.5, 0.2, 0.6, 0.4]).unwrap();
        let a = hvol_section(&e, &xi, 12).unwrap().value;
        let b = 64.0 * radon_complex(&g, &xi, 12).unwrap();
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn volume_identity() {
        let b = make_ball(0.5, 2).unwrap();
        assert!(transform_volume_identity(&b, 16).unwrap().residual < 1e-13);
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        assert!(transform_volume_identity(&k, 12).unwrap().residual < 1e-12);
    }

    #[test]
    fn singular_bodies_are_reported() {
        let b = make_ball(0.9, 2).unwrap();
        let p = radial_perturbation(&b, 0.2);
        if let Ok(p) = p {
            assert!(matches!(hvol(&p, 8), Err(Error::Singularity { .. })));
        }
        let outside = StarBody::custom(2, "big", |_| 1.2, true, false).unwrap();
        match hvol(&outside, 4) {
            Err(Error::Singularity { direction, .. }) => assert_eq!(direction.len(), 4),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn sandwich_for_a_small_ball() {
        let b = make_ball(0.3, 2).unwrap();
        let dirs = [UnitDirection::axis(2, 0), UnitDirection::axis(2, 3)];
        let r = sandwich_check(&b, 0.3, &dirs, 8).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.volume_ratio > 1.0 && r.volume_ratio <= r.volume_bound);
        assert!(sandwich_check(&b, 0.2, &dirs, 8).is_err());
    }

    #[test]
    fn flat_limit() {
        let b = make_ball(1e-3, 2).unwrap();
        let r = sandwich_check(&b, 1e-3, &[UnitDirection::axis(2, 0)], 4).unwrap();
        assert!((r.volume_ratio - 1.0).abs() < 1e-5);
        assert!((r.section_ratios[0].1 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn hvol_dominates_scaled_evol() {
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        let s = k.circumradius();
        let r = sandwich_check(&k, s, &[UnitDirection::axis(3, 4), UnitDirection::axis(3, 0)], 8).unwrap();
        assert!(r.holds, "{r:?}");
    }
}
