//! The complex spherical Radon transform, Fourier transforms of homogeneous
//! R_θ-invariant functions, parallel section functions, and a numerical
//! Parseval check.
//!
//! For an even R_θ-invariant `f` on S^{2n−1}, the Fourier transform of its
//! degree `−2n+2` extension satisfies `(f r^{−2n+2})^∧(ξ) = 2π R_c f(ξ)`.
//! Fourier transforms of `‖x‖_K^{−2}` go through the parallel section
//! function instead: `4π A_{K,H_ξ}(0)` for n = 2 and `−4π ΔA_{K,H_ξ}(0)`
//! for n = 3.

mod sections;

use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::Serialize;

use crate::bodies::StarBody;
use crate::error::{Error, Result};
use crate::geometry::{rtheta_apply, section_frame, UnitDirection};
use crate::quadrature::{radial_hyp_kernel, subsphere_rule, SphereRule};
use crate::rng::{seeded_rng, unit_vector};

pub use sections::{
    analytic_laplacian_at_zero, analytic_section, ft_norm_minus2, laplacian_a_at_zero,
    laplacian_a_at_zero_with, parallel_section, parallel_section_with, FtConfig, LaplacianEstimate,
    SectionEstimate, SectionMethod, TransformValue, DEFAULT_STEP_ANALYTIC, DEFAULT_STEP_MC,
    DEFAULT_STEP_QUADRATURE,
};

/// Claim deviations above this are reported as warnings.
pub const CLAIM_TOLERANCE: f64 = 1e-10;

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Measured deviations from the claimed symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub invariance_deviation: f64,
    pub evenness_deviation: f64,
}

/// A function on S^{2n−1} with symmetry claims.
#[derive(Clone)]
pub struct SphericalFunction {
    evaluator: Arc<Evaluator>,
    n: usize,
    label: String,
    claims_rtheta_invariant: bool,
    claims_even: bool,
    check: Arc<OnceLock<ClaimCheck>>,
}

impl fmt::Debug for SphericalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphericalFunction")
            .field("label", &self.label)
            .field("n", &self.n)
            .finish()
    }
}

impl SphericalFunction {
    pub fn new<F>(n: usize, label: &str, f: F, rtheta_invariant: bool, even: bool) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(f),
            n,
            label: label.to_string(),
            claims_rtheta_invariant: rtheta_invariant,
            claims_even: even,
            check: Arc::new(OnceLock::new()),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(n, &format!("constant({c})"), move |_| c, true, true)
    }

    /// `σ ↦ ρ_K(σ)^p`. R_θ-invariance includes `θ = π`, so an invariant body
    /// also gives an even function.
    pub fn radial_power(body: &StarBody, p: i32) -> Self {
        let b = body.clone();
        let inv = body.claims_rtheta_invariant();
        Self::new(
            body.n(),
            &format!("rho[{}]^{p}", body.label()),
            move |x| b.radial(x).powi(p),
            inv,
            inv,
        )
    }

    /// `σ ↦ ∫₀^{ρ_K(σ)} r^{2n−3}/(1−r²)^n dr`, the section integrand.
    pub fn section_kernel(body: &StarBody) -> Self {
        let b = body.clone();
        let m = (body.n() - 1) as u32;
        let inv = body.claims_rtheta_invariant();
        Self::new(
            body.n(),
            &format!("section_kernel[{}]", body.label()),
            move |x| radial_hyp_kernel(b.radial(x), m),
            inv,
            inv,
        )
    }

    /// `αf + βg`.
    pub fn linear_combination(alpha: f64, f: &SphericalFunction, beta: f64, g: &SphericalFunction) -> Self {
        let (fe, ge) = (f.evaluator.clone(), g.evaluator.clone());
        Self::new(
            f.n,
            &format!("{alpha}*{} + {beta}*{}", f.label, g.label),
            move |x| alpha * fe(x) + beta * ge(x),
            f.claims_rtheta_invariant && g.claims_rtheta_invariant,
            f.claims_even && g.claims_even,
        )
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn claims_rtheta_invariant(&self) -> bool {
        self.claims_rtheta_invariant
    }

    pub fn claims_even(&self) -> bool {
        self.claims_even
    }

    /// Deviations measured once on 256 seeded points and cached.
    pub fn claim_check(&self) -> ClaimCheck {
        *self.check.get_or_init(|| {
            let mut rng = seeded_rng(0xc1a1);
            let mut x = vec![0.0; 2 * self.n];
            let mut inv: f64 = 0.0;
            let mut even: f64 = 0.0;
            for _ in 0..256 {
                unit_vector(&mut rng, &mut x);
                let theta = rng.random_range(0.0..TAU);
                let fx = self.eval(&x);
                inv = inv.max((fx - self.eval(&rtheta_apply(&x, theta))).abs());
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                even = even.max((fx - self.eval(&neg)).abs());
            }
            ClaimCheck {
                invariance_deviation: inv,
                evenness_deviation: even,
            }
        })
    }

    /// Warnings for claimed symmetries that the samples contradict.
    pub fn warnings(&self) -> Vec<String> {
        let c = self.claim_check();
        let mut out = Vec::new();
        if self.claims_rtheta_invariant && c.invariance_deviation > CLAIM_TOLERANCE {
            out.push(format!(
                "{}: claimed R_theta-invariance deviates by {:e}",
                self.label, c.invariance_deviation
            ));
        }
        if self.claims_even && c.evenness_deviation > CLAIM_TOLERANCE {
            out.push(format!(
                "{}: claimed evenness deviates by {:e}",
                self.label, c.evenness_deviation
            ));
        }
        out
    }
}

/// A quadrature value with an error estimate and any claim warnings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadonValue {
    pub value: f64,
    pub error_estimate: f64,
    pub level: usize,
    pub warnings: Vec<String>,
}

fn check_direction(n: usize, xi: &UnitDirection) -> Result<()> {
    if xi.n() != n {
        return Err(Error::InvalidParameter(format!(
            "direction has complex dimension {}, function {}",
            xi.n(),
            n
        )));
    }
    if n < 2 {
        return Err(Error::Unsupported("complex hyperplanes need n >= 2".into()));
    }
    Ok(())
}

fn radon_at_level(f: &SphericalFunction, xi: &UnitDirection, level: usize) -> Result<f64> {
    let frame = section_frame(xi);
    // the orbit-reduced rule is exact only for genuinely invariant integrands
    let reduced =
        f.claims_rtheta_invariant() && f.claim_check().invariance_deviation <= CLAIM_TOLERANCE;
    let rule = subsphere_rule(&frame, level, reduced)?;
    Ok(rule.integrate(|x| f.eval(x)))
}

/// `R_c f(ξ) = ∫_{S^{2n−1} ∩ H_ξ} f`.
pub fn radon_complex(f: &SphericalFunction, xi: &UnitDirection, level: usize) -> Result<f64> {
    check_direction(f.n(), xi)?;
    radon_at_level(f, xi, level)
}

/// [`radon_complex`] with the difference against half the level as error
/// estimate and the claim warnings attached.
pub fn radon_complex_detailed(f: &SphericalFunction, xi: &UnitDirection, level: usize) -> Result<RadonValue> {
    check_direction(f.n(), xi)?;
    let value = radon_at_level(f, xi, level)?;
    let coarse = radon_at_level(f, xi, (level / 2).max(1))?;
    Ok(RadonValue {
        value,
        error_estimate: (value - coarse).abs(),
        level,
        warnings: f.warnings(),
    })
}

/// `(f r^{−2n+2})^∧(ξ) = 2π R_c f(ξ)`.
pub fn ft_homogeneous_2n2(f: &SphericalFunction, xi: &UnitDirection, level: usize) -> Result<f64> {
    Ok(TAU * radon_complex(f, xi, level)?)
}

pub fn ft_homogeneous_2n2_detailed(
    f: &SphericalFunction,
    xi: &UnitDirection,
    level: usize,
) -> Result<RadonValue> {
    let mut r = radon_complex_detailed(f, xi, level)?;
    r.value *= TAU;
    r.error_estimate *= TAU;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsevalResult {
    pub residual: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub level: usize,
}

/// Relative residual of the Parseval identity on ℝ⁴ with both degrees −2:
/// `∫_{S³} (ρ_K² r^{−2})^∧ (ρ_L² r^{−2})^∧ = (2π)⁴ ∫_{S³} ρ_K² ρ_L²`.
///
/// Both sides use the product rule of the given level on S³; the Fourier
/// transforms at its nodes come from [`ft_homogeneous_2n2`] on the circles
/// `S³ ∩ H_θ`.
pub fn parseval_check(k: &StarBody, l: &StarBody, level: usize) -> Result<ParsevalResult> {
    if k.n() != 2 || l.n() != 2 {
        return Err(Error::Unsupported("the Parseval check is implemented for n = 2".into()));
    }
    let fk = SphericalFunction::radial_power(k, 2);
    let fl = SphericalFunction::radial_power(l, 2);
    let reduced = k.claims_rtheta_invariant() && l.claims_rtheta_invariant();
    let outer = SphereRule::new(2, level, reduced)?;
    let inner_level = level;
    let lhs = outer.integrate(|theta| {
        let xi = UnitDirection::with_tolerance(theta.to_vec(), 1e-10).expect("rule nodes are unit");
        let frame = section_frame(&xi);
        let circle = subsphere_rule(&frame, inner_level, reduced).expect("n = 2 frame");
        let a = TAU * circle.integrate_serial(|x| fk.eval(x));
        let b = TAU * circle.integrate_serial(|x| fl.eval(x));
        a * b
    });
    let rhs = TAU.powi(4) * outer.integrate(|x| fk.eval(x) * fl.eval(x));
    Ok(ParsevalResult {
        residual: (lhs - rhs).abs() / rhs.abs(),
        lhs,
        rhs,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{make_ball, StarBody};
    use crate::selftest::oracle::classical_ft_power;
    use std::f64::consts::PI;

    fn random_dir(n: usize, seed: u64) -> UnitDirection {
        let mut rng = seeded_rng(seed);
        let mut v = vec![0.0; 2 * n];
        unit_vector(&mut rng, &mut v);
        UnitDirection::new(v).unwrap()
    }

    #[test]
    fn radon_of_one() {
        let xi = random_dir(2, 1);
        assert!((radon_complex(&SphericalFunction::constant(2, 1.0), &xi, 8).unwrap() - TAU).abs() < 1e-12);
        let xi = random_dir(3, 2);
        let v = radon_complex(&SphericalFunction::constant(3, 1.0), &xi, 8).unwrap();
        assert!((v - 2.0 * PI * PI).abs() < 1e-11);
        let ball = SphericalFunction::radial_power(&make_ball(0.5, 2).unwrap(), 2);
        assert!((radon_complex(&ball, &random_dir(2, 3), 4).unwrap() - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn ft_of_one_matches_classical_formula() {
        let v2 = ft_homogeneous_2n2(&SphericalFunction::constant(2, 1.0), &random_dir(2, 4), 8).unwrap();
        assert!((v2 - classical_ft_power(4, 2)).abs() < 1e-10);
        let v3 = ft_homogeneous_2n2(&SphericalFunction::constant(3, 1.0), &random_dir(3, 5), 8).unwrap();
        assert!((v3 - classical_ft_power(6, 4)).abs() < 1e-9);
    }

    #[test]
    fn ft_is_linear() {
        let e = StarBody::complex_ellipsoid(&[0.6, 0.35, 0.5]).unwrap();
        let f = SphericalFunction::radial_power(&e, 2);
        let g = SphericalFunction::radial_power(&e, 4);
        let h = SphericalFunction::linear_combination(2.5, &f, -0.75, &g);
        let xi = random_dir(3, 6);
        let lhs = ft_homogeneous_2n2(&h, &xi, 10).unwrap();
        let rhs = 2.5 * ft_homogeneous_2n2(&f, &xi, 10).unwrap() - 0.75 * ft_homogeneous_2n2(&g, &xi, 10).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn radon_is_constant_along_orbits() {
        let e = StarBody::complex_ellipsoid(&[0.6, 0.35, 0.5]).unwrap();
        let f = SphericalFunction::radial_power(&e, 2);
        let xi = random_dir(3, 7);
        let a = radon_complex(&f, &xi, 12).unwrap();
        for theta in [0.3, 1.7, 4.0] {
            let b = radon_complex(&f, &xi.rotate(theta), 12).unwrap();
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn claim_violations_warn() {
        let skew = SphericalFunction::new(2, "skew", |x| 1.0 + x[0], true, true);
        let r = radon_complex_detailed(&skew, &random_dir(2, 8), 6).unwrap();
        assert_eq!(r.warnings.len(), 2);
        let ok = SphericalFunction::constant(2, 3.0);
        assert!(radon_complex_detailed(&ok, &random_dir(2, 8), 6).unwrap().warnings.is_empty());
    }

    #[test]
    fn parseval_for_balls_is_exact() {
        for (a, b) in [(0.5, 0.5), (0.3, 0.7)] {
            let r = parseval_check(&make_ball(a, 2).unwrap(), &make_ball(b, 2).unwrap(), 8).unwrap();
            assert!(r.residual <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn parseval_for_ellipsoids() {
        let k = StarBody::complex_ellipsoid(&[0.6, 0.3]).unwrap();
        let l = StarBody::complex_ellipsoid(&[0.4, 0.7]).unwrap();
        let r = parseval_check(&k, &l, 32).unwrap();
        assert!(r.residual <= 1e-3, "{r:?}");
    }
}
