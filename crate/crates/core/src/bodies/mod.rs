//! Star bodies given by their radial functions.
//!
//! A [`StarBody`] is an immutable, cheaply clonable handle. Catalog shapes
//! are evaluated in closed form; composite bodies (the hyperbolic transform,
//! radial perturbations, dilations) wrap an inner body and transform its
//! radial function pointwise.

mod spec;

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{norm, rtheta_apply};
use crate::quadrature::SphereRule;
use crate::rng::{seeded_rng, unit_vector};

pub use spec::{BodySpec, SpecDefaults, BODY_KINDS};

/// Default margin `δ` for the unit-ball guard of the hyperbolic transform.
pub const DEFAULT_CONTAINMENT_DELTA: f64 = 1e-6;

/// Tolerance applied when verifying an invariance claim.
pub const INVARIANCE_TOLERANCE: f64 = 1e-10;

type RadialFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Shape {
    Ball { rho: f64 },
    /// `‖z‖² = Σ |z_k|² / α_k²`, stored as `1/α_k²` per complex coordinate.
    ComplexEllipsoid { inv_sq: Vec<f64> },
    /// Axis-aligned ellipsoid with one semi-axis per real coordinate.
    RealEllipsoid { inv_sq: Vec<f64> },
    /// `{|x̃| ≤ 1/a, |x̃|² + (1+b²)|x₃|² ≤ 1}` in ℝ⁶.
    CounterexampleK { a: f64, b: f64 },
    /// `{|x̃|² ≤ (1+|x₃|²)/(a²−1), |x₃| ≤ 1/b}` in ℝ⁶.
    CounterexampleM { a: f64, b: f64 },
    HyperbolicTransform { of: StarBody },
    RadialPerturbation { of: StarBody, epsilon: f64 },
    Dilation { of: StarBody, factor: f64 },
    Custom { radial: Arc<RadialFn> },
}

struct BodyInner {
    shape: Shape,
    n: usize,
    label: String,
    claims_rtheta_invariant: bool,
    claims_unit_ball_contained: bool,
    circumradius: f64,
    extremal_direction: Vec<f64>,
}

/// A star body in ℝ²ⁿ, represented by its radial function on the sphere.
#[derive(Clone)]
pub struct StarBody {
    inner: Arc<BodyInner>,
}

/// Bodies whose central and parallel sections are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticForm {
    Ball { radius: f64 },
    CounterexampleM { a: f64, b: f64 },
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarBody")
            .field("label", &self.inner.label)
            .field("n", &self.inner.n)
            .field("circumradius", &self.inner.circumradius)
            .finish()
    }
}

impl StarBody {
    fn build(shape: Shape, n: usize, label: String, invariant: bool, contained: bool) -> Self {
        let provisional = StarBody {
            inner: Arc::new(BodyInner {
                shape,
                n,
                label,
                claims_rtheta_invariant: invariant,
                claims_unit_ball_contained: contained,
                circumradius: 0.0,
                extremal_direction: Vec::new(),
            }),
        };
        let (radius, direction) = match provisional.extremal_direction_candidate() {
            Some(d) => (provisional.radial(&d), d),
            None => provisional.sweep_circumradius(),
        };
        let mut inner = match Arc::try_unwrap(provisional.inner) {
            Ok(inner) => inner,
            Err(_) => unreachable!("provisional body is never shared"),
        };
        inner.circumradius = radius;
        inner.extremal_direction = direction;
        StarBody {
            inner: Arc::new(inner),
        }
    }

    pub fn ball(rho: f64, n: usize) -> Result<Self> {
        check_n(n)?;
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must lie in (0, 1), got {rho}"
            )));
        }
        Ok(Self::build(Shape::Ball { rho }, n, format!("ball({rho})"), true, true))
    }

    /// The R_θ-invariant ellipsoid `Σ |z_k|²/α_k² ≤ 1`, one semi-axis per complex coordinate.
    pub fn complex_ellipsoid(axes: &[f64]) -> Result<Self> {
        check_n(axes.len())?;
        check_axes(axes)?;
        let inv_sq = axes.iter().map(|a| 1.0 / (a * a)).collect();
        let label = format!("complex_ellipsoid({})", join(axes));
        Ok(Self::build(Shape::ComplexEllipsoid { inv_sq }, axes.len(), label, true, true))
    }

    /// Axis-aligned ellipsoid with one semi-axis per real coordinate. It is
    /// R_θ-invariant only when the two semi-axes of every pair agree.
    pub fn real_ellipsoid(axes: &[f64]) -> Result<Self> {
        if axes.is_empty() || axes.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "real ellipsoid needs an even number of semi-axes, got {}",
                axes.len()
            )));
        }
        check_axes(axes)?;
        let invariant = axes.chunks_exact(2).all(|p| p[0] == p[1]);
        let inv_sq = axes.iter().map(|a| 1.0 / (a * a)).collect();
        let label = format!("real_ellipsoid({})", join(axes));
        Ok(Self::build(Shape::RealEllipsoid { inv_sq }, axes.len() / 2, label, invariant, true))
    }

    pub fn counterexample_k(a: f64, b: f64) -> Result<Self> {
        check_counterexample(a, b)?;
        Ok(Self::build(
            Shape::CounterexampleK { a, b },
            3,
            format!("counterexample_K(a={a},b={b})"),
            true,
            true,
        ))
    }

    pub fn counterexample_m(a: f64, b: f64) -> Result<Self> {
        check_counterexample(a, b)?;
        Ok(Self::build(
            Shape::CounterexampleM { a, b },
            3,
            format!("counterexample_M(a={a},b={b})"),
            true,
            false,
        ))
    }

    /// A body from an arbitrary radial function of unit directions.
    ///
    /// The claims are verified on seeded samples: invariance to
    /// [`INVARIANCE_TOLERANCE`], containment against the sampled supremum.
    pub fn custom<F>(n: usize, label: &str, radial: F, invariant: bool, contained: bool) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        check_n(n)?;
        let body = Self::build(
            Shape::Custom { radial: Arc::new(radial) },
            n,
            label.to_string(),
            invariant,
            contained,
        );
        let mut rng = seeded_rng(0x5eed);
        let mut x = vec![0.0; 2 * n];
        for _ in 0..256 {
            unit_vector(&mut rng, &mut x);
            let r = body.radial(&x);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "radial function of `{label}` is not positive and finite at {x:?}"
                )));
            }
        }
        if invariant {
            let dev = invariance_deviation(&body, 256, 0x5eed);
            if dev > INVARIANCE_TOLERANCE {
                return Err(Error::InvarianceViolation {
                    label: label.to_string(),
                    deviation: dev,
                });
            }
        }
        if contained && body.circumradius() >= 1.0 {
            return Err(body.containment_error());
        }
        Ok(body)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn dim(&self) -> usize {
        2 * self.inner.n
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn claims_rtheta_invariant(&self) -> bool {
        self.inner.claims_rtheta_invariant
    }

    pub fn claims_unit_ball_contained(&self) -> bool {
        self.inner.claims_unit_ball_contained
    }

    /// `sup ρ_K` over the sphere. Exact for catalog bodies; a sampled
    /// lower estimate for custom ones.
    pub fn circumradius(&self) -> f64 {
        self.inner.circumradius
    }

    /// Whether [`StarBody::circumradius`] is exact rather than sampled.
    pub fn circumradius_is_exact(&self) -> bool {
        match &self.inner.shape {
            Shape::Custom { .. } => false,
            Shape::HyperbolicTransform { of }
            | Shape::RadialPerturbation { of, .. }
            | Shape::Dilation { of, .. } => of.circumradius_is_exact(),
            _ => true,
        }
    }

    /// A radius certified to enclose the body: the exact circumradius, or the
    /// sampled one with a 5% margin.
    pub fn bounding_radius(&self) -> f64 {
        if self.circumradius_is_exact() {
            self.circumradius()
        } else {
            1.05 * self.circumradius()
        }
    }

    /// A direction where [`StarBody::circumradius`] is attained.
    pub fn extremal_direction(&self) -> &[f64] {
        &self.inner.extremal_direction
    }

    /// Radial function `ρ_K(ξ)` at a unit vector `ξ`.
    #[inline]
    pub fn radial(&self, xi: &[f64]) -> f64 {
        match &self.inner.shape {
            Shape::Ball { rho } => *rho,
            Shape::ComplexEllipsoid { inv_sq } => {
                let q: f64 = xi
                    .chunks_exact(2)
                    .zip(inv_sq)
                    .map(|(p, w)| (p[0] * p[0] + p[1] * p[1]) * w)
                    .sum();
                1.0 / q.sqrt()
            }
            Shape::RealEllipsoid { inv_sq } => {
                let q: f64 = xi.iter().zip(inv_sq).map(|(x, w)| x * x * w).sum();
                1.0 / q.sqrt()
            }
            Shape::CounterexampleK { a, b } => {
                let (c2, s2) = block_norms_sq(xi);
                let cylinder = if c2 > 0.0 { 1.0 / (a * c2.sqrt()) } else { f64::INFINITY };
                let ellipsoid = 1.0 / (c2 + (1.0 + b * b) * s2).sqrt();
                cylinder.min(ellipsoid)
            }
            Shape::CounterexampleM { a, b } => {
                let (c2, s2) = block_norms_sq(xi);
                let den = c2 * (a * a - 1.0) - s2;
                let hyperbola = if den > 0.0 { 1.0 / den.sqrt() } else { f64::INFINITY };
                let line = if s2 > 0.0 { 1.0 / (b * s2.sqrt()) } else { f64::INFINITY };
                hyperbola.min(line)
            }
            Shape::HyperbolicTransform { of } => hyperbolic_radial(of.radial(xi)),
            Shape::RadialPerturbation { of, epsilon } => of.radial(xi) + epsilon,
            Shape::Dilation { of, factor } => factor * of.radial(xi),
            Shape::Custom { radial } => radial(xi),
        }
    }

    /// Minkowski functional `‖x‖_K = |x| / ρ_K(x/|x|)`.
    pub fn minkowski(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        r / with_direction(x, r, |dir| self.radial(dir))
    }

    /// `x ∈ K`.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.minkowski(x) <= 1.0
    }

    /// Signed gauge `|x| − ρ_K(x/|x|)`: negative inside, positive outside,
    /// continuous along rays for continuous radial functions.
    pub fn boundary_gap(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return -self.radial_lower_hint();
        }
        r - with_direction(x, r, |dir| self.radial(dir))
    }

    fn radial_lower_hint(&self) -> f64 {
        let mut e = vec![0.0; self.dim()];
        e[0] = 1.0;
        self.radial(&e)
    }

    /// Closed-form section data, when the body admits it.
    pub fn analytic_form(&self) -> Option<AnalyticForm> {
        match &self.inner.shape {
            Shape::Ball { rho } => Some(AnalyticForm::Ball { radius: *rho }),
            Shape::CounterexampleM { a, b } => Some(AnalyticForm::CounterexampleM { a: *a, b: *b }),
            Shape::HyperbolicTransform { of } => match (&of.inner.shape, of.analytic_form()) {
                (Shape::CounterexampleK { a, b }, _) => Some(AnalyticForm::CounterexampleM { a: *a, b: *b }),
                (_, Some(AnalyticForm::Ball { radius })) => Some(AnalyticForm::Ball {
                    radius: hyperbolic_radial(radius),
                }),
                _ => None,
            },
            Shape::RadialPerturbation { of, epsilon } => match of.analytic_form() {
                Some(AnalyticForm::Ball { radius }) => Some(AnalyticForm::Ball { radius: radius + epsilon }),
                _ => None,
            },
            Shape::Dilation { of, factor } => match of.analytic_form() {
                Some(AnalyticForm::Ball { radius }) => Some(AnalyticForm::Ball { radius: radius * factor }),
                _ => None,
            },
            _ => None,
        }
    }

    fn containment_error(&self) -> Error {
        Error::Containment {
            label: self.label().to_string(),
            radial: self.circumradius(),
            direction: self.extremal_direction().to_vec(),
        }
    }

    /// Fails unless `sup ρ_K < 1 − delta`.
    pub fn ensure_contained(&self, delta: f64) -> Result<()> {
        if self.circumradius() >= 1.0 - delta {
            return Err(self.containment_error());
        }
        Ok(())
    }

    fn extremal_direction_candidate(&self) -> Option<Vec<f64>> {
        let dim = self.dim();
        let axis = |k: usize| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        };
        match &self.inner.shape {
            Shape::Ball { .. } => Some(axis(0)),
            Shape::ComplexEllipsoid { inv_sq } => Some(axis(2 * argmin(inv_sq))),
            Shape::RealEllipsoid { inv_sq } => Some(axis(argmin(inv_sq))),
            Shape::CounterexampleK { a, b } | Shape::CounterexampleM { a, b } => {
                // the cylinder and ellipsoid constraints of K meet here; the
                // transform to M is monotone so the argmax is shared
                let s2 = (a * a - 1.0) / (a * a + b * b);
                Some(vec![(1.0 - s2).sqrt(), 0.0, 0.0, 0.0, s2.sqrt(), 0.0])
            }
            Shape::HyperbolicTransform { of }
            | Shape::RadialPerturbation { of, .. }
            | Shape::Dilation { of, .. } => Some(of.extremal_direction().to_vec()),
            Shape::Custom { .. } => None,
        }
    }

    fn sweep_circumradius(&self) -> (f64, Vec<f64>) {
        let mut best = (0.0, vec![0.0; self.dim()]);
        if let Ok(rule) = SphereRule::new(self.n(), 6, false) {
            rule.for_each_node(|x, _| {
                let r = self.radial(x);
                if r > best.0 {
                    best = (r, x.to_vec());
                }
            });
        }
        let mut rng = seeded_rng(0xc1c);
        let mut x = vec![0.0; self.dim()];
        for _ in 0..4096 {
            unit_vector(&mut rng, &mut x);
            let r = self.radial(&x);
            if r > best.0 {
                best = (r, x.clone());
            }
        }
        best
    }
}

/// `ρ ↦ √(ρ²/(1−ρ²))`, the radial form of the map taking `K` to the body
/// `M` with `‖x‖_M^{-2} = ‖x‖_K^{-2} / (1 − (|x|/‖x‖_K)²)`.
#[inline]
pub fn hyperbolic_radial(rho: f64) -> f64 {
    (rho * rho / (1.0 - rho * rho)).sqrt()
}

/// Inverse of [`hyperbolic_radial`].
#[inline]
pub fn inverse_hyperbolic_radial(rho_m: f64) -> f64 {
    (rho_m * rho_m / (1.0 + rho_m * rho_m)).sqrt()
}

pub fn make_ball(rho: f64, n: usize) -> Result<StarBody> {
    StarBody::ball(rho, n)
}

pub fn make_counterexample_k(a: f64, b: f64) -> Result<StarBody> {
    StarBody::counterexample_k(a, b)
}

pub fn make_counterexample_m(a: f64, b: f64) -> Result<StarBody> {
    StarBody::counterexample_m(a, b)
}

/// The body `M` with `ρ_M = √(ρ_K²/(1−ρ_K²))`, guarded by the default `δ`.
pub fn hyperbolic_transform(body: &StarBody) -> Result<StarBody> {
    hyperbolic_transform_with_delta(body, DEFAULT_CONTAINMENT_DELTA)
}

pub fn hyperbolic_transform_with_delta(body: &StarBody, delta: f64) -> Result<StarBody> {
    if body.circumradius() >= 1.0 - delta {
        return Err(Error::Singularity {
            radial: body.circumradius(),
            limit: 1.0 - delta,
            direction: body.extremal_direction().to_vec(),
        });
    }
    Ok(StarBody::build(
        Shape::HyperbolicTransform { of: body.clone() },
        body.n(),
        format!("hyperbolic_transform({})", body.label()),
        body.claims_rtheta_invariant(),
        false,
    ))
}

/// `ρ_{K'} = ρ_K + ε` on the sphere, i.e. `‖x‖_{K'}^{-1} = ‖x‖_K^{-1} + ε|x|`.
pub fn radial_perturbation(body: &StarBody, epsilon: f64) -> Result<StarBody> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "perturbation epsilon must be nonnegative, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(body.clone());
    }
    let out = StarBody::build(
        Shape::RadialPerturbation {
            of: body.clone(),
            epsilon,
        },
        body.n(),
        format!("radial_perturbation({}, {epsilon})", body.label()),
        body.claims_rtheta_invariant(),
        body.claims_unit_ball_contained(),
    );
    if out.claims_unit_ball_contained() && out.circumradius() >= 1.0 {
        return Err(out.containment_error());
    }
    Ok(out)
}

/// The dilate `αK`. The containment claim survives only if `αK` stays inside the ball.
pub fn dilate(body: &StarBody, factor: f64) -> Result<StarBody> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dilation factor must be positive, got {factor}"
        )));
    }
    let contained = body.claims_unit_ball_contained() && factor * body.circumradius() < 1.0;
    Ok(StarBody::build(
        Shape::Dilation {
            of: body.clone(),
            factor,
        },
        body.n(),
        format!("dilate({}, {factor})", body.label()),
        body.claims_rtheta_invariant(),
        contained,
    ))
}

/// `max |ρ_K(ξ) − ρ_K(R_θ ξ)|` over `samples` seeded pairs `(ξ, θ)`.
pub fn invariance_deviation(body: &StarBody, samples: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut x = vec![0.0; body.dim()];
    let mut worst: f64 = 0.0;
    for _ in 0..samples.max(1) {
        unit_vector(&mut rng, &mut x);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let rotated = rtheta_apply(&x, theta);
        worst = worst.max((body.radial(&x) - body.radial(&rotated)).abs());
    }
    worst
}

/// Calls `f` on `x / r` without allocating for the usual small dimensions.
#[inline]
fn with_direction<T>(x: &[f64], r: f64, f: impl FnOnce(&[f64]) -> T) -> T {
    if x.len() <= 16 {
        let mut buf = [0.0; 16];
        for (d, xi) in buf.iter_mut().zip(x) {
            *d = xi / r;
        }
        f(&buf[..x.len()])
    } else {
        let v: Vec<f64> = x.iter().map(|xi| xi / r).collect();
        f(&v)
    }
}

/// Squared norms of the `x̃ = (x₁..x₄)` and `x₃ = (x₅, x₆)` blocks of ℝ⁶.
#[inline]
fn block_norms_sq(x: &[f64]) -> (f64, f64) {
    let c2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    let s2 = x[4] * x[4] + x[5] * x[5];
    (c2, s2)
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("complex dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_axes(axes: &[f64]) -> Result<()> {
    if let Some(a) = axes.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "semi-axes must lie in (0, 1), got {a}"
        )));
    }
    Ok(())
}

fn check_counterexample(a: f64, b: f64) -> Result<()> {
    if !(a > 1.0) || !(b > 1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "counterexample bodies need a > 1 and b > 1, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::unit_vector;

    fn xi3_plane() -> Vec<f64> {
        vec![0.0, 0.0, 0.0, 0.0, 0.6, 0.8]
    }

    fn xi_tilde_block() -> Vec<f64> {
        vec![0.5, 0.5, 0.5, 0.5, 0.0, 0.0]
    }

    #[test]
    fn ball_is_constant_and_invariant() {
        let b = make_ball(0.5, 2).unwrap();
        assert_eq!(b.radial(&[0.0, 1.0, 0.0, 0.0]), 0.5);
        assert_eq!(invariance_deviation(&b, 100, 1), 0.0);
        assert!(b.claims_rtheta_invariant() && b.claims_unit_ball_contained());
        assert!(make_ball(1.0, 2).is_err());
        assert!(make_ball(0.0, 2).is_err());
    }

    #[test]
    fn transformed_ball_radius() {
        let m = hyperbolic_transform(&make_ball(0.5, 2).unwrap()).unwrap();
        let want = (0.25f64 / 0.75).sqrt();
        assert!((m.radial(&[1.0, 0.0, 0.0, 0.0]) - want).abs() < 1e-15);
        assert!((want - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let unit = hyperbolic_transform(&make_ball(std::f64::consts::FRAC_1_SQRT_2, 2).unwrap()).unwrap();
        assert!((unit.radial(&[1.0, 0.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(!m.claims_unit_ball_contained());
    }

    #[test]
    fn counterexample_k_axes() {
        let b = 2.0;
        let k = make_counterexample_k(2.0, b).unwrap();
        assert!((k.radial(&xi3_plane()) - 1.0 / (1.0 + b * b).sqrt()).abs() < 1e-15);
        assert!((k.radial(&xi_tilde_block()) - 0.5).abs() < 1e-15);
        assert!(k.circumradius() < 1.0);
        assert!(invariance_deviation(&k, 1000, 3) <= 1e-12);
    }

    #[test]
    fn counterexample_m_axes() {
        let m = make_counterexample_m(2.0, 2.0).unwrap();
        assert!((m.radial(&xi_tilde_block()) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((m.radial(&xi3_plane()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn counterexample_m_is_the_transform_of_k() {
        for (a, b) in [(2.0, 2.0), (1.5, 3.0), (3.0, 1.2)] {
            let k = make_counterexample_k(a, b).unwrap();
            let m = make_counterexample_m(a, b).unwrap();
            let t = hyperbolic_transform(&k).unwrap();
            let mut rng = seeded_rng(17);
            let mut x = vec![0.0; 6];
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                unit_vector(&mut rng, &mut x);
                worst = worst.max((m.radial(&x) - t.radial(&x)).abs());
            }
            assert!(worst <= 1e-10, "a={a} b={b}: {worst}");
            assert_eq!(t.analytic_form(), Some(AnalyticForm::CounterexampleM { a, b }));
        }
    }

    #[test]
    fn counterexample_circumradius_is_the_seam() {
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        // s² = 3/8 on the seam
        assert!((k.circumradius() - (8.0f64 / 20.0).sqrt()).abs() < 1e-14);
        let mut rng = seeded_rng(5);
        let mut x = vec![0.0; 6];
        for _ in 0..20_000 {
            unit_vector(&mut rng, &mut x);
            assert!(k.radial(&x) <= k.circumradius() + 1e-15);
        }
        let m = make_counterexample_m(2.0, 2.0).unwrap();
        assert!((m.circumradius() - hyperbolic_radial(k.circumradius())).abs() < 1e-14);
    }

    #[test]
    fn seam_is_continuous() {
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        let s_seam = (3.0f64 / 8.0).sqrt();
        let at = |s: f64| k.radial(&[(1.0 - s * s).sqrt(), 0.0, 0.0, 0.0, s, 0.0]);
        for eps in [1e-3, 1e-5, 1e-7] {
            assert!((at(s_seam + eps) - at(s_seam - eps)).abs() < 10.0 * eps);
        }
    }

    #[test]
    fn bad_counterexample_parameters() {
        assert!(make_counterexample_k(1.0, 2.0).is_err());
        assert!(make_counterexample_k(2.0, 0.5).is_err());
        assert!(make_counterexample_m(0.9, 2.0).is_err());
    }

    #[test]
    fn transform_guard_names_the_direction() {
        let k = make_ball(1.0 - 1e-7, 2).unwrap();
        match hyperbolic_transform(&k) {
            Err(Error::Singularity { direction, .. }) => assert_eq!(direction.len(), 4),
            other => panic!("expected singularity, got {other:?}"),
        }
        assert!(hyperbolic_transform_with_delta(&k, 1e-8).is_ok());
    }

    #[test]
    fn double_transform_recovers_body() {
        let k = StarBody::complex_ellipsoid(&[0.7, 0.4, 0.55]).unwrap();
        let m = hyperbolic_transform(&k).unwrap();
        let mut rng = seeded_rng(2);
        let mut x = vec![0.0; 6];
        for _ in 0..500 {
            unit_vector(&mut rng, &mut x);
            assert!((inverse_hyperbolic_radial(m.radial(&x)) - k.radial(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_adds_epsilon() {
        let b = make_ball(0.5, 2).unwrap();
        let p = radial_perturbation(&b, 0.1).unwrap();
        assert!((p.radial(&[1.0, 0.0, 0.0, 0.0]) - 0.6).abs() < 1e-15);
        assert_eq!(p.analytic_form(), Some(AnalyticForm::Ball { radius: 0.6 }));
        let same = radial_perturbation(&b, 0.0).unwrap();
        assert_eq!(same.radial(&[0.0, 0.0, 1.0, 0.0]), 0.5);
        assert!(radial_perturbation(&b, 0.6).is_err());
        assert!(radial_perturbation(&b, -0.1).is_err());
    }

    #[test]
    fn perturbation_is_monotone() {
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        let p = radial_perturbation(&k, 0.01).unwrap();
        let mut rng = seeded_rng(8);
        let mut x = vec![0.0; 6];
        for _ in 0..500 {
            unit_vector(&mut rng, &mut x);
            assert!(p.radial(&x) > k.radial(&x));
        }
    }

    #[test]
    fn skewed_ellipsoid_is_not_invariant() {
        let e = StarBody::real_ellipsoid(&[0.5, 0.3, 0.5, 0.5]).unwrap();
        assert!(!e.claims_rtheta_invariant());
        let on_axis = e.radial(&[1.0, 0.0, 0.0, 0.0]);
        let rotated = e.radial(&rtheta_apply(&[1.0, 0.0, 0.0, 0.0], std::f64::consts::FRAC_PI_2));
        assert!((on_axis - rotated).abs() > 0.1);
        assert!(invariance_deviation(&e, 200, 4) > 0.0);
    }

    #[test]
    fn custom_claims_are_verified() {
        let ok = StarBody::custom(2, "round", |_| 0.4, true, true).unwrap();
        assert!((ok.circumradius() - 0.4).abs() < 1e-15);
        let skew = StarBody::custom(2, "skew", |x| 0.3 + 0.1 * x[0] * x[0], true, true);
        assert!(matches!(skew, Err(Error::InvarianceViolation { .. })));
        let big = StarBody::custom(2, "big", |_| 1.2, true, true);
        assert!(matches!(big, Err(Error::Containment { .. })));
    }

    #[test]
    fn membership_uses_the_minkowski_functional() {
        let k = make_counterexample_k(2.0, 2.0).unwrap();
        let x = [0.0, 0.0, 0.0, 0.0, 0.44, 0.0];
        assert!(k.contains(&x));
        assert!(!k.contains(&[0.0, 0.0, 0.0, 0.0, 0.46, 0.0]));
        assert!((k.minkowski(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]) - 5f64.sqrt()).abs() < 1e-14);
    }
}
