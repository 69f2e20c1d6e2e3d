//! Coordinates on ℂⁿ ≅ ℝ²ⁿ, the diagonal rotation R_θ and complex hyperplane frames.
//!
//! A complex vector `(z₁, …, zₙ)` is stored as the interleaved real vector
//! `(Re z₁, Im z₁, …, Re zₙ, Im zₙ)`. Under this layout R_θ rotates every
//! coordinate pair by the same angle, and multiplication by `i` is
//! `R_{π/2}`, which maps `ξ` to its companion `ξ_⊥ = (−ξ₁₂, ξ₁₁, …)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance on `| |ξ| − 1 |` for [`UnitDirection`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Candidates closer than this to the current span are skipped during frame completion.
const PARALLEL_THRESHOLD: f64 = 1e-8;

/// A point of ℝ²ⁿ viewed as ℂⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoint {
    coords: Vec<f64>,
}

impl RealPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "real point must have even positive length, got {}",
                coords.len()
            )));
        }
        Ok(Self { coords })
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn rotate(&self, theta: f64) -> RealPoint {
        RealPoint {
            coords: rtheta_apply(&self.coords, theta),
        }
    }
}

pub fn complex_to_real(z: &[Complex64]) -> RealPoint {
    let coords = z.iter().flat_map(|c| [c.re, c.im]).collect();
    RealPoint { coords }
}

pub fn real_to_complex(x: &RealPoint) -> Vec<Complex64> {
    x.coords
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Rotates every coordinate pair of `x` counterclockwise by `theta`.
pub fn rtheta_apply(x: &[f64], theta: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    rtheta_in_place(&mut out, theta);
    out
}

pub fn rtheta_in_place(x: &mut [f64], theta: f64) {
    let (s, c) = theta.sin_cos();
    for p in x.chunks_exact_mut(2) {
        let (a, b) = (p[0], p[1]);
        p[0] = c * a - s * b;
        p[1] = s * a + c * b;
    }
}

/// Multiplication by `i`: the exact quarter turn `(a, b) ↦ (−b, a)` on each pair.
pub fn quarter_turn(x: &[f64]) -> Vec<f64> {
    x.chunks_exact(2).flat_map(|p| [-p[1], p[0]]).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hermitian product `Σ a_k conj(b_k)` of two interleaved vectors.
pub fn hermitian(a: &[f64], b: &[f64]) -> Complex64 {
    a.chunks_exact(2)
        .zip(b.chunks_exact(2))
        .map(|(p, q)| Complex64::new(p[0], p[1]) * Complex64::new(q[0], -q[1]))
        .sum()
}

/// Distance between the R_θ-orbits of two unit vectors, `min_θ |a − R_θ b|`.
pub fn orbit_distance(a: &[f64], b: &[f64]) -> f64 {
    (2.0 - 2.0 * hermitian(a, b).norm()).max(0.0).sqrt()
}

/// A unit vector of ℝ²ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDirection {
    coords: Vec<f64>,
    tolerance: f64,
}

impl serde::Serialize for UnitDirection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

impl UnitDirection {
    /// Accepts `coords` only if it is already unit within [`UNIT_TOLERANCE`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(coords, UNIT_TOLERANCE)
    }

    pub fn with_tolerance(coords: Vec<f64>, tolerance: f64) -> Result<Self> {
        check_even(&coords)?;
        let r = norm(&coords);
        if (r - 1.0).abs() > tolerance {
            return Err(Error::InvalidParameter(format!(
                "direction has norm {r}, expected 1 within {tolerance:e}"
            )));
        }
        Ok(Self { coords, tolerance })
    }

    /// Scales `coords` to unit length.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        check_even(coords)?;
        let r = norm(coords);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            coords: coords.iter().map(|x| x / r).collect(),
            tolerance: UNIT_TOLERANCE,
        })
    }

    /// The standard basis vector `e_{index}` of ℝ²ⁿ.
    pub fn axis(n: usize, index: usize) -> Self {
        let mut coords = vec![0.0; 2 * n];
        coords[index] = 1.0;
        Self {
            coords,
            tolerance: UNIT_TOLERANCE,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn rotate(&self, theta: f64) -> UnitDirection {
        UnitDirection {
            coords: rtheta_apply(&self.coords, theta),
            tolerance: self.tolerance,
        }
    }

    pub fn negate(&self) -> UnitDirection {
        UnitDirection {
            coords: self.coords.iter().map(|x| -x).collect(),
            tolerance: self.tolerance,
        }
    }
}

fn check_even(coords: &[f64]) -> Result<()> {
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "direction must have even positive length, got {}",
            coords.len()
        )));
    }
    Ok(())
}

/// A direction `ξ`, its companion `ξ_⊥`, and an orthonormal basis of the
/// complex hyperplane `H_ξ`.
///
/// The basis comes in pairs `(v, iv)`, so `H_ξ` inherits the complex
/// structure: R_θ acting on ℝ²ⁿ restricts to R_θ on the basis coordinates.
#[derive(Debug, Clone)]
pub struct SectionFrame {
    xi: UnitDirection,
    xi_perp: UnitDirection,
    basis: Vec<Vec<f64>>,
    renormalized: bool,
}

impl SectionFrame {
    /// Builds the frame for an arbitrary nonzero vector, normalizing it first.
    /// [`SectionFrame::renormalized`] reports whether the input was off the sphere.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        let xi = UnitDirection::normalize(v)?;
        let renormalized = (norm(v) - 1.0).abs() > UNIT_TOLERANCE;
        let mut frame = section_frame(&xi);
        frame.renormalized = renormalized;
        Ok(frame)
    }

    pub fn xi(&self) -> &UnitDirection {
        &self.xi
    }

    pub fn xi_perp(&self) -> &UnitDirection {
        &self.xi_perp
    }

    /// Orthonormal basis of `H_ξ`, ordered `(v₁, iv₁, v₂, iv₂, …)`.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn n(&self) -> usize {
        self.xi.n()
    }

    /// The point `u₁ ξ + u₂ ξ_⊥ + Σ y_j b_j`.
    pub fn embed(&self, offset: [f64; 2], y: &[f64], out: &mut [f64]) {
        let (xi, xp) = (self.xi.coords(), self.xi_perp.coords());
        for (k, o) in out.iter_mut().enumerate() {
            *o = offset[0] * xi[k] + offset[1] * xp[k];
        }
        for (yj, b) in y.iter().zip(&self.basis) {
            for (o, bk) in out.iter_mut().zip(b) {
                *o += yj * bk;
            }
        }
    }
}

/// Completes `ξ` to an orthonormal frame of ℝ²ⁿ adapted to `H_ξ`.
///
/// Standard basis vectors are tried in index order; each one is
/// Gram–Schmidt-orthogonalized against the span built so far and skipped
/// when its residual norm falls under 1e-8. An accepted `v` brings `iv`
/// along with it.
pub fn section_frame(xi: &UnitDirection) -> SectionFrame {
    let dim = xi.coords().len();
    let xi_perp = UnitDirection {
        coords: quarter_turn(xi.coords()),
        tolerance: xi.tolerance,
    };
    let mut span: Vec<Vec<f64>> = vec![xi.coords().to_vec(), xi_perp.coords().to_vec()];
    let mut basis = Vec::with_capacity(dim - 2);
    for k in 0..dim {
        if basis.len() == dim - 2 {
            break;
        }
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for s in &span {
                let c = dot(&v, s);
                for (vi, si) in v.iter_mut().zip(s) {
                    *vi -= c * si;
                }
            }
        }
        let r = norm(&v);
        if r < PARALLEL_THRESHOLD {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= r);
        let iv = quarter_turn(&v);
        span.push(v.clone());
        span.push(iv.clone());
        basis.push(v);
        basis.push(iv);
    }
    SectionFrame {
        xi: xi.clone(),
        xi_perp,
        basis,
        renormalized: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> UnitDirection {
        let v: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        UnitDirection::normalize(&v).unwrap()
    }

    #[test]
    fn complex_identification_interleaves() {
        let z = [Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)];
        assert_eq!(complex_to_real(&z).coords(), &[1.0, 2.0, 3.0, 4.0]);
        let zero = [Complex64::new(0.0, 0.0); 3];
        assert!(complex_to_real(&zero).coords().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn complex_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..5);
            let z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            assert_eq!(real_to_complex(&complex_to_real(&z)), z);
        }
    }

    #[test]
    fn odd_length_is_rejected() {
        assert!(RealPoint::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(UnitDirection::normalize(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn quarter_turn_on_axis() {
        let x = rtheta_apply(&[1.0, 0.0, 0.0, 0.0], FRAC_PI_2);
        assert!((x[0]).abs() < 1e-16 && (x[1] - 1.0).abs() < 1e-16);
        assert_eq!(rtheta_apply(&[0.3, -0.2, 0.1, 0.9], 0.0), vec![0.3, -0.2, 0.1, 0.9]);
    }

    #[test]
    fn rotation_by_half_pi_matches_companion_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let xi = random_unit(&mut rng, 3);
            let rotated = rtheta_apply(xi.coords(), FRAC_PI_2);
            let companion = quarter_turn(xi.coords());
            for (a, b) in rotated.iter().zip(&companion) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn axis_frame() {
        let frame = section_frame(&UnitDirection::axis(2, 0));
        assert_eq!(frame.xi_perp().coords(), &[-0.0, 1.0, -0.0, 0.0]);
        assert_eq!(frame.basis(), &[vec![0.0, 0.0, 1.0, 0.0], vec![-0.0, 0.0, -0.0, 1.0]]);
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(2..4);
            let frame = section_frame(&random_unit(&mut rng, n));
            let mut all = vec![frame.xi().coords().to_vec(), frame.xi_perp().coords().to_vec()];
            all.extend(frame.basis().iter().cloned());
            assert_eq!(all.len(), 2 * n);
            for (i, a) in all.iter().enumerate() {
                for (j, b) in all.iter().enumerate() {
                    let g = dot(a, b);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12, "gram[{i}][{j}] = {g}");
                }
            }
        }
    }

    #[test]
    fn companion_is_exact_quarter_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi = random_unit(&mut rng, 3);
        let frame = section_frame(&xi);
        assert_eq!(frame.xi_perp().coords(), quarter_turn(xi.coords()).as_slice());
    }

    #[test]
    fn non_unit_input_is_flagged() {
        let frame = SectionFrame::from_vector(&[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(frame.renormalized());
        assert_eq!(frame.xi().coords(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(SectionFrame::from_vector(&[0.0; 4]), Err(Error::ZeroVector)));
    }

    #[test]
    fn rotations_of_xi_stay_in_the_complex_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let xi = random_unit(&mut rng, 3);
            let frame = section_frame(&xi);
            let theta = rng.random_range(0.0..2.0 * PI);
            let r = rtheta_apply(xi.coords(), theta);
            let proj: f64 = frame.basis().iter().map(|b| dot(&r, b).powi(2)).sum();
            assert!(proj.sqrt() < 1e-12);
        }
    }

    #[test]
    fn orbit_distance_vanishes_on_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let xi = random_unit(&mut rng, 2);
        let r = rtheta_apply(xi.coords(), 1.234);
        assert!(orbit_distance(xi.coords(), &r) < 1e-7);
        let other = random_unit(&mut rng, 2);
        assert!(orbit_distance(xi.coords(), other.coords()) > 1e-3);
    }
}
