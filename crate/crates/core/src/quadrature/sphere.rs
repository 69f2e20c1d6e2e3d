//! Product rules on the odd spheres S¹, S³, S⁵.
//!
//! A point of S^{2k−1} ⊂ ℂᵏ is written `z_j = √t_j e^{iφ_j}` with `t` in the
//! standard simplex and `φ` on the torus; then `dσ = 2^{1−k} dt dφ`. Phases
//! use the `(2L+1)`-point trapezoid rule and the simplex a Gauss–Legendre
//! product (collapsed coordinates for k = 3), so a rule of level `L`
//! integrates spherical polynomials of degree `2L` exactly.
//!
//! Because R_θ shifts every phase by the same amount, the node set is a
//! union of discrete R_θ-orbits. For R_θ-invariant integrands the first phase
//! can be frozen at zero with weight `2π` (the orbit-reduced rule), which
//! cuts the node count by a factor `2L+1` without changing the result.
//!
//! Rules are stored as their factors and expanded node by node on demand.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{gauss_legendre_unit, Neumaier};
use crate::error::{Error, Result};
use crate::geometry::SectionFrame;

/// `|S^d|` via `|S^d| = 2π/(d−1) |S^{d−2}|`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => TAU,
        _ => TAU / (d as f64 - 1.0) * sphere_area(d - 2),
    }
}

#[derive(Debug, Clone)]
pub struct SphereRule {
    /// Intrinsic complex dimension `k`; the rule lives on S^{2k−1}.
    k: usize,
    level: usize,
    reduced: bool,
    phases: Vec<(f64, f64)>,
    phase_weight: f64,
    simplex: Vec<([f64; 3], f64)>,
    /// Orthonormal vectors carrying intrinsic coordinates into the ambient space.
    embedding: Option<Vec<Vec<f64>>>,
}

/// The full product rule on `S^d`, `d ∈ {1, 3, 5}`.
pub fn sphere_rule(d: usize, level: usize) -> Result<SphereRule> {
    if d % 2 == 0 {
        return Err(Error::Unsupported(format!("sphere dimension {d} (only 1, 3, 5)")));
    }
    SphereRule::new(d.div_ceil(2), level, false)
}

/// A rule on `S^{2n−1} ∩ H_ξ`, embedded through the frame basis.
///
/// The basis is ordered in `(v, iv)` pairs, so the intrinsic phases are
/// R_θ-equivariant and the orbit-reduced variant is exact for R_θ-invariant
/// integrands.
pub fn subsphere_rule(frame: &SectionFrame, level: usize, reduced: bool) -> Result<SphereRule> {
    let n = frame.n();
    if n < 2 {
        return Err(Error::Unsupported("complex hyperplanes need n >= 2".into()));
    }
    let mut rule = SphereRule::new(n - 1, level, reduced)?;
    rule.embedding = Some(frame.basis().to_vec());
    Ok(rule)
}

impl SphereRule {
    /// Rule on S^{2k−1} of resolution `level`; `reduced` freezes the first phase.
    pub fn new(k: usize, level: usize, reduced: bool) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::Unsupported(format!(
                "sphere dimension {} (only 1, 3, 5)",
                2 * k as isize - 1
            )));
        }
        if level == 0 {
            return Err(Error::InvalidParameter("quadrature level must be at least 1".into()));
        }
        let m = 2 * level + 1;
        let phases = (0..m)
            .map(|j| {
                let (s, c) = (TAU * j as f64 / m as f64).sin_cos();
                (c, s)
            })
            .collect();
        let scale = 0.5f64.powi(k as i32 - 1);
        let simplex = match k {
            1 => vec![([1.0, 0.0, 0.0], 1.0)],
            2 => {
                let (x, w) = gauss_legendre_unit(level.div_ceil(2) + 1);
                x.iter()
                    .zip(&w)
                    .map(|(t, w)| ([*t, 1.0 - t, 0.0], w * scale))
                    .collect()
            }
            _ => {
                let (x, w) = gauss_legendre_unit((level + 2).div_ceil(2) + 1);
                let mut pts = Vec::with_capacity(x.len() * x.len());
                for (s1, w1) in x.iter().zip(&w) {
                    for (s2, w2) in x.iter().zip(&w) {
                        let t = [*s1, (1.0 - s1) * s2, (1.0 - s1) * (1.0 - s2)];
                        pts.push((t, w1 * w2 * (1.0 - s1) * scale));
                    }
                }
                pts
            }
        };
        Ok(Self {
            k,
            level,
            reduced,
            phases,
            phase_weight: TAU / m as f64,
            simplex,
            embedding: None,
        })
    }

    /// Dimension `d` of the sphere S^d the rule integrates over.
    pub fn dimension(&self) -> usize {
        2 * self.k - 1
    }

    /// Length of the node vectors.
    pub fn ambient_dim(&self) -> usize {
        match &self.embedding {
            Some(b) => b[0].len(),
            None => 2 * self.k,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// `|S^d|`, the value the weights sum to.
    pub fn target_total(&self) -> f64 {
        sphere_area(self.dimension())
    }

    fn free_phases(&self) -> usize {
        if self.reduced {
            self.k - 1
        } else {
            self.k
        }
    }

    fn phase_factor(&self) -> f64 {
        let f = self.phase_weight.powi(self.free_phases() as i32);
        if self.reduced {
            f * TAU
        } else {
            f
        }
    }

    pub fn node_count(&self) -> usize {
        self.simplex.len() * self.phases.len().pow(self.free_phases() as u32)
    }

    /// Calls `g(node, weight)` for every node, in a fixed order.
    pub fn for_each_node<G: FnMut(&[f64], f64)>(&self, mut g: G) {
        let pf = self.phase_factor();
        for (t, w) in &self.simplex {
            self.for_each_phase(t, |x| g(x, w * pf));
        }
    }

    fn for_each_phase<G: FnMut(&[f64])>(&self, t: &[f64; 3], mut g: G) {
        let k = self.k;
        let m = self.phases.len();
        let amp = [t[0].max(0.0).sqrt(), t[1].max(0.0).sqrt(), t[2].max(0.0).sqrt()];
        let count = m.pow(self.free_phases() as u32);
        let mut x = [0.0; 6];
        let mut ambient = vec![0.0; self.ambient_dim()];
        for idx in 0..count {
            let mut rem = idx;
            for j in 0..k {
                let (c, s) = if self.reduced && j == 0 {
                    (1.0, 0.0)
                } else {
                    let p = self.phases[rem % m];
                    rem /= m;
                    p
                };
                x[2 * j] = amp[j] * c;
                x[2 * j + 1] = amp[j] * s;
            }
            match &self.embedding {
                None => g(&x[..2 * k]),
                Some(basis) => {
                    ambient.iter_mut().for_each(|a| *a = 0.0);
                    for (xj, b) in x[..2 * k].iter().zip(basis) {
                        if *xj != 0.0 {
                            for (a, bi) in ambient.iter_mut().zip(b) {
                                *a += xj * bi;
                            }
                        }
                    }
                    g(&ambient);
                }
            }
        }
    }

    /// `∫ f dσ`, evaluated in parallel over simplex points and reduced in a
    /// fixed order, so the result does not depend on the thread count.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let pf = self.phase_factor();
        let partials: Vec<f64> = self
            .simplex
            .par_iter()
            .map(|(t, w)| {
                let mut acc = Neumaier::default();
                self.for_each_phase(t, |x| acc.add(f(x)));
                acc.total() * w * pf
            })
            .collect();
        super::neumaier_sum(partials)
    }

    /// Sequential [`SphereRule::integrate`], for use inside outer parallel loops.
    pub fn integrate_serial<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let pf = self.phase_factor();
        let mut total = Neumaier::default();
        for (t, w) in &self.simplex {
            let mut acc = Neumaier::default();
            self.for_each_phase(t, |x| acc.add(f(x)));
            total.add(acc.total() * w * pf);
        }
        total.total()
    }

    /// Explicit node and weight lists.
    pub fn nodes_and_weights(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut nodes = Vec::with_capacity(self.node_count());
        let mut weights = Vec::with_capacity(self.node_count());
        self.for_each_node(|x, w| {
            nodes.push(x.to_vec());
            weights.push(w);
        });
        (nodes, weights)
    }

    pub fn weight_sum(&self) -> f64 {
        let mut acc = Neumaier::default();
        self.for_each_node(|_, w| acc.add(w));
        acc.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dot, section_frame, UnitDirection};
    use crate::rng::{seeded_rng, unit_vector};
    use crate::selftest::oracle::{sphere_area_gamma, sphere_monomial_moment};
    use std::f64::consts::PI;

    #[test]
    fn areas_match_gamma_formula() {
        for d in 0..8 {
            assert!((sphere_area(d) - sphere_area_gamma(d)).abs() < 1e-13 * sphere_area(d));
        }
    }

    #[test]
    fn weights_sum_to_area() {
        for d in [1usize, 3, 5] {
            for level in [1, 2, 5, 8] {
                for reduced in [false, true] {
                    let r = SphereRule::new(d.div_ceil(2), level, reduced).unwrap();
                    assert!((r.weight_sum() - r.target_total()).abs() < 1e-10, "d={d} L={level}");
                    r.for_each_node(|_, w| assert!(w > 0.0));
                }
            }
        }
        assert!((sphere_rule(1, 3).unwrap().weight_sum() - TAU).abs() < 1e-14);
        assert!((sphere_rule(3, 3).unwrap().weight_sum() - 2.0 * PI * PI).abs() < 1e-12);
        assert!(sphere_rule(2, 3).is_err());
        assert!(sphere_rule(7, 3).is_err());
    }

    #[test]
    fn nodes_are_unit() {
        for d in [1, 3, 5] {
            sphere_rule(d, 4).unwrap().for_each_node(|x, _| {
                assert!((dot(x, x).sqrt() - 1.0).abs() < 1e-12);
            });
        }
    }

    #[test]
    fn second_moment() {
        let r = sphere_rule(3, 4).unwrap();
        let q = r.integrate(|x| x[0] * x[0]);
        assert!((q - 2.0 * PI * PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn exact_for_monomials_up_to_twice_the_level() {
        for d in [3usize, 5] {
            let dim = d + 1;
            let level = 4;
            let rule = sphere_rule(d, level).unwrap();
            let mut rng = seeded_rng(d as u64);
            use rand::Rng;
            for _ in 0..30 {
                let mut alpha = vec![0u32; dim];
                let total = rng.random_range(0..=2 * level as u32);
                for _ in 0..total {
                    alpha[rng.random_range(0..dim)] += 1;
                }
                let q = rule.integrate(|x| {
                    x.iter().zip(&alpha).map(|(xi, a)| xi.powi(*a as i32)).product()
                });
                let want = sphere_monomial_moment(&alpha);
                assert!((q - want).abs() < 1e-12, "d={d} {alpha:?}: {q} vs {want}");
            }
        }
    }

    #[test]
    fn reduced_rule_agrees_on_invariant_integrands() {
        let f = |x: &[f64]| {
            let a = x[0] * x[0] + x[1] * x[1];
            let b = x[2] * x[2] + x[3] * x[3];
            (1.0 + a + 3.0 * b * b).sqrt() + a * b
        };
        let full = SphereRule::new(3, 10, false).unwrap().integrate(&f);
        let reduced = SphereRule::new(3, 10, true).unwrap().integrate(&f);
        assert!((full - reduced).abs() < 1e-12 * full.abs());
    }

    #[test]
    fn subsphere_nodes_lie_in_the_hyperplane() {
        let mut rng = seeded_rng(21);
        for n in [2, 3] {
            let mut v = vec![0.0; 2 * n];
            unit_vector(&mut rng, &mut v);
            let frame = section_frame(&UnitDirection::new(v).unwrap());
            let rule = subsphere_rule(&frame, 5, false).unwrap();
            assert_eq!(rule.dimension(), 2 * n - 3);
            rule.for_each_node(|x, _| {
                assert!(dot(x, frame.xi().coords()).abs() < 1e-12);
                assert!(dot(x, frame.xi_perp().coords()).abs() < 1e-12);
                assert!((dot(x, x) - 1.0).abs() < 1e-12);
            });
            let want = if n == 2 { TAU } else { 2.0 * PI * PI };
            assert!((rule.weight_sum() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let r = sphere_rule(5, 6).unwrap();
        let f = |x: &[f64]| (x[0] + 2.0 * x[3]).exp();
        assert_eq!(r.integrate(f).to_bits(), r.integrate_serial(f).to_bits());
    }
}
