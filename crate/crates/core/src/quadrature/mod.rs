//! Deterministic quadrature, the closed-form hyperbolic radial kernel, and
//! seeded Monte Carlo estimators.

mod montecarlo;
mod sphere;

pub use montecarlo::{
    mc_section_volume, mc_section_volume_with, ray_parallel_sections, McConfig, McEstimate,
    RayEstimate, Sampler, SectionWeight, MC_CHUNKS,
};
pub use sphere::{sphere_area, sphere_rule, subsphere_rule, SphereRule};
pub(crate) use montecarlo::RayTracer;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi's initial guess, then Newton on the three-term recurrence
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[0, 1]`; weights sum to 1.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    (
        x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        w.iter().map(|w| 0.5 * w).collect(),
    )
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums `values` in order with compensation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// `∫₀^ρ r^{2m−1}/(1−r²)^{m+1} dr = (1/(2m)) (ρ²/(1−ρ²))^m`.
///
/// With `m = n` this is the radial part of the Bergman volume element, with
/// `m = n − 1` the radial part of the central section element.
pub fn radial_hyp_integral(rho: f64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("kernel order m must be at least 1".into()));
    }
    if !(rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {rho}")));
    }
    if rho >= 1.0 {
        return Err(Error::Singularity {
            radial: rho,
            limit: 1.0,
            direction: Vec::new(),
        });
    }
    Ok(radial_hyp_kernel(rho, m))
}

/// Unchecked form of [`radial_hyp_integral`] for inner loops.
#[inline]
pub fn radial_hyp_kernel(rho: f64, m: u32) -> f64 {
    let v = rho * rho / (1.0 - rho * rho);
    v.powi(m as i32) / (2 * m) as f64
}
