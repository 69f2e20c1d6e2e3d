//! Seeded Monte Carlo estimators for slices `K ∩ (H_ξ + u)`.
//!
//! Two samplers are available. Hit-or-miss draws points uniformly in a ball
//! enclosing the slice, radially stratified into equal-volume shells. The ray
//! sampler draws directions `ω` in `H_ξ` and integrates the indicator exactly
//! along the ray from the slice centre, `∫ 1_K(u + rω) r^{D−1} dr`, after
//! locating boundary crossings by a scan and a bracketed root solve. The ray
//! sampler evaluates all requested offsets on the same directions, so finite
//! differences of the section function see strongly correlated noise.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sphere::sphere_area;
use crate::bodies::StarBody;
use crate::error::{Error, Result};
use crate::geometry::SectionFrame;
use crate::rng::{chunk_rng, chunk_sizes, unit_vector};

/// Fixed number of work chunks; chunk `k` uses RNG stream `k`.
pub const MC_CHUNKS: usize = 64;

const SHELLS: usize = 16;
const RAY_SCAN_STEPS: usize = 32;
const RAY_ROOT_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionWeight {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    HitOrMiss,
    Ray,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub sampler: Sampler,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 20_240_917,
            sampler: Sampler::HitOrMiss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Hit-or-miss estimate of the weighted `(2n−2)`-volume of `K ∩ (H_ξ + u)`.
pub fn mc_section_volume(
    body: &StarBody,
    frame: &SectionFrame,
    offset: [f64; 2],
    weight: SectionWeight,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let config = McConfig {
        samples,
        seed,
        sampler: Sampler::HitOrMiss,
    };
    mc_section_volume_with(body, frame, offset, weight, &config)
}

pub fn mc_section_volume_with(
    body: &StarBody,
    frame: &SectionFrame,
    offset: [f64; 2],
    weight: SectionWeight,
    config: &McConfig,
) -> Result<McEstimate> {
    check_common(body, frame, config.samples)?;
    if weight == SectionWeight::Hyperbolic {
        if offset != [0.0, 0.0] {
            return Err(Error::Precondition(
                "hyperbolic section volume is defined for central sections only".into(),
            ));
        }
        if body.bounding_radius() >= 1.0 {
            return Err(Error::Containment {
                label: body.label().to_string(),
                radial: body.circumradius(),
                direction: body.extremal_direction().to_vec(),
            });
        }
    }
    match config.sampler {
        Sampler::HitOrMiss => Ok(hit_or_miss(body, frame, offset, weight, config)),
        Sampler::Ray => {
            if weight == SectionWeight::Hyperbolic {
                return Err(Error::Unsupported(
                    "the ray sampler estimates euclidean slice volumes only".into(),
                ));
            }
            let est = ray_parallel_sections(body, frame, &[offset], config.samples, config.seed)?;
            Ok(est.combine(&[1.0]))
        }
    }
}

fn check_common(body: &StarBody, frame: &SectionFrame, samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    if body.n() < 2 {
        return Err(Error::Unsupported("complex hyperplanes need n >= 2".into()));
    }
    if frame.n() != body.n() {
        return Err(Error::InvalidParameter(format!(
            "direction lives in complex dimension {}, body in {}",
            frame.n(),
            body.n()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

fn hit_or_miss(
    body: &StarBody,
    frame: &SectionFrame,
    offset: [f64; 2],
    weight: SectionWeight,
    config: &McConfig,
) -> McEstimate {
    let n = body.n();
    let d = 2 * n - 2;
    let u2 = offset[0] * offset[0] + offset[1] * offset[1];
    let bound = body.bounding_radius();
    let r2 = bound * bound - u2;
    if r2 <= 0.0 {
        return McEstimate {
            value: 0.0,
            std_error: 0.0,
            samples: config.samples,
            seed: config.seed,
        };
    }
    let radius = r2.sqrt();
    let volume = sphere_area(d - 1) * radius.powi(d as i32) / d as f64;
    let shells = SHELLS.min(config.samples / 2).max(1);
    let hyp_scale = 8f64.powi(n as i32 - 1);

    let sizes = chunk_sizes(config.samples, MC_CHUNKS);
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();
    let per_chunk: Vec<Vec<Moments>> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(config.seed, c as u64);
            let mut acc = vec![Moments::default(); shells];
            let mut y = vec![0.0; d];
            let mut x = vec![0.0; 2 * n];
            for i in 0..sizes[c] {
                let shell = (starts[c] + i) % shells;
                let t: f64 = rng.random();
                let r = radius * ((shell as f64 + t) / shells as f64).powf(1.0 / d as f64);
                unit_vector(&mut rng, &mut y);
                y.iter_mut().for_each(|v| *v *= r);
                frame.embed(offset, &y, &mut x);
                let value = if body.contains(&x) {
                    match weight {
                        SectionWeight::Euclidean => 1.0,
                        SectionWeight::Hyperbolic => {
                            let s = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
                            hyp_scale / s.powi(n as i32)
                        }
                    }
                } else {
                    0.0
                };
                let m = &mut acc[shell];
                m.count += 1;
                m.sum += value;
                m.sum_sq += value * value;
            }
            acc
        })
        .collect();

    let mut merged = vec![Moments::default(); shells];
    for chunk in &per_chunk {
        for (m, c) in merged.iter_mut().zip(chunk) {
            m.count += c.count;
            m.sum += c.sum;
            m.sum_sq += c.sum_sq;
        }
    }
    let shell_volume = volume / shells as f64;
    let mut value = 0.0;
    let mut var = 0.0;
    for m in &merged {
        if m.count == 0 {
            continue;
        }
        let k = m.count as f64;
        let mean = m.sum / k;
        value += shell_volume * mean;
        if m.count > 1 {
            let s2 = ((m.sum_sq - k * mean * mean) / (k - 1.0)).max(0.0);
            var += shell_volume * shell_volume * s2 / k;
        }
    }
    McEstimate {
        value,
        std_error: var.sqrt(),
        samples: config.samples,
        seed: config.seed,
    }
}

/// Joint ray-sampler estimates of the slice volumes `A(u)` at several offsets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayEstimate {
    pub offsets: Vec<[f64; 2]>,
    pub means: Vec<f64>,
    /// Covariance matrix of the means, row-major.
    pub covariance: Vec<f64>,
    /// Bound on the bias from finite root-solve resolution, per offset.
    pub resolution_bias: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl RayEstimate {
    /// Estimate of `Σ c_i A(u_i)`; the standard error combines the sampling
    /// covariance with the resolution bias bound.
    pub fn combine(&self, coeffs: &[f64]) -> McEstimate {
        let k = self.means.len();
        let value = coeffs.iter().zip(&self.means).map(|(c, m)| c * m).sum();
        let mut var = 0.0;
        for i in 0..k {
            for j in 0..k {
                var += coeffs[i] * coeffs[j] * self.covariance[i * k + j];
            }
        }
        let bias: f64 = coeffs
            .iter()
            .zip(&self.resolution_bias)
            .map(|(c, b)| c.abs() * b)
            .sum();
        McEstimate {
            value,
            std_error: (var.max(0.0) + bias * bias).sqrt(),
            samples: self.samples,
            seed: self.seed,
        }
    }
}

struct RayAccumulator {
    sums: Vec<f64>,
    cross: Vec<f64>,
    resolution: Vec<f64>,
}

/// Ray-sampler estimates of the euclidean slice volumes at every offset,
/// sharing one set of random directions.
pub fn ray_parallel_sections(
    body: &StarBody,
    frame: &SectionFrame,
    offsets: &[[f64; 2]],
    samples: usize,
    seed: u64,
) -> Result<RayEstimate> {
    check_common(body, frame, samples)?;
    if offsets.is_empty() {
        return Err(Error::InvalidParameter("at least one offset is required".into()));
    }
    let n = body.n();
    let d = 2 * n - 2;
    let k = offsets.len();
    let tracer = RayTracer::new(body, frame, offsets);

    // a deterministic pilot ray centres the moment sums, which keeps the
    // covariance accurate when the per-ray values barely vary
    let mut pilot_rng = chunk_rng(seed, u64::MAX);
    let mut omega = vec![0.0; d];
    unit_vector(&mut pilot_rng, &mut omega);
    let mut shift = vec![0.0; k];
    let mut scratch = vec![0.0; k];
    tracer.trace(&omega, &mut shift, &mut scratch);

    let sizes = chunk_sizes(samples, MC_CHUNKS);
    let chunks: Vec<RayAccumulator> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut omega = vec![0.0; d];
            let mut values = vec![0.0; k];
            let mut res = vec![0.0; k];
            let mut acc = RayAccumulator {
                sums: vec![0.0; k],
                cross: vec![0.0; k * k],
                resolution: vec![0.0; k],
            };
            for _ in 0..sizes[c] {
                unit_vector(&mut rng, &mut omega);
                tracer.trace(&omega, &mut values, &mut res);
                for i in 0..k {
                    let vi = values[i] - shift[i];
                    acc.sums[i] += vi;
                    for j in 0..k {
                        acc.cross[i * k + j] += vi * (values[j] - shift[j]);
                    }
                    acc.resolution[i] = acc.resolution[i].max(res[i]);
                }
            }
            acc
        })
        .collect();

    let mut sums = vec![0.0; k];
    let mut cross = vec![0.0; k * k];
    let mut resolution_bias = vec![0.0; k];
    for c in &chunks {
        for i in 0..k {
            sums[i] += c.sums[i];
            resolution_bias[i] = f64::max(resolution_bias[i], c.resolution[i]);
        }
        for (a, b) in cross.iter_mut().zip(&c.cross) {
            *a += b;
        }
    }
    let m = samples as f64;
    let centred: Vec<f64> = sums.iter().map(|s| s / m).collect();
    let means = centred.iter().zip(&shift).map(|(c, s)| c + s).collect();
    let mut covariance = vec![0.0; k * k];
    if samples > 1 {
        for i in 0..k {
            for j in 0..k {
                let cov = (cross[i * k + j] - m * centred[i] * centred[j]) / (m - 1.0);
                covariance[i * k + j] = cov / m;
            }
        }
    }
    Ok(RayEstimate {
        offsets: offsets.to_vec(),
        means,
        covariance,
        resolution_bias,
        samples,
        seed,
    })
}

/// Exact ray integrals `∫ 1_K(u + rω) r^{D−1} dr` over slices of one body.
pub(crate) struct RayTracer<'a> {
    body: &'a StarBody,
    frame: &'a SectionFrame,
    offsets: Vec<([f64; 2], f64)>,
    d: usize,
    area: f64,
}

impl<'a> RayTracer<'a> {
    pub(crate) fn new(body: &'a StarBody, frame: &'a SectionFrame, offsets: &[[f64; 2]]) -> Self {
        let bound = body.bounding_radius();
        let d = 2 * body.n() - 2;
        let offsets = offsets
            .iter()
            .map(|u| {
                let r2 = bound * bound - (u[0] * u[0] + u[1] * u[1]);
                (*u, if r2 > 0.0 { r2.sqrt() } else { 0.0 })
            })
            .collect();
        Self {
            body,
            frame,
            offsets,
            d,
            area: sphere_area(d - 1),
        }
    }

    /// `|S^{D−1}|` times the ray integral along the intrinsic direction `omega`.
    fn trace(&self, omega: &[f64], values: &mut [f64], resolution: &mut [f64]) {
        let mut dir = vec![0.0; 2 * self.body.n()];
        self.frame.embed([0.0, 0.0], omega, &mut dir);
        self.trace_ambient(&dir, values, resolution);
        for (v, r) in values.iter_mut().zip(resolution.iter_mut()) {
            *v *= self.area;
            *r *= self.area;
        }
    }

    /// The ray integral along an ambient unit vector `dir` lying in `H_ξ`,
    /// with a bound on its root-solve error.
    pub(crate) fn trace_ambient(&self, dir: &[f64], values: &mut [f64], resolution: &mut [f64]) {
        let dim = dir.len();
        let mut base = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        let d = self.d as i32;
        for (slot, (u, reach)) in self.offsets.iter().enumerate() {
            values[slot] = 0.0;
            resolution[slot] = 0.0;
            if *reach <= 0.0 {
                continue;
            }
            self.frame.embed(*u, &[], &mut base);
            let mut gap = |r: f64| {
                for ((xi, b), w) in x.iter_mut().zip(&base).zip(dir) {
                    *xi = b + r * w;
                }
                self.body.boundary_gap(&x)
            };
            let step = reach / RAY_SCAN_STEPS as f64;
            let tol = RAY_ROOT_TOLERANCE * reach;
            let mut total = 0.0;
            let mut bias = 0.0;
            let mut r_prev = 0.0;
            let mut g_prev = gap(0.0);
            let mut entry = if g_prev <= 0.0 { Some(0.0) } else { None };
            for j in 1..=RAY_SCAN_STEPS {
                let r = if j == RAY_SCAN_STEPS { *reach } else { step * j as f64 };
                let g = gap(r);
                if (g <= 0.0) != (g_prev <= 0.0) {
                    let (root, width) = bracket_root(&mut gap, r_prev, g_prev, r, g, tol);
                    bias += width * root.powi(d - 1);
                    match entry.take() {
                        Some(a) => total += (root.powi(d) - f64::powi(a, d)) / d as f64,
                        None => entry = Some(root),
                    }
                }
                r_prev = r;
                g_prev = g;
            }
            if let Some(a) = entry {
                total += (reach.powi(d) - f64::powi(a, d)) / d as f64;
            }
            values[slot] = total;
            resolution[slot] = bias;
        }
    }
}

/// Illinois-modified regula falsi on a sign change of `g` in `[a, b]`.
/// Returns the root estimate and the width of the final bracket.
fn bracket_root<G: FnMut(f64) -> f64>(
    g: &mut G,
    mut a: f64,
    mut ga: f64,
    mut b: f64,
    mut gb: f64,
    tol: f64,
) -> (f64, f64) {
    let a_inside = ga <= 0.0;
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if (gc <= 0.0) == a_inside {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }
    (0.5 * (a + b), b - a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{make_ball, make_counterexample_m};
    use crate::geometry::{section_frame, UnitDirection};
    use std::f64::consts::PI;

    fn axis_frame(n: usize, i: usize) -> SectionFrame {
        section_frame(&UnitDirection::axis(n, i))
    }

    #[test]
    fn euclidean_disc() {
        let ball = make_ball(0.5, 2).unwrap();
        let est = mc_section_volume(&ball, &axis_frame(2, 0), [0.0, 0.0], SectionWeight::Euclidean, 200_000, 1)
            .unwrap();
        assert!((est.value - PI * 0.25).abs() <= 3.0 * est.std_error + 1e-12, "{est:?}");
    }

    #[test]
    fn hyperbolic_disc() {
        let ball = make_ball(0.5, 2).unwrap();
        let est = mc_section_volume(&ball, &axis_frame(2, 0), [0.0, 0.0], SectionWeight::Hyperbolic, 200_000, 2)
            .unwrap();
        assert!((est.value - 8.0 * PI / 3.0).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn empty_slices_are_zero() {
        let ball = make_ball(0.5, 2).unwrap();
        let est = mc_section_volume(&ball, &axis_frame(2, 0), [0.6, 0.0], SectionWeight::Euclidean, 1000, 3)
            .unwrap();
        assert_eq!(est.value, 0.0);
        let est = mc_section_volume(&ball, &axis_frame(2, 0), [0.3, 0.3], SectionWeight::Euclidean, 20_000, 3)
            .unwrap();
        // 0.5² − 0.18 = 0.07; the sampling disc is the slice itself
        assert!((est.value - PI * 0.07).abs() <= 3.0 * est.std_error + 1e-12);
    }

    #[test]
    fn hyperbolic_offsets_are_rejected() {
        let ball = make_ball(0.5, 2).unwrap();
        let r = mc_section_volume(&ball, &axis_frame(2, 0), [0.1, 0.0], SectionWeight::Hyperbolic, 10, 3);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let m = make_counterexample_m(2.0, 2.0).unwrap();
        let f = section_frame(&UnitDirection::normalize(&[0.3, 0.1, 0.0, 0.2, 0.8, 0.1]).unwrap());
        let a = mc_section_volume(&m, &f, [0.05, 0.0], SectionWeight::Euclidean, 5000, 9).unwrap();
        let b = mc_section_volume(&m, &f, [0.05, 0.0], SectionWeight::Euclidean, 5000, 9).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = mc_section_volume(&m, &f, [0.05, 0.0], SectionWeight::Euclidean, 5000, 10).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn ray_sampler_on_off_centre_ball_slices() {
        // slices of a 6-ball through off-centre points are 4-balls of radius √(ρ²−|u|²)
        let ball = make_ball(0.5, 3).unwrap();
        let f = axis_frame(3, 0);
        let offsets = [[0.0, 0.0], [0.2, 0.0], [0.1, 0.3]];
        let est = ray_parallel_sections(&ball, &f, &offsets, 20_000, 4).unwrap();
        for (i, u) in offsets.iter().enumerate() {
            let r2: f64 = 0.25 - u[0] * u[0] - u[1] * u[1];
            let want = PI * PI / 2.0 * r2 * r2;
            let e = est.combine(&[(i == 0) as u8 as f64, (i == 1) as u8 as f64, (i == 2) as u8 as f64]);
            assert!((e.value - want).abs() <= 3.0 * e.std_error + 1e-12, "{u:?}: {e:?} vs {want}");
        }
    }

    #[test]
    fn ray_sampler_handles_rays_that_enter_and_leave() {
        // the slice centre lies outside this ellipsoid, so rays cross twice
        let body = crate::bodies::StarBody::real_ellipsoid(&[0.3, 0.9, 0.9, 0.9]).unwrap();
        let f = SectionFrame::from_vector(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        let u = [0.45, 0.0];
        let mut centre = [0.0; 4];
        f.embed(u, &[], &mut centre);
        assert!(!body.contains(&centre));
        let ray = mc_section_volume_with(
            &body,
            &f,
            u,
            SectionWeight::Euclidean,
            &McConfig { samples: 100_000, seed: 5, sampler: Sampler::Ray },
        )
        .unwrap();
        let hit = mc_section_volume(&body, &f, u, SectionWeight::Euclidean, 400_000, 6).unwrap();
        assert!(ray.value > 0.0);
        let se = (ray.std_error.powi(2) + hit.std_error.powi(2)).sqrt();
        assert!((ray.value - hit.value).abs() <= 3.0 * se, "{ray:?} vs {hit:?}");
    }

    #[test]
    fn root_bracket_converges() {
        let mut g = |r: f64| r * r - 0.3;
        let (root, width) = bracket_root(&mut g, 0.0, -0.3, 1.0, 0.7, 1e-14);
        assert!((root - 0.3f64.sqrt()).abs() < 1e-13);
        assert!(width <= 1e-14);
    }
}
