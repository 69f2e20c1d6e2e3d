//! Reference computations that share no code with the production paths.

use std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson correction, to relative
/// tolerance `rel_tol` of the coarse estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = (rel_tol * whole.abs()).max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// `Γ(k/2)` for a positive integer `k`, from `Γ(1) = 1`, `Γ(1/2) = √π`
/// and `Γ(x+1) = xΓ(x)`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "Gamma has a pole at 0");
    let (mut x, mut g) = if k % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `|S^d| = 2π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn sphere_area_gamma(d: usize) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma_half(d as u32 + 1)
}

/// `∫_{S^{D−1}} Π x_i^{α_i} dσ = 2 Π Γ(β_i) / Γ(Σ β_i)` with `β_i = (α_i+1)/2`,
/// zero when any exponent is odd.
pub fn sphere_monomial_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let num: f64 = alpha.iter().map(|a| gamma_half(a + 1)).product();
    let total: u32 = alpha.iter().map(|a| a + 1).sum();
    2.0 * num / gamma_half(total)
}

/// Classical Fourier transform of `|x|^{−p}` on ℝ^d at a unit vector:
/// `2^{d−p} π^{d/2} Γ((d−p)/2) / Γ(p/2)`.
pub fn classical_ft_power(d: u32, p: u32) -> f64 {
    assert!(p > 0 && p < d);
    2f64.powi((d - p) as i32) * PI.powf(d as f64 / 2.0) * gamma_half(d - p) / gamma_half(p)
}

/// Hyperbolic volume of a centred ball of radius `rho` in ℂⁿ, integrating the
/// radial density `8ⁿ r^{2n−1}/(1−r²)^{n+1}` adaptively.
pub fn ball_hvol_reference(rho: f64, n: u32) -> f64 {
    let f = |r: f64| r.powi(2 * n as i32 - 1) / (1.0 - r * r).powi(n as i32 + 1);
    8f64.powi(n as i32) * sphere_area_gamma(2 * n as usize - 1) * adaptive_simpson(&f, 0.0, rho, 1e-14)
}
