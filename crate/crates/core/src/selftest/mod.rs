//! The acceptance suite, shared by the `acceptance` test target and the
//! `selftest` CLI command. Each criterion runs independently and reports a
//! single pass/fail line.

pub mod oracle;

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::analysis::{catalog, pd_check, DirectionGrid, PdVerdict};
use crate::bodies::{dilate, radial_perturbation, StarBody};
use crate::error::Result;
use crate::geometry::{section_frame, UnitDirection};
use crate::quadrature::{
    mc_section_volume, radial_hyp_integral, ray_parallel_sections, McConfig, Sampler, SectionWeight,
};
use crate::rng::{seeded_rng, unit_vector};
use crate::transforms::{
    analytic_section, ft_homogeneous_2n2, laplacian_a_at_zero, laplacian_a_at_zero_with,
    parallel_section_with, parseval_check, radon_complex, FtConfig, SectionMethod,
    SphericalFunction, DEFAULT_STEP_ANALYTIC,
};
use crate::volumes::{hvol, hvol_section, sandwich_check, transform_volume_identity};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

/// Every criterion, in order.
pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "golden counterexample transform", golden_transform),
    (2, "counterexample section values", section_values),
    (3, "n=2 positive definiteness", n2_positive_definite),
    (4, "radon and transform calibration", calibration),
    (5, "closed-form radial integral", radial_integral),
    (6, "volume identities", volume_identities),
    (7, "section volumes against Monte Carlo", sections_vs_monte_carlo),
    (8, "Parseval identity", parseval),
    (9, "sandwich bounds", sandwich),
    (10, "kernel inequality", kernel_inequality),
    (11, "invariance and reproducibility", invariance),
];

pub fn run(id: u32) -> Option<CriterionOutcome> {
    let (id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionOutcome {
        id: *id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|c| run(c.0)).collect()
}

/// `−16π³/9`, the transform of the counterexample in the `x₃`-plane.
pub const GOLDEN_FT: f64 = -16.0 * PI * PI * PI / 9.0;
pub const GOLDEN_SECTION: f64 = PI * PI / 18.0;
pub const GOLDEN_LAPLACIAN: f64 = 4.0 * PI * PI / 9.0;

fn x3_directions() -> Vec<UnitDirection> {
    [0.0, 0.9, 2.5]
        .iter()
        .map(|t: &f64| UnitDirection::normalize(&[0.0, 0.0, 0.0, 0.0, t.cos(), t.sin()]))
        .collect::<Result<_>>()
        .expect("unit")
}

fn golden_transform() -> Result<(bool, String)> {
    let start = Instant::now();
    let k = StarBody::counterexample_k(2.0, 2.0)?;
    let grid = DirectionGrid::from_directions(3, x3_directions())?;
    let analytic = pd_check(&k, &grid, &FtConfig { method: SectionMethod::Analytic, ..FtConfig::default() })?;
    let analytic_err = analytic
        .per_direction
        .iter()
        .map(|e| (e.ft_value - GOLDEN_FT).abs())
        .fold(0.0, f64::max);
    let mc_grid = DirectionGrid::from_directions(3, vec![UnitDirection::axis(3, 4)])?;
    let mc_config = FtConfig {
        method: SectionMethod::MonteCarlo,
        mc: McConfig {
            samples: 1_000_000,
            seed: 1,
            sampler: Sampler::Ray,
        },
        h: Some(1e-2),
        ..FtConfig::default()
    };
    let mc = pd_check(&k, &mc_grid, &mc_config)?;
    let mc_rel = (mc.min_value - GOLDEN_FT).abs() / GOLDEN_FT.abs();
    let seconds = start.elapsed().as_secs_f64();
    let passed = analytic_err <= 1e-9
        && mc_rel <= 0.02
        && analytic.verdict == PdVerdict::NegativeDirectionFound
        && mc.verdict == PdVerdict::NegativeDirectionFound
        && seconds < 60.0;
    Ok((
        passed,
        format!(
            "analytic max error {analytic_err:.2e} (tol 1e-9); Monte Carlo {:.6} rel error {mc_rel:.2e} (tol 2e-2); {seconds:.1}s (limit 60s)",
            mc.min_value
        ),
    ))
}

fn section_values() -> Result<(bool, String)> {
    let k = StarBody::counterexample_k(2.0, 2.0)?;
    let m = crate::bodies::hyperbolic_transform(&k)?;
    let xi = UnitDirection::axis(3, 4);
    let a0 = analytic_section(&m, &xi, [0.0, 0.0])?;
    let lap = laplacian_a_at_zero(&m, &xi, DEFAULT_STEP_ANALYTIC, SectionMethod::Analytic, 0, 0)?;
    let a_err = (a0 - GOLDEN_SECTION).abs();
    let lap_err = (lap.value - GOLDEN_LAPLACIAN).abs();

    let frame = section_frame(&xi);
    let mc_a = mc_section_volume(&m, &frame, [0.0, 0.0], SectionWeight::Euclidean, 1_000_000, 2)?;
    let mc_lap = laplacian_a_at_zero_with(
        &m,
        &xi,
        &FtConfig {
            method: SectionMethod::MonteCarlo,
            mc: McConfig {
                samples: 1_000_000,
                seed: 3,
                sampler: Sampler::Ray,
            },
            h: Some(1e-2),
            ..FtConfig::default()
        },
    )?;
    // the shell-stratified sampler can be exact on this slice (σ = 0), so a
    // summation roundoff floor keeps the comparison meaningful
    let floor = |v: f64| 64.0 * f64::EPSILON * v.abs();
    let mc_a_dev = (mc_a.value - GOLDEN_SECTION).abs();
    let mc_a_band = 3.0 * mc_a.std_error + floor(GOLDEN_SECTION);
    let mc_lap_sigma = mc_lap.std_error.unwrap_or(0.0);
    let mc_lap_dev = (mc_lap.value - GOLDEN_LAPLACIAN).abs();
    let passed = a_err <= 1e-10
        && lap_err <= 1e-10
        && mc_a_dev <= mc_a_band
        && mc_lap_dev <= 3.0 * mc_lap_sigma;
    Ok((
        passed,
        format!(
            "A(0) error {a_err:.1e}, Laplacian error {lap_err:.1e} (tol 1e-10); Monte Carlo A(0) deviation {mc_a_dev:.2e} vs 3σ = {:.2e}, Laplacian deviation {mc_lap_dev:.2e} vs 3σ = {:.2e}",
            3.0 * mc_a.std_error,
            3.0 * mc_lap_sigma
        ),
    ))
}

fn n2_positive_definite() -> Result<(bool, String)> {
    let grid = DirectionGrid::orbit_reduced(2, 200, 0)?;
    let mut passed = true;
    let mut worst = f64::INFINITY;
    for body in catalog(2)? {
        let r = pd_check(&body, &grid, &FtConfig::default())?;
        passed &= r.verdict == PdVerdict::PositiveDefiniteOnGrid && r.min_value >= -r.tol;
        worst = worst.min(r.min_value);
    }
    Ok((
        passed,
        format!("{} catalog bodies over {} directions; smallest value {worst:.4}", catalog(2)?.len(), grid.len()),
    ))
}

fn calibration() -> Result<(bool, String)> {
    let mut rng = seeded_rng(4);
    let mut worst_radon: f64 = 0.0;
    let mut worst_ft: f64 = 0.0;
    for n in [2usize, 3] {
        let one = SphericalFunction::constant(n, 1.0);
        let radon_want = if n == 2 { 2.0 * PI } else { 2.0 * PI * PI };
        let ft_want = oracle::classical_ft_power(2 * n as u32, 2 * n as u32 - 2);
        let ft_closed = if n == 2 { 4.0 * PI * PI } else { 4.0 * PI.powi(3) };
        if (ft_want - ft_closed).abs() > 1e-12 * ft_closed {
            return Ok((false, format!("oracle {ft_want} disagrees with {ft_closed}")));
        }
        let mut v = vec![0.0; 2 * n];
        for _ in 0..5 {
            unit_vector(&mut rng, &mut v);
            let xi = UnitDirection::new(v.clone())?;
            worst_radon = worst_radon.max((radon_complex(&one, &xi, 16)? - radon_want).abs());
            worst_ft = worst_ft.max((ft_homogeneous_2n2(&one, &xi, 16)? - ft_want).abs());
        }
    }
    Ok((
        worst_radon <= 1e-9 && worst_ft <= 1e-8,
        format!("radon error {worst_radon:.1e} (tol 1e-9), transform error {worst_ft:.1e} (tol 1e-8)"),
    ))
}

fn radial_integral() -> Result<(bool, String)> {
    let mut rng = seeded_rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rho: f64 = rng.random_range(0.01..0.95);
        let m: u32 = rng.random_range(1..=4);
        let f = |r: f64| r.powi(2 * m as i32 - 1) / (1.0 - r * r).powi(m as i32 + 1);
        let reference = oracle::adaptive_simpson(&f, 0.0, rho, 1e-15);
        let closed = radial_hyp_integral(rho, m)?;
        worst = worst.max(((closed - reference) / reference).abs());
    }
    Ok((worst <= 1e-12, format!("max relative error {worst:.1e} over 100 draws (tol 1e-12)")))
}

fn volume_identities() -> Result<(bool, String)> {
    let b = StarBody::ball(0.5, 2)?;
    let h = hvol(&b, 32)?.value;
    let want = 32.0 * PI * PI / 9.0;
    let herr = (h - want).abs();
    let rb = transform_volume_identity(&b, 64)?.residual;
    let rk = transform_volume_identity(&StarBody::counterexample_k(2.0, 2.0)?, 64)?.residual;
    Ok((
        herr <= 1e-9 && rb <= 1e-6 && rk <= 1e-6,
        format!("ball volume error {herr:.1e} (tol 1e-9); identity residuals {rb:.1e}, {rk:.1e} (tol 1e-6)"),
    ))
}

fn sections_vs_monte_carlo() -> Result<(bool, String)> {
    let mixed3 = UnitDirection::normalize(&[0.3, -0.2, 0.5, 0.1, 0.7, 0.2])?;
    let mixed2 = UnitDirection::normalize(&[0.2, 0.4, -0.1, 0.9])?;
    let pairs: Vec<(StarBody, UnitDirection)> = vec![
        (StarBody::ball(0.5, 2)?, mixed2.clone()),
        (StarBody::ball(0.8, 2)?, UnitDirection::axis(2, 0)),
        (StarBody::complex_ellipsoid(&[0.7, 0.35])?, UnitDirection::axis(2, 1)),
        (StarBody::complex_ellipsoid(&[0.7, 0.35])?, mixed2.clone()),
        (StarBody::real_ellipsoid(&[0.6, 0.3, 0.45, 0.5])?, mixed2),
        (StarBody::ball(0.5, 3)?, mixed3.clone()),
        (StarBody::complex_ellipsoid(&[0.6, 0.45, 0.3])?, mixed3.clone()),
        (StarBody::counterexample_k(2.0, 2.0)?, UnitDirection::axis(3, 4)),
        (StarBody::counterexample_k(2.0, 2.0)?, UnitDirection::axis(3, 0)),
        (StarBody::counterexample_k(2.0, 2.0)?, mixed3),
    ];
    let mut worst: f64 = 0.0;
    for (i, (body, xi)) in pairs.iter().enumerate() {
        let q = hvol_section(body, xi, 64)?.value;
        let mc = mc_section_volume(
            body,
            &section_frame(xi),
            [0.0, 0.0],
            SectionWeight::Hyperbolic,
            1_000_000,
            1000 + i as u64,
        )?;
        worst = worst.max((q - mc.value).abs() / mc.std_error);
    }
    Ok((worst <= 3.0, format!("largest deviation {worst:.2} standard errors over {} pairs", pairs.len())))
}

fn parseval() -> Result<(bool, String)> {
    // smooth invariant pairs; residuals below the floor count as converged
    const FLOOR: f64 = 1e-12;
    let pairs = [
        (StarBody::ball(0.5, 2)?, StarBody::complex_ellipsoid(&[0.6, 0.4])?),
        (StarBody::complex_ellipsoid(&[0.7, 0.35])?, StarBody::complex_ellipsoid(&[0.45, 0.55])?),
        (
            StarBody::real_ellipsoid(&[0.6, 0.6, 0.3, 0.3])?,
            radial_perturbation(&StarBody::ball(0.5, 2)?, 0.1)?,
        ),
    ];
    let mut passed = true;
    let mut lines = Vec::new();
    for (k, l) in &pairs {
        let r: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|lv| parseval_check(k, l, *lv).map(|p| p.residual))
            .collect::<Result<_>>()?;
        let order = |a: f64, b: f64| {
            if b <= FLOOR {
                f64::INFINITY
            } else {
                (a / b).log2()
            }
        };
        let o1 = order(r[0], r[1]);
        let o2 = order(r[1], r[2]);
        let converged = r[2] <= 1e-3 && (r[1] <= FLOOR || o1 >= 2.0) && (r[2] <= FLOOR || o2 >= 2.0);
        passed &= converged;
        lines.push(format!("{:.1e}/{:.1e}/{:.1e}", r[0], r[1], r[2]));
    }
    Ok((passed, format!("residuals at levels 16/32/64: {} (tol 1e-3, order >= 2 above {FLOOR:e})", lines.join("; "))))
}

/// A random body with circumradius exactly `s`.
fn random_body<R: Rng>(rng: &mut R, s: f64) -> Result<StarBody> {
    let kind = rng.random_range(0..5);
    let n = rng.random_range(2..=3usize);
    let axis = |rng: &mut R| rng.random_range(0.3..1.0) * s;
    match kind {
        0 => StarBody::ball(s, n),
        1 => {
            let mut axes: Vec<f64> = (0..n).map(|_| axis(rng)).collect();
            axes[rng.random_range(0..n)] = s;
            StarBody::complex_ellipsoid(&axes)
        }
        2 => {
            let mut axes: Vec<f64> = (0..2 * n).map(|_| axis(rng)).collect();
            axes[rng.random_range(0..2 * n)] = s;
            StarBody::real_ellipsoid(&axes)
        }
        3 => {
            let k = StarBody::counterexample_k(rng.random_range(1.5..3.0), rng.random_range(1.0..3.0))?;
            dilate(&k, s / k.circumradius())
        }
        _ => {
            let eps = rng.random_range(0.0..0.3);
            let inner = StarBody::ball(s / (1.0 + eps), n)?;
            let p = radial_perturbation(&inner, eps)?;
            dilate(&p, s / p.circumradius())
        }
    }
}

fn sandwich() -> Result<(bool, String)> {
    let mut rng = seeded_rng(9);
    let mut passed = true;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..50 {
        let s = rng.random_range(0.1..0.7);
        let body = random_body(&mut rng, s)?;
        let s = body.circumradius().max(s);
        let mut v = vec![0.0; body.dim()];
        let dirs: Vec<UnitDirection> = (0..3)
            .map(|_| {
                unit_vector(&mut rng, &mut v);
                UnitDirection::new(v.clone())
            })
            .collect::<Result<_>>()?;
        let r = sandwich_check(&body, s, &dirs, 12)?;
        passed &= r.holds;
        worst_excess = worst_excess.max(r.volume_ratio - r.volume_bound);
        for (_, q) in &r.section_ratios {
            worst_excess = worst_excess.max(q - r.section_bound);
        }
    }
    Ok((passed, format!("50 bodies; largest ratio minus bound {worst_excess:.2e} (slack 1e-8)")))
}

fn kernel_inequality() -> Result<(bool, String)> {
    let mut rng = seeded_rng(10);
    let mut violations = 0;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(0.001..0.999);
        let b: f64 = rng.random_range(0.001..0.999);
        let n: u32 = rng.random_range(2..=4);
        // both sides by independent adaptive quadrature of the integrands
        let lo = a.min(b);
        let hi = a.max(b);
        let sign = if b >= a { 1.0 } else { -1.0 };
        let f = |r: f64| r.powi(2 * n as i32 - 3) / (1.0 - r * r).powi(n as i32);
        let g = |r: f64| r.powi(2 * n as i32 - 1) / (1.0 - r * r).powi(n as i32 + 1);
        let lhs = a * a / (1.0 - a * a) * sign * oracle::adaptive_simpson(&f, lo, hi, 1e-13);
        let rhs = sign * oracle::adaptive_simpson(&g, lo, hi, 1e-13);
        if lhs > rhs + 1e-10 * (lhs.abs() + rhs.abs()) {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("{violations} violations in 1000 draws")))
}

fn invariance() -> Result<(bool, String)> {
    let mut worst_pd: f64 = 0.0;
    let thetas = [0.3, 1.7, 4.0];

    let e = StarBody::complex_ellipsoid(&[0.7, 0.35])?;
    let base = UnitDirection::normalize(&[0.2, 0.4, -0.1, 0.9])?;
    let k = StarBody::counterexample_k(2.0, 2.0)?;
    for (body, xi) in [(&e, base), (&k, UnitDirection::axis(3, 4))] {
        let mut dirs = vec![xi.clone()];
        dirs.extend(thetas.iter().map(|t| xi.rotate(*t)));
        let grid = DirectionGrid::from_directions(body.n(), dirs)?;
        let r = pd_check(body, &grid, &FtConfig::default())?;
        let v0 = r.per_direction[0].ft_value;
        for p in &r.per_direction {
            worst_pd = worst_pd.max((p.ft_value - v0).abs() / v0.abs().max(1.0));
        }
    }

    let mut worst_radon: f64 = 0.0;
    let f = SphericalFunction::radial_power(&StarBody::complex_ellipsoid(&[0.6, 0.35, 0.5])?, 2);
    let xi = UnitDirection::normalize(&[0.3, 0.1, -0.5, 0.2, 0.6, 0.4])?;
    let r0 = radon_complex(&f, &xi, 16)?;
    for t in thetas {
        worst_radon = worst_radon.max((radon_complex(&f, &xi.rotate(t), 16)? - r0).abs() / r0);
    }

    // seeded Monte Carlo must not depend on the thread count
    let body = StarBody::complex_ellipsoid(&[0.6, 0.45, 0.3])?;
    let frame = section_frame(&UnitDirection::normalize(&[0.3, -0.2, 0.5, 0.1, 0.7, 0.2])?);
    let run = |threads: usize| -> Result<(u64, Vec<u64>, u64)> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Precondition(e.to_string()))?;
        pool.install(|| {
            let a = mc_section_volume(&body, &frame, [0.0, 0.0], SectionWeight::Hyperbolic, 100_000, 77)?;
            let r = ray_parallel_sections(&body, &frame, &[[0.0, 0.0], [0.1, 0.0]], 20_000, 78)?;
            let q = parallel_section_with(
                &body,
                frame.xi(),
                [0.05, 0.02],
                &FtConfig { method: SectionMethod::Quadrature, level: 10, ..FtConfig::default() },
            )?;
            Ok((a.value.to_bits(), r.means.iter().map(|m| m.to_bits()).collect(), q.value.to_bits()))
        })
    };
    let one = run(1)?;
    let reproducible = one == run(1)? && one == run(4)?;

    let passed = worst_pd <= 1e-9 && worst_radon <= 1e-10 && reproducible;
    Ok((
        passed,
        format!(
            "orbit spread: transform {worst_pd:.1e} (tol 1e-9), radon {worst_radon:.1e} (tol 1e-10); seeded runs bit-identical across thread counts: {reproducible}"
        ),
    ))
}
