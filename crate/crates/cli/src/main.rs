mod config;
mod report;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cxhyp::analysis::{
    bp_compare, monotone_comparison_check, pd_check, solution_table, DirectionGrid,
};
use cxhyp::bodies::{hyperbolic_transform, BodySpec, SpecDefaults, StarBody};
use cxhyp::geometry::UnitDirection;
use cxhyp::quadrature::{McConfig, Sampler};
use cxhyp::transforms::{
    analytic_laplacian_at_zero, analytic_section, ft_norm_minus2, laplacian_a_at_zero_with,
    parallel_section_with, radon_complex_detailed, FtConfig, SectionMethod, SphericalFunction,
};
use cxhyp::volumes::{default_level, evol, hvol, hvol_section};
use cxhyp::Error;

use config::ConfigFile;
use report::{Reference, Report, Row};

#[derive(Parser)]
#[command(name = "cxhyp", version, about = "Volumes, sections and Fourier-analytic checks for star bodies in complex hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hyperbolic and euclidean volume of a body.
    Hvol(Common),
    /// Hyperbolic central sections over directions, or a parallel section with --u.
    Section(Common),
    /// Complex spherical Radon transform of ρ_K^p over directions.
    Radon(Common),
    /// Fourier transform of ‖x‖_K^{-2} over directions.
    Ft(Common),
    /// Positive-definiteness check of the hyperbolic kernel of a body.
    PdCheck(Common),
    /// Compares sections and volumes of two bodies.
    BpCompare(Common),
    /// The n = 3 counterexample: section values, Laplacian and transform.
    Counterexample(Common),
    /// Answers by dimension, with the supporting computations.
    SolutionTable(Common),
    /// Runs the acceptance suite.
    Selftest(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Analytic,
    MonteCarlo,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    HitOrMiss,
    Ray,
}

#[derive(Args, Clone)]
struct Common {
    /// Body spec (`kind:param,…`) or a label from --config.
    #[arg(long)]
    body: Option<String>,
    /// First body for comparisons.
    #[arg(long)]
    k: Option<String>,
    /// Second body for comparisons.
    #[arg(long)]
    l: Option<String>,
    /// Complex dimension.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Comma-separated semi-axes.
    #[arg(long)]
    axes: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Quadrature level.
    #[arg(long)]
    level: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Direction as comma-separated real coordinates; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    xi: Vec<String>,
    /// Number of grid directions when no --xi is given.
    #[arg(long)]
    count: Option<usize>,
    /// Finite-difference step for Laplacians.
    #[arg(long)]
    h: Option<f64>,
    /// Offset `u1,u2` for a parallel section.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Exponent p for the radon command.
    #[arg(long, default_value_t = 2)]
    power: i32,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    #[arg(long, value_enum, default_value_t = SamplerArg::Ray)]
    sampler: SamplerArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with `[bodies.<label>]` specs and `[run]` defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

const DEFAULT_SEED: u64 = 20_240_917;

enum Failure {
    Precondition(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical_guard() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn precondition<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Precondition(msg.into()))
}

/// Flags merged over the config file.
struct Ctx {
    args: Common,
    file: ConfigFile,
}

impl Ctx {
    fn new(args: Common) -> Outcome<Self> {
        let file = match &args.config {
            Some(p) => ConfigFile::load(p).map_err(Failure::Precondition)?,
            None => ConfigFile::default(),
        };
        Ok(Self { args, file })
    }

    fn n(&self) -> Option<usize> {
        self.args.n.or(self.file.run.n)
    }

    fn seed(&self) -> u64 {
        self.args.seed.or(self.file.run.seed).unwrap_or(DEFAULT_SEED)
    }

    fn samples(&self) -> usize {
        self.args.samples.or(self.file.run.samples).unwrap_or(1_000_000)
    }

    fn level(&self, n: usize) -> usize {
        self.args.level.or(self.file.run.level).unwrap_or(default_level(n))
    }

    fn ft_level(&self) -> usize {
        self.args.level.or(self.file.run.level).unwrap_or(16)
    }

    fn count(&self, fallback: usize) -> usize {
        self.args.count.or(self.file.run.count).unwrap_or(fallback)
    }

    fn ft_config(&self) -> FtConfig {
        FtConfig {
            method: match self.args.method {
                Method::Auto => SectionMethod::Auto,
                Method::Analytic => SectionMethod::Analytic,
                Method::MonteCarlo => SectionMethod::MonteCarlo,
                Method::Quadrature => SectionMethod::Quadrature,
            },
            level: self.ft_level(),
            mc: McConfig {
                samples: self.samples(),
                seed: self.seed(),
                sampler: match self.args.sampler {
                    SamplerArg::HitOrMiss => Sampler::HitOrMiss,
                    SamplerArg::Ray => Sampler::Ray,
                },
            },
            h: self.args.h.or(self.file.run.h),
        }
    }

    fn defaults(&self) -> Outcome<SpecDefaults> {
        let axes = match &self.args.axes {
            Some(s) => Some(parse_floats(s)?),
            None => None,
        };
        Ok(SpecDefaults {
            n: self.n(),
            rho: self.args.rho,
            a: self.args.a,
            b: self.args.b,
            axes,
            epsilon: self.args.epsilon,
        })
    }

    fn spec(&self, text: &str) -> Outcome<BodySpec> {
        let spec = match self.file.bodies.get(text) {
            Some(s) => s.clone(),
            None => BodySpec::parse_with(text, &self.defaults()?)?,
        };
        Ok(match self.n() {
            Some(n) => spec.with_default_n(n),
            None => spec,
        })
    }

    fn body_from(&self, text: Option<&String>, flag: &str) -> Outcome<(BodySpec, StarBody)> {
        let Some(text) = text else {
            return precondition(format!("--{flag} is required"));
        };
        let spec = self.spec(text)?;
        let body = spec.build()?;
        Ok((spec, body))
    }

    fn body(&self) -> Outcome<(BodySpec, StarBody)> {
        self.body_from(self.args.body.as_ref(), "body")
    }

    /// Explicit --xi directions, or an orbit-reduced grid of --count.
    fn grid(&self, n: usize, fallback: usize, extra: &[UnitDirection]) -> Outcome<DirectionGrid> {
        if !self.args.xi.is_empty() {
            let dirs = self
                .args
                .xi
                .iter()
                .map(|s| {
                    let v = parse_floats(s)?;
                    if v.len() != 2 * n {
                        return precondition(format!("--xi {s} needs {} coordinates", 2 * n));
                    }
                    Ok(UnitDirection::normalize(&v)?)
                })
                .collect::<Outcome<Vec<_>>>()?;
            return Ok(DirectionGrid::from_directions(n, dirs)?);
        }
        let grid = DirectionGrid::orbit_reduced(n, self.count(fallback), self.seed())?;
        Ok(grid.with_extra(extra)?)
    }

    fn inputs(&self, bodies: &[(&str, &BodySpec)]) -> Value {
        let a = &self.args;
        let mut v = json!({
            "n": self.n(),
            "level": a.level.or(self.file.run.level),
            "samples": a.samples.or(self.file.run.samples),
            "seed": self.seed(),
            "count": a.count.or(self.file.run.count),
            "xi": a.xi,
            "h": a.h.or(self.file.run.h),
            "config": a.config.as_ref().map(|p| p.display().to_string()),
        });
        for (name, spec) in bodies {
            v[*name] = json!({ "spec": spec.to_string(), "tree": spec });
        }
        v
    }
}

fn parse_floats(s: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Precondition(format!("cannot parse `{p}` as a number")))
        })
        .collect()
}

fn golden(name: &str, value: f64, tag: &str) -> Reference {
    Reference {
        name: name.into(),
        value,
        tag: tag.into(),
    }
}

fn run_hvol(ctx: &Ctx) -> Outcome<Report> {
    let (spec, body) = ctx.body()?;
    let level = ctx.level(body.n());
    let h = hvol(&body, level)?;
    let e = evol(&body, level)?;
    let mut r = Report::new("hvol", ctx.inputs(&[("body", &spec)]), ctx.seed());
    r.results = json!({ "hvol": h, "evol": e });
    if let BodySpec::Ball { rho, n: Some(n) } = spec {
        let kernel = (rho * rho / (1.0 - rho * rho)).powi(n as i32) / (2 * n) as f64;
        let area = cxhyp::quadrature::sphere_area(2 * n - 1);
        r.references.push(golden(
            "hvol",
            8f64.powi(n as i32) * area * kernel,
            "closed form for a centred ball",
        ));
    }
    r.rows = vec![Row { xi: None, value: h.value, error: h.error_estimate }];
    Ok(r)
}

fn run_section(ctx: &Ctx) -> Outcome<Report> {
    let (spec, body) = ctx.body()?;
    let n = body.n();
    let grid = ctx.grid(n, 16, &[])?;
    let mut r = Report::new("section", ctx.inputs(&[("body", &spec)]), ctx.seed());
    if let Some(u) = &ctx.args.u {
        let u = parse_floats(u)?;
        if u.len() != 2 {
            return precondition("--u needs two coordinates");
        }
        let cfg = ctx.ft_config();
        let mut entries = Vec::new();
        for xi in &grid.directions {
            let s = parallel_section_with(&body, xi, [u[0], u[1]], &cfg)?;
            r.rows.push(Row { xi: Some(xi.coords().to_vec()), value: s.value, error: s.error_estimate });
            entries.push(json!({ "xi": xi, "section": s }));
        }
        r.results = json!({ "euclidean_parallel_sections": entries, "u": u });
    } else {
        let level = ctx.level(n);
        let mut entries = Vec::new();
        for xi in &grid.directions {
            let s = hvol_section(&body, xi, level)?;
            r.rows.push(Row { xi: Some(xi.coords().to_vec()), value: s.value, error: s.error_estimate });
            entries.push(json!({ "xi": xi, "hvol_section": s }));
        }
        r.results = json!({ "hyperbolic_sections": entries });
    }
    Ok(r)
}

fn run_radon(ctx: &Ctx) -> Outcome<Report> {
    let (spec, body) = ctx.body()?;
    let f = SphericalFunction::radial_power(&body, ctx.args.power);
    let grid = ctx.grid(body.n(), 16, &[])?;
    let level = ctx.ft_level();
    let mut r = Report::new("radon", ctx.inputs(&[("body", &spec)]), ctx.seed());
    let mut entries = Vec::new();
    for xi in &grid.directions {
        let v = radon_complex_detailed(&f, xi, level)?;
        r.rows.push(Row { xi: Some(xi.coords().to_vec()), value: v.value, error: v.error_estimate });
        entries.push(json!({ "xi": xi, "radon": v }));
    }
    r.results = json!({ "function": f.label(), "power": ctx.args.power, "values": entries });
    Ok(r)
}

fn run_ft(ctx: &Ctx) -> Outcome<Report> {
    let (spec, body) = ctx.body()?;
    let grid = ctx.grid(body.n(), 16, &[])?;
    let cfg = ctx.ft_config();
    let mut r = Report::new("ft", ctx.inputs(&[("body", &spec)]), ctx.seed());
    let mut entries = Vec::new();
    for xi in &grid.directions {
        let v = ft_norm_minus2(&body, xi, &cfg)?;
        r.rows.push(Row { xi: Some(xi.coords().to_vec()), value: v.value, error: v.error_estimate });
        entries.push(json!({ "xi": xi, "ft": v }));
    }
    r.results = json!({ "config": cfg, "values": entries });
    Ok(r)
}

fn x3_direction(n: usize) -> Vec<UnitDirection> {
    if n == 3 {
        vec![UnitDirection::axis(3, 4)]
    } else {
        Vec::new()
    }
}

fn run_pd_check(ctx: &Ctx) -> Outcome<Report> {
    let (spec, body) = ctx.body()?;
    let n = body.n();
    let grid = ctx.grid(n, if n == 2 { 200 } else { 8 }, &x3_direction(n))?;
    let cfg = ctx.ft_config();
    let pd = pd_check(&body, &grid, &cfg)?;
    let mut r = Report::new("pd-check", ctx.inputs(&[("body", &spec)]), ctx.seed());
    r.rows = pd
        .per_direction
        .iter()
        .map(|e| Row { xi: Some(e.xi.clone()), value: e.ft_value, error: e.error_estimate })
        .collect();
    if matches!(spec, BodySpec::CounterexampleK { a, b } if a == 2.0 && b == 2.0) {
        r.references.push(golden(
            "ft_in_x3_plane",
            -16.0 * PI.powi(3) / 9.0,
            "golden: -16π³/9, transform of the counterexample kernel for ξ in the x3-plane",
        ));
    }
    r.results = json!({ "grid": grid.construction, "config": cfg, "report": pd });
    Ok(r)
}

fn run_bp_compare(ctx: &Ctx) -> Outcome<Report> {
    let (ks, k) = ctx.body_from(ctx.args.k.as_ref(), "k")?;
    let (ls, l) = ctx.body_from(ctx.args.l.as_ref(), "l")?;
    if k.n() != l.n() {
        return precondition("--k and --l must have the same complex dimension");
    }
    let n = k.n();
    let grid = ctx.grid(n, 32, &[])?;
    let level = ctx.level(n);
    let bp = bp_compare(&k, &l, &grid, level)?;
    let mut r = Report::new("bp-compare", ctx.inputs(&[("k", &ks), ("l", &ls)]), ctx.seed());
    r.rows = vec![
        Row { xi: None, value: bp.section_margin, error: bp.section_tol },
        Row { xi: None, value: bp.volume_delta, error: bp.volume_tol },
    ];
    let chain = if n == 2 && k.claims_rtheta_invariant() && l.claims_rtheta_invariant() {
        Some(monotone_comparison_check(&k, &l, &grid, level.min(16))?)
    } else {
        None
    };
    r.results = json!({ "report": bp, "monotone_chain": chain });
    Ok(r)
}

fn run_counterexample(ctx: &Ctx) -> Outcome<Report> {
    let a = ctx.args.a.unwrap_or(2.0);
    let b = ctx.args.b.unwrap_or(2.0);
    let spec = BodySpec::CounterexampleK { a, b };
    let k = spec.build()?;
    let m = hyperbolic_transform(&k)?;
    let xi = UnitDirection::axis(3, 4);
    let a0 = analytic_section(&m, &xi, [0.0, 0.0])?;
    let lap = analytic_laplacian_at_zero(&m, &xi)?;
    let analytic = ft_norm_minus2(&m, &xi, &FtConfig { method: SectionMethod::Analytic, ..FtConfig::default() })?;
    let mc_cfg = FtConfig {
        method: SectionMethod::MonteCarlo,
        ..ctx.ft_config()
    };
    let mc_lap = laplacian_a_at_zero_with(&m, &xi, &mc_cfg)?;
    let mc = ft_norm_minus2(&m, &xi, &mc_cfg)?;
    let mut r = Report::new("counterexample", ctx.inputs(&[("body", &spec)]), ctx.seed());
    r.results = json!({
        "xi": xi,
        "section_at_zero": a0,
        "laplacian_at_zero": lap,
        "ft_analytic": analytic,
        "laplacian_monte_carlo": mc_lap,
        "ft_monte_carlo": mc,
    });
    r.rows = vec![
        Row { xi: Some(xi.coords().to_vec()), value: analytic.value, error: analytic.error_estimate },
        Row { xi: Some(xi.coords().to_vec()), value: mc.value, error: mc.error_estimate },
    ];
    if a == 2.0 && b == 2.0 {
        r.references = vec![
            golden("section_at_zero", PI * PI / 18.0, "golden: π²/18"),
            golden("laplacian_at_zero", 4.0 * PI * PI / 9.0, "golden: 4π²/9"),
            golden("ft", -16.0 * PI.powi(3) / 9.0, "golden: -16π³/9"),
        ];
    }
    Ok(r)
}

fn run_solution_table(ctx: &Ctx) -> Outcome<Report> {
    let table = solution_table(ctx.count(200), ctx.seed())?;
    let mut r = Report::new("solution-table", ctx.inputs(&[]), ctx.seed());
    r.rows = table
        .rows
        .iter()
        .filter_map(|row| row.min_ft_value.map(|v| Row { xi: None, value: v, error: row.tol.unwrap_or(0.0) }))
        .collect();
    r.results = serde_json::to_value(&table).unwrap_or(Value::Null);
    r.references.push(golden("n3_witness", -16.0 * PI.powi(3) / 9.0, "golden: -16π³/9"));
    Ok(r)
}

fn run_selftest(ctx: &Ctx) -> Outcome<(Report, bool)> {
    let outcomes = cxhyp::selftest::run_all();
    for o in &outcomes {
        eprintln!("{o}");
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let mut r = Report::new("selftest", ctx.inputs(&[]), ctx.seed());
    r.rows = outcomes
        .iter()
        .map(|o| Row { xi: None, value: f64::from(u8::from(o.passed)), error: 0.0 })
        .collect();
    r.results = json!({ "passed": passed, "criteria": outcomes });
    Ok((r, passed))
}

fn configure_threads() {
    if let Some(n) = std::env::var("CXHYP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // an already initialized pool keeps its size, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let (name, args) = match &cli.command {
        Command::Hvol(a) => ("hvol", a),
        Command::Section(a) => ("section", a),
        Command::Radon(a) => ("radon", a),
        Command::Ft(a) => ("ft", a),
        Command::PdCheck(a) => ("pd-check", a),
        Command::BpCompare(a) => ("bp-compare", a),
        Command::Counterexample(a) => ("counterexample", a),
        Command::SolutionTable(a) => ("solution-table", a),
        Command::Selftest(a) => ("selftest", a),
    };
    let outcome = Ctx::new(args.clone()).and_then(|ctx| {
        let mut ok = true;
        let report = match &cli.command {
            Command::Hvol(_) => run_hvol(&ctx),
            Command::Section(_) => run_section(&ctx),
            Command::Radon(_) => run_radon(&ctx),
            Command::Ft(_) => run_ft(&ctx),
            Command::PdCheck(_) => run_pd_check(&ctx),
            Command::BpCompare(_) => run_bp_compare(&ctx),
            Command::Counterexample(_) => run_counterexample(&ctx),
            Command::SolutionTable(_) => run_solution_table(&ctx),
            Command::Selftest(_) => run_selftest(&ctx).map(|(r, passed)| {
                ok = passed;
                r
            }),
        }?;
        Ok((report, ok))
    });
    let (report, ok) = match outcome {
        Ok(r) => r,
        Err(Failure::Precondition(msg)) => {
            eprintln!("cxhyp {name}: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("cxhyp {name}: {msg}");
            return ExitCode::from(3);
        }
    };
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Csv => match report::grid_csv(&report.rows) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cxhyp {name}: {e}");
                return ExitCode::from(2);
            }
        },
    };
    if let Err(e) = report::emit(&text, args.out.as_deref()) {
        eprintln!("cxhyp {name}: cannot write output: {e}");
        return ExitCode::from(3);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
