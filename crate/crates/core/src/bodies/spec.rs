//! Declarative body descriptions.
//!
//! A [`BodySpec`] is either parsed from a compact string
//! (`kind:param,param`, with composed kinds nesting their inner spec after a
//! colon) or deserialized from a document tagged by `kind`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    hyperbolic_transform_with_delta, radial_perturbation, StarBody, DEFAULT_CONTAINMENT_DELTA,
};
use crate::error::{Error, Result};

/// Canonical kind names accepted by [`BodySpec::parse`].
pub const BODY_KINDS: &[&str] = &[
    "ball",
    "complex_ellipsoid",
    "real_ellipsoid",
    "counterexample_K",
    "counterexample_M",
    "hyperbolic_transform",
    "radial_perturbation",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BodySpec {
    #[serde(rename = "ball")]
    Ball {
        rho: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    #[serde(rename = "complex_ellipsoid")]
    ComplexEllipsoid { axes: Vec<f64> },
    #[serde(rename = "real_ellipsoid")]
    RealEllipsoid { axes: Vec<f64> },
    #[serde(rename = "counterexample_K")]
    CounterexampleK { a: f64, b: f64 },
    #[serde(rename = "counterexample_M")]
    CounterexampleM { a: f64, b: f64 },
    #[serde(rename = "hyperbolic_transform")]
    HyperbolicTransform {
        of: Box<BodySpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    #[serde(rename = "radial_perturbation")]
    RadialPerturbation { of: Box<BodySpec>, epsilon: f64 },
}

/// Values used for parameters a spec string leaves out.
#[derive(Debug, Clone, Default)]
pub struct SpecDefaults {
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub axes: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
}

fn canonical_kind(kind: &str) -> Option<&'static str> {
    let key = kind.trim().replace('-', "_").to_ascii_lowercase();
    BODY_KINDS.iter().copied().find(|k| k.to_ascii_lowercase() == key)
}

fn unknown(kind: &str) -> Error {
    Error::UnknownBodyKind {
        kind: kind.to_string(),
        valid: BODY_KINDS.join(", "),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse `{p}` as a number")))
        })
        .collect()
}

fn missing(kind: &str, what: &str) -> Error {
    Error::InvalidParameter(format!("body kind `{kind}` needs {what}"))
}

impl BodySpec {
    /// Parses `kind:params` with no defaults.
    pub fn parse(s: &str) -> Result<Self> {
        Self::parse_with(s, &SpecDefaults::default())
    }

    /// Parses `kind:params`, filling omitted parameters from `defaults`.
    ///
    /// Forms: `ball:ρ`, `complex_ellipsoid:α₁,…,αₙ`, `real_ellipsoid:α₁,…,α₂ₙ`,
    /// `counterexample_K:a,b`, `counterexample_M:a,b`,
    /// `hyperbolic_transform:<spec>`, `radial_perturbation:ε:<spec>`.
    /// Dashes and underscores are interchangeable and kinds are case-insensitive.
    pub fn parse_with(s: &str, defaults: &SpecDefaults) -> Result<Self> {
        let (kind_raw, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r.trim())),
            None => (s, None),
        };
        let kind = canonical_kind(kind_raw).ok_or_else(|| unknown(kind_raw.trim()))?;
        let params = || -> Result<Vec<f64>> { rest.map(parse_list).unwrap_or(Ok(Vec::new())) };
        let pair = |kind: &str| -> Result<(f64, f64)> {
            let p = params()?;
            match (p.as_slice(), defaults.a, defaults.b) {
                ([a, b], _, _) => Ok((*a, *b)),
                ([], Some(a), Some(b)) => Ok((a, b)),
                _ => Err(missing(kind, "parameters a,b")),
            }
        };
        let axes = |kind: &str| -> Result<Vec<f64>> {
            let p = params()?;
            if !p.is_empty() {
                Ok(p)
            } else {
                defaults.axes.clone().ok_or_else(|| missing(kind, "semi-axes"))
            }
        };
        Ok(match kind {
            "ball" => {
                let p = params()?;
                let rho = match p.as_slice() {
                    [rho] => *rho,
                    [] => defaults.rho.ok_or_else(|| missing(kind, "a radius"))?,
                    _ => return Err(missing(kind, "a single radius")),
                };
                BodySpec::Ball { rho, n: defaults.n }
            }
            "complex_ellipsoid" => BodySpec::ComplexEllipsoid { axes: axes(kind)? },
            "real_ellipsoid" => BodySpec::RealEllipsoid { axes: axes(kind)? },
            "counterexample_K" => {
                let (a, b) = pair(kind)?;
                BodySpec::CounterexampleK { a, b }
            }
            "counterexample_M" => {
                let (a, b) = pair(kind)?;
                BodySpec::CounterexampleM { a, b }
            }
            "hyperbolic_transform" => {
                let inner = rest.ok_or_else(|| missing(kind, "an inner body"))?;
                BodySpec::HyperbolicTransform {
                    of: Box::new(Self::parse_with(inner, defaults)?),
                    delta: None,
                }
            }
            "radial_perturbation" => {
                let rest = rest.ok_or_else(|| missing(kind, "an inner body"))?;
                let (epsilon, inner) = match rest.split_once(':') {
                    Some((e, inner)) if e.trim().parse::<f64>().is_ok() => {
                        (e.trim().parse::<f64>().unwrap_or_default(), inner)
                    }
                    _ => (
                        defaults.epsilon.ok_or_else(|| missing(kind, "epsilon"))?,
                        rest,
                    ),
                };
                BodySpec::RadialPerturbation {
                    of: Box::new(Self::parse_with(inner, defaults)?),
                    epsilon,
                }
            }
            _ => return Err(unknown(kind)),
        })
    }

    /// Fills a missing ball dimension from `n`, recursively.
    pub fn with_default_n(self, n: usize) -> Self {
        match self {
            BodySpec::Ball { rho, n: None } => BodySpec::Ball { rho, n: Some(n) },
            BodySpec::HyperbolicTransform { of, delta } => BodySpec::HyperbolicTransform {
                of: Box::new(of.with_default_n(n)),
                delta,
            },
            BodySpec::RadialPerturbation { of, epsilon } => BodySpec::RadialPerturbation {
                of: Box::new(of.with_default_n(n)),
                epsilon,
            },
            other => other,
        }
    }

    /// Builds the body. Balls without an explicit dimension are rejected.
    pub fn build(&self) -> Result<StarBody> {
        match self {
            BodySpec::Ball { rho, n } => {
                let n = n.ok_or_else(|| missing("ball", "a complex dimension n"))?;
                StarBody::ball(*rho, n)
            }
            BodySpec::ComplexEllipsoid { axes } => StarBody::complex_ellipsoid(axes),
            BodySpec::RealEllipsoid { axes } => StarBody::real_ellipsoid(axes),
            BodySpec::CounterexampleK { a, b } => StarBody::counterexample_k(*a, *b),
            BodySpec::CounterexampleM { a, b } => StarBody::counterexample_m(*a, *b),
            BodySpec::HyperbolicTransform { of, delta } => {
                hyperbolic_transform_with_delta(&of.build()?, delta.unwrap_or(DEFAULT_CONTAINMENT_DELTA))
            }
            BodySpec::RadialPerturbation { of, epsilon } => {
                if !(*epsilon > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "perturbation epsilon must be positive, got {epsilon}"
                    )));
                }
                radial_perturbation(&of.build()?, *epsilon)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BodySpec::Ball { .. } => "ball",
            BodySpec::ComplexEllipsoid { .. } => "complex_ellipsoid",
            BodySpec::RealEllipsoid { .. } => "real_ellipsoid",
            BodySpec::CounterexampleK { .. } => "counterexample_K",
            BodySpec::CounterexampleM { .. } => "counterexample_M",
            BodySpec::HyperbolicTransform { .. } => "hyperbolic_transform",
            BodySpec::RadialPerturbation { .. } => "radial_perturbation",
        }
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            BodySpec::Ball { rho, .. } => write!(f, "ball:{rho}"),
            BodySpec::ComplexEllipsoid { axes } => write!(f, "complex_ellipsoid:{}", list(axes)),
            BodySpec::RealEllipsoid { axes } => write!(f, "real_ellipsoid:{}", list(axes)),
            BodySpec::CounterexampleK { a, b } => write!(f, "counterexample_K:{a},{b}"),
            BodySpec::CounterexampleM { a, b } => write!(f, "counterexample_M:{a},{b}"),
            BodySpec::HyperbolicTransform { of, .. } => write!(f, "hyperbolic_transform:{of}"),
            BodySpec::RadialPerturbation { of, epsilon } => {
                write!(f, "radial_perturbation:{epsilon}:{of}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_kinds() {
        assert_eq!(
            BodySpec::parse("ball:0.5").unwrap(),
            BodySpec::Ball { rho: 0.5, n: None }
        );
        assert_eq!(
            BodySpec::parse("counterexample-K:2,2").unwrap(),
            BodySpec::CounterexampleK { a: 2.0, b: 2.0 }
        );
        assert_eq!(
            BodySpec::parse("complex_ellipsoid:0.5,0.4").unwrap(),
            BodySpec::ComplexEllipsoid { axes: vec![0.5, 0.4] }
        );
    }

    #[test]
    fn parses_nested_kinds() {
        let spec = BodySpec::parse("radial-perturbation:0.01:hyperbolic-transform:ball:0.3").unwrap();
        let want = BodySpec::RadialPerturbation {
            of: Box::new(BodySpec::HyperbolicTransform {
                of: Box::new(BodySpec::Ball { rho: 0.3, n: None }),
                delta: None,
            }),
            epsilon: 0.01,
        };
        assert_eq!(spec, want);
        assert_eq!(BodySpec::parse(&spec.to_string()).unwrap(), spec);
    }

    #[test]
    fn defaults_fill_missing_parameters() {
        let d = SpecDefaults {
            n: Some(3),
            a: Some(2.0),
            b: Some(2.0),
            rho: Some(0.4),
            ..Default::default()
        };
        assert_eq!(
            BodySpec::parse_with("counterexample_K", &d).unwrap(),
            BodySpec::CounterexampleK { a: 2.0, b: 2.0 }
        );
        let ball = BodySpec::parse_with("ball", &d).unwrap().build().unwrap();
        assert_eq!(ball.n(), 3);
        assert!(BodySpec::parse("ball").is_err());
    }

    #[test]
    fn unknown_kind_names_valid_kinds() {
        let err = BodySpec::parse("cube:1").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cube") && msg.contains("counterexample_K"), "{msg}");
    }

    #[test]
    fn builds_bodies() {
        let m = BodySpec::parse("hyperbolic_transform:counterexample_K:2,2")
            .unwrap()
            .build()
            .unwrap();
        assert!((m.radial(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]) - 0.5).abs() < 1e-15);
        assert!(BodySpec::parse("radial_perturbation:0:ball:0.5")
            .unwrap()
            .with_default_n(2)
            .build()
            .is_err());
    }

    #[test]
    fn document_round_trip() {
        let spec = BodySpec::HyperbolicTransform {
            of: Box::new(BodySpec::Ball { rho: 0.5, n: Some(2) }),
            delta: Some(1e-4),
        };
        let text = toml::to_string(&spec).unwrap();
        let back: BodySpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let json: BodySpec =
            serde_json::from_str(r#"{"kind":"counterexample_K","a":2.0,"b":3.0}"#).unwrap();
        assert_eq!(json, BodySpec::CounterexampleK { a: 2.0, b: 3.0 });
    }
}
