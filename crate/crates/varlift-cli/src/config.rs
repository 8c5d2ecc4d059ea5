//! Config file schema and resolution into core objects.
//!
//! Every field is optional at the serde level; each command demands what it
//! needs so error messages can name the missing field.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use varlift_core::expr::{MetricField, SmoothMap};
use varlift_core::geometry::SubbundleUV;
use varlift_core::riccati::GeneratingFunction;
use varlift_core::sim::InputSignal;
use varlift_core::systems::ControlAffineSystem;
use varlift_core::{Domain, MatrixField, SampleSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SamplesConfig {
    Grid { per_axis: usize },
    Random { count: usize, seed: u64 },
}

impl SamplesConfig {
    pub fn to_spec(&self) -> SampleSpec {
        match *self {
            SamplesConfig::Grid { per_axis } => SampleSpec::Grid { per_axis },
            SamplesConfig::Random { count, seed } => SampleSpec::Random { count, seed },
        }
    }

    pub fn from_spec(spec: &SampleSpec) -> Self {
        match *spec {
            SampleSpec::Grid { per_axis } => SamplesConfig::Grid { per_axis },
            SampleSpec::Random { count, seed } => SamplesConfig::Random { count, seed },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InputConfig {
    /// Constant input vector.
    Constant(Vec<f64>),
    /// Left-continuous steps: `values[i]` holds from `times[i]`.
    Piecewise {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// Sampled table, same step semantics.
    Table {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl InputConfig {
    pub fn to_signal(&self) -> InputSignal {
        let rows = |vals: &[Vec<f64>]| {
            vals.iter()
                .map(|v| DVector::from_vec(v.clone()))
                .collect::<Vec<_>>()
        };
        match self {
            InputConfig::Constant(v) => InputSignal::Constant(DVector::from_vec(v.clone())),
            InputConfig::Piecewise { times, values } => InputSignal::PiecewiseConstant {
                times: times.clone(),
                values: rows(values),
            },
            InputConfig::Table { times, values } => InputSignal::SampledTable {
                times: times.clone(),
                values: rows(values),
            },
        }
    }
}

/// On-disk system description. Expressions use the `x1..xn` language.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
    /// Lower triangle of the symmetric matrix field, row i holding i+1
    /// expressions.
    #[serde(rename = "Pi", skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Vec<String>>>,
    /// Generating (value) function expression.
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p_fun: Option<String>,
    /// Full n-by-n grids parameterizing a subbundle as the span of
    /// [U; V] columns.
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    pub u_grid: Option<Vec<Vec<String>>>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub v_grid: Option<Vec<Vec<String>>>,
    /// Section expressions for eigen-section sweeps.
    #[serde(rename = "X", skip_serializing_if = "Option::is_none")]
    pub section: Option<Vec<String>>,
    /// Per-dimension [lo, hi] sampling bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<SamplesConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
    /// Explicit linear system, used by solve-lqr instead of expressions.
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
}

fn missing(field: &str) -> CliError {
    CliError::MissingField(field.to_string())
}

pub fn to_dmatrix(rows: &[Vec<f64>], field: &str) -> CliResult<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(CliError::Usage(format!("config field `{field}` is empty")));
    }
    let cols = rows[0].len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Usage(format!(
            "config field `{field}` must be rectangular"
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

impl SystemConfig {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn n(&self) -> CliResult<usize> {
        self.n.ok_or_else(|| missing("n"))
    }

    pub fn system(&self) -> CliResult<ControlAffineSystem> {
        let n = self.n()?;
        let m = self.m.ok_or_else(|| missing("m"))?;
        let f = self.f.as_ref().ok_or_else(|| missing("f"))?;
        if f.len() != n {
            return Err(CliError::Usage(format!(
                "config field `f` has {} entries, expected n = {n}",
                f.len()
            )));
        }
        let g = self.g.clone().unwrap_or_default();
        if g.len() != m {
            return Err(CliError::Usage(format!(
                "config field `g` has {} columns, expected m = {m}",
                g.len()
            )));
        }
        let h = self.h.clone().unwrap_or_default();
        let f_refs: Vec<&str> = f.iter().map(|s| s.as_str()).collect();
        let h_refs: Vec<&str> = h.iter().map(|s| s.as_str()).collect();
        Ok(ControlAffineSystem::parse(&f_refs, &g, &h_refs)?)
    }

    /// The drift f alone, for eigen-section sweeps.
    pub fn drift(&self) -> CliResult<SmoothMap> {
        let n = self.n()?;
        let f = self.f.as_ref().ok_or_else(|| missing("f"))?;
        let refs: Vec<&str> = f.iter().map(|s| s.as_str()).collect();
        Ok(SmoothMap::parse(&refs, n)?)
    }

    pub fn metric(&self) -> CliResult<MetricField> {
        let n = self.n()?;
        let pi = self.pi.as_ref().ok_or_else(|| missing("Pi"))?;
        Ok(MetricField::parse(pi, n)?)
    }

    pub fn generating(&self) -> CliResult<GeneratingFunction> {
        let n = self.n()?;
        let p = self.p_fun.as_ref().ok_or_else(|| missing("P"))?;
        Ok(GeneratingFunction::parse(p, n)?)
    }

    pub fn subbundle(&self) -> CliResult<SubbundleUV> {
        let n = self.n()?;
        let u = self.u_grid.as_ref().ok_or_else(|| missing("U"))?;
        let v = self.v_grid.as_ref().ok_or_else(|| missing("V"))?;
        Ok(SubbundleUV::new(
            MatrixField::parse(u, n)?,
            MatrixField::parse(v, n)?,
        )?)
    }

    pub fn section_map(&self) -> CliResult<SmoothMap> {
        let n = self.n()?;
        let x = self.section.as_ref().ok_or_else(|| missing("X"))?;
        let refs: Vec<&str> = x.iter().map(|s| s.as_str()).collect();
        Ok(SmoothMap::parse(&refs, n)?)
    }

    pub fn domain(&self) -> CliResult<Domain> {
        let d = self.domain.as_ref().ok_or_else(|| missing("domain"))?;
        let lo = d.iter().map(|b| b[0]).collect();
        let hi = d.iter().map(|b| b[1]).collect();
        Ok(Domain::new(lo, hi)?)
    }

    pub fn vector(&self, name: &str) -> CliResult<DVector<f64>> {
        let v = match name {
            "x0" => &self.x0,
            "dx0" => &self.dx0,
            "p0" => &self.p0,
            _ => &None,
        };
        v.as_ref()
            .map(|v| DVector::from_vec(v.clone()))
            .ok_or_else(|| missing(name))
    }

    pub fn input_signal(&self, fallback_dim: usize) -> InputSignal {
        match &self.input {
            Some(cfg) => cfg.to_signal(),
            None => InputSignal::zero(fallback_dim),
        }
    }
}

/// Final sampling spec: CLI flags beat the config, `--seed` rewrites the seed
/// of whichever random spec wins.
pub fn resolve_samples(
    cfg: &SystemConfig,
    grid: Option<usize>,
    random: Option<usize>,
    seed: Option<u64>,
) -> SampleSpec {
    let base = if let Some(k) = grid {
        SampleSpec::Grid { per_axis: k }
    } else if let Some(count) = random {
        SampleSpec::Random {
            count,
            seed: seed.unwrap_or(0),
        }
    } else {
        match &cfg.samples {
            Some(s) => s.to_spec(),
            None => SampleSpec::Random { count: 64, seed: 0 },
        }
    };
    match (base, seed) {
        (SampleSpec::Random { count, .. }, Some(s)) => SampleSpec::Random { count, seed: s },
        (spec, _) => spec,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_roundtrip() {
        let text = r#"{
            "n": 2, "m": 1,
            "f": ["x2", "0"], "g": [["0", "1"]], "h": ["x1"],
            "domain": [[-1.0, 1.0], [-1.0, 1.0]],
            "samples": {"random": {"count": 8, "seed": 3}}
        }"#;
        let cfg: SystemConfig = serde_json::from_str(text).unwrap();
        let sys = cfg.system().unwrap();
        assert_eq!(sys.dim(), 2);
        assert_eq!(sys.m_in(), 1);
        assert_eq!(cfg.domain().unwrap().dim(), 2);
        let again: SystemConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn missing_fields_are_named() {
        let cfg: SystemConfig = serde_json::from_str(r#"{"n": 1}"#).unwrap();
        match cfg.metric() {
            Err(CliError::MissingField(f)) => assert_eq!(f, "Pi"),
            other => panic!("unexpected {other:?}"),
        }
        match cfg.system() {
            Err(CliError::MissingField(f)) => assert_eq!(f, "m"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<SystemConfig>(r#"{"pi": []}"#).is_err());
    }

    #[test]
    fn sample_resolution_precedence() {
        let cfg: SystemConfig =
            serde_json::from_str(r#"{"samples": {"random": {"count": 10, "seed": 5}}}"#).unwrap();
        assert_eq!(
            resolve_samples(&cfg, None, None, None),
            SampleSpec::Random { count: 10, seed: 5 }
        );
        assert_eq!(
            resolve_samples(&cfg, None, None, Some(9)),
            SampleSpec::Random { count: 10, seed: 9 }
        );
        assert_eq!(
            resolve_samples(&cfg, Some(4), None, None),
            SampleSpec::Grid { per_axis: 4 }
        );
        assert_eq!(
            resolve_samples(&cfg, None, Some(20), Some(1)),
            SampleSpec::Random { count: 20, seed: 1 }
        );
    }
}
