//! Sampling boxes, deterministic point generation, and residual reports.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned sampling box with per-dimension bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Dimension {
                what: "domain bounds".into(),
                expected: lo.len().max(1),
                got: hi.len(),
            });
        }
        for (i, (&a, &b)) in lo.iter().zip(hi.iter()).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Invalid(format!(
                    "degenerate domain on axis {}: [{a}, {b}]",
                    i + 1
                )));
            }
        }
        Ok(Domain { lo, hi })
    }

    /// The same interval on every axis.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Domain::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// How to place sample points inside a [`Domain`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SampleSpec {
    /// `per_axis` evenly spaced points per dimension (endpoints included),
    /// full cartesian product.
    Grid { per_axis: usize },
    /// `count` points drawn uniformly, reproducible from `seed`.
    Random { count: usize, seed: u64 },
}

impl SampleSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            SampleSpec::Grid { .. } => None,
            SampleSpec::Random { seed, .. } => Some(*seed),
        }
    }
}

/// Deterministic sample points; ordering is part of the report contract.
pub fn sample_points(domain: &Domain, spec: &SampleSpec) -> Result<Vec<DVector<f64>>> {
    let n = domain.dim();
    match *spec {
        SampleSpec::Grid { per_axis } => {
            if per_axis == 0 {
                return Err(Error::EmptySamples);
            }
            let total = per_axis.pow(n as u32);
            let mut pts = Vec::with_capacity(total);
            let mut idx = vec![0usize; n];
            loop {
                let p = DVector::from_fn(n, |a, _| {
                    let (lo, hi) = (domain.lo[a], domain.hi[a]);
                    if per_axis == 1 {
                        (lo + hi) * 0.5
                    } else {
                        lo + (hi - lo) * idx[a] as f64 / (per_axis - 1) as f64
                    }
                });
                pts.push(p);
                // Odometer increment, last axis fastest.
                let mut a = n;
                loop {
                    if a == 0 {
                        return Ok(pts);
                    }
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < per_axis {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
        SampleSpec::Random { count, seed } => {
            if count == 0 {
                return Err(Error::EmptySamples);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pts = Vec::with_capacity(count);
            for _ in 0..count {
                let p = DVector::from_iterator(
                    n,
                    (0..n).map(|a| {
                        let r: f64 = rng.random();
                        domain.lo[a] + r * (domain.hi[a] - domain.lo[a])
                    }),
                );
                pts.push(p);
            }
            Ok(pts)
        }
    }
}

/// One sampled point with its residual (and the eigen-quotient estimate for
/// eigen-section checks).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub point: Vec<f64>,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl SampleRecord {
    pub fn new(point: &DVector<f64>, residual: f64) -> Self {
        SampleRecord {
            point: point.as_slice().to_vec(),
            residual,
            gamma: None,
        }
    }

    pub fn with_gamma(point: &DVector<f64>, residual: f64, gamma: f64) -> Self {
        SampleRecord {
            point: point.as_slice().to_vec(),
            residual,
            gamma: Some(gamma),
        }
    }
}

/// Pointwise residual sweep result. `pass` holds exactly when
/// `max_residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub check: String,
    pub tolerance: f64,
    pub pass: bool,
    pub max_residual: f64,
    pub argmax_point: Vec<f64>,
    pub seed: Option<u64>,
    pub records: Vec<SampleRecord>,
}

impl ResidualReport {
    pub fn from_records(
        check: &str,
        tolerance: f64,
        seed: Option<u64>,
        records: Vec<SampleRecord>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut max_residual = f64::NEG_INFINITY;
        let mut argmax = 0usize;
        for (i, r) in records.iter().enumerate() {
            if r.residual.is_nan() {
                return Err(Error::NonFinite {
                    component: format!("{check} residual at sample {i}"),
                });
            }
            if r.residual > max_residual {
                max_residual = r.residual;
                argmax = i;
            }
        }
        Ok(ResidualReport {
            check: check.to_string(),
            tolerance,
            pass: max_residual <= tolerance,
            max_residual,
            argmax_point: records[argmax].point.clone(),
            seed,
            records,
        })
    }
}
