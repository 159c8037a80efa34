//! Sample points and sup-norm statistics over a box in chart coordinates.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::EvalError;
use crate::field::{Point, ScalarField};

/// Axis-aligned box `lo ≤ c ≤ hi` in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Point,
    pub hi: Point,
}

impl SampleBox {
    pub fn new(lo: Point, hi: Point) -> Self {
        SampleBox { lo, hi }
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| self.lo[i].is_finite() && self.hi[i].is_finite() && self.lo[i] <= self.hi[i])
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..3).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }

    /// `n` points per axis including both endpoints (`n ≥ 2`).
    pub fn grid(&self, n: usize) -> Vec<Point> {
        assert!(n >= 2, "grid needs at least two points per axis");
        let at = |axis: usize, k: usize| {
            let t = k as f64 / (n - 1) as f64;
            self.lo[axis] + t * (self.hi[axis] - self.lo[axis])
        };
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push([at(0, i), at(1, j), at(2, k)]);
                }
            }
        }
        out
    }

    /// Uniform random points drawn from a seeded generator.
    pub fn random(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut p = [0.0; 3];
                for (i, c) in p.iter_mut().enumerate() {
                    *c = if self.hi[i] > self.lo[i] {
                        rng.gen_range(self.lo[i]..=self.hi[i])
                    } else {
                        self.lo[i]
                    };
                }
                p
            })
            .collect()
    }
}

/// Evaluation points together with the tolerance applied to sup residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub points: Vec<Point>,
    pub tol: f64,
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 10;

impl Sampling {
    pub fn new(points: Vec<Point>, tol: f64) -> Self {
        Sampling { points, tol }
    }

    pub fn grid(domain: &SampleBox, n: usize, tol: f64) -> Self {
        Sampling::new(domain.grid(n), tol)
    }

    pub fn random(domain: &SampleBox, count: usize, seed: u64, tol: f64) -> Self {
        Sampling::new(domain.random(count, seed), tol)
    }

    /// The default 10×10×10 grid at tolerance 1e-8.
    pub fn default_for(domain: &SampleBox) -> Self {
        Sampling::grid(domain, DEFAULT_GRID, DEFAULT_TOL)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Sup and mean of `|f|` over a point set, with the point attaining the sup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub sup: f64,
    pub mean: f64,
    pub argmax: Point,
}

impl FieldStats {
    pub fn zero() -> Self {
        FieldStats {
            sup: 0.0,
            mean: 0.0,
            argmax: [0.0; 3],
        }
    }

    fn from_values(points: &[Point], values: &[f64]) -> Self {
        let mut best = FieldStats::zero();
        let mut total = 0.0;
        for (p, v) in points.iter().zip(values) {
            let a = v.abs();
            total += a;
            if a > best.sup {
                best.sup = a;
                best.argmax = *p;
            }
        }
        if !points.is_empty() {
            best.mean = total / points.len() as f64;
        }
        best
    }

    /// Combine stats taken over the same points (max of sups; max of means).
    pub fn merge(self, other: FieldStats) -> FieldStats {
        let (sup, argmax) = if other.sup > self.sup {
            (other.sup, other.argmax)
        } else {
            (self.sup, self.argmax)
        };
        FieldStats {
            sup,
            mean: self.mean.max(other.mean),
            argmax,
        }
    }
}

/// Evaluate `f` at every point, in parallel, failing on the first domain error.
pub fn sample_values(f: &ScalarField, points: &[Point]) -> Result<Vec<f64>, EvalError> {
    let tape = f.tape();
    points
        .par_iter()
        .map_init(Vec::new, |buf, p| tape.eval_with(*p, buf))
        .collect()
}

pub fn field_stats(f: &ScalarField, points: &[Point]) -> Result<FieldStats, EvalError> {
    if let Some(c) = f.as_const() {
        let mut s = FieldStats::zero();
        if !points.is_empty() {
            s.sup = c.abs();
            s.mean = c.abs();
            s.argmax = points[0];
        }
        return Ok(s);
    }
    let values = sample_values(f, points)?;
    Ok(FieldStats::from_values(points, &values))
}

/// Stats of `max_k |f_k|` over a group of component fields.
pub fn group_stats(fields: &[ScalarField], points: &[Point]) -> Result<FieldStats, EvalError> {
    let mut acc = vec![0.0f64; points.len()];
    for f in fields {
        let values = sample_values(f, points)?;
        for (a, v) in acc.iter_mut().zip(values) {
            *a = a.max(v.abs());
        }
    }
    Ok(FieldStats::from_values(points, &acc))
}

/// Fail with a precondition error at the first point where `v ≤ 0`.
pub fn require_positive(v: &ScalarField, sampling: &Sampling, what: &str) -> crate::Result<()> {
    let values = sample_values(v, &sampling.points)?;
    for (p, x) in sampling.points.iter().zip(values) {
        if x <= 0.0 {
            return Err(crate::Error::Precondition(format!("{what} = {x} ≤ 0 at {p:?}")));
        }
    }
    Ok(())
}

/// Fail with a precondition error at the first point where `|v| < 1e-12`.
pub fn require_nonvanishing(v: &ScalarField, sampling: &Sampling, what: &str) -> crate::Result<()> {
    let values = sample_values(v, &sampling.points)?;
    for (p, x) in sampling.points.iter().zip(values) {
        if x.abs() < 1e-12 {
            return Err(crate::Error::Precondition(format!("{what} = {x} vanishes at {p:?}")));
        }
    }
    Ok(())
}
