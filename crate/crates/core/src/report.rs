//! Named residual fields and their sampled summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{Point, ScalarField};
use crate::sampling::{group_stats, sample_values, Sampling};

/// Summary of one residual over a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub sup: f64,
    pub mean: f64,
    pub argmax: Point,
    pub tol: f64,
    pub pass: bool,
}

/// Ordered collection of named residuals. A residual may be a group of
/// component fields (for example the three components of a 2-form); its
/// summary is taken over `max_k |f_k|`.
#[derive(Debug, Clone, Default)]
pub struct ResidualSet {
    entries: Vec<(String, Vec<ScalarField>)>,
}

impl ResidualSet {
    pub fn new() -> Self {
        ResidualSet::default()
    }

    pub fn push(&mut self, name: impl Into<String>, field: ScalarField) -> &mut Self {
        self.entries.push((name.into(), vec![field]));
        self
    }

    pub fn push_group(&mut self, name: impl Into<String>, fields: Vec<ScalarField>) -> &mut Self {
        self.entries.push((name.into(), fields));
        self
    }

    pub fn extend(&mut self, other: ResidualSet) -> &mut Self {
        self.entries.extend(other.entries);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[ScalarField]> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f.as_slice())
    }

    /// The single field stored under `name`; panics for groups.
    pub fn field(&self, name: &str) -> Option<&ScalarField> {
        self.get(name).map(|g| {
            assert_eq!(g.len(), 1, "residual `{name}` is a group");
            &g[0]
        })
    }

    pub fn evaluate(&self, sampling: &Sampling) -> Result<ResidualTable> {
        let mut out = BTreeMap::new();
        for (name, fields) in &self.entries {
            let s = group_stats(fields, &sampling.points)?;
            out.insert(
                name.clone(),
                CheckResult {
                    sup: s.sup,
                    mean: s.mean,
                    argmax: s.argmax,
                    tol: sampling.tol,
                    pass: s.sup <= sampling.tol,
                },
            );
        }
        Ok(ResidualTable(out))
    }
}

/// Evaluated residuals keyed by name (stable ordering).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResidualTable(pub BTreeMap<String, CheckResult>);

impl ResidualTable {
    pub fn pass(&self) -> bool {
        self.0.values().all(|c| c.pass)
    }

    pub fn sup(&self, name: &str) -> f64 {
        self.0
            .get(name)
            .unwrap_or_else(|| panic!("no residual named `{name}`"))
            .sup
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.0.get(name)
    }

    pub fn max_sup(&self) -> f64 {
        self.0.values().map(|c| c.sup).fold(0.0, f64::max)
    }

    pub fn merge(&mut self, other: ResidualTable) {
        self.0.extend(other.0);
    }
}

/// Verification outcome for a Cartan or generalized Finsler structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub kind: String,
    pub tol: f64,
    pub pass: bool,
    pub residuals: ResidualTable,
    /// Points at which `functions` are sampled.
    pub sample_points: Vec<Point>,
    pub functions: BTreeMap<String, Vec<f64>>,
}

/// How many points of the sample set are echoed in reports.
pub const REPORT_SAMPLES: usize = 8;

impl StructureReport {
    pub fn build(
        kind: &str,
        residuals: &ResidualSet,
        functions: &[(&str, &ScalarField)],
        sampling: &Sampling,
    ) -> Result<Self> {
        let table = residuals.evaluate(sampling)?;
        let stride = (sampling.points.len() / REPORT_SAMPLES).max(1);
        let sample_points: Vec<Point> = sampling
            .points
            .iter()
            .step_by(stride)
            .take(REPORT_SAMPLES)
            .copied()
            .collect();
        let mut sampled = BTreeMap::new();
        for (name, f) in functions {
            sampled.insert(name.to_string(), sample_values(f, &sample_points)?);
        }
        Ok(StructureReport {
            kind: kind.to_string(),
            tol: sampling.tol,
            pass: table.pass(),
            residuals: table,
            sample_points,
            functions: sampled,
        })
    }
}
