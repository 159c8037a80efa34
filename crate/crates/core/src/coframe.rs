//! Coframes on a single chart: volume, dual frame, directional derivatives
//! and expansion of forms in the coframe basis.
//!
//! With coframe rows `a1, a2, a3` (components on `dc1, dc2, dc3`) and
//! `det = a1·(a2×a3)`, the dual frame is `ê_i = (a_j×a_k)/det` for cyclic
//! `(i, j, k)`. All quantities are built symbolically from this adjugate, so
//! derivatives of derivatives stay exact.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Chart, Point, ScalarField};
use crate::forms::{KForm, VectorField};
use crate::sampling::{sample_values, SampleBox};

/// Points where `|det|` falls below this are reported as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Coefficients `(f1, f2, f3)` of `df = f1·a1 + f2·a2 + f3·a3`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoframeDerivatives {
    pub f1: ScalarField,
    pub f2: ScalarField,
    pub f3: ScalarField,
}

impl CoframeDerivatives {
    pub fn get(&self, i: usize) -> &ScalarField {
        match i {
            0 => &self.f1,
            1 => &self.f2,
            2 => &self.f3,
            _ => panic!("coframe index {i} out of range"),
        }
    }

    pub fn as_array(&self) -> [ScalarField; 3] {
        [self.f1.clone(), self.f2.clone(), self.f3.clone()]
    }
}

struct CoframeInner {
    rows: [[ScalarField; 3]; 3],
    domain: SampleBox,
    det: ScalarField,
    /// `cof[i] = a_j × a_k`
    cof: [[ScalarField; 3]; 3],
    derivatives: Mutex<HashMap<Expr, [ScalarField; 3]>>,
}

/// An ordered triple of 1-forms on one chart, with a sample box.
#[derive(Clone)]
pub struct Coframe(Arc<CoframeInner>);

fn cross(u: &[ScalarField; 3], v: &[ScalarField; 3]) -> [ScalarField; 3] {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn dot(u: &[ScalarField; 3], v: &[ScalarField; 3]) -> ScalarField {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

impl Coframe {
    /// Build from the coordinate components of `a1, a2, a3`.
    pub fn new(rows: [[ScalarField; 3]; 3], domain: SampleBox) -> Self {
        let cof = [
            cross(&rows[1], &rows[2]),
            cross(&rows[2], &rows[0]),
            cross(&rows[0], &rows[1]),
        ];
        let det = dot(&rows[0], &cof[0]);
        Coframe(Arc::new(CoframeInner {
            rows,
            domain,
            det,
            cof,
            derivatives: Mutex::new(HashMap::new()),
        }))
    }

    /// Build from three 1-forms.
    pub fn from_forms(forms: [&KForm; 3], domain: SampleBox) -> Result<Self> {
        let mut rows = Vec::with_capacity(3);
        for f in forms {
            match f {
                KForm::One(c) => rows.push(c.clone()),
                other => {
                    return Err(Error::Precondition(format!(
                        "coframe entries must be 1-forms, got a {}-form",
                        other.degree()
                    )))
                }
            }
        }
        let rows: [[ScalarField; 3]; 3] = rows.try_into().expect("three rows");
        Ok(Coframe::new(rows, domain))
    }

    /// The standard coframe `(dc1, dc2, dc3)`.
    pub fn standard(chart: Chart, domain: SampleBox) -> Self {
        let z = || ScalarField::zero(chart);
        let o = || ScalarField::one(chart);
        Coframe::new([[o(), z(), z()], [z(), o(), z()], [z(), z(), o()]], domain)
    }

    /// The coframe `ω = A·base`, i.e. `ω^i = Σ_j a_ij base^j`.
    pub fn transformed(base: &Coframe, a: &[[ScalarField; 3]; 3]) -> Self {
        let b = base.rows();
        let rows = std::array::from_fn(|i| {
            std::array::from_fn(|c| &(&a[i][0] * &b[0][c]) + &(&a[i][1] * &b[1][c]) + &a[i][2] * &b[2][c])
        });
        Coframe::new(rows, *base.domain())
    }

    pub fn rows(&self) -> &[[ScalarField; 3]; 3] {
        &self.0.rows
    }

    pub fn form(&self, i: usize) -> KForm {
        KForm::One(self.0.rows[i].clone())
    }

    pub fn forms(&self) -> [KForm; 3] {
        [self.form(0), self.form(1), self.form(2)]
    }

    pub fn domain(&self) -> &SampleBox {
        &self.0.domain
    }

    pub fn with_domain(&self, domain: SampleBox) -> Self {
        Coframe::new(self.0.rows.clone(), domain)
    }

    pub fn chart(&self) -> Chart {
        self.0.det.chart()
    }

    /// `det` of the component matrix: `a1∧a2∧a3 = det · dc1∧dc2∧dc3`.
    pub fn volume_coefficient(&self) -> ScalarField {
        self.0.det.clone()
    }

    /// Dual frame vector `ê_i` (components on `∂1, ∂2, ∂3`).
    pub fn dual_vector(&self, i: usize) -> VectorField {
        let c = &self.0.cof[i];
        let d = &self.0.det;
        [&c[0] / d, &c[1] / d, &c[2] / d]
    }

    /// Fail with [`Error::Singular`] at the first point where `|det| < 1e-12`.
    pub fn check_nonsingular(&self, points: &[Point]) -> Result<()> {
        let values = sample_values(&self.0.det, points)?;
        for (p, d) in points.iter().zip(values) {
            if d.abs() < SINGULAR_DET {
                return Err(Error::Singular { point: *p, det: d });
            }
        }
        Ok(())
    }

    /// Directional derivatives `f_i = ê_i(f)`; memoised per coframe.
    pub fn derivatives(&self, f: &ScalarField) -> CoframeDerivatives {
        let key = f.expr().clone();
        if let Some(hit) = self.0.derivatives.lock().expect("cache lock").get(&key) {
            return CoframeDerivatives {
                f1: hit[0].clone(),
                f2: hit[1].clone(),
                f3: hit[2].clone(),
            };
        }
        let grad = f.gradient();
        let d = &self.0.det;
        let out: [ScalarField; 3] = std::array::from_fn(|i| dot(&self.0.cof[i], &grad) / d);
        self.0
            .derivatives
            .lock()
            .expect("cache lock")
            .insert(key, out.clone());
        let [f1, f2, f3] = out;
        CoframeDerivatives { f1, f2, f3 }
    }

    /// Single directional derivative `f_{i}` with zero-based `i`.
    pub fn d(&self, f: &ScalarField, i: usize) -> ScalarField {
        self.derivatives(f).get(i).clone()
    }

    /// Iterated derivative: `f_{ij...}` means differentiate along `i` first.
    pub fn d_seq(&self, f: &ScalarField, seq: &[usize]) -> ScalarField {
        seq.iter().fold(f.clone(), |g, &i| self.d(&g, i))
    }

    /// Coefficients `u_i` with `u = Σ u_i a_i`.
    pub fn expand_one_form(&self, u: &KForm) -> Result<[ScalarField; 3]> {
        match u {
            KForm::One(c) => {
                let d = &self.0.det;
                Ok(std::array::from_fn(|i| dot(&self.0.cof[i], c) / d))
            }
            other => Err(Error::Precondition(format!(
                "expected a 1-form, got a {}-form",
                other.degree()
            ))),
        }
    }

    /// Coefficients `(c23, c31, c12)` with
    /// `w = c23·a2∧a3 + c31·a3∧a1 + c12·a1∧a2`.
    pub fn expand_two_form(&self, w: &KForm) -> Result<[ScalarField; 3]> {
        match w {
            KForm::Two(c) => {
                let d = &self.0.det;
                Ok(std::array::from_fn(|k| dot(&self.0.rows[k], c) / d))
            }
            other => Err(Error::Precondition(format!(
                "expected a 2-form, got a {}-form",
                other.degree()
            ))),
        }
    }

    /// Coefficient `c` with `v = c·a1∧a2∧a3`.
    pub fn expand_three_form(&self, v: &KForm) -> Result<ScalarField> {
        match v {
            KForm::Three(c) => Ok(c / &self.0.det),
            other => Err(Error::Precondition(format!(
                "expected a 3-form, got a {}-form",
                other.degree()
            ))),
        }
    }

    /// Recombine coframe coefficients into a 1-form.
    pub fn combine_one_form(&self, coeffs: &[ScalarField; 3]) -> KForm {
        let r = &self.0.rows;
        KForm::One(std::array::from_fn(|c| {
            &(&coeffs[0] * &r[0][c]) + &(&coeffs[1] * &r[1][c]) + &coeffs[2] * &r[2][c]
        }))
    }

    /// Recombine cyclic coefficients `(c23, c31, c12)` into a 2-form.
    pub fn combine_two_form(&self, coeffs: &[ScalarField; 3]) -> KForm {
        let cof = &self.0.cof;
        KForm::Two(std::array::from_fn(|c| {
            &(&coeffs[0] * &cof[0][c]) + &(&coeffs[1] * &cof[1][c]) + &coeffs[2] * &cof[2][c]
        }))
    }

    /// Numeric component matrix at a point (rows are the forms).
    pub fn matrix_at(&self, p: Point) -> Result<Matrix3<f64>> {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self.0.rows[i][j].eval(p)?;
            }
        }
        Ok(m)
    }

    /// `(f1, f2, f3)` at one point by a pivoted LU solve of `Mᵀ x = ∇f`.
    /// Independent of the symbolic adjugate path; used as a cross-check.
    pub fn derivatives_at_numeric(&self, f: &ScalarField, p: Point) -> Result<[f64; 3]> {
        let m = self.matrix_at(p)?;
        let det = m.determinant();
        if det.abs() < SINGULAR_DET {
            return Err(Error::Singular { point: p, det });
        }
        let g = f.gradient();
        let rhs = Vector3::new(g[0].eval(p)?, g[1].eval(p)?, g[2].eval(p)?);
        let x = m
            .transpose()
            .lu()
            .solve(&rhs)
            .ok_or(Error::Singular { point: p, det })?;
        Ok([x[0], x[1], x[2]])
    }
}

impl std::fmt::Debug for Coframe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Coframe")
            .field("rows", &self.0.rows)
            .field("domain", &self.0.domain)
            .finish()
    }
}

/// Free-function form of [`Coframe::volume_coefficient`].
pub fn volume_coefficient(cf: &Coframe) -> ScalarField {
    cf.volume_coefficient()
}

/// Free-function form of [`Coframe::derivatives`].
pub fn coframe_derivatives(f: &ScalarField, cf: &Coframe) -> CoframeDerivatives {
    cf.derivatives(f)
}

/// Free-function form of [`Coframe::expand_two_form`].
pub fn expand_two_form(w: &KForm, cf: &Coframe) -> Result<[ScalarField; 3]> {
    cf.expand_two_form(w)
}
