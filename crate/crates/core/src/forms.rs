//! Exterior algebra of forms of degree 0..=3 on a three-dimensional chart.
//!
//! One-forms store components on `(dc1, dc2, dc3)`. Two-forms use the cyclic
//! basis `(dc2∧dc3, dc3∧dc1, dc1∧dc2)`, which makes the wedge of two
//! one-forms a cross product and `d` on one-forms a curl. Three-forms store
//! the coefficient of `dc1∧dc2∧dc3`.

use thiserror::Error;

use crate::field::{Chart, Point, ScalarField};
use crate::expr::EvalError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("wedge of a {0}-form and a {1}-form exceeds degree 3")]
    DegreeOverflow(usize, usize),
    /// `d` of a 3-form is the zero 4-form, which has no representation on a
    /// three-dimensional chart.
    #[error("exterior derivative of a 3-form vanishes identically (no 4-forms on a 3-chart)")]
    TopDegree,
    #[error("cannot combine a {0}-form with a {1}-form")]
    DegreeMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KForm {
    Zero(ScalarField),
    One([ScalarField; 3]),
    Two([ScalarField; 3]),
    Three(ScalarField),
}

/// A vector field given by its components on `(∂1, ∂2, ∂3)`.
pub type VectorField = [ScalarField; 3];

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

fn scale(c: &ScalarField, v: &[ScalarField; 3]) -> [ScalarField; 3] {
    [c * &v[0], c * &v[1], c * &v[2]]
}

impl KForm {
    pub fn one_form(components: [ScalarField; 3]) -> Self {
        KForm::One(components)
    }

    /// The coordinate differential `dc{axis+1}`.
    pub fn coordinate_differential(axis: usize, chart: Chart) -> Self {
        let mut c = [
            ScalarField::zero(chart),
            ScalarField::zero(chart),
            ScalarField::zero(chart),
        ];
        c[axis] = ScalarField::one(chart);
        KForm::One(c)
    }

    pub fn zero_of_degree(degree: usize, chart: Chart) -> Self {
        let z = || ScalarField::zero(chart);
        match degree {
            0 => KForm::Zero(z()),
            1 => KForm::One([z(), z(), z()]),
            2 => KForm::Two([z(), z(), z()]),
            3 => KForm::Three(z()),
            _ => panic!("no {degree}-forms on a 3-chart"),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            KForm::Zero(_) => 0,
            KForm::One(_) => 1,
            KForm::Two(_) => 2,
            KForm::Three(_) => 3,
        }
    }

    pub fn components(&self) -> &[ScalarField] {
        match self {
            KForm::Zero(f) | KForm::Three(f) => std::slice::from_ref(f),
            KForm::One(c) | KForm::Two(c) => c,
        }
    }

    pub fn chart(&self) -> Chart {
        self.components()[0].chart()
    }

    pub fn eval(&self, p: Point) -> Result<Vec<f64>, EvalError> {
        self.components().iter().map(|c| c.eval(p)).collect()
    }

    fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> KForm {
        match self {
            KForm::Zero(a) => KForm::Zero(f(a)),
            KForm::One(c) => KForm::One([f(&c[0]), f(&c[1]), f(&c[2])]),
            KForm::Two(c) => KForm::Two([f(&c[0]), f(&c[1]), f(&c[2])]),
            KForm::Three(a) => KForm::Three(f(a)),
        }
    }

    fn zip(&self, other: &KForm, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Result<KForm, FormError> {
        Ok(match (self, other) {
            (KForm::Zero(a), KForm::Zero(b)) => KForm::Zero(f(a, b)),
            (KForm::One(a), KForm::One(b)) => KForm::One([f(&a[0], &b[0]), f(&a[1], &b[1]), f(&a[2], &b[2])]),
            (KForm::Two(a), KForm::Two(b)) => KForm::Two([f(&a[0], &b[0]), f(&a[1], &b[1]), f(&a[2], &b[2])]),
            (KForm::Three(a), KForm::Three(b)) => KForm::Three(f(a, b)),
            _ => return Err(FormError::DegreeMismatch(self.degree(), other.degree())),
        })
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, FormError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm, FormError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, f: &ScalarField) -> KForm {
        self.map(|c| f * c)
    }

    pub fn neg(&self) -> KForm {
        self.map(|c| -c)
    }

    /// Graded-anticommutative wedge product.
    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormError> {
        Ok(match (self, other) {
            (KForm::Zero(f), b) => b.scale(f),
            (a, KForm::Zero(g)) => a.scale(g),
            (KForm::One(u), KForm::One(v)) => KForm::Two(cross(u, v)),
            (KForm::One(u), KForm::Two(w)) | (KForm::Two(w), KForm::One(u)) => KForm::Three(dot(u, w)),
            (a, b) => return Err(FormError::DegreeOverflow(a.degree(), b.degree())),
        })
    }

    /// Exterior derivative; `Err(FormError::TopDegree)` signals the zero
    /// 4-form when applied to a 3-form.
    pub fn exterior_derivative(&self) -> Result<KForm, FormError> {
        Ok(match self {
            KForm::Zero(f) => KForm::One(f.gradient()),
            KForm::One(u) => KForm::Two([
                u[2].partial(1) - u[1].partial(2),
                u[0].partial(2) - u[2].partial(0),
                u[1].partial(0) - u[0].partial(1),
            ]),
            KForm::Two(w) => KForm::Three(w[0].partial(0) + w[1].partial(1) + w[2].partial(2)),
            KForm::Three(_) => return Err(FormError::TopDegree),
        })
    }

    /// Interior product `i_X`; zero for functions.
    pub fn interior(&self, x: &VectorField) -> KForm {
        match self {
            KForm::Zero(f) => KForm::Zero(ScalarField::zero(f.chart())),
            KForm::One(u) => KForm::Zero(dot(x, u)),
            KForm::Two(w) => KForm::One(cross(w, x)),
            KForm::Three(f) => KForm::Two(scale(f, x)),
        }
    }

    /// Lie derivative along `x` by Cartan's formula `L_X = i_X d + d i_X`.
    pub fn lie_derivative(&self, x: &VectorField) -> KForm {
        let from_d = match self.exterior_derivative() {
            Ok(da) => da.interior(x),
            Err(_) => KForm::zero_of_degree(3, self.chart()),
        };
        match self {
            KForm::Zero(_) => from_d,
            _ => {
                let d_i = self
                    .interior(x)
                    .exterior_derivative()
                    .expect("interior product lowers degree below 3");
                from_d.add(&d_i).expect("both terms share the degree")
            }
        }
    }
}

/// Reorder cyclic two-form coefficients `(c23, c31, c12)` into the
/// lexicographic layout `(c12, c13, c23)` used when expanding in
/// `a1∧a2, a1∧a3, a2∧a3`. Only `c13 = -c31` changes sign.
pub fn cyclic_to_lexicographic(cyclic: &[ScalarField; 3]) -> [ScalarField; 3] {
    [cyclic[2].clone(), -&cyclic[1], cyclic[0].clone()]
}

/// Inverse of [`cyclic_to_lexicographic`].
pub fn lexicographic_to_cyclic(lex: &[ScalarField; 3]) -> [ScalarField; 3] {
    [lex[2].clone(), -&lex[1], lex[0].clone()]
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: Chart = Chart::Generic;

    fn f(text: &str) -> ScalarField {
        ScalarField::parse(text, G).unwrap()
    }

    fn one(a: &str, b: &str, c: &str) -> KForm {
        KForm::One([f(a), f(b), f(c)])
    }

    fn values(k: &KForm, p: Point) -> Vec<f64> {
        k.eval(p).unwrap()
    }

    #[test]
    fn basis_wedge() {
        let dc1 = KForm::coordinate_differential(0, G);
        let dc2 = KForm::coordinate_differential(1, G);
        let w = dc1.wedge(&dc2).unwrap();
        assert_eq!(values(&w, [0.3, 0.1, 0.2]), vec![0.0, 0.0, 1.0]);
        let back = dc2.wedge(&dc1).unwrap();
        assert_eq!(values(&back, [0.3, 0.1, 0.2]), vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn one_form_wedge_itself_vanishes() {
        let w = one("sin(c1)*c2", "exp(c3)", "c1*c2*c3");
        let ww = w.wedge(&w).unwrap();
        for c in ww.components() {
            assert!(c.is_zero() || c.eval([0.4, 1.2, -0.3]).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_expansion() {
        // (c2 dc1) ∧ (c1 dc2) = c1 c2 dc1∧dc2
        let a = one("c2", "0", "0");
        let b = one("0", "c1", "0");
        let w = a.wedge(&b).unwrap();
        let p = [1.5, -2.0, 0.7];
        assert_eq!(values(&w, p), vec![0.0, 0.0, 1.5 * -2.0]);
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let w = one("1", "0", "0").wedge(&one("0", "1", "0")).unwrap();
        assert_eq!(w.wedge(&w), Err(FormError::DegreeOverflow(2, 2)));
        let vol = w.wedge(&one("0", "0", "1")).unwrap();
        assert_eq!(vol.exterior_derivative(), Err(FormError::TopDegree));
    }

    #[test]
    fn d_of_c1_dc2() {
        let d = one("0", "c1", "0").exterior_derivative().unwrap();
        assert_eq!(values(&d, [0.2, 0.3, 0.4]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn d_squared_vanishes_on_function() {
        let g = KForm::Zero(f("sin(c1)*exp(c2)*c3"));
        let dd = g.exterior_derivative().unwrap().exterior_derivative().unwrap();
        for c in dd.components() {
            assert!(c.eval([0.3, -0.4, 1.7]).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn d_matches_hand_expansion() {
        // d(-sin(c3) dc1 + h(c1) cos(c3) dc2) with h = c1 exp(-c1^2/4):
        //   = cos(c3) dc1∧dc3 ... expanded by hand in the cyclic basis:
        //   dc2∧dc3: h sin(c3)
        //   dc3∧dc1: -cos(c3)
        //   dc1∧dc2: h'(c1) cos(c3)
        let h = "c1*exp(-c1^2/4)";
        let a = one("-sin(c3)", &format!("{h}*cos(c3)"), "0");
        let d = a.exterior_derivative().unwrap();
        for p in [[0.5f64, 0.1, 0.9], [1.7, -2.0, 2.5], [2.9, 0.0, -1.0]] {
            let (x, z) = (p[0], p[2]);
            let hv = x * (-x * x / 4.0).exp();
            let hp = (1.0 - x * x / 2.0) * (-x * x / 4.0).exp();
            let got = values(&d, p);
            let want = [hv * z.sin(), -z.cos(), hp * z.cos()];
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-14, "{i}: {} vs {}", got[i], want[i]);
            }
        }
    }

    #[test]
    fn lie_derivative_of_function_is_directional_derivative() {
        let g = KForm::Zero(f("c1^2 * c3"));
        let x = [f("1"), f("2"), f("c1")];
        let l = g.lie_derivative(&x);
        let p = [1.5, 0.0, 2.0];
        // 2 c1 c3 * 1 + c1^2 * c1
        assert!((values(&l, p)[0] - (2.0 * 1.5 * 2.0 + 1.5f64.powi(3))).abs() < 1e-14);
    }

    #[test]
    fn lexicographic_conversion_round_trips() {
        let c = [f("1"), f("2"), f("3")];
        let lex = cyclic_to_lexicographic(&c);
        let v: Vec<f64> = lex.iter().map(|x| x.eval([0.0; 3]).unwrap()).collect();
        assert_eq!(v, vec![3.0, -2.0, 1.0]);
        assert_eq!(lexicographic_to_cyclic(&lex), c);
    }
}
