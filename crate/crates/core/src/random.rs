//! Seeded random scalar fields and forms for property checks.
//!
//! Fields are built from `+ − *`, `sin`, `cos`, `exp∘sin`, squares and
//! divisions by `2 + sin(·)`, so they are smooth and of moderate size on
//! `[−1, 1]³`.

use rand::Rng;

use crate::expr::Expr;
use crate::field::{Chart, ScalarField};
use crate::forms::KForm;

fn leaf<R: Rng>(rng: &mut R) -> Expr {
    if rng.gen_bool(0.6) {
        Expr::var(rng.gen_range(0..3))
    } else {
        Expr::constant((rng.gen_range(-2.0f64..2.0) * 100.0).round() / 100.0)
    }
}

fn node<R: Rng>(rng: &mut R, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng);
    }
    let a = node(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => a.add(&node(rng, depth - 1)),
        1 => a.sub(&node(rng, depth - 1)),
        2 | 3 => a.mul(&node(rng, depth - 1)),
        4 => a.sin(),
        5 => a.cos(),
        6 => a.sin().exp(),
        _ => a.div(&Expr::constant(2.0).add(&node(rng, depth - 1).sin())),
    }
}

pub fn random_field<R: Rng>(rng: &mut R, depth: usize, chart: Chart) -> ScalarField {
    ScalarField::new(node(rng, depth), chart)
}

/// A random form of the given degree with independent random components.
pub fn random_form<R: Rng>(rng: &mut R, degree: usize, depth: usize, chart: Chart) -> KForm {
    let mut f = || random_field(rng, depth, chart);
    match degree {
        0 => KForm::Zero(f()),
        1 => KForm::One([f(), f(), f()]),
        2 => KForm::Two([f(), f(), f()]),
        3 => KForm::Three(f()),
        _ => panic!("no {degree}-forms on a 3-chart"),
    }
}
