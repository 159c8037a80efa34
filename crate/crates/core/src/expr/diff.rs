use std::collections::HashMap;

use super::{Expr, Func, Op};

pub(super) fn partial(root: &Expr, axis: usize) -> Expr {
    assert!(axis < 3, "chart axis out of range: {axis}");
    // post-order walk so every child derivative exists before its parent's
    let order = super::tape::topo_order(root);
    let mut memo: HashMap<u64, Expr> = HashMap::with_capacity(order.len());
    for node in &order {
        let d = derivative_of(node, axis, &memo);
        memo.insert(node.id(), d);
    }
    memo.remove(&root.id()).unwrap_or_else(Expr::zero)
}

fn derivative_of(e: &Expr, axis: usize, memo: &HashMap<u64, Expr>) -> Expr {
    let d = |x: &Expr| memo[&x.id()].clone();
    match e.op() {
        Op::Const(_) => Expr::zero(),
        Op::Var(i) => {
            if *i as usize == axis {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Op::Add(a, b) => d(a).add(&d(b)),
        Op::Sub(a, b) => d(a).sub(&d(b)),
        Op::Neg(a) => d(a).neg(),
        Op::Mul(a, b) => d(a).mul(b).add(&a.mul(&d(b))),
        Op::Div(a, b) => {
            // (a/b)' = (a' - (a/b) b') / b
            let db = d(b);
            if db.is_zero() {
                d(a).div(b)
            } else {
                d(a).sub(&e.mul(&db)).div(b)
            }
        }
        Op::Powi(a, n) => {
            let da = d(a);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::constant(*n as f64).mul(&a.powi(n - 1)).mul(&da)
        }
        Op::Pow(a, b) => {
            let (da, db) = (d(a), d(b));
            if db.is_zero() {
                // b constant in this direction: b a^(b-1) a'
                let exponent = b.sub(&Expr::one());
                return b.mul(&a.pow(&exponent)).mul(&da);
            }
            // a^b (b' ln a + b a'/a)
            let inner = db.mul(&a.ln()).add(&b.mul(&da).div(a));
            e.mul(&inner)
        }
        Op::Call(f, a) => {
            let da = d(a);
            if da.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => a.cos(),
                Func::Cos => a.sin().neg(),
                Func::Tan => Expr::one().add(&e.powi(2)),
                Func::Exp => e.clone(),
                Func::Log => return da.div(a),
                Func::Sqrt => return da.div(&Expr::constant(2.0).mul(e)),
                Func::Abs => a.call(Func::Sign),
                Func::Sign => return Expr::zero(),
            };
            outer.mul(&da)
        }
    }
}
