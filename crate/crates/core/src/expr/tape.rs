use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Expr, Func, Op};

/// A domain violation hit while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{operation} undefined at ({}, {}, {})", point[0], point[1], point[2])]
pub struct EvalError {
    pub operation: String,
    pub point: [f64; 3],
}

#[derive(Clone, Copy)]
enum Instr {
    Const(f64),
    Var(u8),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Powi(u32, i32),
    Pow(u32, u32),
    Call(Func, u32),
}

/// Expression flattened into a straight-line program, one slot per DAG node.
#[derive(Clone)]
pub struct Tape {
    code: Vec<Instr>,
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tape({} instructions)", self.code.len())
    }
}

/// Children before parents, each node once.
pub(crate) fn topo_order(root: &Expr) -> Vec<Expr> {
    let mut order = Vec::new();
    let mut seen: HashMap<u64, ()> = HashMap::new();
    let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
    while let Some((e, expanded)) = stack.pop() {
        if expanded {
            order.push(e);
            continue;
        }
        if seen.insert(e.id(), ()).is_some() {
            continue;
        }
        stack.push((e.clone(), true));
        for child in e.children() {
            if !seen.contains_key(&child.id()) {
                stack.push((child.clone(), false));
            }
        }
    }
    order
}

impl Tape {
    pub fn compile(root: &Expr) -> Tape {
        let order = topo_order(root);
        let mut slot: HashMap<u64, u32> = HashMap::with_capacity(order.len());
        let mut code = Vec::with_capacity(order.len());
        for e in &order {
            let s = |x: &Expr| slot[&x.id()];
            let instr = match e.op() {
                Op::Const(c) => Instr::Const(*c),
                Op::Var(i) => Instr::Var(*i),
                Op::Add(a, b) => Instr::Add(s(a), s(b)),
                Op::Sub(a, b) => Instr::Sub(s(a), s(b)),
                Op::Mul(a, b) => Instr::Mul(s(a), s(b)),
                Op::Div(a, b) => Instr::Div(s(a), s(b)),
                Op::Neg(a) => Instr::Neg(s(a)),
                Op::Powi(a, n) => Instr::Powi(s(a), *n),
                Op::Pow(a, b) => Instr::Pow(s(a), s(b)),
                Op::Call(f, a) => Instr::Call(*f, s(a)),
            };
            slot.insert(e.id(), code.len() as u32);
            code.push(instr);
        }
        Tape { code }
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn eval(&self, point: [f64; 3]) -> Result<f64, EvalError> {
        let mut buf = Vec::with_capacity(self.code.len());
        self.eval_with(point, &mut buf)
    }

    /// Evaluate reusing `buf` as scratch space.
    pub fn eval_with(&self, point: [f64; 3], buf: &mut Vec<f64>) -> Result<f64, EvalError> {
        buf.clear();
        let fail = |what: &str| EvalError {
            operation: what.to_string(),
            point,
        };
        for instr in &self.code {
            let v = match *instr {
                Instr::Const(c) => c,
                Instr::Var(i) => point[i as usize],
                Instr::Add(a, b) => buf[a as usize] + buf[b as usize],
                Instr::Sub(a, b) => buf[a as usize] - buf[b as usize],
                Instr::Mul(a, b) => buf[a as usize] * buf[b as usize],
                Instr::Div(a, b) => {
                    let d = buf[b as usize];
                    if d == 0.0 {
                        return Err(fail("division by zero"));
                    }
                    buf[a as usize] / d
                }
                Instr::Neg(a) => -buf[a as usize],
                Instr::Powi(a, n) => {
                    let x = buf[a as usize];
                    if x == 0.0 && n < 0 {
                        return Err(fail("negative power of zero"));
                    }
                    x.powi(n)
                }
                Instr::Pow(a, b) => {
                    let (x, y) = (buf[a as usize], buf[b as usize]);
                    if x < 0.0 || (x == 0.0 && y <= 0.0) {
                        return Err(fail("pow"));
                    }
                    x.powf(y)
                }
                Instr::Call(f, a) => match f.apply(buf[a as usize]) {
                    Some(v) => v,
                    None => return Err(fail(f.name())),
                },
            };
            if !v.is_finite() {
                return Err(fail("non-finite intermediate"));
            }
            buf.push(v);
        }
        Ok(*buf.last().expect("tape is never empty"))
    }
}
