//! Hash-consed expression DAG over three chart variables.
//!
//! Every node is interned: structurally identical subexpressions share one
//! allocation, so repeated differentiation grows the graph roughly linearly
//! per order instead of exponentially. Constructors fold constants and apply
//! the trivial identities (`x + 0`, `x * 1`, `x * 0`, `-(-x)`, ...); nothing
//! more ambitious is attempted.

mod diff;
mod parse;
mod print;
mod tape;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock, Weak};

pub use parse::{parse_program, ParseError, Program};
pub use tape::{EvalError, Tape};

/// Elementary functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// Derivative of `abs`.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    /// Pointwise value, `None` outside the domain.
    pub fn apply(self, x: f64) -> Option<f64> {
        let y = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => {
                if x.cos() == 0.0 {
                    return None;
                }
                x.tan()
            }
            Func::Exp => x.exp(),
            Func::Log => {
                if x <= 0.0 {
                    return None;
                }
                x.ln()
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return None;
                }
                x.sqrt()
            }
            Func::Abs => x.abs(),
            Func::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        };
        y.is_finite().then_some(y)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Op {
    Const(f64),
    Var(u8),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

pub(crate) struct Node {
    id: u64,
    op: Op,
}

/// Immutable, cheaply clonable handle to an interned expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Var(u8),
    Add(u64, u64),
    Sub(u64, u64),
    Mul(u64, u64),
    Div(u64, u64),
    Neg(u64),
    Powi(u64, i32),
    Pow(u64, u64),
    Call(Func, u64),
}

fn key_of(op: &Op) -> Key {
    match op {
        // normalise -0.0 so both zeros intern to one node
        Op::Const(c) => Key::Const(if *c == 0.0 { 0 } else { c.to_bits() }),
        Op::Var(i) => Key::Var(*i),
        Op::Add(a, b) => Key::Add(a.id(), b.id()),
        Op::Sub(a, b) => Key::Sub(a.id(), b.id()),
        Op::Mul(a, b) => Key::Mul(a.id(), b.id()),
        Op::Div(a, b) => Key::Div(a.id(), b.id()),
        Op::Neg(a) => Key::Neg(a.id()),
        Op::Powi(a, n) => Key::Powi(a.id(), *n),
        Op::Pow(a, b) => Key::Pow(a.id(), b.id()),
        Op::Call(f, a) => Key::Call(*f, a.id()),
    }
}

struct Interner {
    table: HashMap<Key, Weak<Node>>,
    inserts_since_sweep: usize,
}

static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn intern(op: Op) -> Expr {
    let key = key_of(&op);
    let cell = INTERNER.get_or_init(|| {
        Mutex::new(Interner {
            table: HashMap::new(),
            inserts_since_sweep: 0,
        })
    });
    let mut interner = cell.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(node) = interner.table.get(&key).and_then(Weak::upgrade) {
        return Expr(node);
    }
    let node = Arc::new(Node {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        op,
    });
    interner.table.insert(key, Arc::downgrade(&node));
    interner.inserts_since_sweep += 1;
    if interner.inserts_since_sweep > 1 << 20 {
        interner.table.retain(|_, w| w.strong_count() > 0);
        interner.inserts_since_sweep = 0;
    }
    Expr(node)
}

impl Expr {
    pub(crate) fn id(&self) -> u64 {
        self.0.id
    }

    pub(crate) fn op(&self) -> &Op {
        &self.0.op
    }

    pub fn constant(c: f64) -> Expr {
        intern(Op::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    /// Chart variable `c1`, `c2` or `c3` (zero-based index).
    pub fn var(axis: usize) -> Expr {
        assert!(axis < 3, "chart axis out of range: {axis}");
        intern(Op::Var(axis as u8))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.op() {
            Op::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a + b),
            (Some(a), None) if a == 0.0 => return other.clone(),
            (None, Some(b)) if b == 0.0 => return self.clone(),
            _ => {}
        }
        if let Op::Neg(b) = other.op() {
            return self.sub(b);
        }
        if let Op::Neg(a) = self.op() {
            return other.sub(a);
        }
        let (a, b) = ordered(self, other);
        intern(Op::Add(a, b))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a - b),
            (Some(a), None) if a == 0.0 => return other.neg(),
            (None, Some(b)) if b == 0.0 => return self.clone(),
            _ => {}
        }
        if self.id() == other.id() {
            return Expr::zero();
        }
        if let Op::Neg(b) = other.op() {
            return self.add(b);
        }
        intern(Op::Sub(self.clone(), other.clone()))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => return Expr::zero(),
            (Some(a), None) if a == 1.0 => return other.clone(),
            (None, Some(b)) if b == 1.0 => return self.clone(),
            (Some(a), None) if a == -1.0 => return other.neg(),
            (None, Some(b)) if b == -1.0 => return self.neg(),
            _ => {}
        }
        match (self.op(), other.op()) {
            (Op::Neg(a), Op::Neg(b)) => return a.mul(b),
            (Op::Neg(a), _) => return a.mul(other).neg(),
            (_, Op::Neg(b)) => return self.mul(b).neg(),
            _ => {}
        }
        // pull constants to the front and merge them: c1 * (c2 * x) -> (c1 c2) * x
        if let Some(c) = other.as_const() {
            return Expr::constant(c).mul(self);
        }
        if let (Some(c), Op::Mul(inner_c, x)) = (self.as_const(), other.op()) {
            if let Some(d) = inner_c.as_const() {
                return Expr::constant(c * d).mul(x);
            }
        }
        if self.id() == other.id() {
            return self.powi(2);
        }
        if self.as_const().is_some() {
            return intern(Op::Mul(self.clone(), other.clone()));
        }
        let (a, b) = ordered(self, other);
        intern(Op::Mul(a, b))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => return Expr::constant(a / b),
            (Some(a), None) if a == 0.0 => return Expr::zero(),
            (None, Some(b)) if b == 1.0 => return self.clone(),
            (None, Some(b)) if b == -1.0 => return self.neg(),
            (None, Some(b)) if b != 0.0 => return Expr::constant(1.0 / b).mul(self),
            _ => {}
        }
        if self.id() == other.id() && self.as_const().is_none() {
            // x / x is 1 wherever it is defined
            return Expr::one();
        }
        match (self.op(), other.op()) {
            (Op::Neg(a), _) => return a.div(other).neg(),
            (_, Op::Neg(b)) => return self.div(b).neg(),
            _ => {}
        }
        intern(Op::Div(self.clone(), other.clone()))
    }

    pub fn neg(&self) -> Expr {
        match self.op() {
            Op::Const(c) => Expr::constant(-c),
            Op::Neg(a) => a.clone(),
            Op::Sub(a, b) => b.sub(a),
            _ => intern(Op::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            let v = c.powi(n);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        match self.op() {
            Op::Powi(a, m) => match m.checked_mul(n) {
                Some(k) => a.powi(k),
                None => intern(Op::Powi(self.clone(), n)),
            },
            Op::Neg(a) if n % 2 == 0 => a.powi(n),
            Op::Neg(a) => a.powi(n).neg(),
            _ => intern(Op::Powi(self.clone(), n)),
        }
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        if let Some(e) = exponent.as_const() {
            if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                return self.powi(e as i32);
            }
            if e == 0.5 {
                return self.sqrt();
            }
            if let Some(b) = self.as_const() {
                if b > 0.0 {
                    return Expr::constant(b.powf(e));
                }
            }
        }
        intern(Op::Pow(self.clone(), exponent.clone()))
    }

    pub fn call(&self, f: Func) -> Expr {
        if let Some(c) = self.as_const() {
            if let Some(v) = f.apply(c) {
                return Expr::constant(v);
            }
        }
        match (f, self.op()) {
            (Func::Log, Op::Call(Func::Exp, a)) => return a.clone(),
            (Func::Sin, Op::Neg(a)) | (Func::Tan, Op::Neg(a)) => return a.call(f).neg(),
            (Func::Cos, Op::Neg(a)) | (Func::Abs, Op::Neg(a)) => return a.call(f),
            _ => {}
        }
        intern(Op::Call(f, self.clone()))
    }

    pub fn sin(&self) -> Expr {
        self.call(Func::Sin)
    }
    pub fn cos(&self) -> Expr {
        self.call(Func::Cos)
    }
    pub fn tan(&self) -> Expr {
        self.call(Func::Tan)
    }
    pub fn exp(&self) -> Expr {
        self.call(Func::Exp)
    }
    pub fn ln(&self) -> Expr {
        self.call(Func::Log)
    }
    pub fn sqrt(&self) -> Expr {
        self.call(Func::Sqrt)
    }
    pub fn abs(&self) -> Expr {
        self.call(Func::Abs)
    }

    /// Exact partial derivative along chart axis `axis` (zero-based).
    pub fn partial(&self, axis: usize) -> Expr {
        diff::partial(self, axis)
    }

    /// Number of distinct nodes reachable from this root.
    pub fn node_count(&self) -> usize {
        tape::topo_order(self).len()
    }

    pub fn compile(&self) -> Tape {
        Tape::compile(self)
    }

    /// Evaluate once; prefer [`Expr::compile`] for repeated evaluation.
    pub fn eval(&self, point: [f64; 3]) -> Result<f64, EvalError> {
        self.compile().eval(point)
    }

    pub(crate) fn children(&self) -> ChildIter<'_> {
        let (a, b) = match self.op() {
            Op::Const(_) | Op::Var(_) => (None, None),
            Op::Neg(a) | Op::Powi(a, _) | Op::Call(_, a) => (Some(a), None),
            Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) | Op::Pow(a, b) => {
                (Some(a), Some(b))
            }
        };
        ChildIter { a, b }
    }
}

pub(crate) struct ChildIter<'a> {
    a: Option<&'a Expr>,
    b: Option<&'a Expr>,
}

impl<'a> Iterator for ChildIter<'a> {
    type Item = &'a Expr;
    fn next(&mut self) -> Option<&'a Expr> {
        self.a.take().or_else(|| self.b.take())
    }
}

fn ordered(a: &Expr, b: &Expr) -> (Expr, Expr) {
    // constants first, then by id, so commutative nodes intern once
    let a_const = a.as_const().is_some();
    let b_const = b.as_const().is_some();
    if (b_const && !a_const) || (a_const == b_const && b.id() < a.id()) {
        (b.clone(), a.clone())
    } else {
        (a.clone(), b.clone())
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", print::to_source(self, &["c1", "c2", "c3"]))
    }
}

impl Drop for Node {
    // Long derivative chains would otherwise recurse once per level on drop.
    fn drop(&mut self) {
        let mut stack: Vec<Arc<Node>> = Vec::new();
        take_children(&mut self.op, &mut stack);
        while let Some(node) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(node) {
                take_children(&mut inner.op, &mut stack);
            }
        }
    }
}

fn take_children(op: &mut Op, stack: &mut Vec<Arc<Node>>) {
    let placeholder = Op::Const(0.0);
    match std::mem::replace(op, placeholder) {
        Op::Const(_) | Op::Var(_) => {}
        Op::Neg(a) | Op::Powi(a, _) | Op::Call(_, a) => stack.push(a.0),
        Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) | Op::Pow(a, b) => {
            stack.push(a.0);
            stack.push(b.0);
        }
    }
}

pub use print::to_source;
