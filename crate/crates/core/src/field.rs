//! Scalar fields on a three-coordinate chart.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::expr::{parse_program, to_source, EvalError, Expr, ParseError, Tape};

/// A point in chart coordinates `(c1, c2, c3)`.
pub type Point = [f64; 3];

/// Naming scheme for the three chart coordinates. `c1, c2, c3` are always
/// accepted; the chart adds its own aliases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// `(x, y, p)`
    #[default]
    Generic,
    /// `(r, theta, psi)` on an orthonormal frame bundle
    FrameBundle,
}

impl Chart {
    pub fn aliases(self) -> [&'static str; 3] {
        match self {
            Chart::Generic => ["x", "y", "p"],
            Chart::FrameBundle => ["r", "theta", "psi"],
        }
    }
}

struct FieldInner {
    expr: Expr,
    chart: Chart,
    tape: OnceLock<Tape>,
}

/// A differentiable function of the chart coordinates.
///
/// Cloning is cheap; the compiled evaluation tape is built on first use and
/// shared between clones.
#[derive(Clone)]
pub struct ScalarField(Arc<FieldInner>);

impl ScalarField {
    pub fn new(expr: Expr, chart: Chart) -> Self {
        ScalarField(Arc::new(FieldInner {
            expr,
            chart,
            tape: OnceLock::new(),
        }))
    }

    pub fn parse(text: &str, chart: Chart) -> Result<Self, ParseError> {
        let program = parse_program(text, &chart.aliases())?;
        Ok(ScalarField::new(program.expr, chart))
    }

    pub fn constant(c: f64, chart: Chart) -> Self {
        ScalarField::new(Expr::constant(c), chart)
    }

    pub fn zero(chart: Chart) -> Self {
        ScalarField::constant(0.0, chart)
    }

    pub fn one(chart: Chart) -> Self {
        ScalarField::constant(1.0, chart)
    }

    /// The coordinate function `c{axis+1}`.
    pub fn coordinate(axis: usize, chart: Chart) -> Self {
        ScalarField::new(Expr::var(axis), chart)
    }

    pub fn expr(&self) -> &Expr {
        &self.0.expr
    }

    pub fn chart(&self) -> Chart {
        self.0.chart
    }

    pub fn as_const(&self) -> Option<f64> {
        self.0.expr.as_const()
    }

    /// True only when the field is structurally the constant zero.
    pub fn is_zero(&self) -> bool {
        self.0.expr.is_zero()
    }

    pub fn tape(&self) -> &Tape {
        self.0.tape.get_or_init(|| self.0.expr.compile())
    }

    pub fn eval(&self, p: Point) -> Result<f64, EvalError> {
        self.tape().eval(p)
    }

    /// Exact coordinate partial `∂/∂c{axis+1}`; `axis` is zero-based.
    pub fn partial(&self, axis: usize) -> ScalarField {
        self.derived(self.0.expr.partial(axis))
    }

    pub fn gradient(&self) -> [ScalarField; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    pub fn to_source(&self) -> String {
        to_source(&self.0.expr, &self.0.chart.aliases())
    }

    fn derived(&self, expr: Expr) -> ScalarField {
        ScalarField::new(expr, self.0.chart)
    }

    fn lift(&self, f: impl FnOnce(&Expr) -> Expr) -> ScalarField {
        self.derived(f(&self.0.expr))
    }

    pub fn exp(&self) -> Self {
        self.lift(Expr::exp)
    }
    pub fn ln(&self) -> Self {
        self.lift(Expr::ln)
    }
    pub fn sqrt(&self) -> Self {
        self.lift(Expr::sqrt)
    }
    pub fn sin(&self) -> Self {
        self.lift(Expr::sin)
    }
    pub fn cos(&self) -> Self {
        self.lift(Expr::cos)
    }
    pub fn powi(&self, n: i32) -> Self {
        self.lift(|e| e.powi(n))
    }
    pub fn powf(&self, x: f64) -> Self {
        self.lift(|e| e.pow(&Expr::constant(x)))
    }
    pub fn recip(&self) -> Self {
        self.lift(|e| Expr::one().div(e))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.to_source())
    }
}

impl PartialEq for ScalarField {
    /// Structural equality of the underlying expression graphs.
    fn eq(&self, other: &Self) -> bool {
        self.0.expr == other.0.expr
    }
}

/// Parse an expression program into a field on `chart`.
pub fn parse_field(text: &str, chart: Chart) -> Result<ScalarField, ParseError> {
    ScalarField::parse(text, chart)
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $op:ident) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.derived(self.0.expr.$op(&rhs.0.expr))
            }
        }
        impl $trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                (&self).$method(rhs)
            }
        }
        impl $trait<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                self.derived(self.0.expr.$op(&Expr::constant(rhs)))
            }
        }
        impl $trait<f64> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                (&self).$method(rhs)
            }
        }
        impl $trait<&ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                rhs.derived(Expr::constant(self).$op(&rhs.0.expr))
            }
        }
        impl $trait<ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.$method(&rhs)
            }
        }
    };
}

field_binop!(Add, add, add);
field_binop!(Sub, sub, sub);
field_binop!(Mul, mul, mul);
field_binop!(Div, div, div);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.lift(Expr::neg)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}
