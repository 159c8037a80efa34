use std::collections::HashMap;
use std::sync::OnceLock;

use pest::iterators::{Pair, Pairs};
use pest::pratt_parser::{Assoc, Op as PrattOp, PrattParser};
use pest::Parser;
use pest_derive::Parser;
use thiserror::Error;

use super::{Expr, Func};

#[derive(Parser)]
#[grammar = "expr/grammar.pest"]
struct ExprGrammar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("unknown function `{name}` at {line}:{column}")]
    UnknownFunction {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("`{name}` takes {expected} argument(s), got {found} at {line}:{column}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },
    #[error("number `{text}` at {line}:{column} is not finite")]
    Number {
        text: String,
        line: usize,
        column: usize,
    },
}

/// Parsed program: the final expression, with every `let` already inlined as
/// a shared subgraph.
#[derive(Debug, Clone)]
pub struct Program {
    pub expr: Expr,
    pub bindings: Vec<String>,
}

fn pratt() -> &'static PrattParser<Rule> {
    static PRATT: OnceLock<PrattParser<Rule>> = OnceLock::new();
    PRATT.get_or_init(|| {
        PrattParser::new()
            .op(PrattOp::infix(Rule::add, Assoc::Left) | PrattOp::infix(Rule::sub, Assoc::Left))
            .op(PrattOp::infix(Rule::mul, Assoc::Left) | PrattOp::infix(Rule::div, Assoc::Left))
            .op(PrattOp::prefix(Rule::neg))
            .op(PrattOp::infix(Rule::pow, Assoc::Right))
    })
}

struct Scope<'a> {
    vars: &'a [&'a str; 3],
    bindings: HashMap<String, Expr>,
}

/// Parse `let name = expr; ... expr` with chart variables `c1, c2, c3` and
/// the given aliases for them.
pub fn parse_program(text: &str, aliases: &[&str; 3]) -> Result<Program, ParseError> {
    let mut pairs = ExprGrammar::parse(Rule::program, text).map_err(|e| {
        let (line, column) = match e.line_col {
            pest::error::LineColLocation::Pos(p) => p,
            pest::error::LineColLocation::Span(p, _) => p,
        };
        ParseError::Syntax {
            line,
            column,
            message: e.variant.message().into_owned(),
        }
    })?;
    let program = pairs.next().expect("grammar yields a program");
    let mut scope = Scope {
        vars: aliases,
        bindings: HashMap::new(),
    };
    let mut names = Vec::new();
    let mut result = None;
    for pair in program.into_inner() {
        match pair.as_rule() {
            Rule::binding => {
                let mut inner = pair.into_inner();
                let _kw = inner.next();
                let name = inner.next().expect("binding name").as_str().to_string();
                let value = build(inner.next().expect("binding value").into_inner(), &scope)?;
                scope.bindings.insert(name.clone(), value);
                names.push(name);
            }
            Rule::expr => result = Some(build(pair.into_inner(), &scope)?),
            Rule::EOI => {}
            other => unreachable!("unexpected rule {other:?}"),
        }
    }
    Ok(Program {
        expr: result.expect("grammar requires a final expression"),
        bindings: names,
    })
}

fn build(pairs: Pairs<'_, Rule>, scope: &Scope<'_>) -> Result<Expr, ParseError> {
    pratt()
        .map_primary(|p| primary(p, scope))
        .map_prefix(|_op, rhs| Ok(rhs?.neg()))
        .map_infix(|lhs, op, rhs| {
            let (a, b) = (lhs?, rhs?);
            Ok(match op.as_rule() {
                Rule::add => a.add(&b),
                Rule::sub => a.sub(&b),
                Rule::mul => a.mul(&b),
                Rule::div => a.div(&b),
                Rule::pow => a.pow(&b),
                other => unreachable!("unexpected operator {other:?}"),
            })
        })
        .parse(pairs)
}

fn primary(pair: Pair<'_, Rule>, scope: &Scope<'_>) -> Result<Expr, ParseError> {
    let (line, column) = pair.line_col();
    match pair.as_rule() {
        Rule::number => {
            let text = pair.as_str();
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                line,
                column,
                message: format!("bad number `{text}`"),
            })?;
            if !v.is_finite() {
                return Err(ParseError::Number {
                    text: text.to_string(),
                    line,
                    column,
                });
            }
            Ok(Expr::constant(v))
        }
        Rule::ident => resolve(pair.as_str(), scope).ok_or_else(|| ParseError::UnknownIdentifier {
            name: pair.as_str().to_string(),
            line,
            column,
        }),
        Rule::call => {
            let mut inner = pair.into_inner();
            let name = inner.next().expect("callee").as_str().to_string();
            let args = inner
                .map(|a| build(a.into_inner(), scope))
                .collect::<Result<Vec<_>, _>>()?;
            let arity = |expected: usize| {
                if args.len() == expected {
                    Ok(())
                } else {
                    Err(ParseError::Arity {
                        name: name.clone(),
                        expected,
                        found: args.len(),
                        line,
                        column,
                    })
                }
            };
            let unary = match name.as_str() {
                "sin" => Func::Sin,
                "cos" => Func::Cos,
                "tan" => Func::Tan,
                "exp" => Func::Exp,
                "log" => Func::Log,
                "sqrt" => Func::Sqrt,
                "abs" => Func::Abs,
                "sign" => Func::Sign,
                "pow" => {
                    arity(2)?;
                    return Ok(args[0].pow(&args[1]));
                }
                _ => {
                    return Err(ParseError::UnknownFunction {
                        name,
                        line,
                        column,
                    })
                }
            };
            arity(1)?;
            Ok(args[0].call(unary))
        }
        Rule::expr => build(pair.into_inner(), scope),
        other => unreachable!("unexpected primary {other:?}"),
    }
}

fn resolve(name: &str, scope: &Scope<'_>) -> Option<Expr> {
    if let Some(e) = scope.bindings.get(name) {
        return Some(e.clone());
    }
    let axis = match name {
        "c1" => Some(0),
        "c2" => Some(1),
        "c3" => Some(2),
        _ => scope.vars.iter().position(|v| *v == name),
    };
    if let Some(i) = axis {
        return Some(Expr::var(i));
    }
    (name == "pi").then(|| Expr::constant(std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GENERIC: [&str; 3] = ["x", "y", "p"];

    fn eval(text: &str, p: [f64; 3]) -> f64 {
        parse_program(text, &GENERIC).unwrap().expr.eval(p).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", [0.0; 3]), 7.0);
        assert_eq!(eval("2 ^ 3 ^ 2", [0.0; 3]), 512.0);
        assert_eq!(eval("-2 ^ 2", [0.0; 3]), -4.0);
        assert_eq!(eval("8 / 4 / 2", [0.0; 3]), 1.0);
        assert_eq!(eval("2 ^ -1", [0.0; 3]), 0.5);
        assert_eq!(eval("1.5e1 - .5", [0.0; 3]), 14.5);
    }

    #[test]
    fn aliases_and_bindings() {
        assert_eq!(eval("c1^2 + sin(c3)", [2.0, 0.0, 0.0]), 4.0);
        assert_eq!(eval("x * y + p", [2.0, 3.0, 4.0]), 10.0);
        let v = eval("let h = c1*exp(-c1^2/4); h*h", [1.0, 0.0, 0.0]);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(eval("let a = 2; let b = a * a; pow(b, a)", [0.0; 3]), 16.0);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_program("c1 +", &GENERIC) {
            Err(ParseError::Syntax { line: 1, column, .. }) => assert_eq!(column, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_program("1 +\n  q", &GENERIC) {
            Err(ParseError::UnknownIdentifier { name, line: 2, column: 3 }) => assert_eq!(name, "q"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        assert!(matches!(
            parse_program("sin(1, 2)", &GENERIC),
            Err(ParseError::Arity { expected: 1, found: 2, .. })
        ));
        assert!(matches!(
            parse_program("pow(1)", &GENERIC),
            Err(ParseError::Arity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            parse_program("foo(1)", &GENERIC),
            Err(ParseError::UnknownFunction { .. })
        ));
        assert!(matches!(parse_program("1e999", &GENERIC), Err(ParseError::Number { .. })));
    }

    #[test]
    fn let_is_a_keyword_only_as_a_word() {
        assert!(parse_program("let = 1; 2", &GENERIC).is_err());
        // `lettuce` is an ordinary identifier
        assert_eq!(eval("let lettuce = 3; lettuce", [0.0; 3]), 3.0);
    }
}
