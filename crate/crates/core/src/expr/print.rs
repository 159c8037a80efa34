use std::collections::HashMap;
use std::fmt::Write;

use super::{Expr, Op};

/// Render an expression in the input grammar.
///
/// Nodes referenced more than once become `let` bindings, so the output stays
/// proportional to the DAG size and parses back to the same graph.
pub fn to_source(root: &Expr, var_names: &[&str; 3]) -> String {
    let order = super::tape::topo_order(root);
    let mut uses: HashMap<u64, usize> = HashMap::new();
    for e in &order {
        for c in e.children() {
            *uses.entry(c.id()).or_default() += 1;
        }
    }
    let mut names: HashMap<u64, String> = HashMap::new();
    let mut out = String::new();
    for e in &order {
        if e.id() == root.id() {
            break;
        }
        let shared = uses.get(&e.id()).copied().unwrap_or(0) > 1;
        if shared && !matches!(e.op(), Op::Const(_) | Op::Var(_)) {
            let text = render(e, var_names, &names);
            let name = format!("_{}", names.len() + 1);
            let _ = write!(out, "let {name} = {text}; ");
            names.insert(e.id(), name);
        }
    }
    out.push_str(&render(root, var_names, &names));
    out
}

fn render(e: &Expr, vars: &[&str; 3], names: &HashMap<u64, String>) -> String {
    let sub = |x: &Expr| -> String {
        match names.get(&x.id()) {
            Some(n) => n.clone(),
            None => render(x, vars, names),
        }
    };
    match e.op() {
        Op::Const(c) => {
            if *c < 0.0 {
                format!("(-{:?})", -c)
            } else {
                format!("{c:?}")
            }
        }
        Op::Var(i) => vars[*i as usize].to_string(),
        Op::Add(a, b) => format!("({} + {})", sub(a), sub(b)),
        Op::Sub(a, b) => format!("({} - {})", sub(a), sub(b)),
        Op::Mul(a, b) => format!("({} * {})", sub(a), sub(b)),
        Op::Div(a, b) => format!("({} / {})", sub(a), sub(b)),
        Op::Neg(a) => format!("(-{})", sub(a)),
        Op::Powi(a, n) => {
            if *n < 0 {
                format!("({} ^ (-{}))", sub(a), -(*n as i64))
            } else {
                format!("({} ^ {})", sub(a), n)
            }
        }
        Op::Pow(a, b) => format!("({} ^ {})", sub(a), sub(b)),
        Op::Call(f, a) => format!("{}({})", f.name(), sub(a)),
    }
}
