//! JSON expression trees for user-defined fields, with symbolic first derivatives.
//!
//! Grammar (one JSON value per expression):
//!
//! ```text
//! 1.5                      number
//! "x"                      coordinate variable, or the constant "pi"
//! {"add": [e, e, ...]}     sum
//! {"mul": [e, e, ...]}     product
//! {"sub": [a, b]}          difference
//! {"div": [a, b]}          quotient
//! {"neg": e}               negation
//! {"pow": [e, k]}          integer power, |k| <= 64
//! {"sin": e} {"cos": e} {"exp": e} {"log": e}
//! ```

use serde_json::Value;

use crate::error::{Error, Result};

const MAX_POWER: i32 = 64;
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

/// Default coordinate names: `x, y, z, w, v` up to five axes, `x1..xn` beyond.
pub fn default_variables(n: usize) -> Vec<String> {
    const NAMES: [&str; 5] = ["x", "y", "z", "w", "v"];
    if n <= NAMES.len() {
        NAMES[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl Expr {
    pub fn parse(value: &Value, variables: &[String]) -> Result<Expr> {
        Self::parse_depth(value, variables, 0)
    }

    pub fn parse_str(text: &str, variables: &[String]) -> Result<Expr> {
        let v: Value = serde_json::from_str(text)?;
        Self::parse(&v, variables)
    }

    fn parse_depth(value: &Value, vars: &[String], depth: usize) -> Result<Expr> {
        if depth > MAX_DEPTH {
            return Err(parse_err("expression nested too deeply"));
        }
        let sub = |v: &Value| Self::parse_depth(v, vars, depth + 1);
        match value {
            Value::Number(n) => {
                let x = n.as_f64().ok_or_else(|| parse_err("number out of range"))?;
                Ok(Expr::Const(x))
            }
            Value::String(s) => {
                if let Some(i) = vars.iter().position(|v| v == s) {
                    Ok(Expr::Var(i))
                } else if s == "pi" {
                    Ok(Expr::Const(std::f64::consts::PI))
                } else {
                    Err(parse_err(format!("unknown variable `{s}`")))
                }
            }
            Value::Object(map) => {
                if map.len() != 1 {
                    return Err(parse_err("operator objects must have exactly one key"));
                }
                let (op, arg) = map.iter().next().expect("one entry");
                let list = |min: usize, max: Option<usize>| -> Result<Vec<Expr>> {
                    let items = arg.as_array().ok_or_else(|| parse_err(format!("`{op}` expects an array")))?;
                    if items.len() < min || max.is_some_and(|m| items.len() > m) {
                        return Err(parse_err(format!("`{op}` has {} operands", items.len())));
                    }
                    items.iter().map(sub).collect()
                };
                let boxed = || sub(arg).map(Box::new);
                match op.as_str() {
                    "add" => Ok(Expr::Add(list(1, None)?)),
                    "mul" => Ok(Expr::Mul(list(1, None)?)),
                    "sub" => {
                        let mut v = list(2, Some(2))?;
                        let b = v.pop().expect("two operands");
                        let a = v.pop().expect("two operands");
                        Ok(Expr::Add(vec![a, Expr::Neg(Box::new(b))]))
                    }
                    "div" => {
                        let mut v = list(2, Some(2))?;
                        let b = v.pop().expect("two operands");
                        let a = v.pop().expect("two operands");
                        Ok(Expr::Div(Box::new(a), Box::new(b)))
                    }
                    "pow" => {
                        let items = arg.as_array().ok_or_else(|| parse_err("`pow` expects [base, exponent]"))?;
                        if items.len() != 2 {
                            return Err(parse_err("`pow` expects [base, exponent]"));
                        }
                        let k = items[1]
                            .as_i64()
                            .filter(|k| k.abs() <= MAX_POWER as i64)
                            .ok_or_else(|| parse_err(format!("`pow` exponent must be an integer in ±{MAX_POWER}")))?;
                        Ok(Expr::Pow(Box::new(sub(&items[0])?), k as i32))
                    }
                    "neg" => Ok(Expr::Neg(boxed()?)),
                    "sin" => Ok(Expr::Sin(boxed()?)),
                    "cos" => Ok(Expr::Cos(boxed()?)),
                    "exp" => Ok(Expr::Exp(boxed()?)),
                    "log" => Ok(Expr::Log(boxed()?)),
                    other => Err(parse_err(format!("unknown operator `{other}`"))),
                }
            }
            _ => Err(parse_err("expected a number, variable name or operator object")),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Add(v) => v.iter().map(|e| e.eval(x)).sum(),
            Expr::Mul(v) => v.iter().map(|e| e.eval(x)).product(),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, k) => a.eval(x).powi(*k),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Log(a) => a.eval(x).ln(),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(v) | Expr::Mul(v) => v.iter().filter_map(|e| e.max_var()).max(),
            Expr::Div(a, b) => a.max_var().max(b.max_var()),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Log(a) => a.max_var(),
        }
    }

    /// Symbolic partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(j) => Expr::Const(if *j == i { 1.0 } else { 0.0 }),
            Expr::Add(v) => add(v.iter().map(|e| e.diff(i)).collect()),
            Expr::Mul(v) => {
                let mut terms = Vec::new();
                for k in 0..v.len() {
                    let dk = v[k].diff(i);
                    if dk.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = v.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, e)| e.clone()).collect();
                    factors.push(dk);
                    terms.push(mul(factors));
                }
                add(terms)
            }
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b' / b²
                let first = div(a.diff(i), (**b).clone());
                let second = div(mul(vec![(**a).clone(), b.diff(i)]), Expr::Pow(b.clone(), 2));
                add(vec![first, neg(second)])
            }
            Expr::Neg(a) => neg(a.diff(i)),
            Expr::Pow(a, k) => {
                if *k == 0 {
                    return Expr::Const(0.0);
                }
                let inner = if *k == 1 { Expr::Const(1.0) } else { Expr::Pow(a.clone(), k - 1) };
                mul(vec![Expr::Const(*k as f64), inner, a.diff(i)])
            }
            Expr::Sin(a) => mul(vec![Expr::Cos(a.clone()), a.diff(i)]),
            Expr::Cos(a) => neg(mul(vec![Expr::Sin(a.clone()), a.diff(i)])),
            Expr::Exp(a) => mul(vec![Expr::Exp(a.clone()), a.diff(i)]),
            Expr::Log(a) => div(a.diff(i), (**a).clone()),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }
}

fn add(mut v: Vec<Expr>) -> Expr {
    v.retain(|e| !e.is_zero());
    match v.len() {
        0 => Expr::Const(0.0),
        1 => v.pop().expect("one term"),
        _ => Expr::Add(v),
    }
}

fn mul(mut v: Vec<Expr>) -> Expr {
    if v.iter().any(|e| e.is_zero()) {
        return Expr::Const(0.0);
    }
    v.retain(|e| !matches!(e, Expr::Const(c) if *c == 1.0));
    match v.len() {
        0 => Expr::Const(1.0),
        1 => v.pop().expect("one factor"),
        _ => Expr::Mul(v),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        Expr::Const(0.0)
    } else {
        Expr::Div(Box::new(a), Box::new(b))
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::Neg(Box::new(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn vars() -> Vec<String> {
        default_variables(3)
    }

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse(&json!({"add": [{"mul": [2, "x"]}, {"sin": "y"}, {"pow": ["z", 3]}]}), &vars()).unwrap();
        let v = e.eval(&[1.0, 0.5, 2.0]);
        assert!((v - (2.0 + 0.5f64.sin() + 8.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let e = Expr::parse(
            &json!({"div": [{"mul": [{"exp": "x"}, {"cos": {"mul": ["x", "y"]}}]}, {"add": [1, {"pow": ["z", 2]}]}]}),
            &vars(),
        )
        .unwrap();
        let p = [0.3, -0.7, 1.1];
        for i in 0..3 {
            let h = 1e-6;
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let fd = (e.eval(&a) - e.eval(&b)) / (2.0 * h);
            assert!((e.diff(i).eval(&p) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse(&json!("q"), &vars()).is_err());
        assert!(Expr::parse(&json!({"tan": "x"}), &vars()).is_err());
        assert!(Expr::parse(&json!({"pow": ["x", 1.5]}), &vars()).is_err());
        assert!(Expr::parse(&json!({"pow": ["x", 1000]}), &vars()).is_err());
        assert!(Expr::parse(&json!({"sub": ["x"]}), &vars()).is_err());
        assert!(Expr::parse(&json!([1, 2]), &vars()).is_err());
        assert!(Expr::parse(&json!({"add": [], "mul": []}), &vars()).is_err());
        assert!(Expr::parse_str("{", &vars()).is_err());
    }

    #[test]
    fn pi_constant() {
        let e = Expr::parse(&json!({"cos": "pi"}), &vars()).unwrap();
        assert!((e.eval(&[0.0; 3]) + 1.0).abs() < 1e-15);
    }
}
