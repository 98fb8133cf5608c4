//! Flattened evaluation of expression DAGs.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{postorder, Expr, Func, Kind};
use crate::error::ExprError;
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Scalars a [`Tape`] can be evaluated in.
pub trait TapeScalar: Scalar {
    fn value(&self) -> f64;
    /// Number of derivative orders carried (0 for plain floats).
    fn order(&self) -> u8;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
}

impl TapeScalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn order(&self) -> u8 {
        0
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

impl TapeScalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn order(&self) -> u8 {
        Jet::order(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
}

/// Variable bindings for [`eval`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env(BTreeMap<String, f64>);

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

impl<const N: usize> From<[(&str, f64); N]> for Env {
    fn from(pairs: [(&str, f64); N]) -> Self {
        Env(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(u32),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, i32),
    Func(Func, u32),
}

/// A compiled set of expressions sharing one instruction stream; each unique
/// subexpression is evaluated once per call.
#[derive(Clone)]
pub struct Tape {
    ops: Vec<Op>,
    roots: Vec<u32>,
    vars: Vec<Arc<str>>,
    nodes: Vec<Expr>,
}

impl Tape {
    /// Compile `roots` with inputs bound positionally to `vars`.
    pub fn compile<V: AsRef<str>>(roots: &[Expr], vars: &[V]) -> Result<Tape, ExprError> {
        let vars: Vec<Arc<str>> = vars.iter().map(|v| Arc::from(v.as_ref())).collect();
        let order = postorder(roots);
        let mut slot: HashMap<u64, u32> = HashMap::with_capacity(order.len());
        let mut ops = Vec::with_capacity(order.len());
        for (i, n) in order.iter().enumerate() {
            let s = |e: &Expr| slot[&e.id()];
            let op = match n.kind() {
                Kind::Const(c) => Op::Const(*c),
                Kind::Var(v) => {
                    let k = vars
                        .iter()
                        .position(|x| x == v)
                        .ok_or_else(|| ExprError::UnboundVariable(v.to_string()))?;
                    Op::Var(k as u32)
                }
                Kind::Neg(a) => Op::Neg(s(a)),
                Kind::Add(a, b) => Op::Add(s(a), s(b)),
                Kind::Sub(a, b) => Op::Sub(s(a), s(b)),
                Kind::Mul(a, b) => Op::Mul(s(a), s(b)),
                Kind::Div(a, b) => Op::Div(s(a), s(b)),
                Kind::Pow(a, k) => Op::Pow(s(a), *k),
                Kind::Func(f, a) => Op::Func(*f, s(a)),
            };
            slot.insert(n.id(), i as u32);
            ops.push(op);
        }
        let roots = roots.iter().map(|r| slot[&r.id()]).collect();
        Ok(Tape {
            ops,
            roots,
            vars,
            nodes: order,
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn vars(&self) -> &[Arc<str>] {
        &self.vars
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn eval<S: TapeScalar>(&self, inputs: &[S]) -> Result<Vec<S>, ExprError> {
        let mut scratch = Vec::new();
        self.eval_with(inputs, &mut scratch)
    }

    /// Evaluate reusing `scratch` as the slot buffer.
    pub fn eval_with<S: TapeScalar>(
        &self,
        inputs: &[S],
        scratch: &mut Vec<S>,
    ) -> Result<Vec<S>, ExprError> {
        assert_eq!(inputs.len(), self.vars.len(), "tape input arity");
        scratch.clear();
        scratch.reserve(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let r = |k: &u32| &scratch[*k as usize];
            let v = match op {
                Op::Const(c) => S::constant(*c),
                Op::Var(k) => inputs[*k as usize].clone(),
                Op::Neg(a) => r(a).neg(),
                Op::Add(a, b) => r(a).add(r(b)),
                Op::Sub(a, b) => r(a).sub(r(b)),
                Op::Mul(a, b) => r(a).mul(r(b)),
                Op::Div(a, b) => {
                    if r(b).value() == 0.0 {
                        return Err(self.domain(i, "division by zero"));
                    }
                    r(a).div(r(b))
                }
                Op::Pow(a, k) => {
                    if *k < 0 && r(a).value() == 0.0 {
                        return Err(self.domain(i, "negative power of zero"));
                    }
                    r(a).powi(*k)
                }
                Op::Func(f, a) => {
                    let x = r(a);
                    match f {
                        Func::Sin => x.sin(),
                        Func::Cos => x.cos(),
                        Func::Exp => x.exp(),
                        Func::Sqrt => {
                            if x.value() < 0.0 {
                                return Err(self.domain(i, "sqrt of negative"));
                            }
                            if x.value() == 0.0 && x.order() > 0 {
                                return Err(self.domain(i, "sqrt not differentiable at zero"));
                            }
                            x.sqrt()
                        }
                    }
                }
            };
            scratch.push(v);
        }
        Ok(self
            .roots
            .iter()
            .map(|&k| scratch[k as usize].clone())
            .collect())
    }

    fn domain(&self, i: usize, reason: &'static str) -> ExprError {
        ExprError::Domain {
            reason,
            subtree: self.nodes[i].to_string(),
        }
    }
}

/// Evaluate a single expression; every free variable must be bound.
pub fn eval(e: &Expr, env: &Env) -> Result<f64, ExprError> {
    let vars: Vec<Arc<str>> = e.free_vars().into_iter().collect();
    let mut inputs = Vec::with_capacity(vars.len());
    for v in &vars {
        inputs.push(
            env.get(v)
                .ok_or_else(|| ExprError::UnboundVariable(v.to_string()))?,
        );
    }
    let tape = Tape::compile(std::slice::from_ref(e), &vars)?;
    Ok(tape.eval(&inputs)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn evaluates_simple_expressions() {
        let env = Env::from([("u", 2.0), ("v", 1.0)]);
        assert_eq!(eval(&parse("u^2+v").unwrap(), &env).unwrap(), 5.0);
        assert_eq!(
            eval(&parse("sin(u)").unwrap(), &Env::from([("u", 0.0)])).unwrap(),
            0.0
        );
    }

    #[test]
    fn division_by_zero_names_subtree() {
        let err = eval(&parse("1 + 1/u").unwrap(), &Env::from([("u", 0.0)])).unwrap_err();
        assert_eq!(
            err,
            ExprError::Domain {
                reason: "division by zero",
                subtree: "1/u".into()
            }
        );
    }

    #[test]
    fn sqrt_of_negative() {
        let err = eval(&parse("sqrt(u - 2)").unwrap(), &Env::from([("u", 1.0)])).unwrap_err();
        assert!(matches!(
            err,
            ExprError::Domain {
                reason: "sqrt of negative",
                ..
            }
        ));
    }

    #[test]
    fn unbound_variable_fails_loudly() {
        let err = eval(&parse("u + w").unwrap(), &Env::from([("u", 1.0)])).unwrap_err();
        assert_eq!(err, ExprError::UnboundVariable("w".into()));
    }

    #[test]
    fn shared_roots_in_one_tape() {
        let a = parse("u*v").unwrap();
        let b = parse("u*v + 1").unwrap();
        let tape = Tape::compile(&[a, b], &["u", "v"]).unwrap();
        assert_eq!(tape.len(), 5);
        let out = tape.eval(&[2.0, 3.0]).unwrap();
        assert_eq!(out, vec![6.0, 7.0]);
    }

    #[test]
    fn jet_evaluation_gives_gradient() {
        let e = parse("u^2*v").unwrap();
        let tape = Tape::compile(&[e], &["u", "v"]).unwrap();
        let out = tape
            .eval(&[Jet::variable(3.0, 0, 2), Jet::variable(2.0, 1, 2)])
            .unwrap();
        assert_eq!(out[0].value(), 18.0);
        assert_eq!(out[0].grad(0), 12.0);
        assert_eq!(out[0].grad(1), 9.0);
        assert_eq!(out[0].hess(0, 0), 4.0);
        assert_eq!(out[0].hess(0, 1), 6.0);
    }
}
