use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::groups::FiniteGroup;

use super::{CyclicZ, LaurentElement, ModuleElement};

/// Evaluation context: ℤ[G×C], plus the Fox-embedded relation module of C_n × ℤ when G is cyclic.
#[derive(Clone, Debug)]
pub struct IdentityContext {
    group: Arc<FiniteGroup>,
    cyclic: Option<CyclicZ>,
}

impl IdentityContext {
    pub fn new(group: FiniteGroup) -> Result<Self> {
        let n = group.order() as u64;
        let cyclic_group = n >= 2 && group.generators().len() == 1;
        let cyclic = if cyclic_group { Some(CyclicZ::new(n)?) } else { None };
        let group = match &cyclic {
            Some(cz) => cz.group().clone(),
            None => Arc::new(group),
        };
        Ok(IdentityContext { group, cyclic })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    fn cz(&self) -> Result<&CyclicZ> {
        self.cyclic.as_ref().ok_or_else(|| Error::ContextMismatch("module atoms need a cyclic group G = C_n, n >= 2".into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Ring(LaurentElement),
    Module(ModuleElement),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Ring(r) => r.fmt(f),
            Value::Module(m) => m.fmt(f),
        }
    }
}

impl Value {
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Ring(r) => r.is_zero(),
            Value::Module(m) => m.is_zero(),
        }
    }

    fn add(&self, other: &Value) -> Result<Value> {
        match (self, other) {
            (Value::Ring(a), Value::Ring(b)) => Ok(Value::Ring(a.add(b)?)),
            (Value::Module(a), Value::Module(b)) => Ok(Value::Module(a.add(b)?)),
            _ => Err(Error::ContextMismatch("cannot add a ring element to a module element".into())),
        }
    }

    fn neg(&self) -> Value {
        match self {
            Value::Ring(a) => Value::Ring(a.neg()),
            Value::Module(a) => Value::Module(a.neg()),
        }
    }

    fn mul(&self, other: &Value) -> Result<Value> {
        match (self, other) {
            (Value::Ring(a), Value::Ring(b)) => Ok(Value::Ring(a.mul(b)?)),
            (Value::Module(m), Value::Ring(r)) => Ok(Value::Module(m.act(r)?)),
            (Value::Ring(r), Value::Module(m)) => {
                let scalar = r.to_triples();
                match scalar.as_slice() {
                    [] => Ok(Value::Module(m.scale(&BigInt::from(0)))),
                    [(0, 0, k)] => Ok(Value::Module(m.scale(k))),
                    _ => Err(Error::ContextMismatch("modules are right modules; only integers act on the left".into())),
                }
            }
            _ => Err(Error::ContextMismatch("cannot multiply two module elements".into())),
        }
    }
}

fn ring(v: Value) -> Result<LaurentElement> {
    match v {
        Value::Ring(r) => Ok(r),
        Value::Module(_) => Err(Error::ContextMismatch("expected a ring element".into())),
    }
}

fn module(v: Value) -> Result<ModuleElement> {
    match v {
        Value::Module(m) => Ok(m),
        Value::Ring(_) => Err(Error::ContextMismatch("expected a module element".into())),
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Schema { field: "expression".into(), message: msg.into() }
}

fn generator_index(name: &str) -> Option<usize> {
    match name {
        "a" => Some(0),
        "b" => Some(1),
        _ => name.strip_prefix('a')?.parse::<usize>().ok()?.checked_sub(1),
    }
}

fn list<'a>(v: &'a Json, op: &str) -> Result<&'a Vec<Json>> {
    v.as_array().ok_or_else(|| bad(format!("'{op}' expects an array")))
}

/// Evaluates a prefix expression such as `{"mul": [{"gen": "a"}, {"c": -1}]}`.
pub fn eval_expr(ctx: &IdentityContext, e: &Json) -> Result<Value> {
    let g = ctx.group.clone();
    if let Some(k) = e.as_i64() {
        return Ok(Value::Ring(LaurentElement::integer(g, k)));
    }
    let obj = e.as_object().ok_or_else(|| bad(format!("unexpected expression {e}")))?;
    if obj.len() != 1 {
        return Err(bad(format!("expression objects need exactly one operator: {e}")));
    }
    let (op, arg) = obj.iter().next().expect("one entry");
    match op.as_str() {
        "int" => Ok(Value::Ring(LaurentElement::integer(g, arg.as_i64().ok_or_else(|| bad("'int' expects an integer"))?))),
        "gen" => {
            let name = arg.as_str().ok_or_else(|| bad("'gen' expects a name"))?;
            let i = generator_index(name).filter(|&i| i < g.generators().len());
            let i = i.ok_or_else(|| Error::UndeclaredGenerator(name.to_string()))?;
            Ok(Value::Ring(LaurentElement::element(g.clone(), g.generators()[i])))
        }
        "c" => Ok(Value::Ring(LaurentElement::c_pow(g, arg.as_i64().ok_or_else(|| bad("'c' expects an exponent"))?))),
        "ghat" => Ok(Value::Ring(LaurentElement::ghat(g))),
        "order" => Ok(Value::Ring(LaurentElement::integer(g.clone(), g.order() as i64))),
        "add" => {
            let items = list(arg, op)?;
            let mut it = items.iter().map(|x| eval_expr(ctx, x));
            let first = it.next().ok_or_else(|| bad("'add' needs operands"))??;
            it.try_fold(first, |acc, x| acc.add(&x?))
        }
        "sub" => match list(arg, op)?.as_slice() {
            [a, b] => eval_expr(ctx, a)?.add(&eval_expr(ctx, b)?.neg()),
            _ => Err(bad("'sub' expects two operands")),
        },
        "neg" => Ok(eval_expr(ctx, arg)?.neg()),
        "mul" => {
            let items = list(arg, op)?;
            let mut it = items.iter().map(|x| eval_expr(ctx, x));
            let first = it.next().ok_or_else(|| bad("'mul' needs operands"))??;
            it.try_fold(first, |acc, x| acc.mul(&x?))
        }
        "pow" => match list(arg, op)?.as_slice() {
            [b, k] => {
                let k = k.as_u64().ok_or_else(|| bad("'pow' exponent must be a non-negative integer"))?;
                let base = eval_expr(ctx, b)?;
                (0..k).try_fold(Value::Ring(LaurentElement::one(g.clone())), |acc, _| acc.mul(&base))
            }
            _ => Err(bad("'pow' expects [base, exponent]")),
        },
        "xbar_n" => Ok(Value::Module(ctx.cz()?.r1())),
        "comm" => Ok(Value::Module(ctx.cz()?.rho())),
        "z" => Ok(Value::Module(ctx.cz()?.z())),
        "literal_z" => Ok(Value::Module(ctx.cz()?.literal_z())),
        "tau" => Ok(Value::Module(ctx.cz()?.tau(&ring(eval_expr(ctx, arg)?)?)?)),
        "tau_ghat" => Ok(Value::Module(ctx.cz()?.tau_ghat(&ring(eval_expr(ctx, arg)?)?)?)),
        "sigma" => Ok(Value::Ring(ctx.cz()?.sigma(&module(eval_expr(ctx, arg)?)?)?)),
        other => Err(bad(format!("unknown operator '{other}'"))),
    }
}

#[derive(Clone, Debug)]
pub struct IdentityOutcome {
    pub holds: bool,
    /// lhs − rhs.
    pub residue: Value,
}

/// Evaluates `lhs − rhs` exactly.
pub fn verify_identity(ctx: &IdentityContext, lhs: &Json, rhs: &Json) -> Result<IdentityOutcome> {
    let l = eval_expr(ctx, lhs)?;
    let r = eval_expr(ctx, rhs)?;
    let residue = l.add(&r.neg())?;
    Ok(IdentityOutcome { holds: residue.is_zero(), residue })
}


#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ctx(n: u64) -> IdentityContext {
        IdentityContext::new(FiniteGroup::cyclic(n).unwrap()).unwrap()
    }

    #[test]
    fn augmentation_identity_c2() {
        let x = json!({"sub": [{"gen": "a"}, 1]});
        let lhs = json!({"mul": [{"add": [x, {"mul": [{"ghat": true}, {"sub": [{"c": 1}, 1]}]}]}, {"sub": [{"order": true}, {"ghat": true}]}]});
        let rhs = json!({"mul": [{"order": true}, x]});
        assert!(verify_identity(&ctx(2), &lhs, &rhs).unwrap().holds);
    }

    #[test]
    fn sigma_tau_ghat_is_order() {
        for n in 2..=4 {
            let x = json!({"mul": [{"sub": [{"gen": "a"}, 1]}, {"c": 1}]});
            let lhs = json!({"sigma": {"tau_ghat": x}});
            let rhs = json!({"mul": [{"order": true}, x]});
            assert!(verify_identity(&ctx(n), &lhs, &rhs).unwrap().holds);
        }
    }

    #[test]
    fn z_identity_n2() {
        let lhs = json!({"mul": [{"z": true}, {"sub": [{"order": true}, {"mul": [{"ghat": true}, {"c": 1}]}]}]});
        let rhs = json!({"mul": [4, {"comm": true}]});
        let out = verify_identity(&ctx(2), &lhs, &rhs).unwrap();
        assert!(out.holds, "residue {}", out.residue);
    }

    #[test]
    fn errors() {
        assert!(matches!(eval_expr(&ctx(2), &json!({"gen": "q"})), Err(Error::UndeclaredGenerator(_))));
        let c = IdentityContext::new(FiniteGroup::abelian(&[2, 2]).unwrap()).unwrap();
        assert!(matches!(eval_expr(&c, &json!({"z": true})), Err(Error::ContextMismatch(_))));
        assert!(verify_identity(&ctx(2), &json!({"z": true}), &json!(1)).is_err());
    }
}
