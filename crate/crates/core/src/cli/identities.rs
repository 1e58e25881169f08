use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gring::{verify_identity, CyclicZ, IdentityContext, ModuleElement};
use crate::groups::{parse_finite_group, FactorSpec, FiniteGroup};
use crate::synth::{infinite_factor_generators, spans_laurent_mod, InfiniteKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl IdentityRecord {
    fn new(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        IdentityRecord { name: name.into(), holds, detail: detail.into() }
    }
}

fn ctx(n: u64) -> Result<IdentityContext> {
    IdentityContext::new(FiniteGroup::cyclic(n)?)
}

fn check(ctx: &IdentityContext, name: String, lhs: &Value, rhs: &Value) -> Result<IdentityRecord> {
    let out = verify_identity(ctx, lhs, rhs)?;
    Ok(IdentityRecord::new(name, out.holds, format!("lhs - rhs = {}", out.residue)))
}

/// The built-in exact identity suite for cyclic groups and C_n × ℤ.
pub fn standard_identities() -> Result<Vec<IdentityRecord>> {
    let mut out = Vec::new();
    for n in [2u64, 3, 6] {
        let c = ctx(n)?;
        for j in 1..n as i64 {
            let x = json!({"sub": [{"pow": [{"gen": "a"}, j]}, 1]});
            let lhs = json!({"mul": [{"add": [x, {"mul": [{"ghat": true}, {"sub": [{"c": 1}, 1]}]}]}, {"sub": [{"order": true}, {"ghat": true}]}]});
            let rhs = json!({"mul": [{"order": true}, x]});
            out.push(check(&c, format!("(x + Ĝ(c-1))(|G| - Ĝ) = |G|x, G = C{n}, x = a^{j} - 1"), &lhs, &rhs)?);
        }
    }
    for n in [2u64, 3, 4] {
        let c = ctx(n)?;
        for (j, k) in [(1, 0), (1, 1), (n as i64 - 1, -1)] {
            let u = json!({"mul": [{"sub": [{"pow": [{"gen": "a"}, j]}, 1]}, {"c": k}]});
            let lhs = json!({"sigma": {"tau_ghat": u}});
            let rhs = json!({"mul": [{"order": true}, u]});
            out.push(check(&c, format!("σ(τĜ(u)) = |G|u, G = C{n}, u = (a^{j} - 1)c^{k}"), &lhs, &rhs)?);
        }
    }
    for n in [2u64, 3] {
        let cz = CyclicZ::new(n)?;
        let group = cz.group().clone();
        let a_minus_1 = cz.a_minus_1();
        let holds = (0..group.order()).map(|g| cz.psi_vanishes_on_coinvariants(g, &a_minus_1)).collect::<Result<Vec<_>>>()?;
        out.push(IdentityRecord::new(format!("ψ_C(g) = 0 for all g, G = C{n}"), holds.iter().all(|&h| h), format!("{holds:?}")));

        let c = ctx(n)?;
        let lhs = json!({"mul": [{"z": true}, {"sub": [{"order": true}, {"mul": [{"ghat": true}, {"c": 1}]}]}]});
        let rhs = json!({"mul": [n * n, {"comm": true}]});
        out.push(check(&c, format!("z(n - Ĝc) = n²·[x,c], n = {n}"), &lhs, &rhs)?);

        for q in [5u64, 7] {
            let z = [cz.z()];
            let targets: [(&str, ModuleElement); 2] = [("x^n", cz.r1()), ("[x,c]", cz.r2())];
            let mut ok = true;
            for (_, t) in &targets {
                ok &= spans_laurent_mod(&group, &z, t, q, crate::synth::MAX_WINDOW)?;
            }
            out.push(IdentityRecord::new(format!("S = zZH + {q}S, n = {n}"), ok, "x^n and [x,c] lie in zZH + qS"));
        }

        let g = infinite_factor_generators(&FactorSpec::CyclicTimesZ { n }, InfiniteKind::Relation)?;
        let mut exact = true;
        for (v, r) in g.canonical.iter().zip(&g.exponent_witnesses) {
            exact &= g.x.act(r)? == v.scale(&BigInt::from(g.exponent));
        }
        let bound = n * n;
        out.push(IdentityRecord::new(
            format!("S/zZH has exponent dividing n², n = {n}"),
            exact && bound % g.exponent == 0,
            format!("m = {} with explicit witnesses m·v = z·r", g.exponent),
        ));
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UserIdentity {
    #[serde(default)]
    name: Option<String>,
    group: String,
    lhs: Value,
    rhs: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UserFile {
    identities: Vec<UserIdentity>,
}

/// Evaluates `{"identities": [{"group", "lhs", "rhs", "name"?}]}`.
pub(crate) fn user_identities(v: Value) -> Result<Vec<IdentityRecord>> {
    let file: UserFile = super::problem_file::typed(v, "identities")?;
    let mut out = Vec::with_capacity(file.identities.len());
    for (i, id) in file.identities.into_iter().enumerate() {
        let group = parse_finite_group(&id.group).map_err(|e| match e {
            Error::Schema { message, .. } => super::schema(&format!("identities[{i}].group"), message),
            other => other,
        })?;
        let c = IdentityContext::new(group)?;
        let name = id.name.unwrap_or_else(|| format!("identity {i} over {}", id.group));
        out.push(check(&c, name, &id.lhs, &id.rhs)?);
    }
    Ok(out)
}
