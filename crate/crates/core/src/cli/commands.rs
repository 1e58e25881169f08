use std::collections::BTreeSet;

use serde_json::{json, Value};

use super::identities::user_identities;
use super::problem_file::typed;
use super::{schema, standard_identities, Report, Request};
use crate::error::{Error, Result};
use crate::exactla::primes::{is_prime, smallest_prime_outside};
use crate::formulas::{
    bergman_mod_p, bridson_tweedale, coprime_augmentation, coprime_relation, d_induced, mixed_augmentation, mixed_relation,
    nilpotent_gap_zero, relation_normal_rank, resolution_kernel_count, Component, FormulaReport, FreeProductProblem, GapZeroVerdict,
    HypothesisCheck, ModuleKind,
};
use crate::groups::{parse_factor_list, FactorSpec, Presentation};
use crate::synth::{synthesize_generators, verify_certificate, GenerationCertificate, Verdict};

pub(super) fn dispatch(req: &Request) -> Result<Report> {
    log::info!("{} {}", req.command, req.factors.as_deref().unwrap_or(""));
    match req.command.as_str() {
        "augmentation" => augmentation(req),
        "relation" => relation(req),
        "kernel" => kernel(req),
        "gap" => gap(req),
        "good-check" => good_check(req),
        "synthesize" => synthesize(req),
        "verify" => verify(req),
        "identity-check" => identity_check(req),
        "bridson" => bridson(req),
        other => Err(schema("command", format!("unknown command {other:?}"))),
    }
}

fn module_kind(req: &Request, default: ModuleKind) -> Result<ModuleKind> {
    match req.module.as_deref() {
        None => Ok(default),
        Some("augmentation") => Ok(ModuleKind::Augmentation),
        Some("relation") => Ok(ModuleKind::Relation),
        Some("kernel") => Ok(ModuleKind::Kernel(req.stage)),
        Some(other) => Err(schema("module", format!("expected augmentation, relation or kernel, got {other:?}"))),
    }
}

fn problem(req: &Request, kind: ModuleKind) -> Result<FreeProductProblem> {
    let text = req.factors.as_deref().ok_or_else(|| schema("factors", "missing factor list"))?;
    let mut factors = parse_factor_list(text)?;
    for (i, spec) in req.presentations.iter().enumerate() {
        let field = format!("presentations[{i}]");
        let factor = factors.get_mut(spec.factor).ok_or_else(|| schema(&field, format!("no factor with index {}", spec.factor)))?;
        let FactorSpec::Finite { group, presentation } = factor else {
            return Err(schema(&field, format!("factor {factor} is not finite")));
        };
        let gens: Vec<&str> = spec.generators.iter().map(String::as_str).collect();
        let rels: Vec<&str> = spec.relators.iter().map(String::as_str).collect();
        *presentation = Some(Presentation::parse(group.clone(), &gens, &rels)?);
    }
    let p = FreeProductProblem::new(factors, kind)?;
    if req.periods.is_empty() {
        Ok(p)
    } else {
        p.with_periods(req.periods.clone())
    }
}

fn check_primes(ps: &[u64]) -> Result<()> {
    match ps.iter().find(|&&p| !is_prime(p)) {
        Some(&p) => Err(Error::InvalidModulus(p)),
        None => Ok(()),
    }
}

fn hyp(name: &str, holds: bool, detail: impl Into<String>) -> HypothesisCheck {
    HypothesisCheck { name: name.into(), holds, detail: detail.into() }
}

/// The closed-formula route when its hypotheses hold, otherwise the prime table.
fn with_fallback(p: &FreeProductProblem, closed: fn(&FreeProductProblem) -> Result<FormulaReport>) -> Result<FormulaReport> {
    match closed(p) {
        Ok(r) => Ok(r),
        Err(e @ (Error::Hypothesis(_) | Error::Unsupported(_))) => {
            let mut r = d_induced(p)?;
            r.hypotheses.push(hyp("closed formula applies", false, format!("{e}; value taken from the prime table")));
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

/// Appends rows for requested primes, which may not exceed the maximum.
fn extend_rows(p: &FreeProductProblem, r: &mut FormulaReport, extra: &[u64]) -> Result<()> {
    check_primes(extra)?;
    for &q in extra {
        if r.row(q).is_some() {
            continue;
        }
        let row = bergman_mod_p(p, q)?;
        if row.sum > r.result {
            return Err(Error::Internal(format!("row at {q} exceeds the reported maximum")));
        }
        r.per_prime.push(row);
    }
    r.per_prime.sort_by_key(|row| (row.generic, row.p));
    Ok(())
}

fn formula_report(command: &str, r: &FormulaReport) -> Report {
    let mut out = Report::new(command, r.problem.clone());
    out.result = json!(r.result);
    out.per_prime = json!(r.per_prime);
    out.hypotheses = json!(r.hypotheses);
    out.details.insert("argmax".into(), json!(r.argmax));
    out.details.insert("source".into(), json!(r.provenance));
    if let Some(g) = r.gap {
        out.details.insert("gap".into(), json!(g));
    }
    if let Some(a) = r.adef {
        out.details.insert("adef".into(), json!(a));
    }
    for (k, v) in &r.details {
        out.details.insert(k.clone(), v.clone());
    }
    if r.hypotheses.iter().any(|h| h.name == "closed formula applies" && !h.holds) {
        out.details.insert("source".into(), json!("prime-table"));
    }
    out
}

fn all_finite(p: &FreeProductProblem) -> bool {
    p.factors.iter().all(|f| matches!(f, FactorSpec::Finite { .. }))
}

fn augmentation_formula(p: &FreeProductProblem) -> Result<FormulaReport> {
    if all_finite(p) {
        with_fallback(p, coprime_augmentation)
    } else {
        with_fallback(p, mixed_augmentation)
    }
}

fn augmentation(req: &Request) -> Result<Report> {
    let p = problem(req, ModuleKind::Augmentation)?;
    let mut r = augmentation_formula(&p)?;
    extend_rows(&p, &mut r, &req.prime_support)?;
    Ok(formula_report("augmentation", &r))
}

fn relation(req: &Request) -> Result<Report> {
    let p = problem(req, ModuleKind::Relation)?;
    if req.normal_generators {
        relation_normal_rank(&p)?;
    }
    let mut r = if all_finite(&p) { with_fallback(&p, coprime_relation)? } else { with_fallback(&p, mixed_relation)? };
    extend_rows(&p, &mut r, &req.prime_support)?;
    Ok(formula_report("relation", &r))
}

fn kernel(req: &Request) -> Result<Report> {
    let p = problem(req, ModuleKind::Kernel(req.stage))?;
    let mut r = resolution_kernel_count(&p, req.stage)?;
    extend_rows(&p, &mut r, &req.prime_support)?;
    Ok(formula_report("kernel", &r))
}

fn gap(req: &Request) -> Result<Report> {
    let p = problem(req, ModuleKind::Augmentation)?;
    let r = augmentation_formula(&p)?;
    let d_group: usize = p.factors.iter().map(FactorSpec::min_generators_group).collect::<Result<Vec<_>>>()?.iter().sum();
    let gap = d_group as i64 - r.result as i64;
    if let Some(g) = r.gap {
        if g != gap {
            return Err(Error::Internal(format!("gap formula {g} differs from d(G) - d_G(ΔG) = {gap}")));
        }
    }
    let mut out = formula_report("gap", &r);
    out.result = json!(gap);
    out.details.insert("gap".into(), json!(gap));
    out.details.insert("d_module".into(), json!(r.result));
    out.details.insert("d_group".into(), json!(d_group));
    let mut hyps = r.hypotheses.clone();
    hyps.push(hyp("d(G) is the sum of the factor ranks", true, format!("{d_group}")));
    let nilpotent = p.factors.iter().all(|f| f.finite_part().is_nilpotent());
    if nilpotent {
        let verdict = nilpotent_gap_zero(&p)?;
        if matches!(verdict, GapZeroVerdict::GapZero(_)) && gap != 0 {
            return Err(Error::Internal(format!("gap-zero criterion holds but gap = {gap}")));
        }
        out.details.insert("nilpotent_criterion".into(), json!(verdict));
    }
    out.hypotheses = json!(hyps);
    Ok(out)
}

fn good_check(req: &Request) -> Result<Report> {
    check_primes(&req.prime_support)?;
    let p = problem(req, module_kind(req, ModuleKind::Augmentation)?)?;
    let mut out = Report::new("good-check", p.to_string());
    let mut hyps = Vec::new();
    let mut witnesses = Vec::new();
    let mut passed = 0usize;
    for (i, comp) in p.components()?.iter().enumerate() {
        let Component::Finite { lattice } = comp else {
            hyps.push(hyp(&format!("factor {i}"), true, format!("{}: explicit generators, no search needed", p.factors[i])));
            witnesses.push(Value::Null);
            continue;
        };
        let claimed = lattice.group().primes();
        let mut tested: BTreeSet<u64> = claimed.union(&req.prime_support.iter().copied().collect()).copied().collect();
        if tested.len() == claimed.len() {
            tested.insert(smallest_prime_outside(&claimed));
        }
        match crate::synth::check_good(lattice, &claimed, &tested) {
            Ok(w) => {
                passed += 1;
                hyps.push(hyp(
                    &format!("factor {i}: (g1) and (g2)"),
                    true,
                    format!("δ = {}, exponent {}, residual counts {:?}", w.delta, w.exponent, w.outside_counts),
                ));
                witnesses.push(serde_json::to_value(&w).map_err(|e| Error::Internal(e.to_string()))?);
            }
            Err(Error::Budget(m)) => return Err(Error::Budget(format!("factor {i}: {m}"))),
            Err(e) => return Err(e),
        }
    }
    out.result = json!(passed);
    out.provenance = "search-witness".into();
    out.hypotheses = json!(hyps);
    out.details.insert("witnesses".into(), Value::Array(witnesses));
    Ok(out)
}

fn verdict_report(out: &mut Report, v: &Verdict) {
    out.details.insert("verdict".into(), json!(v));
    let (provenance, code) = match v {
        Verdict::Verified { .. } => ("certificate-verified", 0),
        Verdict::Incomplete { .. } => ("certificate-incomplete", 2),
        Verdict::Refuted { .. } => ("certificate-refuted", 1),
    };
    out.provenance = provenance.into();
    out.exit_code = code;
}

fn synthesize(req: &Request) -> Result<Report> {
    let p = problem(req, module_kind(req, ModuleKind::Augmentation)?)?;
    let table = d_induced(&p)?;
    let s = synthesize_generators(&p)?;
    let verdict = if req.depth_cap == crate::synth::DEFAULT_DEPTH_CAP {
        s.verdict.clone()
    } else {
        verify_certificate(&s.certificate, &p, req.depth_cap)?
    };
    let mut out = formula_report("synthesize", &table);
    out.result = json!(s.certificate.generators.len());
    out.certificate = Some(serde_json::to_value(&s.certificate).map_err(|e| Error::Internal(e.to_string()))?);
    verdict_report(&mut out, &verdict);
    if let Verdict::Refuted { reason } = &verdict {
        return Err(Error::Internal(format!("synthesized set refuted: {reason}")));
    }
    Ok(out)
}

fn verify(req: &Request) -> Result<Report> {
    let p = problem(req, module_kind(req, ModuleKind::Augmentation)?)?;
    let cert: GenerationCertificate = typed(req.certificate.clone().ok_or_else(|| schema("certificate", "missing certificate"))?, "certificate")?;
    if cert.problem != p.to_string() {
        return Err(schema("certificate.problem", format!("certificate is for {:?}, not {:?}", cert.problem, p.to_string())));
    }
    let verdict = verify_certificate(&cert, &p, req.depth_cap)?;
    let table = d_induced(&p)?;
    let mut out = formula_report("verify", &table);
    out.result = json!(cert.generators.len());
    verdict_report(&mut out, &verdict);
    Ok(out)
}

fn identity_check(req: &Request) -> Result<Report> {
    let (records, builtin) = match &req.identities {
        Some(v) => (user_identities(v.clone())?, false),
        None => (standard_identities()?, true),
    };
    let holding = records.iter().filter(|r| r.holds).count();
    let mut out = Report::new("identity-check", if builtin { "built-in suite" } else { "user identities" });
    out.provenance = "exact-evaluation".into();
    out.result = json!(holding);
    out.details.insert("total".into(), json!(records.len()));
    out.hypotheses = json!(records);
    if holding != records.len() {
        out.exit_code = if builtin { 3 } else { 1 };
    }
    Ok(out)
}

fn bridson(req: &Request) -> Result<Report> {
    if req.m.is_empty() {
        return Err(schema("m", "missing list of m_i"));
    }
    let r = bridson_tweedale(&req.m)?;
    Ok(formula_report("bridson", &r))
}
