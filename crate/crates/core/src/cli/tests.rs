use serde_json::json;

use super::*;

fn run_req(req: &Request) -> Report {
    execute(req, None)
}

fn without_timings(mut r: Report) -> Report {
    r.timings.clear();
    r
}

#[test]
fn relation_example() {
    let r = run_req(&Request::new("relation").factors("C2xZ,C3xZ"));
    assert_eq!(r.exit_code, 0, "{r:?}");
    assert_eq!(r.result, json!(3));
    assert_eq!(r.details["argmax"], json!([2, 3]));
}

#[test]
fn gap_example() {
    let r = run_req(&Request::new("gap").factors("C2*C3"));
    assert_eq!(r.result, json!(0));
    let r = run_req(&Request::new("gap").factors("C2xZ,C3xZ"));
    assert_eq!(r.result, json!(1));
    assert_eq!(r.details["d_module"], json!(3));
}

#[test]
fn bridson_examples() {
    let mut req = Request::new("bridson");
    req.m = vec![2, 3];
    let r = run_req(&req);
    assert_eq!(r.result, json!(3));
    assert_eq!(r.details["q"], json!(["8", "63"]));
    req.m = vec![2, 4];
    let r = run_req(&req);
    assert_eq!(r.exit_code, 1);
    assert_eq!(r.error.unwrap().kind, "hypothesis");
    req.m.clear();
    assert_eq!(run_req(&req).error.unwrap().field.as_deref(), Some("m"));
}

#[test]
fn normal_generator_count_is_refused() {
    let mut req = Request::new("relation").factors("C2xZ,C3xZ");
    req.normal_generators = true;
    let r = run_req(&req);
    assert_eq!(r.exit_code, 1);
    assert_eq!(r.provenance, "refused");
    assert!(r.result.is_null());
}

#[test]
fn schema_errors_name_the_field() {
    let r = run_req(&Request::new("augmentation"));
    assert_eq!(r.error.unwrap().field.as_deref(), Some("factors"));
    let err = ProblemFile::from_value(json!({"command": "gap", "factors": "C2", "stage": "x"})).unwrap_err();
    assert!(matches!(err, Error::Schema { ref field, .. } if field == "file.stage"), "{err:?}");
    let err = ProblemFile::from_value(json!({"command": "gap", "expected": {"reslt": 1}})).unwrap_err();
    assert!(matches!(err, Error::Schema { ref field, .. } if field.starts_with("expected")), "{err:?}");
    assert_eq!(run_req(&Request::new("augmentation").factors("C2,Q7")).exit_code, 1);
    assert_eq!(run_req(&Request::new("frobnicate").factors("C2")).exit_code, 1);
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&Error::Hypothesis("h".into())), 1);
    assert_eq!(exit_code(&Error::Budget("b".into())), 2);
    assert_eq!(exit_code(&Error::Internal("i".into())), 3);
}

#[test]
fn deterministic_reports() {
    let req = Request::new("synthesize").factors("C2*C3");
    assert_eq!(without_timings(run_req(&req)), without_timings(run_req(&req)));
}

#[test]
fn cache_hits_corruption_and_bypass() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path().to_path_buf());
    let req = Request::new("augmentation").factors("C6,C5");
    let first = execute(&req, Some(&cache));
    let key = Cache::key(&req);
    let path = dir.path().join(format!("{key}.json"));
    assert!(path.exists());
    let second = execute(&req, Some(&cache));
    assert_eq!(serde_json::to_string(&first).unwrap(), serde_json::to_string(&second).unwrap());

    std::fs::write(&path, "{not json").unwrap();
    assert!(cache.load(&key).is_none());
    let third = execute(&req, Some(&cache));
    assert_eq!(without_timings(third), without_timings(first.clone()));
    assert!(cache.load(&key).is_some());

    let mut other = req.clone();
    other.seed = 1;
    assert_ne!(Cache::key(&other), key);
    let errors = Request::new("augmentation");
    execute(&errors, Some(&cache));
    assert!(cache.load(&Cache::key(&errors)).is_none());
}

#[test]
fn certificate_round_trip() {
    let req = Request::new("synthesize").factors("C2xZ,C3xZ").module("relation");
    let s = run_req(&req);
    assert_eq!(s.exit_code, 0, "{s:?}");
    assert_eq!(s.provenance, "certificate-verified");
    let mut v = Request::new("verify").factors("C2xZ,C3xZ").module("relation");
    v.certificate = s.certificate.clone();
    let r = run_req(&v);
    assert_eq!(r.exit_code, 0, "{r:?}");
    v.depth_cap = 0;
    assert_eq!(run_req(&v).exit_code, 2);
    let mut wrong = v.clone();
    wrong.factors = Some("C2xZ,C5xZ".into());
    assert_eq!(run_req(&wrong).error.unwrap().field.as_deref(), Some("certificate.problem"));
    let mut broken = v.clone();
    broken.certificate = Some(json!({"problem": 3}));
    assert_eq!(run_req(&broken).exit_code, 1);
}

#[test]
fn identity_suite_holds() {
    let r = run_req(&Request::new("identity-check"));
    assert_eq!(r.exit_code, 0, "{r:?}");
    assert_eq!(r.result, r.details["total"]);
    let mut req = Request::new("identity-check");
    req.identities = Some(json!({"identities": [
        {"group": "C2", "lhs": {"mul": [{"gen": "a"}, {"gen": "a"}]}, "rhs": 1},
        {"group": "C3", "lhs": {"gen": "a"}, "rhs": 1}
    ]}));
    let r = run_req(&req);
    assert_eq!(r.result, json!(1));
    assert_eq!(r.exit_code, 1);
}

#[test]
fn good_check_and_kernel() {
    let r = run_req(&Request::new("good-check").factors("C2xC2*C3"));
    assert_eq!(r.result, json!(2), "{r:?}");
    let mut k = Request::new("kernel").factors("C2,C3");
    k.stage = 2;
    assert_eq!(run_req(&k).exit_code, 1);
    k.stage = 1;
    assert_eq!(run_req(&k).exit_code, 0);
}

#[test]
fn problem_file_expectations() {
    let pf = ProblemFile::from_value(json!({
        "command": "augmentation", "factors": "C2xZ,C3xZ",
        "expected": {"result": 3, "gap": 1, "per_prime": {"2": 3, "5": 2}}
    }))
    .unwrap();
    assert_eq!(problem_file::run_problem_file(&pf, None).exit_code, 0);
    let pf = ProblemFile::from_value(json!({"command": "augmentation", "factors": "C2xZ,C3xZ", "expected": {"result": 4}})).unwrap();
    assert_eq!(problem_file::run_problem_file(&pf, None).exit_code, 3);
    let pf = ProblemFile::from_value(json!({"command": "bridson", "m": [2, 4], "expected": {"exit_code": 1}})).unwrap();
    assert_eq!(problem_file::run_problem_file(&pf, None).exit_code, 0);
}

#[test]
fn presentations_replace_the_natural_one() {
    let mut req = Request::new("relation").factors("C2xC2,C3");
    req.presentations = vec![PresentationSpec { factor: 0, generators: vec!["a".into(), "b".into()], relators: vec!["a^2".into(), "b^2".into(), "(a b)^2".into()] }];
    let r = run_req(&req);
    assert_eq!(r.exit_code, 0, "{r:?}");
    req.presentations[0].factor = 1;
    assert_eq!(run_req(&req).exit_code, 1);
}

#[test]
fn pretty_table_lists_rows() {
    let r = run_req(&Request::new("relation").factors("C2xZ,C3xZ"));
    let t = render_table(&r);
    assert!(t.contains("5 (gen)"));
    assert!(t.contains("exit code 0"));
}
