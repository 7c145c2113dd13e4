use std::path::PathBuf;
use std::process::{Command, Output};

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::Value;

use tensor_chain::chain::chain_second;
use tensor_chain::problem::ProblemFile;
use tensor_chain::random::{random_point, random_problem, ProblemLimits};
use tensor_chain::DerivativeTensor;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tensor-chain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

fn numbers(v: &Value) -> Vec<f64> {
    v["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn demo_reproduces_diag_2_200() {
    let o = run(&["demo"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("t1 + t2 = diag(2, 200): PASS"));
    assert!(
        out.contains("-400*x2"),
        "term 2 carries the Hg contribution:\n{out}"
    );
    assert!(out.contains("400*x2 + 2"));
}

#[test]
fn demo_json_terms() {
    let o = run(&["demo", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["sum"]["data"], serde_json::json!(["2", "0", "0", "200"]));
    assert_eq!(
        v["t2"]["data"],
        serde_json::json!(["-400*x2", "0", "0", "0"])
    );
    assert_eq!(v["Hg"]["shape"], serde_json::json!([2, 2, 2]));
    assert_eq!(
        v["Hg"]["data"],
        serde_json::json!(["0", "0", "0", "0", "2", "0", "0", "0"])
    );
}

#[test]
fn derive_rosenbrock_hessian_at_origin() {
    let f = fixture("rosenbrock.txt");
    let o = run(&[
        "derive",
        "--file",
        f.to_str().unwrap(),
        "--order",
        "2",
        "--point",
        "0,0",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(
        numbers(&v["evaluations"][0]["values"]),
        vec![2.0, 0.0, 0.0, 200.0]
    );

    let o = run(&[
        "derive",
        "--file",
        f.to_str().unwrap(),
        "--order",
        "2",
        "--point",
        "0,0",
    ]);
    assert!(stdout(&o).contains("[ 2    0 ]\n[ 0  200 ]"));
}

#[test]
fn derive_identity_inner_gives_gradient_of_f() {
    let f = fixture("identity_g.txt");
    let o = run(&[
        "derive",
        "--file",
        f.to_str().unwrap(),
        "--order",
        "1",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    // f = y1^2*y2 + 3*y2
    assert_eq!(
        v["derivative"]["data"],
        serde_json::json!(["2*x1*x2", "x1^2 + 3"])
    );
    assert_eq!(v["derivative"]["deriv_axes"], 1);
}

fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                c[i * m + j] += a[i * k + l] * b[l * m + j];
            }
        }
    }
    c
}

#[test]
fn derive_linear_inner_is_congruence_of_hf() {
    // f = y1*y2 + y3^3, g = (x1 + 2*x2, x1 - x2, 3*x2), so D2g = 0.
    let f = fixture("linear_g.txt");
    let o = run(&[
        "derive",
        "--file",
        f.to_str().unwrap(),
        "--order",
        "2",
        "--point",
        "0.2,-0.4",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got = numbers(&json(&o)["evaluations"][0]["values"]);

    let x2 = -0.4;
    let y3 = 3.0 * x2;
    let hf = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 6.0 * y3];
    let jg = [1.0, 2.0, 1.0, -1.0, 0.0, 3.0];
    let jg_t = [1.0, 1.0, 0.0, 2.0, -1.0, 3.0];
    let expected = matmul(&matmul(&jg_t, &hf, 2, 3, 3), &jg, 2, 3, 2);
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-9, "{got:?} vs {expected:?}");
    }
}

#[test]
fn derive_json_roundtrips_derivative_tensor() {
    let f = fixture("rosenbrock.txt");
    let o = run(&[
        "derive",
        "--file",
        f.to_str().unwrap(),
        "--order",
        "2",
        "--json",
    ]);
    let v = json(&o);
    let parsed = DerivativeTensor::from_json(&v["derivative"]).unwrap();
    let p = ProblemFile::read(&f).unwrap().to_problem().unwrap();
    assert_eq!(parsed, chain_second(&p).unwrap());
    assert_eq!(parsed.to_json(), v["derivative"]);
}

#[test]
fn verify_rosenbrock_passes() {
    let f = fixture("rosenbrock.txt");
    let o = run(&[
        "verify",
        "--file",
        f.to_str().unwrap(),
        "--point",
        "0.5,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verify: PASS"));

    let o = run(&[
        "verify",
        "--file",
        f.to_str().unwrap(),
        "--point",
        "0.5,0.5",
        "--json",
    ]);
    let v = json(&o);
    assert_eq!(v["pass"], true);
    let comparisons = v["results"][0]["comparisons"].as_array().unwrap();
    assert_eq!(comparisons.len(), 6);
    assert_eq!(
        numbers(&v["results"][0]["hessians"]["chain_second"]),
        vec![2.0, 0.0, 0.0, 200.0]
    );
}

#[test]
fn verify_uses_file_points_by_default() {
    let f = fixture("rosenbrock.txt");
    let o = run(&["verify", "--file", f.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        json(&o)["results"][0]["point"],
        serde_json::json!([0.5, 0.5])
    );
}

#[test]
fn verify_constant_outer_is_zero_everywhere() {
    let f = fixture("constant_f.txt");
    let o = run(&["verify", "--file", f.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    for method in ["chain_second", "matrix_form", "direct", "finite_diff"] {
        assert!(numbers(&v["results"][0]["hessians"][method])
            .iter()
            .all(|&x| x == 0.0));
    }
}

#[test]
fn verify_failure_exits_one_and_names_comparison() {
    let f = fixture("linear_g.txt");
    let o = run(&["verify", "--file", f.to_str().unwrap(), "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("vs finite_diff"), "{}", stderr(&o));
    assert!(stdout(&o).contains("verify: FAIL"));
}

#[test]
fn input_errors_exit_two() {
    let o = run(&[
        "verify",
        "--file",
        fixture("bad_arity.txt").to_str().unwrap(),
        "--point",
        "1,2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("arity"));

    let o = run(&[
        "derive",
        "--file",
        fixture("bad_syntax.txt").to_str().unwrap(),
        "--order",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad_syntax.txt:4:"), "{}", stderr(&o));

    let o = run(&[
        "verify",
        "--file",
        fixture("rosenbrock.txt").to_str().unwrap(),
        "--point",
        "1,2,3",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "derive",
        "--file",
        fixture("rosenbrock.txt").to_str().unwrap(),
        "--order",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "derive",
        "--file",
        "/nonexistent/problem.txt",
        "--order",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "verify",
        "--file",
        fixture("identity_g.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "no point anywhere");

    let o = run(&[
        "verify",
        "--file",
        fixture("rosenbrock.txt").to_str().unwrap(),
        "--h",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_on_random_problems() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(0xc11);
    for i in 0..20 {
        let p = random_problem(&mut rng, &ProblemLimits::default());
        let x = random_point(&mut rng, p.x_vars().len(), 1.0);
        let path = dir.path().join(format!("p{i}.txt"));
        std::fs::write(&path, ProblemFile::from_problem(&p, vec![x]).render()).unwrap();
        let o = run(&["verify", "--file", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "problem {i}:\n{}", stdout(&o));
    }
}
