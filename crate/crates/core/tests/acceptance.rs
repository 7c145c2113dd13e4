//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tensor_chain::chain::{chain_second, direct_hessian, hessian_chain_matrix, product_rule_sides};
use tensor_chain::deriv::{derivative_order, eval_tensor, hessian, DerivativeTensor};
use tensor_chain::random::{random_expr_tensor, random_point, random_problem, ProblemLimits};
use tensor_chain::tensor::{dot, is_symmetric_in_axes, rational_tensor};
use tensor_chain::{
    compare_tensors, fd_hessian, tensor_expr_equal, AxisPairing, CompositionProblem, Expr,
    FdConfig, Tensor, VarSpace, VectorFunction,
};

const SUITE_SIZE: usize = 200;
const POINTS_PER_PROBLEM: usize = 10;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: impl Into<String>, fail: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(fail.into())
    }
}

fn within(elapsed: Duration, budget: Duration, what: &str) -> Outcome {
    check(
        elapsed < budget,
        format!("{what} in {:.2?}", elapsed),
        format!("{what} took {:.2?}, budget {:.0?}", elapsed, budget),
    )
}

// 1. Rosenbrock reproduction

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ys = VarSpace::new(["y1", "y2"]).unwrap();
    let xs = VarSpace::new(["x1", "x2"]).unwrap();
    let f = VectorFunction::parse_scalar("(1-y1)^2 + 100*(y1^2-y2)^2", &ys).unwrap();
    let g = VectorFunction::parse(&["x1", "x1^2 - x2"], &xs).unwrap();
    let p = CompositionProblem::new(f, g).unwrap();
    let h = chain_second(&p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let expected = rational_tensor(&[2, 2], &[2, 0, 0, 200])
        .unwrap()
        .map(|c| Expr::constant(c.clone()));
    let constant = h.values().data().iter().all(|e| e.as_constant().is_some());
    check(
        constant && tensor_expr_equal(h.values(), &expected),
        "chain_second = [[2, 0], [0, 200]] exactly",
        format!("chain_second = {}", h.values()),
    )?;
    within(elapsed, Duration::from_secs(1), "chain_second")
        .map(|t| format!("chain_second = [[2, 0], [0, 200]] exactly, {t}"))
}

// 2-5. Randomized suite

struct SuiteItem {
    problem: CompositionProblem,
    chain: DerivativeTensor,
}

struct Suite {
    items: Vec<SuiteItem>,
    /// Order >= 2 tensors produced along the way.
    higher: Vec<DerivativeTensor>,
    mismatches_matrix: Vec<usize>,
    mismatches_direct: Vec<usize>,
    elapsed_matrix: Duration,
}

fn build_suite() -> Suite {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let limits = ProblemLimits {
        max_x: 3,
        max_y: 3,
        outer_degree: 3,
        inner_degree: 3,
        max_terms: 4,
    };
    let mut suite = Suite {
        items: Vec::new(),
        higher: Vec::new(),
        mismatches_matrix: Vec::new(),
        mismatches_direct: Vec::new(),
        elapsed_matrix: Duration::ZERO,
    };
    for i in 0..SUITE_SIZE {
        let problem = random_problem(&mut rng, &limits);

        let start = Instant::now();
        let chain = chain_second(&problem).expect("chain_second");
        let matrix = hessian_chain_matrix(&problem).expect("matrix form");
        if !tensor_expr_equal(chain.values(), matrix.values()) {
            suite.mismatches_matrix.push(i);
        }
        suite.elapsed_matrix += start.elapsed();

        let direct = direct_hessian(&problem).expect("direct");
        if !tensor_expr_equal(chain.values(), direct.values()) {
            suite.mismatches_direct.push(i);
        }

        suite
            .higher
            .push(hessian(problem.outer()).expect("outer Hessian"));
        suite
            .higher
            .push(derivative_order(problem.inner(), 2).expect("inner second derivative"));
        suite
            .higher
            .push(derivative_order(problem.inner(), 3).expect("inner third derivative"));
        suite.higher.push(matrix);
        suite.higher.push(direct);
        suite.items.push(SuiteItem { problem, chain });
    }
    suite
}

fn criterion_2(s: &Suite) -> Outcome {
    check(
        s.mismatches_matrix.is_empty(),
        format!("{SUITE_SIZE} problems, matrix form = tensor form"),
        format!("mismatches at problems {:?}", s.mismatches_matrix),
    )?;
    within(s.elapsed_matrix, Duration::from_secs(30), "both forms")
        .map(|t| format!("{SUITE_SIZE} problems, matrix form = tensor form, {t}"))
}

fn criterion_3(s: &Suite) -> Outcome {
    check(
        s.mismatches_direct.is_empty(),
        format!("{SUITE_SIZE} problems, chain rule = direct substitution"),
        format!("mismatches at problems {:?}", s.mismatches_direct),
    )
}

fn criterion_4(s: &Suite) -> (Outcome, Vec<Tensor<f64>>) {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let cfg = FdConfig::new(FdConfig::DEFAULT_STEP, FdConfig::GENERAL_TOLERANCE).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_quadratic: f64 = 0.0;
    let mut quadratic = 0;
    let mut failures = Vec::new();
    let mut fd_tensors = Vec::new();
    for (i, item) in s.items.iter().enumerate() {
        let p = &item.problem;
        let is_quadratic = p.composed().degree() <= 2;
        if is_quadratic {
            quadratic += 1;
        }
        let tol = if is_quadratic {
            FdConfig::QUADRATIC_TOLERANCE
        } else {
            FdConfig::GENERAL_TOLERANCE
        };
        for _ in 0..POINTS_PER_PROBLEM {
            let x = random_point(&mut rng, p.x_vars().len(), 1.0);
            let point: HashMap<String, f64> = p.x_vars().assign(&x).unwrap();
            let exact = eval_tensor(&item.chain, &point).unwrap();
            let approx = fd_hessian(|x| p.eval_composed(x).unwrap(), &x, &cfg);
            let report = compare_tensors(&exact, &approx, tol).unwrap();
            if is_quadratic {
                worst_quadratic = worst_quadratic.max(report.max_rel_err);
            } else {
                worst = worst.max(report.max_rel_err);
            }
            if !report.pass {
                failures.push((i, x, report.max_rel_err));
            }
            fd_tensors.push(approx);
        }
    }
    let summary = format!(
        "{} comparisons, worst rel err {worst:.2e} (<= 1e-4), {quadratic} quadratic problems \
         worst {worst_quadratic:.2e} (<= 1e-6)",
        s.items.len() * POINTS_PER_PROBLEM
    );
    let outcome = check(
        failures.is_empty(),
        summary.clone(),
        format!(
            "{} failures, first {:?}; {summary}",
            failures.len(),
            failures.first()
        ),
    );
    (outcome, fd_tensors)
}

fn criterion_5(s: &Suite, fd_tensors: &[Tensor<f64>]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let symbolic = s.items.iter().map(|i| &i.chain).chain(&s.higher);
    for (k, t) in symbolic.enumerate() {
        if t.deriv_axes() >= 2 {
            checked += 1;
            if !t.is_symmetric() {
                bad.push(k);
            }
        }
    }
    for t in fd_tensors {
        checked += 1;
        if !is_symmetric_in_axes(t, &[0, 1]).unwrap() {
            bad.push(usize::MAX);
        }
    }
    check(
        bad.is_empty(),
        format!("{checked} tensors of order >= 2 symmetric in their derivative axes"),
        format!("{} asymmetric tensors of {checked}", bad.len()),
    )
}

// 6. Matmul equivalence

fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    BigRational::new(
        BigInt::from(rng.gen_range(-50i64..=50)),
        BigInt::from(rng.gen_range(1i64..=9)),
    )
}

fn naive_matmul(
    a: &[BigRational],
    b: &[BigRational],
    n: usize,
    k: usize,
    m: usize,
) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); n * m];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                c[i * m + j] += &a[i * k + l] * &b[l * m + j];
            }
        }
    }
    c
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut bad = Vec::new();
    for case in 0..100 {
        let (n, k, m) = (
            rng.gen_range(1..=5),
            rng.gen_range(1..=5),
            rng.gen_range(1..=5),
        );
        let a: Vec<BigRational> = (0..n * k).map(|_| random_rational(&mut rng)).collect();
        let b: Vec<BigRational> = (0..k * m).map(|_| random_rational(&mut rng)).collect();
        let ta = Tensor::from_vec(&[n, k], a.clone()).unwrap();
        let tb = Tensor::from_vec(&[k, m], b.clone()).unwrap();
        let c = dot(&ta, &tb, &AxisPairing::single(1, 0)).unwrap();
        if c.dims() != [n, m] || c.data() != naive_matmul(&a, &b, n, k, m).as_slice() {
            bad.push(case);
        }
    }
    check(
        bad.is_empty(),
        "100 rational matrices up to 5x5 match the triple-loop product exactly",
        format!("mismatches in cases {bad:?}"),
    )
}

// 7. Product rule

fn criterion_7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let vars = VarSpace::new(["x1", "x2"]).unwrap();
    let mut bad = Vec::new();
    for case in 0..100 {
        let rank_a = rng.gen_range(1..=2);
        let rank_b = rng.gen_range(1..=2);
        let mut dims_a: Vec<usize> = (0..rank_a).map(|_| rng.gen_range(1..=3)).collect();
        let mut dims_b: Vec<usize> = (0..rank_b).map(|_| rng.gen_range(1..=3)).collect();
        let (p, q) = (rng.gen_range(0..rank_a), rng.gen_range(0..rank_b));
        let shared = rng.gen_range(1..=3);
        dims_a[p] = shared;
        dims_b[q] = shared;
        let a = random_expr_tensor(&mut rng, &dims_a, &vars, 2);
        let b = random_expr_tensor(&mut rng, &dims_b, &vars, 2);
        let (lhs, rhs) = product_rule_sides(&a, &b, &vars, &AxisPairing::single(p, q))
            .map_err(|e| format!("case {case}: {e}"))?;
        if !tensor_expr_equal(lhs.values(), rhs.values()) {
            bad.push(case);
        }
    }
    check(
        bad.is_empty(),
        "100 tensor pairs, D(a.b) = Da.b + a.Db",
        format!("mismatches in cases {bad:?}"),
    )
}

// 8. Typo guard

fn criterion_8() -> Outcome {
    let diag = |a: f64, b: f64| Tensor::from_vec(&[2, 2], vec![a, 0.0, 0.0, b]).unwrap();
    let r = compare_tensors(&diag(2.0, 200.0), &diag(2.0, 100.0), 1e-5).unwrap();
    check(
        !r.pass && r.worst_index == [1, 1],
        format!(
            "diag(2,200) vs diag(2,100) fails at [1, 1], rel err {}",
            r.max_rel_err
        ),
        format!("pass = {}, worst index {:?}", r.pass, r.worst_index),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, Outcome)> = vec![(1, criterion_1())];
    let suite = build_suite();
    results.push((2, criterion_2(&suite)));
    results.push((3, criterion_3(&suite)));
    let (c4, fd_tensors) = criterion_4(&suite);
    results.push((4, c4));
    results.push((5, criterion_5(&suite, &fd_tensors)));
    results.push((6, criterion_6()));
    results.push((7, criterion_7()));
    results.push((8, criterion_8()));

    let mut failed = 0;
    for (n, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS criterion {n}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
