use std::path::Path;

use serde_json::{json, Value};
use tensor_chain::chain::{
    chain_first, chain_second, chain_second_terms, direct_hessian, hessian_chain_matrix,
    PairingOrder,
};
use tensor_chain::deriv::{derivative_order, hessian, jacobian};
use tensor_chain::problem::{self, parse_point, ProblemError, ProblemFile};
use tensor_chain::tensor::rational_tensor;
use tensor_chain::{
    compare_tensors, fd_hessian, tensor_expr_equal, CompositionProblem, DerivativeTensor, Expr,
    FdConfig, Tensor,
};

use crate::output::{
    json_num, json_numeric_tensor, numeric_table, point as fmt_point, symbolic_table,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad file, expression, point or option. Exit status 2.
    Input(String),
    /// A comparison or self-check failed. Exit status 1.
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Verify(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn load(path: &Path) -> Result<(ProblemFile, CompositionProblem), CliError> {
    let located = |e: ProblemError| {
        let file = path.display();
        match e {
            ProblemError::Syntax { line, message } => {
                CliError::Input(format!("{file}:{line}: {message}"))
            }
            ProblemError::Expr { line, source } => {
                CliError::Input(format!("{file}:{line}: {source}"))
            }
            other => CliError::Input(format!("{file}: {other}")),
        }
    };
    let file = ProblemFile::read(path).map_err(located)?;
    let problem = file.to_problem().map_err(located)?;
    Ok((file, problem))
}

fn points(
    cli_point: Option<&str>,
    file: &ProblemFile,
    required: bool,
) -> Result<Vec<Vec<f64>>, CliError> {
    let m = file.x_vars.len();
    let pts = match cli_point {
        Some(text) => {
            vec![parse_point(text).map_err(|e| CliError::Input(format!("--point: {e}")))?]
        }
        None => file.points.clone(),
    };
    if required && pts.is_empty() {
        return Err(CliError::Input(
            "no evaluation point: pass --point or add a `point:` line".into(),
        ));
    }
    if let Some(p) = pts.iter().find(|p| p.len() != m) {
        return Err(CliError::Input(format!(
            "point {} has {} coordinates, expected {m} ({})",
            fmt_point(p),
            p.len(),
            file.x_vars
        )));
    }
    Ok(pts)
}

pub fn derive(
    path: &Path,
    order: usize,
    point: Option<&str>,
    as_json: bool,
) -> Result<String, CliError> {
    let (file, p) = load(path)?;
    let d = match order {
        1 => chain_first(&p),
        2 => chain_second(&p),
        k => return Err(CliError::Input(format!("order must be 1 or 2, got {k}"))),
    }
    .map_err(input)?;
    let pts = match point {
        Some(_) => points(point, &file, true)?,
        None => Vec::new(),
    };
    let evaluated = pts
        .iter()
        .map(|x| d.eval_at(x).map(|t| (x.clone(), t)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?;

    if as_json {
        let evals: Vec<Value> = evaluated
            .iter()
            .map(|(x, t)| json!({ "point": x.iter().map(|&c| json_num(c)).collect::<Vec<_>>(), "values": json_numeric_tensor(t) }))
            .collect();
        let out = json!({ "order": order, "derivative": d.to_json(), "evaluations": evals });
        return Ok(pretty(&out));
    }
    let mut out = format!(
        "order {order} derivative of f(g(x)), shape ({}), variables {}\n{}\n",
        d.dims()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", "),
        p.x_vars(),
        symbolic_table(d.values())
    );
    for (x, t) in &evaluated {
        out.push_str(&format!("at x = {}:\n{}\n", fmt_point(x), numeric_table(t)));
    }
    Ok(out)
}

const METHODS: [&str; 4] = ["chain_second", "matrix_form", "direct", "finite_diff"];

pub fn verify(
    path: &Path,
    point: Option<&str>,
    h: f64,
    tol: f64,
    as_json: bool,
) -> Result<String, CliError> {
    let cfg = FdConfig::new(h, tol).map_err(input)?;
    let (file, p) = load(path)?;
    let pts = points(point, &file, true)?;
    let symbolic = [
        chain_second(&p).map_err(input)?,
        hessian_chain_matrix(&p).map_err(input)?,
        direct_hessian(&p).map_err(input)?,
    ];

    let mut human = format!(
        "h = {}, tol = {}\n",
        crate::output::num(h),
        crate::output::num(tol)
    );
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for x in &pts {
        let mut hessians: Vec<Tensor<f64>> = symbolic
            .iter()
            .map(|d| d.eval_at(x))
            .collect::<Result<_, _>>()
            .map_err(input)?;
        let composed = |x: &[f64]| p.eval_composed(x).unwrap_or(f64::NAN);
        hessians.push(fd_hessian(composed, x, &cfg));

        human.push_str(&format!("\nat x = {}\n", fmt_point(x)));
        for (name, t) in METHODS.iter().zip(&hessians) {
            human.push_str(&format!("{name}:\n{}\n", numeric_table(t)));
        }
        human.push_str(&format!(
            "{:<28}  {:>17}  {:>17}  {:<8}  result\n",
            "comparison", "max_abs_err", "max_rel_err", "worst"
        ));
        let mut comparisons = Vec::new();
        for i in 0..METHODS.len() {
            for j in i + 1..METHODS.len() {
                let r = compare_tensors(&hessians[i], &hessians[j], tol).map_err(input)?;
                let label = format!("{} vs {}", METHODS[i], METHODS[j]);
                human.push_str(&format!(
                    "{label:<28}  {:>17}  {:>17}  {:<8}  {}\n",
                    crate::output::num(r.max_abs_err),
                    crate::output::num(r.max_rel_err),
                    format!("{:?}", r.worst_index),
                    if r.pass { "PASS" } else { "FAIL" }
                ));
                if !r.pass {
                    failures.push(format!("{label} at x = {}", fmt_point(x)));
                }
                comparisons.push(json!({
                    "left": METHODS[i],
                    "right": METHODS[j],
                    "max_abs_err": json_num(r.max_abs_err),
                    "max_rel_err": json_num(r.max_rel_err),
                    "worst_index": r.worst_index,
                    "pass": r.pass,
                }));
            }
        }
        let named: serde_json::Map<String, Value> = METHODS
            .iter()
            .zip(&hessians)
            .map(|(n, t)| (n.to_string(), json_numeric_tensor(t)))
            .collect();
        results.push(json!({
            "point": x.iter().map(|&c| json_num(c)).collect::<Vec<_>>(),
            "hessians": named,
            "comparisons": comparisons,
        }));
    }

    let pass = failures.is_empty();
    let out = if as_json {
        pretty(&json!({
            "h": json_num(h),
            "tol": json_num(tol),
            "pass": pass,
            "failures": failures,
            "results": results,
        }))
    } else {
        human.push_str(if pass {
            "\nverify: PASS\n"
        } else {
            "\nverify: FAIL\n"
        });
        human
    };
    if pass {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError::Verify(format!(
            "comparison failed: {}",
            failures.join("; ")
        )))
    }
}

pub fn demo(as_json: bool) -> Result<String, CliError> {
    let p = problem::rosenbrock();
    let jg = jacobian(p.inner());
    let hf = hessian(p.outer()).map_err(input)?;
    let hg = derivative_order(p.inner(), 2).map_err(input)?;
    let (t1, t2) = chain_second_terms(&p, PairingOrder::default()).map_err(input)?;
    let sum = t1.try_add(&t2).map_err(input)?;
    let direct = direct_hessian(&p).map_err(input)?;
    let expected = rational_tensor(&[2, 2], &[2, 0, 0, 200])
        .expect("2x2")
        .map(|c| Expr::constant(c.clone()));
    let ok = tensor_expr_equal(&sum, &expected) && tensor_expr_equal(direct.values(), &expected);

    let out = if as_json {
        let tensor = |t: &Tensor<Expr>| t.to_json();
        pretty(&json!({
            "f": p.outer().components()[0].to_string(),
            "g": p.inner().components().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "Jg": tensor(jg.values()),
            "Hf": tensor(hf.values()),
            "Hg": tensor(hg.values()),
            "t1": tensor(&t1),
            "t2": tensor(&t2),
            "sum": tensor(&sum),
            "direct": tensor(direct.values()),
            "pass": ok,
        }))
    } else {
        demo_text(&p, &jg, &hf, &hg, &t1, &t2, &sum, &direct, ok)
    };
    if ok {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError::Verify("t1 + t2 differs from diag(2, 200)".into()))
    }
}

#[allow(clippy::too_many_arguments)]
fn demo_text(
    p: &CompositionProblem,
    jg: &DerivativeTensor,
    hf: &DerivativeTensor,
    hg: &DerivativeTensor,
    t1: &Tensor<Expr>,
    t2: &Tensor<Expr>,
    sum: &Tensor<Expr>,
    direct: &DerivativeTensor,
    ok: bool,
) -> String {
    let g: Vec<String> = p
        .inner()
        .components()
        .iter()
        .map(ToString::to_string)
        .collect();
    let mut out = String::new();
    out.push_str(&format!("f(y) = {}\n", p.outer().components()[0]));
    out.push_str(&format!("g(x) = ({})\n", g.join(", ")));
    out.push_str(&format!("f(g(x)) = {}\n\n", p.composed()));
    let block = |name: &str, body: String| format!("{name}\n{body}\n\n");
    out.push_str(&block("Jg, shape (2, 2):", symbolic_table(jg.values())));
    out.push_str(&block("Hf(y), shape (2, 2):", symbolic_table(hf.values())));
    out.push_str(&block(
        "Hg, shape (2, 2, 2):",
        crate::output::table(hg.dims(), &strings(hg.values())),
    ));
    out.push_str(&block("t1 = (Hf(g) . Jg) . Jg:", symbolic_table(t1)));
    out.push_str(&block("t2 = Df(g) . Hg:", symbolic_table(t2)));
    out.push_str(&block("t1 + t2:", symbolic_table(sum)));
    out.push_str(&block(
        "direct Hessian of f(g(x)):",
        symbolic_table(direct.values()),
    ));
    out.push_str(&format!(
        "t1 + t2 = diag(2, 200): {}\n",
        if ok { "PASS" } else { "FAIL" }
    ));
    out
}

fn strings(t: &Tensor<Expr>) -> Vec<String> {
    t.data().iter().map(ToString::to_string).collect()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
