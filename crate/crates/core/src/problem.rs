//! Line-oriented problem files.
//!
//! ```text
//! # Rosenbrock under y = (x1, x1^2 - x2)
//! xvars: x1 x2
//! yvars: y1 y2
//! f: (1-y1)^2 + 100*(y1^2-y2)^2
//! g y1: x1
//! g y2: x1^2 - x2
//! point: 0.5 0.5
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. `point:` may repeat;
//! coordinates are separated by spaces or commas.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::chain::{ChainError, CompositionProblem};
use crate::deriv::VectorFunction;
use crate::expr::{Expr, ExprError, VarSpace};

/// Rosenbrock's function under `y = (x1, x1^2 - x2)`. The composition is
/// `(1 - x1)^2 + 100*x2^2` with constant Hessian `diag(2, 200)`.
pub const ROSENBROCK: &str = "\
xvars: x1 x2
yvars: y1 y2
f: (1-y1)^2 + 100*(y1^2-y2)^2
g y1: x1
g y2: x1^2 - x2
point: 0.5 0.5
";

pub fn rosenbrock() -> CompositionProblem {
    ProblemFile::parse(ROSENBROCK)
        .and_then(|f| f.to_problem())
        .expect("built-in problem is valid")
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Expr { line: usize, source: ExprError },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error(
        "inner map arity: {got} g-expressions for {expected} y-variables (missing {missing:?})"
    )]
    Arity {
        expected: usize,
        got: usize,
        missing: Vec<String>,
    },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub x_vars: VarSpace,
    pub y_vars: VarSpace,
    pub outer: Expr,
    /// One expression per y-variable, in y order.
    pub inner: Vec<Expr>,
    pub points: Vec<Vec<f64>>,
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn syntax(line: usize, message: impl Into<String>) -> ProblemError {
    ProblemError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses a coordinate list such as `0.5, -1` or `0.5 -1`.
pub fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| format!("bad coordinate {s:?}"))
        })
        .collect()
}

impl ProblemFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let mut xvars: Option<Entry> = None;
        let mut yvars: Option<Entry> = None;
        let mut f: Option<Entry> = None;
        let mut g: Vec<(String, Entry)> = Vec::new();
        let mut points: Vec<Entry> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once(':')
                .ok_or_else(|| syntax(line, "expected `key: value`"))?;
            let key = key.trim();
            let entry = Entry {
                line,
                value: value.trim(),
            };
            let single = |slot: &mut Option<Entry<'_>>, name: &str| -> Result<(), ProblemError> {
                if slot.is_some() {
                    return Err(syntax(line, format!("duplicate {name:?}")));
                }
                Ok(())
            };
            match key.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["xvars"] => {
                    single(&mut xvars, "xvars")?;
                    xvars = Some(entry);
                }
                ["yvars"] => {
                    single(&mut yvars, "yvars")?;
                    yvars = Some(entry);
                }
                ["f"] => {
                    single(&mut f, "f")?;
                    f = Some(entry);
                }
                ["g", name] => {
                    if g.iter().any(|(n, _)| n == name) {
                        return Err(syntax(line, format!("duplicate \"g {name}\"")));
                    }
                    g.push((name.to_string(), entry));
                }
                ["point"] => points.push(entry),
                _ => return Err(syntax(line, format!("unknown key {key:?}"))),
            }
        }

        let vars = |e: Option<Entry>, name: &'static str| -> Result<VarSpace, ProblemError> {
            let e = e.ok_or(ProblemError::Missing(name))?;
            VarSpace::new(e.value.split_whitespace()).map_err(|source| ProblemError::Expr {
                line: e.line,
                source,
            })
        };
        let x_vars = vars(xvars, "xvars")?;
        let y_vars = vars(yvars, "yvars")?;

        let f = f.ok_or(ProblemError::Missing("f"))?;
        let outer = Expr::parse(f.value, &y_vars).map_err(|source| ProblemError::Expr {
            line: f.line,
            source,
        })?;

        if let Some((name, e)) = g.iter().find(|(n, _)| !y_vars.contains(n)) {
            return Err(syntax(
                e.line,
                format!("\"g {name}\" names an undeclared y-variable"),
            ));
        }
        let missing: Vec<String> = y_vars
            .names()
            .iter()
            .filter(|y| !g.iter().any(|(n, _)| n == *y))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(ProblemError::Arity {
                expected: y_vars.len(),
                got: g.len(),
                missing,
            });
        }
        let inner = y_vars
            .names()
            .iter()
            .map(|y| {
                let (_, e) = g.iter().find(|(n, _)| n == y).expect("checked above");
                Expr::parse(e.value, &x_vars).map_err(|source| ProblemError::Expr {
                    line: e.line,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let points = points
            .iter()
            .map(|e| {
                let p = parse_point(e.value).map_err(|m| syntax(e.line, m))?;
                if p.len() != x_vars.len() {
                    return Err(syntax(
                        e.line,
                        format!(
                            "point has {} coordinates, expected {}",
                            p.len(),
                            x_vars.len()
                        ),
                    ));
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(ProblemFile {
            x_vars,
            y_vars,
            outer,
            inner,
            points,
        })
    }

    pub fn to_problem(&self) -> Result<CompositionProblem, ProblemError> {
        let outer = VectorFunction::scalar(self.outer.clone(), self.y_vars.clone())
            .map_err(ChainError::from)?;
        let inner = VectorFunction::new(self.inner.clone(), self.x_vars.clone())
            .map_err(ChainError::from)?;
        Ok(CompositionProblem::new(outer, inner)?)
    }

    pub fn from_problem(p: &CompositionProblem, points: Vec<Vec<f64>>) -> Self {
        ProblemFile {
            x_vars: p.x_vars().clone(),
            y_vars: p.y_vars().clone(),
            outer: p.outer().components()[0].clone(),
            inner: p.inner().components().to_vec(),
            points,
        }
    }

    /// Text form accepted by [`ProblemFile::parse`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "xvars: {}", self.x_vars.names().join(" "));
        let _ = writeln!(out, "yvars: {}", self.y_vars.names().join(" "));
        let _ = writeln!(out, "f: {}", self.outer);
        for (y, g) in self.y_vars.names().iter().zip(&self.inner) {
            let _ = writeln!(out, "g {y}: {g}");
        }
        for p in &self.points {
            let coords: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
            let _ = writeln!(out, "point: {}", coords.join(" "));
        }
        out
    }
}
