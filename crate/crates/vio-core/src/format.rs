//! Plain-text interchange format for constrained problems, used by the
//! `solve` CLI subcommand.
//!
//! Layout (whitespace separated, locale independent):
//!
//! ```text
//! n m
//! <m rows of n reals>      A
//! <m reals>                b
//! quadratic                objective descriptor
//! <n rows of n reals>      H    (f = ½ sᵀHs + cᵀs)
//! <n reals>                c
//! ```
//!
//! The alternative descriptor `quartic_vio` takes one parameter line
//! `x_prev y_prev range_sq_prev x_prev_prev y_prev_prev range_sq_prev_prev`
//! and denotes the squared-range consistency objective of the odometer.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::InsRangeObjective;
use crate::solver::{LinearEqualityConstraint, QuadraticObjective, SmoothObjective, SolverError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unexpected end of input while reading {context}")]
    UnexpectedEnd { context: &'static str },
    #[error("invalid number {token:?} while reading {context}")]
    InvalidNumber { token: String, context: &'static str },
    #[error("unknown objective descriptor {name:?}")]
    UnknownObjective { name: String },
    #[error("invalid problem dimensions n={n}, m={m}")]
    InvalidDimensions { n: usize, m: usize },
}

/// Objective descriptor of a serialized problem.
#[derive(Debug, Clone)]
pub enum ObjectiveSpec {
    Quadratic {
        quad: DMatrix<f64>,
        linear: DVector<f64>,
    },
    QuarticVio {
        /// `((x, y), range²)` for the previous and the one-before frames.
        anchors: [((f64, f64), f64); 2],
    },
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub constraint_matrix: DMatrix<f64>,
    pub constraint_rhs: DVector<f64>,
    pub objective: ObjectiveSpec,
}

impl ProblemFile {
    pub fn dim(&self) -> usize {
        self.constraint_matrix.ncols()
    }

    pub fn build_objective(&self) -> Box<dyn SmoothObjective> {
        match &self.objective {
            ObjectiveSpec::Quadratic { quad, linear } => {
                Box::new(QuadraticObjective::new(quad.clone(), linear.clone()))
            }
            ObjectiveSpec::QuarticVio { anchors } => {
                Box::new(InsRangeObjective::from_anchors(self.dim(), *anchors))
            }
        }
    }

    pub fn build_constraint(&self, rank_tol: f64) -> Result<LinearEqualityConstraint, SolverError> {
        LinearEqualityConstraint::new(
            self.constraint_matrix.clone(),
            self.constraint_rhs.clone(),
            rank_tol,
        )
    }
}

/// Formats a real with 9 significant digits, locale independent. The single
/// authority for number serialization across the CSV and problem formats.
pub fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn next_token(&mut self, context: &'static str) -> Result<&'a str, FormatError> {
        self.iter
            .next()
            .ok_or(FormatError::UnexpectedEnd { context })
    }

    fn next_usize(&mut self, context: &'static str) -> Result<usize, FormatError> {
        let token = self.next_token(context)?;
        token.parse().map_err(|_| FormatError::InvalidNumber {
            token: token.to_string(),
            context,
        })
    }

    fn next_f64(&mut self, context: &'static str) -> Result<f64, FormatError> {
        let token = self.next_token(context)?;
        token.parse().map_err(|_| FormatError::InvalidNumber {
            token: token.to_string(),
            context,
        })
    }

    fn matrix(
        &mut self,
        rows: usize,
        cols: usize,
        context: &'static str,
    ) -> Result<DMatrix<f64>, FormatError> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.next_f64(context)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }

    fn vector(&mut self, len: usize, context: &'static str) -> Result<DVector<f64>, FormatError> {
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(self.next_f64(context)?);
        }
        Ok(DVector::from_vec(data))
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, FormatError> {
    let mut tokens = Tokens {
        iter: text.split_whitespace(),
    };
    let n = tokens.next_usize("state dimension")?;
    let m = tokens.next_usize("constraint row count")?;
    if n == 0 || m > n {
        return Err(FormatError::InvalidDimensions { n, m });
    }
    let constraint_matrix = tokens.matrix(m, n, "constraint matrix")?;
    let constraint_rhs = tokens.vector(m, "constraint rhs")?;
    let descriptor = tokens.next_token("objective descriptor")?;
    let objective = match descriptor {
        "quadratic" => ObjectiveSpec::Quadratic {
            quad: tokens.matrix(n, n, "quadratic matrix")?,
            linear: tokens.vector(n, "linear term")?,
        },
        "quartic_vio" => {
            let mut params = [0.0; 6];
            for p in &mut params {
                *p = tokens.next_f64("quartic_vio parameters")?;
            }
            ObjectiveSpec::QuarticVio {
                anchors: [
                    ((params[0], params[1]), params[2]),
                    ((params[3], params[4]), params[5]),
                ],
            }
        }
        other => {
            return Err(FormatError::UnknownObjective {
                name: other.to_string(),
            })
        }
    };
    Ok(ProblemFile {
        constraint_matrix,
        constraint_rhs,
        objective,
    })
}

pub fn serialize_problem(problem: &ProblemFile) -> String {
    let (m, n) = problem.constraint_matrix.shape();
    let mut out = String::new();
    out.push_str(&format!("{n} {m}\n"));
    for i in 0..m {
        let row: Vec<String> = (0..n)
            .map(|j| format_sig9(problem.constraint_matrix[(i, j)]))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let rhs: Vec<String> = problem.constraint_rhs.iter().map(|&v| format_sig9(v)).collect();
    out.push_str(&rhs.join(" "));
    out.push('\n');
    match &problem.objective {
        ObjectiveSpec::Quadratic { quad, linear } => {
            out.push_str("quadratic\n");
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| format_sig9(quad[(i, j)])).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
            let lin: Vec<String> = linear.iter().map(|&v| format_sig9(v)).collect();
            out.push_str(&lin.join(" "));
            out.push('\n');
        }
        ObjectiveSpec::QuarticVio { anchors } => {
            out.push_str("quartic_vio\n");
            let [(a, ra), (b, rb)] = anchors;
            out.push_str(&format!(
                "{} {} {} {} {} {}\n",
                format_sig9(a.0),
                format_sig9(a.1),
                format_sig9(*ra),
                format_sig9(b.0),
                format_sig9(b.1),
                format_sig9(*rb),
            ));
        }
    }
    out
}
