use std::path::Path;

use anyhow::{Context, Result};
use vio_core::nalgebra::DVector;

use vio_core::format::{format_sig9, parse_problem};
use vio_core::solver::{minimizer_by_name, SolverOptions, SolverStatus};

/// Loads a serialized problem, minimizes it with the selected strategy and
/// prints the solution. Exit codes: 0 converged, 1 input error, 3 solver
/// stopped short of convergence (best iterate printed).
pub fn cmd_solve(problem_path: &Path, method: &str, trace_path: Option<&Path>) -> Result<i32> {
    let text = std::fs::read_to_string(problem_path)
        .with_context(|| format!("cannot read problem file {}", problem_path.display()))?;
    let problem = parse_problem(&text)
        .with_context(|| format!("cannot parse problem file {}", problem_path.display()))?;

    let options = SolverOptions {
        record_trace: trace_path.is_some(),
        ..SolverOptions::default()
    };
    let constraint = problem
        .build_constraint(options.rank_tol)
        .context("constraint rejected")?;
    let objective = problem.build_objective();
    let minimizer = minimizer_by_name(method, options)
        .with_context(|| format!("unknown method {method:?} (expected one of {:?})", vio_core::solver::minimizer_names()))?;

    let start = DVector::zeros(problem.dim());
    let result = minimizer.minimize(objective.as_ref(), &constraint, &start);

    println!("method: {}", minimizer.name());
    println!("status: {:?}", result.status);
    println!("iterations: {}", result.iterations);
    println!("objective: {}", format_sig9(result.objective_value));
    println!("pg_norm: {}", format_sig9(result.pg_norm));
    let entries: Vec<String> = result.solution.iter().map(|v| format!("{v:.6}")).collect();
    println!("s* = ({})", entries.join(", "));

    if let Some(path) = trace_path {
        let mut out = String::from("k,f,pg_norm,dt,rho,accepted\n");
        for record in result.trace.as_deref().unwrap_or(&[]) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                record.iter,
                format_sig9(record.objective),
                format_sig9(record.pg_norm),
                format_sig9(record.dt),
                format_sig9(record.ratio),
                record.accepted as u8,
            ));
        }
        std::fs::write(path, out)
            .with_context(|| format!("cannot write trace file {}", path.display()))?;
    }

    Ok(match result.status {
        SolverStatus::Converged => 0,
        _ => 3,
    })
}
