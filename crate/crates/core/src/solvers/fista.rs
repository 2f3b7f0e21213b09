use nalgebra::DMatrix;

use super::prox::prox_unchecked;
use super::{
    check_finite, check_shapes, gradient_unchecked, lipschitz_bound, objective_unchecked,
    SolverConfig, SolverResult, StopReason,
};
use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;

/// FISTA for `min φ(X − Y) + γc tr(X Lc Xᵀ) + γr tr(Xᵀ Lr X)`.
///
/// Starts from `X₀ = S₁ = Y`, `t₁ = 1` with step `1/β′`, and stops once
/// `‖S_{j+1} − S_j‖²_F < ε‖S_j‖²_F` or after `max_iters` iterations. Returns
/// the last proximal iterate. With `β′ = 0` the step is 1, which reduces to a
/// single prox at the anchor.
pub fn solve_frpcag(
    y: &DMatrix<f64>,
    lr: &LaplacianMatrix,
    lc: &LaplacianMatrix,
    config: &SolverConfig,
) -> Result<SolverResult> {
    config.validate()?;
    if config.filter.is_some() {
        return Err(Error::Parameter(
            "a filter is set; use the filtered solver".into(),
        ));
    }
    check_shapes(y, lr, lc)?;
    check_finite(y)?;
    let (gr, gc) = (config.gamma_r, config.gamma_c);
    let beta = lipschitz_bound(lr, lc, gr, gc);
    let step = if beta > 0.0 { 1.0 / beta } else { 1.0 };

    let mut x_prev = y.clone();
    let mut s = y.clone();
    let mut t = 1.0_f64;
    let mut objective_trace = Vec::new();
    let mut relative_changes = Vec::new();
    let mut stop_reason = StopReason::MaxIterations;

    for _ in 0..config.max_iters {
        let grad = gradient_unchecked(&s, lr, lc, gr, gc);
        let x = prox_unchecked(&(&s - grad * step), y, step, config.loss);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let s_next = &x + (&x - &x_prev) * ((t - 1.0) / t_next);

        let change = (&s_next - &s).norm_squared();
        let base = s.norm_squared();
        objective_trace.push(objective_unchecked(y, &x, lr, lc, gr, gc, config.loss));
        relative_changes.push(if base > 0.0 { change / base } else { change });
        if !change.is_finite() {
            return Err(Error::Numerical(format!(
                "iterate diverged after {} iterations",
                objective_trace.len()
            )));
        }
        let done = change == 0.0 || change < config.tolerance * base;

        x_prev = x;
        s = s_next;
        t = t_next;
        if done {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    Ok(SolverResult {
        x: x_prev,
        iterations: objective_trace.len(),
        objective_trace,
        relative_changes,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
    })
}
