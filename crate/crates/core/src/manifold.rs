//! Retracted gradient descent on the complex Stiefel manifold
//! `{U ∈ C^{n×p} : U†U = I}`.
//!
//! Gradients follow the convention `df = Re Tr(G† dU)`. The Riemannian
//! gradient is the tangent projection `G − U herm(U†G)`; steps are pulled
//! back to the manifold with the polar retraction. Step lengths start from a
//! Barzilai–Borwein estimate and are accepted by Armijo backtracking, so the
//! objective never increases.

use crate::linalg::{self, CMatrix};

/// Objective with Euclidean gradient, evaluated at points on the manifold.
pub trait StiefelObjective {
    fn value_grad(&mut self, u: &CMatrix) -> (f64, CMatrix);
}

impl<F: FnMut(&CMatrix) -> (f64, CMatrix)> StiefelObjective for F {
    fn value_grad(&mut self, u: &CMatrix) -> (f64, CMatrix) {
        self(u)
    }
}

#[derive(Clone, Debug)]
pub struct DescentConfig {
    pub max_iter: usize,
    /// Converged once the objective drops by less than this over a sweep.
    pub tol: f64,
    /// Iterations per convergence sweep.
    pub sweep: usize,
    pub grad_tol: f64,
    pub initial_step: f64,
    /// Stop as soon as the objective falls to this value.
    pub stop_below: Option<f64>,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-8,
            sweep: 10,
            grad_tol: 1e-10,
            initial_step: 0.1,
            stop_below: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DescentOutcome {
    pub point: CMatrix,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 50;

/// Tangent-space projection of a Euclidean gradient.
pub fn project_tangent(u: &CMatrix, g: &CMatrix) -> CMatrix {
    let ug = u.adjoint() * g;
    g - u * linalg::hermitian_part(&ug)
}

/// Polar retraction.
pub fn retract(m: &CMatrix) -> CMatrix {
    if m.ncols() == 1 {
        let n = m.norm();
        return m.unscale(n);
    }
    linalg::polar_orthonormalize(m)
}

/// Minimizes `obj` starting from the orthonormal `u0`.
pub fn minimize<O: StiefelObjective + ?Sized>(obj: &mut O, u0: CMatrix, cfg: &DescentConfig) -> DescentOutcome {
    let mut u = u0;
    let (mut f, g) = obj.value_grad(&u);
    let mut rg = project_tangent(&u, &g);
    let mut step = cfg.initial_step;
    let mut history = vec![f];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if cfg.stop_below.is_some_and(|t| f <= t) {
            converged = true;
            break;
        }
        let gn2 = linalg::real_inner(&rg, &rg);
        if gn2.sqrt() < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let trial = retract(&(&u - rg.scale(t)));
            let (ft, gt) = obj.value_grad(&trial);
            if ft.is_finite() && ft <= f - ARMIJO * t * gn2 {
                accepted = Some((trial, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let Some((u_new, f_new, g_new)) = accepted else {
            // no descent possible at working precision
            converged = true;
            break;
        };
        iterations += 1;
        let rg_new = project_tangent(&u_new, &g_new);
        let s = &u_new - &u;
        let y = &rg_new - &rg;
        let sy = linalg::real_inner(&s, &y);
        let ss = linalg::real_inner(&s, &s);
        step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e6) } else { (2.0 * t).min(1e6) };
        u = u_new;
        f = f_new;
        rg = rg_new;
        history.push(f);
        if history.len() > cfg.sweep {
            let earlier = history[history.len() - 1 - cfg.sweep];
            if earlier - f < cfg.tol {
                converged = true;
                break;
            }
        }
    }
    DescentOutcome {
        point: u,
        value: f,
        iterations,
        converged,
        history,
    }
}

/// Maximizes `obj` by minimizing its negative. The returned value and
/// history are in the original (maximization) sign.
pub fn maximize<O: StiefelObjective + ?Sized>(obj: &mut O, u0: CMatrix, cfg: &DescentConfig) -> DescentOutcome {
    let mut neg = |u: &CMatrix| {
        let (v, g) = obj.value_grad(u);
        (-v, -g)
    };
    let cfg = DescentConfig {
        stop_below: cfg.stop_below.map(|t| -t),
        ..cfg.clone()
    };
    let mut out = minimize(&mut neg, u0, &cfg);
    out.value = -out.value;
    for h in &mut out.history {
        *h = -*h;
    }
    out
}
