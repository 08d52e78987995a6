//! Minimum-l1 solutions of linear systems with an elementwise residual box:
//!
//! ```text
//! minimize ||y||_1  subject to  |A y - b|_i <= eta  for every row i
//! ```
//!
//! The problem is posed as a bounded linear program over `y = y+ - y-` and a
//! residual vector `e = A y - b` with `-eta <= e <= eta`, and solved with a
//! two-phase dense simplex. `eta = 0` is equality-constrained basis pursuit.

mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use simplex::{BoundedLp, LpOutcome, Simplex, VarState};

pub const DEFAULT_MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone)]
pub struct L1Problem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    eta: f64,
}

impl L1Problem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, eta: f64) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(GsiError::InvalidParameter("constraint matrix must be non-empty".into()));
        }
        if a.nrows() != b.len() {
            return Err(GsiError::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(GsiError::InvalidParameter(format!("eta = {eta} must be finite and >= 0")));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(GsiError::InvalidParameter("non-finite entry in l1 problem".into()));
        }
        Ok(Self { a, b, eta })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Feasibility tolerance `1e-9 (1 + ||b||_inf)`.
    pub fn feastol(&self) -> f64 {
        1e-9 * (1.0 + self.b.amax())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct L1Solution {
    pub y: DVector<f64>,
    pub objective: f64,
    pub residual_inf: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

fn finish(p: &L1Problem, y: DVector<f64>, status: SolveStatus, iterations: usize) -> L1Solution {
    let objective = y.lp_norm(1);
    let residual_inf = (&p.a * &y - &p.b).amax();
    L1Solution {
        y,
        objective,
        residual_inf,
        status,
        iterations,
    }
}

pub fn solve_bp_box(p: &L1Problem) -> L1Solution {
    solve_bp_box_with(p, DEFAULT_MAX_ITERATIONS)
}

/// Variable layout: `[y+ (m) | y- (m) | e (r) | artificials (one per row)]`.
pub fn solve_bp_box_with(p: &L1Problem, max_iterations: usize) -> L1Solution {
    let (r, m) = p.a.shape();
    let eta = p.eta;
    let n = 2 * m + 2 * r;
    let (e0, art0) = (2 * m, 2 * m + r);

    let mut a = DMatrix::zeros(r, n);
    a.columns_mut(0, m).copy_from(&p.a);
    a.columns_mut(m, m).copy_from(&(-&p.a));
    for i in 0..r {
        a[(i, e0 + i)] = -1.0;
    }

    let mut lo = vec![0.0; n];
    let mut hi = vec![f64::INFINITY; n];
    for i in 0..r {
        lo[e0 + i] = -eta;
        hi[e0 + i] = eta;
    }

    // Start from y = 0: rows with |b_i| <= eta are satisfied by e_i alone,
    // others get an artificial carrying the excess.
    let mut x = vec![0.0; n];
    let mut state = vec![VarState::AtLower; n];
    let mut basis = Vec::with_capacity(r);
    let mut phase1_cost = vec![0.0; n];
    for i in 0..r {
        let bi = p.b[i];
        if bi.abs() <= eta {
            basis.push(e0 + i);
            state[e0 + i] = VarState::Basic;
            hi[art0 + i] = 0.0;
        } else {
            let (bound, st) = if bi > eta { (-eta, VarState::AtLower) } else { (eta, VarState::AtUpper) };
            x[e0 + i] = bound;
            state[e0 + i] = st;
            let sign = if bi > eta { 1.0 } else { -1.0 };
            a[(i, art0 + i)] = sign;
            basis.push(art0 + i);
            state[art0 + i] = VarState::Basic;
            phase1_cost[art0 + i] = 1.0;
        }
    }

    let feastol = p.feastol();
    let mut lp = BoundedLp {
        a,
        b: p.b.clone(),
        c: phase1_cost,
        lo,
        hi,
    };

    let mut iterations = 0;
    let needs_phase1 = lp.c.iter().any(|&c| c > 0.0);
    if needs_phase1 {
        let mut s = Simplex::new(&lp, basis, state, x);
        let outcome = s.run(max_iterations);
        iterations = s.iterations;
        let infeasibility: f64 = (0..r).map(|i| s.x[art0 + i].max(0.0)).sum();
        let (b1, st1, x1) = (s.basis, s.state, s.x);
        if outcome == LpOutcome::IterationLimit {
            let y = extract_y(&x1, m);
            return finish(p, y, SolveStatus::IterationLimit, iterations);
        }
        if infeasibility > feastol {
            log::debug!("phase one ended with infeasibility {infeasibility:e}");
            let y = extract_y(&x1, m);
            return finish(p, y, SolveStatus::Infeasible, iterations);
        }
        basis = b1;
        state = st1;
        x = x1;
        // Artificials are pinned to zero from here on.
        for i in 0..r {
            let j = art0 + i;
            lp.hi[j] = 0.0;
            if state[j] != VarState::Basic {
                state[j] = VarState::AtLower;
                x[j] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; n];
    cost[..2 * m].iter_mut().for_each(|c| *c = 1.0);
    lp.c = cost;
    let mut s = Simplex::new(&lp, basis, state, x);
    let outcome = s.run(max_iterations.saturating_sub(iterations));
    iterations += s.iterations;
    let y = extract_y(&s.x, m);
    let status = match outcome {
        LpOutcome::Optimal => SolveStatus::Optimal,
        LpOutcome::IterationLimit => SolveStatus::IterationLimit,
        // The objective is bounded below by zero; reaching this means the
        // ratio test lost every pivot to round-off.
        LpOutcome::Unbounded => SolveStatus::IterationLimit,
    };
    finish(p, y, status, iterations)
}

fn extract_y(x: &[f64], m: usize) -> DVector<f64> {
    DVector::from_iterator(m, (0..m).map(|j| x[j] - x[m + j]))
}
