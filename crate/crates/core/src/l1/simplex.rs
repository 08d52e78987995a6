//! Dense bounded-variable revised simplex.
//!
//! Solves `min c^T x  s.t.  A x = b,  lo <= x <= hi` from a caller-supplied
//! feasible starting basis. Nonbasic variables sit at one of their bounds;
//! `hi` may be infinite. The basis inverse is kept explicitly and rebuilt
//! from scratch periodically and before optimality is accepted.

use nalgebra::{DMatrix, DVector};

const ZERO_RATE: f64 = 1e-14;
const PRIMAL_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    IterationLimit,
    Unbounded,
}

pub(crate) struct BoundedLp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Working state: basis, variable values and the basis inverse.
pub(crate) struct Simplex<'a> {
    lp: &'a BoundedLp,
    pub basis: Vec<usize>,
    pub state: Vec<VarState>,
    pub x: Vec<f64>,
    binv: DMatrix<f64>,
    since_refactor: usize,
    pub iterations: usize,
}

impl<'a> Simplex<'a> {
    /// `x` must hold nonbasic values at their bounds; basic values are
    /// recomputed.
    pub fn new(lp: &'a BoundedLp, basis: Vec<usize>, state: Vec<VarState>, x: Vec<f64>) -> Self {
        let r = lp.a.nrows();
        let mut s = Self {
            lp,
            basis,
            state,
            x,
            binv: DMatrix::identity(r, r),
            since_refactor: 0,
            iterations: 0,
        };
        s.refactor();
        s
    }

    /// Rebuilds `B^{-1}` and recomputes basic values from the nonbasic ones.
    pub fn refactor(&mut self) {
        let r = self.lp.a.nrows();
        let b = DMatrix::from_fn(r, r, |i, k| self.lp.a[(i, self.basis[k])]);
        let lu = b.clone().lu();
        let mut rhs = self.lp.b.clone();
        for (j, st) in self.state.iter().enumerate() {
            if *st != VarState::Basic && self.x[j] != 0.0 {
                rhs.axpy(-self.x[j], &self.lp.a.column(j), 1.0);
            }
        }
        let xb = match lu.try_inverse() {
            Some(inv) => {
                // One step of iterative refinement on the basic values.
                let lu = b.clone().lu();
                let mut xb = lu.solve(&rhs).unwrap_or_else(|| &inv * &rhs);
                if let Some(d) = lu.solve(&(&rhs - &b * &xb)) {
                    xb += d;
                }
                self.binv = inv;
                xb
            }
            None => {
                self.binv = b.pseudo_inverse(1e-14).expect("pseudo-inverse exists");
                &self.binv * rhs
            }
        };
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[k];
        }
        self.since_refactor = 0;
    }

    fn duals(&self) -> DVector<f64> {
        let cb = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| self.lp.c[j]));
        self.binv.tr_mul(&cb)
    }

    /// Entering variable and direction (+1 increase, -1 decrease).
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let pi = self.duals();
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.x.len() {
            let st = self.state[j];
            if st == VarState::Basic || self.lp.lo[j] == self.lp.hi[j] {
                continue;
            }
            let d = self.lp.c[j] - pi.dot(&self.lp.a.column(j));
            let dir = match st {
                VarState::AtLower if d < -COST_TOL => 1.0,
                VarState::AtUpper if d > COST_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, bd)| d.abs() > bd) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn pivot(&mut self, p: usize, alpha: &DVector<f64>) {
        let r = self.binv.nrows();
        let ap = alpha[p];
        for c in 0..r {
            self.binv[(p, c)] /= ap;
        }
        for i in 0..r {
            if i == p || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for c in 0..r {
                let v = self.binv[(p, c)];
                self.binv[(i, c)] -= f * v;
            }
        }
    }

    /// Runs primal simplex iterations until optimal or `max_iter` total
    /// iterations have been spent.
    pub fn run(&mut self, max_iter: usize) -> LpOutcome {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= max_iter {
                return LpOutcome::IterationLimit;
            }
            let bland = degenerate_run >= DEGENERATE_BEFORE_BLAND;
            let Some((q, dir)) = self.price(bland) else {
                // Accept optimality only on a freshly rebuilt basis inverse.
                if self.since_refactor == 0 {
                    return LpOutcome::Optimal;
                }
                self.refactor();
                continue;
            };
            self.iterations += 1;

            let alpha = &self.binv * self.lp.a.column(q);
            let span = self.lp.hi[q] - self.lp.lo[q];
            // Harris ratio test: every basic variable that moves limits the
            // step (with bounds relaxed by PRIMAL_TOL); among those blocking
            // within that step the largest pivot leaves.
            let mut candidates: Vec<(usize, VarState, f64, f64)> = Vec::new();
            let mut theta_max = f64::INFINITY;
            for (i, &k) in self.basis.iter().enumerate() {
                let rate = dir * alpha[i];
                if rate > ZERO_RATE {
                    let room = self.x[k] - self.lp.lo[k];
                    theta_max = theta_max.min((room + PRIMAL_TOL) / rate);
                    candidates.push((i, VarState::AtLower, (room / rate).max(0.0), rate));
                } else if rate < -ZERO_RATE && self.lp.hi[k].is_finite() {
                    let room = self.lp.hi[k] - self.x[k];
                    theta_max = theta_max.min((room + PRIMAL_TOL) / -rate);
                    candidates.push((i, VarState::AtUpper, (room / -rate).max(0.0), -rate));
                }
            }
            let (theta, leave) = if span <= theta_max {
                (span, None)
            } else {
                let eligible = candidates.iter().filter(|c| c.2 <= theta_max);
                let chosen = if bland {
                    eligible.min_by_key(|c| self.basis[c.0])
                } else {
                    eligible.max_by(|a, b| a.3.total_cmp(&b.3))
                };
                match chosen {
                    Some(c) => (c.2, Some((c.0, c.1))),
                    None => (theta_max, None),
                }
            };
            if !theta.is_finite() {
                return LpOutcome::Unbounded;
            }
            degenerate_run = if theta <= 1e-12 { degenerate_run + 1 } else { 0 };

            for (i, &k) in self.basis.iter().enumerate() {
                self.x[k] -= dir * theta * alpha[i];
            }
            self.x[q] += dir * theta;

            match leave {
                None => {
                    // Bound flip of the entering variable.
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if dir > 0.0 { self.lp.hi[q] } else { self.lp.lo[q] };
                }
                Some((p, to)) => {
                    let out = self.basis[p];
                    self.state[out] = to;
                    self.x[out] = match to {
                        VarState::AtLower => self.lp.lo[out],
                        _ => self.lp.hi[out],
                    };
                    self.state[q] = VarState::Basic;
                    self.basis[p] = q;
                    self.pivot(p, &alpha);
                    self.since_refactor += 1;
                    if self.since_refactor >= REFACTOR_EVERY {
                        self.refactor();
                    }
                }
            }
        }
    }
}
