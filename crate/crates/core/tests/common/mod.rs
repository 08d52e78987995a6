//! Independent references for the l1 solver.
#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

/// `min ||y||_1 s.t. |A y - b| <= eta` through minilp, written with free
/// `y` and `t >= |y|`. `None` if infeasible.
pub fn lp_reference(a: &DMatrix<f64>, b: &DVector<f64>, eta: f64) -> Option<f64> {
    let (r, m) = a.shape();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let y: Vec<_> = (0..m).map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t: Vec<_> = (0..m).map(|_| p.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for j in 0..m {
        p.add_constraint([(t[j], 1.0), (y[j], -1.0)], ComparisonOp::Ge, 0.0);
        p.add_constraint([(t[j], 1.0), (y[j], 1.0)], ComparisonOp::Ge, 0.0);
    }
    for i in 0..r {
        let row: Vec<_> = (0..m).map(|j| (y[j], a[(i, j)])).collect();
        if eta == 0.0 {
            p.add_constraint(&row[..], ComparisonOp::Eq, b[i]);
        } else {
            p.add_constraint(&row[..], ComparisonOp::Le, b[i] + eta);
            p.add_constraint(&row[..], ComparisonOp::Ge, b[i] - eta);
        }
    }
    p.solve().ok().map(|s| s.objective())
}

/// Smallest l1 norm over all exact solutions of `A y = b` supported on
/// linearly independent column sets. An l1 minimizer of the equality
/// problem is attained on such a support. Also returns the sparsest
/// support size found.
pub fn support_enumeration(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<(f64, usize)> {
    let (r, m) = a.shape();
    let mut best: Option<(f64, usize)> = None;
    let mut sparsest = usize::MAX;
    for mask in 0u32..(1 << m) {
        let size = mask.count_ones() as usize;
        if size > r {
            continue;
        }
        let cols: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        let sub = DMatrix::from_fn(r, size, |i, k| a[(i, cols[k])]);
        let ys = if size == 0 {
            DVector::zeros(0)
        } else {
            let svd = sub.clone().svd(true, true);
            if svd.singular_values.min() < 1e-9 * svd.singular_values.max() {
                continue;
            }
            svd.solve(b, 0.0).unwrap()
        };
        let res = if size == 0 { b.clone() } else { &sub * &ys - b };
        if res.amax() > 1e-9 * (1.0 + b.amax()) {
            continue;
        }
        sparsest = sparsest.min(size);
        let l1 = ys.iter().map(|v| v.abs()).sum::<f64>();
        if best.is_none_or(|(v, _)| l1 < v) {
            best = Some((l1, 0));
        }
    }
    best.map(|(v, _)| (v, sparsest))
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
