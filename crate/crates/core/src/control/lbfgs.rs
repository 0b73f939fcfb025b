//! Limited-memory BFGS ascent with Armijo backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop once the objective reaches this value.
    pub stop_at: f64,
    /// Stop when the gain over `stall_window` iterations is below `stall_tol`.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iter: 2000, memory: 10, stop_at: 1.0 - 1e-12, stall_window: 20, stall_tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ascent {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Objective after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `f` from `x0`; `f` returns the value and its gradient.
pub fn maximize(f: impl Fn(&[f64]) -> (f64, Vec<f64>), x0: Vec<f64>, opts: &AscentOptions) -> Ascent {
    // Internally minimize −f.
    let eval = |x: &[f64]| {
        let (v, g) = f(x);
        (-v, g.into_iter().map(|gi| -gi).collect::<Vec<_>>())
    };
    let mut x = x0;
    let (mut fx, mut gx) = eval(&x);
    let mut trace = vec![-fx];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    while iterations < opts.max_iter && -fx < opts.stop_at {
        let gnorm = dot(&gx, &gx).sqrt();
        if gnorm < 1e-14 || x.is_empty() {
            break;
        }
        // Two-loop recursion for d = −H g.
        let mut q = gx.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = hist.back().map(|(s, y, _)| dot(s, y) / dot(y, y)).unwrap_or(1.0 / gnorm);
        q.iter_mut().for_each(|qi| *qi *= gamma);
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&gx, &dir);
        if slope >= 0.0 {
            hist.clear();
            dir = gx.iter().map(|g| -g / gnorm).collect();
            slope = -gnorm;
        }

        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-16 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (fn_, gn) = eval(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if hist.is_empty() {
                break;
            }
            hist.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        fx = fn_;
        gx = gn;
        iterations += 1;
        trace.push(-fx);
        let w = opts.stall_window;
        if w > 0 && trace.len() > w && trace[trace.len() - 1] - trace[trace.len() - 1 - w] < opts.stall_tol {
            break;
        }
    }
    Ascent { x, value: -fx, iterations, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_concave_quadratic() {
        let f = |x: &[f64]| {
            let v = -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 2.0).powi(2);
            (v, vec![-2.0 * (x[0] - 1.0), -20.0 * (x[1] + 2.0)])
        };
        let opts = AscentOptions { stop_at: f64::INFINITY, ..Default::default() };
        let out = maximize(f, vec![0.0, 0.0], &opts);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] + 2.0).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
    }
}
