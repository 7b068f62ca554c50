//! Tensorized tanh-sinh quadrature on the open unit cube.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest tensor grid evaluated.
pub const MAX_NODES: usize = 1 << 20;
pub const REL_TOL: f64 = 1e-10;
const S_RANGE: f64 = 4.5;

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    /// Change between the last two refinement levels.
    pub error: f64,
    pub nodes: usize,
}

/// `(x, 1 − x, weight)` for step `h`.
pub fn nodes(h: f64) -> Vec<(f64, f64, f64)> {
    let k = (S_RANGE / h).floor() as i64;
    (-k..=k)
        .map(|i| {
            let s = i as f64 * h;
            let u = 0.5 * PI * s.sinh();
            let x = 1.0 / (1.0 + (-2.0 * u).exp());
            let xc = 1.0 / (1.0 + (2.0 * u).exp());
            (x, xc, h * PI * s.cosh() * x * xc)
        })
        .filter(|&(x, xc, w)| x > 0.0 && xc > 0.0 && w > 0.0)
        .collect()
}

/// `∫_{(0,1)^dim} f`, halving the step until the relative change drops
/// below [`REL_TOL`] or the next grid would exceed [`MAX_NODES`].
///
/// `f` receives the point and its complement `1 − x` computed without
/// cancellation. Partial sums are reduced in a fixed order.
pub fn integrate<F>(dim: usize, f: F) -> QuadResult
where
    F: Fn(&[f64], &[f64]) -> Complex64 + Sync,
{
    if dim == 0 {
        return QuadResult { value: f(&[], &[]), error: 0.0, nodes: 1 };
    }
    let mut h = 0.5;
    let mut prev: Option<Complex64> = None;
    let mut last = QuadResult { value: Complex64::new(f64::NAN, 0.0), error: f64::INFINITY, nodes: 0 };
    loop {
        let pts = nodes(h);
        let total = pts.len().checked_pow(dim as u32).unwrap_or(usize::MAX);
        if total > MAX_NODES && prev.is_some() {
            return last;
        }
        let value = tensor_sum(dim, &pts, &f);
        let error = prev.map_or(f64::INFINITY, |p| (value - p).norm());
        last = QuadResult { value, error, nodes: total };
        if !value.re.is_finite() || !value.im.is_finite() {
            return last;
        }
        if error <= REL_TOL * value.norm() || (error == 0.0 && value.norm() == 0.0) {
            return last;
        }
        prev = Some(value);
        h /= 2.0;
    }
}

fn tensor_sum<F>(dim: usize, pts: &[(f64, f64, f64)], f: &F) -> Complex64
where
    F: Fn(&[f64], &[f64]) -> Complex64 + Sync,
{
    let partial: Vec<Complex64> = pts
        .par_iter()
        .map(|&(x0, c0, w0)| {
            let mut x = vec![x0; dim];
            let mut c = vec![c0; dim];
            let mut idx = vec![0usize; dim];
            let mut acc = Complex64::new(0.0, 0.0);
            loop {
                let mut w = w0;
                for d in 1..dim {
                    let (xi, ci, wi) = pts[idx[d]];
                    x[d] = xi;
                    c[d] = ci;
                    w *= wi;
                }
                acc += f(&x, &c) * w;
                // Odometer over the remaining axes.
                let mut d = dim;
                loop {
                    d -= 1;
                    if d == 0 {
                        return acc;
                    }
                    idx[d] += 1;
                    if idx[d] < pts.len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        })
        .collect();
    partial.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}
