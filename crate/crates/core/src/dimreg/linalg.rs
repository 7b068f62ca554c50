//! Dense linear algebra: exact over the rationals, and small `f64` helpers
//! for the quadrature loops.

use crate::rational::Q;
use num_traits::{One, Signed, Zero};

pub type Mat = Vec<Vec<Q>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Q::zero(); c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn is_symmetric(m: &Mat) -> bool {
    let n = m.len();
    m.iter().all(|r| r.len() == n) && (0..n).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

pub fn submatrix(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    rows.iter().map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Q::zero(), |s, k| s + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect()).collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect()
}

pub fn scale(a: &Mat, k: &Q) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * k).collect()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn trace_product(a: &Mat, b: &Mat) -> Q {
    let mut s = Q::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            s += x * &b[j][i];
        }
    }
    s
}

/// Determinant by fraction-exact elimination; the empty matrix has det 1.
pub fn det(m: &Mat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else { return Q::zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        let pivot = a[c][c].clone();
        d *= &pivot;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &pivot;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    d
}

pub fn inverse(m: &Mat) -> Option<Mat> {
    let n = m.len();
    let mut a: Mat = m.iter().zip(identity(n)).map(|(r, e)| r.iter().cloned().chain(e).collect()).collect();
    let (rank, pivots) = rref(&mut a);
    if rank < n || pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Reduces in place; returns the rank and the pivot columns.
pub fn rref(a: &mut Mat) -> (usize, Vec<usize>) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        let inv = Q::one() / &a[r][c];
        for k in c..cols {
            a[r][k] = &a[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..cols {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (r, pivots)
}

pub fn rank(m: &Mat) -> usize {
    rref(&mut m.clone()).0
}

/// Basis of `{x : m x = 0}`, one vector per free column with a 1 there.
pub fn nullspace(m: &Mat, cols: usize) -> Vec<Vec<Q>> {
    nullspace_with_free(m, cols).1
}

/// [`nullspace`] together with the free columns, in the same order.
pub fn nullspace_with_free(m: &Mat, cols: usize) -> (Vec<usize>, Vec<Vec<Q>>) {
    let mut a = m.clone();
    let (_, pivots) = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect();
    (free, basis)
}

/// One solution of `m x = rhs` with free variables set to zero.
pub fn particular_solution(m: &Mat, rhs: &[Q]) -> Option<Vec<Q>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Mat = m.iter().zip(rhs).map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect()).collect();
    let (_, pivots) = rref(&mut a);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = a[r][cols].clone();
    }
    Some(x)
}

/// Symmetric elimination without pivoting: all pivots positive.
pub fn is_positive_definite(m: &Mat) -> bool {
    ldl_pivots(m).is_some_and(|d| d.iter().all(|x| x.is_positive()))
}

/// Positive semidefinite test by diagonally pivoted elimination.
pub fn is_positive_semidefinite(m: &Mat) -> bool {
    if !is_symmetric(m) {
        return false;
    }
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..a.len()).collect();
    while !active.is_empty() {
        let Some(&p) = active.iter().max_by(|&&i, &&j| a[i][i].cmp(&a[j][j])) else { break };
        if a[p][p].is_negative() {
            return false;
        }
        if a[p][p].is_zero() {
            return active.iter().all(|&i| active.iter().all(|&j| a[i][j].is_zero()));
        }
        active.retain(|&i| i != p);
        let pivot = a[p][p].clone();
        for &i in &active {
            for &j in &active {
                let t = &a[i][p] * &a[p][j] / &pivot;
                a[i][j] -= t;
            }
        }
    }
    true
}

fn ldl_pivots(m: &Mat) -> Option<Vec<Q>> {
    if !is_symmetric(m) {
        return None;
    }
    let n = m.len();
    let mut a = m.clone();
    let mut d = Vec::with_capacity(n);
    for c in 0..n {
        let pivot = a[c][c].clone();
        if pivot.is_zero() {
            d.push(pivot);
            return Some(d);
        }
        for i in c + 1..n {
            let f = &a[i][c] / &pivot;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
        d.push(pivot);
    }
    Some(d)
}

pub fn to_f64(m: &Mat) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(crate::rational::to_f64).collect()).collect()
}

/// Cholesky factor of a symmetric positive definite `f64` matrix.
pub fn cholesky(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// `ln det` from a Cholesky factor.
pub fn log_det_chol(l: &[Vec<f64>]) -> f64 {
    l.iter().enumerate().map(|(i, r)| 2.0 * r[i].ln()).sum()
}

/// `m⁻¹ b` for each column of `b`, given `m`'s Cholesky factor.
pub fn chol_solve(l: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut x = vec![vec![0.0; cols]; n];
    for c in 0..cols {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
            y[i] = (b[i][c] - s) / l[i][i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k][c]).sum();
            x[i][c] = (y[i] - s) / l[i][i];
        }
    }
    x
}

pub fn inverse_f64(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let l = cholesky(m)?;
    let n = m.len();
    let id: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    Some(chol_solve(&l, &id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn m(rows: &[&[i64]]) -> Mat {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2, 1], &[1, 2]]);
        assert_eq!(det(&a), q(3));
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, vec![vec![qf(2, 3), qf(-1, 3)], vec![qf(-1, 3), qf(2, 3)]]);
        assert_eq!(matmul(&a, &inv), identity(2));
        assert_eq!(det(&Vec::new()), q(1));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn definiteness() {
        assert!(is_positive_definite(&m(&[&[2, 1], &[1, 2]])));
        assert!(!is_positive_definite(&m(&[&[1, 2], &[2, 1]])));
        assert!(is_positive_semidefinite(&m(&[&[1, 1], &[1, 1]])));
        assert!(!is_positive_definite(&m(&[&[1, 1], &[1, 1]])));
        assert!(!is_positive_semidefinite(&m(&[&[0, 1], &[1, 0]])));
    }

    #[test]
    fn nullspace_and_solutions() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns, vec![vec![q(1), q(-1), q(1)]]);
        let x = particular_solution(&a, &[q(1), q(2)]).unwrap();
        assert_eq!(matmul(&a, &x.iter().map(|v| vec![v.clone()]).collect()), vec![vec![q(1)], vec![q(2)]]);
        assert!(particular_solution(&m(&[&[1, 1], &[1, 1]]), &[q(1), q(2)]).is_none());
    }

    #[test]
    fn float_helpers() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&a).unwrap();
        assert!((log_det_chol(&l) - 8f64.ln()).abs() < 1e-14);
        let inv = inverse_f64(&a).unwrap();
        assert!((inv[0][0] - 3.0 / 8.0).abs() < 1e-14);
        assert!((inv[0][1] + 2.0 / 8.0).abs() < 1e-14);
    }
}
