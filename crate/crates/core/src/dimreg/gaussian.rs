//! Bilinear forms, Schur complements and the exact Gaussian integral with
//! the dimension `D` kept formal.

use super::linalg::{self, Mat};
use super::DimregError;
use crate::rational::{fmt_q, qser, to_f64, Q};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Symmetric form on `ℝⁿ`, stored as its exact Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilinearForm {
    #[serde(with = "qser::mat")]
    pub matrix: Mat,
}

impl BilinearForm {
    pub fn new(matrix: Mat) -> Result<Self, DimregError> {
        if !linalg::is_symmetric(&matrix) {
            return Err(DimregError::NotSymmetric);
        }
        Ok(BilinearForm { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_positive_definite(&self) -> bool {
        linalg::is_positive_definite(&self.matrix)
    }
}

/// Coordinate subspace of `ℝ^parent_dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    pub parent_dim: usize,
    pub basis: Vec<usize>,
}

impl Subspace {
    pub fn new(parent_dim: usize, basis: Vec<usize>) -> Result<Self, DimregError> {
        let mut seen = vec![false; parent_dim];
        for &i in &basis {
            if i >= parent_dim || std::mem::replace(&mut seen[i], true) {
                return Err(DimregError::BadSubspace { index: i, dim: parent_dim });
            }
        }
        Ok(Subspace { parent_dim, basis })
    }

    pub fn whole(n: usize) -> Self {
        Subspace { parent_dim: n, basis: (0..n).collect() }
    }

    pub fn zero(n: usize) -> Self {
        Subspace { parent_dim: n, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Indices not in the subspace, increasing.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.parent_dim).filter(|i| !self.basis.contains(i)).collect()
    }
}

/// `(B^{F*}, B_{F⊥})`: the Schur complement onto `F` and the block on the
/// complementary coordinates.
pub fn schur_split(b: &BilinearForm, f: &Subspace) -> Result<(BilinearForm, BilinearForm), DimregError> {
    if b.dim() != f.parent_dim {
        return Err(DimregError::DimensionMismatch { expected: f.parent_dim, got: b.dim() });
    }
    let keep = &f.basis;
    let out = f.complement();
    let b11 = linalg::submatrix(&b.matrix, keep, keep);
    let b12 = linalg::submatrix(&b.matrix, keep, &out);
    let b22 = linalg::submatrix(&b.matrix, &out, &out);
    if out.is_empty() {
        return Ok((BilinearForm { matrix: b11 }, BilinearForm { matrix: b22 }));
    }
    let inv = linalg::inverse(&b22).ok_or(DimregError::SingularBlock)?;
    let correction = linalg::matmul(&linalg::matmul(&b12, &inv), &linalg::transpose(&b12));
    Ok((BilinearForm { matrix: linalg::sub(&b11, &correction) }, BilinearForm { matrix: b22 }))
}

/// `constant + per_dim · D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Affine {
    #[serde(with = "qser")]
    pub constant: Q,
    #[serde(with = "qser")]
    pub per_dim: Q,
}

impl Affine {
    pub fn new(constant: Q, per_dim: Q) -> Self {
        Affine { constant, per_dim }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.per_dim.is_zero()
    }

    pub fn add(&self, o: &Affine) -> Affine {
        Affine::new(&self.constant + &o.constant, &self.per_dim + &o.per_dim)
    }

    pub fn scale(&self, k: &Q) -> Affine {
        Affine::new(&self.constant * k, &self.per_dim * k)
    }

    pub fn eval(&self, d: Complex64) -> Complex64 {
        to_f64(&self.constant) + d * to_f64(&self.per_dim)
    }

    pub fn render(&self) -> String {
        match (self.constant.is_zero(), self.per_dim.is_zero()) {
            (_, true) => fmt_q(&self.constant),
            (true, false) => format!("{}·D", fmt_q(&self.per_dim)),
            (false, false) => format!("{} + {}·D", fmt_q(&self.constant), fmt_q(&self.per_dim)),
        }
    }
}

/// `π^{pi_exponent} · Π baseᵉ` with positive rational bases and affine exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Prefactor {
    pub pi_exponent: Affine,
    pub det_factors: Vec<DetFactor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetFactor {
    #[serde(with = "qser")]
    pub base: Q,
    pub exponent: Affine,
}

impl Prefactor {
    pub fn one() -> Self {
        Prefactor::default()
    }

    pub fn mul(&self, o: &Prefactor) -> Prefactor {
        Prefactor {
            pi_exponent: self.pi_exponent.add(&o.pi_exponent),
            det_factors: self.det_factors.iter().chain(&o.det_factors).cloned().collect(),
        }
    }

    pub fn eval(&self, d: Complex64) -> Complex64 {
        let mut log = self.pi_exponent.eval(d) * PI.ln();
        for f in &self.det_factors {
            log += f.exponent.eval(d) * to_f64(&f.base).ln();
        }
        log.exp()
    }

    /// Bases refined to pairwise coprime integers, with `1`s and zero
    /// exponents dropped; two prefactors are equal iff these forms agree.
    pub fn canonical(&self) -> (Affine, BTreeMap<BigInt, Affine>) {
        let bases: Vec<Q> = self.det_factors.iter().map(|f| f.base.clone()).collect();
        let (basis, exps) = coprime_factorization(&bases);
        let mut out: BTreeMap<BigInt, Affine> = BTreeMap::new();
        for (f, row) in self.det_factors.iter().zip(exps) {
            let e = &f.exponent;
            for (b, k) in basis.iter().zip(row) {
                if k != 0 {
                    let acc = out.entry(b.clone()).or_default();
                    *acc = acc.add(&e.scale(&Q::from_integer(BigInt::from(k))));
                }
            }
        }
        out.retain(|_, a| !a.is_zero());
        (self.pi_exponent.clone(), out)
    }

    pub fn same_as(&self, o: &Prefactor) -> bool {
        let (pa, mut a) = self.canonical();
        let (pb, b) = o.canonical();
        if pa != pb {
            return false;
        }
        // Refine across both sides before comparing.
        let joint = Prefactor {
            pi_exponent: Affine::default(),
            det_factors: a
                .iter()
                .map(|(k, v)| DetFactor { base: Q::from_integer(k.clone()), exponent: v.clone() })
                .chain(b.iter().map(|(k, v)| DetFactor { base: Q::from_integer(k.clone()), exponent: v.scale(&-Q::one()) }))
                .collect(),
        };
        a = joint.canonical().1;
        a.is_empty()
    }

    pub fn render(&self) -> String {
        let mut parts = vec![format!("π^({})", self.pi_exponent.render())];
        for f in &self.det_factors {
            parts.push(format!("({})^({})", fmt_q(&f.base), f.exponent.render()));
        }
        parts.join(" · ")
    }
}

/// Refines the numerators and denominators of positive rationals into a
/// pairwise coprime basis; row `i` holds the integer exponents of value `i`.
pub fn coprime_factorization(values: &[Q]) -> (Vec<BigInt>, Vec<Vec<i64>>) {
    let mut basis: Vec<BigInt> = Vec::new();
    for v in values {
        for x in [v.numer().abs(), v.denom().clone()] {
            if x > BigInt::one() && !basis.contains(&x) {
                basis.push(x);
            }
        }
    }
    'refine: loop {
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let g = basis[i].gcd(&basis[j]);
                if g > BigInt::one() {
                    let (a, b) = (&basis[i] / &g, &basis[j] / &g);
                    basis.remove(j);
                    basis.remove(i);
                    for x in [g, a, b] {
                        if x > BigInt::one() && !basis.contains(&x) {
                            basis.push(x);
                        }
                    }
                    continue 'refine;
                }
            }
        }
        break;
    }
    basis.sort();
    let count = |mut x: BigInt, b: &BigInt| {
        let mut k = 0;
        while (&x % b).is_zero() {
            x /= b;
            k += 1;
        }
        k
    };
    let exps = values
        .iter()
        .map(|v| basis.iter().map(|b| count(v.numer().abs(), b) - count(v.denom().clone(), b)).collect())
        .collect();
    (basis, exps)
}

/// `C ↦ prefactor(D) · exp(−tr(C · exponential))` on a space of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianElement {
    pub dim: usize,
    pub prefactor: Prefactor,
    #[serde(with = "qser::mat")]
    pub exponential: Mat,
}

impl GaussianElement {
    /// The plain Gaussian `exp(−B(q, q))`.
    pub fn of_form(b: &BilinearForm) -> Self {
        GaussianElement { dim: b.dim(), prefactor: Prefactor::one(), exponential: b.matrix.clone() }
    }

    pub fn value(&self, c: &[Vec<f64>], d: Complex64) -> Complex64 {
        let e = linalg::to_f64(&self.exponential);
        let mut tr = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                tr += c[i][j] * e[j][i];
            }
        }
        self.prefactor.eval(d) * (-tr).exp()
    }

    /// Exact equality of values for every `C` and `D`.
    pub fn same_as(&self, o: &GaussianElement) -> bool {
        self.dim == o.dim && self.exponential == o.exponential && self.prefactor.same_as(&o.prefactor)
    }

    /// Switches to the measure `dq / 2π` on `integrated` directions.
    pub fn with_normalized_measure(&self, integrated: usize) -> Self {
        let r = Q::from_integer(BigInt::from(integrated));
        let extra = Prefactor {
            pi_exponent: Affine::new(Q::zero(), -r.clone()),
            det_factors: vec![DetFactor { base: Q::from_integer(BigInt::from(2)), exponent: Affine::new(Q::zero(), -r) }],
        };
        GaussianElement { prefactor: self.prefactor.mul(&extra), ..self.clone() }
    }
}

/// Integrates out the directions outside `f`, keeping `D` formal.
pub fn integrate_gaussian(g: &GaussianElement, f: &Subspace) -> Result<GaussianElement, DimregError> {
    if f.parent_dim != g.dim {
        return Err(DimregError::DimensionMismatch { expected: g.dim, got: f.parent_dim });
    }
    let b = BilinearForm::new(g.exponential.clone())?;
    if !b.is_positive_definite() {
        return Err(DimregError::NotPositiveDefinite);
    }
    let (star, perp) = schur_split(&b, f)?;
    let removed = g.dim - f.dim();
    let mut prefactor = g.prefactor.clone();
    if removed > 0 {
        let half = Q::new(BigInt::from(removed), BigInt::from(2));
        prefactor.pi_exponent = prefactor.pi_exponent.add(&Affine::new(Q::zero(), half));
        let det = linalg::det(&perp.matrix);
        prefactor.det_factors.push(DetFactor { base: det, exponent: Affine::new(Q::zero(), Q::new(BigInt::from(-1), BigInt::from(2))) });
    }
    Ok(GaussianElement { dim: f.dim(), prefactor, exponential: star.matrix })
}

/// Integrating `E → G` directly agrees exactly with `E → F → G`.
///
/// `inner` and `outer` are coordinate lists in `E` with `inner ⊆ outer`.
pub fn compose_check(b: &BilinearForm, outer: &[usize], inner: &[usize]) -> Result<bool, DimregError> {
    let n = b.dim();
    let g = GaussianElement::of_form(b);
    let direct = integrate_gaussian(&g, &Subspace::new(n, inner.to_vec())?)?;
    let step = integrate_gaussian(&g, &Subspace::new(n, outer.to_vec())?)?;
    let mut rel = Vec::with_capacity(inner.len());
    for i in inner {
        let Some(p) = outer.iter().position(|o| o == i) else {
            return Err(DimregError::BadSubspace { index: *i, dim: outer.len() });
        };
        rel.push(p);
    }
    let two = integrate_gaussian(&step, &Subspace::new(outer.len(), rel)?)?;
    Ok(direct.same_as(&two))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn form(rows: &[&[i64]]) -> BilinearForm {
        BilinearForm::new(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn schur_example() {
        let (star, perp) = schur_split(&form(&[&[2, 1], &[1, 2]]), &Subspace::new(2, vec![0]).unwrap()).unwrap();
        assert_eq!(star.matrix, vec![vec![qf(3, 2)]]);
        assert_eq!(perp.matrix, vec![vec![q(2)]]);
    }

    #[test]
    fn one_dimensional_integral() {
        let g = GaussianElement::of_form(&form(&[&[3]]));
        let r = integrate_gaussian(&g, &Subspace::zero(1)).unwrap();
        let v = r.value(&[], Complex64::new(1.0, 0.0)).re;
        assert!((v - (PI / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(r.prefactor.render(), "π^(1/2·D) · (3)^(-1/2·D)");
    }

    #[test]
    fn coprime_refinement() {
        let (basis, exps) = coprime_factorization(&[q(12), qf(1, 18)]);
        assert_eq!(basis, vec![BigInt::from(2), BigInt::from(3)]);
        assert_eq!(exps, vec![vec![2, 1], vec![-1, -2]]);
        let a = Prefactor { pi_exponent: Affine::default(), det_factors: vec![DetFactor { base: q(4), exponent: Affine::new(q(1), q(0)) }] };
        let b = Prefactor { pi_exponent: Affine::default(), det_factors: vec![DetFactor { base: q(2), exponent: Affine::new(q(2), q(0)) }] };
        assert!(a.same_as(&b));
    }

    #[test]
    fn whole_space_is_identity() {
        let g = GaussianElement::of_form(&form(&[&[2, 1], &[1, 2]]));
        assert_eq!(integrate_gaussian(&g, &Subspace::whole(2)).unwrap(), g);
    }
}
