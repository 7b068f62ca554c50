//! Truncated Laurent series in `z = D − d`, multivariate polynomials and the
//! two subtraction schemes (minimal subtraction and Taylor jets).

use crate::rational::{fmt_q, q, Q};
use num_complex::Complex64;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt::Debug;
use thiserror::Error;

/// Truncation order of a series known exactly.
pub const EXACT: i64 = i64::MAX / 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("coefficient of order {order} requested beyond truncation order {trunc}")]
    TruncationUnderflow { order: i64, trunc: i64 },
}

/// Coefficients: an additive group with a rational action.
pub trait Coeff: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, k: &Q) -> Self;
}

/// Coefficients with a commutative product.
pub trait RingCoeff: Coeff {
    fn mul(&self, o: &Self) -> Self;
}

impl Coeff for Q {
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, k: &Q) -> Self {
        self * k
    }
}

impl RingCoeff for Q {
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, k: &Q) -> Self {
        self * crate::rational::to_f64(k)
    }
}

impl RingCoeff for f64 {
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, k: &Q) -> Self {
        self * crate::rational::to_f64(k)
    }
}

impl RingCoeff for Complex64 {
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// `Σ_{n ≥ min_order} c_n zⁿ`, reliable for orders `≤ trunc`.
///
/// Coefficients past the stored vector and up to `trunc` are zero; orders
/// above `trunc` are unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries<C> {
    min_order: i64,
    coeffs: Vec<C>,
    trunc: i64,
}

impl<C: Coeff> LaurentSeries<C> {
    pub fn new(min_order: i64, coeffs: Vec<C>, trunc: i64) -> Self {
        let mut s = LaurentSeries { min_order, coeffs, trunc };
        s.normalize();
        s
    }

    /// Finite series, known exactly.
    pub fn exact(min_order: i64, coeffs: Vec<C>) -> Self {
        Self::new(min_order, coeffs, EXACT)
    }

    pub fn zero(trunc: i64) -> Self {
        LaurentSeries { min_order: 0, coeffs: Vec::new(), trunc }
    }

    pub fn monomial(order: i64, c: C, trunc: i64) -> Self {
        Self::new(order, vec![c], trunc)
    }

    /// Builds from `(order, coefficient)` pairs; repeated orders add up.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, C)>, trunc: i64) -> Self {
        let mut map: BTreeMap<i64, C> = BTreeMap::new();
        for (n, c) in terms {
            let e = map.entry(n).or_insert_with(C::zero);
            *e = e.add(&c);
        }
        let Some((&lo, _)) = map.iter().next() else { return Self::zero(trunc) };
        let hi = *map.keys().last().unwrap();
        let coeffs = (lo..=hi).map(|n| map.remove(&n).unwrap_or_else(C::zero)).collect();
        Self::new(lo, coeffs, trunc)
    }

    fn normalize(&mut self) {
        let keep = (self.trunc.saturating_sub(self.min_order) + 1).clamp(0, self.coeffs.len() as i64);
        self.coeffs.truncate(keep as usize);
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_order += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.min_order = 0;
        }
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc >= EXACT
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest nonzero order, or `trunc + 1` for a series zero up to `trunc`.
    pub fn valuation(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.trunc.saturating_add(1)
        } else {
            self.min_order
        }
    }

    /// Highest stored nonzero order.
    pub fn max_order(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.min_order + self.coeffs.len() as i64 - 1)
        }
    }

    pub fn coeff(&self, n: i64) -> Result<C, LaurentError> {
        if n > self.trunc {
            return Err(LaurentError::TruncationUnderflow { order: n, trunc: self.trunc });
        }
        Ok(self.coeff_unchecked(n))
    }

    fn coeff_unchecked(&self, n: i64) -> C {
        let i = n - self.min_order;
        if i < 0 || i >= self.coeffs.len() as i64 {
            C::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Nonzero terms in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        let m = self.min_order;
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (m + i as i64, c))
    }

    pub fn with_trunc(&self, t: i64) -> Self {
        Self::new(self.min_order, self.coeffs.clone(), t.min(self.trunc))
    }

    pub fn add(&self, o: &Self) -> Self {
        let t = self.trunc.min(o.trunc);
        let terms = self.terms().chain(o.terms()).map(|(n, c)| (n, c.clone()));
        Self::from_terms(terms, t)
    }

    pub fn neg(&self) -> Self {
        LaurentSeries { min_order: self.min_order, coeffs: self.coeffs.iter().map(|c| c.neg()).collect(), trunc: self.trunc }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Q) -> Self {
        Self::new(self.min_order, self.coeffs.iter().map(|c| c.scale(k)).collect(), self.trunc)
    }

    /// Product through a bilinear coefficient map `f`.
    pub fn mul_with<D: Coeff, E: Coeff>(
        &self,
        o: &LaurentSeries<D>,
        f: impl Fn(&C, &D) -> E,
    ) -> LaurentSeries<E> {
        let (va, vb) = (self.valuation(), o.valuation());
        let bound = |tr: i64, v: i64| if tr >= EXACT { EXACT } else { tr.saturating_add(v) };
        let t = bound(self.trunc, vb).min(bound(o.trunc, va)).min(EXACT);
        let mut terms = Vec::new();
        for (n, a) in self.terms() {
            for (m, b) in o.terms() {
                if n + m <= t {
                    terms.push((n + m, f(a, b)));
                }
            }
        }
        LaurentSeries::from_terms(terms, t)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LaurentSeries<D> {
        LaurentSeries::new(self.min_order, self.coeffs.iter().map(f).collect(), self.trunc)
    }

    /// Splits into strictly negative orders and orders `≥ 0`.
    pub fn minimal_split(&self) -> (Self, Self) {
        let neg = self.terms().filter(|(n, _)| *n < 0).map(|(n, c)| (n, c.clone()));
        let pos = self.terms().filter(|(n, _)| *n >= 0).map(|(n, c)| (n, c.clone()));
        let neg_trunc = if self.trunc >= -1 { EXACT } else { self.trunc };
        (Self::from_terms(neg, neg_trunc), Self::from_terms(pos, self.trunc))
    }

    /// Equality of all coefficients up to the smaller truncation order.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let t = self.trunc.min(o.trunc);
        let lo = self.valuation().min(o.valuation());
        if lo > t {
            return true;
        }
        (lo..=t.min(lo + 10_000)).all(|n| self.coeff_unchecked(n) == o.coeff_unchecked(n))
    }

    /// `a z^-2 + b z^-1 + c + d z [trunc k]`.
    pub fn render(&self, f: impl Fn(&C) -> String) -> String {
        let mut parts = Vec::new();
        for (n, c) in self.terms() {
            let cs = f(c);
            parts.push(match n {
                0 => cs,
                1 => format!("{cs} z"),
                _ => format!("{cs} z^{n}"),
            });
        }
        let body = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
        if self.is_exact() {
            format!("{body} [exact]")
        } else {
            format!("{body} [trunc {}]", self.trunc)
        }
    }
}

impl<C: RingCoeff> LaurentSeries<C> {
    pub fn mul(&self, o: &Self) -> Self {
        self.mul_with(o, |a, b| a.mul(b))
    }
}

impl LaurentSeries<Q> {
    pub fn render_q(&self) -> String {
        self.render(fmt_q)
    }
}

/// Polynomial in `nvars` variables with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPolynomial {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Q>,
}

impl MultiPolynomial {
    pub fn zero(nvars: usize) -> Self {
        MultiPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, q(1));
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Q) {
        let e = self.terms.entry(exps).or_insert_with(<Q as Zero>::zero);
        *e += c;
        self.terms.retain(|_, v| !Zero::is_zero(v));
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            *p.terms.entry(e.clone()).or_insert_with(<Q as Zero>::zero) += c;
        }
        p.terms.retain(|_, v| !Zero::is_zero(v));
        p
    }

    pub fn neg(&self) -> Self {
        MultiPolynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                *p.terms.entry(e).or_insert_with(<Q as Zero>::zero) += x * y;
            }
        }
        p.terms.retain(|_, v| !Zero::is_zero(v));
        p
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Order-`m` Taylor jet at the origin: the part of total degree `≤ m`.
    pub fn taylor(&self, m: u32) -> Self {
        MultiPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() <= m).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut s = <Q as Zero>::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }
}

/// A family of idempotent splittings `P_t` indexed by naturals.
pub trait RotaBaxterFamily<T> {
    fn project(&self, index: u32, x: &T) -> T;
}

/// Projection onto strictly negative powers of `z`; the index is ignored.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinimalScheme;

impl<C: Coeff> RotaBaxterFamily<LaurentSeries<C>> for MinimalScheme {
    fn project(&self, _index: u32, x: &LaurentSeries<C>) -> LaurentSeries<C> {
        x.minimal_split().0
    }
}

/// Truncation to total degree `≤ index`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TaylorScheme;

impl RotaBaxterFamily<MultiPolynomial> for TaylorScheme {
    fn project(&self, index: u32, x: &MultiPolynomial) -> MultiPolynomial {
        x.taylor(index)
    }
}

/// Both sides of `P_s(a) P_t(b) = P_{s+t}(P_s(a) b + a P_t(b) − a b)`.
pub fn family_law_sides<T>(
    scheme: &impl RotaBaxterFamily<T>,
    s: u32,
    t: u32,
    a: &T,
    b: &T,
    mul: impl Fn(&T, &T) -> T,
    add: impl Fn(&T, &T) -> T,
    sub: impl Fn(&T, &T) -> T,
) -> (T, T) {
    let pa = scheme.project(s, a);
    let pb = scheme.project(t, b);
    let lhs = mul(&pa, &pb);
    let inner = sub(&add(&mul(&pa, b), &mul(a, &pb)), &mul(a, b));
    (lhs, scheme.project(s + t, &inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn s(min: i64, c: &[i64]) -> LaurentSeries<Q> {
        LaurentSeries::exact(min, c.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(s(-1, &[1, 1]).add(&s(-1, &[-1])), s(0, &[1]));
        assert_eq!(s(-1, &[1]).mul(&s(1, &[1])), s(0, &[1]));
        assert_eq!(s(-1, &[1, 1]).mul(&s(-1, &[1, 1])), s(-2, &[1, 2, 1]));
    }

    #[test]
    fn truncation_rules() {
        let a = LaurentSeries::new(-1, vec![q(1), q(2)], 1);
        let b = LaurentSeries::new(0, vec![q(3)], 2);
        let p = a.mul(&b);
        assert_eq!(p.trunc(), 1);
        assert_eq!(p.coeff(-1).unwrap(), q(3));
        assert!(matches!(p.coeff(2), Err(LaurentError::TruncationUnderflow { .. })));
    }

    #[test]
    fn split_and_render() {
        let x = LaurentSeries::exact(-2, vec![q(3), qf(1, 2), q(5), q(-1)]);
        let (n, p) = x.minimal_split();
        assert_eq!(n, LaurentSeries::exact(-2, vec![q(3), qf(1, 2)]));
        assert_eq!(n.add(&p), x);
        assert_eq!(x.render_q(), "3 z^-2 + 1/2 z^-1 + 5 + -1 z [exact]");
    }

    #[test]
    fn taylor_examples() {
        let v = MultiPolynomial::var(1, 0);
        let one = MultiPolynomial::constant(1, q(1));
        let f = one.add(&v).add(&v.mul(&v)).add(&v.mul(&v).mul(&v));
        assert_eq!(f.taylor(2), one.add(&v).add(&v.mul(&v)));
        let v1 = MultiPolynomial::var(2, 0);
        let v2 = MultiPolynomial::var(2, 1);
        assert_eq!(v1.mul(&v2).taylor(1), MultiPolynomial::zero(2));
        assert_eq!(f.taylor(0), one);
    }
}
