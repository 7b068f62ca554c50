//! Feynman-type integrands `P(q) / Π (B_j(q, q) + m_j²)` in Schwinger
//! parameters, evaluated at complex `D` by quadrature.

use super::linalg::{self, Mat};
use super::quad;
use super::DimregError;
use crate::laurent::LaurentSeries;
use crate::rational::{fmt_q, qser, to_f64, Q};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

/// Maximum number of `q_i·q_j` factors in a numerator monomial.
pub const MAX_NUMERATOR_FACTORS: usize = 4;
/// Integration-by-parts steps available for continuation.
pub const MAX_IBP_DEPTH: i64 = 2;
/// Accepted relative quadrature error.
pub const QUAD_ACCEPT: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct NumeratorTermWire {
    #[serde(with = "qser")]
    coeff: Q,
    #[serde(default)]
    factors: Vec<(usize, usize)>,
}

/// Polynomial in the scalar products `q_i·q_j`; each key is a sorted list
/// of index pairs `(i ≤ j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<NumeratorTermWire>", into = "Vec<NumeratorTermWire>")]
pub struct Numerator {
    pub terms: BTreeMap<Vec<(usize, usize)>, Q>,
}

impl From<Vec<NumeratorTermWire>> for Numerator {
    fn from(v: Vec<NumeratorTermWire>) -> Self {
        let mut n = Numerator { terms: BTreeMap::new() };
        for t in v {
            n.add_term(t.factors, t.coeff);
        }
        n
    }
}

impl From<Numerator> for Vec<NumeratorTermWire> {
    fn from(n: Numerator) -> Self {
        n.terms.into_iter().map(|(factors, coeff)| NumeratorTermWire { coeff, factors }).collect()
    }
}

impl Default for Numerator {
    fn default() -> Self {
        Self::one()
    }
}

impl Numerator {
    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut n = Numerator { terms: BTreeMap::new() };
        n.add_term(Vec::new(), c);
        n
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    pub fn add_term(&mut self, factors: Vec<(usize, usize)>, c: Q) {
        let mut key: Vec<(usize, usize)> = factors.into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect();
        key.sort();
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Numerator) -> Numerator {
        let mut n = self.clone();
        for (k, c) in &o.terms {
            n.add_term(k.clone(), c.clone());
        }
        n
    }

    pub fn mul(&self, o: &Numerator) -> Numerator {
        let mut n = Numerator { terms: BTreeMap::new() };
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                n.add_term(a.iter().chain(b).copied().collect(), x * y);
            }
        }
        n
    }

    /// `Σ_{a,b} B_ab q_a·q_b + m²` as a numerator.
    pub fn from_denominator(form: &Mat, mass2: &Q) -> Numerator {
        let mut n = Numerator::constant(mass2.clone());
        for (a, row) in form.iter().enumerate() {
            for (b, x) in row.iter().enumerate().skip(a) {
                if !x.is_zero() {
                    let c = if a == b { x.clone() } else { x * Q::from_integer(2.into()) };
                    n.add_term(vec![(a, b)], c);
                }
            }
        }
        n
    }

    /// Largest number of factors in a monomial.
    pub fn order(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn value_at(&self, q: &[Vec<f64>]) -> f64 {
        let dot = |i: usize, j: usize| q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum::<f64>();
        self.terms.iter().map(|(k, c)| to_f64(c) * k.iter().map(|&(i, j)| dot(i, j)).product::<f64>()).sum()
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let f: Vec<String> = k.iter().map(|(i, j)| format!("q{i}·q{j}")).collect();
                if f.is_empty() {
                    fmt_q(c)
                } else {
                    format!("{} {}", fmt_q(c), f.join(" "))
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// `f(q) = P(q) / Π_j (B_j(q, q) + m_j²)` on `E = ℝ^dim ⊗ ℝ^D`, integrated
/// over the coordinates outside `subspace`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchwingerIntegrand {
    pub dim: usize,
    pub subspace: Vec<usize>,
    #[serde(with = "qser::mats")]
    pub forms: Vec<Mat>,
    #[serde(with = "qser::vec")]
    pub masses2: Vec<Q>,
    #[serde(default, skip_serializing_if = "Numerator::is_one")]
    pub numerator: Numerator,
    /// Use `dq/2π` on integrated directions.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalized_measure: bool,
}

impl SchwingerIntegrand {
    pub fn from_json_str(s: &str) -> Result<Self, DimregError> {
        let v: SchwingerIntegrand = serde_json::from_str(s).map_err(|e| DimregError::Invalid(e.to_string()))?;
        v.validate()?;
        Ok(v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("integrand serializes")
    }

    pub fn integrated(&self) -> Vec<usize> {
        (0..self.dim).filter(|i| !self.subspace.contains(i)).collect()
    }

    pub fn validate(&self) -> Result<(), DimregError> {
        super::Subspace::new(self.dim, self.subspace.clone())?;
        if self.forms.len() != self.masses2.len() {
            return Err(DimregError::Invalid(format!("{} forms but {} masses", self.forms.len(), self.masses2.len())));
        }
        if self.forms.is_empty() {
            return Err(DimregError::Invalid("no propagators".into()));
        }
        for (j, b) in self.forms.iter().enumerate() {
            if b.len() != self.dim || !linalg::is_positive_semidefinite(b) {
                return Err(DimregError::Invalid(format!("form {j} is not a symmetric semidefinite {0}×{0} matrix", self.dim)));
            }
        }
        if let Some(m) = self.masses2.iter().find(|m| !m.is_positive()) {
            return Err(DimregError::Invalid(format!("mass² {} is not positive", fmt_q(m))));
        }
        for k in self.numerator.terms.keys() {
            if k.iter().any(|&(_, j)| j >= self.dim) {
                return Err(DimregError::Invalid("numerator index out of range".into()));
            }
        }
        let kk = self.integrated();
        let sum = self.forms.iter().fold(linalg::zeros(self.dim, self.dim), |a, b| linalg::add(&a, b));
        if !linalg::is_positive_definite(&linalg::submatrix(&sum, &kk, &kk)) {
            return Err(DimregError::NotPositiveDefinite);
        }
        Ok(())
    }

    /// Pointwise value at momenta `q[i] ∈ ℝ^D`.
    pub fn value_at(&self, q: &[Vec<f64>]) -> f64 {
        let den: f64 = self
            .forms
            .iter()
            .zip(&self.masses2)
            .map(|(b, m)| Numerator::from_denominator(b, m).value_at(q))
            .product();
        self.numerator.value_at(q) / den
    }

    fn compatible(&self, o: &Self) -> Result<(), DimregError> {
        if self.dim != o.dim || self.subspace != o.subspace {
            return Err(DimregError::Invalid("integrands live on different spaces".into()));
        }
        Ok(())
    }

    pub fn product(&self, o: &Self) -> Result<Self, DimregError> {
        self.compatible(o)?;
        Ok(SchwingerIntegrand {
            forms: self.forms.iter().chain(&o.forms).cloned().collect(),
            masses2: self.masses2.iter().chain(&o.masses2).cloned().collect(),
            numerator: self.numerator.mul(&o.numerator),
            ..self.clone()
        })
    }

    /// Sum over the common denominator.
    pub fn sum(&self, o: &Self) -> Result<Self, DimregError> {
        self.compatible(o)?;
        let dens = |s: &Self| {
            s.forms.iter().zip(&s.masses2).fold(Numerator::one(), |acc, (b, m)| acc.mul(&Numerator::from_denominator(b, m)))
        };
        Ok(SchwingerIntegrand {
            forms: self.forms.iter().chain(&o.forms).cloned().collect(),
            masses2: self.masses2.iter().chain(&o.masses2).cloned().collect(),
            numerator: self.numerator.mul(&dens(o)).add(&o.numerator.mul(&dens(self))),
            ..self.clone()
        })
    }

    /// `σ = l − r·D/2`, the exponent of the overall scaling.
    pub fn sigma(&self, d: Complex64) -> Complex64 {
        self.forms.len() as f64 - self.integrated().len() as f64 * d / 2.0
    }
}

/// Truncated polynomial jets over a fixed set of variables.
struct JetSpace {
    monos: Vec<Vec<u8>>,
    table: Vec<Vec<(usize, usize)>>,
}

type Jet = Vec<Complex64>;

impl JetSpace {
    fn new(nvars: usize, deg: usize) -> Self {
        let mut monos: Vec<Vec<u8>> = vec![vec![0; nvars]];
        for _ in 0..deg {
            let mut next = Vec::new();
            for m in &monos {
                for v in 0..nvars {
                    let mut e = m.clone();
                    e[v] += 1;
                    next.push(e);
                }
            }
            monos.extend(next);
            monos.sort();
            monos.dedup();
        }
        monos.sort_by_key(|m| (m.iter().map(|&x| x as usize).sum::<usize>(), m.clone()));
        let index: HashMap<Vec<u8>, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let table = monos
            .iter()
            .map(|a| {
                monos
                    .iter()
                    .enumerate()
                    .filter_map(|(j, b)| {
                        let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        index.get(&s).map(|&k| (j, k))
                    })
                    .collect()
            })
            .collect();
        JetSpace { monos, table }
    }

    fn zero(&self) -> Jet {
        vec![Complex64::zero(); self.monos.len()]
    }

    fn constant(&self, c: Complex64) -> Jet {
        let mut j = self.zero();
        j[0] = c;
        j
    }

    fn var(&self, v: usize) -> Jet {
        let mut j = self.zero();
        let k = self.monos.iter().position(|m| m.iter().enumerate().all(|(i, &e)| e == u8::from(i == v))).unwrap();
        j[k] = Complex64::one();
        j
    }

    fn add(&self, a: &Jet, b: &Jet) -> Jet {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn scale(&self, a: &Jet, k: Complex64) -> Jet {
        a.iter().map(|x| x * k).collect()
    }

    fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        let mut out = self.zero();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &(j, k) in &self.table[i] {
                out[k] += x * b[j];
            }
        }
        out
    }

    fn mat_mul(&self, a: &[Vec<Jet>], b: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
        let cols = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| row.iter().zip(b).fold(self.zero(), |s, (x, brow)| self.add(&s, &self.mul(x, &brow[j]))))
                    .collect()
            })
            .collect()
    }

    /// `Σ_{k ≤ deg} x^k / k!` for `x` without constant term.
    fn exp_nilpotent(&self, x: &Jet, deg: usize) -> Jet {
        let mut out = self.constant(Complex64::one());
        let mut power = out.clone();
        for k in 1..=deg {
            power = self.scale(&self.mul(&power, x), Complex64::new(1.0 / k as f64, 0.0));
            out = self.add(&out, &power);
        }
        out
    }
}

/// Numerator data compiled for `P(−∂_B)`.
struct Compiled {
    jets: JetSpace,
    vars: Vec<(usize, usize)>,
    /// `(monomial index, coefficient · Π c · β!)`.
    readout: Vec<(usize, f64)>,
    deg: usize,
}

fn compile_numerator(n: &Numerator) -> Option<Compiled> {
    if n.order() == 0 {
        return None;
    }
    let mut vars: Vec<(usize, usize)> = n.terms.keys().flatten().copied().collect();
    vars.sort();
    vars.dedup();
    let deg = n.order();
    let jets = JetSpace::new(vars.len(), deg);
    let readout = n
        .terms
        .iter()
        .map(|(k, c)| {
            let mut e = vec![0u8; vars.len()];
            let mut w = to_f64(c);
            for f in k {
                let v = vars.iter().position(|x| x == f).unwrap();
                e[v] += 1;
                w *= if f.0 == f.1 { -1.0 } else { -0.5 };
                w *= e[v] as f64;
            }
            (jets.monos.iter().position(|m| *m == e).unwrap(), w)
        })
        .collect();
    Some(Compiled { jets, vars, readout, deg })
}

struct Prepared<'a> {
    s: &'a SchwingerIntegrand,
    ext: Vec<usize>,
    int: Vec<usize>,
    forms: Vec<Vec<Vec<f64>>>,
    masses: Vec<f64>,
    c: Vec<Vec<f64>>,
    numerator: Option<Compiled>,
    /// `(|S|, loops supported on S)` for proper subsets `S` of propagators.
    faces: Vec<(usize, usize)>,
    kk_order: usize,
}

impl<'a> Prepared<'a> {
    fn new(s: &'a SchwingerIntegrand, c: &[Vec<f64>]) -> Result<Self, DimregError> {
        s.validate()?;
        let ext = s.subspace.clone();
        let int = s.integrated();
        if c.len() != ext.len() || c.iter().any(|r| r.len() != ext.len()) {
            return Err(DimregError::DimensionMismatch { expected: ext.len(), got: c.len() });
        }
        let l = s.forms.len();
        let mut faces = Vec::new();
        for mask in 1u64..(1u64 << l) - 1 {
            let rest = (0..l).filter(|j| mask >> j & 1 == 0).fold(linalg::zeros(int.len(), int.len()), |a, j| {
                linalg::add(&a, &linalg::submatrix(&s.forms[j], &int, &int))
            });
            let loops = int.len() - linalg::rank(&rest);
            if loops > 0 {
                faces.push((mask.count_ones() as usize, loops));
            }
        }
        let kk_order = s
            .numerator
            .terms
            .keys()
            .map(|k| k.iter().filter(|(i, j)| int.contains(i) && int.contains(j)).count())
            .max()
            .unwrap_or(0);
        Ok(Prepared {
            s,
            forms: s.forms.iter().map(linalg::to_f64).collect(),
            masses: s.masses2.iter().map(to_f64).collect(),
            c: c.to_vec(),
            numerator: compile_numerator(&s.numerator),
            ext,
            int,
            faces,
            kk_order,
        })
    }

    fn r(&self) -> usize {
        self.int.len()
    }

    /// Convergence of the representation with `ibp` steps for `Re D ≤ re_d_max`.
    fn check(&self, sigma_min_re: f64, re_d_max: f64, ibp: i64) -> Result<(), DimregError> {
        let overall = sigma_min_re + ibp as f64 - self.kk_order as f64;
        if overall <= 0.0 {
            return Err(DimregError::NotConvergent(format!(
                "overall scaling exponent {overall:.4} ≤ 0 (σ = l − r·D/2)"
            )));
        }
        for &(size, loops) in &self.faces {
            let e = size as f64 - re_d_max * loops as f64 / 2.0 - self.kk_order as f64;
            if e <= 0.0 {
                return Err(DimregError::NotConvergent(format!(
                    "subdivergence on {size} propagators carrying {loops} loops (exponent {e:.4})"
                )));
            }
        }
        Ok(())
    }

    /// Simplex point by stick-breaking, and the log of its Jacobian.
    fn simplex_point(&self, u: &[f64], uc: &[f64]) -> (Vec<f64>, f64) {
        let l = self.forms.len();
        let mut x = vec![0.0; l];
        let mut rem = 1.0;
        let mut log_jac = 0.0;
        for i in 0..l - 1 {
            x[i] = rem * u[i];
            rem *= uc[i];
            log_jac += (l - 2 - i) as f64 * uc[i].ln();
        }
        x[l - 1] = rem;
        (x, log_jac)
    }

    /// `(B(x), ln det B(x)_KK, tr(C B(x)^{F*}), Σ x_j m_j²)`, or `None` where
    /// `B(x)_KK` is numerically singular.
    fn forms_at(&self, x: &[f64]) -> Option<(Vec<Vec<f64>>, f64, f64, f64)> {
        let n = self.s.dim;
        let mut b = vec![vec![0.0; n]; n];
        for (xj, f) in x.iter().zip(&self.forms) {
            for i in 0..n {
                for k in 0..n {
                    b[i][k] += xj * f[i][k];
                }
            }
        }
        let pick = |rows: &[usize], cols: &[usize]| -> Vec<Vec<f64>> {
            rows.iter().map(|&i| cols.iter().map(|&k| b[i][k]).collect()).collect()
        };
        let chol = linalg::cholesky(&pick(&self.int, &self.int))?;
        let ld = linalg::log_det_chol(&chol);
        let mut tr_cb = 0.0;
        if !self.ext.is_empty() {
            let bfk = pick(&self.ext, &self.int);
            let sol = linalg::chol_solve(&chol, &pick(&self.int, &self.ext));
            for i in 0..self.ext.len() {
                for k in 0..self.ext.len() {
                    let corr: f64 = (0..self.int.len()).map(|a| bfk[i][a] * sol[a][k]).sum();
                    tr_cb += self.c[k][i] * (b[self.ext[i]][self.ext[k]] - corr);
                }
            }
        }
        let mass_term: f64 = x.iter().zip(&self.masses).map(|(a, m)| a * m).sum();
        Some((b, ld, tr_cb, mass_term))
    }

    /// Simplex integrand after the radial integral has been split off:
    /// `π^{rD/2} det(B(x)_KK)^{−D/2} A(x)^{−σ}` with `A = Σ x m² + tr(C B*)`.
    fn simplex_integrand(&self, u: &[f64], uc: &[f64], d: Complex64, sigma: Complex64) -> Complex64 {
        let (x, log_jac) = self.simplex_point(u, uc);
        let Some((_, ld, tr_cb, mass_term)) = self.forms_at(&x) else { return Complex64::zero() };
        let a = mass_term + tr_cb;
        let half_d = d / 2.0;
        let log = self.r() as f64 * half_d * PI.ln() - half_d * ld - sigma * a.ln() + log_jac;
        log.exp()
    }

    /// Full integrand over the simplex and the radial variable `λ = y/(1−y)`,
    /// with `P(−∂_B)` applied at `t = λx`.
    fn numerator_integrand(&self, comp: &Compiled, u: &[f64], uc: &[f64], d: Complex64) -> Complex64 {
        let l = self.forms.len();
        let (x, log_jac) = self.simplex_point(u, uc);
        let (y, yc) = (u[l - 1], uc[l - 1]);
        let ln_lambda = y.ln() - yc.ln();
        let lambda = y / yc;
        let Some((b, ld, tr_cb, mass_term)) = self.forms_at(&x) else { return Complex64::zero() };
        let r = self.r() as f64;
        let half_d = d / 2.0;
        let log = r * half_d * PI.ln() - half_d * (ld + r * ln_lambda) - lambda * (tr_cb + mass_term)
            + (l as f64 - 1.0) * ln_lambda
            + log_jac
            - 2.0 * yc.ln();
        let b0: Vec<Vec<f64>> = b.iter().map(|row| row.iter().map(|v| v * lambda).collect()).collect();
        log.exp() * self.numerator_factor(comp, &b0, d)
    }

    /// `P(−∂_B) G / G` at `b0`, with `G(B) = det(B_KK)^{−D/2} exp(−tr(C B^{F*}))`.
    fn numerator_factor(&self, comp: &Compiled, b0: &[Vec<f64>], d: Complex64) -> Complex64 {
        let js = &comp.jets;
        let n = self.s.dim;
        let mut delta: Vec<Vec<Jet>> = vec![vec![js.zero(); n]; n];
        for (v, &(i, j)) in comp.vars.iter().enumerate() {
            delta[i][j] = js.var(v);
            delta[j][i] = js.var(v);
        }
        let consts = |m: &[Vec<f64>]| -> Vec<Vec<Jet>> {
            m.iter().map(|r| r.iter().map(|&v| js.constant(Complex64::new(v, 0.0))).collect()).collect()
        };
        let sub = |m: &Vec<Vec<Jet>>, rows: &[usize], cols: &[usize]| -> Vec<Vec<Jet>> {
            rows.iter().map(|&i| cols.iter().map(|&k| m[i][k].clone()).collect()).collect()
        };
        let bkk: Vec<Vec<f64>> = self.int.iter().map(|&i| self.int.iter().map(|&k| b0[i][k]).collect()).collect();
        let Some(inv) = linalg::inverse_f64(&bkk) else { return Complex64::zero() };
        let inv_j = consts(&inv);
        let x = js.mat_mul(&inv_j, &sub(&delta, &self.int, &self.int));
        // ln det(I + X) and (I + X)⁻¹ B⁻¹ to the jet order.
        let mut log_det = js.zero();
        let mut power = x.clone();
        let mut neumann = inv_j.clone();
        let mut neg_power_inv = inv_j.clone();
        for k in 1..=comp.deg {
            let tr = (0..self.int.len()).fold(js.zero(), |s, i| js.add(&s, &power[i][i]));
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            log_det = js.add(&log_det, &js.scale(&tr, Complex64::new(sign / k as f64, 0.0)));
            neg_power_inv = js.mat_mul(&x, &neg_power_inv).iter().map(|r| r.iter().map(|e| js.scale(e, -Complex64::one())).collect()).collect();
            neumann = neumann.iter().zip(&neg_power_inv).map(|(a, b)| a.iter().zip(b).map(|(u, v)| js.add(u, v)).collect()).collect();
            power = js.mat_mul(&power, &x);
        }
        let mut exponent = js.scale(&log_det, -d / 2.0);
        if !self.ext.is_empty() {
            let full: Vec<Vec<Jet>> = consts(b0).iter().zip(&delta).map(|(a, b)| a.iter().zip(b).map(|(u, v)| js.add(u, v)).collect()).collect();
            let bff = sub(&full, &self.ext, &self.ext);
            let bfk = sub(&full, &self.ext, &self.int);
            let bkf = sub(&full, &self.int, &self.ext);
            let corr = js.mat_mul(&js.mat_mul(&bfk, &neumann), &bkf);
            let mut tr = js.zero();
            for i in 0..self.ext.len() {
                for k in 0..self.ext.len() {
                    let s = js.add(&bff[i][k], &js.scale(&corr[i][k], -Complex64::one()));
                    tr = js.add(&tr, &js.scale(&s, Complex64::new(self.c[k][i], 0.0)));
                }
            }
            tr[0] = Complex64::zero();
            exponent = js.add(&exponent, &js.scale(&tr, -Complex64::one()));
        }
        let g = js.exp_nilpotent(&exponent, comp.deg);
        comp.readout.iter().map(|&(k, w)| g[k] * w).sum()
    }

    fn evaluate(&self, d: Complex64, ibp: i64) -> Result<Complex64, DimregError> {
        let l = self.forms.len();
        let sigma = self.s.sigma(d);
        let mut factor = Complex64::one();
        if self.s.normalized_measure {
            factor *= (-(self.r() as f64) * d * (2.0 * PI).ln()).exp();
        }
        let value = match &self.numerator {
            Some(comp) => accept(quad::integrate(l, |u, uc| self.numerator_integrand(comp, u, uc, d)))?,
            None => {
                // With λ = μ/A(x) the radial integral no longer depends on x;
                // `ibp` integrations by parts in μ continue it past Re σ = 0.
                for i in 0..ibp {
                    factor /= sigma + i as f64;
                }
                let exponent = sigma + ibp as f64 - 1.0;
                let radial = accept(quad::integrate(1, |u, uc| {
                    let ln_mu = u[0].ln() - uc[0].ln();
                    (exponent * ln_mu - u[0] / uc[0] - 2.0 * uc[0].ln()).exp()
                }))?;
                let simplex = accept(quad::integrate(l - 1, |u, uc| self.simplex_integrand(u, uc, d, sigma)))?;
                radial * simplex
            }
        };
        Ok(value * factor)
    }
}

fn accept(res: quad::QuadResult) -> Result<Complex64, DimregError> {
    let v = res.value;
    if !v.re.is_finite() || !v.im.is_finite() || res.error > QUAD_ACCEPT * v.norm().max(1e-300) {
        return Err(DimregError::QuadratureFailure { error: res.error, value: v.norm() });
    }
    Ok(v)
}

fn zero_form(m: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; m]; m]
}

/// Value of the dimensionally regularized integral at `C`, for `D` inside
/// the region of absolute convergence.
pub fn eval_parametric(s: &SchwingerIntegrand, c: Option<&[Vec<f64>]>, d: Complex64) -> Result<Complex64, DimregError> {
    let zero = zero_form(s.subspace.len());
    let p = Prepared::new(s, c.unwrap_or(&zero))?;
    let sigma = s.sigma(d);
    p.check(sigma.re, d.re, 0)?;
    p.evaluate(d, 0)
}

/// Smallest number of integration-by-parts steps covering `Re σ ≥ sigma_min_re`.
fn ibp_depth(sigma_min_re: f64) -> i64 {
    ((0.25 - sigma_min_re).ceil() as i64).max(0)
}

/// Like [`eval_parametric`] but continued past the overall divergence by up
/// to [`MAX_IBP_DEPTH`] integration-by-parts steps.
pub fn eval_continued(s: &SchwingerIntegrand, c: Option<&[Vec<f64>]>, d: Complex64) -> Result<Complex64, DimregError> {
    let zero = zero_form(s.subspace.len());
    let p = Prepared::new(s, c.unwrap_or(&zero))?;
    let sigma = s.sigma(d);
    let k = ibp_depth(sigma.re);
    continuation_allowed(&p, k)?;
    p.check(sigma.re, d.re, k)?;
    p.evaluate(d, k)
}

fn continuation_allowed(p: &Prepared, k: i64) -> Result<(), DimregError> {
    if k > MAX_IBP_DEPTH || (k > 0 && p.numerator.is_some()) {
        let supported = if p.numerator.is_some() { 0 } else { MAX_IBP_DEPTH };
        return Err(DimregError::ContinuationNotImplemented { needed: k, supported });
    }
    Ok(())
}

/// Cauchy-circle sampling parameters.
#[derive(Debug, Clone, Copy)]
pub struct CircleOptions {
    pub radius: f64,
    pub samples: usize,
}

impl Default for CircleOptions {
    fn default() -> Self {
        CircleOptions { radius: 1.0, samples: 64 }
    }
}

/// `a_n = (1/N) Σ_j f(center + r e^{iθ_j}) r^{−n} e^{−inθ_j}` for `n` in
/// `lo..=hi`, assuming `f(conj D) = conj f(D)`.
pub fn cauchy_coefficients<F>(
    f: F,
    center: f64,
    opts: CircleOptions,
    window: (i64, i64),
) -> Result<LaurentSeries<f64>, DimregError>
where
    F: Fn(Complex64) -> Result<Complex64, DimregError> + Sync,
{
    let n = opts.samples.max(4) & !1;
    let angles: Vec<f64> = (0..=n / 2).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let values: Vec<Complex64> = angles
        .par_iter()
        .map(|&t| f(Complex64::new(center, 0.0) + Complex64::from_polar(opts.radius, t)))
        .collect::<Result<_, _>>()?;
    let coeffs = (window.0..=window.1)
        .map(|k| {
            let rot = |j: usize| (values[j] * Complex64::from_polar(1.0, -(k as f64) * angles[j])).re;
            let mut s = rot(0) + rot(n / 2);
            for j in 1..n / 2 {
                s += 2.0 * rot(j);
            }
            s / n as f64 * opts.radius.powf(-(k as f64))
        })
        .collect();
    Ok(LaurentSeries::new(window.0, coeffs, window.1))
}

/// Laurent coefficients of the continued integral in `z = D − center`.
pub fn laurent_extract(
    s: &SchwingerIntegrand,
    c: Option<&[Vec<f64>]>,
    center: i64,
    window: (i64, i64),
    opts: CircleOptions,
) -> Result<LaurentSeries<f64>, DimregError> {
    let zero = zero_form(s.subspace.len());
    let p = Prepared::new(s, c.unwrap_or(&zero))?;
    let d_max = center as f64 + opts.radius;
    let sigma_min = s.sigma(Complex64::new(d_max, 0.0)).re;
    let k = ibp_depth(sigma_min);
    continuation_allowed(&p, k)?;
    p.check(sigma_min, d_max, k).map_err(|e| match e {
        DimregError::NotConvergent(_) if k > 0 || sigma_min <= 0.0 => {
            DimregError::ContinuationNotImplemented { needed: k + 1, supported: MAX_IBP_DEPTH }
        }
        other => other,
    })?;
    cauchy_coefficients(|d| p.evaluate(d, k), center as f64, opts, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn single(mass2: i64) -> SchwingerIntegrand {
        SchwingerIntegrand {
            dim: 1,
            subspace: vec![],
            forms: vec![vec![vec![q(1)]]],
            masses2: vec![q(mass2)],
            numerator: Numerator::one(),
            normalized_measure: false,
        }
    }

    #[test]
    fn gamma_value_at_negative_dimension() {
        // π^{D/2} Γ(1 − D/2) at D = −1 is π^{−1/2} Γ(3/2) = 1/2.
        let v = eval_parametric(&single(1), None, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((v.re - 0.5).abs() < 1e-9, "{v}");
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn outside_region_is_rejected() {
        let e = eval_parametric(&single(1), None, Complex64::new(3.0, 0.0)).unwrap_err();
        assert!(matches!(e, DimregError::NotConvergent(_)));
    }

    #[test]
    fn json_round_trip() {
        let s = single(2);
        let back = SchwingerIntegrand::from_json_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn jets_differentiate() {
        let js = JetSpace::new(1, 3);
        let x = js.var(0);
        let e = js.exp_nilpotent(&x, 3);
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15);
        }
    }
}
