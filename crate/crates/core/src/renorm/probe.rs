//! Evaluation of formal operators on Gaussian probes `exp(−B(q, q))`.
//!
//! Every block operator maps a Gaussian to a scalar times a Gaussian, so
//! a formal combination evaluates to a finite sum `Σ s_B exp(−B)`. The
//! scalars are kept symbolic: powers of `π` and of determinants, times
//! polynomials in their logarithms.

use super::character::Root;
use super::ops::{Atom, LaurentOp, OpExpr};
use super::RenormError;
use crate::dimreg::gaussian::coprime_factorization;
use crate::dimreg::linalg::{self, Mat};
use crate::graph::EdgeSet;
use crate::laurent::LaurentSeries;
use crate::rational::{to_f64, Q};
use crate::theory::SpecSub;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Relative tolerance of the floating-point cross-check.
pub const NUMERIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum LogSym {
    Pi,
    Base(Q),
}

/// `coeff · π^pi · Π baseᵉ · Π (Σ c ln s)`.
#[derive(Debug, Clone)]
pub struct Scalar {
    coeff: Q,
    pi: Q,
    powers: Vec<(Q, Q)>,
    logs: Vec<Vec<(LogSym, Q)>>,
}

impl Scalar {
    pub fn constant(c: Q) -> Scalar {
        Scalar { coeff: c, pi: Q::zero(), powers: Vec::new(), logs: Vec::new() }
    }

    pub fn value(&self) -> f64 {
        let ln = |s: &LogSym| match s {
            LogSym::Pi => PI.ln(),
            LogSym::Base(b) => to_f64(b).ln(),
        };
        let mut log = to_f64(&self.pi) * PI.ln();
        for (b, e) in &self.powers {
            log += to_f64(e) * to_f64(b).ln();
        }
        let mut v = to_f64(&self.coeff) * log.exp();
        for f in &self.logs {
            v *= f.iter().map(|(s, c)| to_f64(c) * ln(s)).sum::<f64>();
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Sym {
    Pi,
    P(BigInt),
}

type CanonKey = (Q, Vec<(BigInt, Q)>, Vec<(Sym, u32)>);

/// Rewrites scalars over one pairwise coprime integer basis, where equal
/// values have equal expansions.
fn canonical(groups: &[&[Scalar]]) -> Vec<BTreeMap<CanonKey, Q>> {
    let mut bases: Vec<Q> = Vec::new();
    for s in groups.iter().flat_map(|g| g.iter()) {
        bases.extend(s.powers.iter().map(|(b, _)| b.clone()));
        for f in &s.logs {
            for (sym, _) in f {
                if let LogSym::Base(b) = sym {
                    bases.push(b.clone());
                }
            }
        }
    }
    bases.sort();
    bases.dedup();
    let (basis, exps) = coprime_factorization(&bases);
    let factor = |b: &Q| -> Vec<(BigInt, i64)> {
        let i = bases.binary_search(b).unwrap();
        basis.iter().cloned().zip(exps[i].iter().copied()).filter(|(_, k)| *k != 0).collect()
    };
    groups
        .iter()
        .map(|g| {
            let mut out: BTreeMap<CanonKey, Q> = BTreeMap::new();
            for s in g.iter() {
                let mut powers: BTreeMap<BigInt, Q> = BTreeMap::new();
                for (b, e) in &s.powers {
                    for (p, k) in factor(b) {
                        *powers.entry(p).or_insert_with(Q::zero) += e * Q::from_integer(BigInt::from(k));
                    }
                }
                powers.retain(|_, e| !e.is_zero());
                let mut poly: BTreeMap<BTreeMap<Sym, u32>, Q> = BTreeMap::from([(BTreeMap::new(), Q::one())]);
                for f in &s.logs {
                    let mut lin: BTreeMap<Sym, Q> = BTreeMap::new();
                    for (sym, c) in f {
                        match sym {
                            LogSym::Pi => *lin.entry(Sym::Pi).or_insert_with(Q::zero) += c,
                            LogSym::Base(b) => {
                                for (p, k) in factor(b) {
                                    *lin.entry(Sym::P(p)).or_insert_with(Q::zero) += c * Q::from_integer(BigInt::from(k));
                                }
                            }
                        }
                    }
                    let mut next: BTreeMap<BTreeMap<Sym, u32>, Q> = BTreeMap::new();
                    for (mono, a) in &poly {
                        for (sym, c) in &lin {
                            let mut m = mono.clone();
                            *m.entry(sym.clone()).or_insert(0) += 1;
                            *next.entry(m).or_insert_with(Q::zero) += a * c;
                        }
                    }
                    poly = next;
                }
                let pw: Vec<(BigInt, Q)> = powers.into_iter().collect();
                for (mono, a) in poly {
                    let key = (s.pi.clone(), pw.clone(), mono.into_iter().collect());
                    *out.entry(key).or_insert_with(Q::zero) += a * &s.coeff;
                }
            }
            out.retain(|_, c| !c.is_zero());
            out
        })
        .collect()
}

/// `Σ_B s_B exp(−B(q, q))` over the final forms `B`.
#[derive(Debug, Clone, Default)]
pub struct ProbeValue {
    pub terms: BTreeMap<Mat, Vec<Scalar>>,
}

impl ProbeValue {
    /// Exact symbolic equality, cross-checked in floating point.
    pub fn same_as(&self, o: &ProbeValue) -> bool {
        let mut forms: Vec<&Mat> = self.terms.keys().chain(o.terms.keys()).collect();
        forms.sort();
        forms.dedup();
        let empty: Vec<Scalar> = Vec::new();
        for f in forms {
            let a = self.terms.get(f).unwrap_or(&empty);
            let b = o.terms.get(f).unwrap_or(&empty);
            let c = canonical(&[a, b]);
            if c[0] != c[1] {
                return false;
            }
            let (va, vb) = (a.iter().map(Scalar::value).sum::<f64>(), b.iter().map(Scalar::value).sum::<f64>());
            let scale = va.abs().max(vb.abs()).max(1.0);
            if (va - vb).abs() > NUMERIC_TOL * scale {
                return false;
            }
        }
        true
    }

    /// Floating-point coefficient of each final form.
    pub fn numeric(&self) -> Vec<(Mat, f64)> {
        self.terms.iter().map(|(f, s)| (f.clone(), s.iter().map(Scalar::value).sum())).collect()
    }
}

/// Order in which the chains of a term are applied. Chains on different
/// components commute, so both orders must give the same value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Whole chain of each component in turn.
    ComponentMajor,
    /// One atom of every component per round.
    Interleaved,
}

struct State {
    block: EdgeSet,
    form: Mat,
    scalar: Scalar,
}

fn apply_atom(root: &Root, c: usize, atom: &Atom, st: &mut State, d: &Q) -> Result<bool, RenormError> {
    let (from, to, order) = match atom {
        Atom::Int { from, to, order } => (*from, *to, Some(*order)),
        Atom::Synth { from, to, .. } => (*from, *to, None),
        Atom::Jet { .. } => return Err(RenormError::ProbeUnsupported("momentum jets act on non-Gaussian functions".into())),
    };
    if root.restrict(st.block, c) != from {
        return Err(RenormError::IncompatibleBlocks(format!("atom on component {c} does not start at the current block")));
    }
    if order.is_some_and(|n| n < 0) {
        return Ok(false);
    }
    let next = st.block.minus(from).union(to);
    let fib = root.fibration(st.block, next)?;
    let b = fib.pull_back(&st.form);
    let m = fib.external;
    let n = b.len();
    let f: Vec<usize> = (0..m).collect();
    let k: Vec<usize> = (m..n).collect();
    let bkk = linalg::submatrix(&b, &k, &k);
    let inv = linalg::inverse(&bkk).ok_or_else(|| RenormError::IncompatibleBlocks("probe is degenerate on the loops".into()))?;
    let bfk = linalg::submatrix(&b, &f, &k);
    let correction = linalg::matmul(&linalg::matmul(&bfk, &inv), &linalg::transpose(&bfk));
    let star = linalg::sub(&linalg::submatrix(&b, &f, &f), &correction);
    let det = linalg::det(&bkk);
    let loops = Q::from_integer(BigInt::from(fib.loops));
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    let s = &mut st.scalar;
    s.pi += &loops * d * &half;
    s.powers.push((det.clone(), -(d * &half)));
    if let Some(order) = order {
        // z^n coefficient of e^{zκ}, κ = (k/2) ln π − ½ ln det.
        let kappa = vec![(LogSym::Pi, &loops * &half), (LogSym::Base(det), -half.clone())];
        let mut fact = BigInt::one();
        for i in 1..=order {
            fact *= i;
            s.logs.push(kappa.clone());
        }
        s.coeff /= Q::from_integer(fact);
    }
    st.block = next;
    st.form = star;
    Ok(true)
}

/// Applies `op` to the probe form `probe` on the momentum space of
/// `Γ/base`, at the theory's dimension.
pub fn apply(root: &Root, base: EdgeSet, op: &OpExpr, probe: &Mat, schedule: Schedule) -> Result<ProbeValue, RenormError> {
    let d = Q::from_integer(BigInt::from(root.theory.dimension));
    let mut out = ProbeValue::default();
    'terms: for (term, c) in &op.terms {
        let mut st = State { block: base, form: probe.clone(), scalar: Scalar::constant(c.clone()) };
        let mut steps: Vec<(usize, &Atom)> = Vec::new();
        match schedule {
            Schedule::ComponentMajor => {
                for (k, chain) in term {
                    steps.extend(chain.iter().map(|a| (*k, a)));
                }
            }
            Schedule::Interleaved => {
                let depth = term.values().map(|ch| ch.len()).max().unwrap_or(0);
                for i in 0..depth {
                    for (k, chain) in term {
                        if let Some(a) = chain.get(i) {
                            steps.push((*k, a));
                        }
                    }
                }
            }
        }
        for (k, a) in steps {
            if !apply_atom(root, k, a, &mut st, &d)? {
                continue 'terms;
            }
        }
        out.terms.entry(st.form).or_default().push(st.scalar);
    }
    Ok(out)
}

/// Dimension of the momentum space of `Γ/base`.
pub fn block_dim(root: &Root, base: EdgeSet) -> Result<usize, RenormError> {
    Ok(root.fibration(base, base)?.source.dim())
}

/// Deterministic pseudo-random positive definite rational forms.
pub fn random_probes(dim: usize, count: usize, seed: u64) -> Vec<Mat> {
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    (0..count)
        .map(|_| {
            let a: Mat = (0..dim)
                .map(|_| (0..dim).map(|_| Q::from_integer(BigInt::from((next() % 7) as i64 - 3))).collect())
                .collect();
            let den = Q::from_integer(BigInt::from(1 + (next() % 3) as i64));
            let gram = linalg::add(&linalg::matmul(&linalg::transpose(&a), &a), &linalg::identity(dim));
            linalg::scale(&gram, &(Q::one() / den))
        })
        .collect()
}

/// Coefficient-wise equality in `z` on every probe, up to the smaller
/// truncation order.
pub fn operators_equal(
    root: &Root,
    base: &SpecSub,
    a: &LaurentOp,
    b: &LaurentOp,
    probes: &[Mat],
) -> Result<bool, RenormError> {
    let dim = block_dim(root, base.kept)?;
    if let Some(p) = probes.iter().find(|p| p.len() != dim) {
        return Err(RenormError::IncompatibleBlocks(format!("probe of dimension {} on a block of dimension {dim}", p.len())));
    }
    let t = a.trunc().min(b.trunc());
    let lo = a.valuation().min(b.valuation());
    let hi = match (a.max_order(), b.max_order()) {
        (Some(x), Some(y)) => t.min(x.max(y)),
        (Some(x), None) | (None, Some(x)) => t.min(x),
        (None, None) => return Ok(true),
    };
    for n in lo..=hi {
        let (ca, cb) = (a.coeff(n).unwrap(), b.coeff(n).unwrap());
        for p in probes {
            let va = apply(root, base.kept, &ca, p, Schedule::ComponentMajor)?;
            let vb = apply(root, base.kept, &cb, p, Schedule::ComponentMajor)?;
            if !va.same_as(&vb) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Applies an operator built from single integral slices `I_n` of one
/// integrand to the Laurent coefficients `a_n` of that integrand.
pub fn integrate_series(op: &LaurentOp, coeffs: &LaurentSeries<f64>) -> Result<LaurentSeries<f64>, RenormError> {
    let mut terms = Vec::new();
    for (n, e) in op.terms() {
        let mut v = 0.0;
        for (term, c) in &e.terms {
            let chains: Vec<&[Atom]> = term.values().map(|c| c.as_slice()).collect();
            match chains.as_slice() {
                [[Atom::Int { order, .. }]] => {
                    let a = coeffs.coeff(*order).map_err(|e| RenormError::ProbeUnsupported(e.to_string()))?;
                    v += to_f64(c) * a;
                }
                _ => return Err(RenormError::ProbeUnsupported("term is not a single integral slice".into())),
            }
        }
        terms.push((n, v));
    }
    Ok(LaurentSeries::from_terms(terms, op.trunc()))
}
