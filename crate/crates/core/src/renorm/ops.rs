//! Formal operator values: rational combinations of per-component chains of
//! elementary block operators, and their Laurent series in `z = D − d`.

use crate::graph::{EdgeSet, Graph};
use crate::hopf::kept_ids;
use crate::laurent::{Coeff, LaurentSeries, EXACT};
use crate::rational::{fmt_q, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Elementary operator between two blocks of one root component. Block
/// sets are restricted to the pairs of that component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `z^order` coefficient of the dimensionally regularized integral
    /// `V_{Γ/from} → V_{Γ/to}`.
    Int { from: EdgeSet, to: EdgeSet, order: i64 },
    /// Opaque block operator of a synthetic character.
    Synth { from: EdgeSet, to: EdgeSet, order: i64, tag: u64 },
    /// Projection onto the part of degree `degree` in the external momenta
    /// of the block `at`.
    Jet { at: EdgeSet, degree: u32 },
}

impl Atom {
    pub fn source(&self) -> EdgeSet {
        match self {
            Atom::Int { from, .. } | Atom::Synth { from, .. } => *from,
            Atom::Jet { at, .. } => *at,
        }
    }

    pub fn target(&self) -> EdgeSet {
        match self {
            Atom::Int { to, .. } | Atom::Synth { to, .. } => *to,
            Atom::Jet { at, .. } => *at,
        }
    }

    fn map_sets(&self, f: &impl Fn(EdgeSet) -> EdgeSet) -> Atom {
        match self {
            Atom::Int { from, to, order } => Atom::Int { from: f(*from), to: f(*to), order: *order },
            Atom::Synth { from, to, order, tag } => Atom::Synth { from: f(*from), to: f(*to), order: *order, tag: *tag },
            Atom::Jet { at, degree } => Atom::Jet { at: f(*at), degree: *degree },
        }
    }

    pub fn render(&self, g: Option<&Graph>) -> String {
        let set = |s: EdgeSet| match g {
            Some(g) => format!("{{{}}}", kept_ids(g, s).join(",")),
            None => format!("{{{}}}", s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")),
        };
        match self {
            Atom::Int { from, to, order } => format!("I[{}→{}]_{}", set(*from), set(*to), order),
            Atom::Synth { from, to, order, tag } => format!("S{tag}[{}→{}]_{}", set(*from), set(*to), order),
            Atom::Jet { at, degree } => format!("J{degree}[{}]", set(*at)),
        }
    }
}

/// Atoms applied first to last; the empty chain is the identity.
pub type Chain = Vec<Atom>;

/// One chain per root component that is acted on; absent components carry
/// the identity. This is the bullet product of the chains.
pub type Term = BTreeMap<usize, Chain>;

/// Adjacent jets on the same block are orthogonal idempotents.
fn normalize_chain(chain: Chain) -> Option<Chain> {
    let mut out: Chain = Vec::with_capacity(chain.len());
    for a in chain {
        if let (Some(Atom::Jet { at: p, degree: dp }), Atom::Jet { at, degree }) = (out.last(), &a) {
            if p == at {
                if dp == degree {
                    continue;
                }
                return None;
            }
        }
        out.push(a);
    }
    Some(out)
}

/// Finite rational combination of terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OpExpr {
    pub terms: BTreeMap<Term, Q>,
}

impl OpExpr {
    pub fn identity() -> OpExpr {
        OpExpr::term(Term::new(), Q::one())
    }

    pub fn term(t: Term, c: Q) -> OpExpr {
        let mut e = OpExpr::default();
        e.push(t, c);
        e
    }

    pub fn atom(component: usize, a: Atom) -> OpExpr {
        OpExpr::term(Term::from([(component, vec![a])]), Q::one())
    }

    pub fn push(&mut self, t: Term, c: Q) {
        if Zero::is_zero(&c) {
            return;
        }
        let e = self.terms.entry(t.clone()).or_insert_with(<Q as Zero>::zero);
        *e += c;
        if Zero::is_zero(e) {
            self.terms.remove(&t);
        }
    }

    /// `self ∘ inner`: `inner` is applied first.
    pub fn after(&self, inner: &OpExpr) -> OpExpr {
        let mut out = OpExpr::default();
        for (ta, ca) in &self.terms {
            'pairs: for (tb, cb) in &inner.terms {
                let mut t = tb.clone();
                for (c, chain) in ta {
                    let mut joined = t.remove(c).unwrap_or_default();
                    joined.extend(chain.iter().cloned());
                    match normalize_chain(joined) {
                        Some(ch) if ch.is_empty() => {}
                        Some(ch) => {
                            t.insert(*c, ch);
                        }
                        None => continue 'pairs,
                    }
                }
                out.push(t, ca * cb);
            }
        }
        out
    }

    /// Block product of operators on disjoint sets of components; terms
    /// acting on a common component give the zero block.
    pub fn bullet(&self, o: &OpExpr) -> OpExpr {
        let mut out = OpExpr::default();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &o.terms {
                if ta.keys().any(|c| tb.contains_key(c)) {
                    continue;
                }
                let mut t = ta.clone();
                t.extend(tb.iter().map(|(c, ch)| (*c, ch.clone())));
                out.push(t, ca * cb);
            }
        }
        out
    }

    /// Components acted on by some term.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.terms.keys().flat_map(|t| t.keys().copied()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Renames components and pairs, e.g. to embed a component root into a
    /// disjoint union.
    pub fn relabel(&self, component: &impl Fn(usize) -> usize, pairs: &impl Fn(EdgeSet) -> EdgeSet) -> OpExpr {
        let mut out = OpExpr::default();
        for (t, c) in &self.terms {
            let t2: Term = t.iter().map(|(k, ch)| (component(*k), ch.iter().map(|a| a.map_sets(pairs)).collect())).collect();
            out.push(t2, c.clone());
        }
        out
    }

    pub fn render(&self, g: Option<&Graph>) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let body = if t.is_empty() {
                    "Id".to_string()
                } else {
                    t.iter()
                        .map(|(k, ch)| {
                            let atoms: Vec<String> = ch.iter().rev().map(|a| a.render(g)).collect();
                            format!("c{k}:{}", atoms.join("∘"))
                        })
                        .collect::<Vec<_>>()
                        .join(" • ")
                };
                format!("{}·{body}", fmt_q(c))
            })
            .collect();
        parts.join(" + ")
    }
}

impl Coeff for OpExpr {
    fn zero() -> Self {
        OpExpr::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &o.terms {
            out.push(t.clone(), c.clone());
        }
        out
    }
    fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }
    fn scale(&self, k: &Q) -> Self {
        let mut out = OpExpr::default();
        for (t, c) in &self.terms {
            out.push(t.clone(), c * k);
        }
        out
    }
}

/// Element of `End B̃([z⁻¹, z]])` with symbolic coefficients.
pub type LaurentOp = LaurentSeries<OpExpr>;

pub fn identity_op() -> LaurentOp {
    LaurentSeries::monomial(0, OpExpr::identity(), EXACT)
}

pub fn zero_op() -> LaurentOp {
    LaurentSeries::zero(EXACT)
}

/// `outer ∘ inner`, z-bilinearly.
pub fn compose(outer: &LaurentOp, inner: &LaurentOp) -> LaurentOp {
    outer.mul_with(inner, |a, b| a.after(b))
}

pub fn bullet(a: &LaurentOp, b: &LaurentOp) -> LaurentOp {
    a.mul_with(b, |x, y| x.bullet(y))
}

/// Formal equality up to the smaller truncation order.
pub fn formally_equal(a: &LaurentOp, b: &LaurentOp) -> bool {
    a.agrees_with(b)
}

pub fn render_op(x: &LaurentOp, g: Option<&Graph>) -> String {
    x.render(|c| format!("({})", c.render(g)))
}
