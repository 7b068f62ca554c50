//! Free commutative algebras on connected specified graphs and on connected
//! pairs, their coproducts, quotients, grading and the projection `P2`.
//!
//! Generators are identified by canonical keys. A [`Hopf`] registry keeps one
//! concrete representative per key so that coproducts can be iterated.

use crate::graph::{canonical_encoding, EdgeSet, Graph};
use crate::rational::{fmt_q, q, Q};
use crate::theory::{anchor, spec_of, SpecSub, SpecifiedGraph, Theory, TheoryError};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

pub type Key = String;
/// Sorted multiset of generator keys; the empty monomial is the unit.
pub type Monomial = Vec<Key>;

pub fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut m: Monomial = a.iter().chain(b.iter()).cloned().collect();
    m.sort();
    m
}

fn add_term<K: Ord>(map: &mut BTreeMap<K, Q>, k: K, c: Q) {
    if c.is_zero() {
        return;
    }
    *map.entry(k).or_insert_with(Q::zero) += c;
}

fn prune<K: Ord + Clone>(map: &mut BTreeMap<K, Q>) {
    map.retain(|_, v| !v.is_zero());
}

/// Rational combination of monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    pub terms: BTreeMap<Monomial, Q>,
}

impl AlgebraElement {
    pub fn unit() -> Self {
        Self::mono(Vec::new())
    }
    pub fn mono(m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, q(1));
        AlgebraElement { terms }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &o.terms {
            add_term(&mut terms, k.clone(), v.clone());
        }
        prune(&mut terms);
        AlgebraElement { terms }
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                add_term(&mut terms, mono_mul(a, b), x * y);
            }
        }
        prune(&mut terms);
        AlgebraElement { terms }
    }
}

/// Rational combination of `arity`-fold tensors of monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor {
    pub arity: usize,
    pub terms: BTreeMap<Vec<Monomial>, Q>,
}

impl Tensor {
    pub fn zero(arity: usize) -> Self {
        Tensor { arity, terms: BTreeMap::new() }
    }
    /// `1 ⊗ … ⊗ 1`.
    pub fn unit(arity: usize) -> Self {
        let mut t = Tensor::zero(arity);
        t.terms.insert(vec![Vec::new(); arity], q(1));
        t
    }
    pub fn push(&mut self, slots: Vec<Monomial>, c: Q) {
        debug_assert_eq!(slots.len(), self.arity);
        add_term(&mut self.terms, slots, c);
        prune(&mut self.terms);
    }
    pub fn add(&self, o: &Tensor) -> Tensor {
        let mut t = self.clone();
        for (k, v) in &o.terms {
            add_term(&mut t.terms, k.clone(), v.clone());
        }
        prune(&mut t.terms);
        t
    }
    /// Slot-wise product.
    pub fn mul(&self, o: &Tensor) -> Tensor {
        let mut t = Tensor::zero(self.arity);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let slots = a.iter().zip(b).map(|(p, r)| mono_mul(p, r)).collect();
                add_term(&mut t.terms, slots, x * y);
            }
        }
        prune(&mut t.terms);
        t
    }
    /// Applies `f` to every monomial of every slot.
    pub fn map_slots(&self, mut f: impl FnMut(&Monomial) -> Monomial) -> Tensor {
        let mut t = Tensor::zero(self.arity);
        for (k, v) in &self.terms {
            add_term(&mut t.terms, k.iter().map(&mut f).collect(), v.clone());
        }
        prune(&mut t.terms);
        t
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Concrete representative of a generator.
#[derive(Debug, Clone)]
pub enum Generator {
    /// Connected specified graph.
    Graph(SpecifiedGraph),
    /// Connected specified graph with a specified covering subgraph.
    Pair(SpecifiedGraph, SpecSub),
}

/// Key of a connected specified graph.
pub fn graph_key(sg: &SpecifiedGraph) -> Key {
    let enc = canonical_encoding(&sg.graph.colored(), None);
    format!("H:{enc}#{}", sg.spec[0])
}

/// Key of a pair whose ambient graph is connected: kept pairs and the
/// indices of the subgraph's components are painted into the colours.
pub fn pair_key(sg: &SpecifiedGraph, sub: &SpecSub) -> Key {
    let g = &sg.graph;
    let mut cg = g.colored();
    let comps = g.components(sub.kept);
    for v in 0..g.vertices().len() {
        let c = comps.of_vertex[v];
        if anchor(g, sub.kept, &comps, c).is_some() {
            cg.vertex_colors[v] = format!("{}|j={}", cg.vertex_colors[v], spec_of(g, sub, &comps, c));
        }
    }
    for (p, e) in cg.edges.iter_mut().enumerate() {
        if sub.kept.contains(p) {
            e.2.push_str("|k");
        }
    }
    let enc = canonical_encoding(&cg, None);
    format!("D:{enc}#{}", sg.spec[0])
}

/// Short display form of a key.
pub fn short_key(k: &str) -> String {
    use sha2::{Digest, Sha256};
    let d = Sha256::digest(k.as_bytes());
    let h: String = d.iter().take(5).map(|b| format!("{b:02x}")).collect();
    format!("{}{}", &k[..1], h)
}

/// Which algebra a coproduct lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    H,
    D,
}

/// Registry of generators with memoized coproducts.
pub struct Hopf {
    pub theory: Theory,
    reps: BTreeMap<Key, Generator>,
    grades: BTreeMap<Key, usize>,
    memo: HashMap<Key, Tensor>,
}

impl Hopf {
    pub fn new(theory: Theory) -> Hopf {
        Hopf { theory, reps: BTreeMap::new(), grades: BTreeMap::new(), memo: HashMap::new() }
    }

    pub fn representative(&self, k: &str) -> Option<&Generator> {
        self.reps.get(k)
    }

    pub fn grade(&self, k: &str) -> usize {
        self.grades[k]
    }

    pub fn grade_mono(&self, m: &Monomial) -> usize {
        m.iter().map(|k| self.grade(k)).sum()
    }

    /// Registers the components of a specified graph.
    pub fn register_graph(&mut self, sg: &SpecifiedGraph) -> Monomial {
        let mut m: Monomial = sg
            .split()
            .into_iter()
            .map(|c| {
                let k = graph_key(&c);
                self.grades.entry(k.clone()).or_insert(c.graph.loop_number());
                self.reps.entry(k.clone()).or_insert(Generator::Graph(c));
                k
            })
            .collect();
        m.sort();
        m
    }

    /// Registers the connected factors of a pair.
    pub fn register_pair(&mut self, sg: &SpecifiedGraph, sub: &SpecSub) -> Monomial {
        let g = &sg.graph;
        let all = g.all_pairs();
        let comps = g.components(all);
        let ids = crate::theory::sub_to_ids(g, sub);
        let mut m: Monomial = (0..comps.count)
            .map(|c| {
                let part = SpecifiedGraph {
                    graph: g.component_graph(all, &comps, c),
                    spec: vec![sg.spec[c]],
                };
                let psub = crate::theory::sub_from_ids(&part.graph, &ids);
                let k = pair_key(&part, &psub);
                self.grades.entry(k.clone()).or_insert(part.graph.loop_number_of(psub.kept));
                self.reps.entry(k.clone()).or_insert(Generator::Pair(part, psub));
                k
            })
            .collect();
        m.sort();
        m
    }

    /// Components of the covering subgraph `sub` as a monomial of graphs.
    pub fn subgraph_monomial(&mut self, sg: &SpecifiedGraph, sub: &SpecSub) -> Monomial {
        let comps = sg.graph.components(sub.kept);
        let mut m = Vec::new();
        for c in 0..comps.count {
            m.extend(self.register_graph(&sg.component_of(sub, &comps, c)));
        }
        m.sort();
        m
    }

    /// `Δ(Γ̄) = Σ γ̄ ⊗ Γ̄/γ̄`, enumerated directly on `sg` (which may be
    /// disconnected).
    pub fn coproduct_graph(&mut self, sg: &SpecifiedGraph) -> Result<Tensor, TheoryError> {
        let t = self.theory.clone();
        let mut out = Tensor::zero(2);
        for d in sg.coproduct_subgraphs(&t)? {
            let left = self.subgraph_monomial(sg, &d);
            let quotient = sg.contract(&t, &d)?;
            let right = self.register_graph(&quotient);
            out.push(vec![left, right], q(1));
        }
        Ok(out)
    }

    /// `Δ(Γ̄, γ̄) = Σ (Γ̄, δ̄) ⊗ (Γ̄/δ̄, γ̄/δ̄)` over `δ̄ ⊆ γ̄` with `γ̄/δ̄` in
    /// the theory.
    pub fn coproduct_pair(&mut self, sg: &SpecifiedGraph, sub: &SpecSub) -> Result<Tensor, TheoryError> {
        let t = self.theory.clone();
        let mut out = Tensor::zero(2);
        for d in sg.specified_subgraphs(&t, &SpecSub::empty(), sub)? {
            let left = self.register_pair(sg, &d);
            let quotient = sg.contract(&t, &d)?;
            let inner = sg.translate(&quotient, &d, sub);
            let right = self.register_pair(&quotient, &inner);
            out.push(vec![left, right], q(1));
        }
        Ok(out)
    }

    /// Coproduct of a registered generator.
    pub fn coproduct_key(&mut self, k: &str) -> Result<Tensor, TheoryError> {
        if let Some(t) = self.memo.get(k) {
            return Ok(t.clone());
        }
        let t = match self.reps[k].clone() {
            Generator::Graph(sg) => self.coproduct_graph(&sg)?,
            Generator::Pair(sg, sub) => self.coproduct_pair(&sg, &sub)?,
        };
        self.memo.insert(k.to_string(), t.clone());
        Ok(t)
    }

    /// Multiplicative extension to monomials.
    pub fn coproduct_mono(&mut self, m: &Monomial) -> Result<Tensor, TheoryError> {
        let mut acc = Tensor::unit(2);
        for k in m {
            acc = acc.mul(&self.coproduct_key(k)?);
        }
        Ok(acc)
    }

    /// Applies the coproduct to slot `slot` of a tensor.
    pub fn apply_at(&mut self, t: &Tensor, slot: usize) -> Result<Tensor, TheoryError> {
        let mut out = Tensor::zero(t.arity + 1);
        for (slots, c) in &t.terms {
            let d = self.coproduct_mono(&slots[slot])?;
            for (pair, dc) in &d.terms {
                let mut s = slots[..slot].to_vec();
                s.extend(pair.iter().cloned());
                s.extend(slots[slot + 1..].iter().cloned());
                add_term(&mut out.terms, s, c * dc);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    /// Checks `(Δ⊗id)Δ(m) = (id⊗Δ)Δ(m)`; returns both sides.
    pub fn coassociativity(&mut self, m: &Monomial) -> Result<(Tensor, Tensor), TheoryError> {
        let d = self.coproduct_mono(m)?;
        Ok((self.apply_at(&d, 0)?, self.apply_at(&d, 1)?))
    }

    /// Removes degree-zero generators (residues in the graph algebra, pairs
    /// with empty subgraph in the pair algebra).
    pub fn quotient_mono(&self, m: &Monomial) -> Monomial {
        m.iter().filter(|k| self.grade(k) > 0).cloned().collect()
    }

    pub fn quotient(&self, t: &Tensor) -> Tensor {
        t.map_slots(|m| self.quotient_mono(m))
    }

    pub fn quotient_element(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut terms = BTreeMap::new();
        for (m, c) in &x.terms {
            add_term(&mut terms, self.quotient_mono(m), c.clone());
        }
        prune(&mut terms);
        AlgebraElement { terms }
    }

    /// Counit: one on products of degree-zero generators, zero otherwise.
    pub fn counit(&self, m: &Monomial) -> Q {
        if m.iter().all(|k| self.grade(k) == 0) {
            Q::one()
        } else {
            Q::zero()
        }
    }

    /// `(ε ⊗ id)` or `(id ⊗ ε)` of a 2-tensor, as an element.
    pub fn counit_slot(&self, t: &Tensor, slot: usize) -> AlgebraElement {
        let mut terms = BTreeMap::new();
        for (s, c) in &t.terms {
            let e = self.counit(&s[slot]);
            if !e.is_zero() {
                add_term(&mut terms, s[1 - slot].clone(), c * e);
            }
        }
        prune(&mut terms);
        AlgebraElement { terms }
    }

    /// `P2(Γ̄, γ̄) = γ̄`, on a registered pair generator.
    pub fn p2_key(&mut self, k: &str) -> Monomial {
        match self.reps[k].clone() {
            Generator::Pair(sg, sub) => self.subgraph_monomial(&sg, &sub),
            Generator::Graph(_) => vec![k.to_string()],
        }
    }

    pub fn p2_mono(&mut self, m: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for k in m {
            out.extend(self.p2_key(k));
        }
        out.sort();
        out
    }

    pub fn p2_tensor(&mut self, t: &Tensor) -> Tensor {
        let mut out = Tensor::zero(t.arity);
        for (slots, c) in &t.terms {
            let s = slots.iter().map(|m| self.p2_mono(m)).collect();
            add_term(&mut out.terms, s, c.clone());
        }
        prune(&mut out.terms);
        out
    }

    /// Human-readable listing: `coeff * [a, b] ⊗ [c]` with short keys.
    pub fn render(&self, t: &Tensor) -> String {
        let mut lines: Vec<(Vec<Vec<String>>, String)> = t
            .terms
            .iter()
            .map(|(slots, c)| {
                let shorts: Vec<Vec<String>> = slots
                    .iter()
                    .map(|m| {
                        let mut v: Vec<String> = m.iter().map(|k| short_key(k)).collect();
                        v.sort();
                        v
                    })
                    .collect();
                let body = shorts.iter().map(|v| format!("[{}]", v.join(", "))).collect::<Vec<_>>().join(" ⊗ ");
                (shorts, format!("{} * {}", fmt_q(c), body))
            })
            .collect();
        lines.sort();
        let mut s = String::new();
        for (_, l) in lines {
            let _ = writeln!(s, "{l}");
        }
        s
    }
}

/// Describes a registered generator in one line.
pub fn describe(h: &Hopf, k: &str) -> String {
    let loops = h.grade(k);
    match h.representative(k) {
        Some(Generator::Graph(sg)) => format!(
            "{} graph V={} I={} L={} spec={}",
            short_key(k),
            sg.graph.vertices().len(),
            sg.graph.num_pairs(),
            loops,
            sg.spec[0]
        ),
        Some(Generator::Pair(sg, sub)) => format!(
            "{} pair V={} I={} kept={} |γ|={} spec={}",
            short_key(k),
            sg.graph.vertices().len(),
            sg.graph.num_pairs(),
            sub.kept.len(),
            loops,
            sg.spec[0]
        ),
        None => short_key(k),
    }
}

/// Kept set of a pair, listed by half-edge ids.
pub fn kept_ids(g: &Graph, kept: EdgeSet) -> Vec<String> {
    kept.iter()
        .map(|p| {
            let (a, b) = g.pairs()[p];
            format!("{}-{}", g.halfedges()[a].id, g.halfedges()[b].id)
        })
        .collect()
}
