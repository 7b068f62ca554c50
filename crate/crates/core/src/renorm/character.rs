//! Characters on the doubling bialgebra, evaluated on the pairs
//! `(Γ̄/base, sub/base)` of a fixed root graph.

use super::ops::{bullet, compose, identity_op, zero_op, Atom, LaurentOp, OpExpr, Term};
use super::RenormError;
use crate::dimreg::{block_fibration, Fibration};
use crate::graph::{Components, EdgeSet};
use crate::hopf::pair_key;
use crate::laurent::{Coeff, LaurentSeries, EXACT};
use crate::rational::Q;
use crate::theory::{sub_from_ids, sub_to_ids, SpecSub, SpecifiedGraph, Theory};
use num_bigint::BigInt;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

static NEXT_ROOT: AtomicU64 = AtomicU64::new(1);

/// A specified graph whose covering subgraphs index the blocks operators
/// act between.
pub struct Root {
    uid: u64,
    pub theory: Theory,
    pub sg: SpecifiedGraph,
    pub comps: Components,
    /// Pairs of each connected component.
    pub component_pairs: Vec<EdgeSet>,
    between: Mutex<HashMap<(SpecSub, SpecSub), Arc<Vec<SpecSub>>>>,
    fibrations: Mutex<HashMap<(EdgeSet, EdgeSet), Arc<Fibration>>>,
}

impl std::fmt::Debug for Root {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Root").field("uid", &self.uid).field("pairs", &self.sg.graph.num_pairs()).finish()
    }
}

impl Root {
    pub fn new(theory: &Theory, sg: &SpecifiedGraph) -> Arc<Root> {
        let g = &sg.graph;
        let comps = g.components(g.all_pairs());
        let mut component_pairs = vec![EdgeSet::EMPTY; comps.count];
        for (p, &(a, _)) in g.pairs().iter().enumerate() {
            component_pairs[comps.of_vertex[g.halfedges()[a].vertex]].insert(p);
        }
        Arc::new(Root {
            uid: NEXT_ROOT.fetch_add(1, Ordering::Relaxed),
            theory: theory.clone(),
            sg: sg.clone(),
            comps,
            component_pairs,
            between: Mutex::new(HashMap::new()),
            fibrations: Mutex::new(HashMap::new()),
        })
    }

    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn component_count(&self) -> usize {
        self.comps.count
    }

    pub fn restrict(&self, s: EdgeSet, c: usize) -> EdgeSet {
        s.intersect(self.component_pairs[c])
    }

    pub fn full(&self) -> SpecSub {
        self.sg.full()
    }

    /// Grading of the pair `(Γ̄/base, sub/base)`.
    pub fn degree(&self, base: &SpecSub, sub: &SpecSub) -> usize {
        self.sg.loops(sub) - self.sg.loops(base)
    }

    /// Components on which `sub/base` has loops, with their loop numbers.
    pub fn active(&self, base: &SpecSub, sub: &SpecSub) -> Vec<(usize, usize)> {
        let g = &self.sg.graph;
        (0..self.comps.count)
            .filter_map(|c| {
                let l = g.loop_number_of(self.restrict(sub.kept, c)) - g.loop_number_of(self.restrict(base.kept, c));
                (l > 0).then_some((c, l))
            })
            .collect()
    }

    /// Specified subgraphs `δ̄` with `base ⊆ δ̄ ⊆ sub` entering the pair
    /// coproduct of `(Γ̄/base, sub/base)`.
    pub fn between(&self, base: &SpecSub, sub: &SpecSub) -> Result<Arc<Vec<SpecSub>>, RenormError> {
        let key = (base.clone(), sub.clone());
        if let Some(v) = self.between.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.sg.specified_subgraphs(&self.theory, base, sub)?);
        self.between.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// Pairs `(Γ̄, γ̄)` generated by the root.
    pub fn pairs(&self) -> Result<Vec<SpecSub>, RenormError> {
        Ok(self.between(&SpecSub::empty(), &self.full())?.to_vec())
    }

    pub fn fibration(&self, from: EdgeSet, to: EdgeSet) -> Result<Arc<Fibration>, RenormError> {
        if let Some(f) = self.fibrations.lock().unwrap().get(&(from, to)) {
            return Ok(f.clone());
        }
        let f = Arc::new(block_fibration(&self.sg.graph, from, to)?);
        self.fibrations.lock().unwrap().insert((from, to), f.clone());
        Ok(f)
    }

    /// Key of the connected pair carried by component `c`.
    pub fn component_pair_key(&self, base: &SpecSub, sub: &SpecSub, c: usize) -> Result<String, RenormError> {
        let full = self.full();
        let part = self.sg.component_of(&full, &self.comps, c);
        let local = |s: &SpecSub| sub_from_ids(&part.graph, &sub_to_ids(&self.sg.graph, s));
        let (lb, ls) = (local(base), local(sub));
        let quotient = part.contract(&self.theory, &lb)?;
        let inner = part.translate(&quotient, &lb, &ls);
        Ok(pair_key(&quotient, &inner))
    }
}

/// Embedding of the operators of one root into a disjoint union of roots.
pub struct Embedding {
    pub union: Arc<Root>,
    /// Per part: component map and pair map into the union.
    maps: Vec<(Vec<usize>, Vec<usize>)>,
    ids: Vec<Vec<String>>,
}

impl Embedding {
    pub fn new(parts: &[&Arc<Root>]) -> Result<Embedding, RenormError> {
        let sgs: Vec<&SpecifiedGraph> = parts.iter().map(|r| &r.sg).collect();
        let u = SpecifiedGraph::disjoint_union(&sgs)?;
        let union = Root::new(&parts[0].theory, &u);
        let ug = &union.sg.graph;
        let mut maps = Vec::new();
        let mut ids = Vec::new();
        for (i, r) in parts.iter().enumerate() {
            let g = &r.sg.graph;
            let prefix = |id: &str| format!("{i}.{id}");
            let pair_map = g
                .pairs()
                .iter()
                .map(|&(a, _)| {
                    let h = ug.halfedge_index(&prefix(&g.halfedges()[a].id)).unwrap();
                    ug.pair_of(h).unwrap()
                })
                .collect();
            let comp_map = (0..r.comps.count)
                .map(|c| {
                    let v = r.comps.members(c)[0];
                    union.comps.of_vertex[ug.vertex_index(&prefix(&g.vertices()[v].id)).unwrap()]
                })
                .collect();
            maps.push((comp_map, pair_map));
            ids.push(g.halfedges().iter().map(|h| prefix(&h.id)).collect());
        }
        Ok(Embedding { union, maps, ids })
    }

    /// Union of one subgraph per part.
    pub fn sub(&self, parts: &[&SpecSub], roots: &[&Arc<Root>]) -> SpecSub {
        let mut ids = HashMap::new();
        for (i, (s, r)) in parts.iter().zip(roots).enumerate() {
            for (id, j) in sub_to_ids(&r.sg.graph, s) {
                let h = r.sg.graph.halfedge_index(&id).unwrap();
                ids.insert(self.ids[i][h].clone(), j);
            }
        }
        sub_from_ids(&self.union.sg.graph, &ids)
    }

    pub fn op(&self, part: usize, x: &LaurentOp) -> LaurentOp {
        let (cm, pm) = &self.maps[part];
        let pairs = |s: EdgeSet| {
            let mut out = EdgeSet::EMPTY;
            for p in s.iter() {
                out.insert(pm[p]);
            }
            out
        };
        x.map(|e| e.relabel(&|c| cm[c], &pairs))
    }
}

/// Splitting of the target algebra used by [`birkhoff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Strictly negative powers of `z`.
    Minimal,
    /// Taylor jets of order `|x|` in the external momenta of the target block.
    Taylor,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Scheme, RenormError> {
        match s {
            "minimal" => Ok(Scheme::Minimal),
            "taylor" => Ok(Scheme::Taylor),
            other => Err(RenormError::SchemeUnavailable(other.to_string())),
        }
    }

    /// `P_{|x|}` on a value of the pair `x = (Γ̄/base, sub/base)`.
    pub fn project(&self, root: &Root, base: &SpecSub, sub: &SpecSub, x: &LaurentOp) -> LaurentOp {
        match self {
            Scheme::Minimal => x.minimal_split().0,
            Scheme::Taylor => compose(&taylor_jets(root, base, sub), x),
        }
    }

    /// Whether a value lies in the image of the projection.
    pub fn in_minus(&self, root: &Root, base: &SpecSub, sub: &SpecSub, x: &LaurentOp) -> bool {
        self.project(root, base, sub, x).agrees_with(x)
    }

    /// Whether a value lies in the kernel of the projection.
    pub fn in_plus(&self, root: &Root, base: &SpecSub, sub: &SpecSub, x: &LaurentOp) -> bool {
        let p = self.project(root, base, sub, x);
        p.agrees_with(&LaurentSeries::zero(p.trunc()))
    }
}

/// `Σ_{a_1 + … + a_k ≤ m} J(a_1) • … • J(a_k)` over the active components.
pub fn taylor_jets(root: &Root, base: &SpecSub, sub: &SpecSub) -> LaurentOp {
    let m = root.degree(base, sub) as u32;
    let active = root.active(base, sub);
    let mut out = OpExpr::default();
    let mut stack: Vec<(usize, u32, Term)> = vec![(0, 0, Term::new())];
    while let Some((i, used, t)) = stack.pop() {
        if i == active.len() {
            out.push(t, Q::from_integer(1.into()));
            continue;
        }
        let c = active[i].0;
        for a in 0..=(m - used) {
            let mut t2 = t.clone();
            t2.insert(c, vec![Atom::Jet { at: root.restrict(sub.kept, c), degree: a }]);
            stack.push((i + 1, used + a, t2));
        }
    }
    LaurentSeries::monomial(0, out, EXACT)
}

type MemoKey = (u64, SpecSub, SpecSub);

enum Rule {
    Unit,
    Feynman { trunc: i64 },
    Synthetic { seed: u64, trunc: i64 },
    Convolution(Character, Character),
    Inverse(Character),
    Minus(Arc<Birkhoff>),
    Plus(Arc<Birkhoff>),
    Perturbed { inner: Character, at: MemoKey, extra: LaurentOp },
}

struct Inner {
    rule: Rule,
    memo: Mutex<HashMap<MemoKey, LaurentOp>>,
}

/// Unital multiplicative map from pairs to Laurent operators.
#[derive(Clone)]
pub struct Character(Arc<Inner>);

impl Character {
    fn from_rule(rule: Rule) -> Character {
        Character(Arc::new(Inner { rule, memo: Mutex::new(HashMap::new()) }))
    }

    /// The counit `E`: identity on degree zero, zero elsewhere.
    pub fn unit() -> Character {
        Character::from_rule(Rule::Unit)
    }

    /// Feynman rules `Ĩ`: the regularized integral of each active component,
    /// expanded in `z` up to order `trunc`.
    pub fn feynman(trunc: i64) -> Character {
        Character::from_rule(Rule::Feynman { trunc })
    }

    /// Random rational coefficients on opaque block operators, determined
    /// by the canonical key of each connected pair and the seed.
    pub fn synthetic(seed: u64, trunc: i64) -> Character {
        Character::from_rule(Rule::Synthetic { seed, trunc })
    }

    /// `self ÷ psi`.
    pub fn convolve(&self, psi: &Character) -> Character {
        Character::from_rule(Rule::Convolution(self.clone(), psi.clone()))
    }

    pub fn inverse(&self) -> Character {
        Character::from_rule(Rule::Inverse(self.clone()))
    }

    /// Adds `extra` to the value on one pair of one root.
    pub fn perturbed(&self, root: &Root, base: &SpecSub, sub: &SpecSub, extra: LaurentOp) -> Character {
        Character::from_rule(Rule::Perturbed {
            inner: self.clone(),
            at: (root.uid, base.clone(), sub.clone()),
            extra,
        })
    }

    /// `φ(Γ̄/base, sub/base)`.
    pub fn eval(&self, root: &Root, base: &SpecSub, sub: &SpecSub) -> Result<LaurentOp, RenormError> {
        if !base.kept.is_subset(sub.kept) {
            return Err(RenormError::IncompatibleBlocks("base is not inside sub".into()));
        }
        if root.degree(base, sub) == 0 {
            return Ok(identity_op());
        }
        let key = (root.uid, base.clone(), sub.clone());
        if let Some(v) = self.0.memo.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.compute(root, base, sub)?;
        self.0.memo.lock().unwrap().entry(key).or_insert_with(|| v.clone());
        Ok(v)
    }

    /// Value on the pair `(Γ̄, γ̄)` of the root itself.
    pub fn on_pair(&self, root: &Root, sub: &SpecSub) -> Result<LaurentOp, RenormError> {
        self.eval(root, &SpecSub::empty(), sub)
    }

    fn compute(&self, root: &Root, base: &SpecSub, sub: &SpecSub) -> Result<LaurentOp, RenormError> {
        match &self.0.rule {
            Rule::Unit => Ok(zero_op()),
            Rule::Feynman { trunc } => Ok(per_component(root, base, sub, |c, loops| {
                let (from, to) = (root.restrict(base.kept, c), root.restrict(sub.kept, c));
                let terms = (-(loops as i64)..=*trunc).map(|n| (n, OpExpr::atom(c, Atom::Int { from, to, order: n })));
                Ok(LaurentSeries::from_terms(terms, *trunc))
            })?),
            Rule::Synthetic { seed, trunc } => per_component(root, base, sub, |c, loops| {
                let key = root.component_pair_key(base, sub, c)?;
                let (from, to) = (root.restrict(base.kept, c), root.restrict(sub.kept, c));
                let terms = (-(loops as i64)..=*trunc).map(|n| {
                    let atom = Atom::Synth { from, to, order: n, tag: *seed };
                    (n, OpExpr::atom(c, atom).scale(&hashed_rational(&key, n, *seed)))
                });
                Ok(LaurentSeries::from_terms(terms, *trunc))
            }),
            Rule::Convolution(phi, psi) => {
                let mut acc = zero_op();
                for d in root.between(base, sub)?.iter() {
                    acc = acc.add(&compose(&psi.eval(root, d, sub)?, &phi.eval(root, base, d)?));
                }
                Ok(acc)
            }
            Rule::Inverse(phi) => {
                let mut acc = phi.eval(root, base, sub)?.neg();
                for d in root.between(base, sub)?.iter() {
                    if d.kept == base.kept || d.kept == sub.kept {
                        continue;
                    }
                    acc = acc.sub(&compose(&self.eval(root, d, sub)?, &phi.eval(root, base, d)?));
                }
                Ok(acc)
            }
            Rule::Minus(b) => Ok(b.split(root, base, sub)?.0),
            Rule::Plus(b) => Ok(b.split(root, base, sub)?.1),
            Rule::Perturbed { inner, at, extra } => {
                let v = inner.eval(root, base, sub)?;
                if at.0 == root.uid && at.1 == *base && at.2 == *sub {
                    Ok(v.add(extra))
                } else {
                    Ok(v)
                }
            }
        }
    }
}

/// Bullet product over active components of a per-component value.
fn per_component(
    root: &Root,
    base: &SpecSub,
    sub: &SpecSub,
    f: impl Fn(usize, usize) -> Result<LaurentOp, RenormError>,
) -> Result<LaurentOp, RenormError> {
    let mut acc = identity_op();
    for (c, loops) in root.active(base, sub) {
        acc = bullet(&acc, &f(c, loops)?);
    }
    Ok(acc)
}

/// Nonzero rational `±a/b` with `1 ≤ a ≤ 9`, `1 ≤ b ≤ 4`.
fn hashed_rational(key: &str, n: i64, seed: u64) -> Q {
    let d = Sha256::new().chain_update(key).chain_update(n.to_le_bytes()).chain_update(seed.to_le_bytes()).finalize();
    let a = 1 + (d[0] % 9) as i64;
    let b = 1 + (d[1] % 4) as i64;
    let s = if d[2] & 1 == 0 { 1 } else { -1 };
    Q::new(BigInt::from(s * a), BigInt::from(b))
}

/// Bogoliubov recursion for one character and scheme.
pub struct Birkhoff {
    phi: Character,
    scheme: Scheme,
    memo: Mutex<HashMap<MemoKey, (LaurentOp, LaurentOp)>>,
}

impl Birkhoff {
    /// `R̄(x) = φ(x) + Σ φ(Γ̄/δ̄, γ̄/δ̄) ∘ φ₋(Γ̄, δ̄)` over `δ̄` strictly between
    /// the base and `sub`.
    pub fn bogoliubov(&self, root: &Root, base: &SpecSub, sub: &SpecSub) -> Result<LaurentOp, RenormError> {
        let mut acc = self.phi.eval(root, base, sub)?;
        for d in root.between(base, sub)?.iter() {
            if d.kept == base.kept || d.kept == sub.kept {
                continue;
            }
            let minus = if root.degree(base, d) == 0 { identity_op() } else { self.split(root, base, d)?.0 };
            acc = acc.add(&compose(&self.phi.eval(root, d, sub)?, &minus));
        }
        Ok(acc)
    }

    fn split(&self, root: &Root, base: &SpecSub, sub: &SpecSub) -> Result<(LaurentOp, LaurentOp), RenormError> {
        if root.degree(base, sub) == 0 {
            return Ok((identity_op(), identity_op()));
        }
        let key = (root.uid, base.clone(), sub.clone());
        if let Some(v) = self.memo.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let bog = self.bogoliubov(root, base, sub)?;
        let p = self.scheme.project(root, base, sub, &bog);
        let v = (p.neg(), bog.sub(&p));
        self.memo.lock().unwrap().entry(key).or_insert_with(|| v.clone());
        Ok(v)
    }
}

/// `(φ₋, φ₊)` with `φ = φ₋^{÷−1} ÷ φ₊`.
pub fn birkhoff(phi: &Character, scheme: Scheme) -> (Character, Character, Arc<Birkhoff>) {
    let b = Arc::new(Birkhoff { phi: phi.clone(), scheme, memo: Mutex::new(HashMap::new()) });
    (Character::from_rule(Rule::Minus(b.clone())), Character::from_rule(Rule::Plus(b.clone())), b)
}
