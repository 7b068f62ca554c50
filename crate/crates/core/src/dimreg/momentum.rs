//! Momentum spaces of graphs and the adapted coordinates used to integrate
//! out the loops of a covering subgraph.

use super::linalg::{self, Mat};
use super::schwinger::{Numerator, SchwingerIntegrand};
use super::DimregError;
use crate::graph::{EdgeSet, Graph};
use crate::rational::Q;
use crate::theory::Theory;
use num_traits::{One, Zero};

/// Momentum assignments `h ↦ p_h` with `p_h + p_σ(h) = 0` on internal edges
/// and momentum conservation at every vertex.
///
/// Coordinates are the values at the free half-edges of the reduced system.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpace {
    pub halfedges: Vec<String>,
    pub basis: Vec<Vec<Q>>,
    /// Half-edge index read off by each coordinate.
    pub coordinates: Vec<usize>,
}

fn constraints(g: &Graph, support: Option<&[bool]>) -> Mat {
    let n = g.halfedges().len();
    let mut rows = Vec::new();
    for &(a, b) in g.pairs() {
        let mut r = vec![Q::zero(); n];
        r[a] = Q::one();
        r[b] = Q::one();
        rows.push(r);
    }
    for v in 0..g.vertices().len() {
        let mut r = vec![Q::zero(); n];
        for h in g.star(v) {
            r[h] = Q::one();
        }
        rows.push(r);
    }
    if let Some(s) = support {
        for (h, &inside) in s.iter().enumerate() {
            if !inside {
                let mut r = vec![Q::zero(); n];
                r[h] = Q::one();
                rows.push(r);
            }
        }
    }
    rows
}

impl MomentumSpace {
    pub fn of(g: &Graph) -> Self {
        let n = g.halfedges().len();
        let (free, basis) = linalg::nullspace_with_free(&constraints(g, None), n);
        MomentumSpace { halfedges: g.halfedges().iter().map(|h| h.id.clone()).collect(), basis, coordinates: free }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `v` (a vector over the half-edges) in this basis.
    pub fn coords_of(&self, v: &[Q]) -> Vec<Q> {
        self.coordinates.iter().map(|&h| v[h].clone()).collect()
    }
}

/// Integrating `source → target` over the loops of the pairs in between.
///
/// `adapted` has one column per new coordinate, expressed in the source
/// basis: first lifts of the target basis, then the loop directions.
#[derive(Debug, Clone)]
pub struct Fibration {
    pub source: MomentumSpace,
    pub target: MomentumSpace,
    pub adapted: Mat,
    pub external: usize,
    pub loops: usize,
}

impl Fibration {
    /// `Mᵀ B M` for a form `B` in source coordinates.
    pub fn pull_back(&self, b: &Mat) -> Mat {
        linalg::matmul(&linalg::matmul(&linalg::transpose(&self.adapted), b), &self.adapted)
    }

    /// Momentum of source half-edge `h` as a functional on adapted coordinates.
    pub fn functional(&self, h: usize) -> Vec<Q> {
        let n = self.source.dim();
        (0..n).map(|j| (0..n).fold(Q::zero(), |s, i| s + &self.adapted[i][j] * &self.source.basis[i][h])).collect()
    }
}

/// Fibration from `root / from` to `root / to` for covering subgraphs
/// `from ⊆ to` of `root`.
pub fn block_fibration(root: &Graph, from: EdgeSet, to: EdgeSet) -> Result<Fibration, DimregError> {
    if !from.is_subset(to) {
        return Err(DimregError::Invalid("source block does not refine target block".into()));
    }
    let err = |e: crate::graph::GraphError| DimregError::Invalid(e.to_string());
    let source = if from.is_empty() { root.clone() } else { root.contract(from).map_err(err)?.0 };
    let target = root.contract(to).map_err(err)?.0;
    let integrated: Vec<&str> = to
        .minus(from)
        .iter()
        .flat_map(|p| {
            let (a, b) = root.pairs()[p];
            [root.halfedges()[a].id.as_str(), root.halfedges()[b].id.as_str()]
        })
        .collect();
    fibration(&source, &target, &integrated)
}

/// Fibration between a graph and a contraction of it that removed the
/// half-edges `integrated`.
pub fn fibration(source: &Graph, target: &Graph, integrated: &[&str]) -> Result<Fibration, DimregError> {
    let src = MomentumSpace::of(source);
    let tgt = MomentumSpace::of(target);
    let n = src.dim();
    let support: Vec<bool> = source.halfedges().iter().map(|h| integrated.contains(&h.id.as_str())).collect();
    let hn = source.halfedges().len();
    let kernel: Vec<Vec<Q>> = linalg::nullspace(&constraints(source, Some(&support)), hn);
    let index_of = |id: &str| {
        source
            .halfedge_index(id)
            .ok_or_else(|| DimregError::Invalid(format!("half-edge `{id}` of the target is not in the source")))
    };
    let rows: Vec<usize> = target.halfedges().iter().map(|h| index_of(&h.id)).collect::<Result<_, _>>()?;
    // Restriction to the target half-edges, in source coordinates.
    let restrict: Mat = rows.iter().map(|&h| src.basis.iter().map(|b| b[h].clone()).collect()).collect();
    let mut columns: Vec<Vec<Q>> = Vec::with_capacity(n);
    for w in &tgt.basis {
        let c = linalg::particular_solution(&restrict, w)
            .ok_or_else(|| DimregError::Invalid("target momentum does not lift".into()))?;
        columns.push(c);
    }
    for k in &kernel {
        columns.push(src.coords_of(k));
    }
    if columns.len() != n {
        return Err(DimregError::Invalid(format!(
            "adapted basis has {} vectors for a space of dimension {n}",
            columns.len()
        )));
    }
    let adapted: Mat = (0..n).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    if linalg::det(&adapted).is_zero() {
        return Err(DimregError::Invalid("adapted basis is degenerate".into()));
    }
    Ok(Fibration { external: tgt.dim(), loops: kernel.len(), source: src, target: tgt, adapted })
}

/// The Feynman integrand of a graph: one scalar propagator per internal
/// pair, over the adapted coordinates of `Γ → Γ/Γ`.
#[derive(Debug, Clone)]
pub struct AmplitudeFunction {
    pub integrand: SchwingerIntegrand,
    /// Leg half-edge read off by each external coordinate.
    pub external_legs: Vec<String>,
    /// Coupling names, one per vertex.
    pub couplings: Vec<String>,
}

pub fn amplitude(t: &Theory, g: &Graph) -> Result<AmplitudeFunction, DimregError> {
    let fib = block_fibration(g, EdgeSet::EMPTY, g.all_pairs())?;
    let mut forms = Vec::new();
    let mut masses2 = Vec::new();
    for p in 0..g.num_pairs() {
        let ty = g.pair_type(p);
        let et = t.edge_type(ty).ok_or_else(|| DimregError::UnsupportedPropagator(ty.to_string()))?;
        if et.weight != 1 && et.weight != 2 {
            return Err(DimregError::UnsupportedPropagator(ty.to_string()));
        }
        let l = fib.functional(g.pairs()[p].0);
        forms.push(l.iter().map(|a| l.iter().map(|b| a * b).collect()).collect());
        masses2.push(et.mass2.clone());
    }
    let couplings = g
        .vertices()
        .iter()
        .map(|v| {
            let (name, _) = crate::theory::parse_vertex_label(&v.ty);
            t.vertex_type(&name).map(|vt| vt.coupling.clone()).unwrap_or_default()
        })
        .collect();
    let target = g.residue();
    let external_legs = fib.target.coordinates.iter().map(|&h| target.halfedges()[h].id.clone()).collect();
    let integrand = SchwingerIntegrand {
        dim: fib.source.dim(),
        subspace: (0..fib.external).collect(),
        forms,
        masses2,
        numerator: Numerator::one(),
        normalized_measure: false,
    };
    integrand.validate()?;
    Ok(AmplitudeFunction { integrand, external_legs, couplings })
}
