//! Perturbation theories, power counting and specified graphs.
//!
//! Vertex type labels inside graphs have the form `name:index`, where `name`
//! is a vertex type of the theory and `index` one of its allowed
//! specification indices. A bare `name` is read as `name:0`.

use crate::graph::{Components, EdgeSet, Graph, GraphError, GraphJson, DEFAULT_PAIR_CAP, PLACEHOLDER_TYPE};
use crate::rational::{q, qser, Q};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("unknown theory {0}")]
    UnknownTheory(String),
    #[error("unknown edge type {0}")]
    UnknownEdgeType(String),
    #[error("unknown vertex type {0}")]
    UnknownVertexType(String),
    #[error("invalid theory: {0}")]
    InvalidTheory(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("not a specified subgraph: {0}")]
    NotSpecifiedSubgraph(String),
    #[error("full component keeps specification {expected}, got {got}")]
    FullComponentSpecMismatch { expected: u32, got: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeType {
    pub name: String,
    /// Power-counting weight of one propagator.
    pub weight: i64,
    /// Squared mass of the scalarized propagator `1/(p² + m²)`.
    #[serde(with = "qser", default = "one")]
    pub mass2: Q,
}

fn one() -> Q {
    q(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexType {
    pub name: String,
    /// Half-edge types, kept sorted.
    pub legs: Vec<String>,
    pub indices: Vec<u32>,
    #[serde(default)]
    pub coupling: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    pub name: String,
    pub dimension: i64,
    pub edge_types: Vec<EdgeType>,
    pub vertex_types: Vec<VertexType>,
}

/// Splits a vertex label into type name and specification index.
pub fn parse_vertex_label(label: &str) -> (String, u32) {
    match label.rsplit_once(':') {
        Some((n, i)) => match i.parse() {
            Ok(i) => (n.to_string(), i),
            Err(_) => (label.to_string(), 0),
        },
        None => (label.to_string(), 0),
    }
}

pub fn vertex_label(name: &str, index: u32) -> String {
    format!("{name}:{index}")
}

impl Theory {
    pub fn preset(name: &str) -> Result<Theory, TheoryError> {
        let scalar = |n: &str, w: i64| EdgeType { name: n.into(), weight: w, mass2: q(1) };
        let vt = |n: &str, legs: &[&str], idx: &[u32], g: &str| VertexType {
            name: n.into(),
            legs: {
                let mut l: Vec<String> = legs.iter().map(|s| s.to_string()).collect();
                l.sort();
                l
            },
            indices: idx.to_vec(),
            coupling: g.into(),
        };
        let t = match name {
            "phi3" => Theory {
                name: "phi3".into(),
                dimension: 6,
                edge_types: vec![scalar("phi", 2)],
                vertex_types: vec![
                    vt("phi3", &["phi", "phi", "phi"], &[0], "g"),
                    vt("phi2", &["phi", "phi"], &[0, 1], "c"),
                ],
            },
            "phi4" => Theory {
                name: "phi4".into(),
                dimension: 4,
                edge_types: vec![scalar("phi", 2)],
                vertex_types: vec![
                    vt("phi4", &["phi", "phi", "phi", "phi"], &[0], "g"),
                    vt("phi2", &["phi", "phi"], &[0, 1], "c"),
                ],
            },
            "qed" => Theory {
                name: "qed".into(),
                dimension: 4,
                edge_types: vec![scalar("photon", 2), scalar("fermion", 1)],
                vertex_types: vec![
                    vt("eeg", &["fermion", "fermion", "photon"], &[0], "e"),
                    vt("ff", &["fermion", "fermion"], &[0, 1], "c"),
                    vt("gg", &["photon", "photon"], &[1], "c"),
                ],
            },
            other => return Err(TheoryError::UnknownTheory(other.into())),
        };
        Ok(t)
    }

    pub fn from_toml_str(s: &str) -> Result<Theory, TheoryError> {
        let t: Theory = toml::from_str(s).map_err(|e| TheoryError::Parse(e.to_string()))?;
        t.normalized()
    }

    pub fn from_json_str(s: &str) -> Result<Theory, TheoryError> {
        let t: Theory = serde_json::from_str(s).map_err(|e| TheoryError::Parse(e.to_string()))?;
        t.normalized()
    }

    fn normalized(mut self) -> Result<Theory, TheoryError> {
        for v in &mut self.vertex_types {
            v.legs.sort();
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), TheoryError> {
        for v in &self.vertex_types {
            for l in &v.legs {
                if self.edge_type(l).is_none() {
                    return Err(TheoryError::UnknownEdgeType(l.clone()));
                }
            }
            if v.indices.is_empty() {
                return Err(TheoryError::InvalidTheory(format!("vertex type {} has no indices", v.name)));
            }
            if v.name.contains(':') {
                return Err(TheoryError::InvalidTheory(format!("vertex type name {} contains ':'", v.name)));
            }
        }
        Ok(())
    }

    pub fn edge_type(&self, name: &str) -> Option<&EdgeType> {
        self.edge_types.iter().find(|e| e.name == name)
    }

    pub fn weight(&self, name: &str) -> Result<i64, TheoryError> {
        self.edge_type(name).map(|e| e.weight).ok_or_else(|| TheoryError::UnknownEdgeType(name.into()))
    }

    pub fn vertex_type(&self, name: &str) -> Option<&VertexType> {
        self.vertex_types.iter().find(|v| v.name == name)
    }

    /// Vertex type whose sorted leg multiset is `legs`.
    pub fn shape(&self, legs: &[String]) -> Option<&VertexType> {
        self.vertex_types.iter().find(|v| v.legs == legs)
    }

    /// Loop-number and weight bookkeeping: `d·L − Σ weights` over the given
    /// pairs of `g`.
    pub fn degree_of(&self, g: &Graph, loops: i64, pairs: EdgeSet) -> Result<i64, TheoryError> {
        let mut w = 0;
        for p in pairs.iter() {
            w += self.weight(g.pair_type(p))?;
        }
        Ok(self.dimension * loops - w)
    }

    /// Superficial degree of divergence `d·L − Σ weights` of the whole graph.
    pub fn superficial_degree(&self, g: &Graph) -> Result<i64, TheoryError> {
        self.degree_of(g, g.loop_number() as i64, g.all_pairs())
    }

    /// Checks that every vertex carries a declared type, an allowed index and
    /// the right legs.
    pub fn check_vertices(&self, g: &Graph) -> Result<(), TheoryError> {
        for (v, vert) in g.vertices().iter().enumerate() {
            let (name, idx) = parse_vertex_label(&vert.ty);
            let vt = self.vertex_type(&name).ok_or_else(|| TheoryError::UnknownVertexType(vert.ty.clone()))?;
            let mut legs: Vec<String> = g.star(v).iter().map(|&h| g.halfedges()[h].ty.clone()).collect();
            legs.sort();
            if legs != vt.legs {
                return Err(TheoryError::UnknownVertexType(format!(
                    "vertex {} of type {} has legs {:?}",
                    vert.id, vert.ty, legs
                )));
            }
            if !vt.indices.contains(&idx) {
                return Err(TheoryError::InvalidSpec(format!("vertex {} index {} not allowed", vert.id, idx)));
            }
        }
        for h in g.halfedges() {
            if self.edge_type(&h.ty).is_none() {
                return Err(TheoryError::UnknownEdgeType(h.ty.clone()));
            }
        }
        Ok(())
    }

    /// Rewrites bare vertex type names as `name:0`.
    pub fn normalize_labels(&self, g: &Graph) -> Graph {
        let mut out = g.clone();
        for v in 0..g.vertices().len() {
            let ty = &g.vertices()[v].ty;
            if !ty.contains(':') && ty != PLACEHOLDER_TYPE {
                out = out.with_vertex_type(v, &vertex_label(ty, 0));
            }
        }
        out
    }

    /// Allowed specification indices per component: the index list of the
    /// residue shape, or the vertex's own index for single-vertex components.
    pub fn allowed_specifications(&self, g: &Graph) -> Result<Vec<Vec<u32>>, TheoryError> {
        let all = g.all_pairs();
        let comps = g.components(all);
        (0..comps.count)
            .map(|c| {
                let members = comps.members(c);
                if members.len() == 1 && !has_kept_edge(g, all, &comps, c) {
                    return Ok(vec![parse_vertex_label(&g.vertices()[members[0]].ty).1]);
                }
                let shape = g.component_external_types(all, &comps, c);
                self.shape(&shape)
                    .map(|vt| vt.indices.clone())
                    .ok_or_else(|| TheoryError::UnknownVertexType(format!("residue shape {shape:?}")))
            })
            .collect()
    }

    /// Membership of a specified graph in the theory.
    pub fn is_in_theory(&self, sg: &SpecifiedGraph) -> bool {
        self.check_in_theory(sg).is_ok()
    }

    pub fn check_in_theory(&self, sg: &SpecifiedGraph) -> Result<(), TheoryError> {
        let g = &sg.graph;
        self.check_vertices(g)?;
        let all = g.all_pairs();
        let comps = g.components(all);
        if sg.spec.len() != comps.count {
            return Err(TheoryError::InvalidSpec("one index per component required".into()));
        }
        if !g.is_locally_1pi() {
            return Err(TheoryError::InvalidSpec("graph is not locally 1PI".into()));
        }
        let allowed = self.allowed_specifications(g)?;
        for c in 0..comps.count {
            let (loops, pairs) = component_loops(g, all, &comps, c);
            if self.degree_of(g, loops, pairs)? < 0 {
                return Err(TheoryError::InvalidSpec(format!("component {c} is convergent")));
            }
            if !allowed[c].contains(&sg.spec[c]) {
                return Err(TheoryError::InvalidSpec(format!(
                    "component {c} index {} not in {:?}",
                    sg.spec[c], allowed[c]
                )));
            }
        }
        Ok(())
    }
}

fn has_kept_edge(g: &Graph, kept: EdgeSet, comps: &Components, c: usize) -> bool {
    kept.iter().any(|p| comps.of_vertex[g.halfedges()[g.pairs()[p].0].vertex] == c)
}

/// Pairs of `kept` inside component `c`.
pub fn component_pairs(g: &Graph, kept: EdgeSet, comps: &Components, c: usize) -> EdgeSet {
    let mut s = EdgeSet::EMPTY;
    for p in kept.iter() {
        if comps.of_vertex[g.halfedges()[g.pairs()[p].0].vertex] == c {
            s.insert(p);
        }
    }
    s
}

/// Loop number and pair set of component `c` of `kept`.
pub fn component_loops(g: &Graph, kept: EdgeSet, comps: &Components, c: usize) -> (i64, EdgeSet) {
    let pairs = component_pairs(g, kept, comps, c);
    let nv = comps.of_vertex.iter().filter(|&&x| x == c).count() as i64;
    (pairs.len() as i64 - nv + 1, pairs)
}

/// A graph together with one specification index per connected component,
/// in component order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecifiedGraph {
    pub graph: Graph,
    pub spec: Vec<u32>,
}

/// Specified covering subgraph of a root graph: kept pairs plus one index
/// per component that has kept pairs. Components are keyed by their anchor,
/// the smallest half-edge index among their kept half-edges. Single-vertex
/// components carry their vertex's own index implicitly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SpecSub {
    pub kept: EdgeSet,
    pub spec: BTreeMap<usize, u32>,
}

impl SpecSub {
    pub fn empty() -> SpecSub {
        SpecSub::default()
    }
}

/// Anchor of component `c` of `kept`: smallest kept half-edge index.
pub fn anchor(g: &Graph, kept: EdgeSet, comps: &Components, c: usize) -> Option<usize> {
    kept.iter()
        .filter(|&p| comps.of_vertex[g.halfedges()[g.pairs()[p].0].vertex] == c)
        .map(|p| g.pairs()[p].0)
        .min()
}

/// Specification index of component `c` of `sub`.
pub fn spec_of(g: &Graph, sub: &SpecSub, comps: &Components, c: usize) -> u32 {
    match anchor(g, sub.kept, comps, c) {
        Some(a) => *sub.spec.get(&a).unwrap_or(&0),
        None => {
            let v = comps.members(c)[0];
            parse_vertex_label(&g.vertices()[v].ty).1
        }
    }
}

/// Kept half-edge ids mapped to the specification of their component; a
/// graph-independent description used to carry subgraphs across
/// contraction, restriction and union.
pub fn sub_to_ids(g: &Graph, sub: &SpecSub) -> HashMap<String, u32> {
    let comps = g.components(sub.kept);
    let mut out = HashMap::new();
    for p in sub.kept.iter() {
        let (a, b) = g.pairs()[p];
        let c = comps.of_vertex[g.halfedges()[a].vertex];
        let j = spec_of(g, sub, &comps, c);
        out.insert(g.halfedges()[a].id.clone(), j);
        out.insert(g.halfedges()[b].id.clone(), j);
    }
    out
}

/// Inverse of [`sub_to_ids`]: keeps the pairs of `g` whose two half-edge ids
/// are listed.
pub fn sub_from_ids(g: &Graph, ids: &HashMap<String, u32>) -> SpecSub {
    let mut kept = EdgeSet::EMPTY;
    for (p, &(a, b)) in g.pairs().iter().enumerate() {
        if ids.contains_key(&g.halfedges()[a].id) && ids.contains_key(&g.halfedges()[b].id) {
            kept.insert(p);
        }
    }
    let comps = g.components(kept);
    let mut spec = BTreeMap::new();
    for c in 0..comps.count {
        if let Some(a) = anchor(g, kept, &comps, c) {
            spec.insert(a, ids[&g.halfedges()[a].id]);
        }
    }
    SpecSub { kept, spec }
}

impl SpecifiedGraph {
    /// Builds and checks membership in the theory.
    pub fn new(t: &Theory, graph: Graph, spec: Vec<u32>) -> Result<SpecifiedGraph, TheoryError> {
        let sg = SpecifiedGraph { graph: t.normalize_labels(&graph), spec };
        t.check_in_theory(&sg)?;
        Ok(sg)
    }

    /// Reads the graph JSON format with its optional `spec` block, keyed by
    /// any vertex id of each component. Components without an entry take
    /// their first allowed index.
    pub fn from_json_str(t: &Theory, s: &str) -> Result<SpecifiedGraph, TheoryError> {
        let (graph, spec_map) = Graph::from_json_str(s)?;
        let graph = t.normalize_labels(&graph);
        t.check_vertices(&graph)?;
        let comps = graph.components(graph.all_pairs());
        let allowed = t.allowed_specifications(&graph)?;
        let mut spec: Vec<Option<u32>> = vec![None; comps.count];
        for (vid, j) in spec_map.unwrap_or_default() {
            let v = graph
                .vertex_index(&vid)
                .ok_or_else(|| TheoryError::InvalidSpec(format!("unknown vertex {vid} in spec")))?;
            let c = comps.of_vertex[v];
            if spec[c].is_some_and(|x| x != j) {
                return Err(TheoryError::InvalidSpec(format!("conflicting indices for component of {vid}")));
            }
            spec[c] = Some(j);
        }
        let spec = spec.into_iter().enumerate().map(|(c, j)| j.unwrap_or(allowed[c][0])).collect();
        SpecifiedGraph::new(t, graph, spec)
    }

    pub fn to_wire(&self) -> GraphJson {
        let mut w = self.graph.to_wire();
        let comps = self.graph.components(self.graph.all_pairs());
        let mut spec = BTreeMap::new();
        for c in 0..comps.count {
            spec.insert(self.graph.vertices()[comps.members(c)[0]].id.clone(), self.spec[c]);
        }
        w.spec = Some(spec);
        w
    }

    /// The whole graph as a specified covering subgraph of itself.
    pub fn full(&self) -> SpecSub {
        let g = &self.graph;
        let all = g.all_pairs();
        let comps = g.components(all);
        let mut spec = BTreeMap::new();
        for c in 0..comps.count {
            if let Some(a) = anchor(g, all, &comps, c) {
                spec.insert(a, self.spec[c]);
            }
        }
        SpecSub { kept: all, spec }
    }

    /// Loop number of `sub`.
    pub fn loops(&self, sub: &SpecSub) -> usize {
        self.graph.loop_number_of(sub.kept)
    }

    /// Component `c` of the covering subgraph `sub` as a standalone
    /// specified graph.
    pub fn component_of(&self, sub: &SpecSub, comps: &Components, c: usize) -> SpecifiedGraph {
        let g = self.graph.component_graph(sub.kept, comps, c);
        SpecifiedGraph { graph: g, spec: vec![spec_of(&self.graph, sub, comps, c)] }
    }

    /// Connected components of the whole specified graph.
    pub fn split(&self) -> Vec<SpecifiedGraph> {
        let full = self.full();
        let comps = self.graph.components(full.kept);
        (0..comps.count).map(|c| self.component_of(&full, &comps, c)).collect()
    }

    /// Disjoint union; ids of operand `i` gain the prefix `i.`.
    pub fn disjoint_union(parts: &[&SpecifiedGraph]) -> Result<SpecifiedGraph, TheoryError> {
        let graphs: Vec<&Graph> = parts.iter().map(|p| &p.graph).collect();
        let graph = Graph::disjoint_union(&graphs, true)?;
        let spec = parts.iter().flat_map(|p| p.spec.iter().copied()).collect();
        Ok(SpecifiedGraph { graph, spec })
    }

    /// Specified contraction `Γ̄/γ̄`: each component of `sub` with kept pairs
    /// becomes a vertex typed by its residue shape and index; the outer
    /// specification carries over.
    pub fn contract(&self, t: &Theory, sub: &SpecSub) -> Result<SpecifiedGraph, TheoryError> {
        let g = &self.graph;
        let comps = g.components(sub.kept);
        let (mut out, map) = g.contract(sub.kept)?;
        for c in 0..comps.count {
            if anchor(g, sub.kept, &comps, c).is_none() {
                continue;
            }
            let shape = g.component_external_types(sub.kept, &comps, c);
            let vt = t
                .shape(&shape)
                .ok_or_else(|| TheoryError::NotSpecifiedSubgraph(format!("no vertex type with legs {shape:?}")))?;
            let j = spec_of(g, sub, &comps, c);
            if !vt.indices.contains(&j) {
                return Err(TheoryError::InvalidSpec(format!("index {j} not allowed for {}", vt.name)));
            }
            out = out.with_vertex_type(c, &vertex_label(&vt.name, j));
        }
        let root = g.components(g.all_pairs());
        let new_comps = out.components(out.all_pairs());
        let mut spec = vec![0; new_comps.count];
        for (v, &nv) in map.iter().enumerate() {
            spec[new_comps.of_vertex[nv]] = self.spec[root.of_vertex[v]];
        }
        for c in 0..root.count {
            let members = root.members(c);
            let pairs = component_pairs(g, g.all_pairs(), &root, c);
            if !pairs.is_empty() && pairs.is_subset(sub.kept) {
                let j = spec_of(g, sub, &comps, comps.of_vertex[members[0]]);
                if j != self.spec[c] {
                    return Err(TheoryError::FullComponentSpecMismatch { expected: self.spec[c], got: j });
                }
            }
        }
        Ok(SpecifiedGraph { graph: out, spec })
    }

    /// Carries `outer ⊇ sub` over to the contraction `self/sub`.
    pub fn translate(&self, contracted: &SpecifiedGraph, sub: &SpecSub, outer: &SpecSub) -> SpecSub {
        let g = &self.graph;
        let mut ids = sub_to_ids(g, outer);
        for p in sub.kept.iter() {
            let (a, b) = g.pairs()[p];
            ids.remove(&g.halfedges()[a].id);
            ids.remove(&g.halfedges()[b].id);
        }
        sub_from_ids(&contracted.graph, &ids)
    }

    /// All specified covering subgraphs `ε̄` with `base ⊆ ε ⊆ sub` such that
    /// `ε̄/base` is a locally 1PI specified subgraph of `sub/base` with
    /// divergent components of known residue shape, and `sub/ε̄` lies in the
    /// theory. Components of `ε` equal to components of `sub` inherit their
    /// index. Order: increasing kept bitmask, then indices lexicographically.
    pub fn specified_subgraphs(
        &self,
        t: &Theory,
        base: &SpecSub,
        sub: &SpecSub,
    ) -> Result<Vec<SpecSub>, TheoryError> {
        let g = &self.graph;
        let n = g.num_pairs();
        if n > DEFAULT_PAIR_CAP {
            return Err(GraphError::SizeLimit { pairs: n, cap: DEFAULT_PAIR_CAP }.into());
        }
        if !base.kept.is_subset(sub.kept) {
            return Err(TheoryError::NotSpecifiedSubgraph("base is not inside sub".into()));
        }
        let free = sub.kept.minus(base.kept);
        let base_comps = g.components(base.kept);
        let sub_comps = g.components(sub.kept);
        let mut sub_degree = vec![0i64; sub_comps.count];
        for s in 0..sub_comps.count {
            let (l, p) = component_loops(g, sub.kept, &sub_comps, s);
            sub_degree[s] = t.degree_of(g, l, p)?;
        }
        let mut out = Vec::new();
        'subsets: for extra in free.subsets() {
            let kept = base.kept.union(extra);
            let comps = g.components(kept);
            for p in extra.iter() {
                let mut k = kept;
                k.remove(p);
                if g.components(k).count > comps.count {
                    continue 'subsets;
                }
            }
            let mut options: Vec<(usize, Vec<u32>)> = Vec::new();
            let mut eps_degree = vec![0i64; sub_comps.count];
            for c in 0..comps.count {
                let Some(a) = anchor(g, kept, &comps, c) else { continue };
                let (l, pairs) = component_loops(g, kept, &comps, c);
                let deg = t.degree_of(g, l, pairs)?;
                let v0 = comps.members(c)[0];
                eps_degree[sub_comps.of_vertex[v0]] += deg;
                let new_pairs = pairs.intersect(extra);
                if new_pairs.is_empty() {
                    let bc = base_comps.of_vertex[v0];
                    options.push((a, vec![spec_of(g, base, &base_comps, bc)]));
                    continue;
                }
                let mut base_deg = 0;
                for bc in 0..base_comps.count {
                    let bv = base_comps.members(bc)[0];
                    if comps.of_vertex[bv] == c {
                        let (bl, bp) = component_loops(g, base.kept, &base_comps, bc);
                        base_deg += t.degree_of(g, bl, bp)?;
                    }
                }
                if deg - base_deg < 0 {
                    continue 'subsets;
                }
                let shape = g.component_external_types(kept, &comps, c);
                let Some(vt) = t.shape(&shape) else { continue 'subsets };
                let sc = sub_comps.of_vertex[v0];
                let same_vertices = (0..g.vertices().len())
                    .all(|v| (comps.of_vertex[v] == c) == (sub_comps.of_vertex[v] == sc));
                let full = same_vertices && component_pairs(g, sub.kept, &sub_comps, sc) == pairs;
                if full {
                    let j = spec_of(g, sub, &sub_comps, sc);
                    if !vt.indices.contains(&j) {
                        continue 'subsets;
                    }
                    options.push((a, vec![j]));
                } else {
                    options.push((a, vt.indices.clone()));
                }
            }
            for s in 0..sub_comps.count {
                if sub_degree[s] - eps_degree[s] < 0 {
                    continue 'subsets;
                }
            }
            let mut choices: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new()];
            for (a, opts) in &options {
                let mut next = Vec::with_capacity(choices.len() * opts.len());
                for ch in &choices {
                    for &j in opts {
                        let mut m = ch.clone();
                        m.insert(*a, j);
                        next.push(m);
                    }
                }
                choices = next;
            }
            for spec in choices {
                out.push(SpecSub { kept, spec });
            }
        }
        Ok(out)
    }

    /// Specified covering subgraphs of `Γ̄` entering the coproduct.
    pub fn coproduct_subgraphs(&self, t: &Theory) -> Result<Vec<SpecSub>, TheoryError> {
        self.specified_subgraphs(t, &SpecSub::empty(), &self.full())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUBBLE: &str = r#"{"vertices":[{"id":"a","type":"phi3"},{"id":"b","type":"phi3"}],
      "halfedges":[{"id":"x1","vertex":"a","type":"phi"},{"id":"a1","vertex":"a","type":"phi"},
                   {"id":"a2","vertex":"a","type":"phi"},{"id":"b1","vertex":"b","type":"phi"},
                   {"id":"b2","vertex":"b","type":"phi"},{"id":"x2","vertex":"b","type":"phi"}],
      "sigma":[["a1","b1"],["a2","b2"]]}"#;

    #[test]
    fn presets() {
        assert_eq!(Theory::preset("phi3").unwrap().dimension, 6);
        assert_eq!(Theory::preset("phi4").unwrap().vertex_type("phi4").unwrap().legs.len(), 4);
        let qed = Theory::preset("qed").unwrap();
        let names: Vec<&str> = qed.edge_types.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, vec!["photon", "fermion"]);
        assert!(matches!(Theory::preset("qcd"), Err(TheoryError::UnknownTheory(_))));
    }

    #[test]
    fn bubble_degree_and_specs() {
        let t = Theory::preset("phi3").unwrap();
        let sg = SpecifiedGraph::from_json_str(&t, BUBBLE).unwrap();
        assert_eq!(t.superficial_degree(&sg.graph).unwrap(), 2);
        assert_eq!(t.allowed_specifications(&sg.graph).unwrap(), vec![vec![0, 1]]);
        let subs = sg.coproduct_subgraphs(&t).unwrap();
        assert_eq!(subs.len(), 2);
        assert!(subs[0].kept.is_empty());
        assert_eq!(subs[1].kept, sg.graph.all_pairs());
    }

    #[test]
    fn toml_roundtrip() {
        let t = Theory::preset("qed").unwrap();
        let s = toml::to_string(&t).unwrap();
        assert_eq!(Theory::from_toml_str(&s).unwrap(), t);
    }

    #[test]
    fn contract_full_gives_residue() {
        let t = Theory::preset("phi3").unwrap();
        let sg = SpecifiedGraph::from_json_str(&t, BUBBLE).unwrap();
        let r = sg.contract(&t, &sg.full()).unwrap();
        assert_eq!(r.graph.vertices().len(), 1);
        assert_eq!(r.graph.vertices()[0].ty, "phi2:0");
        assert!(t.is_in_theory(&r));
    }
}
