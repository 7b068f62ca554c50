//! Half-edge Feynman graphs.
//!
//! A graph is a set of typed vertices, a set of typed half-edges, an
//! incidence map from half-edges to vertices and an involution on half-edges.
//! Fixed points of the involution are external legs; 2-cycles are internal
//! edges. Internal edges are numbered by their position in
//! [`Graph::pairs`], and subsets of them are [`EdgeSet`] bitmasks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

/// Default cap on internal pairs for exhaustive subgraph enumeration.
pub const DEFAULT_PAIR_CAP: usize = 20;

/// Type label given to vertices created by contraction until a theory
/// resolves them.
pub const PLACEHOLDER_TYPE: &str = "?";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("involution error: {0}")]
    Involution(String),
    #[error("type mismatch: half-edges {0} and {1} are paired but have different types")]
    TypeMismatch(String, String),
    #[error("dangling half-edge: {0}")]
    DanglingHalfEdge(String),
    #[error("size limit: {pairs} internal pairs exceed the cap of {cap}")]
    SizeLimit { pairs: usize, cap: usize },
    #[error("not a subgraph: {0}")]
    NotASubgraph(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub id: String,
    pub vertex: usize,
    pub ty: String,
}

/// Subset of the internal pairs of a graph, as a bitmask over pair indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EdgeSet(pub u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    pub fn full(n: usize) -> EdgeSet {
        if n >= 64 {
            EdgeSet(u64::MAX)
        } else {
            EdgeSet((1u64 << n) - 1)
        }
    }
    pub fn single(i: usize) -> EdgeSet {
        EdgeSet(1u64 << i)
    }
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }
    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }
    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn union(self, o: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 | o.0)
    }
    pub fn intersect(self, o: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & o.0)
    }
    pub fn minus(self, o: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & !o.0)
    }
    pub fn is_subset(self, o: EdgeSet) -> bool {
        self.0 & !o.0 == 0
    }
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
    /// All subsets of `self`, in increasing bitmask order.
    pub fn subsets(self) -> Vec<EdgeSet> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut s = 0u64;
        loop {
            out.push(EdgeSet(s));
            if s == self.0 {
                break;
            }
            s = (s.wrapping_sub(self.0)) & self.0;
        }
        out
    }
}

/// Connected components of a covering subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component index of every vertex; components are numbered by their
    /// smallest vertex index.
    pub of_vertex: Vec<usize>,
    pub count: usize,
}

impl Components {
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.of_vertex.len()).filter(|&v| self.of_vertex[v] == c).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<Vertex>,
    halfedges: Vec<HalfEdge>,
    sigma: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pair_of: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HalfEdgeJson {
    id: String,
    vertex: String,
    #[serde(rename = "type")]
    ty: String,
}

/// Wire format of a graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<Vertex>,
    halfedges: Vec<HalfEdgeJson>,
    pub sigma: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<BTreeMap<String, u32>>,
}

impl Graph {
    /// Builds and validates a graph from an explicit involution.
    pub fn new(
        vertices: Vec<Vertex>,
        halfedges: Vec<HalfEdge>,
        sigma: Vec<usize>,
    ) -> Result<Graph, GraphError> {
        let g = Graph::raw(vertices, halfedges, sigma);
        g.validate()?;
        Ok(g)
    }

    fn raw(vertices: Vec<Vertex>, halfedges: Vec<HalfEdge>, sigma: Vec<usize>) -> Graph {
        let mut pairs = Vec::new();
        let mut pair_of = vec![None; halfedges.len()];
        for (e, &s) in sigma.iter().enumerate() {
            if s > e && s < sigma.len() && sigma[s] == e {
                pair_of[e] = Some(pairs.len());
                pair_of[s] = Some(pairs.len());
                pairs.push((e, s));
            }
        }
        Graph { vertices, halfedges, sigma, pairs, pair_of }
    }

    /// Checks the structural invariants: total incidence, involutive and
    /// type-preserving `sigma`.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.sigma.len() != self.halfedges.len() {
            return Err(GraphError::DanglingHalfEdge(
                "involution is not defined on every half-edge".into(),
            ));
        }
        for h in &self.halfedges {
            if h.vertex >= self.vertices.len() {
                return Err(GraphError::DanglingHalfEdge(h.id.clone()));
            }
        }
        for (e, &s) in self.sigma.iter().enumerate() {
            if s >= self.sigma.len() || self.sigma[s] != e {
                return Err(GraphError::Involution(format!(
                    "sigma(sigma({})) != {}",
                    self.halfedges[e].id, self.halfedges[e].id
                )));
            }
            if self.halfedges[e].ty != self.halfedges[s].ty {
                return Err(GraphError::TypeMismatch(
                    self.halfedges[e].id.clone(),
                    self.halfedges[s].id.clone(),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<(Graph, Option<BTreeMap<String, u32>>), GraphError> {
        let j: GraphJson = serde_json::from_str(s).map_err(|e| GraphError::Parse(e.to_string()))?;
        let spec = j.spec.clone();
        Ok((Graph::from_wire(&j)?, spec))
    }

    pub fn from_wire(j: &GraphJson) -> Result<Graph, GraphError> {
        let mut vidx = HashMap::new();
        for (i, v) in j.vertices.iter().enumerate() {
            if vidx.insert(v.id.clone(), i).is_some() {
                return Err(GraphError::Parse(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut hidx = HashMap::new();
        let mut halfedges = Vec::new();
        for (i, h) in j.halfedges.iter().enumerate() {
            if hidx.insert(h.id.clone(), i).is_some() {
                return Err(GraphError::Parse(format!("duplicate half-edge id {}", h.id)));
            }
            let v = *vidx
                .get(&h.vertex)
                .ok_or_else(|| GraphError::DanglingHalfEdge(h.id.clone()))?;
            halfedges.push(HalfEdge { id: h.id.clone(), vertex: v, ty: h.ty.clone() });
        }
        let mut sigma: Vec<usize> = (0..halfedges.len()).collect();
        let mut seen = HashSet::new();
        for [a, b] in &j.sigma {
            let ia = *hidx.get(a).ok_or_else(|| GraphError::DanglingHalfEdge(a.clone()))?;
            let ib = *hidx.get(b).ok_or_else(|| GraphError::DanglingHalfEdge(b.clone()))?;
            if ia == ib {
                return Err(GraphError::Involution(format!("{a} is paired with itself")));
            }
            if !seen.insert(ia) || !seen.insert(ib) {
                return Err(GraphError::Involution(format!(
                    "half-edge listed in more than one pair ({a}, {b})"
                )));
            }
            sigma[ia] = ib;
            sigma[ib] = ia;
        }
        Graph::new(j.vertices.clone(), halfedges, sigma)
    }

    pub fn to_wire(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices.clone(),
            halfedges: self
                .halfedges
                .iter()
                .map(|h| HalfEdgeJson {
                    id: h.id.clone(),
                    vertex: self.vertices[h.vertex].id.clone(),
                    ty: h.ty.clone(),
                })
                .collect(),
            sigma: self
                .pairs
                .iter()
                .map(|&(a, b)| [self.halfedges[a].id.clone(), self.halfedges[b].id.clone()])
                .collect(),
            spec: None,
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    pub fn halfedges(&self) -> &[HalfEdge] {
        &self.halfedges
    }
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }
    /// Internal edges as `(a, b)` half-edge index pairs with `a < b`,
    /// ordered by `a`.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
    pub fn pair_of(&self, h: usize) -> Option<usize> {
        self.pair_of[h]
    }
    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }
    pub fn all_pairs(&self) -> EdgeSet {
        EdgeSet::full(self.pairs.len())
    }
    pub fn pair_type(&self, p: usize) -> &str {
        &self.halfedges[self.pairs[p].0].ty
    }
    pub fn halfedge_index(&self, id: &str) -> Option<usize> {
        self.halfedges.iter().position(|h| h.id == id)
    }
    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }
    /// Half-edges attached to vertex `v`.
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.halfedges.len()).filter(|&h| self.halfedges[h].vertex == v).collect()
    }

    /// Components of the covering subgraph that keeps `kept`.
    pub fn components(&self, kept: EdgeSet) -> Components {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for i in kept.iter() {
            let (a, b) = self.pairs[i];
            let ra = find(&mut parent, self.halfedges[a].vertex);
            let rb = find(&mut parent, self.halfedges[b].vertex);
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi] = lo;
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut of_vertex = vec![0; n];
        let mut count = 0;
        for v in 0..n {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            of_vertex[v] = label[r];
        }
        Components { of_vertex, count }
    }

    pub fn num_components(&self) -> usize {
        self.components(self.all_pairs()).count
    }

    pub fn is_connected(&self) -> bool {
        self.num_components() == 1
    }

    /// Loop number `|I| - |V| + |components|` of the whole graph.
    pub fn loop_number(&self) -> usize {
        self.loop_number_of(self.all_pairs())
    }

    /// Loop number of the covering subgraph that keeps `kept`.
    pub fn loop_number_of(&self, kept: EdgeSet) -> usize {
        let c = self.components(kept).count;
        kept.len() + c - self.vertices.len()
    }

    /// Pairs of `kept` whose removal disconnects their component.
    pub fn bridges_of(&self, kept: EdgeSet) -> Vec<usize> {
        let base = self.components(kept).count;
        kept.iter()
            .filter(|&p| {
                let mut k = kept;
                k.remove(p);
                self.components(k).count > base
            })
            .collect()
    }

    /// Connected with no internal bridge.
    pub fn is_1pi(&self) -> bool {
        self.is_connected() && self.bridges_of(self.all_pairs()).is_empty()
    }

    /// Every component is 1PI.
    pub fn is_locally_1pi(&self) -> bool {
        self.bridges_of(self.all_pairs()).is_empty()
    }

    /// Whether the covering subgraph keeping `kept` is locally 1PI.
    pub fn is_locally_1pi_of(&self, kept: EdgeSet) -> bool {
        self.bridges_of(kept).is_empty()
    }

    fn check_subset(&self, kept: EdgeSet) -> Result<(), GraphError> {
        if !kept.is_subset(self.all_pairs()) {
            return Err(GraphError::NotASubgraph(format!(
                "edge set {:#x} exceeds the {} internal pairs",
                kept.0,
                self.pairs.len()
            )));
        }
        Ok(())
    }

    /// The covering subgraph keeping `kept`, as a graph on the same vertices
    /// and half-edges.
    pub fn realize(&self, kept: EdgeSet) -> Result<Graph, GraphError> {
        self.check_subset(kept)?;
        let mut sigma: Vec<usize> = (0..self.halfedges.len()).collect();
        for p in kept.iter() {
            let (a, b) = self.pairs[p];
            sigma[a] = b;
            sigma[b] = a;
        }
        Ok(Graph::raw(self.vertices.clone(), self.halfedges.clone(), sigma))
    }

    /// Enumerates covering subgraphs passing `filter`, in increasing bitmask
    /// order.
    pub fn covering_subgraphs(
        &self,
        filter: impl Fn(&Graph, EdgeSet) -> bool,
        cap: usize,
    ) -> Result<Vec<EdgeSet>, GraphError> {
        let n = self.pairs.len();
        if n > cap || n >= 64 {
            return Err(GraphError::SizeLimit { pairs: n, cap });
        }
        Ok((0..(1u64 << n)).map(EdgeSet).filter(|&s| filter(self, s)).collect())
    }

    /// Shrinks every component of the covering subgraph `kept` to a vertex.
    ///
    /// Components without kept edges keep their vertex unchanged; the others
    /// become a vertex typed [`PLACEHOLDER_TYPE`]. Surviving half-edges keep
    /// their ids and relative order. Returns the contracted graph and the
    /// image of every old vertex.
    pub fn contract(&self, kept: EdgeSet) -> Result<(Graph, Vec<usize>), GraphError> {
        self.check_subset(kept)?;
        let comps = self.components(kept);
        let mut has_edge = vec![false; comps.count];
        for p in kept.iter() {
            has_edge[comps.of_vertex[self.halfedges[self.pairs[p].0].vertex]] = true;
        }
        let mut taken: HashSet<String> = HashSet::new();
        let mut new_vertices = Vec::with_capacity(comps.count);
        for c in 0..comps.count {
            let members = comps.members(c);
            if !has_edge[c] {
                let v = self.vertices[members[0]].clone();
                taken.insert(v.id.clone());
                new_vertices.push(v);
            } else {
                new_vertices.push(Vertex {
                    id: members.iter().map(|&m| self.vertices[m].id.as_str()).collect::<Vec<_>>().join("+"),
                    ty: PLACEHOLDER_TYPE.to_string(),
                });
            }
        }
        for c in 0..comps.count {
            if has_edge[c] {
                while taken.contains(&new_vertices[c].id) {
                    new_vertices[c].id.push('\'');
                }
                taken.insert(new_vertices[c].id.clone());
            }
        }
        let mut keep_h = Vec::new();
        let mut new_index = vec![usize::MAX; self.halfedges.len()];
        for (h, he) in self.halfedges.iter().enumerate() {
            let internal_to_kept = self.pair_of[h].map(|p| kept.contains(p)).unwrap_or(false);
            if !internal_to_kept {
                new_index[h] = keep_h.len();
                keep_h.push(HalfEdge {
                    id: he.id.clone(),
                    vertex: comps.of_vertex[he.vertex],
                    ty: he.ty.clone(),
                });
            }
        }
        let mut sigma: Vec<usize> = (0..keep_h.len()).collect();
        for (h, &ni) in new_index.iter().enumerate() {
            if ni != usize::MAX {
                sigma[ni] = new_index[self.sigma[h]];
            }
        }
        Ok((Graph::raw(new_vertices, keep_h, sigma), comps.of_vertex))
    }

    /// `Γ/Γ`: one vertex per component carrying the external legs.
    pub fn residue(&self) -> Graph {
        self.contract(self.all_pairs()).expect("full set is a subgraph").0
    }

    /// All internal edges cut.
    pub fn skeleton(&self) -> Graph {
        self.realize(EdgeSet::EMPTY).expect("empty set is a subgraph")
    }

    /// The component `c` of the covering subgraph `kept` as a standalone
    /// graph: its vertices, every half-edge attached to them, and the kept
    /// pairs between them.
    pub fn component_graph(&self, kept: EdgeSet, comps: &Components, c: usize) -> Graph {
        let members = comps.members(c);
        let mut vmap = HashMap::new();
        let vertices: Vec<Vertex> = members
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                vmap.insert(v, i);
                self.vertices[v].clone()
            })
            .collect();
        let mut hmap = HashMap::new();
        let mut halfedges = Vec::new();
        for (h, he) in self.halfedges.iter().enumerate() {
            if let Some(&nv) = vmap.get(&he.vertex) {
                hmap.insert(h, halfedges.len());
                halfedges.push(HalfEdge { id: he.id.clone(), vertex: nv, ty: he.ty.clone() });
            }
        }
        let mut sigma: Vec<usize> = (0..halfedges.len()).collect();
        for p in kept.iter() {
            let (a, b) = self.pairs[p];
            if let (Some(&na), Some(&nb)) = (hmap.get(&a), hmap.get(&b)) {
                sigma[na] = nb;
                sigma[nb] = na;
            }
        }
        Graph::raw(vertices, halfedges, sigma)
    }

    /// Splits the graph into its connected components.
    pub fn split_components(&self) -> Vec<Graph> {
        let all = self.all_pairs();
        let comps = self.components(all);
        (0..comps.count).map(|c| self.component_graph(all, &comps, c)).collect()
    }

    /// Disjoint union; ids of the `i`-th operand are prefixed with `i.`
    /// when `prefix` is set.
    pub fn disjoint_union(parts: &[&Graph], prefix: bool) -> Result<Graph, GraphError> {
        let mut vertices = Vec::new();
        let mut halfedges = Vec::new();
        let mut sigma = Vec::new();
        for (i, g) in parts.iter().enumerate() {
            let voff = vertices.len();
            let hoff = halfedges.len();
            let name = |s: &str| if prefix { format!("{i}.{s}") } else { s.to_string() };
            for v in &g.vertices {
                vertices.push(Vertex { id: name(&v.id), ty: v.ty.clone() });
            }
            for h in &g.halfedges {
                halfedges.push(HalfEdge { id: name(&h.id), vertex: h.vertex + voff, ty: h.ty.clone() });
            }
            for &s in &g.sigma {
                sigma.push(s + hoff);
            }
        }
        let ids: HashSet<&String> = vertices.iter().map(|v| &v.id).collect();
        let hids: HashSet<&String> = halfedges.iter().map(|h| &h.id).collect();
        if ids.len() != vertices.len() || hids.len() != halfedges.len() {
            return Err(GraphError::Parse("duplicate ids in disjoint union".into()));
        }
        Graph::new(vertices, halfedges, sigma)
    }

    /// Same structure with vertex `v` retyped.
    pub fn with_vertex_type(&self, v: usize, ty: &str) -> Graph {
        let mut g = self.clone();
        g.vertices[v].ty = ty.to_string();
        g
    }

    /// External half-edge types attached to the vertices of component `c`
    /// of `kept`, sorted.
    pub fn component_external_types(&self, kept: EdgeSet, comps: &Components, c: usize) -> Vec<String> {
        let mut out: Vec<String> = self
            .halfedges
            .iter()
            .enumerate()
            .filter(|(h, he)| {
                comps.of_vertex[he.vertex] == c
                    && !self.pair_of[*h].map(|p| kept.contains(p)).unwrap_or(false)
            })
            .map(|(_, he)| he.ty.clone())
            .collect();
        out.sort();
        out
    }

    /// Same graph with every vertex and half-edge relabelled through the
    /// given permutations (`vperm[old] = new`, `hperm[old] = new`).
    pub fn permuted(&self, vperm: &[usize], hperm: &[usize]) -> Graph {
        let mut vertices = vec![Vertex { id: String::new(), ty: String::new() }; self.vertices.len()];
        for (old, v) in self.vertices.iter().enumerate() {
            vertices[vperm[old]] = v.clone();
        }
        let mut halfedges =
            vec![HalfEdge { id: String::new(), vertex: 0, ty: String::new() }; self.halfedges.len()];
        let mut sigma = vec![0; self.halfedges.len()];
        for (old, h) in self.halfedges.iter().enumerate() {
            halfedges[hperm[old]] = HalfEdge { id: h.id.clone(), vertex: vperm[h.vertex], ty: h.ty.clone() };
            sigma[hperm[old]] = hperm[self.sigma[old]];
        }
        Graph::raw(vertices, halfedges, sigma)
    }

    /// Canonical key of the typed graph.
    pub fn canonical_key(&self) -> CanonicalKey {
        CanonicalKey(canonical_encoding(&self.colored(), None))
    }

    /// Coloured view: vertex types, internal edges, external legs.
    pub fn colored(&self) -> ColoredGraph {
        ColoredGraph {
            vertex_colors: self.vertices.iter().map(|v| v.ty.clone()).collect(),
            edges: self
                .pairs
                .iter()
                .map(|&(a, b)| {
                    (self.halfedges[a].vertex, self.halfedges[b].vertex, self.halfedges[a].ty.clone())
                })
                .collect(),
            legs: self
                .halfedges
                .iter()
                .enumerate()
                .filter(|(h, _)| self.sigma[*h] == *h)
                .map(|(_, he)| (he.vertex, he.ty.clone()))
                .collect(),
        }
    }

    /// DOT rendering: vertices as nodes, internal edges as edges, external
    /// legs as point nodes.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{}\" {{\n", name.replace('"', "'"));
        for v in &self.vertices {
            s.push_str(&format!("  \"{}\" [label=\"{}\\n{}\"];\n", v.id, v.id, v.ty));
        }
        for &(a, b) in &self.pairs {
            let (ha, hb) = (&self.halfedges[a], &self.halfedges[b]);
            s.push_str(&format!(
                "  \"{}\" -- \"{}\" [label=\"{}\", taillabel=\"{}\", headlabel=\"{}\"];\n",
                self.vertices[ha.vertex].id, self.vertices[hb.vertex].id, ha.ty, ha.id, hb.id
            ));
        }
        for (h, he) in self.halfedges.iter().enumerate() {
            if self.sigma[h] == h {
                s.push_str(&format!("  \"ext:{}\" [shape=point];\n", he.id));
                s.push_str(&format!(
                    "  \"{}\" -- \"ext:{}\" [label=\"{}\"];\n",
                    self.vertices[he.vertex].id, he.id, he.ty
                ));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Isomorphism-invariant encoding of a typed half-edge graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey(pub String);

impl CanonicalKey {
    /// Short stable digest used in listings.
    pub fn short(&self) -> String {
        let d = Sha256::digest(self.0.as_bytes());
        d.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

/// Graph with string colours on vertices, internal edges and legs.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    pub vertex_colors: Vec<String>,
    pub edges: Vec<(usize, usize, String)>,
    pub legs: Vec<(usize, String)>,
}

type Encoding = (Vec<(String, Vec<String>)>, Vec<(usize, usize, String)>);

fn encode(g: &ColoredGraph, pos: &[usize]) -> Encoding {
    let n = g.vertex_colors.len();
    let mut order = vec![0; n];
    for v in 0..n {
        order[pos[v]] = v;
    }
    let verts = order
        .iter()
        .map(|&v| {
            let mut legs: Vec<String> =
                g.legs.iter().filter(|(u, _)| *u == v).map(|(_, c)| c.clone()).collect();
            legs.sort();
            (g.vertex_colors[v].clone(), legs)
        })
        .collect();
    let mut edges: Vec<(usize, usize, String)> = g
        .edges
        .iter()
        .map(|(a, b, c)| {
            let (x, y) = (pos[*a], pos[*b]);
            (x.min(y), x.max(y), c.clone())
        })
        .collect();
    edges.sort();
    (verts, edges)
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).unwrap()).collect()
}

fn refine(g: &ColoredGraph, adj: &[Vec<(usize, usize)>], colors: Vec<usize>) -> Vec<usize> {
    let mut colors = colors;
    let mut classes = colors.iter().collect::<HashSet<_>>().len();
    loop {
        let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..colors.len())
            .map(|v| {
                let mut nb: Vec<(usize, usize)> = adj[v].iter().map(|&(u, ec)| (ec, colors[u])).collect();
                nb.sort();
                (colors[v], nb)
            })
            .collect();
        let next = rank(&sigs);
        let nc = next.iter().collect::<HashSet<_>>().len();
        colors = next;
        if nc == classes {
            let _ = g;
            return colors;
        }
        classes = nc;
    }
}

fn search(
    g: &ColoredGraph,
    adj: &[Vec<(usize, usize)>],
    colors: Vec<usize>,
    best: &mut Option<(Encoding, Vec<usize>)>,
) {
    let colors = refine(g, adj, colors);
    let n = colors.len();
    let mut count = vec![0usize; n];
    for &c in &colors {
        count[c] += 1;
    }
    let target = (0..n).find(|&c| count[c] > 1);
    match target {
        None => {
            let enc = encode(g, &colors);
            if best.as_ref().map(|(b, _)| enc < *b).unwrap_or(true) {
                *best = Some((enc, colors));
            }
        }
        Some(cell) => {
            for v in 0..n {
                if colors[v] != cell {
                    continue;
                }
                let split: Vec<(usize, usize)> =
                    (0..n).map(|u| (colors[u], if u == v || colors[u] != cell { 0 } else { 1 })).collect();
                search(g, adj, rank(&split), best);
            }
        }
    }
}

/// Canonical labelling by colour refinement and exhaustive individualisation.
/// Returns the minimal encoding, serialised; `order_out` receives the
/// canonical position of every vertex.
pub fn canonical_encoding(g: &ColoredGraph, order_out: Option<&mut Vec<usize>>) -> String {
    let n = g.vertex_colors.len();
    let edge_colors = rank(&g.edges.iter().map(|e| e.2.clone()).collect::<Vec<_>>());
    let mut adj = vec![Vec::new(); n];
    for (i, (a, b, _)) in g.edges.iter().enumerate() {
        adj[*a].push((*b, edge_colors[i]));
        adj[*b].push((*a, edge_colors[i]));
    }
    let initial: Vec<(String, Vec<String>, usize)> = (0..n)
        .map(|v| {
            let mut legs: Vec<String> =
                g.legs.iter().filter(|(u, _)| *u == v).map(|(_, c)| c.clone()).collect();
            legs.sort();
            (g.vertex_colors[v].clone(), legs, adj[v].len())
        })
        .collect();
    let mut best = None;
    if n == 0 {
        best = Some(((Vec::new(), Vec::new()), Vec::new()));
    } else {
        search(g, &adj, rank(&initial), &mut best);
    }
    let (enc, pos) = best.expect("search visits at least one leaf");
    if let Some(out) = order_out {
        *out = pos;
    }
    serde_json::to_string(&enc).expect("encoding serialises")
}
