//! Finite multigraphs with per-vertex admissible degree sets.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{binomial, CountPolynomial};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub u: usize,
    pub v: usize,
}

/// Undirected multigraph without loops. Every vertex has degree at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_ids: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl Graph {
    /// Builds a graph from external ids; each edge is `(edge id, endpoint, endpoint)`.
    pub fn new(vertex_ids: Vec<String>, edges: Vec<(String, String, String)>) -> Result<Self> {
        let mut vertex_index = HashMap::new();
        for (i, id) in vertex_ids.iter().enumerate() {
            if vertex_index.insert(id.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate vertex id `{id}`")));
            }
        }
        let mut incident = vec![Vec::new(); vertex_ids.len()];
        let mut edge_index = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        for (k, (id, a, b)) in edges.into_iter().enumerate() {
            let lookup = |x: &str| {
                vertex_index
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::Input(format!("edge `{id}` references unknown vertex `{x}`")))
            };
            let (u, v) = (lookup(&a)?, lookup(&b)?);
            if u == v {
                return Err(Error::Input(format!("edge `{id}` is a loop at `{a}`")));
            }
            if edge_index.insert(id.clone(), k).is_some() {
                return Err(Error::Input(format!("duplicate edge id `{id}`")));
            }
            incident[u].push(k);
            incident[v].push(k);
            out.push(Edge { id, u, v });
        }
        if let Some(i) = incident.iter().position(|inc| inc.is_empty()) {
            return Err(Error::Input(format!("vertex `{}` has degree 0", vertex_ids[i])));
        }
        Ok(Self { vertex_ids, edges: out, incident, vertex_index, edge_index })
    }

    /// Vertices `v0..v{n-1}` and edges `e0..` from index pairs.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::with_capacity(pairs.len());
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::Input(format!("edge {k} endpoint out of range")));
            }
            edges.push((format!("e{k}"), ids[a].clone(), ids[b].clone()));
        }
        Self::new(ids, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Edge indices incident on `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// A proper 2-colouring (`false` = side 1), if one exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let n = self.vertex_count();
        let mut colour: Vec<Option<bool>> = vec![None; n];
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(false);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                let cx = colour[x].unwrap();
                for &e in &self.incident[x] {
                    let y = self.other_end(e, x);
                    match colour[y] {
                        None => {
                            colour[y] = Some(!cx);
                            stack.push(y);
                        }
                        Some(cy) if cy == cx => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(colour.into_iter().map(Option::unwrap).collect())
    }

    pub fn other_end(&self, e: usize, x: usize) -> usize {
        let edge = &self.edges[e];
        if edge.u == x {
            edge.v
        } else {
            edge.u
        }
    }
}

/// Per-vertex admissible degree sets, normalized against the graph's degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintProfile {
    sets: Vec<Vec<u32>>,
}

impl ConstraintProfile {
    /// Drops elements above `d_v`; rejects sets that end up empty.
    pub fn new(g: &Graph, sets: Vec<Vec<u32>>) -> Result<Self> {
        if sets.len() != g.vertex_count() {
            return Err(Error::Input(format!(
                "constraint profile covers {} vertices, graph has {}",
                sets.len(),
                g.vertex_count()
            )));
        }
        let mut out = Vec::with_capacity(sets.len());
        for (v, s) in sets.into_iter().enumerate() {
            let d = g.degree(v) as u32;
            let norm: BTreeSet<u32> = s.into_iter().filter(|&k| k <= d).collect();
            if norm.is_empty() {
                return Err(Error::Input(format!(
                    "constraint set of vertex `{}` has no attainable degree (d = {d})",
                    g.vertex_id(v)
                )));
            }
            out.push(norm.into_iter().collect());
        }
        Ok(Self { sets: out })
    }

    pub fn uniform(g: &Graph, set: &[u32]) -> Result<Self> {
        Self::new(g, vec![set.to_vec(); g.vertex_count()])
    }

    /// `C(v) = {0, 1}`: matchings.
    pub fn matchings(g: &Graph) -> Self {
        Self::uniform(g, &[0, 1]).expect("every vertex admits degree 0")
    }

    /// `C(v) = {0, 1, 2}`: unbranched subgraphs.
    pub fn unbranched(g: &Graph) -> Self {
        Self::uniform(g, &[0, 1, 2]).expect("every vertex admits degree 0")
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, v: usize) -> &[u32] {
        &self.sets[v]
    }

    pub fn contains(&self, v: usize, k: u32) -> bool {
        self.sets[v].binary_search(&k).is_ok()
    }

    pub fn max(&self, v: usize) -> u32 {
        *self.sets[v].last().expect("sets are nonempty")
    }

    /// `k_v` when `C(v) = {0, ..., k_v}`.
    pub fn down_set_k(&self, v: usize) -> Option<u32> {
        let s = &self.sets[v];
        s.iter().enumerate().all(|(i, &k)| k == i as u32).then(|| s.len() as u32 - 1)
    }

    /// `alpha = max_v [d_v - k_v]_+` for down-set profiles with every `k_v >= 1`.
    pub fn alpha(&self, g: &Graph) -> Result<u32> {
        let mut alpha = 0;
        for v in 0..self.len() {
            let k = self.down_set_k(v).filter(|&k| k >= 1).ok_or_else(|| {
                Error::Precondition(format!(
                    "constraint set {:?} at `{}` is not of the form {{0, ..., k}} with k >= 1",
                    self.sets[v],
                    g.vertex_id(v)
                ))
            })?;
            alpha = alpha.max((g.degree(v) as u32).saturating_sub(k));
        }
        Ok(alpha)
    }
}

/// A set of edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EdgeSubset {
    edges: Vec<usize>,
}

impl EdgeSubset {
    pub fn new(mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self { edges }
    }

    pub fn from_mask(mask: u64) -> Self {
        Self { edges: (0..64).filter(|&i| mask >> i & 1 == 1).collect() }
    }

    pub fn from_ids(g: &Graph, ids: &[&str]) -> Result<Self> {
        let edges = ids
            .iter()
            .map(|id| g.edge_index(id).ok_or_else(|| Error::Input(format!("unknown edge id `{id}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(edges))
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn check_subset(g: &Graph, m: &EdgeSubset) -> Result<()> {
    match m.edges.iter().find(|&&e| e >= g.edge_count()) {
        Some(e) => Err(Error::Input(format!("edge index {e} not in graph"))),
        None => Ok(()),
    }
}

/// `d_M(v)`.
pub fn degree_in_subset(g: &Graph, m: &EdgeSubset, v: &str) -> Result<usize> {
    check_subset(g, m)?;
    let vi = g.vertex_index(v).ok_or_else(|| Error::Input(format!("unknown vertex id `{v}`")))?;
    Ok(m.edges.iter().filter(|&&e| g.edges[e].u == vi || g.edges[e].v == vi).count())
}

/// True iff `d_M(v) ∈ C(v)` for every vertex.
pub fn is_admissible(g: &Graph, cp: &ConstraintProfile, m: &EdgeSubset) -> Result<bool> {
    check_subset(g, m)?;
    if cp.len() != g.vertex_count() {
        return Err(Error::Input("constraint profile does not cover every vertex".into()));
    }
    let mut deg = vec![0u32; g.vertex_count()];
    for &e in &m.edges {
        deg[g.edges[e].u] += 1;
        deg[g.edges[e].v] += 1;
    }
    Ok(deg.iter().enumerate().all(|(v, &d)| cp.contains(v, d)))
}

/// `p_{C,d}(z) = sum_{k in C} binom(d, k) z^k`.
pub fn vertex_polynomial(c: &[u32], d: u32) -> CountPolynomial {
    let mut coeffs = vec![num_bigint::BigUint::default(); d as usize + 1];
    for &k in c {
        if k <= d {
            coeffs[k as usize] = binomial(d as u64, k as u64);
        }
    }
    CountPolynomial::new(coeffs)
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexJson {
    id: String,
    #[serde(rename = "C")]
    c: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<VertexJson>,
    edges: Vec<EdgeJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeJson {
    Named(String, String, String),
    Bare(String, String),
}

/// Parses `{"vertices":[{"id":"a","C":[0,1]}...],"edges":[["e1","a","b"],...]}`.
/// Edges may also be bare `["a","b"]` pairs, which are named `e0, e1, ...`.
pub fn graph_from_json(text: &str) -> Result<(Graph, ConstraintProfile)> {
    let parsed: GraphJson = serde_json::from_str(text).map_err(|e| Error::Input(format!("graph JSON: {e}")))?;
    let ids: Vec<String> = parsed.vertices.iter().map(|v| v.id.clone()).collect();
    let edges = parsed
        .edges
        .into_iter()
        .enumerate()
        .map(|(k, e)| match e {
            EdgeJson::Named(id, a, b) => (id, a, b),
            EdgeJson::Bare(a, b) => (format!("e{k}"), a, b),
        })
        .collect();
    let g = Graph::new(ids, edges)?;
    let cp = ConstraintProfile::new(&g, parsed.vertices.into_iter().map(|v| v.c).collect())?;
    Ok((g, cp))
}

pub fn graph_to_json(g: &Graph, cp: &ConstraintProfile) -> String {
    let doc = GraphJson {
        vertices: (0..g.vertex_count())
            .map(|v| VertexJson { id: g.vertex_id(v).to_string(), c: cp.set(v).to_vec() })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeJson::Named(e.id.clone(), g.vertex_id(e.u).to_string(), g.vertex_id(e.v).to_string()))
            .collect(),
    };
    serde_json::to_string(&doc).expect("graph serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn degrees_in_subsets() {
        let g = k3();
        let all = EdgeSubset::new(vec![0, 1, 2]);
        for v in ["v0", "v1", "v2"] {
            assert_eq!(degree_in_subset(&g, &all, v).unwrap(), 2);
            assert_eq!(degree_in_subset(&g, &EdgeSubset::default(), v).unwrap(), 0);
        }
        let path = Graph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![("ab".into(), "a".into(), "b".into()), ("bc".into(), "b".into(), "c".into())],
        )
        .unwrap();
        let m = EdgeSubset::from_ids(&path, &["ab"]).unwrap();
        assert_eq!(degree_in_subset(&path, &m, "b").unwrap(), 1);
        assert!(degree_in_subset(&path, &m, "zz").is_err());
        assert!(degree_in_subset(&path, &EdgeSubset::new(vec![7]), "a").is_err());
    }

    #[test]
    fn admissibility_on_triangle() {
        let g = k3();
        let matchings = ConstraintProfile::matchings(&g);
        assert!(is_admissible(&g, &matchings, &EdgeSubset::new(vec![1])).unwrap());
        assert!(!is_admissible(&g, &matchings, &EdgeSubset::new(vec![0, 1])).unwrap());
        let unbranched = ConstraintProfile::unbranched(&g);
        for mask in 0..8u64 {
            assert!(is_admissible(&g, &unbranched, &EdgeSubset::from_mask(mask)).unwrap());
        }
    }

    #[test]
    fn vertex_polynomials() {
        assert_eq!(vertex_polynomial(&[0, 1], 5), CountPolynomial::from_u64(&[1, 5]));
        assert_eq!(vertex_polynomial(&[0, 1, 2], 3), CountPolynomial::from_u64(&[1, 3, 3]));
        assert_eq!(vertex_polynomial(&[0, 1, 2, 3], 4), CountPolynomial::from_u64(&[1, 4, 6, 4]));
        assert_eq!(vertex_polynomial(&[0, 2, 9], 3), CountPolynomial::from_u64(&[1, 0, 3]));
    }

    #[test]
    fn invalid_graphs_rejected() {
        assert!(Graph::from_edges(2, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 5)]).is_err());
        let g = Graph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn profile_normalization() {
        let g = k3();
        let cp = ConstraintProfile::uniform(&g, &[0, 1, 2, 7]).unwrap();
        assert_eq!(cp.set(0), &[0, 1, 2]);
        assert_eq!(cp.down_set_k(0), Some(2));
        assert!(ConstraintProfile::uniform(&g, &[5]).is_err());
        let holes = ConstraintProfile::uniform(&g, &[0, 2]).unwrap();
        assert_eq!(holes.down_set_k(0), None);
        assert!(holes.alpha(&g).is_err());
        assert_eq!(ConstraintProfile::matchings(&g).alpha(&g).unwrap(), 1);
        assert!(ConstraintProfile::new(&g, vec![vec![0]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[{"id":"a","C":[0,1]},{"id":"b","C":[0,1,2]},{"id":"c","C":[0,1]}],
                       "edges":[["a","b"],["b","c"],["a","b"]]}"#;
        let (g, cp) = graph_from_json(text).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(1), 3);
        let (g2, cp2) = graph_from_json(&graph_to_json(&g, &cp)).unwrap();
        assert_eq!(g2, g);
        assert_eq!(cp2, cp);
        let err = graph_from_json(r#"{"vertices":[{"id":"a"}],"edges":[]}"#).unwrap_err();
        assert!(err.to_string().contains("`C`"), "{err}");
    }

    #[test]
    fn json_named_edges() {
        let text = r#"{"vertices":[{"id":"a","C":[0,1]},{"id":"b","C":[0,1]}],"edges":[["ab","a","b"],["a","b"]]}"#;
        let (g, _) = graph_from_json(text).unwrap();
        assert_eq!((g.edge(0).id.as_str(), g.edge(1).id.as_str()), ("ab", "e1"));
        assert!(graph_from_json(r#"{"vertices":[{"id":"a","C":[0]}],"edges":[["a"]]}"#).is_err());
    }

    #[test]
    fn bipartition_detection() {
        assert!(k3().bipartition().is_none());
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(c4.bipartition().unwrap(), vec![false, true, false, true]);
    }
}
