//! Built-in graph families.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph_model::Graph;

/// Path with `n` vertices and `n - 1` edges.
pub fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Input("path needs at least 2 vertices".into()));
    }
    let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &pairs)
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Input("cycle needs at least 3 vertices".into()));
    }
    let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &pairs)
}

/// `w x h` grid of vertices with nearest-neighbour edges.
pub fn grid(w: usize, h: usize) -> Result<Graph> {
    if w * h < 2 {
        return Err(Error::Input("grid needs at least 2 vertices".into()));
    }
    let id = |x: usize, y: usize| y * w + x;
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                pairs.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                pairs.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Graph::from_edges(w * h, &pairs)
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Input("complete graph needs at least 2 vertices".into()));
    }
    let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::from_edges(n, &pairs)
}

/// `K_{a,b}`; vertices `0..a` form the first side.
pub fn complete_bipartite(a: usize, b: usize) -> Result<Graph> {
    if a == 0 || b == 0 {
        return Err(Error::Input("both sides of K_{a,b} must be nonempty".into()));
    }
    let pairs: Vec<_> = (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))).collect();
    Graph::from_edges(a + b, &pairs)
}

const HEX_DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

/// Honeycomb patch: all hexagons within hex distance `r - 1` of a central one.
pub fn hex_patch(r: usize) -> Result<Graph> {
    if r == 0 {
        return Err(Error::Input("hex patch radius must be at least 1".into()));
    }
    let r = r as i64 - 1;
    let mut corners: BTreeMap<[(i64, i64); 3], usize> = BTreeMap::new();
    let mut edges: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for q in -r..=r {
        for s in (-r).max(-q - r)..=r.min(-q + r) {
            let hex = (q, s);
            let corner_at = |i: usize| {
                let a = HEX_DIRS[i % 6];
                let b = HEX_DIRS[(i + 1) % 6];
                let mut key = [hex, (q + a.0, s + a.1), (q + b.0, s + b.1)];
                key.sort();
                key
            };
            let ids: Vec<usize> = (0..6)
                .map(|i| {
                    let n = corners.len();
                    *corners.entry(corner_at(i)).or_insert(n)
                })
                .collect();
            for i in 0..6 {
                let (a, b) = (ids[i], ids[(i + 1) % 6]);
                edges.insert((a.min(b), a.max(b)), ());
            }
        }
    }
    let pairs: Vec<_> = edges.into_keys().collect();
    Graph::from_edges(corners.len(), &pairs)
}

/// Uniform simple graph with `m` edges on `n` labelled vertices; isolated vertices are removed.
pub fn gnm(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let total = n * n.saturating_sub(1) / 2;
    if m > total {
        return Err(Error::Input(format!("G(n,m) with n = {n} has at most {total} edges, asked for {m}")));
    }
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = sample(&mut rng, total, m).into_vec();
    chosen.sort_unstable();
    relabel(n, chosen.into_iter().map(|k| all[k]).collect())
}

/// `m` edges drawn independently (parallel edges allowed); isolated vertices are removed.
pub fn random_multigraph(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Input("multigraph needs at least 2 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..m)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a.min(b), a.max(b))
        })
        .collect();
    relabel(n, pairs)
}

fn relabel(n: usize, pairs: Vec<(usize, usize)>) -> Result<Graph> {
    let mut used = vec![false; n];
    for &(a, b) in &pairs {
        used[a] = true;
        used[b] = true;
    }
    let ids: Vec<String> = (0..n).filter(|&i| used[i]).map(|i| format!("v{i}")).collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| (format!("e{k}"), format!("v{a}"), format!("v{b}")))
        .collect();
    Graph::new(ids, edges)
}

/// Parses names such as `path_8`, `cycle_4`, `grid_3x3`, `complete_4`, `hex_2`,
/// `kbip_2x3`, `gnm_8_12`.
pub fn by_name(name: &str, seed: u64) -> Result<Graph> {
    let bad = || Error::Input(format!("unknown generator `{name}`"));
    let (family, rest) = name.split_once('_').ok_or_else(bad)?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let pair = |s: &str, sep: char| -> Result<(usize, usize)> {
        let (a, b) = s.split_once(sep).ok_or_else(bad)?;
        Ok((num(a)?, num(b)?))
    };
    match family {
        "path" => path(num(rest)?),
        "cycle" => cycle(num(rest)?),
        "complete" => complete(num(rest)?),
        "hex" => hex_patch(num(rest)?),
        "grid" => {
            let (w, h) = pair(rest, 'x')?;
            grid(w, h)
        }
        "kbip" => {
            let (a, b) = pair(rest, 'x')?;
            complete_bipartite(a, b)
        }
        "gnm" => {
            let (n, m) = pair(rest, '_')?;
            gnm(n, m, seed)
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        assert_eq!(path(8).unwrap().edge_count(), 7);
        assert_eq!(cycle(4).unwrap().edge_count(), 4);
        let g = grid(3, 3).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count(), g.max_degree()), (9, 12, 4));
        assert_eq!(complete(4).unwrap().edge_count(), 6);
        assert_eq!(complete_bipartite(1, 3).unwrap().max_degree(), 3);
    }

    #[test]
    fn honeycomb_counts() {
        let h1 = hex_patch(1).unwrap();
        assert_eq!((h1.vertex_count(), h1.edge_count()), (6, 6));
        let h2 = hex_patch(2).unwrap();
        assert_eq!((h2.vertex_count(), h2.edge_count(), h2.max_degree()), (24, 30, 3));
        let h3 = hex_patch(3).unwrap();
        assert_eq!((h3.vertex_count(), h3.edge_count()), (54, 72));
        assert!(h3.bipartition().is_some());
    }

    #[test]
    fn random_graphs_are_seeded() {
        let a = gnm(10, 12, 7).unwrap();
        let b = gnm(10, 12, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 12);
        assert!(gnm(4, 7, 0).is_err());
        let m = random_multigraph(4, 10, 3).unwrap();
        assert_eq!(m.edge_count(), 10);
    }

    #[test]
    fn names() {
        assert_eq!(by_name("grid_2x3", 0).unwrap().edge_count(), 7);
        assert_eq!(by_name("gnm_6_5", 1).unwrap().edge_count(), 5);
        assert!(by_name("torus_3", 0).is_err());
        assert!(by_name("path", 0).is_err());
    }
}
