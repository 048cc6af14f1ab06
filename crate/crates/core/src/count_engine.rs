//! Exact computation of `P_(C)(z) = sum over admissible M of z^|M|`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

pub use crate::poly::CountPolynomial;

use crate::error::{Error, Result};
use crate::graph_model::{ConstraintProfile, Graph};

pub const DEFAULT_ENUM_CAP: usize = 24;
pub const DEFAULT_STATE_CAP: usize = 1 << 22;
const HARD_ENUM_LIMIT: usize = 40;

fn check_profile(g: &Graph, cp: &ConstraintProfile) -> Result<()> {
    if cp.len() != g.vertex_count() {
        return Err(Error::Input("constraint profile does not cover every vertex".into()));
    }
    Ok(())
}

fn check_enum_cap(g: &Graph, cap: usize) -> Result<()> {
    let cap = cap.min(HARD_ENUM_LIMIT);
    if g.edge_count() > cap {
        return Err(Error::Resource(format!(
            "enumeration cap of {cap} edges exceeded ({} edges)",
            g.edge_count()
        )));
    }
    Ok(())
}

/// Per-vertex bitmask of allowed degrees; degrees never exceed the edge count.
fn allowed_masks(g: &Graph, cp: &ConstraintProfile) -> Vec<u64> {
    (0..g.vertex_count())
        .map(|v| cp.set(v).iter().filter(|&&k| k < 64).fold(0u64, |m, &k| m | 1 << k))
        .collect()
}

fn admissible_mask(mask: u64, ends: &[(usize, usize)], allowed: &[u64], deg: &mut [u8]) -> bool {
    deg.iter_mut().for_each(|d| *d = 0);
    let mut bits = mask;
    while bits != 0 {
        let e = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        deg[ends[e].0] += 1;
        deg[ends[e].1] += 1;
    }
    deg.iter().zip(allowed).all(|(&d, &a)| a >> d & 1 == 1)
}

fn chunk_ranges(m: usize) -> Vec<(u64, u64)> {
    let total = 1u64 << m;
    let chunks = total.min(1024);
    let step = total / chunks;
    (0..chunks).map(|c| (c * step, (c + 1) * step)).collect()
}

/// Brute force over all `2^|E|` subsets; the oracle for the other counting paths.
pub fn count_by_enumeration(g: &Graph, cp: &ConstraintProfile) -> Result<CountPolynomial> {
    count_by_enumeration_capped(g, cp, DEFAULT_ENUM_CAP)
}

pub fn count_by_enumeration_capped(g: &Graph, cp: &ConstraintProfile, cap: usize) -> Result<CountPolynomial> {
    check_profile(g, cp)?;
    check_enum_cap(g, cap)?;
    let m = g.edge_count();
    let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let allowed = allowed_masks(g, cp);
    let partial: Vec<Vec<u64>> = chunk_ranges(m)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut counts = vec![0u64; m + 1];
            let mut deg = vec![0u8; g.vertex_count()];
            for mask in lo..hi {
                if admissible_mask(mask, &ends, &allowed, &mut deg) {
                    counts[mask.count_ones() as usize] += 1;
                }
            }
            counts
        })
        .collect();
    let mut total = vec![BigUint::zero(); m + 1];
    for counts in partial {
        for (t, c) in total.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(CountPolynomial::new(total))
}

/// Bitmasks of all admissible subsets, in increasing mask order.
pub fn admissible_subsets(g: &Graph, cp: &ConstraintProfile, cap: usize) -> Result<Vec<u64>> {
    check_profile(g, cp)?;
    check_enum_cap(g, cap)?;
    let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let allowed = allowed_masks(g, cp);
    let parts: Vec<Vec<u64>> = chunk_ranges(g.edge_count())
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut deg = vec![0u8; g.vertex_count()];
            (lo..hi).filter(|&mask| admissible_mask(mask, &ends, &allowed, &mut deg)).collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Greedy order: close as many frontier vertices as possible, then keep the
/// frontier small, then prefer the lower edge index.
pub fn choose_edge_order(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut remaining: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut active = vec![false; n];
    let mut active_count = 0usize;
    let mut used = vec![false; g.edge_count()];
    let mut order = Vec::with_capacity(g.edge_count());
    for _ in 0..g.edge_count() {
        let mut best: Option<(usize, usize, usize)> = None;
        for (e, edge) in g.edges().iter().enumerate() {
            if used[e] {
                continue;
            }
            let closes = [edge.u, edge.v].iter().filter(|&&x| remaining[x] == 1).count();
            let opened = [edge.u, edge.v].iter().filter(|&&x| !active[x]).count();
            let frontier = active_count + opened - closes;
            let better = match best {
                None => true,
                Some((bc, bf, _)) => closes > bc || (closes == bc && frontier < bf),
            };
            if better {
                best = Some((closes, frontier, e));
            }
        }
        let (_, _, e) = best.expect("an unused edge remains");
        used[e] = true;
        order.push(e);
        let edge = g.edge(e);
        for x in [edge.u, edge.v] {
            if !active[x] {
                active[x] = true;
                active_count += 1;
            }
            remaining[x] -= 1;
            if remaining[x] == 0 {
                active[x] = false;
                active_count -= 1;
            }
        }
    }
    order
}

fn add_into(acc: &mut Vec<BigUint>, src: &[BigUint], shift: usize) {
    if acc.len() < src.len() + shift {
        acc.resize(src.len() + shift, BigUint::zero());
    }
    for (i, c) in src.iter().enumerate() {
        if !c.is_zero() {
            acc[i + shift] += c;
        }
    }
}

/// Linear frontier dynamic programme over the given edge order (empty = heuristic order).
pub fn count_by_frontier_dp(g: &Graph, cp: &ConstraintProfile, edge_order: &[usize]) -> Result<CountPolynomial> {
    count_by_frontier_dp_capped(g, cp, edge_order, DEFAULT_STATE_CAP)
}

pub fn count_by_frontier_dp_capped(
    g: &Graph,
    cp: &ConstraintProfile,
    edge_order: &[usize],
    state_cap: usize,
) -> Result<CountPolynomial> {
    check_profile(g, cp)?;
    let order = if edge_order.is_empty() {
        choose_edge_order(g)
    } else {
        let mut seen = vec![false; g.edge_count()];
        if edge_order.len() != g.edge_count()
            || edge_order.iter().any(|&e| e >= seen.len() || std::mem::replace(&mut seen[e], true))
        {
            return Err(Error::Input("edge order is not a permutation of the edges".into()));
        }
        edge_order.to_vec()
    };
    let mut remaining: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
    let mut frontier: Vec<usize> = Vec::new();
    let mut states: BTreeMap<Vec<u32>, Vec<BigUint>> = BTreeMap::new();
    states.insert(Vec::new(), vec![BigUint::from(1u32)]);

    for (step, &e) in order.iter().enumerate() {
        let edge = g.edge(e);
        for x in [edge.u, edge.v] {
            if !frontier.contains(&x) {
                frontier.push(x);
                states = states
                    .into_iter()
                    .map(|(mut k, c)| {
                        k.push(0);
                        (k, c)
                    })
                    .collect();
            }
        }
        let pu = frontier.iter().position(|&x| x == edge.u).unwrap();
        let pv = frontier.iter().position(|&x| x == edge.v).unwrap();
        let (mu, mv) = (cp.max(edge.u), cp.max(edge.v));
        let mut next: BTreeMap<Vec<u32>, Vec<BigUint>> = BTreeMap::new();
        for (key, coeffs) in states {
            if key[pu] < mu && key[pv] < mv {
                let mut taken = key.clone();
                taken[pu] += 1;
                taken[pv] += 1;
                add_into(next.entry(taken).or_default(), &coeffs, 1);
            }
            add_into(next.entry(key).or_default(), &coeffs, 0);
        }
        states = next;

        remaining[edge.u] -= 1;
        remaining[edge.v] -= 1;
        let mut closing: Vec<usize> = [edge.u, edge.v]
            .into_iter()
            .filter(|&x| remaining[x] == 0)
            .map(|x| frontier.iter().position(|&y| y == x).unwrap())
            .collect();
        closing.sort_unstable_by(|a, b| b.cmp(a));
        for p in closing {
            let x = frontier.remove(p);
            let mut next: BTreeMap<Vec<u32>, Vec<BigUint>> = BTreeMap::new();
            for (mut key, coeffs) in states {
                if cp.contains(x, key[p]) {
                    key.remove(p);
                    add_into(next.entry(key).or_default(), &coeffs, 0);
                }
            }
            states = next;
        }
        if states.len() > state_cap {
            return Err(Error::Resource(format!(
                "frontier state cap {state_cap} exceeded after edge {step} ({} states); try a better edge order",
                states.len()
            )));
        }
    }
    // Vertices never touched cannot exist (degree >= 1), so the frontier is empty here.
    let coeffs = states.remove(&Vec::new()).unwrap_or_default();
    Ok(CountPolynomial::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    fn k3() -> Graph {
        generators::complete(3).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let g = k3();
        assert_eq!(
            count_by_enumeration(&g, &ConstraintProfile::matchings(&g)).unwrap(),
            CountPolynomial::from_u64(&[1, 3])
        );
        assert_eq!(
            count_by_enumeration(&g, &ConstraintProfile::unbranched(&g)).unwrap(),
            CountPolynomial::from_u64(&[1, 3, 3, 1])
        );
        let e = generators::path(2).unwrap();
        assert_eq!(
            count_by_enumeration(&e, &ConstraintProfile::matchings(&e)).unwrap(),
            CountPolynomial::from_u64(&[1, 1])
        );
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = generators::grid(4, 4).unwrap();
        let err = count_by_enumeration_capped(&g, &ConstraintProfile::matchings(&g), 20).unwrap_err();
        assert!(matches!(err, Error::Resource(ref s) if s.contains("20")), "{err}");
    }

    #[test]
    fn frontier_examples() {
        let p = generators::path(4).unwrap();
        assert_eq!(
            count_by_frontier_dp(&p, &ConstraintProfile::matchings(&p), &[]).unwrap(),
            CountPolynomial::from_u64(&[1, 3, 1])
        );
        let c4 = generators::cycle(4).unwrap();
        assert_eq!(
            count_by_frontier_dp(&c4, &ConstraintProfile::unbranched(&c4), &[3, 1, 0, 2]).unwrap(),
            CountPolynomial::one_plus_z_pow(4)
        );
        let e = generators::path(2).unwrap();
        assert_eq!(
            count_by_frontier_dp(&e, &ConstraintProfile::matchings(&e), &[]).unwrap(),
            CountPolynomial::from_u64(&[1, 1])
        );
        assert!(count_by_frontier_dp(&c4, &ConstraintProfile::matchings(&c4), &[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn state_cap_reported() {
        let g = generators::complete(7).unwrap();
        let err = count_by_frontier_dp_capped(&g, &ConstraintProfile::unbranched(&g), &[], 4).unwrap_err();
        assert!(matches!(err, Error::Resource(ref s) if s.contains("edge order")), "{err}");
    }

    #[test]
    fn heuristic_orders() {
        let p = generators::path(6).unwrap();
        assert_eq!(choose_edge_order(&p), vec![0, 1, 2, 3, 4]);
        let k4 = generators::complete(4).unwrap();
        let mut o = choose_edge_order(&k4);
        o.sort_unstable();
        assert_eq!(o, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn larger_grid_known_values() {
        // 4x4 grid: 10012 matchings in total (independent recursive count), 36 perfect.
        let g = generators::grid(4, 4).unwrap();
        let p = count_by_frontier_dp(&g, &ConstraintProfile::matchings(&g), &[]).unwrap();
        assert_eq!(p.degree(), 8);
        assert_eq!(p.coeff(8), BigUint::from(36u32));
        assert_eq!(p.coeff(1), BigUint::from(24u32));
        let total: BigUint = p.coeffs().iter().sum();
        assert_eq!(total, BigUint::from(10_012u32));
    }

    #[test]
    fn admissible_subset_listing() {
        let g = k3();
        let subsets = admissible_subsets(&g, &ConstraintProfile::matchings(&g), 24).unwrap();
        assert_eq!(subsets, vec![0, 1, 2, 4]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn dp_matches_enumeration(n in 3usize..7, m in 1usize..11, seed in 0u64..1000, choice in 0usize..4, rot in 0usize..11) {
            let g = generators::random_multigraph(n, m, seed).unwrap();
            let profile: &[u32] = [&[0, 1][..], &[0, 1, 2], &[0, 2], &[0, 1, 3]][choice];
            let cp = ConstraintProfile::uniform(&g, profile).unwrap();
            let oracle = count_by_enumeration(&g, &cp).unwrap();
            prop_assert_eq!(&count_by_frontier_dp(&g, &cp, &[]).unwrap(), &oracle);
            let rotated: Vec<usize> = (0..m).map(|i| (i + rot) % m).collect();
            prop_assert_eq!(&count_by_frontier_dp(&g, &cp, &rotated).unwrap(), &oracle);
            if cp.set(0).contains(&0) && (0..g.vertex_count()).all(|v| cp.contains(v, 0)) {
                prop_assert_eq!(oracle.coeff(0), BigUint::from(1u32));
            }
            if (0..g.vertex_count()).all(|v| cp.contains(v, 0) && cp.contains(v, 1)) {
                prop_assert_eq!(oracle.coeff(1), BigUint::from(m));
            }
            let half: u32 = (0..g.vertex_count()).map(|v| cp.max(v)).sum::<u32>() / 2;
            prop_assert!(oracle.degree() <= m.min(half as usize));
        }
    }
}
