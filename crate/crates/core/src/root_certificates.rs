//! Root-location certificates: modulus floor, wedges, and the left half plane.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::asano_engine::zero_region_product;
use crate::error::{Error, Result};
use crate::fugacity_stats::half_plane_tolerance;
use crate::graph_model::{vertex_polynomial, ConstraintProfile, Graph};
use crate::root_finder::{find_roots, RootSet};

/// Smallest root modulus and wedge angle of a single vertex polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexBound {
    pub r: f64,
    pub phi: f64,
}

/// `(r, phi)` for `p_{C,d}`: `r` the least root modulus, `phi = pi - min |arg zeta|` over nonzero roots.
pub fn vertex_polynomial_bound(c: &[u32], d: u32) -> Result<VertexBound> {
    let p = vertex_polynomial(c, d);
    if p.degree() == 0 {
        return Ok(VertexBound { r: f64::INFINITY, phi: 0.0 });
    }
    let rs = find_roots(&p)?;
    let r = rs.roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let min_arg = rs
        .roots
        .iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| z.im.atan2(z.re).abs())
        .fold(PI, f64::min);
    Ok(VertexBound { r, phi: PI - min_arg })
}

pub fn vertex_root_bounds(g: &Graph, cp: &ConstraintProfile) -> Result<Vec<VertexBound>> {
    let mut cache: BTreeMap<(Vec<u32>, u32), VertexBound> = BTreeMap::new();
    (0..g.vertex_count())
        .map(|v| {
            let key = (cp.set(v).to_vec(), g.degree(v) as u32);
            if let Some(b) = cache.get(&key) {
                return Ok(*b);
            }
            let b = vertex_polynomial_bound(&key.0, key.1)?;
            cache.insert(key, b);
            Ok(b)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Modulus,
    WedgeUniform,
    WedgeBipartite,
    LeftHalfPlane,
}

/// Per-root margins into the allowed region; negative means outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeCertificate {
    pub kind: CertificateKind,
    /// Half-angle of the excluded sector around the positive axis is `pi - 2 phi` (uniform)
    /// or `pi - phi1 - phi2` (bipartite); this field stores that `phi` total.
    pub phi: f64,
    pub modulus_floor: Option<f64>,
    pub margins: Vec<f64>,
    pub tolerances: Vec<f64>,
    /// Roots too close to zero for an angle to mean anything.
    pub excluded: Vec<usize>,
    pub pass: bool,
}

impl WedgeCertificate {
    fn settle(kind: CertificateKind, phi: f64, floor: Option<f64>, margins: Vec<f64>, tolerances: Vec<f64>, excluded: Vec<usize>) -> Self {
        let pass = margins.iter().zip(&tolerances).all(|(m, t)| m.is_nan() || *m >= -t);
        Self { kind, phi, modulus_floor: floor, margins, tolerances, excluded, pass }
    }

    /// Smallest margin over checked roots.
    pub fn worst_margin(&self) -> f64 {
        self.margins.iter().filter(|m| !m.is_nan()).fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Re-evaluates the verdict with every tolerance enlarged by `extra`.
    pub fn with_extra_tolerance(&self, extra: f64) -> Self {
        let tol = self.tolerances.iter().map(|t| t + extra).collect();
        Self::settle(self.kind, self.phi, self.modulus_floor, self.margins.clone(), tol, self.excluded.clone())
    }
}

/// Tolerance on an argument derived from the error radius.
pub fn angular_tolerance(rs: &RootSet, j: usize) -> f64 {
    let m = rs.roots[j].norm();
    (rs.err[j] / m).min(1.0).asin() + 1e-9
}

/// `|zeta_j| >= R` with `R = min_e r_{v1(e)} r_{v2(e)}`.
pub fn modulus_certificate(g: &Graph, cp: &ConstraintProfile, rs: &RootSet) -> Result<WedgeCertificate> {
    if let Some(v) = (0..g.vertex_count()).find(|&v| !cp.contains(v, 0)) {
        return Err(Error::Precondition(format!("C({}) does not contain 0", g.vertex_id(v))));
    }
    let b = vertex_root_bounds(g, cp)?;
    let floor = g
        .edges()
        .iter()
        .map(|e| zero_region_product(b[e.u].r, b[e.v].r))
        .fold(f64::INFINITY, f64::min);
    let margins = rs.roots.iter().map(|z| z.norm() - floor).collect();
    let tol = rs.err.iter().map(|e| e + 1e-9).collect();
    Ok(WedgeCertificate::settle(CertificateKind::Modulus, 0.0, Some(floor), margins, tol, vec![]))
}

fn wedge(kind: CertificateKind, rs: &RootSet, total_phi: f64) -> WedgeCertificate {
    let lower = PI - total_phi;
    let mut margins = Vec::with_capacity(rs.len());
    let mut tol = Vec::with_capacity(rs.len());
    let mut excluded = Vec::new();
    for j in 0..rs.len() {
        let z = rs.roots[j];
        if z.norm() <= rs.err[j] {
            excluded.push(j);
            margins.push(f64::NAN);
            tol.push(f64::NAN);
            continue;
        }
        margins.push(z.im.atan2(z.re).abs() - lower);
        tol.push(angular_tolerance(rs, j));
    }
    WedgeCertificate::settle(kind, total_phi, None, margins, tol, excluded)
}

/// `|arg zeta| >= pi - 2 phi` with `phi = max_v phi_v`.
pub fn wedge_certificate_uniform(g: &Graph, cp: &ConstraintProfile, rs: &RootSet) -> Result<WedgeCertificate> {
    let phi = vertex_root_bounds(g, cp)?.iter().map(|b| b.phi).fold(0.0, f64::max);
    if phi > PI / 2.0 {
        return Err(Error::Precondition(format!("max vertex angle {phi} exceeds pi/2")));
    }
    Ok(wedge(CertificateKind::WedgeUniform, rs, 2.0 * phi))
}

/// `|arg zeta| >= pi - phi1 - phi2` for a bipartition (`false` = side 1).
pub fn wedge_certificate_bipartite(g: &Graph, cp: &ConstraintProfile, side: &[bool], rs: &RootSet) -> Result<WedgeCertificate> {
    if side.len() != g.vertex_count() {
        return Err(Error::Input(format!("bipartition covers {} of {} vertices", side.len(), g.vertex_count())));
    }
    if let Some(e) = g.edges().iter().find(|e| side[e.u] == side[e.v]) {
        return Err(Error::Input(format!("edge {} joins two vertices on the same side", e.id)));
    }
    let b = vertex_root_bounds(g, cp)?;
    let side_max = |s: bool| (0..g.vertex_count()).filter(|&v| side[v] == s).map(|v| b[v].phi).fold(0.0, f64::max);
    Ok(wedge(CertificateKind::WedgeBipartite, rs, side_max(false) + side_max(true)))
}

/// `Re zeta_j <= tol_j` for every root.
pub fn left_half_plane_check(rs: &RootSet) -> WedgeCertificate {
    let margins = rs.roots.iter().map(|z| -z.re).collect();
    let tol = (0..rs.len()).map(|j| half_plane_tolerance(rs, j)).collect();
    WedgeCertificate::settle(CertificateKind::LeftHalfPlane, 0.0, None, margins, tol, vec![])
}

/// One row of the bipartite angle table: side 1 has `C = {0,1,2}` and degree `d1`,
/// side 2 has `C = {0..k2}` and degree `d2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub d1: u32,
    pub phi1: f64,
    pub k2: u32,
    pub d2: u32,
    pub phi2: f64,
    /// The side-2 degrees grouped with this row.
    pub d2_cell: Vec<u32>,
    /// Largest side-2 angle over all degrees up to the cell maximum.
    pub phi2_cell: f64,
    pub below_right_angle: bool,
}

pub fn table1_angles() -> Result<Vec<Table1Row>> {
    let cells: [(u32, u32, &[u32]); 3] = [(3, 3, &[5, 6, 7]), (3, 4, &[5]), (4, 3, &[5])];
    let mut rows = Vec::new();
    for (d1, k2, cell) in cells {
        let phi1 = vertex_polynomial_bound(&[0, 1, 2], d1)?.phi;
        let side2: Vec<u32> = (0..=k2).collect();
        let dmax = *cell.iter().max().unwrap();
        let per_d = (1..=dmax).map(|d| vertex_polynomial_bound(&side2, d).map(|b| b.phi)).collect::<Result<Vec<_>>>()?;
        let phi2_cell = per_d.iter().cloned().fold(0.0, f64::max);
        for &d2 in cell {
            let phi2 = per_d[d2 as usize - 1];
            rows.push(Table1Row {
                d1,
                phi1,
                k2,
                d2,
                phi2,
                d2_cell: cell.to_vec(),
                phi2_cell,
                below_right_angle: phi1 + phi2_cell < PI / 2.0,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count_engine::count_by_enumeration;
    use crate::generators;

    #[test]
    fn vertex_bounds() {
        let b = vertex_polynomial_bound(&[0, 1], 5).unwrap();
        assert_eq!(b, VertexBound { r: 0.2, phi: 0.0 });
        let b = vertex_polynomial_bound(&[0, 1, 2], 3).unwrap();
        assert!((b.r - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((b.phi - PI / 6.0).abs() < 1e-14);
        for d in 3..9u32 {
            let b = vertex_polynomial_bound(&[0, 1, 2], d).unwrap();
            let want = (((d - 2) as f64) / (2.0 * (d - 1) as f64)).sqrt().asin();
            assert!((b.phi - want).abs() < 1e-13, "d={d}");
        }
        assert_eq!(vertex_polynomial_bound(&[0], 3).unwrap(), VertexBound { r: f64::INFINITY, phi: 0.0 });
    }

    #[test]
    fn triangle_matchings() {
        let g = generators::complete(3).unwrap();
        let cp = ConstraintProfile::matchings(&g);
        let rs = find_roots(&count_by_enumeration(&g, &cp).unwrap()).unwrap();
        let c = modulus_certificate(&g, &cp, &rs).unwrap();
        assert_eq!(c.modulus_floor, Some(0.25));
        assert!(c.pass);
        assert!(wedge_certificate_uniform(&g, &cp, &rs).unwrap().pass);
        assert!(left_half_plane_check(&rs).pass);
        let cp = ConstraintProfile::uniform(&g, &[1, 2]).unwrap();
        assert!(matches!(modulus_certificate(&g, &cp, &rs), Err(Error::Precondition(_))));
    }

    #[test]
    fn star_bipartite_wedge() {
        let g = generators::complete_bipartite(1, 3).unwrap();
        let cp = ConstraintProfile::new(&g, vec![vec![0, 1, 2], vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap();
        let p = count_by_enumeration(&g, &cp).unwrap();
        assert_eq!(p, crate::count_engine::CountPolynomial::from_u64(&[1, 3, 3]));
        let rs = find_roots(&p).unwrap();
        let side = g.bipartition().unwrap();
        let c = wedge_certificate_bipartite(&g, &cp, &side, &rs).unwrap();
        assert!((c.phi - PI / 6.0).abs() < 1e-14);
        assert!(c.pass);
        assert!(wedge_certificate_bipartite(&g, &cp, &[false; 4], &rs).is_err());
    }

    #[test]
    fn monotone_in_tolerance() {
        let g = generators::grid(3, 2).unwrap();
        let cp = ConstraintProfile::unbranched(&g);
        let rs = find_roots(&count_by_enumeration(&g, &cp).unwrap()).unwrap();
        let c = wedge_certificate_uniform(&g, &cp, &rs).unwrap();
        let tight = wedge(CertificateKind::WedgeUniform, &rs, 0.0);
        for extra in [0.0, 1e-6, 1e-2, 1.0] {
            assert!(!c.pass || c.with_extra_tolerance(extra).pass);
            assert!(!tight.pass || tight.with_extra_tolerance(extra).pass);
        }
        assert!(tight.with_extra_tolerance(10.0).pass);
    }

    #[test]
    fn table_one() {
        let rows = table1_angles().unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.below_right_angle));
        assert!((rows[0].phi1 / PI - 0.166_666_666_6).abs() < 1e-8);
        assert!((rows[4].phi1 / PI - 0.195_913_276_2).abs() < 1e-8);
        assert!((rows[4].phi2 / PI - 0.293_261_798_6).abs() < 1e-8);
        assert!((rows[3].phi2 - 0.3 * PI).abs() < 1e-14);
    }
}
