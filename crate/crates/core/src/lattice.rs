//! The level-k lattice torus, unitary gauge fields on its links, flux
//! configurations with prescribed topological charge, plaquettes, and the
//! lattice Chern number.
//!
//! Sites are the points x/k with integer coordinates x in {0..k-1}^n; the
//! linear index is little-endian (axis 0 fastest). A link `U_i(x)` transports
//! the fiber at x to the fiber at x + e_i/k.
//!
//! Plaquette orientation is fixed once: the (i, j) face based at x is
//! traversed counterclockwise, i first, giving
//! `P_ij(x) = U_j(x)^* U_i(x + e_j)^* U_j(x + e_i) U_i(x)`.
//! The sign of the topological charge follows from this convention and is
//! absorbed by the one-time calibration in the index harness.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const UNITARITY_TOL: f64 = 1e-12;

/// The discrete torus ((1/k)Z/Z)^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeTorus {
    n: usize,
    k: usize,
}

impl LatticeTorus {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "lattice needs n >= 1 and k >= 1, got n = {n}, k = {k}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn site_count(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.n);
        let mut idx = 0;
        for dir in (0..self.n).rev() {
            idx = idx * self.k + coords[dir] % self.k;
        }
        idx
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            out.push(idx % self.k);
            idx /= self.k;
        }
        out
    }

    /// Index of x + e_dir/k.
    pub fn neighbor(&self, idx: usize, dir: usize) -> usize {
        let mut coords = self.coords(idx);
        coords[dir] = (coords[dir] + 1) % self.k;
        self.index(&coords)
    }

    /// The point x/k as floats in [0, 1)^n.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .into_iter()
            .map(|c| c as f64 / self.k as f64)
            .collect()
    }
}

/// Unitary N x N link matrices on the directed edges of a lattice torus.
#[derive(Clone, Debug)]
pub struct GaugeField {
    lattice: LatticeTorus,
    fiber_dim: usize,
    /// links[site * n + dir]
    links: Arc<Vec<ComplexMatrix>>,
}

impl GaugeField {
    pub fn from_links(
        lattice: LatticeTorus,
        fiber_dim: usize,
        links: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if links.len() != lattice.site_count() * lattice.n() {
            return Err(Error::Dimension(format!(
                "expected {} links, got {}",
                lattice.site_count() * lattice.n(),
                links.len()
            )));
        }
        let id = ComplexMatrix::identity(fiber_dim);
        for u in &links {
            if u.rows() != fiber_dim || u.cols() != fiber_dim {
                return Err(Error::Dimension(format!(
                    "link must be {fiber_dim}x{fiber_dim}, got {}x{}",
                    u.rows(),
                    u.cols()
                )));
            }
            let defect = u.adjoint().matmul(u)?.sub(&id)?.max_abs();
            if defect > UNITARITY_TOL {
                return Err(Error::Precondition(format!(
                    "link not unitary: defect {defect:.3e}"
                )));
            }
        }
        Ok(Self {
            lattice,
            fiber_dim,
            links: Arc::new(links),
        })
    }

    pub fn lattice(&self) -> &LatticeTorus {
        &self.lattice
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn link(&self, site: usize, dir: usize) -> &ComplexMatrix {
        &self.links[site * self.lattice.n() + dir]
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }
}

/// All links identity.
pub fn trivial_gauge_field(lattice: &LatticeTorus, fiber_dim: usize) -> GaugeField {
    let id = ComplexMatrix::identity(fiber_dim);
    GaugeField {
        lattice: lattice.clone(),
        fiber_dim,
        links: Arc::new(vec![id; lattice.site_count() * lattice.n()]),
    }
}

fn phase(t: f64) -> ComplexMatrix {
    ComplexMatrix::from_entries(1, 1, vec![Complex64::from_polar(1.0, t)]).expect("finite")
}

/// U(1) flux field on the n = 2 torus with uniform plaquette phase
/// `2 pi q / k^2` and total topological charge q.
///
/// `U_2(x1, x2) = exp(2 pi i q x1 / k^2)`, `U_1 = 1` except on the wrap
/// column `x1 = k - 1` where `U_1(k-1, x2) = exp(-2 pi i q x2 / k)`.
pub fn flux_gauge_field_t2(k: usize, q: i64) -> Result<GaugeField> {
    let lattice = LatticeTorus::new(2, k)?;
    if 2 * q.unsigned_abs() as usize >= k * k {
        return Err(Error::FluxTooLarge { q, k });
    }
    let qf = q as f64;
    let kf = k as f64;
    let mut links = Vec::with_capacity(lattice.site_count() * 2);
    for idx in 0..lattice.site_count() {
        let c = lattice.coords(idx);
        let (x1, x2) = (c[0], c[1]);
        let u1 = if x1 == k - 1 {
            phase(-2.0 * PI * qf * x2 as f64 / kf)
        } else {
            ComplexMatrix::identity(1)
        };
        let u2 = phase(2.0 * PI * qf * x1 as f64 / (kf * kf));
        links.push(u1);
        links.push(u2);
    }
    Ok(GaugeField {
        lattice,
        fiber_dim: 1,
        links: Arc::new(links),
    })
}

/// Product flux field on the n = 4 torus: directions (1, 2) carry the flux-q1
/// links as functions of (x1, x2), directions (3, 4) the flux-q2 links as
/// functions of (x3, x4).
pub fn product_gauge_field_t4(k: usize, q1: i64, q2: i64) -> Result<GaugeField> {
    let lattice = LatticeTorus::new(4, k)?;
    for q in [q1, q2] {
        if 2 * q.unsigned_abs() as usize >= k * k {
            return Err(Error::FluxTooLarge { q, k });
        }
    }
    let f1 = flux_gauge_field_t2(k, q1)?;
    let f2 = flux_gauge_field_t2(k, q2)?;
    let t2 = f1.lattice().clone();
    let mut links = Vec::with_capacity(lattice.site_count() * 4);
    for idx in 0..lattice.site_count() {
        let c = lattice.coords(idx);
        let a = t2.index(&[c[0], c[1]]);
        let b = t2.index(&[c[2], c[3]]);
        links.push(f1.link(a, 0).clone());
        links.push(f1.link(a, 1).clone());
        links.push(f2.link(b, 0).clone());
        links.push(f2.link(b, 1).clone());
    }
    Ok(GaugeField {
        lattice,
        fiber_dim: 1,
        links: Arc::new(links),
    })
}

/// Per-site unitaries g(x).
#[derive(Clone, Debug)]
pub struct GaugeTransform {
    lattice: LatticeTorus,
    fiber_dim: usize,
    site_unitaries: Vec<ComplexMatrix>,
}

impl GaugeTransform {
    pub fn new(
        lattice: LatticeTorus,
        fiber_dim: usize,
        site_unitaries: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if site_unitaries.len() != lattice.site_count() {
            return Err(Error::Dimension(format!(
                "expected {} site unitaries, got {}",
                lattice.site_count(),
                site_unitaries.len()
            )));
        }
        let id = ComplexMatrix::identity(fiber_dim);
        for g in &site_unitaries {
            let defect = g.adjoint().matmul(g)?.sub(&id)?.max_abs();
            if defect > UNITARITY_TOL {
                return Err(Error::Precondition(format!(
                    "gauge transform not unitary: defect {defect:.3e}"
                )));
            }
        }
        Ok(Self {
            lattice,
            fiber_dim,
            site_unitaries,
        })
    }

    /// Seeded random U(1) transform (fiber dimension 1).
    pub fn random_u1(lattice: &LatticeTorus, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let site_unitaries = (0..lattice.site_count())
            .map(|_| phase(rng.gen_range(0.0..2.0 * PI)))
            .collect();
        Self {
            lattice: lattice.clone(),
            fiber_dim: 1,
            site_unitaries,
        }
    }

    pub fn site(&self, idx: usize) -> &ComplexMatrix {
        &self.site_unitaries[idx]
    }
}

/// `U_i(x) -> g(x + e_i) U_i(x) g(x)^*`.
pub fn apply_gauge_transform(field: &GaugeField, g: &GaugeTransform) -> Result<GaugeField> {
    if field.lattice != g.lattice || field.fiber_dim != g.fiber_dim {
        return Err(Error::Dimension(
            "gauge transform shape does not match the field".into(),
        ));
    }
    let lattice = field.lattice.clone();
    let mut links = Vec::with_capacity(field.links.len());
    for site in 0..lattice.site_count() {
        for dir in 0..lattice.n() {
            let fwd = lattice.neighbor(site, dir);
            let u = g
                .site(fwd)
                .matmul(field.link(site, dir))?
                .matmul(&g.site(site).adjoint())?;
            links.push(u);
        }
    }
    Ok(GaugeField {
        lattice,
        fiber_dim: field.fiber_dim,
        links: Arc::new(links),
    })
}

/// Counterclockwise holonomy around the (i, j) face based at site x.
pub fn plaquette(field: &GaugeField, site: usize, i: usize, j: usize) -> Result<ComplexMatrix> {
    let lat = field.lattice();
    if i == j || i >= lat.n() || j >= lat.n() {
        return Err(Error::InvalidArgument(format!(
            "plaquette needs two distinct directions below n = {}, got ({i}, {j})",
            lat.n()
        )));
    }
    let xi = lat.neighbor(site, i);
    let xj = lat.neighbor(site, j);
    field
        .link(site, j)
        .adjoint()
        .matmul(&field.link(xj, i).adjoint())?
        .matmul(field.link(xi, j))?
        .matmul(field.link(site, i))
}

/// Topological charge of an n = 2, N = 1 field: principal-branch plaquette
/// phases summed over all faces, divided by 2 pi, rounded to an integer.
pub fn lattice_chern_number_t2(field: &GaugeField) -> Result<i64> {
    let lat = field.lattice();
    if lat.n() != 2 || field.fiber_dim() != 1 {
        return Err(Error::Precondition(
            "lattice Chern number is defined for n = 2, N = 1 fields".into(),
        ));
    }
    let mut total = 0.0;
    for site in 0..lat.site_count() {
        let p = plaquette(field, site, 0, 1)?;
        let arg = p.get(0, 0).arg();
        if arg.abs() > PI - 1e-6 {
            return Err(Error::RoughField {
                site: lat.coords(site),
                phase: arg,
            });
        }
        total += arg;
    }
    let value = total / (2.0 * PI);
    let rounded = value.round();
    if (value - rounded).abs() > 1e-6 {
        return Err(Error::NonIntegerCharge {
            value,
            tol: 1e-6,
        });
    }
    Ok(rounded as i64)
}

/// Forward shift operator `U_{k,i}` on `l^2(B_k) (x) C^N (x) S`: the basis
/// vector at site x maps into site x + e_i/k with factor `U_i(x) (x) Id_S`.
pub fn shift_operator(field: &GaugeField, clifford: &CliffordRep, dir: usize) -> ComplexMatrix {
    assert_eq!(
        clifford.n(),
        field.lattice().n(),
        "clifford rank must match the lattice dimension"
    );
    let lat = field.lattice();
    let sites = lat.site_count();
    let nf = field.fiber_dim();
    let ds = clifford.spinor_dim();
    let block = nf * ds;
    let dim = sites * block;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for site in 0..sites {
        let dst = lat.neighbor(site, dir);
        let u = field.link(site, dir);
        for a in 0..nf {
            for b in 0..nf {
                let v = u.get(a, b);
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                for s in 0..ds {
                    out.set(dst * block + a * ds + s, site * block + b * ds + s, v);
                }
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct GaugeFieldJson {
    n: usize,
    k: usize,
    #[serde(rename = "N")]
    fiber_dim: usize,
    /// links[site][dir] as row-major N x N matrices of [re, im] pairs,
    /// sites in index order.
    links: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

pub fn gauge_field_to_json(field: &GaugeField) -> serde_json::Value {
    let lat = field.lattice();
    let nf = field.fiber_dim();
    let links = (0..lat.site_count())
        .map(|site| {
            (0..lat.n())
                .map(|dir| {
                    let u = field.link(site, dir);
                    (0..nf)
                        .map(|i| {
                            (0..nf)
                                .map(|j| {
                                    let z = u.get(i, j);
                                    [z.re, z.im]
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    serde_json::to_value(GaugeFieldJson {
        n: lat.n(),
        k: lat.k(),
        fiber_dim: nf,
        links,
    })
    .expect("gauge field serializes")
}

pub fn gauge_field_from_json(value: &serde_json::Value) -> Result<GaugeField> {
    let raw: GaugeFieldJson = serde_json::from_value(value.clone())?;
    let lattice = LatticeTorus::new(raw.n, raw.k)?;
    let mut links = Vec::with_capacity(lattice.site_count() * raw.n);
    if raw.links.len() != lattice.site_count() {
        return Err(Error::Dimension(format!(
            "expected {} sites, got {}",
            lattice.site_count(),
            raw.links.len()
        )));
    }
    for site in raw.links {
        if site.len() != raw.n {
            return Err(Error::Dimension("wrong number of directions".into()));
        }
        for mat in site {
            let mut entries = Vec::with_capacity(raw.fiber_dim * raw.fiber_dim);
            for row in &mat {
                for z in row {
                    entries.push(Complex64::new(z[0], z[1]));
                }
            }
            links.push(ComplexMatrix::from_entries(
                raw.fiber_dim,
                raw.fiber_dim,
                entries,
            )?);
        }
    }
    GaugeField::from_links(lattice, raw.fiber_dim, links)
}
