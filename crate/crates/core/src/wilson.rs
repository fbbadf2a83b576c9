//! Lattice Dirac operators, the Wilson term, and Wilson-Dirac operators
//! assembled from a gauge field and a Clifford representation.
//!
//! With `U_i` the forward shift operator and `nabla_i = k (U_i^* - 1)` the
//! forward difference,
//!
//! `D = sum_i c_i (nabla_i - nabla_i^*) / 2`,
//! `W = sum_i (nabla_i + nabla_i^*) / 2`,
//!
//! and the two mass insertions exposed here are `D + r gamma (W + m k)`
//! (scaled mass) and `D + gamma (W + M)` (fixed mass). The heavy operators
//! are assembled directly from the one-hop stencil; `shift_operator` products
//! are only used in tests.

use num_complex::Complex64;

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::lattice::{shift_operator, GaugeField};
use crate::linalg::{ComplexMatrix, HermitianOperator};

/// Which mass insertion a Wilson-Dirac operator carries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassMode {
    /// `D + r gamma (W + m k)`
    Scaled { m: f64, r: f64 },
    /// `D + gamma (W + mass)`
    Fixed { mass: f64 },
}

#[derive(Clone, Debug)]
pub struct WilsonDiracOperator {
    operator: HermitianOperator,
    k: usize,
    n: usize,
    fiber_dim: usize,
    mass: MassMode,
}

impl WilsonDiracOperator {
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn mass(&self) -> MassMode {
        self.mass
    }
}

/// `nabla_{k,i} = k (U_{k,i}^* - 1)`.
pub fn forward_difference(
    field: &GaugeField,
    clifford: &CliffordRep,
    dir: usize,
) -> Result<ComplexMatrix> {
    check_shapes(field, clifford)?;
    let k = field.lattice().k() as f64;
    let u = shift_operator(field, clifford, dir);
    let id = ComplexMatrix::identity(u.rows());
    Ok(u.adjoint().sub(&id)?.scale(Complex64::new(k, 0.0)))
}

fn check_shapes(field: &GaugeField, clifford: &CliffordRep) -> Result<()> {
    if field.lattice().n() != clifford.n() {
        return Err(Error::Dimension(format!(
            "lattice dimension {} does not match clifford rank {}",
            field.lattice().n(),
            clifford.n()
        )));
    }
    Ok(())
}

/// Stencil assembly shared by the Dirac, Wilson, and Wilson-Dirac operators:
/// for every site x and direction i,
///   block (x, x + e_i)  += (k/2) U_i(x)^* (x) hop_dag[i]
///   block (x + e_i, x)  += (k/2) U_i(x)  (x) hop[i]
/// plus a constant diagonal spin block. The hop matrices act on the spinor
/// factor.
fn assemble_dirs(
    field: &GaugeField,
    clifford: &CliffordRep,
    hop: &[ComplexMatrix],
    hop_dag: &[ComplexMatrix],
    diag: &ComplexMatrix,
) -> ComplexMatrix {
    let lat = field.lattice();
    let k = lat.k() as f64;
    let nf = field.fiber_dim();
    let ds = clifford.spinor_dim();
    let block = nf * ds;
    let dim = lat.site_count() * block;
    let half_k = Complex64::new(0.5 * k, 0.0);

    let mut out = ComplexMatrix::zeros(dim, dim);
    let write_block = |out: &mut ComplexMatrix,
                       row_site: usize,
                       col_site: usize,
                       link: &ComplexMatrix,
                       spin: &ComplexMatrix,
                       scale: Complex64| {
        for a in 0..nf {
            for b in 0..nf {
                let u = link.get(a, b);
                if u.re == 0.0 && u.im == 0.0 {
                    continue;
                }
                for s in 0..ds {
                    for t in 0..ds {
                        let v = spin.get(s, t);
                        if v.re == 0.0 && v.im == 0.0 {
                            continue;
                        }
                        out.add_to(
                            row_site * block + a * ds + s,
                            col_site * block + b * ds + t,
                            scale * u * v,
                        );
                    }
                }
            }
        }
    };

    let id_fiber = ComplexMatrix::identity(nf);
    for site in 0..lat.site_count() {
        write_block(
            &mut out,
            site,
            site,
            &id_fiber,
            diag,
            Complex64::new(1.0, 0.0),
        );
        for dir in 0..lat.n() {
            let fwd = lat.neighbor(site, dir);
            let link = field.link(site, dir);
            write_block(&mut out, site, fwd, &link.adjoint(), &hop_dag[dir], half_k);
            write_block(&mut out, fwd, site, link, &hop[dir], half_k);
        }
    }
    out
}

/// `D = sum_i c_i (nabla_i - nabla_i^*)/2 = sum_i c_i k (U_i^* - U_i)/2`.
///
/// Hermitian, and anticommutes with `gamma = Gamma (x) Id` exactly.
pub fn lattice_dirac(field: &GaugeField, clifford: &CliffordRep) -> Result<HermitianOperator> {
    check_shapes(field, clifford)?;
    let n = clifford.n();
    let ds = clifford.spinor_dim();
    // (x, x+e) carries +c_i, (x+e, x) carries -c_i; no diagonal
    let hop_dag: Vec<ComplexMatrix> = (0..n).map(|i| clifford.generator(i).clone()).collect();
    let hop: Vec<ComplexMatrix> = (0..n)
        .map(|i| clifford.generator(i).scale(Complex64::new(-1.0, 0.0)))
        .collect();
    let diag = ComplexMatrix::zeros(ds, ds);
    HermitianOperator::new(assemble_dirs(field, clifford, &hop, &hop_dag, &diag))
}

/// `W = sum_i (nabla_i + nabla_i^*)/2 = sum_i k (U_i^* + U_i - 2)/2`.
///
/// Hermitian and commutes with `gamma`; nonpositive for trivial fields.
pub fn wilson_term(field: &GaugeField, clifford: &CliffordRep) -> Result<HermitianOperator> {
    check_shapes(field, clifford)?;
    let n = clifford.n();
    let ds = clifford.spinor_dim();
    let id = ComplexMatrix::identity(ds);
    let hop: Vec<ComplexMatrix> = (0..n).map(|_| id.clone()).collect();
    let hop_dag = hop.clone();
    let k = field.lattice().k() as f64;
    let diag = id.scale(Complex64::new(-k * n as f64, 0.0));
    HermitianOperator::new(assemble_dirs(field, clifford, &hop, &hop_dag, &diag))
}

fn wilson_dirac_matrix(
    field: &GaugeField,
    clifford: &CliffordRep,
    r: f64,
    constant_mass: f64,
) -> ComplexMatrix {
    let n = clifford.n();
    let gamma = clifford.grading();
    let k = field.lattice().k() as f64;

    // per direction: (x, x+e): c_i + r Gamma; (x+e, x): -c_i + r Gamma
    let hop_dag: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            clifford
                .generator(i)
                .add(&gamma.scale(Complex64::new(r, 0.0)))
                .expect("shape")
        })
        .collect();
    let hop: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            clifford
                .generator(i)
                .scale(Complex64::new(-1.0, 0.0))
                .add(&gamma.scale(Complex64::new(r, 0.0)))
                .expect("shape")
        })
        .collect();
    // r gamma (-k n + mass-term)
    let diag = gamma.scale(Complex64::new(r * (constant_mass - k * n as f64), 0.0));
    assemble_dirs(field, clifford, &hop, &hop_dag, &diag)
}

/// The Wilson-Dirac operator `D + r gamma (W + m k)`.
pub fn wilson_dirac(
    field: &GaugeField,
    clifford: &CliffordRep,
    m: f64,
    r: f64,
) -> Result<WilsonDiracOperator> {
    check_shapes(field, clifford)?;
    if r <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "wilson coupling r must be positive, got {r}"
        )));
    }
    let k = field.lattice().k();
    let matrix = wilson_dirac_matrix(field, clifford, r, m * k as f64);
    Ok(WilsonDiracOperator {
        operator: HermitianOperator::new(matrix)?,
        k,
        n: clifford.n(),
        fiber_dim: field.fiber_dim(),
        mass: MassMode::Scaled { m, r },
    })
}

/// The fixed-mass variant `D + gamma (W + mass)`.
pub fn wilson_dirac_fixed_mass(
    field: &GaugeField,
    clifford: &CliffordRep,
    mass: f64,
) -> Result<WilsonDiracOperator> {
    check_shapes(field, clifford)?;
    let k = field.lattice().k();
    let matrix = wilson_dirac_matrix(field, clifford, 1.0, mass);
    Ok(WilsonDiracOperator {
        operator: HermitianOperator::new(matrix)?,
        k,
        n: clifford.n(),
        fiber_dim: field.fiber_dim(),
        mass: MassMode::Fixed { mass },
    })
}

/// Exact spectrum of the trivial-field Wilson-Dirac operator:
/// `+- k sqrt(sum_i sin^2 th_i + r^2 (sum_i (cos th_i - 1) + m)^2)` over the
/// momenta `th = 2 pi p / k`, each sign with multiplicity `spinor_dim / 2`.
pub fn free_spectrum_closed_form(
    n: usize,
    k: usize,
    m: f64,
    r: f64,
    spinor_dim: usize,
) -> Result<Vec<f64>> {
    if n == 0 || n % 2 != 0 || spinor_dim != 1 << (n / 2) {
        return Err(Error::InvalidArgument(format!(
            "need even n with spinor_dim = 2^(n/2), got n = {n}, spinor_dim = {spinor_dim}"
        )));
    }
    let sites = k.pow(n as u32);
    let mult = spinor_dim / 2;
    let mut out = Vec::with_capacity(sites * spinor_dim);
    for site in 0..sites {
        let mut rest = site;
        let mut theta = Vec::with_capacity(n);
        for _ in 0..n {
            theta.push(2.0 * std::f64::consts::PI * (rest % k) as f64 / k as f64);
            rest /= k;
        }
        let scalar = crate::symbol::f_dw_square_scalar(m, r, &theta);
        let root = scalar.sqrt();
        if root < 1e-10 {
            return Err(Error::DegenerateMass { m });
        }
        for _ in 0..mult {
            out.push(k as f64 * root);
            out.push(-(k as f64) * root);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}
