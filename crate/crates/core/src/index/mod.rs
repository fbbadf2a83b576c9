//! Topological predictions and spectral index counts: the coefficients
//! I_n(m) computed two ways, index defects, lattice index counts, and the
//! one-time orientation sign calibration.

pub mod experiment;

use std::sync::OnceLock;

use crate::clifford::clifford_rep;
use crate::error::{Error, Result};
use crate::lattice::{flux_gauge_field_t2, product_gauge_field_t4};
use crate::linalg::{default_gap_tol, hermitian_eigenvalues, operator_norm, Spectrum};
use crate::quantizer::quantize;
use crate::symbol::Symbol;
use crate::wilson::wilson_dirac;

/// A mass value away from the walls {0, 2, ..., 2n}.
#[derive(Clone, Copy, Debug)]
pub struct Chamber {
    n: usize,
    m: f64,
}

const WALL_TOL: f64 = 1e-9;

impl Chamber {
    pub fn new(n: usize, m: f64) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "chamber dimension must be even and positive, got {n}"
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidArgument("mass must be finite".into()));
        }
        if m >= -WALL_TOL && m <= 2.0 * n as f64 + WALL_TOL {
            let nearest_wall = 2.0 * (m / 2.0).round();
            if (0.0..=2.0 * n as f64).contains(&nearest_wall)
                && (m - nearest_wall).abs() < WALL_TOL
            {
                return Err(Error::ChamberWall { n, m });
            }
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }
}

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// `I_n(m)`: zero outside [0, 2n]; on the chamber `2l < m < 2l + 2` it is
/// `sum_{i <= l} (-1)^i C(n, i)`.
pub fn i_coefficient(n: usize, m: f64) -> Result<i64> {
    let chamber = Chamber::new(n, m)?;
    let m = chamber.m();
    if m < 0.0 || m > 2.0 * n as f64 {
        return Ok(0);
    }
    let l = (m / 2.0).floor() as usize;
    let mut acc = 0i64;
    for i in 0..=l {
        acc += if i % 2 == 0 { 1 } else { -1 } * binomial(n, i);
    }
    Ok(acc)
}

/// The same integer as a sign sum over the corner momenta: enumerate
/// `p in {0, pi}^n` and add `(-1)^{#pi components}` whenever
/// `sum_i (cos theta_i(p) - 1) + m > 0`.
pub fn i_coefficient_sign_sum(n: usize, m: f64) -> Result<i64> {
    let chamber = Chamber::new(n, m)?;
    let m = chamber.m();
    let mut acc = 0i64;
    for corner in 0..(1usize << n) {
        let pis = corner.count_ones() as i64;
        // each pi component contributes cos(pi) - 1 = -2
        if m - 2.0 * pis as f64 > 0.0 {
            acc += if pis % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(acc)
}

/// `rank E_{>0}(H) - dim/2` for an even-dimensional hermitian operator.
pub fn index_defect(spectrum: &Spectrum, gap_tol: f64) -> Result<i64> {
    if spectrum.dim() % 2 != 0 {
        return Err(Error::Precondition(format!(
            "index defect needs an even dimension, got {}",
            spectrum.dim()
        )));
    }
    let above = spectrum.count_above(0.0, gap_tol)?;
    Ok(above as i64 - (spectrum.dim() / 2) as i64)
}

/// `rank E_{>threshold}(phi^k(f))`, guarded by the default gap tolerance.
pub fn lattice_index_count(f: &Symbol, k: usize, threshold: f64) -> Result<usize> {
    let q = quantize(f, k)?;
    let h = q.hermitian()?;
    let spectrum = hermitian_eigenvalues(&h)?;
    let gap_tol = default_gap_tol(operator_norm(h.matrix()));
    spectrum.count_above(threshold, gap_tol)
}

/// The orientation sign relating flux to the measured index defect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobalSign {
    pub epsilon: i64,
    /// Which experiment fixed it.
    pub provenance: &'static str,
}

static SIGN_T2: OnceLock<std::result::Result<GlobalSign, String>> = OnceLock::new();
static SIGN_T4: OnceLock<std::result::Result<GlobalSign, String>> = OnceLock::new();

/// Measure the defect of the (k = 12, q = 1, n = 2, m = 0.5, r = 1) flux
/// experiment once and fix `epsilon` to it. Every n = 2 prediction reuses the
/// same sign; repeated calls return the cached value.
pub fn calibrate_sign() -> Result<GlobalSign> {
    SIGN_T2
        .get_or_init(|| {
            let run = || -> Result<GlobalSign> {
                let field = flux_gauge_field_t2(12, 1)?;
                let cl = clifford_rep(2)?;
                let wd = wilson_dirac(&field, &cl, 0.5, 1.0)?;
                let spectrum = hermitian_eigenvalues(wd.operator())?;
                let gap_tol = default_gap_tol(spectrum.spectral_norm());
                let defect = index_defect(&spectrum, gap_tol)?;
                if defect != 1 && defect != -1 {
                    return Err(Error::Calibration { defect });
                }
                Ok(GlobalSign {
                    epsilon: defect,
                    provenance: "wilson-index n=2 k=12 q=1 m=0.5 r=1",
                })
            };
            run().map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::Config)
}

/// Same calibration for the n = 4 product-flux convention, at
/// (k = 4, q1 = q2 = 1, m = 0.5, r = 1).
pub fn calibrate_sign_t4() -> Result<GlobalSign> {
    SIGN_T4
        .get_or_init(|| {
            let run = || -> Result<GlobalSign> {
                let field = product_gauge_field_t4(4, 1, 1)?;
                let cl = clifford_rep(4)?;
                let wd = wilson_dirac(&field, &cl, 0.5, 1.0)?;
                let spectrum = hermitian_eigenvalues(wd.operator())?;
                let gap_tol = default_gap_tol(spectrum.spectral_norm());
                let defect = index_defect(&spectrum, gap_tol)?;
                if defect != 1 && defect != -1 {
                    return Err(Error::Calibration { defect });
                }
                Ok(GlobalSign {
                    epsilon: defect,
                    provenance: "wilson-index n=4 k=4 q1=q2=1 m=0.5 r=1",
                })
            };
            run().map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::Config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, HermitianOperator};

    #[test]
    fn i4_values_from_the_paper() {
        assert_eq!(i_coefficient(4, 1.0).unwrap(), 1);
        assert_eq!(i_coefficient(4, 3.0).unwrap(), -3);
        assert_eq!(i_coefficient(4, 5.0).unwrap(), 3);
        assert_eq!(i_coefficient(4, 7.0).unwrap(), -1);
        assert_eq!(i_coefficient(4, 9.0).unwrap(), 0);
        assert_eq!(i_coefficient(4, -1.0).unwrap(), 0);
    }

    #[test]
    fn i2_values() {
        assert_eq!(i_coefficient(2, 0.5).unwrap(), 1);
        assert_eq!(i_coefficient(2, 3.0).unwrap(), -1);
        assert_eq!(i_coefficient(2, 10.0).unwrap(), 0);
    }

    #[test]
    fn sign_sum_examples() {
        assert_eq!(i_coefficient_sign_sum(2, 1.0).unwrap(), 1);
        assert_eq!(i_coefficient_sign_sum(2, 3.0).unwrap(), -1);
        assert_eq!(i_coefficient_sign_sum(4, 0.5).unwrap(), 1);
    }

    #[test]
    fn both_formulas_agree_on_every_chamber() {
        for n in [2usize, 4, 6] {
            for l in 0..n {
                let m = 2.0 * l as f64 + 1.0;
                assert_eq!(
                    i_coefficient(n, m).unwrap(),
                    i_coefficient_sign_sum(n, m).unwrap(),
                    "n = {n}, m = {m}"
                );
            }
            for m in [-10.0, 10.0 + 2.0 * n as f64] {
                assert_eq!(
                    i_coefficient(n, m).unwrap(),
                    i_coefficient_sign_sum(n, m).unwrap(),
                    "n = {n}, m = {m}"
                );
            }
        }
    }

    #[test]
    fn walls_are_rejected() {
        for m in [0.0, 2.0, 4.0] {
            assert!(matches!(
                i_coefficient(2, m),
                Err(Error::ChamberWall { .. })
            ));
        }
        // outside [0, 2n] nothing is a wall
        assert!(Chamber::new(2, -2.0).is_ok());
        assert!(Chamber::new(2, 6.0).is_ok());
    }

    #[test]
    fn defect_examples() {
        let h = HermitianOperator::new(ComplexMatrix::real_diagonal(&[1.0, -1.0])).unwrap();
        let s = hermitian_eigenvalues(&h).unwrap();
        assert_eq!(index_defect(&s, 1e-8).unwrap(), 0);

        let h =
            HermitianOperator::new(ComplexMatrix::real_diagonal(&[1.0, 1.0, -1.0, 3.0])).unwrap();
        let s = hermitian_eigenvalues(&h).unwrap();
        assert_eq!(index_defect(&s, 1e-8).unwrap(), 1);
    }

    #[test]
    fn constant_diagonal_symbol_counts_sites() {
        let f = Symbol::constant(1, ComplexMatrix::real_diagonal(&[1.0, -1.0]));
        assert_eq!(lattice_index_count(&f, 9, 0.0).unwrap(), 9);
    }

    #[test]
    fn calibration_is_deterministic() {
        let a = calibrate_sign().unwrap();
        let b = calibrate_sign().unwrap();
        assert_eq!(a, b);
        assert!(a.epsilon == 1 || a.epsilon == -1);
    }
}
