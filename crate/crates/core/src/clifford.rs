//! Complex Clifford algebra representations.
//!
//! Generators satisfy `c_i c_j + c_j c_i = -2 delta_ij`, `c_i^* = -c_i`, and
//! the grading `G` obeys `G^* = G`, `G^2 = 1`, `G c_i + c_i G = 0`. All
//! entries are exactly 0, +-1 or +-i, so the relations hold with zero
//! tolerance in floating point.
//!
//! The basis is fixed by recursive doubling from the n = 2 seed
//! `gamma_1 = sigma_x`, `gamma_2 = sigma_y`, grading `sigma_z`, with
//! `c_j = -i gamma_j`. The grading stays diagonal with the +1 block first, so
//! "positive chirality" is deterministic across runs. Any other basis differs
//! by a unitary conjugation and cannot affect spectral counts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Clone, Debug)]
pub struct CliffordRep {
    n: usize,
    spinor_dim: usize,
    generators: Vec<ComplexMatrix>,
    grading: ComplexMatrix,
    /// Sign `s` in `i^{n/2} c_1 ... c_n = s * G` for this basis.
    product_sign: f64,
}

impl CliffordRep {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spinor_dim(&self) -> usize {
        self.spinor_dim
    }

    /// Generator `c_i` (zero-based index).
    pub fn generator(&self, i: usize) -> &ComplexMatrix {
        &self.generators[i]
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn grading(&self) -> &ComplexMatrix {
        &self.grading
    }

    pub fn product_sign(&self) -> f64 {
        self.product_sign
    }
}

fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::two_by_two(
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::two_by_two(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 0.0),
    )
}

fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::real_diagonal(&[1.0, -1.0])
}

/// Construct the representation for even `n` with `2 <= n <= 8`.
pub fn clifford_rep(n: usize) -> Result<CliffordRep> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "clifford dimension must be even and positive, got {n}"
        )));
    }
    if n > 8 {
        return Err(Error::InvalidArgument(format!(
            "clifford dimension {n} above the practical cap 8"
        )));
    }

    // Hermitian Euclidean generators gamma_i with gamma_i gamma_j + gamma_j
    // gamma_i = 2 delta_ij, doubled two at a time.
    let mut gammas = vec![sigma_x(), sigma_y()];
    let mut grading = sigma_z();
    let mut dim = 2;
    while gammas.len() < n {
        let id = ComplexMatrix::identity(dim);
        let mut next: Vec<ComplexMatrix> =
            gammas.iter().map(|g| sigma_x().kron(g)).collect();
        next.push(sigma_x().kron(&grading));
        next.push(sigma_y().kron(&id));
        grading = sigma_z().kron(&id);
        dim *= 2;
        gammas = next;
    }

    let minus_i = Complex64::new(0.0, -1.0);
    let generators: Vec<ComplexMatrix> = gammas.iter().map(|g| g.scale(minus_i)).collect();

    // i^{n/2} c_1 ... c_n is +-grading; record which.
    let mut prod = ComplexMatrix::identity(dim);
    for c in &generators {
        prod = prod.matmul(c).expect("square product");
    }
    let phase = Complex64::new(0.0, 1.0).powu((n / 2) as u32);
    prod = prod.scale(phase);
    let plus = prod.sub(&grading).expect("shape").max_abs();
    let minus = prod.add(&grading).expect("shape").max_abs();
    let product_sign = if plus == 0.0 {
        1.0
    } else if minus == 0.0 {
        -1.0
    } else {
        return Err(Error::InvalidArgument(
            "grading is not proportional to the generator product".into(),
        ));
    };

    Ok(CliffordRep {
        n,
        spinor_dim: dim,
        generators,
        grading,
        product_sign,
    })
}
