//! Moyal star-product coefficients, the Poisson bracket, and the order-M
//! star-unitary extension of a self-adjoint unitary symbol.
//!
//! The coefficients are
//! `C_j(f, g) = (1 / (j! 2^j)) mu Pi^j (f (x) g)` with
//! `Pi = sum_i (d_{x_i} (x) d_{theta_i} - d_{theta_i} (x) d_{x_i})`
//! and `mu` the pointwise matrix product, so `C_0 = fg` and
//! `C_1 = (1/2) {f, g}` on scalars.
//!
//! Every term of `C_j` carries exactly j x-derivatives, so the factor
//! `(2 pi)^j` from d/dx on `e^{2 pi i l x}` is uniform across the terms.
//! The pipeline computes with the reduced frequency (mode number) and applies
//! `(2 pi)^j` to the assembled coefficients. For symbols whose Fourier data
//! consists of small rationals this keeps the algebraic cancellations exact
//! in floating point, which is what lets the extension verify its residuals
//! against literal zero.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::Symbol;

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// `mu Pi^j (f (x) g)` scaled by `1/(j! 2^j)`, in reduced x-frequency units.
pub(crate) fn moyal_coefficient_reduced(j: usize, f: &Symbol, g: &Symbol) -> Result<Symbol> {
    if f.n() != g.n() || f.d() != g.d() {
        return Err(Error::Dimension("symbol shape mismatch".into()));
    }
    let n = f.n();
    let mut terms: Vec<(Symbol, Symbol, f64)> = vec![(f.clone(), g.clone(), 1.0)];
    for _ in 0..j {
        let mut next = Vec::with_capacity(terms.len() * 2 * n);
        for (left, right, sign) in &terms {
            for axis in 0..n {
                next.push((
                    left.x_derivative_reduced(axis)?,
                    right.theta_derivative(axis)?,
                    *sign,
                ));
                next.push((
                    left.theta_derivative(axis)?,
                    right.x_derivative_reduced(axis)?,
                    -*sign,
                ));
            }
        }
        terms = next;
    }
    let weight = 1.0 / (factorial(j) * 2f64.powi(j as i32));
    let mut out = Symbol::constant(
        n,
        crate::linalg::ComplexMatrix::zeros(f.d(), f.d()),
    );
    for (left, right, sign) in &terms {
        let prod = left.mul(right)?.scale(Complex64::new(sign * weight, 0.0))?;
        out = out.add(&prod)?;
    }
    Ok(out)
}

/// The j-th Moyal coefficient `C_j(f, g)`.
pub fn moyal_coefficient(j: usize, f: &Symbol, g: &Symbol) -> Result<Symbol> {
    let scale = (2.0 * PI).powi(j as i32);
    moyal_coefficient_reduced(j, f, g)?.scale(Complex64::new(scale, 0.0))
}

/// `{f, g} = sum_i (d_{x_i} f d_{theta_i} g - d_{theta_i} f d_{x_i} g)`.
///
/// The sign convention is pinned by the quantizer: the expansion
/// `phi^k(f) phi^k(g) = phi^k(C_0) + (-i/k) phi^k(C_1) + O(k^-2)` holds with
/// `C_1 - C_1^t = {.,.}` exactly for this bracket (checked in the quantizer
/// tests).
pub fn poisson_bracket(f: &Symbol, g: &Symbol) -> Result<Symbol> {
    moyal_coefficient(1, f, g)?.scale(Complex64::new(2.0, 0.0))
}

/// Truncated star-unitary extension `u_0 + u_1 hbar + ... + u_M hbar^M`.
///
/// Coefficients are stored in reduced x-frequency units; [`Self::coefficient`]
/// returns the true symbols `u_i` (scaled by `(2 pi)^i`), and
/// [`Self::residual_order`] re-expands the star square in reduced units where
/// the algebraic cancellations of the construction are exact.
#[derive(Clone, Debug)]
pub struct HbarSeriesSymbol {
    reduced: Vec<Symbol>,
}

impl HbarSeriesSymbol {
    pub fn order(&self) -> usize {
        self.reduced.len() - 1
    }

    /// The true coefficient `u_i`.
    pub fn coefficient(&self, i: usize) -> Result<Symbol> {
        self.reduced[i].scale(Complex64::new((2.0 * PI).powi(i as i32), 0.0))
    }

    /// Order-`order` coefficient of `u * u - 1` (star square, truncated),
    /// computed in reduced units.
    pub fn residual_order(&self, order: usize) -> Result<Symbol> {
        star_square_order(&self.reduced, order)
    }
}

/// Order-`order` coefficient of the star square of a truncated hbar series,
/// minus 1 at order zero: `sum_{a+b+j = order} C_j(u_a, u_b) - [order = 0]`.
fn star_square_order(u: &[Symbol], order: usize) -> Result<Symbol> {
    let n = u[0].n();
    let d = u[0].d();
    let mut acc = Symbol::constant(n, crate::linalg::ComplexMatrix::zeros(d, d));
    for a in 0..u.len() {
        for b in 0..u.len() {
            if a + b > order {
                continue;
            }
            let j = order - a - b;
            acc = acc.add(&moyal_coefficient_reduced(j, &u[a], &u[b])?)?;
        }
    }
    if order == 0 {
        let one = Symbol::constant(n, crate::linalg::ComplexMatrix::identity(d));
        acc = acc.add(&one.scale(Complex64::new(-1.0, 0.0))?)?;
    }
    Ok(acc)
}

/// Extend a self-adjoint unitary `u0` (pointwise `u0^2 = 1`) to a truncated
/// star-unitary series through order M.
///
/// The update at each order is `u_M = -(1/2) u_0 v` where v is the order-M
/// residual of the star square of the partial sum; the construction makes the
/// residuals at orders 1..M vanish identically as symbols and gives the
/// alternating self-adjointness `u_M = (-1)^M u_M^*`.
pub fn moyal_unitary_extension(u0: &Symbol, order: usize) -> Result<HbarSeriesSymbol> {
    if !u0.is_self_adjoint(8, 1e-12)? {
        return Err(Error::Precondition(
            "u0 must be self-adjoint".into(),
        ));
    }
    let square_defect = star_square_order(std::slice::from_ref(u0), 0)?.fourier_max_abs()?;
    if square_defect > 1e-10 {
        return Err(Error::Precondition(format!(
            "u0^2 differs from 1 by {square_defect:.3e} (needs <= 1e-10)"
        )));
    }

    let mut reduced = vec![u0.clone()];
    let minus_half = Complex64::new(-0.5, 0.0);
    for m in 1..=order {
        let v = star_square_order(&reduced, m)?;
        let um = u0.mul(&v)?.scale(minus_half)?;
        reduced.push(um);
    }
    Ok(HbarSeriesSymbol { reduced })
}
