//! The Bohr-Sommerfeld quantization map `phi^k`: symbols on
//! `T^n_x x T^n_theta` to operators on `l^2(B_k) (x) C^d`, with trace and
//! star-product residual diagnostics.
//!
//! The canonical orthonormal basis is identified with lattice delta
//! functions; all prequantum-line-bundle bookkeeping is absorbed into the
//! matrix-element formula: for each stored theta mode m, the entry at
//! `(c + m/k mod 1, c)` is the coefficient function evaluated at the midpoint
//! `c + m/(2k)`, a half-lattice point. The shift `b - c` is read off through
//! its minimal lift, which is unambiguous as long as `k > 2 M_theta`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, ComplexMatrix, HermitianOperator};
use crate::symbol::{moyal_coefficient, moyal_unitary_extension, Symbol};

/// The matrix of `phi^k(f)` together with its provenance.
#[derive(Clone, Debug)]
pub struct QuantizedOperator {
    matrix: ComplexMatrix,
    k: usize,
    provenance: (String, usize),
}

impl QuantizedOperator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// (symbol label, k)
    pub fn provenance(&self) -> (&str, usize) {
        (&self.provenance.0, self.provenance.1)
    }

    /// View as a hermitian operator; fails if the symbol was not
    /// self-adjoint.
    pub fn hermitian(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.matrix.clone())
    }
}

/// Number of lattice sites `k^n` and the index helpers for `B_k`.
fn site_count(n: usize, k: usize) -> usize {
    k.pow(n as u32)
}

fn site_coords(n: usize, k: usize, mut idx: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(idx % k);
        idx /= k;
    }
    out
}

fn site_index(k: usize, coords: &[usize]) -> usize {
    let mut idx = 0;
    for dir in (0..coords.len()).rev() {
        idx = idx * k + coords[dir] % k;
    }
    idx
}

/// `phi^k(f)`: entry `(c + m/k, c) = f_m(c + m/(2k))` for every stored theta
/// mode m of f.
pub fn quantize(f: &Symbol, k: usize) -> Result<QuantizedOperator> {
    let n = f.n();
    let d = f.d();
    let modes = f.modes()?;
    for mode in modes.keys() {
        let degree = mode.iter().map(|c| c.abs()).max().unwrap_or(0);
        if k as i64 <= 2 * degree {
            return Err(Error::Resolution {
                k,
                mode: mode.clone(),
                degree,
            });
        }
    }

    let sites = site_count(n, k);
    let dim = sites * d;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut x = vec![0.0; n];
    for col_site in 0..sites {
        let coords = site_coords(n, k, col_site);
        for (mode, coeff) in modes {
            let mut row_coords = Vec::with_capacity(n);
            for (c, m) in coords.iter().zip(mode) {
                let shifted = (*c as i64 + m).rem_euclid(k as i64) as usize;
                row_coords.push(shifted);
            }
            let row_site = site_index(k, &row_coords);
            for (i, (c, m)) in coords.iter().zip(mode).enumerate() {
                // canonical representative in [0, 1): both f and f^* then
                // evaluate a wrap-around entry at the identical point
                let half = (2 * *c as i64 + m).rem_euclid(2 * k as i64);
                x[i] = half as f64 / (2.0 * k as f64);
            }
            let block = coeff.eval(&x);
            for a in 0..d {
                for b in 0..d {
                    let v = block.get(a, b);
                    if v.re != 0.0 || v.im != 0.0 {
                        out.add_to(row_site * d + a, col_site * d + b, v);
                    }
                }
            }
        }
    }
    Ok(QuantizedOperator {
        matrix: out,
        k,
        provenance: (f.label().to_string(), k),
    })
}

/// `Trace(phi^k(f)) = sum_{b in B_k} tr f_0(b)`; for trig-poly zero modes of
/// x degree below k this equals `k^n` times the mean of `tr f_0` exactly.
pub fn quantizer_trace(f: &Symbol, k: usize) -> Result<Complex64> {
    let n = f.n();
    let modes = f.modes()?;
    let zero_mode = vec![0i64; n];
    let Some(coeff) = modes.get(&zero_mode) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let sites = site_count(n, k);
    let mut acc = Complex64::new(0.0, 0.0);
    for site in 0..sites {
        let x: Vec<f64> = site_coords(n, k, site)
            .into_iter()
            .map(|c| c as f64 / k as f64)
            .collect();
        acc += coeff.eval(&x).trace();
    }
    Ok(acc)
}

/// Operator-norm residual of the truncated star expansion:
/// `|phi^k(f) phi^k(g) - sum_{j <= l} (-i/k)^j phi^k(C_j(f, g))|`.
pub fn star_residual(f: &Symbol, g: &Symbol, order: usize, k: usize) -> Result<f64> {
    let deg = f.theta_degree()? + g.theta_degree()?;
    if k as i64 <= 2 * deg {
        return Err(Error::Precondition(format!(
            "star residual needs k > 2 (deg f + deg g) = {}, got k = {k}",
            2 * deg
        )));
    }
    let qf = quantize(f, k)?;
    let qg = quantize(g, k)?;
    let mut residual = qf.matrix().matmul(qg.matrix())?;
    let hbar = Complex64::new(0.0, -1.0 / k as f64);
    for j in 0..=order {
        let cj = moyal_coefficient(j, f, g)?;
        let qc = quantize(&cj, k)?;
        residual = residual.sub(&qc.matrix().scale(hbar.powu(j as u32)))?;
    }
    Ok(operator_norm(&residual))
}

/// Idempotency defect `|phi^k(p^{M,k})^2 - phi^k(p^{M,k})|` of the order-M
/// deformed projection built from a self-adjoint unitary u0 through
/// `p_hbar = (u_hbar + 1)/2` and `hbar = -i/k`.
pub fn deformed_projection_check(u0: &Symbol, order: usize, k: usize) -> Result<f64> {
    let ext = moyal_unitary_extension(u0, order)?;
    let hbar = Complex64::new(0.0, -1.0 / k as f64);

    let half = Complex64::new(0.5, 0.0);
    let one = Symbol::constant(u0.n(), ComplexMatrix::identity(u0.d()));
    let mut terms: Vec<(Complex64, Symbol)> = vec![(half, one)];
    for i in 0..=order {
        let ui = ext.coefficient(i)?;
        terms.push((half * hbar.powu(i as u32), ui));
    }
    let refs: Vec<(Complex64, &Symbol)> = terms.iter().map(|(w, s)| (*w, s)).collect();
    let p = Symbol::lincomb(&refs)?;

    let q = quantize(&p, k)?;
    let defect = q.matrix().matmul(q.matrix())?.sub(q.matrix())?;
    Ok(operator_norm(&defect))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::symbol::{poisson_bracket, TrigPoly};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(v: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_entries(1, 1, vec![v]).unwrap()
    }

    fn e_itheta() -> Symbol {
        Symbol::single_mode(1, vec![1], TrigPoly::constant(1, ComplexMatrix::identity(1)))
            .unwrap()
    }

    /// h(x) = 2 + cos(2 pi x)
    fn h_trig() -> TrigPoly {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0], scalar(c(2.0, 0.0)));
        terms.insert(vec![1], scalar(c(0.5, 0.0)));
        terms.insert(vec![-1], scalar(c(0.5, 0.0)));
        TrigPoly::from_terms(1, 1, terms).unwrap()
    }

    fn h_of_x() -> Symbol {
        Symbol::single_mode(1, vec![0], h_trig()).unwrap()
    }

    fn h_eval(x: f64) -> f64 {
        2.0 + (2.0 * std::f64::consts::PI * x).cos()
    }

    #[test]
    fn quantize_constant_is_identity() {
        let one = Symbol::constant(1, ComplexMatrix::identity(1));
        let q = quantize(&one, 5).unwrap();
        assert_eq!(q.dim(), 5);
        assert_eq!(
            q.matrix()
                .sub(&ComplexMatrix::identity(5))
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn quantize_base_function_is_diagonal() {
        let f = h_of_x();
        let q = quantize(&f, 7).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let v = q.matrix().get(i, j);
                if i == j {
                    assert!((v - c(h_eval(i as f64 / 7.0), 0.0)).norm() < 1e-14);
                } else {
                    assert_eq!(v, c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn quantize_single_mode_shifts_with_midpoint_rule() {
        // f = e^{i theta} h(x), k = 5: entry (c+1, c) = h(c/5 + 1/10)
        let f = e_itheta().mul(&h_of_x()).unwrap();
        let k = 5;
        let q = quantize(&f, k).unwrap();
        for col in 0..k {
            for row in 0..k {
                let v = q.matrix().get(row, col);
                if row == (col + 1) % k {
                    let mid = col as f64 / k as f64 + 1.0 / (2.0 * k as f64);
                    assert!((v - c(h_eval(mid), 0.0)).norm() < 1e-14);
                } else {
                    assert_eq!(v, c(0.0, 0.0), "({row}, {col})");
                }
            }
        }
    }

    #[test]
    fn adjoint_preservation_is_exact() {
        let f = e_itheta().mul(&h_of_x()).unwrap();
        for k in [5usize, 8, 13] {
            let q = quantize(&f, k).unwrap();
            let q_star = quantize(&f.adjoint(), k).unwrap();
            let diff = q_star
                .matrix()
                .sub(&q.matrix().adjoint())
                .unwrap()
                .max_abs();
            assert_eq!(diff, 0.0);
        }
    }

    #[test]
    fn band_support_is_structural() {
        let f = e_itheta()
            .mul(&h_of_x())
            .unwrap()
            .add(&h_of_x())
            .unwrap();
        let k = 9;
        let q = quantize(&f, k).unwrap();
        for row in 0..k {
            for col in 0..k {
                let v = q.matrix().get(row, col);
                let shift = (row as i64 - col as i64).rem_euclid(k as i64);
                let lift = if 2 * shift > k as i64 {
                    shift - k as i64
                } else {
                    shift
                };
                if !(lift == 0 || lift == 1) {
                    assert_eq!(v, c(0.0, 0.0), "entry off the stored bands");
                }
            }
        }
    }

    #[test]
    fn resolution_guard_names_the_mode() {
        let f = Symbol::single_mode(
            1,
            vec![3],
            TrigPoly::constant(1, ComplexMatrix::identity(1)),
        )
        .unwrap();
        match quantize(&f, 6) {
            Err(Error::Resolution { k, mode, degree }) => {
                assert_eq!(k, 6);
                assert_eq!(mode, vec![3]);
                assert_eq!(degree, 3);
            }
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn trace_of_unit_symbol() {
        let one = Symbol::constant(1, ComplexMatrix::identity(1));
        assert_eq!(quantizer_trace(&one, 7).unwrap(), c(7.0, 0.0));
    }

    #[test]
    fn trace_ignores_offdiagonal_modes() {
        let f = e_itheta().mul(&h_of_x()).unwrap();
        assert_eq!(quantizer_trace(&f, 11).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn trace_exactness_for_trig_polys() {
        // f0 = 2 + cos(2 pi x), k = 9: trace = 9 * mean = 18 exactly
        let f = h_of_x();
        let t = quantizer_trace(&f, 9).unwrap();
        assert!((t - c(18.0, 0.0)).norm() <= 1e-9);
    }

    #[test]
    fn star_residual_vanishes_for_base_functions() {
        let f = h_of_x();
        let g = Symbol::single_mode(1, vec![0], h_trig()).unwrap();
        for l in 0..=2 {
            let r = star_residual(&f, &g, l, 8).unwrap();
            assert!(r <= 1e-12, "order {l}: residual {r}");
        }
    }

    #[test]
    fn star_residual_order_zero_closed_form() {
        // f = e^{i theta}, g = h(x): residual at l = 0 is
        // max_c |h(c) - h(c + 1/(2k))|.
        let f = e_itheta();
        let g = h_of_x();
        for k in [8usize, 16] {
            let r = star_residual(&f, &g, 0, k).unwrap();
            let expected = (0..k)
                .map(|cidx| {
                    let x = cidx as f64 / k as f64;
                    (h_eval(x) - h_eval(x + 0.5 / k as f64)).abs()
                })
                .fold(0.0, f64::max);
            assert!((r - expected).abs() < 1e-10, "k = {k}: {r} vs {expected}");
        }
    }

    #[test]
    fn star_residual_second_order_decay() {
        let f = e_itheta();
        let g = h_of_x();
        let r8 = star_residual(&f, &g, 1, 8).unwrap();
        let r64 = star_residual(&f, &g, 1, 64).unwrap();
        let slope = (r64 / r8).ln() / (64f64 / 8.0).ln();
        assert!(slope <= -1.8, "slope {slope}");
    }

    #[test]
    fn commutator_matches_poisson_bracket_sign() {
        // |[phi(f), phi(g)] + (i/k) phi({f,g})| = O(k^-2); with the opposite
        // bracket sign the residual is O(k^-1). This pins the convention.
        let f = e_itheta();
        let g = h_of_x();
        let pb = poisson_bracket(&f, &g).unwrap();
        let mut prev_scaled = f64::INFINITY;
        for k in [8usize, 16, 32, 64] {
            let qf = quantize(&f, k).unwrap();
            let qg = quantize(&g, k).unwrap();
            let comm = qf
                .matrix()
                .matmul(qg.matrix())
                .unwrap()
                .sub(&qg.matrix().matmul(qf.matrix()).unwrap())
                .unwrap();
            let qpb = quantize(&pb, k).unwrap();
            let right = comm
                .add(&qpb.matrix().scale(c(0.0, 1.0 / k as f64)))
                .unwrap();
            let wrong = comm
                .sub(&qpb.matrix().scale(c(0.0, 1.0 / k as f64)))
                .unwrap();
            let right_norm = operator_norm(&right) * (k * k) as f64;
            let wrong_norm = operator_norm(&wrong) * k as f64;
            assert!(right_norm < 40.0, "k = {k}: scaled residual {right_norm}");
            assert!(wrong_norm > 1.0, "k = {k}: flipped sign too small");
            assert!(right_norm <= prev_scaled * 1.5 + 1.0);
            prev_scaled = right_norm;
        }
    }

    #[test]
    fn operator_norm_converges_to_sup_norm() {
        // |phi^k(f)| -> |f|_C0 (Def. of strict quantization); within 5% by
        // k = 64 for f = cos theta + cos 2 pi x with sup norm 2.
        let half = c(0.5, 0.0);
        let e_plus =
            Symbol::single_mode(1, vec![1], TrigPoly::constant(1, ComplexMatrix::identity(1)))
                .unwrap();
        let e_minus = e_plus.adjoint();
        let cos_theta = Symbol::lincomb(&[(half, &e_plus), (half, &e_minus)]).unwrap();
        let f = cos_theta.add(&h_of_x()).unwrap(); // h = 2 + cos: shift sup to 4
        let sup = 4.0;
        for k in [8usize, 16, 32, 64] {
            let q = quantize(&f, k).unwrap();
            let norm = operator_norm(q.matrix());
            assert!(norm <= sup + 1e-9, "band bound");
            if k == 64 {
                assert!((sup - norm) / sup < 0.05, "k = 64: |phi(f)| = {norm}");
            }
        }
    }

    #[test]
    fn deformed_projection_constant_case() {
        let u0 = Symbol::constant(1, ComplexMatrix::real_diagonal(&[1.0, -1.0]));
        let d = deformed_projection_check(&u0, 1, 16).unwrap();
        assert!(d <= 1e-12);
    }
}
