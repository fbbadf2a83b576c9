//! Symbol constructors: the Wilson-Dirac symbol, a Chern-number-one test
//! projection on the two-torus, a trig-poly self-adjoint unitary fixture, and
//! pointwise positive-part projections.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, HermitianOperator};
use crate::symbol::{Coefficient, Mode, Symbol, TrigPoly};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The Wilson-Dirac symbol
/// `f_DW = sum_i { -i c_i sin theta_i + r Gamma (cos theta_i - 1) } + r m Gamma`,
/// x-independent with theta degree one.
pub fn f_dw_symbol(clifford: &CliffordRep, m: f64, r: f64) -> Result<Symbol> {
    if r <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "wilson coupling r must be positive, got {r}"
        )));
    }
    let n = clifford.n();
    let gamma = clifford.grading();
    let mut modes: BTreeMap<Mode, ComplexMatrix> = BTreeMap::new();
    // sin theta_i = (e^{i theta_i} - e^{-i theta_i}) / 2i,
    // cos theta_i = (e^{i theta_i} + e^{-i theta_i}) / 2
    for i in 0..n {
        let ci = clifford.generator(i);
        let plus: ComplexMatrix = ci
            .scale(c(-0.5, 0.0))
            .add(&gamma.scale(c(0.5 * r, 0.0)))?;
        let minus: ComplexMatrix = ci
            .scale(c(0.5, 0.0))
            .add(&gamma.scale(c(0.5 * r, 0.0)))?;
        let mut mode_plus = vec![0i64; n];
        mode_plus[i] = 1;
        let mut mode_minus = vec![0i64; n];
        mode_minus[i] = -1;
        modes.insert(mode_plus, plus);
        modes.insert(mode_minus, minus);
    }
    modes.insert(
        vec![0; n],
        gamma.scale(c(r * (m - n as f64), 0.0)),
    );

    let series = modes
        .into_iter()
        .map(|(mode, mat)| (mode, Coefficient::Trig(TrigPoly::constant(n, mat))))
        .collect();
    Ok(Symbol::from_series(n, clifford.spinor_dim(), series)?
        .with_label(format!("f_DW(n={n}, m={m}, r={r})")))
}

/// The scalar square of the Wilson-Dirac symbol:
/// `f_DW^2 = (sum_i sin^2 theta_i + r^2 (sum_i (cos theta_i - 1) + m)^2) Id`.
pub fn f_dw_square_scalar(m: f64, r: f64, theta: &[f64]) -> f64 {
    let sin2: f64 = theta.iter().map(|t| t.sin().powi(2)).sum();
    let cossum: f64 = theta.iter().map(|t| t.cos() - 1.0).sum();
    sin2 + r * r * (cossum + m).powi(2)
}

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, flat to all orders at both
/// ends.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Profile data for [`test_projection_t2`]; kept private but deterministic.
#[derive(Clone, Copy)]
struct BumpProfile {
    width: f64,
}

impl BumpProfile {
    const RISE_START: f64 = 0.05;
    const FALL_START: f64 = 0.55;

    /// f: T^1 -> [0, 1], 0 near x = 0, rising to 1 over [rise, rise + w],
    /// falling back over [fall, fall + w].
    fn f(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        let rise = smoothstep((x - Self::RISE_START) / self.width);
        let fall = smoothstep((x - Self::FALL_START) / self.width);
        rise - fall
    }

    /// sqrt(f(1-f)) restricted to the rising band.
    fn g(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        if x >= Self::RISE_START && x <= Self::RISE_START + self.width {
            let f = self.f(x);
            (f * (1.0 - f)).max(0.0).sqrt()
        } else {
            0.0
        }
    }

    /// sqrt(f(1-f)) restricted to the falling band.
    fn h(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        if x >= Self::FALL_START && x <= Self::FALL_START + self.width {
            let f = self.f(x);
            (f * (1.0 - f)).max(0.0).sqrt()
        } else {
            0.0
        }
    }
}

/// Rank-one projection-valued symbol on `T^1_x x T^1_theta` in M_2,
/// realizing a class with first Chern number +-1:
/// `p = [[f, a], [a^*, 1 - f]]` with `a = g(x) + h(x) e^{i theta}`,
/// `g h = 0` and `g^2 + h^2 = f (1 - f)`, so `p^2 = p` pointwise exactly.
///
/// `smoothing` is the transition width of the mollified profile; the
/// quantizer resolves the profile once k is a few times `1/smoothing`, so
/// smaller widths push the convergence threshold up.
pub fn test_projection_t2(smoothing: f64) -> Result<Symbol> {
    if !(0.01..=0.45).contains(&smoothing) {
        return Err(Error::InvalidArgument(format!(
            "smoothing width {smoothing} outside (0.01, 0.45)"
        )));
    }
    let profile = BumpProfile { width: smoothing };

    let diag = {
        let p = profile;
        Coefficient::Sampled {
            d: 2,
            rule: Arc::new(move |x: &[f64]| {
                let f = p.f(x[0]);
                ComplexMatrix::from_entries(
                    2,
                    2,
                    vec![c(f, 0.0), c(p.g(x[0]), 0.0), c(p.g(x[0]), 0.0), c(1.0 - f, 0.0)],
                )
                .expect("finite")
            }),
        }
    };
    let upper = {
        let p = profile;
        Coefficient::Sampled {
            d: 2,
            rule: Arc::new(move |x: &[f64]| {
                ComplexMatrix::from_entries(
                    2,
                    2,
                    vec![c(0.0, 0.0), c(p.h(x[0]), 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                )
                .expect("finite")
            }),
        }
    };
    let lower = {
        let p = profile;
        Coefficient::Sampled {
            d: 2,
            rule: Arc::new(move |x: &[f64]| {
                ComplexMatrix::from_entries(
                    2,
                    2,
                    vec![c(0.0, 0.0), c(0.0, 0.0), c(p.h(x[0]), 0.0), c(0.0, 0.0)],
                )
                .expect("finite")
            }),
        }
    };

    let mut modes = BTreeMap::new();
    modes.insert(vec![0i64], diag);
    modes.insert(vec![1i64], upper);
    modes.insert(vec![-1i64], lower);
    Ok(Symbol::from_series(1, 2, modes)?
        .with_label(format!("test_projection_t2(w={smoothing})")))
}

/// Self-adjoint unitary trig-poly symbol on `T^1_x x T^1_theta`:
///
/// `u = [[cos 2 pi x, i sin(2 pi x) e^{i theta}],
///       [-i sin(2 pi x) e^{-i theta}, -cos 2 pi x]]`
///
/// a Bloch-sphere-valued field, so `u^2 = 1` holds exactly; every Fourier
/// coefficient is a half, so the star-unitary extension's residual
/// cancellations stay exact in floating point on this symbol.
pub fn bloch_symbol_t2() -> Symbol {
    // i sin(2 pi x) = (e^{2 pi i x} - e^{-2 pi i x}) / 2
    let mut modes: BTreeMap<Mode, Coefficient> = BTreeMap::new();

    // theta mode 0: cos(2 pi x) sigma_z
    let mut zero = BTreeMap::new();
    zero.insert(
        vec![1i64],
        ComplexMatrix::from_entries(2, 2, vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)])
            .expect("finite"),
    );
    zero.insert(
        vec![-1i64],
        ComplexMatrix::from_entries(2, 2, vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)])
            .expect("finite"),
    );
    modes.insert(
        vec![0i64],
        Coefficient::Trig(TrigPoly::from_terms(1, 2, zero).expect("shape")),
    );

    // theta mode +1: upper entry (e^{2 pi i x} - e^{-2 pi i x}) / 2
    let mut plus = BTreeMap::new();
    plus.insert(
        vec![1i64],
        ComplexMatrix::from_entries(2, 2, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .expect("finite"),
    );
    plus.insert(
        vec![-1i64],
        ComplexMatrix::from_entries(2, 2, vec![c(0.0, 0.0), c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .expect("finite"),
    );
    modes.insert(
        vec![1i64],
        Coefficient::Trig(TrigPoly::from_terms(1, 2, plus).expect("shape")),
    );

    // theta mode -1: lower entry, adjoint of the above
    let mut minus = BTreeMap::new();
    minus.insert(
        vec![-1i64],
        ComplexMatrix::from_entries(2, 2, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)])
            .expect("finite"),
    );
    minus.insert(
        vec![1i64],
        ComplexMatrix::from_entries(2, 2, vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0), c(0.0, 0.0)])
            .expect("finite"),
    );
    modes.insert(
        vec![-1i64],
        Coefficient::Trig(TrigPoly::from_terms(1, 2, minus).expect("shape")),
    );

    Symbol::from_series(1, 2, modes)
        .expect("shape")
        .with_label("bloch_unitary_t2")
}

/// Pointwise `(f (f^* f)^{-1/2} + 1) / 2` via eigendecomposition: the
/// spectral projection onto the positive eigenspace of a self-adjoint
/// invertible symbol.
pub fn positive_part_projection(f: &Symbol) -> Result<Symbol> {
    let inner = f.clone();
    let d = f.d();
    let rule = move |x: &[f64], theta: &[f64]| -> Result<ComplexMatrix> {
        let value = inner.eval(x, theta)?;
        let herm = HermitianOperator::new(value)?;
        let spectrum = hermitian_eigen(&herm)?;
        let min_abs = spectrum.min_abs();
        if min_abs <= 1e-8 {
            return Err(Error::NearSingular {
                x: x.to_vec(),
                theta: theta.to_vec(),
                min_abs,
            });
        }
        let v = spectrum.eigenvectors().expect("vectors requested");
        let signs: Vec<f64> = spectrum
            .eigenvalues()
            .iter()
            .map(|l| if *l > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let proj = v
            .matmul(&ComplexMatrix::real_diagonal(&signs))?
            .matmul(&v.adjoint())?;
        Ok(proj)
    };
    Ok(Symbol::from_pointwise(f.n(), d, Arc::new(rule))
        .with_label(format!("positive_part({})", f.label())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::clifford_rep;
    use crate::symbol::grid_points;
    use std::f64::consts::PI;

    #[test]
    fn f_dw_at_zero_theta_is_half_gamma() {
        let cl = clifford_rep(2).unwrap();
        let f = f_dw_symbol(&cl, 0.5, 1.0).unwrap();
        let v = f.eval(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let expected = cl.grading().scale(c(0.5, 0.0));
        assert!(v.sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn f_dw_is_self_adjoint() {
        let cl = clifford_rep(2).unwrap();
        let f = f_dw_symbol(&cl, 0.5, 1.0).unwrap();
        assert!(f.is_self_adjoint(4, 1e-12).unwrap());
    }

    #[test]
    fn f_dw_square_identity_on_grid() {
        let cl = clifford_rep(2).unwrap();
        for (m, r) in [(0.5, 1.0), (3.0, 0.7), (4.5, 1.0)] {
            let f = f_dw_symbol(&cl, m, r).unwrap();
            let sq = f.mul(&f).unwrap();
            for i in 0..32 {
                for j in 0..32 {
                    let theta = [2.0 * PI * i as f64 / 32.0, 2.0 * PI * j as f64 / 32.0];
                    let v = sq.eval(&[0.0, 0.0], &theta).unwrap();
                    let scalar = f_dw_square_scalar(m, r, &theta);
                    let expected = ComplexMatrix::identity(2).scale(c(scalar, 0.0));
                    assert!(
                        v.sub(&expected).unwrap().max_abs() <= 1e-12,
                        "theta = {theta:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn f_dw_square_minimum_at_origin() {
        // n = 2, m = 0.5, r = 1: min over the theta grid is 0.25 at theta = 0
        let mut min = f64::INFINITY;
        let mut argmin = [0.0, 0.0];
        for i in 0..64 {
            for j in 0..64 {
                let theta = [2.0 * PI * i as f64 / 64.0, 2.0 * PI * j as f64 / 64.0];
                let s = f_dw_square_scalar(0.5, 1.0, &theta);
                if s < min {
                    min = s;
                    argmin = theta;
                }
            }
        }
        assert!((min - 0.25).abs() < 1e-12);
        assert_eq!(argmin, [0.0, 0.0]);
    }

    #[test]
    fn f_dw_degenerate_masses_touch_zero() {
        // m in {0, 2, 4} makes the scalar square vanish at a corner of
        // {0, pi}^2, so pointwise invertibility fails there.
        for (m, corner) in [
            (0.0, [0.0, 0.0]),
            (2.0, [PI, 0.0]),
            (4.0, [PI, PI]),
        ] {
            let s = f_dw_square_scalar(m, 1.0, &corner);
            assert!(s < 1e-25, "m = {m}");
        }
    }

    #[test]
    fn test_projection_is_projection_on_grid() {
        let p = test_projection_t2(0.35).unwrap();
        for x in grid_points(1, 64) {
            for jt in 0..64 {
                let theta = [2.0 * PI * jt as f64 / 64.0];
                let v = p.eval(&x, &theta).unwrap();
                let sq = v.matmul(&v).unwrap();
                assert!(sq.sub(&v).unwrap().max_abs() <= 1e-12);
                // rank one: trace 1 everywhere
                assert!((v.trace() - c(1.0, 0.0)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn test_projection_is_self_adjoint() {
        let p = test_projection_t2(0.35).unwrap();
        assert!(p.is_self_adjoint(32, 1e-12).unwrap());
    }

    #[test]
    fn bloch_symbol_squares_to_one_exactly() {
        let u = bloch_symbol_t2();
        assert!(u.is_self_adjoint(16, 1e-15).unwrap());
        let one = Symbol::constant(1, ComplexMatrix::identity(2));
        let sq = u.mul(&u).unwrap();
        let diff = sq.add(&one.scale(c(-1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(diff.fourier_max_abs().unwrap(), 0.0);
    }

    #[test]
    fn positive_part_of_grading_is_chirality_projector() {
        let cl = clifford_rep(2).unwrap();
        let f = Symbol::constant(2, cl.grading().clone());
        let p = positive_part_projection(&f).unwrap();
        let v = p.eval(&[0.1, 0.2], &[0.3, 0.4]).unwrap();
        let expected = ComplexMatrix::real_diagonal(&[1.0, 0.0]);
        assert!(v.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn positive_part_of_constant_diagonal() {
        let f = Symbol::constant(1, ComplexMatrix::real_diagonal(&[3.0, -2.0]));
        let p = positive_part_projection(&f).unwrap();
        let v = p.eval(&[0.0], &[0.0]).unwrap();
        let expected = ComplexMatrix::real_diagonal(&[1.0, 0.0]);
        assert!(v.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn positive_part_of_f_dw_has_unit_trace() {
        let cl = clifford_rep(2).unwrap();
        let f = f_dw_symbol(&cl, 0.5, 1.0).unwrap();
        let p = positive_part_projection(&f).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let theta = [2.0 * PI * i as f64 / 8.0, 2.0 * PI * j as f64 / 8.0];
                let v = p.eval(&[0.0, 0.0], &theta).unwrap();
                assert!((v.trace() - c(1.0, 0.0)).norm() < 1e-10, "theta {theta:?}");
            }
        }
    }

    #[test]
    fn positive_part_reports_singular_location() {
        let f = Symbol::constant(1, ComplexMatrix::real_diagonal(&[1e-12, -2.0]));
        let p = positive_part_projection(&f).unwrap();
        assert!(matches!(
            p.eval(&[0.25], &[0.5]),
            Err(Error::NearSingular { .. })
        ));
    }
}
