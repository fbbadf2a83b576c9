//! Matrix-valued symbols on the torus `T^n_x x T^n_theta`, stored as finite
//! Fourier series in theta whose coefficients are functions of x.
//!
//! Coefficient functions come in two shapes: exact trigonometric polynomials
//! in x (closed under products and derivatives, so the Moyal calculus on them
//! is exact), or sampled rules evaluated pointwise (used for mollified data
//! such as the test projection). Smooth non-polynomial data can be projected
//! onto trigonometric polynomials with [`Symbol::to_trig`], which is
//! spectrally accurate.
//!
//! A third, pointwise-only shape carries grid-evaluated symbols such as
//! spectral projections; those support evaluation but no Fourier data.

mod builders;
mod chern;
mod moyal;

pub use builders::{
    bloch_symbol_t2, f_dw_square_scalar, f_dw_symbol, positive_part_projection,
    test_projection_t2,
};
pub use chern::chern_integral;
pub use moyal::{moyal_coefficient, moyal_unitary_extension, poisson_bracket, HbarSeriesSymbol};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub type Mode = Vec<i64>;

/// Finite Fourier series in x with matrix coefficients.
#[derive(Clone, Debug)]
pub struct TrigPoly {
    n: usize,
    d: usize,
    terms: BTreeMap<Mode, ComplexMatrix>,
}

impl TrigPoly {
    pub fn zero(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, matrix: ComplexMatrix) -> Self {
        let d = matrix.rows();
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; n], matrix);
        Self { n, d, terms }
    }

    pub fn from_terms(n: usize, d: usize, terms: BTreeMap<Mode, ComplexMatrix>) -> Result<Self> {
        for (l, m) in &terms {
            if l.len() != n {
                return Err(Error::Dimension(format!(
                    "x mode {l:?} does not have {n} components"
                )));
            }
            if m.rows() != d || m.cols() != d {
                return Err(Error::Dimension(format!(
                    "coefficient for mode {l:?} is {}x{}, expected {d}x{d}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { n, d, terms })
    }

    pub fn terms(&self) -> &BTreeMap<Mode, ComplexMatrix> {
        &self.terms
    }

    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .flat_map(|l| l.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Exact finite sum `sum_l M_l e^{2 pi i <l, x>}`.
    pub fn eval(&self, x: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (l, m) in &self.terms {
            let phase: f64 = l
                .iter()
                .zip(x)
                .map(|(li, xi)| 2.0 * PI * (*li as f64) * xi)
                .sum();
            let e = Complex64::from_polar(1.0, phase);
            out = out.add(&m.scale(e)).expect("shape");
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut terms = self.terms.clone();
        for (l, m) in &other.terms {
            match terms.get_mut(l) {
                Some(existing) => *existing = existing.add(m)?,
                None => {
                    terms.insert(l.clone(), m.clone());
                }
            }
        }
        Ok(Self {
            n: self.n,
            d: self.d,
            terms,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(l, m)| (l.clone(), m.scale(s)))
                .collect(),
        }
    }

    /// Pointwise matrix product; x degrees add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut terms: BTreeMap<Mode, ComplexMatrix> = BTreeMap::new();
        for (l1, m1) in &self.terms {
            for (l2, m2) in &other.terms {
                let l: Mode = l1.iter().zip(l2).map(|(a, b)| a + b).collect();
                let prod = m1.matmul(m2)?;
                match terms.get_mut(&l) {
                    Some(existing) => *existing = existing.add(&prod)?,
                    None => {
                        terms.insert(l, prod);
                    }
                }
            }
        }
        Ok(Self {
            n: self.n,
            d: self.d,
            terms,
        })
    }

    /// `(f^*)_l = (f_{-l})^*`.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(l, m)| (l.iter().map(|c| -c).collect(), m.adjoint()))
            .collect();
        Self {
            n: self.n,
            d: self.d,
            terms,
        }
    }

    /// d/dx_axis with the mode number as the frequency (factor `i l`). The
    /// true derivative carries an extra 2 pi per order; the Moyal pipeline
    /// applies those powers on assembled coefficients so that small-rational
    /// Fourier data stays exact through cancellations.
    pub(crate) fn x_derivative_reduced(&self, axis: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(l, _)| l[axis] != 0)
            .map(|(l, m)| {
                (
                    l.clone(),
                    m.scale(Complex64::new(0.0, l[axis] as f64)),
                )
            })
            .collect();
        Self {
            n: self.n,
            d: self.d,
            terms,
        }
    }

    pub fn kron_left(&self, left: &ComplexMatrix) -> Self {
        Self {
            n: self.n,
            d: left.rows() * self.d,
            terms: self
                .terms
                .iter()
                .map(|(l, m)| (l.clone(), left.kron(m)))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|m| m.max_abs()).fold(0.0, f64::max)
    }

    /// Mean over the torus (the l = 0 coefficient).
    pub fn mean(&self) -> ComplexMatrix {
        self.terms
            .get(&vec![0; self.n])
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.d, self.d))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::Dimension(format!(
                "trig poly shape mismatch: (n={}, d={}) vs (n={}, d={})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }
}

type SampledRule = Arc<dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync>;
type PointwiseRule = Arc<dyn Fn(&[f64], &[f64]) -> Result<ComplexMatrix> + Send + Sync>;

/// A coefficient function of x for one theta mode.
#[derive(Clone)]
pub enum Coefficient {
    Trig(TrigPoly),
    Sampled { d: usize, rule: SampledRule },
}

impl Coefficient {
    pub fn eval(&self, x: &[f64]) -> ComplexMatrix {
        match self {
            Coefficient::Trig(p) => p.eval(x),
            Coefficient::Sampled { rule, .. } => rule(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Coefficient::Trig(p) => p.d,
            Coefficient::Sampled { d, .. } => *d,
        }
    }

    fn scale(&self, s: Complex64) -> Coefficient {
        match self {
            Coefficient::Trig(p) => Coefficient::Trig(p.scale(s)),
            Coefficient::Sampled { d, rule } => {
                let rule = rule.clone();
                Coefficient::Sampled {
                    d: *d,
                    rule: Arc::new(move |x| rule(x).scale(s)),
                }
            }
        }
    }

    fn add(&self, other: &Coefficient) -> Result<Coefficient> {
        match (self, other) {
            (Coefficient::Trig(a), Coefficient::Trig(b)) => Ok(Coefficient::Trig(a.add(b)?)),
            _ => {
                if self.dim() != other.dim() {
                    return Err(Error::Dimension("coefficient dimension mismatch".into()));
                }
                let a = self.clone();
                let b = other.clone();
                let d = self.dim();
                Ok(Coefficient::Sampled {
                    d,
                    rule: Arc::new(move |x| a.eval(x).add(&b.eval(x)).expect("shape")),
                })
            }
        }
    }

    fn adjoint(&self) -> Coefficient {
        match self {
            Coefficient::Trig(p) => Coefficient::Trig(p.adjoint()),
            Coefficient::Sampled { d, rule } => {
                let rule = rule.clone();
                Coefficient::Sampled {
                    d: *d,
                    rule: Arc::new(move |x| rule(x).adjoint()),
                }
            }
        }
    }
}

impl std::fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coefficient::Trig(p) => write!(f, "Trig(degree {})", p.degree()),
            Coefficient::Sampled { d, .. } => write!(f, "Sampled(d={d})"),
        }
    }
}

#[derive(Clone)]
enum SymbolData {
    /// Finite theta-Fourier series.
    Series(BTreeMap<Mode, Coefficient>),
    /// Grid-evaluated rule on (x, theta); no Fourier data.
    Pointwise(PointwiseRule),
}

/// Matrix-valued function on `T^n_x x T^n_theta`.
#[derive(Clone)]
pub struct Symbol {
    n: usize,
    d: usize,
    label: String,
    data: SymbolData,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Symbol[{}](n={}, d={})", self.label, self.n, self.d)
    }
}

impl Symbol {
    pub fn from_series(
        n: usize,
        d: usize,
        modes: BTreeMap<Mode, Coefficient>,
    ) -> Result<Self> {
        for (m, c) in &modes {
            if m.len() != n {
                return Err(Error::Dimension(format!(
                    "theta mode {m:?} does not have {n} components"
                )));
            }
            if c.dim() != d {
                return Err(Error::Dimension(format!(
                    "coefficient for mode {m:?} has dimension {}, expected {d}",
                    c.dim()
                )));
            }
        }
        Ok(Self {
            n,
            d,
            label: String::new(),
            data: SymbolData::Series(modes),
        })
    }

    pub fn from_pointwise(n: usize, d: usize, rule: PointwiseRule) -> Self {
        Self {
            n,
            d,
            label: String::new(),
            data: SymbolData::Pointwise(rule),
        }
    }

    pub fn constant(n: usize, matrix: ComplexMatrix) -> Self {
        let d = matrix.rows();
        let mut modes = BTreeMap::new();
        modes.insert(
            vec![0; n],
            Coefficient::Trig(TrigPoly::constant(n, matrix)),
        );
        Self {
            n,
            d,
            label: String::new(),
            data: SymbolData::Series(modes),
        }
    }

    /// Scalar symbol from a single theta mode and x trig poly, for tests and
    /// fixtures: `f = poly(x) e^{i <mode, theta>}`.
    pub fn single_mode(n: usize, mode: Mode, poly: TrigPoly) -> Result<Self> {
        let d = poly.d;
        let mut modes = BTreeMap::new();
        modes.insert(mode, Coefficient::Trig(poly));
        Self::from_series(n, d, modes)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_series(&self) -> bool {
        matches!(self.data, SymbolData::Series(_))
    }

    pub fn modes(&self) -> Result<&BTreeMap<Mode, Coefficient>> {
        match &self.data {
            SymbolData::Series(m) => Ok(m),
            SymbolData::Pointwise(_) => Err(Error::UnsupportedRepresentation(
                "pointwise symbol has no theta-Fourier data".into(),
            )),
        }
    }

    /// Largest theta mode component in absolute value.
    pub fn theta_degree(&self) -> Result<i64> {
        Ok(self
            .modes()?
            .keys()
            .flat_map(|m| m.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0))
    }

    /// `f(x, theta) = sum_m f_m(x) e^{i <m, theta>}`.
    pub fn eval(&self, x: &[f64], theta: &[f64]) -> Result<ComplexMatrix> {
        if x.len() != self.n || theta.len() != self.n {
            return Err(Error::Dimension(format!(
                "evaluation point has {} + {} coordinates, expected {} + {}",
                x.len(),
                theta.len(),
                self.n,
                self.n
            )));
        }
        match &self.data {
            SymbolData::Series(modes) => {
                let mut out = ComplexMatrix::zeros(self.d, self.d);
                for (m, coeff) in modes {
                    let phase: f64 = m
                        .iter()
                        .zip(theta)
                        .map(|(mi, ti)| (*mi as f64) * ti)
                        .sum();
                    let e = Complex64::from_polar(1.0, phase);
                    out = out.add(&coeff.eval(x).scale(e))?;
                }
                Ok(out)
            }
            SymbolData::Pointwise(rule) => rule(x, theta),
        }
    }

    fn trig_modes(&self) -> Result<BTreeMap<Mode, TrigPoly>> {
        let mut out = BTreeMap::new();
        for (m, c) in self.modes()? {
            match c {
                Coefficient::Trig(p) => {
                    out.insert(m.clone(), p.clone());
                }
                Coefficient::Sampled { .. } => {
                    return Err(Error::UnsupportedRepresentation(format!(
                        "mode {m:?} is sampled; exact calculus needs trig-poly coefficients \
                         (project with to_trig first)"
                    )));
                }
            }
        }
        Ok(out)
    }

    fn from_trig_modes(n: usize, d: usize, modes: BTreeMap<Mode, TrigPoly>) -> Self {
        let modes = modes
            .into_iter()
            .filter(|(_, p)| !p.terms.is_empty())
            .map(|(m, p)| (m, Coefficient::Trig(p)))
            .collect();
        Self {
            n,
            d,
            label: String::new(),
            data: SymbolData::Series(modes),
        }
    }

    /// Pointwise product; exact on trig-poly Fourier data.
    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::Dimension("symbol shape mismatch".into()));
        }
        let a = self.trig_modes()?;
        let b = other.trig_modes()?;
        let mut modes: BTreeMap<Mode, TrigPoly> = BTreeMap::new();
        for (m1, p1) in &a {
            for (m2, p2) in &b {
                let m: Mode = m1.iter().zip(m2).map(|(x, y)| x + y).collect();
                let prod = p1.mul(p2)?;
                match modes.get_mut(&m) {
                    Some(existing) => *existing = existing.add(&prod)?,
                    None => {
                        modes.insert(m, prod);
                    }
                }
            }
        }
        Ok(Symbol::from_trig_modes(self.n, self.d, modes))
    }

    /// `(f^*)_m = (f_{-m})^*`; supported for every representation.
    pub fn adjoint(&self) -> Symbol {
        match &self.data {
            SymbolData::Series(modes) => {
                let modes = modes
                    .iter()
                    .map(|(m, c)| {
                        let neg: Mode = m.iter().map(|x| -x).collect();
                        (neg, c.adjoint())
                    })
                    .collect();
                Symbol {
                    n: self.n,
                    d: self.d,
                    label: String::new(),
                    data: SymbolData::Series(modes),
                }
            }
            SymbolData::Pointwise(rule) => {
                let rule = rule.clone();
                Symbol::from_pointwise(
                    self.n,
                    self.d,
                    Arc::new(move |x, theta| Ok(rule(x, theta)?.adjoint())),
                )
            }
        }
    }

    /// Linear combination `sum_i w_i f_i`; exact for trig data, closure-backed
    /// when any sampled coefficient is involved.
    pub fn lincomb(terms: &[(Complex64, &Symbol)]) -> Result<Symbol> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let (n, d) = (first.n, first.d);
        let mut modes: BTreeMap<Mode, Coefficient> = BTreeMap::new();
        for (w, f) in terms {
            if f.n != n || f.d != d {
                return Err(Error::Dimension("symbol shape mismatch".into()));
            }
            for (m, c) in f.modes()? {
                let scaled = c.scale(*w);
                match modes.get_mut(m) {
                    Some(existing) => *existing = existing.add(&scaled)?,
                    None => {
                        modes.insert(m.clone(), scaled);
                    }
                }
            }
        }
        Symbol::from_series(n, d, modes)
    }

    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        Symbol::lincomb(&[
            (Complex64::new(1.0, 0.0), self),
            (Complex64::new(1.0, 0.0), other),
        ])
    }

    pub fn scale(&self, s: Complex64) -> Result<Symbol> {
        Symbol::lincomb(&[(s, self)])
    }

    /// d/dtheta_axis; each mode picks up `i m_axis`.
    pub fn theta_derivative(&self, axis: usize) -> Result<Symbol> {
        let modes = self
            .modes()?
            .iter()
            .filter(|(m, _)| m[axis] != 0)
            .map(|(m, c)| {
                (
                    m.clone(),
                    c.scale(Complex64::new(0.0, m[axis] as f64)),
                )
            })
            .collect();
        Symbol::from_series(self.n, self.d, modes)
    }

    /// d/dx_axis with the reduced frequency convention (see
    /// [`TrigPoly::x_derivative_reduced`]).
    pub(crate) fn x_derivative_reduced(&self, axis: usize) -> Result<Symbol> {
        let modes = self
            .trig_modes()?
            .iter()
            .map(|(m, p)| (m.clone(), p.x_derivative_reduced(axis)))
            .collect();
        Ok(Symbol::from_trig_modes(self.n, self.d, modes))
    }

    /// Largest Fourier coefficient magnitude; zero iff the symbol is the zero
    /// series.
    pub fn fourier_max_abs(&self) -> Result<f64> {
        let mut out: f64 = 0.0;
        for c in self.modes()?.values() {
            match c {
                Coefficient::Trig(p) => out = out.max(p.max_abs()),
                Coefficient::Sampled { .. } => {
                    return Err(Error::UnsupportedRepresentation(
                        "sampled coefficients have no finite Fourier data".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Check `f_{-m}(x) = f_m(x)^*` on a uniform sample grid.
    pub fn is_self_adjoint(&self, grid_per_axis: usize, tol: f64) -> Result<bool> {
        let modes = self.modes()?;
        let points = grid_points(self.n, grid_per_axis);
        for (m, c) in modes {
            let neg: Mode = m.iter().map(|x| -x).collect();
            let zero = ComplexMatrix::zeros(self.d, self.d);
            for x in &points {
                let want = c.eval(x).adjoint();
                let have = match modes.get(&neg) {
                    Some(cn) => cn.eval(x),
                    None => zero.clone(),
                };
                if want.sub(&have)?.max_abs() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Id_fiber (x) f`: extend the matrix dimension by a trivial fiber on
    /// the left, matching the site (x) fiber (x) spin operator ordering.
    pub fn kron_left_identity(&self, fiber: usize) -> Result<Symbol> {
        let id = ComplexMatrix::identity(fiber);
        let d = self.d * fiber;
        let modes = self
            .modes()?
            .iter()
            .map(|(m, c)| {
                let coeff = match c {
                    Coefficient::Trig(p) => Coefficient::Trig(p.kron_left(&id)),
                    Coefficient::Sampled { rule, .. } => {
                        let rule = rule.clone();
                        let id = id.clone();
                        Coefficient::Sampled {
                            d,
                            rule: Arc::new(move |x| id.kron(&rule(x))),
                        }
                    }
                };
                (m.clone(), coeff)
            })
            .collect();
        Symbol::from_series(self.n, d, modes)
    }

    /// Project sampled coefficients onto trig polys of the given x degree by
    /// discrete Fourier transform; trig coefficients pass through untouched.
    pub fn to_trig(&self, x_degree: usize) -> Result<Symbol> {
        let g = 2 * x_degree + 2;
        let points = grid_points(self.n, g);
        let mut out: BTreeMap<Mode, Coefficient> = BTreeMap::new();
        for (m, c) in self.modes()? {
            match c {
                Coefficient::Trig(p) => {
                    out.insert(m.clone(), Coefficient::Trig(p.clone()));
                }
                Coefficient::Sampled { .. } => {
                    let samples: Vec<ComplexMatrix> =
                        points.iter().map(|x| c.eval(x)).collect();
                    let mut terms: BTreeMap<Mode, ComplexMatrix> = BTreeMap::new();
                    for l in signed_modes(self.n, x_degree as i64) {
                        let mut acc = ComplexMatrix::zeros(self.d, self.d);
                        for (x, sample) in points.iter().zip(&samples) {
                            let phase: f64 = l
                                .iter()
                                .zip(x)
                                .map(|(li, xi)| -2.0 * PI * (*li as f64) * xi)
                                .sum();
                            acc = acc.add(&sample.scale(Complex64::from_polar(1.0, phase)))?;
                        }
                        let coeff = acc.scale(Complex64::new(
                            1.0 / points.len() as f64,
                            0.0,
                        ));
                        if coeff.max_abs() > 0.0 {
                            terms.insert(l, coeff);
                        }
                    }
                    out.insert(
                        m.clone(),
                        Coefficient::Trig(TrigPoly::from_terms(self.n, self.d, terms)?),
                    );
                }
            }
        }
        Symbol::from_series(self.n, self.d, out)
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SymbolJson {
    n: usize,
    d: usize,
    #[serde(rename = "M_theta")]
    m_theta: i64,
    modes: Vec<ModeJson>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ModeJson {
    m: Vec<i64>,
    coeff: CoeffJson,
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum CoeffJson {
    /// Exact trig-poly terms: x mode and row-major matrix of [re, im].
    Trig { terms: Vec<TermJson> },
    /// Samples of the coefficient on the uniform grid `j / points_per_axis`.
    Grid {
        points_per_axis: usize,
        values: Vec<Vec<Vec<[f64; 2]>>>,
    },
}

#[derive(serde::Serialize, serde::Deserialize)]
struct TermJson {
    l: Vec<i64>,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    let mut entries = Vec::with_capacity(r * c);
    for row in rows {
        if row.len() != c {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        for z in row {
            entries.push(Complex64::new(z[0], z[1]));
        }
    }
    ComplexMatrix::from_entries(r, c, entries)
}

/// Serialize a series symbol to the documented JSON shape
/// `{n, d, M_theta, modes: [{m, coeff}]}`. Trig coefficients serialize
/// exactly; sampled coefficients are stored as `grid_samples`-per-axis value
/// grids (lossy at that resolution).
pub fn symbol_to_json(f: &Symbol, grid_samples: usize) -> Result<serde_json::Value> {
    let modes = f
        .modes()?
        .iter()
        .map(|(m, c)| {
            let coeff = match c {
                Coefficient::Trig(p) => CoeffJson::Trig {
                    terms: p
                        .terms()
                        .iter()
                        .map(|(l, mat)| TermJson {
                            l: l.clone(),
                            matrix: matrix_to_rows(mat),
                        })
                        .collect(),
                },
                Coefficient::Sampled { .. } => CoeffJson::Grid {
                    points_per_axis: grid_samples,
                    values: grid_points(f.n(), grid_samples)
                        .iter()
                        .map(|x| matrix_to_rows(&c.eval(x)))
                        .collect(),
                },
            };
            ModeJson {
                m: m.clone(),
                coeff,
            }
        })
        .collect();
    Ok(serde_json::to_value(SymbolJson {
        n: f.n(),
        d: f.d(),
        m_theta: f.theta_degree()?,
        modes,
    })?)
}

/// Deserialize from the JSON shape; grid coefficients are projected onto
/// trig polys by discrete Fourier transform at the stored resolution.
pub fn symbol_from_json(value: &serde_json::Value) -> Result<Symbol> {
    let raw: SymbolJson = serde_json::from_value(value.clone())?;
    let mut modes: BTreeMap<Mode, Coefficient> = BTreeMap::new();
    for mode in raw.modes {
        let coeff = match mode.coeff {
            CoeffJson::Trig { terms } => {
                let mut map = BTreeMap::new();
                for t in terms {
                    map.insert(t.l, matrix_from_rows(&t.matrix)?);
                }
                Coefficient::Trig(TrigPoly::from_terms(raw.n, raw.d, map)?)
            }
            CoeffJson::Grid {
                points_per_axis,
                values,
            } => {
                let points = grid_points(raw.n, points_per_axis);
                if values.len() != points.len() {
                    return Err(Error::Dimension(format!(
                        "expected {} grid samples, got {}",
                        points.len(),
                        values.len()
                    )));
                }
                let samples = values
                    .iter()
                    .map(|v| matrix_from_rows(v))
                    .collect::<Result<Vec<_>>>()?;
                let degree = ((points_per_axis - 1) / 2) as i64;
                let mut terms = BTreeMap::new();
                for l in signed_modes(raw.n, degree) {
                    let mut acc = ComplexMatrix::zeros(raw.d, raw.d);
                    for (x, sample) in points.iter().zip(&samples) {
                        let phase: f64 = l
                            .iter()
                            .zip(x)
                            .map(|(li, xi)| -2.0 * PI * (*li as f64) * xi)
                            .sum();
                        acc = acc.add(&sample.scale(Complex64::from_polar(1.0, phase)))?;
                    }
                    let coeff = acc.scale(Complex64::new(1.0 / points.len() as f64, 0.0));
                    if coeff.max_abs() > 1e-15 {
                        terms.insert(l, coeff);
                    }
                }
                Coefficient::Trig(TrigPoly::from_terms(raw.n, raw.d, terms)?)
            }
        };
        modes.insert(mode.m, coeff);
    }
    Symbol::from_series(raw.n, raw.d, modes)
}

/// Uniform grid over `[0,1)^n` with `per_axis` points per axis.
pub(crate) fn grid_points(n: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = Vec::with_capacity(n);
            for _ in 0..n {
                x.push((idx % per_axis) as f64 / per_axis as f64);
                idx /= per_axis;
            }
            x
        })
        .collect()
}

/// All modes in `{-degree..degree}^n`.
pub(crate) fn signed_modes(n: usize, degree: i64) -> Vec<Mode> {
    let width = (2 * degree + 1) as usize;
    let total = width.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut m = Vec::with_capacity(n);
            for _ in 0..n {
                m.push((idx % width) as i64 - degree);
                idx /= width;
            }
            m
        })
        .collect()
}
