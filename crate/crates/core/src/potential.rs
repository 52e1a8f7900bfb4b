//! Pair kernels, total energy and its derivatives in chart coordinates.
//!
//! Torus chart: `(α1, α2)` with `α3 = 2π - α1 - α2`.
//!
//! Polygon chart: the free coordinates of a gauge-fixed polygon are
//! `[p2x, p3x, .., pnx, p3y, .., pny]` (`p1` pinned at the origin, `p2y = 0`).
//! Around a base configuration `x0` the chart is
//! `w ↦ (x0 + Z w) / perimeter(x0 + Z w)` where the columns of `Z` are an
//! orthonormal basis of the perimeter-gradient complement. `Z` comes from a
//! Householder reflection anchored on `p2x`, so at aligned configurations its
//! first `n-2` columns move only x-coordinates and the last `n-2` columns are
//! exactly the y-coordinates of `p3..pn`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::config::{
    min_pair_distance, perimeter_of, ChargeVector, Configuration, Point, PolygonConfig,
    TorusConfig, POLE_RADIUS,
};
use crate::error::{Error, Result};

/// Pair interaction `φ(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "k", rename_all = "lowercase")]
pub enum PotentialSpec {
    /// `1/d`
    #[default]
    Coulomb,
    /// `1/d^k`, `k > 1`
    #[serde(rename = "power")]
    PowerLaw(f64),
    /// `log d`
    #[serde(rename = "log")]
    Logarithmic,
}

impl PotentialSpec {
    pub fn power(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 1.0) {
            return Err(Error::Domain(format!("power-law exponent must be > 1, got {k}")));
        }
        Ok(PotentialSpec::PowerLaw(k))
    }

    /// `(φ, φ', φ'')` at `d > 0`.
    pub fn kernel(&self, d: f64) -> Result<(f64, f64, f64)> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("kernel evaluated at non-positive distance {d}")));
        }
        Ok(self.kernel_unchecked(d))
    }

    #[inline]
    pub(crate) fn kernel_unchecked(&self, d: f64) -> (f64, f64, f64) {
        match *self {
            PotentialSpec::Coulomb => {
                let inv = 1.0 / d;
                (inv, -inv * inv, 2.0 * inv * inv * inv)
            }
            PotentialSpec::PowerLaw(k) => {
                let phi = d.powf(-k);
                (phi, -k * phi / d, k * (k + 1.0) * phi / (d * d))
            }
            PotentialSpec::Logarithmic => (d.ln(), 1.0 / d, -1.0 / (d * d)),
        }
    }

    /// Limit of `φ(d)` as `d → 0+`; what [`energy`] reports at a pole.
    pub fn pole_value(&self) -> f64 {
        match self {
            PotentialSpec::Logarithmic => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        }
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "coulomb" => Ok(PotentialSpec::Coulomb),
            "log" => Ok(PotentialSpec::Logarithmic),
            other => match other.strip_prefix("power:") {
                Some(k) => PotentialSpec::power(
                    k.parse().map_err(|e| Error::Domain(format!("power exponent {k:?}: {e}")))?,
                ),
                None => Err(Error::Domain(format!(
                    "unknown potential {other:?} (expected coulomb, power:k or log)"
                ))),
            },
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Coulomb => f.write_str("coulomb"),
            PotentialSpec::PowerLaw(k) => write!(f, "power:{k}"),
            PotentialSpec::Logarithmic => f.write_str("log"),
        }
    }
}

/// Energy with chart derivatives. At a pole the value is the kernel's pole
/// limit and the derivatives are NaN.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub pole_flag: bool,
}

fn check_len(config: &Configuration, q: &ChargeVector) -> Result<()> {
    if config.len() != q.len() {
        return Err(Error::InvalidCharges(format!(
            "{} charges for {} points",
            q.len(),
            config.len()
        )));
    }
    Ok(())
}

/// `Σ_{i<j} q_i q_j φ(d_ij)`, or the pole limit inside the pole radius.
pub fn energy(config: &Configuration, q: &ChargeVector, spec: &PotentialSpec) -> Result<f64> {
    check_len(config, q)?;
    if config.is_pole() {
        return Ok(spec.pole_value());
    }
    Ok(energy_raw(config, q.values(), spec))
}

pub(crate) fn energy_raw(config: &Configuration, q: &[f64], spec: &PotentialSpec) -> f64 {
    match config {
        Configuration::Polygon(p) => polygon_energy(p.points(), q, spec),
        Configuration::Torus(t) => {
            let d = t.distances();
            let pairs = torus_pair_charges(q);
            (0..3).map(|i| pairs[i] * spec.kernel_unchecked(d[i]).0).sum()
        }
    }
}

fn polygon_energy(pts: &[Point], q: &[f64], spec: &PotentialSpec) -> f64 {
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            e += q[i] * q[j] * spec.kernel_unchecked((pts[i] - pts[j]).norm()).0;
        }
    }
    e
}

// charge products attached to (d1, d2, d3) = (|p2p3|, |p3p1|, |p1p2|)
fn torus_pair_charges(q: &[f64]) -> [f64; 3] {
    [q[1] * q[2], q[2] * q[0], q[0] * q[1]]
}

fn torus_pair_radii(r: [f64; 3]) -> [(f64, f64); 3] {
    [(r[1], r[2]), (r[2], r[0]), (r[0], r[1])]
}

/// Per-term angular derivatives `(f_i', f_i'')` of `f_i(α_i) = Q_i φ(d_i(α_i))`.
pub(crate) fn torus_term_derivatives(
    t: &TorusConfig,
    q: &[f64],
    spec: &PotentialSpec,
) -> [(f64, f64); 3] {
    let angles = t.all_angles();
    let d = t.distances();
    let pairs = torus_pair_charges(q);
    let radii = torus_pair_radii(t.radii());
    let mut out = [(0.0, 0.0); 3];
    for i in 0..3 {
        let (a, b) = radii[i];
        let (s, c) = angles[i].sin_cos();
        let (_, dphi, ddphi) = spec.kernel_unchecked(d[i]);
        let dd = a * b * s / d[i];
        let ddd = (a * b * c - dd * dd) / d[i];
        out[i] = (pairs[i] * dphi * dd, pairs[i] * (ddphi * dd * dd + dphi * ddd));
    }
    out
}

fn torus_gradient(t: &TorusConfig, q: &[f64], spec: &PotentialSpec) -> DVector<f64> {
    let f = torus_term_derivatives(t, q, spec);
    DVector::from_vec(vec![f[0].0 - f[2].0, f[1].0 - f[2].0])
}

fn torus_hessian(t: &TorusConfig, q: &[f64], spec: &PotentialSpec) -> DMatrix<f64> {
    let f = torus_term_derivatives(t, q, spec);
    let m = Matrix2::new(f[0].1 + f[2].1, f[2].1, f[2].1, f[1].1 + f[2].1);
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

/// Free-coordinate index of `(vertex, component)`; `None` for `p1` and `p2y`.
pub(crate) fn free_index(n: usize, vertex: usize, comp: usize) -> Option<usize> {
    match (vertex, comp) {
        (0, _) => None,
        (i, 0) => Some(i - 1),
        (1, 1) => None,
        (i, _) => Some(n - 1 + i - 2),
    }
}

pub(crate) fn free_dim(n: usize) -> usize {
    2 * n - 3
}

pub(crate) fn to_free(pts: &[Point]) -> DVector<f64> {
    let n = pts.len();
    let mut x = DVector::zeros(free_dim(n));
    for (i, p) in pts.iter().enumerate() {
        if let Some(k) = free_index(n, i, 0) {
            x[k] = p.x;
        }
        if let Some(k) = free_index(n, i, 1) {
            x[k] = p.y;
        }
    }
    x
}

pub(crate) fn from_free(x: &DVector<f64>, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let px = free_index(n, i, 0).map_or(0.0, |k| x[k]);
            let py = free_index(n, i, 1).map_or(0.0, |k| x[k]);
            Point::new(px, py)
        })
        .collect()
}

/// Pair-sum energy with its first and second derivatives in free coordinates.
pub(crate) struct FreeDerivatives {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

fn accumulate_pair(
    out: &mut FreeDerivatives,
    n: usize,
    i: usize,
    j: usize,
    diff: Point,
    weight: f64,
    phi: (f64, f64, f64),
) {
    let d = diff.norm();
    let u = diff / d;
    let (f, df, ddf) = phi;
    out.value += weight * f;
    let g = u * (weight * df);
    let uu = u * u.transpose();
    let block = uu * (weight * ddf) + (Matrix2::identity() - uu) * (weight * df / d);
    for ci in 0..2 {
        let gi = free_index(n, i, ci);
        let gj = free_index(n, j, ci);
        if let Some(a) = gi {
            out.grad[a] += g[ci];
        }
        if let Some(b) = gj {
            out.grad[b] -= g[ci];
        }
        for cj in 0..2 {
            let v = block[(ci, cj)];
            let hi = free_index(n, i, cj);
            let hj = free_index(n, j, cj);
            if let (Some(a), Some(b)) = (gi, hi) {
                out.hess[(a, b)] += v;
            }
            if let (Some(a), Some(b)) = (gj, hj) {
                out.hess[(a, b)] += v;
            }
            if let (Some(a), Some(b)) = (gi, hj) {
                out.hess[(a, b)] -= v;
            }
            if let (Some(a), Some(b)) = (gj, hi) {
                out.hess[(a, b)] -= v;
            }
        }
    }
}

pub(crate) fn polygon_energy_derivatives(
    pts: &[Point],
    q: &[f64],
    spec: &PotentialSpec,
) -> FreeDerivatives {
    let n = pts.len();
    let m = free_dim(n);
    let mut out = FreeDerivatives { value: 0.0, grad: DVector::zeros(m), hess: DMatrix::zeros(m, m) };
    for i in 0..n {
        for j in i + 1..n {
            let diff = pts[i] - pts[j];
            let phi = spec.kernel_unchecked(diff.norm());
            accumulate_pair(&mut out, n, i, j, diff, q[i] * q[j], phi);
        }
    }
    out
}

pub(crate) fn perimeter_derivatives(pts: &[Point]) -> FreeDerivatives {
    let n = pts.len();
    let m = free_dim(n);
    let mut out = FreeDerivatives { value: 0.0, grad: DVector::zeros(m), hess: DMatrix::zeros(m, m) };
    for i in 0..n {
        let j = (i + 1) % n;
        let diff = pts[i] - pts[j];
        let d = diff.norm();
        accumulate_pair(&mut out, n, i, j, diff, 1.0, (d, 1.0, 0.0));
    }
    out
}

/// Householder basis of the orthogonal complement of `g`, anchored on index 0.
fn complement_basis(g: &DVector<f64>) -> DMatrix<f64> {
    let m = g.len();
    let norm = g.norm();
    let mut v = g / norm;
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += s;
    let vv = v.dot(&v);
    let h = DMatrix::identity(m, m) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, m - 1).into_owned()
}

/// Local chart of the polygon space around a base configuration.
#[derive(Debug, Clone)]
pub struct PolygonChart {
    base: DVector<f64>,
    basis: DMatrix<f64>,
    n: usize,
}

impl PolygonChart {
    pub fn at(config: &PolygonConfig) -> Self {
        let pts = config.points();
        let n = pts.len();
        let gp = perimeter_derivatives(pts).grad;
        Self { base: to_free(pts), basis: complement_basis(&gp), n }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Columns are free-coordinate directions spanning the chart.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Number of leading basis columns that move only x-coordinates when the
    /// base configuration lies on the x-axis.
    pub fn x_block_len(&self) -> usize {
        self.n - 2
    }

    pub fn embed(&self, w: &DVector<f64>) -> PolygonConfig {
        let x = &self.base + &self.basis * w;
        let pts = from_free(&x, self.n);
        let per = perimeter_of(&pts);
        PolygonConfig::from_gauged(pts.into_iter().map(|p| p / per).collect())
    }

    /// Energy gradient and Hessian of `E ∘ chart` at `w = 0`.
    pub(crate) fn derivatives(
        &self,
        config: &PolygonConfig,
        q: &[f64],
        spec: &PotentialSpec,
    ) -> (f64, DVector<f64>, DMatrix<f64>) {
        let pts = config.points();
        let e = polygon_energy_derivatives(pts, q, spec);
        let p = perimeter_derivatives(pts);
        let z = &self.basis;
        let radial = e.grad.dot(&self.base);
        let grad = z.transpose() * &e.grad;
        let mut hess = z.transpose() * (&e.hess - &p.hess * radial) * z;
        symmetrize(&mut hess);
        (e.value, grad, hess)
    }
}

pub(crate) fn symmetrize(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let a = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = a;
            h[(j, i)] = a;
        }
    }
}

pub fn energy_report(config: &Configuration, q: &ChargeVector, spec: &PotentialSpec) -> Result<EnergyReport> {
    check_len(config, q)?;
    let dim = match config {
        Configuration::Polygon(p) => 2 * (p.len() - 2),
        Configuration::Torus(_) => 2,
    };
    if config.is_pole() {
        return Ok(EnergyReport {
            value: spec.pole_value(),
            gradient: DVector::from_element(dim, f64::NAN),
            hessian: DMatrix::from_element(dim, dim, f64::NAN),
            pole_flag: true,
        });
    }
    let (value, gradient, hessian) = match config {
        Configuration::Polygon(p) => PolygonChart::at(p).derivatives(p, q.values(), spec),
        Configuration::Torus(t) => (
            energy_raw(config, q.values(), spec),
            torus_gradient(t, q.values(), spec),
            torus_hessian(t, q.values(), spec),
        ),
    };
    Ok(EnergyReport { value, gradient, hessian, pole_flag: false })
}

fn pole_error(config: &Configuration) -> Error {
    Error::Pole { min_distance: config.min_distance() }
}

/// Analytic chart gradient.
pub fn gradient(config: &Configuration, q: &ChargeVector, spec: &PotentialSpec) -> Result<DVector<f64>> {
    let r = energy_report(config, q, spec)?;
    if r.pole_flag {
        return Err(pole_error(config));
    }
    Ok(r.gradient)
}

/// Analytic chart Hessian.
pub fn hessian(config: &Configuration, q: &ChargeVector, spec: &PotentialSpec) -> Result<DMatrix<f64>> {
    let r = energy_report(config, q, spec)?;
    if r.pole_flag {
        return Err(pole_error(config));
    }
    Ok(r.hessian)
}

/// Default finite-difference step: `1e-5 · diameter`.
pub fn default_fd_step(config: &Configuration) -> f64 {
    1e-5 * config.diameter()
}

type ChartEnergy<'a> = Box<dyn Fn(&DVector<f64>) -> Result<f64> + 'a>;

// Energy as a function of chart displacement, for the finite-difference oracles.
fn chart_energy_fn<'a>(
    config: &'a Configuration,
    q: &'a [f64],
    spec: &'a PotentialSpec,
) -> (usize, ChartEnergy<'a>) {
    match config {
        Configuration::Polygon(p) => {
            let chart = PolygonChart::at(p);
            let dim = chart.dim();
            let pole = POLE_RADIUS;
            (
                dim,
                Box::new(move |w: &DVector<f64>| {
                    let c = chart.embed(w);
                    let dmin = min_pair_distance(c.points());
                    if dmin < pole {
                        return Err(Error::Pole { min_distance: dmin });
                    }
                    Ok(polygon_energy(c.points(), q, spec))
                }),
            )
        }
        Configuration::Torus(t) => {
            let base = t.angles();
            let radii = t.radii();
            (
                2,
                Box::new(move |w: &DVector<f64>| {
                    let c = TorusConfig::new(radii, [base[0] + w[0], base[1] + w[1]])?;
                    if c.is_pole() {
                        let d = c.distances();
                        return Err(Error::Pole { min_distance: d[0].min(d[1]).min(d[2]) });
                    }
                    Ok(energy_raw(&Configuration::Torus(c), q, spec))
                }),
            )
        }
    }
}

fn check_step(config: &Configuration, q: &ChargeVector, step: f64) -> Result<()> {
    check_len(config, q)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {step}")));
    }
    if config.is_pole() {
        return Err(pole_error(config));
    }
    let scale = match config {
        Configuration::Polygon(_) => 1.0,
        Configuration::Torus(t) => t.min_radius(),
    };
    if step * scale >= 0.5 * config.min_distance() {
        return Err(Error::Domain(format!(
            "finite-difference step {step:e} reaches the pole region (min distance {:e})",
            config.min_distance()
        )));
    }
    Ok(())
}

/// Central-difference gradient in the same chart as [`gradient`].
pub fn fd_gradient(
    config: &Configuration,
    q: &ChargeVector,
    spec: &PotentialSpec,
    step: f64,
) -> Result<DVector<f64>> {
    check_step(config, q, step)?;
    let (dim, f) = chart_energy_fn(config, q.values(), spec);
    let mut g = DVector::zeros(dim);
    for i in 0..dim {
        let mut w = DVector::zeros(dim);
        w[i] = step;
        let fp = f(&w)?;
        w[i] = -step;
        let fm = f(&w)?;
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// Central-difference Hessian in the same chart as [`hessian`].
pub fn fd_hessian(
    config: &Configuration,
    q: &ChargeVector,
    spec: &PotentialSpec,
    step: f64,
) -> Result<DMatrix<f64>> {
    check_step(config, q, step)?;
    let (dim, f) = chart_energy_fn(config, q.values(), spec);
    let f0 = f(&DVector::zeros(dim))?;
    let h2 = step * step;
    let mut h = DMatrix::zeros(dim, dim);
    let at = |pairs: &[(usize, f64)]| {
        let mut w = DVector::zeros(dim);
        for &(i, s) in pairs {
            w[i] += s;
        }
        f(&w)
    };
    for i in 0..dim {
        let fp = at(&[(i, step)])?;
        let fm = at(&[(i, -step)])?;
        h[(i, i)] = (fp - 2.0 * f0 + fm) / h2;
        for j in 0..i {
            let fpp = at(&[(i, step), (j, step)])?;
            let fpm = at(&[(i, step), (j, -step)])?;
            let fmp = at(&[(i, -step), (j, step)])?;
            let fmm = at(&[(i, -step), (j, -step)])?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h2);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Derivative of the energy along uniform scaling `P ↦ λP` at `λ = 1`.
pub fn dilation_derivative(config: &PolygonConfig, q: &ChargeVector, spec: &PotentialSpec) -> Result<f64> {
    let c = Configuration::Polygon(config.clone());
    check_len(&c, q)?;
    if config.is_pole() {
        return Err(pole_error(&c));
    }
    let pts = config.points();
    let q = q.values();
    let mut s = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm();
            s += q[i] * q[j] * spec.kernel_unchecked(d).1 * d;
        }
    }
    Ok(s)
}
