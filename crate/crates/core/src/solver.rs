//! Critical point search.
//!
//! Closed forms cover the three-charge polygon (aligned segments and the
//! critical triangle). Everything else goes through multistart polishing:
//! seeds are spread over the chart, each is driven to a root of the full
//! stationarity system by Levenberg-damped Newton, and the roots are
//! deduplicated modulo the rotation gauge with mirror images linked.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    min_pair_distance, perimeter_of, AlignedLabel, ChargeVector, Configuration, Point,
    PolygonConfig, Space, SymmetryKey, TorusConfig, TorusLabel, POLE_RADIUS,
};
use crate::error::{Error, Result};
use crate::potential::{
    energy_report, from_free, perimeter_derivatives, polygon_energy_derivatives, to_free,
    PotentialSpec,
};

/// Relative eigenvalue threshold for degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    /// Seeds per chart dimension.
    pub grid_density: usize,
    /// Gradient-norm tolerance for accepting a root (scaled by `max(1, max|q|²)`).
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Chart distance under which two roots are the same point.
    pub dedup_tol: f64,
    /// Relative pole radius; steps entering it are rejected.
    pub pole_radius: f64,
    /// Cap on multistart seeds; past it a Halton sample replaces the full grid.
    pub max_seeds: usize,
    /// Also seed from the closed-form critical points where they exist.
    pub closed_form_seeds: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            grid_density: 24,
            newton_tol: 1e-11,
            max_iters: 100,
            dedup_tol: 1e-7,
            pole_radius: POLE_RADIUS,
            max_seeds: 20_000,
            closed_form_seeds: true,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = self.newton_tol > 0.0
            && self.dedup_tol > 0.0
            && self.pole_radius > 0.0
            && self.max_iters > 0
            && self.max_seeds > 0;
        if !positive {
            return Err(Error::Domain("solve settings must be positive".into()));
        }
        if self.grid_density < 8 {
            return Err(Error::Domain(format!(
                "grid density must be at least 8, got {}",
                self.grid_density
            )));
        }
        Ok(())
    }

    pub fn with_grid_density(mut self, g: usize) -> Self {
        self.grid_density = g;
        self
    }

    pub fn with_max_seeds(mut self, m: usize) -> Self {
        self.max_seeds = m;
        self
    }

    pub fn with_closed_form_seeds(mut self, on: bool) -> Self {
        self.closed_form_seeds = on;
        self
    }

    fn effective_tol(&self, q: &ChargeVector) -> f64 {
        let qmax = q.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.newton_tol * qmax.max(1.0).powi(2)
    }
}

/// A classified critical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub config: Configuration,
    pub energy: f64,
    pub grad_norm: f64,
    /// Ascending eigenvalues of the chart Hessian.
    pub hessian_eigenvalues: Vec<f64>,
    /// Number of negative eigenvalues; meaningful only when not degenerate.
    pub morse_index: usize,
    pub degenerate: bool,
    pub aligned: bool,
    pub key: SymmetryKey,
    /// Index of the mirror-image point in the same result list.
    pub partner: Option<usize>,
}

impl CriticalPoint {
    pub fn is_minimum(&self) -> bool {
        !self.degenerate && self.morse_index == 0
    }

    pub fn is_maximum(&self) -> bool {
        !self.degenerate && self.morse_index == self.hessian_eigenvalues.len()
    }

    pub fn is_saddle(&self) -> bool {
        !self.degenerate && !self.is_minimum() && !self.is_maximum()
    }
}

pub(crate) fn is_degenerate(eigs: &[f64]) -> bool {
    let radius = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_abs = eigs.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    !(min_abs >= DEGENERACY_TOL * radius) || radius == 0.0
}

pub(crate) fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Evaluates energy, gradient norm and Hessian spectrum at a configuration.
pub fn classify(config: &Configuration, q: &ChargeVector, spec: &PotentialSpec) -> Result<CriticalPoint> {
    let r = energy_report(config, q, spec)?;
    if r.pole_flag {
        return Err(Error::Pole { min_distance: config.min_distance() });
    }
    let eigs = sorted_eigenvalues(&r.hessian);
    let (canonical, key) = config.canonicalize();
    Ok(CriticalPoint {
        aligned: canonical.is_aligned(),
        config: canonical,
        energy: r.value,
        grad_norm: r.gradient.norm(),
        morse_index: eigs.iter().filter(|v| **v < 0.0).count(),
        degenerate: is_degenerate(&eigs),
        hessian_eigenvalues: eigs,
        key,
        partner: None,
    })
}

fn three_charges(q: &ChargeVector) -> Result<[f64; 3]> {
    let v = q.values();
    if v.len() != 3 || v.iter().any(|x| *x <= 0.0) {
        return Err(Error::InvalidCharges(format!("expected three positive charges, got {v:?}")));
    }
    Ok([v[0], v[1], v[2]])
}

fn outer_pair(intermediate: usize) -> (usize, usize) {
    match intermediate {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// The aligned three-charge configuration with `intermediate` between the
/// other two: a segment of length 1/2 with distances to the outer charges in
/// the ratio of their square roots.
pub fn line_segment(q: [f64; 3], intermediate: usize) -> PolygonConfig {
    let (j, k) = outer_pair(intermediate);
    let (sj, sk) = (q[j].sqrt(), q[k].sqrt());
    let dj = 0.5 * sj / (sj + sk);
    let dk = 0.5 * sk / (sj + sk);
    let mut x = [0.0; 3];
    x[j] = -dj;
    x[k] = dk;
    let pts = x.iter().map(|&v| Point::new(v, 0.0)).collect();
    PolygonConfig::from_points(pts).expect("segment has positive perimeter")
}

/// The three one-dimensional critical segments, indexed by intermediate charge.
pub fn solve_line_three(q: &ChargeVector) -> Result<[PolygonConfig; 3]> {
    let q = three_charges(q)?;
    Ok([line_segment(q, 0), line_segment(q, 1), line_segment(q, 2)])
}

/// Index of the intermediate charge of the globally minimal segment.
pub fn line_global_minimum(q: &ChargeVector) -> Result<usize> {
    let q = three_charges(q)?;
    Ok((0..3).min_by(|&a, &b| q[a].total_cmp(&q[b])).unwrap())
}

/// Side lengths `(l1, l2, l3) = (d23, d31, d12)` proportional to `1/√q`,
/// normalized to perimeter 1, when they satisfy the strict triangle inequality.
pub fn triangle_sides(q: [f64; 3]) -> Option<[f64; 3]> {
    let w = q.map(|v| 1.0 / v.sqrt());
    let s: f64 = w.iter().sum();
    let l = w.map(|v| v / s);
    let strict = (0..3).all(|i| l[i] < l[(i + 1) % 3] + l[(i + 2) % 3]);
    strict.then_some(l)
}

pub(crate) fn triangle_from_sides(l: [f64; 3]) -> PolygonConfig {
    let [l1, l2, l3] = l;
    let x = (l3 * l3 + l2 * l2 - l1 * l1) / (2.0 * l3);
    let y = (l2 * l2 - x * x).max(0.0).sqrt();
    PolygonConfig::from_points(vec![Point::new(0.0, 0.0), Point::new(l3, 0.0), Point::new(x, y)])
        .expect("triangle has positive perimeter")
}

/// The non-aligned Coulomb minimum of three charges (upper-half-plane member
/// of the mirror pair), if it exists.
pub fn critical_triangle(q: &ChargeVector) -> Result<Option<PolygonConfig>> {
    let q = three_charges(q)?;
    Ok(triangle_sides(q).map(triangle_from_sides))
}

/// Aligned critical configurations known in closed form.
pub fn enumerate_aligned(space: &Space, q: &ChargeVector) -> Result<Vec<(AlignedLabel, Configuration)>> {
    space.validate()?;
    match space {
        Space::Polygon { n: 3 } => {
            let segs = solve_line_three(q)?;
            Ok(segs
                .into_iter()
                .enumerate()
                .map(|(i, s)| {
                    let (j, k) = outer_pair(i);
                    (AlignedLabel::Polygon(vec![j, i, k]), Configuration::Polygon(s))
                })
                .collect())
        }
        Space::Polygon { n } => Err(Error::Unsupported(format!(
            "closed-form aligned enumeration is available for n = 3 only (got n = {n})"
        ))),
        Space::Torus { radii } => TorusLabel::ALL
            .into_iter()
            .map(|l| Ok((AlignedLabel::Torus(l), Configuration::Torus(l.config(*radii)?))))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Polishing

const LM_LAMBDA0: f64 = 1e-6;
const LM_LAMBDA_MAX: f64 = 1e12;
const POLYGON_MAX_STEP: f64 = 0.1;
const TORUS_MAX_STEP: f64 = 0.5;

struct LmOutcome {
    x: DVector<f64>,
    residual: f64,
}

/// Levenberg-damped Newton on `F(x) = 0`. `eval` returns `(F, J)` or `None`
/// inside the pole region; `retract` maps a trial point back onto the
/// constraint set.
fn levenberg_newton<E, R>(
    mut x: DVector<f64>,
    eval: E,
    retract: R,
    max_step: f64,
    step_dims: usize,
    tol: f64,
    max_iters: usize,
) -> Option<LmOutcome>
where
    E: Fn(&DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)>,
    R: Fn(DVector<f64>) -> DVector<f64>,
{
    let (mut f, mut j) = eval(&x)?;
    let mut fnorm = f.norm();
    let mut lambda = LM_LAMBDA0;
    for _ in 0..max_iters {
        if fnorm <= 1e-3 * tol {
            break;
        }
        let jt = j.transpose();
        let mut a = &jt * &j;
        let g = &jt * &f;
        let scale = a.diagonal().amax().max(1e-300);
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * scale;
        }
        let Some(mut delta) = a.cholesky().map(|c| c.solve(&(-g))) else {
            lambda *= 10.0;
            if lambda > LM_LAMBDA_MAX {
                break;
            }
            continue;
        };
        let step_norm = delta.rows(0, step_dims).norm();
        if step_norm > max_step {
            delta *= max_step / step_norm;
        }
        let trial = retract(&x + &delta);
        match eval(&trial) {
            Some((f2, j2)) if f2.norm() < fnorm => {
                x = trial;
                f = f2;
                j = j2;
                fnorm = f.norm();
                lambda = (lambda * 0.1).max(1e-15);
            }
            _ => {
                if fnorm <= tol {
                    break;
                }
                lambda *= 10.0;
                if lambda > LM_LAMBDA_MAX {
                    break;
                }
            }
        }
    }
    Some(LmOutcome { x, residual: fnorm })
}

fn polish_polygon(
    start: &PolygonConfig,
    q: &ChargeVector,
    spec: &PotentialSpec,
    settings: &SolveSettings,
    tol: f64,
) -> Option<PolygonConfig> {
    let n = start.len();
    let qv = q.values();
    let m = 2 * n - 3;
    let pole = settings.pole_radius;
    if min_pair_distance(start.points()) < pole {
        return None;
    }
    let x0 = to_free(start.points());
    let e0 = polygon_energy_derivatives(start.points(), qv, spec);
    let p0 = perimeter_derivatives(start.points());
    let mu0 = e0.grad.dot(&p0.grad) / p0.grad.norm_squared();
    let mut z0 = DVector::zeros(m + 1);
    z0.rows_mut(0, m).copy_from(&x0);
    z0[m] = mu0;

    let eval = |z: &DVector<f64>| {
        let pts = from_free(&z.rows(0, m).into_owned(), n);
        if min_pair_distance(&pts) < pole {
            return None;
        }
        let mu = z[m];
        let e = polygon_energy_derivatives(&pts, qv, spec);
        let p = perimeter_derivatives(&pts);
        let mut f = DVector::zeros(m + 1);
        f.rows_mut(0, m).copy_from(&(&e.grad - &p.grad * mu));
        f[m] = p.value - 1.0;
        let mut jac = DMatrix::zeros(m + 1, m + 1);
        jac.view_mut((0, 0), (m, m)).copy_from(&(&e.hess - &p.hess * mu));
        jac.view_mut((0, m), (m, 1)).copy_from(&(-&p.grad));
        jac.view_mut((m, 0), (1, m)).copy_from(&p.grad.transpose());
        Some((f, jac))
    };
    let retract = |mut z: DVector<f64>| {
        let pts = from_free(&z.rows(0, m).into_owned(), n);
        let per = perimeter_of(&pts);
        if per > 0.0 {
            for i in 0..m {
                z[i] /= per;
            }
        }
        z
    };
    let out = levenberg_newton(z0, eval, retract, POLYGON_MAX_STEP, m, tol, settings.max_iters)?;
    if out.residual > tol {
        return None;
    }
    let pts = from_free(&out.x.rows(0, m).into_owned(), n);
    PolygonConfig::from_points(pts).ok()
}

fn polish_torus(
    start: &TorusConfig,
    q: &ChargeVector,
    spec: &PotentialSpec,
    settings: &SolveSettings,
    tol: f64,
) -> Option<TorusConfig> {
    let radii = start.radii();
    let pole = settings.pole_radius * start.min_radius();
    let eval = |x: &DVector<f64>| {
        let t = TorusConfig::new(radii, [x[0], x[1]]).ok()?;
        let d = t.distances();
        if d.iter().any(|v| *v < pole) {
            return None;
        }
        let r = energy_report(&Configuration::Torus(t), q, spec).ok()?;
        Some((r.gradient, r.hessian))
    };
    let a = start.angles();
    let x0 = DVector::from_vec(vec![a[0], a[1]]);
    let out = levenberg_newton(x0, eval, |x| x, TORUS_MAX_STEP, 2, tol, settings.max_iters)?;
    if out.residual > tol {
        return None;
    }
    TorusConfig::new(radii, [out.x[0], out.x[1]]).ok()
}

/// Drives a configuration to a nearby critical point.
pub fn polish(
    config: &Configuration,
    q: &ChargeVector,
    spec: &PotentialSpec,
    settings: &SolveSettings,
) -> Option<Configuration> {
    let tol = settings.effective_tol(q);
    match config {
        Configuration::Polygon(p) => polish_polygon(p, q, spec, settings, tol).map(Configuration::Polygon),
        Configuration::Torus(t) => polish_torus(t, q, spec, settings, tol).map(Configuration::Torus),
    }
}

// ---------------------------------------------------------------------------
// Seeds

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    r
}

/// Unit-cube sample points: the full grid when it fits in `max_seeds`,
/// otherwise a Halton sequence of that length.
fn cube_samples(dim: usize, density: usize, max_seeds: usize) -> Result<Vec<Vec<f64>>> {
    let full = (density as f64).powi(dim as i32);
    if full <= max_seeds as f64 {
        let total = density.pow(dim as u32);
        Ok((0..total)
            .map(|mut idx| {
                (0..dim)
                    .map(|_| {
                        let k = idx % density;
                        idx /= density;
                        (k as f64 + 0.5) / density as f64
                    })
                    .collect()
            })
            .collect())
    } else {
        if dim > PRIMES.len() {
            return Err(Error::Unsupported(format!("seed sampling in {dim} dimensions")));
        }
        Ok((1..=max_seeds as u64)
            .map(|i| (0..dim).map(|d| radical_inverse(i, PRIMES[d])).collect())
            .collect())
    }
}

// Riemann-sphere point from unit-square coordinates, area-uniform in (s, t).
fn sphere_ratio(s: f64, t: f64) -> (f64, f64) {
    let c = 1.0 - 2.0 * s;
    let r = ((1.0 - c) / (1.0 + c)).sqrt();
    let phi = TAU * t;
    (r * phi.cos(), r * phi.sin())
}

/// Polygon from edge ratios `u_{k+1}/u_1` (the affine chart of the
/// projective edge-vector description).
fn polygon_from_ratios(ratios: &[(f64, f64)]) -> Option<PolygonConfig> {
    let n = ratios.len() + 2;
    let mut edges = Vec::with_capacity(n);
    edges.push(Point::new(1.0, 0.0));
    edges.extend(ratios.iter().map(|&(a, b)| Point::new(a, b)));
    let mut pts = Vec::with_capacity(n);
    let mut p = Point::zeros();
    for e in edges.iter().take(n - 1) {
        pts.push(p);
        p += e;
    }
    pts.push(p);
    PolygonConfig::from_points(pts).ok()
}

fn polygon_seeds(n: usize, q: &ChargeVector, spec: &PotentialSpec, settings: &SolveSettings) -> Result<Vec<PolygonConfig>> {
    let mut seeds = Vec::new();
    if settings.closed_form_seeds && n == 3 && *spec == PotentialSpec::Coulomb && q.values().iter().all(|v| *v > 0.0) {
        if let Some(t) = critical_triangle(q)? {
            seeds.push(t.involution());
            seeds.push(t);
        }
        seeds.extend(solve_line_three(q)?);
    }
    if settings.closed_form_seeds && n <= 6 {
        seeds.extend(aligned_order_seeds(n));
    }
    let dim = 2 * (n - 2);
    for s in cube_samples(dim, settings.grid_density, settings.max_seeds)? {
        let ratios: Vec<(f64, f64)> = s.chunks(2).map(|c| sphere_ratio(c[0], c[1])).collect();
        if let Some(p) = polygon_from_ratios(&ratios) {
            if !p.is_pole() {
                seeds.push(p);
            }
        }
    }
    Ok(seeds)
}

/// Equally spaced collinear seeds, one per vertex order up to reversal.
fn aligned_order_seeds(n: usize) -> Vec<PolygonConfig> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| {
        if p[0] < p[n - 1] {
            let mut x = vec![0.0; n];
            for (pos, &v) in p.iter().enumerate() {
                x[v] = pos as f64;
            }
            let pts = x.iter().map(|&v| Point::new(v, 0.0)).collect();
            if let Ok(c) = PolygonConfig::from_points(pts) {
                out.push(c);
            }
        }
    });
    out
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

fn torus_seeds(radii: [f64; 3], settings: &SolveSettings) -> Result<Vec<TorusConfig>> {
    let mut seeds = Vec::new();
    for l in TorusLabel::ALL.into_iter().filter(|_| settings.closed_form_seeds) {
        let c = l.config(radii)?;
        if !c.is_pole() {
            seeds.push(c);
        }
    }
    let g = settings.grid_density;
    for s in cube_samples(2, g, settings.max_seeds.max(g * g))? {
        seeds.push(TorusConfig::new(radii, [-PI + TAU * s[0], -PI + TAU * s[1]])?);
    }
    Ok(seeds)
}

// ---------------------------------------------------------------------------
// Search

/// All critical points found by multistart polishing, sorted by energy, with
/// mirror partners linked.
pub fn find_critical_points(
    space: &Space,
    q: &ChargeVector,
    spec: &PotentialSpec,
    settings: &SolveSettings,
) -> Result<Vec<CriticalPoint>> {
    space.validate()?;
    settings.validate()?;
    if q.len() != space.n_points() {
        return Err(Error::InvalidCharges(format!(
            "{} charges for a space with {} points",
            q.len(),
            space.n_points()
        )));
    }
    let seeds: Vec<Configuration> = match space {
        Space::Polygon { n } => polygon_seeds(*n, q, spec, settings)?.into_iter().map(Into::into).collect(),
        Space::Torus { radii } => torus_seeds(*radii, settings)?.into_iter().map(Into::into).collect(),
    };
    let roots: Vec<Configuration> = seeds
        .par_iter()
        .map(|s| polish(s, q, spec, settings))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut unique: Vec<Configuration> = Vec::new();
    for r in roots {
        let (c, _) = r.canonicalize();
        push_unique(&mut unique, c, settings.dedup_tol);
    }
    // mirror closure
    let mirrors: Vec<Configuration> = unique
        .iter()
        .filter(|c| !c.is_aligned())
        .map(|c| c.apply_involution())
        .filter(|m| !unique.iter().any(|u| u.chart_distance(m) < settings.dedup_tol))
        .collect();
    for m in mirrors {
        if let Some(p) = polish(&m, q, spec, settings) {
            push_unique(&mut unique, p.canonicalize().0, settings.dedup_tol);
        }
    }

    let tol = settings.effective_tol(q);
    let mut points: Vec<CriticalPoint> = unique
        .iter()
        .filter_map(|c| classify(c, q, spec).ok())
        .filter(|cp| cp.grad_norm <= tol)
        .collect();
    sort_points(&mut points);
    link_partners(&mut points, settings.dedup_tol);
    Ok(points)
}

fn push_unique(list: &mut Vec<Configuration>, c: Configuration, tol: f64) {
    if !list.iter().any(|u| u.chart_distance(&c) < tol) {
        list.push(c);
    }
}

fn coords_of(c: &Configuration) -> Vec<f64> {
    match c {
        Configuration::Polygon(p) => p.points().iter().flat_map(|v| [v.x, v.y]).collect(),
        Configuration::Torus(t) => t.angles().to_vec(),
    }
}

pub(crate) fn sort_points(points: &mut [CriticalPoint]) {
    let tie_break = |a: &CriticalPoint, b: &CriticalPoint| {
        a.key.cmp(&b.key).then_with(|| {
            let (ca, cb) = (coords_of(&a.config), coords_of(&b.config));
            ca.iter()
                .zip(&cb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    };
    points.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| tie_break(a, b)));
    // energies equal up to rounding are ordered by key and coordinates only
    let mut start = 0;
    while start < points.len() {
        let mut end = start + 1;
        while end < points.len() && energy_tie(points[end - 1].energy, points[end].energy) {
            end += 1;
        }
        points[start..end].sort_by(tie_break);
        start = end;
    }
}

fn energy_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

pub(crate) fn link_partners(points: &mut [CriticalPoint], tol: f64) {
    let mirrors: Vec<Configuration> = points.iter().map(|p| p.config.apply_involution()).collect();
    for i in 0..points.len() {
        if points[i].aligned {
            continue;
        }
        points[i].partner =
            (0..points.len()).find(|&j| j != i && points[j].config.chart_distance(&mirrors[i]) < tol);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[f64]) -> ChargeVector {
        ChargeVector::new(v.to_vec()).unwrap()
    }

    fn dist(c: &PolygonConfig, i: usize, j: usize) -> f64 {
        (c.points()[i] - c.points()[j]).norm()
    }

    #[test]
    fn line_equal_charges() {
        let s = solve_line_three(&q(&[1.0, 1.0, 1.0])).unwrap();
        assert!((dist(&s[1], 0, 1) - 0.25).abs() < 1e-15);
        assert!((dist(&s[1], 1, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn line_four_one_one() {
        let s = solve_line_three(&q(&[4.0, 1.0, 1.0])).unwrap();
        assert!((dist(&s[1], 0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((dist(&s[1], 1, 2) - 1.0 / 6.0).abs() < 1e-15);
        assert!((s[1].perimeter() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn global_line_minimum_has_smallest_intermediate() {
        assert_eq!(line_global_minimum(&q(&[4.0, 0.5, 1.0])).unwrap(), 1);
        assert_eq!(line_global_minimum(&q(&[0.2, 0.5, 1.0])).unwrap(), 0);
    }

    #[test]
    fn triangle_closed_forms() {
        let t = critical_triangle(&q(&[1.0, 1.0, 1.0])).unwrap().unwrap();
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            assert!((dist(&t, i, j) - 1.0 / 3.0).abs() < 1e-15);
        }
        let t = critical_triangle(&q(&[1.0, 1.0, 4.0])).unwrap().unwrap();
        let (l1, l2, l3) = (dist(&t, 1, 2), dist(&t, 2, 0), dist(&t, 0, 1));
        assert!((l1 - 0.4).abs() < 1e-15 && (l2 - 0.4).abs() < 1e-15 && (l3 - 0.2).abs() < 1e-15);
        assert!((l1 * l1 * 1.0 - 4.0 / 25.0).abs() < 1e-15);
        assert!((l3 * l3 * 4.0 - 4.0 / 25.0).abs() < 1e-15);
        assert!(critical_triangle(&q(&[0.125, 1.0, 1.0])).unwrap().is_none());
    }

    #[test]
    fn aligned_enumeration_counts() {
        let qq = q(&[1.0, 2.0, 3.0]);
        let t = enumerate_aligned(&Space::Torus { radii: [1.0, 2.0, 3.0] }, &qq).unwrap();
        assert_eq!(t.len(), 4);
        let p = enumerate_aligned(&Space::Polygon { n: 3 }, &qq).unwrap();
        assert_eq!(p.len(), 3);
        for (_, c) in t.iter().chain(&p) {
            let cp = classify(c, &qq, &PotentialSpec::Coulomb).unwrap();
            assert!(cp.grad_norm < 1e-11, "{:?}", cp.grad_norm);
            assert!(cp.aligned);
        }
        assert!(enumerate_aligned(&Space::Polygon { n: 4 }, &q(&[1.0; 4])).is_err());
    }

    #[test]
    fn settings_validation() {
        assert!(SolveSettings::default().validate().is_ok());
        assert!(SolveSettings::default().with_grid_density(4).validate().is_err());
    }

    #[test]
    fn halton_points_lie_in_unit_cube() {
        let s = cube_samples(4, 24, 100).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().flatten().all(|v| *v > 0.0 && *v < 1.0));
        let g = cube_samples(2, 8, 100).unwrap();
        assert_eq!(g.len(), 64);
    }

    #[test]
    fn aligned_order_seed_count() {
        assert_eq!(aligned_order_seeds(3).len(), 3);
        assert_eq!(aligned_order_seeds(4).len(), 12);
    }
}
