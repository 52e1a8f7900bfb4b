//! Bifurcation analysis over the control triangle of normalized charges.
//!
//! Everything here uses the Coulomb energy of three charges, where the
//! bifurcation sets have closed forms: `1/√q_i = 1/√q_j + 1/√q_k` on the
//! triangle space and the zero lines of the aligned Hessian forms on the torus.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::config::{wrap_angle, ChargeVector, Configuration, Point, PolygonConfig, Space, TorusConfig, TorusLabel};
use crate::error::{Error, Result};
use crate::morse::{aligned_polygon_blocks, form_value, torus_aligned_hessian_form};
use crate::potential::{hessian, PotentialSpec};
use crate::solver::{
    classify, find_critical_points, line_segment, polish, sorted_eigenvalues, CriticalPoint, SolveSettings,
};

/// A point of the control triangle: three positive charges summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint(pub [f64; 3]);

impl ControlPoint {
    pub fn new(q: [f64; 3]) -> Result<Self> {
        if q.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidCharges(format!("control point needs positive charges, got {q:?}")));
        }
        let s: f64 = q.iter().sum();
        Ok(Self(q.map(|v| v / s)))
    }

    pub fn charges(&self) -> ChargeVector {
        ChargeVector::new(self.0.to_vec()).expect("control points are positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    pub label: String,
    pub samples: Vec<ControlPoint>,
}

fn others(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

/// `1/√q_i − 1/√q_j − 1/√q_k`; positive exactly when the aligned
/// configuration with charge `i` in the middle is a minimum.
pub fn polygon_boundary_value(q: [f64; 3], i: usize) -> f64 {
    let (j, k) = others(i);
    1.0 / q[i].sqrt() - 1.0 / q[j].sqrt() - 1.0 / q[k].sqrt()
}

/// The three curves `1/√q_i = 1/√q_j + 1/√q_k` in the control triangle,
/// each sampled at `resolution` points.
pub fn polygon_bifurcation_set(resolution: usize) -> Result<Vec<BifurcationCurve>> {
    if resolution < 16 {
        return Err(Error::Domain(format!("resolution must be at least 16, got {resolution}")));
    }
    Ok((0..3)
        .map(|i| {
            let (j, k) = others(i);
            let samples = (1..=resolution)
                .map(|m| {
                    let t = m as f64 / (resolution + 1) as f64;
                    let c = 1.0 / t.sqrt() + 1.0 / (1.0 - t).sqrt();
                    let s = c * c / (1.0 + c * c);
                    let mut q = [0.0; 3];
                    q[i] = 1.0 / (1.0 + c * c);
                    q[j] = s * t;
                    q[k] = s * (1.0 - t);
                    ControlPoint(q)
                })
                .collect();
            BifurcationCurve {
                label: format!("1/sqrt(q{})=1/sqrt(q{})+1/sqrt(q{})", i + 1, j + 1, k + 1),
                samples,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "region", content = "intermediate")]
pub enum PolygonRegion {
    /// Two mirror-image triangle minima.
    TwoMinima,
    /// One aligned minimum, with the given charge in the middle.
    AlignedMinimum(usize),
    /// On a bifurcation curve.
    Boundary(usize),
}

pub fn polygon_region(q: [f64; 3]) -> PolygonRegion {
    for i in 0..3 {
        let g = polygon_boundary_value(q, i);
        if g > 0.0 {
            return PolygonRegion::AlignedMinimum(i);
        }
        if g == 0.0 {
            return PolygonRegion::Boundary(i);
        }
    }
    PolygonRegion::TwoMinima
}

/// Zero lines in the control triangle of the aligned Hessian forms of the
/// three labels that can change sign. The `(0,0,0)` form is positive on the
/// whole triangle and contributes no curve.
pub fn torus_bifurcation_set(radii: [f64; 3], resolution: usize) -> Result<Vec<BifurcationCurve>> {
    if resolution < 2 {
        return Err(Error::Domain(format!("resolution must be at least 2, got {resolution}")));
    }
    let mut curves = Vec::new();
    for label in TorusLabel::ALL {
        let c = torus_aligned_hessian_form(radii, label)?;
        let Some((a, b)) = zero_segment(c) else { continue };
        let samples = (0..resolution)
            .map(|m| {
                let t = m as f64 / (resolution - 1) as f64;
                let mut q = [0.0; 3];
                for i in 0..3 {
                    q[i] = a[i] + t * (b[i] - a[i]);
                }
                ControlPoint(q)
            })
            .collect();
        curves.push(BifurcationCurve { label: label.to_string(), samples });
    }
    Ok(curves)
}

/// Endpoints on the boundary of the triangle of the segment `c · q = 0`.
fn zero_segment(c: [f64; 3]) -> Option<([f64; 3], [f64; 3])> {
    let mut ends = Vec::new();
    for (i, k) in [(0, 1), (1, 2), (2, 0)] {
        if c[i] * c[k] < 0.0 {
            let t = c[i] / (c[i] - c[k]);
            let mut q = [0.0; 3];
            q[i] = 1.0 - t;
            q[k] = t;
            ends.push(q);
        }
    }
    (ends.len() == 2).then(|| (ends[0], ends[1]))
}

/// Index of the vertex of the triangle cut off by the zero line of `c`, i.e.
/// the coefficient whose sign differs from the other two.
pub fn torus_region_vertex(radii: [f64; 3], label: TorusLabel) -> Result<Option<usize>> {
    let c = torus_aligned_hessian_form(radii, label)?;
    let pos: Vec<usize> = (0..3).filter(|&i| c[i] > 0.0).collect();
    let neg: Vec<usize> = (0..3).filter(|&i| c[i] < 0.0).collect();
    Ok(match (pos.len(), neg.len()) {
        (1, 2) => Some(pos[0]),
        (2, 1) => Some(neg[0]),
        _ => None,
    })
}

/// Whether the zero lines of two linear forms meet inside the closed
/// control triangle. The planes `c_a · q = 0` and `c_b · q = 0` meet along the
/// ray spanned by `c_a × c_b`, which hits the triangle iff its components share a sign.
pub fn forms_intersect_in_simplex(ca: [f64; 3], cb: [f64; 3]) -> bool {
    let w = [
        ca[1] * cb[2] - ca[2] * cb[1],
        ca[2] * cb[0] - ca[0] * cb[2],
        ca[0] * cb[1] - ca[1] * cb[0],
    ];
    w.iter().all(|v| *v >= 0.0) || w.iter().all(|v| *v <= 0.0)
}

// ---------------------------------------------------------------------------
// Charge paths

/// A straight path in charge space varying one charge, `q[index] = λ` for
/// `λ` between `start` and `end`, the other charges fixed at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargePath {
    pub base: [f64; 3],
    pub index: usize,
    pub start: f64,
    pub end: f64,
}

impl ChargePath {
    pub fn new(base: [f64; 3], index: usize, start: f64, end: f64) -> Result<Self> {
        let p = Self { base, index, start, end };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.index > 2 {
            return Err(Error::Path(format!("charge index {} out of range", self.index + 1)));
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.start) && ok(self.end)) || self.start == self.end {
            return Err(Error::Path(format!("bad parameter range [{}, {}]", self.start, self.end)));
        }
        if (0..3).any(|i| i != self.index && !ok(self.base[i])) {
            return Err(Error::Path(format!("fixed charges must be positive, got {:?}", self.base)));
        }
        Ok(())
    }

    pub fn charges_at(&self, lambda: f64) -> [f64; 3] {
        let mut q = self.base;
        q[self.index] = lambda;
        q
    }

    fn charge_vector(&self, lambda: f64) -> Result<ChargeVector> {
        ChargeVector::new(self.charges_at(lambda).to_vec())
    }
}

impl fmt::Display for ChargePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fixed: Vec<String> = (0..3)
            .map(|i| if i == self.index { "_".to_string() } else { self.base[i].to_string() })
            .collect();
        write!(f, "q{}:{}:{}@{}", self.index + 1, self.start, self.end, fixed.join(","))
    }
}

/// Parses `q<i>:<start>:<end>@<a>,<b>,<c>`, where the entry at position `i`
/// of the base vector is a placeholder (`_`).
impl FromStr for ChargePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Path(format!("expected q<i>:<start>:<end>@<q1>,<q2>,<q3>, got {s:?}"));
        let (head, base) = s.split_once('@').ok_or_else(bad)?;
        let parts: Vec<&str> = head.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let index: usize = parts[0]
            .trim()
            .strip_prefix('q')
            .and_then(|v| v.parse().ok())
            .filter(|v| (1..=3).contains(v))
            .ok_or_else(bad)?;
        let start: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let end: f64 = parts[2].trim().parse().map_err(|_| bad())?;
        let fields: Vec<&str> = base.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(bad());
        }
        let mut b = [0.0; 3];
        for (i, f) in fields.iter().enumerate() {
            if i == index - 1 && (*f == "_" || f.is_empty()) {
                b[i] = start;
            } else {
                b[i] = f.parse().map_err(|_| bad())?;
            }
        }
        Self::new(b, index - 1, start, end)
    }
}

/// The aligned configuration followed through a bifurcation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tracked {
    /// Triangle space, aligned with this charge in the middle.
    Polygon { intermediate: usize },
    Torus { label: TorusLabel },
}

impl fmt::Display for Tracked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tracked::Polygon { intermediate } => write!(f, "aligned p{} intermediate", intermediate + 1),
            Tracked::Torus { label } => write!(f, "aligned {label}"),
        }
    }
}

fn check_space(space: &Space) -> Result<()> {
    space.validate()?;
    match space {
        Space::Polygon { n: 3 } => Ok(()),
        Space::Polygon { n } => {
            Err(Error::Unsupported(format!("bifurcation analysis needs three charges (got n = {n})")))
        }
        Space::Torus { radii } => {
            if space.distinct_radii() {
                Ok(())
            } else {
                Err(Error::Domain(format!("bifurcation analysis needs distinct radii, got {radii:?}")))
            }
        }
    }
}

/// Bifurcation curves crossed by the path, with the aligned configuration
/// that changes type at each crossing.
pub fn path_crossings(space: &Space, path: &ChargePath) -> Result<Vec<Tracked>> {
    check_space(space)?;
    path.validate()?;
    let (a, b) = (path.charges_at(path.start), path.charges_at(path.end));
    match space {
        Space::Polygon { .. } => Ok((0..3)
            .filter(|&i| polygon_boundary_value(a, i) * polygon_boundary_value(b, i) < 0.0)
            .map(|i| Tracked::Polygon { intermediate: i })
            .collect()),
        Space::Torus { radii } => {
            let mut out = Vec::new();
            for label in TorusLabel::ALL {
                let c = torus_aligned_hessian_form(*radii, label)?;
                if form_value(c, &a) * form_value(c, &b) < 0.0 {
                    out.push(Tracked::Torus { label });
                }
            }
            Ok(out)
        }
    }
}

fn single_crossing(space: &Space, path: &ChargePath) -> Result<Tracked> {
    let c = path_crossings(space, path)?;
    if c.len() != 1 {
        return Err(Error::Path(format!(
            "path {path} crosses {} bifurcation curves, expected exactly one",
            c.len()
        )));
    }
    Ok(c[0])
}

fn tracked_config(space: &Space, tracked: Tracked, q: [f64; 3]) -> Result<Configuration> {
    match (space, tracked) {
        (Space::Polygon { .. }, Tracked::Polygon { intermediate }) => {
            Ok(Configuration::Polygon(line_segment(q, intermediate)))
        }
        (Space::Torus { radii }, Tracked::Torus { label }) => Ok(Configuration::Torus(label.config(*radii)?)),
        _ => Err(Error::Domain("tracked configuration does not belong to the space".into())),
    }
}

/// Smallest Hessian eigenvalue across the alignment: the y-block for the
/// triangle space, the full 2×2 Hessian on the torus.
pub fn transverse_eigenvalue(space: &Space, tracked: Tracked, q: [f64; 3]) -> Result<f64> {
    let cv = ChargeVector::new(q.to_vec())?;
    let cfg = tracked_config(space, tracked, q)?;
    let eigs = match &cfg {
        Configuration::Polygon(p) => aligned_polygon_blocks(p, &cv, &PotentialSpec::Coulomb)?.transverse_eigenvalues(),
        Configuration::Torus(_) => sorted_eigenvalues(&hessian(&cfg, &cv, &PotentialSpec::Coulomb)?),
    };
    Ok(eigs[0])
}

/// Parameter value where the tracked aligned configuration degenerates,
/// found by bisection on its transverse eigenvalue.
pub fn detect_threshold(space: &Space, path: &ChargePath) -> Result<f64> {
    let tracked = single_crossing(space, path)?;
    let f = |l: f64| transverse_eigenvalue(space, tracked, path.charges_at(l));
    let (mut a, mut b) = (path.start, path.end);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(Error::Path(format!(
            "transverse eigenvalue does not change sign on [{}, {}] ({fa:e}, {fb:e})",
            path.start, path.end
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let (lo, hi) = (f(a)?.abs(), f(b)?.abs());
    let (best, val) = if lo <= hi { (a, lo) } else { (b, hi) };
    if val >= 1e-9 {
        return Err(Error::Path(format!("bisection stalled at {best} with eigenvalue {val:e}")));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Branch tracing

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Minimum,
    Saddle,
    Maximum,
    Degenerate,
}

impl Stability {
    pub fn of(cp: &CriticalPoint) -> Self {
        if cp.degenerate {
            Stability::Degenerate
        } else if cp.is_minimum() {
            Stability::Minimum
        } else if cp.is_maximum() {
            Stability::Maximum
        } else {
            Stability::Saddle
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Minimum => "min",
            Stability::Saddle => "saddle",
            Stability::Maximum => "max",
            Stability::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub amplitude: f64,
    pub energy: f64,
    pub stability: Stability,
    pub eigenvalues: Vec<f64>,
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub lambda: f64,
    pub charges: [f64; 3],
    pub aligned: BranchPoint,
    /// The mirror pair leaving the alignment, positive amplitude first; empty
    /// where no such pair exists.
    pub off_axis: Vec<BranchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagram {
    pub tracked: Tracked,
    pub path: ChargePath,
    pub samples: Vec<BranchSample>,
}

/// Signed transverse coordinate: distance of the intermediate vertex from the
/// line through the outer ones, or the deviation of `α3` from its aligned value.
pub fn branch_amplitude(tracked: Tracked, config: &Configuration) -> Result<f64> {
    match (tracked, config) {
        (Tracked::Polygon { intermediate }, Configuration::Polygon(p)) => {
            let (j, k) = others(intermediate);
            let pts = p.points();
            let base = pts[k] - pts[j];
            let v = pts[intermediate] - pts[j];
            Ok((base.x * v.y - base.y * v.x) / base.norm())
        }
        (Tracked::Torus { label }, Configuration::Torus(t)) => Ok(wrap_angle(t.alpha3() - label.angles()[2])),
        _ => Err(Error::Domain("configuration does not match the tracked branch".into())),
    }
}

struct Tracer<'a> {
    space: &'a Space,
    tracked: Tracked,
    path: &'a ChargePath,
    settings: SolveSettings,
}

impl Tracer<'_> {
    fn branch_point(&self, cp: &CriticalPoint) -> Result<BranchPoint> {
        Ok(BranchPoint {
            amplitude: branch_amplitude(self.tracked, &cp.config)?,
            energy: cp.energy,
            stability: Stability::of(cp),
            eigenvalues: cp.hessian_eigenvalues.clone(),
            config: cp.config.clone(),
        })
    }

    /// A non-aligned, non-degenerate root polished from `seed`. Degenerate
    /// roots are slowly converging copies of the aligned point at threshold.
    fn off_axis_root(&self, seed: &Configuration, q: &ChargeVector) -> Option<Configuration> {
        let r = polish(seed, q, &PotentialSpec::Coulomb, &self.settings)?;
        let (c, _) = r.canonicalize();
        if c.is_aligned() {
            return None;
        }
        let cp = classify(&c, q, &PotentialSpec::Coulomb).ok()?;
        (!cp.degenerate).then_some(c)
    }

    fn ladder_seeds(&self, aligned: &Configuration, q: &ChargeVector) -> Result<Vec<Configuration>> {
        const STEPS: [f64; 8] = [0.3, 0.15, 0.08, 0.04, 0.02, 0.01, 0.005, 0.002];
        let mut seeds = Vec::new();
        match (aligned, self.tracked) {
            (Configuration::Polygon(p), Tracked::Polygon { intermediate }) => {
                for s in STEPS {
                    let mut pts: Vec<Point> = p.points().to_vec();
                    pts[intermediate].y += s;
                    if let Ok(c) = PolygonConfig::from_points(pts) {
                        seeds.push(c.into());
                    }
                }
            }
            (Configuration::Torus(t), _) => {
                let h = hessian(aligned, q, &PotentialSpec::Coulomb)?;
                let eig = SymmetricEigen::new(h);
                let imin = eig.eigenvalues.imin();
                let v: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
                let a = t.angles();
                for s in STEPS {
                    let s = s * 4.0;
                    if let Ok(c) = TorusConfig::new(t.radii(), [a[0] + s * v[0], a[1] + s * v[1]]) {
                        seeds.push(c.into());
                    }
                }
            }
            _ => {}
        }
        Ok(seeds)
    }

    fn ladder(&self, aligned: &Configuration, q: &ChargeVector) -> Result<Option<Configuration>> {
        let roots: Vec<Configuration> = self
            .ladder_seeds(aligned, q)?
            .iter()
            .filter_map(|s| self.off_axis_root(s, q))
            .collect();
        Ok(roots
            .into_iter()
            .min_by(|a, b| a.chart_distance(aligned).total_cmp(&b.chart_distance(aligned))))
    }

    /// Follows an off-axis root from `from` to `to`, halving the step on failure.
    fn continue_root(&self, prev: &Configuration, from: f64, to: f64) -> Result<Option<Configuration>> {
        let mut cur = prev.clone();
        let mut at = from;
        let mut h = to - from;
        while at != to {
            let target = if (to - at).abs() <= h.abs() { to } else { at + h };
            match self.off_axis_root(&cur, &self.path.charge_vector(target)?) {
                Some(c) => {
                    cur = c;
                    at = target;
                }
                None => {
                    h *= 0.5;
                    if h.abs() < 1e-6 {
                        return Ok(None);
                    }
                }
            }
        }
        Ok(Some(cur))
    }

    fn sample(&self, lambda: f64, prev: Option<(f64, &Configuration)>) -> Result<BranchSample> {
        let q = self.path.charges_at(lambda);
        let cv = self.path.charge_vector(lambda)?;
        let aligned_cfg = tracked_config(self.space, self.tracked, q)?;
        let aligned_cp = classify(&aligned_cfg, &cv, &PotentialSpec::Coulomb)?;
        let mut root = None;
        if let Some((l0, c0)) = prev {
            root = self.continue_root(c0, l0, lambda)?;
        }
        if root.is_none() {
            root = self.ladder(&aligned_cfg, &cv)?;
        }
        let mut off_axis = Vec::new();
        if let Some(r) = root {
            for c in [r.clone(), r.apply_involution()] {
                off_axis.push(self.branch_point(&classify(&c, &cv, &PotentialSpec::Coulomb)?)?);
            }
            off_axis.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
        }
        Ok(BranchSample { lambda, charges: q, aligned: self.branch_point(&aligned_cp)?, off_axis })
    }
}

/// Follows the aligned configuration and the mirror pair that bifurcates from
/// it along `steps + 1` equally spaced parameter values.
pub fn trace_pitchfork(space: &Space, path: &ChargePath, steps: usize) -> Result<BranchDiagram> {
    if steps == 0 {
        return Err(Error::Path("need at least one step".into()));
    }
    let tracked = single_crossing(space, path)?;
    let tracer = Tracer { space, tracked, path, settings: SolveSettings::default() };
    let mut samples: Vec<BranchSample> = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let lambda = path.start + (path.end - path.start) * s as f64 / steps as f64;
        let prev = samples.last().and_then(|p| {
            p.off_axis.first().map(|b| (p.lambda, &b.config))
        });
        let sample = tracer.sample(lambda, prev)?;
        samples.push(sample);
    }
    Ok(BranchDiagram { tracked, path: path.clone(), samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub threshold: f64,
    pub exponent: f64,
    pub prefactor: f64,
    /// `(λ, amplitude)` pairs used in the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Fits `|amplitude| = C |λ − λc|^β` on the side of the threshold where the
/// mirror pair exists, using parameters `λc ± window · 2^-k`, `k = 0..count`.
pub fn fit_branch_exponent(space: &Space, path: &ChargePath, window: f64, count: usize) -> Result<ExponentFit> {
    if !(window > 0.0) || count < 3 {
        return Err(Error::Domain("exponent fit needs a positive window and at least three samples".into()));
    }
    let tracked = single_crossing(space, path)?;
    let lc = detect_threshold(space, path)?;
    let side = if transverse_eigenvalue(space, tracked, path.charges_at(lc + 0.5 * window))? < 0.0 {
        1.0
    } else {
        -1.0
    };
    let tracer = Tracer { space, tracked, path, settings: SolveSettings::default() };
    let mut pts = Vec::with_capacity(count);
    let mut prev: Option<(f64, Configuration)> = None;
    for k in 0..count {
        let lambda = lc + side * window * 0.5f64.powi(k as i32);
        let s = tracer.sample(lambda, prev.as_ref().map(|(l, c)| (*l, c)))?;
        let Some(b) = s.off_axis.first() else {
            return Err(Error::Path(format!("no off-axis branch found at λ = {lambda}")));
        };
        pts.push((lambda, b.amplitude.abs()));
        prev = Some((lambda, b.config.clone()));
    }
    let xs: Vec<f64> = pts.iter().map(|(l, _)| (l - lc).abs().ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, a)| a.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let beta = sxy / sxx;
    Ok(ExponentFit { threshold: lc, exponent: beta, prefactor: (my - beta * mx).exp(), samples: pts })
}

// ---------------------------------------------------------------------------
// Fixing effect

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixingEntry {
    pub q2: f64,
    /// Distances from the lowest minimum found.
    pub d12: f64,
    pub d23: f64,
    pub alignment_defect: f64,
    /// Set when the sample lies at or above the threshold.
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixingReport {
    pub q1: f64,
    pub q3: f64,
    /// `1/(1/√q1 + 1/√q3)²`.
    pub threshold: f64,
    pub entries: Vec<FixingEntry>,
    /// Largest deviation of `d12/d23` from `√(q1/q3)` among included samples.
    pub ratio_deviation: f64,
}

/// Positions of the middle charge in the lowest-energy configuration as its
/// own charge varies.
pub fn fixing_effect_probe(q1: f64, q3: f64, q2_samples: &[f64]) -> Result<FixingReport> {
    let threshold = 1.0 / (1.0 / q1.sqrt() + 1.0 / q3.sqrt()).powi(2);
    let expected = (q1 / q3).sqrt();
    let space = Space::Polygon { n: 3 };
    let settings = SolveSettings::default().with_closed_form_seeds(false);
    let mut entries = Vec::new();
    let mut dev = 0.0f64;
    for &q2 in q2_samples {
        let q = ChargeVector::new(vec![q1, q2, q3])?;
        let pts = find_critical_points(&space, &q, &PotentialSpec::Coulomb, &settings)?;
        let min = pts
            .iter()
            .find(|p| p.is_minimum())
            .ok_or_else(|| Error::Domain(format!("no minimum found for q2 = {q2}")))?;
        let p = min.config.points();
        let (d12, d23) = ((p[0] - p[1]).norm(), (p[1] - p[2]).norm());
        let excluded = (q2 >= threshold).then(|| format!("q2 = {q2} is not below the threshold {threshold}"));
        if excluded.is_none() {
            dev = dev.max((d12 / d23 - expected).abs());
        }
        entries.push(FixingEntry { q2, d12, d23, alignment_defect: min.config.alignment_defect(), excluded });
    }
    Ok(FixingReport { q1, q3, threshold, entries, ratio_deviation: dev })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_samples_satisfy_equality() {
        for c in polygon_bifurcation_set(64).unwrap() {
            for s in &c.samples {
                let g = (0..3).map(|i| polygon_boundary_value(s.0, i).abs()).fold(f64::INFINITY, f64::min);
                assert!(g < 1e-10, "{g}");
                assert!((s.0.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn regions() {
        assert_eq!(polygon_region([1.0 / 3.0; 3]), PolygonRegion::TwoMinima);
        assert_eq!(polygon_region([1e-4, 0.5, 0.5]), PolygonRegion::AlignedMinimum(0));
        assert!(polygon_boundary_value([1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0], 0).abs() < 1e-15);
    }

    #[test]
    fn path_parsing() {
        let p: ChargePath = "q2:0.6:0.05@1,_,1".parse().unwrap();
        assert_eq!(p.index, 1);
        assert_eq!(p.charges_at(0.3), [1.0, 0.3, 1.0]);
        assert!("q4:0:1@1,1,1".parse::<ChargePath>().is_err());
        assert!("q2:0.5:0.5@1,_,1".parse::<ChargePath>().is_err());
    }

    #[test]
    fn crossing_counts() {
        let space = Space::Polygon { n: 3 };
        let p = ChargePath::new([1.0, 0.0, 1.0], 1, 0.05, 0.6).unwrap();
        assert_eq!(path_crossings(&space, &p).unwrap(), vec![Tracked::Polygon { intermediate: 1 }]);
        let none = ChargePath::new([1.0, 0.0, 1.0], 1, 0.5, 0.6).unwrap();
        assert!(detect_threshold(&space, &none).is_err());
    }

    #[test]
    fn torus_segments_are_disjoint() {
        let r = [1.0, 2.0, 3.0];
        let forms: Vec<[f64; 3]> = [TorusLabel::PiPiZero, TorusLabel::ZeroPiPi, TorusLabel::PiZeroPi]
            .iter()
            .map(|l| torus_aligned_hessian_form(r, *l).unwrap())
            .collect();
        for a in 0..3 {
            for b in a + 1..3 {
                assert!(!forms_intersect_in_simplex(forms[a], forms[b]));
            }
        }
        assert_eq!(torus_bifurcation_set(r, 16).unwrap().len(), 3);
    }
}
