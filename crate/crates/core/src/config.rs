//! Configuration spaces: fixed-perimeter planar polygons and triples of points
//! on three concentric circles.
//!
//! Polygons are stored gauge-fixed: `p1` at the origin, the first vertex
//! distinct from `p1` on the non-negative x half-axis, perimeter 1. Torus
//! configurations are stored as the two central angles `(α1, α2)` reduced to
//! `(-π, π]`; `α3 = 2π - α1 - α2` is always derived.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Pole radius relative to the perimeter (polygons) or the smallest radius (torus).
pub const POLE_RADIUS: f64 = 1e-7;

/// Relative threshold under which a point set counts as collinear.
pub const ALIGNMENT_TOL: f64 = 1e-10;

/// Rounding quantum of [`SymmetryKey`].
pub const KEY_QUANTUM: f64 = 1e-9;

/// Positive charges attached to the labelled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChargeVector(Vec<f64>);

impl ChargeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidCharges("empty charge vector".into()));
        }
        if let Some(q) = values.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return Err(Error::InvalidCharges(format!("charge {q} is not a positive finite number")));
        }
        Ok(Self(values))
    }

    /// Accepts nonzero charges of either sign. Mixed-sign input is outside
    /// the tested territory and is reported by [`ChargeVector::is_mixed_sign`].
    pub fn signed(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidCharges("empty charge vector".into()));
        }
        if let Some(q) = values.iter().find(|q| !(q.is_finite() && **q != 0.0)) {
            return Err(Error::InvalidCharges(format!("charge {q} is zero or not finite")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_mixed_sign(&self) -> bool {
        let pos = self.0.iter().any(|q| *q > 0.0);
        let neg = self.0.iter().any(|q| *q < 0.0);
        pos && neg
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `q / Σq`: the control-space coordinate.
    pub fn normalized(&self) -> Vec<f64> {
        let s = self.sum();
        self.0.iter().map(|q| q / s).collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::signed(self.0.iter().map(|q| q * c).collect())
    }

    /// Scale factor for quantities quadratic in the charges (energy, gradient).
    pub fn quadratic_scale(&self) -> f64 {
        let s: f64 = self.0.iter().map(|q| q.abs()).sum();
        s * s
    }
}

impl TryFrom<Vec<f64>> for ChargeVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::signed(v)
    }
}

impl From<ChargeVector> for Vec<f64> {
    fn from(q: ChargeVector) -> Self {
        q.0
    }
}

impl FromStr for ChargeVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidCharges(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::signed(values)
    }
}

/// A gauge-fixed polygon of perimeter 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonConfig {
    points: Vec<Point>,
}

impl PolygonConfig {
    /// Builds a polygon from arbitrary planar points: translates `p1` to the
    /// origin, rotates into the gauge and rescales to perimeter 1.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "a polygon needs at least 3 vertices, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidConfig("non-finite coordinate".into()));
        }
        let origin = points[0];
        let mut pts: Vec<Point> = points.iter().map(|p| p - origin).collect();
        gauge_rotate(&mut pts);
        let per = perimeter_of(&pts);
        if !(per > 0.0) {
            return Err(Error::InvalidConfig("zero perimeter".into()));
        }
        for p in &mut pts {
            *p /= per;
        }
        Ok(Self { points: pts })
    }

    /// Wraps points that are already gauge-fixed with perimeter 1.
    pub(crate) fn from_gauged(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        perimeter_of(&self.points)
    }

    /// Reflection across the gauge axis.
    pub fn involution(&self) -> Self {
        Self {
            points: self.points.iter().map(|p| Point::new(p.x, 0.0 - p.y)).collect(),
        }
    }

    pub fn canonical(&self) -> Self {
        let mut pts = self.points.clone();
        let origin = pts[0];
        if origin != Point::zeros() {
            for p in &mut pts {
                *p -= origin;
            }
        }
        gauge_rotate(&mut pts);
        let per = perimeter_of(&pts);
        if per > 0.0 && (per - 1.0).abs() > 1e-13 {
            for p in &mut pts {
                *p /= per;
            }
        }
        Self { points: pts }
    }

    /// True when any two vertices are closer than the pole radius.
    pub fn is_pole(&self) -> bool {
        min_pair_distance(&self.points) < POLE_RADIUS * self.perimeter()
    }

    /// Convex (possibly with straight angles) and simple, in cyclic vertex order.
    pub fn is_convex(&self) -> bool {
        let n = self.points.len();
        let diam = diameter_of(&self.points);
        let eps = 1e-12 * diam * diam;
        let mut sign = 0.0f64;
        let mut turning = 0.0;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            let c = self.points[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            let cross = e1.perp(&e2);
            if cross.abs() > eps {
                if sign == 0.0 {
                    sign = cross.signum();
                } else if cross.signum() != sign {
                    return false;
                }
            }
            turning += cross.atan2(e1.dot(&e2));
        }
        sign != 0.0 && (turning.abs() - TAU).abs() < 1e-6
    }
}

/// Three points on concentric circles, stored by central angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    radii: [f64; 3],
    angles: [f64; 2],
}

impl TorusConfig {
    pub fn new(radii: [f64; 3], angles: [f64; 2]) -> Result<Self> {
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidConfig(format!("radii must be positive: {radii:?}")));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig("non-finite angle".into()));
        }
        Ok(Self { radii, angles: [wrap_angle(angles[0]), wrap_angle(angles[1])] })
    }

    pub fn radii(&self) -> [f64; 3] {
        self.radii
    }

    /// `(α1, α2)` in `(-π, π]`.
    pub fn angles(&self) -> [f64; 2] {
        self.angles
    }

    /// `α3 = 2π - α1 - α2`, reduced to `(-π, π]`.
    pub fn alpha3(&self) -> f64 {
        wrap_angle(TAU - self.angles[0] - self.angles[1])
    }

    pub fn all_angles(&self) -> [f64; 3] {
        [self.angles[0], self.angles[1], self.alpha3()]
    }

    /// `(d1, d2, d3) = (|p2p3|, |p3p1|, |p1p2|)` from the cosine rule.
    pub fn distances(&self) -> [f64; 3] {
        let [r1, r2, r3] = self.radii;
        let [a1, a2, a3] = self.all_angles();
        [chord(r2, r3, a1), chord(r3, r1, a2), chord(r1, r2, a3)]
    }

    /// Planar positions: `p1` on the positive x-axis, `p2` at angle `α3`,
    /// `p3` at angle `-α2`.
    pub fn points(&self) -> Vec<Point> {
        let [r1, r2, r3] = self.radii;
        let a3 = self.alpha3();
        let a2 = self.angles[1];
        vec![
            Point::new(r1, 0.0),
            Point::new(r2 * a3.cos(), r2 * a3.sin()),
            Point::new(r3 * a2.cos(), -r3 * a2.sin()),
        ]
    }

    pub fn involution(&self) -> Self {
        Self {
            radii: self.radii,
            angles: [wrap_angle(0.0 - self.angles[0]), wrap_angle(0.0 - self.angles[1])],
        }
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_pole(&self) -> bool {
        let d = self.distances();
        d.iter().copied().fold(f64::INFINITY, f64::min) < POLE_RADIUS * self.min_radius()
    }
}

/// Distance between points at radii `a`, `b` separated by central angle `alpha`.
///
/// Written as `(a-b)² + 4ab·sin²(α/2)`, which is the cosine rule without the
/// cancellation near `α = 0`.
pub fn chord(a: f64, b: f64, alpha: f64) -> f64 {
    let s = (0.5 * alpha).sin();
    ((a - b) * (a - b) + 4.0 * a * b * s * s).sqrt()
}

/// Reduces an angle to `(-π, π]`; values already in range are returned unchanged.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// The four aligned torus configurations, named by `(α1, α2, α3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TorusLabel {
    PiPiZero,
    ZeroPiPi,
    PiZeroPi,
    ZeroZeroZero,
}

impl TorusLabel {
    pub const ALL: [TorusLabel; 4] =
        [TorusLabel::PiPiZero, TorusLabel::ZeroPiPi, TorusLabel::PiZeroPi, TorusLabel::ZeroZeroZero];

    /// `(α1, α2, α3)` with each entry 0 or π.
    pub fn angles(self) -> [f64; 3] {
        match self {
            TorusLabel::PiPiZero => [PI, PI, 0.0],
            TorusLabel::ZeroPiPi => [0.0, PI, PI],
            TorusLabel::PiZeroPi => [PI, 0.0, PI],
            TorusLabel::ZeroZeroZero => [0.0, 0.0, 0.0],
        }
    }

    pub fn config(self, radii: [f64; 3]) -> Result<TorusConfig> {
        let [a1, a2, _] = self.angles();
        TorusConfig::new(radii, [a1, a2])
    }

    /// Identifies the label of an aligned configuration.
    pub fn of(config: &TorusConfig) -> Option<TorusLabel> {
        let near = |a: f64, target: f64| (wrap_angle(a - target)).abs() < 1e-9;
        let [a1, a2, a3] = config.all_angles();
        TorusLabel::ALL.into_iter().find(|l| {
            let t = l.angles();
            near(a1, t[0]) && near(a2, t[1]) && near(a3, t[2])
        })
    }
}

impl fmt::Display for TorusLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TorusLabel::PiPiZero => "(pi,pi,0)",
            TorusLabel::ZeroPiPi => "(0,pi,pi)",
            TorusLabel::PiZeroPi => "(pi,0,pi)",
            TorusLabel::ZeroZeroZero => "(0,0,0)",
        };
        f.write_str(s)
    }
}

/// Names an aligned configuration: for polygons the vertex order along the
/// line, for the torus one of the four angle labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignedLabel {
    Polygon(Vec<usize>),
    Torus(TorusLabel),
}

/// Sorted pairwise-distance multiset rounded to [`KEY_QUANTUM`]. Shared by a
/// configuration and its mirror image.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymmetryKey(pub Vec<i64>);

impl fmt::Display for SymmetryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(":"))
    }
}

/// Either configuration space, serialized with a `space` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum Configuration {
    Polygon(PolygonConfig),
    Torus(TorusConfig),
}

impl From<PolygonConfig> for Configuration {
    fn from(c: PolygonConfig) -> Self {
        Configuration::Polygon(c)
    }
}

impl From<TorusConfig> for Configuration {
    fn from(c: TorusConfig) -> Self {
        Configuration::Torus(c)
    }
}

impl Configuration {
    pub fn len(&self) -> usize {
        match self {
            Configuration::Polygon(p) => p.len(),
            Configuration::Torus(_) => 3,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Point> {
        match self {
            Configuration::Polygon(p) => p.points().to_vec(),
            Configuration::Torus(t) => t.points(),
        }
    }

    pub fn pairwise_distances(&self) -> DMatrix<f64> {
        match self {
            Configuration::Polygon(p) => {
                let pts = p.points();
                let n = pts.len();
                DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (pts[i] - pts[j]).norm() })
            }
            Configuration::Torus(t) => {
                let [d1, d2, d3] = t.distances();
                let mut m = DMatrix::zeros(3, 3);
                m[(1, 2)] = d1;
                m[(2, 1)] = d1;
                m[(2, 0)] = d2;
                m[(0, 2)] = d2;
                m[(0, 1)] = d3;
                m[(1, 0)] = d3;
                m
            }
        }
    }

    pub fn min_distance(&self) -> f64 {
        let d = self.pairwise_distances();
        let n = d.nrows();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                m = m.min(d[(i, j)]);
            }
        }
        m
    }

    pub fn diameter(&self) -> f64 {
        self.pairwise_distances().max()
    }

    pub fn is_pole(&self) -> bool {
        match self {
            Configuration::Polygon(p) => p.is_pole(),
            Configuration::Torus(t) => t.is_pole(),
        }
    }

    pub fn apply_involution(&self) -> Self {
        match self {
            Configuration::Polygon(p) => Configuration::Polygon(p.involution()),
            Configuration::Torus(t) => Configuration::Torus(t.involution()),
        }
    }

    /// Maximum distance of a point from the second-moment best-fit line,
    /// or 0 when that is below `1e-10 · diameter`.
    pub fn alignment_defect(&self) -> f64 {
        alignment_defect_of(&self.points())
    }

    pub fn is_aligned(&self) -> bool {
        self.alignment_defect() == 0.0
    }

    pub fn symmetry_key(&self) -> SymmetryKey {
        let d = self.pairwise_distances();
        let n = d.nrows();
        let mut v = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                v.push((d[(i, j)] / KEY_QUANTUM).round() as i64);
            }
        }
        v.sort_unstable();
        SymmetryKey(v)
    }

    /// Re-imposes the gauge and returns the symmetry key alongside.
    pub fn canonicalize(&self) -> (Self, SymmetryKey) {
        let c = match self {
            Configuration::Polygon(p) => Configuration::Polygon(p.canonical()),
            Configuration::Torus(t) => Configuration::Torus(t.clone()),
        };
        let key = c.symmetry_key();
        (c, key)
    }

    /// Max coordinate difference in the stored chart (angles compared mod 2π).
    pub fn chart_distance(&self, other: &Configuration) -> f64 {
        match (self, other) {
            (Configuration::Polygon(a), Configuration::Polygon(b)) if a.len() == b.len() => a
                .points()
                .iter()
                .zip(b.points())
                .map(|(p, q)| (p - q).amax())
                .fold(0.0, f64::max),
            (Configuration::Torus(a), Configuration::Torus(b)) => {
                let da = wrap_angle(a.angles[0] - b.angles[0]).abs();
                let db = wrap_angle(a.angles[1] - b.angles[1]).abs();
                da.max(db)
            }
            _ => f64::INFINITY,
        }
    }
}

/// Which configuration space to search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Space {
    Polygon { n: usize },
    Torus { radii: [f64; 3] },
}

impl Space {
    /// Dimension of the chart: `2(n-2)` for polygons, 2 for the torus.
    pub fn chart_dim(&self) -> usize {
        match self {
            Space::Polygon { n } => 2 * (n - 2),
            Space::Torus { .. } => 2,
        }
    }

    pub fn n_points(&self) -> usize {
        match self {
            Space::Polygon { n } => *n,
            Space::Torus { .. } => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Space::Polygon { n } if *n < 3 => {
                Err(Error::InvalidConfig(format!("polygon space needs n >= 3, got {n}")))
            }
            Space::Torus { radii } if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) => {
                Err(Error::InvalidConfig(format!("radii must be positive: {radii:?}")))
            }
            _ => Ok(()),
        }
    }

    pub fn distinct_radii(&self) -> bool {
        match self {
            Space::Torus { radii: [a, b, c] } => a != b && b != c && a != c,
            Space::Polygon { .. } => false,
        }
    }
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("space {s:?}: expected polygon:n or torus:r1,r2,r3")))?;
        let space = match kind {
            "polygon" => Space::Polygon {
                n: rest
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidConfig(format!("polygon size {rest:?}: {e}")))?,
            },
            "torus" => {
                let r = rest
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::InvalidConfig(format!("radii {rest:?}: {e}")))?;
                let radii: [f64; 3] = r
                    .try_into()
                    .map_err(|_| Error::InvalidConfig(format!("torus needs three radii, got {rest:?}")))?;
                Space::Torus { radii }
            }
            other => return Err(Error::InvalidConfig(format!("unknown space {other:?}"))),
        };
        space.validate()?;
        Ok(space)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Polygon { n } => write!(f, "polygon:{n}"),
            Space::Torus { radii: [a, b, c] } => write!(f, "torus:{a},{b},{c}"),
        }
    }
}

pub(crate) fn perimeter_of(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| (pts[(i + 1) % n] - pts[i]).norm()).sum()
}

pub(crate) fn min_pair_distance(pts: &[Point]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.min((pts[i] - pts[j]).norm());
        }
    }
    m
}

pub(crate) fn diameter_of(pts: &[Point]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.max((pts[i] - pts[j]).norm());
        }
    }
    m
}

// Rotates so that the first vertex away from the origin sits on +x.
fn gauge_rotate(pts: &mut [Point]) {
    let Some(k) = (1..pts.len()).find(|&i| pts[i].norm() > 0.0) else {
        return;
    };
    let anchor = pts[k];
    if anchor.y == 0.0 && anchor.x > 0.0 {
        return;
    }
    let r = anchor.norm();
    let (c, s) = (anchor.x / r, anchor.y / r);
    for p in pts.iter_mut() {
        *p = Point::new(c * p.x + s * p.y, c * p.y - s * p.x);
    }
    pts[k] = Point::new(r, 0.0);
}

pub(crate) fn alignment_defect_of(pts: &[Point]) -> f64 {
    let n = pts.len() as f64;
    let diam = diameter_of(pts);
    if diam == 0.0 {
        return 0.0;
    }
    let c = pts.iter().fold(Point::zeros(), |acc, p| acc + p) / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // principal axis angle; the normal is perpendicular to it
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = Point::new(-theta.sin(), theta.cos());
    let defect = pts.iter().map(|p| (p - c).dot(&normal).abs()).fold(0.0, f64::max);
    if defect <= ALIGNMENT_TOL * diam {
        0.0
    } else {
        defect
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> PolygonConfig {
        PolygonConfig::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn torus_distances_collinear_same_ray() {
        let t = TorusConfig::new([1.0, 2.0, 3.0], [0.0, 0.0]).unwrap();
        let [d1, d2, d3] = t.distances();
        assert!((d1 - 1.0).abs() < 1e-14);
        assert!((d2 - 2.0).abs() < 1e-14);
        assert!((d3 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn torus_distances_at_pi_use_cosine_rule() {
        let t = TorusConfig::new([1.0, 2.0, 3.0], [PI, PI]).unwrap();
        let [d1, d2, d3] = t.distances();
        assert!((d1 - 5.0).abs() < 1e-14);
        assert!((d2 - 4.0).abs() < 1e-14);
        assert!((d3 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equilateral_distances() {
        let d = Configuration::from(equilateral()).pairwise_distances();
        for i in 0..3 {
            assert_eq!(d[(i, i)], 0.0);
            for j in 0..3 {
                if i != j {
                    assert!((d[(i, j)] - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn torus_distances_match_embedded_points() {
        let t = TorusConfig::new([1.0, 2.5, 0.7], [0.4, -2.2]).unwrap();
        let pts = t.points();
        let [d1, d2, d3] = t.distances();
        assert!(((pts[1] - pts[2]).norm() - d1).abs() < 1e-14 * d1.max(1.0));
        assert!(((pts[2] - pts[0]).norm() - d2).abs() < 1e-14 * d2.max(1.0));
        assert!(((pts[0] - pts[1]).norm() - d3).abs() < 1e-14 * d3.max(1.0));
    }

    #[test]
    fn aligned_is_fixed_by_involution() {
        let seg = PolygonConfig::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(3.0, 0.0),
        ])
        .unwrap();
        assert_eq!(seg.involution(), seg);
        let t = TorusLabel::PiPiZero.config([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.involution(), t);
    }

    #[test]
    fn involution_mirrors_triangle() {
        let tri = equilateral();
        assert!(tri.points()[2].y > 0.0);
        let m = tri.involution();
        assert!(m.points()[2].y < 0.0);
        let d1 = Configuration::from(tri).pairwise_distances();
        let d2 = Configuration::from(m).pairwise_distances();
        assert!((d1 - d2).amax() < 1e-14);
    }

    #[test]
    fn torus_involution_negates_angles() {
        let t = TorusConfig::new([1.0, 2.0, 3.0], [0.3, -1.1]).unwrap();
        assert_eq!(t.involution().angles(), [-0.3, 1.1]);
        assert_eq!(t.involution().involution(), t);
    }

    #[test]
    fn alignment_defect_cases() {
        let seg = Configuration::from(
            PolygonConfig::from_points(vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(0.7, 0.0),
            ])
            .unwrap(),
        );
        assert_eq!(seg.alignment_defect(), 0.0);
        assert!(Configuration::from(equilateral()).alignment_defect() > 0.05);
        let t = Configuration::from(TorusLabel::PiPiZero.config([1.0, 2.0, 3.0]).unwrap());
        assert_eq!(t.alignment_defect(), 0.0);
    }

    #[test]
    fn rotated_copy_canonicalizes_identically() {
        let a = vec![Point::new(0.0, 0.0), Point::new(0.3, 0.1), Point::new(0.1, 0.4)];
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let b: Vec<Point> = a
            .iter()
            .map(|p| Point::new(c * p.x - s * p.y + 2.0, s * p.x + c * p.y - 1.0))
            .collect();
        let ca = Configuration::from(PolygonConfig::from_points(a).unwrap()).canonicalize();
        let cb = Configuration::from(PolygonConfig::from_points(b).unwrap()).canonicalize();
        assert!(ca.0.chart_distance(&cb.0) < 1e-14);
        assert_eq!(ca.1, cb.1);
    }

    #[test]
    fn mirror_shares_key_but_not_form() {
        let tri = Configuration::from(
            PolygonConfig::from_points(vec![
                Point::new(0.0, 0.0),
                Point::new(0.3, 0.0),
                Point::new(0.1, 0.2),
            ])
            .unwrap(),
        );
        let (c1, k1) = tri.canonicalize();
        let (c2, k2) = tri.apply_involution().canonicalize();
        assert_eq!(k1, k2);
        assert!(c1.chart_distance(&c2) > 0.1);
    }

    #[test]
    fn gauge_handles_coincident_second_vertex() {
        let p = PolygonConfig::from_points(vec![
            Point::new(1.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
        ])
        .unwrap();
        assert_eq!(p.points()[2].y, 0.0);
        assert!(p.points()[2].x > 0.0);
        assert!(p.is_pole());
    }

    #[test]
    fn charge_vector_rejects_nonpositive() {
        assert!(ChargeVector::new(vec![1.0, 0.0, 2.0]).is_err());
        assert!(ChargeVector::new(vec![1.0, -1.0]).is_err());
        let s = ChargeVector::signed(vec![1.0, -1.0]).unwrap();
        assert!(s.is_mixed_sign());
        let q: ChargeVector = "1,2,1".parse().unwrap();
        assert_eq!(q.normalized(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn space_parsing() {
        assert_eq!("polygon:3".parse::<Space>().unwrap(), Space::Polygon { n: 3 });
        assert_eq!(
            "torus:1,2,3".parse::<Space>().unwrap(),
            Space::Torus { radii: [1.0, 2.0, 3.0] }
        );
        assert!("polygon:2".parse::<Space>().is_err());
        assert!("torus:1,2".parse::<Space>().is_err());
        assert!("sphere:1".parse::<Space>().is_err());
    }

    #[test]
    fn convexity() {
        let sq = PolygonConfig::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(sq.is_convex());
        let bow = PolygonConfig::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(!bow.is_convex());
    }
}
