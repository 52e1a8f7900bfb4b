//! Inverse problem: charges that make a given configuration critical.

use serde::{Deserialize, Serialize};

use crate::config::{ChargeVector, Configuration, Point, PolygonConfig, TorusConfig};
use crate::error::{Error, Result};
use crate::potential::{energy_report, PotentialSpec};

/// Pass threshold for the scale-free stationarity residuals.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseKind {
    UniqueRay,
    OneParameterFamily,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum ChargeFamily {
    /// Outer charges fixed up to scale, intermediate charge free. Every
    /// positive intermediate charge keeps the configuration critical; it is a
    /// minimum only up to `minimality_bound`.
    Aligned {
        intermediate: usize,
        /// Outer charges normalized to sum 1, zero at `intermediate`.
        outer: [f64; 3],
        /// `1/(1/√q_j + 1/√q_k)²` for the normalized outer charges.
        minimality_bound: f64,
    },
    /// Every positive charge vector.
    PositiveOctant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseResult {
    pub kind: InverseKind,
    /// Representative charges summing to 1; absent when infeasible.
    pub charges: Option<Vec<f64>>,
    pub family: Option<ChargeFamily>,
    pub note: Option<String>,
}

impl InverseResult {
    fn infeasible(note: String) -> Self {
        Self { kind: InverseKind::Infeasible, charges: None, family: None, note: Some(note) }
    }
}

fn normalize(q: [f64; 3]) -> [f64; 3] {
    let s: f64 = q.iter().sum();
    q.map(|v| v / s)
}

/// Charges making the triangle with sides `l1 = |p2p3|`, `l2 = |p3p1|`,
/// `l3 = |p1p2|` a Coulomb critical point: `q_i ∝ 1/l_i²`.
pub fn stabilizing_charges_triangle(l1: f64, l2: f64, l3: f64) -> Result<InverseResult> {
    let l = [l1, l2, l3];
    if l.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain(format!("sides must be positive, got {l:?}")));
    }
    let per: f64 = l.iter().sum();
    let l = l.map(|v| v / per);
    let (imax, lmax) = l
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let rest = 1.0 - lmax;
    if (lmax - rest).abs() <= 1e-12 {
        // the longest side's opposite vertex sits between the other two
        let (j, k) = ((imax + 1) % 3, (imax + 2) % 3);
        // distance from the middle vertex to vertex j is the side opposite k
        return aligned_family(imax, l[k], l[j]);
    }
    if lmax > rest {
        return Ok(InverseResult::infeasible(format!(
            "sides {l:?} violate the triangle inequality"
        )));
    }
    Ok(InverseResult {
        kind: InverseKind::UniqueRay,
        charges: Some(normalize(l.map(|v| 1.0 / (v * v))).to_vec()),
        family: None,
        note: None,
    })
}

/// Charges making the aligned triangle `p1 – p2 – p3` with `|p1p2| = d_left`
/// and `|p2p3| = d_right` critical.
pub fn stabilizing_charges_aligned(d_left: f64, d_right: f64) -> Result<InverseResult> {
    aligned_family(1, d_right, d_left)
}

// `d_j`, `d_k`: distances from the middle vertex to its cyclic successors
fn aligned_family(intermediate: usize, d_j: f64, d_k: f64) -> Result<InverseResult> {
    if !(d_j > 0.0 && d_k > 0.0) {
        return Err(Error::Domain(format!("aligned distances must be positive, got {d_j}, {d_k}")));
    }
    if (d_j + d_k - 0.5).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "aligned distances must sum to 1/2 on the unit-perimeter space, got {}",
            d_j + d_k
        )));
    }
    let (j, k) = ((intermediate + 1) % 3, (intermediate + 2) % 3);
    let (wj, wk) = (d_j * d_j, d_k * d_k);
    let mut outer = [0.0; 3];
    outer[j] = wj / (wj + wk);
    outer[k] = wk / (wj + wk);
    let bound = 1.0 / (1.0 / outer[j].sqrt() + 1.0 / outer[k].sqrt()).powi(2);
    let mut rep = outer;
    rep[intermediate] = 0.5 * bound;
    Ok(InverseResult {
        kind: InverseKind::OneParameterFamily,
        charges: Some(normalize(rep).to_vec()),
        family: Some(ChargeFamily::Aligned { intermediate, outer, minimality_bound: bound }),
        note: None,
    })
}

/// Per-term stationarity weights on the torus: `k_i = φ'(d_i) r_j r_k sin α_i / d_i`.
/// The configuration is critical for charges `q` iff `q_j q_k k_i` is the same for all `i`.
fn torus_weights(t: &TorusConfig, spec: &PotentialSpec) -> Result<[f64; 3]> {
    let r = t.radii();
    let a = t.all_angles();
    let d = t.distances();
    let mut k = [0.0; 3];
    for i in 0..3 {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        let (_, dphi, _) = spec.kernel(d[i])?;
        k[i] = dphi * r[j] * r[l] * a[i].sin() / d[i];
    }
    Ok(k)
}

/// Positive charges making a torus configuration critical: `q_i ∝ k_i`
/// when the weights share a sign, every charge vector when aligned.
pub fn stabilizing_charges_torus(config: &TorusConfig, spec: &PotentialSpec) -> Result<InverseResult> {
    if config.is_pole() {
        return Err(Error::Pole { min_distance: config.distances().iter().copied().fold(f64::INFINITY, f64::min) });
    }
    if Configuration::Torus(config.clone()).is_aligned() {
        return Ok(InverseResult {
            kind: InverseKind::OneParameterFamily,
            charges: Some(vec![1.0 / 3.0; 3]),
            family: Some(ChargeFamily::PositiveOctant),
            note: None,
        });
    }
    let k = torus_weights(config, spec)?;
    let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if k.iter().all(|v| *v > 0.0) || k.iter().all(|v| *v < 0.0) {
        return Ok(InverseResult {
            kind: InverseKind::UniqueRay,
            charges: Some(normalize(k.map(f64::abs)).to_vec()),
            family: None,
            note: None,
        });
    }
    let note = if k.iter().any(|v| v.abs() <= 1e-14 * scale) {
        format!("a vanishing stationarity weight forces a zero charge (weights {k:?})")
    } else {
        format!("stationarity needs charges of mixed sign, proportional to {k:?}")
    };
    Ok(InverseResult::infeasible(note))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub grad_norm: f64,
    /// Gradient norm divided by `(Σ|q|)²`.
    pub normalized_residual: f64,
    /// Relative residuals of the closed-form stationarity relations that
    /// apply to this configuration.
    pub relation_residuals: Vec<f64>,
    pub passed: bool,
}

/// Checks whether `config` is a critical point for `charges`.
pub fn verify_equilibrium(
    config: &Configuration,
    charges: &ChargeVector,
    spec: &PotentialSpec,
) -> Result<EquilibriumReport> {
    let r = energy_report(config, charges, spec)?;
    if r.pole_flag {
        return Err(Error::Pole { min_distance: config.min_distance() });
    }
    let grad_norm = r.gradient.norm();
    let normalized = grad_norm / charges.quadratic_scale();
    let relations = match config {
        Configuration::Polygon(p) if p.len() == 3 && *spec == PotentialSpec::Coulomb => {
            triangle_relations(p, charges.values())
        }
        Configuration::Torus(t) if !config.is_aligned() => {
            let k = torus_weights(t, spec)?;
            let q = charges.values();
            let terms = [q[1] * q[2] * k[0], q[2] * q[0] * k[1], q[0] * q[1] * k[2]];
            vec![spread(&terms)]
        }
        _ => Vec::new(),
    };
    let passed = normalized < EQUILIBRIUM_TOL && relations.iter().all(|v| *v < EQUILIBRIUM_TOL);
    Ok(EquilibriumReport { grad_norm, normalized_residual: normalized, relation_residuals: relations, passed })
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        0.0
    } else {
        (hi - lo) / scale
    }
}

fn triangle_relations(p: &PolygonConfig, q: &[f64]) -> Vec<f64> {
    let pts: &[Point] = p.points();
    let l = [(pts[1] - pts[2]).norm(), (pts[2] - pts[0]).norm(), (pts[0] - pts[1]).norm()];
    if Configuration::Polygon(p.clone()).is_aligned() {
        // middle vertex i: d(i,j)/d(i,k) = √(q_j/q_k)
        let i = (0..3).max_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap();
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let ratio = l[k] / l[j];
        let expected = (q[j] / q[k]).sqrt();
        vec![(ratio - expected).abs() / expected]
    } else {
        vec![spread(&[l[0] * l[0] * q[0], l[1] * l[1] * q[1], l[2] * l[2] * q[2]])]
    }
}
