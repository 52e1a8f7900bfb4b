//! Morse classification and topological counts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::{ChargeVector, Configuration, PolygonConfig, Space, TorusLabel, POLE_RADIUS};
use crate::error::{Error, Result};
use crate::potential::{hessian, PotentialSpec};
use crate::solver::{is_degenerate, sorted_eigenvalues, CriticalPoint, DEGENERACY_TOL};

/// Number of negative Hessian eigenvalues of a non-degenerate critical point.
pub fn morse_index(cp: &CriticalPoint) -> Result<usize> {
    if cp.degenerate {
        let e = &cp.hessian_eigenvalues;
        return Err(Error::Degenerate {
            min_abs: e.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
            radius: e.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        });
    }
    Ok(cp.hessian_eigenvalues.iter().filter(|v| **v < 0.0).count())
}

/// Coefficients `(c1, c2, c3)` of the linear form in the charges whose sign is
/// the sign of the Hessian determinant at an aligned torus configuration:
/// `c1 = r1 cos α2 cos α3 / (d2³ d3³)` and cyclically.
///
/// The determinant itself equals `q1 q2 q3 · r1 r2 r3 · (c · q)` for the
/// Coulomb energy.
pub fn torus_aligned_hessian_form(radii: [f64; 3], label: TorusLabel) -> Result<[f64; 3]> {
    let [r1, r2, r3] = radii;
    if r1 == r2 || r2 == r3 || r1 == r3 {
        return Err(Error::Domain(format!("aligned Hessian form needs distinct radii, got {radii:?}")));
    }
    let t = label.config(radii)?;
    let d = t.distances();
    if d.iter().any(|v| *v < POLE_RADIUS * t.min_radius()) {
        return Err(Error::Pole { min_distance: d.iter().copied().fold(f64::INFINITY, f64::min) });
    }
    // use exact ±1 rather than cos(π) to keep the sign pattern clean
    let c = label.angles().map(|a| if a == 0.0 { 1.0 } else { -1.0 });
    let d3 = d.map(|v| v * v * v);
    Ok([
        r1 * c[1] * c[2] / (d3[1] * d3[2]),
        r2 * c[2] * c[0] / (d3[2] * d3[0]),
        r3 * c[0] * c[1] / (d3[0] * d3[1]),
    ])
}

pub fn form_value(coeffs: [f64; 3], q: &[f64]) -> f64 {
    coeffs.iter().zip(q).map(|(c, v)| c * v).sum()
}

/// Splits the chart Hessian of an aligned polygon into its x (along the
/// line) and y (transverse) blocks. The mixed block is returned too so that
/// callers can confirm it vanishes.
pub fn aligned_polygon_blocks(
    config: &PolygonConfig,
    q: &ChargeVector,
    spec: &PotentialSpec,
) -> Result<AlignedBlocks> {
    let c = Configuration::Polygon(config.clone());
    if !c.is_aligned() {
        return Err(Error::InvalidConfig("configuration is not aligned".into()));
    }
    let h = hessian(&c, q, spec)?;
    let k = config.len() - 2;
    Ok(AlignedBlocks {
        along: h.view((0, 0), (k, k)).into_owned(),
        transverse: h.view((k, k), (k, k)).into_owned(),
        mixed: h.view((0, k), (k, k)).into_owned(),
    })
}

#[derive(Debug, Clone)]
pub struct AlignedBlocks {
    pub along: DMatrix<f64>,
    pub transverse: DMatrix<f64>,
    pub mixed: DMatrix<f64>,
}

impl AlignedBlocks {
    /// Morse index of the same configuration with the ambient space a line.
    pub fn line_index(&self) -> usize {
        sorted_eigenvalues(&self.along).iter().filter(|v| **v < 0.0).count()
    }

    pub fn transverse_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.transverse)
    }

    pub fn transverse_positive_definite(&self) -> bool {
        self.transverse_eigenvalues().first().is_some_and(|v| *v > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum EulerCheck {
    Passed,
    Failed,
    NotApplicable(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseSummary {
    /// Critical points per Morse index.
    pub counts: Vec<usize>,
    pub minima: usize,
    pub saddles: usize,
    pub maxima: usize,
    pub degenerate: usize,
    /// Pole configurations counted as maxima (triangles only).
    pub poles_count: Option<usize>,
    /// Alternating count that was compared with the expected characteristic.
    pub euler_value: Option<i64>,
    pub euler_check: EulerCheck,
    /// Torus only: whether exactly four critical points were found.
    pub exact: Option<bool>,
}

impl MorseSummary {
    pub fn passed(&self) -> bool {
        !matches!(self.euler_check, EulerCheck::Failed)
    }
}

/// Counts critical points by type and checks the Euler identity where one
/// applies: `#min - #saddle + #max + 3 poles = 2` on triangles,
/// `#min - #saddle + #max = 0` on the torus.
pub fn euler_count_check(points: &[CriticalPoint], space: &Space) -> MorseSummary {
    let dim = space.chart_dim();
    let mut counts = vec![0usize; dim + 1];
    let mut degenerate = 0;
    for p in points {
        if p.degenerate {
            degenerate += 1;
        } else {
            counts[p.morse_index.min(dim)] += 1;
        }
    }
    let minima = counts[0];
    let maxima = counts[dim];
    let saddles: usize = counts[1..dim].iter().sum();
    // alternating sum over all indices
    let alternating: i64 = counts
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { *c as i64 } else { -(*c as i64) })
        .sum();

    let mut summary = MorseSummary {
        counts,
        minima,
        saddles,
        maxima,
        degenerate,
        poles_count: None,
        euler_value: None,
        euler_check: EulerCheck::NotApplicable(String::new()),
        exact: None,
    };
    match space {
        Space::Polygon { n: 3 } => {
            summary.poles_count = Some(3);
            if degenerate > 0 {
                summary.euler_check = EulerCheck::Skipped(format!("{degenerate} degenerate point(s)"));
            } else {
                let v = alternating + 3;
                summary.euler_value = Some(v);
                summary.euler_check = if v == 2 { EulerCheck::Passed } else { EulerCheck::Failed };
            }
        }
        Space::Polygon { n } => {
            summary.euler_check =
                EulerCheck::NotApplicable(format!("no Euler check for polygons with n = {n} > 3"));
        }
        Space::Torus { .. } => {
            summary.exact = Some(points.len() == 4);
            if degenerate > 0 {
                summary.euler_check = EulerCheck::Skipped(format!("{degenerate} degenerate point(s)"));
            } else {
                summary.euler_value = Some(alternating);
                summary.euler_check =
                    if alternating == 0 { EulerCheck::Passed } else { EulerCheck::Failed };
            }
        }
    }
    summary
}

/// Whether a spectrum counts as degenerate under the crate-wide tolerance.
pub fn spectrum_degenerate(eigs: &[f64]) -> bool {
    is_degenerate(eigs)
}

pub const RELATIVE_DEGENERACY_TOL: f64 = DEGENERACY_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{classify, line_segment};

    fn q(v: &[f64]) -> ChargeVector {
        ChargeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_zero_zero_form_is_positive() {
        let c = torus_aligned_hessian_form([1.0, 2.0, 3.0], TorusLabel::ZeroZeroZero).unwrap();
        assert!(c.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn pi_pi_zero_form_values() {
        let c = torus_aligned_hessian_form([1.0, 2.0, 3.0], TorusLabel::PiPiZero).unwrap();
        let expected = [-1.0 / 64.0, -2.0 / 125.0, 3.0 / 8000.0];
        for i in 0..3 {
            assert!((c[i] - expected[i]).abs() < 1e-15);
        }
        let h = form_value(c, &[1.0, 1.0, 1.0]);
        assert!((h - (-1.0 / 64.0 - 2.0 / 125.0 + 3.0 / 8000.0)).abs() < 1e-15);
        assert!(h < 0.0);
    }

    #[test]
    fn sign_patterns_of_remaining_labels() {
        let sign = |l| torus_aligned_hessian_form([1.0, 2.0, 3.0], l).unwrap().map(f64::signum);
        assert_eq!(sign(TorusLabel::ZeroPiPi), [1.0, -1.0, -1.0]);
        assert_eq!(sign(TorusLabel::PiZeroPi), [-1.0, 1.0, -1.0]);
    }

    #[test]
    fn coincident_radii_rejected() {
        assert!(torus_aligned_hessian_form([1.0, 1.0, 3.0], TorusLabel::PiPiZero).is_err());
    }

    #[test]
    fn indices_of_known_points() {
        let qq = q(&[1.0, 1.0, 1.0]);
        let tri = crate::solver::critical_triangle(&qq).unwrap().unwrap();
        let cp = classify(&tri.into(), &qq, &PotentialSpec::Coulomb).unwrap();
        assert_eq!(morse_index(&cp).unwrap(), 0);
        for i in 0..3 {
            let cp = classify(&line_segment([1.0; 3], i).into(), &qq, &PotentialSpec::Coulomb).unwrap();
            assert_eq!(morse_index(&cp).unwrap(), 1);
        }
        for charges in [[1.0, 2.0, 3.0], [0.1, 5.0, 0.3]] {
            let t = TorusLabel::ZeroZeroZero.config([1.0, 2.0, 3.0]).unwrap();
            let cp = classify(&t.into(), &q(&charges), &PotentialSpec::Coulomb).unwrap();
            assert_eq!(morse_index(&cp).unwrap(), 2);
        }
    }

    #[test]
    fn degenerate_point_refuses_index() {
        let qq = q(&[1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0]);
        let cp = classify(&line_segment([1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0], 0).into(), &qq, &PotentialSpec::Coulomb)
            .unwrap();
        assert!(cp.degenerate, "{:?}", cp.hessian_eigenvalues);
        assert!(morse_index(&cp).is_err());
    }

    #[test]
    fn aligned_blocks_decouple() {
        let seg = line_segment([1.0, 0.3, 2.0], 1);
        let b = aligned_polygon_blocks(&seg, &q(&[1.0, 0.3, 2.0]), &PotentialSpec::Coulomb).unwrap();
        assert!(b.mixed.amax() < 1e-8);
        assert_eq!(b.line_index(), 0);
    }
}
