//! Output records and CSV layouts.
//!
//! `branches.csv`: `lambda,q1,q2,q3,branch,amplitude,energy,stability`, one
//! row per branch point. `branch` is `aligned` for the tracked aligned point
//! and `upper`/`lower` for the mirror pair leaving it.
//!
//! `curves.csv`: `curve,q1,q2,q3`, one row per sample of each curve.

use std::fmt::Write;

use serde::Serialize;

use coulomb_eq::bifurcation::{BifurcationCurve, BranchDiagram};
use coulomb_eq::morse::EulerCheck;
use coulomb_eq::{Configuration, CriticalPoint};

use crate::manifest::fmt_f64;

#[derive(Debug, Serialize)]
pub struct PointRecord {
    /// Polygon: `x1, y1, ..., xn, yn`; torus: `α1, α2`.
    pub coords: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    pub eigenvalues: Vec<f64>,
    /// Absent for degenerate points.
    pub index: Option<usize>,
    pub aligned: bool,
    pub degenerate: bool,
    pub partner: Option<usize>,
}

pub fn point_record(p: &CriticalPoint) -> PointRecord {
    let coords = match &p.config {
        Configuration::Polygon(c) => c.points().iter().flat_map(|v| [v.x, v.y]).collect(),
        Configuration::Torus(t) => t.angles().to_vec(),
    };
    PointRecord {
        coords,
        energy: p.energy,
        grad_norm: p.grad_norm,
        eigenvalues: p.hessian_eigenvalues.clone(),
        index: (!p.degenerate).then_some(p.morse_index),
        aligned: p.aligned,
        degenerate: p.degenerate,
        partner: p.partner,
    }
}

pub fn euler_label(c: &EulerCheck) -> String {
    match c {
        EulerCheck::Passed => "pass".into(),
        EulerCheck::Failed => "FAIL".into(),
        EulerCheck::NotApplicable(r) => format!("not applicable ({r})"),
        EulerCheck::Skipped(r) => format!("skipped ({r})"),
    }
}

pub fn branches_csv(d: &BranchDiagram) -> String {
    let mut s = String::from("lambda,q1,q2,q3,branch,amplitude,energy,stability\n");
    for sample in &d.samples {
        let q = sample.charges.map(fmt_f64);
        let mut row = |branch: &str, b: &coulomb_eq::bifurcation::BranchPoint| {
            writeln!(
                s,
                "{},{},{},{},{branch},{},{},{}",
                fmt_f64(sample.lambda),
                q[0],
                q[1],
                q[2],
                fmt_f64(b.amplitude),
                fmt_f64(b.energy),
                b.stability
            )
            .unwrap();
        };
        row("aligned", &sample.aligned);
        for (b, name) in sample.off_axis.iter().zip(["upper", "lower"]) {
            row(name, b);
        }
    }
    s
}

pub fn curves_csv(curves: &[BifurcationCurve]) -> String {
    let mut s = String::from("curve,q1,q2,q3\n");
    for c in curves {
        for p in &c.samples {
            writeln!(s, "\"{}\",{},{},{}", c.label, fmt_f64(p.0[0]), fmt_f64(p.0[1]), fmt_f64(p.0[2])).unwrap();
        }
    }
    s
}
