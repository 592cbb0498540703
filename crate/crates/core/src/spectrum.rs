//! Result types shared by both model pipelines.

use crate::odecore::{Admissibility, AsymptoticData};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    Generic,
    JuddianEntire,
    DegenerateSingle,
    DoublyDegenerate,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::Generic => "generic",
            PointKind::JuddianEntire => "juddian",
            PointKind::DegenerateSingle => "degenerate",
            PointKind::DoublyDegenerate => "doubly_degenerate",
        }
    }
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    /// Spectral parameter of the model (its exponent at a singular point).
    pub x_value: f64,
    pub energy: f64,
    pub kind: PointKind,
    pub multiplicity: u8,
    /// `±1`, only for symmetric parameter sets.
    pub parity: Option<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// A sign change rejected because the function blows up across it.
    PoleSkipped { x: f64, residual: f64 },
    /// A candidate point where the condition could not be evaluated.
    EvaluationFailed { x: f64, message: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::PoleSkipped { x, residual } => {
                write!(f, "pole skipped near x = {x:.12} (|f| = {residual:.3e})")
            }
            Diagnostic::EvaluationFailed { x, message } => {
                write!(f, "evaluation failed at x = {x:.12}: {message}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    /// Sorted by `x_value`.
    pub points: Vec<SpectrumPoint>,
    pub diagnostics: Vec<Diagnostic>,
    pub asymptotics: AsymptoticData,
    pub admissibility: Admissibility,
}

impl SpectrumSet {
    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    /// Energies repeated according to multiplicity.
    pub fn energies_with_multiplicity(&self) -> Vec<f64> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.energy, p.multiplicity as usize))
            .collect()
    }
}

/// Scan parameters for the spectrum pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    pub range: (f64, f64),
    pub step: f64,
    pub refine_tol: f64,
    /// Exclusion half-width around integer-exponent points, in units of
    /// `refine_tol`.
    pub exclusion_factor: f64,
}

impl SpectrumConfig {
    pub fn new(lo: f64, hi: f64) -> Self {
        SpectrumConfig { range: (lo, hi), step: 0.005, refine_tol: 1e-10, exclusion_factor: 10.0 }
    }

    pub fn exclusion_half_width(&self) -> f64 {
        self.exclusion_factor * self.refine_tol
    }
}

/// Sort by x and merge points closer than `tol`, keeping the most specific
/// classification.
pub(crate) fn merge_points(mut pts: Vec<SpectrumPoint>, tol: f64) -> Vec<SpectrumPoint> {
    pts.sort_by(|a, b| a.x_value.total_cmp(&b.x_value));
    let mut out: Vec<SpectrumPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last_mut() {
            Some(last) if (p.x_value - last.x_value).abs() <= tol => {
                if (p.kind != PointKind::Generic && last.kind == PointKind::Generic)
                    || p.multiplicity > last.multiplicity
                {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    out
}
