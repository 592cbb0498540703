//! Rabi model with a symmetry-breaking term,
//! `H = a†a + μσ_z + λσ_x(a + a†) + εσ_x`.
//!
//! In the Bargmann representation (spin components in the σ_x basis) the
//! system is
//!
//! ```text
//! (z+λ)ψ₁' + (λz + ε − E)ψ₁ + μψ₂ = 0
//! (z−λ)ψ₂' − (λz + ε + E)ψ₂ + μψ₁ = 0
//! ```
//!
//! and `v(y) = e^{−2λ²y} ψ₁(λ(2y−1))` satisfies a confluent Heun equation
//! whose regular singular points `y = 0, 1` sit at `z = ∓λ`. The spectral
//! parameter is `x = E + λ²`.

use crate::heun::{INTEGER_TOL, 
    heun_series, log_obstruction, positive_integer, Branch, Center, HeunError, HeunParams, LocalSeries,
    TruncationPolicy,
};
use crate::odecore::{
    bargmann_admissibility, irregular_infinity_data, AsymptoticData, OdeError, Poly, RationalODE,
};
use crate::spectral::{scan_zeros, ScanConfig, SpectralError};
use crate::spectrum::{merge_points, Diagnostic, PointKind, SpectrumConfig, SpectrumPoint, SpectrumSet};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

type C = Complex64;

/// Relative size below which a Wronskian of two local solutions counts as
/// vanishing at an integer-exponent point.
pub const DEGENERATE_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Model1Error {
    #[error("coupling λ must be nonzero for the Heun pipeline")]
    ZeroCoupling,
    #[error("integer exponent gap (x − ε = {gap0}, 1 + x + ε = {gap1}); use degenerate_case_W")]
    DegenerateExponent { gap0: f64, gap1: f64 },
    #[error("no integer exponent gap at x = {0}")]
    NotDegenerate(f64),
    #[error("μ = 0 decouples the system; ψ₂ cannot be recovered from ψ₁")]
    MuZero,
    #[error("x = {0} is not a spectrum point")]
    NotInSpectrum(f64),
    #[error(transparent)]
    Heun(#[from] HeunError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1Params {
    pub x: f64,
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
}

impl Model1Params {
    pub fn new(x: f64, lambda: f64, mu: f64, eps: f64) -> Self {
        Model1Params { x, lambda, mu, eps }
    }

    pub fn from_energy(e: f64, lambda: f64, mu: f64, eps: f64) -> Self {
        Model1Params { x: e + lambda * lambda, lambda, mu, eps }
    }

    pub fn energy(&self) -> f64 {
        self.x - self.lambda * self.lambda
    }

    /// Exponent gap at `y = 0`.
    pub fn gap0(&self) -> f64 {
        self.x - self.eps
    }

    /// Exponent gap at `y = 1`.
    pub fn gap1(&self) -> f64 {
        1.0 + self.x + self.eps
    }

    pub fn integer_gap0(&self) -> Option<u32> {
        positive_integer(self.gap0())
    }

    pub fn integer_gap1(&self) -> Option<u32> {
        positive_integer(self.gap1())
    }

    /// Equivalent problem with nonnegative λ, μ, ε (same energies).
    pub fn canonical(&self) -> Self {
        Model1Params { x: self.x, lambda: self.lambda.abs(), mu: self.mu.abs(), eps: self.eps.abs() }
    }

    /// Heun parameters; exponent gaps within the integer tolerance are snapped
    /// to the integer.
    pub fn heun_params(&self) -> HeunParams {
        let (x, l, m, e) = (self.x, self.lambda, self.mu, self.eps);
        let l2 = l * l;
        let beta = match self.integer_gap0() {
            Some(n) => -(n as f64),
            None => -x + e,
        };
        let gamma = match self.integer_gap1() {
            Some(n) => -(n as f64),
            None => -1.0 - x - e,
        };
        let two_eta = 1.0 - 2.0 * m * m + (1.0 + x) * (x - 4.0 * l2) + e * (1.0 + 4.0 * l2) - e * e;
        HeunParams::new(4.0 * l2, beta, gamma, 2.0 * (1.0 - 2.0 * e) * l2, 0.5 * two_eta)
    }

    /// The second-order equation for ψ₁ in `z`.
    pub fn ode(&self) -> Result<RationalODE, Model1Error> {
        let (l, m, e) = (self.lambda, self.mu, self.eps);
        let en = self.energy();
        let den = Poly::new(vec![-l * l, 0.0, 1.0]);
        let p_num = Poly::new(vec![-(l + 2.0 * e * l), -(2.0 * en - 1.0 + 2.0 * l * l)]);
        let q_num = Poly::new(vec![-(e * e - en * en + m * m + l * l), -(2.0 * e * l - l), -(l * l)]);
        Ok(RationalODE::new(p_num, den.clone(), q_num, den)?)
    }

    /// The confluent Heun equation for `v(y)`.
    pub fn heun_ode(&self) -> Result<RationalODE, Model1Error> {
        Ok(self.heun_params().ode()?)
    }

    /// Formal solutions at infinity: `(λ, E + λ² + ε − 1)` and `(−λ, E + λ² − ε)`.
    pub fn asymptotic_data(&self) -> AsymptoticData {
        let x = self.x;
        AsymptoticData::rank_one(vec![
            (C::new(self.lambda.abs(), 0.0), C::new(x + self.eps - 1.0, 0.0)),
            (C::new(-self.lambda.abs(), 0.0), C::new(x - self.eps, 0.0)),
        ])
    }
}

fn policy_for(y: f64) -> TruncationPolicy {
    let need = y.max(1.0 - y) + 0.05;
    TruncationPolicy::wronskian().with_reach(need.clamp(0.65, 0.95))
}

/// `L·R' − L'·R` at `y` and the scale `|L R'| + |L' R|`.
fn glue(left: &LocalSeries, right: &LocalSeries, y: f64) -> Result<(f64, f64), Model1Error> {
    let (l, dl) = left.eval(C::new(y, 0.0))?;
    let (r, dr) = right.eval(C::new(y, 0.0))?;
    let value = l * dr - dl * r;
    Ok((value.re, (l * dr).norm() + (dl * r).norm()))
}

/// Generic Wronskian at an arbitrary gluing point `y ∈ (0, 1)`.
pub fn wronskian_at(p: &Model1Params, y: f64) -> Result<f64, Model1Error> {
    if p.lambda == 0.0 {
        return Err(Model1Error::ZeroCoupling);
    }
    if p.integer_gap0().is_some() || p.integer_gap1().is_some() {
        return Err(Model1Error::DegenerateExponent { gap0: p.gap0(), gap1: p.gap1() });
    }
    let hp = p.heun_params();
    let pol = policy_for(y);
    let h1 = heun_series(&hp, Center::Zero, Branch::ZeroExponent, &pol)?;
    let h2 = heun_series(&hp, Center::One, Branch::ZeroExponent, &pol)?;
    Ok(glue(&h1, &h2, y)?.0)
}

/// `W(p) = H1·H2' − H1'·H2` at `y = 1/2`.
#[allow(non_snake_case)]
pub fn wronskian_W(p: &Model1Params) -> Result<f64, Model1Error> {
    wronskian_at(p, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateCase {
    /// Integer gap only at `center`: large-exponent series there, generic
    /// series at the other point.
    SingleGap { center: Center },
    /// Integer gaps at both points: both large-exponent series.
    BothGaps,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegenerateOutcome {
    WronskianValue { value: f64, scale: f64, case: DegenerateCase },
    /// The resonance obstruction vanishes at these centers: every local
    /// solution there is holomorphic, so an entire solution exists.
    EntireByDelta { centers: Vec<Center> },
}

impl DegenerateOutcome {
    /// Whether the point belongs to the spectrum.
    pub fn is_spectral(&self) -> bool {
        match self {
            DegenerateOutcome::WronskianValue { value, scale, .. } => value.abs() <= DEGENERATE_ZERO_TOL * scale,
            DegenerateOutcome::EntireByDelta { .. } => true,
        }
    }
}

#[allow(non_snake_case)]
pub fn degenerate_case_W(p: &Model1Params) -> Result<DegenerateOutcome, Model1Error> {
    if p.lambda == 0.0 {
        return Err(Model1Error::ZeroCoupling);
    }
    let hp = p.heun_params();
    let gaps = [(Center::Zero, p.integer_gap0()), (Center::One, p.integer_gap1())];
    if gaps.iter().all(|(_, g)| g.is_none()) {
        return Err(Model1Error::NotDegenerate(p.x));
    }
    let mut entire = Vec::new();
    for &(center, gap) in &gaps {
        if let Some(n) = gap {
            if log_obstruction(&hp, center, n)?.is_negligible(crate::heun::OBSTRUCTION_TOL) {
                entire.push(center);
            }
        }
    }
    if !entire.is_empty() {
        return Ok(DegenerateOutcome::EntireByDelta { centers: entire });
    }
    let pol = TruncationPolicy::wronskian();
    let local = |center: Center, gap: Option<u32>| {
        let branch = if gap.is_some() { Branch::LargeExponent } else { Branch::ZeroExponent };
        heun_series(&hp, center, branch, &pol)
    };
    let left = local(Center::Zero, gaps[0].1)?;
    let right = local(Center::One, gaps[1].1)?;
    let (value, scale) = glue(&left, &right, 0.5)?;
    let case = match (gaps[0].1, gaps[1].1) {
        (Some(_), Some(_)) => DegenerateCase::BothGaps,
        (Some(_), None) => DegenerateCase::SingleGap { center: Center::Zero },
        _ => DegenerateCase::SingleGap { center: Center::One },
    };
    Ok(DegenerateOutcome::WronskianValue { value, scale, case })
}

/// Coupling, splitting and bias; the spectral parameter is scanned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1Base {
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
}

impl Model1Base {
    pub fn new(lambda: f64, mu: f64, eps: f64) -> Self {
        Model1Base { lambda, mu, eps }
    }

    pub fn at(&self, x: f64) -> Model1Params {
        Model1Params::new(x, self.lambda, self.mu, self.eps)
    }
}

/// Integer-gap points `x = ε + n` and `x = n − 1 − ε` (n ≥ 1) in `[lo, hi]`.
pub fn degenerate_candidates(eps: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for offset in [eps, -1.0 - eps] {
        let first = (lo - offset).ceil().max(1.0) as i64;
        let mut n = first;
        while offset + n as f64 <= hi {
            out.push(offset + n as f64);
            n += 1;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn closed_form_uncoupled(base: &Model1Base, cfg: &SpectrumConfig) -> Vec<SpectrumPoint> {
    // λ = 0: E = n ± √(μ² + ε²), and x = E
    let r = (base.mu * base.mu + base.eps * base.eps).sqrt();
    let (lo, hi) = cfg.range;
    let mut pts = Vec::new();
    let top = hi.ceil() as i64 + 1;
    for n in 0..=top.max(0) {
        for e in [n as f64 - r, n as f64 + r] {
            if e >= lo && e <= hi {
                pts.push(SpectrumPoint { x_value: e, energy: e, kind: PointKind::Generic, multiplicity: 1, parity: None });
            }
        }
    }
    pts.sort_by(|a, b| a.x_value.total_cmp(&b.x_value));
    let mut out: Vec<SpectrumPoint> = Vec::new();
    for p in pts {
        match out.last_mut() {
            Some(last) if (last.x_value - p.x_value).abs() <= cfg.refine_tol => {
                last.kind = PointKind::DoublyDegenerate;
                last.multiplicity = 2;
            }
            _ => out.push(p),
        }
    }
    out
}

/// At μ = 0 the system splits into `L₁ψ₁ = 0` and `L₂ψ₂ = 0`, with entire
/// solutions when `x − ε` resp. `x + ε` is a nonnegative integer. The
/// equation for ψ₁ alone cannot see the sector with ψ₁ ≡ 0, so coinciding
/// sectors are counted here.
fn decoupled_sectors(p: &Model1Params) -> u8 {
    let nonneg_int = |v: f64| v.round() >= 0.0 && (v - v.round()).abs() <= INTEGER_TOL * v.abs().max(1.0);
    nonneg_int(p.x - p.eps) as u8 + nonneg_int(p.x + p.eps) as u8
}

/// Spectrum points with `x` in `cfg.range`, sorted by `x`.
pub fn spectrum_model1(base: &Model1Base, cfg: &SpectrumConfig) -> Result<SpectrumSet, Model1Error> {
    let canon = Model1Base::new(base.lambda.abs(), base.mu.abs(), base.eps.abs());
    let (lo, hi) = cfg.range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(cfg.step > 0.0) || !(cfg.refine_tol > 0.0) {
        return Err(SpectralError::InvalidConfig("range must be finite and ordered; step, refine_tol > 0".into()).into());
    }
    if canon.lambda == 0.0 {
        let points = closed_form_uncoupled(&canon, cfg);
        let asymptotics = AsymptoticData::at_regular_infinity();
        let admissibility = bargmann_admissibility(&asymptotics);
        return Ok(SpectrumSet { points, diagnostics: Vec::new(), asymptotics, admissibility });
    }

    let candidates = degenerate_candidates(canon.eps, lo, hi);
    let half = cfg.exclusion_half_width();
    let exclusions: Vec<(f64, f64)> = candidates.iter().map(|&c| (c - half, c + half)).collect();
    let scan_cfg = ScanConfig { step: cfg.step, refine_tol: cfg.refine_tol, ..Default::default() };
    let f = |x: f64| wronskian_W(&canon.at(x)).unwrap_or(f64::NAN);
    let scan = scan_zeros(&f, (lo, hi), &exclusions, &scan_cfg)?;

    let mut diagnostics: Vec<Diagnostic> = scan
        .poles
        .iter()
        .map(|b| Diagnostic::PoleSkipped { x: b.refined_root, residual: b.residual })
        .collect();
    let mut points: Vec<SpectrumPoint> = scan
        .roots
        .iter()
        .map(|b| SpectrumPoint {
            x_value: b.refined_root,
            energy: b.refined_root - canon.lambda * canon.lambda,
            kind: PointKind::Generic,
            multiplicity: 1,
            parity: None,
        })
        .collect();

    let classified: Vec<(f64, Result<DegenerateOutcome, Model1Error>)> =
        candidates.par_iter().map(|&x| (x, degenerate_case_W(&canon.at(x)))).collect();
    for (x, outcome) in classified {
        match outcome {
            Ok(o) if o.is_spectral() => {
                let (kind, multiplicity) = match &o {
                    _ if canon.mu == 0.0 && decoupled_sectors(&canon.at(x)) == 2 => (PointKind::DoublyDegenerate, 2),
                    DegenerateOutcome::EntireByDelta { centers } if centers.len() == 2 => (PointKind::DoublyDegenerate, 2),
                    DegenerateOutcome::EntireByDelta { .. } => (PointKind::JuddianEntire, 1),
                    DegenerateOutcome::WronskianValue { .. } => (PointKind::DegenerateSingle, 1),
                };
                points.push(SpectrumPoint {
                    x_value: x,
                    energy: x - canon.lambda * canon.lambda,
                    kind,
                    multiplicity,
                    parity: None,
                });
            }
            Ok(_) => {}
            Err(e) => diagnostics.push(Diagnostic::EvaluationFailed { x, message: e.to_string() }),
        }
    }

    let mut points = merge_points(points, half + 10.0 * cfg.refine_tol);
    if canon.eps == 0.0 && canon.mu != 0.0 {
        let parities: Vec<Option<i8>> = points
            .par_iter()
            .map(|pt| {
                if pt.multiplicity == 2 {
                    return None;
                }
                eigenfunction_model1(&canon.at(pt.x_value)).ok().and_then(|ef| ef.parity)
            })
            .collect();
        for (pt, par) in points.iter_mut().zip(parities) {
            pt.parity = par;
        }
    }

    let reference = canon.at(points.first().map(|p| p.x_value).unwrap_or(lo));
    let asymptotics = irregular_infinity_data(&reference.ode()?)?;
    let admissibility = bargmann_admissibility(&asymptotics);
    Ok(SpectrumSet { points, diagnostics, asymptotics, admissibility })
}

/// Eigenfunction reconstructed from local Heun solutions.
#[derive(Debug, Clone)]
pub struct Eigenfunction1 {
    pub params: Model1Params,
    /// Local solutions of the Heun equation with the factor that makes them
    /// agree with each other; evaluation uses the one whose center is nearer.
    pieces: Vec<(LocalSeries, C)>,
    pub parity: Option<i8>,
}

impl Eigenfunction1 {
    fn v(&self, y: C) -> Result<(C, C, C), Model1Error> {
        let (s, k) = self
            .pieces
            .iter()
            .min_by(|a, b| {
                let da = a.0.center.local_coordinate(y).norm();
                let db = b.0.center.local_coordinate(y).norm();
                da.total_cmp(&db)
            })
            .expect("at least one piece");
        let (v0, v1, v2) = s.eval_with_second(y)?;
        Ok((v0 * k, v1 * k, v2 * k))
    }

    /// `(ψ₁, ψ₁', ψ₁'')` at `z`.
    pub fn psi1(&self, z: C) -> Result<(C, C, C), Model1Error> {
        let l = self.params.lambda;
        let y = (z / l + 1.0) / 2.0;
        let (v0, v1, v2) = self.v(y)?;
        let l2 = l * l;
        let g = (2.0 * l2 * y).exp();
        let k = 1.0 / (2.0 * l);
        let p0 = g * v0;
        let p1 = g * (2.0 * l2 * v0 + v1) * k;
        let p2 = g * (4.0 * l2 * l2 * v0 + 4.0 * l2 * v1 + v2) * k * k;
        Ok((p0, p1, p2))
    }

    /// `(ψ₂, ψ₂')` at `z`, recovered from the first equation of the system.
    pub fn psi2(&self, z: C) -> Result<(C, C), Model1Error> {
        let Model1Params { lambda: l, mu, eps, .. } = self.params;
        let en = self.params.energy();
        let (p0, p1, p2) = self.psi1(z)?;
        let a = en - eps - l * z;
        let q0 = (a * p0 - (z + l) * p1) / mu;
        let q1 = (-l * p0 + a * p1 - p1 - (z + l) * p2) / mu;
        Ok((q0, q1))
    }
}

fn ratio_sign(samples: &[(C, C)]) -> Option<i8> {
    let mut sign = None;
    for &(a, b) in samples {
        if b.norm() < 1e-12 * (1.0 + a.norm()) {
            continue;
        }
        let r = a / b;
        let s: i8 = if r.re > 0.0 { 1 } else { -1 };
        if (r - s as f64).norm() > 1e-6 {
            return None;
        }
        if sign.is_some_and(|prev| prev != s) {
            return None;
        }
        sign = Some(s);
    }
    sign
}

/// Eigenfunction at a spectrum point. The point is not re-verified; it is
/// the caller's responsibility to pass an `x` from the spectrum.
pub fn eigenfunction_model1(p: &Model1Params) -> Result<Eigenfunction1, Model1Error> {
    if p.mu == 0.0 {
        return Err(Model1Error::MuZero);
    }
    if p.lambda == 0.0 {
        return Err(Model1Error::ZeroCoupling);
    }
    let hp = p.heun_params();
    let pol = TruncationPolicy::default();
    let (g0, g1) = (p.integer_gap0(), p.integer_gap1());
    let pieces = match degenerate_case_W(p) {
        Ok(DegenerateOutcome::EntireByDelta { centers }) => {
            // the Δ = 0 point imposes nothing, so the solution from the other
            // point is already entire
            let c = if centers.contains(&Center::Zero) { Center::One } else { Center::Zero };
            let gap = if c == Center::Zero { g0 } else { g1 };
            let branch = if gap.is_some() && !centers.contains(&c) { Branch::LargeExponent } else { Branch::ZeroExponent };
            vec![(heun_series(&hp, c, branch, &pol)?, C::new(1.0, 0.0))]
        }
        Ok(DegenerateOutcome::WronskianValue { .. }) | Err(Model1Error::NotDegenerate(_)) => {
            let branch = |g: Option<u32>| if g.is_some() { Branch::LargeExponent } else { Branch::ZeroExponent };
            let left = heun_series(&hp, Center::Zero, branch(g0), &pol)?;
            let right = heun_series(&hp, Center::One, branch(g1), &pol)?;
            let mid = C::new(0.5, 0.0);
            let (l0, _) = left.eval(mid)?;
            let (r0, _) = right.eval(mid)?;
            vec![(left, C::new(1.0, 0.0)), (right, l0 / r0)]
        }
        Err(e) => return Err(e),
    };
    let mut ef = Eigenfunction1 { params: *p, pieces, parity: None };
    if p.eps == 0.0 {
        let half = 0.5 * p.lambda.abs();
        let samples: Vec<(C, C)> = (1..=6)
            .map(|k| C::new(half * (k as f64 / 6.0 - 0.45), 0.1 * half))
            .map(|z| -> Result<(C, C), Model1Error> { Ok((ef.psi2(-z)?.0, ef.psi1(z)?.0)) })
            .collect::<Result<_, _>>()?;
        ef.parity = ratio_sign(&samples);
    }
    Ok(ef)
}
