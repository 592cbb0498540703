//! Rabi model with an intensity-dependent level splitting,
//! `H = (ω + U/2 σ_z) a†a + ω₀/2 σ_z + gσ_x(a + a†)`.
//!
//! After `y = √(4ω² − U²) z / (2g)` the Bargmann system reads `ψ' = A(y)ψ`
//! with regular singular points at `y = ±1`, both with exponents `{0, x}`,
//! `x = (4g² + 4ωE + ω₀U)/(4ω² − U²)`. Writing `(y² − 1)A(y) = B₀ + B₁y + B₂y²`,
//! the Frobenius recurrence at `s = ±1` in `t = y − s` is
//!
//! ```text
//! (A_s − (n+ρ)) a_n = [((n−1+ρ) − C₁) a_{n−1} − C₂ a_{n−2}] / (2s)
//! A_s = B(s)/(2s),  C₁ = B₁ + 2sB₂,  C₂ = B₂
//! ```
//!
//! The map `ψ(y) ↦ σ_z ψ(−y)` preserves solutions and swaps the two points,
//! so only series at `s = +1` are ever computed for the spectrum.

use crate::dual::Dual;
use crate::heun::{positive_integer, Stopper, TruncationPolicy};
use crate::odecore::{bargmann_admissibility, AsymptoticData};
use crate::spectral::{scan_zeros, ScanConfig, SpectralError};
use crate::spectrum::{merge_points, Diagnostic, PointKind, SpectrumConfig, SpectrumPoint, SpectrumSet};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

type C = Complex64;
pub type Vec2 = [C; 2];
pub type Mat2 = [[C; 2]; 2];
type DVec2 = [Dual; 2];

fn c(v: f64) -> C {
    C::new(v, 0.0)
}

/// Relative size below which the integer-x Wronskian counts as vanishing.
pub const DEGENERATE_ZERO_TOL: f64 = 1e-8;
/// Relative size below which the common factor `J_m` counts as vanishing.
pub const JUDD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Model2Error {
    #[error("requires 4ω² > U² (got ω = {omega}, U = {u})")]
    UnsupportedFrequencies { omega: f64, u: f64 },
    #[error("coupling g must be nonzero for the series pipeline")]
    ZeroCoupling,
    #[error("A(y) is singular at y = {0}")]
    SingularY(C),
    #[error("singular point must be +1 or -1, got {0}")]
    BadPoint(i8),
    #[error("recurrence step {n} is resonant (x = {n}); use the exponent-x or log branch")]
    ResonantStep { n: u32 },
    #[error("x = {0} is a positive integer; use integer_x_condition")]
    IntegerX(f64),
    #[error("x = {0} is not a positive integer")]
    NotIntegerX(f64),
    #[error("series did not converge within {0} terms")]
    Divergent(usize),
    #[error("point at local distance {distance} lies outside the usable disk of radius {limit}")]
    OutOfDisk { distance: f64, limit: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model2Params {
    pub e: f64,
    pub omega: f64,
    pub omega0: f64,
    pub g: f64,
    pub u: f64,
}

impl Model2Params {
    pub fn new(e: f64, omega: f64, omega0: f64, g: f64, u: f64) -> Self {
        Model2Params { e, omega, omega0, g, u }
    }

    /// Energy at which the spectral parameter equals `x`.
    pub fn energy_for_x(x: f64, omega: f64, omega0: f64, g: f64, u: f64) -> f64 {
        (x * (4.0 * omega * omega - u * u) - 4.0 * g * g - omega0 * u) / (4.0 * omega)
    }

    pub fn from_x(x: f64, omega: f64, omega0: f64, g: f64, u: f64) -> Self {
        Model2Params::new(Self::energy_for_x(x, omega, omega0, g, u), omega, omega0, g, u)
    }

    fn s_root(&self) -> f64 {
        (4.0 * self.omega * self.omega - self.u * self.u).sqrt()
    }

    pub fn x(&self) -> f64 {
        let (w, u, g) = (self.omega, self.u, self.g);
        (4.0 * g * g + 4.0 * w * self.e + self.omega0 * u) / (4.0 * w * w - u * u)
    }

    /// `κ` with `y = κz`.
    pub fn kappa(&self) -> f64 {
        self.s_root() / (2.0 * self.g)
    }

    fn check(&self) -> Result<(), Model2Error> {
        if !(4.0 * self.omega * self.omega > self.u * self.u) {
            return Err(Model2Error::UnsupportedFrequencies { omega: self.omega, u: self.u });
        }
        if self.g == 0.0 {
            return Err(Model2Error::ZeroCoupling);
        }
        Ok(())
    }

    /// `B₀, B₁, B₂` with `(y² − 1)A(y) = B₀ + B₁y + B₂y²`.
    pub fn b_matrices(&self) -> [Mat2; 3] {
        let (e, w, w0, g, u) = (self.e, self.omega, self.omega0, self.g, self.u);
        let s = self.s_root();
        let d = u * u - 4.0 * w * w;
        let g2 = 4.0 * g * g;
        let z = c(0.0);
        let b0 = [[z, c(-(2.0 * e + w0) / s)], [c(-(2.0 * e - w0) / s), z]];
        let b1 = [
            [c((-g2 + (u - 2.0 * w) * (2.0 * e - w0)) / d), z],
            [z, c(-(g2 + (u + 2.0 * w) * (2.0 * e + w0)) / d)],
        ];
        let b2 = [[z, c(-g2 / ((u + 2.0 * w) * s))], [c(g2 / ((u - 2.0 * w) * s)), z]];
        [b0, b1, b2]
    }

    /// Formal solutions at infinity in `z`: `e^{±σz} z^x`, `σ = 2g/√(4ω² − U²)`.
    pub fn asymptotic_data(&self) -> AsymptoticData {
        let sigma = 2.0 * self.g.abs() / self.s_root();
        let x = c(self.x());
        AsymptoticData::rank_one(vec![(c(sigma), x), (c(-sigma), x)])
    }
}

/// `A(y)` entry by entry.
pub fn coeff_matrix_a(p: &Model2Params, y: C) -> Result<Mat2, Model2Error> {
    let den = y * y - 1.0;
    if den.norm() == 0.0 {
        return Err(Model2Error::SingularY(y));
    }
    let (e, w, w0, g, u) = (p.e, p.omega, p.omega0, p.g, p.u);
    let s = (-u * u + 4.0 * w * w).sqrt();
    let d = u * u - 4.0 * w * w;
    let g2 = 4.0 * g * g;
    let a11 = y * (-g2 + (u - 2.0 * w) * (2.0 * e - w0)) / (d * den);
    let a12 = -(g2 * y * y + (u + 2.0 * w) * (2.0 * e + w0)) / ((u + 2.0 * w) * s * den);
    let a21 = (g2 * y * y - (u - 2.0 * w) * (2.0 * e - w0)) / ((u - 2.0 * w) * s * den);
    let a22 = -(y * (g2 + (u + 2.0 * w) * (2.0 * e + w0))) / (d * den);
    Ok([[a11, a12], [a21, a22]])
}

fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn mat_dvec(m: &Mat2, v: &DVec2) -> DVec2 {
    let k = |z: C| Dual::constant(z);
    [k(m[0][0]) * v[0] + k(m[0][1]) * v[1], k(m[1][0]) * v[0] + k(m[1][1]) * v[1]]
}

fn norm2(v: &Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn sigma_z(v: Vec2) -> Vec2 {
    [v[0], -v[1]]
}

/// Local data of the recurrence at `s`.
struct Local {
    s: f64,
    a_s: Mat2,
    c1: Mat2,
    c2: Mat2,
}

impl Local {
    fn new(p: &Model2Params, s: i8) -> Result<Self, Model2Error> {
        if s != 1 && s != -1 {
            return Err(Model2Error::BadPoint(s));
        }
        let sf = s as f64;
        let [b0, b1, b2] = p.b_matrices();
        let mut a_s = [[c(0.0); 2]; 2];
        let mut c1 = [[c(0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a_s[i][j] = (b0[i][j] + b1[i][j] * sf + b2[i][j]) / (2.0 * sf);
                c1[i][j] = b1[i][j] + 2.0 * sf * b2[i][j];
            }
        }
        Ok(Local { s: sf, a_s, c1, c2: b2 })
    }

    /// Eigenvector of `A_s` for the exponent 0.
    fn kernel(&self) -> Vec2 {
        let a = &self.a_s;
        let v = [a[0][1], -a[0][0]];
        if norm2(&v) > 0.0 {
            v
        } else {
            [a[1][1], -a[1][0]]
        }
    }

    /// Unit eigenvector of `A_s` for the exponent `x`; its direction does
    /// not depend on E, g or ω₀.
    fn exponent_vector(&self, p: &Model2Params) -> Vec2 {
        let v = [c(p.s_root()), c(-self.s * (p.u + 2.0 * p.omega))];
        let n = norm2(&v);
        [v[0] / n, v[1] / n]
    }

    fn rhs(&self, n: f64, prev: &Vec2, prev2: &Vec2) -> Vec2 {
        let m1 = mat_vec(&self.c1, prev);
        let m2 = mat_vec(&self.c2, prev2);
        [
            ((n - 1.0) * prev[0] - m1[0] - m2[0]) / (2.0 * self.s),
            ((n - 1.0) * prev[1] - m1[1] - m2[1]) / (2.0 * self.s),
        ]
    }

    /// Solves `(A_s − k) a = r`.
    fn solve(&self, k: f64, r: &Vec2) -> Vec2 {
        let a = &self.a_s;
        let (m00, m11) = (a[0][0] - k, a[1][1] - k);
        let det = m00 * m11 - a[0][1] * a[1][0];
        [(m11 * r[0] - a[0][1] * r[1]) / det, (-a[1][0] * r[0] + m00 * r[1]) / det]
    }

    fn rhs_dual(&self, n: Dual, prev: &DVec2, prev2: &DVec2) -> DVec2 {
        let m1 = mat_dvec(&self.c1, prev);
        let m2 = mat_dvec(&self.c2, prev2);
        let inv = 1.0 / (2.0 * self.s);
        let k = n + (-1.0);
        [(k * prev[0] - m1[0] - m2[0]) * inv, (k * prev[1] - m1[1] - m2[1]) * inv]
    }

    fn solve_dual(&self, k: Dual, r: &DVec2) -> DVec2 {
        let a = &self.a_s;
        let m00 = Dual::constant(a[0][0]) - k;
        let m11 = Dual::constant(a[1][1]) - k;
        let (m01, m10) = (Dual::constant(a[0][1]), Dual::constant(a[1][0]));
        let det = m00 * m11 - m01 * m10;
        [(m11 * r[0] - m01 * r[1]) / det, (m00 * r[1] - m10 * r[0]) / det]
    }
}

/// Which local solution to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorBranch {
    ZeroExponent,
    /// Exponent `x = m`, started from the unit eigenvector of `A_s`.
    ExponentX,
    /// `∂F/∂ρ` at `ρ = 0` with `a₀(ρ) = ρ·w₀`.
    LogDerivative,
}

/// Common factor of the exponent-0 Frobenius family at `x = m`:
/// `F(0, y) = J_m · F̃(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuddFactor {
    pub value: f64,
    pub scale: f64,
}

impl JuddFactor {
    pub fn is_negligible(&self) -> bool {
        self.value.abs() <= JUDD_TOL * self.scale.max(f64::MIN_POSITIVE)
    }

    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Logarithmic part `coeff · ln(y − s) · Σ coeffs[n] (y − s)ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorLog {
    pub coeff: C,
    pub coeffs: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSeries {
    pub point: i8,
    pub exponent: u32,
    pub coeffs: Vec<Vec2>,
    pub radius: f64,
    pub reach: f64,
    pub log: Option<VectorLog>,
    pub judd_factor: Option<JuddFactor>,
}

/// Series policy with the reach measured in `y − s`.
pub fn vector_policy(reach: f64) -> TruncationPolicy {
    TruncationPolicy { reach, ..Default::default() }
}

fn series_from(
    local: &Local,
    exponent: u32,
    a0: Vec2,
    policy: &TruncationPolicy,
) -> Result<(Vec<Vec2>, f64), Model2Error> {
    let rho = exponent as f64;
    let zero = [c(0.0); 2];
    let mut a = vec![a0];
    let mut stop = Stopper::new(policy);
    stop.push(0, norm2(&a0));
    for n in 1..policy.max_terms {
        let prev2 = if n >= 2 { a[n - 2] } else { zero };
        let r = local.rhs(n as f64 + rho, &a[n - 1], &prev2);
        let next = local.solve(n as f64 + rho, &r);
        a.push(next);
        if stop.push(n, norm2(&next)) {
            return Ok((a, stop.estimate()));
        }
    }
    Err(Model2Error::Divergent(policy.max_terms))
}

/// Dual-number coefficients `a_0..=a_m` of the family with `a₀(ρ) = ρw₀`
/// at `x = m`, and `J_m` defined by `a_m(0) = J_m ê_x`.
fn resonant_head(p: &Model2Params, local: &Local, m: u32) -> (Vec<DVec2>, JuddFactor) {
    let m = m as usize;
    let rho = Dual::variable(0.0);
    let w0 = local.kernel();
    let zero = [Dual::zero(); 2];
    // c_n(ρ) = a_n(ρ)/ρ for n < m
    let mut cs: Vec<DVec2> = vec![[Dual::constant(w0[0]), Dual::constant(w0[1])]];
    for n in 1..m {
        let prev2 = if n >= 2 { cs[n - 2] } else { zero };
        let k = rho + n as f64;
        let r = local.rhs_dual(k, &cs[n - 1], &prev2);
        cs.push(local.solve_dual(k, &r));
    }
    let prev2 = if m >= 2 { cs[m - 2] } else { zero };
    let r_c = local.rhs_dual(rho + m as f64, &cs[m - 1], &prev2);
    // (A_s − (m+ρ))⁻¹ ρ R_c = −ρ/(m+ρ) P₀R_c − P_x R_c
    let mf = m as f64;
    let mut px = local.a_s;
    let mut p0 = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            px[i][j] /= mf;
            p0[i][j] = if i == j { c(1.0) } else { c(0.0) } - px[i][j];
        }
    }
    let frac = rho / (rho + mf);
    let p0r = mat_dvec(&p0, &r_c);
    let pxr = mat_dvec(&px, &r_c);
    let a_m = [-(frac * p0r[0]) - pxr[0], -(frac * p0r[1]) - pxr[1]];

    let ex = local.exponent_vector(p);
    let value = (ex[0].conj() * a_m[0].v + ex[1].conj() * a_m[1].v).re;
    let px_norm = px.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rc0 = [r_c[0].v, r_c[1].v];
    let judd = JuddFactor { value, scale: px_norm * norm2(&rc0) };

    let mut a: Vec<DVec2> = cs.iter().map(|cn| [rho * cn[0], rho * cn[1]]).collect();
    a.push(a_m);
    (a, judd)
}

/// The full dual-number family, summed to convergence.
fn log_family(
    p: &Model2Params,
    local: &Local,
    m: u32,
    policy: &TruncationPolicy,
) -> Result<(Vec<DVec2>, JuddFactor), Model2Error> {
    let (mut a, judd) = resonant_head(p, local, m);
    let rho = Dual::variable(0.0);
    let mut stop = Stopper::new(policy);
    for (k, ak) in a.iter().enumerate() {
        stop.push(k, ak[0].magnitude().hypot(ak[1].magnitude()));
    }
    for n in m as usize + 1..policy.max_terms {
        let k = rho + n as f64;
        let r = local.rhs_dual(k, &a[n - 1], &a[n - 2]);
        let next = local.solve_dual(k, &r);
        a.push(next);
        if stop.push(n, next[0].magnitude().hypot(next[1].magnitude())) {
            return Ok((a, judd));
        }
    }
    Err(Model2Error::Divergent(policy.max_terms))
}

/// `J_m` alone (no series summation).
pub fn judd_factor(p: &Model2Params, s: i8, m: u32) -> Result<JuddFactor, Model2Error> {
    if m == 0 {
        return Err(Model2Error::NotIntegerX(0.0));
    }
    Ok(resonant_head(p, &Local::new(p, s)?, m).1)
}

pub fn vector_frobenius(
    p: &Model2Params,
    s: i8,
    branch: VectorBranch,
    policy: &TruncationPolicy,
) -> Result<VectorSeries, Model2Error> {
    p.check()?;
    let local = Local::new(p, s)?;
    let x = p.x();
    let m = positive_integer(x);
    let build = |exponent, coeffs, log, judd_factor| VectorSeries {
        point: s,
        exponent,
        coeffs,
        radius: 2.0,
        reach: policy.reach,
        log,
        judd_factor,
    };
    match branch {
        VectorBranch::ZeroExponent => {
            if let Some(n) = m {
                return Err(Model2Error::ResonantStep { n });
            }
            let (coeffs, _) = series_from(&local, 0, local.kernel(), policy)?;
            Ok(build(0, coeffs, None, None))
        }
        VectorBranch::ExponentX => {
            let m = m.ok_or(Model2Error::NotIntegerX(x))?;
            let judd = judd_factor(p, s, m)?;
            let (coeffs, _) = series_from(&local, m, local.exponent_vector(p), policy)?;
            Ok(build(m, coeffs, None, Some(judd)))
        }
        VectorBranch::LogDerivative => {
            let m = m.ok_or(Model2Error::NotIntegerX(x))?;
            let (fam, judd) = log_family(p, &local, m, policy)?;
            let (tilde, _) = series_from(&local, m, local.exponent_vector(p), policy)?;
            let mut companion = vec![[c(0.0); 2]; m as usize];
            companion.extend(tilde);
            let coeffs = fam.iter().map(|a| [a[0].d, a[1].d]).collect();
            let log = VectorLog { coeff: c(judd.value), coeffs: companion };
            Ok(build(0, coeffs, Some(log), Some(judd)))
        }
    }
}

fn horner_vec(coeffs: &[Vec2], t: C) -> (Vec2, Vec2) {
    let mut s0 = [c(0.0); 2];
    let mut s1 = [c(0.0); 2];
    for a in coeffs.iter().rev() {
        for k in 0..2 {
            s1[k] = s1[k] * t + s0[k];
            s0[k] = s0[k] * t + a[k];
        }
    }
    (s0, s1)
}

impl VectorSeries {
    pub fn usable_radius(&self) -> f64 {
        (0.95 * self.radius).min(self.reach)
    }

    /// `(ψ(y), ψ'(y))`.
    pub fn eval(&self, y: C) -> Result<(Vec2, Vec2), Model2Error> {
        let t = y - self.point as f64;
        let limit = self.usable_radius();
        if t.norm() > limit * (1.0 + 1e-12) {
            return Err(Model2Error::OutOfDisk { distance: t.norm(), limit });
        }
        let (s0, s1) = horner_vec(&self.coeffs, t);
        let m = self.exponent as i32;
        let p0 = t.powi(m);
        let p1 = if m >= 1 { t.powi(m - 1) * m as f64 } else { c(0.0) };
        let mut f = [p0 * s0[0], p0 * s0[1]];
        let mut df = [p1 * s0[0] + p0 * s1[0], p1 * s0[1] + p0 * s1[1]];
        if let Some(log) = &self.log {
            let (g0, g1) = horner_vec(&log.coeffs, t);
            let ln = t.ln();
            for k in 0..2 {
                f[k] += log.coeff * ln * g0[k];
                df[k] += log.coeff * (g0[k] / t + ln * g1[k]);
            }
        }
        Ok((f, df))
    }
}

fn det2(a: &Vec2, b: &Vec2) -> C {
    a[0] * b[1] - a[1] * b[0]
}

/// `det[ψ(y), σ_zψ(−y)]` and the scale `‖ψ(y)‖·‖ψ(−y)‖`.
fn mirror_det(series: &VectorSeries, y: f64) -> Result<(f64, f64), Model2Error> {
    let (a, _) = series.eval(c(y))?;
    let (b, _) = series.eval(c(-y))?;
    let b = sigma_z(b);
    Ok((det2(&a, &b).re, norm2(&a) * norm2(&b)))
}

fn reach_for(y: f64) -> TruncationPolicy {
    vector_policy((1.0 + y.abs() + 0.05).min(1.9))
}

/// `det[ψ^{(+1,0)}(y), σ_zψ^{(+1,0)}(−y)]`.
pub fn wronskian_model2_at(p: &Model2Params, y: f64) -> Result<f64, Model2Error> {
    let x = p.x();
    if positive_integer(x).is_some() {
        return Err(Model2Error::IntegerX(x));
    }
    let s = vector_frobenius(p, 1, VectorBranch::ZeroExponent, &reach_for(y))?;
    Ok(mirror_det(&s, y)?.0)
}

/// The spectral condition at `y = 0`.
pub fn wronskian_model2(p: &Model2Params) -> Result<f64, Model2Error> {
    wronskian_model2_at(p, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerXOutcome {
    pub m: u32,
    /// `det[F̃(0), σ_zF̃(0)]` of the exponent-m series.
    pub wronskian: f64,
    pub scale: f64,
    pub judd: JuddFactor,
}

impl IntegerXOutcome {
    pub fn wronskian_vanishes(&self) -> bool {
        self.wronskian.abs() <= DEGENERATE_ZERO_TOL * self.scale
    }

    pub fn is_spectral(&self) -> bool {
        self.judd.is_negligible() || self.wronskian_vanishes()
    }
}

pub fn integer_x_condition(p: &Model2Params) -> Result<IntegerXOutcome, Model2Error> {
    let x = p.x();
    let m = positive_integer(x).ok_or(Model2Error::NotIntegerX(x))?;
    let s = vector_frobenius(p, 1, VectorBranch::ExponentX, &reach_for(0.0))?;
    let (wronskian, scale) = mirror_det(&s, 0.0)?;
    Ok(IntegerXOutcome { m, wronskian, scale, judd: s.judd_factor.expect("set for ExponentX") })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JuddBranch {
    Parabola,
    Contour,
}

impl JuddBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            JuddBranch::Parabola => "parabola",
            JuddBranch::Contour => "contour",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuddCurvePoint {
    pub m: u32,
    pub omega0: f64,
    pub g: f64,
    pub branch: JuddBranch,
}

/// `ω₀ = 4g²U/(4ω² − U²) − Um`.
pub fn judd_parabola(m: u32, omega: f64, u: f64, g: f64) -> f64 {
    4.0 * g * g * u / (4.0 * omega * omega - u * u) - u * m as f64
}

fn judd_at(m: u32, omega: f64, u: f64, omega0: f64, g: f64) -> f64 {
    let p = Model2Params::from_x(m as f64, omega, omega0, g, u);
    judd_factor(&p, 1, m).map(|j| j.value).unwrap_or(f64::NAN)
}

/// Zero set of `J_m` over a rectangular `(ω₀, g)` grid at fixed ω, U.
/// Parabola rows come from the explicit formula; the remaining factors are
/// traced by locating sign changes of `J_m` along grid edges and bisecting
/// each to 1e-12.
pub fn judd_curves(
    m: u32,
    omega: f64,
    u: f64,
    omega0_grid: &[f64],
    g_grid: &[f64],
) -> Result<Vec<JuddCurvePoint>, Model2Error> {
    if !(4.0 * omega * omega > u * u) {
        return Err(Model2Error::UnsupportedFrequencies { omega, u });
    }
    if m == 0 {
        return Err(Model2Error::NotIntegerX(0.0));
    }
    let (w_lo, w_hi) = omega0_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut out: Vec<JuddCurvePoint> = g_grid
        .iter()
        .map(|&g| JuddCurvePoint { m, omega0: judd_parabola(m, omega, u, g), g, branch: JuddBranch::Parabola })
        .filter(|pt| pt.omega0 >= w_lo - 1e-12 && pt.omega0 <= w_hi + 1e-12)
        .collect();

    let values: Vec<Vec<f64>> = g_grid
        .par_iter()
        .map(|&g| omega0_grid.iter().map(|&w0| judd_at(m, omega, u, w0, g)).collect())
        .collect();

    // (ω₀ at lo, g at lo, ω₀ at hi, g at hi, J lo, J hi)
    let mut edges = Vec::new();
    for (j, &g) in g_grid.iter().enumerate() {
        for (i, &w0) in omega0_grid.iter().enumerate() {
            let v = values[j][i];
            if i + 1 < omega0_grid.len() {
                edges.push((w0, g, omega0_grid[i + 1], g, v, values[j][i + 1]));
            }
            if j + 1 < g_grid.len() {
                edges.push((w0, g, w0, g_grid[j + 1], v, values[j + 1][i]));
            }
        }
    }
    let contour: Vec<JuddCurvePoint> = edges
        .par_iter()
        .filter(|e| e.4.is_finite() && e.5.is_finite() && e.4 * e.5 < 0.0)
        .map(|&(w_a, g_a, w_b, g_b, mut f_a, _)| {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let at = |t: f64| (w_a + t * (w_b - w_a), g_a + t * (g_b - g_a));
            let span = (w_b - w_a).abs().max((g_b - g_a).abs());
            while (hi - lo) * span > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let (w, g) = at(mid);
                let f = judd_at(m, omega, u, w, g);
                if f == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (f > 0.0) == (f_a > 0.0) {
                    lo = mid;
                    f_a = f;
                } else {
                    hi = mid;
                }
            }
            let (w, g) = at(0.5 * (lo + hi));
            JuddCurvePoint { m, omega0: w, g, branch: JuddBranch::Contour }
        })
        .filter(|pt| (pt.omega0 - judd_parabola(m, omega, u, pt.g)).abs() > 1e-6 * (1.0 + pt.omega0.abs()))
        .collect();
    out.extend(contour);
    Ok(out)
}

/// Model parameters without the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model2Base {
    pub omega: f64,
    pub omega0: f64,
    pub g: f64,
    pub u: f64,
}

impl Model2Base {
    pub fn new(omega: f64, omega0: f64, g: f64, u: f64) -> Self {
        Model2Base { omega, omega0, g, u }
    }

    pub fn at(&self, e: f64) -> Model2Params {
        Model2Params::new(e, self.omega, self.omega0, self.g, self.u)
    }
}

fn closed_form_uncoupled(base: &Model2Base, cfg: &SpectrumConfig) -> Vec<SpectrumPoint> {
    // g = 0: E = n(ω ± U/2) ± ω₀/2
    let (lo, hi) = cfg.range;
    let mut pts = Vec::new();
    for sign in [1.0, -1.0] {
        let step = base.omega + sign * 0.5 * base.u;
        let off = sign * 0.5 * base.omega0;
        let mut n = 0u32;
        while off + n as f64 * step <= hi {
            let e = off + n as f64 * step;
            if e >= lo {
                pts.push(SpectrumPoint {
                    x_value: base.at(e).x(),
                    energy: e,
                    kind: PointKind::Generic,
                    multiplicity: 1,
                    parity: None,
                });
            }
            n += 1;
        }
    }
    pts.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut out: Vec<SpectrumPoint> = Vec::new();
    for p in pts {
        match out.last_mut() {
            Some(last) if (last.energy - p.energy).abs() <= cfg.refine_tol => {
                last.kind = PointKind::DoublyDegenerate;
                last.multiplicity = 2;
            }
            _ => out.push(p),
        }
    }
    out
}

/// Spectrum with E in `cfg.range`, sorted by energy.
pub fn spectrum_model2(base: &Model2Base, cfg: &SpectrumConfig) -> Result<SpectrumSet, Model2Error> {
    let base = Model2Base { g: base.g.abs(), ..*base };
    let (lo, hi) = cfg.range;
    if !(4.0 * base.omega * base.omega > base.u * base.u) {
        return Err(Model2Error::UnsupportedFrequencies { omega: base.omega, u: base.u });
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(cfg.step > 0.0) || !(cfg.refine_tol > 0.0) {
        return Err(SpectralError::InvalidConfig("range must be finite and ordered; step, refine_tol > 0".into()).into());
    }
    if base.g == 0.0 {
        let points = closed_form_uncoupled(&base, cfg);
        let asymptotics = AsymptoticData::at_regular_infinity();
        let admissibility = bargmann_admissibility(&asymptotics);
        return Ok(SpectrumSet { points, diagnostics: Vec::new(), asymptotics, admissibility });
    }

    let (x_lo, x_hi) = (base.at(lo).x(), base.at(hi).x());
    let candidates: Vec<f64> = ((x_lo.ceil().max(1.0) as i64)..=(x_hi.floor() as i64))
        .map(|m| Model2Params::energy_for_x(m as f64, base.omega, base.omega0, base.g, base.u))
        .filter(|e| *e >= lo && *e <= hi)
        .collect();
    let half = cfg.exclusion_half_width();
    let exclusions: Vec<(f64, f64)> = candidates.iter().map(|&e| (e - half, e + half)).collect();
    let scan_cfg = ScanConfig { step: cfg.step, refine_tol: cfg.refine_tol, ..Default::default() };
    let f = |e: f64| wronskian_model2(&base.at(e)).unwrap_or(f64::NAN);
    let scan = scan_zeros(&f, (lo, hi), &exclusions, &scan_cfg)?;

    let mut diagnostics: Vec<Diagnostic> = scan
        .poles
        .iter()
        .map(|b| Diagnostic::PoleSkipped { x: base.at(b.refined_root).x(), residual: b.residual })
        .collect();
    let mut points: Vec<SpectrumPoint> = scan
        .roots
        .iter()
        .map(|b| SpectrumPoint {
            x_value: base.at(b.refined_root).x(),
            energy: b.refined_root,
            kind: PointKind::Generic,
            multiplicity: 1,
            parity: None,
        })
        .collect();

    let classified: Vec<(f64, Result<IntegerXOutcome, Model2Error>)> =
        candidates.par_iter().map(|&e| (e, integer_x_condition(&base.at(e)))).collect();
    for (e, outcome) in classified {
        match outcome {
            Ok(o) if o.is_spectral() => {
                let (kind, multiplicity) = if o.judd.is_negligible() {
                    // J_m = 0 removes the logarithm at both points: every
                    // local solution is holomorphic, so both are entire
                    (PointKind::DoublyDegenerate, 2)
                } else {
                    (PointKind::DegenerateSingle, 1)
                };
                points.push(SpectrumPoint { x_value: o.m as f64, energy: e, kind, multiplicity, parity: None });
            }
            Ok(_) => {}
            Err(err) => {
                diagnostics.push(Diagnostic::EvaluationFailed { x: base.at(e).x(), message: err.to_string() })
            }
        }
    }
    // merge in energy
    let swapped: Vec<SpectrumPoint> =
        points.into_iter().map(|p| SpectrumPoint { x_value: p.energy, energy: p.x_value, ..p }).collect();
    let points = merge_points(swapped, half + 10.0 * cfg.refine_tol)
        .into_iter()
        .map(|p| SpectrumPoint { x_value: p.energy, energy: p.x_value, ..p })
        .collect();

    let asymptotics = base.at(lo).asymptotic_data();
    let admissibility = bargmann_admissibility(&asymptotics);
    Ok(SpectrumSet { points, diagnostics, asymptotics, admissibility })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Model2Params {
        Model2Params::new(0.37, 2.0, 1.0, 0.6, -2.0)
    }

    fn residual(p: &Model2Params, s: &VectorSeries, y: C) -> f64 {
        let (f, df) = s.eval(y).unwrap();
        let a = coeff_matrix_a(p, y).unwrap();
        let af = mat_vec(&a, &f);
        norm2(&[df[0] - af[0], df[1] - af[1]]) / (norm2(&df) + norm2(&af))
    }

    #[test]
    fn polynomial_form_matches_entrywise_form() {
        let p = sample();
        let [b0, b1, b2] = p.b_matrices();
        for y in [0.3, -0.7, 1.8] {
            let a = coeff_matrix_a(&p, c(y)).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let b = b0[i][j] + b1[i][j] * y + b2[i][j] * y * y;
                    assert!((a[i][j] * (y * y - 1.0) - b).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn trace_identity() {
        let p = sample();
        let (w, g, u) = (p.omega, p.g, p.u);
        for y in [0.2, -0.45, 3.0] {
            let a = coeff_matrix_a(&p, c(y)).unwrap();
            let expect = -y * (8.0 * g * g + 2.0 * u * p.omega0 + 8.0 * w * p.e) / ((u * u - 4.0 * w * w) * (y * y - 1.0));
            assert!((a[0][0] + a[1][1] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_vanishes_at_origin() {
        let a = coeff_matrix_a(&Model2Params::new(0.0, 2.0, 1.0, 1.0, -2.0), c(0.0)).unwrap();
        assert_eq!(a[0][0], c(0.0));
        assert_eq!(a[1][1].norm(), 0.0);
    }

    #[test]
    fn singular_points_rejected() {
        assert!(matches!(coeff_matrix_a(&sample(), c(1.0)), Err(Model2Error::SingularY(_))));
        assert!(matches!(coeff_matrix_a(&sample(), c(-1.0)), Err(Model2Error::SingularY(_))));
    }

    #[test]
    fn residue_exponents() {
        let p = sample();
        for s in [1, -1] {
            let l = Local::new(&p, s).unwrap();
            let a = l.a_s;
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            assert!(det.norm() < 1e-13);
            assert!((tr.re - p.x()).abs() < 1e-12);
            let ex = l.exponent_vector(&p);
            let av = mat_vec(&a, &ex);
            assert!((av[0] - p.x() * ex[0]).norm() < 1e-12 && (av[1] - p.x() * ex[1]).norm() < 1e-12);
            let k = mat_vec(&a, &l.kernel());
            assert!(norm2(&k) < 1e-13);
        }
    }

    #[test]
    fn zero_series_residuals_and_mirror() {
        let p = sample();
        let pol = vector_policy(1.9);
        let s = vector_frobenius(&p, 1, VectorBranch::ZeroExponent, &pol).unwrap();
        let m = vector_frobenius(&p, -1, VectorBranch::ZeroExponent, &pol).unwrap();
        for k in 1..20 {
            let y = c(0.9 - 0.8 * k as f64 / 20.0);
            assert!(residual(&p, &s, y) < 1e-10);
            // σ_z ψ(−y) solves the system
            let (f, df) = s.eval(-y).unwrap();
            let mf = sigma_z(f);
            let mdf = [-df[0], df[1]];
            let a = coeff_matrix_a(&p, y).unwrap();
            let af = mat_vec(&a, &mf);
            assert!(norm2(&[mdf[0] - af[0], mdf[1] - af[1]]) < 1e-10 * (norm2(&mdf) + norm2(&af)));
        }
        // series at −1 is the mirror image coefficient-wise, up to the kernel normalization
        let ratio = m.coeffs[0][0] / s.coeffs[0][0];
        for (n, (a, b)) in s.coeffs.iter().zip(&m.coeffs).take(30).enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b[0] - ratio * sign * a[0]).norm() < 1e-12 * (1.0 + a[0].norm()));
            assert!((b[1] + ratio * sign * a[1]).norm() < 1e-12 * (1.0 + a[1].norm()));
        }
    }

    #[test]
    fn liouville_identity() {
        let p = sample();
        let h = 1e-4;
        for y in [-0.4, -0.1, 0.2, 0.45] {
            let w = |y: f64| wronskian_model2_at(&p, y).unwrap();
            let dlog = (w(y + h) - w(y - h)) / (2.0 * h) / w(y);
            let a = coeff_matrix_a(&p, c(y)).unwrap();
            assert!((dlog - (a[0][0] + a[1][1]).re).abs() < 1e-7, "y={y}");
        }
    }

    #[test]
    fn integer_x_routing() {
        let p = Model2Params::from_x(2.0, 2.0, 1.0, 0.6, -2.0);
        assert_eq!(
            vector_frobenius(&p, 1, VectorBranch::ZeroExponent, &vector_policy(1.0)),
            Err(Model2Error::ResonantStep { n: 2 })
        );
        assert!(matches!(wronskian_model2(&p), Err(Model2Error::IntegerX(_))));
        assert!(matches!(
            vector_frobenius(&sample(), 1, VectorBranch::ExponentX, &vector_policy(1.0)),
            Err(Model2Error::NotIntegerX(_))
        ));
    }

    #[test]
    fn exponent_and_log_series_solve_system() {
        let p = Model2Params::from_x(2.0, 2.0, 1.0, 0.6, -2.0);
        let pol = vector_policy(1.0);
        let ex = vector_frobenius(&p, 1, VectorBranch::ExponentX, &pol).unwrap();
        let lg = vector_frobenius(&p, 1, VectorBranch::LogDerivative, &pol).unwrap();
        assert!(!ex.judd_factor.unwrap().is_negligible());
        for y in [0.1, 0.5, 1.4, 1.9] {
            assert!(residual(&p, &ex, c(y)) < 1e-10, "y={y}");
            assert!(residual(&p, &lg, c(y)) < 1e-10, "y={y}");
        }
    }

    #[test]
    fn judd_factor_vanishes_on_parabola() {
        for m in 1..=3 {
            let (w, u, g) = (2.0, -2.0, 0.9);
            let p = Model2Params::from_x(m as f64, w, judd_parabola(m, w, u, g), g, u);
            let j = judd_factor(&p, 1, m).unwrap();
            assert!(j.is_negligible(), "m={m}: {j:?}");
        }
    }

    #[test]
    fn parabola_example() {
        let w0 = judd_parabola(1, 2.0, -2.0, 0.9);
        assert!((w0 - 1.46).abs() < 1e-14);
        assert!((Model2Params::energy_for_x(1.0, 2.0, w0, 0.9, -2.0) - 1.46).abs() < 1e-14);
    }

    #[test]
    fn uncoupled_closed_form() {
        let set = spectrum_model2(&Model2Base::new(1.0, 0.6, 0.0, 0.0), &SpectrumConfig::new(-1.0, 2.5)).unwrap();
        let mut expect = vec![-0.3, 0.3, 0.7, 1.3, 1.7, 2.3];
        expect.sort_by(f64::total_cmp);
        let got = set.energies();
        assert_eq!(got.len(), expect.len());
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn asymptotics_are_admissible() {
        let a = sample().asymptotic_data();
        assert_eq!(a.poincare_rank, 1);
        assert_eq!(bargmann_admissibility(&a), crate::odecore::Admissibility::Admissible);
    }

    #[test]
    fn exact_solution_on_parabola() {
        let (w, u, g, m) = (2.0, -2.0, 0.7, 2u32);
        let p = Model2Params::from_x(m as f64, w, judd_parabola(m, w, u, g), g, u);
        let cc = 4.0 * g * g / (4.0 * w * w - u * u);
        let v = [(2.0 * w - u).sqrt(), (2.0 * w + u).sqrt()];
        for y in [-0.6, 0.2, 2.5] {
            let x = m as f64;
            let f = (-cc * y).exp() * (y + 1.0).powf(x);
            let df = f * (-cc + x / (y + 1.0));
            let a = coeff_matrix_a(&p, c(y)).unwrap();
            let af = mat_vec(&a, &[c(f * v[0]), c(f * v[1])]);
            assert!((af[0].re - df * v[0]).abs() < 1e-12 * df.abs().max(1.0));
            assert!((af[1].re - df * v[1]).abs() < 1e-12 * df.abs().max(1.0));
        }
    }

    #[test]
    fn second_factor_of_first_judd_condition() {
        // zero of the quadratic-in-g² factor of J₁ at ω = 2, U = −2, ω₀ = 1
        let (w, u, w0) = (2.0f64, -2.0f64, 1.0f64);
        let d = u * u - 4.0 * w * w;
        let qa = 16.0 * u * u;
        let qb = 8.0 * d * (u * (u + w0) - 8.0 * w * w);
        let qc = d * d * ((u + w0).powi(2) - 4.0 * w * w);
        let g2 = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        let g = g2.sqrt();
        let j = judd_factor(&Model2Params::from_x(1.0, w, w0, g, u), 1, 1).unwrap();
        assert!(j.is_negligible(), "{j:?}");
        let off = judd_factor(&Model2Params::from_x(1.0, w, w0, g + 0.05, u), 1, 1).unwrap();
        assert!(off.relative() > 1e-4);
    }

    #[test]
    fn parabola_point_is_doubly_degenerate() {
        let p = Model2Params::new(1.46, 2.0, 1.46, 0.9, -2.0);
        let o = integer_x_condition(&p).unwrap();
        assert_eq!(o.m, 1);
        assert!(o.judd.is_negligible());
        let set = spectrum_model2(&Model2Base::new(2.0, 1.46, 0.9, -2.0), &SpectrumConfig::new(1.3, 1.6)).unwrap();
        let pt = set.points.iter().find(|p| (p.energy - 1.46).abs() < 1e-12).expect("level at 1.46");
        assert_eq!(pt.kind, PointKind::DoublyDegenerate);
        assert_eq!(pt.multiplicity, 2);
    }

    #[test]
    fn reduces_to_plain_rabi() {
        // U = 0, ω = 1 is the first model at ε = 0 with μ = ω₀/2, λ = g
        use crate::rabi_eps::{spectrum_model1, Model1Base};
        let (w0, g) = (0.8, 0.55);
        let a = spectrum_model2(&Model2Base::new(1.0, w0, g, 0.0), &SpectrumConfig::new(-0.3, 3.5)).unwrap();
        let b = spectrum_model1(&Model1Base::new(g, 0.5 * w0, 0.0), &SpectrumConfig::new(-0.3 + g * g, 3.5 + g * g))
            .unwrap();
        let ea = a.energies_with_multiplicity();
        let eb = b.energies_with_multiplicity();
        assert_eq!(ea.len(), eb.len());
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}
