//! Confluent Heun equation
//!
//! ```text
//! v'' + (α + (β+1)/y + (γ+1)/(y-1)) v' + (μ̃/y + ν̃/(y-1)) v = 0
//! μ̃ = (α - β - γ + αβ - βγ)/2 - η
//! ν̃ = (α + β + γ + αγ + βγ)/2 + δ + η
//! ```
//!
//! Local Frobenius solutions at `y = 0` and `y = 1`, including the logarithmic
//! companion at a resonant exponent gap.

use crate::dual::Dual;
use crate::odecore::{OdeError, Poly, RationalODE};
use num_complex::Complex64;
use thiserror::Error;

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// Relative tolerance for treating an exponent gap as an integer.
pub const INTEGER_TOL: f64 = 1e-11;

/// Relative size below which a resonance obstruction counts as vanishing.
pub const OBSTRUCTION_TOL: f64 = 1e-10;

/// `Some(n)` if `v` is within [`INTEGER_TOL`] of a positive integer `n`.
pub fn positive_integer(v: f64) -> Option<u32> {
    let n = v.round();
    if n >= 1.0 && (v - n).abs() <= INTEGER_TOL * n {
        Some(n as u32)
    } else {
        None
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeunError {
    #[error("exponent gap {step} is resonant and the obstruction does not vanish; use the log series")]
    ResonantWithoutBranch { step: u32 },
    #[error("series did not converge within {terms} terms")]
    Divergent { terms: usize },
    #[error("point at local distance {distance} lies outside the usable disk of radius {limit}")]
    OutOfDisk { distance: f64, limit: f64 },
    #[error("exponent gap {gap} does not equal the requested resonance {n}")]
    GapMismatch { gap: f64, n: u32 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Parameters `(α, β, γ, δ, η)` of the confluent Heun equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeunParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
}

impl HeunParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, eta: f64) -> Self {
        HeunParams { alpha, beta, gamma, delta, eta }
    }

    pub fn mu_tilde(&self) -> f64 {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        0.5 * (a - b - g + a * b - b * g) - self.eta
    }

    pub fn nu_tilde(&self) -> f64 {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        0.5 * (a + b + g + a * g + b * g) + self.delta + self.eta
    }

    /// Parameters of the same equation written in `t = 1 - y`.
    pub fn mirrored(&self) -> Self {
        HeunParams {
            alpha: -self.alpha,
            beta: self.gamma,
            gamma: self.beta,
            delta: -self.delta,
            eta: self.delta + self.eta,
        }
    }

    /// Parameters seen from the local coordinate of `center`.
    pub fn local(&self, center: Center) -> Self {
        match center {
            Center::Zero => *self,
            Center::One => self.mirrored(),
        }
    }

    /// `(p(y), q(y))` at a point.
    pub fn coefficients(&self, y: C) -> (C, C) {
        let p = self.alpha + (self.beta + 1.0) / y + (self.gamma + 1.0) / (y - 1.0);
        let q = self.mu_tilde() / y + self.nu_tilde() / (y - 1.0);
        (p, q)
    }

    /// The equation as a rational ODE in `y`.
    pub fn ode(&self) -> Result<RationalODE, HeunError> {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        let den = Poly::new(vec![0.0, -1.0, 1.0]);
        let p_num = Poly::new(vec![-(b + 1.0), b + g + 2.0 - a, a]);
        let (mt, nt) = (self.mu_tilde(), self.nu_tilde());
        let q_num = Poly::new(vec![-mt, mt + nt]);
        Ok(RationalODE::new(p_num, den.clone(), q_num, den)?)
    }

    /// Exponent gap `-β` at `center` (local parameters).
    pub fn gap(&self, center: Center) -> f64 {
        -self.local(center).beta
    }
}

/// Expansion point of a local solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Center {
    Zero,
    One,
}

impl Center {
    pub fn point(self) -> f64 {
        match self {
            Center::Zero => 0.0,
            Center::One => 1.0,
        }
    }

    /// Local coordinate `t` of a point `y`.
    pub fn local_coordinate(self, y: C) -> C {
        match self {
            Center::Zero => y,
            Center::One => 1.0 - y,
        }
    }

    /// `dt/dy`.
    pub fn orientation(self) -> f64 {
        match self {
            Center::Zero => 1.0,
            Center::One => -1.0,
        }
    }
}

/// Which Frobenius exponent the series starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Exponent 0, normalized to value 1 at the center.
    ZeroExponent,
    /// Exponent `-β` (local), leading coefficient 1.
    LargeExponent,
}

/// Stopping rule for series summation. Terms are weighted by `reach^n`, the
/// largest local distance at which the series will be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub tol: f64,
    pub max_terms: usize,
    pub reach: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { tol: 1e-14, max_terms: 2000, reach: 0.95 }
    }
}

impl TruncationPolicy {
    /// Cheaper policy for series evaluated only near the midpoint.
    pub fn wronskian() -> Self {
        TruncationPolicy { reach: 0.65, ..Default::default() }
    }

    pub fn with_reach(self, reach: f64) -> Self {
        TruncationPolicy { reach, ..self }
    }
}

/// Logarithmic part `coeff · ln t · Σ coeffs[n] tⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCompanion {
    pub coeff: C,
    pub coeffs: Vec<C>,
}

/// Local solution `t^exponent Σ coeffs[n] tⁿ (+ log part)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSeries {
    pub center: Center,
    pub exponent: C,
    pub coeffs: Vec<C>,
    pub radius: f64,
    pub reach: f64,
    pub log: Option<LogCompanion>,
    pub truncation_error_estimate: f64,
}

fn lead(p: &HeunParams, n: f64, rho: f64) -> f64 {
    (n + rho + 1.0) * (n + rho + p.beta + 1.0)
}

fn mid(p: &HeunParams, k: f64) -> f64 {
    k * (k + p.beta + p.gamma + 1.0 - p.alpha) - p.mu_tilde()
}

fn low(p: &HeunParams, k: f64) -> f64 {
    p.alpha * (k - 1.0) + p.mu_tilde() + p.nu_tilde()
}

/// Tracks the "three consecutive negligible terms" stopping rule.
pub(crate) struct Stopper {
    tol: f64,
    reach: f64,
    scale: f64,
    quiet: usize,
    tail: [f64; 3],
}

impl Stopper {
    pub(crate) fn new(policy: &TruncationPolicy) -> Self {
        Stopper { tol: policy.tol, reach: policy.reach, scale: 0.0, quiet: 0, tail: [0.0; 3] }
    }

    /// Feed the magnitude of coefficient `n`; returns true once converged.
    pub(crate) fn push(&mut self, n: usize, mag: f64) -> bool {
        let term = mag * self.reach.powi(n as i32);
        self.scale = self.scale.max(term);
        let weighted = term * (n.max(1) as f64);
        self.tail = [self.tail[1], self.tail[2], term];
        if weighted <= self.tol * self.scale {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        n >= 3 && self.quiet >= 3
    }

    pub(crate) fn estimate(&self) -> f64 {
        self.tail.iter().sum()
    }
}

/// Resonance obstruction at step `n`: the right-hand side that would have to
/// vanish for the exponent-0 recurrence to pass through a zero leading factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstruction {
    pub value: f64,
    pub scale: f64,
}

impl Obstruction {
    pub fn is_negligible(&self, rel_tol: f64) -> bool {
        self.value.abs() <= rel_tol * self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Exponent-0 coefficients `c_0..c_{n-1}` (with `c_0 = 1`) and the
/// obstruction at step `n`. Requires the gap to be `n`.
///
/// The scale is the largest term magnitude met along the way, so a value that
/// cancels to rounding level counts as vanishing even when the last
/// coefficients themselves have collapsed.
fn obstruction_with_prefix(p: &HeunParams, n: u32) -> (Vec<f64>, Obstruction) {
    let mut a = vec![1.0];
    let mut scale: f64 = 0.0;
    for m in 0..n as usize {
        let k = m as f64;
        let prev = if m >= 1 { a[m - 1] } else { 0.0 };
        let t1 = mid(p, k) * a[m];
        let t2 = low(p, k) * prev;
        scale = scale.max(t1.abs() + t2.abs()).max(lead(p, k, 0.0).abs() * a[m].abs());
        if m + 1 == n as usize {
            return (a, Obstruction { value: t1 + t2, scale });
        }
        a.push((t1 + t2) / lead(p, k, 0.0));
    }
    unreachable!("n >= 1")
}

pub fn log_obstruction(params: &HeunParams, center: Center, n: u32) -> Result<Obstruction, HeunError> {
    let p = params.local(center);
    let gap = -p.beta;
    if n == 0 || positive_integer(gap) != Some(n) {
        return Err(HeunError::GapMismatch { gap, n });
    }
    Ok(obstruction_with_prefix(&p, n).1)
}

pub fn heun_series(
    params: &HeunParams,
    center: Center,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<LocalSeries, HeunError> {
    let p = params.local(center);
    let gap = -p.beta;
    let resonance = positive_integer(gap);
    let rho = match branch {
        Branch::ZeroExponent => 0.0,
        Branch::LargeExponent => {
            if let Some(n) = resonance {
                n as f64
            } else if let Some(n) = positive_integer(-gap) {
                // the other exponent sits above this one
                return Err(HeunError::ResonantWithoutBranch { step: n });
            } else {
                gap
            }
        }
    };

    let mut a: Vec<f64> = vec![1.0];
    let mut stop = Stopper::new(policy);
    stop.push(0, 1.0);
    for m in 0..policy.max_terms {
        let k = m as f64 + rho;
        let prev = if m >= 1 { a[m - 1] } else { 0.0 };
        let rhs = mid(&p, k) * a[m] + low(&p, k) * prev;
        let next = if branch == Branch::ZeroExponent && resonance == Some(m as u32 + 1) {
            let (_, ob) = obstruction_with_prefix(&p, m as u32 + 1);
            if !ob.is_negligible(OBSTRUCTION_TOL) {
                return Err(HeunError::ResonantWithoutBranch { step: m as u32 + 1 });
            }
            // free coefficient; zero picks the solution without a large-exponent admixture
            0.0
        } else {
            rhs / lead(&p, m as f64, rho)
        };
        a.push(next);
        if stop.push(m + 1, next.abs()) {
            return Ok(LocalSeries {
                center,
                exponent: c(rho),
                coeffs: a.into_iter().map(c).collect(),
                radius: 1.0,
                reach: policy.reach,
                log: None,
                truncation_error_estimate: stop.estimate(),
            });
        }
    }
    Err(HeunError::Divergent { terms: policy.max_terms })
}

/// Second solution at a resonant center: `∂/∂ρ` of the Frobenius series with
/// `a_0 = ρ`, evaluated at `ρ = 0`. Contains `ln t` unless the obstruction
/// vanishes.
pub fn heun_log_series(
    params: &HeunParams,
    center: Center,
    policy: &TruncationPolicy,
) -> Result<LocalSeries, HeunError> {
    let p = params.local(center);
    let gap = -p.beta;
    let Some(n_res) = positive_integer(gap) else {
        return Err(HeunError::GapMismatch { gap, n: 0 });
    };
    let n_res = n_res as usize;
    let rho = Dual::variable(0.0);
    let d_lead = |m: usize| (rho + (m as f64 + 1.0)) * (rho + (m as f64 + 1.0 + p.beta));
    let d_mid = |m: usize| {
        let k = rho + m as f64;
        k * (k + (p.beta + p.gamma + 1.0 - p.alpha)) + (-p.mu_tilde())
    };
    let d_low = |m: usize| (rho + (m as f64 - 1.0)) * p.alpha + (p.mu_tilde() + p.nu_tilde());

    // c_n(ρ) with c_0 = 1 up to n_res - 1, then a_n = ρ c_n.
    let mut cs = vec![Dual::real(1.0)];
    for m in 0..n_res - 1 {
        let prev = if m >= 1 { cs[m - 1] } else { Dual::zero() };
        let next = (d_mid(m) * cs[m] + d_low(m) * prev) / d_lead(m);
        cs.push(next);
    }
    let m = n_res - 1;
    let prev = if m >= 1 { cs[m - 1] } else { Dual::zero() };
    let a_n = (d_mid(m) * cs[m] + d_low(m) * prev) / (rho + n_res as f64);
    let mut a: Vec<Dual> = cs.iter().map(|&cn| rho * cn).collect();
    a.push(a_n);

    let mut stop = Stopper::new(policy);
    for (k, ak) in a.iter().enumerate() {
        stop.push(k, ak.magnitude());
    }
    let mut converged = false;
    for m in n_res..policy.max_terms {
        let next = (d_mid(m) * a[m] + d_low(m) * a[m - 1]) / d_lead(m);
        a.push(next);
        if stop.push(m + 1, next.magnitude()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(HeunError::Divergent { terms: policy.max_terms });
    }

    let log_coeff = a[n_res].v;
    let large = heun_series(params, center, Branch::LargeExponent, policy)?;
    let mut companion = vec![c(0.0); n_res];
    companion.extend(large.coeffs.iter().copied());
    Ok(LocalSeries {
        center,
        exponent: c(0.0),
        coeffs: a.iter().map(|d| d.d).collect(),
        radius: 1.0,
        reach: policy.reach,
        log: Some(LogCompanion { coeff: log_coeff, coeffs: companion }),
        truncation_error_estimate: stop.estimate().max(large.truncation_error_estimate),
    })
}

/// `(Σ aₙtⁿ, first, second derivative)`.
fn horner(coeffs: &[C], t: C) -> (C, C, C) {
    let (mut s0, mut s1, mut s2) = (c(0.0), c(0.0), c(0.0));
    for &a in coeffs.iter().rev() {
        s2 = s2 * t + 2.0 * s1;
        s1 = s1 * t + s0;
        s0 = s0 * t + a;
    }
    (s0, s1, s2)
}

/// `t^ρ` and its first two derivatives.
fn power_prefactor(rho: C, t: C) -> (C, C, C) {
    if rho.im == 0.0 && rho.re >= 0.0 && rho.re.fract() == 0.0 {
        let n = rho.re as i32;
        let p0 = t.powi(n);
        let p1 = if n >= 1 { t.powi(n - 1) * n as f64 } else { c(0.0) };
        let p2 = if n >= 2 { t.powi(n - 2) * (n * (n - 1)) as f64 } else { c(0.0) };
        (p0, p1, p2)
    } else {
        let p0 = t.powc(rho);
        (p0, p0 * rho / t, p0 * rho * (rho - 1.0) / (t * t))
    }
}

impl LocalSeries {
    pub fn usable_radius(&self) -> f64 {
        (0.95 * self.radius).min(self.reach)
    }

    /// Value, first and second derivative with respect to `y`.
    pub fn eval_with_second(&self, y: C) -> Result<(C, C, C), HeunError> {
        let t = self.center.local_coordinate(y);
        let limit = self.usable_radius();
        if t.norm() > limit * (1.0 + 1e-12) {
            return Err(HeunError::OutOfDisk { distance: t.norm(), limit });
        }
        let (s0, s1, s2) = horner(&self.coeffs, t);
        let (p0, p1, p2) = power_prefactor(self.exponent, t);
        let mut f0 = p0 * s0;
        let mut f1 = p1 * s0 + p0 * s1;
        let mut f2 = p2 * s0 + 2.0 * p1 * s1 + p0 * s2;
        if let Some(log) = &self.log {
            let (g0, g1, g2) = horner(&log.coeffs, t);
            let ln = t.ln();
            f0 += log.coeff * ln * g0;
            f1 += log.coeff * (g0 / t + ln * g1);
            f2 += log.coeff * (-g0 / (t * t) + 2.0 * g1 / t + ln * g2);
        }
        let s = self.center.orientation();
        Ok((f0, s * f1, f2))
    }

    /// Value and first derivative with respect to `y`.
    pub fn eval(&self, y: C) -> Result<(C, C), HeunError> {
        let (f, df, _) = self.eval_with_second(y)?;
        Ok((f, df))
    }
}

pub fn heun_eval(series: &LocalSeries, y: C) -> Result<(C, C), HeunError> {
    series.eval(y)
}

/// `v₁'v₂ − v₁v₂'` at `y`.
pub fn wronskian_scalar(s1: &LocalSeries, s2: &LocalSeries, y: C) -> Result<C, HeunError> {
    let (v1, d1) = s1.eval(y)?;
    let (v2, d2) = s2.eval(y)?;
    Ok(d1 * v2 - v1 * d2)
}
