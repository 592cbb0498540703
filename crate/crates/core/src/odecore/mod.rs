//! Second-order linear ODEs with rational coefficients,
//! `φ'' + p(z) φ' + q(z) φ = 0`, and their singularity structure.
//!
//! Finite singular points are the poles of `p` and `q`. A pole is a regular
//! singular point when `p` has at most a simple pole and `q` at most a double
//! pole there; the leading local powers are then the roots of the indicial
//! polynomial `ρ(ρ−1) + p₋₁ρ + q₋₂`. At infinity only Poincaré rank ≤ 1 is
//! handled: `p` and `q` must have finite limits, and formal solutions behave
//! like `e^{cz} z^ρ`.

mod poly;

pub use poly::{expand_at_infinity, Poly};

use num_complex::Complex64;
use thiserror::Error;

/// Absolute tolerance for exponent equality and integrality tests.
pub const DEFAULT_TOL: f64 = 1e-12;

// Roots of a k-fold factor found by Aberth iteration scatter by about
// eps^(1/k); this clusters them back together.
const ROOT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("denominator of {0} is the zero polynomial")]
    ZeroDenominator(&'static str),
    #[error("finite singular point at {location} is irregular (pole orders p: {p_order}, q: {q_order})")]
    IrregularFinitePoint {
        location: Complex64,
        p_order: usize,
        q_order: usize,
    },
    #[error("infinity has Poincaré rank above 1 or a degenerate exponential rate")]
    UnsupportedRank,
    #[error("infinity is a regular point; solutions grow polynomially (growth order 0)")]
    NotIrregular,
}

/// `φ'' + p(z)φ' + q(z)φ = 0` with `p = p_num/p_den`, `q = q_num/q_den`.
///
/// The constructor cancels common linear and quadratic factors between
/// numerators and denominators so pole orders can be read off directly.
#[derive(Debug, Clone)]
pub struct RationalODE {
    p_num: Poly,
    p_den: Poly,
    q_num: Poly,
    q_den: Poly,
    tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularPointInfo {
    pub location: Complex64,
    pub is_regular: bool,
    /// `(ρ, ς)` ordered by decreasing real part; `None` at irregular points.
    pub exponents: Option<(Complex64, Complex64)>,
    pub exponent_gap_integer: bool,
    /// Pole orders of `p` and `q` at this point.
    pub p_order: usize,
    pub q_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticData {
    /// `(c, ρ)` pairs of the formal solutions `e^{cz} z^ρ (1 + O(1/z))`.
    pub pairs: Vec<(Complex64, Complex64)>,
    pub poincare_rank: u32,
    pub growth_order: f64,
    /// Present only when the growth order is finite and positive.
    pub growth_type: Option<f64>,
}

impl AsymptoticData {
    /// Growth data when infinity is a regular point (polynomial growth).
    pub fn at_regular_infinity() -> Self {
        AsymptoticData {
            pairs: Vec::new(),
            poincare_rank: 0,
            growth_order: 0.0,
            growth_type: None,
        }
    }

    /// Rank-1 growth data from known `(c, ρ)` pairs.
    pub fn rank_one(pairs: Vec<(Complex64, Complex64)>) -> Self {
        let growth_type = pairs.iter().fold(0.0f64, |m, (c, _)| m.max(c.norm()));
        AsymptoticData {
            pairs,
            poincare_rank: 1,
            growth_order: 1.0,
            growth_type: Some(growth_type),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Inconclusive,
    NotAdmissible,
}

impl RationalODE {
    pub fn new(p_num: Poly, p_den: Poly, q_num: Poly, q_den: Poly) -> Result<Self, OdeError> {
        if p_den.is_zero() {
            return Err(OdeError::ZeroDenominator("p"));
        }
        if q_den.is_zero() {
            return Err(OdeError::ZeroDenominator("q"));
        }
        let (p_num, p_den) = reduce(p_num, p_den);
        let (q_num, q_den) = reduce(q_num, q_den);
        Ok(RationalODE {
            p_num,
            p_den,
            q_num,
            q_den,
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn p(&self) -> (&Poly, &Poly) {
        (&self.p_num, &self.p_den)
    }

    pub fn q(&self) -> (&Poly, &Poly) {
        (&self.q_num, &self.q_den)
    }

    pub fn eval_p(&self, z: Complex64) -> Complex64 {
        self.p_num.eval(z) / self.p_den.eval(z)
    }

    pub fn eval_q(&self, z: Complex64) -> Complex64 {
        self.q_num.eval(z) / self.q_den.eval(z)
    }
}

/// Cancel factors shared by numerator and denominator.
fn reduce(mut num: Poly, mut den: Poly) -> (Poly, Poly) {
    if num.is_zero() {
        return (num, Poly::constant(1.0));
    }
    loop {
        let scale = num.norm_inf();
        let common = den.distinct_roots(ROOT_CLUSTER_TOL).into_iter().find(|(r, _)| {
            let deg = num.degree().unwrap_or(0) as i32;
            num.eval(*r).norm() <= 1e-10 * scale * (1.0 + r.norm()).powi(deg)
        });
        let Some((r, _)) = common else {
            break;
        };
        let factor = if r.im == 0.0 {
            Poly::linear_factor(r.re)
        } else {
            Poly::new(vec![r.norm_sqr(), -2.0 * r.re, 1.0])
        };
        num = num.div_monic(&factor);
        den = den.div_monic(&factor);
        if num.is_zero() {
            return (num, Poly::constant(1.0));
        }
    }
    (num, den)
}

/// Multiplicity of `s` among the roots of `den`, and the leading Laurent
/// coefficient `num(s)·k!/den⁽ᵏ⁾(s)` of `num/den` at `s`.
fn pole_data(num: &Poly, den: &Poly, roots: &[(Complex64, usize)], s: Complex64) -> (usize, Complex64) {
    let order = roots
        .iter()
        .find(|(r, _)| (r - s).norm() <= ROOT_CLUSTER_TOL * (1.0 + s.norm()))
        .map(|(_, k)| *k)
        .unwrap_or(0);
    if order == 0 {
        return (0, Complex64::new(0.0, 0.0));
    }
    let factorial: f64 = (1..=order).map(|i| i as f64).product();
    let lead = num.eval(s) * factorial / den.eval_derivative(s, order);
    (order, lead)
}

/// Roots of `ρ² + bρ + c`, larger real part first.
pub(crate) fn quadratic_roots(b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let disc = (b * b - 4.0 * c).sqrt();
    let r1 = (-b + disc) / 2.0;
    let r2 = (-b - disc) / 2.0;
    if r1.re >= r2.re {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

fn is_integer(z: Complex64, tol: f64) -> bool {
    z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol
}

/// One entry per distinct finite pole of `p` or `q`. Irregular points are
/// reported with `is_regular = false` rather than rejected; use
/// [`regular_singularities`] when the regularity assumption must hold.
pub fn classify_singularities(ode: &RationalODE) -> Vec<SingularPointInfo> {
    let p_roots = ode.p_den.distinct_roots(ROOT_CLUSTER_TOL);
    let q_roots = ode.q_den.distinct_roots(ROOT_CLUSTER_TOL);

    let mut locations: Vec<Complex64> = Vec::new();
    for (r, _) in p_roots.iter().chain(q_roots.iter()) {
        if !locations
            .iter()
            .any(|l| (l - r).norm() <= ROOT_CLUSTER_TOL * (1.0 + r.norm()))
        {
            locations.push(*r);
        }
    }
    locations.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    locations
        .into_iter()
        .map(|s| {
            let (p_order, p_lead) = pole_data(&ode.p_num, &ode.p_den, &p_roots, s);
            let (q_order, q_lead) = pole_data(&ode.q_num, &ode.q_den, &q_roots, s);
            let is_regular = p_order <= 1 && q_order <= 2;
            if !is_regular {
                return SingularPointInfo {
                    location: s,
                    is_regular,
                    exponents: None,
                    exponent_gap_integer: false,
                    p_order,
                    q_order,
                };
            }
            let p_residue = if p_order == 1 { p_lead } else { Complex64::new(0.0, 0.0) };
            let q_double = if q_order == 2 { q_lead } else { Complex64::new(0.0, 0.0) };
            let (rho, varsigma) = quadratic_roots(p_residue - 1.0, q_double);
            SingularPointInfo {
                location: s,
                is_regular,
                exponents: Some((rho, varsigma)),
                exponent_gap_integer: is_integer(rho - varsigma, ode.tol),
                p_order,
                q_order,
            }
        })
        .collect()
}

/// Like [`classify_singularities`], but fails on the first irregular point.
pub fn regular_singularities(ode: &RationalODE) -> Result<Vec<SingularPointInfo>, OdeError> {
    let points = classify_singularities(ode);
    if let Some(bad) = points.iter().find(|p| !p.is_regular) {
        return Err(OdeError::IrregularFinitePoint {
            location: bad.location,
            p_order: bad.p_order,
            q_order: bad.q_order,
        });
    }
    Ok(points)
}

/// Leading formal asymptotics at an irregular point at infinity of rank 1.
///
/// With `p = p∞ + p₁/z + …` and `q = q∞ + q₁/z + …`, substituting
/// `e^{cz} z^ρ (1 + O(1/z))` cancels the `z⁰` order when
/// `c² + p∞c + q∞ = 0` and the `z⁻¹` order when `ρ = −(p₁c + q₁)/(2c + p∞)`.
pub fn irregular_infinity_data(ode: &RationalODE) -> Result<AsymptoticData, OdeError> {
    let p = expand_at_infinity(&ode.p_num, &ode.p_den, 3).ok_or(OdeError::UnsupportedRank)?;
    let q = expand_at_infinity(&ode.q_num, &ode.q_den, 3).ok_or(OdeError::UnsupportedRank)?;
    let tol = ode.tol;
    let scale = 1.0 + p.iter().chain(q.iter()).fold(0.0f64, |m, c| m.max(c.abs()));

    if p[0].abs() <= tol * scale && q[0].abs() <= tol * scale {
        if q[1].abs() <= tol * scale {
            return Err(OdeError::NotIrregular);
        }
        // q ~ q₁/z: half-integer rank, outside the supported class.
        return Err(OdeError::UnsupportedRank);
    }

    let (p_inf, p1) = (Complex64::new(p[0], 0.0), Complex64::new(p[1], 0.0));
    let (q_inf, q1) = (Complex64::new(q[0], 0.0), Complex64::new(q[1], 0.0));
    let (c1, c2) = quadratic_roots(p_inf, q_inf);

    let mut pairs = Vec::with_capacity(2);
    for c in [c1, c2] {
        let denom = 2.0 * c + p_inf;
        if denom.norm() <= tol * scale {
            return Err(OdeError::UnsupportedRank);
        }
        pairs.push((c, -(p1 * c + q1) / denom));
    }
    Ok(AsymptoticData::rank_one(pairs))
}

/// Membership verdict for the Bargmann space from growth order and type:
/// order below 2 is fine, order 2 needs type below 1/2, and exactly type 1/2
/// cannot be decided from growth data alone.
pub fn bargmann_admissibility(a: &AsymptoticData) -> Admissibility {
    let order = a.growth_order;
    if order < 2.0 {
        return Admissibility::Admissible;
    }
    if order > 2.0 {
        return Admissibility::NotAdmissible;
    }
    match a.growth_type {
        Some(t) if (t - 0.5).abs() <= DEFAULT_TOL => Admissibility::Inconclusive,
        Some(t) if t < 0.5 => Admissibility::Admissible,
        Some(_) => Admissibility::NotAdmissible,
        None => Admissibility::Inconclusive,
    }
}
