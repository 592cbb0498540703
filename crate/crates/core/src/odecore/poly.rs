//! Dense real-coefficient polynomials in one complex variable.

use num_complex::Complex64;

/// Polynomial stored as `coeffs[k]` = coefficient of `z^k`. Trailing zeros are
/// trimmed on construction, so the zero polynomial has an empty coefficient
/// list.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `(z - root)` for a real root.
    pub fn linear_factor(root: f64) -> Self {
        Poly::new(vec![-root, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Coefficient of `z^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `k`-th derivative evaluated at `z`.
    pub fn eval_derivative(&self, z: Complex64, k: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate().skip(k).rev() {
            let falling: f64 = (0..k).map(|i| (j - i) as f64).product();
            acc = acc * z + c * falling;
        }
        acc
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; k];
        out.extend_from_slice(&self.coeffs);
        Poly::new(out)
    }

    /// Largest coefficient magnitude, used as a scale for relative tests.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Exact division by a monic real factor. The remainder is discarded; the
    /// caller guarantees divisibility up to rounding.
    pub fn div_monic(&self, divisor: &Poly) -> Poly {
        let dd = match divisor.degree() {
            Some(d) => d,
            None => return Poly::zero(),
        };
        let Some(n) = self.degree() else {
            return Poly::zero();
        };
        if n < dd {
            return Poly::zero();
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; n - dd + 1];
        for k in (0..=n - dd).rev() {
            let q = rem[k + dd] / divisor.leading();
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
        }
        Poly::new(quot)
    }

    /// All complex roots by Aberth–Ehrlich iteration.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(n) = self.degree() else {
            return Vec::new();
        };
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        if n == 1 {
            return vec![Complex64::new(-monic[0], 0.0)];
        }
        let p = Poly { coeffs: monic };

        // Cauchy bound for the initial circle.
        let bound = 1.0
            + p.coeffs[..n]
                .iter()
                .fold(0.0f64, |m, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
                Complex64::from_polar(0.5 * bound, angle)
            })
            .collect();

        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let f = p.eval(z[i]);
                let df = p.eval_derivative(z[i], 1);
                if f.norm() == 0.0 {
                    continue;
                }
                let ratio = f / df;
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let d = z[i] - z[j];
                        if d.norm() == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            d.inv()
                        }
                    })
                    .sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[i] -= step;
                    max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        z
    }

    /// Distinct roots with multiplicities. Roots closer than `cluster_tol`
    /// (relative to their magnitude) are merged; the cluster mean is then
    /// polished by Newton steps on the `(m-1)`-th derivative, where an
    /// `m`-fold root is simple.
    pub fn distinct_roots(&self, cluster_tol: f64) -> Vec<(Complex64, usize)> {
        let mut roots = self.roots();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut used = vec![false; roots.len()];
        let mut out = Vec::new();
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let mut members = vec![roots[i]];
            used[i] = true;
            for j in i + 1..roots.len() {
                if !used[j]
                    && (roots[j] - roots[i]).norm() <= cluster_tol * (1.0 + roots[i].norm())
                {
                    members.push(roots[j]);
                    used[j] = true;
                }
            }
            let m = members.len();
            let mut r = members.iter().sum::<Complex64>() / m as f64;
            for _ in 0..4 {
                let f = self.eval_derivative(r, m - 1);
                let df = self.eval_derivative(r, m);
                let step = f / df;
                if !step.is_finite() || step.norm() > cluster_tol * (1.0 + r.norm()) {
                    break;
                }
                r -= step;
            }
            out.push((snap_real(r), m));
        }
        out
    }
}

fn snap_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Taylor coefficients of `num/den` in powers of `w = 1/z` around infinity,
/// starting at `w^0`. Returns `None` when the limit at infinity is infinite.
pub fn expand_at_infinity(num: &Poly, den: &Poly, n_terms: usize) -> Option<Vec<f64>> {
    let dd = den.degree()?;
    let Some(dn) = num.degree() else {
        return Some(vec![0.0; n_terms]);
    };
    if dn > dd {
        return None;
    }
    // num/den = w^(dd-dn) * Nrev(w)/Drev(w), with Xrev(w) = w^deg X(1/w).
    let nrev: Vec<f64> = (0..=dn).map(|i| num.coeff(dn - i)).collect();
    let drev: Vec<f64> = (0..=dd).map(|i| den.coeff(dd - i)).collect();
    let shift = dd - dn;
    let mut series = vec![0.0; n_terms];
    let mut quotient = Vec::with_capacity(n_terms);
    for k in 0..n_terms.saturating_sub(shift) {
        let mut acc = nrev.get(k).copied().unwrap_or(0.0);
        for j in 1..=k.min(dd) {
            acc -= drev[j] * quotient[k - j];
        }
        quotient.push(acc / drev[0]);
    }
    for (k, q) in quotient.into_iter().enumerate() {
        series[k + shift] = q;
    }
    Some(series)
}
