//! Real zero scanning for spectral condition functions.
//!
//! Sign changes on a uniform grid are refined by bisection and polished by a
//! bounded secant step. Sign changes through poles are filtered out, and
//! local dips of `|f|` are probed for close root pairs the grid would miss.

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("no grid point could be evaluated: interval fully excluded")]
    NoEvaluations,
    #[error("invalid scan configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub refined_root: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub step: f64,
    pub refine_tol: f64,
    pub pole_filter: bool,
    /// Probe local minima of `|f|` for sign changes between grid points.
    pub dip_detection: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { step: 0.005, refine_tol: 1e-10, pole_filter: true, dip_detection: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanOutcome {
    /// Accepted zeros, sorted.
    pub roots: Vec<ZeroBracket>,
    /// Sign changes rejected by the pole filter.
    pub poles: Vec<ZeroBracket>,
}

impl ScanOutcome {
    pub fn root_values(&self) -> Vec<f64> {
        self.roots.iter().map(|b| b.refined_root).collect()
    }
}

/// Grid over `[lo, hi]` minus the exclusion zones, one segment per connected
/// piece, each with its endpoints on the grid.
fn segments(lo: f64, hi: f64, exclusions: &[(f64, f64)], step: f64) -> Vec<Vec<f64>> {
    let mut zones: Vec<(f64, f64)> = exclusions
        .iter()
        .copied()
        .filter(|&(a, b)| b > lo && a < hi)
        .collect();
    zones.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pieces = Vec::new();
    let mut start = lo;
    for (a, b) in zones {
        if a > start {
            pieces.push((start, a));
        }
        start = start.max(b);
    }
    if hi > start {
        pieces.push((start, hi));
    }
    pieces
        .into_iter()
        .map(|(a, b)| {
            let n = ((b - a) / step).ceil().max(1.0) as usize;
            (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
        })
        .collect()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn refine<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, mut f_hi: f64, tol: f64) -> ZeroBracket {
    // exact zeros on the grid: return a degenerate bracket around them
    if f_lo == 0.0 || f_hi == 0.0 {
        let r = if f_lo == 0.0 { lo } else { hi };
        return ZeroBracket { lo: r, hi: r, f_lo, f_hi, refined_root: r, residual: 0.0 };
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return ZeroBracket { lo: mid, hi: mid, f_lo: fm, f_hi: fm, refined_root: mid, residual: 0.0 };
        }
        if !fm.is_finite() {
            break;
        }
        if sign(fm) == sign(f_lo) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    // secant polish, kept only if it stays inside and improves the residual
    let mid = 0.5 * (lo + hi);
    let f_mid = f(mid);
    let mut root = mid;
    let mut residual = f_mid.abs();
    let sec = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if sec > lo && sec < hi {
        let fs = f(sec);
        if fs.is_finite() && fs.abs() < residual {
            root = sec;
            residual = fs.abs();
        }
    }
    ZeroBracket { lo, hi, f_lo, f_hi, refined_root: root, residual }
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(f64::total_cmp);
    v[1]
}

/// Minimize `s·f` over `[a, b]` by golden-section search; returns the
/// minimizer if `s·f` goes negative there.
fn probe_dip<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, s: f64, tol: f64) -> Option<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (s * f(c), s * f(d));
    for _ in 0..100 {
        if fc < 0.0 {
            return Some(c);
        }
        if fd < 0.0 {
            return Some(d);
        }
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = s * f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = s * f(d);
        }
    }
    None
}

pub fn scan_zeros<F>(f: &F, interval: (f64, f64), exclusions: &[(f64, f64)], cfg: &ScanConfig) -> Result<ScanOutcome, SpectralError>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (lo, hi) = interval;
    if !(cfg.step > 0.0) || !(cfg.refine_tol > 0.0) {
        return Err(SpectralError::InvalidConfig("step and refine_tol must be positive".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SpectralError::InvalidConfig(format!("bad interval [{lo}, {hi}]")));
    }
    let segs = segments(lo, hi, exclusions, cfg.step);
    if segs.is_empty() {
        return Err(SpectralError::NoEvaluations);
    }

    let evaluated: Vec<Vec<(f64, f64)>> = segs
        .par_iter()
        .map(|seg| seg.par_iter().map(|&x| (x, f(x))).collect())
        .collect();
    if evaluated.iter().flatten().all(|(_, v)| !v.is_finite()) {
        return Err(SpectralError::NoEvaluations);
    }

    // (lo, hi, f_lo, f_hi, bracket median)
    let mut brackets: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut dips: Vec<(f64, f64, f64)> = Vec::new();
    for seg in &evaluated {
        for (i, w) in seg.windows(2).enumerate() {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if !(f0.is_finite() && f1.is_finite()) {
                continue;
            }
            if f0 == 0.0 && i > 0 {
                continue; // already reported as the right end of the previous bracket
            }
            if sign(f0) * sign(f1) <= 0.0 {
                brackets.push((x0, x1, f0, f1));
            } else if cfg.dip_detection && i + 2 < seg.len() {
                let (x2, f2) = seg[i + 2];
                if f2.is_finite() && sign(f2) == sign(f1) && f1.abs() < f0.abs() && f1.abs() < f2.abs() {
                    dips.push((x0, x2, sign(f1)));
                }
            }
        }
    }

    let found_dips: Vec<(f64, f64, f64)> = dips
        .par_iter()
        .filter_map(|&(a, b, s)| probe_dip(f, a, b, s, cfg.refine_tol).map(|m| (a, m, b)))
        .collect();
    for (a, m, b) in found_dips {
        let (fa, fm, fb) = (f(a), f(m), f(b));
        brackets.push((a, m, fa, fm));
        brackets.push((m, b, fm, fb));
    }

    let refined: Vec<(ZeroBracket, f64)> = brackets
        .par_iter()
        .map(|&(a, b, fa, fb)| {
            let med = median3(fa.abs(), fb.abs(), f(0.5 * (a + b)).abs());
            (refine(f, a, b, fa, fb, cfg.refine_tol), med)
        })
        .collect();

    let mut out = ScanOutcome::default();
    for (zb, med) in refined {
        if cfg.pole_filter && !(zb.residual <= med) {
            out.poles.push(zb);
        } else {
            out.roots.push(zb);
        }
    }
    out.roots.sort_by(|a, b| a.refined_root.total_cmp(&b.refined_root));
    out.roots.dedup_by(|a, b| (a.refined_root - b.refined_root).abs() <= cfg.refine_tol);
    out.poles.sort_by(|a, b| a.refined_root.total_cmp(&b.refined_root));
    Ok(out)
}

/// A parameter sweep: one row per item produced at each grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable<T> {
    pub rows: Vec<(f64, T)>,
    pub failures: Vec<(f64, String)>,
}

/// Evaluates `family` at every grid value in parallel. Rows keep the grid
/// order, and within a grid value the order produced by `family`.
pub fn sweep<T, F>(grid: &[f64], family: F) -> SweepTable<T>
where
    T: Send,
    F: Fn(f64) -> Result<Vec<T>, String> + Sync,
{
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let results: Vec<(f64, Result<Vec<T>, String>)> =
        sorted.par_iter().map(|&p| (p, family(p))).collect();
    let mut table = SweepTable { rows: Vec::new(), failures: Vec::new() };
    for (p, r) in results {
        match r {
            Ok(items) => table.rows.extend(items.into_iter().map(|t| (p, t))),
            Err(e) => table.failures.push((p, e)),
        }
    }
    table
}
