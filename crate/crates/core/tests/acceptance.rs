//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use common::{oracle_window, paired_max_diff, within};
use num_complex::Complex64 as C;
use rabispec::fockoracle::{build_hamiltonian, convergence_check, eigenvalues, FockModel};
use rabispec::heun::{heun_series, wronskian_scalar, Branch, Center, HeunParams, TruncationPolicy};
use rabispec::odecore::{bargmann_admissibility, classify_singularities, irregular_infinity_data, Admissibility};
use rabispec::rabi_eps::{spectrum_model1, Model1Base, Model1Params};
use rabispec::rabi_nl::{coeff_matrix_a, judd_factor, judd_parabola, spectrum_model2, Model2Base, Model2Params};
use rabispec::spectrum::SpectrumConfig;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model1_vs_oracle(lambda: f64, mu: f64, eps: f64) -> Result<f64, String> {
    let l2 = lambda * lambda;
    let set = spectrum_model1(&Model1Base::new(lambda, mu, eps), &SpectrumConfig::new(0.0, 6.0)).map_err(|e| e.to_string())?;
    let method = within(&set.energies_with_multiplicity(), -l2, 6.0 - l2);
    let model = FockModel::RabiEps { lambda, mu, eps };
    let oracle = oracle_window(model, 120, -l2, 6.0 - l2);
    let drift = convergence_check(model, &[120, 160], oracle.len() + 2).map_err(|e| e.to_string())?[0].drift;
    ensure(drift < 1e-8, || format!("oracle not self-converged: drift {drift:e}"))?;
    paired_max_diff(&method, &oracle)
        .ok_or_else(|| format!("{} method roots vs {} oracle levels", method.len(), oracle.len()))
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for (l, m, e) in [(0.7, 0.4, 0.0), (0.4, 0.7, 0.2)] {
        let d = model1_vs_oracle(l, m, e).map_err(|s| format!("({l}, {m}, {e}): {s}"))?;
        ensure(d < 1e-6, || format!("({l}, {m}, {e}): max |dE| = {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("max |dE| = {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut worst_oracle: f64 = 0.0;
    for (mu, eps) in [(0.7, 0.2), (0.4, 0.0), (0.3, 0.35)] {
        let r = f64::hypot(mu, eps);
        let op = build_hamiltonian(FockModel::RabiEps { lambda: 0.0, mu, eps }, 30).map_err(|e| e.to_string())?;
        let got = eigenvalues(&op, 20).map_err(|e| e.to_string())?;
        let mut want: Vec<f64> = (0..20).flat_map(|n| [n as f64 - r, n as f64 + r]).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
    }
    ensure(worst_oracle < 1e-10, || format!("decoupled oracle off by {worst_oracle:e}"))?;

    let mut worst_method: f64 = 0.0;
    for (lambda, eps) in [(0.3, 0.15), (0.7, 0.3), (0.5, 0.0)] {
        let l2 = lambda * lambda;
        let set = spectrum_model1(&Model1Base::new(lambda, 0.0, eps), &SpectrumConfig::new(0.0, 5.5)).map_err(|e| e.to_string())?;
        let got = within(&set.energies_with_multiplicity(), -l2, 5.5 - l2);
        let mut want: Vec<f64> = (0..8)
            .flat_map(|n| [n as f64 - eps, n as f64 + eps])
            .filter(|x| *x >= 0.0 && *x <= 5.5)
            .map(|x| x - l2)
            .collect();
        want.sort_by(f64::total_cmp);
        let want = within(&want, -l2, 5.5 - l2);
        let d = paired_max_diff(&got, &want)
            .ok_or_else(|| format!("mu = 0, lambda = {lambda}, eps = {eps}: {got:?} vs {want:?}"))?;
        worst_method = worst_method.max(d);
    }
    ensure(worst_method < 1e-8, || format!("mu = 0 method off by {worst_method:e}"))?;
    Ok(format!("oracle {worst_oracle:.2e}, mu = 0 method {worst_method:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for lambda in [0.2, 0.5, 0.8] {
        for mu in [0.4, 0.7] {
            let l2 = lambda * lambda;
            let a = spectrum_model2(&Model2Base::new(1.0, 2.0 * mu, lambda, 0.0), &SpectrumConfig::new(-l2 + 0.01, 5.0 - l2))
                .map_err(|e| e.to_string())?;
            let b = spectrum_model1(&Model1Base::new(lambda, mu, 0.0), &SpectrumConfig::new(0.01, 5.0))
                .map_err(|e| e.to_string())?;
            let d = paired_max_diff(&a.energies_with_multiplicity(), &b.energies_with_multiplicity())
                .ok_or_else(|| format!("({lambda}, {mu}): root counts differ"))?;
            worst = worst.max(d);
        }
    }
    ensure(worst < 1e-8, || format!("max difference {worst:e}"))?;
    Ok(format!("max difference {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for g in [0.2, 0.5, 0.9] {
        let (lo, hi) = (-1.5, 8.0);
        let set = spectrum_model2(&Model2Base::new(2.0, 1.0, g, -2.0), &SpectrumConfig::new(lo, hi)).map_err(|e| e.to_string())?;
        let method = within(&set.energies_with_multiplicity(), lo, hi);
        let oracle = oracle_window(FockModel::NonlinearU { omega: 2.0, omega0: 1.0, g, u: -2.0 }, 160, lo, hi);
        let d = paired_max_diff(&method, &oracle)
            .ok_or_else(|| format!("g = {g}: {} method roots vs {} oracle levels", method.len(), oracle.len()))?;
        worst = worst.max(d);
    }
    ensure(worst < 1e-6, || format!("max |dE| = {worst:e}"))?;
    Ok(format!("max |dE| = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let (w, u, g, w0) = (2.0f64, -2.0f64, 0.9f64, 1.46f64);
    let p = Model2Params::new(1.46, w, w0, g, u);
    ensure((p.x() - 1.0).abs() < 1e-14, || format!("x = {}", p.x()))?;
    let cc = 4.0 * g * g / (4.0 * w * w - u * u);
    let mut worst: f64 = 0.0;
    // e^{∓cy}(y ± 1)^x (√(2ω − U), ±√(2ω + U))
    for sign in [1.0, -1.0] {
        let v = [(2.0 * w - u).sqrt(), sign * (2.0 * w + u).sqrt()];
        for y in [-0.7, -0.2, 0.3, 0.8, 1.7, 3.0] {
            let f = (-sign * cc * y).exp() * (y + sign);
            let df = (-sign * cc * y).exp() * (1.0 - sign * cc * (y + sign));
            let a = coeff_matrix_a(&p, C::new(y, 0.0)).map_err(|e| e.to_string())?;
            for i in 0..2 {
                let af = a[i][0] * f * v[0] + a[i][1] * f * v[1];
                worst = worst.max((af.re - df * v[i]).abs() / (df * v[i]).abs().max(1.0));
            }
        }
    }
    ensure(worst < 1e-12, || format!("explicit solution residual {worst:e}"))?;
    let set = spectrum_model2(&Model2Base::new(w, w0, g, u), &SpectrumConfig::new(-1.0, 4.0)).map_err(|e| e.to_string())?;
    let hit = set.points.iter().find(|q| (q.energy - 1.46).abs() < 1e-9).ok_or("E = 1.46 missing from spectrum")?;
    let oracle = oracle_window(FockModel::NonlinearU { omega: w, omega0: w0, g, u }, 160, -1.0, 4.0);
    let near = oracle.iter().map(|e| (e - 1.46).abs()).fold(f64::INFINITY, f64::min);
    ensure(near < 1e-6, || format!("nearest oracle level is {near:e} away"))?;
    Ok(format!("residual {worst:.2e}, kind {}, oracle distance {near:.2e}", hit.kind.as_str()))
}

/// Second factor of the closed-form J₁ polynomial, with its magnitude.
fn closed_second_factor(w: f64, u: f64, w0: f64, g: f64) -> (f64, f64) {
    let d = u * u - 4.0 * w * w;
    let t = [
        16.0 * g.powi(4) * u * u,
        d * d * ((u + w0).powi(2) - 4.0 * w * w),
        8.0 * g * g * d * (u * (u + w0) - 8.0 * w * w),
    ];
    (t.iter().sum(), t.iter().map(|v| v.abs()).sum())
}

fn closed_first_factor(w: f64, u: f64, w0: f64, g: f64) -> (f64, f64) {
    let d = u * u - 4.0 * w * w;
    let t = [4.0 * g * g * u, d * (u + w0)];
    (t.iter().sum(), t.iter().map(|v| v.abs()).sum())
}

fn criterion_6() -> Outcome {
    let (w, u) = (2.0f64, -2.0f64);
    let rel_j = |w0: f64, g: f64| judd_factor(&Model2Params::from_x(1.0, w, w0, g, u), 1, 1).map(|j| j.relative());
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let g = 0.05 + 1.45 * i as f64 / 49.0;
        worst = worst.max(rel_j(judd_parabola(1, w, u, g), g).map_err(|e| e.to_string())?);
    }
    let mut second = 0;
    for i in 0..50 {
        // the constant term is negative on (−2, 6): one positive root g²
        let w0 = -1.9 + 7.8 * i as f64 / 49.0;
        // quadratic in g² for the second factor
        let d = u * u - 4.0 * w * w;
        let (qa, qb, qc) = (16.0 * u * u, 8.0 * d * (u * (u + w0) - 8.0 * w * w), d * d * ((u + w0).powi(2) - 4.0 * w * w));
        let disc = qb * qb - 4.0 * qa * qc;
        for g2 in [(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)] {
            if disc >= 0.0 && g2 > 0.0 {
                worst = worst.max(rel_j(w0, g2.sqrt()).map_err(|e| e.to_string())?);
                second += 1;
            }
        }
    }
    ensure(second >= 50, || format!("only {second} points on the second factor"))?;
    ensure(worst < 1e-8, || format!("|J1| relative {worst:e} on the closed-form zero set"))?;
    // off the zero set the extracted factor must not vanish
    let mut smallest_off = f64::INFINITY;
    for i in 0..50 {
        let (w0, g) = (-2.9 + 0.113 * i as f64, 0.07 + 0.029 * i as f64);
        let (f1, s1) = closed_first_factor(w, u, w0, g);
        let (f2, s2) = closed_second_factor(w, u, w0, g);
        if (f1 / s1).abs() > 1e-3 && (f2 / s2).abs() > 1e-3 {
            smallest_off = smallest_off.min(rel_j(w0, g).map_err(|e| e.to_string())?);
        }
    }
    ensure(smallest_off > 1e-6, || format!("extracted factor vanishes off the closed-form zero set ({smallest_off:e})"))?;
    Ok(format!("on zero set {worst:.2e} ({} points), off zero set min {smallest_off:.2e}", 50 + second))
}

fn criterion_7() -> Outcome {
    let pol = TruncationPolicy::default();
    let mut heun_res: f64 = 0.0;
    let mut abel: f64 = 0.0;
    for (a, b, g, d, e) in [(1.0, 0.3, -0.4, 0.5, 0.2), (2.5, 1.7, 0.8, -1.0, 1.3), (0.6, -0.5, 2.2, 1.5, -0.7)] {
        let p = HeunParams::new(a, b, g, d, e);
        let h1 = heun_series(&p, Center::Zero, Branch::ZeroExponent, &pol).map_err(|e| e.to_string())?;
        let h2 = heun_series(&p, Center::One, Branch::ZeroExponent, &pol).map_err(|e| e.to_string())?;
        let ab = |y: f64| -> Result<f64, String> {
            let w = wronskian_scalar(&h1, &h2, C::new(y, 0.0)).map_err(|e| e.to_string())?;
            Ok(w.re * (a * y).exp() * y.powf(b + 1.0) * (1.0 - y).powf(g + 1.0))
        };
        let ref_val = ab(0.5)?;
        for k in 1..10 {
            let y = k as f64 / 10.0;
            abel = abel.max((ab(y)? - ref_val).abs() / ref_val.abs());
            for (s, yy) in [(&h1, y.min(0.6)), (&h2, y.max(0.4))] {
                let yc = C::new(yy, 0.0);
                let (v, dv, ddv) = s.eval_with_second(yc).map_err(|e| e.to_string())?;
                let (pc, qc) = p.coefficients(yc);
                let r = (ddv + pc * dv + qc * v).norm() / (ddv.norm() + (pc * dv).norm() + (qc * v).norm());
                heun_res = heun_res.max(r);
            }
        }
    }
    ensure(heun_res < 1e-10, || format!("Heun residual {heun_res:e}"))?;
    ensure(abel < 1e-9, || format!("Abel drift {abel:e}"))?;

    let mut mirror: f64 = 0.0;
    let mut indicial: f64 = 0.0;
    for p in [Model2Params::new(0.3, 2.0, 1.0, 0.5, -2.0), Model2Params::new(-0.8, 1.0, 0.4, 0.9, 0.7)] {
        for y in [C::new(0.3, 0.1), C::new(-1.7, 0.0), C::new(0.0, 2.0)] {
            let a = coeff_matrix_a(&p, y).map_err(|e| e.to_string())?;
            let b = coeff_matrix_a(&p, -y).map_err(|e| e.to_string())?;
            for i in 0..2 {
                for j in 0..2 {
                    let s = if i == j { 1.0 } else { -1.0 };
                    mirror = mirror.max((s * b[i][j] + a[i][j]).norm() / (1.0 + a[i][j].norm()));
                }
            }
        }
        let [b0, b1, b2] = p.b_matrices();
        for s in [1.0, -1.0] {
            let r = |i: usize, j: usize| (b0[i][j] + b1[i][j] * s + b2[i][j]) / (2.0 * s);
            indicial = indicial.max(((r(0, 0) + r(1, 1)).re - p.x()).abs());
            indicial = indicial.max((r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0)).norm());
        }
        ensure(bargmann_admissibility(&p.asymptotic_data()) == Admissibility::Admissible, || "model 2 not admissible".into())?;
    }
    for (x, l, m, e) in [(1.3, 0.4, 0.7, 0.2), (0.45, 0.9, 0.3, 0.35)] {
        let p = Model1Params::new(x, l, m, e);
        for pt in classify_singularities(&p.ode().map_err(|e| e.to_string())?) {
            let (r, s) = pt.exponents.ok_or("irregular finite point")?;
            let want = if pt.location.re < 0.0 { p.gap0() } else { p.gap1() };
            indicial = indicial.max(((r - s).re - want.abs()).abs());
        }
        let mut got = irregular_infinity_data(&p.ode().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.pairs;
        got.sort_by(|a, b| b.0.re.total_cmp(&a.0.re));
        let want = [(l, x + e - 1.0), (-l, x - e)];
        for ((a, b), (wa, wb)) in got.iter().zip(want) {
            ensure((a.re - wa).abs() < 1e-12 && (b.re - wb).abs() < 1e-12, || format!("asymptotic pair ({a}, {b})"))?;
        }
        ensure(bargmann_admissibility(&p.asymptotic_data()) == Admissibility::Admissible, || "model 1 not admissible".into())?;
    }
    ensure(mirror < 1e-10, || format!("mirror residual {mirror:e}"))?;
    ensure(indicial < 1e-12, || format!("indicial mismatch {indicial:e}"))?;
    Ok(format!("Heun {heun_res:.1e}, Abel {abel:.1e}, mirror {mirror:.1e}, indicial {indicial:.1e}"))
}

fn criterion_8() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["spectrum", "--model", "rabi-eps", "--mu", "0.7", "--eps", "0.2", "--lambda", "0:1:0.05", "--x", "0:6"],
        &["spectrum", "--model", "rabi-nl", "--omega", "2", "--omega0", "1", "--bigu", "-2", "--g", "0:1:0.05", "--e", "-1:5"],
        &["wtrace", "--model", "rabi-eps", "--lambda", "0.4", "--mu", "0.7", "--eps", "0.2", "--x", "-1:7:0.01"],
        &["judd", "--m", "1", "--omega", "2", "--bigu", "-2", "--omega0", "-3:3:0.1", "--g", "0.05:1.5:0.05"],
    ];
    let mut bytes = 0;
    for args in runs {
        let go = || Command::new(env!("CARGO_BIN_EXE_rabispec")).args(args).output().map_err(|e| e.to_string());
        let (a, b) = (go()?, go()?);
        ensure(a.status.success() && b.status.success(), || format!("{args:?} failed"))?;
        ensure(a.stdout == b.stdout && a.stderr == b.stderr, || format!("{args:?} differs between runs"))?;
        bytes += a.stdout.len();
    }
    Ok(format!("4 commands, {bytes} bytes identical"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence, first model", criterion_1),
        ("closed-form limits", criterion_2),
        ("reduction identity", criterion_3),
        ("oracle equivalence, second model", criterion_4),
        ("Juddian parabola point", criterion_5),
        ("closed-form J1 zero set", criterion_6),
        ("property suites", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
