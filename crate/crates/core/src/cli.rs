//! Command-line front end. Every subcommand writes one CSV table, to `--out`
//! or stdout, and reports problems on stderr.
//!
//! Exit codes: 0 success, 1 invalid configuration or I/O failure, 2 partial
//! failure (some rows could not be computed, or oracle pairs are missing).

use crate::fockoracle::{build_hamiltonian, eigenvalues, FockModel};
use crate::rabi_eps::{degenerate_candidates, spectrum_model1, wronskian_W, Model1Base};
use crate::rabi_nl::{judd_curves, spectrum_model2, wronskian_model2, JuddBranch, Model2Base, Model2Params};
use crate::spectral::sweep;
use crate::spectrum::{Diagnostic, SpectrumConfig, SpectrumPoint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Invalid(msg.into()))
}

/// A scalar, `lo:hi` window, or `start:end:step` grid as typed on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSpec {
    Value(f64),
    Window(f64, f64),
    Grid { start: f64, end: f64, step: f64 },
}

impl FromStr for ParamSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {p:?}")))
            .collect::<Result<_, _>>()?;
        if parts.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite value in {s:?}"));
        }
        match parts[..] {
            [v] => Ok(ParamSpec::Value(v)),
            [lo, hi] if lo < hi => Ok(ParamSpec::Window(lo, hi)),
            [start, end, step] if step > 0.0 && end >= start => Ok(ParamSpec::Grid { start, end, step }),
            _ => Err(format!("expected v, lo:hi with lo < hi, or start:end:step with step > 0; got {s:?}")),
        }
    }
}

impl ParamSpec {
    /// Grid points, endpoint included when it lies on the grid.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            ParamSpec::Value(v) => vec![v],
            ParamSpec::Window(lo, hi) => vec![lo, hi],
            ParamSpec::Grid { start, end, step } => {
                let n = ((end - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn is_sweep(&self) -> bool {
        matches!(self, ParamSpec::Grid { .. })
    }

    fn scalar(&self, name: &str) -> Result<f64, CliError> {
        match self {
            ParamSpec::Value(v) => Ok(*v),
            _ => invalid(format!("--{name} must be a single value here")),
        }
    }

    fn window(&self, name: &str) -> Result<(f64, f64), CliError> {
        match *self {
            ParamSpec::Window(lo, hi) => Ok((lo, hi)),
            _ => invalid(format!("--{name} must be a window lo:hi")),
        }
    }

    fn grid(&self, name: &str) -> Result<Vec<f64>, CliError> {
        match self {
            ParamSpec::Grid { .. } => Ok(self.values()),
            _ => invalid(format!("--{name} must be a grid start:end:step")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    RabiEps,
    RabiNl,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<ParamSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<ParamSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<ParamSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<ParamSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<ParamSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<ParamSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub bigu: Option<ParamSpec>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    /// Grid spacing of the root scan.
    #[arg(long, default_value_t = 0.005)]
    pub step: f64,
    /// Root refinement tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub refine_tol: f64,
}

#[derive(Debug, Parser)]
#[command(name = "rabispec", version, about = "Exact spectra of generalized quantum Rabi models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum over an x (rabi-eps) or E (rabi-nl) window, optionally swept over one parameter.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<ParamSpec>,
        #[arg(long, allow_hyphen_values = true)]
        e: Option<ParamSpec>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spectral function sampled on a grid.
    Wtrace {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<ParamSpec>,
        #[arg(long, allow_hyphen_values = true)]
        e: Option<ParamSpec>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Lowest k truncated-basis eigenvalues paired with method roots.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 120)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Largest distance at which an oracle level and a root are paired.
        #[arg(long, default_value_t = 1e-6)]
        match_tol: f64,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Zero set of the integer-x condition of rabi-nl in the (ω₀, g) plane.
    Judd {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, allow_hyphen_values = true)]
        bigu: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega0: ParamSpec,
        #[arg(long, allow_hyphen_values = true)]
        g: ParamSpec,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v == 0.0 {
        format!("{:.16e}", 0.0)
    } else {
        format!("{v:.16e}")
    }
}

/// Physical parameters with at most one swept.
struct Resolved {
    names: Vec<&'static str>,
    specs: Vec<ParamSpec>,
}

impl Resolved {
    fn from(model: &ModelArgs) -> Result<Self, CliError> {
        let all: [(&'static str, &Option<ParamSpec>); 7] = [
            ("lambda", &model.lambda),
            ("mu", &model.mu),
            ("eps", &model.eps),
            ("omega", &model.omega),
            ("omega0", &model.omega0),
            ("g", &model.g),
            ("bigu", &model.bigu),
        ];
        let (own, default_zero): (&[&str], &[&str]) = match model.model {
            ModelKind::RabiEps => (&["lambda", "mu", "eps"], &["eps"]),
            ModelKind::RabiNl => (&["omega", "omega0", "g", "bigu"], &[]),
        };
        let mut names = Vec::new();
        let mut specs = Vec::new();
        for (name, spec) in all {
            match (own.contains(&name), spec) {
                (false, Some(_)) => return invalid(format!("--{name} does not apply to this model")),
                (false, None) => {}
                (true, Some(s)) => {
                    if let ParamSpec::Window(..) = s {
                        return invalid(format!("--{name} takes a value or a start:end:step grid"));
                    }
                    names.push(name);
                    specs.push(*s);
                }
                (true, None) if default_zero.contains(&name) => {
                    names.push(name);
                    specs.push(ParamSpec::Value(0.0));
                }
                (true, None) => return invalid(format!("--{name} is required for this model")),
            }
        }
        if specs.iter().filter(|s| s.is_sweep()).count() > 1 {
            return invalid("at most one parameter may be a start:end:step grid");
        }
        let resolved = Resolved { names, specs };
        resolved.validate(model.model)?;
        Ok(resolved)
    }

    /// Rejects parameter sets outside the supported domain at any grid value.
    fn validate(&self, kind: ModelKind) -> Result<(), CliError> {
        if kind == ModelKind::RabiNl {
            for v in self.specs[self.sweep_index()].values() {
                let p = self.at(v);
                if !(4.0 * p[0] * p[0] > p[3] * p[3]) {
                    return invalid(format!("rabi-nl requires 4 omega^2 > bigu^2 (omega = {}, bigu = {})", p[0], p[3]));
                }
            }
        }
        Ok(())
    }

    /// The swept parameter, or the first one as a single-point sweep.
    fn sweep_index(&self) -> usize {
        self.specs.iter().position(|s| s.is_sweep()).unwrap_or(0)
    }

    /// Parameter values with the swept slot replaced by `v`.
    fn at(&self, v: f64) -> Vec<f64> {
        let k = self.sweep_index();
        self.specs
            .iter()
            .enumerate()
            .map(|(i, s)| if i == k { v } else { s.values()[0] })
            .collect()
    }

    fn scalars(&self) -> Result<Vec<f64>, CliError> {
        self.specs.iter().zip(&self.names).map(|(s, n)| s.scalar(n)).collect()
    }
}

fn check_scan(scan: &ScanArgs) -> Result<(), CliError> {
    if !(scan.step > 0.0 && scan.step.is_finite() && scan.refine_tol > 0.0 && scan.refine_tol.is_finite()) {
        return invalid("--step and --refine-tol must be positive");
    }
    Ok(())
}

fn spectrum_config(window: (f64, f64), scan: &ScanArgs) -> SpectrumConfig {
    SpectrumConfig { step: scan.step, refine_tol: scan.refine_tol, ..SpectrumConfig::new(window.0, window.1) }
}

/// Spectrum of the selected model at concrete parameter values.
fn spectrum_at(
    kind: ModelKind,
    v: &[f64],
    window: (f64, f64),
    scan: &ScanArgs,
) -> Result<(Vec<SpectrumPoint>, Vec<Diagnostic>), String> {
    let cfg = spectrum_config(window, scan);
    let set = match kind {
        ModelKind::RabiEps => spectrum_model1(&Model1Base::new(v[0], v[1], v[2]), &cfg).map_err(|e| e.to_string())?,
        ModelKind::RabiNl => {
            spectrum_model2(&Model2Base::new(v[0], v[1], v[2], v[3]), &cfg).map_err(|e| e.to_string())?
        }
    };
    Ok((set.points, set.diagnostics))
}

fn window_arg(kind: ModelKind, x: Option<ParamSpec>, e: Option<ParamSpec>) -> Result<(&'static str, ParamSpec), CliError> {
    match (kind, x, e) {
        (ModelKind::RabiEps, Some(x), None) => Ok(("x", x)),
        (ModelKind::RabiNl, None, Some(e)) => Ok(("e", e)),
        (ModelKind::RabiEps, _, _) => invalid("rabi-eps takes --x (and not --e)"),
        (ModelKind::RabiNl, _, _) => invalid("rabi-nl takes --e (and not --x)"),
    }
}

struct Output {
    csv: String,
    partial: bool,
}

fn cmd_spectrum(
    model: &ModelArgs,
    x: Option<ParamSpec>,
    e: Option<ParamSpec>,
    scan: &ScanArgs,
    err: &mut dyn Write,
) -> Result<Output, CliError> {
    check_scan(scan)?;
    let params = Resolved::from(model)?;
    let (wname, wspec) = window_arg(model.model, x, e)?;
    let window = wspec.window(wname)?;
    let k = params.sweep_index();
    let grid = params.specs[k].values();
    let table = sweep(&grid, |v| {
        let (points, diags) = spectrum_at(model.model, &params.at(v), window, scan)?;
        Ok(vec![(points, diags)])
    });

    let mut csv = String::from("sweep_param,sweep_value,x,E,kind,multiplicity,parity\n");
    let mut partial = false;
    for (v, (points, diags)) in &table.rows {
        for p in points {
            let parity = p.parity.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                params.names[k],
                fmt_num(*v),
                fmt_num(p.x_value),
                fmt_num(p.energy),
                p.kind.as_str(),
                p.multiplicity,
                parity
            );
        }
        for d in diags {
            writeln!(err, "{}={}: {d}", params.names[k], fmt_num(*v))?;
            partial |= matches!(d, Diagnostic::EvaluationFailed { .. });
        }
    }
    for (v, msg) in &table.failures {
        writeln!(err, "{}={}: {msg}", params.names[k], fmt_num(*v))?;
        partial = true;
    }
    Ok(Output { csv, partial })
}

fn cmd_wtrace(
    model: &ModelArgs,
    x: Option<ParamSpec>,
    e: Option<ParamSpec>,
    scan: &ScanArgs,
) -> Result<Output, CliError> {
    check_scan(scan)?;
    let v = Resolved::from(model)?.scalars()?;
    let (wname, wspec) = window_arg(model.model, x, e)?;
    let grid = wspec.grid(wname)?;
    let (lo, hi) = (grid[0], *grid.last().expect("nonempty grid"));
    let half = spectrum_config((lo, hi), scan).exclusion_half_width();
    type Trace = Box<dyn Fn(f64) -> f64 + Sync>;
    let (header, centers, f): (&str, Vec<f64>, Trace) = match model.model {
        ModelKind::RabiEps => {
            let base = Model1Base::new(v[0].abs(), v[1].abs(), v[2].abs());
            (
                "x,W",
                degenerate_candidates(base.eps, lo - half, hi + half),
                Box::new(move |x| wronskian_W(&base.at(x)).unwrap_or(f64::NAN)),
            )
        }
        ModelKind::RabiNl => {
            let base = Model2Base::new(v[0], v[1], v[2].abs(), v[3]);
            let (x_lo, x_hi) = (base.at(lo - half).x(), base.at(hi + half).x());
            let centers = ((x_lo.ceil().max(1.0) as i64)..=(x_hi.floor() as i64).max(0))
                .map(|m| Model2Params::energy_for_x(m as f64, base.omega, base.omega0, base.g, base.u))
                .collect();
            ("E,W", centers, Box::new(move |e| wronskian_model2(&base.at(e)).unwrap_or(f64::NAN)))
        }
    };
    let table = sweep(&grid, |p| {
        let excluded = centers.iter().any(|c| (p - c).abs() <= half);
        Ok(vec![if excluded { f64::NAN } else { f(p) }])
    });
    let mut csv = format!("{header}\n");
    for (p, w) in &table.rows {
        let _ = writeln!(csv, "{},{}", fmt_num(*p), fmt_num(*w));
    }
    Ok(Output { csv, partial: false })
}

/// Greedy nearest pairing within `tol`; returns index pairs into `a` and `b`.
fn pair_nearest(a: &[f64], b: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let d = (x - y).abs();
            if d <= tol {
                cand.push((d, i, j));
            }
        }
    }
    cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out.sort();
    out
}

fn cmd_oracle(
    model: &ModelArgs,
    n: usize,
    k: usize,
    match_tol: f64,
    scan: &ScanArgs,
    err: &mut dyn Write,
) -> Result<Output, CliError> {
    check_scan(scan)?;
    if !(match_tol > 0.0) || k == 0 {
        return invalid("--match-tol must be positive and --k at least 1");
    }
    let v = Resolved::from(model)?.scalars()?;
    let fock = match model.model {
        ModelKind::RabiEps => FockModel::RabiEps { lambda: v[0], mu: v[1], eps: v[2] },
        ModelKind::RabiNl => FockModel::NonlinearU { omega: v[0], omega0: v[1], g: v[2], u: v[3] },
    };
    let op = build_hamiltonian(fock, n).map_err(|e| CliError::Invalid(e.to_string()))?;
    if k > op.dim {
        return invalid(format!("--k {k} exceeds the basis dimension {}", op.dim));
    }
    // levels past k only absorb method roots degenerate with the k-th level
    let mut oracle = match eigenvalues(&op, (k + 4).min(op.dim)) {
        Ok(ev) => ev,
        Err(e) => return invalid(e.to_string()),
    };
    let beyond = oracle.split_off(k);
    let (e_lo, e_hi) = (oracle[0], oracle[k - 1]);
    // x = E + λ² for rabi-eps, x-free window for rabi-nl
    let shift = if model.model == ModelKind::RabiEps { v[0] * v[0] } else { 0.0 };
    let window = (e_lo + shift - 0.5, e_hi + shift + 0.5);
    let mut partial = false;
    let method: Vec<f64> = match spectrum_at(model.model, &v, window, scan) {
        Ok((points, diags)) => {
            for d in &diags {
                writeln!(err, "{d}")?;
                partial |= matches!(d, Diagnostic::EvaluationFailed { .. });
            }
            points
                .iter()
                .flat_map(|p| std::iter::repeat_n(p.energy, p.multiplicity as usize))
                .filter(|e| *e >= e_lo - match_tol && *e <= e_hi + match_tol)
                .collect()
        }
        Err(msg) => {
            writeln!(err, "method failed: {msg}")?;
            partial = true;
            Vec::new()
        }
    };
    let pairs = pair_nearest(&oracle, &method, match_tol);
    let mut csv = String::from("index,E_oracle,E_method,abs_diff\n");
    let mut matched_method = vec![false; method.len()];
    for (i, e) in oracle.iter().enumerate() {
        match pairs.iter().find(|(a, _)| *a == i) {
            Some(&(_, j)) => {
                matched_method[j] = true;
                let _ = writeln!(csv, "{i},{},{},{}", fmt_num(*e), fmt_num(method[j]), fmt_num((e - method[j]).abs()));
            }
            None => {
                let _ = writeln!(csv, "{i},{},,", fmt_num(*e));
                writeln!(err, "oracle level {i} at {} has no method root", fmt_num(*e))?;
                partial = true;
            }
        }
    }
    let free: Vec<usize> = (0..method.len()).filter(|&j| !matched_method[j]).collect();
    let free_values: Vec<f64> = free.iter().map(|&j| method[j]).collect();
    for (_, f) in pair_nearest(&beyond, &free_values, match_tol) {
        matched_method[free[f]] = true;
    }
    for (j, e) in method.iter().enumerate().filter(|(j, _)| !matched_method[*j]) {
        let _ = writeln!(csv, ",,{},", fmt_num(*e));
        writeln!(err, "method root {j} at {} has no oracle level", fmt_num(*e))?;
        partial = true;
    }
    Ok(Output { csv, partial })
}

fn cmd_judd(m: u32, omega: f64, bigu: f64, omega0: ParamSpec, g: ParamSpec) -> Result<Output, CliError> {
    if m == 0 {
        return invalid("--m must be at least 1");
    }
    let w_grid = omega0.values();
    let g_grid = g.values();
    if matches!(omega0, ParamSpec::Window(..)) || matches!(g, ParamSpec::Window(..)) {
        return invalid("--omega0 and --g take a value or a start:end:step grid");
    }
    let mut pts = judd_curves(m, omega, bigu, &w_grid, &g_grid).map_err(|e| CliError::Invalid(e.to_string()))?;
    let rank = |b: JuddBranch| b as u8;
    pts.sort_by(|a, b| {
        rank(a.branch).cmp(&rank(b.branch)).then(a.g.total_cmp(&b.g)).then(a.omega0.total_cmp(&b.omega0))
    });
    let mut csv = String::from("m,omega0,g,branch\n");
    for p in &pts {
        let _ = writeln!(csv, "{},{},{},{}", p.m, fmt_num(p.omega0), fmt_num(p.g), p.branch.as_str());
    }
    Ok(Output { csv, partial: false })
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool, CliError> {
    let (output, out_path) = match cli.command {
        Command::Spectrum { model, x, e, scan, out } => (cmd_spectrum(&model, x, e, &scan, stderr)?, out.out),
        Command::Wtrace { model, x, e, scan, out } => (cmd_wtrace(&model, x, e, &scan)?, out.out),
        Command::Oracle { model, n, k, match_tol, scan, out } => {
            (cmd_oracle(&model, n, k, match_tol, &scan, stderr)?, out.out)
        }
        Command::Judd { m, omega, bigu, omega0, g, out } => (cmd_judd(m, omega, bigu, omega0, g)?, out.out),
    };
    match out_path {
        Some(path) => std::fs::write(path, output.csv.as_bytes())?,
        None => stdout.write_all(output.csv.as_bytes())?,
    }
    Ok(output.partial)
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(false) => 0,
        Ok(true) => 2,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
