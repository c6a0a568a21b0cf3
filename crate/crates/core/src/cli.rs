//! Command-line front end: `forward`, `reconstruct`, `characterize`, `check`.
//!
//! Exit codes: 0 on success (reports may still contain failing checks), 2 for usage
//! errors, 3 when reconstruction is infeasible, 4 when a check's preconditions fail.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundary::{count_components, BoundaryDataset};
use crate::branches::{f1_scale, sample_surface};
use crate::error::Error;
use crate::forms::{period_integral, recover_with_kernel};
use crate::io::{cloud_csv, cloud_rows, read_dataset, read_series, to_canonical_json, DatasetFile};
use crate::moments::{affine_moment_check, orientation_test, primitive_precheck, BivariatePolynomial, Kernel};
use crate::oracle::{
    green_moment_check, jump_check, make_scenario, planar_placement, scenario_by_name, ScenarioOracle,
};
use crate::series::BivariateSeries;
use crate::shockwave::{characterize, choose_base, g_series, CharacterizeOptions, DEFAULT_ORDER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

/// Green residuals count as passing below this fraction of the data scale.
pub const GREEN_TOLERANCE: f64 = 1e-8;
pub const JUMP_U_TOLERANCE: f64 = 1e-3;
pub const JUMP_THETA_TOLERANCE: f64 = 1e-2;
pub const FLUX_TOLERANCE: f64 = 1e-8;
pub const PERIOD_TOLERANCE: f64 = 1e-3;

#[derive(Parser, Debug)]
#[command(name = "riemann-dn", version, about = "Recover a Riemann surface from boundary Dirichlet-to-Neumann data")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true, env = "RIEMANN_DN_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic dataset and its ground truth.
    Forward {
        /// Scenario name, optionally with a parameter (`annulus:0.4`).
        spec: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Dataset path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ground-truth path; defaults to `<out>.truth.json`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Sample the surface over a grid of `z₂` values.
    Reconstruct {
        dataset: PathBuf,
        #[arg(long, default_value_t = 4)]
        pmax: usize,
        /// `re_min,re_max,im_min,im_max,nx,ny`; defaults to a box around `f₂(γ)`.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Point-cloud path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report path; defaults to `<out>.report.json`, or stderr.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CloudFormat::Csv)]
        format: CloudFormat,
        /// Form indices to recover, e.g. `0,1,2`.
        #[arg(long, value_delimiter = ',')]
        forms: Vec<usize>,
    },
    /// Decide whether `G` is the trace of a multivaluate shock wave up to an affine term.
    Characterize {
        /// Dataset, or a series file with `--series`.
        input: PathBuf,
        #[arg(long)]
        series: bool,
        #[arg(long)]
        pmax: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
        /// Base point `ξ₀_re,ξ₀_im[,ξ₁_re,ξ₁_im]`.
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// Polynomial for the orientation test, terms `i:j:re:im` separated by commas.
        #[arg(long, allow_hyphen_values = true)]
        orientation: Vec<String>,
        /// Run the moment condition up to this total degree.
        #[arg(long)]
        moments: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Green, jump, flux, period and component checks on a dataset.
    Check {
        dataset: PathBuf,
        /// Scenario providing the planar geometry and DN map.
        #[arg(long)]
        scenario: Option<String>,
        /// Number of exterior points for the Green check.
        #[arg(long, default_value_t = 8)]
        points: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "green,jump,flux")]
        checks: Vec<CheckKind>,
        /// Closed loop `re,im,radius[,turns]` in the `z₂`-plane for the period check.
        #[arg(long = "loop", allow_hyphen_values = true)]
        loops: Vec<String>,
        #[arg(long, default_value_t = 4)]
        pmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CloudFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Green,
    Jump,
    Flux,
    Period,
    Components,
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self { code, kind, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, "usage", message)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ThetaDivision { .. } => "theta-division",
        Error::NotAnEmbedding { .. } => "not-an-embedding",
        Error::EstimateFailed { .. } => "estimate-failed",
        Error::InvalidGrid(_) => "invalid-grid",
        Error::Placement(_) => "placement",
        Error::NotImplemented(_) => "not-implemented",
        Error::UnknownScenario(_) => "unknown-scenario",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        _ => "error",
    }
}

fn from_error(code: i32, e: Error) -> Failure {
    Failure::new(code, error_kind(&e), e.to_string())
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        // a second call in one process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let result = match cli.command {
        Command::Forward { spec, n, out, truth } => forward(&spec, n, out.as_deref(), truth.as_deref()),
        Command::Reconstruct { dataset, pmax, grid, out, report, format, forms } => {
            reconstruct(&dataset, pmax, grid.as_deref(), out.as_deref(), report.as_deref(), format, &forms)
        }
        Command::Characterize { input, series, pmax, order, base, orientation, moments, out } => characterize_cmd(
            &input,
            series,
            pmax,
            order,
            base.as_deref(),
            &orientation,
            moments,
            out.as_deref(),
            cli.seed,
        ),
        Command::Check { dataset, scenario, points, checks, loops, pmax, out } => {
            check(&dataset, scenario.as_deref(), points, &checks, &loops, pmax, out.as_deref())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let diag = json!({ "error": f.kind, "exit_code": f.code, "message": f.message });
            let _ = writeln!(std::io::stderr(), "{diag}");
            f.code
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Outcome {
    let text = to_canonical_json(value).map_err(|e| from_error(EXIT_USAGE, e))?;
    emit(path, &text)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn forward(spec: &str, n: usize, out: Option<&Path>, truth: Option<&Path>) -> Outcome {
    let (_, ds, gt) = make_scenario(spec, n).map_err(|e| from_error(EXIT_USAGE, e))?;
    let mut meta = BTreeMap::new();
    meta.insert("n".to_string(), json!(n));
    meta.insert("scenario".to_string(), json!(spec));
    emit_json(out, &DatasetFile::from_dataset(&ds, meta))?;
    let truth_path = truth.map(Path::to_path_buf).or_else(|| out.map(|o| with_suffix(o, ".truth.json")));
    if let Some(p) = truth_path {
        let index_at_origin = gt.index(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let doc = json!({
            "components": gt.components,
            "infinity_z1": gt.infinity_z1,
            "l": gt.l_value(),
            "name": gt.name,
            "q": gt.q,
            "index_at_origin": index_at_origin,
            "infinity_polys": (1..=4).map(|m| gt.infinity_poly(m)).collect::<Vec<_>>(),
        });
        emit_json(Some(&p), &doc)?;
    }
    Ok(())
}

fn parse_floats(s: &str, what: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::usage(format!("{what}: cannot parse '{t}'"))))
        .collect()
}

fn default_grid(ds: &BoundaryDataset) -> Vec<Complex64> {
    let f2: Vec<Complex64> = ds.f2().iter().flat_map(|s| s.values().iter().copied()).collect();
    let (mut lo, mut hi) = (f2[0], f2[0]);
    for z in &f2 {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let pad = 0.25 * (hi - lo).norm().max(1e-3);
    rect_grid(lo.re - pad, hi.re + pad, lo.im - pad, hi.im + pad, 12, 12)
}

fn rect_grid(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Vec<Complex64> {
    let at = |a: f64, b: f64, k: usize, n: usize| {
        if n <= 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Complex64::new(at(x0, x1, i, nx), at(y0, y1, j, ny)));
        }
    }
    out
}

#[derive(Serialize)]
struct FiberReport {
    infinity_polys: Vec<Vec<Complex64>>,
    p: usize,
    points: Vec<Complex64>,
    q: usize,
    root_residual: f64,
    separation_residual: f64,
    xi: Complex64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    forms: BTreeMap<String, Value>,
}

fn reconstruct(
    path: &Path,
    pmax: usize,
    grid: Option<&str>,
    out: Option<&Path>,
    report: Option<&Path>,
    format: CloudFormat,
    forms: &[usize],
) -> Outcome {
    if let Some(&ell) = forms.iter().find(|&&l| l > 2) {
        return Err(Failure::usage(format!("form index {ell} outside 0..=2")));
    }
    let (file, ds) = match read_dataset(path) {
        Ok(v) => v,
        Err(e @ (Error::Io(_) | Error::Json(_))) => return Err(from_error(EXIT_USAGE, e)),
        Err(e) => return Err(from_error(EXIT_INFEASIBLE, e)),
    };
    let nodes = match grid {
        Some(g) => {
            let v = parse_floats(g, "grid")?;
            if v.len() != 6 || v[4] < 1.0 || v[5] < 1.0 {
                return Err(Failure::usage("grid needs re_min,re_max,im_min,im_max,nx,ny"));
            }
            rect_grid(v[0], v[1], v[2], v[3], v[4] as usize, v[5] as usize)
        }
        None => default_grid(&ds),
    };
    let cloud = sample_surface(&ds, &nodes, pmax);
    if cloud.fibers.is_empty() && cloud.skipped.iter().any(|s| s.reason.contains("fiber size")) {
        return Err(Failure::new(
            EXIT_INFEASIBLE,
            "estimate-failed",
            format!("no grid node admits a fiber size ≤ {pmax}"),
        ));
    }
    let kernel = Kernel::new(&ds);
    let s1 = f1_scale(&ds);
    let mut form_columns: Vec<(usize, Vec<Complex64>)> = forms.iter().map(|&l| (l, Vec::new())).collect();
    let mut fibers = Vec::new();
    let mut form_residual: f64 = 0.0;
    for set in &cloud.fibers {
        let mut entry = BTreeMap::new();
        for (ell, column) in form_columns.iter_mut() {
            match recover_with_kernel(&kernel, s1, *ell, set) {
                Ok(ff) => {
                    form_residual = form_residual.max(ff.residual);
                    // align with the relabeled points of the cloud
                    for z in &set.points {
                        let j = (0..set.p)
                            .min_by(|&a, &b| {
                                (set.node_points[0][a] - z).norm().total_cmp(&(set.node_points[0][b] - z).norm())
                            })
                            .unwrap();
                        column.push(ff.values[j]);
                    }
                    entry.insert(
                        format!("form{ell}"),
                        json!({ "q_polys": ff.q_polys, "residual": ff.residual, "values": ff.values }),
                    );
                }
                Err(e) => {
                    column.extend(std::iter::repeat_n(Complex64::new(f64::NAN, f64::NAN), set.p));
                    entry.insert(format!("form{ell}"), json!({ "error": e.to_string() }));
                }
            }
        }
        fibers.push(FiberReport {
            infinity_polys: set.infinity_polys.clone(),
            p: set.p,
            points: set.points.clone(),
            q: set.q,
            root_residual: set.condition.root_residual,
            separation_residual: set.condition.separation_residual,
            xi: set.xi,
            forms: entry,
        });
    }
    let cloud_text = match format {
        CloudFormat::Csv => cloud_csv(&cloud, &form_columns).map_err(|e| from_error(EXIT_USAGE, e))?,
        CloudFormat::Json => {
            to_canonical_json(&cloud_rows(&cloud, &form_columns)).map_err(|e| from_error(EXIT_USAGE, e))?
        }
    };
    emit(out, &cloud_text)?;

    let p = cloud.fibers.iter().map(|f| f.p).max().unwrap_or(0);
    let q = cloud.fibers.iter().map(|f| f.q).max().unwrap_or(0);
    let mut p_counts: BTreeMap<String, usize> = BTreeMap::new();
    for f in &cloud.fibers {
        *p_counts.entry(f.p.to_string()).or_default() += 1;
    }
    let max_residual =
        cloud.fibers.iter().map(|f| f.condition.root_residual.max(f.condition.separation_residual)).fold(0.0, f64::max);
    let oracle_error =
        file.meta.get("scenario").and_then(Value::as_str).and_then(|name| make_scenario(name, 16).ok()).map(
            |(_, _, gt)| {
                cloud
                    .fibers
                    .iter()
                    .flat_map(|f| {
                        let truth = gt.fiber(f.xi);
                        f.points
                            .iter()
                            .map(|z| truth.iter().map(|t| (t - z).norm()).fold(f64::INFINITY, f64::min))
                            .collect::<Vec<_>>()
                    })
                    .fold(0.0, f64::max)
            },
        );
    let doc = json!({
        "fibers": fibers,
        "grid_size": nodes.len(),
        "max_residual": max_residual,
        "form_residual": form_residual,
        "oracle_error": oracle_error,
        "p": p,
        "p_counts": p_counts,
        "q": q,
        "skipped": cloud.skipped,
    });
    let report_path = report.map(Path::to_path_buf).or_else(|| out.map(|o| with_suffix(o, ".report.json")));
    match report_path {
        Some(rp) => emit_json(Some(&rp), &doc),
        None => {
            let text = to_canonical_json(&doc).map_err(|e| from_error(EXIT_USAGE, e))?;
            eprint!("{text}");
            Ok(())
        }
    }
}

fn parse_polynomial(spec: &str) -> std::result::Result<BivariatePolynomial, Failure> {
    let mut terms = Vec::new();
    for t in spec.split(',') {
        let parts: Vec<&str> = t.split(':').collect();
        let bad = || Failure::usage(format!("polynomial term '{t}' is not i:j:re:im"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let i = parts[0].trim().parse::<u32>().map_err(|_| bad())?;
        let j = parts[1].trim().parse::<u32>().map_err(|_| bad())?;
        let re = parts[2].trim().parse::<f64>().map_err(|_| bad())?;
        let im = parts[3].trim().parse::<f64>().map_err(|_| bad())?;
        terms.push((i, j, Complex64::new(re, im)));
    }
    Ok(BivariatePolynomial::new(terms))
}

#[allow(clippy::too_many_arguments)]
fn characterize_cmd(
    input: &Path,
    series: bool,
    pmax: Option<usize>,
    order: usize,
    base: Option<&str>,
    orientation: &[String],
    moments: Option<usize>,
    out: Option<&Path>,
    seed: u64,
) -> Outcome {
    let pmax = pmax.unwrap_or_else(|| (order.saturating_sub(2) / 2).clamp(1, 4));
    if order < 2 * pmax + 2 {
        return Err(Failure::usage(format!("order {order} below 2·pmax + 2 = {}", 2 * pmax + 2)));
    }
    let mut doc = BTreeMap::new();
    let mut dataset = None;
    let g: BivariateSeries = if series {
        let s = read_series(input).map_err(|e| from_error(EXIT_USAGE, e))?;
        if s.order() < order {
            return Err(Failure::usage(format!("series file has order {} < {order}", s.order())));
        }
        doc.insert("source", json!("series"));
        s.truncate(order).reorder(order)
    } else {
        let (_, ds) = match read_dataset(input) {
            Ok(v) => v,
            Err(e @ (Error::Io(_) | Error::Json(_))) => return Err(from_error(EXIT_USAGE, e)),
            Err(e) => return Err(from_error(EXIT_INFEASIBLE, e)),
        };
        let (b, radius) = match base {
            Some(text) => {
                let v = parse_floats(text, "base")?;
                let b = match v.len() {
                    2 => (Complex64::new(v[0], v[1]), Complex64::new(0.0, 0.0)),
                    4 => (Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])),
                    _ => return Err(Failure::usage("base needs 2 or 4 numbers")),
                };
                let kernel = Kernel::new(&ds);
                let f1max = ds.f1().iter().map(|s| s.sup()).fold(0.0, f64::max);
                (b, 0.5 * kernel.line_distance(b.0, b.1) / (1.0 + f1max))
            }
            None => choose_base(&ds).map_err(|e| from_error(EXIT_INFEASIBLE, e))?,
        };
        let m = (2 * order + 2).next_power_of_two().max(64);
        let g = g_series(&ds, b, radius, order, m).map_err(|e| from_error(EXIT_INFEASIBLE, e))?;
        doc.insert("source", json!("dataset"));
        doc.insert("base", json!([b.0, b.1]));
        doc.insert("radius", json!(radius));
        dataset = Some(ds);
        g
    };
    doc.insert("order", json!(order));
    doc.insert("pmax", json!(pmax));
    doc.insert("g", serde_json::to_value(&g).map_err(|e| from_error(EXIT_USAGE, e.into()))?);
    let opts = CharacterizeOptions { seed, ..CharacterizeOptions::default() };
    match characterize(&g, pmax, opts) {
        Ok(v) => {
            doc.insert("verdict", json!(if v.p.is_some() { "shock-trace" } else { "negative" }));
            doc.insert("p", json!(v.p));
            doc.insert("a", json!(v.a.coeffs));
            doc.insert("b", json!(v.b.coeffs));
            doc.insert("lambdas", json!(v.lambdas.iter().map(|l| l.coeffs.clone()).collect::<Vec<_>>()));
            doc.insert("residual", json!(v.residual));
            doc.insert("reproduction", json!(v.reproduction));
            doc.insert("attempts", json!(v.attempts));
            doc.insert("non_unique", json!(v.attempts.last().is_some_and(|a| v.p.is_some() && a.nullity > 0)));
        }
        Err(Error::AffineInput) => {
            doc.insert("verdict", json!("affine-in-xi0"));
            doc.insert("p", Value::Null);
            if let Some(ds) = &dataset {
                let h: Vec<Vec<_>> =
                    vec![ds.f1().into_iter().cloned().collect(), ds.f2().into_iter().cloned().collect()];
                let r = affine_moment_check(&ds.curve, &h, moments.unwrap_or(6))
                    .map_err(|e| from_error(EXIT_INFEASIBLE, e))?;
                doc.insert(
                    "moment_condition",
                    json!({ "count": r.count, "max_modulus": r.max_modulus, "worst": r.worst }),
                );
            }
        }
        Err(e) => return Err(from_error(EXIT_USAGE, e)),
    }
    if let Some(ds) = &dataset {
        if let (Some(deg), false) = (moments, doc.contains_key("moment_condition")) {
            let h: Vec<Vec<_>> = vec![ds.f1().into_iter().cloned().collect(), ds.f2().into_iter().cloned().collect()];
            let r = affine_moment_check(&ds.curve, &h, deg).map_err(|e| from_error(EXIT_INFEASIBLE, e))?;
            doc.insert("moment_condition", json!({ "count": r.count, "max_modulus": r.max_modulus, "worst": r.worst }));
        }
        let mut tests = Vec::new();
        for spec in orientation {
            let poly = parse_polynomial(spec)?;
            let w = orientation_test(ds, &poly).map_err(|e| from_error(EXIT_INFEASIBLE, e))?;
            tests.push(json!({ "polynomial": spec, "winding": w.index, "raw": w.raw }));
        }
        if !tests.is_empty() {
            doc.insert("orientation", json!(tests));
        }
    } else if !orientation.is_empty() || moments.is_some() {
        return Err(Failure::usage("orientation and moment tests need a dataset"));
    }
    emit_json(out, &doc)
}

fn exterior_points(s: &crate::oracle::Scenario, count: usize) -> Vec<Complex64> {
    let b = s.boundary(256);
    let all: Vec<Complex64> = b.iter().flat_map(|(z, _, _)| z.iter().copied()).collect();
    let center = all.iter().sum::<Complex64>() / all.len() as f64;
    let reach = all.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    let mut radius = 1.25 * reach;
    while out.len() < count && radius < 64.0 * reach {
        for k in 0..count {
            let z =
                center + Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64);
            let (inside, dist) = planar_placement(s, z);
            if !inside && dist > 0.1 * reach && out.len() < count {
                out.push(z);
            }
        }
        radius *= 1.5;
    }
    out
}

fn check(
    path: &Path,
    scenario: Option<&str>,
    points: usize,
    checks: &[CheckKind],
    loops: &[String],
    pmax: usize,
    out: Option<&Path>,
) -> Outcome {
    let (_, ds) = match read_dataset(path) {
        Ok(v) => v,
        Err(e @ (Error::Io(_) | Error::Json(_))) => return Err(from_error(EXIT_USAGE, e)),
        Err(e) => return Err(from_error(EXIT_INFEASIBLE, e)),
    };
    let needs_scenario = checks.iter().any(|c| matches!(c, CheckKind::Green | CheckKind::Jump | CheckKind::Components));
    let scen = match (scenario, needs_scenario) {
        (Some(name), _) => {
            let n = ds.curve.components[0].n;
            Some(scenario_by_name(name, n).map_err(|e| from_error(EXIT_PRECONDITION, e))?)
        }
        (None, true) => {
            return Err(Failure::new(
                EXIT_PRECONDITION,
                "missing-scenario",
                "green, jump and components checks need --scenario",
            ));
        }
        (None, false) => None,
    };
    let data_scale = ds
        .components
        .iter()
        .flat_map(|c| {
            c.theta.iter().map(|t| t.sup()).chain(c.u.iter().map(|u| u.iter().fold(0.0, |m: f64, x| m.max(x.abs()))))
        })
        .fold(1.0, f64::max);
    let mut report = BTreeMap::new();
    let mut all_pass = true;
    for kind in checks {
        let (pass, detail) = match kind {
            CheckKind::Green => {
                let s = scen.as_ref().unwrap();
                let zs = exterior_points(s, points);
                let mut worst: f64 = 0.0;
                let mut rows = Vec::new();
                for z in zs {
                    let r = green_moment_check(s, &ds, z).map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                    let m = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    worst = worst.max(m);
                    rows.push(json!({ "point": z, "residuals": r }));
                }
                let pass = worst <= GREEN_TOLERANCE * data_scale;
                (pass, json!({ "max_residual": worst, "points": rows, "tolerance": GREEN_TOLERANCE * data_scale }))
            }
            CheckKind::Jump => {
                let s = scen.as_ref().unwrap();
                let r = jump_check(s, &ds, 0, 0, 1e-2).map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                let pass = r.error_u.iter().all(|&e| e < JUMP_U_TOLERANCE * data_scale)
                    && r.error_theta.iter().all(|&e| e < JUMP_THETA_TOLERANCE * data_scale)
                    && r.max_imag < 1e-8 * data_scale;
                (pass, serde_json::to_value(&r).map_err(|e| from_error(EXIT_USAGE, e.into()))?)
            }
            CheckKind::Flux => {
                let f = primitive_precheck(&ds).map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                let pass = f.iter().all(|v| v.abs() <= FLUX_TOLERANCE * data_scale);
                (pass, json!({ "flux": f }))
            }
            CheckKind::Components => {
                let s = scen.clone().unwrap();
                let oracle = ScenarioOracle::new(s).map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                let c = count_components(&oracle).map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                (true, json!({ "count": c.count, "groups": c.groups }))
            }
            CheckKind::Period => {
                let mut rows = Vec::new();
                let mut pass = true;
                for spec in loops {
                    let v = parse_floats(spec, "loop")?;
                    if !(3..=4).contains(&v.len()) {
                        return Err(Failure::usage("loop needs re,im,radius[,turns]"));
                    }
                    let turns = v.get(3).copied().unwrap_or(1.0).max(1.0) as usize;
                    let steps = 512 * turns;
                    let center = Complex64::new(v[0], v[1]);
                    let path: Vec<Complex64> = (0..=steps)
                        .map(|k| center + Complex64::from_polar(v[2], 2.0 * std::f64::consts::PI * k as f64 / 512.0))
                        .collect();
                    let kernel = Kernel::new(&ds);
                    let (set, _) = crate::branches::fiber_auto(&kernel, f1_scale(&ds), path[0], pmax)
                        .map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                    for ell in 0..3 {
                        for branch in 0..set.p {
                            let val = period_integral(&ds, ell, &path, set.p, branch)
                                .map_err(|e| from_error(EXIT_PRECONDITION, e))?;
                            let ok = val.re.abs() < PERIOD_TOLERANCE * data_scale;
                            pass &= ok;
                            rows.push(json!({ "branch": branch, "ell": ell, "loop": spec, "period": val, "pass": ok }));
                        }
                    }
                }
                (pass, json!({ "loops": rows }))
            }
        };
        all_pass &= pass;
        let name = serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        report.insert(name, json!({ "detail": detail, "status": if pass { "pass" } else { "fail" } }));
    }
    let doc = json!({ "checks": report, "status": if all_pass { "pass" } else { "fail" } });
    emit_json(out, &doc)
}
