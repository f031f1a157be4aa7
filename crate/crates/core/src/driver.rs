//! Adaptive loop: solve, estimate, mark, refine. Records a convergence history
//! and writes it as CSV or as an SVG log-log plot.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::awfem::{solve, AwError, Solution};
use crate::benchmarks::{stress_error, Benchmark, BenchmarkName};
use crate::estimator::{estimate, EpsField, EstimatorBreakdown};
use crate::material::{LameParameters, MaterialError, SymMat2};
use crate::mesh::{write_mesh, MeshError, Triangulation};
use crate::poly::LocalFrame;
use crate::quadrature::{integrate_triangle, QuadratureError, TRIANGLE_DEGREE};

pub const DEFAULT_THETA: f64 = 0.3;
/// Maximal number of records in the least-squares rate window.
pub const RATE_WINDOW: usize = 4;

pub const CSV_HEADER: &str =
    "level,ndof,h_max,err_sigma_l2,eta,eta_vol,eta_edge_int,eta_edge_dir,osc_f,osc_g,osc_ud,eff_index";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Adaptive,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Mode::Uniform),
            "adaptive" => Ok(Mode::Adaptive),
            _ => Err(format!("unknown mode `{s}` (expected uniform | adaptive)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Uniform => "uniform",
            Mode::Adaptive => "adaptive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub benchmark: BenchmarkName,
    pub nu: f64,
    pub young: f64,
    pub mode: Mode,
    pub theta: f64,
    pub levels: usize,
    /// Stop once a level has at least this many dofs.
    pub max_dofs: Option<usize>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub mesh_out: Option<PathBuf>,
    /// Degree of the rule used for the stress error.
    pub error_degree: usize,
    /// Compute errors against a reference solution when there is no exact one.
    pub reference: bool,
    /// Unused; everything is deterministic.
    pub seed: u64,
}

impl RunConfig {
    pub fn new(benchmark: BenchmarkName, mode: Mode, levels: usize) -> Self {
        Self {
            benchmark,
            nu: 0.3,
            young: crate::benchmarks::YOUNG,
            mode,
            theta: DEFAULT_THETA,
            levels,
            max_dofs: None,
            csv: None,
            svg: None,
            mesh_out: None,
            error_degree: TRIANGLE_DEGREE,
            reference: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<LameParameters, DriverError> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(DriverError::Config(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.levels < 1 {
            return Err(DriverError::Config("levels must be at least 1".into()));
        }
        Ok(LameParameters::from_young_poisson(self.young, self.nu)?)
    }
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("level {level}: {source}")]
    Solver { level: usize, source: AwError },
    #[error("level {level}: {source}")]
    Mesh { level: usize, source: MeshError },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl DriverError {
    /// Process exit code: 2 for configuration errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Config(_) | DriverError::Material(_) => 2,
            _ => 3,
        }
    }
}

/// One level of a run. Estimator parts are square roots of the summed squares.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub ndof: usize,
    pub num_triangles: usize,
    pub h_max: f64,
    pub error: Option<f64>,
    pub eta: f64,
    pub eta_vol: f64,
    pub eta_edge_int: f64,
    pub eta_edge_dir: f64,
    pub osc_f: f64,
    pub osc_g: f64,
    pub osc_ud: f64,
    pub residual: f64,
}

impl ConvergenceRecord {
    pub fn efficiency(&self) -> Option<f64> {
        self.error.filter(|e| *e > 0.0).map(|e| self.eta / e)
    }

    /// Share of `osc(g − g_h)²` in `η²`.
    pub fn osc_g_share(&self) -> f64 {
        if self.eta > 0.0 {
            (self.osc_g / self.eta).powi(2)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct History {
    pub benchmark: BenchmarkName,
    pub mode: Mode,
    pub records: Vec<ConvergenceRecord>,
    /// Errors against the reference solution, one per record.
    pub reference_errors: Option<Vec<f64>>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Rate in ndof over the last `min(4, n − 1)` of `n` points; `None` for fewer than 3.
pub fn windowed_rate(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let w = RATE_WINDOW.min(n - 1);
    Some(ls_slope(&points[n - w..]))
}

/// Rate over the points with `lo ≤ x ≤ hi`; `None` for fewer than 2 points.
pub fn rate_between(points: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let sel: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    (sel.len() >= 2).then(|| ls_slope(&sel))
}

/// Rate over the last decade of `x`. Adaptive runs take many small steps, so
/// a fixed number of records can span a tiny dof range.
pub fn last_decade_rate(points: &[(f64, f64)]) -> Option<f64> {
    let hi = points.last()?.0;
    if hi < 10.0 * points[0].0 {
        return None;
    }
    rate_between(points, hi / 10.0, hi)
}

impl History {
    fn series(&self, f: impl Fn(&ConvergenceRecord) -> Option<f64>) -> Option<Vec<(f64, f64)>> {
        self.records.iter().map(|r| f(r).map(|y| (r.ndof as f64, y))).collect()
    }

    pub fn error_rate(&self) -> Option<f64> {
        self.series(|r| r.error).as_deref().and_then(windowed_rate)
    }

    pub fn eta_rate(&self) -> Option<f64> {
        self.series(|r| Some(r.eta)).as_deref().and_then(windowed_rate)
    }

    pub fn error_points(&self) -> Option<Vec<(f64, f64)>> {
        self.series(|r| r.error)
    }

    pub fn eta_points(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.ndof as f64, r.eta)).collect()
    }

    pub fn reference_error_rate(&self) -> Option<f64> {
        let errs = self.reference_errors.as_ref()?;
        let pts: Vec<(f64, f64)> = self.records.iter().zip(errs).map(|(r, e)| (r.ndof as f64, *e)).collect();
        windowed_rate(&pts)
    }

    /// Two-point rates between consecutive levels.
    pub fn pairwise_rates(&self, f: impl Fn(&ConvergenceRecord) -> Option<f64>) -> Vec<Option<f64>> {
        self.records
            .windows(2)
            .map(|w| {
                let (a, b) = (f(&w[0])?, f(&w[1])?);
                Some(ls_slope(&[(w[0].ndof as f64, a), (w[1].ndof as f64, b)]))
            })
            .collect()
    }
}

/// Dörfler marking: the fewest triangles, largest first, whose indicators sum
/// to at least `θ` times the total. Ties go to the smaller id.
pub fn mark(indicators: &[f64], theta: f64) -> Vec<usize> {
    let total: f64 = indicators.iter().sum();
    let mut order: Vec<usize> = (0..indicators.len()).filter(|&t| indicators[t] > 0.0).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    let goal = theta * total;
    let mut sum = 0.0;
    let mut out = Vec::new();
    for t in order {
        if sum >= goal && !out.is_empty() {
            break;
        }
        sum += indicators[t];
        out.push(t);
    }
    out.sort_unstable();
    out
}

fn record(
    level: usize,
    mesh: &Triangulation,
    sol: &Solution,
    br: &EstimatorBreakdown,
    error: Option<f64>,
) -> ConvergenceRecord {
    ConvergenceRecord {
        level,
        ndof: sol.ndof,
        num_triangles: mesh.num_triangles(),
        h_max: mesh.h_max(),
        error,
        eta: br.eta(),
        eta_vol: br.volume_sq().sqrt(),
        eta_edge_int: br.interior_sq().sqrt(),
        eta_edge_dir: br.dirichlet_sq().sqrt(),
        osc_f: br.osc_f_sq().sqrt(),
        osc_g: br.osc_g_sq().sqrt(),
        osc_ud: br.osc_ud_sq().sqrt(),
        residual: sol.residual,
    }
}

/// Piecewise stress of one level, kept for the reference comparison.
struct StressSnapshot {
    sigma: Vec<crate::poly::SymPoly>,
    frames: Vec<LocalFrame>,
}

impl StressSnapshot {
    fn eval(&self, t: usize, x: [f64; 2]) -> SymMat2 {
        SymMat2::from_array(self.sigma[t].eval_local(self.frames[t].to_local(x)))
    }
}

/// Runs the loop and writes the requested outputs.
pub fn run(config: &RunConfig) -> Result<History, DriverError> {
    let params = config.validate()?;
    let bench = Benchmark::new(config.benchmark, params);
    let keep_reference = config.reference && !bench.has_exact_solution();
    let mut mesh = bench.mesh.clone();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut parents: Vec<Vec<usize>> = Vec::new();

    if let Some(dir) = &config.mesh_out {
        fs::create_dir_all(dir).map_err(|source| DriverError::Io { path: dir.clone(), source })?;
    }

    for level in 0..config.levels {
        let (space, sol) = solve(&mesh, &params, &bench).map_err(|source| DriverError::Solver { level, source })?;
        let eps = EpsField::from_solution(&sol, &params);
        let br = estimate(&mesh, &eps, &space.neumann, &bench).map_err(|source| DriverError::Solver { level, source })?;
        let error = if bench.has_exact_solution() {
            let exact = |x: [f64; 2]| bench.exact_stress(x).unwrap_or_default();
            Some(stress_error(&mesh, &sol, exact, config.error_degree)?)
        } else {
            None
        };
        records.push(record(level, &mesh, &sol, &br, error));
        if let Some(dir) = &config.mesh_out {
            let path = dir.join(format!("level_{level:02}.mesh"));
            fs::write(&path, write_mesh(&mesh)).map_err(|source| DriverError::Io { path, source })?;
        }
        if keep_reference {
            snapshots.push(StressSnapshot {
                sigma: sol.sigma,
                frames: sol.frames,
            });
        }

        let budget_reached = config.max_dofs.is_some_and(|m| records[level].ndof >= m);
        if level + 1 == config.levels || budget_reached {
            break;
        }
        let refined = match config.mode {
            Mode::Uniform => bench.refine_uniform(&mesh),
            Mode::Adaptive => bench.refine(&mesh, &mark(&br.indicators(&mesh), config.theta)),
        }
        .map_err(|source| DriverError::Mesh { level, source })?;
        if keep_reference {
            parents.push(refined.parent);
        }
        mesh = refined.mesh;
    }

    let reference_errors = if keep_reference {
        Some(reference_errors(&bench, &params, &mesh, &snapshots, &parents)?)
    } else {
        None
    };
    let history = History {
        benchmark: config.benchmark,
        mode: config.mode,
        records,
        reference_errors,
    };
    if let Some(path) = &config.csv {
        write_file(path, &csv_string(&history))?;
    }
    if let Some(path) = &config.svg {
        write_file(path, &svg_string(&history))?;
    }
    Ok(history)
}

fn write_file(path: &Path, text: &str) -> Result<(), DriverError> {
    fs::write(path, text).map_err(|source| DriverError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `‖σ_ref − σ_ℓ‖` for every level, with `σ_ref` computed on one uniform
/// refinement of the finest mesh.
fn reference_errors(
    bench: &Benchmark,
    params: &LameParameters,
    finest: &Triangulation,
    snapshots: &[StressSnapshot],
    parents: &[Vec<usize>],
) -> Result<Vec<f64>, DriverError> {
    let level = snapshots.len();
    let refined = bench
        .refine_uniform(finest)
        .map_err(|source| DriverError::Mesh { level, source })?;
    let (_, reference) = solve(&refined.mesh, params, bench).map_err(|source| DriverError::Solver { level, source })?;
    let mesh = &refined.mesh;
    let mut ancestor = refined.parent;
    let mut out = vec![0.0; level];
    for l in (0..level).rev() {
        let snap = &snapshots[l];
        let parts: Vec<f64> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                integrate_triangle(
                    &mesh.triangle_points(t),
                    |x| (reference.stress_at(t, x) - snap.eval(ancestor[t], x)).norm_sq(),
                    6,
                )
            })
            .collect::<Result<_, _>>()?;
        out[l] = parts.iter().sum::<f64>().sqrt();
        if l > 0 {
            for a in &mut ancestor {
                *a = parents[l - 1][*a];
            }
        }
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// CSV with the fixed column set and a footer of `#` lines holding rates.
pub fn csv_string(h: &History) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &h.records {
        let _ = writeln!(
            s,
            "{},{},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.level,
            r.ndof,
            r.h_max,
            opt(r.error),
            r.eta,
            r.eta_vol,
            r.eta_edge_int,
            r.eta_edge_dir,
            r.osc_f,
            r.osc_g,
            r.osc_ud,
            opt(r.efficiency()),
        );
    }
    let _ = writeln!(s, "# benchmark={} mode={}", h.benchmark, h.mode);
    let _ = writeln!(s, "# ls_rate_err_sigma_l2={}", opt(h.error_rate()));
    let _ = writeln!(s, "# ls_rate_eta={}", opt(h.eta_rate()));
    let pairs = |f: &dyn Fn(&ConvergenceRecord) -> Option<f64>| {
        h.pairwise_rates(f).into_iter().map(opt).collect::<Vec<_>>().join(";")
    };
    let _ = writeln!(
        s,
        "# decade_rate_err_sigma_l2={}",
        opt(h.error_points().as_deref().and_then(last_decade_rate))
    );
    let _ = writeln!(s, "# decade_rate_eta={}", opt(last_decade_rate(&h.eta_points())));
    let _ = writeln!(s, "# pair_rates_err_sigma_l2={}", pairs(&|r| r.error));
    let _ = writeln!(s, "# pair_rates_eta={}", pairs(&|r| Some(r.eta)));
    if let Some(errs) = &h.reference_errors {
        let list: Vec<String> = errs.iter().map(|e| format!("{e:e}")).collect();
        let _ = writeln!(s, "# reference_err_sigma_l2={}", list.join(";"));
        let _ = writeln!(s, "# ls_rate_reference_err={}", opt(h.reference_error_rate()));
    }
    s
}

/// Log-log plot of the error and `η` against ndof, with slope triangles.
pub fn svg_string(h: &History) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let mut series: Vec<(&str, &str, Vec<(f64, f64)>)> = Vec::new();
    let ndofs: Vec<f64> = h.records.iter().map(|r| r.ndof as f64).collect();
    series.push(("eta", "#1f77b4", ndofs.iter().copied().zip(h.records.iter().map(|r| r.eta)).collect()));
    if let Some(err) = h.series(|r| r.error) {
        series.push(("error", "#d62728", err));
    } else if let Some(errs) = &h.reference_errors {
        series.push(("reference error", "#d62728", ndofs.iter().copied().zip(errs.iter().copied()).collect()));
    }
    let pts = series.iter().flat_map(|s| s.2.iter()).filter(|p| p.1 > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| M + (x.log10() - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">ndof ({} {})</text>"#,
        W / 2.0,
        H - 20.0,
        h.benchmark,
        h.mode
    );
    for (k, (name, color, data)) in series.iter().enumerate() {
        let path: Vec<String> = data
            .iter()
            .filter(|p| p.1 > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for p in &path {
            let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
            M + 10.0,
            M + 18.0 * (k + 1) as f64
        );
    }
    // reference slopes -1.5 and -2 in ndof, anchored below the last η value
    if let Some(last) = h.records.last() {
        let xe = last.ndof as f64;
        let xs = xe / 10f64.powf(((x1 - x0) / 3.0).max(0.2));
        let ye = last.eta.max(1e-300) * 0.5;
        for (slope, dy) in [(-1.5, 0.0), (-2.0, 1.0)] {
            let shift = 10f64.powf(-dy * (y1 - y0) / 8.0);
            let (a, b) = ((xs, ye * shift * (xe / xs).powf(-slope)), (xe, ye * shift));
            let _ = writeln!(
                s,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="gray" stroke-dasharray="4 2"/>"#,
                px(a.0),
                py(a.1),
                px(b.0),
                py(b.1),
                px(a.0),
                py(b.1)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="gray">{slope}</text>"#,
                px(a.0) - 28.0,
                0.5 * (py(a.1) + py(b.1))
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marking_examples() {
        assert_eq!(mark(&[9.0, 1.0, 1.0, 1.0], 0.5), vec![0]);
        assert_eq!(mark(&[1.0, 0.0, 2.0, 3.0], 1.0), vec![0, 2, 3]);
        for n in 1..12 {
            let m = mark(&vec![1.0; n], 0.5);
            assert_eq!(m.len(), n.div_ceil(2));
            assert_eq!(m, (0..n.div_ceil(2)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn slopes() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (10f64.powi(k), 3.0 * 10f64.powf(-1.5 * k as f64))).collect();
        assert!((ls_slope(&pts) + 1.5).abs() < 1e-12);
        assert!(windowed_rate(&pts[..2]).is_none());
        assert!((windowed_rate(&pts).unwrap() + 1.5).abs() < 1e-12);
        assert!((last_decade_rate(&pts).unwrap() + 1.5).abs() < 1e-12);
        assert!(last_decade_rate(&pts[..1]).is_none());
        assert_eq!(rate_between(&pts, 50.0, 2000.0), Some(ls_slope(&pts[1..3])));
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(BenchmarkName::Academic, Mode::Uniform, 2);
        assert!(c.validate().is_ok());
        c.theta = 0.0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        c.theta = 0.3;
        c.levels = 0;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        c.levels = 1;
        c.nu = 0.5;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }
}
