use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use llfisher::bethe::{dnorm_sq_dc, norm_sq, solve_bethe_with, ModelParams, SolverOptions, StateSpec};
use llfisher::fisher::{
    default_bracket, default_order, fisher_report_with, lmax, FisherOptions, FisherReport, SweepAxis,
};
use llfisher::imaging::{
    default_box_order, image_distribution_with, imaging_cfi, sample_indices, ImageDistribution, LikelihoodTable,
    PixelGrid,
};
use llfisher::Error;

use crate::args::*;
use crate::output::*;

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::InvalidArgument(_) | Error::ResourceLimit(_)) => 2,
            CliError::Lib(
                Error::SolverFailure { .. }
                | Error::NumericalFailure(_)
                | Error::DegenerateState(_)
                | Error::Consistency(_)
                | Error::Quadrature(_),
            ) => 3,
            CliError::Lib(Error::Bracket { .. }) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()).into())
}

fn emit(out: &OutputArgs, bytes: &[u8]) -> Result<()> {
    let mut w = open(out.output.as_deref())?;
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn json_only(out: &OutputArgs) -> Result<()> {
    if out.format == Some(Format::Csv) {
        return invalid("this command writes a single JSON record; csv is not available");
    }
    Ok(())
}

fn positive_order(order: Option<usize>) -> Result<()> {
    if order == Some(0) {
        return invalid("quadrature order must be at least 1");
    }
    Ok(())
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    json_only(&args.out)?;
    let spec = args.state.single()?;
    let params = ModelParams::new(args.c, args.l)?;
    let mut opts = SolverOptions::default();
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return invalid("--tol must lie in (0, 1)");
        }
        opts.tolerance = tol;
    }
    let config = json!({"command": "solve", "state": spec, "c": args.c, "L": args.l, "tol": opts.tolerance});
    let sol = solve_bethe_with(&spec, &params, &opts)?;
    let nd = norm_sq(&sol.k, &params, spec.bc());
    let dnorm = dnorm_sq_dc(&spec, &params)?;
    let gaudin: Vec<Vec<f64>> = (0..nd.matrix.nrows()).map(|i| nd.matrix.row(i).iter().copied().collect()).collect();
    let record = json!({
        "provenance": Provenance::new(&config, opts.tolerance, None),
        "state": spec,
        "params": params,
        "k": sol.k,
        "dk_dc": sol.dk_dc,
        "energy": sol.energy,
        "momentum": sol.momentum,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "norm": {"gaudin_matrix": gaudin, "det": nd.det, "norm_sq": nd.norm_sq, "dnorm_sq_dc": dnorm},
    });
    emit(&args.out, to_json(&record).as_bytes())
}

#[derive(Serialize)]
struct FisherRow {
    state: String,
    axis: Option<&'static str>,
    value: Option<f64>,
    c: f64,
    #[serde(rename = "L")]
    l: f64,
    status: &'static str,
    error: Option<String>,
    report: Option<FisherReport>,
    provenance: Provenance,
}

const FISHER_HEADER: [&str; 14] = [
    "state",
    "axis",
    "value",
    "c",
    "L",
    "qfi",
    "cfi",
    "gap",
    "phase_class",
    "cfi_path",
    "solver_residual",
    "norm_consistency",
    "status",
    "error",
];

fn fisher_csv_row(row: &FisherRow) -> Vec<String> {
    let mut out = vec![
        row.state.clone(),
        row.axis.unwrap_or("").to_string(),
        row.value.map(float).unwrap_or_default(),
        float(row.c),
        float(row.l),
    ];
    match &row.report {
        Some(r) => out.extend([
            float(r.qfi),
            float(r.cfi),
            float(r.phase_variance_term),
            format!("{:?}", r.phase_class).to_lowercase(),
            format!("{:?}", r.method.cfi_path).to_lowercase(),
            float(r.method.solver_residual),
            float(r.method.norm_consistency),
        ]),
        None => out.extend(std::iter::repeat_n(String::new(), 7)),
    }
    out.push(row.status.to_string());
    out.push(row.error.clone().unwrap_or_default());
    out.extend(row.provenance.csv_fields());
    out
}

pub fn fisher(args: &FisherArgs) -> Result<()> {
    let specs = args.state.states()?;
    positive_order(args.order)?;
    let grid = match (&args.axis, &args.grid) {
        (Some(_), Some(g)) => {
            let g = parse_grid(g)?;
            if g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|v| !v.is_finite()) {
                return invalid("sweep grid must be finite and strictly increasing");
            }
            Some(g)
        }
        _ => None,
    };
    let (fixed, axis) = match args.axis {
        None => (None, None),
        Some(Axis::C) => {
            if args.c.is_some() {
                return invalid("-c cannot be fixed while sweeping c");
            }
            (Some(args.l.ok_or_else(|| Error::InvalidArgument("-L is required".into()))?), Some(SweepAxis::C))
        }
        Some(Axis::L) => {
            if args.l.is_some() {
                return invalid("-L cannot be fixed while sweeping L");
            }
            (Some(args.c.ok_or_else(|| Error::InvalidArgument("-c is required".into()))?), Some(SweepAxis::L))
        }
    };
    let opts = FisherOptions { force_quadrature: args.force_quadrature, order: args.order };
    let config = json!({
        "command": "fisher",
        "states": specs,
        "c": args.c,
        "L": args.l,
        "axis": axis,
        "grid": grid,
        "force_quadrature": args.force_quadrature,
        "order": args.order,
    });
    let tol = SolverOptions::default().tolerance;

    let mut rows = Vec::new();
    for spec in &specs {
        let provenance = Provenance::new(&config, tol, Some(args.order.unwrap_or_else(|| default_order(spec.n()))));
        match (axis, &grid, fixed) {
            (Some(axis), Some(grid), Some(fixed)) => {
                let points: Vec<(f64, ModelParams)> = grid
                    .iter()
                    .map(|&v| {
                        let p = match axis {
                            SweepAxis::C => ModelParams::new(v, fixed),
                            SweepAxis::L => ModelParams::new(fixed, v),
                        };
                        p.map(|p| (v, p))
                    })
                    .collect::<std::result::Result<_, _>>()?;
                let reports: Vec<_> = points.par_iter().map(|(_, p)| fisher_report_with(spec, p, &opts)).collect();
                for ((v, p), rep) in points.iter().zip(reports) {
                    rows.push(make_row(spec, Some(axis), Some(*v), p, rep, provenance.clone()));
                }
            }
            _ => {
                let c = args.c.ok_or_else(|| Error::InvalidArgument("-c is required".into()))?;
                let l = args.l.ok_or_else(|| Error::InvalidArgument("-L is required".into()))?;
                let p = ModelParams::new(c, l)?;
                rows.push(make_row(spec, None, None, &p, fisher_report_with(spec, &p, &opts), provenance));
            }
        }
    }

    let failed = rows.iter().filter(|r| r.report.is_none()).count();
    for r in rows.iter().filter(|r| r.report.is_none()) {
        eprintln!("warning: {} at c={} L={} failed: {}", r.state, r.c, r.l, r.error.as_deref().unwrap_or(""));
    }
    let bytes = match args.out.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows).into_bytes(),
        Format::Csv => {
            let header: Vec<&str> = FISHER_HEADER.iter().chain(Provenance::CSV_HEADER.iter()).copied().collect();
            to_csv(&header, &rows.iter().map(fisher_csv_row).collect::<Vec<_>>())?
        }
    };
    emit(&args.out, &bytes)?;
    if failed == rows.len() {
        let first = rows.into_iter().find_map(|r| r.error).unwrap_or_default();
        return Err(Error::NumericalFailure(format!("every point failed; first error: {first}")).into());
    }
    Ok(())
}

fn make_row(
    spec: &StateSpec,
    axis: Option<SweepAxis>,
    value: Option<f64>,
    p: &ModelParams,
    report: llfisher::Result<FisherReport>,
    provenance: Provenance,
) -> FisherRow {
    let axis = axis.map(|a| match a {
        SweepAxis::C => "c",
        SweepAxis::L => "L",
    });
    let (status, error, report) = match report {
        Ok(r) => ("ok", None, Some(r)),
        Err(e) => ("failed", Some(e.to_string()), None),
    };
    FisherRow { state: spec.to_string(), axis, value, c: p.c, l: p.l, status, error, report, provenance }
}

pub fn lmax_cmd(args: &LmaxArgs) -> Result<()> {
    json_only(&args.out)?;
    let spec = args.state.single()?;
    let bracket = match &args.bracket {
        Some(b) => match parse_floats(b)?.as_slice() {
            [lo, hi] => (*lo, *hi),
            _ => return invalid("--bracket takes two numbers `lo,hi`"),
        },
        None => {
            if !(args.c > 0.0 && args.c.is_finite()) {
                return invalid("c must be positive");
            }
            default_bracket(args.c)
        }
    };
    let config = json!({"command": "lmax", "state": spec, "c": args.c, "bracket": [bracket.0, bracket.1]});
    let r = lmax(&spec, args.c, bracket)?;
    let record = json!({
        "provenance": Provenance::new(&config, SolverOptions::default().tolerance, Some(default_order(spec.n()))),
        "state": spec,
        "bracket": [bracket.0, bracket.1],
        "c": r.c,
        "l_max": r.l_max,
        "c_l_max": r.c_l_max,
        "f_max": r.f_max,
        "evaluations": r.evaluations,
    });
    emit(&args.out, to_json(&record).as_bytes())
}

#[derive(Serialize)]
struct ImagingRow {
    state: String,
    c: f64,
    #[serde(rename = "L")]
    l: f64,
    n_pixels: usize,
    imaging_cfi: f64,
    cfi: f64,
    ratio: f64,
    total_probability: f64,
    total_derivative: f64,
    provenance: Provenance,
}

pub fn imaging(args: &ImagingArgs) -> Result<()> {
    let spec = args.state.single()?;
    let params = ModelParams::new(args.c, args.l)?;
    positive_order(args.order)?;
    let pixels: Vec<usize> = args
        .pixels
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad pixel count `{t}`"))))
        .collect::<std::result::Result<_, _>>()?;
    if pixels.is_empty() || pixels.contains(&0) {
        return invalid("pixel counts must be positive integers");
    }
    if args.sample == Some(0) {
        return invalid("--sample needs at least one shot");
    }
    if args.sample.is_some() && (args.mle_points < 3 || !(args.mle_width > 0.0 && args.mle_width.is_finite())) {
        return invalid("the MLE grid needs at least 3 points and a positive width");
    }
    let config = json!({
        "command": "imaging",
        "state": spec,
        "c": args.c,
        "L": args.l,
        "pixels": pixels,
        "order": args.order,
        "sample": args.sample,
        "seed": args.seed,
        "sample_pixels": args.sample_pixels,
        "mle_points": args.mle_points,
        "mle_width": args.mle_width,
    });
    let tol = SolverOptions::default().tolerance;
    let full = fisher_report_with(&spec, &params, &FisherOptions::default())?.cfi;

    let mut rows = Vec::new();
    let mut dists = Vec::new();
    for &n_p in &pixels {
        let order = args.order.unwrap_or_else(|| default_box_order(spec.n(), n_p));
        let dist = image_distribution_with(&spec, &params, &PixelGrid::tiling(args.l, n_p)?, order)?;
        let f = imaging_cfi(&dist);
        rows.push(ImagingRow {
            state: spec.to_string(),
            c: args.c,
            l: args.l,
            n_pixels: n_p,
            imaging_cfi: f,
            cfi: full,
            ratio: f / full,
            total_probability: dist.total_probability(),
            total_derivative: dist.total_derivative(),
            provenance: Provenance::new(&config, tol, Some(order)),
        });
        dists.push(dist);
    }

    if let Some(shots) = args.sample {
        let n_p = args.sample_pixels.unwrap_or_else(|| *pixels.iter().max().expect("non-empty"));
        if n_p == 0 {
            return invalid("--sample-pixels must be positive");
        }
        let dist = match pixels.iter().position(|&p| p == n_p) {
            Some(i) => dists.swap_remove(i),
            None => image_distribution_with(
                &spec,
                &params,
                &PixelGrid::tiling(args.l, n_p)?,
                args.order.unwrap_or_else(|| default_box_order(spec.n(), n_p)),
            )?,
        };
        simulate(args, &spec, &dist, shots, Provenance::new(&config, tol, Some(dist.quadrature_order)))?;
    }

    let bytes = match args.out.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows).into_bytes(),
        Format::Csv => {
            let header: Vec<&str> =
                ["state", "c", "L", "n_pixels", "imaging_cfi", "cfi", "ratio", "total_probability", "total_derivative"]
                    .iter()
                    .chain(Provenance::CSV_HEADER.iter())
                    .copied()
                    .collect();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![
                        r.state.clone(),
                        float(r.c),
                        float(r.l),
                        r.n_pixels.to_string(),
                        float(r.imaging_cfi),
                        float(r.cfi),
                        float(r.ratio),
                        float(r.total_probability),
                        float(r.total_derivative),
                    ];
                    v.extend(r.provenance.csv_fields());
                    v
                })
                .collect();
            to_csv(&header, &body)?
        }
    };
    emit(&args.out, &bytes)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = open(Some(path))?;
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn simulate(
    args: &ImagingArgs,
    spec: &StateSpec,
    dist: &ImageDistribution,
    shots: usize,
    provenance: Provenance,
) -> Result<()> {
    let idx = sample_indices(dist, shots, args.seed)?;
    let bins = dist.grid.n_bins();
    let header: Vec<String> = std::iter::once("shot".to_string()).chain((0..bins).map(|b| format!("bin{b}"))).collect();
    let rows: Vec<Vec<String>> = idx
        .iter()
        .enumerate()
        .map(|(s, &i)| {
            std::iter::once(s.to_string()).chain(dist.entries[i].image.counts.iter().map(u32::to_string)).collect()
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_file(&args.shots_out, &to_csv(&header_refs, &rows)?)?;

    let c = args.c;
    let f = imaging_cfi(dist);
    if !(f > 0.0) {
        return Err(Error::NumericalFailure("imaging CFI vanishes; the MLE grid is undefined".into()).into());
    }
    let sigma = 1.0 / (shots as f64 * f).sqrt();
    let lo = (c - args.mle_width * sigma).max(1e-3 * c);
    let hi = c + args.mle_width * sigma;
    let m = args.mle_points;
    let c_grid: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let table = LikelihoodTable::build(spec, args.l, &dist.grid, &c_grid)?;
    let r = table.estimate_indices(&idx)?;
    let record = json!({
        "provenance": provenance,
        "state": spec,
        "c_true": c,
        "L": args.l,
        "n_pixels": dist.grid.n_pixels,
        "shots": shots,
        "seed": args.seed,
        "imaging_cfi": f,
        "crb_sigma": sigma,
        "c_hat": r.c_hat,
        "at_edge": r.at_edge,
        "c_grid": r.c_grid,
        "loglik": r.loglik,
    });
    write_file(&args.mle_out, to_json(&record).as_bytes())
}
