//! Initial conditions, the drop-merging driver and the Cauchy
//! mesh-refinement harness.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{norm, quad, Field, Grid, Norm};
use crate::iofmt::{self, TimeSeriesRecord};
use crate::linsolve::SolverOptions;
use crate::model::{Constraint, Method, ModelParams, SchemeState};
use crate::schemes::{advance, initial_report, StepReport};

/// Interface half-width of the drop profile.
pub const DROP_DELTA: f64 = 0.01;
/// Drop radius.
pub const DROP_RADIUS: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `1/2 + 1/2 cos(4πx) cos(4πy)`
    Cosine,
    /// Four tanh-profiled drops.
    Drops,
    /// Uniform field.
    Constant(f64),
    /// Field snapshot in the text format of [`iofmt::write_field`].
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub ic: InitialCondition,
    /// Where the time series and snapshots go; `None` disables output.
    pub out_dir: Option<PathBuf>,
    /// Snapshot cadence in steps; `0` writes only the initial and final fields.
    pub snapshot_every: usize,
    pub solver: SolverOptions,
}

impl Default for ExperimentConfig {
    /// The drop-merging run at full resolution.
    fn default() -> Self {
        ExperimentConfig {
            params: ModelParams::default(),
            n: 256,
            dt: 1.0e-4,
            t_end: 8.0,
            ic: InitialCondition::Drops,
            out_dir: None,
            snapshot_every: 0,
            solver: SolverOptions::default(),
        }
    }
}

impl ExperimentConfig {
    /// Cosine mesh-refinement setup at desk scale (`n = 128`, `T = 1`).
    pub fn refinement_study(constraint: Constraint, method: Method) -> Self {
        ExperimentConfig {
            params: ModelParams::refinement_study(constraint, method),
            n: 128,
            dt: 0.1,
            t_end: 1.0,
            ic: InitialCondition::Cosine,
            ..Default::default()
        }
    }

    /// Drop merging with the given variant; resolution and horizon left at
    /// their full-size defaults.
    pub fn drop_merge(constraint: Constraint, method: Method) -> Self {
        ExperimentConfig {
            params: ModelParams::drop_merge(constraint, method),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        Grid::new(self.n)?;
        self.n_steps().map(|_| ())
    }

    /// `t_end / dt` as an integer step count. The ratio must be integral up
    /// to a relative `1e-9`; `t_end = 0` is allowed and gives no steps.
    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

pub fn ic_cosine(grid: Grid) -> Field {
    Field::from_fn(grid, |x, y| 0.5 + 0.5 * (4.0 * PI * x).cos() * (4.0 * PI * y).cos())
}

/// Distances from `(x, y)` to the four drop centers.
fn drop_radii(x: f64, y: f64) -> [f64; 4] {
    let d = DROP_DELTA;
    let lo = 0.3 - d;
    let hi = 0.7 + d;
    [(lo, lo), (hi, lo), (lo, hi), (hi, hi)].map(|(cx, cy)| (x - cx).hypot(y - cy))
}

/// Four-drop profile at a point. Branches are tried in order: the plateau
/// of any drop first, then the transition annulus of drops 1 to 4, then
/// zero. The profile jumps from 1 to `tanh(2)` at `r = 0.2 - δ`.
pub fn drop_profile(x: f64, y: f64) -> f64 {
    let d = DROP_DELTA;
    let r = drop_radii(x, y);
    if r.iter().any(|&rk| rk <= DROP_RADIUS - d) {
        return 1.0;
    }
    for rk in r {
        if rk > DROP_RADIUS - d && rk < DROP_RADIUS + d {
            return ((DROP_RADIUS + d - rk) / d).tanh();
        }
    }
    0.0
}

pub fn ic_drops(grid: Grid) -> Field {
    Field::from_fn(grid, drop_profile)
}

pub fn build_ic(ic: &InitialCondition, grid: Grid) -> Result<Field> {
    match ic {
        InitialCondition::Cosine => Ok(ic_cosine(grid)),
        InitialCondition::Drops => Ok(ic_drops(grid)),
        InitialCondition::Constant(c) => Ok(Field::constant(grid, *c)),
        InitialCondition::File(path) => {
            let (field, _) = iofmt::read_field(path)?;
            if field.grid() != grid {
                return Err(Error::Config(format!(
                    "{}: field has n = {}, configuration asks for n = {}",
                    path.display(),
                    field.grid().n(),
                    grid.n()
                )));
            }
            Ok(field)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SchemeState,
    /// One record for the initial state and one per step.
    pub series: Vec<TimeSeriesRecord>,
}

/// Builds the initial state and integrates to `t_end` without any I/O.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run(cfg, |_, _| Ok(()), |_| {})
}

/// [`simulate`], handing every step's full report to `observer`.
pub fn simulate_observed(cfg: &ExperimentConfig, observer: impl FnMut(&StepReport)) -> Result<RunOutput> {
    run(cfg, |_, _| Ok(()), observer)
}

/// Runs an experiment and, when `out_dir` is set, writes `timeseries.csv`
/// and field snapshots `phi_<step>.txt` there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let Some(dir) = cfg.out_dir.clone() else {
        return simulate(cfg);
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let out = run(
        cfg,
        |state, t| iofmt::write_field(&state.phi, t, &snapshot_path(&dir, state.step)),
        |_| {},
    )?;
    iofmt::write_timeseries(&out.series, &dir.join("timeseries.csv"))?;
    Ok(out)
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("phi_{step:08}.txt"))
}

fn run(
    cfg: &ExperimentConfig,
    mut snapshot: impl FnMut(&SchemeState, f64) -> Result<()>,
    mut observer: impl FnMut(&StepReport),
) -> Result<RunOutput> {
    cfg.validate()?;
    let n_steps = cfg.n_steps()?;
    let grid = Grid::new(cfg.n)?;
    let phi0 = build_ic(&cfg.ic, grid)?;
    let mut state = SchemeState::initialize(phi0, &cfg.params)?;
    let mut series = vec![TimeSeriesRecord::from(&initial_report(&state, &cfg.params))];
    snapshot(&state, 0.0)?;

    // Advance in chunks between snapshots so the observer never needs the
    // field itself.
    let chunk = if cfg.snapshot_every == 0 { n_steps.max(1) } else { cfg.snapshot_every };
    let mut done = 0;
    while done < n_steps {
        let steps = chunk.min(n_steps - done);
        state = advance(state, &cfg.params, cfg.dt, steps, &cfg.solver, |r| {
            series.push(TimeSeriesRecord::from(r));
            observer(r);
        })?;
        done += steps;
        snapshot(&state, done as f64 * cfg.dt)?;
    }
    Ok(RunOutput { state, series })
}

/// Errors between two consecutive refinement levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub coarse: f64,
    pub fine: f64,
    pub err_l2: f64,
    /// `NaN` on the first row or when an error vanishes.
    pub rate_l2: f64,
    pub err_h1: f64,
    pub rate_h1: f64,
}

/// `log2(errs[k] / errs[k + 1])` for each consecutive pair.
pub fn rates_from_errors(errs: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = errs.iter().enumerate().find(|(_, &e)| !(e > 0.0)) {
        return Err(Error::NonpositiveError { index, value });
    }
    Ok(errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

fn rate_or_nan(coarse: f64, fine: f64) -> f64 {
    if coarse > 0.0 && fine > 0.0 {
        (coarse / fine).log2()
    } else {
        f64::NAN
    }
}

fn rows_from_differences(levels: &[f64], diffs: &[Field]) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = diffs
        .iter()
        .enumerate()
        .map(|(k, d)| ConvergenceRow {
            coarse: levels[k],
            fine: levels[k + 1],
            err_l2: norm(d, Norm::L2),
            rate_l2: f64::NAN,
            err_h1: norm(d, Norm::H1),
            rate_h1: f64::NAN,
        })
        .collect();
    for k in 1..rows.len() {
        rows[k].rate_l2 = rate_or_nan(rows[k - 1].err_l2, rows[k].err_l2);
        rows[k].rate_h1 = rate_or_nan(rows[k - 1].err_h1, rows[k].err_h1);
    }
    rows
}

/// `levels` time steps starting at `dt_max`, each half the previous.
pub fn halving_dts(dt_max: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| dt_max / (1u64 << k) as f64).collect()
}

/// `levels` grid sizes starting at `n_min`, each double the previous.
pub fn doubling_ns(n_min: usize, levels: usize) -> Vec<usize> {
    (0..levels).map(|k| n_min << k).collect()
}

/// Temporal self-convergence at fixed `cfg.n`: one run per time step, each
/// to `cfg.t_end`, compared pairwise on the shared grid. Runs execute in
/// parallel; rows are ordered by `dts`.
pub fn converge_time(cfg: &ExperimentConfig, dts: &[f64]) -> Result<Vec<ConvergenceRow>> {
    if dts.len() < 2 {
        return Err(Error::Config("need at least two time steps".into()));
    }
    for w in dts.windows(2) {
        if (2.0 * w[1] - w[0]).abs() > 1e-12 * w[0] {
            return Err(Error::Config(format!("time steps must halve: {} -> {}", w[0], w[1])));
        }
    }
    let finals = dts
        .par_iter()
        .map(|&dt| {
            let run = ExperimentConfig {
                dt,
                out_dir: None,
                ..cfg.clone()
            };
            simulate(&run).map(|o| o.state.phi)
        })
        .collect::<Result<Vec<Field>>>()?;
    let diffs: Vec<Field> = finals
        .windows(2)
        .map(|w| w[0].zip_map(&w[1], |a, b| a - b))
        .collect();
    Ok(rows_from_differences(dts, &diffs))
}

/// 2×2 cell averaging onto the grid with half as many cells per axis.
pub fn restrict(fine: &Field) -> Result<Field> {
    let n = fine.grid().n();
    if n % 2 != 0 || n < 4 {
        return Err(Error::Config(format!("cannot restrict a grid with n = {n}")));
    }
    let coarse_grid = Grid::new(n / 2)?;
    let mut out = Field::zeros(coarse_grid);
    for i in 1..=n / 2 {
        for j in 1..=n / 2 {
            let (a, b) = (2 * i - 1, 2 * j - 1);
            let avg = 0.25 * (fine.get(a, b) + fine.get(a + 1, b) + fine.get(a, b + 1) + fine.get(a + 1, b + 1));
            out.set(i, j, avg);
        }
    }
    Ok(out.with_neumann_bc())
}

/// Spatial self-convergence at fixed `cfg.dt`: one run per grid size; each
/// fine solution is restricted onto the next coarser grid and compared
/// there. Rows report spacings `h`.
pub fn converge_space(cfg: &ExperimentConfig, ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if ns.len() < 2 {
        return Err(Error::Config("need at least two grid sizes".into()));
    }
    for w in ns.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Config(format!("grid sizes must double: {} -> {}", w[0], w[1])));
        }
    }
    let finals = ns
        .par_iter()
        .map(|&n| {
            let run = ExperimentConfig {
                n,
                out_dir: None,
                ..cfg.clone()
            };
            simulate(&run).map(|o| o.state.phi)
        })
        .collect::<Result<Vec<Field>>>()?;
    let diffs = finals
        .windows(2)
        .map(|w| Ok(w[0].zip_map(&restrict(&w[1])?, |a, b| a - b)))
        .collect::<Result<Vec<Field>>>()?;
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    Ok(rows_from_differences(&hs, &diffs))
}

/// Volume `[1 ⋆ φ]` of a field; re-exported for drivers.
pub fn volume(phi: &Field) -> f64 {
    quad(phi)
}

/// A 4-connected set of cells where `φ` exceeds a level.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub cells: usize,
    pub centroid: (f64, f64),
    /// Smallest and largest centroid distance over the region's edge cells
    /// (cells with an in-domain neighbour outside the region).
    pub edge_distance: (f64, f64),
}

impl Region {
    /// `(max - min) / mean` of the edge distances; 0 for a perfect disc.
    pub fn roundness_defect(&self) -> f64 {
        let (lo, hi) = self.edge_distance;
        2.0 * (hi - lo) / (hi + lo)
    }
}

/// Connected components of `{φ > level}`, largest first.
pub fn regions(phi: &Field, level: f64) -> Vec<Region> {
    let grid = phi.grid();
    let n = grid.n();
    let inside = |i: usize, j: usize| phi.get(i, j) > level;
    let mut seen = vec![false; n * n];
    let mut out = Vec::new();
    for i0 in 1..=n {
        for j0 in 1..=n {
            if seen[(i0 - 1) * n + j0 - 1] || !inside(i0, j0) {
                continue;
            }
            seen[(i0 - 1) * n + j0 - 1] = true;
            let mut stack = vec![(i0, j0)];
            let mut cells = Vec::new();
            let mut edge = Vec::new();
            while let Some((i, j)) = stack.pop() {
                cells.push((i, j));
                let neighbours = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)];
                let mut on_edge = false;
                for (a, b) in neighbours {
                    if a < 1 || a > n || b < 1 || b > n {
                        continue;
                    }
                    if !inside(a, b) {
                        on_edge = true;
                    } else if !seen[(a - 1) * n + b - 1] {
                        seen[(a - 1) * n + b - 1] = true;
                        stack.push((a, b));
                    }
                }
                if on_edge {
                    edge.push((i, j));
                }
            }
            let count = cells.len() as f64;
            let cx = cells.iter().map(|&(i, _)| grid.center(i)).sum::<f64>() / count;
            let cy = cells.iter().map(|&(_, j)| grid.center(j)).sum::<f64>() / count;
            let dist = |&(i, j): &(usize, usize)| (grid.center(i) - cx).hypot(grid.center(j) - cy);
            let lo = edge.iter().map(dist).fold(f64::INFINITY, f64::min);
            let hi = edge.iter().map(dist).fold(0.0, f64::max);
            out.push(Region {
                cells: cells.len(),
                centroid: (cx, cy),
                edge_distance: if edge.is_empty() { (0.0, 0.0) } else { (lo, hi) },
            });
        }
    }
    out.sort_by(|a, b| b.cells.cmp(&a.cells));
    out
}
