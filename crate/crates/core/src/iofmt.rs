//! Text formats: time series and convergence tables as CSV, field
//! snapshots as whitespace-separated matrices, and the flat `key = value`
//! experiment configuration.
//!
//! Reals are written with 17 significant digits so every `f64` round-trips
//! exactly. Lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{ConvergenceRow, ExperimentConfig, InitialCondition};
use crate::grid::{Field, Grid};
use crate::schemes::StepReport;

pub const TIMESERIES_HEADER: &str = "step,t,volume,energy_modified,energy_original,cg_iters";
pub const CONVERGENCE_HEADER: &str = "coarse,fine,err_l2,rate_l2,err_h1,rate_h1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub step: usize,
    pub t: f64,
    pub volume: f64,
    pub energy_modified: f64,
    pub energy_original: f64,
    pub cg_iters: usize,
}

impl From<&StepReport> for TimeSeriesRecord {
    fn from(r: &StepReport) -> Self {
        TimeSeriesRecord {
            step: r.step,
            t: r.t,
            volume: r.volume,
            energy_modified: r.energy.modified,
            energy_original: r.energy.original,
            cg_iters: r.cg_iterations,
        }
    }
}

/// 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_rate(v: f64) -> String {
    if v.is_nan() {
        "-".to_string()
    } else {
        fmt_real(v)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_real(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.trim()
        .parse()
        .map_err(|_| Error::format(path, format!("line {line}: `{tok}` is not a number")))
}

fn parse_count(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.trim()
        .parse()
        .map_err(|_| Error::format(path, format!("line {line}: `{tok}` is not a count")))
}

fn check_header(path: &Path, found: Option<&str>, expected: &str) -> Result<()> {
    match found {
        Some(h) if h == expected => Ok(()),
        Some(h) => Err(Error::format(path, format!("header `{h}`, expected `{expected}`"))),
        None => Err(Error::format(path, "empty file")),
    }
}

pub fn write_timeseries(records: &[TimeSeriesRecord], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(100 * (records.len() + 1));
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.step,
            fmt_real(r.t),
            fmt_real(r.volume),
            fmt_real(r.energy_modified),
            fmt_real(r.energy_original),
            r.cg_iters
        );
    }
    write_text(path, &out)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRecord>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    check_header(path, lines.next(), TIMESERIES_HEADER)?;
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::format(path, format!("line {ln}: expected 6 columns, found {}", cols.len())));
        }
        out.push(TimeSeriesRecord {
            step: parse_count(path, ln, cols[0])?,
            t: parse_real(path, ln, cols[1])?,
            volume: parse_real(path, ln, cols[2])?,
            energy_modified: parse_real(path, ln, cols[3])?,
            energy_original: parse_real(path, ln, cols[4])?,
            cg_iters: parse_count(path, ln, cols[5])?,
        });
    }
    Ok(out)
}

/// Header `# n h t`, then `n` rows of `n` interior values. Row `k` holds
/// the cells with x index `k + 1`.
pub fn write_field(field: &Field, t: f64, path: &Path) -> Result<()> {
    let g = field.grid();
    let n = g.n();
    let mut out = String::with_capacity(24 * n * n + 64);
    let _ = writeln!(out, "# {} {} {}", n, fmt_real(g.h()), fmt_real(t));
    for i in 1..=n {
        for j in 1..=n {
            if j > 1 {
                out.push(' ');
            }
            out.push_str(&fmt_real(field.get(i, j)));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Reads a snapshot written by [`write_field`], returning the field with its
/// ghost ring mirrored and the stored time.
pub fn read_field(path: &Path) -> Result<(Field, f64)> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::format(path, "empty file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "#" {
        return Err(Error::format(path, format!("malformed header `{header}`, expected `# n h t`")));
    }
    let n = parse_count(path, 1, toks[1])?;
    let h = parse_real(path, 1, toks[2])?;
    let t = parse_real(path, 1, toks[3])?;
    let grid = Grid::new(n).map_err(|e| Error::format(path, e.to_string()))?;
    if (h - grid.h()).abs() > 1e-12 * grid.h() {
        return Err(Error::format(path, format!("header spacing {h} does not match 1/{n}")));
    }
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        for tok in line.split_whitespace() {
            values.push(parse_real(path, k + 2, tok)?);
        }
    }
    if rows != n || values.len() != n * n {
        return Err(Error::format(
            path,
            format!(
                "expected {n} rows and {} values, found {rows} rows and {} values",
                n * n,
                values.len()
            ),
        ));
    }
    Ok((Field::from_interior(grid, &values)?, t))
}

pub fn write_convergence(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    write_text(path, &convergence_table(rows))
}

/// Renders a convergence table in the CSV layout of [`write_convergence`].
pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    out.push_str(CONVERGENCE_HEADER);
    out.push('\n');
    for (k, r) in rows.iter().enumerate() {
        // the first row has no predecessor, whatever its rate field holds
        let (rl2, rh1) = if k == 0 { (f64::NAN, f64::NAN) } else { (r.rate_l2, r.rate_h1) };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_real(r.coarse),
            fmt_real(r.fine),
            fmt_real(r.err_l2),
            fmt_rate(rl2),
            fmt_real(r.err_h1),
            fmt_rate(rh1)
        );
    }
    out
}

pub fn read_convergence(path: &Path) -> Result<Vec<ConvergenceRow>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    check_header(path, lines.next(), CONVERGENCE_HEADER)?;
    let rate = |ln: usize, tok: &str| {
        if tok.trim() == "-" {
            Ok(f64::NAN)
        } else {
            parse_real(path, ln, tok)
        }
    };
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::format(path, format!("line {ln}: expected 6 columns, found {}", cols.len())));
        }
        out.push(ConvergenceRow {
            coarse: parse_real(path, ln, cols[0])?,
            fine: parse_real(path, ln, cols[1])?,
            err_l2: parse_real(path, ln, cols[2])?,
            rate_l2: rate(ln, cols[3])?,
            err_h1: parse_real(path, ln, cols[4])?,
            rate_h1: rate(ln, cols[5])?,
        });
    }
    Ok(out)
}

/// Parses a flat `key = value` configuration. Blank lines and `#` comments
/// are ignored; unset keys keep the values of `ExperimentConfig::default()`.
///
/// Keys: `gamma1, gamma2, mobility, eta, c0, constraint, method, n, dt,
/// t_end, ic, snapshot_every, solver_tol, jacobi`. `ic` is `cosine`,
/// `drops`, `constant:<value>` or `file:<path>`; relative file paths are
/// resolved against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> std::result::Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::default();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ln = k + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {ln}: expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        let real = || {
            value
                .parse::<f64>()
                .map_err(|_| format!("line {ln}: `{key}` needs a number, got `{value}`"))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| format!("line {ln}: `{key}` needs a nonnegative integer, got `{value}`"))
        };
        match key {
            "gamma1" => cfg.params.gamma1 = real()?,
            "gamma2" => cfg.params.gamma2 = real()?,
            "mobility" => cfg.params.mobility = real()?,
            "eta" => cfg.params.eta = real()?,
            "c0" => cfg.params.c0 = real()?,
            "constraint" => cfg.params.constraint = value.parse().map_err(|e| format!("line {ln}: {e}"))?,
            "method" => cfg.params.method = value.parse().map_err(|e| format!("line {ln}: {e}"))?,
            "n" => cfg.n = count()?,
            "dt" => cfg.dt = real()?,
            "t_end" => cfg.t_end = real()?,
            "snapshot_every" => cfg.snapshot_every = count()?,
            "solver_tol" => cfg.solver.tol = real()?,
            "jacobi" => {
                cfg.solver.jacobi = value
                    .parse()
                    .map_err(|_| format!("line {ln}: `jacobi` needs true or false"))?
            }
            "ic" => cfg.ic = parse_ic(value, base_dir).map_err(|e| format!("line {ln}: {e}"))?,
            other => return Err(format!("line {ln}: unknown key `{other}`")),
        }
    }
    Ok(cfg)
}

fn parse_ic(value: &str, base_dir: &Path) -> std::result::Result<InitialCondition, String> {
    match value {
        "cosine" => Ok(InitialCondition::Cosine),
        "drops" => Ok(InitialCondition::Drops),
        _ => {
            if let Some(path) = value.strip_prefix("file:") {
                let path = PathBuf::from(path.trim());
                Ok(InitialCondition::File(if path.is_absolute() { path } else { base_dir.join(path) }))
            } else if let Some(c) = value.strip_prefix("constant:") {
                c.trim()
                    .parse()
                    .map(InitialCondition::Constant)
                    .map_err(|_| format!("bad constant initial value `{c}`"))
            } else {
                Err(format!("unknown initial condition `{value}`"))
            }
        }
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let cfg = parse_config(&text, base).map_err(|msg| Error::format(path, msg))?;
    cfg.validate()?;
    Ok(cfg)
}
