//! Sampled functions on uniform grids and their projection onto the sine basis.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use illposed_core::{Basis, ModeIndex, SpectralVec, SpectrumModel};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{BenchError, Result};
use crate::report::write_atomic;

/// Endpoint samples larger than this violate the zero Dirichlet convention.
pub const BOUNDARY_TOL: f64 = 1e-12;

const UNIFORM_TOL: f64 = 1e-9;

/// What to do with samples that do not vanish on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    #[default]
    Error,
    Warn,
    Ignore,
}

/// Values on a uniform grid covering the whole domain, boundary included.
#[derive(Debug, Clone, PartialEq)]
pub enum GridFunction {
    Line {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
    /// `values[ix * ys.len() + iy]`.
    Rect {
        xs: Vec<f64>,
        ys: Vec<f64>,
        values: Vec<f64>,
    },
}

fn check_axis(name: &str, xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(BenchError::config(format!("grid axis {name} needs at least two points")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(BenchError::config(format!("grid axis {name} has non-finite coordinates")));
    }
    let n = xs.len();
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(BenchError::config(format!("grid axis {name} must be increasing")));
    }
    let tol = UNIFORM_TOL * (xs[n - 1] - xs[0]).abs().max(1.0);
    for (i, &x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * h)).abs() > tol {
            return Err(BenchError::config(format!(
                "grid axis {name} is not uniform at point {i} (x = {x})"
            )));
        }
    }
    Ok(())
}

fn uniform(n: usize, length: f64) -> Vec<f64> {
    (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()
}

impl GridFunction {
    pub fn line(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("x", &xs)?;
        if values.len() != xs.len() {
            return Err(BenchError::config("grid values and coordinates differ in length"));
        }
        Ok(GridFunction::Line { xs, values })
    }

    pub fn rect(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("x", &xs)?;
        check_axis("y", &ys)?;
        if values.len() != xs.len() * ys.len() {
            return Err(BenchError::config("grid values do not fill the rectangle"));
        }
        Ok(GridFunction::Rect { xs, ys, values })
    }

    /// `f` sampled at `points` uniform nodes of `[0, length]`.
    pub fn sample_line(points: usize, length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if points < 2 {
            return Err(BenchError::config("grid needs at least two points"));
        }
        let xs = uniform(points, length);
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::line(xs, values)
    }

    pub fn sample_rect(nx: usize, ny: usize, lx: f64, ly: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(BenchError::config("grid needs at least two points per axis"));
        }
        let xs = uniform(nx, lx);
        let ys = uniform(ny, ly);
        let mut values = Vec::with_capacity(nx * ny);
        for &x in &xs {
            for &y in &ys {
                values.push(f(x, y));
            }
        }
        Self::rect(xs, ys, values)
    }

    pub fn values(&self) -> &[f64] {
        match self {
            GridFunction::Line { values, .. } | GridFunction::Rect { values, .. } => values,
        }
    }

    /// Largest absolute sample on the boundary of the domain.
    pub fn boundary_violation(&self) -> f64 {
        match self {
            GridFunction::Line { values, .. } => values[0].abs().max(values[values.len() - 1].abs()),
            GridFunction::Rect { xs, ys, values } => {
                let (nx, ny) = (xs.len(), ys.len());
                let mut worst = 0.0f64;
                for ix in 0..nx {
                    for iy in 0..ny {
                        if ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1 {
                            worst = worst.max(values[ix * ny + iy].abs());
                        }
                    }
                }
                worst
            }
        }
    }

    /// Parses `x,value` or `x,y,value` CSV with a header row. Rectangle rows may come in
    /// any order but must cover every grid node exactly once.
    pub fn from_csv_reader(reader: impl Read, origin: &Path) -> Result<Self> {
        let input_err = |message: String| BenchError::Input {
            path: origin.to_path_buf(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| input_err(e.to_string()))?
            .iter()
            .map(str::to_ascii_lowercase)
            .collect();
        let dims = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["x", "value"] => 1,
            ["x", "y", "value"] => 2,
            other => return Err(input_err(format!("expected header x,value or x,y,value, found {other:?}"))),
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| input_err(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| input_err(format!("line {}: {e}", i + 2)))?;
            if row.len() != dims + 1 {
                return Err(input_err(format!("line {}: expected {} fields", i + 2, dims + 1)));
            }
            rows.push(row);
        }
        let wrap = |e: BenchError| match e {
            BenchError::Config(m) => input_err(m),
            other => other,
        };
        if dims == 1 {
            let xs = rows.iter().map(|r| r[0]).collect();
            let values = rows.iter().map(|r| r[1]).collect();
            return Self::line(xs, values).map_err(wrap);
        }
        let axis = |k: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (xs, ys) = (axis(0), axis(1));
        let ny = ys.len();
        let mut values = vec![f64::NAN; xs.len() * ny];
        let mut filled = vec![false; values.len()];
        for r in &rows {
            let ix = xs.partition_point(|&x| x < r[0]);
            let iy = ys.partition_point(|&y| y < r[1]);
            let at = ix * ny + iy;
            if filled[at] {
                return Err(input_err(format!("duplicate node ({}, {})", r[0], r[1])));
            }
            filled[at] = true;
            values[at] = r[2];
        }
        if filled.iter().any(|f| !f) {
            return Err(input_err("rectangle grid has missing nodes".into()));
        }
        Self::rect(xs, ys, values).map_err(wrap)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_csv_reader(file, path)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        match self {
            GridFunction::Line { xs, values } => {
                out.push_str("x,value\n");
                for (x, v) in xs.iter().zip(values) {
                    out.push_str(&format!("{x},{v}\n"));
                }
            }
            GridFunction::Rect { xs, ys, values } => {
                out.push_str("x,y,value\n");
                for (ix, x) in xs.iter().enumerate() {
                    for (iy, y) in ys.iter().enumerate() {
                        out.push_str(&format!("{x},{y},{}\n", values[ix * ys.len() + iy]));
                    }
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }
}

/// Result of [`ingest_grid`]; `warnings` is non-empty only under [`BoundaryPolicy::Warn`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub coeffs: SpectralVec<f64>,
    pub warnings: Vec<String>,
}

/// `sin(j pi i / (n - 1))` for `j = 1..=modes`, `i = 0..n`, with exact integer reduction.
fn sine_table(modes: usize, n: usize) -> Vec<Vec<f64>> {
    let period = 2 * (n - 1);
    (1..=modes)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let r = (j * i) % period;
                    (PI * r as f64 / (n - 1) as f64).sin()
                })
                .collect()
        })
        .collect()
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = h / 2.0;
    w[n - 1] = h / 2.0;
    w
}

fn max_indices(model: &SpectrumModel<f64>) -> (usize, usize) {
    model.modes().iter().fold((0, 0), |(a, b), m| match *m {
        ModeIndex::Single(j) => (a.max(j), b),
        ModeIndex::Pair(j, k) => (a.max(j), b.max(k)),
    })
}

fn check_extent(xs: &[f64], length: f64, axis: &str) -> Result<()> {
    let tol = UNIFORM_TOL * length.max(1.0);
    if xs[0].abs() > tol || (xs[xs.len() - 1] - length).abs() > tol {
        return Err(BenchError::config(format!(
            "grid axis {axis} spans [{}, {}], model domain is [0, {length}]",
            xs[0],
            xs[xs.len() - 1]
        )));
    }
    Ok(())
}

fn nyquist(points: usize, modes: usize, axis: &str) -> Result<()> {
    if points < 2 * modes + 1 {
        return Err(BenchError::config(format!(
            "grid axis {axis} has {points} points; at least {} are needed for {modes} modes",
            2 * modes + 1
        )));
    }
    Ok(())
}

/// Coefficients `<gf, e_j>` by the composite trapezoid rule against the orthonormal sine basis.
pub fn ingest_grid(gf: &GridFunction, model: &Arc<SpectrumModel<f64>>, policy: BoundaryPolicy) -> Result<Ingested> {
    let mut warnings = Vec::new();
    let violation = gf.boundary_violation();
    if violation > BOUNDARY_TOL {
        let msg = format!("boundary samples reach {violation:e}; zero Dirichlet values expected");
        match policy {
            BoundaryPolicy::Error => return Err(BenchError::config(msg)),
            BoundaryPolicy::Warn => warnings.push(msg),
            BoundaryPolicy::Ignore => {}
        }
    }
    let (mx, my) = max_indices(model);
    let coeffs = match (gf, model.basis()) {
        (GridFunction::Line { xs, values }, Basis::Sine1D { length }) => {
            check_extent(xs, *length, "x")?;
            nyquist(xs.len(), mx, "x")?;
            let n = xs.len();
            let w = trapezoid_weights(n, length / (n - 1) as f64);
            let table = sine_table(mx, n);
            let norm = (2.0 / length).sqrt();
            let by_index: Vec<f64> = table
                .iter()
                .map(|row| norm * (0..n).map(|i| w[i] * values[i] * row[i]).sum::<f64>())
                .collect();
            model
                .modes()
                .iter()
                .map(|m| match *m {
                    ModeIndex::Single(j) => by_index[j - 1],
                    ModeIndex::Pair(..) => unreachable!("1D model with pair index"),
                })
                .collect::<Vec<f64>>()
        }
        (GridFunction::Rect { xs, ys, values }, Basis::SineRect2D { lx, ly }) => {
            check_extent(xs, *lx, "x")?;
            check_extent(ys, *ly, "y")?;
            nyquist(xs.len(), mx, "x")?;
            nyquist(ys.len(), my, "y")?;
            let (nx, ny) = (xs.len(), ys.len());
            let wx = trapezoid_weights(nx, lx / (nx - 1) as f64);
            let wy = trapezoid_weights(ny, ly / (ny - 1) as f64);
            let tx = sine_table(mx, nx);
            let ty = sine_table(my, ny);
            let norm = 2.0 / (lx * ly).sqrt();
            // partial[p][iy] = sum_ix wx sin_p(x) f(x, y)
            let partial: Vec<Vec<f64>> = tx
                .iter()
                .map(|row| {
                    let mut acc = vec![0.0; ny];
                    for ix in 0..nx {
                        let a = wx[ix] * row[ix];
                        if a == 0.0 {
                            continue;
                        }
                        let line = &values[ix * ny..(ix + 1) * ny];
                        for (slot, v) in acc.iter_mut().zip(line) {
                            *slot += a * v;
                        }
                    }
                    acc
                })
                .collect();
            model
                .modes()
                .iter()
                .map(|m| match *m {
                    ModeIndex::Pair(p, q) => {
                        let row = &ty[q - 1];
                        norm * (0..ny).map(|iy| wy[iy] * row[iy] * partial[p - 1][iy]).sum::<f64>()
                    }
                    ModeIndex::Single(_) => unreachable!("2D model with single index"),
                })
                .collect()
        }
        (_, Basis::Custom) => {
            return Err(BenchError::config("a custom spectrum has no function basis to project onto"))
        }
        _ => return Err(BenchError::config("grid dimension does not match the spectrum model")),
    };
    Ok(Ingested {
        coeffs: SpectralVec::new(model, coeffs)?,
        warnings,
    })
}

/// Grid resolution for [`render_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Line(usize),
    Rect(usize, usize),
}

/// Evaluates `sum c_j e_j` on a uniform grid including the boundary.
pub fn render_grid(v: &SpectralVec<f64>, res: Resolution) -> Result<GridFunction> {
    let model = v.model();
    let (mx, my) = max_indices(model);
    match (model.basis(), res) {
        (Basis::Sine1D { length }, Resolution::Line(n)) => {
            if n < 2 {
                return Err(BenchError::config("grid needs at least two points"));
            }
            let table = sine_table(mx, n);
            let norm = (2.0 / length).sqrt();
            let mut values = vec![0.0; n];
            for (m, &c) in model.modes().iter().zip(v.coeffs()) {
                let ModeIndex::Single(j) = *m else { unreachable!() };
                for (slot, s) in values.iter_mut().zip(&table[j - 1]) {
                    *slot += norm * c * s;
                }
            }
            GridFunction::line(uniform(n, *length), values)
        }
        (Basis::SineRect2D { lx, ly }, Resolution::Rect(nx, ny)) => {
            if nx < 2 || ny < 2 {
                return Err(BenchError::config("grid needs at least two points per axis"));
            }
            let tx = sine_table(mx, nx);
            let ty = sine_table(my, ny);
            let norm = 2.0 / (lx * ly).sqrt();
            let mut values = vec![0.0; nx * ny];
            for (m, &c) in model.modes().iter().zip(v.coeffs()) {
                let ModeIndex::Pair(p, q) = *m else { unreachable!() };
                if c == 0.0 {
                    continue;
                }
                for ix in 0..nx {
                    let a = norm * c * tx[p - 1][ix];
                    for iy in 0..ny {
                        values[ix * ny + iy] += a * ty[q - 1][iy];
                    }
                }
            }
            GridFunction::rect(uniform(nx, *lx), uniform(ny, *ly), values)
        }
        (Basis::Custom, _) => Err(BenchError::config("a custom spectrum has no function basis to render")),
        _ => Err(BenchError::config("resolution does not match the spectrum model")),
    }
}
