//! Figure regeneration: one-dimensional ball volumes (`fig1`) and the shapes
//! of two-dimensional Canberra balls (`fig2`), as SVG plus raw CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::output::{csv_bytes, emit, report_bytes, write_atomic};
use super::{CliError, CliResult, ExperimentConfig};
use crate::ballgeom::volume_exact;
use crate::distances::DistanceSpec;

/// Centers and radii of the eight Canberra balls of `fig2`.
pub const FIG2_BALLS: [([f64; 2], f64); 8] = [
    ([10.0, 1.0], 1.0),
    ([10.0, 10.0], 1.0),
    ([5.0, 5.0], 1.0),
    ([50.0, 10.0], 1.0),
    ([10.0, 10.0], 0.8),
    ([10.0, 10.0], 0.6),
    ([10.0, 10.0], 0.4),
    ([10.0, 10.0], 0.2),
];
/// `fig2` window is `[0, FIG2_WINDOW]²`.
pub const FIG2_WINDOW: f64 = 60.0;
pub const FIG1_X_MAX: f64 = 10.0;
pub const FIG1_T_MAX: f64 = 0.1;
const LEVELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Fig1,
    Fig2,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: FigureKind,
    /// Grid points per axis (at least 64).
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureConfig {
    pub which: FigureKind,
    pub resolution: usize,
}

pub fn resolve(a: &FigureArgs) -> CliResult<FigureConfig> {
    let c = FigureConfig { which: a.which, resolution: a.resolution };
    validate(&c)?;
    Ok(c)
}

fn validate(c: &FigureConfig) -> CliResult<()> {
    if c.resolution < 64 {
        return Err(CliError::Usage(format!("--resolution must be at least 64, got {}", c.resolution)));
    }
    Ok(())
}

/// `fig1` grid: `x_i = 10 i / R`, `t_j = 0.1 j / R` for `i, j = 1..R-1`.
pub fn fig1_axes(resolution: usize) -> (Vec<f64>, Vec<f64>) {
    let r = resolution as f64;
    let x = (1..resolution).map(|i| FIG1_X_MAX * i as f64 / r).collect();
    let t = (1..resolution).map(|j| FIG1_T_MAX * j as f64 / r).collect();
    (x, t)
}

/// `fig2` grid: cell centers of a uniform `R × R` partition of the window.
pub fn fig2_axis(resolution: usize) -> Vec<f64> {
    (0..resolution).map(|i| FIG2_WINDOW * (i as f64 + 0.5) / resolution as f64).collect()
}

/// Membership raster of a Canberra ball; `raster[row][col]` is the point
/// `(axis[col], axis[row])`, rows in increasing second coordinate.
pub fn canberra_raster(center: [f64; 2], radius: f64, axis: &[f64]) -> Vec<Vec<bool>> {
    let spec = DistanceSpec::canberra(2);
    axis.iter()
        .map(|&v| axis.iter().map(|&u| spec.ball_contains(&center, &[u, v], radius)).collect())
        .collect()
}

#[derive(Debug, Serialize)]
struct Fig1Result {
    files: Vec<PathBuf>,
    x_range: [f64; 2],
    t_range: [f64; 2],
    log_phi_range: [f64; 2],
}

#[derive(Debug, Serialize)]
struct Panel {
    center: [f64; 2],
    radius: f64,
    cells_inside: usize,
    file: PathBuf,
}

#[derive(Debug, Serialize)]
struct Fig2Result {
    window: [f64; 2],
    panels: Vec<Panel>,
    svg: PathBuf,
}

pub fn run(config: &ExperimentConfig, c: &FigureConfig, out: Option<&Path>) -> CliResult<()> {
    validate(c)?;
    let dir = out.unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    match c.which {
        FigureKind::Fig1 => {
            let result = fig1(dir, c.resolution)?;
            emit(None, &report_bytes(config, &result)?)
        }
        FigureKind::Fig2 => {
            let result = fig2(dir, c.resolution)?;
            emit(None, &report_bytes(config, &result)?)
        }
    }
}

fn fig1(dir: &Path, resolution: usize) -> CliResult<Fig1Result> {
    let (xs, ts) = fig1_axes(resolution);
    let canberra = DistanceSpec::canberra(1);
    let euclid = DistanceSpec::lp(2.0, 1)?;
    let exact = |spec: &DistanceSpec, x: f64, t: f64| -> CliResult<f64> {
        volume_exact(spec, &[x], t)?
            .ok_or_else(|| CliError::Numerical(format!("no closed form for {} at x = {x}", spec.name())))
    };
    // grids indexed [j][i]: t along rows, x along columns
    let mut phi_c = vec![vec![0.0; xs.len()]; ts.len()];
    let mut phi_e = phi_c.clone();
    let mut rows = Vec::with_capacity(xs.len() * ts.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            phi_c[j][i] = exact(&canberra, x, t)?;
            phi_e[j][i] = exact(&euclid, x, t)?;
            rows.push((x, t, phi_c[j][i], phi_e[j][i]));
        }
    }
    let (lo, hi) = phi_c
        .iter()
        .chain(&phi_e)
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.ln()), hi.max(v.ln())));
    let csv = dir.join("fig1.csv");
    write_atomic(&csv, &csv_bytes(&["x", "t", "phi_canberra", "phi_euclidean"], rows)?)?;
    let mut files = vec![csv];
    for (name, grid) in [("canberra", &phi_c), ("euclidean", &phi_e)] {
        let path = dir.join(format!("fig1_{name}.svg"));
        let levels: Vec<Vec<usize>> =
            grid.iter().map(|row| row.iter().map(|v| quantize(v.ln(), lo, hi)).collect()).collect();
        let title = format!("{name} ball volume, x in (0, {FIG1_X_MAX}), t in (0, {FIG1_T_MAX})");
        write_atomic(&path, heatmap_svg(&title, &levels, ramp).as_bytes())?;
        files.push(path);
    }
    Ok(Fig1Result { files, x_range: [0.0, FIG1_X_MAX], t_range: [0.0, FIG1_T_MAX], log_phi_range: [lo, hi] })
}

fn fig2(dir: &Path, resolution: usize) -> CliResult<Fig2Result> {
    let axis = fig2_axis(resolution);
    let mut panels = Vec::with_capacity(FIG2_BALLS.len());
    let mut rasters = Vec::with_capacity(FIG2_BALLS.len());
    for (n, &(center, radius)) in FIG2_BALLS.iter().enumerate() {
        let raster = canberra_raster(center, radius, &axis);
        let file = dir.join(format!("fig2_panel{}.csv", n + 1));
        let rows = raster.iter().map(|row| row.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Data(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))?;
        write_atomic(&file, &bytes)?;
        panels.push(Panel { center, radius, cells_inside: raster.iter().flatten().filter(|b| **b).count(), file });
        rasters.push(raster);
    }
    let svg = dir.join("fig2.svg");
    write_atomic(&svg, fig2_svg(&rasters, &panels).as_bytes())?;
    Ok(Fig2Result { window: [0.0, FIG2_WINDOW], panels, svg })
}

fn quantize(v: f64, lo: f64, hi: f64) -> usize {
    if hi <= lo {
        return 0;
    }
    (((v - lo) / (hi - lo) * LEVELS as f64) as usize).min(LEVELS - 1)
}

/// Linear ramp from dark blue to pale yellow.
fn ramp(level: usize) -> String {
    let s = level as f64 / (LEVELS - 1) as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * s).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(8.0, 255.0), mix(48.0, 230.0), mix(107.0, 102.0))
}

/// Horizontal runs of equal level as `<rect>`s; the first row is drawn at the bottom.
fn raster_rects(svg: &mut String, levels: &[Vec<usize>], x0: usize, y0: usize, color: impl Fn(usize) -> Option<String>) {
    let h = levels.len();
    for (j, row) in levels.iter().enumerate() {
        let y = y0 + h - 1 - j;
        let mut i = 0;
        while i < row.len() {
            let mut end = i + 1;
            while end < row.len() && row[end] == row[i] {
                end += 1;
            }
            if let Some(fill) = color(row[i]) {
                let _ = writeln!(svg, r#"<rect x="{}" y="{y}" width="{}" height="1" fill="{fill}"/>"#, x0 + i, end - i);
            }
            i = end;
        }
    }
}

fn heatmap_svg(title: &str, levels: &[Vec<usize>], color: fn(usize) -> String) -> String {
    let (w, h) = (levels.first().map_or(0, Vec::len), levels.len());
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(svg, "\n<title>{title}</title>");
    raster_rects(&mut svg, levels, 0, 0, |l| Some(color(l)));
    svg.push_str("</svg>\n");
    svg
}

fn fig2_svg(rasters: &[Vec<Vec<bool>>], panels: &[Panel]) -> String {
    let r = rasters.first().map_or(0, Vec::len);
    let gap = 8;
    let (w, h) = (4 * r + 3 * gap, 2 * r + gap + 2 * 16);
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    svg.push('\n');
    for (n, (raster, p)) in rasters.iter().zip(panels).enumerate() {
        let x0 = (n % 4) * (r + gap);
        let y0 = (n / 4) * (r + gap + 16) + 16;
        let _ = writeln!(
            svg,
            r#"<text x="{x0}" y="{}" font-size="12">center ({}, {}), t = {}</text>"#,
            y0 - 4,
            p.center[0],
            p.center[1],
            p.radius
        );
        let _ = writeln!(svg, r##"<rect x="{x0}" y="{y0}" width="{r}" height="{r}" fill="#ffffff" stroke="#888888"/>"##);
        let levels: Vec<Vec<usize>> = raster.iter().map(|row| row.iter().map(|&b| usize::from(b)).collect()).collect();
        raster_rects(&mut svg, &levels, x0, y0, |l| (l == 1).then(|| "#08306b".to_string()));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_axes_stay_inside_caption_ranges() {
        let (x, t) = fig1_axes(64);
        assert_eq!(x.len(), 63);
        assert!(x.iter().all(|v| *v > 0.0 && *v < FIG1_X_MAX));
        assert!(t.iter().all(|v| *v > 0.0 && *v < FIG1_T_MAX));
    }

    #[test]
    fn smaller_ball_is_strictly_nested() {
        let axis = fig2_axis(128);
        let small = canberra_raster([10.0, 10.0], 0.2, &axis);
        let big = canberra_raster([10.0, 10.0], 0.4, &axis);
        let (mut s, mut b) = (0, 0);
        for (rs, rb) in small.iter().zip(&big) {
            for (&a, &c) in rs.iter().zip(rb) {
                assert!(!a || c);
                s += usize::from(a);
                b += usize::from(c);
            }
        }
        assert!(s > 0 && b > s);
    }

    #[test]
    fn quantize_clamps_to_top_level() {
        assert_eq!(quantize(1.0, 0.0, 1.0), LEVELS - 1);
        assert_eq!(quantize(0.0, 0.0, 1.0), 0);
        assert_eq!(ramp(0), "#08306b");
    }
}
