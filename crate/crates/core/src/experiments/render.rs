//! SVG and CSV exporters for value heatmaps, path overlays and spider plots.
//!
//! SVGs are version 1.1 with 32 px cells. All numbers are printed with fixed
//! precision so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::suite::{GammaRegime, SpiderTable};
use crate::maze::{CellKind, Maze, StateId};
use crate::numfmt::{fixed, sig17};
use crate::solver::ValueFunction;

pub const CELL_PX: usize = 32;

/// Heatmap ramp endpoints: lightest at min V, darkest at max V.
pub const RAMP_LOW: (u8, u8, u8) = (0xf7, 0xfb, 0xff);
pub const RAMP_HIGH: (u8, u8, u8) = (0x08, 0x30, 0x6b);
pub const WALL_COLOR: &str = "#333333";
pub const PATH_COLOR: &str = "#d62828";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), ExportError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| ExportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn svg_open(out: &mut String, width: usize, height: usize) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
}

/// Linear interpolation between the ramp endpoints, `t` clamped to [0, 1].
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(RAMP_LOW.0, RAMP_HIGH.0),
        mix(RAMP_LOW.1, RAMP_HIGH.1),
        mix(RAMP_LOW.2, RAMP_HIGH.2)
    )
}

fn kind_color(kind: CellKind) -> &'static str {
    match kind {
        CellKind::Free => "#ffffff",
        CellKind::Wall => WALL_COLOR,
        CellKind::SpeedBump => "#f4a261",
        CellKind::OilSpill => "#6a4c93",
        CellKind::Start => "#2a9d8f",
        CellKind::Goal => "#e9c46a",
    }
}

fn cell_label(out: &mut String, maze: &Maze, s: StateId, text: &str, color: &str) {
    let (r, c) = maze.row_col(s);
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\" fill=\"{color}\">{text}</text>",
        c * CELL_PX + CELL_PX / 2,
        r * CELL_PX + CELL_PX / 2 + 5
    );
}

/// Value heatmap SVG. Constant values all take the low end of the ramp.
pub fn heatmap_svg(maze: &Maze, v: &ValueFunction) -> Result<String, ExportError> {
    if v.cells().len() != maze.cell_count() {
        return Err(ExportError::Input(format!(
            "value function covers {} cells, maze has {}",
            v.cells().len(),
            maze.cell_count()
        )));
    }
    let states = maze.states();
    let (lo, hi) = states.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
        (lo.min(v.get(s)), hi.max(v.get(s)))
    });
    let span = hi - lo;
    let (w, h) = (maze.width() * CELL_PX, maze.height() * CELL_PX);
    let mut out = String::new();
    svg_open(&mut out, w, h);
    for i in 0..maze.cell_count() {
        let s = StateId(i);
        let (r, c) = maze.row_col(s);
        let fill = if maze.kind(s).is_traversable() {
            ramp_color(if span > 0.0 { (v.get(s) - lo) / span } else { 0.0 })
        } else {
            WALL_COLOR.to_string()
        };
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{CELL_PX}\" height=\"{CELL_PX}\" fill=\"{fill}\" stroke=\"#999999\" stroke-width=\"0.5\"/>",
            c * CELL_PX,
            r * CELL_PX
        );
    }
    cell_label(&mut out, maze, maze.start(), "S", "#e63946");
    cell_label(&mut out, maze, maze.goal(), "G", "#e63946");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes `<stem>.csv` (`state,row,col,value`) and `<stem>.svg`.
pub fn export_heatmap(maze: &Maze, v: &ValueFunction, stem: &Path) -> Result<(), ExportError> {
    let svg = heatmap_svg(maze, v)?;
    write_file(&stem.with_extension("csv"), &v.to_csv(maze))?;
    write_file(&stem.with_extension("svg"), &svg)
}

fn check_path(maze: &Maze, path: &[StateId]) -> Result<(), ExportError> {
    if path.is_empty() {
        return Err(ExportError::Input("path is empty".into()));
    }
    for &s in path {
        if !maze.is_state(s) {
            return Err(ExportError::Input(format!("{s} is not a state of the maze")));
        }
    }
    for (k, w) in path.windows(2).enumerate() {
        let (r0, c0) = maze.row_col(w[0]);
        let (r1, c1) = maze.row_col(w[1]);
        if r0.abs_diff(r1) + c0.abs_diff(c1) > 1 {
            return Err(ExportError::Input(format!(
                "steps {k} and {} ({} -> {}) are not adjacent",
                k + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

/// Maze drawing with the path as a polyline through cell centres.
pub fn path_overlay_svg(maze: &Maze, path: &[StateId]) -> Result<String, ExportError> {
    check_path(maze, path)?;
    let (w, h) = (maze.width() * CELL_PX, maze.height() * CELL_PX);
    let mut out = String::new();
    svg_open(&mut out, w, h);
    for i in 0..maze.cell_count() {
        let s = StateId(i);
        let (r, c) = maze.row_col(s);
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{CELL_PX}\" height=\"{CELL_PX}\" fill=\"{}\" stroke=\"#999999\" stroke-width=\"0.5\"/>",
            c * CELL_PX,
            r * CELL_PX,
            kind_color(maze.kind(s))
        );
    }
    let centre = |s: StateId| {
        let (r, c) = maze.row_col(s);
        (c * CELL_PX + CELL_PX / 2, r * CELL_PX + CELL_PX / 2)
    };
    let points: Vec<String> = path
        .iter()
        .map(|&s| {
            let (x, y) = centre(s);
            format!("{x},{y}")
        })
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{PATH_COLOR}\" stroke-width=\"4\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>",
        points.join(" ")
    );
    for (s, fill) in [(maze.start(), "#2a9d8f"), (maze.goal(), "#e9c46a")] {
        let (x, y) = centre(s);
        let _ = writeln!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"9\" fill=\"{fill}\" stroke=\"#000000\" stroke-width=\"1.5\"/>"
        );
    }
    cell_label(&mut out, maze, maze.start(), "S", "#000000");
    cell_label(&mut out, maze, maze.goal(), "G", "#000000");
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn export_path_overlay(maze: &Maze, path: &[StateId], out: &Path) -> Result<(), ExportError> {
    let svg = path_overlay_svg(maze, path)?;
    write_file(out, &svg)
}

/// `step,state,row,col` lines for a path.
pub fn path_csv(maze: &Maze, path: &[StateId]) -> String {
    let mut out = String::from("step,state,row,col\n");
    for (k, &s) in path.iter().enumerate() {
        let (r, c) = maze.row_col(s);
        let _ = writeln!(out, "{k},{},{r},{c}", s.0);
    }
    out
}

/// Reads the CSV written by [`path_csv`].
pub fn parse_path_csv(text: &str) -> Result<Vec<StateId>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "step,state,row,col" => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .nth(1)
                .and_then(|f| f.trim().parse().ok())
                .map(StateId)
                .ok_or_else(|| format!("line {}: bad state field", i + 2))
        })
        .collect()
}

const SPIDER_SIZE: f64 = 420.0;
const SPIDER_RADIUS: f64 = 150.0;

/// Radar chart for one maze: 12 axes, low and high gamma traces, radii
/// normalised over the maze's 24 values. Equal values sit on the outer ring.
pub fn spider_svg(table: &SpiderTable, maze_id: usize) -> Result<String, ExportError> {
    let (low, high) = table
        .traces(maze_id)
        .ok_or_else(|| ExportError::Input(format!("table has no complete data for maze {maze_id}")))?;
    let all = low.iter().chain(high.iter());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = hi - lo;
    let norm = |x: f64| if span > 0.0 { (x - lo) / span } else { 1.0 };
    let centre = SPIDER_SIZE / 2.0;
    let axes = low.len();
    let point = |k: usize, r: f64| {
        let angle = std::f64::consts::TAU * k as f64 / axes as f64 - std::f64::consts::FRAC_PI_2;
        (centre + r * angle.cos(), centre + r * angle.sin())
    };
    let size = SPIDER_SIZE as usize;
    let mut out = String::new();
    svg_open(&mut out, size, size + 40);
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{size}\" height=\"{}\" fill=\"#ffffff\"/>", size + 40);
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">maze {maze_id}</text>",
        fixed(centre, 3)
    );
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let pts: Vec<String> = (0..axes)
            .map(|k| {
                let (x, y) = point(k, ring * SPIDER_RADIUS);
                format!("{},{}", fixed(x, 3), fixed(y, 3))
            })
            .collect();
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>",
            pts.join(" ")
        );
    }
    for k in 0..axes {
        let (x, y) = point(k, SPIDER_RADIUS);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"1\"/>",
            fixed(centre, 3),
            fixed(centre, 3),
            fixed(x, 3),
            fixed(y, 3)
        );
        let (lx, ly) = point(k, SPIDER_RADIUS + 18.0);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">R{k}</text>",
            fixed(lx, 3),
            fixed(ly + 4.0, 3)
        );
    }
    for (values, color, regime) in [(&low, "#1f77b4", GammaRegime::Low), (&high, "#ff7f0e", GammaRegime::High)] {
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let (px, py) = point(k, norm(x) * SPIDER_RADIUS);
                format!("{},{}", fixed(px, 3), fixed(py, 3))
            })
            .collect();
        let _ = writeln!(
            out,
            "<polygon class=\"{}\" points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"{color}\" stroke-width=\"2\"/>",
            regime.name(),
            pts.join(" ")
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"10\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">centre = {}, outer ring = {}</text>",
        size + 12,
        sig17(lo),
        sig17(hi)
    );
    let _ = writeln!(
        out,
        "<text x=\"10\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\"><tspan fill=\"#1f77b4\">low gamma</tspan> / <tspan fill=\"#ff7f0e\">high gamma</tspan></text>",
        size + 30
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes `spider.csv` and `spider_maze<k>.svg` for every maze into `dir`.
/// Returns the SVG paths written.
pub fn export_spider(table: &SpiderTable, dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
    table
        .check_complete()
        .map_err(ExportError::Input)?;
    write_file(&dir.join("spider.csv"), &table.to_csv())?;
    let mut written = Vec::new();
    for maze_id in table.maze_ids() {
        let path = dir.join(format!("spider_maze{maze_id}.svg"));
        write_file(&path, &spider_svg(table, maze_id)?)?;
        written.push(path);
    }
    Ok(written)
}
