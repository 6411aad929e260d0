//! Plain-text serialization: MSK1 masks, FLD1 nodal fields, CSV tables,
//! and a P6 PPM heatmap. Floats travel as 17-significant-digit decimals so
//! a write-then-read round trip is exact.

use crate::eigen::EigenResult;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::mask::DomainMask;
use crate::radial::RadialSolution;
use crate::shape::HistoryRow;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

fn header_line(tag: &str, grid: &Grid) -> String {
    let [nx, ny] = grid.cells();
    let o = grid.origin();
    let h = grid.spacing();
    format!(
        "{} d=2 nx={} ny={} ox={} oy={} hx={} hy={}",
        tag,
        nx,
        ny,
        fmt_f64(o[0]),
        fmt_f64(o[1]),
        fmt_f64(h[0]),
        fmt_f64(h[1])
    )
}

fn parse_header(tag: &'static str, path: &str, line: &str) -> Result<Grid> {
    let mut nx = None;
    let mut ny = None;
    let mut ox = None;
    let mut oy = None;
    let mut hx = None;
    let mut hy = None;
    let mut parts = line.split_whitespace();
    let found = parts.next().unwrap_or("");
    if found != tag {
        return Err(Error::Format {
            format: tag,
            path: path.into(),
            message: format!("expected leading tag {}, found {:?}", tag, found),
        });
    }
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(|| Error::Format {
            format: tag,
            path: path.into(),
            message: format!("malformed header item {:?}", part),
        })?;
        let bad = |m: String| Error::Format {
            format: tag,
            path: path.into(),
            message: m,
        };
        match key {
            "d" => {
                let d: usize = value
                    .parse()
                    .map_err(|_| bad(format!("bad d {:?}", value)))?;
                if d != 2 {
                    return Err(bad(format!("dimension {} unsupported (need 2)", d)));
                }
            }
            "nx" => {
                nx = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad nx {:?}", value)))?,
                )
            }
            "ny" => {
                ny = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad ny {:?}", value)))?,
                )
            }
            "ox" => {
                ox = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad ox {:?}", value)))?,
                )
            }
            "oy" => {
                oy = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad oy {:?}", value)))?,
                )
            }
            "hx" => {
                hx = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad hx {:?}", value)))?,
                )
            }
            "hy" => {
                hy = Some(
                    value
                        .parse()
                        .map_err(|_| bad(format!("bad hy {:?}", value)))?,
                )
            }
            other => {
                return Err(bad(format!("unknown header key {:?}", other)));
            }
        }
    }
    let missing = |what: &str| Error::Format {
        format: tag,
        path: path.into(),
        message: format!("missing header key {}", what),
    };
    let nx: usize = nx.ok_or_else(|| missing("nx"))?;
    let ny: usize = ny.ok_or_else(|| missing("ny"))?;
    let hx: f64 = hx.ok_or_else(|| missing("hx"))?;
    let hy: f64 = hy.ok_or_else(|| missing("hy"))?;
    let ox: f64 = ox.ok_or_else(|| missing("ox"))?;
    let oy: f64 = oy.ok_or_else(|| missing("oy"))?;
    Grid::new([nx, ny], [hx * nx as f64, hy * ny as f64], [ox, oy])
}

/// MSK1: header line, then `ny` rows of `nx` space-separated 0/1 cells.
pub fn write_msk(mask: &DomainMask) -> String {
    let grid = mask.grid();
    let [nx, ny] = grid.cells();
    let mut out = header_line("MSK1", grid);
    out.push('\n');
    for j in 0..ny {
        for i in 0..nx {
            if i > 0 {
                out.push(' ');
            }
            out.push(if mask.cell(grid.cell_index(i, j)) {
                '1'
            } else {
                '0'
            });
        }
        out.push('\n');
    }
    out
}

pub fn read_msk(path_label: &str, text: &str) -> Result<DomainMask> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format {
        format: "MSK1",
        path: path_label.into(),
        message: "empty file".into(),
    })?;
    let grid = parse_header("MSK1", path_label, header)?;
    let [nx, ny] = grid.cells();
    let mut inside = vec![false; grid.cell_count()];
    for j in 0..ny {
        let line = lines.next().ok_or_else(|| Error::Format {
            format: "MSK1",
            path: path_label.into(),
            message: format!("missing cell row {}", j),
        })?;
        let mut count = 0;
        for (i, tok) in line.split_whitespace().enumerate() {
            if i >= nx {
                return Err(Error::Format {
                    format: "MSK1",
                    path: path_label.into(),
                    message: format!("row {} has more than {} entries", j, nx),
                });
            }
            inside[grid.cell_index(i, j)] = match tok {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Format {
                        format: "MSK1",
                        path: path_label.into(),
                        message: format!("bad cell token {:?}", other),
                    })
                }
            };
            count += 1;
        }
        if count != nx {
            return Err(Error::Format {
                format: "MSK1",
                path: path_label.into(),
                message: format!("row {} has {} entries, expected {}", j, count, nx),
            });
        }
    }
    DomainMask::from_cells(&grid, inside)
}

/// FLD1: header line, then `ny + 1` rows of `nx + 1` node values (nodes
/// sit on cell corners, hence one more line per axis than cells).
pub fn write_fld(field: &ScalarField) -> String {
    let grid = field.grid();
    let [nnx, nny] = grid.nodes();
    let mut out = header_line("FLD1", grid);
    out.push('\n');
    for j in 0..nny {
        let mut line = String::new();
        for i in 0..nnx {
            if i > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{}", fmt_f64(field.at(i, j)));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn read_fld(path_label: &str, text: &str) -> Result<ScalarField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format {
        format: "FLD1",
        path: path_label.into(),
        message: "empty file".into(),
    })?;
    let grid = parse_header("FLD1", path_label, header)?;
    let [nnx, nny] = grid.nodes();
    let mut values = vec![0.0; grid.node_count()];
    for j in 0..nny {
        let line = lines.next().ok_or_else(|| Error::Format {
            format: "FLD1",
            path: path_label.into(),
            message: format!("missing node row {}", j),
        })?;
        let mut count = 0;
        for (i, tok) in line.split_whitespace().enumerate() {
            if i >= nnx {
                return Err(Error::Format {
                    format: "FLD1",
                    path: path_label.into(),
                    message: format!("row {} has more than {} entries", j, nnx),
                });
            }
            let v: f64 = tok.parse().map_err(|_| Error::Format {
                format: "FLD1",
                path: path_label.into(),
                message: format!("bad value {:?}", tok),
            })?;
            values[grid.node_index(i, j)] = v;
            count += 1;
        }
        if count != nnx {
            return Err(Error::Format {
                format: "FLD1",
                path: path_label.into(),
                message: format!("row {} has {} entries, expected {}", j, count, nnx),
            });
        }
    }
    ScalarField::from_values(&grid, values)
}

pub fn read_msk_file(path: &Path) -> Result<DomainMask> {
    let text = std::fs::read_to_string(path)?;
    read_msk(&path.display().to_string(), &text)
}

pub fn read_fld_file(path: &Path) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path)?;
    read_fld(&path.display().to_string(), &text)
}

/// `lambda,residual,iterations,normalization` CSV (header + one row).
pub fn eigen_csv(result: &EigenResult) -> String {
    format!(
        "lambda,residual,iterations,normalization\n{},{},{},{}\n",
        fmt_f64(result.lambda),
        fmt_f64(result.residual),
        result.iterations,
        result.normalization.as_str()
    )
}

/// `iter,lambda,measure,penalty,accepted` CSV.
pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from("iter,lambda,measure,penalty,accepted\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            fmt_f64(r.lambda),
            fmt_f64(r.measure),
            fmt_f64(r.penalty),
            if r.accepted { 1 } else { 0 }
        );
    }
    out
}

/// Golden rows: `d,R,tau,lambda,slope_at_R,n_nodes`; `#` lines are
/// comments.
pub fn golden_csv(rows: &[RadialSolution], epoch_seconds: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(ts) = epoch_seconds {
        let _ = writeln!(out, "# generated epoch_seconds={}", ts);
    }
    out.push_str("d,R,tau,lambda,slope_at_R,n_nodes\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.d,
            fmt_f64(r.radius),
            fmt_f64(r.tau),
            fmt_f64(r.lambda),
            fmt_f64(r.slope_at_r),
            r.n_nodes
        );
    }
    out
}

/// One parsed golden row.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRow {
    pub d: usize,
    pub radius: f64,
    pub tau: f64,
    pub lambda: f64,
    pub slope_at_r: f64,
    pub n_nodes: usize,
}

pub fn parse_golden(path_label: &str, text: &str) -> Result<Vec<GoldenRow>> {
    let mut out = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue; // column header
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Format {
                format: "golden",
                path: path_label.into(),
                message: format!("expected 6 columns, got {}", cols.len()),
            });
        }
        let bad = |m: String| Error::Format {
            format: "golden",
            path: path_label.into(),
            message: m,
        };
        out.push(GoldenRow {
            d: cols[0]
                .parse()
                .map_err(|_| bad(format!("bad d {:?}", cols[0])))?,
            radius: cols[1]
                .parse()
                .map_err(|_| bad(format!("bad R {:?}", cols[1])))?,
            tau: cols[2]
                .parse()
                .map_err(|_| bad(format!("bad tau {:?}", cols[2])))?,
            lambda: cols[3]
                .parse()
                .map_err(|_| bad(format!("bad lambda {:?}", cols[3])))?,
            slope_at_r: cols[4]
                .parse()
                .map_err(|_| bad(format!("bad slope {:?}", cols[4])))?,
            n_nodes: cols[5]
                .parse()
                .map_err(|_| bad(format!("bad n_nodes {:?}", cols[5])))?,
        });
    }
    Ok(out)
}

/// Fixed 256-entry palette: piecewise-linear ramp through viridis-like
/// anchor colors. The anchors are the data; the expansion to 256 entries
/// is deterministic linear interpolation.
const PALETTE_ANCHORS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [72, 40, 120],
    [62, 74, 137],
    [49, 104, 142],
    [38, 130, 142],
    [31, 158, 137],
    [53, 183, 121],
    [109, 205, 89],
    [253, 231, 37],
];

pub fn palette() -> [[u8; 3]; 256] {
    let mut table = [[0u8; 3]; 256];
    let segments = PALETTE_ANCHORS.len() - 1;
    for (k, entry) in table.iter_mut().enumerate() {
        let t = k as f64 / 255.0 * segments as f64;
        let seg = (t.floor() as usize).min(segments - 1);
        let frac = t - seg as f64;
        for c in 0..3 {
            let a = PALETTE_ANCHORS[seg][c] as f64;
            let b = PALETTE_ANCHORS[seg + 1][c] as f64;
            entry[c] = (a + (b - a) * frac).round() as u8;
        }
    }
    table
}

/// Binary P6 PPM heatmap of a nodal field (one pixel per node, row 0 at
/// the bottom of the image).
pub fn field_ppm(field: &ScalarField) -> Vec<u8> {
    let grid = field.grid();
    let [nnx, nny] = grid.nodes();
    let lo = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field
        .values()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let table = palette();
    let mut out = format!("P6\n{} {}\n255\n", nnx, nny).into_bytes();
    for j in (0..nny).rev() {
        for i in 0..nnx {
            let t = ((field.at(i, j) - lo) / span).clamp(0.0, 1.0);
            let idx = (t * 255.0).round() as usize;
            out.extend_from_slice(&table[idx]);
        }
    }
    out
}
