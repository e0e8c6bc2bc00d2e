//! Static SVG figures. Output is a pure function of the input, so identical
//! inputs give identical bytes.

use std::fmt::Write;

use cannpi_core::eval::TrajectorySample;

use crate::error::{Error, Result};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Column-major grid of non-negative cells: `values[col][row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub values: Vec<Vec<f64>>,
}

impl Heatmap {
    fn rows(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    fn check(&self) -> Result<()> {
        let rows = self.rows();
        if rows == 0 || self.values.iter().any(|c| c.len() != rows) {
            return Err(Error::Usage(format!("heatmap `{}` is empty or ragged", self.title)));
        }
        Ok(())
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Top-down x/y view of several trajectories on shared, equal-aspect axes.
pub fn xy_overlay(title: &str, series: &[(&str, &[TrajectorySample])]) -> Result<String> {
    if series.is_empty() || series.iter().any(|(_, t)| t.is_empty()) {
        return Err(Error::Usage("cannot plot an empty trajectory".into()));
    }
    let pts = series.iter().flat_map(|(_, t)| t.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in pts {
        x0 = x0.min(s.x);
        x1 = x1.max(s.x);
        y0 = y0.min(s.y);
        y1 = y1.max(s.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9) * 1.1;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let (size, pad) = (560.0, 40.0);
    let k = size / span;
    let px = |x: f64| pad + (x - cx) * k + size / 2.0;
    let py = |y: f64| pad + size / 2.0 - (y - cy) * k;

    let mut out = String::new();
    header(&mut out, size + 2.0 * pad + 160.0, size + 2.0 * pad);
    let _ = writeln!(out, r#"<text x="{pad}" y="24" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        out,
        r##"<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{pad}" y="{:.1}">x: {x0:.2} to {x1:.2} m, y: {y0:.2} to {y1:.2} m</text>"#,
        size + pad + 24.0
    );
    for (i, (label, traj)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points=""#);
        for s in traj.iter() {
            let _ = write!(out, "{:.2},{:.2} ", px(s.x), py(s.y));
        }
        let _ = writeln!(out, r#""/>"#);
        let ly = pad + 16.0 + 20.0 * i as f64;
        let lx = size + 2.0 * pad;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="3"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            lx + 26.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn draw_heatmap(out: &mut String, map: &Heatmap, x: f64, y: f64, cell_w: f64, cell_h: f64) {
    let peak = map.values.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let rows = map.rows();
    let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}">{}</text>"#, y - 6.0, escape(&map.title));
    for (c, col) in map.values.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            let level = if peak > 0.0 { (v / peak).clamp(0.0, 1.0) } else { 0.0 };
            let shade = (255.0 * (1.0 - level)).round() as u8;
            if shade == 255 {
                continue;
            }
            // Row 0 at the bottom, like a plotted axis.
            let ry = y + (rows - 1 - r) as f64 * cell_h;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{ry:.2}" width="{:.2}" height="{:.2}" fill="rgb({shade},{shade},{shade})"/>"#,
                x + c as f64 * cell_w,
                cell_w + 0.05,
                cell_h + 0.05
            );
        }
    }
    let _ = writeln!(
        out,
        r##"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#999"/>"##,
        map.values.len() as f64 * cell_w,
        rows as f64 * cell_h
    );
}

/// One heatmap, e.g. neuron index (vertical) against frame (horizontal).
pub fn heatmap(map: &Heatmap) -> Result<String> {
    map.check()?;
    let (w, h) = (720.0, 300.0);
    let cell_w = w / map.values.len() as f64;
    let cell_h = h / map.rows() as f64;
    let mut out = String::new();
    header(&mut out, w + 60.0, h + 70.0);
    draw_heatmap(&mut out, map, 30.0, 40.0, cell_w, cell_h);
    out.push_str("</svg>\n");
    Ok(out)
}

/// A grid of equally sized heatmaps, `panels[row][col]`.
pub fn heatmap_grid(title: &str, panels: &[Vec<Heatmap>]) -> Result<String> {
    let cols = panels.iter().map(Vec::len).max().unwrap_or(0);
    if cols == 0 {
        return Err(Error::Usage("no panels to plot".into()));
    }
    for m in panels.iter().flatten() {
        m.check()?;
    }
    let side = 180.0;
    let gap = 40.0;
    let mut out = String::new();
    header(
        &mut out,
        gap + cols as f64 * (side + gap),
        gap + panels.len() as f64 * (side + gap) + 10.0,
    );
    let _ = writeln!(out, r#"<text x="{gap}" y="20" font-size="14">{}</text>"#, escape(title));
    for (r, row) in panels.iter().enumerate() {
        for (c, m) in row.iter().enumerate() {
            let x = gap + c as f64 * (side + gap);
            let y = 2.0 * gap + r as f64 * (side + gap);
            draw_heatmap(&mut out, m, x, y, side / m.values.len() as f64, side / m.rows() as f64);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Axis-aligned slices through the peak voxel of an `n³` volume indexed
/// `x + n·(y + n·z)`: the xy, xz and yz planes.
pub fn peak_slices(volume: &[f64], n: usize, label: &str) -> Vec<Heatmap> {
    let idx = |x: usize, y: usize, z: usize| x + n * (y + n * z);
    let peak = (0..volume.len())
        .max_by(|&a, &b| volume[a].total_cmp(&volume[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    let (px, py, pz) = (peak % n, (peak / n) % n, peak / (n * n));
    let plane = |f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<f64>> {
        (0..n).map(|a| (0..n).map(|b| volume[f(a, b)]).collect()).collect()
    };
    vec![
        Heatmap {
            title: format!("{label} xy @ z={pz}"),
            values: plane(&|a, b| idx(a, b, pz)),
        },
        Heatmap {
            title: format!("{label} xz @ y={py}"),
            values: plane(&|a, b| idx(a, py, b)),
        },
        Heatmap {
            title: format!("{label} yz @ x={px}"),
            values: plane(&|a, b| idx(px, a, b)),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: u64) -> Vec<TrajectorySample> {
        (0..n)
            .map(|i| TrajectorySample { frame: i, t: i as f64, x: i as f64, y: 0.5 * i as f64, z: 0.0, yaw: 0.0 })
            .collect()
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        assert!(xy_overlay("t", &[("a", &[])]).is_err());
        assert!(xy_overlay("t", &[]).is_err());
    }

    #[test]
    fn identical_trajectories_draw_identical_paths() {
        let t = line(10);
        let svg = xy_overlay("t", &[("a", &t), ("b", &t)]).unwrap();
        let paths: Vec<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| l.split("points=").nth(1).unwrap())
            .collect();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0], paths[1]);
        assert_eq!(svg, xy_overlay("t", &[("a", &t), ("b", &t)]).unwrap());
    }

    #[test]
    fn slices_pass_through_the_peak() {
        let n = 5;
        let mut v = vec![0.0; n * n * n];
        v[1 + n * (2 + n * 3)] = 1.0;
        let s = peak_slices(&v, n, "b");
        assert_eq!(s[0].values[1][2], 1.0);
        assert_eq!(s[1].values[1][3], 1.0);
        assert_eq!(s[2].values[2][3], 1.0);
        assert!(s[0].title.ends_with("z=3"));
    }

    #[test]
    fn ragged_heatmaps_are_rejected() {
        let m = Heatmap { title: "x".into(), values: vec![vec![1.0], vec![]] };
        assert!(heatmap(&m).is_err());
    }
}
