//! Minimal self-contained SVG heatmaps for grid-complete CSV tables.

use crate::csvio::CsvTable;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeatmapError {
    #[error(transparent)]
    Csv(#[from] crate::csvio::CsvError),
    #[error("grid is ragged: expected {expected} points ({nx}×{ny}), found {found}")]
    RaggedGrid { expected: usize, found: usize, nx: usize, ny: usize },
    #[error("duplicate grid point at ({0}, {1})")]
    DuplicatePoint(f64, f64),
    #[error("log scale requires positive values, found {0}")]
    NonPositiveLog(f64),
    #[error("empty table")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorScale {
    Linear,
    Log,
}

/// Rendering options.
#[derive(Debug, Clone)]
pub struct HeatmapOptions {
    pub scale: ColorScale,
    pub cell_px: u32,
    pub title: String,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        Self { scale: ColorScale::Linear, cell_px: 18, title: String::new() }
    }
}

/// Five-anchor sequential palette (dark violet → yellow).
const ANCHORS: [(f64, [f64; 3]); 5] = [
    (0.00, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.50, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.00, [253.0, 231.0, 37.0]),
];

/// Map t ∈ [0, 1] to an `#rrggbb` color.
pub fn palette(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mut rgb = ANCHORS[0].1;
    for w in ANCHORS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t >= t0 && t <= t1 {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            rgb = [
                c0[0] + f * (c1[0] - c0[0]),
                c0[1] + f * (c1[1] - c0[1]),
                c0[2] + f * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    format!("#{:02x}{:02x}{:02x}", rgb[0].round() as u8, rgb[1].round() as u8, rgb[2].round() as u8)
}

fn sorted_unique(vals: &[f64]) -> Vec<f64> {
    let mut v = vals.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Render a heatmap of column `z` over the grid spanned by columns `x`, `y`.
/// The table must contain every (x, y) combination exactly once.
pub fn render_heatmap(
    table: &CsvTable,
    x: &str,
    y: &str,
    z: &str,
    opts: &HeatmapOptions,
) -> Result<String, HeatmapError> {
    let xs = table.column(x)?;
    let ys = table.column(y)?;
    let zs = table.column(z)?;
    if xs.is_empty() {
        return Err(HeatmapError::Empty);
    }
    let gx = sorted_unique(&xs);
    let gy = sorted_unique(&ys);
    let (nx, ny) = (gx.len(), gy.len());
    if nx * ny != xs.len() {
        return Err(HeatmapError::RaggedGrid { expected: nx * ny, found: xs.len(), nx, ny });
    }
    let mut grid: Vec<Option<f64>> = vec![None; nx * ny];
    for ((&xv, &yv), &zv) in xs.iter().zip(&ys).zip(&zs) {
        let i = gx.binary_search_by(|p| p.total_cmp(&xv)).unwrap();
        let j = gy.binary_search_by(|p| p.total_cmp(&yv)).unwrap();
        if grid[j * nx + i].replace(zv).is_some() {
            return Err(HeatmapError::DuplicatePoint(xv, yv));
        }
    }

    let transform = |v: f64| -> Result<f64, HeatmapError> {
        match opts.scale {
            ColorScale::Linear => Ok(v),
            ColorScale::Log => {
                if v <= 0.0 {
                    Err(HeatmapError::NonPositiveLog(v))
                } else {
                    Ok(v.ln())
                }
            }
        }
    };
    let mut tvals = Vec::with_capacity(nx * ny);
    for v in grid.iter().flatten() {
        tvals.push(transform(*v)?);
    }
    let (lo, hi) = tvals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
        (l.min(v), h.max(v))
    });
    let span = if hi > lo { hi - lo } else { 1.0 };

    let cell = opts.cell_px as usize;
    let margin = 50usize;
    let w = margin * 2 + nx * cell;
    let h = margin * 2 + ny * cell;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    if !opts.title.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
            w / 2,
            xml_escape(&opts.title)
        ));
    }
    // cells, y axis upward
    let mut t_iter = tvals.iter();
    for j in 0..ny {
        for i in 0..nx {
            let t = (t_iter.next().unwrap() - lo) / span;
            let px = margin + i * cell;
            let py = margin + (ny - 1 - j) * cell;
            svg.push_str(&format!(
                "<rect class=\"cell\" x=\"{px}\" y=\"{py}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\"/>\n",
                palette(t)
            ));
        }
    }
    // axis labels: min/max of each coordinate
    let fmt = |v: f64| format!("{v:.4}");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        margin,
        h - margin / 2,
        fmt(gx[0])
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        margin + nx * cell,
        h - margin / 2,
        fmt(gx[nx - 1])
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        margin - 5,
        margin + ny * cell,
        fmt(gy[0])
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        margin - 5,
        margin + 12,
        fmt(gy[ny - 1])
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{} / {} / {}</text>\n",
        margin,
        margin - 8,
        xml_escape(x),
        xml_escape(y),
        xml_escape(z)
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_table(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> CsvTable {
        let mut t = CsvTable::new(&["x", "y", "v"]);
        for i in 0..nx {
            for j in 0..ny {
                let (x, y) = (i as f64, j as f64);
                t.push(vec![x, y, f(x, y)]);
            }
        }
        t
    }

    fn cell_fills(svg: &str) -> Vec<String> {
        svg.lines()
            .filter(|l| l.contains("class=\"cell\""))
            .map(|l| {
                let i = l.find("fill=\"").unwrap() + 6;
                l[i..i + 7].to_string()
            })
            .collect()
    }

    #[test]
    fn two_by_two_has_four_cells() {
        let t = grid_table(2, 2, |x, y| x + y);
        let svg = render_heatmap(&t, "x", "y", "v", &HeatmapOptions::default()).unwrap();
        assert_eq!(cell_fills(&svg).len(), 4);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn constant_field_single_color() {
        let t = grid_table(3, 4, |_, _| 7.5);
        let svg = render_heatmap(&t, "x", "y", "v", &HeatmapOptions::default()).unwrap();
        let fills = cell_fills(&svg);
        assert_eq!(fills.len(), 12);
        assert!(fills.iter().all(|f| f == &fills[0]));
    }

    #[test]
    fn monotone_field_monotone_palette_parameter() {
        // palette itself: monotone anchor interpolation means distinct t map
        // to distinct colors along the anchor path; check sampled ordering
        // through the red channel differences at the ends.
        let c0 = palette(0.0);
        let c1 = palette(1.0);
        assert_ne!(c0, c1);
        // monotone z across one row: colors follow the palette order
        let t = grid_table(5, 1, |x, _| x);
        let svg = render_heatmap(&t, "x", "y", "v", &HeatmapOptions::default()).unwrap();
        let fills = cell_fills(&svg);
        let expected: Vec<String> = (0..5).map(|i| palette(i as f64 / 4.0)).collect();
        assert_eq!(fills, expected);
    }

    #[test]
    fn ragged_grid_rejected() {
        let mut t = grid_table(2, 2, |x, y| x * y);
        t.rows.pop();
        assert!(matches!(
            render_heatmap(&t, "x", "y", "v", &HeatmapOptions::default()),
            Err(HeatmapError::RaggedGrid { .. })
        ));
        let mut t2 = grid_table(2, 2, |x, y| x * y);
        t2.rows[3] = t2.rows[0].clone();
        assert!(render_heatmap(&t2, "x", "y", "v", &HeatmapOptions::default()).is_err());
    }

    #[test]
    fn log_scale_guards() {
        let t = grid_table(2, 2, |x, y| x + y); // contains 0
        let mut o = HeatmapOptions::default();
        o.scale = ColorScale::Log;
        assert!(matches!(
            render_heatmap(&t, "x", "y", "v", &o),
            Err(HeatmapError::NonPositiveLog(_))
        ));
        let t2 = grid_table(2, 2, |x, y| 1.0 + x + y);
        assert!(render_heatmap(&t2, "x", "y", "v", &o).is_ok());
    }

    #[test]
    fn palette_endpoints_and_clamp() {
        assert_eq!(palette(-1.0), palette(0.0));
        assert_eq!(palette(2.0), palette(1.0));
        assert_eq!(palette(0.0), "#440154");
        assert_eq!(palette(1.0), "#fde725");
    }
}
