//! Classical potential landscape over the symmetric (x, y) plane plus the
//! persistent-current minima, written as CSV and SVG.
//!
//! Usage: `cargo run --release --example potential_map [resolution] [out_dir]`

use ringsim::csvio::{write_atomic, CsvTable};
use ringsim::heatmap::{render_heatmap, HeatmapOptions};
use ringsim::potential::{locate_minima, raster_plane, PotentialParams};
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let res: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(121);
    let out: PathBuf = args.next().map(Into::into).unwrap_or_else(|| "potential_map_out".into());

    let p = PotentialParams::white_cross();
    let span = std::f64::consts::PI;
    let points = raster_plane(&p, (-span, span), (-span, span), res, res);
    let mut t = CsvTable::new(&["x", "y", "V"]);
    for pt in &points {
        t.push(vec![pt.x, pt.y, pt.v]);
    }
    std::fs::create_dir_all(&out).expect("cannot create output dir");
    let csv = out.join("potential.csv");
    t.write(&csv).expect("csv write failed");
    println!("wrote {} ({} points)", csv.display(), points.len());

    let opts = HeatmapOptions { cell_px: (720 / res.max(1)).max(2) as u32, ..Default::default() };
    let svg = render_heatmap(&t, "x", "y", "V", &opts).expect("render failed");
    let svg_path = out.join("potential.svg");
    write_atomic(&svg_path, svg.as_bytes()).expect("svg write failed");
    println!("wrote {}", svg_path.display());

    let report = locate_minima(&p).expect("descent failed");
    for (name, m) in [("clockwise", &report.clockwise), ("anticlockwise", &report.anticlockwise)] {
        println!(
            "{name:>14} minimum: E = {:.6} GHz, |grad| = {:.1e}, phi = {:?}",
            m.energy,
            m.grad_norm,
            m.phi.map(|v| (v * 1e4).round() / 1e4)
        );
    }
    println!("persistent current: {:.3} nA", report.persistent_current_na);
}
