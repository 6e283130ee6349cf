//! End-to-end manifest workflow without the CLI: build a manifest in code,
//! execute it, and render one artifact as an SVG heatmap.
//!
//! Usage: `cargo run --release --example manifest_run [out_dir]`

use ringsim::csvio::{write_atomic, CsvTable};
use ringsim::heatmap::{render_heatmap, HeatmapOptions};
use ringsim::manifest::RunManifest;
use ringsim::runner;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "manifest_run_out".into());
    let json = format!(
        r#"{{
            "experiment": "spin-map",
            "m": 6,
            "zeta": {{"min": -2.0, "max": 2.0, "count": 21}},
            "lambda": {{"min": -2.0, "max": 2.0, "count": 21}},
            "seed": 1,
            "preset": "desk",
            "out": "{out}"
        }}"#
    );
    let manifest = RunManifest::from_str(&json).expect("manifest invalid");
    println!("run directory: {}", manifest.run_dir().display());

    let t0 = std::time::Instant::now();
    let artifacts = runner::run(&manifest).expect("run failed");
    println!("finished in {:.1?}", t0.elapsed());
    for f in &artifacts.files {
        println!("  {}", f.display());
    }

    let csv = artifacts.dir.join("spin_map.csv");
    let table = CsvTable::read(&csv).expect("read back failed");
    let svg = render_heatmap(
        &table,
        "zeta",
        "lambda",
        "R",
        &HeatmapOptions { title: "relaxation sensitivity R".into(), ..Default::default() },
    )
    .expect("render failed");
    let svg_path = artifacts.dir.join("spin_map_R.svg");
    write_atomic(&svg_path, svg.as_bytes()).expect("svg write failed");
    println!("  {}", svg_path.display());
}
