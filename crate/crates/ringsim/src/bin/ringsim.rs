//! Batch front end: `ringsim run <manifest.json>` executes one experiment
//! from a JSON manifest; `ringsim render <csv>` turns a grid-complete CSV
//! into an SVG heatmap. `RINGSIM_THREADS` caps the worker-thread count.

use clap::{Parser, Subcommand};
use ringsim::csvio::{write_atomic, CsvTable};
use ringsim::heatmap::{render_heatmap, ColorScale, HeatmapOptions};
use ringsim::manifest::{Preset, RunManifest};
use ringsim::runner;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ringsim", version, about = "Six-junction ring qubit simulation runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment manifest and write its CSV artifacts.
    Run {
        /// Path to a JSON run manifest.
        manifest: PathBuf,
        /// Override the manifest's preset.
        #[arg(long)]
        preset: Option<Preset>,
        /// Override the manifest's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output root directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a grid-complete CSV as an SVG heatmap.
    Render {
        /// Input CSV with `#` metadata, header row and numeric rows.
        csv: PathBuf,
        /// Column holding the horizontal coordinate.
        #[arg(long, short = 'x')]
        x: String,
        /// Column holding the vertical coordinate.
        #[arg(long, short = 'y')]
        y: String,
        /// Column holding the plotted value.
        #[arg(long, short = 'z')]
        z: String,
        /// Output SVG path.
        #[arg(long, short = 'o')]
        output: PathBuf,
        /// Logarithmic color scale (values must be positive).
        #[arg(long)]
        log: bool,
        /// Plot title.
        #[arg(long, default_value = "")]
        title: String,
    },
}

fn init_threads() {
    if let Ok(s) = std::env::var("RINGSIM_THREADS") {
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not apply RINGSIM_THREADS={n}: {e}");
                }
            }
            _ => eprintln!("warning: ignoring invalid RINGSIM_THREADS={s:?}"),
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { manifest, preset, seed, out } => cmd_run(manifest, preset, seed, out),
        Command::Render { csv, x, y, z, output, log, title } => {
            cmd_render(csv, &x, &y, &z, output, log, title)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_run(
    path: PathBuf,
    preset: Option<Preset>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), String> {
    let mut manifest = RunManifest::load(&path).map_err(|e| e.to_string())?;
    if let Some(p) = preset {
        manifest.preset = p;
    }
    if let Some(s) = seed {
        manifest.seed = s;
    }
    if let Some(o) = out {
        manifest.out = o;
    }
    let t0 = std::time::Instant::now();
    let artifacts = runner::run(&manifest).map_err(|e| e.to_string())?;
    println!("run {} finished in {:.1?}", manifest.experiment.id(), t0.elapsed());
    for f in &artifacts.files {
        println!("  {}", f.display());
    }
    Ok(())
}

fn cmd_render(
    csv: PathBuf,
    x: &str,
    y: &str,
    z: &str,
    output: PathBuf,
    log: bool,
    title: String,
) -> Result<(), String> {
    let table = CsvTable::read(&csv).map_err(|e| e.to_string())?;
    let opts = HeatmapOptions {
        scale: if log { ColorScale::Log } else { ColorScale::Linear },
        title,
        ..HeatmapOptions::default()
    };
    let svg = render_heatmap(&table, x, y, z, &opts).map_err(|e| e.to_string())?;
    write_atomic(&output, svg.as_bytes()).map_err(|e| e.to_string())?;
    println!("wrote {}", output.display());
    Ok(())
}
