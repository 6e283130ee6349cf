//! Disorder ensemble of the qubit gap under fabrication-style parameter
//! scatter.
//!
//! Usage: `cargo run --release --example disorder_ensemble [family] [n] [d] [seed]`
//!
//! `family` is one of `junction` (relative E_J/E_C scatter), `loops`
//! (relative loop-flux scatter) or `gates` (additive gate-charge offsets).

use ringsim::circuit::CircuitParams;
use ringsim::disorder::{ensemble_run, DisorderSpec, EnsembleConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let family = args.next().unwrap_or_else(|| "junction".into());
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let d: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let spec = match family.as_str() {
        "junction" => DisorderSpec::junction(n, seed),
        "loops" => DisorderSpec::loops(n, seed),
        "gates" => DisorderSpec::gates(n, seed),
        other => panic!("unknown family {other}; use junction|loops|gates"),
    };
    let base = CircuitParams::white_cross();
    let cfg = EnsembleConfig::gap_only(spec, d);
    let t0 = std::time::Instant::now();
    let s = ensemble_run(&base, &cfg).expect("ensemble failed");
    println!(
        "{family} ensemble: {n} realizations at d = {d} in {:.1?} ({} failures)",
        t0.elapsed(),
        s.failures
    );
    for o in &s.observables {
        println!(
            "  {}: mean = {:.6}, std = {:.3e} over {} realizations",
            o.name, o.mean, o.std, o.count
        );
        let peak = o.bin_counts.iter().copied().max().unwrap_or(1).max(1);
        for (i, &c) in o.bin_counts.iter().enumerate() {
            let bar = "#".repeat(c * 40 / peak);
            println!("    [{:+.5}, {:+.5}) {bar} {c}", o.bin_edges[i], o.bin_edges[i + 1]);
        }
    }
}
