//! Protection map of the M-site spin chain over the (ζ/t, λ/t) plane.
//!
//! Usage: `cargo run --release --example spin_map [m] [grid]`
//!
//! Prints the fraction of grid points whose ground doublet carries all
//! three symmetry flags, and the worst sensitivity metrics inside that
//! region.

use ringsim::spin::{sweep_protection_map, SpinChainParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let grid: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(21);

    let axis: Vec<f64> =
        (0..grid).map(|i| -2.0 + 4.0 * i as f64 / (grid - 1) as f64).collect();
    let base = SpinChainParams::new(m, 1.0, 0.0, 0.0).expect("invalid chain");
    let t0 = std::time::Instant::now();
    let rows = sweep_protection_map(&base, &axis, &axis).expect("sweep failed");
    println!("{}x{grid} map for M = {m} in {:.1?}", grid, t0.elapsed());

    let protected: Vec<_> = rows.iter().filter(|r| r.metrics.all_flags()).collect();
    println!(
        "protected points: {} / {} ({:.1}%)",
        protected.len(),
        rows.len(),
        100.0 * protected.len() as f64 / rows.len() as f64
    );
    let worst_r = protected.iter().map(|r| r.metrics.r).fold(0.0f64, f64::max);
    let worst_d = protected.iter().map(|r| r.metrics.d).fold(0.0f64, f64::max);
    println!("worst R = {worst_r:.3e}, worst D = {worst_d:.3e} inside the protected region");
    if let Some(r) = protected.first() {
        println!(
            "example point zeta = {}, lambda = {}: N = ({:.6}, {:.6}), iota = ({:+.0}, {:+.0})",
            r.zeta, r.lambda, r.metrics.n0, r.metrics.n1, r.metrics.iota0, r.metrics.iota1
        );
    }
}
