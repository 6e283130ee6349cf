//! Transition-frequency spectroscopy versus total gate-charge and flux
//! offsets around the operating point.
//!
//! Usage: `cargo run --release --example spectroscopy [d] [flux_points]`
//!
//! Reproduces the two characteristic behaviours at the operating point:
//! the qubit frequency is first-order flat in total gate charge, while a
//! total flux offset tilts the double well and splits the doublet at a
//! slope set by the persistent current.

use ringsim::circuit::{spectroscopy_sweep, CircuitParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let nphi: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(13);

    let mut p = CircuitParams::white_cross();
    p.d = d;

    // total charge sweep at zero flux offset (0.05 Cooper pair per gate at
    // the top; collective offsets act much more strongly than single-gate
    // ones)
    let dq: Vec<f64> = (0..7).map(|i| 0.05 * i as f64).collect();
    let t0 = std::time::Instant::now();
    let rows = spectroscopy_sweep(&p, &dq, &[0.0]).expect("charge sweep failed");
    println!("charge sweep at d = {d} ({:.1?})", t0.elapsed());
    let f0 = rows[0].transitions[0];
    for r in &rows {
        println!(
            "  dq_tot = {:4.1} CP   f01 = {:.6} GHz   shift = {:+.2e}",
            r.dq_tot,
            r.transitions[0],
            r.transitions[0] - f0
        );
    }

    // flux sweep at zero charge offset
    let dphi: Vec<f64> = (0..nphi).map(|i| 0.12 * i as f64 / (nphi - 1) as f64).collect();
    let t1 = std::time::Instant::now();
    let rows = spectroscopy_sweep(&p, &[0.0], &dphi).expect("flux sweep failed");
    println!("flux sweep ({:.1?})", t1.elapsed());
    for r in &rows {
        println!(
            "  dphi_tot = {:.4} Phi0   f01..f04 = {:.4} {:.4} {:.4} {:.4} GHz",
            r.dphi_tot, r.transitions[0], r.transitions[1], r.transitions[2], r.transitions[3]
        );
    }
    let slope = (rows[1].transitions[0] - rows[0].transitions[0]) / (dphi[1] - dphi[0]);
    println!("initial flux slope: {slope:.2} GHz/Phi0");
}
