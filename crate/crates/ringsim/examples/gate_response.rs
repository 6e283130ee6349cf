//! ω01 response to a single-gate charge offset, cold solves per point.
//!
//! Usage: `cargo run --release --example gate_response [d]`

use ringsim::circuit::{eigenpairs, CircuitParams};

fn main() {
    let d: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let mut base = CircuitParams::white_cross();
    base.d = d;
    let e0 = eigenpairs(&base, 2).unwrap();
    let w0 = e0.values[1] - e0.values[0];
    println!("d = {d}, omega01(0) = {w0:.9} GHz");
    for h in [1e-5, 1e-4, 1e-3] {
        for sign in [1.0, -1.0] {
            let mut p = base.clone();
            p.ng[0] += sign * h;
            let e = eigenpairs(&p, 2).unwrap();
            let w = e.values[1] - e.values[0];
            println!("  ng0 {:+9.1e}: omega01 = {:.9} GHz   delta = {:+.3e}", sign * h, w, w - w0);
        }
    }
}
