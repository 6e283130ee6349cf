//! Low-lying spectrum of the six-node ring at the qubit design point.
//!
//! Usage: `cargo run --release --example circuit_spectrum [d] [k]`
//! with charge cutoff `d` (default 6) and eigenpair count `k` (default 4).

use ringsim::circuit::{spectrum, CircuitParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let k: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let e_cl: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.56);

    let mut p = CircuitParams::white_cross();
    p.e_cl = [e_cl; 3];
    p.d = d;
    println!("six-node ring, design point, d = {d} ({} states)", p.dim());

    let t0 = std::time::Instant::now();
    let s = spectrum(&p, k).expect("diagonalization failed");
    let dt = t0.elapsed();

    for (i, (v, r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
        println!("  E{i} = {v:+.9} GHz   (residual {r:.2e})");
    }
    println!("omega01/2pi = {:.6} GHz", s.omega01);
    println!("omega12/2pi = {:.6} GHz", s.omega12);
    println!("alpha       = {:.4}", s.alpha);
    println!("wall time   = {:.1?}", dt);
}
