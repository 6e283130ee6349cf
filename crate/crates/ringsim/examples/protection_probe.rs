//! Per-node protection matrix elements of the qubit doublet vs charge cutoff.
//!
//! Usage: `cargo run --release --example protection_probe [d]`

use ringsim::circuit::{protection_matrix_elements, CircuitParams};

fn main() {
    let d: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let mut p = CircuitParams::white_cross();
    p.d = d;
    let pe = protection_matrix_elements(&p).expect("solve failed");
    println!("d = {d}");
    println!("|<1|N_m|0>|        = {:?}", pe.n_offdiag);
    println!("<1|N|1>-<0|N|0>    = {:?}", pe.n_diag_diff);
    println!("|<1|cos|0>|        = {:?}", pe.cos_offdiag);
    println!("|<1|sin|0>|        = {:?}", pe.sin_offdiag);
    println!("max N offdiag      = {:.3e}", pe.max_n_offdiag());
    println!("max N diag diff    = {:.3e}", pe.max_n_diag_diff());
}
