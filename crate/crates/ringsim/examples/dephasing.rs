//! Monte Carlo pure dephasing of the qubit from 1/f charge or flux noise.
//!
//! Usage: `cargo run --release --example dephasing [charge|flux] [d_fit] [ensemble] [diag]`
//!
//! The optional trailing `diag` skips cross-channel curvature stencils,
//! which cuts the surface-fit cost by roughly 4× at large cutoffs.

use ringsim::noise::{
    charge_channels, dephasing_monte_carlo, fit_response_surface_with, flux_channels,
    DephasingConfig, CHARGE_NOISE_A_TOTAL, FLUX_NOISE_A_TOTAL,
};
use ringsim::circuit::CircuitParams;

fn main() {
    let mut args = std::env::args().skip(1);
    let family = args.next().unwrap_or_else(|| "charge".into());
    let d_fit: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let ensemble: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(400);
    let cross_terms = args.next().map(|s| s != "diag").unwrap_or(true);

    let (channels, total_a) = match family.as_str() {
        "charge" => (charge_channels(), CHARGE_NOISE_A_TOTAL),
        "flux" => (flux_channels(), FLUX_NOISE_A_TOTAL),
        other => panic!("unknown family {other}; use charge|flux"),
    };

    let base = CircuitParams::white_cross();
    let t0 = std::time::Instant::now();
    let rs = fit_response_surface_with(&base, &channels, None, d_fit, cross_terms)
        .expect("surface fit failed");
    println!("{family} response surface at d_fit = {d_fit} ({:.1?})", t0.elapsed());
    println!("  omega_ref = {:.6} GHz", rs.omega_ref);
    for (i, l) in rs.labels.iter().enumerate() {
        println!("  {l:8}  D1 = {:+.4e} GHz/unit   D2 = {:+.4e} GHz/unit^2", rs.d1[i], rs.d2[(i, i)]);
    }

    let mut cfg = DephasingConfig::desk(total_a, 2024);
    cfg.ensemble = ensemble;
    if family == "flux" {
        // flux decay is slower; keep a longer integration window
        cfg.t_count = 40_000;
    }
    let t1 = std::time::Instant::now();
    let res = dephasing_monte_carlo(&rs, &cfg).expect("monte carlo failed");
    println!("monte carlo: {} trajectories ({:.1?})", cfg.ensemble, t1.elapsed());
    let bound = if res.t_phi.lower_bound { " (lower bound: no 1/e crossing)" } else { "" };
    println!("T_phi^{} = {:.4} ms{bound}", &family[..1], res.t_phi.t_phi * 1e3);
}
