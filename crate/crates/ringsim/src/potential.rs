//! Classical potential landscape of the six-node ring.
//!
//! The potential over the node phases φ_1…φ_6 (stored 0-based, `phi[n]` is
//! φ_{n+1}) is the sum of the three cosine families:
//!
//! V = −Σ_n E_Jr cos φ_n − Σ_m E_Ja cos(φ_{m+1} − φ_m − φ_a,m)
//!     − Σ_j E_Jl cos(φ_b − φ_a − φ_l,j)
//!
//! with the same junction topology and flux phases as the quantum model.
//! Global minima lie in the plane φ_n = n·x + y; the (x, y) raster and the
//! y = 0 line cut reproduce the landscape figures.

use crate::circuit::{compose_flux_offsets, outer_junction_nodes, CircuitParams, NODES, OUTER};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TAU: f64 = std::f64::consts::TAU;

/// Critical current of a junction with Josephson energy E_J/h in GHz:
/// I_c = 2e·E_J/ħ = 4πe·(E_J/h), in amperes per GHz.
pub const CRITICAL_CURRENT_PER_GHZ: f64 = 4.0 * std::f64::consts::PI * 1.602_176_634e-19 * 1e9;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("invalid potential parameters: {0}")]
    InvalidParams(String),
    #[error("minimization did not converge within {0} iterations (|grad| = {1:.3e})")]
    NoConvergence(usize, f64),
}

/// A point in the six-dimensional phase space, radians.
pub type PhasePoint = [f64; NODES];

/// Junction energies and flux phase offsets entering the classical potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub e_jr: [f64; NODES],
    pub e_ja: [f64; NODES],
    pub e_jl: [f64; OUTER],
    /// Azimuthal flux phases 2πΦ_a/Φ0, radians.
    pub phase_a: [f64; NODES],
    /// Outer flux phases 2πΦ_l/Φ0, radians.
    pub phase_l: [f64; OUTER],
}

impl PotentialParams {
    /// Flux-free ring with uniform junction families.
    pub fn flux_free(e_jr: f64, e_ja: f64, e_jl: f64) -> Self {
        Self {
            e_jr: [e_jr; NODES],
            e_ja: [e_ja; NODES],
            e_jl: [e_jl; OUTER],
            phase_a: [0.0; NODES],
            phase_l: [0.0; OUTER],
        }
    }

    /// Extract the classical potential of a full circuit parameter set,
    /// composing the junction flux phases from the loop fluxes.
    pub fn from_circuit(p: &CircuitParams) -> Self {
        let f = compose_flux_offsets(&p.phi_inner, &p.phi_outer);
        Self {
            e_jr: p.e_jr,
            e_ja: p.e_ja,
            e_jl: p.e_jl,
            phase_a: f.phase_a,
            phase_l: f.phase_l,
        }
    }

    /// The qubit design point at its operating fluxes.
    pub fn white_cross() -> Self {
        Self::from_circuit(&CircuitParams::white_cross())
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        for &e in self.e_jr.iter().chain(&self.e_ja).chain(self.e_jl.iter()) {
            if !(e > 0.0) || !e.is_finite() {
                return Err(PotentialError::InvalidParams(format!("non-positive Josephson energy {e}")));
            }
        }
        Ok(())
    }
}

/// V(φ), GHz.
pub fn potential(p: &PotentialParams, phi: &PhasePoint) -> f64 {
    let mut v = 0.0;
    for n in 0..NODES {
        v -= p.e_jr[n] * phi[n].cos();
        let n1 = (n + 1) % NODES;
        v -= p.e_ja[n] * (phi[n1] - phi[n] - p.phase_a[n]).cos();
    }
    for j in 0..OUTER {
        let (a, b) = outer_junction_nodes(j);
        v -= p.e_jl[j] * (phi[b] - phi[a] - p.phase_l[j]).cos();
    }
    v
}

/// ∇V(φ), GHz/radian, closed form.
pub fn gradient(p: &PotentialParams, phi: &PhasePoint) -> PhasePoint {
    let mut g = [0.0; NODES];
    for n in 0..NODES {
        g[n] += p.e_jr[n] * phi[n].sin();
        let n1 = (n + 1) % NODES;
        let s = p.e_ja[n] * (phi[n1] - phi[n] - p.phase_a[n]).sin();
        g[n1] += s;
        g[n] -= s;
    }
    for j in 0..OUTER {
        let (a, b) = outer_junction_nodes(j);
        let s = p.e_jl[j] * (phi[b] - phi[a] - p.phase_l[j]).sin();
        g[b] += s;
        g[a] -= s;
    }
    g
}

/// Embed plane coordinates into phase space: φ_n = n·x + y with n = 1…6.
pub fn embed(x: f64, y: f64) -> PhasePoint {
    std::array::from_fn(|n| (n + 1) as f64 * x + y)
}

/// V restricted to the plane φ_n = n·x + y.
pub fn plane_potential(p: &PotentialParams, x: f64, y: f64) -> f64 {
    potential(p, &embed(x, y))
}

fn norm(v: &PhasePoint) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Analytic Hessian of V, GHz/radian².
pub fn hessian(p: &PotentialParams, phi: &PhasePoint) -> nalgebra::Matrix6<f64> {
    let mut h = nalgebra::Matrix6::<f64>::zeros();
    for n in 0..NODES {
        h[(n, n)] += p.e_jr[n] * phi[n].cos();
        let n1 = (n + 1) % NODES;
        let c = p.e_ja[n] * (phi[n1] - phi[n] - p.phase_a[n]).cos();
        h[(n1, n1)] += c;
        h[(n, n)] += c;
        h[(n1, n)] -= c;
        h[(n, n1)] -= c;
    }
    for j in 0..OUTER {
        let (a, b) = outer_junction_nodes(j);
        let c = p.e_jl[j] * (phi[b] - phi[a] - p.phase_l[j]).cos();
        h[(a, a)] += c;
        h[(b, b)] += c;
        h[(a, b)] -= c;
        h[(b, a)] -= c;
    }
    h
}

/// Result of a descent run.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub phi: PhasePoint,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

pub const GRAD_TOL: f64 = 1e-9;
const MAX_DESCENT_ITERS: usize = 200_000;

/// Gradient descent with backtracking line search from `start` to a
/// stationary point with ‖∇V‖ < 1e-9.
pub fn find_minimum(p: &PotentialParams, start: &PhasePoint) -> Result<Minimum, PotentialError> {
    p.validate()?;
    let mut phi = *start;
    let mut v = potential(p, &phi);
    let mut step = 0.1;
    for it in 0..MAX_DESCENT_ITERS {
        let g = gradient(p, &phi);
        let gn = norm(&g);
        if gn < GRAD_TOL {
            return Ok(Minimum { phi, energy: v, grad_norm: gn, iterations: it });
        }
        // In the convex tail a Newton step polishes to the tolerance in a
        // handful of quadratically convergent iterations.
        if gn < 1e-2 {
            let h = hessian(p, &phi);
            if let Some(chol) = nalgebra::Cholesky::new(h) {
                let delta = chol.solve(&nalgebra::Vector6::from_row_slice(&g));
                let trial: PhasePoint = std::array::from_fn(|n| phi[n] - delta[n]);
                let vt = potential(p, &trial);
                if vt <= v + 1e-12 {
                    phi = trial;
                    v = vt;
                    continue;
                }
            }
        }
        // backtracking: shrink until Armijo-style decrease, grow on success
        let mut s = step;
        loop {
            let trial: PhasePoint = std::array::from_fn(|n| phi[n] - s * g[n]);
            let vt = potential(p, &trial);
            if vt <= v - 0.5 * s * gn * gn {
                phi = trial;
                v = vt;
                step = (s * 1.5).min(1.0);
                break;
            }
            s *= 0.5;
            if s < 1e-16 {
                // flat to machine precision; accept current point
                return Ok(Minimum { phi, energy: v, grad_norm: gn, iterations: it });
            }
        }
    }
    let gn = norm(&gradient(p, &phi));
    Err(PotentialError::NoConvergence(MAX_DESCENT_ITERS, gn))
}

/// Per-junction currents at a phase point.
#[derive(Debug, Clone)]
pub struct JunctionCurrents {
    /// I/I_c of the six radial junctions.
    pub radial: [f64; NODES],
    /// I/I_c of the six azimuthal junctions.
    pub azimuthal: [f64; NODES],
    /// I/I_c of the three outer junctions.
    pub outer: [f64; OUTER],
    /// Absolute azimuthal currents, nA.
    pub azimuthal_na: [f64; NODES],
    /// Absolute outer currents, nA.
    pub outer_na: [f64; OUTER],
}

/// Junction currents I/I_c = sin(phase difference − flux offset), with
/// absolute scale I_c = 2e·E_J/ħ.
pub fn junction_currents(p: &PotentialParams, phi: &PhasePoint) -> JunctionCurrents {
    let mut c = JunctionCurrents {
        radial: [0.0; NODES],
        azimuthal: [0.0; NODES],
        outer: [0.0; OUTER],
        azimuthal_na: [0.0; NODES],
        outer_na: [0.0; OUTER],
    };
    for n in 0..NODES {
        c.radial[n] = phi[n].sin();
        let n1 = (n + 1) % NODES;
        c.azimuthal[n] = (phi[n1] - phi[n] - p.phase_a[n]).sin();
        c.azimuthal_na[n] = c.azimuthal[n] * p.e_ja[n] * CRITICAL_CURRENT_PER_GHZ * 1e9;
    }
    for j in 0..OUTER {
        let (a, b) = outer_junction_nodes(j);
        c.outer[j] = (phi[b] - phi[a] - p.phase_l[j]).sin();
        c.outer_na[j] = c.outer[j] * p.e_jl[j] * CRITICAL_CURRENT_PER_GHZ * 1e9;
    }
    c
}

/// One raster pixel of the (x, y) plane scan.
#[derive(Debug, Clone, Copy)]
pub struct RasterPoint {
    pub x: f64,
    pub y: f64,
    pub v: f64,
}

/// Raster V over the plane, row-major over x then y.
pub fn raster_plane(
    p: &PotentialParams,
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Vec<RasterPoint> {
    let xs: Vec<f64> = (0..nx)
        .map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (nx - 1).max(1) as f64)
        .collect();
    let ys: Vec<f64> = (0..ny)
        .map(|i| y_range.0 + (y_range.1 - y_range.0) * i as f64 / (ny - 1).max(1) as f64)
        .collect();
    xs.par_iter()
        .flat_map_iter(|&x| ys.iter().map(move |&y| (x, y)))
        .map(|(x, y)| RasterPoint { x, y, v: plane_potential(p, x, y) })
        .collect()
}

/// Refine a minimum of the one-dimensional y = 0 cut by golden-section
/// search inside [lo, hi].
pub fn refine_cut_minimum(p: &PotentialParams, mut lo: f64, mut hi: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INVPHI * (hi - lo);
    let mut d = lo + INVPHI * (hi - lo);
    let mut fc = plane_potential(p, c, 0.0);
    let mut fd = plane_potential(p, d, 0.0);
    while hi - lo > 1e-12 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INVPHI * (hi - lo);
            fc = plane_potential(p, c, 0.0);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INVPHI * (hi - lo);
            fd = plane_potential(p, d, 0.0);
        }
    }
    0.5 * (lo + hi)
}

/// The two symmetric minima of the operating-point landscape.
#[derive(Debug, Clone)]
pub struct MinimaReport {
    /// Relaxed minimum descended from the clockwise valley point
    /// x = −2π/3.
    pub clockwise: Minimum,
    /// Relaxed minimum descended from the anti-clockwise valley point.
    pub anticlockwise: Minimum,
    /// Uniform persistent current I_ca·sin(π/3) at the symmetric valley
    /// point, nA. At this point every azimuthal junction carries the same
    /// current and the outer junctions carry none; the small radial tilt of
    /// the relaxed minima redistributes it slightly.
    pub persistent_current_na: f64,
}

/// Locate both persistent-current minima of the landscape (full 6-d descent
/// from the symmetric valley points) and the persistent current carried at
/// the symmetric point.
pub fn locate_minima(p: &PotentialParams) -> Result<MinimaReport, PotentialError> {
    let cw = find_minimum(p, &embed(-TAU / 3.0, 0.0))?;
    let acw = find_minimum(p, &embed(TAU / 3.0, 0.0))?;
    let c = junction_currents(p, &embed(-TAU / 3.0, 0.0));
    let ip = c.azimuthal_na.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    Ok(MinimaReport { clockwise: cw, anticlockwise: acw, persistent_current_na: ip })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn wc() -> PotentialParams {
        PotentialParams::white_cross()
    }

    #[test]
    fn flux_free_origin_is_global_minimum_value() {
        let p = PotentialParams::flux_free(1.7, 6.0, 30.0);
        let v = potential(&p, &[0.0; 6]);
        let expect = -6.0 * 1.7 - 6.0 * 6.0 - 3.0 * 30.0;
        assert!((v - expect).abs() < 1e-12);
        assert!(norm(&gradient(&p, &[0.0; 6])) < 1e-15);
    }

    #[test]
    fn periodicity_in_each_phase() {
        let p = wc();
        let phi = [0.3, -1.2, 2.7, 0.9, -0.4, 1.8];
        let v = potential(&p, &phi);
        for n in 0..NODES {
            let mut shifted = phi;
            shifted[n] += TAU;
            assert!((potential(&p, &shifted) - v).abs() < 1e-10);
        }
        let all: PhasePoint = std::array::from_fn(|n| phi[n] + TAU);
        assert!((potential(&p, &all) - v).abs() < 1e-10);
    }

    #[test]
    fn valley_point_stationary_in_plane_tilted_in_full_space() {
        // At x = ±2π/3 the radial cosines sum to zero for every y, so the
        // plane-restricted potential is stationary there; the full 6-d
        // gradient still carries the radial tilt E_Jr·sin(2π/3) on the four
        // nodes whose phase is not a multiple of 2π.
        let p = wc();
        let phi = embed(-TAU / 3.0, 0.0); // (−2π/3, −4π/3, …, −12π/3)
        let g = gradient(&p, &phi);
        let tilt = 1.7 * (TAU / 3.0).sin().abs();
        let expect = [-tilt, tilt, 0.0, -tilt, tilt, 0.0];
        for n in 0..NODES {
            assert!((g[n] - expect[n]).abs() < 1e-9, "node {n}: {} vs {}", g[n], expect[n]);
        }
        // plane-restricted: flat in y, V(x=±2π/3, y) ≡ −108 GHz
        for i in 0..50 {
            let y = -PI + TAU * i as f64 / 49.0;
            assert!((plane_potential(&p, TAU / 3.0, y) + 108.0).abs() < 1e-9);
            assert!((plane_potential(&p, -TAU / 3.0, y) + 108.0).abs() < 1e-9);
        }
    }

    #[test]
    fn relaxed_minimum_geometry() {
        // Full 6-d relaxation from the valley point: energy −108.4816667 GHz
        // with displacement (+δ, −δ, 0, +δ, −δ, 0), δ ≈ 0.1571167.
        let p = wc();
        let m = find_minimum(&p, &embed(-TAU / 3.0, 0.0)).unwrap();
        assert!((m.energy + 108.4816667).abs() < 1e-5, "E = {}", m.energy);
        let base = embed(-TAU / 3.0, 0.0);
        let delta = 0.1571167;
        let pattern = [delta, -delta, 0.0, delta, -delta, 0.0];
        for n in 0..NODES {
            assert!(
                (m.phi[n] - base[n] - pattern[n]).abs() < 1e-5,
                "node {n}: {} vs {}",
                m.phi[n],
                base[n] + pattern[n]
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = wc();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..100 {
            let phi: PhasePoint = std::array::from_fn(|_| rng.gen_range(-PI..PI));
            let g = gradient(&p, &phi);
            for n in 0..NODES {
                let mut up = phi;
                up[n] += h;
                let mut dn = phi;
                dn[n] -= h;
                let fd = (potential(&p, &up) - potential(&p, &dn)) / (2.0 * h);
                let scale = g[n].abs().max(1.0);
                assert!((g[n] - fd).abs() / scale < 1e-6, "node {n}: {} vs {}", g[n], fd);
            }
        }
    }

    #[test]
    fn gradient_periodic() {
        let p = wc();
        let phi = [0.3, -1.2, 2.7, 0.9, -0.4, 1.8];
        let g = gradient(&p, &phi);
        let shifted: PhasePoint = std::array::from_fn(|n| phi[n] + TAU);
        let g2 = gradient(&p, &shifted);
        for n in 0..NODES {
            assert!((g[n] - g2[n]).abs() < 1e-9);
        }
    }

    #[test]
    fn cut_minima_at_two_thirds_pi() {
        // The y = 0 cut has its two minima at x = ±2π/3 up to a small shift
        // +0.0031439 from the radial tilt (relative offset 0.15%).
        let p = wc();
        let xr = refine_cut_minimum(&p, 0.5, 3.0);
        let xl = refine_cut_minimum(&p, -3.0, -0.5);
        assert!((xr - (TAU / 3.0 + 0.003_143_9)).abs() < 1e-6, "right minimum at {xr}");
        assert!((xl + (TAU / 3.0 + 0.003_143_9)).abs() < 1e-6, "left minimum at {xl}");
        assert!((xr - TAU / 3.0).abs() < 0.004);
        assert!((xl + TAU / 3.0).abs() < 0.004);
    }

    #[test]
    fn valleys_are_flat_lines_at_two_thirds_pi() {
        // The in-plane global-minimum valleys are the lines x = ±2π/3: the
        // potential is exactly independent of y there (every cosine family
        // becomes y-independent), and any other x is strictly higher at the
        // level of the dominant azimuthal + outer terms.
        let p = wc();
        for sign in [-1.0, 1.0] {
            let x = sign * TAU / 3.0;
            let v0 = plane_potential(&p, x, 0.0);
            for i in 0..40 {
                let y = -PI + TAU * i as f64 / 39.0;
                assert!((plane_potential(&p, x, y) - v0).abs() < 1e-9, "y = {y}");
                let h = 1e-6;
                let dy = (plane_potential(&p, x, y + h) - plane_potential(&p, x, y - h)) / (2.0 * h);
                assert!(dy.abs() < 1e-8, "dV/dy = {dy:e} at y = {y}");
            }
        }
        // off the valley the potential rises quickly
        assert!(plane_potential(&p, TAU / 3.0 + 0.3, 0.3) > plane_potential(&p, TAU / 3.0, 0.3) + 1.0);
    }

    #[test]
    fn plane_inversion_symmetry() {
        let p = wc();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = rng.gen_range(-PI..PI);
            let y = rng.gen_range(-PI..PI);
            let d = (plane_potential(&p, x, y) - plane_potential(&p, -x, -y)).abs();
            assert!(d < 1e-9, "asymmetry {d:e} at ({x}, {y})");
        }
    }

    #[test]
    fn descent_finds_anticlockwise_minimum() {
        let p = wc();
        let target = find_minimum(&p, &embed(TAU / 3.0, 0.0)).unwrap();
        let start: PhasePoint =
            std::array::from_fn(|n| target.phi[n] + 0.2 * (-1.0f64).powi(n as i32));
        let m = find_minimum(&p, &start).unwrap();
        for n in 0..NODES {
            // compare mod 2π
            let d = (m.phi[n] - target.phi[n]).rem_euclid(TAU);
            assert!(d.min(TAU - d) < 1e-6, "node {n}: {} vs {}", m.phi[n], target.phi[n]);
        }
        assert!((m.energy - target.energy).abs() < 1e-10);
        // starting exactly at a minimum converges (near-)immediately
        let m2 = find_minimum(&p, &target.phi).unwrap();
        assert!(m2.iterations <= 2, "iterations = {}", m2.iterations);
        assert!((m2.energy - target.energy).abs() < 1e-10);
    }

    #[test]
    fn two_minima_degenerate() {
        let p = wc();
        let r = locate_minima(&p).unwrap();
        let rel = (r.clockwise.energy - r.anticlockwise.energy).abs()
            / r.clockwise.energy.abs().max(1.0);
        assert!(rel < 1e-10, "relative split {rel:e}");
    }

    #[test]
    fn currents_at_clockwise_minimum() {
        let p = wc();
        let phi = embed(-TAU / 3.0, 0.0);
        let c = junction_currents(&p, &phi);
        let sin60 = (PI / 3.0).sin();
        for n in 0..NODES {
            assert!((c.azimuthal[n].abs() - sin60).abs() < 1e-9, "azimuthal {n}: {}", c.azimuthal[n]);
        }
        for j in 0..OUTER {
            assert!(c.outer[j].abs() < 1e-9, "outer {j}: {}", c.outer[j]);
        }
        // absolute scale: E_Ja = 6 GHz -> I_ca ~ 12.1 nA, I_p ~ 10.5 nA
        let ica = 6.0 * CRITICAL_CURRENT_PER_GHZ * 1e9;
        assert!((ica - 12.08).abs() < 0.05, "I_ca = {ica} nA");
        let ip = c.azimuthal_na[0].abs();
        assert!((ip - ica * sin60).abs() < 1e-9);
        assert!((ip - 10.46).abs() < 0.05, "I_p = {ip} nA");
    }

    #[test]
    fn flux_free_origin_currents_vanish() {
        let p = PotentialParams::flux_free(1.7, 6.0, 30.0);
        let c = junction_currents(&p, &[0.0; 6]);
        assert!(c.radial.iter().all(|&x| x == 0.0));
        assert!(c.azimuthal.iter().all(|&x| x == 0.0));
        assert!(c.outer.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn kirchhoff_at_stationary_points() {
        // At a stationary point the signed junction currents into each node
        // cancel; this is exactly grad V = 0 after the I_c weighting, so
        // verify via the current-weighted node balance directly.
        let p = wc();
        for x0 in [-TAU / 3.0, TAU / 3.0] {
            let m = find_minimum(&p, &embed(x0, 0.0)).unwrap();
            let c = junction_currents(&p, &m.phi);
            for n in 0..NODES {
                // into node n: radial (to ground), azimuthal n−1 in, n out,
                // outer junction oriented a -> b
                let mut balance = c.radial[n] * p.e_jr[n];
                balance += c.azimuthal[(n + NODES - 1) % NODES] * p.e_ja[(n + NODES - 1) % NODES];
                balance -= c.azimuthal[n] * p.e_ja[n];
                for j in 0..OUTER {
                    let (a, b) = outer_junction_nodes(j);
                    if b == n {
                        balance += c.outer[j] * p.e_jl[j];
                    }
                    if a == n {
                        balance -= c.outer[j] * p.e_jl[j];
                    }
                }
                assert!(balance.abs() < 1e-8, "node {n}: net current {balance:e}");
            }
        }
    }

    #[test]
    fn raster_matches_pointwise_eval() {
        let p = wc();
        let grid = raster_plane(&p, (-PI, PI), (-PI, PI), 11, 7);
        assert_eq!(grid.len(), 77);
        for pt in &grid {
            assert!((pt.v - plane_potential(&p, pt.x, pt.y)).abs() < 1e-12);
        }
        // row-major over x then y
        assert!((grid[0].x + PI).abs() < 1e-12 && (grid[0].y + PI).abs() < 1e-12);
        assert!((grid[6].x + PI).abs() < 1e-12 && (grid[6].y - PI).abs() < 1e-12);
    }
}
