//! Charge-basis quantization of the six-node Josephson ring.
//!
//! Conventions (all fixed across the crate):
//! * Energies are E/h in GHz; every reported transition frequency is ω/2π.
//! * Charging convention E_C = e²/2C, so capacitances are carried as
//!   C = 1/E_C in units of e²/2 and the kinetic coefficient matrix is
//!   Ẽ = 4·K⁻¹ with K built from those capacitances. A single isolated node
//!   then recovers the standard 4·E_C·(N−N_g)² charging term.
//! * Nodes are 0-based. Azimuthal junction m connects nodes (m, m+1 mod 6);
//!   outer junction j ∈ {0,1,2} connects nodes (2j+1, 2j+4 mod 6) and its
//!   loop window covers inner sectors {2j, 2j+1, 2j+2 mod 6}, where sector k
//!   lies between nodes k and k+1.
//! * Loop fluxes are in units of Φ0 and enter junction cosines as phases
//!   2π·Φ/Φ0.

use crate::sparse::{self, EigenResult, LanczosOptions, SparseHermitian, TripletBuilder};
use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NODES: usize = 6;
pub const OUTER: usize = 3;
const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("invalid circuit parameters: {0}")]
    InvalidParams(String),
    #[error("Hilbert dimension d^6 = {0} exceeds the configured budget of {1}")]
    DimensionOverflow(usize, usize),
    #[error("capacitance matrix numerically singular")]
    SingularCapacitance,
    #[error(transparent)]
    Solver(#[from] sparse::SparseError),
}

/// Full parameter set of the six-node ring. Junction energies are stored per
/// junction so that disorder realizations can perturb them independently; the
/// symmetric constructors fill each family uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Radial junction Josephson energies, GHz.
    pub e_jr: [f64; NODES],
    /// Radial junction charging energies, GHz.
    pub e_cr: [f64; NODES],
    /// Azimuthal junction Josephson energies, GHz.
    pub e_ja: [f64; NODES],
    /// Azimuthal junction charging energies, GHz.
    pub e_ca: [f64; NODES],
    /// Outer (diametric) junction Josephson energies, GHz.
    pub e_jl: [f64; OUTER],
    /// Outer junction charging energies, GHz.
    pub e_cl: [f64; OUTER],
    /// Gate charges in Cooper pairs.
    pub ng: [f64; NODES],
    /// Inner-sector fluxes, units of Φ0.
    pub phi_inner: [f64; NODES],
    /// Outer-loop fluxes, units of Φ0.
    pub phi_outer: [f64; OUTER],
    /// Charge states per node.
    pub d: usize,
    /// Integer centers of the per-node charge windows. Anchored at
    /// construction (round of the nominal gate charge) and deliberately not
    /// recomputed when `ng` is perturbed: a fluctuating gate must not shift
    /// the truncated Hilbert space discontinuously.
    pub charge_center: [i64; NODES],
}

impl CircuitParams {
    /// Uniform junction families at the operating point
    /// (Φ_int = Φ0/2, Φ_ext = 3Φ0/2, N_g = 1/2).
    pub fn symmetric(e_jr: f64, e_cr: f64, e_ja: f64, e_ca: f64, e_jl: f64, e_cl: f64) -> Self {
        Self {
            e_jr: [e_jr; NODES],
            e_cr: [e_cr; NODES],
            e_ja: [e_ja; NODES],
            e_ca: [e_ca; NODES],
            e_jl: [e_jl; OUTER],
            e_cl: [e_cl; OUTER],
            ng: [0.5; NODES],
            phi_inner: [0.5; NODES],
            phi_outer: [1.5; OUTER],
            d: 10,
            charge_center: [1; NODES], // round(1/2); window straddles N_g
        }
    }

    /// The qubit design point used throughout: E_Jr = 1.7, E_Cr = 7.4,
    /// E_Ja = 6.0, E_Ca = 2.1, E_Jl = 30.0, E_Cl = 0.56 GHz.
    pub fn white_cross() -> Self {
        Self::symmetric(1.7, 7.4, 6.0, 2.1, 30.0, 0.56)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let all_energies = self
            .e_jr
            .iter()
            .chain(&self.e_cr)
            .chain(&self.e_ja)
            .chain(&self.e_ca)
            .chain(self.e_jl.iter())
            .chain(self.e_cl.iter());
        for &e in all_energies {
            if !(e > 0.0) || !e.is_finite() {
                return Err(CircuitError::InvalidParams(format!("non-positive junction energy {e}")));
            }
        }
        if self.d < 2 {
            return Err(CircuitError::InvalidParams(format!("need at least 2 charge states, got {}", self.d)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d.pow(NODES as u32)
    }

    /// Apply total charge / flux offsets from the operating point: ΔQ_tot is
    /// split evenly over the six gates; ΔΦ_tot scales every loop flux by
    /// (1 + ΔΦ_tot/3), the operating point carrying 3Φ0 of total inner flux.
    pub fn with_offsets(&self, dq_tot: f64, dphi_tot: f64) -> Self {
        let mut p = self.clone();
        for g in p.ng.iter_mut() {
            *g += dq_tot / NODES as f64;
        }
        let scale = 1.0 + dphi_tot / 3.0;
        for f in p.phi_inner.iter_mut() {
            *f *= scale;
        }
        for f in p.phi_outer.iter_mut() {
            *f *= scale;
        }
        p
    }

    /// Per-node charge window: `d` consecutive integers centered on the
    /// anchored window center; for N_g = 1/2 this is the window straddling
    /// 1/2.
    pub fn charge_window_start(&self, node: usize) -> i64 {
        self.charge_center[node] - (self.d as i64) / 2
    }

    /// Re-anchor the charge windows on the current gate charges (used when
    /// constructing a genuinely different operating point, never for
    /// perturbations).
    pub fn recenter_windows(&mut self) {
        for n in 0..NODES {
            self.charge_center[n] = self.ng[n].round() as i64;
        }
    }
}

/// Kinetic coefficient matrix Ẽ: the charging term is
/// Σ_{mn} Ẽ_{mn} (N̂_m − N_{g,m})(N̂_n − N_{g,n}).
#[derive(Debug, Clone)]
pub struct InverseCapacitanceMatrix {
    pub etilde: Matrix6<f64>,
}

impl InverseCapacitanceMatrix {
    /// Maximum deviation from the circulant pattern (entries depending only
    /// on (m−n) mod 6); zero for uniform junction families.
    pub fn circulant_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for off in 0..NODES {
            let base = self.etilde[(0, off)];
            for m in 1..NODES {
                worst = worst.max((self.etilde[(m, (m + off) % NODES)] - base).abs());
            }
        }
        worst
    }
}

/// Outer junction j connects these nodes; the hop orientation is
/// raise(from) + lower(to) with phase e^{+iφ_l}.
pub fn outer_junction_nodes(j: usize) -> (usize, usize) {
    ((2 * j + 1) % NODES, (2 * j + 4) % NODES)
}

/// Build K from per-junction capacitances C = 1/E_C and return Ẽ = 4·K⁻¹.
pub fn build_inverse_capacitance(p: &CircuitParams) -> Result<InverseCapacitanceMatrix, CircuitError> {
    p.validate()?;
    let mut k = Matrix6::<f64>::zeros();
    for n in 0..NODES {
        k[(n, n)] += 1.0 / p.e_cr[n];
        let c_a = 1.0 / p.e_ca[n];
        let n1 = (n + 1) % NODES;
        k[(n, n)] += c_a;
        k[(n1, n1)] += c_a;
        k[(n, n1)] -= c_a;
        k[(n1, n)] -= c_a;
    }
    for j in 0..OUTER {
        let c_l = 1.0 / p.e_cl[j];
        let (a, b) = outer_junction_nodes(j);
        k[(a, a)] += c_l;
        k[(b, b)] += c_l;
        k[(a, b)] -= c_l;
        k[(b, a)] -= c_l;
    }
    let inv = k.try_inverse().ok_or(CircuitError::SingularCapacitance)?;
    // sanity: K is positive definite for positive capacitances
    let sym_check = (k - k.transpose()).abs().max();
    debug_assert!(sym_check < 1e-12);
    Ok(InverseCapacitanceMatrix { etilde: inv * 4.0 })
}

/// Per-junction flux offsets: Φ_a in units of Φ0 per azimuthal junction,
/// Φ_l per outer junction, with phase equivalents 2πΦ/Φ0 reduced mod 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxOffsets {
    pub phi_a: [f64; NODES],
    pub phi_l: [f64; OUTER],
    pub phase_a: [f64; NODES],
    pub phase_l: [f64; OUTER],
}

/// Compose junction flux offsets from loop fluxes: Φ_a,m = Φ_I,m and
/// Φ_l,j = Φ_I,2j + Φ_I,2j+1 + Φ_I,2j+2 + Φ_O,j (sector indices mod 6).
pub fn compose_flux_offsets(phi_inner: &[f64; NODES], phi_outer: &[f64; OUTER]) -> FluxOffsets {
    let phi_a = *phi_inner;
    let mut phi_l = [0.0; OUTER];
    for (j, pl) in phi_l.iter_mut().enumerate() {
        *pl = phi_inner[(2 * j) % NODES]
            + phi_inner[(2 * j + 1) % NODES]
            + phi_inner[(2 * j + 2) % NODES]
            + phi_outer[j];
    }
    let phase_a = phi_a.map(|f| (TAU * f).rem_euclid(TAU));
    let phase_l = phi_l.map(|f| (TAU * f).rem_euclid(TAU));
    FluxOffsets { phi_a, phi_l, phase_a, phase_l }
}

/// Charge basis bookkeeping: node n holds charges start[n]..start[n]+d-1 and
/// strides by d^n in the flattened index.
#[derive(Debug, Clone)]
pub struct ChargeBasis {
    pub d: usize,
    pub start: [i64; NODES],
}

impl ChargeBasis {
    pub fn dim(&self) -> usize {
        self.d.pow(NODES as u32)
    }

    pub fn stride(&self, node: usize) -> usize {
        self.d.pow(node as u32)
    }

    /// Charge of `node` in basis state `index`.
    pub fn charge(&self, index: usize, node: usize) -> i64 {
        self.start[node] + ((index / self.stride(node)) % self.d) as i64
    }

    /// Local level (0..d) of `node` in basis state `index`.
    pub fn level(&self, index: usize, node: usize) -> usize {
        (index / self.stride(node)) % self.d
    }
}

/// Assembled circuit Hamiltonian.
pub struct CircuitHamiltonian {
    pub matrix: SparseHermitian,
    pub basis: ChargeBasis,
    pub etilde: InverseCapacitanceMatrix,
    pub fluxes: FluxOffsets,
}

/// Hilbert-space budget (states) for assembly; d = 10 sits right at it.
pub const DIM_BUDGET: usize = 1_000_000;

/// Assemble the charge-basis Hamiltonian: diagonal charging from Ẽ, radial
/// single-node hops −E_Jr/2, azimuthal and outer correlated hops with phase
/// factors e^{±iφ}. Hops leaving the charge window are dropped.
pub fn assemble_hamiltonian(p: &CircuitParams) -> Result<CircuitHamiltonian, CircuitError> {
    p.validate()?;
    let dim = p.dim();
    if dim > DIM_BUDGET {
        return Err(CircuitError::DimensionOverflow(dim, DIM_BUDGET));
    }
    let etilde = build_inverse_capacitance(p)?;
    let fluxes = compose_flux_offsets(&p.phi_inner, &p.phi_outer);
    let basis = ChargeBasis {
        d: p.d,
        start: std::array::from_fn(|n| p.charge_window_start(n)),
    };

    let mut b = TripletBuilder::new(dim);
    let d = p.d;
    for s in 0..dim {
        // charging: sum_{mn} Etilde_mn q_m q_n
        let q = Vector6::from_fn(|n, _| basis.charge(s, n) as f64 - p.ng[n]);
        let diag = (q.transpose() * etilde.etilde * q)[(0, 0)];
        b.push(s, s, Complex64::new(diag, 0.0));

        // radial: -E_Jr/2 (raise + lower); push the raise, h.c. implied.
        for n in 0..NODES {
            if basis.level(s, n) + 1 < d {
                let s2 = s + basis.stride(n);
                b.push(s2, s, Complex64::new(-p.e_jr[n] / 2.0, 0.0));
            }
        }
        // azimuthal junction m: -E_Ja/2 Σ+_m Σ-_{m+1} e^{+iφ_a,m} (+ h.c.)
        for m in 0..NODES {
            let m1 = (m + 1) % NODES;
            if basis.level(s, m) + 1 < d && basis.level(s, m1) > 0 {
                let s2 = s + basis.stride(m) - basis.stride(m1);
                let phase = Complex64::from_polar(1.0, fluxes.phase_a[m]);
                b.push(s2, s, Complex64::new(-p.e_ja[m] / 2.0, 0.0) * phase);
            }
        }
        // outer junction j: -E_Jl/2 Σ+_a Σ-_b e^{+iφ_l,j} (+ h.c.)
        for j in 0..OUTER {
            let (a, bb) = outer_junction_nodes(j);
            if basis.level(s, a) + 1 < d && basis.level(s, bb) > 0 {
                let s2 = s + basis.stride(a) - basis.stride(bb);
                let phase = Complex64::from_polar(1.0, fluxes.phase_l[j]);
                b.push(s2, s, Complex64::new(-p.e_jl[j] / 2.0, 0.0) * phase);
            }
        }
    }
    Ok(CircuitHamiltonian { matrix: b.build()?, basis, etilde, fluxes })
}

/// Apply (N̂_m − 0)·ψ, i.e. multiply by the charge of `node`.
pub fn apply_number(basis: &ChargeBasis, node: usize, v: &[Complex64]) -> Vec<Complex64> {
    v.iter().enumerate().map(|(s, &c)| c * basis.charge(s, node) as f64).collect()
}

/// Apply cos θ̂_m = (Σ⁻ + Σ⁺)/2 with hard window truncation.
pub fn apply_cos(basis: &ChargeBasis, node: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    let stride = basis.stride(node);
    for (s, &c) in v.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let lvl = basis.level(s, node);
        if lvl + 1 < basis.d {
            out[s + stride] += 0.5 * c;
        }
        if lvl > 0 {
            out[s - stride] += 0.5 * c;
        }
    }
    out
}

/// Apply sin θ̂_m = i(Σ⁻ − Σ⁺)/2 with hard window truncation.
pub fn apply_sin(basis: &ChargeBasis, node: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    let stride = basis.stride(node);
    let half_i = Complex64::new(0.0, 0.5);
    for (s, &c) in v.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let lvl = basis.level(s, node);
        if lvl + 1 < basis.d {
            out[s + stride] -= half_i * c;
        }
        if lvl > 0 {
            out[s - stride] += half_i * c;
        }
    }
    out
}

/// Low-lying spectrum summary.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Lowest eigenvalues, GHz, ascending.
    pub eigenvalues: Vec<f64>,
    /// ω01/2π in GHz.
    pub omega01: f64,
    /// ω12/2π in GHz.
    pub omega12: f64,
    /// Anharmonicity ω12/ω01.
    pub alpha: f64,
    pub residuals: Vec<f64>,
    /// |ω01(d) − ω01(d−2)| when a convergence companion run was requested.
    pub convergence_delta: Option<f64>,
}

fn spectrum_from_eigen(e: &EigenResult) -> SpectrumResult {
    let omega01 = e.values.get(1).map(|v| v - e.values[0]).unwrap_or(0.0);
    let omega12 = e.values.get(2).map(|v| v - e.values[1]).unwrap_or(0.0);
    SpectrumResult {
        eigenvalues: e.values.clone(),
        omega01,
        omega12,
        alpha: if omega01 != 0.0 { omega12 / omega01 } else { 0.0 },
        residuals: e.residuals.clone(),
        convergence_delta: None,
    }
}

pub fn solver_options(k: usize) -> LanczosOptions {
    let mut o = LanczosOptions::new(k);
    o.tol = 1e-11;
    o.max_iter = 200_000;
    o.seed = 7;
    // The low spectrum of the ring is non-degenerate at the physics points;
    // skip the (expensive) cluster probe.
    o.probe_clusters = false;
    o
}

/// k+1 lowest eigenpairs (k transition pairs) of the circuit.
pub fn eigenpairs(p: &CircuitParams, k: usize) -> Result<EigenResult, CircuitError> {
    eigenpairs_warm(p, k, None)
}

/// Same as [`eigenpairs`] with warm-start guess vectors from a nearby
/// parameter point.
pub fn eigenpairs_warm(
    p: &CircuitParams,
    k: usize,
    guess: Option<&[Vec<Complex64>]>,
) -> Result<EigenResult, CircuitError> {
    let h = assemble_hamiltonian(p)?;
    let opts = solver_options(k);
    Ok(sparse::lowest_k_with(&h.matrix, &opts, guess)?)
}

/// Spectrum at the requested cutoff.
pub fn spectrum(p: &CircuitParams, k: usize) -> Result<SpectrumResult, CircuitError> {
    let e = eigenpairs(p, k)?;
    Ok(spectrum_from_eigen(&e))
}

/// Spectrum plus a charge-cutoff convergence estimate |ω01(d) − ω01(d−2)|.
pub fn spectrum_with_convergence(p: &CircuitParams, k: usize) -> Result<SpectrumResult, CircuitError> {
    let mut s = spectrum(p, k)?;
    if p.d >= 4 {
        let mut p2 = p.clone();
        p2.d = p.d - 2;
        let s2 = spectrum(&p2, k)?;
        s.convergence_delta = Some((s.omega01 - s2.omega01).abs());
    }
    Ok(s)
}

/// Transition matrix elements of the qubit doublet per node.
#[derive(Debug, Clone)]
pub struct ProtectionElements {
    /// |⟨1|N̂_m|0⟩|
    pub n_offdiag: [f64; NODES],
    /// |⟨1|cosθ̂_m|0⟩|
    pub cos_offdiag: [f64; NODES],
    /// |⟨1|sinθ̂_m|0⟩|
    pub sin_offdiag: [f64; NODES],
    /// ⟨1|N̂_m|1⟩ − ⟨0|N̂_m|0⟩
    pub n_diag_diff: [f64; NODES],
}

impl ProtectionElements {
    pub fn max_n_offdiag(&self) -> f64 {
        self.n_offdiag.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn max_n_diag_diff(&self) -> f64 {
        self.n_diag_diff.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Compute protection elements from an already-solved doublet.
pub fn protection_elements_from(
    basis: &ChargeBasis,
    state0: &[Complex64],
    state1: &[Complex64],
) -> ProtectionElements {
    let mut out = ProtectionElements {
        n_offdiag: [0.0; NODES],
        cos_offdiag: [0.0; NODES],
        sin_offdiag: [0.0; NODES],
        n_diag_diff: [0.0; NODES],
    };
    for m in 0..NODES {
        let n0 = apply_number(basis, m, state0);
        let n1 = apply_number(basis, m, state1);
        out.n_offdiag[m] = inner(state1, &n0).norm();
        out.n_diag_diff[m] = inner(state1, &n1).re - inner(state0, &n0).re;
        let c0 = apply_cos(basis, m, state0);
        out.cos_offdiag[m] = inner(state1, &c0).norm();
        let s0 = apply_sin(basis, m, state0);
        out.sin_offdiag[m] = inner(state1, &s0).norm();
    }
    out
}

/// Solve for the doublet and report the per-node protection matrix elements.
pub fn protection_matrix_elements(p: &CircuitParams) -> Result<ProtectionElements, CircuitError> {
    let h = assemble_hamiltonian(p)?;
    let opts = solver_options(2);
    let e = sparse::lowest_k_with(&h.matrix, &opts, None)?;
    Ok(protection_elements_from(&h.basis, &e.vectors[0], &e.vectors[1]))
}

/// One spectroscopy row.
#[derive(Debug, Clone)]
pub struct SpectroscopyRow {
    pub dq_tot: f64,
    pub dphi_tot: f64,
    /// First four transition frequencies ω0n/2π, GHz.
    pub transitions: [f64; 4],
    pub converged: bool,
}

/// Sweep total charge and flux offsets (cartesian product, row-major in
/// dq then dphi). Consecutive points warm-start from their predecessor.
pub fn spectroscopy_sweep(
    p: &CircuitParams,
    dq_grid: &[f64],
    dphi_grid: &[f64],
) -> Result<Vec<SpectroscopyRow>, CircuitError> {
    let mut rows = Vec::with_capacity(dq_grid.len() * dphi_grid.len());
    let mut guess: Option<Vec<Vec<Complex64>>> = None;
    for &dq in dq_grid {
        for &dphi in dphi_grid {
            let pp = p.with_offsets(dq, dphi);
            match eigenpairs_warm(&pp, 5, guess.as_deref()) {
                Ok(e) => {
                    let t = std::array::from_fn(|i| e.values[i + 1] - e.values[0]);
                    guess = Some(e.vectors);
                    rows.push(SpectroscopyRow { dq_tot: dq, dphi_tot: dphi, transitions: t, converged: true });
                }
                Err(CircuitError::Solver(sparse::SparseError::NonConvergence { .. })) => {
                    rows.push(SpectroscopyRow {
                        dq_tot: dq,
                        dphi_tot: dphi,
                        transitions: [f64::NAN; 4],
                        converged: false,
                    });
                    guess = None;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}

/// One row of the design-space map over (E_Cr/E_Ja, E_Jl/E_Ja).
#[derive(Debug, Clone)]
pub struct DesignMapRow {
    pub ecr_over_eja: f64,
    pub ejl_over_eja: f64,
    pub omega01: f64,
    pub alpha: f64,
    /// True when the doublet protection elements vanish below threshold.
    pub protected: bool,
    pub converged: bool,
}

/// Threshold on |⟨1|N̂|0⟩| and the z-difference used for the protection flag.
pub const PROTECTION_THRESHOLD: f64 = 1e-4;

/// Map ω01 and α over junction-energy ratios at fixed E_Ja = 6 GHz, all
/// families constrained to a 10 GHz bare plasma frequency √(8 E_J E_C).
pub fn design_map(
    ecr_over_eja: &[f64],
    ejl_over_eja: &[f64],
    d: usize,
) -> Result<Vec<DesignMapRow>, CircuitError> {
    const E_JA: f64 = 6.0;
    const PLASMA_SQ: f64 = 100.0; // (10 GHz)^2
    let e_ca = PLASMA_SQ / (8.0 * E_JA);
    let mut rows = Vec::with_capacity(ecr_over_eja.len() * ejl_over_eja.len());
    for &rc in ecr_over_eja {
        for &rl in ejl_over_eja {
            let e_cr = rc * E_JA;
            let e_jr = PLASMA_SQ / (8.0 * e_cr);
            let e_jl = rl * E_JA;
            let e_cl = PLASMA_SQ / (8.0 * e_jl);
            let mut p = CircuitParams::symmetric(e_jr, e_cr, E_JA, e_ca, e_jl, e_cl);
            p.d = d;
            match eigenpairs(&p, 3) {
                Ok(e) => {
                    let omega01 = e.values[1] - e.values[0];
                    let omega12 = e.values[2] - e.values[1];
                    let h = assemble_hamiltonian(&p)?;
                    let pe = protection_elements_from(&h.basis, &e.vectors[0], &e.vectors[1]);
                    rows.push(DesignMapRow {
                        ecr_over_eja: rc,
                        ejl_over_eja: rl,
                        omega01,
                        alpha: if omega01 != 0.0 { omega12 / omega01 } else { 0.0 },
                        protected: pe.max_n_offdiag() < PROTECTION_THRESHOLD
                            && pe.max_n_diag_diff() < PROTECTION_THRESHOLD,
                        converged: true,
                    });
                }
                Err(CircuitError::Solver(sparse::SparseError::NonConvergence { .. })) => {
                    rows.push(DesignMapRow {
                        ecr_over_eja: rc,
                        ejl_over_eja: rl,
                        omega01: f64::NAN,
                        alpha: f64::NAN,
                        protected: false,
                        converged: false,
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}
