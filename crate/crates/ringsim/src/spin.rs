//! Exact diagonalization of the periodic M-spin chain with nearest-neighbour
//! and diametric flip-flop couplings plus an all-to-all σᶻ⊗σᶻ interaction,
//! symmetry classification of the two lowest states, and the relaxation /
//! dephasing sensitivity maps.
//!
//! Basis convention: computational state `s` has bit `m` set when spin `m`
//! points up (σᶻ = +1). Sites are 0-based; the diametric partner of site `m`
//! is `(m + M/2) mod M`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("site count must be even and >= 4, got {0}")]
    InvalidSiteCount(usize),
    #[error("dense diagonalization cap exceeded: 2^{0} > 16384")]
    DimensionCap(usize),
}

/// Parameters of the chain Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpinChainParams {
    /// Even site count (default 6).
    pub m: usize,
    /// Nearest-neighbour flip-flop amplitude.
    pub t: f64,
    /// Diametric (range M/2) flip-flop amplitude.
    pub lambda: f64,
    /// All-to-all longitudinal coupling.
    pub zeta: f64,
}

impl SpinChainParams {
    pub fn new(m: usize, t: f64, lambda: f64, zeta: f64) -> Result<Self, SpinError> {
        let p = Self { m, t, lambda, zeta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        if self.m % 2 != 0 || self.m < 4 {
            return Err(SpinError::InvalidSiteCount(self.m));
        }
        if self.m > 14 {
            return Err(SpinError::DimensionCap(self.m));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }
}

impl Default for SpinChainParams {
    fn default() -> Self {
        Self { m: 6, t: 1.0, lambda: 0.0, zeta: 0.0 }
    }
}

/// A labelled operator on the full 2^M-dimensional space.
#[derive(Debug, Clone)]
pub struct SpinOperator {
    pub label: String,
    pub matrix: DMatrix<Complex64>,
}

impl SpinOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sites(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }
}

/// Lowest two eigenpairs of the chain.
#[derive(Debug, Clone)]
pub struct QubitDoublet {
    pub e0: f64,
    pub e1: f64,
    /// Gap E2 - E1 to the rest of the spectrum (0 if unavailable).
    pub e2: f64,
    pub state0: Vec<Complex64>,
    pub state1: Vec<Complex64>,
}

impl QubitDoublet {
    pub fn gap(&self) -> f64 {
        self.e1 - self.e0
    }
}

/// Symmetry eigenvalues and sensitivity metrics of a doublet.
#[derive(Debug, Clone)]
pub struct ProtectionMetrics {
    /// Relaxation sensitivity max over sites.
    pub r: f64,
    /// Dephasing sensitivity max over sites.
    pub d: f64,
    pub n0: f64,
    pub n1: f64,
    pub tau0: Complex64,
    pub tau1: Complex64,
    pub iota0: f64,
    pub iota1: f64,
    pub flag_n: bool,
    pub flag_t: bool,
    pub flag_i: bool,
}

impl ProtectionMetrics {
    pub fn all_flags(&self) -> bool {
        self.flag_n && self.flag_t && self.flag_i
    }
}

const SIGMA_W: [char; 3] = ['x', 'y', 'z'];

/// Apply σ^w at `site` to a state vector (bitwise, no matrix built).
pub fn apply_pauli(w: char, site: usize, v: &[Complex64]) -> Vec<Complex64> {
    let dim = v.len();
    let bit = 1usize << site;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    match w {
        'x' => {
            for (s, &c) in v.iter().enumerate() {
                out[s ^ bit] += c;
            }
        }
        'y' => {
            // σy |0> = i|1>, σy |1> = -i|0>
            for (s, &c) in v.iter().enumerate() {
                let sign = if s & bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                out[s ^ bit] += sign * c;
            }
        }
        'z' => {
            for (s, &c) in v.iter().enumerate() {
                let sign = if s & bit == 0 { -1.0 } else { 1.0 };
                out[s] = sign * c;
            }
        }
        '+' => {
            // σ+ = |up><down|
            for (s, &c) in v.iter().enumerate() {
                if s & bit == 0 {
                    out[s ^ bit] += c;
                }
            }
        }
        '-' => {
            for (s, &c) in v.iter().enumerate() {
                if s & bit != 0 {
                    out[s ^ bit] += c;
                }
            }
        }
        _ => panic!("unknown Pauli label {w}"),
    }
    out
}

/// Build the chain Hamiltonian. The double sum of the σᶻ⊗σᶻ term is taken
/// literally, including m = n (a constant shift Mζ/4).
pub fn build_spin_hamiltonian(p: &SpinChainParams) -> Result<SpinOperator, SpinError> {
    p.validate()?;
    let m_sites = p.m;
    let dim = p.dim();
    let half = m_sites / 2;
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for s in 0..dim {
        // zeta/4 * (sum_m sigma_z)^2 covers the full double sum incl. m = n.
        let sz_sum = (2 * (s as i64).count_ones() as i64 - m_sites as i64) as f64;
        h[(s, s)] += Complex64::new(p.zeta / 4.0 * sz_sum * sz_sum, 0.0);
        // Flip-flop: sigma+_m sigma-_n moves an excitation from n to m.
        let mut flip = |a: usize, b: usize, amp: f64| {
            let (ba, bb) = (1usize << a, 1usize << b);
            // sigma+_a sigma-_b |s>: requires bit b set, bit a clear.
            if s & bb != 0 && s & ba == 0 {
                let s2 = (s & !bb) | ba;
                h[(s2, s)] += Complex64::new(amp, 0.0);
            }
            // h.c. term sigma-_a sigma+_b
            if s & ba != 0 && s & bb == 0 {
                let s2 = (s & !ba) | bb;
                h[(s2, s)] += Complex64::new(amp, 0.0);
            }
        };
        for site in 0..m_sites {
            flip(site, (site + 1) % m_sites, p.t / 2.0);
            // Each diametric pair is visited from both ends, doubling lambda/2
            // exactly as the printed sum does.
            flip(site, (site + half) % m_sites, p.lambda / 2.0);
        }
    }
    Ok(SpinOperator {
        label: format!("H(M={}, t={}, lambda={}, zeta={})", p.m, p.t, p.lambda, p.zeta),
        matrix: h,
    })
}

/// Symmetry operator triple (𝒩, 𝒯, ℐ) for an M-site chain.
pub struct SymmetryOps {
    pub number: SpinOperator,
    pub translation: SpinOperator,
    pub inversion: SpinOperator,
}

fn rotate_bits(s: usize, m: usize) -> usize {
    // site i -> site i+1 (mod m)
    let mask = (1usize << m) - 1;
    ((s << 1) | (s >> (m - 1))) & mask
}

fn reverse_bits(s: usize, m: usize) -> usize {
    // site i -> site m-1-i
    let mut out = 0usize;
    for i in 0..m {
        if s & (1 << i) != 0 {
            out |= 1 << (m - 1 - i);
        }
    }
    out
}

pub fn build_symmetry_operators(m: usize) -> Result<SymmetryOps, SpinError> {
    if m % 2 != 0 || m < 4 {
        return Err(SpinError::InvalidSiteCount(m));
    }
    if m > 14 {
        return Err(SpinError::DimensionCap(m));
    }
    let dim = 1usize << m;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut number = DMatrix::from_element(dim, dim, zero);
    let mut translation = DMatrix::from_element(dim, dim, zero);
    let mut inversion = DMatrix::from_element(dim, dim, zero);
    for s in 0..dim {
        number[(s, s)] = Complex64::new(s.count_ones() as f64, 0.0);
        translation[(rotate_bits(s, m), s)] = one;
        inversion[(reverse_bits(s, m), s)] = one;
    }
    Ok(SymmetryOps {
        number: SpinOperator { label: "N".into(), matrix: number },
        translation: SpinOperator { label: "T".into(), matrix: translation },
        inversion: SpinOperator { label: "I".into(), matrix: inversion },
    })
}

/// Dense spectrum of a Hermitian spin operator, ascending.
pub fn dense_spectrum(h: &SpinOperator) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let dim = h.dim();
    let eig = nalgebra::SymmetricEigen::new(h.matrix.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().cloned().collect()).collect();
    (values, vectors)
}

/// Two lowest eigenpairs. When the ground space is degenerate within
/// `degeneracy_tol` (relative), the returned basis simultaneously
/// diagonalizes the inversion operator on that subspace.
pub fn ground_doublet(h: &SpinOperator, degeneracy_tol: f64) -> Result<QubitDoublet, SpinError> {
    let dim = h.dim();
    if dim > 16384 {
        return Err(SpinError::DimensionCap(h.sites()));
    }
    let (values, vectors) = dense_spectrum(h);
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut state0 = polish_eigenvector(h, values[0], &vectors[0], scale);
    let mut state1 = polish_eigenvector(h, values[1], &vectors[1], scale);
    // keep the pair orthonormal (inverse iteration can pull degenerate
    // partners toward each other)
    let ov: Complex64 = state0.iter().zip(&state1).map(|(a, b)| a.conj() * b).sum();
    for (s1, s0) in state1.iter_mut().zip(&state0) {
        *s1 -= ov * s0;
    }
    let n1 = state1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if n1 > 1e-8 {
        for s in state1.iter_mut() {
            *s /= n1;
        }
    }
    if (values[1] - values[0]).abs() <= degeneracy_tol * scale {
        let ops = build_symmetry_operators(h.sites())?;
        let (a, b) = rotate_pair(&state0, &state1, &ops.inversion);
        state0 = a;
        state1 = b;
    }
    Ok(QubitDoublet {
        e0: values[0],
        e1: values[1],
        e2: values.get(2).copied().unwrap_or(values[1]),
        state0,
        state1,
    })
}

/// One shifted inverse-iteration step: sharpens an eigenvector from the
/// dense QR solve (whose accuracy is limited) to near machine precision.
/// Falls back to the input if the shifted system is unsolvable.
fn polish_eigenvector(
    h: &SpinOperator,
    value: f64,
    vector: &[Complex64],
    scale: f64,
) -> Vec<Complex64> {
    let dim = h.dim();
    let shift = Complex64::new(value + 1e-10 * scale, 0.0);
    let mut a = h.matrix.clone();
    for i in 0..dim {
        a[(i, i)] -= shift;
    }
    let rhs = nalgebra::DVector::from_column_slice(vector);
    let Some(sol) = a.lu().solve(&rhs) else {
        return vector.to_vec();
    };
    let norm = sol.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 1e-8) {
        return vector.to_vec();
    }
    // fix the global phase to match the input vector
    let ov: Complex64 = vector.iter().zip(sol.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if ov.norm() > 1e-12 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
    sol.iter().map(|v| v / norm * phase.conj()).collect()
}

fn matel(op: &SpinOperator, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, bi) in bra.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, kj) in ket.iter().enumerate() {
            let v = op.matrix[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                row += v * kj;
            }
        }
        acc += bi.conj() * row;
    }
    acc
}

fn apply_op(op: &SpinOperator, v: &[Complex64]) -> Vec<Complex64> {
    let dim = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        let c = v[j];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for i in 0..dim {
            let m = op.matrix[(i, j)];
            if m != Complex64::new(0.0, 0.0) {
                out[i] += m * c;
            }
        }
    }
    out
}

/// Rotate a (near-)degenerate pair so each vector is an eigenvector of `op`
/// restricted to their span.
fn rotate_pair(v0: &[Complex64], v1: &[Complex64], op: &SpinOperator) -> (Vec<Complex64>, Vec<Complex64>) {
    let b = [
        [matel(op, v0, v0), matel(op, v0, v1)],
        [matel(op, v1, v0), matel(op, v1, v1)],
    ];
    // Eigenvectors of the 2x2 restriction (general complex, closed form).
    let tr = b[0][0] + b[1][1];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l0 = (tr + disc) / 2.0;
    let l1 = (tr - disc) / 2.0;
    let vec_for = |l: Complex64| -> [Complex64; 2] {
        // (B - l) c = 0
        let r1 = [b[0][0] - l, b[0][1]];
        let r2 = [b[1][0], b[1][1] - l];
        let (a, c) = if r1[0].norm() + r1[1].norm() > r2[0].norm() + r2[1].norm() {
            (r1[1], -r1[0])
        } else {
            (r2[1], -r2[0])
        };
        let n = (a.norm_sqr() + c.norm_sqr()).sqrt();
        if n < 1e-14 {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [a / n, c / n]
        }
    };
    let c0 = vec_for(l0);
    let c1 = vec_for(l1);
    let mix = |c: [Complex64; 2]| -> Vec<Complex64> {
        let mut out: Vec<Complex64> = v0.iter().zip(v1).map(|(a, b)| c[0] * a + c[1] * b).collect();
        let n = out.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in out.iter_mut() {
            *x /= n;
        }
        out
    };
    let mut a = mix(c0);
    let mut b2 = mix(c1);
    // Orthogonalize b against a (the 2x2 eigenvectors of a non-normal
    // restriction need not be orthogonal; the span is what matters).
    let ov: Complex64 = a.iter().zip(&b2).map(|(x, y)| x.conj() * y).sum();
    if ov.norm() > 1e-12 {
        for (y, x) in b2.iter_mut().zip(&a) {
            *y -= ov * x;
        }
        let n = b2.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            for y in b2.iter_mut() {
                *y /= n;
            }
        }
    }
    // Keep a deterministic order: lower <I> first is not meaningful, so order
    // by real part of the restricted eigenvalue.
    if l1.re < l0.re {
        std::mem::swap(&mut a, &mut b2);
    }
    (a, b2)
}

fn eigen_info(op: &SpinOperator, state: &[Complex64]) -> (Complex64, f64) {
    let ov = apply_op(op, state);
    let val: Complex64 = state.iter().zip(&ov).map(|(s, o)| s.conj() * o).sum();
    let res: f64 = ov.iter().zip(state).map(|(o, s)| (o - val * s).norm_sqr()).sum::<f64>().sqrt();
    (val, res)
}

/// Classify the doublet against the symmetry triple. Near-degenerate pairs
/// are rotated within their span per operator before the eigenvalue readout.
pub fn classify_symmetries(
    d: &QubitDoublet,
    ops: &SymmetryOps,
    tol: f64,
    degeneracy_tol: f64,
) -> ProtectionMetrics {
    let scale = d.e0.abs().max(d.e1.abs()).max(1.0);
    let degenerate = (d.e1 - d.e0).abs() <= degeneracy_tol * scale;
    let readout = |op: &SpinOperator| -> (Complex64, f64, Complex64, f64) {
        let (s0, s1) = if degenerate {
            rotate_pair(&d.state0, &d.state1, op)
        } else {
            (d.state0.clone(), d.state1.clone())
        };
        let (v0, r0) = eigen_info(op, &s0);
        let (v1, r1) = eigen_info(op, &s1);
        (v0, r0, v1, r1)
    };

    let (n0, rn0, n1, rn1) = readout(&ops.number);
    let (t0, rt0, t1, rt1) = readout(&ops.translation);
    let (i0, ri0, i1, ri1) = readout(&ops.inversion);

    let flag_n = rn0 < tol && rn1 < tol && (n0.re - n1.re).abs() < 1e-6 && n0.im.abs() < 1e-8;
    let flag_t = rt0 < tol && rt1 < tol && (t0 - Complex64::new(1.0, 0.0)).norm() < 1e-6
        && (t1 - Complex64::new(1.0, 0.0)).norm() < 1e-6;
    let flag_i = ri0 < tol && ri1 < tol && (i0.re * i1.re + 1.0).abs() < 1e-6;

    let (r, dd) = sensitivity_pair(d);
    ProtectionMetrics {
        r,
        d: dd,
        n0: n0.re,
        n1: n1.re,
        tau0: t0,
        tau1: t1,
        iota0: i0.re,
        iota1: i1.re,
        flag_n,
        flag_t,
        flag_i,
    }
}

fn sensitivity_pair(d: &QubitDoublet) -> (f64, f64) {
    let m = d.state0.len().trailing_zeros() as usize;
    let mut r_max = 0.0f64;
    let mut d_max = 0.0f64;
    for site in 0..m {
        let mut r_sq = 0.0;
        let mut d_sq = 0.0;
        for w in SIGMA_W {
            let s0 = apply_pauli(w, site, &d.state0);
            let s1w = apply_pauli(w, site, &d.state1);
            let t10: Complex64 = d.state1.iter().zip(&s0).map(|(a, b)| a.conj() * b).sum();
            let e1: Complex64 = d.state1.iter().zip(&s1w).map(|(a, b)| a.conj() * b).sum();
            let e0: Complex64 = d.state0.iter().zip(&s0).map(|(a, b)| a.conj() * b).sum();
            r_sq += t10.norm_sqr();
            d_sq += (e1 - e0).norm_sqr();
        }
        r_max = r_max.max(r_sq.sqrt());
        d_max = d_max.max(d_sq.sqrt());
    }
    (r_max, d_max)
}

/// Relaxation and dephasing sensitivities (max over sites; site-independent
/// when the symmetry flags hold).
pub fn sensitivity_metrics(d: &QubitDoublet) -> (f64, f64) {
    sensitivity_pair(d)
}

/// One row of the protection map.
#[derive(Debug, Clone)]
pub struct ProtectionRow {
    pub zeta: f64,
    pub lambda: f64,
    pub gap: f64,
    pub metrics: ProtectionMetrics,
}

pub const DEGENERACY_TOL: f64 = 1e-8;
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Sweep the (ζ, λ) plane at fixed t. One row per grid point, row-major over
/// `zeta_grid` × `lambda_grid`; deterministic and independent of thread
/// count.
pub fn sweep_protection_map(
    p0: &SpinChainParams,
    zeta_grid: &[f64],
    lambda_grid: &[f64],
) -> Result<Vec<ProtectionRow>, SpinError> {
    p0.validate()?;
    let ops = build_symmetry_operators(p0.m)?;
    let points: Vec<(f64, f64)> = zeta_grid
        .iter()
        .flat_map(|&z| lambda_grid.iter().map(move |&l| (z, l)))
        .collect();
    points
        .par_iter()
        .map(|&(zeta, lambda)| {
            let p = SpinChainParams { zeta, lambda, ..*p0 };
            let h = build_spin_hamiltonian(&p)?;
            let d = ground_doublet(&h, DEGENERACY_TOL)?;
            let metrics = classify_symmetries(&d, &ops, SYMMETRY_TOL, DEGENERACY_TOL);
            Ok(ProtectionRow { zeta, lambda, gap: d.gap(), metrics })
        })
        .collect()
}
