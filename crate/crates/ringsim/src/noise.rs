//! 1/f-noise synthesis and Monte Carlo pure dephasing.
//!
//! Pipeline: synthesize noise traces from a piecewise 1/f power spectral
//! density by inverse DFT, fit a second-order Taylor response surface of the
//! qubit splitting ω01 over the noisy parameters, accumulate the phase
//! φ(t) = ∫ 2π·δν01 dt per trajectory, and average exp(−iφ) over the
//! ensemble to obtain the coherence decay f_φ(t) and the 1/e dephasing time.
//!
//! Units: PSD amplitudes are parameter²/Hz at 1 Hz with parameters in
//! Cooper pairs (gate channels) or Φ0 (flux channels); response surfaces are
//! in GHz per parameter unit; times are seconds.

use crate::circuit::{self, CircuitParams, NODES, OUTER};
use crate::sparse;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid noise parameters: {0}")]
    InvalidParams(String),
    #[error("record length must be odd, got {0}")]
    EvenRecord(usize),
    #[error("channel/trace mismatch: {0} channels, {1} traces")]
    ChannelMismatch(usize, usize),
    #[error(transparent)]
    Circuit(#[from] circuit::CircuitError),
    #[error(transparent)]
    Solver(#[from] sparse::SparseError),
}

/// Total charge-noise power at 1 Hz: (2×10⁻⁴ e)² = (10⁻⁴ Cooper pairs)².
pub const CHARGE_NOISE_A_TOTAL: f64 = 1e-8;
/// Total flux-noise power at 1 Hz: (2×10⁻⁶ Φ0)².
pub const FLUX_NOISE_A_TOTAL: f64 = 4e-12;
/// Infrared cutoff, Hz.
pub const F_IR: f64 = 1.0;
/// Ultraviolet cutoff, Hz.
pub const F_UV: f64 = 1e6;

/// Piecewise 1/f power spectral density: A below f_IR, A/|f| up to f_UV,
/// zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdSpec {
    /// Power at 1 Hz, parameter²/Hz.
    pub a: f64,
    pub f_ir: f64,
    pub f_uv: f64,
}

impl PsdSpec {
    pub fn one_over_f(a: f64) -> Self {
        Self { a, f_ir: F_IR, f_uv: F_UV }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.a >= 0.0) {
            return Err(NoiseError::InvalidParams(format!("negative PSD amplitude {}", self.a)));
        }
        if !(self.f_ir > 0.0 && self.f_ir < self.f_uv) {
            return Err(NoiseError::InvalidParams(format!(
                "need 0 < f_IR < f_UV, got {} and {}",
                self.f_ir, self.f_uv
            )));
        }
        Ok(())
    }

    /// S(f); even in f.
    pub fn value(&self, f: f64) -> f64 {
        let af = f.abs();
        if af < self.f_ir {
            self.a
        } else if af < self.f_uv {
            self.a / af
        } else {
            0.0
        }
    }

    /// Variance of a sampled record: S(0)Δf + 2·Σ_{k≥1} S(f_k)Δf.
    pub fn record_variance(&self, n: usize, delta_f: f64) -> f64 {
        let half = (n - 1) / 2;
        let mut v = self.value(0.0) * delta_f;
        for k in 1..=half {
            v += 2.0 * self.value(k as f64 * delta_f) * delta_f;
        }
        v
    }
}

/// Record-length presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPreset {
    pub n: usize,
    pub delta_f: f64,
}

impl SamplingPreset {
    /// Production-scale record: N = 2×10⁶ − 1, Δf = 0.5 Hz.
    pub fn full() -> Self {
        Self { n: 2_000_000 - 1, delta_f: 0.5 }
    }

    /// Reduced record for workstation runs: N = 2×10⁵ − 1, Δf = 5 Hz.
    pub fn desk() -> Self {
        Self { n: 200_000 - 1, delta_f: 5.0 }
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.n as f64 * self.delta_f)
    }
}

/// A real sampled noise record.
#[derive(Debug, Clone)]
pub struct NoiseTrace {
    pub samples: Vec<f64>,
    /// Timestep 1/(N·Δf), seconds.
    pub dt: f64,
    pub seed: u64,
    /// Largest imaginary residue of the synthesis relative to the RMS.
    pub imag_residue: f64,
}

/// Synthesize one record: complex Gaussian amplitudes Z_k√(S(f_k)Δf) with
/// Hermitian symmetry Z_{−k} = Z_k* and a real DC component, transformed by
/// an (unnormalized) inverse DFT.
pub fn sample_noise(spec: &PsdSpec, n: usize, delta_f: f64, seed: u64) -> Result<NoiseTrace, NoiseError> {
    spec.validate()?;
    if n % 2 == 0 {
        return Err(NoiseError::EvenRecord(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freq = vec![Complex64::new(0.0, 0.0); n];
    let z0: f64 = rng.sample(StandardNormal);
    freq[0] = Complex64::new(z0 * (spec.value(0.0) * delta_f).sqrt(), 0.0);
    let half = (n - 1) / 2;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=half {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let z = Complex64::new(re, im) * inv_sqrt2;
        let amp = (spec.value(k as f64 * delta_f) * delta_f).sqrt();
        freq[k] = z * amp;
        freq[n - k] = (z * amp).conj();
    }
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    ifft.process(&mut freq);
    let rms = (freq.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let imag_residue = if rms > 0.0 {
        freq.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max) / rms
    } else {
        0.0
    };
    Ok(NoiseTrace {
        samples: freq.iter().map(|c| c.re).collect(),
        dt: 1.0 / (n as f64 * delta_f),
        seed,
        imag_residue,
    })
}

/// A noisy circuit parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Gate charge of one node, Cooper pairs.
    Gate(usize),
    /// Flux of one inner sector, Φ0.
    InnerFlux(usize),
    /// Flux of one outer loop, Φ0.
    OuterFlux(usize),
}

impl ChannelKind {
    pub fn label(&self) -> String {
        match self {
            ChannelKind::Gate(i) => format!("gate{i}"),
            ChannelKind::InnerFlux(i) => format!("inner{i}"),
            ChannelKind::OuterFlux(i) => format!("outer{i}"),
        }
    }

    /// Apply an offset of `x` parameter units to `p`.
    pub fn apply(&self, p: &mut CircuitParams, x: f64) {
        match *self {
            ChannelKind::Gate(i) => p.ng[i] += x,
            ChannelKind::InnerFlux(i) => p.phi_inner[i] += x,
            ChannelKind::OuterFlux(i) => p.phi_outer[i] += x,
        }
    }

    /// Default stencil step: 10⁻³ Cooper pairs or 10⁻⁵ Φ0.
    pub fn default_step(&self) -> f64 {
        match self {
            ChannelKind::Gate(_) => 1e-3,
            _ => 1e-5,
        }
    }
}

/// The six gate-charge channels.
pub fn charge_channels() -> Vec<ChannelKind> {
    (0..NODES).map(ChannelKind::Gate).collect()
}

/// The nine loop-flux channels (6 inner sectors + 3 outer loops).
pub fn flux_channels() -> Vec<ChannelKind> {
    (0..NODES)
        .map(ChannelKind::InnerFlux)
        .chain((0..OUTER).map(ChannelKind::OuterFlux))
        .collect()
}

/// Second-order Taylor model of ω01 over a channel set.
#[derive(Debug, Clone)]
pub struct ResponseSurface {
    /// ω01 at the expansion point, GHz.
    pub omega_ref: f64,
    pub labels: Vec<String>,
    /// First derivatives, GHz per parameter unit.
    pub d1: Vec<f64>,
    /// Second-derivative matrix, GHz per unit²; symmetric by construction.
    pub d2: nalgebra::DMatrix<f64>,
}

impl ResponseSurface {
    pub fn channels(&self) -> usize {
        self.d1.len()
    }

    /// δω01(x) = Σ D_m x_m + ½ Σ D_mn x_m x_n, GHz.
    pub fn delta_omega(&self, x: &[f64]) -> f64 {
        let c = self.channels();
        debug_assert_eq!(x.len(), c);
        let mut d = 0.0;
        for m in 0..c {
            d += self.d1[m] * x[m];
            for n in 0..c {
                d += 0.5 * self.d2[(m, n)] * x[m] * x[n];
            }
        }
        d
    }
}

/// Fit first and second derivatives of a scalar function by central
/// differences: 3-point stencils on the diagonal and 4-point stencils for
/// cross terms. The evaluator is called with parameter offsets per channel.
pub fn fit_from_evaluator<E>(
    f: impl FnMut(&[f64]) -> Result<f64, E>,
    steps: &[f64],
    labels: Vec<String>,
) -> Result<ResponseSurface, E> {
    fit_from_evaluator_with(f, steps, labels, true)
}

/// As [`fit_from_evaluator`], but cross-term stencils are optional: with
/// `cross_terms = false` the off-diagonal curvatures are left at zero,
/// reducing the evaluation count from 1 + 2c + 2c(c−1) to 1 + 2c.
pub fn fit_from_evaluator_with<E>(
    mut f: impl FnMut(&[f64]) -> Result<f64, E>,
    steps: &[f64],
    labels: Vec<String>,
    cross_terms: bool,
) -> Result<ResponseSurface, E> {
    let c = steps.len();
    let mut x = vec![0.0; c];
    let f0 = f(&x)?;
    let mut d1 = vec![0.0; c];
    let mut d2 = nalgebra::DMatrix::<f64>::zeros(c, c);
    let mut plus = vec![0.0; c];
    let mut minus = vec![0.0; c];
    for m in 0..c {
        let h = steps[m];
        x[m] = h;
        let fp = f(&x)?;
        x[m] = -h;
        let fm = f(&x)?;
        x[m] = 0.0;
        plus[m] = fp;
        minus[m] = fm;
        d1[m] = (fp - fm) / (2.0 * h);
        d2[(m, m)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for m in 0..c {
        if !cross_terms {
            break;
        }
        for n in (m + 1)..c {
            let (hm, hn) = (steps[m], steps[n]);
            x[m] = hm;
            x[n] = hn;
            let fpp = f(&x)?;
            x[n] = -hn;
            let fpm = f(&x)?;
            x[m] = -hm;
            let fmm = f(&x)?;
            x[n] = hn;
            let fmp = f(&x)?;
            x[m] = 0.0;
            x[n] = 0.0;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hm * hn);
            d2[(m, n)] = v;
            d2[(n, m)] = v;
        }
    }
    Ok(ResponseSurface { omega_ref: f0, labels, d1, d2 })
}

/// Fit the ω01 response surface of a circuit over `channels` at reduced
/// charge cutoff `d_fit`, reusing eigenvectors between neighbouring stencil
/// points as warm starts.
pub fn fit_response_surface(
    base: &CircuitParams,
    channels: &[ChannelKind],
    steps: Option<&[f64]>,
    d_fit: usize,
) -> Result<ResponseSurface, NoiseError> {
    fit_response_surface_with(base, channels, steps, d_fit, true)
}

/// As [`fit_response_surface`], optionally skipping cross-channel stencils.
/// At the operating point the channels decouple to leading order, so the
/// diagonal-only fit is a good approximation at a fraction of the solves.
pub fn fit_response_surface_with(
    base: &CircuitParams,
    channels: &[ChannelKind],
    steps: Option<&[f64]>,
    d_fit: usize,
    cross_terms: bool,
) -> Result<ResponseSurface, NoiseError> {
    let default_steps: Vec<f64> = channels.iter().map(|c| c.default_step()).collect();
    let steps = steps.unwrap_or(&default_steps);
    if steps.len() != channels.len() {
        return Err(NoiseError::ChannelMismatch(channels.len(), steps.len()));
    }
    let mut p0 = base.clone();
    p0.d = d_fit;
    let mut guess: Option<Vec<Vec<Complex64>>> = None;
    let labels = channels.iter().map(|c| c.label()).collect();
    fit_from_evaluator_with(
        |x: &[f64]| -> Result<f64, NoiseError> {
            let mut p = p0.clone();
            for (c, &xi) in channels.iter().zip(x) {
                c.apply(&mut p, xi);
            }
            let e = circuit::eigenpairs_warm(&p, 2, guess.as_deref())?;
            let omega = e.values[1] - e.values[0];
            guess = Some(e.vectors);
            Ok(omega)
        },
        steps,
        labels,
        cross_terms,
    )
}

/// Accumulated phase φ(t_l) of one trajectory over the first `t_count`
/// samples: trapezoid integration of 2π·10⁹·δν01(t), radians.
pub fn accumulate_phase(
    traces: &[NoiseTrace],
    rs: &ResponseSurface,
    t_count: usize,
) -> Result<Vec<f64>, NoiseError> {
    if traces.len() != rs.channels() {
        return Err(NoiseError::ChannelMismatch(rs.channels(), traces.len()));
    }
    let count = traces
        .iter()
        .map(|t| t.samples.len())
        .min()
        .unwrap_or(0)
        .min(t_count);
    let dt = traces.first().map(|t| t.dt).unwrap_or(0.0);
    let mut x = vec![0.0; rs.channels()];
    let mut phi = Vec::with_capacity(count);
    let mut acc = 0.0;
    let mut prev = 0.0;
    for l in 0..count {
        for (xi, tr) in x.iter_mut().zip(traces) {
            *xi = tr.samples[l];
        }
        // GHz -> angular rate
        let rate = std::f64::consts::TAU * 1e9 * rs.delta_omega(&x);
        if l == 0 {
            phi.push(0.0);
        } else {
            acc += 0.5 * (prev + rate) * dt;
            phi.push(acc);
        }
        prev = rate;
    }
    Ok(phi)
}

/// Ensemble-averaged coherence decay.
#[derive(Debug, Clone)]
pub struct CoherenceCurve {
    /// Sample times, seconds.
    pub t: Vec<f64>,
    /// f_φ(t) = ⟨exp(−iφ)⟩.
    pub f: Vec<Complex64>,
    /// Bootstrap standard error of |f_φ|.
    pub err: Vec<f64>,
    pub ensemble: usize,
}

/// Average exp(−iφ) over trajectories sampled every `stride` timesteps,
/// with bootstrap error bars on |f_φ|.
pub fn coherence_curve(phases: &[Vec<f64>], dt: f64, stride: usize, seed: u64) -> CoherenceCurve {
    let ensemble = phases.len();
    let count = phases.iter().map(Vec::len).min().unwrap_or(0);
    let stride = stride.max(1);
    let idx: Vec<usize> = (0..count).step_by(stride).collect();
    let mut t = Vec::with_capacity(idx.len());
    let mut f = Vec::with_capacity(idx.len());
    let mut err = Vec::with_capacity(idx.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x626f_6f74);
    const BOOT: usize = 100;
    // pre-draw bootstrap resamples so every time point uses the same ones
    let resamples: Vec<Vec<usize>> = (0..BOOT)
        .map(|_| (0..ensemble).map(|_| rng.gen_range(0..ensemble)).collect())
        .collect();
    for &l in &idx {
        let vals: Vec<Complex64> = phases.iter().map(|p| Complex64::from_polar(1.0, -p[l])).collect();
        let mean = vals.iter().sum::<Complex64>() / ensemble.max(1) as f64;
        let boot_std = if ensemble > 1 {
            let mags: Vec<f64> = resamples
                .iter()
                .map(|r| {
                    (r.iter().map(|&i| vals[i]).sum::<Complex64>() / ensemble as f64).norm()
                })
                .collect();
            let m = mags.iter().sum::<f64>() / BOOT as f64;
            (mags.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (BOOT - 1) as f64).sqrt()
        } else {
            0.0
        };
        t.push(l as f64 * dt);
        f.push(mean);
        err.push(boot_std);
    }
    CoherenceCurve { t, f, err, ensemble }
}

/// 1/e dephasing time extracted from a coherence curve.
#[derive(Debug, Clone, Copy)]
pub struct DephasingTime {
    /// Seconds; the record end if no crossing was observed.
    pub t_phi: f64,
    /// True when |f_φ| never dropped below 1/e within the record.
    pub lower_bound: bool,
}

/// First crossing of |f_φ| below 1/e, linearly interpolated.
pub fn dephasing_time(c: &CoherenceCurve) -> DephasingTime {
    let target = (-1.0f64).exp();
    let mut prev = (0.0, 1.0);
    for (t, f) in c.t.iter().zip(&c.f) {
        let m = f.norm();
        if m < target {
            let (t0, m0) = prev;
            let frac = if (m0 - m).abs() > 1e-300 { (m0 - target) / (m0 - m) } else { 1.0 };
            return DephasingTime { t_phi: t0 + frac * (t - t0), lower_bound: false };
        }
        prev = (*t, m);
    }
    DephasingTime { t_phi: c.t.last().copied().unwrap_or(0.0), lower_bound: true }
}

/// Outcome of a full dephasing Monte Carlo for one channel family.
#[derive(Debug, Clone)]
pub struct DephasingResult {
    pub curve: CoherenceCurve,
    pub t_phi: DephasingTime,
}

/// Configuration of a dephasing Monte Carlo run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DephasingConfig {
    /// Total PSD power at 1 Hz, split evenly over the channels.
    pub total_a: f64,
    pub preset: SamplingPreset,
    /// Trajectories in the ensemble.
    pub ensemble: usize,
    /// Samples to integrate per trajectory.
    pub t_count: usize,
    /// Output decimation for the coherence curve.
    pub stride: usize,
    pub seed: u64,
}

impl DephasingConfig {
    pub fn desk(total_a: f64, seed: u64) -> Self {
        Self {
            total_a,
            preset: SamplingPreset::desk(),
            ensemble: 400,
            t_count: 20_000,
            stride: 10,
            seed,
        }
    }
}

/// Run the Monte Carlo: one independent trace per channel per trajectory,
/// phases accumulated from the response surface, ensemble-averaged.
pub fn dephasing_monte_carlo(rs: &ResponseSurface, cfg: &DephasingConfig) -> Result<DephasingResult, NoiseError> {
    let channels = rs.channels();
    if channels == 0 {
        return Err(NoiseError::InvalidParams("no channels".into()));
    }
    let spec = PsdSpec::one_over_f(cfg.total_a / channels as f64);
    spec.validate()?;
    let phases: Result<Vec<Vec<f64>>, NoiseError> = (0..cfg.ensemble)
        .into_par_iter()
        .map(|traj| {
            let traces: Result<Vec<NoiseTrace>, NoiseError> = (0..channels)
                .map(|ch| {
                    // distinct stream per (trajectory, channel)
                    let seed = cfg
                        .seed
                        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                        .wrapping_add((traj * channels + ch) as u64);
                    sample_noise(&spec, cfg.preset.n, cfg.preset.delta_f, seed)
                })
                .collect();
            accumulate_phase(&traces?, rs, cfg.t_count)
        })
        .collect();
    let phases = phases?;
    let curve = coherence_curve(&phases, cfg.preset.dt(), cfg.stride, cfg.seed);
    let t_phi = dephasing_time(&curve);
    Ok(DephasingResult { curve, t_phi })
}
