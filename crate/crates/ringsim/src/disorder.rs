//! Random parameter disorder ensembles.
//!
//! Each realization draws independent Gaussian factors: per junction an area
//! factor X and an oxidation factor Y with E_J → E_J(1+X)(1+Y) and
//! E_C → E_C/(1+X); per loop a size factor Z with Φ → Φ(1+Z); and per gate
//! an additive charge offset in Cooper pairs. Realizations are reproducible
//! from (base seed, index) alone, independent of execution order.

use crate::circuit::{self, CircuitParams, NODES, OUTER};
use crate::noise::{self, DephasingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DisorderError {
    #[error("invalid disorder parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Circuit(#[from] circuit::CircuitError),
    #[error(transparent)]
    Noise(#[from] noise::NoiseError),
}

/// Disorder strengths and ensemble bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// Std dev of the junction factors X and Y (relative).
    pub sigma_junction: f64,
    /// Std dev of the loop size factors Z (relative).
    pub sigma_loop: f64,
    /// Std dev of the additive gate-charge offsets, Cooper pairs.
    pub sigma_gate: f64,
    pub realizations: usize,
    pub base_seed: u64,
}

impl DisorderSpec {
    pub fn junction(realizations: usize, base_seed: u64) -> Self {
        Self { sigma_junction: 0.02, sigma_loop: 0.0, sigma_gate: 0.0, realizations, base_seed }
    }

    pub fn loops(realizations: usize, base_seed: u64) -> Self {
        Self { sigma_junction: 0.0, sigma_loop: 0.002, sigma_gate: 0.0, realizations, base_seed }
    }

    pub fn gates(realizations: usize, base_seed: u64) -> Self {
        Self { sigma_junction: 0.0, sigma_loop: 0.0, sigma_gate: 0.001, realizations, base_seed }
    }

    pub fn validate(&self) -> Result<(), DisorderError> {
        for (name, s) in [
            ("sigma_junction", self.sigma_junction),
            ("sigma_loop", self.sigma_loop),
            ("sigma_gate", self.sigma_gate),
        ] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(DisorderError::InvalidParams(format!("{name} must be ≥ 0, got {s}")));
            }
        }
        Ok(())
    }
}

/// E_J(1+X)(1+Y), E_C/(1+X): the area factor X cancels in the product
/// E_J·E_C, the oxidation factor Y does not.
pub fn apply_junction_disorder(e_j: f64, e_c: f64, x: f64, y: f64) -> (f64, f64) {
    (e_j * (1.0 + x) * (1.0 + y), e_c / (1.0 + x))
}

fn realization_rng(base_seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        base_seed
            .wrapping_mul(0x2545_f491_4f6c_dd1d)
            .wrapping_add(index as u64 + 1),
    )
}

/// Draw a factor 1 + N(0, sigma), resampling while it is ≤ 0 so that
/// energies stay positive; returns (factor, resample count).
fn positive_factor(rng: &mut ChaCha8Rng, sigma: f64) -> (f64, usize) {
    let mut resamples = 0;
    loop {
        let f = 1.0 + sigma * rng.sample::<f64, _>(StandardNormal);
        if f > 0.0 {
            return (f, resamples);
        }
        resamples += 1;
    }
}

/// One disorder realization.
#[derive(Debug, Clone)]
pub struct Realization {
    pub params: CircuitParams,
    pub index: usize,
    pub seed: u64,
    /// Redraws needed to keep all energies positive.
    pub resamples: usize,
}

/// Transform `base` by the disorder draws of realization `index`.
pub fn sample_realization(
    base: &CircuitParams,
    spec: &DisorderSpec,
    index: usize,
) -> Result<Realization, DisorderError> {
    spec.validate()?;
    let mut rng = realization_rng(spec.base_seed, index);
    let mut p = base.clone();
    let mut resamples = 0;

    // junctions: radial, azimuthal (6 each), outer (3); one X, one Y each
    let mut junction = |e_j: &mut f64, e_c: &mut f64| {
        let (fx, rx) = positive_factor(&mut rng, spec.sigma_junction);
        let (fy, ry) = positive_factor(&mut rng, spec.sigma_junction);
        resamples += rx + ry;
        let (j, c) = apply_junction_disorder(*e_j, *e_c, fx - 1.0, fy - 1.0);
        *e_j = j;
        *e_c = c;
    };
    for n in 0..NODES {
        junction(&mut p.e_jr[n], &mut p.e_cr[n]);
    }
    for n in 0..NODES {
        junction(&mut p.e_ja[n], &mut p.e_ca[n]);
    }
    for j in 0..OUTER {
        junction(&mut p.e_jl[j], &mut p.e_cl[j]);
    }

    // loops: 6 inner sectors + 3 outer
    for n in 0..NODES {
        let z: f64 = rng.sample(StandardNormal);
        p.phi_inner[n] *= 1.0 + spec.sigma_loop * z;
    }
    for j in 0..OUTER {
        let z: f64 = rng.sample(StandardNormal);
        p.phi_outer[j] *= 1.0 + spec.sigma_loop * z;
    }

    // gates: additive offsets in Cooper pairs; charge windows stay anchored
    for n in 0..NODES {
        let g: f64 = rng.sample(StandardNormal);
        p.ng[n] += spec.sigma_gate * g;
    }

    Ok(Realization { params: p, index, seed: spec.base_seed, resamples })
}

/// Which observables an ensemble run computes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub spec: DisorderSpec,
    /// Charge cutoff for the gap diagonalization.
    pub d_spectrum: usize,
    pub compute_gap: bool,
    /// Cutoff for response-surface fits when dephasing is requested.
    pub d_fit: usize,
    pub t_phi_charge: Option<DephasingConfig>,
    pub t_phi_flux: Option<DephasingConfig>,
}

impl EnsembleConfig {
    /// Gap-only ensemble at a reduced cutoff.
    pub fn gap_only(spec: DisorderSpec, d_spectrum: usize) -> Self {
        Self { spec, d_spectrum, compute_gap: true, d_fit: 4, t_phi_charge: None, t_phi_flux: None }
    }
}

/// Per-realization observable record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub resamples: usize,
    pub gap_ghz: Option<f64>,
    pub t_phi_c_s: Option<f64>,
    pub t_phi_f_s: Option<f64>,
    /// Solver failure message, if any; failed records are excluded from the
    /// summary statistics.
    pub failure: Option<String>,
}

/// Mean/std/histogram of one observable over the ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub bin_edges: Vec<f64>,
    pub bin_counts: Vec<usize>,
}

pub fn summarize(name: &str, values: &[f64], bins: usize) -> ObservableSummary {
    let count = values.len();
    let mean = if count > 0 { values.iter().sum::<f64>() / count as f64 } else { 0.0 };
    let std = if count > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
        (l.min(v), h.max(v))
    });
    let (lo, hi) = if count == 0 {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let bins = bins.max(1);
    let bin_edges: Vec<f64> =
        (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
    let mut bin_counts = vec![0usize; bins];
    for &v in values {
        let i = (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
        bin_counts[i] += 1;
    }
    ObservableSummary { name: name.into(), count, mean, std, bin_edges, bin_counts }
}

/// Ensemble results: every record plus summary statistics over the
/// non-failed realizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub records: Vec<RealizationRecord>,
    pub observables: Vec<ObservableSummary>,
    pub failures: usize,
    pub total_resamples: usize,
}

fn run_one(base: &CircuitParams, cfg: &EnsembleConfig, index: usize) -> RealizationRecord {
    let real = match sample_realization(base, &cfg.spec, index) {
        Ok(r) => r,
        Err(e) => {
            return RealizationRecord {
                index,
                resamples: 0,
                gap_ghz: None,
                t_phi_c_s: None,
                t_phi_f_s: None,
                failure: Some(e.to_string()),
            }
        }
    };
    let mut rec = RealizationRecord {
        index,
        resamples: real.resamples,
        gap_ghz: None,
        t_phi_c_s: None,
        t_phi_f_s: None,
        failure: None,
    };
    let mut attempt = || -> Result<(), DisorderError> {
        if cfg.compute_gap {
            let mut p = real.params.clone();
            p.d = cfg.d_spectrum;
            let e = circuit::eigenpairs(&p, 2)?;
            rec.gap_ghz = Some(e.values[1] - e.values[0]);
        }
        let dephase =
            |channels: &[noise::ChannelKind], c: &DephasingConfig| -> Result<f64, DisorderError> {
                let rs = noise::fit_response_surface(&real.params, channels, None, cfg.d_fit)?;
                let mut c = c.clone();
                // decorrelate trajectories between realizations
                c.seed = c.seed.wrapping_add(index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
                Ok(noise::dephasing_monte_carlo(&rs, &c)?.t_phi.t_phi)
            };
        if let Some(c) = &cfg.t_phi_charge {
            rec.t_phi_c_s = Some(dephase(&noise::charge_channels(), c)?);
        }
        if let Some(c) = &cfg.t_phi_flux {
            rec.t_phi_f_s = Some(dephase(&noise::flux_channels(), c)?);
        }
        Ok(())
    };
    if let Err(e) = attempt() {
        rec.failure = Some(e.to_string());
    }
    rec
}

/// Run the full ensemble. Realizations are independent; the record order is
/// fixed by index regardless of scheduling.
pub fn ensemble_run(base: &CircuitParams, cfg: &EnsembleConfig) -> Result<EnsembleSummary, DisorderError> {
    cfg.spec.validate()?;
    // The heavy per-realization work is already parallel inside the
    // eigensolver and Monte Carlo; run realizations sequentially to keep
    // peak memory bounded by a single Hamiltonian.
    let records: Vec<RealizationRecord> =
        (0..cfg.spec.realizations).map(|i| run_one(base, cfg, i)).collect();
    let failures = records.iter().filter(|r| r.failure.is_some()).count();
    let total_resamples = records.iter().map(|r| r.resamples).sum();
    let ok = |f: fn(&RealizationRecord) -> Option<f64>| -> Vec<f64> {
        records.iter().filter(|r| r.failure.is_none()).filter_map(f).collect()
    };
    let mut observables = Vec::new();
    const BINS: usize = 8;
    let gaps = ok(|r| r.gap_ghz);
    if !gaps.is_empty() {
        observables.push(summarize("gap_ghz", &gaps, BINS));
    }
    let tc = ok(|r| r.t_phi_c_s);
    if !tc.is_empty() {
        observables.push(summarize("t_phi_c_s", &tc, BINS));
    }
    let tf = ok(|r| r.t_phi_f_s);
    if !tf.is_empty() {
        observables.push(summarize("t_phi_f_s", &tf, BINS));
    }
    Ok(EnsembleSummary { records, observables, failures, total_resamples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_disorder_is_identity() {
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec {
            sigma_junction: 0.0,
            sigma_loop: 0.0,
            sigma_gate: 0.0,
            realizations: 5,
            base_seed: 3,
        };
        for i in 0..5 {
            let r = sample_realization(&base, &spec, i).unwrap();
            assert_eq!(r.params, base);
            assert_eq!(r.resamples, 0);
        }
    }

    #[test]
    fn product_invariant_under_area_factor() {
        let (j, c) = apply_junction_disorder(6.0, 2.1, 0.05, 0.0);
        assert!((j * c - 6.0 * 2.1).abs() < 1e-12);
        // oxidation factor does change the product
        let (j2, c2) = apply_junction_disorder(6.0, 2.1, 0.0, 0.05);
        assert!((j2 * c2 - 6.0 * 2.1 * 1.05).abs() < 1e-12);
    }

    #[test]
    fn junction_shift_statistics() {
        // std of the relative E_J shift over many draws ≈ √2·σ (product of
        // two independent factors).
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec::junction(10_000, 11);
        let mut shifts = Vec::with_capacity(10_000 * NODES);
        for i in 0..spec.realizations {
            let r = sample_realization(&base, &spec, i).unwrap();
            for n in 0..NODES {
                shifts.push(r.params.e_ja[n] / base.e_ja[n] - 1.0);
            }
        }
        let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
        let std = (shifts.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / (shifts.len() - 1) as f64)
            .sqrt();
        let expect = std::f64::consts::SQRT_2 * 0.02;
        let rel = (std - expect).abs() / expect;
        assert!(rel < 0.05, "std {std:e} vs {expect:e} (rel {rel:.3})");
    }

    #[test]
    fn loop_and_gate_disorder_touch_the_right_fields() {
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec::loops(1, 21);
        let r = sample_realization(&base, &spec, 0).unwrap();
        assert_ne!(r.params.phi_inner, base.phi_inner);
        assert_eq!(r.params.ng, base.ng);
        assert_eq!(r.params.e_ja, base.e_ja);
        for n in 0..NODES {
            let rel = (r.params.phi_inner[n] / base.phi_inner[n] - 1.0).abs();
            assert!(rel < 0.02, "loop shift {rel} too large for σ = 0.2%");
        }

        let spec = DisorderSpec::gates(1, 22);
        let r = sample_realization(&base, &spec, 0).unwrap();
        assert_ne!(r.params.ng, base.ng);
        assert_eq!(r.params.phi_inner, base.phi_inner);
        assert_eq!(r.params.charge_center, base.charge_center);
    }

    #[test]
    fn realizations_reproducible_and_independent() {
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec::junction(10, 77);
        let a = sample_realization(&base, &spec, 4).unwrap();
        let b = sample_realization(&base, &spec, 4).unwrap();
        assert_eq!(a.params, b.params);
        let c = sample_realization(&base, &spec, 5).unwrap();
        assert_ne!(a.params, c.params);
        let mut spec2 = spec;
        spec2.base_seed = 78;
        let d = sample_realization(&base, &spec2, 4).unwrap();
        assert_ne!(a.params, d.params);
    }

    #[test]
    fn extreme_disorder_keeps_energies_positive() {
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec {
            sigma_junction: 5.0,
            sigma_loop: 0.0,
            sigma_gate: 0.0,
            realizations: 20,
            base_seed: 9,
        };
        let mut any_resample = false;
        for i in 0..20 {
            let r = sample_realization(&base, &spec, i).unwrap();
            assert!(r.params.validate().is_ok());
            any_resample |= r.resamples > 0;
        }
        assert!(any_resample, "σ = 5 should have triggered redraws");
    }

    #[test]
    fn summary_statistics() {
        let s = summarize("x", &[1.0, 2.0, 3.0, 4.0], 4);
        assert_eq!(s.count, 4);
        assert!((s.mean - 2.5).abs() < 1e-12);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.bin_counts.iter().sum::<usize>(), 4);
        assert_eq!(s.bin_edges.len(), 5);
        // degenerate case: all equal values still bin
        let s1 = summarize("x", &[2.0, 2.0], 4);
        assert_eq!(s1.bin_counts.iter().sum::<usize>(), 2);
    }

    #[test]
    fn zero_disorder_ensemble_has_zero_std() {
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec {
            sigma_junction: 0.0,
            sigma_loop: 0.0,
            sigma_gate: 0.0,
            realizations: 3,
            base_seed: 5,
        };
        let cfg = EnsembleConfig::gap_only(spec, 2);
        let s = ensemble_run(&base, &cfg).unwrap();
        assert_eq!(s.failures, 0);
        assert_eq!(s.records.len(), 3);
        let gap = &s.observables[0];
        assert_eq!(gap.count, 3);
        assert_eq!(gap.std, 0.0);
        assert!(gap.mean > 0.0);
    }

    #[test]
    fn gap_ensemble_with_disorder_is_deterministic() {
        let base = CircuitParams::white_cross();
        let spec = DisorderSpec::junction(4, 123);
        let cfg = EnsembleConfig::gap_only(spec, 2);
        let a = ensemble_run(&base, &cfg).unwrap();
        let b = ensemble_run(&base, &cfg).unwrap();
        assert_eq!(a.records.len(), 4);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.gap_ghz, y.gap_ghz);
        }
        let gap = &a.observables[0];
        assert!(gap.std > 0.0);
    }
}
