//! Manifest-driven experiment execution: each run resolves its manifest,
//! creates a namespaced output directory, and writes CSV artifacts whose
//! bodies are deterministic for a fixed manifest and thread count.

use crate::circuit::{self, NODES};
use crate::csvio::{write_atomic, CsvError, CsvTable};
use crate::disorder::{self, EnsembleConfig};
use crate::manifest::{
    CircuitSpectrumParams, DephasingParams, DisorderParams, Experiment, ManifestError,
    NoiseFamily, PotentialMapParams, Preset, RunManifest, SpectroscopyParams, SpinMapParams,
};
use crate::noise::{
    self, DephasingConfig, DephasingResult, SamplingPreset, CHARGE_NOISE_A_TOTAL,
    FLUX_NOISE_A_TOTAL,
};
use crate::potential::{self, PotentialParams};
use crate::spin::{self, SpinChainParams};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("spin-chain failure: {0}")]
    Spin(#[from] spin::SpinError),
    #[error("circuit failure: {0}")]
    Circuit(#[from] circuit::CircuitError),
    #[error("potential failure: {0}")]
    Potential(#[from] potential::PotentialError),
    #[error("noise failure: {0}")]
    Noise(#[from] noise::NoiseError),
    #[error("disorder failure: {0}")]
    Disorder(#[from] disorder::DisorderError),
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Per-preset defaults that the modules define.
#[derive(Debug, Clone, Copy)]
pub struct PresetScales {
    /// Charge cutoff for spectrum-grade diagonalization.
    pub d_spectrum: usize,
    /// Charge cutoff for sweeps (many solves per run).
    pub d_sweep: usize,
    /// Charge cutoff for charge-noise response surfaces.
    pub d_fit_charge: usize,
    /// Charge cutoff for flux-noise response surfaces. Larger than the
    /// charge one: the flux curvature of the gap grows as the cutoff opens
    /// and is far from converged at small d.
    pub d_fit_flux: usize,
    /// Cross-channel curvature stencils in response surfaces.
    pub cross_terms: bool,
    /// Noise record sampling.
    pub sampling: SamplingPreset,
    /// Integrated samples per trajectory.
    pub t_count: usize,
    /// Coherence-curve decimation.
    pub stride: usize,
    /// Raster resolution for potential maps.
    pub raster: usize,
}

impl PresetScales {
    pub fn of(p: Preset) -> Self {
        match p {
            Preset::Desk => Self {
                d_spectrum: 6,
                d_sweep: 4,
                d_fit_charge: 4,
                d_fit_flux: 10,
                cross_terms: false,
                sampling: SamplingPreset::desk(),
                t_count: 40_000,
                stride: 20,
                raster: 61,
            },
            Preset::Full => Self {
                d_spectrum: 10,
                d_sweep: 6,
                d_fit_charge: 6,
                d_fit_flux: 10,
                cross_terms: true,
                sampling: SamplingPreset::full(),
                t_count: 400_000,
                stride: 200,
                raster: 201,
            },
        }
    }
}

fn table_meta(t: &mut CsvTable, m: &RunManifest) {
    t.meta(format!("experiment: {}", m.experiment.id()));
    t.meta(format!("preset: {:?}", m.preset).to_lowercase());
    t.meta(format!("seed: {}", m.seed));
    t.meta(format!("manifest: {}", m.hash()));
    let unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    t.meta(format!("created_unix: {unix}"));
}

fn b(flag: bool) -> f64 {
    if flag {
        1.0
    } else {
        0.0
    }
}

struct RunContext<'a> {
    manifest: &'a RunManifest,
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl<'a> RunContext<'a> {
    fn write(&mut self, name: &str, table: &CsvTable) -> Result<(), RunnerError> {
        let path = self.dir.join(name);
        table.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn fresh_table(&self, headers: &[&str]) -> CsvTable {
        let mut t = CsvTable::new(headers);
        table_meta(&mut t, self.manifest);
        t
    }
}

/// Execute a validated manifest. The resolved manifest is copied into the
/// run directory first so a crashed run is still reconstructible.
pub fn run(manifest: &RunManifest) -> Result<RunArtifacts, RunnerError> {
    manifest.validate()?;
    let dir = manifest.run_dir();
    std::fs::create_dir_all(&dir)?;
    let manifest_path = dir.join("manifest.json");
    write_atomic(&manifest_path, manifest.resolved_json().as_bytes())?;
    let mut ctx = RunContext { manifest, dir, files: vec![manifest_path] };

    match &manifest.experiment {
        Experiment::SpinMap(p) => run_spin_map(&mut ctx, p)?,
        Experiment::CircuitSpectrum(p) => run_circuit_spectrum(&mut ctx, p)?,
        Experiment::PotentialMap(p) => run_potential_map(&mut ctx, p)?,
        Experiment::Spectroscopy(p) => run_spectroscopy(&mut ctx, p)?,
        Experiment::Dephasing(p) => run_dephasing(&mut ctx, p)?,
        Experiment::Disorder(p) => run_disorder(&mut ctx, p)?,
    }
    Ok(RunArtifacts { dir: ctx.dir, files: ctx.files })
}

fn run_spin_map(ctx: &mut RunContext, p: &SpinMapParams) -> Result<(), RunnerError> {
    let base = SpinChainParams::new(p.m, p.t, 0.0, 0.0)?;
    let rows = spin::sweep_protection_map(&base, &p.zeta.values(), &p.lambda.values())?;
    let mut t = ctx.fresh_table(&[
        "zeta", "lambda", "gap", "R", "D", "flag_T", "flag_I", "flag_N", "n0", "n1", "iota0",
        "iota1",
    ]);
    for r in &rows {
        let m = &r.metrics;
        t.push(vec![
            r.zeta,
            r.lambda,
            r.gap,
            m.r,
            m.d,
            b(m.flag_t),
            b(m.flag_i),
            b(m.flag_n),
            m.n0,
            m.n1,
            m.iota0,
            m.iota1,
        ]);
    }
    ctx.write("spin_map.csv", &t)
}

fn run_circuit_spectrum(ctx: &mut RunContext, p: &CircuitSpectrumParams) -> Result<(), RunnerError> {
    let scales = PresetScales::of(ctx.manifest.preset);
    let mut c = p.circuit.clone();
    c.d = p.d_override.unwrap_or(scales.d_spectrum);
    let k = p.levels.max(if p.protection { 2 } else { 1 });
    let s = if p.convergence_check {
        circuit::spectrum_with_convergence(&c, k)?
    } else {
        circuit::spectrum(&c, k)?
    };
    let mut headers = vec![
        "d".to_string(),
        "omega01_ghz".into(),
        "omega12_ghz".into(),
        "alpha".into(),
        "convergence_delta_ghz".into(),
    ];
    for i in 0..s.eigenvalues.len() {
        headers.push(format!("e{i}_ghz"));
    }
    let href: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = ctx.fresh_table(&href);
    let mut row = vec![
        c.d as f64,
        s.omega01,
        s.omega12,
        s.alpha,
        s.convergence_delta.unwrap_or(f64::NAN),
    ];
    row.extend_from_slice(&s.eigenvalues);
    t.push(row);
    ctx.write("spectrum.csv", &t)?;

    if p.protection {
        let elems = circuit::protection_matrix_elements(&c)?;
        let mut t = ctx.fresh_table(&[
            "node",
            "n_offdiag",
            "n_diag_diff",
            "cos_offdiag",
            "sin_offdiag",
        ]);
        for n in 0..NODES {
            t.push(vec![
                n as f64,
                elems.n_offdiag[n],
                elems.n_diag_diff[n],
                elems.cos_offdiag[n],
                elems.sin_offdiag[n],
            ]);
        }
        ctx.write("protection.csv", &t)?;
    }
    Ok(())
}

fn run_potential_map(ctx: &mut RunContext, p: &PotentialMapParams) -> Result<(), RunnerError> {
    let pot = PotentialParams::white_cross();
    let points = potential::raster_plane(
        &pot,
        (p.x.min, p.x.max),
        (p.y.min, p.y.max),
        p.x.count,
        p.y.count,
    );
    let mut t = ctx.fresh_table(&["x", "y", "V"]);
    for pt in &points {
        t.push(vec![pt.x, pt.y, pt.v]);
    }
    ctx.write("potential.csv", &t)?;

    let report = potential::locate_minima(&pot)?;
    let mut t = ctx.fresh_table(&[
        "branch",
        "energy_ghz",
        "grad_norm",
        "persistent_current_na",
        "phi0",
        "phi1",
        "phi2",
        "phi3",
        "phi4",
        "phi5",
    ]);
    for (branch, m) in [(-1.0, &report.clockwise), (1.0, &report.anticlockwise)] {
        let mut row = vec![branch, m.energy, m.grad_norm, report.persistent_current_na];
        row.extend_from_slice(&m.phi);
        t.push(row);
    }
    ctx.write("minima.csv", &t)
}

fn run_spectroscopy(ctx: &mut RunContext, p: &SpectroscopyParams) -> Result<(), RunnerError> {
    let scales = PresetScales::of(ctx.manifest.preset);
    let mut c = p.circuit.clone();
    c.d = p.d_override.unwrap_or(scales.d_sweep);
    let rows = circuit::spectroscopy_sweep(&c, &p.dq.values(), &p.dphi.values())?;
    let mut t = ctx.fresh_table(&[
        "dq_tot", "dphi_tot", "f01_ghz", "f02_ghz", "f03_ghz", "f04_ghz", "converged",
    ]);
    for r in &rows {
        t.push(vec![
            r.dq_tot,
            r.dphi_tot,
            r.transitions[0],
            r.transitions[1],
            r.transitions[2],
            r.transitions[3],
            b(r.converged),
        ]);
    }
    ctx.write("spectroscopy.csv", &t)
}

/// Configuration a dephasing run resolves to (also reused by the disorder
/// ensembles): response-surface cutoff and Monte Carlo settings.
pub fn dephasing_plan(
    family: NoiseFamily,
    preset: Preset,
    ensemble: usize,
    seed: u64,
    total_a_override: Option<f64>,
    d_fit_override: Option<usize>,
) -> (usize, bool, DephasingConfig) {
    let scales = PresetScales::of(preset);
    let (d_default, total_default) = match family {
        NoiseFamily::Charge => (scales.d_fit_charge, CHARGE_NOISE_A_TOTAL),
        NoiseFamily::Flux => (scales.d_fit_flux, FLUX_NOISE_A_TOTAL),
    };
    let cfg = DephasingConfig {
        total_a: total_a_override.unwrap_or(total_default),
        preset: scales.sampling,
        ensemble,
        t_count: scales.t_count,
        stride: scales.stride,
        seed,
    };
    // Flux surfaces stay diagonal-only in every preset: the cross-channel
    // curvature is subdominant to the window-size systematic, and the full
    // stencil at the large flux cutoff costs ~4x more eigensolves.
    let cross = scales.cross_terms && !matches!(family, NoiseFamily::Flux);
    (d_fit_override.unwrap_or(d_default), cross, cfg)
}

fn write_dephasing_outputs(
    ctx: &mut RunContext,
    res: &DephasingResult,
    omega_ref: f64,
) -> Result<(), RunnerError> {
    let mut t = ctx.fresh_table(&["t_s", "re_f", "im_f", "abs_f", "err"]);
    for i in 0..res.curve.t.len() {
        let f = res.curve.f[i];
        t.push(vec![res.curve.t[i], f.re, f.im, f.norm(), res.curve.err[i]]);
    }
    ctx.write("coherence.csv", &t)?;

    let mut t = ctx.fresh_table(&["t_phi_s", "lower_bound", "omega_ref_ghz", "ensemble"]);
    t.push(vec![
        res.t_phi.t_phi,
        b(res.t_phi.lower_bound),
        omega_ref,
        res.curve.ensemble as f64,
    ]);
    ctx.write("dephasing.csv", &t)
}

fn run_dephasing(ctx: &mut RunContext, p: &DephasingParams) -> Result<(), RunnerError> {
    let (d_fit, cross, cfg) = dephasing_plan(
        p.family,
        ctx.manifest.preset,
        p.ensemble,
        ctx.manifest.seed,
        p.total_a_override,
        p.d_fit_override,
    );
    let channels = match p.family {
        NoiseFamily::Charge => noise::charge_channels(),
        NoiseFamily::Flux => noise::flux_channels(),
    };
    let rs = noise::fit_response_surface_with(&p.circuit, &channels, None, d_fit, cross)?;

    let mut t = ctx.fresh_table(&["channel", "d1_ghz", "d2_ghz"]);
    for (i, _) in rs.labels.iter().enumerate() {
        t.push(vec![i as f64, rs.d1[i], rs.d2[(i, i)]]);
    }
    ctx.write("response_surface.csv", &t)?;

    let res = noise::dephasing_monte_carlo(&rs, &cfg)?;
    write_dephasing_outputs(ctx, &res, rs.omega_ref)
}

fn run_disorder(ctx: &mut RunContext, p: &DisorderParams) -> Result<(), RunnerError> {
    let scales = PresetScales::of(ctx.manifest.preset);
    let spec = p.spec(ctx.manifest.seed);
    let make_cfg = |family| {
        let (_, _, cfg) = dephasing_plan(
            family,
            ctx.manifest.preset,
            p.ensemble,
            ctx.manifest.seed,
            None,
            None,
        );
        cfg
    };
    let cfg = EnsembleConfig {
        spec,
        d_spectrum: p.d_override.unwrap_or(scales.d_sweep),
        compute_gap: true,
        // one cutoff for both families: the ensembles compare realizations
        // against each other, so the cheaper charge-grade cutoff is used
        d_fit: scales.d_fit_charge,
        t_phi_charge: p.dephasing.then(|| make_cfg(NoiseFamily::Charge)),
        t_phi_flux: p.dephasing.then(|| make_cfg(NoiseFamily::Flux)),
    };
    let summary = disorder::ensemble_run(&p.circuit, &cfg)?;

    let mut t = ctx.fresh_table(&[
        "index", "resamples", "gap_ghz", "t_phi_c_s", "t_phi_f_s", "failed",
    ]);
    for r in &summary.records {
        t.push(vec![
            r.index as f64,
            r.resamples as f64,
            r.gap_ghz.unwrap_or(f64::NAN),
            r.t_phi_c_s.unwrap_or(f64::NAN),
            r.t_phi_f_s.unwrap_or(f64::NAN),
            b(r.failure.is_some()),
        ]);
    }
    ctx.write("realizations.csv", &t)?;

    let mut t = ctx.fresh_table(&["obs", "count", "mean", "std"]);
    let mut hist = ctx.fresh_table(&["obs", "bin", "lo", "hi", "count"]);
    for (i, o) in summary.observables.iter().enumerate() {
        t.meta(format!("obs {i}: {}", o.name));
        hist.meta(format!("obs {i}: {}", o.name));
        t.push(vec![i as f64, o.count as f64, o.mean, o.std]);
        for (bi, &c) in o.bin_counts.iter().enumerate() {
            hist.push(vec![
                i as f64,
                bi as f64,
                o.bin_edges[bi],
                o.bin_edges[bi + 1],
                c as f64,
            ]);
        }
    }
    ctx.write("summary.csv", &t)?;
    ctx.write("histogram.csv", &hist)
}
