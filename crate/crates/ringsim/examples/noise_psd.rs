//! 1/f noise synthesis check: generate an ensemble of traces and compare
//! the periodogram against the target power spectral density.
//!
//! Usage: `cargo run --release --example noise_psd [traces]`

use ringsim::noise::{sample_noise, PsdSpec, SamplingPreset};
use rustfft::num_complex::Complex64;

fn main() {
    let traces: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let spec = PsdSpec::one_over_f(1e-8);
    let preset = SamplingPreset::desk();
    let (n, df) = (preset.n, preset.delta_f);

    // ensemble-averaged periodogram |FFT(x)/n|^2, which should equal
    // S(f_k)·delta_f for the synthesis convention used here
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut avg = vec![0.0f64; n];
    let mut var = 0.0;
    for s in 0..traces {
        let tr = sample_noise(&spec, n, df, 1000 + s as u64).expect("sampling failed");
        var += tr.samples.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let mut buf: Vec<Complex64> =
            tr.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.process(&mut buf);
        for (a, b) in avg.iter_mut().zip(&buf) {
            *a += (b / n as f64).norm_sqr();
        }
    }
    var /= traces as f64;
    for a in &mut avg {
        *a /= traces as f64;
    }

    println!("ensemble of {traces} traces, n = {n}, delta_f = {df} Hz");
    println!("variance: sampled {var:.4e} vs analytic {:.4e}", spec.record_variance(n, df));
    println!("{:>12} {:>14} {:>14} {:>8}", "f (Hz)", "periodogram", "S(f)*df", "ratio");
    let mut k = 1usize;
    while k < n / 2 {
        let f = k as f64 * df;
        let target = spec.value(f) * df;
        println!("{f:12.1} {:14.4e} {target:14.4e} {:8.3}", avg[k], avg[k] / target);
        k *= 4;
    }
}
