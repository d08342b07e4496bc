use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Symmetric Hann window of `n` points; endpoints are zero.
pub(crate) fn hann_symmetric(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Periodic Hann window of `n` points, the usual choice for STFT analysis.
pub(crate) fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Forward FFT of a real signal, zero-padded (or truncated) to `n`.
pub(crate) fn real_fft(planner: &mut FftPlanner<f64>, x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().take(n).map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(n).process(&mut buf);
    buf
}

/// Linear convolution of `a` and `b` through the FFT, truncated to `out_len` samples.
pub(crate) fn fft_convolve(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return vec![0.0; out_len];
    }
    let full = a.len() + b.len() - 1;
    let n = full.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fa = real_fft(&mut planner, a, n);
    let mut prod: Vec<Complex64> = real_fft(&mut planner, b, n)
        .iter()
        .zip(&fa)
        .map(|(x, y)| x * y)
        .collect();
    planner.plan_fft_inverse(n).process(&mut prod);
    let scale = 1.0 / n as f64;
    let mut out: Vec<f64> = prod
        .iter()
        .take(out_len.min(full))
        .map(|c| c.re * scale)
        .collect();
    out.resize(out_len, 0.0);
    out
}
