//! Reference implementations shared by the integration tests. These are
//! written from the definitions, deliberately slow, and share no code with
//! the library's optimized paths.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use exprsynth::synth::SynthParams;
use exprsynth::{FRAME_SIZE, N_HARMONICS, N_NOISE_BANDS, SAMPLE_RATE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Linear interpolation of a frame stream at sample `n`; frame `i` sits at
/// sample `64 i + 32`, values before the first and after the last center are held.
pub fn control_at(frames: &[f64], n: usize) -> f64 {
    let pos = (n as f64 - FRAME_SIZE as f64 / 2.0) / FRAME_SIZE as f64;
    if pos <= 0.0 {
        return frames[0];
    }
    let last = frames.len() - 1;
    if pos >= last as f64 {
        return frames[last];
    }
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    frames[i] * (1.0 - t) + frames[i + 1] * t
}

/// Per-sample, per-harmonic oscillator bank with `sin` evaluated directly.
pub fn naive_harmonic(p: &SynthParams) -> Vec<f64> {
    let t = p.n_frames();
    let k_count = p.n_harmonics;
    let sr = SAMPLE_RATE as f64;
    let mut phase_cycles = 0.0f64;
    let mut out = vec![0.0; t * FRAME_SIZE];
    let column = |k: usize| -> Vec<f64> {
        (0..t)
            .map(|i| p.harmonic_distribution[i * k_count + k])
            .collect()
    };
    let columns: Vec<Vec<f64>> = (0..k_count).map(column).collect();
    for (n, o) in out.iter_mut().enumerate() {
        let f0 = control_at(&p.f0, n);
        phase_cycles += f0 / sr;
        let a = control_at(&p.amplitude, n);
        let mut sum = 0.0;
        for (k, col) in columns.iter().enumerate() {
            let harmonic = (k + 1) as f64;
            if harmonic * f0 > sr / 2.0 {
                continue;
            }
            sum += control_at(col, n) * (TAU * harmonic * phase_cycles).sin();
        }
        *o = a * sum;
    }
    out
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos())
        .collect()
}

/// Direct-DFT magnitude spectrogram with centered, zero-padded frames.
pub fn brute_stft(x: &[f64], n: usize, hop: usize) -> Vec<Vec<f64>> {
    let w = hann(n);
    let bins = n / 2 + 1;
    // twiddle table: cos/sin of 2π m / n
    let cos: Vec<f64> = (0..n).map(|m| (TAU * m as f64 / n as f64).cos()).collect();
    let sin: Vec<f64> = (0..n).map(|m| (TAU * m as f64 / n as f64).sin()).collect();
    let frames = 1 + x.len() / hop;
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = (f * hop) as isize - (n / 2) as isize;
        let seg: Vec<f64> = (0..n)
            .map(|j| {
                let idx = start + j as isize;
                if idx >= 0 && (idx as usize) < x.len() {
                    x[idx as usize] * w[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut row = Vec::with_capacity(bins);
        for b in 0..bins {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in seg.iter().enumerate() {
                let m = (b * j) % n;
                re += v * cos[m];
                im -= v * sin[m];
            }
            row.push((re * re + im * im).sqrt());
        }
        out.push(row);
    }
    out
}

/// Σ over sizes of `mean|S−Ŝ| + mean|ln max(S,ε) − ln max(Ŝ,ε)|`, hop = n/4.
pub fn brute_spectral_loss(a: &[f64], b: &[f64], sizes: &[usize], eps: f64) -> f64 {
    let mut total = 0.0;
    for &n in sizes {
        let sa = brute_stft(a, n, n / 4);
        let sb = brute_stft(b, n, n / 4);
        let mut lin = 0.0;
        let mut log = 0.0;
        let mut count = 0usize;
        for (ra, rb) in sa.iter().zip(&sb) {
            for (x, y) in ra.iter().zip(rb) {
                lin += (x - y).abs();
                log += (x.max(eps).ln() - y.max(eps).ln()).abs();
                count += 1;
            }
        }
        total += (lin + log) / count as f64;
    }
    total
}

pub fn sine(freq: f64, amp: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| amp * (2.0 * PI * freq * n as f64 / SAMPLE_RATE as f64).sin())
        .collect()
}

/// Random but valid synthesis parameters: `frames` frames, at most `k_active`
/// non-zero harmonics, f0 drifting between 50 and 2000 Hz.
pub fn random_params(rng: &mut ChaCha8Rng, frames: usize, k_active: usize) -> SynthParams {
    let mut p = SynthParams::with_capacity(frames);
    let mut f0: f64 = rng.random_range(50.0..2000.0);
    for _ in 0..frames {
        f0 = (f0 * rng.random_range(0.9..1.1)).clamp(50.0, 2000.0);
        let a = rng.random_range(0.0..1.0);
        let mut h = [0.0; N_HARMONICS];
        let mut sum = 0.0;
        for (k, v) in h.iter_mut().enumerate().take(k_active) {
            if (k + 1) as f64 * f0 <= SAMPLE_RATE as f64 / 2.0 {
                *v = rng.random_range(0.0..1.0);
                sum += *v;
            }
        }
        if sum == 0.0 {
            h[0] = 1.0;
        } else {
            h.iter_mut().for_each(|v| *v /= sum);
        }
        let noise: Vec<f64> = (0..N_NOISE_BANDS)
            .map(|_| rng.random_range(1e-7..0.01))
            .collect();
        p.push_frame(f0, a, &h, &noise);
    }
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Starts the service on an ephemeral port in a background thread.
pub fn spawn_server(cfg: exprsynth::io::service::ServiceConfig) -> std::net::SocketAddr {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            exprsynth::io::service::serve(listener, &cfg).await.unwrap();
        });
    });
    addr
}

pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

/// Minimal HTTP/1.1 client: one request per connection, body read to EOF.
pub fn http(
    addr: std::net::SocketAddr,
    method: &str,
    path: &str,
    content_type: Option<&str>,
    body: &[u8],
) -> HttpResponse {
    use std::io::{Read, Write};
    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    let mut head = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Length: {}\r\n",
        body.len()
    );
    if let Some(ct) = content_type {
        head.push_str(&format!("Content-Type: {ct}\r\n"));
    }
    head.push_str("\r\n");
    stream.write_all(head.as_bytes()).unwrap();
    stream.write_all(body).unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).unwrap();

    let split = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .expect("complete response head");
    let head = String::from_utf8_lossy(&raw[..split]).into_owned();
    let mut lines = head.split("\r\n");
    let status: u16 = lines
        .next()
        .unwrap()
        .split(' ')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let headers: Vec<(String, String)> = lines
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut body = raw[split + 4..].to_vec();
    let chunked = headers
        .iter()
        .any(|(k, v)| k.eq_ignore_ascii_case("transfer-encoding") && v.contains("chunked"));
    if chunked {
        body = dechunk(&body);
    }
    HttpResponse {
        status,
        headers,
        body,
    }
}

fn dechunk(mut data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    loop {
        let line_end = data.windows(2).position(|w| w == b"\r\n").unwrap();
        let size = usize::from_str_radix(
            std::str::from_utf8(&data[..line_end])
                .unwrap()
                .split(';')
                .next()
                .unwrap()
                .trim(),
            16,
        )
        .unwrap();
        data = &data[line_end + 2..];
        if size == 0 {
            return out;
        }
        out.extend_from_slice(&data[..size]);
        data = &data[size + 2..];
    }
}
