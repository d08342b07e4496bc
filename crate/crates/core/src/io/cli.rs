//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::params_file::{read_params, write_params_binary, write_params_text};
use super::request::{extract_document, roundtrip, sweep_all, RenderRequest};
use super::score_file::parse_score;
use super::service::{self, ServiceConfig};
use super::wav::read_wav;
use crate::error::{Error, Result};
use crate::metrics::{multi_scale_spectral_loss, sweeps_to_csv, SpectralLossConfig};
use crate::score::NormalizationSpec;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "exprsynth",
    version,
    about = "Expressive harmonic-plus-noise note synthesis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a score (or full render request) to WAV.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Noise seed; overrides the request's value.
        #[arg(long)]
        seed: Option<u64>,
        /// Impulse response file (raw 48000 f32 LE) or `none`.
        #[arg(long, value_name = "PATH|none")]
        reverb: Option<String>,
        /// Also write the synthesis parameters here.
        #[arg(long)]
        params_out: Option<PathBuf>,
        /// Write the parameter dump as JSON instead of binary.
        #[arg(long, requires = "params_out")]
        text_params: bool,
        /// Write 32-bit float samples instead of 16-bit PCM.
        #[arg(long)]
        float32: bool,
    },
    /// Measure per-note expression from a parameter dump.
    Extract {
        params: PathBuf,
        /// Score giving the note boundaries.
        #[arg(long)]
        score: PathBuf,
        /// Normalization ranges as JSON.
        #[arg(long)]
        normalization: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Multi-scale spectral loss between two WAV files.
    Compare { a: PathBuf, b: PathBuf },
    /// Sweep every control from 0 to 1 and report the correlation as CSV.
    Sweep {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate, extract back and report the recovery error.
    Roundtrip {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Concurrent render limit, defaults to the CPU count.
        #[arg(long)]
        workers: Option<usize>,
        /// Directory served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_request(path: &Path) -> Result<RenderRequest> {
    RenderRequest::parse(&read_text(path)?).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Render {
            input,
            output,
            seed,
            reverb,
            params_out,
            text_params,
            float32,
        } => {
            let mut req = read_request(&input)?;
            if let Some(s) = seed {
                req.noise_seed = s;
            }
            if reverb.is_some() {
                req.reverb = reverb;
            }
            req.float32 |= float32;
            let out = req.render_local()?;
            for c in &out.report.clamps {
                log::warn!(
                    "notes[{}].{} clamped from {:.3} to {:.3}: {}",
                    c.note,
                    c.control,
                    c.requested,
                    c.achieved,
                    c.reason
                );
            }
            write_out(Some(&output), &out.wav(req.sample_format()))?;
            if let Some(p) = params_out {
                let bytes = if text_params {
                    write_params_text(&out.params).into_bytes()
                } else {
                    write_params_binary(&out.params)
                };
                write_out(Some(&p), &bytes)?;
            }
            Ok(())
        }
        Command::Extract {
            params,
            score,
            normalization,
            output,
        } => {
            let p = read_params(&read_bytes(&params)?)?;
            let s = parse_score(&read_text(&score)?)?;
            let spec: NormalizationSpec = match normalization {
                Some(path) => super::score_file::from_json_with_path(&read_text(&path)?)?,
                None => NormalizationSpec::default(),
            };
            spec.validate()?;
            let doc = extract_document(&p, &s, &spec)?;
            let mut json = serde_json::to_string_pretty(&doc).expect("document serializes");
            json.push('\n');
            write_out(output.as_deref(), json.as_bytes())
        }
        Command::Compare { a, b } => {
            let wa = read_wav(&read_bytes(&a)?)?;
            let wb = read_wav(&read_bytes(&b)?)?;
            let loss = multi_scale_spectral_loss(&wa, &wb, &SpectralLossConfig::default())?;
            let mut json = serde_json::to_string(&loss).expect("loss serializes");
            json.push('\n');
            write_out(None, json.as_bytes())
        }
        Command::Sweep { input, output } => {
            let req = read_request(&input)?;
            let score = req.prepare()?;
            let sweeps = sweep_all(&score, &req.config, &req.normalization)?;
            write_out(output.as_deref(), sweeps_to_csv(&sweeps).as_bytes())
        }
        Command::Roundtrip { input, output } => {
            let req = read_request(&input)?;
            let score = req.prepare()?;
            let report = roundtrip(&score, &req.config, &req.normalization)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            write_out(output.as_deref(), json.as_bytes())
        }
        Command::Serve {
            port,
            host,
            workers,
            static_dir,
        } => {
            let mut cfg = ServiceConfig {
                static_dir,
                ..ServiceConfig::default()
            };
            if let Some(w) = workers {
                cfg.workers = w;
            }
            service::run(SocketAddr::new(host, port), cfg)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}
