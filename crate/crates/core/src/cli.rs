// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. `main.rs` only forwards to [`run`].
//!
//! Exit codes: 0 ok, 1 usage, 2 invalid configuration, 3 runtime failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bitstream::{extract_symbol, pack_bits, unpack_bytes, PostMode};
use crate::config::RunConfig;
use crate::device::{serve, serve_tcp, Device, DeviceError};
use crate::generator::EntropySource;
use crate::quality::{
    reconstruct_map, symbol_counts, tamper_check, write_histogram_csv, QualityReport, TamperOptions,
};
use crate::sim::{read_trace_csv, write_raw_codes, write_trace_csv, Simulator};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "chaos-trng",
    version,
    about = "Chaotic ADC-loop entropy source simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// key = value configuration file (defaults otherwise)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override the noise seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the loop and write a per-cycle trace
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        cycles: Option<u64>,
        /// Trace CSV: cycle,v_in,m_hat,m,v_out
        #[arg(long, value_name = "FILE")]
        trace: PathBuf,
        /// Also write raw ADC codes as little-endian u16
        #[arg(long, value_name = "FILE")]
        raw: Option<PathBuf>,
    },
    /// Write post-processed random bits, packed LSB first
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        bits: Option<u64>,
        /// none | vn | xor
        #[arg(long)]
        post: Option<PostMode>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Run the statistical suite on a bit file
    Test {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// JSON report
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Only test the first N bits
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        bits: Option<u64>,
        /// Provenance when the input has no .config sidecar
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Return-map scatter, code histogram and tamper flags from a trace
    Reconstruct {
        #[arg(long, value_name = "FILE")]
        trace: PathBuf,
        /// Scatter counts: m_hat_n,m_hat_next,count
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Histogram: m,symbol,count,frequency
        #[arg(long, value_name = "FILE")]
        hist: Option<PathBuf>,
        /// Circuit when the trace has no .config sidecar
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Run the virtual device
    Serve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// TCP address, e.g. 127.0.0.1:7700
        #[arg(
            long,
            value_name = "ADDR",
            required_unless_present = "stdio",
            conflicts_with = "stdio"
        )]
        listen: Option<String>,
        /// Speak the protocol on stdin/stdout
        #[arg(long)]
        stdio: bool,
        #[arg(long)]
        post: Option<PostMode>,
    },
    /// Check a configuration against the design rules
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// `<path>.config`, the provenance file written next to every artifact.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".config");
    PathBuf::from(s)
}

fn write_sidecar(path: &Path, rc: &RunConfig) -> Result<(), CliError> {
    let side = sidecar_path(path);
    std::fs::write(&side, rc.to_text()).map_err(io_err(&side))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => RunConfig::load(p).map_err(|e| CliError::Validation(e.to_string())),
    }
}

/// Explicit file first, then the artifact's sidecar.
fn provenance(explicit: Option<&Path>, artifact: &Path) -> Result<Option<RunConfig>, CliError> {
    if explicit.is_some() {
        return load_config(explicit).map(Some);
    }
    let side = sidecar_path(artifact);
    if side.exists() {
        return load_config(Some(&side)).map(Some);
    }
    Ok(None)
}

fn resolve(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let mut rc = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        rc.nonideal.seed = seed;
    }
    check(&rc)?;
    Ok(rc)
}

fn check(rc: &RunConfig) -> Result<(), CliError> {
    let v = rc.validate();
    if !v.is_ok() {
        let msgs: Vec<String> = v.violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Validation(msgs.join("; ")));
    }
    rc.nonideal.check().map_err(CliError::Validation)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Parse `args` (including the program name) and run the command. Help and
/// version text go to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(|e| CliError::Runtime(e.to_string()))?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let w = |r: io::Result<()>| r.map_err(|e| CliError::Runtime(e.to_string()));
    match cli.command {
        Command::Simulate {
            cfg,
            cycles,
            trace,
            raw,
        } => {
            let mut rc = resolve(&cfg)?;
            if let Some(c) = cycles {
                rc.cycles = c as usize;
            }
            let mut sim = Simulator::new(rc.circuit, rc.nonideal, rc.initial)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let t = sim.run(rc.cycles);
            write_trace_csv(&t.records, create(&trace)?).map_err(io_err(&trace))?;
            write_sidecar(&trace, &rc)?;
            if let Some(raw) = raw {
                write_raw_codes(&t.records, create(&raw)?).map_err(io_err(&raw))?;
                write_sidecar(&raw, &rc)?;
            }
            let codes: Vec<u32> = t
                .codes()
                .map(|m| extract_symbol(u32::from(m), rc.circuit.m_bits))
                .collect();
            w(writeln!(out, "cycles: {}", t.len()))?;
            w(writeln!(out, "saturation events: {}", t.saturation_events))?;
            if let Ok(counts) = symbol_counts(&codes, rc.circuit.k) {
                let total = codes.len() as f64;
                for (s, c) in counts.iter().enumerate() {
                    w(writeln!(out, "symbol {s}: {:.4}", *c as f64 / total))?;
                }
            }
            w(writeln!(out, "trace: {}", trace.display()))?;
        }
        Command::Generate {
            cfg,
            bits,
            post,
            out: path,
        } => {
            let mut rc = resolve(&cfg)?;
            if let Some(b) = bits {
                rc.bits = b as usize;
            }
            if let Some(p) = post {
                rc.post = p;
            }
            let mut src =
                EntropySource::new(&rc).map_err(|e| CliError::Validation(e.to_string()))?;
            let packed = pack_bits(&src.next_bits(rc.bits));
            std::fs::write(&path, &packed.bytes).map_err(io_err(&path))?;
            write_sidecar(&path, &rc)?;
            let cycles = src.simulator().state().cycle;
            w(writeln!(
                out,
                "{} bits ({} bytes, post = {}) from {cycles} cycles -> {}",
                rc.bits,
                packed.bytes.len(),
                rc.post,
                path.display()
            ))?;
        }
        Command::Test {
            input,
            report,
            bits,
            config,
        } => {
            let bytes = std::fs::read(&input).map_err(io_err(&input))?;
            let mut all = unpack_bytes(&bytes);
            let prov = provenance(config.as_deref(), &input)?;
            let limit = bits
                .map(|b| b as usize)
                .or(prov.as_ref().map(|rc| rc.bits))
                .unwrap_or(all.len());
            all.truncate(limit);
            let rep = QualityReport::evaluate(&all, prov);
            w(writeln!(
                out,
                "bits: {}  ones: {:.5}",
                rep.sample_bits, rep.ones_fraction
            ))?;
            if let Some(e) = &rep.entropy {
                w(writeln!(out, "block entropy (min over L): {:.5}", e.min))?;
            }
            for t in &rep.tests {
                w(writeln!(
                    out,
                    "{:<24} p = {:.6}  {}",
                    t.name,
                    t.p_value,
                    if t.pass { "pass" } else { "FAIL" }
                ))?;
            }
            for (name, why) in &rep.skipped {
                w(writeln!(out, "{name:<24} skipped: {why}"))?;
            }
            w(writeln!(
                out,
                "{}",
                if rep.all_passed {
                    "all passed"
                } else {
                    "some tests failed"
                }
            ))?;
            if let Some(path) = report {
                let mut f = create(&path)?;
                w(writeln!(f, "{}", rep.to_json()))?;
                f.flush().map_err(io_err(&path))?;
            }
        }
        Command::Reconstruct {
            trace,
            out: scatter,
            hist,
            config,
        } => {
            let prov = provenance(config.as_deref(), &trace)?;
            let rc = prov.clone().unwrap_or_default();
            check(&rc)?;
            let f = File::open(&trace).map_err(io_err(&trace))?;
            let t = read_trace_csv(BufReader::new(f))
                .map_err(|e| CliError::Runtime(format!("{}: {e}", trace.display())))?;
            let raw: Vec<u16> = t.raw_codes().collect();
            let opts = TamperOptions::for_config(&rc.circuit);
            let (map, fit) = reconstruct_map(&raw, &rc.circuit, opts.tolerance)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let tamper = tamper_check(&t, &rc.circuit, &opts)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            if let Some(path) = scatter {
                map.write_csv(create(&path)?).map_err(io_err(&path))?;
                if let Some(rc) = &prov {
                    write_sidecar(&path, rc)?;
                }
            }
            if let Some(path) = hist {
                let codes: Vec<u16> = t.codes().collect();
                write_histogram_csv(&codes, rc.circuit.m_bits, create(&path)?)
                    .map_err(io_err(&path))?;
                if let Some(rc) = &prov {
                    write_sidecar(&path, rc)?;
                }
            }
            w(writeln!(out, "transitions: {}", fit.transitions))?;
            w(writeln!(
                out,
                "branch score: {:.5} (tolerance {} codes)",
                fit.score, fit.tolerance
            ))?;
            w(writeln!(
                out,
                "max state occupancy: {:.4}",
                tamper.max_occupancy
            ))?;
            w(writeln!(out, "tamper flags: {}", tamper.flags))?;
        }
        Command::Serve {
            cfg,
            listen,
            stdio,
            post,
        } => {
            let mut rc = resolve(&cfg)?;
            if let Some(p) = post {
                rc.post = p;
            }
            let mut dev = Device::new(rc).map_err(|e| match e {
                DeviceError::Invalid(_) => CliError::Validation(e.to_string()),
                DeviceError::Sim(_) => CliError::Validation(e.to_string()),
            })?;
            if stdio {
                serve(&mut dev, io::stdin().lock(), io::stdout().lock())
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            } else if let Some(addr) = listen {
                eprintln!("listening on {addr}");
                serve_tcp(&mut dev, addr.as_str())
                    .map_err(|e| CliError::Runtime(format!("{addr}: {e}")))?;
            }
        }
        Command::Validate { cfg } => {
            let mut rc = load_config(cfg.config.as_deref())?;
            if let Some(seed) = cfg.seed {
                rc.nonideal.seed = seed;
            }
            let v = rc.validate();
            let c = &rc.circuit;
            let (lo, hi) = c.interval();
            let p = c.map_params();
            w(writeln!(
                out,
                "N^={} N={} M={} N~={} V_ref={} V_B={} k={}",
                c.n_hat, c.n, c.m_bits, c.n_tilde, c.v_ref, c.v_b, c.k
            ))?;
            w(writeln!(out, "map: alpha = {}, beta = {}", p.alpha, p.beta))?;
            w(writeln!(out, "loop interval: [{lo}, {hi}] V"))?;
            for x in &v.violations {
                w(writeln!(out, "violation: {x}"))?;
            }
            for a in &v.advisories {
                w(writeln!(out, "advisory: {a}"))?;
            }
            if rc.nonideal.is_noiseless() {
                w(writeln!(
                    out,
                    "advisory: every noise source is off, output is deterministic"
                ))?;
            }
            if let Err(msg) = rc.nonideal.check() {
                w(writeln!(out, "violation: {msg}"))?;
                return Err(CliError::Validation(msg));
            }
            if !v.is_ok() {
                return Err(CliError::Validation(format!(
                    "{} violation(s)",
                    v.violations.len()
                )));
            }
            w(writeln!(out, "ok"))?;
        }
    }
    Ok(())
}
