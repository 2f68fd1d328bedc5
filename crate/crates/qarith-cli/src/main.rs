//! Command-line front end: synthesize named constructions to files, verify
//! them against their arithmetic oracles, run scaling sweeps, and emit
//! factoring-pipeline estimates.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or precondition
//! error. Identical requests produce byte-identical outputs.

use clap::{Args, Parser, Subcommand};
use qarith::catalog::{self, Params};
use qarith::circuit::Circuit;
use qarith::report::{estimate_shor, run_sweep};
use qarith::sim::{Status, VerifyOptions, DEFAULT_EXHAUSTIVE_CAP, DEFAULT_SEED};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qarith", version, about = "Reversible arithmetic circuit synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Accepts decimal, 0x hex and 0b binary literals.
fn parse_literal(s: &str) -> Result<u64, String> {
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else if let Some(bin) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        u64::from_str_radix(bin, 2)
    } else {
        s.parse()
    };
    parsed.map_err(|e| format!("invalid numeric literal '{s}': {e}"))
}

#[derive(Args)]
struct ParamArgs {
    /// Register width in bits (or instance count).
    #[arg(long, default_value_t = 4)]
    n: u32,
    /// Number of control qubits.
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Classical constant (decimal, 0x or 0b).
    #[arg(long, value_parser = parse_literal)]
    constant: Option<u64>,
    /// Modulus for the modular adder.
    #[arg(long, value_parser = parse_literal)]
    modulus: Option<u64>,
    /// Ladder order for ladderk.
    #[arg(long)]
    order: Option<u32>,
    /// Build the decrement / adjoint variant where applicable.
    #[arg(long, default_value_t = false)]
    decrement: bool,
}

impl ParamArgs {
    fn to_params(&self) -> Params {
        Params {
            n: self.n,
            k: self.k,
            constant: self.constant,
            modulus: self.modulus,
            order: self.order,
            decrement: self.decrement,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a construction and write it to a file.
    Synth {
        /// Construction name (see `list`).
        construction: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Output path; a resource report lands next to it as .report.json.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Output format.
        #[arg(long, default_value = "qasm")]
        format: String,
    },
    /// Verify a construction against its oracle and ancilla contracts.
    Verify {
        construction: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Seed for sampled mode above the exhaustive cap.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Test hook: drop the last gate before checking.
        #[arg(long, hide = true, default_value_t = false)]
        inject_mutation: bool,
    },
    /// Build a range of sizes and check fitted scaling bounds.
    Sweep {
        construction: String,
        /// Comma-separated ascending sizes.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
        sizes: Vec<u32>,
        /// Number of leading sizes used to fit the bounds.
        #[arg(long, default_value_t = 2)]
        calibration: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Resource composition of the factoring pipeline on an n-bit modulus.
    ShorEstimate {
        #[arg(long)]
        n: u32,
    },
    /// Parse a circuit file, re-emit it deterministically, print a report.
    Export {
        input: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// List the available constructions.
    List,
}

fn verify_options(seed: u64) -> VerifyOptions {
    let cap = std::env::var("QARITH_EXHAUSTIVE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_EXHAUSTIVE_CAP);
    VerifyOptions {
        exhaustive_cap: cap,
        seed,
        ..VerifyOptions::default()
    }
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in catalog::CONSTRUCTIONS {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Synth {
            construction,
            params,
            out,
            format,
        } => {
            let p = params.to_params();
            let syn = catalog::synth(&construction, &p).map_err(|e| e.to_string())?;
            let r = &syn.report;
            println!(
                "{} n={} k={} gates={} depth={} qubits={} (data={} clean={} dirty={})",
                construction,
                p.n,
                p.k,
                r.total_gates,
                r.depth,
                syn.circuit.num_qubits(),
                r.qubits_data,
                r.qubits_clean,
                r.qubits_dirty
            );
            if let Some(path) = out {
                match format.as_str() {
                    "qasm" => std::fs::write(&path, syn.circuit.export_qasm())
                        .map_err(|e| e.to_string())?,
                    "json" => {
                        let gates: Vec<String> =
                            syn.circuit.gates().iter().map(|g| format!("{g:?}")).collect();
                        let body = serde_json::json!({
                            "construction": construction,
                            "num_qubits": syn.circuit.num_qubits(),
                            "gates": gates,
                        });
                        std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap())
                            .map_err(|e| e.to_string())?
                    }
                    other => return Err(format!("unknown format '{other}'")),
                }
                let report_path = path.with_extension("report.json");
                std::fs::write(&report_path, r.to_json()).map_err(|e| e.to_string())?;
            }
            Ok(0)
        }
        Command::Verify {
            construction,
            params,
            seed,
            inject_mutation,
        } => {
            let p = params.to_params();
            let opts = verify_options(seed);
            let verdicts = catalog::verify(&construction, &p, &opts, inject_mutation)
                .map_err(|e| e.to_string())?;
            let all_pass = verdicts.iter().all(|v| v.status == Status::Pass);
            println!(
                "{}",
                serde_json::to_string_pretty(&verdicts).expect("verdicts serialize")
            );
            Ok(if all_pass { 0 } else { 1 })
        }
        Command::Sweep {
            construction,
            sizes,
            calibration,
            params,
        } => {
            let p = params.to_params();
            let result =
                run_sweep(&construction, &sizes, calibration, &p).map_err(|e| e.to_string())?;
            println!("{}", result.to_json());
            Ok(if result.all_pass() { 0 } else { 1 })
        }
        Command::ShorEstimate { n } => {
            let e = estimate_shor(n).map_err(|e| e.to_string())?;
            println!("{}", e.to_json());
            Ok(0)
        }
        Command::Export { input, out } => {
            let text = std::fs::read_to_string(&input).map_err(|e| e.to_string())?;
            let circuit = Circuit::import_qasm(&text).map_err(|e| e.to_string())?;
            let emitted = circuit.export_qasm();
            println!("{}", circuit.resource_report().to_json());
            match out {
                Some(path) => std::fs::write(&path, emitted).map_err(|e| e.to_string())?,
                None => print!("{emitted}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
