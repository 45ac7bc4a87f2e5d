//! `simdal-forge`: build, check, query and serve SimDAL catalogs.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use simdal_core::catalog::{ingest, Catalog, IngestSpec};
use simdal_core::service::{cutout_body, parse_fields, CutoutRequest, ServiceState, TableFormat};
use simdal_core::simdm::validate_graph;
use simdal_core::vo::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "simdal-forge", version, about = "Build, check, query and serve SimDAL catalogs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a catalog from a JSON ingest spec.
    Ingest {
        /// Ingest spec file; relative CSV paths resolve against its directory.
        spec: PathBuf,
        /// Output directory; must be absent or empty.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a catalog opens and its metadata graph is valid.
    Validate {
        #[arg(long)]
        catalog: PathBuf,
        /// Also check every index, column length and vector series.
        #[arg(long)]
        verify: bool,
    },
    /// Run a cutout offline; output matches the service's cutout body.
    Query {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        dataset: String,
        /// Constraint, e.g. "clump_mass>=100 AND time<1e5". Empty means none.
        #[arg(long = "where")]
        where_clause: Option<String>,
        /// Comma-separated properties after the id column.
        #[arg(long)]
        fields: Option<String>,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: Option<u64>,
        #[arg(long, default_value_t = 0)]
        offset: u64,
    },
    /// Generate a deterministic synthetic model grid and its ingest spec.
    GenGrid {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        models: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the data-access API until interrupted.
    Serve {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Public base URL used in capability and link URLs.
        #[arg(long, env = "SIMDAL_FORGE_BASE_URL")]
        base_url: Option<String>,
        /// Report the service as unavailable; data routes answer 503.
        #[arg(long)]
        unavailable: bool,
    },
}

/// A failure carrying the machine-readable code printed on stderr.
struct Failure {
    code: String,
    message: String,
}

impl Failure {
    fn new(code: &str, message: impl ToString) -> Self {
        let message = message.to_string();
        // Library errors often already lead with their code.
        let message = message
            .strip_prefix(code)
            .and_then(|m| m.strip_prefix(": "))
            .map(str::to_owned)
            .unwrap_or(message);
        Self {
            code: code.to_owned(),
            message,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.code, f.message);
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest { spec, out } => {
            let spec = IngestSpec::from_file(&spec).map_err(|e| Failure::new(e.code(), e))?;
            let summary = ingest(&spec, &out).map_err(|e| Failure::new(e.code(), e))?;
            print!("{summary}");
            println!("catalog written to {}", out.display());
            Ok(())
        }
        Command::Validate { catalog, verify } => {
            let cat = Catalog::open_with(&catalog, verify).map_err(|e| Failure::new(e.code(), e))?;
            let report = validate_graph(cat.graph());
            if !report.is_valid() {
                println!("{report}");
                return Err(Failure::new("InvalidGraph", format!("{} violations", report.violations.len())));
            }
            let rows: usize = cat.datasets().iter().map(|d| d.row_count()).sum();
            println!(
                "ok: {} datasets, {rows} objects, {} relationships{}",
                cat.datasets().len(),
                cat.graph().relationships.len(),
                if verify { ", verified" } else { "" }
            );
            Ok(())
        }
        Command::Query {
            catalog,
            dataset,
            where_clause,
            fields,
            format,
            limit,
            offset,
        } => {
            let cat = Catalog::open(&catalog).map_err(|e| Failure::new(e.code(), e))?;
            let ds = cat
                .dataset(&dataset)
                .map_err(|_| Failure::new("unknown_dataset", format!("unknown dataset {dataset:?}")))?;
            let req = CutoutRequest {
                where_clause,
                fields: fields.as_deref().and_then(parse_fields),
                limit: limit.map(|l| usize::try_from(l).unwrap_or(usize::MAX)),
                offset: usize::try_from(offset).unwrap_or(usize::MAX),
                format: TableFormat::parse(&format).expect("restricted by clap"),
            };
            let body = cutout_body(ds, &req, usize::MAX).map_err(|e| {
                let mut f = Failure::new(e.code.as_str(), &e.message);
                if let Some(off) = e.offset {
                    f.message.push_str(&format!(" (offset {off})"));
                }
                f
            })?;
            std::io::stdout()
                .write_all(&body)
                .map_err(|e| Failure::new("IoError", e))
        }
        Command::GenGrid { models, seed, out } => {
            let n = usize::try_from(models).map_err(|_| Failure::new("SpecError", "--models too large"))?;
            let s = simdal_core::synth::generate(n, seed, &out).map_err(|e| match e {
                simdal_core::synth::SynthError::NoModels => Failure::new("SpecError", e),
                simdal_core::synth::SynthError::Io { .. } => Failure::new("IoError", e),
            })?;
            println!(
                "{} models, {} snapshots, {} links written to {}",
                s.models,
                s.snapshots,
                s.links,
                out.display()
            );
            Ok(())
        }
        Command::Serve {
            catalog,
            port,
            host,
            base_url,
            unavailable,
        } => serve(catalog, &host, port, base_url, unavailable),
    }
}

fn serve(catalog: PathBuf, host: &str, port: u16, base_url: Option<String>, unavailable: bool) -> Result<(), Failure> {
    let cat = Catalog::open(&catalog).map_err(|e| Failure::new(e.code(), e))?;
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| Failure::new("bad_parameter", format!("--host/--port: {e}")))?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::new("IoError", e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::new("IoError", format!("cannot bind {addr}: {e}")))?;
        let bound = listener.local_addr().map_err(|e| Failure::new("IoError", e))?;
        let base_url = base_url.unwrap_or_else(|| format!("http://{bound}"));
        let config = ServiceConfig::new(base_url.trim_end_matches('/'));
        let state = ServiceState::new(Arc::new(cat), config, !unavailable)
            .map_err(|e| Failure::new("InvalidCatalog", e))?
            .with_request_log(true);
        eprintln!("listening on http://{bound} (base URL {})", state.config.base_url);
        simdal_core::service::serve(listener, Arc::new(state), async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Failure::new("IoError", e))?;
        eprintln!("shut down");
        Ok(())
    })
}
