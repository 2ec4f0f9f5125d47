//! `qkdvm` subcommands. Exit codes: 0 success, 1 the input is wrong, 2 the
//! environment is (unreadable files, unwritable output, busy port).

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use qkdvm_core::builtin;
use qkdvm_core::compose::{compose, ComposeError};
use qkdvm_core::sim::{simulate_architecture, Adversary, SimulationParams};
use qkdvm_core::text::serialize_model;
use qkdvm_core::{export_architecture, ExportFormat};

use crate::api::{self, AppState};
use crate::files::{self, load_configuration, load_model, LoadError};

#[derive(Debug, Parser)]
#[command(
    name = "qkdvm",
    version,
    about = "Configure, compose and simulate QKD network architectures",
    disable_help_flag = true,
    disable_version_flag = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print help.
    #[arg(long, action = ArgAction::Help, global = true, display_order = 1000)]
    help: Option<bool>,
    /// Print version.
    #[arg(long, action = ArgAction::Version)]
    version: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchFormat {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelFormat {
    Ovm,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model file.
    Validate { model: PathBuf },
    /// Check a configuration and write the composed architecture.
    Compose {
        model: PathBuf,
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ArchFormat::Json)]
        format: ArchFormat,
        /// Output file; `-` is standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Compose, then run the protocol over every quantum path.
    Simulate {
        model: PathBuf,
        config: PathBuf,
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_PHOTONS)]
        photons: u64,
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_SEED)]
        seed: u64,
        /// `none` or `intercept-resend:<fraction>`.
        #[arg(long, default_value = "none", value_parser = Adversary::parse)]
        adversary: Adversary,
        /// Entanglement swaps on paths with a repeater.
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_SWAP_COUNT)]
        swap_count: u32,
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_LINK_FIDELITY)]
        link_fidelity: f64,
        /// Fibre attenuation in dB/km.
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_ATTENUATION_DB_PER_KM)]
        attenuation: f64,
        /// Free-space link budget in dB.
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_SATELLITE_LOSS_DB)]
        satellite_loss: f64,
        /// End-to-end fidelity a repeater path needs to count as feasible.
        #[arg(long, default_value_t = qkdvm_core::sim::DEFAULT_FIDELITY_THRESHOLD)]
        fidelity_threshold: f64,
        /// Print JSON records instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Write a model in canonical form.
    Export {
        /// Model file; omit to export a built-in model.
        model: Option<PathBuf>,
        #[arg(long, default_value = builtin::MODEL_NAME, conflicts_with = "model")]
        builtin: String,
        #[arg(long, value_enum, default_value_t = ModelFormat::Ovm)]
        format: ModelFormat,
        /// Output file; `-` is standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Serve the HTTP API (and the UI bundle, if given) until interrupted.
    Serve {
        #[arg(long, env = "WORKBENCH_PORT", default_value_t = api::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory served at `/`.
        #[arg(long, env = "WORKBENCH_UI_DIR")]
        ui_dir: Option<PathBuf>,
        /// Sessions are restored from and saved to this file.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn write_out(out: &Path, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    if out == Path::new("-") {
        stdout.write_all(text.as_bytes())
    } else {
        std::fs::write(out, text)
    }
}

fn fail(stderr: &mut dyn Write, e: &LoadError) -> u8 {
    let _ = writeln!(stderr, "{e}");
    e.exit_code()
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match cli.command {
        Command::Validate { model } => validate(&model, stdout, stderr),
        Command::Compose {
            model,
            config,
            format,
            out,
        } => {
            let format = match format {
                ArchFormat::Json => ExportFormat::Json,
                ArchFormat::Dot => ExportFormat::Dot,
            };
            compose_cmd(&model, &config, format, &out, stdout, stderr)
        }
        Command::Simulate {
            model,
            config,
            photons,
            seed,
            adversary,
            swap_count,
            link_fidelity,
            attenuation,
            satellite_loss,
            fidelity_threshold,
            json,
        } => {
            let params = SimulationParams {
                photon_count: photons,
                seed,
                adversary,
                attenuation_db_per_km: attenuation,
                satellite_loss_db: satellite_loss,
                swap_count,
                link_fidelity,
                fidelity_threshold,
                overrides: Default::default(),
            };
            simulate_cmd(&model, &config, &params, json, stdout, stderr)
        }
        Command::Export {
            model,
            builtin: name,
            format,
            out,
        } => export_cmd(model.as_deref(), &name, format, &out, stdout, stderr),
        Command::Serve {
            port,
            host,
            ui_dir,
            snapshot,
        } => serve_cmd(SocketAddr::new(host, port), ui_dir, snapshot, stderr),
    }
}

fn validate(path: &Path, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let loaded = match load_model(path) {
        Ok(l) => l,
        Err(e) => return fail(stderr, &e),
    };
    for w in &loaded.warnings {
        let _ = writeln!(stderr, "{w}");
    }
    if !loaded.report.is_empty() {
        let _ = writeln!(
            stderr,
            "{}",
            files::report_text(&loaded.file, &loaded.report, Some(&loaded.source_map))
        );
    }
    let m = &loaded.model;
    let _ = writeln!(
        stdout,
        "{}: model `{}` is valid ({} variation points, {} variants, {} fragments)",
        loaded.file,
        m.name,
        m.variation_points.len(),
        m.variants().count(),
        m.fragments.len()
    );
    0
}

/// Loads both inputs and composes them; errors are already reported.
fn composed(
    model: &Path,
    config: &Path,
    stderr: &mut dyn Write,
) -> Result<qkdvm_core::compose::ComposedArchitecture, u8> {
    let loaded = load_model(model).map_err(|e| fail(stderr, &e))?;
    let cfg = load_configuration(config, &loaded.model).map_err(|e| fail(stderr, &e))?;
    for w in &cfg.warnings {
        let _ = writeln!(stderr, "{w}");
    }
    compose(&loaded.model, &cfg.config).map_err(|e| {
        let head = match &e {
            ComposeError::InvalidConfiguration(_) => {
                format!("{}: configuration is invalid", config.display())
            }
            _ => format!("{}: composition failed", config.display()),
        };
        let _ = writeln!(stderr, "{head}");
        let _ = writeln!(
            stderr,
            "{}",
            files::report_text(&config.display().to_string(), e.report(), None)
        );
        1
    })
}

fn compose_cmd(
    model: &Path,
    config: &Path,
    format: ExportFormat,
    out: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8 {
    let arch = match composed(model, config, stderr) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let text = export_architecture(&arch, format);
    if let Err(e) = write_out(out, &text, stdout) {
        let _ = writeln!(stderr, "{}: {e}", out.display());
        return 2;
    }
    0
}

fn simulate_cmd(
    model: &Path,
    config: &Path,
    params: &SimulationParams,
    json: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8 {
    let arch = match composed(model, config, stderr) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let results = match simulate_architecture(&arch, params) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.code());
            return 1;
        }
    };
    let text = if json {
        let mut s = serde_json::to_string_pretty(&results).expect("serializable");
        s.push('\n');
        s
    } else {
        crate::table::render(&results)
    };
    if stdout.write_all(text.as_bytes()).is_err() {
        return 2;
    }
    0
}

fn export_cmd(
    model: Option<&Path>,
    name: &str,
    format: ModelFormat,
    out: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8 {
    let m = match model {
        Some(p) => match load_model(p) {
            Ok(l) => l.model,
            Err(e) => return fail(stderr, &e),
        },
        None => match builtin::by_name(name) {
            Some(m) => m,
            None => {
                let _ = writeln!(
                    stderr,
                    "no built-in model `{name}` (have: {})",
                    builtin::BUILTINS.join(", ")
                );
                return 1;
            }
        },
    };
    let text = match format {
        ModelFormat::Ovm => serialize_model(&m),
        ModelFormat::Json => serde_json::to_string_pretty(&m).expect("serializable") + "\n",
    };
    if let Err(e) = write_out(out, &text, stdout) {
        let _ = writeln!(stderr, "{}: {e}", out.display());
        return 2;
    }
    0
}

fn serve_cmd(
    addr: SocketAddr,
    ui_dir: Option<PathBuf>,
    snapshot: Option<PathBuf>,
    stderr: &mut dyn Write,
) -> u8 {
    let rt = match tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
    {
        Ok(rt) => rt,
        Err(e) => {
            let _ = writeln!(stderr, "cannot start runtime: {e}");
            return 2;
        }
    };
    rt.block_on(async {
        let state = match snapshot.as_deref().filter(|p| p.exists()) {
            Some(p) => match AppState::load_snapshot(p) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(stderr, "{}: {e}", p.display());
                    return 2;
                }
            },
            None => AppState::new(),
        };
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                let _ = writeln!(stderr, "cannot bind {addr}: {e}");
                return 2;
            }
        };
        let bound = listener.local_addr().map_or(addr, |a| a);
        let _ = writeln!(stderr, "listening on http://{bound}");
        let app = api::router(state.clone(), ui_dir);
        let served = axum::serve(listener, app)
            .with_graceful_shutdown(shutdown_signal())
            .await;
        if let Err(e) = served {
            let _ = writeln!(stderr, "server error: {e}");
            return 2;
        }
        if let Some(p) = snapshot {
            if let Err(e) = state.save_snapshot(&p).await {
                let _ = writeln!(stderr, "{}: {e}", p.display());
                return 2;
            }
        }
        0
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
