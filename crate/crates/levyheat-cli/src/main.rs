//! Command-line pipeline: profile → build → verify → report, or everything
//! at once with `run`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levyheat::config::RunConfig;
use levyheat::pipeline;

#[derive(Parser)]
#[command(
    name = "levyheat",
    about = "Heat kernels of non-symmetric Lévy-type operators by the parametrix method",
    version
)]
struct Cli {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides config and LEVYHEAT_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker cap; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Proceed even when the regime classifier rejects the run.
    #[arg(long, global = true)]
    force: bool,
    /// Classify the regime and stop.
    #[arg(long, global = true)]
    check_only: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline: build, refined build, property suite, artifacts.
    Run,
    /// Emit h, K, h⁻¹, ρ_t tables and the scaling certificates.
    Profile,
    /// Build caches and the kernel, write build artifacts.
    Build,
    /// Run the property suite against saved build artifacts.
    Verify,
    /// Re-render the human-readable table from saved JSON reports.
    Report,
}

const EXIT_CHECKS_FAILED: u8 = 5;

fn exit_code_for(err: &levyheat::Error) -> u8 {
    match err {
        levyheat::Error::Config(_) => 2,
        levyheat::Error::RegimeRejected(_) => 3,
        levyheat::Error::SeriesDiverged(_) => 4,
        levyheat::Error::MissingArtifact(_) => 6,
        _ => 1,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, levyheat::Error> {
    let path = cli.config.as_ref().ok_or_else(|| {
        levyheat::Error::Config("--config PATH is required for this command".into())
    })?;
    RunConfig::from_path(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Best effort: a pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, levyheat::Error> {
    let cmd = cli.command.as_ref().unwrap_or(&Cmd::Run);
    match cmd {
        Cmd::Run => {
            let cfg = load_config(cli)?;
            let out = pipeline::resolve_out_dir(&cfg, cli.out.as_deref());
            if cli.check_only {
                return check_only(&cfg, &out);
            }
            let report = pipeline::run(&cfg, &out, cli.force)?;
            print!("{}", report.render_table());
            println!("artifacts written to {}", out.display());
            Ok(if report.all_pass { 0 } else { EXIT_CHECKS_FAILED })
        }
        Cmd::Profile => {
            let cfg = load_config(cli)?;
            let out = pipeline::resolve_out_dir(&cfg, cli.out.as_deref());
            let (profile, sf) = pipeline::scale_stage(&cfg)?;
            pipeline::write_profile_tables(&cfg, &profile, &sf, &out)?;
            println!(
                "h(1) = {:.9e}, K(1) = {:.9e}, h_inv(1/t_min) = {:.6}",
                sf.h(1.0),
                sf.k(1.0),
                sf.time_scale(cfg.grids.t_min)
            );
            println!(
                "scaling certificates and tables written to {}",
                out.display()
            );
            Ok(0)
        }
        Cmd::Build => {
            let cfg = load_config(cli)?;
            let out = pipeline::resolve_out_dir(&cfg, cli.out.as_deref());
            if cli.check_only {
                return check_only(&cfg, &out);
            }
            let build = pipeline::build_stage(&cfg, cli.force)?;
            pipeline::write_build_artifacts(&build, &out, cfg.output.dump_cache)?;
            pipeline::write_ratio_csv(&build, &out)?;
            println!(
                "kernel built: {} time nodes x {}^2 space nodes; artifacts in {}",
                build.p_kappa.t_nodes.len(),
                build.p_kappa.x.n,
                out.display()
            );
            Ok(0)
        }
        Cmd::Verify => {
            let cfg = load_config(cli)?;
            let out = pipeline::resolve_out_dir(&cfg, cli.out.as_deref());
            let report = pipeline::verify_from_artifacts(&cfg, &out)?;
            print!("{}", report.render_table());
            Ok(if report.all_pass { 0 } else { EXIT_CHECKS_FAILED })
        }
        Cmd::Report => {
            let out = cli
                .out
                .clone()
                .or_else(|| {
                    cli.config
                        .as_ref()
                        .and_then(|p| RunConfig::from_path(p).ok())
                        .map(|c| pipeline::resolve_out_dir(&c, None))
                })
                .unwrap_or_else(|| PathBuf::from("out"));
            let table = pipeline::report_from_artifacts(&out)?;
            print!("{table}");
            Ok(0)
        }
    }
}

fn check_only(cfg: &RunConfig, out: &std::path::Path) -> Result<u8, levyheat::Error> {
    let (profile, sf) = pipeline::scale_stage(cfg)?;
    let regime = pipeline::regime_stage(cfg, &profile, &sf)?;
    std::fs::create_dir_all(out)?;
    let json = serde_json::to_string_pretty(&regime)
        .map_err(|e| levyheat::Error::BadArtifact(e.to_string()))?;
    std::fs::write(out.join("regime_report.json"), format!("{json}\n"))?;
    println!("regime: {:?}; failing: {:?}", regime.regime, regime.failing);
    Ok(if regime.failing.is_empty() { 0 } else { 3 })
}
