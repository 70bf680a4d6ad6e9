//! Stage orchestration: profile → regime → build → verify → report, with
//! file artifacts between the stages.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coefficient::{self, Coefficient, Regime, RegimeReport};
use crate::config::RunConfig;
use crate::frozen::{FrozenCacheParams, FrozenKernelCache};
use crate::grid::{KernelField, SpaceGrid, TimeLadder};
use crate::parametrix::{Convolver, PhiEngine, SeriesDiagnostics};
use crate::profile::{self, UnimodalProfile};
use crate::scale::ScaleFunctions;
use crate::verifier::{run_property_suite, PropertyReport, VerifierInputs};
use crate::{Error, Result};

/// Everything a finished build holds in memory.
pub struct Build {
    pub config: RunConfig,
    pub profile: UnimodalProfile,
    pub sf: ScaleFunctions,
    pub coef: Coefficient,
    pub regime: RegimeReport,
    pub cache: FrozenKernelCache,
    pub q0: KernelField,
    pub q: KernelField,
    pub diagnostics: SeriesDiagnostics,
    pub phi: KernelField,
    pub p_kappa: KernelField,
}

/// Validated profile + scale functions with certificates.
pub fn scale_stage(cfg: &RunConfig) -> Result<(UnimodalProfile, ScaleFunctions)> {
    let profile = cfg.profile();
    profile::validate(&profile)?;
    let sf = ScaleFunctions::build(
        &profile,
        cfg.profile.declared_alpha_h,
        cfg.profile.declared_beta_h,
    )?;
    Ok((profile, sf))
}

/// Structural assumptions + drift conditions + regime classification.
pub fn regime_stage(
    cfg: &RunConfig,
    profile: &UnimodalProfile,
    sf: &ScaleFunctions,
) -> Result<RegimeReport> {
    let coef = cfg.coefficient();
    let r = cfg.grids.check_radius;
    let x_grid = [-r, -0.5 * r, 0.0, 0.5 * r, r];
    let r_grid = coefficient::default_r_grid(sf, cfg.grids.t_min, 24);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    coefficient::classify_regime(&coef, profile, sf, &x_grid, &r_grid, &mut rng)
}

/// The kernel ladder shared by all fields: log-spaced plus the output times,
/// the floor multiples used by the initial-condition ladder, and the
/// Chapman–Kolmogorov times.
fn build_ladder(cfg: &RunConfig) -> TimeLadder {
    let t_min = cfg.grids.t_min;
    let t_max = *cfg.grids.t_out.last().unwrap();
    let [ck_t, ck_s] = cfg.verifier.ck_pair;
    let mut must = cfg.grids.t_out.clone();
    must.extend_from_slice(&[2.0 * t_min, 4.0 * t_min, ck_t, ck_s, ck_t + ck_s]);
    must.retain(|&t| t >= t_min && t <= t_max);
    TimeLadder::logarithmic(t_min, t_max, cfg.grids.time_nodes, &must)
}

/// Full construction: caches, q₀, the Picard series, φ, p^κ.
pub fn build_stage(cfg: &RunConfig, force: bool) -> Result<Build> {
    let (profile, sf) = scale_stage(cfg)?;
    let regime = regime_stage(cfg, &profile, &sf)?;
    if regime.regime == Regime::Rejected && !force {
        return Err(Error::RegimeRejected(format!(
            "failing conditions: {:?}",
            regime.failing
        )));
    }
    let coef = cfg.coefficient();
    let ladder = build_ladder(cfg);
    let bases = SpaceGrid::symmetric(cfg.grids.space_radius, cfg.grids.space_nodes);
    let mut params = FrozenCacheParams::new(
        bases,
        ladder,
        cfg.grids.lattice_step,
        2.0 * cfg.grids.space_radius + 1.0,
    );
    params.period = cfg.grids.frequency_period;
    let cache = FrozenKernelCache::build(&profile, &coef, &sf, params, &cfg.grids.t_out)?;

    let q0 = cache.build_q0_field();
    let conv = Convolver {
        mesh_gamma: cfg.series.mesh_gamma,
        mesh_nodes: cfg.series.mesh_nodes,
        t_out: cfg.grids.t_out.clone(),
    };
    let (q, diagnostics) = conv.sum_series(
        &q0,
        cfg.series.max_terms,
        cfg.series.tol,
        cfg.series.residual_tol,
    )?;
    let engine = PhiEngine { cache: &cache, conv: &conv };
    // Constant κ gives q ≡ 0 exactly; the parametrix is then exact and the
    // correction vanishes identically.
    let phi = if q.sup() == 0.0 {
        let mut zero = KernelField::zeros(
            crate::grid::FieldKind::Phi,
            cache.ladder().nodes.clone(),
            bases,
            bases,
        );
        zero.meta.mesh_gamma = conv.mesh_gamma;
        zero.meta.mesh_nodes = conv.mesh_nodes;
        zero
    } else {
        engine.phi_field(&q, &sf)?
    };
    let p_kappa = engine.assemble_p_kappa(&phi);

    Ok(Build {
        config: cfg.clone(),
        profile,
        sf,
        coef,
        regime,
        cache,
        q0,
        q,
        diagnostics,
        phi,
        p_kappa,
    })
}

/// The grid-doubled variant used for refinement trends.
pub fn refined_config(cfg: &RunConfig) -> RunConfig {
    let mut fine = cfg.clone();
    fine.grids.space_nodes = 2 * cfg.grids.space_nodes - 1;
    fine.grids.frequency_period = 2.0 * cfg.grids.frequency_period;
    fine
}

/// In-memory property suite over a build (and optionally its refinement).
pub fn verify_build(build: &Build, refined: Option<&Build>) -> PropertyReport {
    let inputs = VerifierInputs {
        config: &build.config,
        profile: &build.profile,
        sf: &build.sf,
        coef: &build.coef,
        p_kappa: &build.p_kappa,
        phi: Some(&build.phi),
        cache: Some(&build.cache),
        diagnostics: Some(&build.diagnostics),
        refined_p_kappa: refined.map(|b| &b.p_kappa),
    };
    run_property_suite(&inputs)
}

/// Artifact file names inside the output directory.
pub mod artifacts {
    pub const REGIME: &str = "regime_report.json";
    pub const SERIES: &str = "series_diagnostics.json";
    pub const KERNEL_BIN: &str = "kernel_pkappa.bin";
    pub const KERNEL_CSV: &str = "kernel_pkappa.csv";
    pub const KERNEL_REFINED_BIN: &str = "kernel_pkappa_refined.bin";
    pub const Q_BIN: &str = "kernel_q.bin";
    pub const Q_CSV: &str = "kernel_q.csv";
    pub const CACHE_BIN: &str = "frozen_cache.bin";
    pub const PROPERTY_JSON: &str = "property_report.json";
    pub const PROPERTY_TXT: &str = "property_report.txt";
    pub const RATIOS_CSV: &str = "ratios.csv";
    pub const META: &str = "run_meta.json";
}

/// Resolves the output directory: flag override > env override > config.
pub fn resolve_out_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("LEVYHEAT_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from(&cfg.output.dir)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| Error::BadArtifact(e.to_string()))?;
    buf.push(b'\n');
    std::fs::write(path, buf)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::BadArtifact(e.to_string()))
}

/// Writes the build artifacts (kernel fields, regime report, diagnostics).
pub fn write_build_artifacts(build: &Build, dir: &Path, dump_cache: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join(artifacts::REGIME), &build.regime)?;
    write_json(&dir.join(artifacts::SERIES), &build.diagnostics)?;
    build.p_kappa.write_binary(&dir.join(artifacts::KERNEL_BIN))?;
    let t_idx: Vec<usize> = build
        .config
        .grids
        .t_out
        .iter()
        .filter_map(|&t| {
            build
                .p_kappa
                .t_nodes
                .iter()
                .position(|&v| (v - t).abs() < 1e-11 * t)
        })
        .collect();
    let mut csv = std::io::BufWriter::new(std::fs::File::create(dir.join(artifacts::KERNEL_CSV))?);
    build.p_kappa.write_csv(&mut csv, &t_idx)?;
    if build.config.output.dump_q {
        build.q.write_binary(&dir.join(artifacts::Q_BIN))?;
        let mut qcsv =
            std::io::BufWriter::new(std::fs::File::create(dir.join(artifacts::Q_CSV))?);
        build.q.write_csv(&mut qcsv, &t_idx)?;
    }
    if dump_cache {
        build.cache.write_binary(&dir.join(artifacts::CACHE_BIN))?;
    }
    write_json(
        &dir.join(artifacts::META),
        &serde_json::json!({
            "config_hash": build.config.hash(),
            "config": build.config,
            "regime": build.regime.regime,
        }),
    )?;
    Ok(())
}

/// Plot-ready ratio table p/ρ over the check window at the output times.
pub fn write_ratio_csv(build: &Build, dir: &Path) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(artifacts::RATIOS_CSV))?);
    writeln!(f, "t,x,y,p,rho,ratio")?;
    let field = &build.p_kappa;
    for &t in &build.config.grids.t_out {
        let Some(it) = field
            .t_nodes
            .iter()
            .position(|&v| (v - t).abs() < 1e-11 * t)
        else {
            continue;
        };
        for ix in 0..field.x.n {
            let x = field.x.node(ix);
            if x.abs() > build.config.grids.check_radius + 1e-9 {
                continue;
            }
            for iy in 0..field.y.n {
                let y = field.y.node(iy);
                let p = field.at(it, ix, iy);
                let rho = build.sf.rho(t, (y - x).abs());
                writeln!(f, "{t},{x},{y},{p},{rho},{}", p / rho)?;
            }
        }
    }
    Ok(())
}

/// The full pipeline: build, optional refined build, verify, artifacts.
pub fn run(cfg: &RunConfig, out_dir: &Path, force: bool) -> Result<PropertyReport> {
    let build = build_stage(cfg, force)?;
    let needs_refined = cfg.verifier.bounds
        || cfg.verifier.chapman_kolmogorov
        || cfg.verifier.regularity;
    let refined = if needs_refined {
        Some(build_stage(&refined_config(cfg), force)?)
    } else {
        None
    };
    let report = verify_build(&build, refined.as_ref());
    write_build_artifacts(&build, out_dir, build.config.output.dump_cache)?;
    if let Some(fine) = &refined {
        fine.p_kappa
            .write_binary(&out_dir.join(artifacts::KERNEL_REFINED_BIN))?;
    }
    write_ratio_csv(&build, out_dir)?;
    write_json(&out_dir.join(artifacts::PROPERTY_JSON), &report)?;
    std::fs::write(out_dir.join(artifacts::PROPERTY_TXT), report.render_table())?;
    Ok(report)
}

/// Verify a saved build without recomputing kernels. Loads the kernel field
/// (and the refined one plus the frozen cache when present).
pub fn verify_from_artifacts(cfg: &RunConfig, dir: &Path) -> Result<PropertyReport> {
    let kernel_path = dir.join(artifacts::KERNEL_BIN);
    if !kernel_path.exists() {
        return Err(Error::MissingArtifact(format!(
            "{} (run the build stage first)",
            kernel_path.display()
        )));
    }
    let p_kappa = KernelField::read_binary(&kernel_path)?;
    let refined_path = dir.join(artifacts::KERNEL_REFINED_BIN);
    let refined = if refined_path.exists() {
        Some(KernelField::read_binary(&refined_path)?)
    } else {
        None
    };
    let cache_path = dir.join(artifacts::CACHE_BIN);
    let cache = if cache_path.exists() {
        Some(FrozenKernelCache::read_binary(&cache_path)?)
    } else {
        None
    };
    let diagnostics: Option<SeriesDiagnostics> =
        read_json(&dir.join(artifacts::SERIES)).ok();
    let (profile, sf) = scale_stage(cfg)?;
    let coef = cfg.coefficient();
    let inputs = VerifierInputs {
        config: cfg,
        profile: &profile,
        sf: &sf,
        coef: &coef,
        p_kappa: &p_kappa,
        phi: None,
        cache: cache.as_ref(),
        diagnostics: diagnostics.as_ref(),
        refined_p_kappa: refined.as_ref(),
    };
    let report = run_property_suite(&inputs);
    write_json(&dir.join(artifacts::PROPERTY_JSON), &report)?;
    std::fs::write(dir.join(artifacts::PROPERTY_TXT), report.render_table())?;
    Ok(report)
}

/// Renders saved JSON reports into the human-readable table (a pure function
/// of the JSON artifacts).
pub fn report_from_artifacts(dir: &Path) -> Result<String> {
    let report: PropertyReport = read_json(&dir.join(artifacts::PROPERTY_JSON))?;
    let table = report.render_table();
    std::fs::write(dir.join(artifacts::PROPERTY_TXT), &table)?;
    Ok(table)
}

/// Profile-stage artifact: h, K, h⁻¹, ρ_t tables plus the scaling
/// certificates, as CSV + JSON in the output directory.
pub fn write_profile_tables(
    cfg: &RunConfig,
    profile: &UnimodalProfile,
    sf: &ScaleFunctions,
    dir: &Path,
) -> Result<()> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("profile_tables.csv"))?);
    writeln!(f, "r,h,K,nu")?;
    for i in 0..200 {
        let r = 1e-3 * (1e6f64).powf(i as f64 / 199.0);
        writeln!(f, "{r},{},{},{}", sf.h(r), sf.k(r), profile.nu(r))?;
    }
    let mut g = std::io::BufWriter::new(std::fs::File::create(dir.join("rho_tables.csv"))?);
    writeln!(g, "t,x,h_inv,rho")?;
    for &t in &cfg.grids.t_out {
        for i in 0..60 {
            let x = i as f64 * cfg.grids.space_radius / 59.0;
            writeln!(g, "{t},{x},{},{}", sf.time_scale(t), sf.rho(t, x))?;
        }
    }
    write_json(
        &dir.join("scaling_certificates.json"),
        &serde_json::json!({
            "config_hash": cfg.hash(),
            "lower": sf.lower_check,
            "upper": sf.upper_check,
            "first_moment_bounds": sf.check_first_moment_bounds(profile, 0.5)?,
        }),
    )?;
    Ok(())
}
