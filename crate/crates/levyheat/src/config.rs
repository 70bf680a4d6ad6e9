//! Run configuration: a structured TOML (or JSON) file that names the paper's
//! constants directly (κ₀..κ₄, β, α_h, β_h, γ₀) next to the grid and series
//! controls.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficient::{Coefficient, KappaFamily};
use crate::profile::{NuFamily, UnimodalProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    #[serde(flatten)]
    pub nu: NuFamily,
    pub d: u32,
    /// Comparability constant γ₀ for J against ν.
    #[serde(default = "one")]
    pub gamma0: f64,
    /// J = j_scale·ν with γ₀⁻¹ ≤ j_scale ≤ γ₀.
    #[serde(default = "one")]
    pub j_scale: f64,
    #[serde(default = "default_cut")]
    pub integrability_cut: f64,
    /// Declared lower scaling exponent α_h.
    pub declared_alpha_h: f64,
    /// Declared upper scaling exponent β_h (needed for the (Q2) regime).
    #[serde(default)]
    pub declared_beta_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientConfig {
    #[serde(flatten)]
    pub kappa: KappaFamily,
    /// Declared bounds 0 < κ₀ ≤ κ ≤ κ₁.
    pub kappa0: f64,
    pub kappa1: f64,
    /// Declared Hölder constant κ₂ and exponent β ∈ (0,1).
    pub kappa2: f64,
    pub beta: f64,
    /// Declared drift-condition constants (the paper's 𝜅_a, 𝜅_b).
    pub kappa3: f64,
    pub kappa4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Evaluation floor; the construction lives on [t_min, T].
    pub t_min: f64,
    /// Production output times (T = their maximum).
    pub t_out: Vec<f64>,
    /// Log-spaced ladder size between t_min and T.
    #[serde(default = "default_time_nodes")]
    pub time_nodes: usize,
    /// Space window [−R, R].
    pub space_radius: f64,
    /// Coarse grid size (odd keeps 0 on the grid).
    pub space_nodes: usize,
    /// Fine u-lattice step; must divide the coarse spacing.
    #[serde(default = "default_lattice_step")]
    pub lattice_step: f64,
    /// Minimum FFT period (periodization/aliasing control).
    #[serde(default = "default_period")]
    pub frequency_period: f64,
    /// Verifier sweeps sample x, y inside [−check_radius, check_radius].
    pub check_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
    #[serde(default = "default_series_tol")]
    pub tol: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_mesh_gamma")]
    pub mesh_gamma: f64,
    #[serde(default = "default_mesh_nodes")]
    pub mesh_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierConfig {
    #[serde(default = "yes")]
    pub conservation: bool,
    #[serde(default = "yes")]
    pub chapman_kolmogorov: bool,
    #[serde(default = "yes")]
    pub bounds: bool,
    #[serde(default = "yes")]
    pub regularity: bool,
    #[serde(default = "yes")]
    pub initial_condition: bool,
    #[serde(default = "yes")]
    pub maximum_principle: bool,
    #[serde(default = "yes")]
    pub pde_residual: bool,
    #[serde(default = "yes")]
    pub frozen_sanity: bool,
    #[serde(default = "default_conservation_tol")]
    pub conservation_tol: f64,
    #[serde(default = "default_ck_tol")]
    pub ck_tol: f64,
    /// (t, s) for the Chapman–Kolmogorov check; t, s and t+s must be ladder
    /// nodes.
    #[serde(default = "default_ck_pair")]
    pub ck_pair: [f64; 2],
    #[serde(default = "default_residual_eps")]
    pub residual_eps_ladder: Vec<f64>,
    #[serde(default = "default_pde_tol")]
    pub pde_residual_tol: f64,
    #[serde(default = "default_contraction_tol")]
    pub contraction_tol: f64,
    #[serde(default = "default_ic_tol")]
    pub initial_condition_tol: f64,
    /// Fitted constants must move less than this fraction under grid
    /// doubling to count as refinement-stable.
    #[serde(default = "default_refine_drift")]
    pub refinement_drift: f64,
    #[serde(default = "default_neg_budget")]
    pub negativity_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    /// Also dump q (not only p^κ) as CSV/binary.
    #[serde(default)]
    pub dump_q: bool,
    /// Dump the frozen-kernel cache so `verify` can run the floor-time
    /// convolution checks without rebuilding.
    #[serde(default = "yes")]
    pub dump_cache: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker cap; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    pub profile: ProfileConfig,
    pub coefficient: CoefficientConfig,
    pub grids: GridConfig,
    #[serde(default = "default_series")]
    pub series: SeriesConfig,
    #[serde(default = "default_verifier")]
    pub verifier: VerifierConfig,
    #[serde(default = "default_output")]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_cut() -> f64 {
    1e8
}
fn default_time_nodes() -> usize {
    48
}
fn default_lattice_step() -> f64 {
    0.0625
}
fn default_period() -> f64 {
    2048.0
}
fn default_max_terms() -> usize {
    6
}
fn default_series_tol() -> f64 {
    1e-3
}
fn default_residual_tol() -> f64 {
    5e-2
}
fn default_mesh_gamma() -> f64 {
    2.0
}
fn default_mesh_nodes() -> usize {
    12
}
fn default_conservation_tol() -> f64 {
    1e-2
}
fn default_ck_tol() -> f64 {
    5e-2
}
fn default_ck_pair() -> [f64; 2] {
    [0.5, 0.5]
}
fn default_residual_eps() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn default_pde_tol() -> f64 {
    1e-1
}
fn default_contraction_tol() -> f64 {
    1e-2
}
fn default_ic_tol() -> f64 {
    0.35
}
fn default_refine_drift() -> f64 {
    0.25
}
fn default_neg_budget() -> f64 {
    1e-4
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_series() -> SeriesConfig {
    SeriesConfig {
        max_terms: default_max_terms(),
        tol: default_series_tol(),
        residual_tol: default_residual_tol(),
        mesh_gamma: default_mesh_gamma(),
        mesh_nodes: default_mesh_nodes(),
    }
}
fn default_verifier() -> VerifierConfig {
    serde_json::from_str("{}").unwrap()
}
fn default_output() -> OutputConfig {
    OutputConfig { dir: default_out_dir(), dump_q: false, dump_cache: true }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = if path.extension().and_then(|e| e.to_str()) == Some("json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grids;
        if g.t_min <= 0.0 {
            return Err(Error::Config("t_min must be positive".into()));
        }
        if g.t_out.is_empty() || g.t_out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("t_out must be non-empty and increasing".into()));
        }
        if g.t_out[0] <= 4.0 * g.t_min {
            return Err(Error::Config(format!(
                "smallest output time {} must exceed 4·t_min = {}",
                g.t_out[0],
                4.0 * g.t_min
            )));
        }
        if g.space_radius <= 0.0 || g.space_nodes < 9 {
            return Err(Error::Config("space window too small".into()));
        }
        let step = 2.0 * g.space_radius / (g.space_nodes - 1) as f64;
        let ratio = step / g.lattice_step;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return Err(Error::Config(format!(
                "coarse spacing {step} must be an integer multiple of lattice_step {}",
                g.lattice_step
            )));
        }
        if g.check_radius <= 0.0 || g.check_radius > g.space_radius - 3.0 {
            return Err(Error::Config(
                "check_radius must leave at least 3 units of window margin".into(),
            ));
        }
        for tol in [
            self.series.tol,
            self.series.residual_tol,
            self.verifier.conservation_tol,
            self.verifier.ck_tol,
            self.verifier.pde_residual_tol,
            self.verifier.contraction_tol,
            self.verifier.initial_condition_tol,
            self.verifier.refinement_drift,
        ] {
            if tol <= 0.0 {
                return Err(Error::Config("tolerances must be positive".into()));
            }
        }
        let c = &self.coefficient;
        if !(c.kappa0 > 0.0 && c.kappa0 <= c.kappa1) {
            return Err(Error::Config("need 0 < κ₀ ≤ κ₁".into()));
        }
        if !(c.beta > 0.0 && c.beta < 1.0) {
            return Err(Error::Config("β must lie in (0,1)".into()));
        }
        let t_max = *g.t_out.last().unwrap();
        let [t, s] = self.verifier.ck_pair;
        if t + s > t_max + 1e-12 {
            return Err(Error::Config(
                "ck_pair t+s exceeds the largest output time".into(),
            ));
        }
        if self.profile.d != 1 {
            #[cfg(not(feature = "dim2"))]
            return Err(Error::Config(
                "d ≠ 1 requires the dim2 feature (profile stage only)".into(),
            ));
            #[cfg(feature = "dim2")]
            if self.profile.d > 2 {
                return Err(Error::Config("d must be 1 or 2".into()));
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> UnimodalProfile {
        let mut p =
            UnimodalProfile::new(self.profile.d, self.profile.nu.clone(), self.profile.gamma0);
        p.j_scale = self.profile.j_scale;
        p.integrability_cut = self.profile.integrability_cut;
        p
    }

    pub fn coefficient(&self) -> Coefficient {
        let c = &self.coefficient;
        Coefficient {
            kappa: c.kappa.clone(),
            kappa0: c.kappa0,
            kappa1: c.kappa1,
            kappa2: c.kappa2,
            beta: c.beta,
            kappa3: c.kappa3,
            kappa4: c.kappa4,
        }
    }

    /// Hash of the canonical JSON form; stamped on every artifact.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(&json);
        let digest = hasher.finalize();
        let mut out = String::with_capacity(16);
        for b in digest.iter().take(8) {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SAMPLE: &str = r#"
seed = 7

[profile]
family = "stable"
alpha = 1.0
d = 1
declared_alpha_h = 1.0
declared_beta_h = 1.0

[coefficient]
family = "skew_truncated"
a = 0.4
z0 = 0.5
kappa0 = 1.0
kappa1 = 1.4
kappa2 = 0.4
beta = 0.95
kappa3 = 0.15
kappa4 = 0.15

[grids]
t_min = 0.015625
t_out = [0.5, 1.0, 2.0]
space_radius = 12.0
space_nodes = 65
check_radius = 4.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        cfg.validate().unwrap();
        let ser1 = toml::to_string(&cfg).unwrap();
        let cfg2: RunConfig = toml::from_str(&ser1).unwrap();
        let ser2 = toml::to_string(&cfg2).unwrap();
        assert_eq!(ser1, ser2);
        assert_eq!(cfg, cfg2);
        assert_eq!(cfg.hash(), cfg2.hash());
    }

    #[test]
    fn json_form_is_equivalent() {
        let cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let cfg2: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        cfg.grids.t_min = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        cfg.grids.t_out = vec![0.05];
        assert!(cfg.validate().is_err());

        let mut cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        cfg.grids.lattice_step = 0.07;
        assert!(cfg.validate().is_err());

        let mut cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        cfg.coefficient.beta = 1.0;
        assert!(cfg.validate().is_err());
    }
}
