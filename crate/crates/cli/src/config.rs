use std::path::Path;

use serde::{Deserialize, Serialize};
use sre_core::appendix::AppendixOptions;
use sre_core::disentangler::{DisentangleOptions, Reference, CUT_TOL, DEFAULT_ELL0, MAX_SUPPORT, STEP_TOL};
use sre_core::eigensolver::SolveOptions;
use sre_core::model::ModelSpec;

use crate::Failure;

/// State fed to the analysis and cutting stages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateChoice {
    #[default]
    Ground,
    /// `(|0…0⟩ + |1…1⟩)/√2` on the model's chain, bypassing the solver.
    Ghz,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub degeneracy_rel: f64,
    /// Random local operators used by the gap-condition check.
    pub gap_samples: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self { tol: d.tol, max_iter: d.max_iter, degeneracy_rel: d.degeneracy_rel, gap_samples: 200 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub interval: [usize; 2],
    pub ells: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Single-site observables by name: `x`, `y`, `z`.
    pub observables: Vec<String>,
    /// Center of the mutual-correlation curve (default `N/2`).
    pub mutual_x: Option<usize>,
    /// `ℓ` values of the mutual-correlation curve (default `1..=N/2`).
    pub ells: Option<Vec<usize>>,
    /// Schmidt cuts `≤ x | > x` (default `N/2 − 1`).
    pub cut_sites: Option<Vec<usize>>,
    pub k_stars: Vec<usize>,
    pub functional: Option<FunctionalConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            observables: vec!["x".into(), "z".into()],
            mutual_x: None,
            ells: None,
            cut_sites: None,
            k_stars: vec![1, 2, 4, 8],
            functional: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutConfig {
    /// Cut `≤ x | > x` (default `N/2 − 1`).
    pub x: Option<usize>,
    pub ell0: usize,
    pub tol: f64,
}

impl Default for CutConfig {
    fn default() -> Self {
        Self { x: None, ell0: 1, tol: CUT_TOL }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisentangleConfig {
    pub ell: usize,
    pub ell0: usize,
    pub cut_tol: f64,
    pub step_tol: f64,
    pub max_support: usize,
    pub reference: Reference,
    /// Exit status is zero iff the final fidelity reaches this.
    pub threshold: f64,
}

impl Default for DisentangleConfig {
    fn default() -> Self {
        Self { ell: 3, ell0: DEFAULT_ELL0, cut_tol: CUT_TOL, step_tol: STEP_TOL, max_support: MAX_SUPPORT, reference: Reference::Zero, threshold: 0.99 }
    }
}

impl DisentangleConfig {
    pub fn options(&self) -> DisentangleOptions {
        DisentangleOptions { ell0: self.ell0, cut_tol: self.cut_tol, step_tol: self.step_tol, max_support: self.max_support }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub state: StateChoice,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub cut: CutConfig,
    #[serde(default)]
    pub disentangle: DisentangleConfig,
    #[serde(default)]
    pub appendix: AppendixOptions,
    pub seed: Option<u64>,
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Failure::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        if seed.is_some() {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.seed.is_none() {
            return Err(Failure::Config("a seed is required (config field `seed` or --seed)".into()));
        }
        let s = &self.solver;
        positive("solver.tol", s.tol)?;
        positive("solver.degeneracy_rel", s.degeneracy_rel)?;
        if s.max_iter == 0 {
            return Err(Failure::Config("solver.max_iter must be positive".into()));
        }
        if self.analysis.k_stars.contains(&0) {
            return Err(Failure::Config("analysis.k_stars are 1-based".into()));
        }
        if self.cut.ell0 == 0 {
            return Err(Failure::Config("cut.ell0 must be positive".into()));
        }
        positive("cut.tol", self.cut.tol)?;
        let d = &self.disentangle;
        if d.ell < 2 {
            return Err(Failure::Config(format!("disentangle.ell must be at least 2, got {}", d.ell)));
        }
        if d.max_support < 2 {
            return Err(Failure::Config("disentangle.max_support must be at least 2".into()));
        }
        if d.ell0 == 0 {
            return Err(Failure::Config("disentangle.ell0 must be positive".into()));
        }
        positive("disentangle.cut_tol", d.cut_tol)?;
        positive("disentangle.step_tol", d.step_tol)?;
        if !(d.threshold > 0.0 && d.threshold <= 1.0) {
            return Err(Failure::Config(format!("disentangle.threshold must lie in (0, 1], got {}", d.threshold)));
        }
        let a = &self.appendix;
        if a.fvdg_dim < 2 || a.swap_sites < 3 {
            return Err(Failure::Config("appendix dimensions are too small".into()));
        }
        if !(a.lipschitz_lambda > 0.0 && a.lipschitz_lambda <= 1.0)
            || a.rank_lambdas.iter().chain(&a.scaling_lambdas).any(|&l| !(l > 0.0 && l <= 1.0))
        {
            return Err(Failure::Config("appendix λ values must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated")
    }

    pub fn model(&self) -> Result<&ModelSpec, Failure> {
        self.model.as_ref().ok_or_else(|| Failure::Config("this command needs a `model`".into()))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            seed: self.seed(),
            degeneracy_rel: self.solver.degeneracy_rel,
        }
    }
}
