//! Experiment configuration: a versioned TOML schema with validation that
//! names the offending field and constraint.

use abscop_core::{
    pearson_from_spearman, CopulaFamily, CopulaSpec, FunctionalKind, MarginalFamily, PriorSpec,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: u32,
    pub study: String,
    pub seed: u64,
    pub n: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// 0 means all available cores.
    #[serde(default)]
    pub parallelism: usize,
    pub truth: Option<TruthSection>,
    pub functionals: Vec<FunctionalSection>,
    pub prior: Option<PriorSection>,
    #[serde(default)]
    pub abscop: AbscopSection,
    #[serde(default)]
    pub baselines: BaselineSection,
    #[serde(default)]
    pub marginals: MarginalSection,
    pub output: Option<OutputSection>,
}

fn default_repetitions() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSection {
    pub family: String,
    pub dim: usize,
    pub theta: Option<f64>,
    /// Gaussian only: specify the copula by its Spearman's rho instead of
    /// the Pearson parameter.
    pub spearman_rho: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSection {
    pub kind: String,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AbscopSection {
    #[serde(default = "default_proposals")]
    pub proposals: usize,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_proposals() -> usize {
    10_000
}

fn default_level() -> f64 {
    0.95
}

impl Default for AbscopSection {
    fn default() -> Self {
        Self {
            proposals: default_proposals(),
            level: default_level(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    #[serde(default)]
    pub asymptotic_rho: bool,
    #[serde(default)]
    pub bootstrap: bool,
    #[serde(default = "default_boot_reps")]
    pub bootstrap_replicates: usize,
    /// Assumed parametric models for the posterior comparison.
    #[serde(default)]
    pub parametric_models: Vec<String>,
    #[serde(default = "default_mcmc_iters")]
    pub mcmc_iterations: usize,
    #[serde(default = "default_mcmc_burn")]
    pub mcmc_burn_in: usize,
}

fn default_boot_reps() -> usize {
    500
}

fn default_mcmc_iters() -> usize {
    6000
}

fn default_mcmc_burn() -> usize {
    1500
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    /// posterior_file mode: one CSV of parameter draws per column.
    #[serde(default)]
    pub posterior_files: Vec<PathBuf>,
    /// posterior_file mode: declared CDF family per column.
    #[serde(default)]
    pub families: Vec<String>,
    /// pseudo_tensor mode: flat CSV with header draw,row,col,value.
    pub pseudo_tensor: Option<PathBuf>,
}

fn default_mode() -> String {
    "known_uniform".to_string()
}

impl Default for MarginalSection {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            posterior_files: Vec::new(),
            families: Vec::new(),
            pseudo_tensor: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

/// Marginal handling requested by the config; file contents are loaded by
/// the study runner relative to the config location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarginalMode {
    KnownUniform,
    EmpiricalCdf,
    PosteriorFiles {
        files: Vec<PathBuf>,
        families: Vec<MarginalFamily>,
    },
    PseudoTensor(PathBuf),
}

impl MarginalMode {
    pub fn name(&self) -> &'static str {
        match self {
            MarginalMode::KnownUniform => "known_uniform",
            MarginalMode::EmpiricalCdf => "empirical_cdf",
            MarginalMode::PosteriorFiles { .. } => "posterior_file",
            MarginalMode::PseudoTensor(_) => "pseudo_tensor",
        }
    }
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub study: String,
    pub seed: u64,
    pub n: usize,
    pub repetitions: usize,
    pub parallelism: usize,
    pub truth: Option<CopulaSpec>,
    pub functionals: Vec<FunctionalKind>,
    pub prior: Option<PriorSpec>,
    pub proposals: usize,
    pub level: f64,
    pub baselines: BaselineSection,
    pub parametric_models: Vec<CopulaFamily>,
    pub marginal_mode: MarginalMode,
    pub output_dir: Option<PathBuf>,
    /// Directory of the config file, for resolving relative paths.
    pub base_dir: PathBuf,
    /// Raw config echoed into result metadata.
    pub raw: RawConfig,
}

impl ExperimentConfig {
    pub fn prior_for(&self, kind: &FunctionalKind) -> PriorSpec {
        self.prior.unwrap_or_else(|| PriorSpec::default_for(kind))
    }
}

fn parse_family(name: &str, field: &str) -> Result<CopulaFamily> {
    match name {
        "clayton" => Ok(CopulaFamily::Clayton),
        "frank" => Ok(CopulaFamily::Frank),
        "gumbel" => Ok(CopulaFamily::Gumbel),
        "gaussian" => Ok(CopulaFamily::Gaussian),
        "independence" => Ok(CopulaFamily::Independence),
        other => Err(HarnessError::Config {
            field: field.to_string(),
            constraint: format!(
                "must be one of clayton|frank|gumbel|gaussian|independence, got {other:?}"
            ),
        }),
    }
}

fn parse_marginal_family(name: &str, field: &str) -> Result<MarginalFamily> {
    match name {
        "normal" => Ok(MarginalFamily::Normal),
        "lognormal" => Ok(MarginalFamily::LogNormal),
        "student_t" => Ok(MarginalFamily::StudentT),
        "exponential" => Ok(MarginalFamily::Exponential),
        "uniform" => Ok(MarginalFamily::Uniform),
        other => Err(HarnessError::Config {
            field: field.to_string(),
            constraint: format!(
                "must be one of normal|lognormal|student_t|exponential|uniform, got {other:?}"
            ),
        }),
    }
}

fn parse_kind(section: &FunctionalSection, idx: usize, n: usize) -> Result<FunctionalKind> {
    let field = format!("functionals[{idx}]");
    let kind = match section.kind.as_str() {
        "spearman_rho" => FunctionalKind::SpearmanRho,
        "rho1" => FunctionalKind::Rho1,
        "rho2" => FunctionalKind::Rho2,
        "lambda_upper" => FunctionalKind::LambdaUpper { k: section.k },
        "lambda_lower" => FunctionalKind::LambdaLower { k: section.k },
        other => {
            return Err(HarnessError::Config {
                field: format!("{field}.kind"),
                constraint: format!(
                    "must be one of spearman_rho|rho1|rho2|lambda_upper|lambda_lower, got {other:?}"
                ),
            })
        }
    };
    if let Some(k) = section.k {
        if !kind.is_tail() {
            return Err(HarnessError::Config {
                field: format!("{field}.k"),
                constraint: "tuning k applies to the tail kinds only".to_string(),
            });
        }
        if k == 0 || k > n {
            return Err(HarnessError::Config {
                field: format!("{field}.k"),
                constraint: format!("must satisfy 0 < k <= n (got k={k}, n={n})"),
            });
        }
    }
    Ok(kind)
}

/// Parses and validates a config file; defaults are filled here so the
/// echoed metadata shows the effective values.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    load_config_str(&text, base_dir)
}

pub fn load_config_str(text: &str, base_dir: PathBuf) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Config {
        field: "<document>".to_string(),
        constraint: e.to_string(),
    })?;
    validate(raw, base_dir)
}

fn validate(raw: RawConfig, base_dir: PathBuf) -> Result<ExperimentConfig> {
    let fail = |field: &str, constraint: String| HarnessError::Config {
        field: field.to_string(),
        constraint,
    };
    if raw.schema_version != SCHEMA_VERSION {
        return Err(fail(
            "schema_version",
            format!(
                "supported version is {SCHEMA_VERSION}, got {}",
                raw.schema_version
            ),
        ));
    }
    if raw.study.is_empty() {
        return Err(fail("study", "must be a nonempty identifier".to_string()));
    }
    if raw.n < 2 {
        return Err(fail(
            "n",
            format!("sample size must be >= 2, got {}", raw.n),
        ));
    }
    if raw.repetitions == 0 {
        return Err(fail("repetitions", "must be >= 1".to_string()));
    }
    if raw.functionals.is_empty() {
        return Err(fail(
            "functionals",
            "need at least one functional".to_string(),
        ));
    }
    if !(0.0 < raw.abscop.level && raw.abscop.level < 1.0) {
        return Err(fail(
            "abscop.level",
            format!("must lie in (0,1), got {}", raw.abscop.level),
        ));
    }
    if raw.abscop.proposals < 100 {
        return Err(fail(
            "abscop.proposals",
            format!("need at least 100 proposals, got {}", raw.abscop.proposals),
        ));
    }

    let truth = match &raw.truth {
        None => None,
        Some(t) => {
            let family = parse_family(&t.family, "truth.family")?;
            let theta = match (family, t.theta, t.spearman_rho) {
                (CopulaFamily::Gaussian, None, Some(rho)) => pearson_from_spearman(rho),
                (_, Some(theta), None) => theta,
                (CopulaFamily::Independence, None, None) => 0.0,
                (_, None, None) => {
                    return Err(fail("truth.theta", "parameter required".to_string()))
                }
                _ => {
                    return Err(fail(
                        "truth.theta",
                        "give either theta or (gaussian only) spearman_rho, not both".to_string(),
                    ))
                }
            };
            Some(CopulaSpec::new(family, theta, t.dim).map_err(|e| fail("truth", e.to_string()))?)
        }
    };

    let mut functionals = Vec::with_capacity(raw.functionals.len());
    for (i, f) in raw.functionals.iter().enumerate() {
        let kind = parse_kind(f, i, raw.n)?;
        if let Some(spec) = &truth {
            kind.check_dimension(spec.dim)
                .map_err(|e| fail(&format!("functionals[{i}].kind"), e.to_string()))?;
        }
        functionals.push(kind);
    }

    let prior = match &raw.prior {
        None => None,
        Some(p) => {
            Some(PriorSpec::new(p.lower, p.upper).map_err(|e| fail("prior", e.to_string()))?)
        }
    };

    let mut parametric_models = Vec::new();
    for (i, m) in raw.baselines.parametric_models.iter().enumerate() {
        let family = parse_family(m, &format!("baselines.parametric_models[{i}]"))?;
        if !matches!(
            family,
            CopulaFamily::Clayton | CopulaFamily::Frank | CopulaFamily::Gumbel
        ) {
            return Err(fail(
                &format!("baselines.parametric_models[{i}]"),
                "parametric posterior models are clayton|frank|gumbel".to_string(),
            ));
        }
        parametric_models.push(family);
    }
    if !parametric_models.is_empty() && raw.baselines.mcmc_iterations <= raw.baselines.mcmc_burn_in
    {
        return Err(fail(
            "baselines.mcmc_iterations",
            format!(
                "must exceed mcmc_burn_in ({} <= {})",
                raw.baselines.mcmc_iterations, raw.baselines.mcmc_burn_in
            ),
        ));
    }
    if raw.baselines.bootstrap && raw.baselines.bootstrap_replicates < 2 {
        return Err(fail(
            "baselines.bootstrap_replicates",
            "need at least 2 replicates".to_string(),
        ));
    }

    let marginal_mode = match raw.marginals.mode.as_str() {
        "known_uniform" => MarginalMode::KnownUniform,
        "empirical_cdf" => MarginalMode::EmpiricalCdf,
        "posterior_file" => {
            if raw.marginals.posterior_files.is_empty() {
                return Err(fail(
                    "marginals.posterior_files",
                    "posterior_file mode needs one CSV per column".to_string(),
                ));
            }
            if raw.marginals.families.len() != raw.marginals.posterior_files.len() {
                return Err(fail(
                    "marginals.families",
                    format!(
                        "need one family per posterior file ({} files, {} families)",
                        raw.marginals.posterior_files.len(),
                        raw.marginals.families.len()
                    ),
                ));
            }
            let families = raw
                .marginals
                .families
                .iter()
                .enumerate()
                .map(|(i, f)| parse_marginal_family(f, &format!("marginals.families[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            MarginalMode::PosteriorFiles {
                files: raw.marginals.posterior_files.clone(),
                families,
            }
        }
        "pseudo_tensor" => match &raw.marginals.pseudo_tensor {
            Some(p) => MarginalMode::PseudoTensor(p.clone()),
            None => {
                return Err(fail(
                    "marginals.pseudo_tensor",
                    "pseudo_tensor mode needs a tensor CSV path".to_string(),
                ))
            }
        },
        other => {
            return Err(fail(
                "marginals.mode",
                format!(
                    "must be one of known_uniform|empirical_cdf|posterior_file|pseudo_tensor, got {other:?}"
                ),
            ))
        }
    };

    Ok(ExperimentConfig {
        study: raw.study.clone(),
        seed: raw.seed,
        n: raw.n,
        repetitions: raw.repetitions,
        parallelism: raw.parallelism,
        truth,
        functionals,
        prior,
        proposals: raw.abscop.proposals,
        level: raw.abscop.level,
        baselines: raw.baselines.clone(),
        parametric_models,
        marginal_mode,
        output_dir: raw.output.as_ref().map(|o| o.directory.clone()),
        base_dir,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
study = "demo"
seed = 7
n = 200

[truth]
family = "clayton"
theta = 1.076
dim = 2

[[functionals]]
kind = "spearman_rho"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = load_config_str(MINIMAL, PathBuf::from(".")).unwrap();
        assert_eq!(cfg.repetitions, 1);
        assert_eq!(cfg.proposals, 10_000);
        assert_eq!(cfg.level, 0.95);
        assert_eq!(cfg.marginal_mode, MarginalMode::KnownUniform);
        let prior = cfg.prior_for(&FunctionalKind::SpearmanRho);
        assert_eq!((prior.lower, prior.upper), (-1.0, 1.0));
        let prior = cfg.prior_for(&FunctionalKind::LambdaLower { k: None });
        assert_eq!((prior.lower, prior.upper), (0.0, 1.0));
    }

    #[test]
    fn oversized_k_is_rejected_with_field_name() {
        let text = MINIMAL.replace(
            "kind = \"spearman_rho\"",
            "kind = \"lambda_lower\"\nk = 500",
        );
        let err = load_config_str(&text, PathBuf::from(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("functionals[0].k"), "{msg}");
        assert!(msg.contains("0 < k <= n"), "{msg}");
    }

    #[test]
    fn bad_family_and_schema_version() {
        let text = MINIMAL.replace("\"clayton\"", "\"cauchy\"");
        assert!(load_config_str(&text, PathBuf::from(".")).is_err());
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 9");
        let err = load_config_str(&text, PathBuf::from(".")).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }

    #[test]
    fn gaussian_accepts_spearman_parameterization() {
        let text = MINIMAL
            .replace("family = \"clayton\"", "family = \"gaussian\"")
            .replace("theta = 1.076", "spearman_rho = 0.8");
        let cfg = load_config_str(&text, PathBuf::from(".")).unwrap();
        let spec = cfg.truth.unwrap();
        assert!((spec.theta - pearson_from_spearman(0.8)).abs() < 1e-15);
    }

    #[test]
    fn spearman_kind_needs_bivariate_truth() {
        let text = MINIMAL.replace("dim = 2", "dim = 4");
        let err = load_config_str(&text, PathBuf::from(".")).unwrap_err();
        assert!(err.to_string().contains("functionals[0].kind"));
    }
}
