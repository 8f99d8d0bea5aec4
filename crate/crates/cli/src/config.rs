//! Run configuration: TOML file, command-line overrides, resolution of defaults.

use std::path::{Path, PathBuf};

use choquard::diagnostics::{Slack, DEFAULT_OUTER_RADIUS, DEFAULT_RHO};
use choquard::grid::make_grid;
use choquard::model::{PenaltyCase, PotentialSpec, ProblemParams, RegionSpec};
use choquard::solver::SolveOptions;
use choquard::GridSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Points per axis, a power of two.
    pub n: usize,
    pub half_extent: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 256, half_extent: 16.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub dim: usize,
    pub alpha: f64,
    pub p: f64,
    pub eps: f64,
    /// Continuation ladder; a missing list means `[eps]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    /// Values of `lambda` for `solve-limit`.
    pub lambda: Vec<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { dim: 1, alpha: 0.5, p: 2.0, eps: 0.1, eps_list: None, lambda: vec![1.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKeyword {
    Auto,
    None,
}

/// `case = 1 | 2 | 3 | "auto" | "none"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseSetting {
    Fixed(PenaltyCase),
    Keyword(CaseKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// `lam = <number> | "auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSetting {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenalizationSection {
    pub case: CaseSetting,
    pub delta: f64,
    pub lam: RateSetting,
    pub hardy_trials: usize,
}

impl Default for PenalizationSection {
    fn default() -> Self {
        Self {
            case: CaseSetting::Keyword(CaseKeyword::Auto),
            delta: 0.1,
            lam: RateSetting::Keyword(AutoKeyword::Auto),
            hardy_trials: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Ball radius for the scaled mass, in units of eps.
    pub rho: f64,
    /// Radius `R` of the core `B(a, R eps)`.
    pub outer_radius: f64,
    pub slack_abs: f64,
    pub slack_rel: f64,
    /// Compact set `K` for the mass trend of `nonexist`; defaults to `lambda_region`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compact_set: Option<RegionSpec>,
    /// Bump radius of the ground-state transform probes.
    pub probe_radius: f64,
    /// Probe centers, spread along the first axis across `K`.
    pub probe_count: usize,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        let slack = Slack::default();
        Self {
            rho: DEFAULT_RHO,
            outer_radius: DEFAULT_OUTER_RADIUS,
            slack_abs: slack.abs,
            slack_rel: slack.rel,
            compact_set: None,
            probe_radius: 0.25,
            probe_count: 8,
        }
    }
}

impl DiagnosticsSection {
    pub fn slack(&self) -> Slack {
        Slack { abs: self.slack_abs, rel: self.slack_rel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::constant(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub problem: ProblemSection,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    /// Defaults to the ball of radius 1 about the origin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_region: Option<RegionSpec>,
    /// Defaults to the ball of radius 2 about the origin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_region: Option<RegionSpec>,
    pub penalization: PenalizationSection,
    pub solver: SolveOptions,
    pub diagnostics: DiagnosticsSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSection::default(),
            problem: ProblemSection::default(),
            potential: default_potential(),
            lambda_region: None,
            outer_region: None,
            penalization: PenalizationSection::default(),
            solver: SolveOptions::default(),
            diagnostics: DiagnosticsSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Settings given on the command line, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub pairs: Vec<String>,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub seed: Option<u64>,
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed override key `{key}`")));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses `text`, reporting syntax errors and unknown keys with their location.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let (text, origin) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                (text, p.display().to_string())
            }
            None => (String::new(), "<defaults>".to_string()),
        };
        Self::parse(&text, &origin)?;
        let mut table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        for pair in &overrides.pairs {
            let (key, raw) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{pair}` is not KEY=VALUE")))?;
            set_path(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("after overrides: {}", e.message())))?;
        if let Some(out) = &overrides.out {
            cfg.output.dir = out.clone();
        }
        if overrides.strict {
            cfg.solver.strict_boundary = true;
        }
        if let Some(seed) = overrides.seed {
            cfg.solver.seed = seed;
        }
        cfg.resolve_defaults();
        Ok(cfg)
    }

    /// Fills the dimension-dependent defaults.
    pub fn resolve_defaults(&mut self) {
        let origin = vec![0.0; self.problem.dim];
        self.lambda_region.get_or_insert_with(|| RegionSpec::ball(origin.clone(), 1.0));
        self.outer_region.get_or_insert_with(|| RegionSpec::ball(origin, 2.0));
        if self.problem.eps_list.is_none() {
            self.problem.eps_list = Some(vec![self.problem.eps]);
        }
    }

    pub fn eps_list(&self) -> Vec<f64> {
        self.problem.eps_list.clone().unwrap_or_else(|| vec![self.problem.eps])
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        Ok(make_grid(self.problem.dim, self.grid.n, self.grid.half_extent)?)
    }

    /// Problem parameters at the first eps of the ladder.
    pub fn params(&self) -> ProblemParams {
        let origin = vec![0.0; self.problem.dim];
        ProblemParams {
            dim: self.problem.dim,
            alpha: self.problem.alpha,
            p: self.problem.p,
            eps: self.eps_list().first().copied().unwrap_or(self.problem.eps),
            potential: self.potential.clone(),
            lambda_region: self.lambda_region.clone().unwrap_or_else(|| RegionSpec::ball(origin.clone(), 1.0)),
            outer_region: self.outer_region.clone().unwrap_or_else(|| RegionSpec::ball(origin, 2.0)),
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialize the resolved config: {e}")))
    }

    pub fn write_resolved(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("resolved-config.toml"), self.to_toml()?)?;
        Ok(())
    }

    /// Everything that determines the solution sequence, serialized for hashing.
    /// The output location and the `solve-limit` lambda list are left out.
    pub fn physics_fingerprint(&self) -> Result<String, CliError> {
        let mut physics = self.clone();
        physics.output = OutputSection::default();
        physics.problem.lambda = Vec::new();
        physics.problem.eps_list = None;
        physics.problem.eps = 0.0;
        serde_json::to_string(&physics).map_err(|e| CliError::Runtime(e.to_string()))
    }
}

/// Directory name for step `k` of a ladder: a digest of the physics and of
/// `eps_list[..=k]`, so a longer ladder with the same prefix reuses the steps.
pub fn step_key(fingerprint: &str, chain: &[f64]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(fingerprint.as_bytes());
    for eps in chain {
        hasher.update(b"\n");
        hasher.update(choquard::diagnostics::format_real(*eps).as_bytes());
    }
    let digest = format!("{:x}", hasher.finalize());
    format!("eps-{}", &digest[..16])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_dimension_dependent_regions() {
        let cfg = RunConfig::load(None, &Overrides { pairs: vec!["problem.dim=2".into()], ..Default::default() }).unwrap();
        assert_eq!(cfg.lambda_region, Some(RegionSpec::ball(vec![0.0, 0.0], 1.0)));
        assert_eq!(cfg.eps_list(), vec![0.1]);
    }

    #[test]
    fn unknown_keys_name_the_key_and_line() {
        let err = RunConfig::parse("[grid]\nn = 64\nsize = 3\n", "cfg").unwrap_err().to_string();
        assert!(err.contains("size") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn case_and_rate_accept_numbers_and_keywords() {
        let cfg = RunConfig::parse("[penalization]\ncase = 2\nlam = 0.75\n", "cfg").unwrap();
        assert_eq!(cfg.penalization.case, CaseSetting::Fixed(PenaltyCase::SlowDecay));
        assert_eq!(cfg.penalization.lam, RateSetting::Value(0.75));
        let cfg = RunConfig::parse("[penalization]\ncase = \"none\"\n", "cfg").unwrap();
        assert_eq!(cfg.penalization.case, CaseSetting::Keyword(CaseKeyword::None));
        assert!(RunConfig::parse("[penalization]\ncase = 4\n", "cfg").is_err());
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let ov = Overrides {
            pairs: vec!["potential.kind=\"gaussian_well\"".into(), "potential.floor=2".into()],
            ..Default::default()
        };
        assert!(RunConfig::load(None, &ov).is_err());
        let ov = Overrides {
            pairs: vec![
                "potential.kind=gaussian_well".into(),
                "potential.floor=2.0".into(),
                "potential.depth=1.0".into(),
                "potential.width=1.0".into(),
                "potential.center=[0.0]".into(),
            ],
            seed: Some(7),
            strict: true,
            ..Default::default()
        };
        let cfg = RunConfig::load(None, &ov).unwrap();
        assert_eq!(cfg.potential, PotentialSpec::gaussian_well(2.0, 1.0, 1.0, vec![0.0]));
        assert_eq!(cfg.solver.seed, 7);
        assert!(cfg.solver.strict_boundary);
    }

    #[test]
    fn resolved_config_round_trips() {
        let ov = Overrides { pairs: vec!["problem.eps_list=[0.2, 0.1]".into()], ..Default::default() };
        let cfg = RunConfig::load(None, &ov).unwrap();
        let back = RunConfig::parse(&cfg.to_toml().unwrap(), "resolved").unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn step_keys_depend_on_the_chain_prefix_only() {
        let a = step_key("x", &[0.2, 0.1]);
        assert_eq!(a, step_key("x", &[0.2, 0.1]));
        assert_ne!(a, step_key("x", &[0.3, 0.1]));
        assert_ne!(a, step_key("y", &[0.2, 0.1]));
    }
}
