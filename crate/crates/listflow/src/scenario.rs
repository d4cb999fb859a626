//! Scenario configuration: named initial-data presets plus per-job settings,
//! deserialized from strict JSON.
//!
//! Every field has a default, so `{}` is a valid config (flat torus, unit
//! profiles). Unknown fields and unknown preset parameters are usage errors;
//! silent typos in a config would otherwise change what gets verified.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::flow::{self, FlowState, RescalePolicy};
use crate::grid::{DilatonProfile, MetricProfile, TorusGrid};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub init: InitConfig,
    pub flow: FlowConfig,
    pub spectral: SpectralConfig,
    pub entropy: EntropyConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 256,
            lx: 2.0 * PI,
            ly: 0.5 * PI,
        }
    }
}

/// Named initial-data family. Parameters come through `params`; only
/// `from_file` reads profiles from disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Flat,
    BumpA,
    BumpB,
    Winding,
    DilatonBump,
    FromFile,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub preset: Preset,
    pub params: BTreeMap<String, f64>,
    pub file: Option<String>,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            preset: Preset::Flat,
            params: BTreeMap::new(),
            file: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyConfig {
    Zero,
    AverageS,
    Constant,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub alpha: f64,
    pub policy: PolicyConfig,
    /// Used only when `policy` is `constant`.
    pub r_const: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Absent means: use the stability bound of the initial state.
    pub dt: Option<f64>,
    pub stride: usize,
    /// Safety factor σ in the step bound σ h² min(a²)/4.
    pub safety: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            alpha: 2.0,
            policy: PolicyConfig::Zero,
            r_const: 0.0,
            t_final: 1.0,
            dt: None,
            stride: 1,
            safety: flow::STABILITY_SAFETY,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub c2: f64,
    pub c0: f64,
    pub m_max: u32,
    pub count: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            c2: 1.0,
            c0: 0.0,
            m_max: 3,
            count: 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalConfig {
    GroundState,
    FromFile,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyConfig {
    pub k: f64,
    pub tau0: f64,
    pub terminal: TerminalConfig,
    /// Terminal profile source when `terminal` is `from_file`: CSV with
    /// columns x,f.
    pub file: Option<String>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            k: 1.0,
            tau0: 1.0,
            terminal: TerminalConfig::GroundState,
            file: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Absent means the full applicable set; an explicit empty list runs
    /// nothing.
    pub checks: Option<Vec<String>>,
    pub tolerances: BTreeMap<String, f64>,
    pub refine: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

/// Parse and validate a config file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

/// Parse and validate config text.
pub fn from_json(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn param(
    params: &BTreeMap<String, f64>,
    key: &str,
    default: f64,
) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_param_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Usage(format!(
                "init.params: unknown key \"{key}\" (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

/// Integer-valued wave number passed as a float parameter.
fn wave_number(params: &BTreeMap<String, f64>, default: f64) -> Result<f64> {
    let k = param(params, "k", default);
    if !(k >= 1.0) || (k - k.round()).abs() > 1e-9 {
        return Err(Error::Usage(format!(
            "init.params.k: wave number must be a positive integer, got {k}"
        )));
    }
    Ok(k.round())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.flow.t_final >= 0.0) {
            return Err(Error::Usage(format!(
                "flow.T must be nonnegative, got {}",
                self.flow.t_final
            )));
        }
        if let Some(dt) = self.flow.dt {
            if !(dt > 0.0) {
                return Err(Error::Usage(format!("flow.dt must be positive, got {dt}")));
            }
        }
        if self.flow.stride == 0 {
            return Err(Error::Usage("flow.stride must be at least 1".into()));
        }
        if !(self.flow.safety > 0.0 && self.flow.safety <= flow::STABILITY_SAFETY_MAX) {
            return Err(Error::Usage(format!(
                "flow.safety must lie in (0, {}], got {}",
                flow::STABILITY_SAFETY_MAX,
                self.flow.safety
            )));
        }
        if !(self.flow.alpha >= 0.0) {
            return Err(Error::Usage(format!(
                "flow.alpha must be nonnegative, got {}",
                self.flow.alpha
            )));
        }
        if !(self.spectral.c2 > 0.0) {
            return Err(Error::Usage(format!(
                "spectral.c2 must be positive, got {}",
                self.spectral.c2
            )));
        }
        if self.spectral.count == 0 {
            return Err(Error::Usage("spectral.count must be at least 1".into()));
        }
        if !(self.entropy.k >= 1.0) {
            return Err(Error::Usage(format!(
                "entropy.k must be at least 1, got {}",
                self.entropy.k
            )));
        }
        if !(self.entropy.tau0 > 0.0) {
            return Err(Error::Usage(format!(
                "entropy.tau0 must be positive, got {}",
                self.entropy.tau0
            )));
        }
        for (name, tol) in &self.verify.tolerances {
            if !(*tol > 0.0) {
                return Err(Error::Usage(format!(
                    "verify.tolerances.{name} must be positive, got {tol}"
                )));
            }
        }
        match self.init.preset {
            Preset::Flat => check_param_keys(&self.init.params, &[])?,
            Preset::BumpA | Preset::BumpB => {
                check_param_keys(&self.init.params, &["eps", "k"])?;
                wave_number(&self.init.params, 1.0)?;
            }
            Preset::DilatonBump => {
                check_param_keys(&self.init.params, &["eps", "k"])?;
                wave_number(&self.init.params, 1.0)?;
            }
            Preset::Winding => {
                check_param_keys(&self.init.params, &["mu", "a0"])?;
                if !(param(&self.init.params, "a0", 1.0) > 0.0) {
                    return Err(Error::Usage("init.params.a0 must be positive".into()));
                }
            }
            Preset::FromFile => {
                check_param_keys(&self.init.params, &["mu"])?;
                if self.init.file.is_none() {
                    return Err(Error::Usage(
                        "init.file is required for the from_file preset".into(),
                    ));
                }
            }
        }
        if self.entropy.terminal == TerminalConfig::FromFile && self.entropy.file.is_none() {
            return Err(Error::Usage(
                "entropy.file is required for the from_file terminal".into(),
            ));
        }
        Ok(())
    }

    pub fn policy(&self) -> RescalePolicy {
        match self.flow.policy {
            PolicyConfig::Zero => RescalePolicy::Zero,
            PolicyConfig::AverageS => RescalePolicy::AverageS,
            PolicyConfig::Constant => RescalePolicy::PrescribedConstant(self.flow.r_const),
        }
    }

    /// Configured dt if present, otherwise 0.9 of the initial stability
    /// bound. The headroom absorbs mild shrinking of min(a) along the run;
    /// the per-step bound check still aborts if the geometry collapses
    /// faster than that.
    pub fn effective_dt(&self, state0: &FlowState) -> f64 {
        self.flow.dt.unwrap_or_else(|| 0.9 * state0.stability_bound())
    }

    /// Build the t = 0 state from the preset.
    pub fn initial_state(&self) -> Result<FlowState> {
        self.validate()?;
        let grid = TorusGrid::new(self.grid.n, self.grid.lx, self.grid.ly)?;
        let n = grid.len();
        let lx = grid.lx();
        let params = &self.init.params;

        let (metric, dilaton) = match self.init.preset {
            Preset::Flat => (
                MetricProfile::new(vec![1.0; n], vec![1.0; n])?,
                DilatonProfile::constant(n),
            ),
            Preset::BumpA => {
                let eps = param(params, "eps", 0.05);
                let k = wave_number(params, 1.0)?;
                let a = grid.sample(|x| 1.0 + eps * (2.0 * PI * k * x / lx).cos());
                (
                    MetricProfile::new(a, vec![1.0; n])?,
                    DilatonProfile::constant(n),
                )
            }
            Preset::BumpB => {
                let eps = param(params, "eps", 0.05);
                let k = wave_number(params, 1.0)?;
                let b = grid.sample(|x| 1.0 + eps * (2.0 * PI * k * x / lx).cos());
                (
                    MetricProfile::new(vec![1.0; n], b)?,
                    DilatonProfile::constant(n),
                )
            }
            Preset::Winding => {
                let mu = param(params, "mu", 1.0);
                let a0 = param(params, "a0", 1.0);
                (
                    MetricProfile::new(vec![a0; n], vec![1.0; n])?,
                    DilatonProfile::new(mu, vec![0.0; n]),
                )
            }
            Preset::DilatonBump => {
                let eps = param(params, "eps", 0.05);
                let k = wave_number(params, 1.0)?;
                let p = grid.sample(|x| eps * (2.0 * PI * k * x / lx).sin());
                (
                    MetricProfile::new(vec![1.0; n], vec![1.0; n])?,
                    DilatonProfile::new(0.0, p),
                )
            }
            Preset::FromFile => {
                let path = self.init.file.as_deref().expect("validated above");
                let (a, b, p) = read_profile_csv(Path::new(path), &grid)?;
                let mu = param(params, "mu", 0.0);
                (MetricProfile::new(a, b)?, DilatonProfile::new(mu, p))
            }
        };

        FlowState::new(grid, metric, dilaton, self.flow.alpha, self.policy())?
            .with_safety(self.flow.safety)
    }
}

/// Read initial profiles from a CSV with header `x,a,b,p`. Row count must
/// match the configured grid and the x column its uniform nodes.
fn read_profile_csv(path: &Path, grid: &TorusGrid) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != "x,a,b,p" {
        return Err(Error::Usage(format!(
            "{}: expected header \"x,a,b,p\", got \"{header}\"",
            path.display()
        )));
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut p = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Usage(format!(
                "{}: row {} has {} fields, expected 4",
                path.display(),
                row + 2,
                fields.len()
            )));
        }
        let mut parsed = [0.0; 4];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field.trim().parse::<f64>().map_err(|e| {
                Error::Usage(format!("{}: row {}: {e}", path.display(), row + 2))
            })?;
        }
        let i = a.len();
        let x_expected = grid.x(i.min(grid.len().saturating_sub(1)));
        if i < grid.len() && (parsed[0] - x_expected).abs() > 1e-9 * (1.0 + grid.lx()) {
            return Err(Error::Usage(format!(
                "{}: row {}: x = {} does not match grid node {x_expected}",
                path.display(),
                row + 2,
                parsed[0]
            )));
        }
        a.push(parsed[1]);
        b.push(parsed[2]);
        p.push(parsed[3]);
    }
    if a.len() != grid.len() {
        return Err(Error::Usage(format!(
            "{}: {} rows, but the configured grid has {} points",
            path.display(),
            a.len(),
            grid.len()
        )));
    }
    Ok((a, b, p))
}

/// Read a terminal profile from a CSV with header `x,f`.
pub fn read_terminal_csv(path: &Path, grid: &TorusGrid) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != "x,f" {
        return Err(Error::Usage(format!(
            "{}: expected header \"x,f\", got \"{header}\"",
            path.display()
        )));
    }
    let mut f = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Usage(format!(
                "{}: row {} has {} fields, expected 2",
                path.display(),
                row + 2,
                fields.len()
            )));
        }
        let value = fields[1].trim().parse::<f64>().map_err(|e| {
            Error::Usage(format!("{}: row {}: {e}", path.display(), row + 2))
        })?;
        f.push(value);
    }
    if f.len() != grid.len() {
        return Err(Error::Usage(format!(
            "{}: {} rows, but the configured grid has {} points",
            path.display(),
            f.len(),
            grid.len()
        )));
    }
    Ok(f)
}
