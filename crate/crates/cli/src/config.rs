//! Experiment configuration: one TOML file drives every subcommand.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use witten_lab::ricciflow::FlowFamily;
use witten_lab::{build_manifold, Error as CoreError, ManifoldConfig, WeightedManifold};

/// A configuration problem, tied to the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

pub fn bad(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Curvature,
    Bochner,
    Mass,
    LiYau,
    Hamilton,
    Integrated,
    SupBound,
    KernelDt,
    Entropy,
    Flow,
}

impl CheckName {
    pub const ALL: [CheckName; 10] = [
        CheckName::Curvature,
        CheckName::Bochner,
        CheckName::Mass,
        CheckName::LiYau,
        CheckName::Hamilton,
        CheckName::Integrated,
        CheckName::SupBound,
        CheckName::KernelDt,
        CheckName::Entropy,
        CheckName::Flow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Curvature => "curvature",
            CheckName::Bochner => "bochner",
            CheckName::Mass => "mass",
            CheckName::LiYau => "li_yau",
            CheckName::Hamilton => "hamilton",
            CheckName::Integrated => "integrated",
            CheckName::SupBound => "sup_bound",
            CheckName::KernelDt => "kernel_dt",
            CheckName::Entropy => "entropy",
            CheckName::Flow => "flow",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = CheckName::ALL.iter().map(|c| c.as_str()).collect();
                format!("unknown check `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Heat kernel from `source` started at `t0`.
    Kernel,
    /// Smooth bump at `t = 0`.
    #[default]
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMode {
    Explicit,
    /// `max(0, −min Ric_{m,n})` of the static model.
    #[default]
    Admissible,
    /// Static models: same as `admissible`. Flows: smallest `K` that keeps
    /// the super Ricci flow margin non-negative.
    Fitted,
}

fn default_kappa() -> f64 {
    8.0
}

fn default_times() -> Vec<f64> {
    vec![0.05, 0.1, 0.5, 1.0, 2.0]
}

fn default_error_target() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub initial: InitialKind,
    /// Source node as grid indices `[ix]` or `[ix, iy]`.
    #[serde(default)]
    pub source: Vec<i64>,
    /// Kernel start time; defaults to the squared grid spacing.
    pub t0: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_error_target")]
    pub error_target: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            initial: InitialKind::default(),
            source: Vec::new(),
            t0: None,
            kappa: default_kappa(),
            times: default_times(),
            error_target: default_error_target(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    pub select: Vec<CheckName>,
}

fn default_rel_tol() -> f64 {
    witten_lab::harnack::DEFAULT_REL_TOL
}

fn default_pairs() -> Vec<[f64; 2]> {
    vec![[0.05, 0.2], [0.1, 0.5]]
}

fn default_sample_nodes() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackConfig {
    /// Dimension parameters; defaults to `n + 1`.
    #[serde(default)]
    pub m: Vec<f64>,
    #[serde(default)]
    pub k_mode: KMode,
    /// Curvature bound, read only with `k_mode = "explicit"`.
    pub k: Option<f64>,
    /// Tolerance relative to each inequality's constant term.
    #[serde(default = "default_rel_tol")]
    pub tol: f64,
    /// Absolute tolerance; replaces `tol` when set.
    pub abs_tol: Option<f64>,
    /// `(τ, T)` pairs for the integrated inequality.
    #[serde(default = "default_pairs")]
    pub pairs: Vec<[f64; 2]>,
    #[serde(default = "default_sample_nodes")]
    pub sample_nodes: usize,
}

impl Default for HarnackConfig {
    fn default() -> Self {
        Self {
            m: Vec::new(),
            k_mode: KMode::default(),
            k: None,
            tol: default_rel_tol(),
            abs_tol: None,
            pairs: default_pairs(),
            sample_nodes: default_sample_nodes(),
        }
    }
}

fn default_fd_step() -> f64 {
    1e-3
}

fn default_substeps() -> usize {
    20
}

fn default_residual_tol() -> f64 {
    1e-3
}

fn default_dh_tol() -> f64 {
    1e-4
}

fn default_slack() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    /// Defaults to `harnack.m`.
    pub m: Option<Vec<f64>>,
    /// Defaults to `solver.times`.
    pub probes: Option<Vec<f64>>,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// `|dW_numeric − formula| ≤ residual_tol·(1 + |formula|)`.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_dh_tol")]
    pub dh_tol: f64,
    #[serde(default = "default_residual_tol")]
    pub d2h_tol: f64,
    /// Monotonicity slack relative to `1 + |bound|`.
    #[serde(default = "default_slack")]
    pub slack: f64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            m: None,
            probes: None,
            fd_step: default_fd_step(),
            substeps: default_substeps(),
            residual_tol: default_residual_tol(),
            dh_tol: default_dh_tol(),
            d2h_tol: default_residual_tol(),
            slack: default_slack(),
        }
    }
}

fn default_flow_k_mode() -> KMode {
    KMode::Fitted
}

fn default_margin_samples() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub lambda: FlowFamily,
    pub horizon: f64,
    pub m: f64,
    #[serde(default = "default_flow_k_mode")]
    pub k_mode: KMode,
    pub k: Option<f64>,
    #[serde(default = "default_margin_samples")]
    pub margin_samples: usize,
    /// Defaults to the solver times inside the horizon.
    pub probes: Option<Vec<f64>>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("witten-lab-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub checks: ChecksConfig,
    #[serde(default)]
    pub harnack: HarnackConfig,
    #[serde(default)]
    pub entropy: EntropyConfig,
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let reason = e.message().to_string();
            let key = e
                .span()
                .and_then(|s| text.get(..s.start))
                .map(key_path_before)
                .unwrap_or_default();
            bad(if key.is_empty() { "<root>".to_string() } else { key }, reason)
        })
    }
}

/// Best-effort dotted key for a parse error: the innermost table header
/// plus the key on the offending line.
fn key_path_before(before: &str) -> String {
    let mut table = String::new();
    for line in before.lines() {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    let last = before.rsplit('\n').next().unwrap_or("");
    let key = last.split('=').next().unwrap_or("").trim();
    match (table.is_empty(), key.is_empty() || key.starts_with('[')) {
        (_, true) => table,
        (true, false) => key.to_string(),
        (false, false) => format!("{table}.{key}"),
    }
}

fn finite_positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be finite and positive, got {v}")))
    }
}

fn ascending(key: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(bad(key, "times must be strictly ascending"));
    }
    Ok(())
}

fn check_k(key: &str, mode: KMode, k: Option<f64>) -> Result<(), ConfigError> {
    match (mode, k) {
        (KMode::Explicit, None) => Err(bad(key, "k_mode = \"explicit\" needs a value for k")),
        (KMode::Explicit, Some(k)) if !(k.is_finite() && k >= 0.0) => {
            Err(bad(key, format!("curvature bound K must be finite and non-negative, got {k}")))
        }
        (KMode::Explicit, Some(_)) => Ok(()),
        (_, Some(_)) => Err(bad(key, "k is only read with k_mode = \"explicit\"")),
        (_, None) => Ok(()),
    }
}

fn check_m(key: &str, m: f64, n: usize) -> Result<(), ConfigError> {
    if m.is_finite() && m >= n as f64 {
        Ok(())
    } else {
        Err(bad(key, format!("dimension parameter must be finite and at least n = {n}, got {m}")))
    }
}

fn core_to_config(e: CoreError) -> ConfigError {
    match e {
        CoreError::InvalidParameter { name, reason } => bad(format!("manifold.{name}"), reason),
        CoreError::InvalidGrid(reason) => bad("manifold.grid", reason),
        CoreError::LengthMismatch { .. } => bad("manifold.potential.samples", e.to_string()),
        other => bad("manifold", other.to_string()),
    }
}

/// A checked configuration together with its manifold.
#[derive(Debug, Clone)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub manifold: WeightedManifold,
    pub source: usize,
    pub harnack_m: Vec<f64>,
    pub entropy_m: Vec<f64>,
}

impl ExperimentConfig {
    /// Validates against `selected` checks on the grid refined by
    /// `grid_scale`.
    pub fn validate(&self, selected: &[CheckName], grid_scale: usize) -> Result<Validated, ConfigError> {
        if selected.is_empty() {
            return Err(bad("checks.select", "at least one check must be selected"));
        }
        if grid_scale == 0 {
            return Err(bad("--grid-scale", "refinement multiplier must be at least 1"));
        }
        let manifold = build_manifold(&self.manifold.refined(grid_scale)).map_err(core_to_config)?;
        let n = manifold.dim();

        let s = &self.solver;
        let source = match s.source.as_slice() {
            [] => 0,
            [ix] if n == 1 => manifold.node(*ix * grid_scale as i64, 0),
            [ix, iy] if n == 2 => manifold.node(*ix * grid_scale as i64, *iy * grid_scale as i64),
            _ => return Err(bad("solver.source", format!("expected {n} grid indices"))),
        };
        finite_positive("solver.error_target", s.error_target)?;
        if s.times.is_empty() {
            return Err(bad("solver.times", "need at least one snapshot time"));
        }
        ascending("solver.times", &s.times)?;
        let start = match s.initial {
            InitialKind::Kernel => {
                if let Some(t0) = s.t0 {
                    finite_positive("solver.t0", t0)?;
                }
                s.t0.unwrap_or_else(|| witten_lab::heatflow::default_t0(&manifold))
            }
            InitialKind::Bump => {
                if s.t0.is_some() {
                    return Err(bad("solver.t0", "t0 is only read with initial = \"kernel\""));
                }
                if !(s.kappa.is_finite() && s.kappa >= 0.0) {
                    return Err(bad("solver.kappa", "concentration must be finite and non-negative"));
                }
                0.0
            }
        };
        if s.times[0] <= start {
            return Err(bad("solver.times", format!("snapshot times must exceed the start time {start}")));
        }

        let h = &self.harnack;
        let harnack_m = if h.m.is_empty() { vec![n as f64 + 1.0] } else { h.m.clone() };
        for &m in &harnack_m {
            check_m("harnack.m", m, n)?;
        }
        check_k("harnack.k", h.k_mode, h.k)?;
        finite_positive("harnack.tol", h.tol)?;
        if let Some(t) = h.abs_tol {
            finite_positive("harnack.abs_tol", t)?;
        }
        if selected.contains(&CheckName::Integrated) {
            if h.sample_nodes == 0 {
                return Err(bad("harnack.sample_nodes", "need at least one node"));
            }
            for &[tau, big_t] in &h.pairs {
                if !(tau > start && tau < big_t && big_t.is_finite()) {
                    return Err(bad(
                        "harnack.pairs",
                        format!("need start < τ < T, got τ = {tau}, T = {big_t}"),
                    ));
                }
            }
        }
        if selected.contains(&CheckName::KernelDt) && s.initial != InitialKind::Kernel {
            return Err(bad("solver.initial", "the kernel_dt check needs initial = \"kernel\""));
        }

        let e = &self.entropy;
        let entropy_m = e.m.clone().unwrap_or_else(|| harnack_m.clone());
        for &m in &entropy_m {
            check_m("entropy.m", m, n)?;
        }
        finite_positive("entropy.fd_step", e.fd_step)?;
        for (key, v) in [
            ("entropy.residual_tol", e.residual_tol),
            ("entropy.dh_tol", e.dh_tol),
            ("entropy.d2h_tol", e.d2h_tol),
        ] {
            finite_positive(key, v)?;
        }
        if !(e.slack.is_finite() && e.slack >= 0.0) {
            return Err(bad("entropy.slack", "slack must be finite and non-negative"));
        }
        if e.substeps == 0 {
            return Err(bad("entropy.substeps", "need at least one substep"));
        }
        if let Some(p) = &e.probes {
            ascending("entropy.probes", p)?;
        }
        if selected.contains(&CheckName::Entropy) {
            let probes = e.probes.as_deref().unwrap_or(&s.times);
            if probes.is_empty() || probes[0] - e.fd_step <= start {
                return Err(bad("entropy.probes", "every probe must exceed the start time by fd_step"));
            }
        }

        if selected.contains(&CheckName::Flow) {
            let f = self
                .flow
                .as_ref()
                .ok_or_else(|| bad("flow", "the flow check needs a [flow] table"))?;
            finite_positive("flow.horizon", f.horizon)?;
            check_m("flow.m", f.m, n)?;
            check_k("flow.k", f.k_mode, f.k)?;
            if f.margin_samples == 0 {
                return Err(bad("flow.margin_samples", "need at least one sample"));
            }
            if let Some(p) = &f.probes {
                ascending("flow.probes", p)?;
                if p.iter().any(|&t| t + e.fd_step > f.horizon || t - e.fd_step <= start) {
                    return Err(bad("flow.probes", "probes must sit fd_step inside (start, horizon)"));
                }
            }
        }

        Ok(Validated {
            config: self.clone(),
            manifold,
            source,
            harnack_m,
            entropy_m,
        })
    }
}
