//! Experiment configuration: one JSON document with model, disorder and
//! experiment blocks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use specshift_core::disorder::SingleSiteDensity;
use specshift_core::estimators::{ModelConfig, DEFAULT_MIN_SIDE};
use specshift_core::grid::{Background, Domain, SingleSiteProfile};
use specshift_core::DEFAULT_SEED;

use crate::error::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    AssembleCheck,
    Idos,
    Dos,
    Wegner,
    ReverseWegner,
    AveragedSsf,
    SsfScaling,
    Kirsch,
    Localization,
    CombesThomas,
    BirmanSolomyak,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        Self::AssembleCheck,
        Self::Idos,
        Self::Dos,
        Self::Wegner,
        Self::ReverseWegner,
        Self::AveragedSsf,
        Self::SsfScaling,
        Self::Kirsch,
        Self::Localization,
        Self::CombesThomas,
        Self::BirmanSolomyak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::AssembleCheck => "assemble-check",
            Self::Idos => "idos",
            Self::Dos => "dos",
            Self::Wegner => "wegner",
            Self::ReverseWegner => "reverse-wegner",
            Self::AveragedSsf => "averaged-ssf",
            Self::SsfScaling => "ssf-scaling",
            Self::Kirsch => "kirsch",
            Self::Localization => "localization",
            Self::CombesThomas => "combes-thomas",
            Self::BirmanSolomyak => "birman-solomyak",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PunctureBlock {
    pub side: f64,
    #[serde(default)]
    pub center: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelBlock {
    pub dim: usize,
    /// Outer box side `L`.
    pub side: f64,
    pub spacing: f64,
    pub puncture: Option<PunctureBlock>,
    pub lambda: f64,
    pub background: Background,
    pub profile: SingleSiteProfile,
    pub localized_window: Option<(f64, f64)>,
    pub min_side: f64,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            dim: 1,
            side: 32.0,
            spacing: 0.5,
            puncture: None,
            lambda: 1.0,
            background: Background::Zero,
            profile: SingleSiteProfile::CellIndicator,
            localized_window: None,
            min_side: DEFAULT_MIN_SIDE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderBlock {
    pub density: SingleSiteDensity,
    pub seed: u64,
}

impl Default for DisorderBlock {
    fn default() -> Self {
        Self {
            density: SingleSiteDensity::Uniform01,
            seed: DEFAULT_SEED,
        }
    }
}

/// Outer side as an affine function of the puncture side: `L = slope * l + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideRule {
    pub slope: f64,
    pub offset: f64,
}

impl Default for SideRule {
    fn default() -> Self {
        Self { slope: 2.0, offset: 8.0 }
    }
}

impl SideRule {
    pub fn apply(&self, l: f64) -> f64 {
        self.slope * l + self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentBlock {
    pub samples: usize,
    pub energies: Vec<f64>,
    pub energy: Option<f64>,
    pub intervals: Vec<(f64, f64)>,
    /// Outer sides; defaults to `[model.side]`.
    pub sides: Vec<f64>,
    pub l_values: Vec<f64>,
    pub side_rule: SideRule,
    pub x0: Option<Vec<f64>>,
    pub distances: Vec<f64>,
    pub s: f64,
    pub eta: f64,
    pub eps: f64,
    pub delta: f64,
    pub quad_orders: Vec<usize>,
    /// Distance below the spectrum floor for combes-thomas.
    pub depth: f64,
    /// Optional residual tolerance for birman-solomyak at the largest order.
    pub tolerance: Option<f64>,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        Self {
            samples: 100,
            energies: Vec::new(),
            energy: None,
            intervals: Vec::new(),
            sides: Vec::new(),
            l_values: Vec::new(),
            side_rule: SideRule::default(),
            x0: None,
            distances: Vec::new(),
            s: 0.5,
            eta: 0.01,
            eps: 0.1,
            delta: 0.1,
            quad_orders: vec![32, 64, 128],
            depth: 1.0,
            tolerance: None,
        }
    }
}

/// Fully defaulted run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub disorder: DisorderBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            dim: self.model.dim,
            spacing: self.model.spacing,
            strength: self.model.lambda,
            background: self.model.background.clone(),
            profile: self.model.profile.clone(),
            density: self.disorder.density.clone(),
            seed: self.disorder.seed,
            localized_window: self.model.localized_window,
            min_side: self.model.min_side,
        }
    }

    pub fn sides(&self) -> Vec<f64> {
        if self.experiment.sides.is_empty() {
            vec![self.model.side]
        } else {
            self.experiment.sides.clone()
        }
    }

    /// Puncture centre, padded to two coordinates' worth of `dim`.
    pub fn puncture_center(&self) -> Vec<f64> {
        let mut c = self.model.puncture.as_ref().map(|p| p.center.clone()).unwrap_or_default();
        c.resize(self.model.dim, 0.0);
        c
    }

    /// Reference point for the resolvent probes.
    pub fn probe_origin(&self, side: f64) -> Vec<f64> {
        self.experiment.x0.clone().unwrap_or_else(|| {
            let mut x = vec![0.0; self.model.dim];
            x[0] = -side / 4.0;
            x
        })
    }

    /// The config without runtime-only fields; this is what gets hashed.
    pub fn hashed_view(&self) -> ExperimentConfig {
        ExperimentConfig {
            output: None,
            threads: None,
            ..self.clone()
        }
    }
}

/// Parses and validates a configuration. Hypothesis violations that are
/// not fatal for `kind` come back as warnings.
pub fn validate_config(raw: &str) -> Result<(ExperimentConfig, Vec<String>), RunError> {
    let cfg: ExperimentConfig = serde_json::from_str(raw).map_err(|e| RunError::Parse(e.to_string()))?;
    let warnings = check(&cfg)?;
    Ok((cfg, warnings))
}

/// Validates an already-parsed configuration.
pub fn check(cfg: &ExperimentConfig) -> Result<Vec<String>, RunError> {
    use ExperimentKind as K;
    let range = |msg: String| Err(RunError::Range(msg));
    let e = &cfg.experiment;
    let m = &cfg.model;
    let mut warnings = Vec::new();

    cfg.model_config().validate().map_err(|err| RunError::Range(err.to_string()))?;
    if cfg.threads == Some(0) {
        return range("threads must be at least 1".into());
    }
    if !(m.side > 0.0) || cfg.sides().iter().any(|&s| !(s > 0.0)) {
        return range("box sides must be positive".into());
    }
    if let Some(x0) = &e.x0 {
        if x0.len() != m.dim {
            return range(format!("experiment.x0 has {} coordinates, model.dim is {}", x0.len(), m.dim));
        }
    }
    if let Some(p) = &m.puncture {
        if !p.center.is_empty() && p.center.len() != m.dim {
            return range(format!("puncture center has {} coordinates, model.dim is {}", p.center.len(), m.dim));
        }
    }
    let needs_samples = matches!(
        cfg.kind,
        K::Idos | K::Dos | K::Wegner | K::ReverseWegner | K::AveragedSsf | K::SsfScaling | K::Localization
    );
    if needs_samples && cfg.experiment.samples < 2 {
        return range(format!("experiment.samples must be at least 2, got {}", e.samples));
    }
    let nonempty = |v: &[f64], name: &str| -> Result<(), RunError> {
        if v.is_empty() {
            Err(RunError::Range(format!("experiment.{name} must not be empty")))
        } else {
            Ok(())
        }
    };

    match cfg.kind {
        K::AssembleCheck => {}
        K::Idos => nonempty(&e.energies, "energies")?,
        K::Dos => {
            nonempty(&e.energies, "energies")?;
            if !(e.eps > 0.0) {
                return range(format!("experiment.eps must be positive, got {}", e.eps));
            }
        }
        K::Wegner | K::ReverseWegner => {
            if e.intervals.is_empty() {
                return range("experiment.intervals must not be empty".into());
            }
            if let Some(&(a, b)) = e.intervals.iter().find(|(a, b)| !(a < b)) {
                return range(format!("interval [{a}, {b}] is empty"));
            }
            if cfg.kind == K::ReverseWegner {
                specshift_core::estimators::check_reverse_wegner_admissible(
                    &cfg.model_config(),
                    &e.intervals,
                    &cfg.sides(),
                )
                .map_err(|err| match err {
                    specshift_core::Error::AssumptionViolated(msg) => RunError::Assumption(msg),
                    other => RunError::Range(other.to_string()),
                })?;
            }
        }
        K::AveragedSsf => {
            nonempty(&e.energies, "energies")?;
            let Some(p) = &m.puncture else {
                return range("averaged-ssf needs model.puncture".into());
            };
            for side in cfg.sides() {
                let d = Domain::new(m.dim, side, m.spacing, Some((p.side, &cfg.puncture_center())))
                    .map_err(|err| RunError::Range(err.to_string()))?;
                if !d.distance_ok() {
                    warnings.push(format!(
                        "L = {side}: distance {} between puncture and outer boundary is below 3",
                        d.boundary_distance().unwrap_or(0.0)
                    ));
                }
            }
        }
        K::SsfScaling => {
            let mut distinct = e.l_values.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() < 3 {
                return range("ssf-scaling needs at least 3 distinct l_values".into());
            }
            if e.energy.is_none() {
                return range("ssf-scaling needs experiment.energy".into());
            }
            for &l in &e.l_values {
                let side = e.side_rule.apply(l);
                let d = Domain::new(m.dim, side, m.spacing, Some((l, &vec![0.0; m.dim])))
                    .map_err(|err| RunError::Range(err.to_string()))?;
                if !d.distance_ok() {
                    warnings.push(format!("l = {l}: side rule gives L = {side}, distance below 3"));
                }
            }
        }
        K::Kirsch => {
            if m.dim != 2 {
                return range(format!("kirsch needs model.dim = 2, got {}", m.dim));
            }
            if m.puncture.is_none() {
                return range("kirsch needs model.puncture (its side is the fixed l)".into());
            }
            if e.energy.is_none() {
                return range("kirsch needs experiment.energy".into());
            }
        }
        K::Localization => {
            nonempty(&e.distances, "distances")?;
            if !(e.s > 0.0 && e.s < 1.0) {
                return range(format!("experiment.s must lie in (0, 1), got {}", e.s));
            }
            if e.eta == 0.0 || !e.eta.is_finite() {
                return range("experiment.eta must be a nonzero real".into());
            }
            if e.energy.is_none() {
                return range("localization needs experiment.energy".into());
            }
        }
        K::CombesThomas => {
            if e.distances.len() < 3 {
                return range("combes-thomas needs at least 3 distances".into());
            }
            if e.energy.is_none() && !(e.depth > 0.0) {
                return range(format!("experiment.depth must be positive, got {}", e.depth));
            }
        }
        K::BirmanSolomyak => {
            if !(e.delta > 0.0 && e.delta < 0.25) {
                return Err(RunError::Core(specshift_core::Error::InvalidDelta(e.delta)));
            }
            if !(e.eps > 0.0) {
                return range(format!("experiment.eps must be positive, got {}", e.eps));
            }
            if e.quad_orders.is_empty() || e.quad_orders.contains(&0) {
                return range("experiment.quad_orders must be nonempty and positive".into());
            }
            if e.energy.is_none() {
                return range("birman-solomyak needs experiment.energy".into());
            }
        }
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_defaulted() {
        let (cfg, w) = validate_config(r#"{"kind": "idos", "experiment": {"energies": [0.5]}}"#).unwrap();
        assert!(w.is_empty());
        assert_eq!(cfg.model.dim, 1);
        assert_eq!(cfg.experiment.samples, 100);
        assert_eq!(cfg.disorder.seed, DEFAULT_SEED);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(validate_config("{"), Err(RunError::Parse(_))));
        assert!(matches!(validate_config(r#"{"kind": "nope"}"#), Err(RunError::Parse(_))));
        assert!(matches!(validate_config(r#"{"kind": "idos", "bogus": 1}"#), Err(RunError::Parse(_))));
    }

    #[test]
    fn reverse_wegner_needs_v1prime() {
        let raw = r#"{"kind": "reverse-wegner",
            "disorder": {"density": {"kind": "piecewise-constant", "breakpoints": [0, 0.5, 1], "values": [2, 0]}},
            "experiment": {"intervals": [[0.3, 0.7]], "sides": [32]}}"#;
        match validate_config(raw) {
            Err(RunError::Assumption(msg)) => assert!(msg.contains("V1'")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn close_puncture_is_a_warning() {
        let raw = r#"{"kind": "averaged-ssf",
            "model": {"side": 8, "puncture": {"side": 4, "center": [0]}},
            "experiment": {"energies": [1.0], "samples": 2}}"#;
        let (_, w) = validate_config(raw).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn delta_out_of_range() {
        let raw = r#"{"kind": "birman-solomyak", "experiment": {"delta": 0.3, "energy": 1.0}}"#;
        assert!(matches!(
            validate_config(raw),
            Err(RunError::Core(specshift_core::Error::InvalidDelta(d))) if d == 0.3
        ));
    }

    #[test]
    fn hashed_view_drops_runtime_fields() {
        let (cfg, _) = validate_config(r#"{"kind": "idos", "threads": 8, "output": "x", "experiment": {"energies": [0.5]}}"#).unwrap();
        let v = serde_json::to_string(&cfg.hashed_view()).unwrap();
        assert!(!v.contains("threads") && !v.contains("output"));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
    }
}
