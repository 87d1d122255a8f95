use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channels::{alpha_upper, beta_upper, epsilon_lower_two_bubble};
use crate::error::{Error, Result};
use crate::grid::{make_grid, RadialGrid};
use crate::model::{NonlinearitySpec, PotentialSpec, ProfileForm, ScalingProfile};
use crate::spectral::SolitonTarget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Linear,
    Mixture,
    Nonlinear,
    /// `V ≡ 0` control: everything should end up in the free channel.
    FreeChannel,
    /// Only tunes the well depth; `run` reports the calibration.
    Calibration,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioKind::Linear => "linear",
            ScenarioKind::Mixture => "mixture",
            ScenarioKind::Nonlinear => "nonlinear",
            ScenarioKind::FreeChannel => "free-channel",
            ScenarioKind::Calibration => "calibration",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    pub dim: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Seeds the probe dictionary; nothing else is random.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub epsilon: f64,
    #[serde(default)]
    pub form: ProfileForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// `e^{-iD ln g(t₀)} ψ_b`.
    DilatedBoundState,
    /// `ψ_d + e^{-iD ln g(t₀)} ψ_b`.
    DefectPlusDilatedBoundState,
    /// `ψ_s + e^{-iD ln g(t₀)} ψ_b`.
    SolitonPlusDilatedBoundState,
    /// An RSSL file on the run grid.
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub recipe: Recipe,
    #[serde(default)]
    pub soliton: Option<SolitonTarget>,
    #[serde(default)]
    pub snapshot: Option<PathBuf>,
}

/// `t0 = "auto"` or a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T0Rule {
    Auto,
    Fixed(f64),
}

impl Serialize for T0Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            T0Rule::Auto => s.serialize_str("auto"),
            T0Rule::Fixed(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for T0Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Ok(T0Rule::Fixed(t)),
            Raw::Int(t) => Ok(T0Rule::Fixed(t as f64)),
            Raw::Word(w) if w == "auto" => Ok(T0Rule::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("t0 must be \"auto\" or a number, got {w:?}"))),
        }
    }
}

fn default_t0_cap() -> f64 {
    1024.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t0: T0Rule,
    #[serde(default = "default_t0_cap")]
    pub t0_cap: f64,
    pub dt: f64,
    pub t_end: f64,
}

fn default_ratio() -> f64 {
    2f64.powf(0.125)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserveSection {
    /// Observation times form the ladder `t₀ rᵏ`, capped by `t_end`.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Times at which RSSL snapshots are written (rounded to the nearest observation).
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Frame-equation residual checks at every `k`-th observation; 0 disables.
    #[serde(default)]
    pub frame_every: usize,
}

impl Default for ObserveSection {
    fn default() -> Self {
        ObserveSection {
            ratio: default_ratio(),
            snapshots: Vec::new(),
            frame_every: 0,
        }
    }
}

fn default_alpha() -> f64 {
    0.2
}

fn default_beta() -> f64 {
    0.1
}

fn default_masses() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Radii `M` for the local-mass columns.
    #[serde(default = "default_masses")]
    pub local_mass_radii: Vec<f64>,
    #[serde(default)]
    pub probe: bool,
    /// Shell placement radius for the probe dictionary.
    #[serde(default)]
    pub dictionary_extent: Option<f64>,
    #[serde(default)]
    pub probe_ds: Option<f64>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            alpha: default_alpha(),
            beta: default_beta(),
            local_mass_radii: default_masses(),
            probe: false,
            dictionary_extent: None,
            probe_ds: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    /// Desired eigenvalue; when absent the depth is centred in the one-state range.
    #[serde(default)]
    pub target_eigenvalue: Option<f64>,
}

/// A complete experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub grid: GridSection,
    pub profile: ProfileSection,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub well: Option<PotentialSpec>,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearitySection>,
    pub initial: InitialSection,
    pub time: TimeSection,
    #[serde(default)]
    pub observe: ObserveSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    /// Directory the config was read from; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn name(&self) -> String {
        self.scenario.name.clone().unwrap_or_else(|| self.scenario.kind.to_string())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        make_grid(self.scenario.dim, self.grid.r_max, self.grid.n)
    }

    pub fn profile(&self) -> Result<ScalingProfile> {
        ScalingProfile::with_form(self.profile.epsilon, self.profile.form)
    }

    pub fn nonlinearity(&self) -> Result<Option<NonlinearitySpec>> {
        self.nonlinearity.map(|n| NonlinearitySpec::new(n.strength)).transpose()
    }
}

/// Every broken clause of [`validate`], one line each.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Violations(pub Vec<String>);

impl Violations {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }
}

/// Checks scenario/dimension compatibility, parameter windows and the inputs
/// each recipe needs. Window violations are fatal unless `override_windows`.
pub fn validate(cfg: &ScenarioConfig, override_windows: bool) -> Result<()> {
    let mut v = Violations::default();
    let mut windows = Violations::default();
    let n = cfg.scenario.dim;
    let eps = cfg.profile.epsilon;
    let kind = cfg.scenario.kind;
    if n < 3 {
        v.push(format!("dimension {n} is below 3"));
    }
    if let Err(e) = cfg.grid() {
        v.push(e.to_string());
    }
    if !(eps > 0.0 && eps < 1.0) {
        v.push(format!("epsilon {eps} is outside (0, 1)"));
    } else if eps >= 0.5 {
        windows.push(format!("epsilon {eps} is outside the decay window (0, 1/2)"));
    }
    match kind {
        ScenarioKind::Mixture | ScenarioKind::Nonlinear => {
            if n < 5 {
                v.push(format!("{kind} scenarios need n >= 5, got n = {n}"));
            }
            let lo = epsilon_lower_two_bubble(n);
            if !(eps > lo && eps < 0.5) {
                windows.push(format!("{kind} scenarios need epsilon in ({lo}, 1/2) (two-bubble window), got {eps}"));
            }
        }
        _ => {}
    }
    let needs_v = !matches!(kind, ScenarioKind::FreeChannel);
    match (&cfg.potential, needs_v) {
        (None, true) => v.push(format!("{kind} scenario needs a [potential] block")),
        (Some(p), _) => {
            if let Err(e) = p.validate() {
                v.push(format!("potential: {e}"));
            }
        }
        _ => {}
    }
    match (kind, &cfg.well) {
        (ScenarioKind::Mixture, None) => v.push("mixture scenario needs a [well] block"),
        (ScenarioKind::Mixture, Some(w)) => {
            if let Err(e) = w.validate() {
                v.push(format!("well: {e}"));
            }
        }
        (_, Some(_)) => v.push(format!("a [well] block only belongs to mixture scenarios, not {kind}")),
        _ => {}
    }
    match (kind, cfg.nonlinearity) {
        (ScenarioKind::Nonlinear, None) => v.push("nonlinear scenario needs a [nonlinearity] block"),
        (ScenarioKind::Nonlinear, Some(nl)) if !(nl.strength > 0.0 && nl.strength.is_finite()) => {
            v.push(format!("nonlinearity strength must be positive, got {}", nl.strength))
        }
        (ScenarioKind::Nonlinear, _) => {}
        (_, Some(_)) => v.push(format!("a [nonlinearity] block only belongs to nonlinear scenarios, not {kind}")),
        _ => {}
    }
    let recipe = cfg.initial.recipe;
    let expected = match kind {
        ScenarioKind::Mixture => Some(Recipe::DefectPlusDilatedBoundState),
        ScenarioKind::Nonlinear => Some(Recipe::SolitonPlusDilatedBoundState),
        ScenarioKind::Linear => Some(Recipe::DilatedBoundState),
        _ => None,
    };
    if recipe == Recipe::Snapshot {
        match &cfg.initial.snapshot {
            None => v.push("snapshot recipe needs initial.snapshot"),
            Some(p) if !cfg.resolve(p).exists() => v.push(format!("snapshot {} does not exist", cfg.resolve(p).display())),
            _ => {}
        }
    } else if let Some(e) = expected {
        if recipe != e {
            v.push(format!("{kind} scenarios start from {e:?}, not {recipe:?}"));
        }
    } else if kind == ScenarioKind::FreeChannel && recipe != Recipe::DilatedBoundState {
        v.push("free-channel scenarios start from a dilated bound state or a snapshot");
    }
    if recipe == Recipe::DilatedBoundState && kind == ScenarioKind::FreeChannel && cfg.potential.is_none() {
        v.push("free-channel with a dilated bound state still needs [potential] to build ψ_b");
    }
    if recipe == Recipe::SolitonPlusDilatedBoundState {
        match cfg.initial.soliton {
            None => v.push("soliton recipe needs initial.soliton (energy or mass target)"),
            Some(SolitonTarget::Energy(e)) if !(e < 0.0) => v.push(format!("soliton energy must be negative, got {e}")),
            Some(SolitonTarget::Mass(m)) if !(m > 0.0) => v.push(format!("soliton mass must be positive, got {m}")),
            _ => {}
        }
    }
    let t = &cfg.time;
    if !(t.dt > 0.0 && t.dt.is_finite()) {
        v.push(format!("dt must be positive, got {}", t.dt));
    }
    match t.t0 {
        T0Rule::Fixed(t0) if !(t0 > 0.0) => v.push(format!("t0 must be positive, got {t0}")),
        T0Rule::Fixed(t0) if !(t.t_end > t0) => v.push(format!("t_end {} must exceed t0 {t0}", t.t_end)),
        T0Rule::Auto if !(t.t0_cap > 0.0) => v.push(format!("t0_cap must be positive, got {}", t.t0_cap)),
        _ => {}
    }
    if !(cfg.observe.ratio > 1.0) {
        v.push(format!("observation ratio must exceed 1, got {}", cfg.observe.ratio));
    }
    let d = &cfg.diagnostics;
    let (a_hi, b_hi) = (alpha_upper(n), beta_upper(n, eps));
    if !(d.alpha > 0.0 && d.alpha < a_hi) {
        windows.push(format!("alpha {} is outside the free-channel window (0, {a_hi:.4})", d.alpha));
    }
    if !(d.beta > 0.0 && d.beta < b_hi) {
        windows.push(format!("beta {} is outside the weak-localization window (0, {b_hi:.4})", d.beta));
    }
    if d.local_mass_radii.iter().any(|m| !(*m > 0.0)) {
        v.push("local-mass radii must be positive");
    }
    if !override_windows {
        v.0.extend(windows.0);
    } else {
        for w in &windows.0 {
            log::warn!("overridden: {w}");
        }
    }
    if v.0.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(v.0.join("; ")))
    }
}
