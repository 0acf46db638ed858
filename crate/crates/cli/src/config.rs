//! Scenario configuration: TOML schema, override handling and validation.
//!
//! The exact grammar is documented in `FORMAT.md` at the repository root.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use polariton_core::model::AtomCavityParams;

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Full,
    Bh,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Per-site occupation cutoff of the full-model basis.
    #[serde(default = "default_full_cutoff")]
    pub full_cutoff: u32,
}

fn default_full_cutoff() -> u32 {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub num_sites: usize,
    #[serde(default)]
    pub periodic: bool,
    /// Optional explicit edge list (1-based site pairs); overrides the
    /// default nearest-neighbour chain/ring.
    #[serde(default)]
    pub edges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveSection {
    pub kappa: f64,
    pub j_hop: f64,
    #[serde(default)]
    pub chem_pot: f64,
    /// Optional polariton decay rate for the jump channel.
    #[serde(default)]
    pub gamma_pol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleParam {
    OmegaL,
    Kappa,
    JHop,
    ChemPot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Linear,
    LogLinear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub param: ScheduleParam,
    pub kind: ScheduleKind,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub v_start: f64,
    pub v_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateKind {
    SiteOccupations,
    UnitFilling,
    WState,
    GroundState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    pub kind: InitialStateKind,
    /// 1-based site → particle count, for `site_occupations`.
    #[serde(default)]
    pub occupations: Option<BTreeMap<String, u32>>,
    /// Total particle number, for `w_state` / `ground_state`.
    #[serde(default)]
    pub particles: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_final: f64,
    pub output_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpsSection {
    pub enabled: bool,
}

impl Default for JumpsSection {
    fn default() -> Self {
        Self { enabled: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    N,
    DeltaN,
    OGs,
    OW,
    DecayProb,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// Integrator knobs; the defaults match the library defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_krylov_dim() -> usize {
    30
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self { krylov_dim: default_krylov_dim(), tol: default_tol() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub lattice: LatticeSection,
    #[serde(default)]
    pub atom_cavity: Option<AtomCavityParams>,
    #[serde(default)]
    pub atom_cavity_per_site: Option<Vec<AtomCavityParams>>,
    #[serde(default)]
    pub effective: Option<EffectiveSection>,
    #[serde(default, rename = "schedule")]
    pub schedules: Vec<ScheduleSection>,
    pub initial_state: InitialStateSection,
    pub time: TimeSection,
    #[serde(default)]
    pub jumps: JumpsSection,
    pub run: RunSection,
    #[serde(default)]
    pub numerics: NumericsSection,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse with `key.path=value` overrides applied to the raw document.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<(Self, String), ConfigError> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let resolved = toml::to_string_pretty(&table)
            .map_err(|e| ConfigError::Parse(format!("re-serialization failed: {e}")))?;
        let cfg = Self::parse(&resolved)?;
        Ok((cfg, resolved))
    }

    pub fn microscopic(&self) -> bool {
        self.atom_cavity.is_some() || self.atom_cavity_per_site.is_some()
    }

    /// Per-site microscopic parameters, when on the microscopic path.
    pub fn site_params(&self) -> Option<Vec<AtomCavityParams>> {
        if let Some(p) = self.atom_cavity {
            Some(vec![p; self.lattice.num_sites])
        } else {
            self.atom_cavity_per_site.clone()
        }
    }

    pub fn uniform_params(&self) -> Option<AtomCavityParams> {
        if let Some(p) = self.atom_cavity {
            return Some(p);
        }
        let list = self.atom_cavity_per_site.as_ref()?;
        let first = *list.first()?;
        list.iter().all(|p| *p == first).then_some(first)
    }

    /// 0-based occupation vector of the initial state.
    pub fn occupation_vector(&self) -> Result<Vec<u32>, ConfigError> {
        let sites = self.lattice.num_sites;
        match self.initial_state.kind {
            InitialStateKind::UnitFilling => Ok(vec![1; sites]),
            InitialStateKind::SiteOccupations => {
                let map = self.initial_state.occupations.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("site_occupations needs an `occupations` map".into())
                })?;
                let mut occ = vec![0u32; sites];
                for (key, &n) in map {
                    let site: usize = key.parse().map_err(|_| {
                        ConfigError::Invalid(format!("occupation key `{key}` is not a site index"))
                    })?;
                    if site < 1 || site > sites {
                        return Err(ConfigError::Invalid(format!(
                            "occupation site {site} out of range 1..={sites}"
                        )));
                    }
                    occ[site - 1] = n;
                }
                Ok(occ)
            }
            _ => Err(ConfigError::Invalid(
                "occupation vector undefined for this initial state kind".into(),
            )),
        }
    }

    /// Total particle number implied by the initial state.
    pub fn total_particles(&self) -> Result<u32, ConfigError> {
        match self.initial_state.kind {
            InitialStateKind::SiteOccupations | InitialStateKind::UnitFilling => {
                Ok(self.occupation_vector()?.iter().sum())
            }
            InitialStateKind::WState | InitialStateKind::GroundState => {
                self.initial_state.particles.ok_or_else(|| {
                    ConfigError::Invalid("this initial state kind needs `particles`".into())
                })
            }
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        let sites = self.lattice.num_sites;
        if sites == 0 {
            return err("lattice.num_sites must be at least 1".into());
        }
        // exactly one parameter path
        let paths = [
            self.atom_cavity.is_some(),
            self.atom_cavity_per_site.is_some(),
            self.effective.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if paths != 1 {
            return err(
                "exactly one of [atom_cavity], [[atom_cavity_per_site]] or [effective] is required"
                    .into(),
            );
        }
        if let Some(list) = &self.atom_cavity_per_site {
            if list.len() != sites {
                return err(format!(
                    "atom_cavity_per_site has {} entries for {sites} sites",
                    list.len()
                ));
            }
        }
        if matches!(self.model.kind, ModelKind::Full | ModelKind::Both) && !self.microscopic() {
            return err("full-model runs need microscopic atom-cavity parameters".into());
        }
        if let Some(edges) = &self.lattice.edges {
            for &(a, b) in edges {
                if a < 1 || a > sites || b < 1 || b > sites {
                    return err(format!("edge ({a},{b}) out of range 1..={sites}"));
                }
            }
        }
        if !(self.time.t_final > 0.0) || !self.time.t_final.is_finite() {
            return err("time.t_final must be positive".into());
        }
        if self.time.output_points == 0 {
            return err("time.output_points must be at least 1".into());
        }
        for s in &self.schedules {
            match s.param {
                ScheduleParam::OmegaL => {
                    if !self.microscopic() {
                        return err("omega_l schedule needs the microscopic path".into());
                    }
                    if self.uniform_params().is_none() {
                        return err("omega_l schedule needs uniform per-site parameters".into());
                    }
                }
                _ => {
                    if self.effective.is_none() {
                        return err(format!(
                            "{:?} schedule needs the direct effective path",
                            s.param
                        ));
                    }
                }
            }
            if !(s.t_end > s.t_start) {
                return err("schedule t_end must exceed t_start".into());
            }
        }
        // segments of one parameter must be contiguous and cover the window
        for param in
            [ScheduleParam::OmegaL, ScheduleParam::Kappa, ScheduleParam::JHop, ScheduleParam::ChemPot]
        {
            let segs: Vec<&ScheduleSection> =
                self.schedules.iter().filter(|s| s.param == param).collect();
            if segs.is_empty() {
                continue;
            }
            for pair in segs.windows(2) {
                if pair[1].t_start != pair[0].t_end {
                    return err(format!(
                        "{param:?} schedule segments are not contiguous at t = {:e}",
                        pair[0].t_end
                    ));
                }
            }
            if segs[0].t_start > 0.0 || segs[segs.len() - 1].t_end < self.time.t_final {
                return err(format!(
                    "{param:?} schedule does not cover the window [0, {:e}]",
                    self.time.t_final
                ));
            }
        }
        match self.initial_state.kind {
            InitialStateKind::SiteOccupations => {
                let occ = self.occupation_vector()?;
                if occ.iter().sum::<u32>() == 0 {
                    return err("initial state has no particles".into());
                }
            }
            InitialStateKind::WState | InitialStateKind::GroundState => {
                if self.model.kind != ModelKind::Bh {
                    return err(format!(
                        "{:?} initial state is only available for the effective model",
                        self.initial_state.kind
                    ));
                }
                if self.total_particles()? == 0 {
                    return err("initial state needs particles >= 1".into());
                }
            }
            InitialStateKind::UnitFilling => {}
        }
        for obs in &self.run.observables {
            if matches!(obs, Observable::OGs | Observable::OW) && self.model.kind != ModelKind::Bh {
                return err("o_gs and o_w observables are only available for bh runs".into());
            }
        }
        if self.numerics.krylov_dim < 2 {
            return err("numerics.krylov_dim must be at least 2".into());
        }
        if !(self.numerics.tol > 0.0) || !self.numerics.tol.is_finite() {
            return err("numerics.tol must be positive".into());
        }
        if self.run.observables.contains(&Observable::OW) {
            // the W target needs the particle number
            self.total_particles()?;
        }
        Ok(())
    }
}

/// Apply one `key.path=value` override to a TOML table.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (path, value) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::Invalid(format!("override `{spec}` is not key=value")))?;
    let parsed: toml::Value = format!("v = {value}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .or_else(|_| {
            format!("v = \"{value}\"")
                .parse::<toml::Table>()
                .map(|t| t["v"].clone())
        })
        .map_err(|e: toml::de::Error| {
            ConfigError::Invalid(format!("override value `{value}`: {e}"))
        })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    let mut cursor = table;
    for key in &keys[..keys.len() - 1] {
        cursor = cursor
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                ConfigError::Invalid(format!("override path `{path}` crosses a non-table"))
            })?;
    }
    cursor.insert(keys[keys.len() - 1].to_string(), parsed);
    Ok(())
}
