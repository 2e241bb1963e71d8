//! Flat `key = value` run configuration with `[section]` headers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::bistability::CollectiveMode;
use crate::medium::{derive_groups, DimensionlessGroups, Geometry, MediumParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    Decay,
    Spectrum,
    Holstein,
    Bistability,
    Rates,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Decay => "decay",
            Scenario::Spectrum => "spectrum",
            Scenario::Holstein => "holstein",
            Scenario::Bistability => "bistability",
            Scenario::Rates => "rates",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "decay" => Scenario::Decay,
            "spectrum" => Scenario::Spectrum,
            "holstein" => Scenario::Holstein,
            "bistability" => Scenario::Bistability,
            "rates" => Scenario::Rates,
            _ => return None,
        })
    }

    fn section(self) -> &'static str {
        self.name()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const SI_KEYS: [&str; 8] = [
    "atom_density",
    "transition_wavelength",
    "rest_frequency",
    "radiative_rate",
    "nonradiative_rate",
    "doppler_width",
    "sample_length",
    "geometry",
];
const REDUCED_KEYS: [&str; 6] = ["eta", "g", "kappa", "cooperativity", "slab_parameter", "nonradiative_ratio"];
const NUMERICS_KEYS: [&str; 7] = [
    "ode_initial_step",
    "ode_max_step",
    "ode_error_tol",
    "ode_max_steps",
    "quadrature_nodes",
    "quadrature_abs_tol",
    "quadrature_rel_tol",
];

fn scenario_keys(s: Scenario) -> &'static [&'static str] {
    match s {
        Scenario::Decay => &["rho_aa0", "t_end", "samples"],
        Scenario::Spectrum => &["rho_aa0", "t_end", "samples", "spectrum_times", "spectrum_half_span", "spectrum_points"],
        Scenario::Holstein => &["half_thickness", "node_count", "write_kernel"],
        Scenario::Bistability => &["collective", "omega_min", "omega_max", "omega_points"],
        Scenario::Rates => &["rho_aa", "detuning_min", "detuning_max", "detuning_points", "light_shift"],
    }
}

/// Raw `section.key → value` table, in file order of first appearance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return err(format!("line {}: malformed section header", n + 1));
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", n + 1));
            };
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return err(format!("line {}: duplicate key {key}", n + 1));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => err(format!("{key}: not a finite number: {v}")),
            },
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key).map(|v| v.parse::<usize>().map_err(|_| ConfigError(format!("{key}: not a count: {v}")))).transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some("true" | "1" | "yes") => Ok(Some(true)),
            Some("false" | "0" | "no") => Ok(Some(false)),
            Some(v) => err(format!("{key}: not a boolean: {v}")),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| ConfigError(format!("{key}: bad list entry {s:?}"))))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsOverrides {
    pub ode_initial_step: f64,
    pub ode_max_step: f64,
    pub ode_error_tol: f64,
    pub ode_max_steps: usize,
    pub quadrature_nodes: usize,
    pub quadrature_abs_tol: f64,
    pub quadrature_rel_tol: f64,
}

impl Default for NumericsOverrides {
    fn default() -> Self {
        let ode = crate::numerics::OdeControl::default();
        let q = crate::numerics::QuadratureSpec::default();
        Self {
            ode_initial_step: ode.initial_step,
            ode_max_step: ode.max_step,
            ode_error_tol: ode.error_tol,
            ode_max_steps: ode.max_steps,
            quadrature_nodes: q.node_count,
            quadrature_abs_tol: q.absolute_tol,
            quadrature_rel_tol: q.relative_tol,
        }
    }
}

impl NumericsOverrides {
    pub fn ode(&self) -> crate::numerics::OdeControl {
        crate::numerics::OdeControl {
            initial_step: self.ode_initial_step,
            max_step: self.ode_max_step,
            error_tol: self.ode_error_tol,
            max_steps: self.ode_max_steps,
        }
    }

    pub fn quadrature(&self) -> crate::numerics::QuadratureSpec {
        crate::numerics::QuadratureSpec {
            node_count: self.quadrature_nodes,
            absolute_tol: self.quadrature_abs_tol,
            relative_tol: self.quadrature_rel_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    Decay { rho_aa0: f64, t_end: f64, samples: usize },
    Spectrum { rho_aa0: f64, t_end: f64, samples: usize, spectrum_times: Vec<f64>, half_span: f64, points: usize },
    Holstein { kappa: f64, half_thickness: f64, node_count: usize, write_kernel: bool },
    Bistability {
        cooperativity: f64,
        slab_parameter: f64,
        nonradiative_ratio: f64,
        collective: CollectiveMode,
        omega_min: f64,
        omega_max: f64,
        omega_points: usize,
    },
    Rates { rho_aa: f64, detuning_min: f64, detuning_max: f64, detuning_points: usize, light_shift: bool },
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub groups: Option<DimensionlessGroups>,
    pub params: ScenarioParams,
    pub numerics: NumericsOverrides,
    pub output_dir: PathBuf,
    /// Always true: no random input anywhere.
    pub deterministic: bool,
}

const CONSISTENCY_TOL: f64 = 1e-9;

fn check_consistent(name: &str, given: Option<f64>, derived: Option<f64>) -> Result<(), ConfigError> {
    if let (Some(a), Some(b)) = (given, derived) {
        if (a - b).abs() > CONSISTENCY_TOL * a.abs().max(b.abs()) {
            return err(format!("{name} = {a} inconsistent with value {b} derived from the SI medium parameters"));
        }
    }
    Ok(())
}

fn require_key<T>(v: Option<T>, key: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("missing required key: {key}")))
}

impl RunConfig {
    /// Resolves a raw table for `scenario`. A `scenario` key in the file, if
    /// present, must agree.
    pub fn resolve(raw: &RawConfig, scenario: Option<Scenario>) -> Result<Self, ConfigError> {
        let file_scenario = match raw.get("scenario") {
            Some(s) => Some(Scenario::from_name(s).ok_or_else(|| ConfigError(format!("unknown scenario: {s}")))?),
            None => None,
        };
        let scenario = match (scenario, file_scenario) {
            (Some(a), Some(b)) if a != b => return err(format!("scenario {} on the command line but {} in the file", a.name(), b.name())),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return err("missing required key: scenario"),
        };

        let sec = scenario.section();
        for key in raw.entries.keys() {
            let ok = match key.split_once('.') {
                None => key == "scenario",
                Some(("medium", k)) => SI_KEYS.contains(&k) || REDUCED_KEYS.contains(&k),
                Some(("numerics", k)) => NUMERICS_KEYS.contains(&k),
                Some(("output", k)) => k == "dir",
                Some((s, k)) => s == sec && scenario_keys(scenario).contains(&k),
            };
            if !ok {
                return err(format!("unknown key: {key}"));
            }
        }

        let m = |k: &str| format!("medium.{k}");
        let s = |k: &str| format!("{sec}.{k}");

        // SI block: all-or-nothing
        let si_present: Vec<&str> = SI_KEYS.iter().copied().filter(|k| raw.get(&m(k)).is_some()).collect();
        let si = if si_present.is_empty() {
            None
        } else {
            let need = |k: &str| -> Result<f64, ConfigError> {
                if k == "nonradiative_rate" {
                    return Ok(raw.f64(&m(k))?.unwrap_or(0.0));
                }
                require_key(raw.f64(&m(k))?, &m(k))
            };
            let geometry = match raw.get(&m("geometry")) {
                None => Geometry::CylinderOnAxis,
                Some(g) => Geometry::from_name(g).ok_or_else(|| ConfigError(format!("unknown geometry: {g}")))?,
            };
            let p = MediumParameters {
                atom_density: need("atom_density")?,
                transition_wavelength: need("transition_wavelength")?,
                rest_frequency: need("rest_frequency")?,
                radiative_rate: need("radiative_rate")?,
                nonradiative_rate: need("nonradiative_rate")?,
                doppler_width: need("doppler_width")?,
                sample_length: need("sample_length")?,
                geometry,
            };
            let groups = derive_groups(&p).map_err(|e| ConfigError(e.to_string()))?;
            Some((p, groups))
        };

        let eta = raw.f64(&m("eta"))?;
        let g = raw.f64(&m("g"))?;
        let kappa = raw.f64(&m("kappa"))?;
        let coop = raw.f64(&m("cooperativity"))?;
        let slab = raw.f64(&m("slab_parameter"))?;
        let gs = raw.f64(&m("nonradiative_ratio"))?;
        if let Some((p, groups)) = &si {
            check_consistent("eta", eta, Some(groups.eta))?;
            check_consistent("g", g, Some(groups.g))?;
            check_consistent("kappa", kappa, Some(groups.kappa))?;
            check_consistent("cooperativity", coop, groups.cooperativity)?;
            check_consistent("slab_parameter", slab, groups.slab_parameter)?;
            check_consistent("nonradiative_ratio", gs, Some(p.nonradiative_ratio()))?;
        }
        let opacity_groups = || -> Result<DimensionlessGroups, ConfigError> {
            if let Some((_, groups)) = &si {
                return Ok(*groups);
            }
            let eta = require_key(eta, &m("eta"))?;
            let g = require_key(g, &m("g"))?;
            check_consistent("kappa", kappa, Some(eta * g))?;
            DimensionlessGroups::from_opacity(eta, g).map_err(|e| ConfigError(e.to_string()))
        };

        let (groups, params) = match scenario {
            Scenario::Decay | Scenario::Spectrum => {
                let groups = opacity_groups()?;
                let rho_aa0 = require_key(raw.f64(&s("rho_aa0"))?, &s("rho_aa0"))?;
                let t_end = require_key(raw.f64(&s("t_end"))?, &s("t_end"))?;
                let samples = raw.usize(&s("samples"))?.unwrap_or(201);
                if !(0.0..=1.0).contains(&rho_aa0) {
                    return err(format!("{}: must lie in [0, 1]", s("rho_aa0")));
                }
                if t_end <= 0.0 || samples < 2 {
                    return err("t_end must be > 0 and samples >= 2");
                }
                let params = if scenario == Scenario::Decay {
                    ScenarioParams::Decay { rho_aa0, t_end, samples }
                } else {
                    let spectrum_times = require_key(raw.list(&s("spectrum_times"))?, &s("spectrum_times"))?;
                    if spectrum_times.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
                        return err("spectrum_times must lie in [0, t_end]");
                    }
                    let half_span = raw.f64(&s("spectrum_half_span"))?.unwrap_or(4.0);
                    let points = raw.usize(&s("spectrum_points"))?.unwrap_or(161);
                    if half_span <= 0.0 || points < 3 {
                        return err("spectrum_half_span must be > 0 and spectrum_points >= 3");
                    }
                    ScenarioParams::Spectrum { rho_aa0, t_end, samples, spectrum_times, half_span, points }
                };
                (Some(groups), params)
            }
            Scenario::Holstein => {
                let kappa = match (&si, kappa, eta, g) {
                    (Some((_, gr)), _, _, _) => gr.kappa,
                    (None, Some(k), _, _) => {
                        if let (Some(e), Some(gg)) = (eta, g) {
                            check_consistent("kappa", Some(k), Some(e * gg))?;
                        }
                        k
                    }
                    (None, None, Some(e), Some(gg)) => e * gg,
                    _ => return err(format!("missing required key: {}", m("kappa"))),
                };
                if kappa < 0.0 {
                    return err("kappa must be >= 0");
                }
                let half_thickness = raw.f64(&s("half_thickness"))?.unwrap_or(1.0);
                let node_count = raw.usize(&s("node_count"))?.unwrap_or(200);
                let write_kernel = raw.bool(&s("write_kernel"))?.unwrap_or(false);
                (si.as_ref().map(|x| x.1), ScenarioParams::Holstein { kappa, half_thickness, node_count, write_kernel })
            }
            Scenario::Bistability => {
                let collective = match raw.get(&s("collective")) {
                    None => CollectiveMode::Off,
                    Some(c) => CollectiveMode::from_name(c).ok_or_else(|| ConfigError(format!("unknown collective mode: {c}")))?,
                };
                let from_si = si.as_ref().map(|(p, gr)| (gr.cooperativity.unwrap(), gr.slab_parameter.unwrap(), p.nonradiative_ratio()));
                let cooperativity = match from_si {
                    Some(x) => x.0,
                    None => require_key(coop, &m("cooperativity"))?,
                };
                let slab_parameter = match (from_si, slab) {
                    (Some(x), _) => x.1,
                    (None, Some(r)) => r,
                    (None, None) if collective == CollectiveMode::Off => 0.0,
                    _ => return err(format!("missing required key: {}", m("slab_parameter"))),
                };
                let nonradiative_ratio = from_si.map(|x| x.2).or(gs).unwrap_or(0.0);
                let omega_min = raw.f64(&s("omega_min"))?.unwrap_or(0.0);
                let omega_max = raw.f64(&s("omega_max"))?.unwrap_or(6.0);
                let omega_points = raw.usize(&s("omega_points"))?.unwrap_or(601);
                if omega_min < 0.0 || omega_max < omega_min || omega_points == 0 {
                    return err("omega grid needs 0 <= omega_min <= omega_max and omega_points >= 1");
                }
                (
                    si.as_ref().map(|x| x.1),
                    ScenarioParams::Bistability {
                        cooperativity,
                        slab_parameter,
                        nonradiative_ratio,
                        collective,
                        omega_min,
                        omega_max,
                        omega_points,
                    },
                )
            }
            Scenario::Rates => {
                let groups = opacity_groups()?;
                let rho_aa = require_key(raw.f64(&s("rho_aa"))?, &s("rho_aa"))?;
                if !(0.0..=1.0).contains(&rho_aa) {
                    return err(format!("{}: must lie in [0, 1]", s("rho_aa")));
                }
                let detuning_min = raw.f64(&s("detuning_min"))?.unwrap_or(-4.0);
                let detuning_max = raw.f64(&s("detuning_max"))?.unwrap_or(4.0);
                let detuning_points = raw.usize(&s("detuning_points"))?.unwrap_or(81);
                if detuning_max < detuning_min || detuning_points == 0 {
                    return err("detuning grid needs detuning_min <= detuning_max and detuning_points >= 1");
                }
                let light_shift = raw.bool(&s("light_shift"))?.unwrap_or(false);
                (Some(groups), ScenarioParams::Rates { rho_aa, detuning_min, detuning_max, detuning_points, light_shift })
            }
        };

        let mut numerics = NumericsOverrides::default();
        let n = |k: &str| format!("numerics.{k}");
        if let Some(v) = raw.f64(&n("ode_initial_step"))? {
            numerics.ode_initial_step = v;
        }
        if let Some(v) = raw.f64(&n("ode_max_step"))? {
            numerics.ode_max_step = v;
        }
        if let Some(v) = raw.f64(&n("ode_error_tol"))? {
            numerics.ode_error_tol = v;
        }
        if let Some(v) = raw.usize(&n("ode_max_steps"))? {
            numerics.ode_max_steps = v;
        }
        if let Some(v) = raw.usize(&n("quadrature_nodes"))? {
            numerics.quadrature_nodes = v;
        }
        if let Some(v) = raw.f64(&n("quadrature_abs_tol"))? {
            numerics.quadrature_abs_tol = v;
        }
        if let Some(v) = raw.f64(&n("quadrature_rel_tol"))? {
            numerics.quadrature_rel_tol = v;
        }
        numerics.ode().validate().map_err(|e| ConfigError(e.to_string()))?;
        numerics.quadrature().validate().map_err(|e| ConfigError(e.to_string()))?;

        let output_dir = PathBuf::from(raw.get("output.dir").unwrap_or("."));
        Ok(Self { scenario, groups, params, numerics, output_dir, deterministic: true })
    }

    /// Resolved parameters as `(key, value)` pairs for output headers.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut h: Vec<(String, String)> = vec![
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("scenario".into(), self.scenario.name().into()),
            ("deterministic".into(), self.deterministic.to_string()),
        ];
        let mut push = |k: &str, v: String| h.push((k.to_string(), v));
        if let Some(g) = &self.groups {
            push("eta", fmt_num(g.eta));
            push("g", fmt_num(g.g));
            push("kappa", fmt_num(g.kappa));
            push("doppler_width_over_gamma", fmt_num(g.doppler_width()));
            if let Some(c) = g.cooperativity {
                push("cooperativity", fmt_num(c));
            }
            if let Some(r) = g.slab_parameter {
                push("slab_parameter", fmt_num(r));
            }
        }
        match &self.params {
            ScenarioParams::Decay { rho_aa0, t_end, samples } => {
                push("rho_aa0", fmt_num(*rho_aa0));
                push("t_end", fmt_num(*t_end));
                push("samples", samples.to_string());
            }
            ScenarioParams::Spectrum { rho_aa0, t_end, samples, spectrum_times, half_span, points } => {
                push("rho_aa0", fmt_num(*rho_aa0));
                push("t_end", fmt_num(*t_end));
                push("samples", samples.to_string());
                push("spectrum_times", spectrum_times.iter().map(|t| fmt_num(*t)).collect::<Vec<_>>().join(", "));
                push("spectrum_half_span", fmt_num(*half_span));
                push("spectrum_points", points.to_string());
            }
            ScenarioParams::Holstein { kappa, half_thickness, node_count, write_kernel } => {
                push("kappa", fmt_num(*kappa));
                push("half_thickness", fmt_num(*half_thickness));
                push("node_count", node_count.to_string());
                push("write_kernel", write_kernel.to_string());
            }
            ScenarioParams::Bistability {
                cooperativity,
                slab_parameter,
                nonradiative_ratio,
                collective,
                omega_min,
                omega_max,
                omega_points,
            } => {
                push("cooperativity", fmt_num(*cooperativity));
                push("slab_parameter", fmt_num(*slab_parameter));
                push("nonradiative_ratio", fmt_num(*nonradiative_ratio));
                push("collective", collective.name().into());
                push("omega_min", fmt_num(*omega_min));
                push("omega_max", fmt_num(*omega_max));
                push("omega_points", omega_points.to_string());
            }
            ScenarioParams::Rates { rho_aa, detuning_min, detuning_max, detuning_points, light_shift } => {
                push("rho_aa", fmt_num(*rho_aa));
                push("detuning_min_over_doppler", fmt_num(*detuning_min));
                push("detuning_max_over_doppler", fmt_num(*detuning_max));
                push("detuning_points", detuning_points.to_string());
                push("light_shift", light_shift.to_string());
            }
        }
        let n = &self.numerics;
        push("ode_initial_step", fmt_num(n.ode_initial_step));
        push("ode_max_step", fmt_num(n.ode_max_step));
        push("ode_error_tol", fmt_num(n.ode_error_tol));
        push("ode_max_steps", n.ode_max_steps.to_string());
        push("quadrature_nodes", n.quadrature_nodes.to_string());
        push("quadrature_abs_tol", fmt_num(n.quadrature_abs_tol));
        push("quadrature_rel_tol", fmt_num(n.quadrature_rel_tol));
        // later duplicates (scenario block) win over group values
        let mut seen = std::collections::HashSet::new();
        let mut out: Vec<(String, String)> = h.into_iter().rev().filter(|(k, _)| seen.insert(k.clone())).collect();
        out.reverse();
        out
    }
}

/// 12 significant digits, scientific notation; `nan` for missing values.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.11e}")
    }
}
