//! Scenario runner behind the `dense-bloch` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::bistability::{linspace, self_consistent_branches, turning_points, BistabilityConfig};
use crate::config::{fmt_num, ConfigError, RawConfig, RunConfig, Scenario, ScenarioParams};
use crate::dynamics::{evolve_two_level, profile_fwhm, uniform_grid, DecayOptions};
use crate::holstein::{build_slab_kernel, escape_rate};
use crate::medium::AtomicState;
use crate::rates::collective_rates;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_MARKOV: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Physics(crate::Error),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Physics(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Physics(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Physics(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

/// Files written by a run and whether the Markov flag was raised.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub markov_violated: bool,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.markov_violated {
            EXIT_MARKOV
        } else {
            EXIT_OK
        }
    }
}

/// Loads and resolves a config file; `out` overrides `[output] dir`.
pub fn load(path: &Path, scenario: Option<Scenario>, out: Option<&Path>) -> Result<RunConfig, CliError> {
    let raw = RawConfig::load(path)?;
    let mut cfg = RunConfig::resolve(&raw, scenario)?;
    if let Some(dir) = out {
        cfg.output_dir = dir.to_path_buf();
    }
    Ok(cfg)
}

/// Human-readable schema report without running anything.
pub fn validate_report(cfg: &RunConfig) -> String {
    let mut s = String::from("configuration ok\n");
    for (k, v) in cfg.header() {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

struct Csv {
    buf: Vec<u8>,
}

impl Csv {
    fn new(cfg: &RunConfig, extra: &[(String, String)], columns: &[&str]) -> Self {
        let mut buf = Vec::new();
        for (k, v) in cfg.header().iter().chain(extra) {
            let _ = writeln!(buf, "# {k} = {v}");
        }
        let _ = writeln!(buf, "{}", columns.join(","));
        Self { buf }
    }

    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    fn save(self, dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, self.buf)?;
        files.push(path);
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let dir = cfg.output_dir.as_path();
    let mut files = Vec::new();
    let mut markov_violated = false;
    let quad = cfg.numerics.quadrature();
    match &cfg.params {
        ScenarioParams::Decay { rho_aa0, t_end, samples } => {
            let groups = cfg.groups.expect("decay needs groups");
            let opts = DecayOptions { ode: cfg.numerics.ode(), quadrature: quad, samples: *samples, ..Default::default() };
            let traj = evolve_two_level(&AtomicState::populations(*rho_aa0)?, &groups, *t_end, &opts, &[])?;
            markov_violated = traj.markov_violated;
            let extra = vec![("markov_violated".to_string(), markov_violated.to_string())];
            let mut csv = Csv::new(cfg, &extra, &["t", "rho_aa", "Gamma_over_gamma", "Gamma_eff_over_gamma"]);
            for i in 0..traj.times.len() {
                csv.row(&[fmt_num(traj.times[i]), fmt_num(traj.rho_aa[i]), fmt_num(traj.gamma_avg[i]), fmt_num(traj.gamma_eff[i])]);
            }
            csv.save(dir, "decay.csv", &mut files)?;
        }
        ScenarioParams::Spectrum { rho_aa0, t_end, samples, spectrum_times, half_span, points } => {
            let groups = cfg.groups.expect("spectrum needs groups");
            let opts = DecayOptions {
                ode: cfg.numerics.ode(),
                quadrature: quad,
                samples: *samples,
                spectrum_grid: uniform_grid(*half_span, *points),
            };
            let traj = evolve_two_level(&AtomicState::populations(*rho_aa0)?, &groups, *t_end, &opts, spectrum_times)?;
            markov_violated = traj.markov_violated;
            let extra = vec![("markov_violated".to_string(), markov_violated.to_string())];
            let mut csv = Csv::new(cfg, &extra, &["t", "rho_aa", "detuning_over_doppler", "profile"]);
            let mut widths = Csv::new(cfg, &extra, &["t", "rho_aa", "fwhm_over_doppler"]);
            for snap in &traj.spectra {
                let k = traj.times.iter().position(|&t| t == snap.time).unwrap_or(0);
                let rho = traj.rho_aa[k];
                for (x, p) in snap.detuning_over_doppler.iter().zip(&snap.profile) {
                    csv.row(&[fmt_num(snap.time), fmt_num(rho), fmt_num(*x), fmt_num(*p)]);
                }
                let w = profile_fwhm(&snap.detuning_over_doppler, &snap.profile).unwrap_or(f64::NAN);
                widths.row(&[fmt_num(snap.time), fmt_num(rho), fmt_num(w)]);
            }
            csv.save(dir, "spectrum.csv", &mut files)?;
            widths.save(dir, "spectrum_fwhm.csv", &mut files)?;
        }
        ScenarioParams::Holstein { kappa, half_thickness, node_count, write_kernel } => {
            let kernel = build_slab_kernel(*half_thickness, *kappa, *node_count)?;
            let res = escape_rate(&kernel)?;
            let mut csv = Csv::new(cfg, &[], &["gamma_esc_numeric", "gamma_esc_asymptotic"]);
            csv.row(&[fmt_num(res.gamma_esc_numeric), fmt_num(res.gamma_esc_asymptotic.unwrap_or(f64::NAN))]);
            csv.save(dir, "holstein.csv", &mut files)?;
            let mut mode = Csv::new(cfg, &[], &["z", "mode"]);
            for (z, m) in kernel.nodes.iter().zip(&res.fundamental_mode) {
                mode.row(&[fmt_num(*z), fmt_num(*m)]);
            }
            mode.save(dir, "holstein_mode.csv", &mut files)?;
            if *write_kernel {
                let path = dir.join("kernel.csv");
                let mut f = io::BufWriter::new(fs::File::create(&path)?);
                kernel.write_csv(&mut f)?;
                f.flush()?;
                files.push(path);
            }
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
            let mut bc = BistabilityConfig::new(*cooperativity, *slab_parameter, *nonradiative_ratio, *collective);
            bc.omega_grid = linspace(*omega_min, *omega_max, *omega_points);
            let pts = self_consistent_branches(&bc)?;
            let mut cols = vec!["Omega_over_gamma", "branch_id", "rho_aa", "stable"];
            let with_gamma = *collective != crate::bistability::CollectiveMode::Off;
            if with_gamma {
                cols.push("Gamma_over_gamma");
            }
            let mut csv = Csv::new(cfg, &[], &cols);
            for p in &pts {
                let mut row = vec![fmt_num(p.omega), p.branch_id.to_string(), fmt_num(p.rho_aa), p.stable.to_string()];
                if with_gamma {
                    row.push(fmt_num(p.gamma));
                }
                csv.row(&row);
            }
            csv.save(dir, "bistability.csv", &mut files)?;
            let mut turns = Csv::new(cfg, &[], &["Omega_over_gamma", "rho_aa", "Gamma_over_gamma", "kind"]);
            for t in turning_points(&bc)? {
                turns.row(&[fmt_num(t.omega), fmt_num(t.rho_aa), fmt_num(t.gamma), t.kind.to_string()]);
            }
            turns.save(dir, "turning_points.csv", &mut files)?;
        }
        ScenarioParams::Rates { rho_aa, detuning_min, detuning_max, detuning_points, light_shift } => {
            let groups = cfg.groups.expect("rates needs groups");
            let state = AtomicState::populations(*rho_aa)?;
            let mut cols = vec!["detuning_over_doppler", "Gamma_spectral_over_gamma", "Gamma_avg_over_gamma"];
            if *light_shift {
                cols.push("H_over_gamma");
            }
            let mut csv = Csv::new(cfg, &[], &cols);
            for x in linspace(*detuning_min, *detuning_max, *detuning_points) {
                let r = collective_rates(&state, x * groups.doppler_width(), &groups, &quad, *light_shift)?;
                let mut row = vec![fmt_num(x), fmt_num(r.gamma_spectral), fmt_num(r.gamma_avg)];
                if let Some(h) = r.shift {
                    row.push(fmt_num(h));
                }
                csv.row(&row);
            }
            csv.save(dir, "rates.csv", &mut files)?;
        }
    }
    Ok(RunReport { files, markov_violated })
}

/// Caps the global thread pool from `DENSE_BLOCH_THREADS` (0 or unset: auto).
pub fn configure_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("DENSE_BLOCH_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| ConfigError(format!("DENSE_BLOCH_THREADS: not a count: {v}")))?;
    if n > 0 {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
