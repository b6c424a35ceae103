//! Command-line driver: TOML run configuration, subcommand orchestration and
//! CSV/JSON emission.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::branches::{build_branch_set, BranchEnsemble, BranchGrid, BranchSpec};
use crate::current::{charge_from_alpha, FINE_STRUCTURE};
use crate::error::{Error, Result};
use crate::fock::verify_pair;
use crate::kinematics::build_cms_event;
use crate::radiation::{
    kmin_scan, log_slope, CutoffWindow, PhotonQuadrature, QuadratureResolution, RadiationModel,
};
use crate::restoration::{
    cap_fraction, restoration_extrapolate, restoration_mc_with, ScatterLaw, WeakTable,
};
use crate::weak::{differential_rate, fermi_coupling, helicity_asymmetry, rate_anisotropy, HelicityConfig};

#[derive(Debug, Parser)]
#[command(name = "irdeco", version, about = "Soft-photon decoherence in electron-neutrino scattering")]
pub struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed; overrides `mc.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Photon energy spectrum and IR-logarithm scan of N̄.
    Spectrum,
    /// Branch overlaps, phase differences and the phase-coefficient table.
    Overlap,
    /// Reduced density matrix of the branch ensemble versus k_min.
    DecoherenceScan,
    /// Truncated-Fock oracle against the closed-form overlaps.
    FockVerify,
    /// Weak differential rates and helicity ratios.
    WeakXsec,
    /// Restoration Monte Carlo and its ε → 0 extrapolation.
    RestorationMc,
    /// Every subcommand in order.
    All,
}

impl Command {
    pub const SEQUENCE: [Command; 6] = [
        Command::Spectrum,
        Command::Overlap,
        Command::DecoherenceScan,
        Command::FockVerify,
        Command::WeakXsec,
        Command::RestorationMc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Overlap => "overlap",
            Command::DecoherenceScan => "decoherence-scan",
            Command::FockVerify => "fock-verify",
            Command::WeakXsec => "weak-xsec",
            Command::RestorationMc => "restoration-mc",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicsConfig {
    /// c.m.s. energy in units of `m_e`.
    pub sqrt_s: f64,
    pub theta: f64,
    pub phi: f64,
    pub m_e: f64,
    pub m_nu: f64,
    pub branch_polar_nodes: usize,
    pub branch_azimuth_nodes: usize,
    /// Polar angles of the partner branches in the overlap scan.
    pub partner_thetas: Vec<f64>,
    /// Opening angles and polar angles of the phase-coefficient table.
    pub opening_angles: Vec<f64>,
    pub table_polar_angles: Vec<f64>,
    /// c.m.s. energies of the helicity-ratio table.
    pub sqrt_s_scan: Vec<f64>,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self {
            sqrt_s: 10.0,
            theta: FRAC_PI_2,
            phi: 0.0,
            m_e: 1.0,
            m_nu: 0.0,
            branch_polar_nodes: BranchGrid::default().polar_nodes,
            branch_azimuth_nodes: BranchGrid::default().azimuth_nodes,
            partner_thetas: vec![0.25, 0.5, 1.0, 2.0, 3.0],
            opening_angles: vec![0.5, 1.0],
            table_polar_angles: vec![0.4, 0.9, 1.4],
            sqrt_s_scan: vec![2.5, 5.0, 10.0, 20.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Photon energy window in units of `m_e`.
    pub k_min: f64,
    pub k_max: f64,
    /// Largest k_min of the scans; scans run down to `k_min`.
    pub scan_start: f64,
    pub scan_points_per_decade: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            k_min: 1e-8,
            k_max: 1e-1,
            scan_start: 1e-3,
            scan_points_per_decade: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub alpha: f64,
    /// Dimensionless Fermi coupling `G_F m_e²`.
    pub coupling: f64,
    /// `|M₀|²` of the unscattered branch.
    pub m0_weight: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            alpha: FINE_STRUCTURE,
            coupling: fermi_coupling(),
            m0_weight: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub modes: usize,
    pub n_tr: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub partner_theta: f64,
    pub partner_phi: f64,
    /// Quadrature whose cells become the oracle's modes.
    pub quadrature: QuadratureResolution,
    /// Charge multipliers; values above 1 push `|α|²` to order one.
    pub charge_scales: Vec<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            modes: 4,
            n_tr: 40,
            k_min: 1e-3,
            k_max: 1e-1,
            partner_theta: 1.0,
            partner_phi: 0.7,
            quadrature: QuadratureResolution {
                energy_nodes_per_decade: 1,
                polar_nodes: 8,
                azimuth_nodes: 8,
            },
            charge_scales: vec![1.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McLaw {
    Isotropic,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub epsilons: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub law: McLaw,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
            samples: 1_000_000,
            seed: 20_240_917,
            law: McLaw::Isotropic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub manifest: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            manifest: "manifest.json".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kinematics: KinematicsConfig,
    pub window: WindowConfig,
    pub quadrature: QuadratureResolution,
    pub physics: PhysicsConfig,
    pub oracle: OracleConfig,
    pub mc: McConfig,
    pub output: OutputConfig,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks every numeric constraint of the downstream modules.
    pub fn validate(&self) -> Result<()> {
        let k = &self.kinematics;
        build_cms_event(k.sqrt_s, k.theta, k.phi, k.m_e, k.m_nu).map_err(|e| Error::Config(format!("kinematics: {e}")))?;
        if k.branch_polar_nodes == 0 || k.branch_azimuth_nodes == 0 {
            return config_err("kinematics: branch grid must be non-empty");
        }
        for &t in &k.partner_thetas {
            if !(0.0..=std::f64::consts::PI).contains(&t) {
                return config_err(format!("kinematics.partner_thetas: {t} outside [0, π]"));
            }
        }
        for &rs in &k.sqrt_s_scan {
            build_cms_event(rs, FRAC_PI_2, 0.0, k.m_e, k.m_nu)
                .map_err(|e| Error::Config(format!("kinematics.sqrt_s_scan: {e}")))?;
        }
        let w = &self.window;
        CutoffWindow::new(w.k_min, w.k_max).map_err(|e| Error::Config(format!("window: {e}")))?;
        if !(w.scan_start > w.k_min && w.scan_start < w.k_max) {
            return config_err("window.scan_start must lie strictly inside (k_min, k_max)");
        }
        if w.scan_points_per_decade == 0 {
            return config_err("window.scan_points_per_decade must be positive");
        }
        self.quadrature.validate().map_err(|e| Error::Config(format!("quadrature: {e}")))?;
        let p = &self.physics;
        if !(p.alpha > 0.0) || !(p.coupling > 0.0) {
            return config_err("physics: alpha and coupling must be positive");
        }
        if !(0.0..1.0).contains(&p.m0_weight) {
            return config_err(format!("physics.m0_weight: {} outside [0, 1)", p.m0_weight));
        }
        let o = &self.oracle;
        if o.modes == 0 || o.modes > 4 {
            return config_err("oracle.modes must lie in 1..=4");
        }
        if o.n_tr < 2 || o.n_tr > 40 {
            return config_err("oracle.n_tr must lie in 2..=40");
        }
        CutoffWindow::new(o.k_min, o.k_max).map_err(|e| Error::Config(format!("oracle: {e}")))?;
        o.quadrature.validate().map_err(|e| Error::Config(format!("oracle.quadrature: {e}")))?;
        if o.charge_scales.iter().any(|s| !(*s > 0.0)) {
            return config_err("oracle.charge_scales must be positive");
        }
        let mc = &self.mc;
        if mc.samples < crate::restoration::MIN_SAMPLES {
            return config_err(format!("mc.samples must be at least {}", crate::restoration::MIN_SAMPLES));
        }
        if mc.epsilons.iter().any(|e| !(*e > 0.0 && *e <= std::f64::consts::PI)) {
            return config_err("mc.epsilons must lie in (0, π]");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON rendering of the resolved configuration.
    /// SHA-256 of every input that affects results; the output section is left out.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).unwrap_or_default();
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let text = value.to_string();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn model(&self) -> Result<RadiationModel> {
        Ok(RadiationModel::new(
            PhotonQuadrature::new(self.quadrature)?,
            charge_from_alpha(self.physics.alpha),
        ))
    }

    fn window(&self) -> Result<CutoffWindow> {
        CutoffWindow::new(self.window.k_min, self.window.k_max)
    }

    fn scan(&self) -> Vec<f64> {
        kmin_scan(self.window.scan_start, self.window.k_min, self.window.scan_points_per_decade)
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Result of one subcommand: written files plus manifest entries.
#[derive(Debug, Default)]
struct Section {
    files: Vec<String>,
    results: BTreeMap<String, Value>,
    warnings: Vec<String>,
}

/// Executes subcommands against one resolved configuration.
pub struct Runner {
    config: RunConfig,
    out_dir: PathBuf,
    hash: String,
    verbose: bool,
}

impl Runner {
    pub fn new(config: RunConfig, out_dir: PathBuf, verbose: bool) -> Result<Self> {
        config.validate()?;
        fs::create_dir_all(&out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
        let hash = config.hash();
        Ok(Self {
            config,
            out_dir,
            hash,
            verbose,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("[irdeco] {msg}");
        }
    }

    fn write_csv(&self, section: &mut Section, name: &str, units: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.out_dir.join(name);
        let mut buf = Vec::new();
        buf.extend_from_slice(format!("# irdeco {}\n# config_sha256: {}\n# units: {units}\n", env!("CARGO_PKG_VERSION"), self.hash).as_bytes());
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
            for r in rows {
                w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        fs::write(&path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        section.files.push(name.to_string());
        self.log(&format!("wrote {}", path.display()));
        Ok(())
    }

    /// Runs `command` (every subcommand for `All`) and writes the manifest.
    pub fn run(&self, command: Command) -> Result<Value> {
        let commands: Vec<Command> = if command == Command::All {
            Command::SEQUENCE.to_vec()
        } else {
            vec![command]
        };
        let mut sections = serde_json::Map::new();
        let mut warnings = Vec::new();
        for c in commands {
            self.log(&format!("running {}", c.name()));
            let start = Instant::now();
            let section = self
                .run_one(c)
                .map_err(|e| with_context(e, c.name()))?;
            warnings.extend(section.warnings.iter().map(|w| format!("{}: {w}", c.name())));
            sections.insert(
                c.name().into(),
                json!({
                    "files": section.files,
                    "results": section.results,
                    "seconds": start.elapsed().as_secs_f64(),
                }),
            );
        }
        let manifest = json!({
            "program": "irdeco",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command.name(),
            "config_sha256": self.hash,
            "config": self.config,
            "threads": rayon::current_num_threads(),
            "warnings": warnings,
            "subcommands": sections,
        });
        let path = self.out_dir.join(&self.config.output.manifest);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }

    fn run_one(&self, command: Command) -> Result<Section> {
        match command {
            Command::Spectrum => self.spectrum(),
            Command::Overlap => self.overlap(),
            Command::DecoherenceScan => self.decoherence_scan(),
            Command::FockVerify => self.fock_verify(),
            Command::WeakXsec => self.weak_xsec(),
            Command::RestorationMc => self.restoration(),
            Command::All => unreachable!("expanded by run"),
        }
    }

    fn spectrum(&self) -> Result<Section> {
        let mut s = Section::default();
        let cfg = &self.config;
        let k = &cfg.kinematics;
        let model = cfg.model()?;
        let event = build_cms_event(k.sqrt_s, k.theta, k.phi, k.m_e, k.m_nu)?;
        let window = cfg.window()?;
        let report = model.report(&event, &window)?;
        let rows: Vec<_> = report
            .spectrum
            .iter()
            .map(|b| vec![fmt(b.k_lo), fmt(b.k_hi), fmt(b.photons)])
            .collect();
        self.write_csv(&mut s, "spectrum.csv", "k in m_e; photons dimensionless", &["k_lo", "k_hi", "photons"], &rows)?;

        let profile = model.profile(&event)?;
        let mut scan = Vec::new();
        let mut rows = Vec::new();
        for k_min in cfg.scan() {
            let w = CutoffWindow::new(k_min, window.k_max)?;
            let v = model.profile_v(&profile, &w);
            scan.push((k_min, 2.0 * v));
            rows.push(vec![fmt(k_min), fmt(v), fmt(2.0 * v), fmt((-v).exp())]);
        }
        self.write_csv(
            &mut s,
            "ir_scan.csv",
            "k_min in m_e; V, n_bar, vacuum_persistence dimensionless",
            &["k_min", "v", "n_bar", "vacuum_persistence"],
            &rows,
        )?;
        let fit = if scan.len() >= 3 && report.n_bar > 0.0 { Some(log_slope(&scan)?) } else { None };
        s.results.insert("n_bar".into(), json!(report.n_bar));
        s.results.insert("n_bar_direct".into(), json!(report.n_bar_direct));
        s.results.insert("vacuum_persistence".into(), json!(report.vacuum_persistence));
        s.results.insert("radiated_energy".into(), json!(report.radiated_energy));
        s.results.insert("brf_ratio".into(), json!(report.brf_ratio));
        if let Some(f) = fit {
            s.results.insert("log_slope".into(), json!(f.slope));
            s.results.insert("log_r_squared".into(), json!(f.r_squared));
        }
        if report.brf_warning {
            s.warnings.push(format!("BRF ratio {} exceeds {}", report.brf_ratio, crate::radiation::BRF_WARNING_RATIO));
        }
        Ok(s)
    }

    fn overlap(&self) -> Result<Section> {
        let mut s = Section::default();
        let cfg = &self.config;
        let k = &cfg.kinematics;
        let model = cfg.model()?;
        let k_max = cfg.window.k_max;
        let el = build_cms_event(k.sqrt_s, k.theta, k.phi, k.m_e, k.m_nu)?;
        let pl = model.profile(&el)?;
        let mut rows = Vec::new();
        for &tm in &k.partner_thetas {
            let em = build_cms_event(k.sqrt_s, tm, k.phi, k.m_e, k.m_nu)?;
            let pm = model.profile(&em)?;
            for k_min in cfg.scan() {
                let w = CutoffWindow::new(k_min, k_max)?;
                let ov = model.profile_overlap(&pl, &pm, &w)?;
                let d = model.profile_distance(&pl, &pm, &w);
                let delta = model.profile_v(&pl, &w) - model.profile_v(&pm, &w);
                rows.push(vec![fmt(tm), fmt(k_min), fmt(d), fmt(ov.norm()), fmt(ov.arg()), fmt(delta)]);
            }
        }
        self.write_csv(
            &mut s,
            "overlap.csv",
            "angles in rad; k_min in m_e; distance, modulus, delta dimensionless; phase in rad",
            &["theta_m", "k_min", "distance", "overlap_modulus", "overlap_phase", "delta"],
            &rows,
        )?;

        let verdict = model.opening_angle_test(k.sqrt_s, (k.m_e, k.m_nu), &k.opening_angles, &k.table_polar_angles, 1e-3)?;
        let rows: Vec<_> = verdict
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt(r.theta_l),
                    fmt(r.phi_l),
                    fmt(r.theta_m),
                    fmt(r.phi_m),
                    fmt(r.opening_angle),
                    fmt(r.coefficient),
                ]
            })
            .collect();
        self.write_csv(
            &mut s,
            "phase_coefficients.csv",
            "angles in rad; coefficient of ln(1/k_min) in delta_lm",
            &["theta_l", "phi_l", "theta_m", "phi_m", "opening_angle", "coefficient"],
            &rows,
        )?;
        s.results.insert("opening_angle_only".into(), json!(verdict.opening_angle_only));
        s.results.insert("max_spread".into(), json!(verdict.max_spread));
        s.results.insert("coefficient_scale".into(), json!(verdict.scale));
        Ok(s)
    }

    fn ensemble(&self) -> Result<(RadiationModel, BranchEnsemble)> {
        let cfg = &self.config;
        let k = &cfg.kinematics;
        let model = cfg.model()?;
        let branches = build_branch_set(&BranchSpec {
            sqrt_s: k.sqrt_s,
            m_e: k.m_e,
            m_nu: k.m_nu,
            grid: BranchGrid {
                polar_nodes: k.branch_polar_nodes,
                azimuth_nodes: k.branch_azimuth_nodes,
            },
            m0_weight: cfg.physics.m0_weight,
            coupling: cfg.physics.coupling,
            helicities: HelicityConfig::ALL_LEFT,
        })?;
        let ensemble = BranchEnsemble::new(&model, branches)?;
        Ok((model, ensemble))
    }

    fn decoherence_scan(&self) -> Result<Section> {
        let mut s = Section::default();
        let cfg = &self.config;
        let (model, ens) = self.ensemble()?;
        let k_mins = cfg.scan();
        let scan = ens.decoherence_scan(&model, cfg.window.k_max, &k_mins)?;
        let rows: Vec<_> = scan
            .iter()
            .map(|r| {
                vec![
                    fmt(r.k_min),
                    fmt(r.purity),
                    fmt(r.max_off_diagonal),
                    r.argmax.0.to_string(),
                    r.argmax.1.to_string(),
                    fmt(r.min_eigenvalue),
                    fmt(r.interference_bound),
                    fmt(r.trace),
                ]
            })
            .collect();
        self.write_csv(
            &mut s,
            "decoherence.csv",
            "k_min in m_e; all other columns dimensionless; l, m are branch labels",
            &["k_min", "purity", "max_off_diagonal", "l", "m", "min_eigenvalue", "interference_bound", "trace"],
            &rows,
        )?;
        let mut rows = Vec::new();
        for &k_min in &k_mins {
            let rho = ens.reduced_density(&model, &CutoffWindow::new(k_min, cfg.window.k_max)?);
            for (i, e) in rho.eigenvalues().iter().enumerate() {
                rows.push(vec![fmt(k_min), i.to_string(), fmt(*e)]);
            }
        }
        self.write_csv(&mut s, "eigenvalues.csv", "k_min in m_e; eigenvalues ascending", &["k_min", "index", "eigenvalue"], &rows)?;
        s.results.insert("branches".into(), json!(ens.len()));
        s.results.insert("decohered_purity".into(), json!(ens.decohered_purity()));
        if let Some(last) = scan.last() {
            s.results.insert("final_purity".into(), json!(last.purity));
        }
        Ok(s)
    }

    fn fock_verify(&self) -> Result<Section> {
        let mut s = Section::default();
        let cfg = &self.config;
        let k = &cfg.kinematics;
        let o = &cfg.oracle;
        let el = build_cms_event(k.sqrt_s, k.theta, k.phi, k.m_e, k.m_nu)?;
        let em = build_cms_event(k.sqrt_s, o.partner_theta, o.partner_phi, k.m_e, k.m_nu)?;
        let window = CutoffWindow::new(o.k_min, o.k_max)?;
        let mut rows = Vec::new();
        let mut worst = 0.0_f64;
        for &scale in &o.charge_scales {
            let model = RadiationModel::new(PhotonQuadrature::new(o.quadrature)?, scale * charge_from_alpha(cfg.physics.alpha));
            for m in 1..=o.modes {
                let v = verify_pair(&model, &el, &em, &window, m, o.n_tr)?;
                worst = worst.max(v.overlap_error).max(v.dense_error);
                rows.push(vec![
                    fmt(scale),
                    m.to_string(),
                    o.n_tr.to_string(),
                    fmt(v.number_l),
                    fmt(v.number_m),
                    fmt(v.oracle.re),
                    fmt(v.oracle.im),
                    fmt(v.dense.re),
                    fmt(v.dense.im),
                    fmt(v.analytic.re),
                    fmt(v.analytic.im),
                    fmt(v.overlap_error),
                    fmt(v.dense_error),
                    fmt(v.poisson_error),
                    fmt(v.norm_error),
                    fmt(v.bogoliubov_residual),
                    fmt(v.leakage),
                ]);
            }
        }
        self.write_csv(
            &mut s,
            "fock_verify.csv",
            "all columns dimensionless; charge_scale multiplies e",
            &[
                "charge_scale",
                "modes",
                "n_tr",
                "number_l",
                "number_m",
                "oracle_re",
                "oracle_im",
                "dense_re",
                "dense_im",
                "analytic_re",
                "analytic_im",
                "overlap_error",
                "dense_error",
                "poisson_error",
                "norm_error",
                "bogoliubov_residual",
                "leakage",
            ],
            &rows,
        )?;
        s.results.insert("max_overlap_error".into(), json!(worst));
        Ok(s)
    }

    fn weak_xsec(&self) -> Result<Section> {
        let mut s = Section::default();
        let cfg = &self.config;
        let k = &cfg.kinematics;
        let g = cfg.physics.coupling;
        let thetas: Vec<f64> = (0..=32).map(|i| std::f64::consts::PI * i as f64 / 32.0).collect();
        let mut rows = Vec::new();
        for &t in &thetas {
            let massive = differential_rate(&build_cms_event(k.sqrt_s, t, 0.0, k.m_e, k.m_nu)?, g)?;
            let massless = differential_rate(&build_cms_event(k.sqrt_s, t, 0.0, 0.0, 0.0)?, g)?;
            rows.push(vec![fmt(t), fmt(massive), fmt(massless)]);
        }
        self.write_csv(
            &mut s,
            "weak_angular.csv",
            "theta in rad; rates in m_e^-2 per sr",
            &["theta", "rate", "rate_massless"],
            &rows,
        )?;
        let mut rows = Vec::new();
        for &rs in &k.sqrt_s_scan {
            let massive = helicity_asymmetry(&build_cms_event(rs, FRAC_PI_2, 0.0, k.m_e, k.m_nu)?, g)?;
            let massless = helicity_asymmetry(&build_cms_event(rs, FRAC_PI_2, 0.0, 0.0, 0.0)?, g)?;
            rows.push(vec![fmt(rs), fmt(massive), fmt(massless)]);
        }
        self.write_csv(
            &mut s,
            "helicity.csv",
            "sqrt_s in m_e; ratios dimensionless",
            &["sqrt_s", "sigma_r_over_sigma_l", "sigma_r_over_sigma_l_massless"],
            &rows,
        )?;
        s.results.insert("massless_anisotropy".into(), json!(rate_anisotropy(k.sqrt_s, 0.0, 0.0, g, &thetas)?));
        s.results.insert("anisotropy".into(), json!(rate_anisotropy(k.sqrt_s, k.m_e, k.m_nu, g, &thetas)?));
        Ok(s)
    }

    fn restoration(&self) -> Result<Section> {
        let mut s = Section::default();
        let cfg = &self.config;
        let k = &cfg.kinematics;
        let mc = &cfg.mc;
        let law = match mc.law {
            McLaw::Isotropic => ScatterLaw::Isotropic,
            McLaw::Weak => ScatterLaw::Weak(WeakTable::new(k.sqrt_s, k.m_e, k.m_nu, cfg.physics.coupling)?),
        };
        let runs = mc
            .epsilons
            .iter()
            .map(|&e| restoration_mc_with(&law, k.sqrt_s, e, mc.samples, mc.seed))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<_> = runs
            .iter()
            .map(|r| {
                vec![
                    fmt(r.epsilon),
                    r.n.to_string(),
                    r.accepted.to_string(),
                    fmt(r.p_hat),
                    fmt(r.sigma),
                    r.seed.to_string(),
                    fmt(cap_fraction(r.epsilon)),
                ]
            })
            .collect();
        self.write_csv(
            &mut s,
            "restoration.csv",
            "epsilon in rad; probabilities dimensionless",
            &["epsilon", "n", "accepted", "p_hat", "sigma", "seed", "cap_fraction"],
            &rows,
        )?;
        match restoration_extrapolate(&runs) {
            Ok(fit) => {
                s.results.insert("fit".into(), json!(fit));
            }
            Err(e) => s.warnings.push(format!("extrapolation skipped: {e}")),
        }
        Ok(s)
    }
}

fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
        Error::Contract(m) => Error::Contract(format!("{ctx}: {m}")),
        Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
        Error::Io(m) => Error::Io(format!("{ctx}: {m}")),
        t @ Error::Truncation { .. } => t,
    }
}

/// Resolves configuration and flags, then runs the subcommand on a pool
/// of the requested size.
pub fn execute(cli: &Cli) -> Result<Value> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.mc.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return config_err("--threads must be positive");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let out_dir = config.output.dir.clone();
    let runner = Runner::new(config, out_dir, cli.verbose)?;
    pool.install(|| runner.run(cli.command))
}
