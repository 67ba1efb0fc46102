//! JSON run descriptor. Every block has defaults, so `{}` is a valid config.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use magscat::forward::{IncidentField, PhysicsParams};
use magscat::gmres::GmresOptions;
use magscat::potentials::{Bump, ElectricPotential, MagneticPotential, PotentialDescriptor};
use magscat::reconstruct::ReconstructionConfig;
use magscat::sphere::{SphereGrid, SphereSpec};
use magscat::cgo::{ProbeKind, ProbeSpec};
use magscat::BoxGrid;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicsParams,
    pub grid: GridSpec,
    /// near-field sphere |x| = a
    pub sphere: SphereSpec,
    /// the medium (A, q); medium 1 for `reconstruct`
    pub potentials: Vec<PotentialDescriptor>,
    pub solver: SolverSpec,
    pub forward: ForwardBlock,
    pub farfield: FarfieldBlock,
    pub cgo_check: CgoBlock,
    pub reconstruct: ReconstructBlock,
    pub sweep: SweepBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsParams { k: 1.0, a: 0.8, r_d: 0.45 },
            grid: GridSpec::default(),
            sphere: SphereSpec::default(),
            potentials: desk_potentials(),
            solver: SolverSpec::default(),
            forward: ForwardBlock::default(),
            farfield: FarfieldBlock::default(),
            cgo_check: CgoBlock::default(),
            reconstruct: ReconstructBlock::default(),
            sweep: SweepBlock::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 32, half_width: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let g = GmresOptions::default();
        Self {
            tol: g.tol,
            restart: g.restart,
            max_iterations: g.max_iterations,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> GmresOptions {
        GmresOptions {
            tol: self.tol,
            restart: self.restart,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidentSpec {
    PlaneWave { direction: Vec3 },
    PointSource { source: Vec3 },
}

impl IncidentSpec {
    pub fn field(&self) -> magscat::Result<IncidentField> {
        match *self {
            Self::PlaneWave { direction } => IncidentField::plane_wave(direction),
            Self::PointSource { source } => Ok(IncidentField::point_source(source)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardBlock {
    pub incidents: Vec<IncidentSpec>,
    pub far_directions: SphereSpec,
    /// write the total field on the grid for each incidence
    pub write_fields: bool,
}

impl Default for ForwardBlock {
    fn default() -> Self {
        Self {
            incidents: vec![IncidentSpec::PlaneWave { direction: [0.0, 0.0, 1.0] }],
            far_directions: SphereSpec { n_theta: 8, n_phi: 16 },
            write_fields: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarfieldBlock {
    pub l_max: usize,
    pub directions: SphereSpec,
}

impl Default for FarfieldBlock {
    fn default() -> Self {
        Self {
            l_max: 8,
            directions: SphereSpec { n_theta: 12, n_phi: 24 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgoGates {
    pub rho: f64,
    /// relative to ‖A‖_∞
    pub transport: f64,
    pub salo: f64,
    pub frame: f64,
}

impl Default for CgoGates {
    fn default() -> Self {
        Self {
            rho: 1e-12,
            transport: 1e-6,
            salo: 1e-3,
            frame: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgoBlock {
    pub probes: Vec<ProbeSpec>,
    /// directions for the Salo identity; the first lattice vector along x when absent
    pub salo_xi: Option<Vec<Vec3>>,
    pub probe_kind: ProbeKind,
    pub gates: CgoGates,
}

impl Default for CgoBlock {
    fn default() -> Self {
        let p = |xi: Vec3, j, l, s| ProbeSpec { xi, j, l, s, flip: false };
        Self {
            probes: vec![
                p([1.0, 0.5, 0.0], 0, 1, 4.0),
                p([0.0, 1.2, -1.0], 1, 2, 6.0),
                p([1.5, 0.0, 1.0], 0, 2, 8.0),
            ],
            salo_xi: None,
            probe_kind: ProbeKind::default(),
            gates: CgoGates::default(),
        }
    }
}

impl CgoBlock {
    pub fn salo_directions(&self, grid: &BoxGrid) -> Vec<Vec3> {
        self.salo_xi.clone().unwrap_or_else(|| vec![[PI / grid.half_width(), 0.0, 0.0]])
    }
}

fn reconstruction_defaults() -> ReconstructionConfig {
    ReconstructionConfig { tail_tol: 1.0, ..Default::default() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Targets {
    pub curl: bool,
    pub q: bool,
}

impl Default for Targets {
    fn default() -> Self {
        Self { curl: true, q: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructBlock {
    /// medium 2
    pub potentials2: Vec<PotentialDescriptor>,
    /// stems of stored near-field matrices, used instead of assembling
    pub near_field_1: Option<PathBuf>,
    pub near_field_2: Option<PathBuf>,
    pub targets: Targets,
    /// operator-norm noise added to 𝒩₂
    pub noise: f64,
    pub config: ReconstructionConfig,
    /// results for potentials above this sup-norm are flagged uncertified
    pub born_threshold: f64,
}

impl Default for ReconstructBlock {
    fn default() -> Self {
        Self {
            potentials2: Vec::new(),
            near_field_1: None,
            near_field_2: None,
            targets: Targets::default(),
            noise: 0.0,
            config: reconstruction_defaults(),
            born_threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub id: String,
    pub potentials1: Vec<PotentialDescriptor>,
    pub potentials2: Vec<PotentialDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    /// the bundled six-pair Born family when empty
    pub pairs: Vec<PairSpec>,
    pub noise: Vec<f64>,
    pub config: ReconstructionConfig,
    /// far-field degree for the 𝓕 and L² distance columns; skipped when absent
    pub far_l_max: Option<usize>,
    pub far_directions: SphereSpec,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            noise: vec![0.0],
            config: reconstruction_defaults(),
            far_l_max: Some(8),
            far_directions: SphereSpec { n_theta: 12, n_phi: 24 },
        }
    }
}

impl SweepBlock {
    pub fn resolved_pairs(&self) -> Vec<PairSpec> {
        if self.pairs.is_empty() {
            born_family()
        } else {
            self.pairs.clone()
        }
    }
}

fn bump(center: Vec3, width: f64, window: f64) -> Bump {
    Bump { center, width, window: Some(window) }
}

fn desk_potentials() -> Vec<PotentialDescriptor> {
    let b = bump([0.05, 0.0, -0.05], 0.35, 0.12);
    vec![
        PotentialDescriptor::MagneticCurl { bump: b, amplitude: [0.1, -0.05, 0.08] },
        PotentialDescriptor::Electric { bump: b, amplitude: [0.3, 0.0] },
    ]
}

/// Base medium at sup-norm 1e−3 against base + t·δ, t = 1, 1/2, …, 1/32.
pub fn born_family() -> Vec<PairSpec> {
    let base_bump = bump([0.05, 0.0, -0.05], 0.35, 0.12);
    let base = vec![
        PotentialDescriptor::Magnetic { bump: base_bump, amplitude: [1e-3, -5e-4, 3e-4] },
        PotentialDescriptor::Electric { bump: base_bump, amplitude: [1e-3, 0.0] },
    ];
    let d = bump([-0.1, 0.1, 0.0], 0.3, 0.12);
    (0..6)
        .map(|i| {
            let t = 1e-3 * 0.5f64.powi(i);
            let mut p2 = base.clone();
            p2.push(PotentialDescriptor::Magnetic { bump: d, amplitude: [0.0, t, -0.5 * t] });
            p2.push(PotentialDescriptor::Electric { bump: d, amplitude: [t, 0.0] });
            PairSpec {
                id: format!("born{i}"),
                potentials1: base.clone(),
                potentials2: p2,
            }
        })
        .collect()
}

/// Geometry and media resolved from a config, checked before any compute.
pub struct Setup {
    pub grid: BoxGrid,
    pub sphere: SphereGrid,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", e.to_string()).with_parameter(path.display().to_string()))?;
        serde_json::from_str(&text).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let stage = "config";
        let grid = BoxGrid::new(self.grid.n, self.grid.half_width).map_err(|e| CliError::from_core(stage, e).or_parameter("grid"))?;
        self.physics.validate(&grid).map_err(|e| CliError::from_core(stage, e).or_parameter("physics"))?;
        if !(self.physics.a <= grid.half_width()) {
            return Err(CliError::config(stage, format!("sphere radius {} exceeds the box half-width {}", self.physics.a, grid.half_width()))
                .with_parameter("physics.a"));
        }
        if !(self.solver.tol > 0.0) || self.solver.restart == 0 || self.solver.max_iterations == 0 {
            return Err(CliError::config(stage, "solver tolerance and iteration limits must be positive").with_parameter("solver"));
        }
        let sphere = SphereGrid::from_spec(self.physics.a, self.sphere).map_err(|e| CliError::from_core(stage, e).or_parameter("sphere"))?;
        for (name, list) in [("potentials", &self.potentials), ("reconstruct.potentials2", &self.reconstruct.potentials2)] {
            self.media(&grid, list).map_err(|e| e.or_parameter(name))?;
        }
        for (name, p) in [("reconstruct.near_field_1", &self.reconstruct.near_field_1), ("reconstruct.near_field_2", &self.reconstruct.near_field_2)] {
            if let Some(stem) = p {
                for ext in ["json", "bin"] {
                    let f = stem.with_extension(ext);
                    if !f.is_file() {
                        return Err(CliError::config(stage, format!("{} does not exist", f.display())).with_parameter(name));
                    }
                }
            }
        }
        for (name, c) in [("reconstruct.config", &self.reconstruct.config), ("sweep.config", &self.sweep.config)] {
            c.validate().map_err(|e| CliError::from_core(stage, e).or_parameter(name))?;
        }
        if !(self.reconstruct.noise >= 0.0) || self.sweep.noise.iter().any(|d| !(*d >= 0.0)) {
            return Err(CliError::config(stage, "noise levels must be non-negative").with_parameter("noise"));
        }
        for p in self.sweep.pairs.iter() {
            self.media(&grid, &p.potentials1)?;
            self.media(&grid, &p.potentials2)?;
        }
        for inc in &self.forward.incidents {
            inc.field().map_err(|e| CliError::from_core(stage, e).or_parameter("forward.incidents"))?;
        }
        Ok(Setup { grid, sphere })
    }

    pub fn media(&self, grid: &BoxGrid, list: &[PotentialDescriptor]) -> Result<(MagneticPotential, ElectricPotential), CliError> {
        let r = self.physics.r_d;
        let a = MagneticPotential::from_descriptors(*grid, list, r).map_err(|e| CliError::from_core("config", e))?;
        let q = ElectricPotential::from_descriptors(*grid, list, r).map_err(|e| CliError::from_core("config", e))?;
        Ok((a, q))
    }
}
