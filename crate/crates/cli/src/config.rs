use isotropica::numerics::{GridSpec, HbarSchedule, SampledField};
use isotropica::phase::{Amplitude, PhaseSpec};
use isotropica::profiles::Profile;
use isotropica::spectra::{Domain, Potential};
use isotropica::states::{sample_model_state, CoherentState, IsotropicSubmanifoldModel, ModelIsotropicState};
use isotropica::wavefront::{MomentAxis, PhaseSpaceGrid};
use serde::{Deserialize, Serialize};

fn torus() -> Domain {
    Domain::Torus
}

fn one_dim() -> usize {
    1
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Model(ModelIsotropicState),
    Coherent { position: Vec<f64>, momentum: Vec<f64> },
}

impl StateSpec {
    pub fn sample(&self, grid: &GridSpec, hbar: f64) -> isotropica::Result<SampledField> {
        match self {
            StateSpec::Model(s) => sample_model_state(s, grid, hbar),
            StateSpec::Coherent { position, momentum } => {
                CoherentState::gaussian(position.clone(), momentum.clone())?.sample(grid, hbar)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildState {
    pub state: StateSpec,
    pub grid: GridSpec,
    pub hbar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decompose {
    pub state: ModelIsotropicState,
    pub grid: GridSpec,
    pub hbars: Vec<f64>,
    #[serde(default)]
    pub spacing_factor: Option<f64>,
    #[serde(default)]
    pub range: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub submanifold: IsotropicSubmanifoldModel,
    #[serde(default)]
    pub ranges: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wavefront {
    pub state: StateSpec,
    pub grid: GridSpec,
    pub hbar: f64,
    pub phase_space: PhaseSpaceGrid,
    /// Apply the ħ-Fourier transform before the Husimi density.
    #[serde(default)]
    pub fourier: bool,
    #[serde(default = "half")]
    pub threshold: f64,
    #[serde(default)]
    pub reference: Option<Reference>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Widths {
    pub state: StateSpec,
    pub grid: GridSpec,
    pub hbars: HbarSchedule,
    pub axes: Vec<MomentAxis>,
    #[serde(default)]
    pub fourier: bool,
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidatePhase {
    pub phase: PhaseSpec,
    pub seeds: Vec<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatoryEval {
    pub phase: PhaseSpec,
    pub amplitude: Amplitude,
    #[serde(default)]
    pub order: f64,
    pub hbar: f64,
    pub points: Vec<Vec<f64>>,
    #[serde(default = "yes")]
    pub stationary_phase: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spectrum {
    #[serde(default = "one_dim")]
    pub dim: usize,
    pub potential: Potential,
    pub hbar: f64,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default = "torus")]
    pub domain: Domain,
    pub window: f64,
}

/// Where the eigenvalues of a trace or counting experiment come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSource {
    /// Exact spectrum of ½(x² + ξ²) − 1, whose level set has measure 2π.
    HarmonicSurrogate,
    Operator {
        potential: Potential,
        #[serde(default = "one_dim")]
        dim: usize,
        #[serde(default = "torus")]
        domain: Domain,
        /// Grid size per axis; the smallest admissible power of two when absent.
        #[serde(default)]
        points: Option<usize>,
        #[serde(default)]
        monte_carlo_samples: Option<u64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceCheck {
    pub source: SpectrumSource,
    pub hbar_schedule: HbarSchedule,
    pub phi: Profile,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylCount {
    pub source: SpectrumSource,
    pub hbar_schedule: HbarSchedule,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaDecay {
    pub rho: Profile,
    pub cutoff: Profile,
    pub lambdas: Vec<f64>,
    pub hbars: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Propagate {
    #[serde(default = "one_dim")]
    pub dim: usize,
    pub potential: Potential,
    #[serde(default = "torus")]
    pub domain: Domain,
    pub hbar: f64,
    #[serde(default)]
    pub points: Option<usize>,
    /// Energy half-width used to size the grid.
    pub window: f64,
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub times: Vec<f64>,
    #[serde(default)]
    pub time_step: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsCheck {
    pub curve: IsotropicSubmanifoldModel,
    #[serde(default)]
    pub hbar: Option<f64>,
}
