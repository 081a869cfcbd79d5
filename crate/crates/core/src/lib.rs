//! Requirement-guided configuration tuning.
//!
//! A performance requirement is a piecewise-linear satisfaction proposition
//! over a performance range. The tuner co-evolves an auxiliary proposition with
//! two configuration populations so that search keeps receiving a usable
//! gradient even when the target requirement is very strict or very loose.

pub mod coevolution;
pub mod entropy;
pub mod evolution;
pub mod landscape;
pub mod ranking;
pub mod reqgen;
pub mod requirement;
pub mod scalar;
pub mod tuners;

pub use coevolution::{CaseLabel, EvolutionError};
pub use entropy::{differential_entropy, discriminative_compare, EntropyValue};
pub use evolution::{GaParams, Population};
pub use landscape::{BudgetMeter, Configuration, Landscape, LandscapeError, Shape, Space, SynthSpec};
pub use requirement::{Fragment, FragmentKind, Proposition, PropositionEncoding, RequirementError};
pub use scalar::Scalar;
pub use tuners::{CaseSwitches, CoTune, Ga, Objective, RandomSearch, Tuner, TunerError, TunerParams, TunerResult};

pub type PropositionF64 = Proposition<f64>;
pub type PropositionF32 = Proposition<f32>;
pub type FragmentF64 = Fragment<f64>;
pub type FragmentF32 = Fragment<f32>;
pub type LandscapeF64 = Landscape<f64>;
pub type LandscapeF32 = Landscape<f32>;
pub type PopulationF64 = Population<f64>;
pub type PopulationF32 = Population<f32>;
pub type TunerResultF64 = TunerResult<f64>;
pub type TunerResultF32 = TunerResult<f32>;
