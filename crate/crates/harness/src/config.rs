use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cotune_core::landscape::{Landscape, LoadOptions, Shape, SynthSpec};
use cotune_core::ranking::RankConfig;
use cotune_core::reqgen::GenSpec;
use cotune_core::tuners::{CaseSwitches, CoTune, Ga, RandomSearch, Tuner, TunerParams};
use cotune_core::CaseLabel;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LandscapeSource {
    Csv {
        name: String,
        path: PathBuf,
        #[serde(default)]
        maximize: bool,
    },
    Synth {
        name: String,
        #[serde(flatten)]
        spec: SynthSpec,
    },
}

impl LandscapeSource {
    pub fn name(&self) -> &str {
        match self {
            LandscapeSource::Csv { name, .. } | LandscapeSource::Synth { name, .. } => name,
        }
    }

    pub fn load(&self) -> Result<Landscape<f64>> {
        match self {
            LandscapeSource::Csv { path, maximize, .. } => {
                Landscape::load_csv(path, LoadOptions { maximize: *maximize })
                    .with_context(|| format!("loading {}", path.display()))
            }
            LandscapeSource::Synth { name, spec } => {
                Landscape::synth(spec).with_context(|| format!("synthesizing {name}"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequirementSource {
    /// Proposition JSON files, applied to every landscape.
    Files(Vec<PathBuf>),
    /// A generated suite per landscape.
    Generate(GenSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunerKind {
    Cotune,
    Cotune0,
    Cotune1,
    Cotune2,
    /// CoTune with every case disabled.
    CotuneNone,
    GaP,
    GaR,
    Random,
}

impl TunerKind {
    pub fn default_label(self) -> &'static str {
        match self {
            TunerKind::Cotune => "CoTune",
            TunerKind::Cotune0 => "CoTune0",
            TunerKind::Cotune1 => "CoTune1",
            TunerKind::Cotune2 => "CoTune2",
            TunerKind::CotuneNone => "CoTune-none",
            TunerKind::GaP => "GA_p",
            TunerKind::GaR => "GA_r",
            TunerKind::Random => "Random",
        }
    }
}

impl fmt::Display for TunerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.default_label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunerSpec {
    pub kind: TunerKind,
    /// Name in outputs; defaults to the kind's label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Overrides the stagnation cap for this tuner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub literal_best: bool,
}

impl TunerSpec {
    pub fn of(kind: TunerKind) -> Self {
        TunerSpec {
            kind,
            label: None,
            k: None,
            literal_best: false,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.default_label().to_string())
    }

    pub fn build(&self) -> Box<dyn Tuner<f64>> {
        let cotune = |cases| {
            Box::new(CoTune {
                cases,
                literal_best: self.literal_best,
            }) as Box<dyn Tuner<f64>>
        };
        match self.kind {
            TunerKind::Cotune => cotune(CaseSwitches::ALL),
            TunerKind::Cotune0 => cotune(CaseSwitches::only(CaseLabel::Case0)),
            TunerKind::Cotune1 => cotune(CaseSwitches::only(CaseLabel::Case1)),
            TunerKind::Cotune2 => cotune(CaseSwitches::only(CaseLabel::Case2)),
            TunerKind::CotuneNone => cotune(CaseSwitches::NONE),
            TunerKind::GaP => Box::new(Ga::requirement_guided()),
            TunerKind::GaR => Box::new(Ga::performance_guided()),
            TunerKind::Random => Box::new(RandomSearch),
        }
    }

    pub fn params(&self, base: &TunerParams) -> TunerParams {
        TunerParams {
            k: self.k.unwrap_or(base.k),
            ..*base
        }
    }
}

fn default_repeats() -> usize {
    30
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub landscapes: Vec<LandscapeSource>,
    pub requirements: RequirementSource,
    pub tuners: Vec<TunerSpec>,
    #[serde(default)]
    pub params: TunerParams,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Stop a run as soon as the target is fully satisfied.
    #[serde(default)]
    pub early_stop: bool,
    pub output: PathBuf,
    #[serde(default)]
    pub ranking: RankConfig,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Makes relative paths relative to the config file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for l in &mut self.landscapes {
            if let LandscapeSource::Csv { path, .. } = l {
                fix(path);
            }
        }
        if let RequirementSource::Files(files) = &mut self.requirements {
            files.iter_mut().for_each(fix);
        }
        fix(&mut self.output);
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 2 {
            bail!("repeats must be at least 2 for ranking, got {}", self.repeats);
        }
        if self.landscapes.is_empty() || self.tuners.is_empty() {
            bail!("at least one landscape and one tuner are required");
        }
        let mut names = std::collections::HashSet::new();
        for l in &self.landscapes {
            if !names.insert(l.name()) {
                bail!("duplicate landscape name {}", l.name());
            }
            if let LandscapeSource::Csv { path, .. } = l {
                if !path.exists() {
                    bail!("landscape file {} does not exist", path.display());
                }
            }
        }
        let mut labels = std::collections::HashSet::new();
        for t in &self.tuners {
            if !labels.insert(t.label()) {
                bail!("duplicate tuner label {}", t.label());
            }
        }
        match &self.requirements {
            RequirementSource::Files(files) => {
                if files.is_empty() {
                    bail!("no requirement files listed");
                }
                for f in files {
                    if !f.exists() {
                        bail!("requirement file {} does not exist", f.display());
                    }
                }
            }
            RequirementSource::Generate(spec) => spec.validate()?,
        }
        Ok(())
    }

    pub fn run_params(&self) -> TunerParams {
        TunerParams {
            early_stop: self.early_stop,
            ..self.params
        }
    }
}

/// Synthetic landscape options parsed from a shape name.
pub fn synth_spec(seed: u64, options: usize, shape: Shape, domain_sizes: Option<Vec<usize>>) -> SynthSpec {
    let spec = SynthSpec::binary(seed, options, shape);
    match domain_sizes {
        Some(d) => spec.with_domain_sizes(d),
        None => spec,
    }
}
