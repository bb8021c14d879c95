//! Experiment configuration: a plain `key = value` file plus overrides.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Lists are comma-separated. Unknown keys are rejected so typos surface as
//! configuration errors instead of silently falling back to defaults.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use quench_core::ansatz::Shape;
use quench_core::evolution::{default_solver, sample_count, PtvmcOptions, PTVMC_DEFAULT_SHIFT};
use quench_core::solvers::kfac_partition_from_layers;
use quench_core::{MetropolisConfig, Sampler, SolverConfig, SolverMethod, TiltedIsing};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnsatzKind {
    Fnn,
    Rbm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ptvmc,
    Tvmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Metropolis,
    Full,
}

/// Whether exact-reference merits are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// On when the chain is small enough, off otherwise.
    Auto,
    On,
    Off,
}

/// Every key, its default and a one-line description, in file order.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("name", "quench", "run name; replicates go to <output>/<name>/rep_XX"),
    ("output", "runs", "output root directory"),
    ("sites", "10", "chain length L"),
    ("coupling", "1", "post-quench coupling J"),
    ("field_x", "0.5", "post-quench transverse field h_x"),
    ("field_z", "0.5", "post-quench longitudinal field h_z"),
    ("pre_field_x", "1", "pre-quench transverse field (h_x only; its ground state is |→…→⟩)"),
    ("ansatz", "fnn", "fnn | rbm"),
    ("layers", "", "FNN layer sizes; empty means L,4L,3L,1"),
    ("alpha", "5", "RBM hidden-unit density"),
    ("method", "ptvmc", "ptvmc | tvmc"),
    ("sampler", "metropolis", "metropolis | full"),
    ("samples", "10000", "Monte Carlo samples per estimate"),
    ("chains", "16", "independent Markov chains"),
    ("burn_in", "", "discarded proposals per chain; empty means 10·L²"),
    ("thinning", "", "proposals between kept samples; empty means L"),
    ("cutoff", "1e-5", "p-tVMC block infidelity cutoff"),
    ("max_steps", "1000", "p-tVMC optimization steps per block"),
    ("learning_rate", "0.2", "initial p-tVMC learning rate"),
    ("decay", "0.8", "learning-rate decay factor"),
    ("decay_every", "400", "optimization steps between decays"),
    ("span", "6", "Trotter block span d"),
    ("dt", "0.1", "time step"),
    ("t_final", "2", "final time"),
    ("record_every", "0.1", "time between recorded rows and checkpoints"),
    ("solver", "auto", "auto | direct | minsr | kfac"),
    ("shift", "", "regularization shift; empty means 1e-4 for ptvmc and 0 for tvmc"),
    ("kfac_blocks", "", "K-FAC blocks per layer; empty means one block per layer"),
    ("ranks", "2,50,500", "ranks n tracked by the amplitude-ratio and phase-distance merits"),
    ("oracle", "auto", "auto | on | off: exact-reference merits (at most 14 sites)"),
    ("export_dense", "false", "write dense NNQS and exact states next to the merits"),
    ("replicates", "1", "independent runs"),
    ("seed", "0", "base seed; replicate seeds are derived from it"),
    ("init_noise", "0.01", "noise of the random start of the initial-state fit"),
    ("fit_target", "1e-8", "required infidelity of the initial-state fit"),
    ("fit_max_steps", "1000", "optimization steps of the initial-state fit"),
    ("fit_shift", "1e-6", "regularization shift of the initial-state fit"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub output: String,
    pub sites: usize,
    pub coupling: f64,
    pub field_x: f64,
    pub field_z: f64,
    pub pre_field_x: f64,
    pub ansatz: AnsatzKind,
    pub layers: Vec<usize>,
    pub alpha: usize,
    pub method: Method,
    pub sampler: SamplerKind,
    pub samples: usize,
    pub chains: usize,
    pub burn_in: Option<usize>,
    pub thinning: Option<usize>,
    pub cutoff: f64,
    pub max_steps: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub decay_every: usize,
    pub span: usize,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: f64,
    pub solver: Option<SolverMethod>,
    pub shift: Option<f64>,
    pub kfac_blocks: Vec<usize>,
    pub ranks: Vec<usize>,
    pub oracle: OracleMode,
    pub export_dense: bool,
    pub replicates: usize,
    pub seed: u64,
    pub init_noise: f64,
    pub fit_target: f64,
    pub fit_max_steps: usize,
    pub fit_shift: f64,
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if value.is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_list(key: &str, value: &str) -> CliResult<Vec<usize>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut cfg = Self::blank();
        for (k, v, _) in KEYS {
            cfg.set(k, v).expect("defaults parse");
        }
        cfg
    }
}

impl ExperimentConfig {
    fn blank() -> Self {
        Self {
            name: String::new(),
            output: String::new(),
            sites: 0,
            coupling: 0.0,
            field_x: 0.0,
            field_z: 0.0,
            pre_field_x: 0.0,
            ansatz: AnsatzKind::Fnn,
            layers: Vec::new(),
            alpha: 0,
            method: Method::Ptvmc,
            sampler: SamplerKind::Metropolis,
            samples: 0,
            chains: 0,
            burn_in: None,
            thinning: None,
            cutoff: 0.0,
            max_steps: 0,
            learning_rate: 0.0,
            decay: 0.0,
            decay_every: 0,
            span: 0,
            dt: 0.0,
            t_final: 0.0,
            record_every: 0.0,
            solver: None,
            shift: None,
            kfac_blocks: Vec::new(),
            ranks: Vec::new(),
            oracle: OracleMode::Auto,
            export_dense: false,
            replicates: 0,
            seed: 0,
            init_noise: 0.0,
            fit_target: 0.0,
            fit_max_steps: 0,
            fit_shift: 0.0,
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key {
            "name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(bad(key, value, "must be a non-empty file name"));
                }
                self.name = value.to_string();
            }
            "output" => self.output = value.to_string(),
            "sites" => self.sites = parse(key, value)?,
            "coupling" => self.coupling = parse(key, value)?,
            "field_x" => self.field_x = parse(key, value)?,
            "field_z" => self.field_z = parse(key, value)?,
            "pre_field_x" => self.pre_field_x = parse(key, value)?,
            "ansatz" => {
                self.ansatz = match value {
                    "fnn" => AnsatzKind::Fnn,
                    "rbm" => AnsatzKind::Rbm,
                    _ => return Err(bad(key, value, "expected fnn or rbm")),
                }
            }
            "layers" => self.layers = parse_list(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "method" => {
                self.method = match value {
                    "ptvmc" => Method::Ptvmc,
                    "tvmc" => Method::Tvmc,
                    _ => return Err(bad(key, value, "expected ptvmc or tvmc")),
                }
            }
            "sampler" => {
                self.sampler = match value {
                    "metropolis" => SamplerKind::Metropolis,
                    "full" => SamplerKind::Full,
                    _ => return Err(bad(key, value, "expected metropolis or full")),
                }
            }
            "samples" => self.samples = parse(key, value)?,
            "chains" => self.chains = parse(key, value)?,
            "burn_in" => self.burn_in = parse_opt(key, value)?,
            "thinning" => self.thinning = parse_opt(key, value)?,
            "cutoff" => self.cutoff = parse(key, value)?,
            "max_steps" => self.max_steps = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "decay" => self.decay = parse(key, value)?,
            "decay_every" => self.decay_every = parse(key, value)?,
            "span" => self.span = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "t_final" => self.t_final = parse(key, value)?,
            "record_every" => self.record_every = parse(key, value)?,
            "solver" => {
                self.solver = match value {
                    "auto" => None,
                    other => Some(other.parse().map_err(|e| bad(key, value, e))?),
                }
            }
            "shift" => self.shift = parse_opt(key, value)?,
            "kfac_blocks" => self.kfac_blocks = parse_list(key, value)?,
            "ranks" => self.ranks = parse_list(key, value)?,
            "oracle" => {
                self.oracle = match value {
                    "auto" => OracleMode::Auto,
                    "on" => OracleMode::On,
                    "off" => OracleMode::Off,
                    _ => return Err(bad(key, value, "expected auto, on or off")),
                }
            }
            "export_dense" => self.export_dense = parse(key, value)?,
            "replicates" => self.replicates = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "init_noise" => self.init_noise = parse(key, value)?,
            "fit_target" => self.fit_target = parse(key, value)?,
            "fit_max_steps" => self.fit_max_steps = parse(key, value)?,
            "fit_shift" => self.fit_shift = parse(key, value)?,
            _ => return Err(CliError::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{raw}`", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, item: &str) -> CliResult<()> {
        let (k, v) =
            item.split_once('=').ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
        self.set(k.trim(), v)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Canonical text form; parsing it back gives the same configuration.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::new();
        for (k, _, _) in KEYS {
            let v = match *k {
                "name" => self.name.clone(),
                "output" => self.output.clone(),
                "sites" => self.sites.to_string(),
                "coupling" => format!("{:?}", self.coupling),
                "field_x" => format!("{:?}", self.field_x),
                "field_z" => format!("{:?}", self.field_z),
                "pre_field_x" => format!("{:?}", self.pre_field_x),
                "ansatz" => match self.ansatz {
                    AnsatzKind::Fnn => "fnn".into(),
                    AnsatzKind::Rbm => "rbm".into(),
                },
                "layers" => join(&self.layers),
                "alpha" => self.alpha.to_string(),
                "method" => match self.method {
                    Method::Ptvmc => "ptvmc".into(),
                    Method::Tvmc => "tvmc".into(),
                },
                "sampler" => match self.sampler {
                    SamplerKind::Metropolis => "metropolis".into(),
                    SamplerKind::Full => "full".into(),
                },
                "samples" => self.samples.to_string(),
                "chains" => self.chains.to_string(),
                "burn_in" => opt(self.burn_in),
                "thinning" => opt(self.thinning),
                "cutoff" => format!("{:?}", self.cutoff),
                "max_steps" => self.max_steps.to_string(),
                "learning_rate" => format!("{:?}", self.learning_rate),
                "decay" => format!("{:?}", self.decay),
                "decay_every" => self.decay_every.to_string(),
                "span" => self.span.to_string(),
                "dt" => format!("{:?}", self.dt),
                "t_final" => format!("{:?}", self.t_final),
                "record_every" => format!("{:?}", self.record_every),
                "solver" => self.solver.map(|m| m.name().to_string()).unwrap_or_else(|| "auto".into()),
                "shift" => self.shift.map(|s| format!("{s:?}")).unwrap_or_default(),
                "kfac_blocks" => join(&self.kfac_blocks),
                "ranks" => join(&self.ranks),
                "oracle" => match self.oracle {
                    OracleMode::Auto => "auto".into(),
                    OracleMode::On => "on".into(),
                    OracleMode::Off => "off".into(),
                },
                "export_dense" => self.export_dense.to_string(),
                "replicates" => self.replicates.to_string(),
                "seed" => self.seed.to_string(),
                "init_noise" => format!("{:?}", self.init_noise),
                "fit_target" => format!("{:?}", self.fit_target),
                "fit_max_steps" => self.fit_max_steps.to_string(),
                "fit_shift" => format!("{:?}", self.fit_shift),
                _ => unreachable!("every key is listed"),
            };
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn model(&self) -> CliResult<TiltedIsing> {
        Ok(TiltedIsing::new(self.sites, self.coupling, self.field_x, self.field_z)?)
    }

    pub fn shape(&self) -> CliResult<Shape> {
        let shape = match self.ansatz {
            AnsatzKind::Fnn if self.layers.is_empty() => Shape::fnn_default(self.sites),
            AnsatzKind::Fnn => Shape::Fnn { layers: self.layers.clone() },
            AnsatzKind::Rbm => Shape::rbm(self.sites, self.alpha),
        };
        shape.validate()?;
        if shape.sites() != self.sites {
            return Err(CliError::Config(format!(
                "the input layer has {} nodes but the chain has {} sites",
                shape.sites(),
                self.sites
            )));
        }
        Ok(shape)
    }

    pub fn sampler(&self) -> Sampler {
        match self.sampler {
            SamplerKind::Full => Sampler::FullSummation,
            SamplerKind::Metropolis => {
                let mut m = MetropolisConfig::with_defaults(self.samples, self.sites);
                m.n_chains = self.chains;
                if let Some(b) = self.burn_in {
                    m.burn_in = b;
                }
                if let Some(t) = self.thinning {
                    m.thinning = t;
                }
                Sampler::Metropolis(m)
            }
        }
    }

    pub fn effective_shift(&self) -> f64 {
        self.shift.unwrap_or(match self.method {
            Method::Ptvmc => PTVMC_DEFAULT_SHIFT,
            Method::Tvmc => 0.0,
        })
    }

    pub fn solver(&self) -> CliResult<SolverConfig> {
        let shape = self.shape()?;
        let shift = self.effective_shift();
        let cfg = match self.solver {
            None => default_solver(shape.n_params(), sample_count(&self.sampler(), self.sites), shift),
            Some(SolverMethod::Kfac) => {
                let per_layer = if self.kfac_blocks.is_empty() {
                    match &shape {
                        Shape::Fnn { layers } => vec![1; layers.len() - 1],
                        Shape::Rbm { .. } => vec![1; 3],
                    }
                } else {
                    self.kfac_blocks.clone()
                };
                let partition = kfac_partition_from_layers(&shape, &per_layer)?;
                SolverConfig::new(SolverMethod::Kfac, shift).with_partition(partition)
            }
            Some(m) => SolverConfig::new(m, shift),
        };
        cfg.validate(shape.n_params())?;
        Ok(cfg)
    }

    pub fn ptvmc_options(&self) -> CliResult<PtvmcOptions> {
        let opts = PtvmcOptions {
            cutoff: self.cutoff,
            max_steps: self.max_steps,
            learning_rate: self.learning_rate,
            decay: self.decay,
            decay_every: self.decay_every,
            span: self.span,
            dt: self.dt,
            ..PtvmcOptions::new(self.sampler(), self.solver()?)
        };
        opts.validate()?;
        Ok(opts)
    }

    /// Number of time steps to reach `t_final`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Time steps between recorded rows.
    pub fn record_stride(&self) -> usize {
        ((self.record_every / self.dt).round() as usize).max(1)
    }

    /// 0-based index of the middle site, `⌈L/2⌉` counted from 1.
    pub fn mid_site(&self) -> usize {
        self.sites.div_ceil(2) - 1
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        self.model()?;
        self.shape()?;
        if !(self.pre_field_x > 0.0) {
            return fail("the pre-quench field must be positive so that |→…→⟩ is its ground state".into());
        }
        if self.sampler == SamplerKind::Metropolis && (self.samples == 0 || self.chains == 0) {
            return fail("Metropolis sampling needs positive samples and chains".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return fail(format!("t_final must be non-negative, got {}", self.t_final));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return fail(format!("t_final = {} is not a whole number of dt = {} steps", self.t_final, self.dt));
        }
        if self.record_every < self.dt * (1.0 - 1e-12) {
            return fail("record_every must be at least dt".into());
        }
        if self.method == Method::Ptvmc && (self.span < 2 || self.span > self.sites) {
            return fail(format!("span must lie in 2..={}, got {}", self.sites, self.span));
        }
        if self.replicates == 0 {
            return fail("at least one replicate is required".into());
        }
        if self.ranks.iter().any(|&r| r == 0) {
            return fail("ranks are 1-based".into());
        }
        match self.method {
            Method::Ptvmc => {
                self.ptvmc_options()?;
            }
            Method::Tvmc => {
                self.solver()?;
            }
        }
        Ok(())
    }
}
