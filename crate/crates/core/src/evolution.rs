//! Time evolution drivers: tVMC integrated with RK4, and projected tVMC
//! where every Trotter block is applied by maximizing the overlap with the
//! propagated state.

use faer::c64;

use crate::ansatz::{init_near_uniform, Ansatz, Network, Shape};
use crate::error::{Error, Result};
use crate::estimators::{expectation, overlap_and_force, tvmc_force, Observable};
use crate::sampling::{full_summation, Sampler, FULL_SUMMATION_MAX_SITES};
use crate::solvers::{solve, SolverConfig, SolverDiagnostics, SolverMethod};
use crate::spin::{TiltedIsing, TrotterBlock, TrotterSchedule};

/// Mixes indices into a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut z = base;
    for &t in tags {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(t.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// Default regularization shift of the p-tVMC solves.
pub const PTVMC_DEFAULT_SHIFT: f64 = 1e-4;

/// Picks minSR when the sample side is smaller and the shift allows it.
pub fn default_solver(n_params: usize, n_samples: usize, shift: f64) -> SolverConfig {
    if shift > 0.0 && n_samples < n_params {
        SolverConfig::new(SolverMethod::MinSr, shift)
    } else {
        SolverConfig::new(SolverMethod::Direct, shift)
    }
}

/// Number of configurations a sampler produces for `sites` spins.
pub fn sample_count(sampler: &Sampler, sites: usize) -> usize {
    match sampler {
        Sampler::Metropolis(cfg) => cfg.n_samples,
        Sampler::FullSummation => 1usize << sites.min(FULL_SUMMATION_MAX_SITES),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtvmcOptions {
    /// Infidelity cutoff ε.
    pub cutoff: f64,
    /// Maximum optimization steps per block.
    pub max_steps: usize,
    /// Initial learning rate γ₀.
    pub learning_rate: f64,
    pub decay: f64,
    pub decay_every: usize,
    /// Block span `d`.
    pub span: usize,
    pub dt: f64,
    pub sampler: Sampler,
    pub solver: SolverConfig,
}

impl PtvmcOptions {
    /// ε = 1e-5, M_I = 1000, γ₀ = 0.2 decayed by 0.8 every 400 steps,
    /// d = 6, dt = 0.1.
    pub fn new(sampler: Sampler, solver: SolverConfig) -> Self {
        Self {
            cutoff: 1e-5,
            max_steps: 1000,
            learning_rate: 0.2,
            decay: 0.8,
            decay_every: 400,
            span: 6,
            dt: 0.1,
            sampler,
            solver,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.cutoff > 0.0) {
            return bad("infidelity cutoff must be positive");
        }
        if self.max_steps < 1 {
            return bad("at least one optimization step per block is required");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) || self.decay_every == 0 {
            return bad("learning-rate decay must lie in (0, 1] with a positive period");
        }
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return bad("time step must be non-negative");
        }
        Ok(())
    }

    /// `γ(m) = γ₀ · decay^⌊m / decay_every⌋`.
    pub fn learning_rate_at(&self, m: usize) -> f64 {
        self.learning_rate * self.decay.powi((m / self.decay_every) as i32)
    }
}

/// Outcome of optimizing one block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockReport {
    pub start: usize,
    pub span: usize,
    /// `max(last estimate of 1 − C^U, 0)`.
    pub infidelity: f64,
    /// Parameter updates applied.
    pub steps: usize,
    pub converged: bool,
    pub diagnostics: SolverDiagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub blocks: Vec<BlockReport>,
    /// `Σ_l I^{U_{d,l}}` over the step.
    pub infidelity_sum: f64,
}

impl StepReport {
    pub fn all_converged(&self) -> bool {
        self.blocks.iter().all(|b| b.converged)
    }
}

/// Finds `ψ_{t'} ≈ U ψ_t` by natural-gradient ascent on `C^U`, starting
/// from `ψ_t`. The `ψ_t` samples are drawn once; `ψ_{t'}` is resampled at
/// every step.
pub fn ptvmc_block_optimize<A: Ansatz>(
    psi_t: &A,
    block: &TrotterBlock,
    options: &PtvmcOptions,
    seed: u64,
) -> Result<(A, BlockReport)> {
    let mut psi_tp = psi_t.clone();
    let report = optimize_towards(psi_t, &mut psi_tp, block, options, seed)?;
    Ok((psi_tp, report))
}

fn optimize_towards<A: Ansatz>(
    psi_t: &A,
    psi_tp: &mut A,
    block: &TrotterBlock,
    options: &PtvmcOptions,
    seed: u64,
) -> Result<BlockReport> {
    options.validate()?;
    options.solver.validate(psi_tp.n_params())?;
    let t_samples = options.sampler.sample(psi_t, derive_seed(seed, &[0]))?;
    let mut diagnostics = SolverDiagnostics::default();
    let mut m = 0;
    loop {
        let tp_samples = options.sampler.sample(psi_tp, derive_seed(seed, &[1, m as u64]))?;
        let est = overlap_and_force(&t_samples, &tp_samples, psi_t, psi_tp, block)?;
        let infidelity = est.infidelity();
        if !infidelity.is_finite() {
            return Err(Error::Numeric(format!("infidelity estimate became {infidelity}")));
        }
        let converged = infidelity <= options.cutoff;
        if converged || m == options.max_steps {
            return Ok(BlockReport {
                start: block.start(),
                span: block.span(),
                infidelity: infidelity.max(0.0),
                steps: m,
                converged,
                diagnostics,
            });
        }
        let (delta, diag) = solve(&options.solver, est.x.as_ref(), &est.force.f)?;
        diagnostics = diag;
        // the force is ∂C/∂θ*, so ascend
        let gamma = options.learning_rate_at(m);
        for (p, d) in psi_tp.params_mut().iter_mut().zip(&delta) {
            *p += d * gamma;
        }
        if psi_tp.params().iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::Numeric("parameters became non-finite".into()));
        }
        m += 1;
    }
}

/// Applies every block of the schedule in order.
pub fn ptvmc_step<A: Ansatz>(
    psi: &A,
    schedule: &TrotterSchedule,
    options: &PtvmcOptions,
    seed: u64,
) -> Result<(A, StepReport)> {
    let mut current = psi.clone();
    let mut blocks = Vec::with_capacity(schedule.len());
    for (b, block) in schedule.iter().enumerate() {
        let (next, report) = ptvmc_block_optimize(&current, block, options, derive_seed(seed, &[b as u64]))?;
        current = next;
        blocks.push(report);
    }
    let infidelity_sum = blocks.iter().map(|b| b.infidelity).sum();
    Ok((current, StepReport { blocks, infidelity_sum }))
}

/// `dθ/dt = −i S⁻¹ F` from one sample set; returns the derivative, the
/// energy estimate and the solver diagnostics.
pub fn tvmc_derivative<A: Ansatz>(
    psi: &A,
    model: &TiltedIsing,
    sampler: &Sampler,
    solver: &SolverConfig,
    seed: u64,
) -> Result<(Vec<c64>, c64, SolverDiagnostics)> {
    let samples = sampler.sample(psi, seed)?;
    let ef = tvmc_force(&samples, psi, model)?;
    let (delta, diag) = solve(solver, ef.x.as_ref(), &ef.force.f)?;
    let minus_i = c64::new(0.0, -1.0);
    Ok((delta.into_iter().map(|d| d * minus_i).collect(), ef.energy, diag))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TvmcReport {
    /// Energy at the start of the step.
    pub energy: c64,
    /// Worst diagnostics over the four stages.
    pub diagnostics: SolverDiagnostics,
}

fn shifted<A: Ansatz>(psi: &A, k: &[c64], h: f64) -> A {
    let mut out = psi.clone();
    for (p, d) in out.params_mut().iter_mut().zip(k) {
        *p += d * h;
    }
    out
}

/// Classical RK4 with fresh samples at every stage.
pub fn tvmc_rk4_step<A: Ansatz>(
    psi: &A,
    model: &TiltedIsing,
    dt: f64,
    sampler: &Sampler,
    solver: &SolverConfig,
    seed: u64,
) -> Result<(A, TvmcReport)> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be non-negative, got {dt}")));
    }
    if dt == 0.0 {
        return Ok((psi.clone(), TvmcReport { energy: c64::new(f64::NAN, 0.0), diagnostics: Default::default() }));
    }
    let mut worst = SolverDiagnostics::default();
    let stage = |p: &A, s: u64, worst: &mut SolverDiagnostics| -> Result<(Vec<c64>, c64)> {
        let (k, e, d) = tvmc_derivative(p, model, sampler, solver, derive_seed(seed, &[s]))?;
        worst.residual = worst.residual.max(d.residual);
        worst.condition = worst.condition.max(d.condition);
        worst.fallback |= d.fallback;
        worst.pseudo_inverse |= d.pseudo_inverse;
        worst.rank = match (worst.rank, d.rank) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok((k, e))
    };
    let (k1, energy) = stage(psi, 0, &mut worst)?;
    let (k2, _) = stage(&shifted(psi, &k1, dt / 2.0), 1, &mut worst)?;
    let (k3, _) = stage(&shifted(psi, &k2, dt / 2.0), 2, &mut worst)?;
    let (k4, _) = stage(&shifted(psi, &k3, dt), 3, &mut worst)?;
    let mut out = psi.clone();
    for (i, p) in out.params_mut().iter_mut().enumerate() {
        *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
    }
    if out.params().iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::Numeric("parameters became non-finite".into()));
    }
    Ok((out, TvmcReport { energy, diagnostics: worst }))
}

/// Single-site magnetizations and energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub sigma_x: Vec<f64>,
    pub sigma_z: Vec<f64>,
    pub energy: f64,
}

pub fn measure<A: Ansatz>(psi: &A, model: &TiltedIsing, sampler: &Sampler, seed: u64) -> Result<Observables> {
    let samples = sampler.sample(psi, seed)?;
    let sites = model.sites();
    let mut sigma_x = Vec::with_capacity(sites);
    let mut sigma_z = Vec::with_capacity(sites);
    for l in 0..sites {
        sigma_x.push(expectation(Observable::SigmaX(l), &samples, psi, model)?.re);
        sigma_z.push(expectation(Observable::SigmaZ(l), &samples, psi, model)?.re);
    }
    let energy = expectation(Observable::Energy, &samples, psi, model)?.re;
    Ok(Observables { sigma_x, sigma_z, energy })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// Standard deviation of the complex starting noise.
    pub noise: f64,
    pub seed: u64,
    /// Required infidelity.
    pub target: f64,
    pub max_steps: usize,
    pub learning_rate: f64,
    /// `None` picks [`default_solver`] with shift 1e-6.
    pub solver: Option<SolverConfig>,
    /// `None` uses full summation (required for the exact check).
    pub sampler: Option<Sampler>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { noise: 0.01, seed: 0, target: 1e-8, max_steps: 1000, learning_rate: 0.2, solver: None, sampler: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub steps: usize,
    /// Infidelity against the uniform state, exact when enumerable.
    pub infidelity: f64,
    pub exact: bool,
}

/// Exact infidelity of `ψ` with the uniform superposition `|→…→⟩`.
pub fn uniform_infidelity<A: Ansatz>(psi: &A) -> Result<f64> {
    let set = full_summation(psi)?;
    // |⟨+|ψ⟩|² / ⟨ψ|ψ⟩ = |Σ_x ψ(x)|² / (2^L Σ_x |ψ(x)|²)
    let sum: c64 = set.weights().iter().zip(set.log_amps()).map(|(&w, l)| c64::from_polar(w.sqrt(), l.im)).sum();
    Ok((1.0 - sum.norm_sqr() / set.len() as f64).max(0.0))
}

/// Fits the paramagnetic product state `|→…→⟩` (the uniform superposition)
/// starting from small random parameters.
pub fn prepare_initial_state(shape: &Shape, options: &FitOptions) -> Result<(Network, FitReport)> {
    let target = Network::zeros(shape)?;
    let mut psi = init_near_uniform(shape, options.noise, options.seed)?;
    let sites = shape.sites();
    let exact = sites <= FULL_SUMMATION_MAX_SITES;
    let sampler = match &options.sampler {
        Some(s) => s.clone(),
        None if exact => Sampler::FullSummation,
        None => {
            return Err(Error::Config(format!("a sampler is required to prepare a {sites}-site state")));
        }
    };
    let solver = options
        .solver
        .clone()
        .unwrap_or_else(|| default_solver(shape.n_params(), sample_count(&sampler, sites), 1e-6));
    let block = TrotterBlock::identity(sites, 0, 1)?;
    let mut ptvmc = PtvmcOptions::new(sampler, solver);
    ptvmc.cutoff = options.target;
    ptvmc.max_steps = options.max_steps;
    ptvmc.learning_rate = options.learning_rate;
    let report = optimize_towards(&target, &mut psi, &block, &ptvmc, options.seed)?;
    let (infidelity, exact) = if exact { (uniform_infidelity(&psi)?, true) } else { (report.infidelity, false) };
    if infidelity > options.target {
        return Err(Error::Preparation { infidelity, steps: report.steps });
    }
    Ok((psi, FitReport { steps: report.steps, infidelity, exact }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Fnn;
    use crate::solvers::SolverMethod;

    #[test]
    fn learning_rate_schedule() {
        let o = PtvmcOptions::new(Sampler::FullSummation, SolverConfig::new(SolverMethod::Direct, 1e-6));
        assert_eq!(o.learning_rate_at(0), 0.2);
        assert_eq!(o.learning_rate_at(399), 0.2);
        assert_eq!(o.learning_rate_at(400), 0.2 * 0.8);
        assert_eq!(o.learning_rate_at(800), 0.2 * 0.8 * 0.8);
        for m in 0..2000 {
            assert!(o.learning_rate_at(m + 1) <= o.learning_rate_at(m));
        }
    }

    #[test]
    fn identity_block_is_fixed_point() {
        let psi = init_near_uniform(&Shape::Fnn { layers: vec![4, 6, 1] }, 0.3, 3).unwrap();
        let o = PtvmcOptions::new(Sampler::FullSummation, SolverConfig::new(SolverMethod::Direct, 1e-6));
        let block = TrotterBlock::identity(4, 1, 2).unwrap();
        let (out, rep) = ptvmc_block_optimize(&psi, &block, &o, 1).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.steps, 0);
        assert_eq!(out.params(), psi.params());
    }

    #[test]
    fn zero_dt_step_is_identity() {
        let model = TiltedIsing::new(4, 1.0, 0.5, 0.5).unwrap();
        let psi = init_near_uniform(&Shape::rbm(4, 1), 0.2, 3).unwrap();
        let o = PtvmcOptions::new(Sampler::FullSummation, SolverConfig::new(SolverMethod::Direct, 1e-6));
        let schedule = TrotterSchedule::new(&model, 2, 0.0).unwrap();
        let (out, rep) = ptvmc_step(&psi, &schedule, &o, 0).unwrap();
        assert_eq!(out.params(), psi.params());
        assert_eq!(rep.infidelity_sum, 0.0);
        let solver = SolverConfig::new(SolverMethod::Direct, 0.0);
        let (same, _) = tvmc_rk4_step(&psi, &model, 0.0, &Sampler::FullSummation, &solver, 0).unwrap();
        assert_eq!(same.params(), psi.params());
        assert!(tvmc_rk4_step(&psi, &model, -0.1, &Sampler::FullSummation, &solver, 0).is_err());
    }

    #[test]
    fn zero_force_zero_derivative() {
        // uniform state with h_x only is an eigenstate of the field term and
        // has a constant local energy
        let model = TiltedIsing::new(3, 0.0, 1.0, 0.0).unwrap();
        let psi = Network::Fnn(Fnn::zeros(vec![3, 2, 1]).unwrap());
        let solver = SolverConfig::new(SolverMethod::Direct, 0.0);
        let (d, e, _) = tvmc_derivative(&psi, &model, &Sampler::FullSummation, &solver, 0).unwrap();
        assert!((e - c64::new(-3.0, 0.0)).norm() < 1e-14);
        assert!(d.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn rbm_without_noise_is_already_uniform() {
        let opts = FitOptions { noise: 0.0, ..FitOptions::default() };
        let (psi, rep) = prepare_initial_state(&Shape::rbm(6, 1), &opts).unwrap();
        assert_eq!(rep.steps, 0);
        assert!(rep.infidelity < 1e-15);
        assert!(psi.params().iter().all(|p| *p == c64::new(0.0, 0.0)));
    }

    #[test]
    fn noisy_fnn_fit_converges() {
        let opts = FitOptions { noise: 0.05, seed: 2, ..FitOptions::default() };
        let (_, rep) = prepare_initial_state(&Shape::Fnn { layers: vec![6, 12, 6, 1] }, &opts).unwrap();
        assert!(rep.exact);
        assert!(rep.infidelity <= 1e-8);
    }

    #[test]
    fn unreachable_fit_reports_preparation_error() {
        let opts = FitOptions { noise: 0.5, seed: 1, max_steps: 1, ..FitOptions::default() };
        match prepare_initial_state(&Shape::Fnn { layers: vec![5, 5, 1] }, &opts) {
            Err(Error::Preparation { steps, infidelity }) => {
                assert_eq!(steps, 1);
                assert!(infidelity > 1e-8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, &[0, 1]);
        assert_ne!(a, derive_seed(7, &[1, 0]));
        assert_ne!(a, derive_seed(8, &[0, 1]));
        assert_eq!(a, derive_seed(7, &[0, 1]));
    }
}
