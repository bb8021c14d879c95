//! Configurations distributed as `|ψ(x)|² / Z`.
//!
//! Two producers share the [`SampleSet`] container: single-spin-flip
//! Metropolis chains, and exact enumeration of the whole basis ("full
//! summation") where every configuration carries its exact probability.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::spin::spins_from_index;

/// Largest chain that may be enumerated.
pub const FULL_SUMMATION_MAX_SITES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    MonteCarlo,
    FullSummation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    sites: usize,
    spins: Vec<i8>,
    weights: Vec<f64>,
    log_amps: Vec<c64>,
    mode: SampleMode,
    acceptance: Option<f64>,
}

impl SampleSet {
    /// Monte Carlo set with uniform weights `1/N_s`.
    pub fn from_samples(sites: usize, spins: Vec<i8>, log_amps: Vec<c64>) -> Result<Self> {
        let n = log_amps.len();
        if spins.len() != n * sites {
            return Err(Error::Dimension { expected: n * sites, got: spins.len() });
        }
        if n == 0 {
            return Err(Error::Estimation("sample set is empty".into()));
        }
        let weights = vec![1.0 / n as f64; n];
        Ok(Self { sites, spins, weights, log_amps, mode: SampleMode::MonteCarlo, acceptance: None })
    }

    /// Full-summation set from a table of `ln ψ` in basis order.
    pub fn from_table(sites: usize, log_amps: Vec<c64>) -> Result<Self> {
        if sites > FULL_SUMMATION_MAX_SITES {
            return Err(Error::Resource(format!(
                "full summation over {sites} sites exceeds the {FULL_SUMMATION_MAX_SITES}-site limit"
            )));
        }
        let dim = 1usize << sites;
        if log_amps.len() != dim {
            return Err(Error::Dimension { expected: dim, got: log_amps.len() });
        }
        let mut spins = vec![0i8; dim * sites];
        for (i, x) in spins.chunks_exact_mut(sites).enumerate() {
            spins_from_index(i, x);
        }
        let weights = probabilities(&log_amps);
        Ok(Self { sites, spins, weights, log_amps, mode: SampleMode::FullSummation, acceptance: None })
    }

    pub fn len(&self) -> usize {
        self.log_amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_amps.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn config(&self, k: usize) -> &[i8] {
        &self.spins[k * self.sites..(k + 1) * self.sites]
    }

    pub fn configs(&self) -> impl Iterator<Item = &[i8]> + '_ {
        self.spins.chunks_exact(self.sites)
    }

    /// Flat spin buffer, `sites` entries per sample.
    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_amps(&self) -> &[c64] {
        &self.log_amps
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    /// Fraction of accepted Metropolis proposals, when sampled.
    pub fn acceptance(&self) -> Option<f64> {
        self.acceptance
    }

    /// For full summation the set is the basis in index order, so `log_amps`
    /// doubles as a lookup table.
    pub fn lookup_table(&self) -> Option<&[c64]> {
        (self.mode == SampleMode::FullSummation).then_some(&self.log_amps[..])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetropolisConfig {
    pub n_samples: usize,
    pub n_chains: usize,
    /// Discarded proposals per chain.
    pub burn_in: usize,
    /// Proposals between kept samples.
    pub thinning: usize,
}

impl MetropolisConfig {
    /// 16 chains, `10·L` sweeps of burn-in and one sweep between samples.
    pub fn with_defaults(n_samples: usize, sites: usize) -> Self {
        Self { n_samples, n_chains: 16, burn_in: 10 * sites * sites, thinning: sites }
    }
}

/// How expectation values are estimated.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampler {
    Metropolis(MetropolisConfig),
    FullSummation,
}

impl Sampler {
    pub fn sample<A: Ansatz>(&self, ansatz: &A, seed: u64) -> Result<SampleSet> {
        match self {
            Sampler::Metropolis(cfg) => metropolis_sample(ansatz, cfg, seed),
            Sampler::FullSummation => full_summation(ansatz),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Sampler::FullSummation)
    }
}

/// Metropolis acceptance probability for moving between configurations with
/// the given log-amplitudes.
pub fn acceptance_probability(log_from: c64, log_to: c64) -> f64 {
    let log_ratio = 2.0 * (log_to.re - log_from.re);
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

struct ChainOutput {
    spins: Vec<i8>,
    log_amps: Vec<c64>,
    accepted: usize,
    proposed: usize,
}

fn run_chain<A: Ansatz>(ansatz: &A, n_keep: usize, cfg: &MetropolisConfig, seed: u64, chain: usize) -> ChainOutput {
    let sites = ansatz.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    let mut x: Vec<i8> = (0..sites).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let mut log_x = ansatz.log_amplitude(&x);
    let mut out = ChainOutput {
        spins: Vec::with_capacity(n_keep * sites),
        log_amps: Vec::with_capacity(n_keep),
        accepted: 0,
        proposed: 0,
    };
    let thinning = cfg.thinning.max(1);
    let total = cfg.burn_in + n_keep * thinning;
    for step in 1..=total {
        let site = rng.random_range(0..sites);
        x[site] = -x[site];
        let log_new = ansatz.log_amplitude(&x);
        let p = acceptance_probability(log_x, log_new);
        if p >= 1.0 || rng.random::<f64>() < p {
            log_x = log_new;
            out.accepted += 1;
        } else {
            x[site] = -x[site];
        }
        out.proposed += 1;
        if step > cfg.burn_in && (step - cfg.burn_in) % thinning == 0 {
            out.spins.extend_from_slice(&x);
            out.log_amps.push(log_x);
        }
    }
    out
}

/// Samples `n_samples` configurations split over independent chains.
///
/// Chain `c` draws from the ChaCha stream `c` of `seed`, so the output is
/// reproducible for a fixed `(seed, n_chains)`.
pub fn metropolis_sample<A: Ansatz>(ansatz: &A, cfg: &MetropolisConfig, seed: u64) -> Result<SampleSet> {
    if cfg.n_samples == 0 || cfg.n_chains == 0 {
        return Err(Error::Config("Metropolis sampling needs at least one sample and one chain".into()));
    }
    let chains = cfg.n_chains.min(cfg.n_samples);
    let (per, extra) = (cfg.n_samples / chains, cfg.n_samples % chains);
    let outputs: Vec<ChainOutput> = (0..chains)
        .into_par_iter()
        .map(|c| run_chain(ansatz, per + usize::from(c < extra), cfg, seed, c))
        .collect();
    let sites = ansatz.n_sites();
    let mut spins = Vec::with_capacity(cfg.n_samples * sites);
    let mut log_amps = Vec::with_capacity(cfg.n_samples);
    let (mut accepted, mut proposed) = (0, 0);
    for o in outputs {
        spins.extend(o.spins);
        log_amps.extend(o.log_amps);
        accepted += o.accepted;
        proposed += o.proposed;
    }
    let mut set = SampleSet::from_samples(sites, spins, log_amps)?;
    set.acceptance = Some(accepted as f64 / proposed.max(1) as f64);
    Ok(set)
}

/// All `2^L` configurations in basis order with exact probabilities.
pub fn full_summation<A: Ansatz>(ansatz: &A) -> Result<SampleSet> {
    let sites = ansatz.n_sites();
    if sites > FULL_SUMMATION_MAX_SITES {
        return Err(Error::Resource(format!(
            "full summation over {sites} sites exceeds the {FULL_SUMMATION_MAX_SITES}-site limit"
        )));
    }
    let dim = 1usize << sites;
    let mut spins = vec![0i8; dim * sites];
    for (i, x) in spins.chunks_exact_mut(sites).enumerate() {
        spins_from_index(i, x);
    }
    let log_amps = ansatz.log_amplitudes(&spins);
    let weights = probabilities(&log_amps);
    Ok(SampleSet { sites, spins, weights, log_amps, mode: SampleMode::FullSummation, acceptance: None })
}

/// Normalized `|ψ|²` from log-amplitudes, shifted by the largest real part.
pub fn probabilities(log_amps: &[c64]) -> Vec<f64> {
    let max = log_amps.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_amps.iter().map(|z| (2.0 * (z.re - max)).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{init_near_uniform, Network, Shape};

    #[test]
    fn uniform_full_summation() {
        let net = Network::zeros(&Shape::rbm(3, 1)).unwrap();
        let set = full_summation(&net).unwrap();
        assert_eq!(set.len(), 8);
        assert!(set.weights().iter().all(|&w| (w - 0.125).abs() < 1e-15));
        assert_eq!(set.config(5), &[-1, 1, -1]);
    }

    #[test]
    fn full_summation_normalized() {
        let net = init_near_uniform(&Shape::rbm(10, 2), 0.5, 3).unwrap();
        let set = full_summation(&net).unwrap();
        assert_eq!(set.len(), 1024);
        assert!((set.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_summation_guard() {
        let net = Network::zeros(&Shape::rbm(21, 1)).unwrap();
        assert!(matches!(full_summation(&net), Err(Error::Resource(_))));
    }

    #[test]
    fn uniform_state_always_accepts() {
        let net = Network::zeros(&Shape::fnn_default(6)).unwrap();
        let cfg = MetropolisConfig { n_samples: 4000, n_chains: 4, burn_in: 60, thinning: 6 };
        let set = metropolis_sample(&net, &cfg, 9).unwrap();
        assert_eq!(set.acceptance(), Some(1.0));
        assert_eq!(set.len(), 4000);
        // ⟨σᶻ_1⟩ = 0 within 4 standard errors; consecutive kept samples have
        // correlation ρ = (1 − 2/L)^L, inflating the variance by (1+ρ)/(1−ρ)
        let rho = (2.0f64 / 3.0).powi(6);
        let stderr = ((1.0 + rho) / (1.0 - rho) / 4000.0).sqrt();
        let m: f64 = set.configs().map(|x| f64::from(x[0])).sum::<f64>() / 4000.0;
        assert!(m.abs() < 4.0 * stderr, "magnetization {m}");
    }

    #[test]
    fn seeded_sampling_is_bit_identical() {
        let net = init_near_uniform(&Shape::rbm(5, 2), 0.3, 1).unwrap();
        let cfg = MetropolisConfig::with_defaults(500, 5);
        let a = metropolis_sample(&net, &cfg, 77).unwrap();
        let b = metropolis_sample(&net, &cfg, 77).unwrap();
        assert_eq!(a, b);
        let c = metropolis_sample(&net, &cfg, 78).unwrap();
        assert_ne!(a.spins(), c.spins());
    }

    #[test]
    fn detailed_balance_two_sites() {
        let net = init_near_uniform(&Shape::rbm(2, 2), 0.8, 5).unwrap();
        let set = full_summation(&net).unwrap();
        for i in 0..4usize {
            for site in 0..2 {
                let j = i ^ (1 << site);
                let (li, lj) = (set.log_amps()[i], set.log_amps()[j]);
                let lhs = set.weights()[i] * acceptance_probability(li, lj);
                let rhs = set.weights()[j] * acceptance_probability(lj, li);
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_empty_request() {
        let net = Network::zeros(&Shape::rbm(2, 1)).unwrap();
        let cfg = MetropolisConfig { n_samples: 0, n_chains: 1, burn_in: 0, thinning: 1 };
        assert!(metropolis_sample(&net, &cfg, 0).is_err());
    }
}
