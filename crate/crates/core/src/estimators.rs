//! Weighted estimators over a [`SampleSet`].
//!
//! Every estimator is a weighted mean `Σ_k w_k g(x_k)`, with `w_k = 1/N_s`
//! for Monte Carlo samples and the exact probabilities under full
//! summation. Amplitude ratios are always taken as `exp(ln ψ(y) − ln ψ(x))`.
//!
//! The auxiliary matrix is
//! `X_{m,k} = √w_k · (O_m(x_k) − ⟨O_m⟩)*` with `O_m = ∂ ln ψ / ∂θ_m`, so that
//! `S = X X†` and a force `F_m = ⟨O*_m g⟩ − ⟨O*_m⟩⟨g⟩` equals `X f` with
//! `f_k = √w_k (g(x_k) − ⟨g⟩)`.

use faer::{c64, ColRef, Mat, MatRef};
use rayon::prelude::*;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::sampling::{SampleMode, SampleSet};
use crate::spin::{basis_index, TiltedIsing, TrotterBlock};

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

fn require_nonempty(samples: &SampleSet) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Estimation("sample set is empty".into()));
    }
    Ok(())
}

/// Weighted mean `Σ_k w_k v_k`. Zero-weight terms are skipped, so an
/// overflowing local value on a configuration of vanishing probability
/// cannot poison the sum.
pub fn weighted_mean(weights: &[f64], values: &[c64]) -> c64 {
    weights.iter().zip(values).filter(|(&w, _)| w > 0.0).map(|(&w, &v)| v * w).sum()
}

/// Source of `ln ψ` for configurations near the samples: the network itself
/// or, under full summation, a table indexed by basis index.
enum LogSource<'a, A> {
    Network(&'a A),
    Table(&'a [c64]),
}

impl<A: Ansatz> LogSource<'_, A> {
    fn for_samples<'a>(ansatz: &'a A, samples: &'a SampleSet) -> LogSource<'a, A> {
        match samples.lookup_table() {
            Some(table) => LogSource::Table(table),
            None => LogSource::Network(ansatz),
        }
    }

    fn eval(&self, spins: &[i8], sites: usize) -> Vec<c64> {
        match self {
            LogSource::Network(a) => a.log_amplitudes(spins),
            LogSource::Table(t) => spins.chunks_exact(sites).map(|x| t[basis_index(x)]).collect(),
        }
    }
}

/// Single-spin flips of every sample, flat: sample-major, then site.
fn flipped_neighbours(samples: &SampleSet) -> Vec<i8> {
    let sites = samples.sites();
    let mut out = Vec::with_capacity(samples.len() * sites * sites);
    for x in samples.configs() {
        for l in 0..sites {
            let at = out.len();
            out.extend_from_slice(x);
            out[at + l] = -out[at + l];
        }
    }
    out
}

fn local_energies_from(model: &TiltedIsing, samples: &SampleSet, flipped_logs: &[c64]) -> Vec<c64> {
    let sites = samples.sites();
    samples
        .configs()
        .zip(samples.log_amps())
        .enumerate()
        .map(|(k, (x, &lx))| {
            let mut e = c64::new(model.diagonal(x), 0.0);
            if model.field_x() != 0.0 {
                for &ly in &flipped_logs[k * sites..(k + 1) * sites] {
                    e -= model.field_x() * (ly - lx).exp();
                }
            }
            e
        })
        .collect()
}

/// `E_loc(x) = Σ_y H_{x,y} ψ(y)/ψ(x)`.
pub fn local_energy<A: Ansatz>(ansatz: &A, model: &TiltedIsing, x: &[i8]) -> Result<c64> {
    model.check(x)?;
    if ansatz.n_sites() != model.sites() {
        return Err(Error::Dimension { expected: model.sites(), got: ansatz.n_sites() });
    }
    let lx = ansatz.log_amplitude(x);
    let mut e = c64::new(model.diagonal(x), 0.0);
    if model.field_x() != 0.0 {
        let mut y = x.to_vec();
        for l in 0..x.len() {
            y[l] = -y[l];
            e -= model.field_x() * (ansatz.log_amplitude(&y) - lx).exp();
            y[l] = -y[l];
        }
    }
    Ok(e)
}

/// Local energies of every sample.
pub fn local_energies<A: Ansatz>(ansatz: &A, model: &TiltedIsing, samples: &SampleSet) -> Vec<c64> {
    let flips = if model.field_x() != 0.0 {
        LogSource::for_samples(ansatz, samples).eval(&flipped_neighbours(samples), samples.sites())
    } else {
        Vec::new()
    };
    local_energies_from(model, samples, &flips)
}

/// Observables with a diagonal or single-flip sparse local estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    /// `σᶻ_l`, 0-based site.
    SigmaZ(usize),
    /// `σˣ_l`, 0-based site.
    SigmaX(usize),
    Energy,
}

/// `⟨O⟩ ≈ Σ_k w_k O_loc(x_k)`.
pub fn expectation<A: Ansatz>(
    observable: Observable,
    samples: &SampleSet,
    ansatz: &A,
    model: &TiltedIsing,
) -> Result<c64> {
    require_nonempty(samples)?;
    let sites = samples.sites();
    let check_site = |l: usize| {
        if l >= sites {
            Err(Error::Range(format!("site {} outside chain of {sites}", l + 1)))
        } else {
            Ok(())
        }
    };
    let values: Vec<c64> = match observable {
        Observable::SigmaZ(l) => {
            check_site(l)?;
            samples.configs().map(|x| c64::new(f64::from(x[l]), 0.0)).collect()
        }
        Observable::SigmaX(l) => {
            check_site(l)?;
            let mut flipped = samples.spins().to_vec();
            for x in flipped.chunks_exact_mut(sites) {
                x[l] = -x[l];
            }
            let logs = LogSource::for_samples(ansatz, samples).eval(&flipped, sites);
            logs.iter().zip(samples.log_amps()).map(|(ly, lx)| (ly - lx).exp()).collect()
        }
        Observable::Energy => {
            if model.sites() != sites {
                return Err(Error::Dimension { expected: model.sites(), got: sites });
            }
            local_energies(ansatz, model, samples)
        }
    };
    Ok(weighted_mean(samples.weights(), &values))
}

/// Centered, conjugated, `√w`-scaled log-derivative matrix (`N_p × N_s`).
#[derive(Clone, Debug)]
pub struct XMatrix {
    mat: Mat<c64>,
    mean: Vec<c64>,
}

impl XMatrix {
    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn n_params(&self) -> usize {
        self.mat.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.mat.ncols()
    }

    /// Weighted mean `⟨O_m⟩` of the log-derivatives.
    pub fn mean(&self) -> &[c64] {
        &self.mean
    }

    /// Geometric tensor `S = X X†`.
    pub fn geometric_tensor(&self) -> Mat<c64> {
        &self.mat * self.mat.adjoint()
    }

    /// `X f`.
    pub fn apply(&self, f: &[c64]) -> Vec<c64> {
        let y = &self.mat * ColRef::from_slice(f);
        y.iter().copied().collect()
    }
}

/// Builds `X` from the samples' log-derivatives.
pub fn build_x_matrix<A: Ansatz>(samples: &SampleSet, ansatz: &A) -> Result<XMatrix> {
    require_nonempty(samples)?;
    if samples.sites() != ansatz.n_sites() {
        return Err(Error::Dimension { expected: ansatz.n_sites(), got: samples.sites() });
    }
    let np = ansatz.n_params();
    let ns = samples.len();
    let mut buf = vec![zero(); np * ns];
    buf.par_chunks_mut(np).zip(samples.spins().par_chunks(samples.sites())).for_each(|(col, x)| {
        ansatz.log_derivatives_into(x, col);
    });
    let weights = samples.weights();
    let mut mean = vec![zero(); np];
    for (col, &w) in buf.chunks_exact(np).zip(weights).filter(|(_, &w)| w > 0.0) {
        for (m, &o) in mean.iter_mut().zip(col) {
            *m += o * w;
        }
    }
    for (col, &w) in buf.chunks_exact_mut(np).zip(weights) {
        if w > 0.0 {
            let s = w.sqrt();
            for (o, &m) in col.iter_mut().zip(&mean) {
                *o = (*o - m).conj() * s;
            }
        } else {
            col.fill(zero());
        }
    }
    let mat = MatRef::from_column_major_slice(&buf, np, ns).to_owned();
    Ok(XMatrix { mat, mean })
}

/// Centered, scaled local quantities `f_k = √w_k (g_k − ⟨g⟩)`.
pub fn centered_force_vector(weights: &[f64], local: &[c64]) -> Vec<c64> {
    let mean = weighted_mean(weights, local);
    weights.iter().zip(local).map(|(&w, &g)| if w > 0.0 { (g - mean) * w.sqrt() } else { zero() }).collect()
}

/// `f` and `F = X f`.
#[derive(Clone, Debug)]
pub struct ForceVector {
    pub f: Vec<c64>,
    pub force: Vec<c64>,
}

/// Everything one tVMC derivative evaluation needs.
#[derive(Clone, Debug)]
pub struct EnergyForce {
    pub energy: c64,
    pub local_energies: Vec<c64>,
    pub x: XMatrix,
    pub force: ForceVector,
}

/// Energy gradient force `F_k = ⟨E_loc O*_k⟩ − ⟨E_loc⟩⟨O*_k⟩`.
pub fn tvmc_force<A: Ansatz>(samples: &SampleSet, ansatz: &A, model: &TiltedIsing) -> Result<EnergyForce> {
    require_nonempty(samples)?;
    let local = local_energies(ansatz, model, samples);
    let energy = weighted_mean(samples.weights(), &local);
    let x = build_x_matrix(samples, ansatz)?;
    let f = centered_force_vector(samples.weights(), &local);
    let force = x.apply(&f);
    Ok(EnergyForce { energy, local_energies: local, x, force: ForceVector { f, force } })
}

/// Every configuration that differs from the block configuration of each
/// sample only inside the block, flat: sample-major, then local index.
fn block_neighbours(samples: &SampleSet, block: &TrotterBlock) -> Vec<i8> {
    let sites = samples.sites();
    let dim = block.dim();
    let span = block.span();
    let mut out = Vec::with_capacity(samples.len() * dim * sites);
    for x in samples.configs() {
        for s in 0..dim {
            let at = out.len();
            out.extend_from_slice(x);
            for p in 0..span {
                out[at + block.start() + p] = if (s >> (span - 1 - p)) & 1 == 1 { -1 } else { 1 };
            }
        }
    }
    out
}

/// `Σ_{x'} M_{x,x'} ψ_src(x') / ψ_dst(x)` for every sample `x`, where
/// `M` is the block unitary or its adjoint. `src_offset`/`dst_offset` are
/// subtracted from the respective log-amplitudes.
fn block_overlaps<A: Ansatz>(
    samples: &SampleSet,
    source: LogSource<'_, A>,
    block: &TrotterBlock,
    adjoint: bool,
    src_offset: f64,
    dst_offset: f64,
) -> Vec<c64> {
    let sites = samples.sites();
    let dim = block.dim();
    let u = block.unitary();
    let element = |a: usize, b: usize| if adjoint { u[(b, a)].conj() } else { u[(a, b)] };
    let shift = block.index_shift(sites);
    let mask = (dim - 1) << shift;
    match source {
        LogSource::Table(table) => samples
            .configs()
            .zip(samples.log_amps())
            .map(|(x, &l_dst)| {
                let idx = basis_index(x);
                let row = (idx & mask) >> shift;
                let base = idx & !mask;
                let mut acc = zero();
                for s in 0..dim {
                    let v = element(row, s);
                    if v != zero() {
                        acc += v * (table[base | (s << shift)] - src_offset - (l_dst - dst_offset)).exp();
                    }
                }
                acc
            })
            .collect(),
        LogSource::Network(net) => {
            let neighbours = block_neighbours(samples, block);
            let logs = net.log_amplitudes(&neighbours);
            samples
                .configs()
                .zip(samples.log_amps())
                .enumerate()
                .map(|(k, (x, &l_dst))| {
                    let row = block.local_index(x);
                    (0..dim)
                        .map(|s| element(row, s) * (logs[k * dim + s] - src_offset - (l_dst - dst_offset)).exp())
                        .sum()
                })
                .collect()
        }
    }
}

/// Local temporal overlaps at `x`:
/// `E^U_{ψtψt'}(x) = Σ_{x'} U_{x,x'} ψ_t(x')/ψ_{t'}(x)` and
/// `E^U_{ψt'ψt}(x) = Σ_{x'} U†_{x,x'} ψ_{t'}(x')/ψ_t(x)`.
pub fn local_temporal_overlaps<A: Ansatz>(psi_t: &A, psi_tp: &A, block: &TrotterBlock, x: &[i8]) -> Result<(c64, c64)> {
    let sites = psi_t.n_sites();
    if x.len() != sites || psi_tp.n_sites() != sites {
        return Err(Error::Dimension { expected: sites, got: x.len() });
    }
    if block.start() + block.span() > sites {
        return Err(Error::Range("block exceeds the chain".into()));
    }
    let at_x = |a: &A| SampleSet::from_samples(sites, x.to_vec(), vec![a.log_amplitude(x)]);
    let (set_tp, set_t) = (at_x(psi_tp)?, at_x(psi_t)?);
    let fwd = block_overlaps(&set_tp, LogSource::Network(psi_t), block, false, 0.0, 0.0)[0];
    let bwd = block_overlaps(&set_t, LogSource::Network(psi_tp), block, true, 0.0, 0.0)[0];
    Ok((fwd, bwd))
}

/// Overlap `C^U`, its local estimator and the force on `ψ_{t'}`.
#[derive(Clone, Debug)]
pub struct OverlapEstimate {
    /// `C^U`; exact and real under full summation.
    pub overlap: c64,
    /// `E^U_loc(x)` for every `ψ_{t'}` sample.
    pub local: Vec<c64>,
    pub x: XMatrix,
    pub force: ForceVector,
}

impl OverlapEstimate {
    /// `1 − Re C^U` (may be slightly negative from sampling noise).
    pub fn infidelity(&self) -> f64 {
        1.0 - self.overlap.re
    }
}

fn max_re(values: &[c64]) -> f64 {
    values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Estimates `C^U = ⟨ψ_{t'}|U|ψ_t⟩⟨ψ_t|U†|ψ_{t'}⟩ / (⟨ψ_{t'}|ψ_{t'}⟩⟨ψ_t|ψ_t⟩)`
/// and the covariance force `F^U_k = ⟨E^U_loc O*_k⟩ − ⟨E^U_loc⟩⟨O*_k⟩`
/// (the gradient of `C^U` with respect to `θ*` of `ψ_{t'}`).
///
/// `E^U_loc(x) = E^U_{ψtψt'}(x) · Σ_y P_{ψt}(y) E^U_{ψt'ψt}(y)` with `x` drawn
/// from `|ψ_{t'}|²` and `y` from `|ψ_t|²`.
pub fn overlap_and_force<A: Ansatz>(
    psi_t_samples: &SampleSet,
    psi_tp_samples: &SampleSet,
    psi_t: &A,
    psi_tp: &A,
    block: &TrotterBlock,
) -> Result<OverlapEstimate> {
    require_nonempty(psi_t_samples)?;
    require_nonempty(psi_tp_samples)?;
    // Both states may be rescaled independently; C^U is invariant.
    let off_t = max_re(psi_t_samples.log_amps());
    let off_tp = max_re(psi_tp_samples.log_amps());
    let src_t = LogSource::for_samples(psi_t, psi_t_samples);
    let src_tp = LogSource::for_samples(psi_tp, psi_tp_samples);
    let backward = block_overlaps(psi_t_samples, src_tp, block, true, off_tp, off_t);
    let mean_b = weighted_mean(psi_t_samples.weights(), &backward);
    let forward = block_overlaps(psi_tp_samples, src_t, block, false, off_t, off_tp);
    let local: Vec<c64> = forward.iter().map(|&e| e * mean_b).collect();
    let weights = psi_tp_samples.weights();
    let mut overlap = weighted_mean(weights, &local);
    if psi_t_samples.mode() == SampleMode::FullSummation && psi_tp_samples.mode() == SampleMode::FullSummation {
        overlap.im = 0.0;
    }
    let x = build_x_matrix(psi_tp_samples, psi_tp)?;
    let f = centered_force_vector(weights, &local);
    let force = x.apply(&f);
    Ok(OverlapEstimate { overlap, local, x, force: ForceVector { f, force } })
}
