//! Exact dense-state reference and figures of merit.
//!
//! Exact evolution uses the full eigendecomposition of `H` up to
//! [`EIGEN_MAX_SITES`] sites and a truncated Taylor series of the sparse
//! Hamiltonian (to machine precision) above that, up to [`EXACT_MAX_SITES`].

use faer::{c64, Mat, Side};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::sampling::full_summation;
use crate::spin::{basis_index, spins_from_index, TiltedIsing, TrotterBlock, TrotterSchedule};

/// Largest chain handled by exact evolution.
pub const EXACT_MAX_SITES: usize = 14;
/// Largest chain diagonalized densely.
pub const EIGEN_MAX_SITES: usize = 10;
/// Log-amplitude differences beyond this are reported as overflow.
pub const LOG_RATIO_LIMIT: f64 = 700.0;

/// A normalized state vector in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    sites: usize,
    amplitudes: Vec<c64>,
}

impl DenseState {
    /// Normalizes `amplitudes`, which must have length `2^sites`.
    pub fn new(sites: usize, mut amplitudes: Vec<c64>) -> Result<Self> {
        if amplitudes.len() != 1usize << sites {
            return Err(Error::Dimension { expected: 1 << sites, got: amplitudes.len() });
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numeric(format!("state norm is {norm}")));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { sites, amplitudes })
    }

    /// `|→…→⟩`.
    pub fn uniform(sites: usize) -> Self {
        let dim = 1usize << sites;
        Self { sites, amplitudes: vec![c64::new((dim as f64).sqrt().recip(), 0.0); dim] }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Dense amplitudes `exp(ln ψ(x) − max Re ln ψ)`, normalized.
pub fn nnqs_to_dense<A: Ansatz>(psi: &A) -> Result<DenseState> {
    let set = full_summation(psi)?;
    let max = set.log_amps().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let amps = set.log_amps().iter().map(|l| (l - max).exp()).collect();
    DenseState::new(psi.n_sites(), amps)
}

fn guard(sites: usize) -> Result<()> {
    if sites > EXACT_MAX_SITES {
        return Err(Error::Resource(format!(
            "exact reference for {sites} sites exceeds the {EXACT_MAX_SITES}-site limit"
        )));
    }
    Ok(())
}

fn diagonal_energies(model: &TiltedIsing) -> Vec<f64> {
    let sites = model.sites();
    let mut x = vec![1i8; sites];
    (0..1usize << sites)
        .map(|i| {
            spins_from_index(i, &mut x);
            model.diagonal(&x)
        })
        .collect()
}

/// Dense real symmetric Hamiltonian matrix.
pub fn dense_hamiltonian(model: &TiltedIsing) -> Result<Mat<f64>> {
    guard(model.sites())?;
    let sites = model.sites();
    let dim = 1usize << sites;
    let diag = diagonal_energies(model);
    let mut h = Mat::<f64>::zeros(dim, dim);
    for (i, &d) in diag.iter().enumerate() {
        h[(i, i)] = d;
        for l in 0..sites {
            h[(i ^ (1 << l), i)] -= model.field_x();
        }
    }
    Ok(h)
}

/// `out = H ψ` without forming `H`.
fn apply_hamiltonian(model: &TiltedIsing, diag: &[f64], psi: &[c64], out: &mut [c64]) {
    let sites = model.sites();
    let hx = model.field_x();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = psi[i] * diag[i];
        if hx != 0.0 {
            for l in 0..sites {
                acc -= psi[i ^ (1 << l)] * hx;
            }
        }
        *o = acc;
    }
}

enum Backend {
    Eigen { vectors: Mat<f64>, values: Vec<f64> },
    Taylor { diag: Vec<f64>, bound: f64 },
}

/// Reusable `e^{−iHt}` for one model.
pub struct ExactPropagator {
    model: TiltedIsing,
    backend: Backend,
}

impl ExactPropagator {
    pub fn new(model: &TiltedIsing) -> Result<Self> {
        guard(model.sites())?;
        let backend = if model.sites() <= EIGEN_MAX_SITES {
            let h = dense_hamiltonian(model)?;
            let eig = h
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Numeric(format!("Hamiltonian diagonalization failed: {e:?}")))?;
            let values = (0..h.nrows()).map(|k| eig.S()[k]).collect();
            Backend::Eigen { vectors: eig.U().to_owned(), values }
        } else {
            let diag = diagonal_energies(model);
            let max_diag = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let bound = max_diag + model.sites() as f64 * model.field_x().abs();
            Backend::Taylor { diag, bound }
        };
        Ok(Self { model: model.clone(), backend })
    }

    /// Eigenvalues of `H` when the dense backend is in use.
    pub fn spectrum(&self) -> Option<&[f64]> {
        match &self.backend {
            Backend::Eigen { values, .. } => Some(values),
            Backend::Taylor { .. } => None,
        }
    }

    /// `e^{−iHt} ψ`.
    pub fn evolve(&self, psi: &DenseState, t: f64) -> Result<DenseState> {
        if psi.sites() != self.model.sites() {
            return Err(Error::Dimension { expected: self.model.sites(), got: psi.sites() });
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let amps = match &self.backend {
            Backend::Eigen { vectors, values } => {
                let n = values.len();
                let re = Mat::from_fn(n, 1, |i, _| psi.amplitudes[i].re);
                let im = Mat::from_fn(n, 1, |i, _| psi.amplitudes[i].im);
                let (cr, ci) = (vectors.transpose() * &re, vectors.transpose() * &im);
                let phased: Vec<c64> =
                    (0..n).map(|k| c64::new(cr[(k, 0)], ci[(k, 0)]) * c64::from_polar(1.0, -values[k] * t)).collect();
                let pr = Mat::from_fn(n, 1, |k, _| phased[k].re);
                let pi = Mat::from_fn(n, 1, |k, _| phased[k].im);
                let (or, oi) = (vectors * &pr, vectors * &pi);
                (0..n).map(|i| c64::new(or[(i, 0)], oi[(i, 0)])).collect()
            }
            Backend::Taylor { diag, bound } => self.taylor(diag, *bound, psi.amplitudes(), t),
        };
        DenseState::new(psi.sites(), amps)
    }

    fn taylor(&self, diag: &[f64], bound: f64, psi: &[c64], t: f64) -> Vec<c64> {
        let substeps = ((bound * t.abs()).ceil() as usize).max(1);
        let tau = t / substeps as f64;
        let mut state = psi.to_vec();
        let mut term = vec![c64::new(0.0, 0.0); psi.len()];
        let mut next = term.clone();
        for _ in 0..substeps {
            term.copy_from_slice(&state);
            for k in 1..200 {
                apply_hamiltonian(&self.model, diag, &term, &mut next);
                let factor = c64::new(0.0, -tau / k as f64);
                let mut size = 0.0f64;
                for (s, (tm, nx)) in state.iter_mut().zip(term.iter_mut().zip(&next)) {
                    *tm = nx * factor;
                    *s += *tm;
                    size = size.max(tm.norm());
                }
                if size < 1e-18 {
                    break;
                }
            }
        }
        state
    }

    /// States at `t = 0, dt, …, n_steps·dt`, each propagated from `ψ₀`.
    pub fn trajectory(&self, psi0: &DenseState, dt: f64, n_steps: usize) -> Result<Vec<DenseState>> {
        (0..=n_steps).map(|k| self.evolve(psi0, k as f64 * dt)).collect()
    }
}

/// `e^{−iHt} ψ₀`.
pub fn exact_evolve(model: &TiltedIsing, psi0: &DenseState, t: f64) -> Result<DenseState> {
    ExactPropagator::new(model)?.evolve(psi0, t)
}

/// Applies a block unitary in place.
pub fn apply_block(state: &mut DenseState, block: &TrotterBlock) -> Result<()> {
    let sites = state.sites();
    if block.start() + block.span() > sites {
        return Err(Error::Range("block exceeds the chain".into()));
    }
    let dim = block.dim();
    let shift = block.index_shift(sites);
    let mask = (dim - 1) << shift;
    let u = block.unitary();
    let mut gathered = vec![c64::new(0.0, 0.0); dim];
    for base in 0..state.amplitudes.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, g) in gathered.iter_mut().enumerate() {
            *g = state.amplitudes[base | (s << shift)];
        }
        for r in 0..dim {
            let v: c64 = (0..dim).map(|s| u[(r, s)] * gathered[s]).sum();
            state.amplitudes[base | (r << shift)] = v;
        }
    }
    Ok(())
}

/// One full Trotter step.
pub fn apply_schedule(state: &mut DenseState, schedule: &TrotterSchedule) -> Result<()> {
    for block in schedule.iter() {
        apply_block(state, block)?;
    }
    Ok(())
}

/// The `2^L × 2^L` operator of one Trotter step.
pub fn schedule_operator(schedule: &TrotterSchedule, sites: usize) -> Result<Mat<c64>> {
    guard(sites)?;
    let dim = 1usize << sites;
    let mut op = Mat::<c64>::zeros(dim, dim);
    for j in 0..dim {
        let mut e = vec![c64::new(0.0, 0.0); dim];
        e[j] = c64::new(1.0, 0.0);
        let mut st = DenseState { sites, amplitudes: e };
        apply_schedule(&mut st, schedule)?;
        for i in 0..dim {
            op[(i, j)] = st.amplitudes[i];
        }
    }
    Ok(op)
}

/// Dense `e^{−iHt}` for the model.
pub fn exact_operator(model: &TiltedIsing, t: f64) -> Result<Mat<c64>> {
    let h = dense_hamiltonian(model)?;
    let hc = Mat::from_fn(h.nrows(), h.ncols(), |i, j| c64::new(h[(i, j)], 0.0));
    crate::linalg::expm_hermitian(hc.as_ref(), t)
}

/// `|1 − |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)|` for unnormalized vectors.
pub fn state_infidelity(a: &[c64], b: &[c64]) -> f64 {
    let overlap: c64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    (1.0 - overlap.norm_sqr() / (na * nb)).abs()
}

/// Infidelity of the network state with an exact reference.
pub fn exact_infidelity<A: Ansatz>(psi: &A, reference: &DenseState) -> Result<f64> {
    if psi.n_sites() != reference.sites() {
        return Err(Error::Dimension { expected: reference.sites(), got: psi.n_sites() });
    }
    let dense = nnqs_to_dense(psi)?;
    Ok(state_infidelity(dense.amplitudes(), reference.amplitudes()))
}

fn site_bit(sites: usize, l: usize) -> usize {
    1 << (sites - 1 - l)
}

pub fn dense_sigma_z(state: &DenseState, l: usize) -> f64 {
    let bit = site_bit(state.sites, l);
    state.amplitudes.iter().enumerate().map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum()
}

pub fn dense_sigma_x(state: &DenseState, l: usize) -> f64 {
    let bit = site_bit(state.sites, l);
    state.amplitudes.iter().enumerate().map(|(i, a)| (a.conj() * state.amplitudes[i ^ bit]).re).sum()
}

pub fn dense_energy(model: &TiltedIsing, state: &DenseState) -> f64 {
    let diag = diagonal_energies(model);
    let mut h_psi = vec![c64::new(0.0, 0.0); state.amplitudes.len()];
    apply_hamiltonian(model, &diag, &state.amplitudes, &mut h_psi);
    state.amplitudes.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Running trapezoidal integral on a uniform grid; `out[0] = 0`.
pub fn integrate_series(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (values[k - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Basis indices by descending probability, ties by ascending index; the
/// first entry is the most probable configuration.
pub fn ranked_configurations(state: &DenseState, n_max: usize) -> Result<Vec<usize>> {
    if n_max > state.amplitudes.len() {
        return Err(Error::Range(format!("rank {n_max} exceeds the {} configurations", state.amplitudes.len())));
    }
    let probs = state.probabilities();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order.truncate(n_max);
    Ok(order)
}

/// `(A_n, D_n)` from the two log-amplitudes. `A_n` is `+∞` when the
/// log-difference exceeds [`LOG_RATIO_LIMIT`].
pub fn ratio_and_phase(log_xm: c64, log_yn: c64) -> (f64, f64) {
    let diff = log_xm - log_yn;
    let ratio = if diff.re > LOG_RATIO_LIMIT { f64::INFINITY } else { diff.re.exp() };
    let tau = std::f64::consts::TAU;
    let d = (log_xm.im.rem_euclid(tau) - log_yn.im.rem_euclid(tau)).abs();
    (ratio, d.min(tau - d))
}

/// `(A_n, D_n)` of a network state for configurations given as basis indices.
pub fn amplitude_ratio_and_phase_distance<A: Ansatz>(psi: &A, x_m: usize, y_n: usize) -> Result<(f64, f64)> {
    let sites = psi.n_sites();
    if x_m >> sites != 0 || y_n >> sites != 0 {
        return Err(Error::Range("configuration index outside the basis".into()));
    }
    let mut x = vec![1i8; sites];
    spins_from_index(x_m, &mut x);
    let lx = psi.log_amplitude(&x);
    spins_from_index(y_n, &mut x);
    let ly = psi.log_amplitude(&x);
    Ok(ratio_and_phase(lx, ly))
}

/// `(A_n, D_n)` of a dense state.
pub fn dense_ratio_and_phase(state: &DenseState, x_m: usize, y_n: usize) -> (f64, f64) {
    let log = |z: c64| if z.norm() == 0.0 { c64::new(f64::NEG_INFINITY, 0.0) } else { z.ln() };
    let (a, b) = (state.amplitudes[x_m], state.amplitudes[y_n]);
    if b.norm() == 0.0 {
        return (f64::INFINITY, ratio_and_phase(log(a), c64::new(0.0, 0.0)).1);
    }
    ratio_and_phase(log(a), log(b))
}

/// Index of a spin configuration, re-exported for merit bookkeeping.
pub fn configuration_index(spins: &[i8]) -> usize {
    basis_index(spins)
}

/// Figures of merit over a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MeritSeries {
    pub times: Vec<f64>,
    /// `I_e(t)`; empty when no exact reference exists.
    pub exact_infidelity: Vec<f64>,
    /// `𝓘_e(t)`.
    pub integrated_infidelity: Vec<f64>,
    /// `R(t)`.
    pub accumulated_error: Vec<f64>,
    /// Tracked ranks `n` (1-based).
    pub ranks: Vec<usize>,
    /// `A_n(t)`, one row per time.
    pub amplitude_ratio: Vec<Vec<f64>>,
    /// `D_n(t)`, one row per time.
    pub phase_distance: Vec<Vec<f64>>,
}

impl MeritSeries {
    /// Integrates `I_e` and the per-step block sums. `step_sums[k]` is the
    /// `Σ_l I` of the step ending at `times[k + 1]`; the integrand of `R` is
    /// taken as zero at `t = 0`.
    pub fn integrate(times: Vec<f64>, exact_infidelity: Vec<f64>, step_sums: &[f64], dt: f64) -> Self {
        let integrated_infidelity = integrate_series(&exact_infidelity, dt);
        let mut integrand = vec![0.0];
        integrand.extend_from_slice(step_sums);
        let accumulated_error = integrate_series(&integrand, dt);
        Self {
            times,
            exact_infidelity,
            integrated_infidelity,
            accumulated_error,
            ranks: Vec::new(),
            amplitude_ratio: Vec::new(),
            phase_distance: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{init_near_uniform, Network, Shape};

    #[test]
    fn uniform_network_to_dense() {
        let net = Network::zeros(&Shape::rbm(4, 2)).unwrap();
        let d = nnqs_to_dense(&net).unwrap();
        assert!(d.amplitudes().iter().all(|a| (a - c64::new(0.25, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn global_phase_shift_invariance() {
        let mut net = init_near_uniform(&Shape::Fnn { layers: vec![4, 3, 1] }, 0.4, 1).unwrap();
        let reference = nnqs_to_dense(&net).unwrap();
        let last = net.n_params() - 1;
        net.params_mut()[last] += c64::new(3.0, 1.3);
        assert!(exact_infidelity(&net, &reference).unwrap() < 1e-12);
    }

    #[test]
    fn two_level_infidelity() {
        let a = 0.37f64;
        let e = vec![c64::new(1.0, 0.0), c64::new(0.0, 0.0)];
        let p = vec![c64::new(a.cos(), 0.0), c64::new(0.0, a.sin())];
        assert!((state_infidelity(&p, &e) - a.sin().powi(2)).abs() < 1e-15);
        assert!((state_infidelity(&[c64::new(0.0, 0.0), c64::new(1.0, 0.0)], &e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_zero_time_and_eigenstate() {
        let model = TiltedIsing::new(3, 1.0, 0.5, 0.5).unwrap();
        let prop = ExactPropagator::new(&model).unwrap();
        let psi = DenseState::uniform(3);
        assert_eq!(prop.evolve(&psi, 0.0).unwrap(), psi);
        // h_x only: the uniform state is the ground state with E = -L h_x
        let field = TiltedIsing::new(3, 0.0, 1.0, 0.0).unwrap();
        let out = exact_evolve(&field, &psi, 0.7).unwrap();
        let phase = c64::from_polar(1.0, 3.0 * 0.7);
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b * phase).norm() < 1e-13);
        }
    }

    #[test]
    fn taylor_matches_eigen() {
        let model = TiltedIsing::new(6, 1.0, 0.5, 0.5).unwrap();
        let net = init_near_uniform(&Shape::rbm(6, 1), 0.5, 3).unwrap();
        let psi = nnqs_to_dense(&net).unwrap();
        let prop = ExactPropagator::new(&model).unwrap();
        let a = prop.evolve(&psi, 1.3).unwrap();
        let diag = diagonal_energies(&model);
        let b = prop.taylor(&diag, 10.0, psi.amplitudes(), 1.3);
        for (x, y) in a.amplitudes().iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn propagation_guard() {
        let model = TiltedIsing::new(15, 1.0, 0.5, 0.5).unwrap();
        assert!(matches!(ExactPropagator::new(&model), Err(Error::Resource(_))));
    }

    #[test]
    fn trapezoid_examples() {
        let ones = vec![1.0; 21];
        assert!((integrate_series(&ones, 0.1)[20] - 2.0).abs() < 1e-14);
        assert!(integrate_series(&[0.0; 5], 0.1).iter().all(|&v| v == 0.0));
        let ramp: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        assert!((integrate_series(&ramp, 0.1)[10] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ranking_examples() {
        let s = DenseState::new(2, vec![c64::new(0.8, 0.0), c64::new(0.6, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 0.0)])
            .unwrap();
        assert_eq!(ranked_configurations(&s, 2).unwrap(), vec![0, 1]);
        assert_eq!(ranked_configurations(&DenseState::uniform(3), 8).unwrap(), (0..8).collect::<Vec<_>>());
        assert!(ranked_configurations(&s, 5).is_err());
    }

    #[test]
    fn ratio_and_phase_examples() {
        let (a, d) = ratio_and_phase(c64::new(0.0, std::f64::consts::FRAC_PI_2), c64::new(0.0, 0.0));
        assert!((a - 1.0).abs() < 1e-15 && (d - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let (_, d) = ratio_and_phase(c64::new(0.0, 1.5 * std::f64::consts::PI), c64::new(0.0, 0.0));
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        let (a, _) = ratio_and_phase(c64::new(800.0, 0.0), c64::new(0.0, 0.0));
        assert!(a.is_infinite());
    }

    #[test]
    fn dense_observables_of_uniform_state() {
        let s = DenseState::uniform(4);
        let model = TiltedIsing::new(4, 1.0, 0.5, 0.2).unwrap();
        for l in 0..4 {
            assert!((dense_sigma_x(&s, l) - 1.0).abs() < 1e-14);
            assert!(dense_sigma_z(&s, l).abs() < 1e-14);
        }
        assert!((dense_energy(&model, &s) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn merit_series_accumulates() {
        let m = MeritSeries::integrate(vec![0.0, 0.1, 0.2], vec![0.0, 0.1, 0.2], &[1.0, 1.0], 0.1);
        assert!((m.integrated_infidelity[2] - 0.02).abs() < 1e-15);
        assert!((m.accumulated_error[2] - 0.15).abs() < 1e-15);
    }
}
