//! Variational wave functions with complex parameters.
//!
//! Both networks return `ln ψ(x)`; amplitudes are never formed directly.
//! Parameters are stored as one flat complex vector and all derivatives are
//! holomorphic, `∂ ln ψ / ∂θ_m`.
//!
//! * [`Rbm`]: `ln ψ = Σ_l a_l x_l + Σ_h ln 2cosh(b_h + Σ_l W_{h,l} x_l)`.
//!   Flat layout `[a (L) | b (H) | W (H×L, row-major)]`.
//! * [`Fnn`]: `u⁰ = x`, `uᵏ = Wᵏ f(uᵏ⁻¹) + bᵏ`, `ln ψ = uᴷ` with the odd
//!   polynomial activation `f(u) = u − u³/3 + 2u⁵/15`. The activation also
//!   acts on the ±1 inputs. Flat layout per layer `[Wᵏ (row-major) | bᵏ]`.

use faer::{c64, Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::spin::SpinConfig;

/// Real-part magnitude above which `ln 2cosh` and `tanh` switch to their
/// asymptotic forms.
const LNCOSH_BRANCH: f64 = 20.0;

/// Configurations per batched forward pass.
const BATCH: usize = 2048;

pub fn activation(u: c64) -> c64 {
    let u2 = u * u;
    u * (1.0 - u2 / 3.0 + u2 * u2 * (2.0 / 15.0))
}

fn activation_derivative(u: c64) -> c64 {
    let u2 = u * u;
    1.0 - u2 + u2 * u2 * (2.0 / 3.0)
}

/// `ln(2 cosh z)`, finite for arbitrarily large `|Re z|`.
pub fn ln_2cosh(z: c64) -> c64 {
    if z.re.abs() > LNCOSH_BRANCH {
        let s = z.re.signum();
        // ln(1 + e) ≈ e once |e| < e^{-40}
        s * z + (-2.0 * s * z).exp()
    } else {
        (2.0 * z.cosh()).ln()
    }
}

pub fn stable_tanh(z: c64) -> c64 {
    if z.re.abs() > LNCOSH_BRANCH {
        let s = z.re.signum();
        let e = (-2.0 * s * z).exp();
        s * (1.0 - e) / (1.0 + e)
    } else {
        z.tanh()
    }
}

/// Architecture of a network, enough to rebuild it from a flat vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Rbm { sites: usize, hidden: usize },
    Fnn { layers: Vec<usize> },
}

impl Shape {
    pub fn rbm(sites: usize, alpha: usize) -> Self {
        Shape::Rbm { sites, hidden: alpha * sites }
    }

    /// The default `[L, 4L, 3L, 1]` feed-forward network.
    pub fn fnn_default(sites: usize) -> Self {
        Shape::Fnn { layers: vec![sites, 4 * sites, 3 * sites, 1] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Rbm { sites, hidden } => {
                if *sites == 0 || *hidden == 0 {
                    return Err(Error::Config("RBM needs at least one visible and one hidden unit".into()));
                }
            }
            Shape::Fnn { layers } => {
                if layers.len() < 2 {
                    return Err(Error::Config("FNN needs at least an input and an output layer".into()));
                }
                if layers.iter().any(|&n| n == 0) {
                    return Err(Error::Config("FNN layers must be non-empty".into()));
                }
                if *layers.last().unwrap() != 1 {
                    return Err(Error::Config("FNN output layer must have exactly one node".into()));
                }
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        match self {
            Shape::Rbm { sites, .. } => *sites,
            Shape::Fnn { layers } => layers[0],
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Shape::Rbm { sites, hidden } => sites + hidden + hidden * sites,
            Shape::Fnn { layers } => layers.windows(2).map(|w| w[1] * w[0] + w[1]).sum(),
        }
    }
}

/// Common interface of the variational wave functions.
pub trait Ansatz: Clone + Send + Sync {
    fn shape(&self) -> Shape;

    fn n_sites(&self) -> usize;

    fn n_params(&self) -> usize;

    fn params(&self) -> &[c64];

    fn params_mut(&mut self) -> &mut [c64];

    /// `ln ψ(x)`; `x` must have `n_sites` entries.
    fn log_amplitude(&self, x: &[i8]) -> c64;

    /// Writes `∂ ln ψ(x) / ∂θ` into `out` and returns `ln ψ(x)`.
    fn log_derivatives_into(&self, x: &[i8], out: &mut [c64]) -> c64;

    /// `ln ψ` for a flat buffer of configurations, `n_sites` spins each.
    fn log_amplitudes(&self, spins: &[i8]) -> Vec<c64> {
        spins.chunks_exact(self.n_sites()).map(|x| self.log_amplitude(x)).collect()
    }

    fn set_params(&mut self, params: &[c64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::Dimension { expected: self.n_params(), got: params.len() });
        }
        self.params_mut().copy_from_slice(params);
        Ok(())
    }
}

/// Checked `ln ψ(x)`.
pub fn log_amplitude<A: Ansatz>(ansatz: &A, x: &SpinConfig) -> Result<c64> {
    if x.len() != ansatz.n_sites() {
        return Err(Error::Dimension { expected: ansatz.n_sites(), got: x.len() });
    }
    Ok(ansatz.log_amplitude(x.as_slice()))
}

/// Checked `∂ ln ψ(x) / ∂θ`.
pub fn log_derivatives<A: Ansatz>(ansatz: &A, x: &SpinConfig) -> Result<Vec<c64>> {
    if x.len() != ansatz.n_sites() {
        return Err(Error::Dimension { expected: ansatz.n_sites(), got: x.len() });
    }
    let mut out = vec![c64::new(0.0, 0.0); ansatz.n_params()];
    ansatz.log_derivatives_into(x.as_slice(), &mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rbm {
    sites: usize,
    hidden: usize,
    params: Vec<c64>,
}

impl Rbm {
    pub fn zeros(sites: usize, hidden: usize) -> Self {
        let n = sites + hidden + hidden * sites;
        Self { sites, hidden, params: vec![c64::new(0.0, 0.0); n] }
    }

    pub fn from_flat(sites: usize, hidden: usize, params: Vec<c64>) -> Result<Self> {
        let n = sites + hidden + hidden * sites;
        if params.len() != n {
            return Err(Error::Dimension { expected: n, got: params.len() });
        }
        Ok(Self { sites, hidden, params })
    }

    /// Builds from visible biases, hidden biases and `W` rows (one per hidden unit).
    pub fn from_parts(a: Vec<c64>, b: Vec<c64>, w: Vec<Vec<c64>>) -> Result<Self> {
        let (sites, hidden) = (a.len(), b.len());
        if w.len() != hidden {
            return Err(Error::Dimension { expected: hidden, got: w.len() });
        }
        let mut params = a;
        params.extend(b);
        for row in w {
            if row.len() != sites {
                return Err(Error::Dimension { expected: sites, got: row.len() });
            }
            params.extend(row);
        }
        Ok(Self { sites, hidden, params })
    }

    pub fn parts(&self) -> (Vec<c64>, Vec<c64>, Vec<Vec<c64>>) {
        let (l, h) = (self.sites, self.hidden);
        let a = self.params[..l].to_vec();
        let b = self.params[l..l + h].to_vec();
        let w = self.params[l + h..].chunks_exact(l).map(<[c64]>::to_vec).collect();
        (a, b, w)
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    fn weights(&self) -> &[c64] {
        &self.params[self.sites + self.hidden..]
    }

    fn theta(&self, h: usize, x: &[i8]) -> c64 {
        let row = &self.weights()[h * self.sites..(h + 1) * self.sites];
        let dot: c64 = row.iter().zip(x).map(|(w, &s)| w * f64::from(s)).sum();
        self.params[self.sites + h] + dot
    }
}

impl Ansatz for Rbm {
    fn shape(&self) -> Shape {
        Shape::Rbm { sites: self.sites, hidden: self.hidden }
    }

    fn n_sites(&self) -> usize {
        self.sites
    }

    fn n_params(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> &[c64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [c64] {
        &mut self.params
    }

    fn log_amplitude(&self, x: &[i8]) -> c64 {
        debug_assert_eq!(x.len(), self.sites);
        let visible: c64 = self.params[..self.sites].iter().zip(x).map(|(a, &s)| a * f64::from(s)).sum();
        (0..self.hidden).fold(visible, |acc, h| acc + ln_2cosh(self.theta(h, x)))
    }

    fn log_derivatives_into(&self, x: &[i8], out: &mut [c64]) -> c64 {
        debug_assert_eq!(out.len(), self.params.len());
        let (l, h_count) = (self.sites, self.hidden);
        let mut log_psi = c64::new(0.0, 0.0);
        for (i, &s) in x.iter().enumerate() {
            out[i] = c64::new(f64::from(s), 0.0);
            log_psi += self.params[i] * f64::from(s);
        }
        for h in 0..h_count {
            let theta = self.theta(h, x);
            log_psi += ln_2cosh(theta);
            let t = stable_tanh(theta);
            out[l + h] = t;
            let row = &mut out[l + h_count + h * l..l + h_count + (h + 1) * l];
            for (o, &s) in row.iter_mut().zip(x) {
                *o = t * f64::from(s);
            }
        }
        log_psi
    }

    fn log_amplitudes(&self, spins: &[i8]) -> Vec<c64> {
        let (l, h) = (self.sites, self.hidden);
        let w = MatRef::from_row_major_slice(self.weights(), h, l);
        let mut out = Vec::with_capacity(spins.len() / l);
        for chunk in spins.chunks(BATCH * l) {
            let n = chunk.len() / l;
            let xs = Mat::from_fn(l, n, |i, k| c64::new(f64::from(chunk[k * l + i]), 0.0));
            let theta = w * &xs;
            for k in 0..n {
                let mut acc: c64 = (0..l).map(|i| self.params[i] * xs[(i, k)].re).sum();
                for j in 0..h {
                    acc += ln_2cosh(theta[(j, k)] + self.params[l + j]);
                }
                out.push(acc);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fnn {
    layers: Vec<usize>,
    // (weight offset, bias offset) of every affine map
    offsets: Vec<(usize, usize)>,
    params: Vec<c64>,
}

impl Fnn {
    pub fn zeros(layers: Vec<usize>) -> Result<Self> {
        let shape = Shape::Fnn { layers: layers.clone() };
        shape.validate()?;
        let n = shape.n_params();
        Self::from_flat(layers, vec![c64::new(0.0, 0.0); n])
    }

    pub fn from_flat(layers: Vec<usize>, params: Vec<c64>) -> Result<Self> {
        let shape = Shape::Fnn { layers: layers.clone() };
        shape.validate()?;
        if params.len() != shape.n_params() {
            return Err(Error::Dimension { expected: shape.n_params(), got: params.len() });
        }
        let mut offsets = Vec::with_capacity(layers.len() - 1);
        let mut at = 0;
        for w in layers.windows(2) {
            offsets.push((at, at + w[1] * w[0]));
            at += w[1] * w[0] + w[1];
        }
        Ok(Self { layers, offsets, params })
    }

    /// Builds from per-map `(weight rows, bias)` pairs.
    pub fn from_layers(sites: usize, maps: Vec<(Vec<Vec<c64>>, Vec<c64>)>) -> Result<Self> {
        let mut layers = vec![sites];
        let mut params = Vec::new();
        for (w, b) in maps {
            let fan_in = *layers.last().unwrap();
            if w.len() != b.len() {
                return Err(Error::Dimension { expected: b.len(), got: w.len() });
            }
            for row in &w {
                if row.len() != fan_in {
                    return Err(Error::Dimension { expected: fan_in, got: row.len() });
                }
            }
            layers.push(b.len());
            params.extend(w.into_iter().flatten());
            params.extend(b);
        }
        Self::from_flat(layers, params)
    }

    pub fn to_layers(&self) -> Vec<(Vec<Vec<c64>>, Vec<c64>)> {
        (1..self.layers.len())
            .map(|k| {
                let (wo, bo) = self.offsets[k - 1];
                let (rows, cols) = (self.layers[k], self.layers[k - 1]);
                let w = self.params[wo..bo].chunks_exact(cols).map(<[c64]>::to_vec).collect();
                (w, self.params[bo..bo + rows].to_vec())
            })
            .collect()
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    /// Flat-vector offsets `(weights, biases)` of the map into layer `k` (1-based).
    pub fn layer_offsets(&self, k: usize) -> (usize, usize) {
        self.offsets[k - 1]
    }

    fn affine(&self, k: usize, input: &[c64], out: &mut Vec<c64>) {
        let (wo, bo) = self.offsets[k - 1];
        let (rows, cols) = (self.layers[k], self.layers[k - 1]);
        out.clear();
        for i in 0..rows {
            let row = &self.params[wo + i * cols..wo + (i + 1) * cols];
            let dot: c64 = row.iter().zip(input).map(|(w, a)| w * a).sum();
            out.push(dot + self.params[bo + i]);
        }
    }
}

impl Ansatz for Fnn {
    fn shape(&self) -> Shape {
        Shape::Fnn { layers: self.layers.clone() }
    }

    fn n_sites(&self) -> usize {
        self.layers[0]
    }

    fn n_params(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> &[c64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [c64] {
        &mut self.params
    }

    fn log_amplitude(&self, x: &[i8]) -> c64 {
        debug_assert_eq!(x.len(), self.layers[0]);
        let mut a: Vec<c64> = x.iter().map(|&s| activation(c64::new(f64::from(s), 0.0))).collect();
        let mut u = Vec::new();
        let depth = self.layers.len() - 1;
        for k in 1..=depth {
            self.affine(k, &a, &mut u);
            if k < depth {
                a.clear();
                a.extend(u.iter().map(|&z| activation(z)));
            }
        }
        u[0]
    }

    fn log_derivatives_into(&self, x: &[i8], out: &mut [c64]) -> c64 {
        debug_assert_eq!(out.len(), self.params.len());
        let depth = self.layers.len() - 1;
        // pre[k] = u^k for k >= 1, post[k] = f(u^k) for k < depth
        let mut pre: Vec<Vec<c64>> = Vec::with_capacity(depth + 1);
        let mut post: Vec<Vec<c64>> = Vec::with_capacity(depth);
        let input: Vec<c64> = x.iter().map(|&s| c64::new(f64::from(s), 0.0)).collect();
        post.push(input.iter().map(|&z| activation(z)).collect());
        pre.push(input);
        for k in 1..=depth {
            let mut u = Vec::new();
            self.affine(k, &post[k - 1], &mut u);
            if k < depth {
                post.push(u.iter().map(|&z| activation(z)).collect());
            }
            pre.push(u);
        }
        let log_psi = pre[depth][0];

        let mut delta = vec![c64::new(1.0, 0.0)];
        for k in (1..=depth).rev() {
            let (wo, bo) = self.offsets[k - 1];
            let (rows, cols) = (self.layers[k], self.layers[k - 1]);
            let a = &post[k - 1];
            for i in 0..rows {
                out[bo + i] = delta[i];
                let grad_row = &mut out[wo + i * cols..wo + (i + 1) * cols];
                for (g, &aj) in grad_row.iter_mut().zip(a) {
                    *g = delta[i] * aj;
                }
            }
            if k > 1 {
                let mut next = vec![c64::new(0.0, 0.0); cols];
                for i in 0..rows {
                    let row = &self.params[wo + i * cols..wo + (i + 1) * cols];
                    for (n, w) in next.iter_mut().zip(row) {
                        *n += w * delta[i];
                    }
                }
                for (n, &u) in next.iter_mut().zip(&pre[k - 1]) {
                    *n *= activation_derivative(u);
                }
                delta = next;
            }
        }
        log_psi
    }

    fn log_amplitudes(&self, spins: &[i8]) -> Vec<c64> {
        let l = self.layers[0];
        let depth = self.layers.len() - 1;
        let mut out = Vec::with_capacity(spins.len() / l);
        let f_up = activation(c64::new(1.0, 0.0));
        for chunk in spins.chunks(BATCH * l) {
            let n = chunk.len() / l;
            let mut a = Mat::from_fn(l, n, |i, k| f64::from(chunk[k * l + i]) * f_up);
            for k in 1..=depth {
                let (wo, bo) = self.offsets[k - 1];
                let (rows, cols) = (self.layers[k], self.layers[k - 1]);
                let w = MatRef::from_row_major_slice(&self.params[wo..bo], rows, cols);
                let mut u = w * &a;
                for j in 0..n {
                    for i in 0..rows {
                        let z = u[(i, j)] + self.params[bo + i];
                        u[(i, j)] = if k < depth { activation(z) } else { z };
                    }
                }
                a = u;
            }
            out.extend((0..n).map(|j| a[(0, j)]));
        }
        out
    }
}

/// Either architecture, selected at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Rbm(Rbm),
    Fnn(Fnn),
}

impl Network {
    pub fn zeros(shape: &Shape) -> Result<Self> {
        shape.validate()?;
        Ok(match shape {
            Shape::Rbm { sites, hidden } => Network::Rbm(Rbm::zeros(*sites, *hidden)),
            Shape::Fnn { layers } => Network::Fnn(Fnn::zeros(layers.clone())?),
        })
    }

    pub fn from_flat(shape: &Shape, params: Vec<c64>) -> Result<Self> {
        shape.validate()?;
        Ok(match shape {
            Shape::Rbm { sites, hidden } => Network::Rbm(Rbm::from_flat(*sites, *hidden, params)?),
            Shape::Fnn { layers } => Network::Fnn(Fnn::from_flat(layers.clone(), params)?),
        })
    }
}

macro_rules! delegate {
    ($self:ident, $inner:ident => $e:expr) => {
        match $self {
            Network::Rbm($inner) => $e,
            Network::Fnn($inner) => $e,
        }
    };
}

impl Ansatz for Network {
    fn shape(&self) -> Shape {
        delegate!(self, n => n.shape())
    }

    fn n_sites(&self) -> usize {
        delegate!(self, n => n.n_sites())
    }

    fn n_params(&self) -> usize {
        delegate!(self, n => n.n_params())
    }

    fn params(&self) -> &[c64] {
        delegate!(self, n => n.params())
    }

    fn params_mut(&mut self) -> &mut [c64] {
        delegate!(self, n => n.params_mut())
    }

    fn log_amplitude(&self, x: &[i8]) -> c64 {
        delegate!(self, n => n.log_amplitude(x))
    }

    fn log_derivatives_into(&self, x: &[i8], out: &mut [c64]) -> c64 {
        delegate!(self, n => n.log_derivatives_into(x, out))
    }

    fn log_amplitudes(&self, spins: &[i8]) -> Vec<c64> {
        delegate!(self, n => n.log_amplitudes(spins))
    }
}

/// Network whose parameters are i.i.d. complex Gaussians with
/// `E|θ|² = noise_scale²`; zero noise gives the uniform state.
pub fn init_near_uniform(shape: &Shape, noise_scale: f64, seed: u64) -> Result<Network> {
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::Config(format!("noise scale must be non-negative, got {noise_scale}")));
    }
    let mut net = Network::zeros(shape)?;
    if noise_scale > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_scale / std::f64::consts::SQRT_2).expect("finite std");
        for p in net.params_mut() {
            *p = c64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_configs(sites: usize) -> Vec<Vec<i8>> {
        (0..1usize << sites).map(|i| SpinConfig::from_index(i, sites).into_inner()).collect()
    }

    #[test]
    fn activation_values() {
        assert_eq!(activation(c64::new(0.0, 0.0)), c64::new(0.0, 0.0));
        assert!((activation(c64::new(1.0, 0.0)) - c64::new(0.8, 0.0)).norm() < 1e-15);
        let u = c64::new(0.3, -0.7);
        assert!((activation(-u) + activation(u)).norm() < 1e-15);
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(Shape::rbm(14, 5).n_params(), 14 + 70 + 70 * 14);
        assert_eq!(Shape::fnn_default(14).n_params(), 3277);
        assert_eq!(Shape::Fnn { layers: vec![14, 14, 14, 1] }.n_params(), 435);
        assert_eq!(Shape::Fnn { layers: vec![14, 42, 28, 1] }.n_params(), 1863);
    }

    #[test]
    fn fnn_output_layer_must_be_scalar() {
        assert!(matches!(Fnn::zeros(vec![4, 3, 2]), Err(Error::Config(_))));
    }

    #[test]
    fn zero_rbm_is_h_ln2() {
        let rbm = Rbm::zeros(4, 6);
        for x in all_configs(4) {
            let lp = rbm.log_amplitude(&x);
            assert!((lp - c64::new(6.0 * 2f64.ln(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_fnn_is_one() {
        let fnn = Fnn::zeros(vec![4, 8, 6, 1]).unwrap();
        for x in all_configs(4) {
            assert_eq!(fnn.log_amplitude(&x), c64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_rbm_derivatives() {
        let rbm = Rbm::zeros(3, 2);
        let x = vec![1, -1, 1];
        let mut d = vec![c64::new(9.0, 9.0); rbm.n_params()];
        rbm.log_derivatives_into(&x, &mut d);
        for l in 0..3 {
            assert_eq!(d[l], c64::new(f64::from(x[l]), 0.0));
        }
        assert!(d[3..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rbm_stable_for_huge_theta() {
        let mut rbm = Rbm::zeros(2, 1);
        rbm.params_mut()[2] = c64::new(1e4, 0.3);
        let lp = rbm.log_amplitude(&[1, 1]);
        assert!(lp.re.is_finite() && lp.im.is_finite());
        assert!((lp.re - 1e4).abs() < 1e-9);
        let mut d = vec![c64::new(0.0, 0.0); rbm.n_params()];
        rbm.log_derivatives_into(&[1, -1], &mut d);
        assert!(d.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        rbm.params_mut()[2] = c64::new(-1e4, 0.3);
        assert!(rbm.log_amplitude(&[1, 1]).re.is_finite());
    }

    #[test]
    fn batched_amplitudes_match_single() {
        let shapes = [Shape::rbm(5, 2), Shape::Fnn { layers: vec![5, 7, 4, 1] }];
        for shape in shapes {
            let net = init_near_uniform(&shape, 0.4, 11).unwrap();
            let configs = all_configs(5);
            let flat: Vec<i8> = configs.iter().flatten().copied().collect();
            let batch = net.log_amplitudes(&flat);
            for (x, lp) in configs.iter().zip(batch) {
                assert!((net.log_amplitude(x) - lp).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_init_is_uniform() {
        let rbm = init_near_uniform(&Shape::rbm(3, 2), 0.0, 1).unwrap();
        let fnn = init_near_uniform(&Shape::fnn_default(3), 0.0, 1).unwrap();
        let first = rbm.log_amplitude(&[1, 1, 1]);
        for x in all_configs(3) {
            assert_eq!(rbm.log_amplitude(&x), first);
            assert_eq!(fnn.log_amplitude(&x), c64::new(0.0, 0.0));
        }
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = init_near_uniform(&Shape::fnn_default(4), 0.01, 42).unwrap();
        let b = init_near_uniform(&Shape::fnn_default(4), 0.01, 42).unwrap();
        let c = init_near_uniform(&Shape::fnn_default(4), 0.01, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(init_near_uniform(&Shape::fnn_default(4), -1.0, 0).is_err());
    }

    #[test]
    fn checked_evaluation_rejects_wrong_length() {
        let net = Network::zeros(&Shape::rbm(3, 1)).unwrap();
        let x = SpinConfig::new(vec![1, 1]).unwrap();
        assert!(matches!(log_amplitude(&net, &x), Err(Error::Dimension { .. })));
        assert!(matches!(log_derivatives(&net, &x), Err(Error::Dimension { .. })));
    }
}
