//! Regularized stochastic-reconfiguration solves.
//!
//! All solvers return `Δ = (X X† + λ𝟙)⁻¹ X f` or an approximation of it:
//! `direct` factors the `N_p × N_p` system, `minsr` uses the identity
//! `(X X† + λ𝟙_p)⁻¹ X = X (X† X + λ𝟙_s)⁻¹` and only factors an `N_s × N_s`
//! matrix, and `kfac` solves independent diagonal blocks of the system.

use faer::prelude::*;
use faer::{c64, Mat, MatRef, Side};

use crate::ansatz::Shape;
use crate::error::{Error, Result};

/// Relative eigenvalue cutoff of the pseudo-inverse.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Largest dense `N_p × N_p` system the direct solver will form.
pub const DIRECT_MAX_PARAMS: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    Direct,
    MinSr,
    Kfac,
}

impl SolverMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolverMethod::Direct => "direct",
            SolverMethod::MinSr => "minsr",
            SolverMethod::Kfac => "kfac",
        }
    }
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverMethod::Direct),
            "minsr" => Ok(SolverMethod::MinSr),
            "kfac" => Ok(SolverMethod::Kfac),
            other => Err(Error::Config(format!("unknown solver method '{other}'"))),
        }
    }
}

/// One K-FAC block: a label and its (0-based, sorted) parameter indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamBlock {
    pub label: String,
    pub indices: Vec<usize>,
}

/// Ordered disjoint cover of `0..n_params`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    n_params: usize,
    blocks: Vec<ParamBlock>,
}

impl Partition {
    pub fn new(n_params: usize, blocks: Vec<ParamBlock>) -> Result<Self> {
        let mut seen = vec![false; n_params];
        for b in &blocks {
            if b.indices.is_empty() {
                return Err(Error::Config(format!("partition block {} is empty", b.label)));
            }
            for &i in &b.indices {
                if i >= n_params {
                    return Err(Error::Config(format!("parameter index {i} exceeds {n_params}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Config(format!("parameter index {i} appears in two blocks")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::Config(format!("parameter index {missing} is not covered by the partition")));
        }
        Ok(Self { n_params, blocks })
    }

    /// A single block holding every parameter.
    pub fn whole(n_params: usize) -> Self {
        Self { n_params, blocks: vec![ParamBlock { label: "all".into(), indices: (0..n_params).collect() }] }
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Splits `0..n` into `parts` contiguous ranges, larger ranges first.
fn split_ranges(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let (base, extra) = (n / parts, n % parts);
    let mut at = 0;
    (0..parts)
        .map(|p| {
            let len = base + usize::from(p < extra);
            let r = at..at + len;
            at += len;
            r
        })
        .collect()
}

/// Builds a K-FAC partition from a per-layer block count.
///
/// For an FNN, entry `k` splits the map into layer `k+1` by output node:
/// block `θ^{k,i,j}` holds rows `i..j` of the weight matrix and the matching
/// biases. For an RBM the three entries split the visible biases, the hidden
/// biases and the weight rows (by hidden unit).
pub fn kfac_partition_from_layers(shape: &Shape, blocks_per_layer: &[usize]) -> Result<Partition> {
    shape.validate()?;
    let mut blocks = Vec::new();
    match shape {
        Shape::Fnn { layers } => {
            if blocks_per_layer.len() != layers.len() - 1 {
                return Err(Error::Config(format!(
                    "K-FAC spec has {} entries for {} layers",
                    blocks_per_layer.len(),
                    layers.len() - 1
                )));
            }
            let mut offset = 0;
            for (k, (w, &parts)) in layers.windows(2).zip(blocks_per_layer).enumerate() {
                let (fan_in, fan_out) = (w[0], w[1]);
                if parts == 0 || parts > fan_out {
                    return Err(Error::Config(format!("layer {} cannot be split into {parts} blocks", k + 1)));
                }
                let bias_off = offset + fan_out * fan_in;
                for r in split_ranges(fan_out, parts) {
                    let mut indices: Vec<usize> = (offset + r.start * fan_in..offset + r.end * fan_in).collect();
                    indices.extend(bias_off + r.start..bias_off + r.end);
                    blocks.push(ParamBlock { label: format!("θ^{{{},{},{}}}", k + 1, r.start + 1, r.end), indices });
                }
                offset = bias_off + fan_out;
            }
        }
        Shape::Rbm { sites, hidden } => {
            if blocks_per_layer.len() != 3 {
                return Err(Error::Config("RBM K-FAC spec needs three entries (a, b, W)".into()));
            }
            let groups = [("a", 0, *sites, 1), ("b", *sites, *hidden, 1), ("W", sites + hidden, *hidden, *sites)];
            for ((name, off, count, stride), &parts) in groups.into_iter().zip(blocks_per_layer) {
                if parts == 0 || parts > count {
                    return Err(Error::Config(format!("RBM group {name} cannot be split into {parts} blocks")));
                }
                for r in split_ranges(count, parts) {
                    let indices = (off + r.start * stride..off + r.end * stride).collect();
                    blocks.push(ParamBlock { label: format!("{name}[{},{}]", r.start + 1, r.end), indices });
                }
            }
        }
    }
    Partition::new(shape.n_params(), blocks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub shift: f64,
    /// Required for K-FAC; ignored otherwise.
    pub partition: Option<Partition>,
}

impl SolverConfig {
    pub fn new(method: SolverMethod, shift: f64) -> Self {
        Self { method, shift, partition: None }
    }

    pub fn with_partition(mut self, partition: Partition) -> Self {
        self.partition = Some(partition);
        self
    }

    pub fn validate(&self, n_params: usize) -> Result<()> {
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::Config(format!("regularization shift must be >= 0, got {}", self.shift)));
        }
        match self.method {
            SolverMethod::MinSr if self.shift <= 0.0 => {
                Err(Error::Config("minSR needs a strictly positive regularization shift".into()))
            }
            SolverMethod::Kfac => match &self.partition {
                None => Err(Error::Config("K-FAC solver needs a parameter partition".into())),
                Some(p) if p.n_params() != n_params => {
                    Err(Error::Dimension { expected: n_params, got: p.n_params() })
                }
                Some(_) => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// What happened inside one solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverDiagnostics {
    /// Rough condition number of the factored matrix.
    pub condition: f64,
    /// `‖(X X† + λ𝟙)Δ − X f‖ / ‖X f‖`; for K-FAC the worst block.
    pub residual: f64,
    /// Cholesky failed and the eigendecomposition was used instead.
    pub fallback: bool,
    /// The pseudo-inverse was used (λ = 0 or fallback).
    pub pseudo_inverse: bool,
    /// Retained rank when the pseudo-inverse was used.
    pub rank: Option<usize>,
}

impl SolverDiagnostics {
    fn merge(&mut self, other: &SolverDiagnostics) {
        self.condition = self.condition.max(other.condition);
        self.residual = self.residual.max(other.residual);
        self.fallback |= other.fallback;
        self.pseudo_inverse |= other.pseudo_inverse;
        self.rank = match (self.rank, other.rank) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
    }
}

fn col(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn to_vec(m: &Mat<c64>) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn vnorm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_dims(x: MatRef<'_, c64>, f: &[c64]) -> Result<()> {
    if x.ncols() != f.len() {
        return Err(Error::Dimension { expected: x.ncols(), got: f.len() });
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Estimation("empty X matrix".into()));
    }
    Ok(())
}

fn check_shift(shift: f64) -> Result<()> {
    if !(shift >= 0.0 && shift.is_finite()) {
        return Err(Error::Config(format!("regularization shift must be >= 0, got {shift}")));
    }
    Ok(())
}

/// `A + shift·𝟙` for Hermitian `A`, symmetrized.
fn shifted(a: Mat<c64>, shift: f64) -> Mat<c64> {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| {
        let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        if i == j {
            c64::new(v.re + shift, 0.0)
        } else {
            v
        }
    })
}

/// Factorization of a Hermitian matrix: Cholesky, or the eigendecomposition
/// when Cholesky fails or a pseudo-inverse is requested.
enum Factor {
    Cholesky(faer::linalg::solvers::Llt<c64>),
    Pseudo { vectors: Mat<c64>, inv_values: Vec<f64> },
}

impl Factor {
    fn new(a: &Mat<c64>, force_pinv: bool) -> Result<(Self, SolverDiagnostics)> {
        let mut diag = SolverDiagnostics::default();
        if !force_pinv {
            if let Ok(llt) = a.llt(Side::Lower) {
                let l = llt.L();
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for i in 0..l.nrows() {
                    let d = l[(i, i)].re.abs();
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                if lo > 0.0 && hi.is_finite() {
                    diag.condition = (hi / lo).powi(2);
                    return Ok((Factor::Cholesky(llt), diag));
                }
            }
            diag.fallback = true;
        }
        diag.pseudo_inverse = true;
        let eig = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
        let n = a.nrows();
        let vals: Vec<f64> = (0..n).map(|k| eig.S()[k].re).collect();
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = RANK_CUTOFF * max;
        let inv_values: Vec<f64> = vals.iter().map(|&v| if v > cut { 1.0 / v } else { 0.0 }).collect();
        diag.rank = Some(inv_values.iter().filter(|&&v| v != 0.0).count());
        diag.condition = match vals.iter().copied().filter(|&v| v > cut).reduce(f64::min) {
            Some(min) => max / min,
            None => f64::INFINITY,
        };
        Ok((Factor::Pseudo { vectors: eig.U().to_owned(), inv_values }, diag))
    }

    fn solve(&self, b: &Mat<c64>) -> Result<Mat<c64>> {
        let y = match self {
            Factor::Cholesky(llt) => llt.solve(b),
            Factor::Pseudo { vectors, inv_values } => {
                let mut ub = vectors.adjoint() * b;
                for (k, &w) in inv_values.iter().enumerate() {
                    for j in 0..ub.ncols() {
                        ub[(k, j)] *= w;
                    }
                }
                vectors * &ub
            }
        };
        if !y.col(0).iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numeric("linear solve produced non-finite values".into()));
        }
        Ok(y)
    }
}

/// `X f − (X X† + λ𝟙)Δ` evaluated as `X (f − X†Δ) − λΔ`, so rounding in the
/// large term stays inside the range of `X` and is not amplified by `1/λ`.
fn residual(x: MatRef<'_, c64>, f: &Mat<c64>, delta: &Mat<c64>, shift: f64) -> Mat<c64> {
    let xd = x.adjoint() * delta;
    let inner = Mat::from_fn(f.nrows(), 1, |i, _| f[(i, 0)] - xd[(i, 0)]);
    let mut r = x * &inner;
    for i in 0..r.nrows() {
        r[(i, 0)] -= delta[(i, 0)] * shift;
    }
    r
}

fn relative_residual(x: MatRef<'_, c64>, f: &Mat<c64>, delta: &Mat<c64>, shift: f64, rhs: &Mat<c64>) -> f64 {
    let r = to_vec(&residual(x, f, delta, shift));
    let scale = vnorm(&to_vec(rhs));
    if scale == 0.0 {
        vnorm(&r)
    } else {
        vnorm(&r) / scale
    }
}

enum SolveSide {
    Params,
    Samples,
}

/// Solves on the requested side; for `λ = 0` the pseudo-inverse is used and
/// `(XX†)⁺ X f = X (X†X)⁺ f` makes both sides equivalent.
fn solve_on(x: MatRef<'_, c64>, f: &[c64], shift: f64, side: SolveSide) -> Result<(Vec<c64>, SolverDiagnostics)> {
    let fm = col(f);
    let rhs = x * &fm;
    let pinv = shift == 0.0;
    let gram = match side {
        SolveSide::Params => shifted(x * x.adjoint(), shift),
        SolveSide::Samples => shifted(x.adjoint() * x, shift),
    };
    let (factor, mut diag) = Factor::new(&gram, pinv)?;
    // (XX† + λ)⁻¹ r, using (XX† + λ)⁻¹ = (r − X (X†X + λ)⁻¹ X† r)/λ on the sample side
    let apply_inverse = |r: &Mat<c64>| -> Result<Mat<c64>> {
        match side {
            SolveSide::Params => factor.solve(r),
            SolveSide::Samples => {
                let xa = x * factor.solve(&(x.adjoint() * r))?;
                Ok(Mat::from_fn(r.nrows(), 1, |i, _| (r[(i, 0)] - xa[(i, 0)]) / shift))
            }
        }
    };
    let mut delta = match side {
        SolveSide::Params => factor.solve(&rhs)?,
        SolveSide::Samples => x * factor.solve(&fm)?,
    };
    if !diag.pseudo_inverse {
        // one step of iterative refinement against the unformed system
        let r = residual(x, &fm, &delta, shift);
        let correction = apply_inverse(&r)?;
        for i in 0..delta.nrows() {
            delta[(i, 0)] += correction[(i, 0)];
        }
    }
    diag.residual = relative_residual(x, &fm, &delta, shift, &rhs);
    Ok((to_vec(&delta), diag))
}

/// `Δ = (X X† + λ𝟙_p)⁻¹ X f` in parameter space. With `λ = 0` the
/// pseudo-inverse is used, computed on whichever side is smaller.
pub fn solve_direct(x: MatRef<'_, c64>, f: &[c64], shift: f64) -> Result<(Vec<c64>, SolverDiagnostics)> {
    check_dims(x, f)?;
    check_shift(shift)?;
    if shift == 0.0 && x.ncols() < x.nrows() {
        return solve_on(x, f, shift, SolveSide::Samples);
    }
    if x.nrows() > DIRECT_MAX_PARAMS {
        return Err(Error::Resource(format!(
            "direct solve with {} parameters exceeds the {DIRECT_MAX_PARAMS}-parameter limit; use minsr or kfac",
            x.nrows()
        )));
    }
    solve_on(x, f, shift, SolveSide::Params)
}

/// `Δ = X (X† X + λ𝟙_s)⁻¹ f`; requires `λ > 0`.
pub fn solve_minsr(x: MatRef<'_, c64>, f: &[c64], shift: f64) -> Result<(Vec<c64>, SolverDiagnostics)> {
    check_dims(x, f)?;
    check_shift(shift)?;
    if shift <= 0.0 {
        return Err(Error::Config("minSR needs a strictly positive regularization shift".into()));
    }
    solve_on(x, f, shift, SolveSide::Samples)
}

/// Row restriction `X_B` of `X` to the given parameter indices.
pub fn restrict_rows(x: MatRef<'_, c64>, indices: &[usize]) -> Mat<c64> {
    Mat::from_fn(indices.len(), x.ncols(), |i, j| x[(indices[i], j)])
}

/// Update for one K-FAC block: `(X_B X_B† + λ𝟙)⁻¹ X_B f` on the block's
/// indices, zero elsewhere. The smaller side is factored.
pub fn solve_kfac(
    x: MatRef<'_, c64>,
    f: &[c64],
    shift: f64,
    partition: &Partition,
    block: usize,
) -> Result<(Vec<c64>, SolverDiagnostics)> {
    check_dims(x, f)?;
    check_shift(shift)?;
    if partition.n_params() != x.nrows() {
        return Err(Error::Dimension { expected: x.nrows(), got: partition.n_params() });
    }
    let b = partition
        .blocks()
        .get(block)
        .ok_or_else(|| Error::Range(format!("block {block} of a {}-block partition", partition.len())))?;
    if b.indices.len() == x.nrows() && x.nrows() <= DIRECT_MAX_PARAMS {
        // a block covering every parameter is plain SR
        return solve_direct(x, f, shift);
    }
    let xb = restrict_rows(x, &b.indices);
    let side = if b.indices.len() <= x.ncols() { SolveSide::Params } else { SolveSide::Samples };
    let side = if shift == 0.0 && x.ncols() < b.indices.len() { SolveSide::Samples } else { side };
    let (db, diag) = solve_on(xb.as_ref(), f, shift, side)?;
    let mut delta = vec![c64::new(0.0, 0.0); x.nrows()];
    for (&i, v) in b.indices.iter().zip(db) {
        delta[i] = v;
    }
    Ok((delta, diag))
}

/// Dispatches on the configured method. K-FAC sweeps every block against
/// the same `X` and `f`, so the sweep result is the sum of block updates.
pub fn solve(config: &SolverConfig, x: MatRef<'_, c64>, f: &[c64]) -> Result<(Vec<c64>, SolverDiagnostics)> {
    config.validate(x.nrows())?;
    match config.method {
        SolverMethod::Direct => solve_direct(x, f, config.shift),
        SolverMethod::MinSr => solve_minsr(x, f, config.shift),
        SolverMethod::Kfac => {
            let partition = config.partition.as_ref().expect("validated");
            let mut total = vec![c64::new(0.0, 0.0); x.nrows()];
            let mut diag = SolverDiagnostics::default();
            for k in 0..partition.len() {
                let (d, dd) = solve_kfac(x, f, config.shift, partition, k)?;
                for (t, v) in total.iter_mut().zip(d) {
                    *t += v;
                }
                diag.merge(&dd);
            }
            Ok((total, diag))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_x(np: usize, ns: usize, seed: u64) -> (Mat<c64>, Vec<c64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (ns as f64).sqrt();
        let mut g = || c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale;
        let x = Mat::from_fn(np, ns, |_, _| g());
        let f = (0..ns).map(|_| g()).collect();
        (x, f)
    }

    fn rel(a: &[c64], b: &[c64]) -> f64 {
        let d: Vec<c64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        vnorm(&d) / vnorm(b)
    }

    fn eye(n: usize) -> Mat<c64> {
        crate::linalg::identity(n)
    }

    #[test]
    fn identity_x() {
        let f: Vec<c64> = (0..4).map(|i| c64::new(i as f64, 1.0 - i as f64)).collect();
        let (d, diag) = solve_direct(eye(4).as_ref(), &f, 0.0).unwrap();
        assert!(rel(&d, &f) < 1e-15);
        assert!(diag.pseudo_inverse);
        let half: Vec<c64> = f.iter().map(|z| z * 0.5).collect();
        let (d, _) = solve_direct(eye(4).as_ref(), &f, 1.0).unwrap();
        assert!(rel(&d, &half) < 1e-15);
        let (d, _) = solve_minsr(eye(4).as_ref(), &f, 1.0).unwrap();
        assert!(rel(&d, &half) < 1e-15);
    }

    #[test]
    fn minsr_rejects_zero_shift() {
        let f = vec![c64::new(1.0, 0.0); 3];
        assert!(matches!(solve_minsr(eye(3).as_ref(), &f, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn zero_force_gives_zero_update() {
        let (x, _) = random_x(30, 10, 1);
        let f = vec![c64::new(0.0, 0.0); 10];
        let (d, _) = solve_minsr(x.as_ref(), &f, 1e-3).unwrap();
        assert!(d.iter().all(|z| *z == c64::new(0.0, 0.0)));
    }

    #[test]
    fn minsr_matches_direct() {
        let (x, f) = random_x(200, 30, 2);
        let (a, da) = solve_direct(x.as_ref(), &f, 1e-6).unwrap();
        let (b, _) = solve_minsr(x.as_ref(), &f, 1e-6).unwrap();
        assert!(rel(&b, &a) < 1e-8, "{}", rel(&b, &a));
        assert!(da.residual < 1e-8);
    }

    #[test]
    fn pseudo_inverse_sides_agree() {
        let (x, f) = random_x(40, 12, 3);
        // λ = 0 with N_s < N_p goes through X (X†X)⁺ f
        let (a, da) = solve_direct(x.as_ref(), &f, 0.0).unwrap();
        let (b, _) = solve_on(x.as_ref(), &f, 0.0, SolveSide::Params).unwrap();
        assert!(da.pseudo_inverse);
        assert!(rel(&a, &b) < 1e-8);
    }

    #[test]
    fn fnn_partition_blocks() {
        let shape = Shape::Fnn { layers: vec![40, 160, 120, 1] };
        let p = kfac_partition_from_layers(&shape, &[1, 3, 1]).unwrap();
        let labels: Vec<&str> = p.blocks().iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, ["θ^{1,1,160}", "θ^{2,1,40}", "θ^{2,41,80}", "θ^{2,81,120}", "θ^{3,1,1}"]);
        let sizes: Vec<usize> = p.blocks().iter().map(|b| b.indices.len()).collect();
        assert_eq!(sizes, [40 * 160 + 160, 40 * 160 + 40, 40 * 160 + 40, 40 * 160 + 40, 121]);
    }

    #[test]
    fn rbm_partition_covers() {
        let p = kfac_partition_from_layers(&Shape::rbm(4, 2), &[1, 1, 1]).unwrap();
        assert_eq!(p.len(), 3);
        let mut all: Vec<usize> = p.blocks().iter().flat_map(|b| b.indices.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..4 + 8 + 32).collect::<Vec<_>>());
    }

    #[test]
    fn bad_partitions() {
        let blk = |i: Vec<usize>| ParamBlock { label: "x".into(), indices: i };
        assert!(Partition::new(3, vec![blk(vec![0, 1]), blk(vec![1, 2])]).is_err());
        assert!(Partition::new(3, vec![blk(vec![0, 1])]).is_err());
        assert!(kfac_partition_from_layers(&Shape::Fnn { layers: vec![4, 3, 1] }, &[1]).is_err());
        assert!(kfac_partition_from_layers(&Shape::Fnn { layers: vec![4, 3, 1] }, &[4, 1]).is_err());
    }

    #[test]
    fn single_block_kfac_is_direct() {
        let (x, f) = random_x(25, 40, 4);
        let cfg = SolverConfig::new(SolverMethod::Kfac, 1e-4).with_partition(Partition::whole(25));
        let (a, _) = solve(&cfg, x.as_ref(), &f).unwrap();
        let (b, _) = solve_direct(x.as_ref(), &f, 1e-4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kfac_block_residuals() {
        let (x, f) = random_x(30, 20, 5);
        let p = Partition::new(
            30,
            vec![
                ParamBlock { label: "a".into(), indices: (0..12).collect() },
                ParamBlock { label: "b".into(), indices: (12..30).collect() },
            ],
        )
        .unwrap();
        for k in 0..2 {
            let (_, d) = solve_kfac(x.as_ref(), &f, 1e-6, &p, k).unwrap();
            assert!(d.residual < 1e-8);
        }
        assert!(solve_kfac(x.as_ref(), &f, 1e-6, &p, 2).is_err());
    }

    #[test]
    fn direct_guard() {
        let x = Mat::<c64>::zeros(DIRECT_MAX_PARAMS + 1, 2);
        let f = vec![c64::new(1.0, 0.0); 2];
        assert!(matches!(solve_direct(x.as_ref(), &f, 1e-3), Err(Error::Resource(_))));
    }
}
