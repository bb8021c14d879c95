//! The open-boundary tilted Ising chain
//!
//! ```text
//! H = J Σ_{l=1}^{L-1} σᶻ_l σᶻ_{l+1} − Σ_{l=1}^{L} (h_x σˣ_l + h_z σᶻ_l)
//! ```
//!
//! written as a sum of bond terms `H_l` (sites `l`, `l+1`) whose single-site
//! fields carry weight `n_l = 1` on the two chain ends and `1/2` elsewhere, so
//! that every site field is counted exactly once.
//!
//! Sites are 1-based in documentation and 0-based in code. A configuration
//! maps to a basis index with site 1 as the most significant bit and
//! `+1 → 0`, `−1 → 1`; this is also the ordering of dense state vectors.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg;

/// A computational basis label: one `±1` entry per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Range(format!("spin value {bad} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn from_index(index: usize, sites: usize) -> Self {
        let mut spins = vec![1; sites];
        spins_from_index(index, &mut spins);
        Self(spins)
    }

    pub fn index(&self) -> usize {
        basis_index(&self.0)
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self, site: usize) -> Self {
        let mut spins = self.0.clone();
        spins[site] = -spins[site];
        Self(spins)
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

impl AsRef<[i8]> for SpinConfig {
    fn as_ref(&self) -> &[i8] {
        &self.0
    }
}

pub fn basis_index(spins: &[i8]) -> usize {
    spins.iter().fold(0usize, |acc, &s| (acc << 1) | usize::from(s < 0))
}

pub fn spins_from_index(index: usize, out: &mut [i8]) {
    let n = out.len();
    for (l, s) in out.iter_mut().enumerate() {
        *s = if (index >> (n - 1 - l)) & 1 == 1 { -1 } else { 1 };
    }
}

/// Couplings of the tilted Ising chain.
#[derive(Clone, Debug, PartialEq)]
pub struct TiltedIsing {
    sites: usize,
    coupling: f64,
    field_x: f64,
    field_z: f64,
}

impl TiltedIsing {
    pub fn new(sites: usize, coupling: f64, field_x: f64, field_z: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidModel(format!("chain needs at least 2 sites, got {sites}")));
        }
        if !(coupling.is_finite() && field_x.is_finite() && field_z.is_finite()) {
            return Err(Error::InvalidModel("couplings must be finite".into()));
        }
        Ok(Self { sites, coupling, field_x, field_z })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn field_x(&self) -> f64 {
        self.field_x
    }

    pub fn field_z(&self) -> f64 {
        self.field_z
    }

    pub fn bonds(&self) -> usize {
        self.sites - 1
    }

    /// Field weight `n_l` of a (0-based) site inside the bond decomposition.
    pub fn boundary_weight(&self, site: usize) -> f64 {
        if site == 0 || site + 1 == self.sites {
            1.0
        } else {
            0.5
        }
    }

    /// Diagonal matrix element `J Σ x_l x_{l+1} − h_z Σ x_l`.
    pub fn diagonal(&self, spins: &[i8]) -> f64 {
        let zz: i32 = spins.windows(2).map(|w| i32::from(w[0] * w[1])).sum();
        let z: i32 = spins.iter().map(|&s| i32::from(s)).sum();
        self.coupling * f64::from(zz) - self.field_z * f64::from(z)
    }

    /// Sparse row of `H`: the diagonal entry first, then one entry `−h_x`
    /// per single-spin flip (omitted when `h_x = 0`).
    pub fn connected_elements(&self, x: &SpinConfig) -> Result<Vec<(SpinConfig, c64)>> {
        self.check(x.as_slice())?;
        let mut out = Vec::with_capacity(self.sites + 1);
        out.push((x.clone(), c64::new(self.diagonal(x.as_slice()), 0.0)));
        if self.field_x != 0.0 {
            for l in 0..self.sites {
                out.push((x.flipped(l), c64::new(-self.field_x, 0.0)));
            }
        }
        Ok(out)
    }

    pub(crate) fn check(&self, spins: &[i8]) -> Result<()> {
        if spins.len() != self.sites {
            return Err(Error::Dimension { expected: self.sites, got: spins.len() });
        }
        Ok(())
    }

    /// Bond term `H_l` (0-based bond index) as a 4×4 matrix on sites `l, l+1`.
    pub fn bond_term(&self, bond: usize) -> Result<Mat<c64>> {
        if bond >= self.bonds() {
            return Err(Error::Range(format!("bond {} outside chain of {} sites", bond + 1, self.sites)));
        }
        let mut generator = Mat::<c64>::zeros(4, 4);
        self.add_bond(&mut generator, 2, 0, bond);
        Ok(generator)
    }

    // Adds H_bond into a dense matrix on `span` sites whose first site is
    // `block_start`. Local index convention matches `basis_index`.
    fn add_bond(&self, m: &mut Mat<c64>, span: usize, block_start: usize, bond: usize) {
        let (left, right) = (bond, bond + 1);
        let (pl, pr) = (span - 1 - (left - block_start), span - 1 - (right - block_start));
        let (nl, nr) = (self.boundary_weight(left), self.boundary_weight(right));
        let dim = 1usize << span;
        for s in 0..dim {
            let zl = if (s >> pl) & 1 == 0 { 1.0 } else { -1.0 };
            let zr = if (s >> pr) & 1 == 0 { 1.0 } else { -1.0 };
            let diag = self.coupling * zl * zr - self.field_z * (nl * zl + nr * zr);
            m[(s, s)] += c64::new(diag, 0.0);
            m[(s ^ (1 << pl), s)] += c64::new(-self.field_x * nl, 0.0);
            m[(s ^ (1 << pr), s)] += c64::new(-self.field_x * nr, 0.0);
        }
    }

    /// `Σ_{m=l}^{l+d−2} H_m` on the `span` sites starting at (0-based) `start`.
    pub fn block_generator(&self, start: usize, span: usize) -> Result<Mat<c64>> {
        if span < 2 {
            return Err(Error::Range(format!("block span must be at least 2, got {span}")));
        }
        if start + span > self.sites {
            return Err(Error::Range(format!(
                "block of {span} sites at site {} exceeds chain of {} sites",
                start + 1,
                self.sites
            )));
        }
        let dim = 1usize << span;
        let mut generator = Mat::<c64>::zeros(dim, dim);
        for bond in start..start + span - 1 {
            self.add_bond(&mut generator, span, start, bond);
        }
        Ok(generator)
    }
}

/// One factor `U_{d,l}(τ) = exp(−i τ Σ H_m)` of the Trotter product.
#[derive(Clone, Debug)]
pub struct TrotterBlock {
    start: usize,
    span: usize,
    duration: f64,
    generator: Mat<c64>,
    unitary: Mat<c64>,
}

impl TrotterBlock {
    pub fn new(model: &TiltedIsing, start: usize, span: usize, duration: f64) -> Result<Self> {
        let generator = model.block_generator(start, span)?;
        let unitary = block_unitary(&generator, duration)?;
        Ok(Self { start, span, duration, generator, unitary })
    }

    /// Identity acting on a block; used when fitting against a fixed state.
    pub fn identity(sites: usize, start: usize, span: usize) -> Result<Self> {
        if span < 1 || start + span > sites {
            return Err(Error::Range(format!("identity block of {span} sites at {} exceeds {sites}", start + 1)));
        }
        let dim = 1usize << span;
        Ok(Self {
            start,
            span,
            duration: 0.0,
            generator: Mat::zeros(dim, dim),
            unitary: linalg::identity(dim),
        })
    }

    /// Block with an arbitrary unitary, e.g. a Haar-random test fixture.
    pub fn from_unitary(start: usize, span: usize, unitary: Mat<c64>) -> Result<Self> {
        let dim = 1usize << span;
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: unitary.nrows() });
        }
        let dev = linalg::unitarity_deviation(unitary.as_ref());
        if dev > 1e-10 {
            return Err(Error::Numeric(format!("matrix is not unitary (deviation {dev:.3e})")));
        }
        Ok(Self { start, span, duration: f64::NAN, generator: Mat::zeros(dim, dim), unitary })
    }

    /// 0-based first site.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn generator(&self) -> &Mat<c64> {
        &self.generator
    }

    pub fn unitary(&self) -> &Mat<c64> {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        1 << self.span
    }

    /// Local index of the block's sites inside a configuration.
    pub fn local_index(&self, spins: &[i8]) -> usize {
        basis_index(&spins[self.start..self.start + self.span])
    }

    /// Bit shift of the block inside a full basis index of `sites` spins.
    pub fn index_shift(&self, sites: usize) -> usize {
        sites - self.start - self.span
    }

    pub fn is_identity(&self) -> bool {
        let id = linalg::identity(self.dim());
        linalg::max_abs_diff(self.unitary.as_ref(), id.as_ref()) == 0.0
    }
}

/// `exp(−i·generator·τ)` via eigendecomposition of the Hermitian generator.
pub fn block_unitary(generator: &Mat<c64>, tau: f64) -> Result<Mat<c64>> {
    linalg::expm_hermitian(generator.as_ref(), tau)
}

/// Symmetric second-order sweep: every block forward at `dt/2`, then the
/// same blocks in reverse order at `dt/2`.
///
/// Bonds are tiled left to right with stride `d − 1`, so neighbouring blocks
/// share a site but no bond; the last block may be shorter than `d`.
#[derive(Clone, Debug)]
pub struct TrotterSchedule {
    blocks: Vec<TrotterBlock>,
    order: Vec<usize>,
    dt: f64,
}

impl TrotterSchedule {
    pub fn new(model: &TiltedIsing, span: usize, dt: f64) -> Result<Self> {
        let sites = model.sites();
        if span < 2 || span > sites {
            return Err(Error::Range(format!("block span {span} must lie in [2, {sites}]")));
        }
        let mut blocks = Vec::new();
        let mut start = 0;
        while start + 1 < sites {
            let this_span = span.min(sites - start);
            blocks.push(TrotterBlock::new(model, start, this_span, dt / 2.0)?);
            start += span - 1;
        }
        let n = blocks.len();
        let order = (0..n).chain((0..n).rev()).collect();
        Ok(Self { blocks, order, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Distinct blocks of one forward sweep.
    pub fn distinct_blocks(&self) -> &[TrotterBlock] {
        &self.blocks
    }

    /// Blocks in application order.
    pub fn iter(&self) -> impl Iterator<Item = &TrotterBlock> + '_ {
        self.order.iter().map(move |&i| &self.blocks[i])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Total duration with which each bond (0-based) appears in the sweep.
    pub fn bond_coverage(&self, bonds: usize) -> Vec<f64> {
        let mut cover = vec![0.0; bonds];
        for block in self.iter() {
            for b in block.start()..block.start() + block.span() - 1 {
                cover[b] += block.duration();
            }
        }
        cover
    }
}

pub fn trotter_schedule(model: &TiltedIsing, span: usize, dt: f64) -> Result<TrotterSchedule> {
    TrotterSchedule::new(model, span, dt)
}
