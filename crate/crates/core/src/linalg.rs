//! Small dense helpers on top of faer shared by the model, solver and oracle code.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Tolerance used when accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn identity(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Largest elementwise deviation of `a` from its adjoint.
pub fn hermiticity_deviation(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_deviation(u: MatRef<'_, c64>) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(prod.as_ref(), identity(u.ncols()).as_ref())
}

/// `exp(-i·g·tau)` for Hermitian `g`, through its eigendecomposition.
pub fn expm_hermitian(g: MatRef<'_, c64>, tau: f64) -> Result<Mat<c64>> {
    if g.nrows() != g.ncols() {
        return Err(Error::Dimension { expected: g.nrows(), got: g.ncols() });
    }
    let dev = hermiticity_deviation(g);
    if dev > HERMITIAN_TOL {
        return Err(Error::Numeric(format!("generator is not Hermitian (deviation {dev:.3e})")));
    }
    let n = g.nrows();
    if tau == 0.0 {
        return Ok(identity(n));
    }
    let eig = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
    let v = eig.U();
    let s = eig.S();
    let phases: Vec<c64> = (0..n).map(|k| c64::from_polar(1.0, -s[k].re * tau)).collect();
    let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] * phases[k]);
    Ok(&scaled * v.adjoint())
}

/// Dot product `Σ conj(a_i) b_i`.
pub fn cdot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
