//! Dense complex linear-algebra helpers on top of nalgebra.
//!
//! Everything here is generic plumbing: norms, factorizations, eigen
//! decompositions, random unitaries. The spectral/contour semantics live in
//! the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(0.0, f64::max)
}

/// Smallest singular value; 0 for empty matrices.
pub fn smallest_singular_value(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Induced 1-norm (max absolute column sum).
pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Relative deviation from Hermitian symmetry, ||M - M^H|| / max(||M||, 1).
pub fn hermitian_asymmetry(m: &CMat) -> f64 {
    (m - m.adjoint()).norm() / m.norm().max(1.0)
}

/// (M + M^H) / 2.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// ||Q^2 - Q||_F, the Frobenius idempotency defect.
pub fn idempotency_residual(q: &CMat) -> f64 {
    (q * q - q).norm()
}

/// Count of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose k-th column is the eigenvector for `values[k]`.
    pub vectors: CMat,
}

pub fn hermitian_eigen(m: &CMat) -> Result<HermitianEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: format!("eigendecomposition of a {}x{} matrix", n, m.ncols()),
        });
    }
    let asym = hermitian_asymmetry(m);
    if asym > 1e-12 {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let eig = hermitian_part(m)
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or(Error::EigDidNotConverge)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }

    // Guard against a silently wrong decomposition.
    let d = CMat::from_diagonal(&CVec::from_iterator(n, values.iter().map(|&v| cplx(v, 0.0))));
    let residual = (m * &vectors - &vectors * d).norm() / m.norm().max(1.0);
    if residual > 1e-10 {
        return Err(Error::EigDidNotConverge);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigendecomposition of a general complex matrix via its Schur form.
pub struct ComplexEigen {
    pub values: Vec<C64>,
    /// Columns are unit-norm eigenvectors, same order as `values`.
    pub vectors: CMat,
    /// 2-norm condition number of the eigenvector matrix; large values mean
    /// the matrix is close to defective and the decomposition is unreliable.
    pub vector_condition: f64,
}

impl ComplexEigen {
    /// Conventional threshold above which the eigenvector basis should be
    /// treated as nearly defective.
    pub const NEAR_DEFECTIVE: f64 = 1e10;

    pub fn near_defective(&self) -> bool {
        !self.vector_condition.is_finite() || self.vector_condition > Self::NEAR_DEFECTIVE
    }
}

pub fn complex_eigen(m: &CMat) -> Result<ComplexEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: format!("eigendecomposition of a {}x{} matrix", n, m.ncols()),
        });
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 100_000)
        .ok_or(Error::EigDidNotConverge)?;
    let (q, t) = schur.unpack();
    let w = triangular_eigenvectors(&t);
    let vectors = &q * &w;
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();

    let sv = vectors.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let vector_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    Ok(ComplexEigen {
        values,
        vectors,
        vector_condition,
    })
}

/// Unit eigenvectors of an upper-triangular matrix by back-substitution.
/// Near-equal diagonal entries get a perturbed denominator; the resulting
/// basis condition number is reported by the caller.
fn triangular_eigenvectors(t: &CMat) -> CMat {
    let n = t.nrows();
    let scale = t.norm().max(1e-300);
    let mut v = CMat::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut x = CVec::zeros(n);
        x[k] = cplx(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = cplx(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * x[j];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < f64::EPSILON * scale {
                den = cplx(f64::EPSILON * scale, 0.0);
            }
            x[i] = -s / den;
        }
        let nx = x.norm();
        v.set_column(k, &x.map(|z| z / nx));
    }
    v
}

/// Inverse by partial-pivoting LU together with the exact 1-norm condition
/// number of the input. `None` when a pivot is numerically zero.
pub fn try_inverse_with_cond(m: &CMat) -> Option<(CMat, f64)> {
    let n = m.nrows();
    let norm_m = one_norm(m);
    let lu = m.clone().lu();
    let u = lu.u();
    let pivot_max = (0..n).map(|i| u[(i, i)].norm()).fold(0.0, f64::max);
    let pivot_min = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if pivot_max == 0.0 || pivot_min <= n as f64 * f64::EPSILON * pivot_max {
        return None;
    }
    let inv = lu.solve(&identity(n))?;
    let cond = norm_m * one_norm(&inv);
    Some((inv, cond))
}

/// Square root and inverse square root of a Hermitian positive-definite
/// matrix, plus its extreme eigenvalues.
pub struct HpdRoot {
    pub sqrt: CMat,
    pub inv_sqrt: CMat,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

pub fn hpd_sqrt(g: &CMat) -> Result<HpdRoot> {
    let eig = hermitian_eigen(g)?;
    let min_eigenvalue = *eig.values.first().ok_or(Error::EmptyFamily)?;
    let max_eigenvalue = *eig.values.last().unwrap();
    if min_eigenvalue <= 0.0 {
        return Err(Error::IndefiniteGram {
            min_eigenvalue,
        });
    }
    let n = g.nrows();
    let root = CMat::from_diagonal(&CVec::from_iterator(
        n,
        eig.values.iter().map(|&v| cplx(v.sqrt(), 0.0)),
    ));
    let inv_root = CMat::from_diagonal(&CVec::from_iterator(
        n,
        eig.values.iter().map(|&v| cplx(1.0 / v.sqrt(), 0.0)),
    ));
    let vh = eig.vectors.adjoint();
    Ok(HpdRoot {
        sqrt: &eig.vectors * root * &vh,
        inv_sqrt: &eig.vectors * inv_root * vh,
        min_eigenvalue,
        max_eigenvalue,
    })
}

/// Complex Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn random_ginibre<R: Rng>(n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        // Box-Muller; two uniforms per complex entry.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (-2.0 * u1.ln()).sqrt();
        cplx(r * u2.cos(), r * u2.sin())
    })
}

/// Haar-distributed random unitary: QR of a Ginibre matrix with the phases
/// of R's diagonal absorbed into Q.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let g = random_ginibre(n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cplx(1.0, 0.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}
