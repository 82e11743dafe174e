//! Resolvent machinery for the pair `A = T + B`.
//!
//! Everything rests on the splitting `(A - lambda)^{-1} = (T - lambda)^{-1}
//! - G(lambda)` with `G = (A - lambda)^{-1} B (T - lambda)^{-1}`, valid for
//! `lambda` outside the closed `b`-neighborhood of the segments, and on the
//! Neumann-series bound `||(A - lambda)^{-1}|| <= 1 / (delta - b)` where
//! `delta = dist(lambda, union of segments)`.

use nalgebra::linalg::LU;
use nalgebra::Dyn;

use crate::error::{Error, Result};
use crate::linalg::{
    cplx, identity, one_norm, smallest_singular_value, spectral_norm, CMat, CVec, C64,
};
use crate::spectral::{HermitianOperator, PerturbedPair, SegmentFamily};

/// Condition estimate above which a shifted solve is flagged as unreliable.
pub const ILL_CONDITIONED_THRESHOLD: f64 = 1e12;

/// LU factorization of `M - lambda I` with pivot-based singularity detection.
pub struct ShiftedFactor {
    lu: LU<C64, Dyn, Dyn>,
    lambda: C64,
    dim: usize,
    m_one_norm: f64,
}

impl ShiftedFactor {
    pub fn new(m: &CMat, lambda: C64) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::DimensionMismatch {
                context: format!("shifted solve on a {}x{} matrix", n, m.ncols()),
            });
        }
        let shifted = m - identity(n) * lambda;
        let m_one_norm = one_norm(&shifted);
        let lu = shifted.lu();
        let u = lu.u();
        let pmax = (0..n).map(|i| u[(i, i)].norm()).fold(0.0, f64::max);
        let pmin = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if pmax == 0.0 || pmin <= n as f64 * f64::EPSILON * pmax {
            return Err(Error::SingularShift {
                re: lambda.re,
                im: lambda.im,
            });
        }
        Ok(ShiftedFactor {
            lu,
            lambda,
            dim: n,
            m_one_norm,
        })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn solve(&self, rhs: &CMat) -> Result<CMat> {
        if rhs.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: format!("rhs has {} rows, factor is {}", rhs.nrows(), self.dim),
            });
        }
        self.lu.solve(rhs).ok_or(Error::SingularShift {
            re: self.lambda.re,
            im: self.lambda.im,
        })
    }

    /// Full inverse together with its exact 1-norm condition number.
    pub fn inverse(&self) -> Result<(CMat, f64)> {
        let inv = self.solve(&identity(self.dim))?;
        let cond = self.m_one_norm * one_norm(&inv);
        Ok((inv, cond))
    }

    /// Lower-bound estimate of the 1-norm condition number from a few probe
    /// solves; cheap when the full inverse is not needed.
    pub fn condition_estimate(&self) -> f64 {
        let mut est = 0.0f64;
        let probes: [Box<dyn Fn(usize) -> C64>; 3] = [
            Box::new(|_| cplx(1.0, 0.0)),
            Box::new(|i| cplx(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
            Box::new(|i| cplx((1.0 + i as f64).cos(), (2.0 + i as f64).sin())),
        ];
        for probe in probes {
            let v = CVec::from_fn(self.dim, |i, _| probe(i));
            if let Some(x) = self.lu.solve(&v) {
                let num: f64 = x.iter().map(|z| z.norm()).sum();
                let den: f64 = v.iter().map(|z| z.norm()).sum();
                est = est.max(num / den);
            }
        }
        self.m_one_norm * est
    }
}

/// Solution of `(A - lambda) X = rhs` with a conditioning warning flag.
pub struct ResolventSolve {
    pub solution: CMat,
    pub condition_estimate: f64,
    pub ill_conditioned: bool,
}

pub fn solve_resolvent(a: &CMat, lambda: C64, rhs: &CMat) -> Result<ResolventSolve> {
    let factor = ShiftedFactor::new(a, lambda)?;
    let solution = factor.solve(rhs)?;
    let condition_estimate = factor.condition_estimate();
    Ok(ResolventSolve {
        solution,
        condition_estimate,
        ill_conditioned: condition_estimate > ILL_CONDITIONED_THRESHOLD,
    })
}

/// Full resolvent matrix `(A - lambda)^{-1}` and its 1-norm condition number.
pub fn resolvent_matrix(a: &CMat, lambda: C64) -> Result<(CMat, f64)> {
    ShiftedFactor::new(a, lambda)?.inverse()
}

/// Exact `(T - lambda)^{-1}` through the eigenbasis of `T`.
pub fn resolvent_t_matrix(t: &HermitianOperator, lambda: C64) -> Result<CMat> {
    let dist = t.spectrum_distance(lambda);
    if dist < 1e-14 * t.scale() {
        return Err(Error::LambdaOnSpectrum {
            re: lambda.re,
            im: lambda.im,
            distance: dist,
        });
    }
    let n = t.dim();
    let diag = CMat::from_diagonal(&CVec::from_iterator(
        n,
        t.eigenvalues()
            .iter()
            .map(|&ti| (cplx(ti, 0.0) - lambda).inv()),
    ));
    Ok(t.eigenvectors() * diag * t.eigenvectors().adjoint())
}

/// `M(lambda) = (I + B (T - lambda)^{-1})^{-1}`, the factor that carries the
/// whole perturbation in the splitting.
pub fn m_factor(pair: &PerturbedPair, lambda: C64) -> Result<CMat> {
    let rt = resolvent_t_matrix(pair.t(), lambda)?;
    let m = identity(pair.dim()) + pair.b_matrix() * rt;
    let factor = ShiftedFactor::new(&m, cplx(0.0, 0.0))?;
    let (inv, _) = factor.inverse()?;
    Ok(inv)
}

/// `G(lambda) = (A - lambda)^{-1} B (T - lambda)^{-1}`, the correction term
/// of the splitting.
pub fn splitting_term(pair: &PerturbedPair, lambda: C64) -> Result<CMat> {
    let rt = resolvent_t_matrix(pair.t(), lambda)?;
    let factor = ShiftedFactor::new(pair.a_matrix(), lambda)?;
    factor.solve(&(pair.b_matrix() * rt))
}

/// Pointwise certificate at one sample point `lambda`: computed resolvent
/// norms against their closed-form bounds, plus the splitting identity
/// residual. All norms are spectral norms.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResolventSample {
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Distance from lambda to the union of segments.
    pub delta: f64,
    pub b: f64,
    pub a_resolvent_norm: f64,
    /// `1 / (delta - b)`.
    pub a_bound: f64,
    pub t_resolvent_norm: f64,
    /// `1 / delta`.
    pub t_bound: f64,
    pub m_norm: f64,
    /// `1 / (1 - b/delta)`.
    pub m_bound: f64,
    pub g_norm: f64,
    /// `b / (delta (delta - b))`.
    pub g_bound: f64,
    /// `||R_A - (R_T - G)|| / ||R_A||`.
    pub splitting_residual: f64,
    pub pass: bool,
}

/// Absolute slack allowed on the closed-form bounds.
pub const BOUND_SLACK: f64 = 1e-8;
/// Relative tolerance for the splitting identity.
pub const SPLITTING_TOL: f64 = 1e-9;

/// Verifies every pointwise bound of the splitting analysis at `lambda`,
/// which must lie strictly outside the closed `b`-neighborhood.
pub fn neumann_bound_check(
    pair: &PerturbedPair,
    family: &SegmentFamily,
    lambda: C64,
) -> Result<ResolventSample> {
    let b = pair.b_norm();
    let delta = family.distance_to(lambda);
    if delta <= b {
        return Err(Error::InsideNeighborhood {
            re: lambda.re,
            im: lambda.im,
            delta,
            b,
        });
    }

    let n = pair.dim();
    let shifted_a = pair.a_matrix() - identity(n) * lambda;
    let a_resolvent_norm = 1.0 / smallest_singular_value(&shifted_a);
    let rt = resolvent_t_matrix(pair.t(), lambda)?;
    let t_resolvent_norm = 1.0 / pair.t().spectrum_distance(lambda);
    let m_mat = identity(n) + pair.b_matrix() * &rt;
    let m_norm = 1.0 / smallest_singular_value(&m_mat);
    let g = splitting_term(pair, lambda)?;
    let g_norm = spectral_norm(&g);

    let (ra, _) = resolvent_matrix(pair.a_matrix(), lambda)?;
    let splitting_residual = (&ra - (&rt - &g)).norm() / ra.norm();

    let a_bound = 1.0 / (delta - b);
    let t_bound = 1.0 / delta;
    let m_bound = 1.0 / (1.0 - b / delta);
    let g_bound = if b > 0.0 {
        b / (delta * (delta - b))
    } else {
        0.0
    };

    let pass = a_resolvent_norm <= a_bound + BOUND_SLACK
        && t_resolvent_norm <= t_bound + BOUND_SLACK
        && m_norm <= m_bound + BOUND_SLACK
        && g_norm <= g_bound + BOUND_SLACK
        && splitting_residual < SPLITTING_TOL;

    Ok(ResolventSample {
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        delta,
        b,
        a_resolvent_norm,
        a_bound,
        t_resolvent_norm,
        t_bound,
        m_norm,
        m_bound,
        g_norm,
        g_bound,
        splitting_residual,
        pass,
    })
}
