//! Segments on the real line, gapped segment families, and the Hermitian
//! operators whose spectra they enclose.
//!
//! A family of pairwise disjoint closed segments with minimal gap `d > 0`
//! localizes the spectrum of a Hermitian `T`; a bounded perturbation `B`
//! with `||B|| = b < d/2` moves each spectral cluster by at most `b`, which
//! is what every contour and bound in this crate is built around.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    cplx, hermitian_asymmetry, hermitian_eigen, hermitian_part, identity, spectral_norm, CMat,
    CVec, C64,
};

/// Closed real segment `[alpha, beta]` (endpoints may coincide).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    alpha: f64,
    beta: f64,
}

impl Segment {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha <= beta) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidSegment { alpha, beta });
        }
        Ok(Segment { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn length(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.alpha + self.beta)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.alpha <= t && t <= self.beta
    }

    /// Euclidean distance from a point of the complex plane to the segment.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        let dx = if z.re < self.alpha {
            self.alpha - z.re
        } else if z.re > self.beta {
            z.re - self.beta
        } else {
            0.0
        };
        (dx * dx + z.im * z.im).sqrt()
    }
}

/// Ordered family of pairwise disjoint closed segments.
///
/// Indexing is by position `0..len`; `label` translates positions to the
/// symmetric labels `-n..=n` used when talking about partial sums, with
/// position `len/2` as label 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFamily {
    segments: Vec<Segment>,
    gap: f64,
    zero_offset: usize,
}

impl SegmentFamily {
    /// Sorts the segments by left endpoint and validates strict disjointness.
    /// The gap of a single-segment family is `+inf` (an infimum over an
    /// empty set of consecutive pairs).
    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyFamily);
        }
        segments.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        let mut gap = f64::INFINITY;
        for pair in segments.windows(2) {
            let g = pair[1].alpha - pair[0].beta;
            if g <= 0.0 {
                return Err(Error::OverlappingSegments {
                    a0: pair[0].alpha,
                    b0: pair[0].beta,
                    a1: pair[1].alpha,
                    b1: pair[1].beta,
                });
            }
            gap = gap.min(g);
        }
        let zero_offset = segments.len() / 2;
        Ok(SegmentFamily {
            segments,
            gap,
            zero_offset,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Minimal gap `d` between consecutive segments; `+inf` for a singleton.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Position of the segment labeled 0.
    pub fn zero_offset(&self) -> usize {
        self.zero_offset
    }

    /// Symmetric label of the segment at `position`.
    pub fn label(&self, position: usize) -> i64 {
        position as i64 - self.zero_offset as i64
    }

    /// Distance from `z` to the union of the segments.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the nearest segment and its distance.
    pub fn nearest_segment(&self, z: Complex64) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (j, s) in self.segments.iter().enumerate() {
            let d = s.distance_to(z);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    /// Smallest interval containing the whole family.
    pub fn span(&self) -> (f64, f64) {
        (
            self.segments.first().unwrap().alpha,
            self.segments.last().unwrap().beta,
        )
    }
}

/// Builds a family from raw `(alpha, beta)` endpoint pairs.
pub fn build_segment_family(endpoints: &[(f64, f64)]) -> Result<SegmentFamily> {
    let segments = endpoints
        .iter()
        .map(|&(a, b)| Segment::new(a, b))
        .collect::<Result<Vec<_>>>()?;
    SegmentFamily::new(segments)
}

/// Hermitian matrix together with its (verified) eigendecomposition.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMat,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl HermitianOperator {
    /// Accepts a matrix with relative asymmetry below 1e-13, symmetrizes the
    /// rounding noise away and eigendecomposes.
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                context: format!("{}x{} operator", matrix.nrows(), matrix.ncols()),
            });
        }
        let asym = hermitian_asymmetry(&matrix);
        if asym > 1e-13 {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let matrix = hermitian_part(&matrix);
        let eig = hermitian_eigen(&matrix)?;
        Ok(HermitianOperator {
            matrix,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
        })
    }

    /// Builds `U diag(values) U^H` from a prescribed spectrum and unitary.
    pub fn from_spectrum(eigenvalues: &[f64], unitary: &CMat) -> Result<Self> {
        let n = eigenvalues.len();
        if unitary.nrows() != n || unitary.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "{} eigenvalues with a {}x{} basis",
                    n,
                    unitary.nrows(),
                    unitary.ncols()
                ),
            });
        }
        let unitarity = (unitary.adjoint() * unitary - identity(n)).norm();
        if unitarity > 1e-10 {
            return Err(Error::InvalidSpec {
                reason: format!("basis is not unitary (residual {unitarity:.3e})"),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let mut vectors = CMat::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vectors.set_column(k, &unitary.column(i));
        }
        let d = CMat::from_diagonal(&CVec::from_iterator(
            n,
            values.iter().map(|&v| cplx(v, 0.0)),
        ));
        let matrix = hermitian_part(&(&vectors * d * vectors.adjoint()));
        Ok(HermitianOperator {
            matrix,
            eigenvalues: values,
            eigenvectors: vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary eigenvector matrix, columns matching `eigenvalues`.
    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    /// Length scale used for "is lambda on the spectrum" decisions.
    pub fn scale(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|t| t.abs())
            .fold(1.0, f64::max)
    }

    /// Distance from `lambda` to the spectrum of `T`.
    pub fn spectrum_distance(&self, lambda: Complex64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&t| (cplx(t, 0.0) - lambda).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Squared moduli of the eigenbasis coefficients of `x`.
    pub fn coefficients_squared(&self, x: &CVec) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.eigenvectors.column(i).dotc(x).norm_sqr())
            .collect()
    }

    /// Exact `||(T - lambda)^{-1} x||` via the eigenbasis.
    pub fn resolvent_apply_norm(&self, lambda: Complex64, x: &CVec) -> Result<f64> {
        let dist = self.spectrum_distance(lambda);
        if dist < 1e-14 * self.scale() {
            return Err(Error::LambdaOnSpectrum {
                re: lambda.re,
                im: lambda.im,
                distance: dist,
            });
        }
        let mut total = 0.0;
        for (i, c2) in self.coefficients_squared(x).iter().enumerate() {
            total += c2 / (cplx(self.eigenvalues[i], 0.0) - lambda).norm_sqr();
        }
        Ok(total.sqrt())
    }

    /// Errors unless every eigenvalue lies in some segment of the family.
    pub fn check_spectrum_within(&self, family: &SegmentFamily) -> Result<()> {
        for &t in &self.eigenvalues {
            if !family.segments().iter().any(|s| s.contains(t)) {
                return Err(Error::SpectrumOutsideSegments { value: t });
            }
        }
        Ok(())
    }
}

/// Exact resolvent norm of a Hermitian operator: `1 / dist(lambda, spec T)`.
pub fn resolvent_norm_t(t: &HermitianOperator, lambda: Complex64) -> Result<f64> {
    let dist = t.spectrum_distance(lambda);
    if dist < 1e-14 * t.scale() {
        return Err(Error::LambdaOnSpectrum {
            re: lambda.re,
            im: lambda.im,
            distance: dist,
        });
    }
    Ok(1.0 / dist)
}

/// `A = T + B` with the perturbation norm `b = ||B||_2` precomputed.
#[derive(Debug, Clone)]
pub struct PerturbedPair {
    t: HermitianOperator,
    b_matrix: CMat,
    b_norm: f64,
    a_matrix: CMat,
}

impl PerturbedPair {
    pub fn new(t: HermitianOperator, b_matrix: CMat) -> Result<Self> {
        if b_matrix.nrows() != t.dim() || b_matrix.ncols() != t.dim() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "T is {0}x{0} but B is {1}x{2}",
                    t.dim(),
                    b_matrix.nrows(),
                    b_matrix.ncols()
                ),
            });
        }
        let b_norm = spectral_norm(&b_matrix);
        let a_matrix = t.matrix() + &b_matrix;
        Ok(PerturbedPair {
            t,
            b_matrix,
            b_norm,
            a_matrix,
        })
    }

    pub fn t(&self) -> &HermitianOperator {
        &self.t
    }

    pub fn b_matrix(&self) -> &CMat {
        &self.b_matrix
    }

    /// `||B||_2`.
    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    pub fn a_matrix(&self) -> &CMat {
        &self.a_matrix
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }
}

/// Outcome of the gap hypothesis `b < d/2`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HypothesisReport {
    pub holds: bool,
    pub b: f64,
    pub d: f64,
    /// `d/2 - b`; negative when the hypothesis fails.
    pub margin: f64,
}

/// Checks `||B|| < d/2` after verifying that the unperturbed spectrum is
/// actually enclosed by the family.
pub fn check_hypothesis(pair: &PerturbedPair, family: &SegmentFamily) -> Result<HypothesisReport> {
    pair.t().check_spectrum_within(family)?;
    let b = pair.b_norm();
    let d = family.gap();
    let margin = d / 2.0 - b;
    Ok(HypothesisReport {
        holds: b < d / 2.0,
        b,
        d,
        margin,
    })
}

/// Orthogonal spectral projections of `T` onto the eigenspaces grouped by
/// segment, one projection per segment (zero-rank segments give zero
/// matrices). Errors if some eigenvalue lies in no segment.
pub fn unperturbed_projections(
    t: &HermitianOperator,
    family: &SegmentFamily,
) -> Result<Vec<CMat>> {
    let n = t.dim();
    let mut projections = vec![CMat::zeros(n, n); family.len()];
    'eigen: for (i, &ti) in t.eigenvalues().iter().enumerate() {
        for (j, s) in family.segments().iter().enumerate() {
            if s.contains(ti) {
                let v = t.eigenvectors().column(i);
                projections[j] += v * v.adjoint();
                continue 'eigen;
            }
        }
        return Err(Error::SpectrumOutsideSegments { value: ti });
    }
    Ok(projections)
}

/// Assigns every complex eigenvalue to the closed `b`-neighborhood of a
/// segment, breaking ties (only possible when neighborhoods overlap) by the
/// nearest segment. `slack` loosens the membership test to absorb roundoff.
pub fn assign_eigenvalues(
    values: &[C64],
    family: &SegmentFamily,
    b: f64,
    slack: f64,
) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|&z| {
            let (j, dist) = family.nearest_segment(z);
            if dist <= b + slack {
                Ok(j)
            } else {
                Err(Error::UnassignedEigenvalue { re: z.re, im: z.im })
            }
        })
        .collect()
}
