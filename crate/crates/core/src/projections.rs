//! Riesz projections `Q_j = -(1/2 pi i) \oint (A - lambda)^{-1} d lambda`
//! by adaptive contour quadrature, an independent eigensolver oracle, and
//! the partial-sum identity `sum Q_j = sum P_j + I_n` with its correction
//! integral `I_n = +(1/2 pi i) \oint G d lambda`.

use std::f64::consts::PI;

use crate::contour::{
    attach_quadrature, partial_sum_rectangle, segment_contour, Contour, ContourStyle, EdgeKind,
};
use crate::error::{Error, Result};
use crate::linalg::{
    complex_eigen, cplx, identity, idempotency_residual, numerical_rank, spectral_norm, CMat,
    CVec, C64,
};
use crate::resolvent::{splitting_term, ShiftedFactor};
use crate::spectral::{
    assign_eigenvalues, unperturbed_projections, PerturbedPair, SegmentFamily,
};

/// Where a projection set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    /// Contour quadrature of the resolvent of `A`.
    ContourQuadrature,
    /// Eigendecomposition of `A` with eigenvalues grouped by neighborhood.
    EigenOracle,
    /// Spectral projections of the unperturbed `T`.
    SpectralOfT,
}

/// Family of projections, one per segment, with their quality residuals.
#[derive(Debug, Clone)]
pub struct ProjectionSet {
    method: ProjectionMethod,
    matrices: Vec<CMat>,
    idempotency_residuals: Vec<f64>,
    tolerance: f64,
}

impl ProjectionSet {
    pub fn from_matrices(method: ProjectionMethod, matrices: Vec<CMat>, tolerance: f64) -> Self {
        let idempotency_residuals = matrices.iter().map(idempotency_residual).collect();
        ProjectionSet {
            method,
            matrices,
            idempotency_residuals,
            tolerance,
        }
    }

    pub fn method(&self) -> ProjectionMethod {
        self.method
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn idempotency_residuals(&self) -> &[f64] {
        &self.idempotency_residuals
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    pub fn sum(&self) -> CMat {
        let n = self.dim();
        self.matrices
            .iter()
            .fold(CMat::zeros(n, n), |acc, m| acc + m)
    }

    /// `|| sum_j Q_j - I ||_2`.
    pub fn completeness_residual(&self) -> f64 {
        spectral_norm(&(self.sum() - identity(self.dim())))
    }

    /// `max_{j != k} || Q_j Q_k ||_2`.
    pub fn minimality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.len() {
            for k in 0..self.len() {
                if j != k {
                    worst = worst.max(spectral_norm(&(&self.matrices[j] * &self.matrices[k])));
                }
            }
        }
        worst
    }

    /// `max_j || M Q_j - Q_j M ||_2`.
    pub fn commutation_residual(&self, m: &CMat) -> f64 {
        self.matrices
            .iter()
            .map(|q| spectral_norm(&(m * q - q * m)))
            .fold(0.0, f64::max)
    }

    /// Numerical ranks (singular values above 1e-6 of the largest).
    pub fn ranks(&self) -> Vec<usize> {
        self.matrices.iter().map(|q| numerical_rank(q, 1e-6)).collect()
    }

    /// Traces rounded to integers; for true projections this equals `ranks`.
    pub fn trace_ranks(&self) -> Vec<usize> {
        self.matrices
            .iter()
            .map(|q| q.trace().re.round().max(0.0) as usize)
            .collect()
    }
}

/// Splits a vector into its components `Q_j x`.
pub fn expand_vector(set: &ProjectionSet, x: &CVec) -> Result<Vec<CVec>> {
    if x.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("vector of length {} with {}x{} projections", x.len(), set.dim(), set.dim()),
        });
    }
    Ok(set.matrices().iter().map(|q| q * x).collect())
}

/// One contour-integrated projection with its quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct RieszProjection {
    pub matrix: CMat,
    /// Achieved idempotency residual `||Q^2 - Q||_F`.
    pub residual: f64,
    pub order_per_edge: usize,
    /// Largest 1-norm condition number met among the shifted solves.
    pub max_condition: f64,
}

pub const MAX_QUAD_ORDER: usize = 512;

/// Integrates `-(1/2 pi i) \oint (A - z)^{-1} dz` over the contour, doubling
/// the per-edge quadrature order until the idempotency residual drops below
/// `tol` or the order cap is hit.
pub fn riesz_projection(
    pair: &PerturbedPair,
    contour: &Contour,
    tol: f64,
) -> Result<RieszProjection> {
    let n = pair.dim();
    let mut order = contour.order_per_edge().max(8);
    loop {
        let c = attach_quadrature(contour, order);
        let mut acc = CMat::zeros(n, n);
        let mut max_condition = 0.0f64;
        for node in c.nodes() {
            let factor =
                ShiftedFactor::new(pair.a_matrix(), node.point).map_err(|e| match e {
                    Error::SingularShift { re, im } => Error::ContourHitsSpectrum { re, im },
                    other => other,
                })?;
            let (inv, cond) = factor.inverse()?;
            max_condition = max_condition.max(cond);
            acc += inv * node.weight;
        }
        // -(1/2 pi i) = i / (2 pi).
        let matrix = acc * cplx(0.0, 1.0 / (2.0 * PI));
        let residual = idempotency_residual(&matrix);
        if residual < tol {
            return Ok(RieszProjection {
                matrix,
                residual,
                order_per_edge: order,
                max_condition,
            });
        }
        if order >= MAX_QUAD_ORDER {
            return Err(Error::QuadratureStalled {
                nodes_per_edge: order,
                residual,
                target: tol,
            });
        }
        order *= 2;
    }
}

/// Per-segment diagnostics of a contour-integrated projection set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProjectionDiagnostics {
    pub idempotency_residual: f64,
    pub order_per_edge: usize,
    pub max_condition: f64,
}

/// Riesz projections for every segment of the family, all on contours of
/// radius `b_prime`. Runs segments on `threads` OS threads (results are
/// independent of the thread count).
pub fn contour_projections(
    pair: &PerturbedPair,
    family: &SegmentFamily,
    b_prime: f64,
    style: ContourStyle,
    tol: f64,
    base_order: usize,
    threads: usize,
) -> Result<(ProjectionSet, Vec<ProjectionDiagnostics>)> {
    let jobs: Vec<Contour> = family
        .segments()
        .iter()
        .map(|s| attach_quadrature(&segment_contour(s, b_prime, style), base_order))
        .collect();

    let mut results: Vec<Option<Result<RieszProjection>>> = (0..jobs.len()).map(|_| None).collect();
    if threads <= 1 || jobs.len() <= 1 {
        for (j, c) in jobs.iter().enumerate() {
            results[j] = Some(riesz_projection(pair, c, tol));
        }
    } else {
        let counter = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<RieszProjection>>>> =
            (0..jobs.len()).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads.min(jobs.len()) {
                scope.spawn(|| loop {
                    let j = counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if j >= jobs.len() {
                        break;
                    }
                    let r = riesz_projection(pair, &jobs[j], tol);
                    *slots[j].lock().unwrap() = Some(r);
                });
            }
        });
        for (j, slot) in slots.into_iter().enumerate() {
            results[j] = slot.into_inner().unwrap();
        }
    }

    let mut matrices = Vec::with_capacity(jobs.len());
    let mut diagnostics = Vec::with_capacity(jobs.len());
    for r in results {
        let p = r.unwrap()?;
        diagnostics.push(ProjectionDiagnostics {
            idempotency_residual: p.residual,
            order_per_edge: p.order_per_edge,
            max_condition: p.max_condition,
        });
        matrices.push(p.matrix);
    }
    Ok((
        ProjectionSet::from_matrices(ProjectionMethod::ContourQuadrature, matrices, tol),
        diagnostics,
    ))
}

/// Projections from a dense eigendecomposition of `A`: eigenvalues are
/// assigned to the `b`-neighborhood they lie in (ties to the nearest
/// segment), and `Q_j = V D_j V^{-1}` with `D_j` selecting cluster `j`.
pub struct OracleProjections {
    pub set: ProjectionSet,
    pub eigenvalues: Vec<C64>,
    pub assignments: Vec<usize>,
    /// Condition number of the eigenvector matrix.
    pub vector_condition: f64,
    pub near_defective: bool,
}

pub fn eigen_oracle_projections(
    pair: &PerturbedPair,
    family: &SegmentFamily,
    b: f64,
) -> Result<OracleProjections> {
    let eig = complex_eigen(pair.a_matrix())?;
    let assignments = assign_eigenvalues(&eig.values, family, b, 1e-8)?;
    let vh = eig.vectors.adjoint();
    let lu = vh.clone().lu();
    let mut matrices = Vec::with_capacity(family.len());
    for j in 0..family.len() {
        // Q_j = V D_j V^{-1} computed as (V^{-H} (D_j V^H))^H.
        let mut rhs = vh.clone();
        for (i, &cluster) in assignments.iter().enumerate() {
            if cluster != j {
                rhs.row_mut(i).fill(cplx(0.0, 0.0));
            }
        }
        let w = lu.solve(&rhs).ok_or(Error::EigDidNotConverge)?;
        matrices.push(w.adjoint());
    }
    let set = ProjectionSet::from_matrices(ProjectionMethod::EigenOracle, matrices, 0.0);
    Ok(OracleProjections {
        set,
        eigenvalues: eig.values,
        assignments,
        vector_condition: eig.vector_condition,
        near_defective: eig.vector_condition > crate::linalg::ComplexEigen::NEAR_DEFECTIVE,
    })
}

/// The unperturbed spectral projections of `T` as a `ProjectionSet`.
pub fn spectral_projection_set(
    pair: &PerturbedPair,
    family: &SegmentFamily,
) -> Result<ProjectionSet> {
    let ps = unperturbed_projections(pair.t(), family)?;
    Ok(ProjectionSet::from_matrices(
        ProjectionMethod::SpectralOfT,
        ps,
        0.0,
    ))
}

/// Correction integral of the partial-sum identity on the rectangle `R_n`:
/// `sum_{|j| <= n} Q_j x = sum_{|j| <= n} P_j x + I_n x`.
#[derive(Debug, Clone)]
pub struct CorrectionIntegral {
    pub n: usize,
    /// `I_n = +(1/2 pi i) \oint_{R_n} G(lambda) d lambda`.
    pub matrix: CMat,
    pub norm: f64,
    /// Contribution of the two horizontal sides.
    pub horizontal_norm: f64,
    /// Contribution of the vertical pieces crossing the gaps (|Im| <= d).
    pub vertical_central_norm: f64,
    /// Contribution of the outer vertical pieces (|Im| > d).
    pub vertical_outer_norm: f64,
    /// `|| S_n - sum P_j - I_n ||_2` where `S_n` is the quadrature of the
    /// full `A`-resolvent over the same rectangle.
    pub identity_residual: f64,
    /// `|| S_n - sum_{|j| <= n} Q_j ||_2` against the given projection set.
    pub contour_vs_sum: f64,
    pub order_per_edge: usize,
}

/// Evaluates the partial-sum identity on `R_n`, doubling the quadrature
/// order until the identity residual (which is pure quadrature error)
/// drops below `tol`.
pub fn partial_sum_check(
    pair: &PerturbedPair,
    family: &SegmentFamily,
    set: &ProjectionSet,
    n: usize,
    tol: f64,
    base_order: usize,
) -> Result<CorrectionIntegral> {
    let dim = pair.dim();
    let offset = family.zero_offset();
    let lo = offset.saturating_sub(n);
    let hi = (offset + n).min(family.len() - 1);

    // Unperturbed projections and contour projections inside the rectangle.
    let p_all = unperturbed_projections(pair.t(), family)?;
    let mut p_range = CMat::zeros(dim, dim);
    let mut q_range = CMat::zeros(dim, dim);
    for j in lo..=hi {
        p_range += &p_all[j];
        q_range += &set.matrices()[j];
    }

    let minus_inv_2pii = cplx(0.0, 1.0 / (2.0 * PI)); // -(1/2 pi i)
    let plus_inv_2pii = cplx(0.0, -1.0 / (2.0 * PI)); // +(1/2 pi i)

    let mut order = base_order.max(8);
    loop {
        let contour = partial_sum_rectangle(family, n, pair.b_norm(), order)?;
        let resolvent_integral = contour.integrate_matrix(dim, |z| {
            let factor = ShiftedFactor::new(pair.a_matrix(), z).map_err(|e| match e {
                Error::SingularShift { re, im } => Error::ContourHitsSpectrum { re, im },
                other => other,
            })?;
            Ok(factor.inverse()?.0)
        })?;
        let s_n = &resolvent_integral * minus_inv_2pii;

        let g_horizontal = contour
            .integrate_matrix_over(dim, EdgeKind::Horizontal, |z| splitting_term(pair, z))?
            * plus_inv_2pii;
        let g_central = contour
            .integrate_matrix_over(dim, EdgeKind::VerticalCentral, |z| splitting_term(pair, z))?
            * plus_inv_2pii;
        let g_outer = contour
            .integrate_matrix_over(dim, EdgeKind::VerticalOuter, |z| splitting_term(pair, z))?
            * plus_inv_2pii;
        let correction = &g_horizontal + &g_central + &g_outer;

        let identity_residual = spectral_norm(&(&s_n - &p_range - &correction));
        if identity_residual < tol || order >= MAX_QUAD_ORDER {
            if identity_residual >= tol {
                return Err(Error::QuadratureStalled {
                    nodes_per_edge: order,
                    residual: identity_residual,
                    target: tol,
                });
            }
            let contour_vs_sum = spectral_norm(&(&s_n - &q_range));
            return Ok(CorrectionIntegral {
                n,
                norm: spectral_norm(&correction),
                horizontal_norm: spectral_norm(&g_horizontal),
                vertical_central_norm: spectral_norm(&g_central),
                vertical_outer_norm: spectral_norm(&g_outer),
                matrix: correction,
                identity_residual,
                contour_vs_sum,
                order_per_edge: order,
            });
        }
        order *= 2;
    }
}

/// Largest admissible `n` for partial-sum rectangles: beyond it the window
/// `-n..=n` already covers the whole family.
pub fn max_partial_sum_index(family: &SegmentFamily) -> usize {
    let offset = family.zero_offset();
    offset.max(family.len() - 1 - offset)
}

/// Full verification of a projection set against the perturbed pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerificationReport {
    pub minimality: f64,
    pub completeness: f64,
    pub commutation: f64,
    /// Worst distance by which an eigenvalue of `A` escapes the union of
    /// closed `b`-neighborhoods (0 when the enclosure holds exactly).
    pub enclosure_excess: f64,
    pub enclosure_pass: bool,
    /// Rank of each projection (numerical, 1e-6 threshold).
    pub ranks: Vec<usize>,
    /// Eigenvalues of `A` assigned per cluster.
    pub cluster_sizes: Vec<usize>,
    /// Whether rank(Q_j) matches the number of assigned eigenvalues.
    pub ranks_match_clusters: bool,
}

pub fn verify_projection_set(
    set: &ProjectionSet,
    pair: &PerturbedPair,
    family: &SegmentFamily,
) -> Result<VerificationReport> {
    let b = pair.b_norm();
    let eig = complex_eigen(pair.a_matrix())?;
    let mut enclosure_excess = 0.0f64;
    let mut cluster_sizes = vec![0usize; family.len()];
    for &z in &eig.values {
        let (j, dist) = family.nearest_segment(z);
        enclosure_excess = enclosure_excess.max((dist - b).max(0.0));
        cluster_sizes[j] += 1;
    }
    let ranks = set.ranks();
    Ok(VerificationReport {
        minimality: set.minimality_residual(),
        completeness: set.completeness_residual(),
        commutation: set.commutation_residual(pair.a_matrix()),
        enclosure_excess,
        enclosure_pass: enclosure_excess <= 1e-8,
        ranks_match_clusters: ranks == cluster_sizes,
        ranks,
        cluster_sizes,
    })
}
