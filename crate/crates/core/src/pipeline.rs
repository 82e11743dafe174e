//! End-to-end certification: runs every check against one operator pair and
//! aggregates the outcome into a single serializable report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{certify_basis, cross_orthogonality};
use crate::bounds::{
    check_gap_sum_bound, check_horizontal_bound, check_in_uniform_bound,
    check_line_integral_identity, check_neighborhood_separation, check_resolvent_decay,
    check_spectral_function, check_step2_aggregate, check_sum_bound_assembled,
    check_vertical_bounds, measure_c1, resolvent_bound_suite, BoundReport,
};
use crate::contour::ContourStyle;
use crate::error::Result;
use crate::linalg::{cplx, spectral_norm, CVec};
use crate::projections::{
    contour_projections, eigen_oracle_projections, max_partial_sum_index, partial_sum_check,
    verify_projection_set, ProjectionSet, VerificationReport,
};
use crate::spectral::{check_hypothesis, HypothesisReport, PerturbedPair, SegmentFamily};

/// Residual threshold every certified quantity must meet.
pub const CERT_TOL: f64 = 1e-8;
/// Block spectra must reproduce the spectrum of `A` to this accuracy.
pub const SPECTRA_TOL: f64 = 1e-7;

/// Tuning knobs of a certification run. Defaults match the reference
/// configuration used by the acceptance runs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CertificationConfig {
    /// Quadrature target for adaptive contour integration.
    pub tol: f64,
    /// Base Gauss-Legendre order per contour edge.
    pub quad_order: usize,
    pub style: ContourStyle,
    /// Contour radius as an absolute value; `None` picks the midpoint of
    /// `(b, d/2)` (or `1.1 b` in force mode when that interval is empty).
    pub b_prime: Option<f64>,
    /// Keep going when the hypothesis `b < d/2` fails, flagging failures
    /// instead of stopping.
    pub force: bool,
    /// Sample count for the pointwise resolvent certification.
    pub resolvent_samples: usize,
    /// Random test vectors for the quadratic-form checks.
    pub random_vectors: usize,
    pub sample_seed: u64,
    /// Worker threads for the contour projections and resolvent sampling.
    pub parallel: usize,
    /// Run only the hypothesis and bound checks, skipping projections,
    /// basis geometry and block diagonalization.
    pub bounds_only: bool,
}

impl Default for CertificationConfig {
    fn default() -> Self {
        CertificationConfig {
            tol: 1e-9,
            quad_order: 32,
            style: ContourStyle::Rectangle,
            b_prime: None,
            force: false,
            resolvent_samples: 1000,
            random_vectors: 100,
            sample_seed: 2718281828,
            parallel: 1,
            bounds_only: false,
        }
    }
}

/// One eigenvalue of `A` with its cluster assignment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EigenvalueRow {
    pub re: f64,
    pub im: f64,
    /// Index of the assigned segment in left-to-right order.
    pub cluster: usize,
    /// Signed label of the cluster (0 nearest the family center).
    pub label: i64,
    /// Distance to the assigned segment; at most `b` when the enclosure
    /// holds.
    pub distance: f64,
}

/// Per-cluster projection diagnostics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClusterRow {
    pub cluster: usize,
    pub label: i64,
    pub rank: usize,
    pub idempotency_residual: f64,
    pub order_per_edge: usize,
    pub max_condition: f64,
    /// `||Q_j - Q_j^oracle||_2`.
    pub cross_method_distance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProjectionSummary {
    pub clusters: Vec<ClusterRow>,
    pub verification: VerificationReport,
    pub max_cross_method_distance: f64,
    pub oracle_vector_condition: f64,
    pub oracle_near_defective: bool,
    pub b_prime: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PartialSumRow {
    pub n: usize,
    pub identity_residual: f64,
    pub correction_norm: f64,
    pub horizontal_norm: f64,
    pub vertical_central_norm: f64,
    pub vertical_outer_norm: f64,
    pub contour_vs_sum: f64,
    pub order_per_edge: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BasisSummary {
    pub gram_min_eigenvalue: f64,
    pub gram_max_eigenvalue: f64,
    pub cond_k: f64,
    pub max_hermiticity_residual: f64,
    pub max_transformed_idempotency: f64,
    pub unconditional_value: f64,
    pub unconditional_mode: String,
    pub cond_bound_pass: bool,
    pub max_cross_orthogonality: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlockSummary {
    pub sizes: Vec<usize>,
    pub off_block_residual: f64,
    pub transformed_offdiag: f64,
    /// Worst distance between the sorted multiset of block eigenvalues and
    /// the sorted spectrum of `A`.
    pub spectra_distance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StageError {
    pub stage: String,
    pub error: String,
}

/// Wall-clock seconds per stage. Compares equal to anything so reports can
/// be diffed for reproducibility without the timings getting in the way.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct StageTimings(pub Vec<(String, f64)>);

impl PartialEq for StageTimings {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// Complete outcome of one certification run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CertificationReport {
    pub dim: usize,
    pub segment_count: usize,
    /// Sorted segment endpoints, echoed so the report is self-contained.
    pub segments: Vec<(f64, f64)>,
    pub b_norm: f64,
    /// The generating spec, when the instance came from one.
    pub instance: Option<crate::instance::InstanceSpec>,
    pub config: CertificationConfig,
    pub hypothesis: Option<HypothesisReport>,
    pub eigenvalues: Vec<EigenvalueRow>,
    pub projections: Option<ProjectionSummary>,
    pub partial_sums: Vec<PartialSumRow>,
    pub bounds: Vec<BoundReport>,
    pub basis: Option<BasisSummary>,
    pub blocks: Option<BlockSummary>,
    pub warnings: Vec<String>,
    pub stage_errors: Vec<StageError>,
    pub overall_pass: bool,
    pub timings: StageTimings,
}

impl CertificationReport {
    /// All failing bound names, for compact display.
    pub fn failing_bounds(&self) -> Vec<&str> {
        self.bounds
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect()
    }
}

fn random_vectors(n: usize, count: usize, seed: u64) -> Vec<CVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            CVec::from_fn(n, |_, _| {
                cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        })
        .collect()
}

/// Runs the full certification. Never panics on a valid pair: stage
/// failures land in `stage_errors` and clear `overall_pass`.
pub fn run_certification(
    pair: &PerturbedPair,
    family: &SegmentFamily,
    config: &CertificationConfig,
) -> CertificationReport {
    let mut report = CertificationReport {
        dim: pair.dim(),
        segment_count: family.len(),
        segments: family
            .segments()
            .iter()
            .map(|s| (s.alpha(), s.beta()))
            .collect(),
        b_norm: pair.b_norm(),
        instance: None,
        config: config.clone(),
        hypothesis: None,
        eigenvalues: Vec::new(),
        projections: None,
        partial_sums: Vec::new(),
        bounds: Vec::new(),
        basis: None,
        blocks: None,
        warnings: Vec::new(),
        stage_errors: Vec::new(),
        overall_pass: false,
        timings: StageTimings::default(),
    };
    let mut pass = true;

    macro_rules! stage {
        ($name:expr, $body:expr) => {{
            let started = Instant::now();
            let out: Result<_> = (|| $body)();
            report
                .timings
                .0
                .push(($name.to_string(), started.elapsed().as_secs_f64()));
            match out {
                Ok(v) => Some(v),
                Err(e) => {
                    report.stage_errors.push(StageError {
                        stage: $name.to_string(),
                        error: e.to_string(),
                    });
                    pass = false;
                    None
                }
            }
        }};
    }

    // Stage 1: hypothesis b < d/2 over the declared segment structure.
    let hypothesis = stage!("hypothesis", check_hypothesis(pair, family));
    let hypothesis_holds = hypothesis.as_ref().map_or(false, |h| h.holds);
    report.hypothesis = hypothesis;
    if !hypothesis_holds {
        pass = false;
        if !config.force {
            if report.hypothesis.is_some() {
                report.stage_errors.push(StageError {
                    stage: "hypothesis".into(),
                    error: "perturbation norm reaches d/2; rerun with force to continue".into(),
                });
            }
            return report;
        }
        report
            .warnings
            .push("hypothesis failed; continuing in force mode".into());
    }
    if report.hypothesis.is_none() {
        // Spectrum enclosure of T failed: nothing downstream is defined.
        return report;
    }

    let b = pair.b_norm();
    let d = family.gap();
    let b_prime = config.b_prime.unwrap_or(if b < d / 2.0 {
        (b + d / 2.0) / 2.0
    } else {
        1.1 * b
    });

    // Stage 2: contour projections plus the eigendecomposition oracle.
    let (contour, oracle) = if config.bounds_only {
        (None, None)
    } else {
        (
            stage!(
                "contour_projections",
                contour_projections(
                    pair,
                    family,
                    b_prime,
                    config.style,
                    config.tol,
                    config.quad_order,
                    config.parallel,
                )
            ),
            stage!("eigen_oracle", eigen_oracle_projections(pair, family, b)),
        )
    };

    if let Some(o) = &oracle {
        for (&z, &cluster) in o.eigenvalues.iter().zip(&o.assignments) {
            let (_, dist) = family.nearest_segment(z);
            report.eigenvalues.push(EigenvalueRow {
                re: z.re,
                im: z.im,
                cluster,
                label: family.label(cluster),
                distance: dist,
            });
        }
        if o.near_defective {
            report.warnings.push(format!(
                "eigenvector matrix condition {:.3e}: oracle distances are unreliable",
                o.vector_condition
            ));
        }
    }

    // Stage 3: cross-validation and structural verification.
    let set: Option<&ProjectionSet> = contour.as_ref().map(|(s, _)| s);
    if let (Some((set, diags)), Some(o)) = (&contour, &oracle) {
        let summary = stage!("verification", {
            let verification = verify_projection_set(set, pair, family)?;
            let mut clusters = Vec::with_capacity(set.len());
            let mut max_cross = 0.0f64;
            for j in 0..set.len() {
                let cross = spectral_norm(&(&set.matrices()[j] - &o.set.matrices()[j]));
                max_cross = max_cross.max(cross);
                clusters.push(ClusterRow {
                    cluster: j,
                    label: family.label(j),
                    rank: verification.ranks[j],
                    idempotency_residual: diags[j].idempotency_residual,
                    order_per_edge: diags[j].order_per_edge,
                    max_condition: diags[j].max_condition,
                    cross_method_distance: cross,
                });
            }
            Ok(ProjectionSummary {
                clusters,
                verification,
                max_cross_method_distance: max_cross,
                oracle_vector_condition: o.vector_condition,
                oracle_near_defective: o.near_defective,
                b_prime,
            })
        });
        if let Some(s) = &summary {
            let v = &s.verification;
            if !(v.minimality <= CERT_TOL
                && v.completeness <= CERT_TOL
                && v.commutation <= CERT_TOL
                && v.enclosure_pass
                && v.ranks_match_clusters
                && s.max_cross_method_distance <= CERT_TOL)
            {
                pass = false;
            }
        }
        report.projections = summary;
    }

    // Stage 4: partial-sum identity and the uniform window bound.
    if let Some(set) = set {
        let rows = stage!("partial_sums", {
            let mut rows = Vec::new();
            for n in 0..=max_partial_sum_index(family) {
                let c = partial_sum_check(pair, family, set, n, config.tol, config.quad_order)?;
                let row_pass = c.identity_residual <= CERT_TOL && c.contour_vs_sum <= CERT_TOL;
                rows.push(PartialSumRow {
                    n,
                    identity_residual: c.identity_residual,
                    correction_norm: c.norm,
                    horizontal_norm: c.horizontal_norm,
                    vertical_central_norm: c.vertical_central_norm,
                    vertical_outer_norm: c.vertical_outer_norm,
                    contour_vs_sum: c.contour_vs_sum,
                    order_per_edge: c.order_per_edge,
                    pass: row_pass,
                });
            }
            Ok(rows)
        });
        if let Some(rows) = rows {
            if rows.iter().any(|r| !r.pass) {
                pass = false;
            }
            report.partial_sums = rows;
        }
    }

    // Stage 5: closed-form bounds. The window bounds require b < d/2; the
    // pointwise and unperturbed checks hold regardless.
    let xs = random_vectors(pair.dim(), config.random_vectors.max(1), config.sample_seed);
    if hypothesis_holds {
        let window_bounds = stage!("window_bounds", {
            let mut out = Vec::new();
            out.push(check_horizontal_bound(pair, family, 0, 64)?);
            let (c, o) = check_vertical_bounds(pair, family, 0, config.quad_order)?;
            out.push(c);
            out.push(o);
            out.extend(check_in_uniform_bound(pair, family, config.quad_order)?);
            Ok(out)
        });
        if let Some(rs) = window_bounds {
            report.bounds.extend(rs);
        }

        let sum_bound = stage!("sum_bound", {
            let c1 = measure_c1(pair, family, 16)?;
            let mut out = vec![check_step2_aggregate(pair, family, &xs, c1.measured)?];
            if let Some(set) = set {
                out.push(check_sum_bound_assembled(set, family, &xs, c1.measured)?);
            }
            out.insert(0, c1.report);
            Ok(out)
        });
        if let Some(rs) = sum_bound {
            report.bounds.extend(rs);
        }
    } else {
        report
            .warnings
            .push("window bounds need b < d/2; skipped".into());
    }

    let unperturbed = stage!("unperturbed_identities", {
        let x = &xs[0];
        let mut out = Vec::new();
        out.push(check_spectral_function(
            pair.t(),
            x,
            cplx(family.span().0 - d, d / 3.0),
        )?);
        out.push(check_line_integral_identity(pair.t(), family, x)?);
        out.push(check_gap_sum_bound(pair.t(), family, x)?);
        out.push(check_neighborhood_separation(family, b)?);
        out.push(check_resolvent_decay(pair.t(), x)?);
        Ok(out)
    });
    if let Some(rs) = unperturbed {
        report.bounds.extend(rs);
    }

    if config.resolvent_samples > 0 {
        let pointwise = stage!(
            "resolvent_samples",
            resolvent_bound_suite(
                pair,
                family,
                config.resolvent_samples,
                config.sample_seed,
                config.parallel,
            )
        );
        if let Some(suite) = pointwise {
            report.bounds.extend(suite.reports);
        }
    }

    if report.bounds.iter().any(|r| !r.pass) {
        pass = false;
    }

    // Stage 6: basis geometry (Gram operator, similarity, sign constants).
    if let Some(set) = set {
        let basis = stage!("basis", {
            let cert = certify_basis(set, config.sample_seed)?;
            let max_herm = cert
                .similarity
                .hermiticity_residuals
                .iter()
                .fold(0.0f64, |a, &v| a.max(v));
            let max_idem = cert
                .similarity
                .orthogonalized
                .idempotency_residuals()
                .iter()
                .fold(0.0f64, |a, &v| a.max(v));
            let pairs: Vec<(CVec, CVec)> = xs
                .chunks_exact(2)
                .map(|c| (c[0].clone(), c[1].clone()))
                .collect();
            let cross = cross_orthogonality(set, &cert.gram, &pairs);
            let max_cross = cross.iter().fold(0.0f64, |a, &v| a.max(v));
            let summary = BasisSummary {
                gram_min_eigenvalue: cert.similarity.min_eigenvalue,
                gram_max_eigenvalue: cert.similarity.max_eigenvalue,
                cond_k: cert.similarity.cond_k,
                max_hermiticity_residual: max_herm,
                max_transformed_idempotency: max_idem,
                unconditional_value: cert.unconditional.value,
                unconditional_mode: match cert.unconditional.mode {
                    crate::basis::SignSearchMode::Exhaustive { patterns } => {
                        format!("exhaustive({patterns})")
                    }
                    crate::basis::SignSearchMode::Sampled { patterns, seed } => {
                        format!("sampled({patterns}, seed {seed})")
                    }
                },
                cond_bound_pass: cert.cond_bound_pass,
                max_cross_orthogonality: max_cross,
            };
            Ok((cert, summary))
        });
        if let Some((cert, summary)) = basis {
            if !(summary.max_hermiticity_residual <= CERT_TOL
                && summary.max_transformed_idempotency <= CERT_TOL
                && summary.cond_bound_pass
                && summary.max_cross_orthogonality <= CERT_TOL)
            {
                pass = false;
            }
            report.basis = Some(summary);

            // Stage 7: simultaneous block diagonalization.
            let blocks = stage!("block_diagonalization", {
                let bd = crate::basis::block_diagonalize(pair, set, &cert.similarity)?;
                let mut block_eigs: Vec<crate::linalg::C64> =
                    bd.block_spectra.iter().flatten().copied().collect();
                let mut a_eigs = crate::linalg::complex_eigen(pair.a_matrix())?.values;
                let key = |z: &crate::linalg::C64| (z.re, z.im);
                block_eigs.sort_by(|p, q| key(p).partial_cmp(&key(q)).unwrap());
                a_eigs.sort_by(|p, q| key(p).partial_cmp(&key(q)).unwrap());
                let spectra_distance = block_eigs
                    .iter()
                    .zip(&a_eigs)
                    .map(|(p, q)| (p - q).norm())
                    .fold(0.0f64, f64::max);
                Ok(BlockSummary {
                    sizes: bd.blocks.iter().map(|m| m.nrows()).collect(),
                    off_block_residual: bd.off_block_residual,
                    transformed_offdiag: bd.transformed_offdiag,
                    spectra_distance,
                })
            });
            if let Some(summary) = blocks {
                if !(summary.off_block_residual <= CERT_TOL
                    && summary.spectra_distance <= SPECTRA_TOL)
                {
                    pass = false;
                }
                report.blocks = Some(summary);
            }
        }
    }

    report.overall_pass = pass && report.stage_errors.is_empty();
    report
}
