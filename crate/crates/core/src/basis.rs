//! From a minimal complete family of projections to an orthogonal one.
//!
//! The Gram operator `G = sum_j Q_j^H Q_j` of a minimal complete family is
//! positive definite; its square root `K = G^{1/2}` is the similarity that
//! turns every `Q_j` into the Hermitian idempotent `K Q_j K^{-1}`. The
//! condition number of `K` bounds the unconditionality constant of the
//! decomposition `x = sum_j Q_j x`, and the `K^{-1}`-image of the
//! orthogonalized eigenbasis block-diagonalizes `A`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    complex_eigen, cplx, hermitian_eigen, hermitian_part, hpd_sqrt, spectral_norm, CMat, CVec,
    C64,
};
use crate::projections::{ProjectionMethod, ProjectionSet};
use crate::spectral::PerturbedPair;

/// Residual level up to which the input family must be minimal and complete
/// before basis analysis makes sense.
pub const SYSTEM_RESIDUAL_LIMIT: f64 = 1e-6;

/// `G = sum_j Q_j^H Q_j`, verified Hermitian positive definite.
pub fn gram_operator(set: &ProjectionSet) -> Result<CMat> {
    let completeness = set.completeness_residual();
    if completeness > SYSTEM_RESIDUAL_LIMIT {
        return Err(Error::IncompleteSystem {
            residual: completeness,
            limit: SYSTEM_RESIDUAL_LIMIT,
        });
    }
    let minimality = set.minimality_residual();
    if minimality > SYSTEM_RESIDUAL_LIMIT {
        return Err(Error::IncompleteSystem {
            residual: minimality,
            limit: SYSTEM_RESIDUAL_LIMIT,
        });
    }
    let n = set.dim();
    let mut g = CMat::zeros(n, n);
    for q in set.matrices() {
        g += q.adjoint() * q;
    }
    let g = hermitian_part(&g);
    let eig = hermitian_eigen(&g)?;
    let min_eigenvalue = eig.values[0];
    if min_eigenvalue <= 0.0 {
        return Err(Error::IndefiniteGram { min_eigenvalue });
    }
    Ok(g)
}

/// The similarity `K = G^{1/2}` and the orthogonalized projections.
pub struct Similarity {
    pub k: CMat,
    pub k_inv: CMat,
    /// Extreme eigenvalues `m, M` of the Gram operator: for every `x`,
    /// `m ||x||^2 <= sum_j ||Q_j x||^2 <= M ||x||^2`.
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `cond(K) = sqrt(M/m)`.
    pub cond_k: f64,
    /// `P_j = K Q_j K^{-1}`, Hermitian idempotents up to the input residual.
    pub orthogonalized: ProjectionSet,
    /// `||P_j - P_j^H||_2` per projection.
    pub hermiticity_residuals: Vec<f64>,
}

pub fn similarity_transform(set: &ProjectionSet, gram: &CMat) -> Result<Similarity> {
    let root = hpd_sqrt(gram)?;
    let (k, k_inv) = (root.sqrt, root.inv_sqrt);
    let transformed: Vec<CMat> = set
        .matrices()
        .iter()
        .map(|q| &k * q * &k_inv)
        .collect();
    let hermiticity_residuals = transformed
        .iter()
        .map(|p| spectral_norm(&(p - p.adjoint())))
        .collect();
    let orthogonalized =
        ProjectionSet::from_matrices(ProjectionMethod::ContourQuadrature, transformed, set.tolerance());
    Ok(Similarity {
        cond_k: (root.max_eigenvalue / root.min_eigenvalue).sqrt(),
        min_eigenvalue: root.min_eigenvalue,
        max_eigenvalue: root.max_eigenvalue,
        k,
        k_inv,
        orthogonalized,
        hermiticity_residuals,
    })
}

/// How the sign patterns for the unconditionality constant were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SignSearchMode {
    /// All `2^(J-1)` patterns with the first sign fixed to `+1` (the norm
    /// is invariant under a global sign flip).
    Exhaustive { patterns: usize },
    /// Seeded random patterns.
    Sampled { patterns: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UnconditionalConstant {
    /// `max over signs of || sum_j eps_j Q_j ||_2`.
    pub value: f64,
    pub mode: SignSearchMode,
}

/// Families of up to this many projections get the exhaustive sign search.
pub const EXHAUSTIVE_SIGN_LIMIT: usize = 20;
const SAMPLED_SIGN_PATTERNS: usize = 10_000;

/// Largest spectral norm of a signed sum `sum_j eps_j Q_j`, `eps_j = +-1`.
/// Exhaustive for families of up to `EXHAUSTIVE_SIGN_LIMIT` projections,
/// seeded sampling beyond that.
pub fn unconditional_constant(set: &ProjectionSet, seed: u64) -> UnconditionalConstant {
    let j_count = set.len();
    let n = set.dim();
    let norm_of = |signs: &[f64]| {
        let mut sum = CMat::zeros(n, n);
        for (q, &s) in set.matrices().iter().zip(signs) {
            sum += q * cplx(s, 0.0);
        }
        spectral_norm(&sum)
    };
    if j_count <= EXHAUSTIVE_SIGN_LIMIT {
        let patterns = 1usize << j_count.saturating_sub(1);
        let mut value = 0.0f64;
        let mut signs = vec![1.0f64; j_count];
        for mask in 0..patterns {
            for (bit, s) in signs.iter_mut().enumerate().skip(1) {
                *s = if mask >> (bit - 1) & 1 == 1 { -1.0 } else { 1.0 };
            }
            value = value.max(norm_of(&signs));
        }
        UnconditionalConstant {
            value,
            mode: SignSearchMode::Exhaustive { patterns },
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut value = 0.0f64;
        let mut signs = vec![1.0f64; j_count];
        for _ in 0..SAMPLED_SIGN_PATTERNS {
            for s in signs.iter_mut().skip(1) {
                *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            }
            value = value.max(norm_of(&signs));
        }
        UnconditionalConstant {
            value,
            mode: SignSearchMode::Sampled {
                patterns: SAMPLED_SIGN_PATTERNS,
                seed,
            },
        }
    }
}

/// `sum_j |(Q_j x, x)|` for each test vector.
pub fn sum_bound_check(set: &ProjectionSet, xs: &[CVec]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            set.matrices()
                .iter()
                .map(|q| x.dotc(&(q * x)).norm())
                .sum()
        })
        .collect()
}

/// Normalized cross terms `|(G Q_j x, Q_k y)| / (||Q_j x||_G ||Q_k y||_G)`
/// maximized over `j != k`, one value per `(x, y)` pair; terms with a
/// vanishing factor are skipped.
pub fn cross_orthogonality(
    set: &ProjectionSet,
    gram: &CMat,
    pairs: &[(CVec, CVec)],
) -> Vec<f64> {
    let g_norm = |v: &CVec| -> f64 { v.dotc(&(gram * v)).re.max(0.0).sqrt() };
    pairs
        .iter()
        .map(|(x, y)| {
            let qx: Vec<CVec> = set.matrices().iter().map(|q| q * x).collect();
            let qy: Vec<CVec> = set.matrices().iter().map(|q| q * y).collect();
            let mut worst = 0.0f64;
            for j in 0..set.len() {
                for k in 0..set.len() {
                    if j == k {
                        continue;
                    }
                    let nj = g_norm(&qx[j]);
                    let nk = g_norm(&qy[k]);
                    if nj < 1e-14 || nk < 1e-14 {
                        continue;
                    }
                    let cross = qy[k].dotc(&(gram * &qx[j])).norm();
                    worst = worst.max(cross / (nj * nk));
                }
            }
            worst
        })
        .collect()
}

/// Block diagonalization of `A` in the basis assembled from the
/// orthogonalized projection ranges.
pub struct BlockDiagonalization {
    /// Diagonal blocks of `Z^{-1} A Z`, one per projection.
    pub blocks: Vec<CMat>,
    /// The assembled basis `Z`; its `j`-th column group spans `ran Q_j`.
    pub basis: CMat,
    /// `max_{j != k} ||Q_k A Q_j||_2`.
    pub off_block_residual: f64,
    /// Frobenius norm of the off-diagonal part of `Z^{-1} A Z`, relative to
    /// `||A||_F`.
    pub transformed_offdiag: f64,
    /// Eigenvalues of each block.
    pub block_spectra: Vec<Vec<C64>>,
}

pub fn block_diagonalize(
    pair: &PerturbedPair,
    set: &ProjectionSet,
    similarity: &Similarity,
) -> Result<BlockDiagonalization> {
    let n = pair.dim();
    let expected: Vec<usize> = set.trace_ranks();
    if expected.iter().sum::<usize>() != n {
        return Err(Error::RankDeficientBlock {
            index: set.len(),
            found: expected.iter().sum::<usize>(),
            expected: n,
        });
    }

    // Columns of Z: K^{-1} (orthonormal basis of ran K Q_j K^{-1}).
    let mut basis = CMat::zeros(n, n);
    let mut col = 0usize;
    for (j, p_hat) in similarity.orthogonalized.matrices().iter().enumerate() {
        let eig = hermitian_eigen(&hermitian_part(p_hat))?;
        let picked: Vec<usize> = (0..n).filter(|&i| eig.values[i] > 0.5).collect();
        if picked.len() != expected[j] {
            return Err(Error::RankDeficientBlock {
                index: j,
                found: picked.len(),
                expected: expected[j],
            });
        }
        for &i in &picked {
            let z = &similarity.k_inv * eig.vectors.column(i);
            basis.set_column(col, &z);
            col += 1;
        }
    }

    let lu = basis.clone().lu();
    let az = lu
        .solve(&(pair.a_matrix() * &basis))
        .ok_or(Error::RankDeficientBlock {
            index: set.len(),
            found: 0,
            expected: n,
        })?;

    let mut blocks = Vec::with_capacity(set.len());
    let mut block_spectra = Vec::with_capacity(set.len());
    let mut offdiag = az.clone();
    let mut start = 0usize;
    for &r in &expected {
        let block = az.view((start, start), (r, r)).clone_owned();
        if r > 0 {
            block_spectra.push(complex_eigen(&block)?.values);
        } else {
            block_spectra.push(Vec::new());
        }
        offdiag.view_mut((start, start), (r, r)).fill(cplx(0.0, 0.0));
        blocks.push(block);
        start += r;
    }
    let transformed_offdiag = offdiag.norm() / pair.a_matrix().norm().max(1e-300);

    let mut off_block_residual = 0.0f64;
    for j in 0..set.len() {
        for k in 0..set.len() {
            if j != k {
                let cross = set.matrices()[k].clone() * pair.a_matrix() * &set.matrices()[j];
                off_block_residual = off_block_residual.max(spectral_norm(&cross));
            }
        }
    }

    Ok(BlockDiagonalization {
        blocks,
        basis,
        off_block_residual,
        transformed_offdiag,
        block_spectra,
    })
}

/// Summary certificate combining the Gram analysis, the similarity, and the
/// unconditionality search.
pub struct BasisCertificate {
    pub gram: CMat,
    pub similarity: Similarity,
    pub unconditional: UnconditionalConstant,
    /// `unconditional.value <= cond_k + 1e-6`.
    pub cond_bound_pass: bool,
}

pub fn certify_basis(set: &ProjectionSet, sign_seed: u64) -> Result<BasisCertificate> {
    let gram = gram_operator(set)?;
    let similarity = similarity_transform(set, &gram)?;
    let unconditional = unconditional_constant(set, sign_seed);
    let cond_bound_pass = unconditional.value <= similarity.cond_k + 1e-6;
    Ok(BasisCertificate {
        gram,
        similarity,
        unconditional,
        cond_bound_pass,
    })
}
