//! Acceptance suite: one test per top-level claim, each printing a single
//! `acceptance k (...): PASS` line (run with `--nocapture` to see them).
//!
//! All matrix comparisons here are Frobenius norms computed directly from
//! the matrices, independent of the spectral-norm residuals the library
//! reports internally. Tolerances are fixed; every instance roster is
//! seeded, so the suite is bit-reproducible.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::LazyLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riesz_core::basis::{block_diagonalize, certify_basis, cross_orthogonality, sum_bound_check};
use riesz_core::bounds::{
    check_gap_sum_bound, check_horizontal_bound, check_in_uniform_bound,
    check_line_integral_identity, check_vertical_bounds, measure_c1, resolvent_bound_suite,
    uniform_in_constant, C2,
};
use riesz_core::contour::ContourStyle;
use riesz_core::instance::{generate_instance, InstanceSpec, PerturbationStyle};
use riesz_core::linalg::{complex_eigen, cplx, identity, CMat, CVec, C64};
use riesz_core::pipeline::{run_certification, CertificationConfig};
use riesz_core::projections::{
    contour_projections, eigen_oracle_projections, max_partial_sum_index, ProjectionSet,
};
use riesz_core::spectral::{unperturbed_projections, PerturbedPair, SegmentFamily};

const THREADS: usize = 4;

/// Frobenius norm (nalgebra's `norm` sums `|z|^2` over all entries).
fn fro(m: &CMat) -> f64 {
    m.norm()
}

fn unit_vectors(n: usize, count: usize, seed: u64) -> Vec<CVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let raw = CVec::from_fn(n, |_, _| cplx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let inv = cplx(1.0 / raw.norm(), 0.0);
            raw * inv
        })
        .collect()
}

/// Seeded roster of instances: 2-8 segments of varying lengths and gaps,
/// 1-6 eigenvalues per cluster (n <= 48), perturbation styles cycling
/// through dense, Hermitian and cluster-coupling.
fn roster(count: usize, b_ratio: f64, salt: u64) -> Vec<InstanceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(salt);
    let styles = [
        PerturbationStyle::DenseRandom,
        PerturbationStyle::Hermitian,
        PerturbationStyle::ClusterCoupling,
    ];
    (0..count)
        .map(|k| {
            let seg_count = rng.gen_range(2..=8usize);
            let mut segments = Vec::with_capacity(seg_count);
            let mut x = rng.gen_range(-4.0..4.0);
            for _ in 0..seg_count {
                let len = rng.gen_range(0.2..2.0);
                segments.push((x, x + len));
                x += len + rng.gen_range(0.6..3.0);
            }
            let cluster_sizes: Vec<usize> = (0..seg_count).map(|_| rng.gen_range(1..=6)).collect();
            InstanceSpec {
                n: cluster_sizes.iter().sum(),
                segments,
                cluster_sizes,
                b_ratio,
                seed: salt.wrapping_mul(1000).wrapping_add(k as u64),
                perturbation_style: styles[k % styles.len()],
            }
        })
        .collect()
}

fn project(
    pair: &PerturbedPair,
    family: &SegmentFamily,
) -> (ProjectionSet, f64) {
    let b = pair.b_norm();
    let d = family.gap();
    let b_prime = (b + d / 2.0) / 2.0;
    let (set, _) = contour_projections(
        pair,
        family,
        b_prime,
        ContourStyle::Rectangle,
        1e-9,
        32,
        THREADS,
    )
    .unwrap();
    (set, b_prime)
}

struct Prepared {
    pair: PerturbedPair,
    family: SegmentFamily,
    contour: ProjectionSet,
    oracle: ProjectionSet,
}

struct Suite {
    items: Vec<Prepared>,
    build_seconds: f64,
}

/// The shared 50-instance roster at b = 0.4 d, with contour and oracle
/// projections computed once for criteria 2-4.
static SUITE50: LazyLock<Suite> = LazyLock::new(|| {
    let start = Instant::now();
    let items = roster(50, 0.8, 50)
        .iter()
        .map(|spec| {
            let (pair, family) = generate_instance(spec).unwrap();
            let (contour, _) = project(&pair, &family);
            let oracle = eigen_oracle_projections(&pair, &family, pair.b_norm()).unwrap();
            Prepared {
                pair,
                family,
                contour,
                oracle: oracle.set,
            }
        })
        .collect();
    Suite {
        items,
        build_seconds: start.elapsed().as_secs_f64(),
    }
});

#[test]
fn acceptance_1_zero_perturbation_identity() {
    let start = Instant::now();
    let mut worst_match = 0.0f64;
    let mut worst_unconditional = 0.0f64;
    let mut worst_gram = 0.0f64;
    for spec in roster(20, 0.0, 11) {
        let (pair, family) = generate_instance(&spec).unwrap();
        assert_eq!(pair.b_norm(), 0.0);
        let (set, _) = project(&pair, &family);
        let spectral = unperturbed_projections(pair.t(), &family).unwrap();
        for (q, p) in set.matrices().iter().zip(&spectral) {
            let diff = fro(&(q - p));
            assert!(diff < 1e-9, "seed {}: contour vs spectral {diff:e}", spec.seed);
            worst_match = worst_match.max(diff);
        }
        let cert = certify_basis(&set, 77).unwrap();
        let u = (cert.unconditional.value - 1.0).abs();
        assert!(u <= 1e-10, "seed {}: unconditional 1{:+e}", spec.seed, u);
        worst_unconditional = worst_unconditional.max(u);
        let g = fro(&(&cert.gram - identity(pair.dim())));
        assert!(g <= 1e-10, "seed {}: ||Gram - I||_F = {g:e}", spec.seed);
        worst_gram = worst_gram.max(g);
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 30.0, "took {secs:.1} s");
    println!(
        "acceptance 1 (zero-perturbation identity): PASS - 20 instances in {secs:.1} s, \
         worst contour-vs-spectral {worst_match:.2e}, unconditional 1+-{worst_unconditional:.1e}, \
         ||Gram-I|| {worst_gram:.2e}"
    );
}

#[test]
fn acceptance_2_oracle_equivalence() {
    let suite = &*SUITE50;
    let mut worst = 0.0f64;
    for (i, it) in suite.items.iter().enumerate() {
        for (q, o) in it.contour.matrices().iter().zip(it.oracle.matrices()) {
            let diff = fro(&(q - o));
            assert!(diff < 1e-8, "instance {i}: contour vs oracle {diff:e}");
            worst = worst.max(diff);
        }
    }
    assert!(
        suite.build_seconds < 300.0,
        "projections took {:.1} s",
        suite.build_seconds
    );
    println!(
        "acceptance 2 (oracle equivalence): PASS - 50 instances built in {:.1} s, \
         worst per-cluster Frobenius distance {worst:.2e}",
        suite.build_seconds
    );
}

#[test]
fn acceptance_3_enclosure_and_projection_system() {
    let suite = &*SUITE50;
    let mut worst_dist = f64::NEG_INFINITY;
    let mut worst_min = 0.0f64;
    let mut worst_comp = 0.0f64;
    let mut worst_comm = 0.0f64;
    for (i, it) in suite.items.iter().enumerate() {
        let b = it.pair.b_norm();
        let scale = it.pair.t().scale();
        let eig = complex_eigen(it.pair.a_matrix()).unwrap();
        for &z in &eig.values {
            let dist = it.family.distance_to(z);
            assert!(
                dist <= b + 1e-10 * scale,
                "instance {i}: eigenvalue {z} at distance {dist} > b = {b}"
            );
            worst_dist = worst_dist.max(dist - b);
        }

        let qs = it.contour.matrices();
        let n = it.pair.dim();
        for j in 0..qs.len() {
            for k in 0..qs.len() {
                if j != k {
                    worst_min = worst_min.max(fro(&(&qs[j] * &qs[k])));
                }
            }
        }
        let sum = qs.iter().fold(CMat::zeros(n, n), |acc, q| acc + q);
        worst_comp = worst_comp.max(fro(&(sum - identity(n))));
        let a = it.pair.a_matrix();
        for q in qs {
            worst_comm = worst_comm.max(fro(&(a * q - q * a)));
        }
    }
    assert!(worst_min < 1e-8, "minimality {worst_min:e}");
    assert!(worst_comp < 1e-8, "completeness {worst_comp:e}");
    assert!(worst_comm < 1e-8, "commutation {worst_comm:e}");
    println!(
        "acceptance 3 (enclosure + projection system): PASS - worst enclosure excess \
         {worst_dist:.1e}, minimality {worst_min:.2e}, completeness {worst_comp:.2e}, \
         commutation {worst_comm:.2e} (Frobenius)"
    );
}

#[test]
fn acceptance_4_resolvent_bound_suite() {
    let suite = &*SUITE50;
    let mut worst_a = f64::NEG_INFINITY;
    let mut worst_m = f64::NEG_INFINITY;
    let mut worst_split = 0.0f64;
    for (i, it) in suite.items.iter().enumerate() {
        let rs = resolvent_bound_suite(&it.pair, &it.family, 1000, 4000 + i as u64, THREADS)
            .unwrap();
        assert!(rs.samples >= 1000);
        for rep in &rs.reports {
            assert!(
                rep.pass,
                "instance {i}: {} lhs {:e} rhs {:e}",
                rep.name, rep.lhs, rep.rhs
            );
            match rep.name.as_str() {
                "resolvent_A_bound" => worst_a = worst_a.max(rep.lhs),
                "neumann_factor_bound" => worst_m = worst_m.max(rep.lhs),
                "splitting_identity" => worst_split = worst_split.max(rep.lhs),
                _ => {}
            }
        }
    }
    println!(
        "acceptance 4 (pointwise resolvent bounds): PASS - 50 instances x 1000 samples, \
         worst excess over 1/(delta-b) {worst_a:.1e}, over 1/(1-b/delta) {worst_m:.1e}, \
         splitting residual {worst_split:.1e}"
    );
}

#[test]
fn acceptance_5_closed_form_constants() {
    let mut worst_line = 0.0f64;
    let mut worst_gap_slack = f64::INFINITY;
    for spec in roster(6, 0.8, 55) {
        let (pair, family) = generate_instance(&spec).unwrap();
        let t = pair.t();
        let b = pair.b_norm();
        let d = family.gap();

        for x in &unit_vectors(pair.dim(), 5, spec.seed ^ 0x5eed) {
            let line = check_line_integral_identity(t, &family, x).unwrap();
            assert!(line.pass, "line integral rel err {:e}: {}", line.lhs, line.context);
            worst_line = worst_line.max(line.lhs);

            let gap = check_gap_sum_bound(t, &family, x).unwrap();
            assert!(gap.pass, "gap sum: {} vs {}", gap.lhs, gap.rhs);
            worst_gap_slack = worst_gap_slack.min(gap.slack);
        }

        for n in 0..=max_partial_sum_index(&family) {
            let (central, outer) = check_vertical_bounds(&pair, &family, n, 32).unwrap();
            assert!(central.pass, "window {n}: central {} vs {}", central.lhs, central.rhs);
            assert!(outer.pass, "window {n}: outer {} vs {}", outer.lhs, outer.rhs);
            assert!(outer.rhs < 1.0, "outer vertical bound b/(d-b) = {} >= 1", outer.rhs);
            let horiz = check_horizontal_bound(&pair, &family, n, 64).unwrap();
            assert!(horiz.pass, "window {n}: horizontal {} vs {}", horiz.lhs, horiz.rhs);
        }

        let c = uniform_in_constant(b, d);
        let windows = check_in_uniform_bound(&pair, &family, 32).unwrap();
        for rep in &windows {
            assert!(rep.pass, "window norm {} vs C(b,d) {}", rep.lhs, rep.rhs);
            assert!(
                (rep.rhs - c).abs() <= 1e-12,
                "every window must be checked against the same constant"
            );
        }
    }

    // At gaps d <= 1/2 the displayed 2 C2/d^2 form is weaker than the
    // derivation-consistent 4 C2/d, so the report records it also holding.
    let tight = InstanceSpec {
        n: 6,
        segments: vec![(0.0, 0.3), (0.7, 1.0)],
        cluster_sizes: vec![3, 3],
        b_ratio: 0.0,
        seed: 5,
        perturbation_style: PerturbationStyle::DenseRandom,
    };
    let (pair, family) = generate_instance(&tight).unwrap();
    let x = &unit_vectors(6, 1, 5)[0];
    let gap = check_gap_sum_bound(pair.t(), &family, x).unwrap();
    assert!(gap.pass && gap.context.contains("also holds"), "{}", gap.context);

    println!(
        "acceptance 5 (closed-form constants): PASS - line-integral identity to {worst_line:.1e} \
         relative, gap sum with C2 = 4 + pi^2/6 (min slack {worst_gap_slack:.2}), central and \
         outer vertical bounds at every window, one C(b,d) per instance"
    );
}

#[test]
fn acceptance_6_unconditional_basis_certificate() {
    let mut worst_cross = 0.0f64;
    let mut worst_herm = 0.0f64;
    let mut worst_idem = 0.0f64;
    for (idx, spec) in roster(3, 0.8, 66).iter().enumerate() {
        let (pair, family) = generate_instance(spec).unwrap();
        let n = pair.dim();
        let d = family.gap();
        let (set, _) = project(&pair, &family);
        let cert = certify_basis(&set, 123).unwrap();

        let (m, big_m) = (cert.similarity.min_eigenvalue, cert.similarity.max_eigenvalue);
        assert!(m > 0.0 && m <= big_m, "instance {idx}: Gram not PD (m={m}, M={big_m})");

        let vectors = unit_vectors(n, 200, spec.seed ^ 0xaa);
        let pairs: Vec<(CVec, CVec)> = vectors
            .chunks_exact(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        assert_eq!(pairs.len(), 100);
        for v in cross_orthogonality(&set, &cert.gram, &pairs) {
            assert!(v < 1e-8, "instance {idx}: cross-orthogonality {v:e}");
            worst_cross = worst_cross.max(v);
        }

        for p in cert.similarity.orthogonalized.matrices() {
            let herm = fro(&(p - p.adjoint()));
            let idem = fro(&(p * p - p));
            assert!(herm < 1e-8 && idem < 1e-8, "instance {idx}: {herm:e} / {idem:e}");
            worst_herm = worst_herm.max(herm);
            worst_idem = worst_idem.max(idem);
        }

        assert!(
            cert.unconditional.value <= cert.similarity.cond_k + 1e-6,
            "instance {idx}: unconditional {} vs cond(K) {}",
            cert.unconditional.value,
            cert.similarity.cond_k
        );

        let c1 = measure_c1(&pair, &family, 16).unwrap();
        let budget = 1.0 + (c1.measured / (2.0 * PI)) * (2.0 * PI / d + 8.0 * C2 / d);
        for v in sum_bound_check(&set, &unit_vectors(n, 100, spec.seed ^ 0xbb)) {
            assert!(v <= budget + 1e-8, "instance {idx}: sum {v} over budget {budget}");
        }
    }
    println!(
        "acceptance 6 (unconditional basis certificate): PASS - Gram PD, cross-orthogonality \
         {worst_cross:.1e} over 100 pairs, transformed projections Hermitian/idempotent to \
         {worst_herm:.1e}/{worst_idem:.1e}, unconditional <= cond(K), sum bound within budget \
         for 100 unit vectors"
    );
}

#[test]
fn acceptance_7_block_diagonalization() {
    let mut worst_off = 0.0f64;
    let mut worst_spec = 0.0f64;
    for (idx, spec) in roster(8, 0.8, 77).iter().enumerate() {
        let (pair, family) = generate_instance(spec).unwrap();
        let (set, _) = project(&pair, &family);
        let cert = certify_basis(&set, 9).unwrap();
        let blocks = block_diagonalize(&pair, &set, &cert.similarity).unwrap();

        let a = pair.a_matrix();
        let qs = set.matrices();
        for j in 0..qs.len() {
            for k in 0..qs.len() {
                if j != k {
                    let off = fro(&(&qs[k] * a * &qs[j]));
                    assert!(off < 1e-8, "instance {idx}: ||Q_k A Q_j||_F = {off:e}");
                    worst_off = worst_off.max(off);
                }
            }
        }

        let sort_key = |p: &C64, q: &C64| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im));
        let mut block_eigs: Vec<C64> = blocks.block_spectra.iter().flatten().copied().collect();
        let mut a_eigs = complex_eigen(a).unwrap().values;
        assert_eq!(block_eigs.len(), a_eigs.len());
        block_eigs.sort_by(|p, q| sort_key(p, q));
        a_eigs.sort_by(|p, q| sort_key(p, q));
        for (p, q) in block_eigs.iter().zip(&a_eigs) {
            let dist = (p - q).norm();
            assert!(dist < 1e-7, "instance {idx}: block spectrum off by {dist:e}");
            worst_spec = worst_spec.max(dist);
        }
    }
    println!(
        "acceptance 7 (block diagonalization): PASS - 8 instances, worst off-block Frobenius \
         {worst_off:.2e}, block spectra match sigma(A) to {worst_spec:.2e}"
    );
}

#[test]
fn acceptance_8_force_mode_robustness() {
    let start = Instant::now();
    // b = 0.75 d: well past the d/2 hypothesis.
    let spec = InstanceSpec {
        n: 12,
        segments: vec![(0.0, 1.0), (3.0, 4.0), (6.0, 6.5)],
        cluster_sizes: vec![5, 4, 3],
        b_ratio: 1.5,
        seed: 88,
        perturbation_style: PerturbationStyle::DenseRandom,
    };
    let (pair, family) = generate_instance(&spec).unwrap();
    assert!((pair.b_norm() - 0.75 * family.gap()).abs() < 1e-12);

    let config = CertificationConfig {
        force: true,
        resolvent_samples: 200,
        random_vectors: 16,
        parallel: THREADS,
        ..CertificationConfig::default()
    };
    let report = run_certification(&pair, &family, &config);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1} s");
    assert!(!report.overall_pass);
    let flagged = !report.stage_errors.is_empty()
        || report.projections.as_ref().map_or(false, |p| {
            !p.verification.enclosure_pass || p.verification.minimality > 1e-8
        })
        || report.bounds.iter().any(|b| !b.pass);
    assert!(flagged, "no failure recorded in the completed report");

    // The binary maps the same completed-but-failing run to exit code 1.
    let dir = std::env::temp_dir().join(format!("riesz-acceptance-8-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_riesz"))
        .args([
            "verify",
            "--instance.n",
            "12",
            "--instance.segments",
            "0:1,3:4,6:6.5",
            "--instance.cluster_sizes",
            "5,4,3",
            "--instance.b_ratio",
            "1.5",
            "--instance.seed",
            "88",
            "--force",
            "--mode.resolvent_samples",
            "50",
            "--mode.random_vectors",
            "8",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    assert_eq!(out.status.code(), Some(1), "exit code for a completed failing run");

    println!(
        "acceptance 8 (force mode at b = 0.75 d): PASS - completed in {elapsed:.1} s, \
         failure flagged, no panic, exit code 1"
    );
}

#[test]
fn acceptance_9_determinism() {
    let spec = &roster(1, 0.8, 99)[0];
    let config = CertificationConfig {
        resolvent_samples: 120,
        random_vectors: 16,
        parallel: THREADS,
        ..CertificationConfig::default()
    };

    let (pair_a, family_a) = generate_instance(spec).unwrap();
    let a = run_certification(&pair_a, &family_a, &config);
    let (pair_b, family_b) = generate_instance(spec).unwrap();
    let b = run_certification(&pair_b, &family_b, &config);

    // Report equality ignores wall-clock timings and nothing else.
    assert_eq!(a, b);

    let strip = |r| {
        let mut v = serde_json::to_value(r).unwrap();
        v.as_object_mut().unwrap().remove("timings").unwrap();
        v
    };
    assert_eq!(strip(&a), strip(&b), "serialized reports differ beyond timings");
    println!("acceptance 9 (determinism): PASS - identical reports modulo timing fields");
}
