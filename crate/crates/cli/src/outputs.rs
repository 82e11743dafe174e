//! Report rendering: eigenvalue CSV, an SVG picture of the complex plane,
//! and a terminal summary.

use std::fmt::Write as _;

use riesz_core::contour::ContourStyle;
use riesz_core::pipeline::CertificationReport;

/// Columns: re, im, assigned_cluster, dist_to_segment.
pub fn eigenvalues_csv(report: &CertificationReport) -> String {
    let mut out = String::from("re,im,assigned_cluster,dist_to_segment\n");
    for row in &report.eigenvalues {
        let _ = writeln!(out, "{},{},{},{}", row.re, row.im, row.cluster, row.distance);
    }
    out
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        (x - self.min_x) * self.scale
    }
    // SVG y grows downward; mirror the imaginary axis.
    fn y(&self, y: f64) -> f64 {
        (self.max_y - y) * self.scale
    }
}

/// Draws the spectral picture: segments on the real axis, their
/// `b`-neighborhood outlines, the integration contours, and the eigenvalues
/// of the perturbed operator.
pub fn plot_svg(report: &CertificationReport) -> String {
    let segments = &report.segments;
    let b = report.b_norm;
    let b_prime = report.projections.as_ref().map(|p| p.b_prime);
    let reach = b.max(b_prime.unwrap_or(0.0));

    let (span_lo, span_hi) = segments.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), &(a, be)| (lo.min(a), hi.max(be)),
    );
    let max_im = report
        .eigenvalues
        .iter()
        .map(|r| r.im.abs())
        .fold(0.0f64, f64::max);
    let width_units = (span_hi - span_lo).max(1.0);
    let pad = (reach + 0.05 * width_units).max(0.1 * width_units);
    let min_x = span_lo - pad;
    let max_x = span_hi + pad;
    let half_h = (reach.max(max_im) + 0.05 * width_units).max(0.08 * width_units);

    let pixel_w = 900.0;
    let frame = Frame {
        min_x,
        max_y: half_h,
        scale: pixel_w / (max_x - min_x),
    };
    let pixel_h = 2.0 * half_h * frame.scale;
    let stroke = (pixel_w / 450.0).max(1.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {pixel_w:.1} {pixel_h:.1}" width="{pixel_w:.0}" height="{pixel_h:.0}">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect width="100%" height="100%" fill="#fdfdfd"/>"##
    );
    // Real axis.
    let _ = writeln!(
        svg,
        r##"<line x1="0" y1="{0:.2}" x2="{pixel_w:.1}" y2="{0:.2}" stroke="#bbbbbb" stroke-width="{1:.2}"/>"##,
        frame.y(0.0),
        stroke * 0.5
    );

    for &(alpha, beta) in segments {
        // b-neighborhood: a stadium is exactly a rounded rectangle whose
        // corner radius equals its half-height.
        if b > 0.0 {
            let _ = writeln!(
                svg,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" rx="{:.2}" fill="#4a90d920" stroke="#4a90d9" stroke-width="{:.2}"/>"##,
                frame.x(alpha - b),
                frame.y(b),
                (beta - alpha + 2.0 * b) * frame.scale,
                2.0 * b * frame.scale,
                b * frame.scale,
                stroke * 0.6
            );
        }
        // Integration contour at radius b'.
        if let Some(bp) = b_prime {
            let rx = match report.config.style {
                ContourStyle::Stadium => bp * frame.scale,
                ContourStyle::Rectangle => 0.0,
            };
            let _ = writeln!(
                svg,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" rx="{:.2}" fill="none" stroke="#2e7d32" stroke-width="{:.2}" stroke-dasharray="{:.1} {:.1}"/>"##,
                frame.x(alpha - bp),
                frame.y(bp),
                (beta - alpha + 2.0 * bp) * frame.scale,
                2.0 * bp * frame.scale,
                rx,
                stroke * 0.8,
                stroke * 3.0,
                stroke * 2.0
            );
        }
        // The segment itself.
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1a1a1a" stroke-width="{:.2}" stroke-linecap="round"/>"##,
            frame.x(alpha),
            frame.y(0.0),
            frame.x(beta),
            frame.y(0.0),
            stroke * 1.8
        );
    }

    for row in &report.eigenvalues {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#c62828" fill-opacity="0.85"/>"##,
            frame.x(row.re),
            frame.y(row.im),
            stroke * 1.6
        );
    }

    let verdict = if report.overall_pass { "pass" } else { "FAIL" };
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="{:.1}" fill="#555555">n={} b={:.4} {}</text>"##,
        stroke * 4.0,
        stroke * 12.0,
        stroke * 10.0,
        report.dim,
        b,
        verdict
    );
    svg.push_str("</svg>\n");
    svg
}

/// Short human-readable result, one line per stage.
pub fn summary(report: &CertificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "instance: n={} segments={} b={:.6}",
        report.dim, report.segment_count, report.b_norm
    );
    if let Some(h) = &report.hypothesis {
        let _ = writeln!(
            out,
            "hypothesis b < d/2: {} (b={:.6}, d={:.6}, margin={:.6})",
            if h.holds { "holds" } else { "FAILS" },
            h.b,
            h.d,
            h.margin
        );
    }
    if let Some(p) = &report.projections {
        let v = &p.verification;
        let _ = writeln!(
            out,
            "projections: cross-method {:.3e}, minimality {:.3e}, completeness {:.3e}, commutation {:.3e}",
            p.max_cross_method_distance, v.minimality, v.completeness, v.commutation
        );
        let _ = writeln!(
            out,
            "enclosure: excess {:.3e} ({}), ranks {:?} vs clusters {:?}",
            v.enclosure_excess,
            if v.enclosure_pass { "ok" } else { "FAIL" },
            v.ranks,
            v.cluster_sizes
        );
    }
    if !report.partial_sums.is_empty() {
        let worst = report
            .partial_sums
            .iter()
            .map(|r| r.identity_residual)
            .fold(0.0f64, f64::max);
        let _ = writeln!(
            out,
            "partial sums: {} windows, worst identity residual {:.3e}",
            report.partial_sums.len(),
            worst
        );
    }
    let (passed, total) = (
        report.bounds.iter().filter(|r| r.pass).count(),
        report.bounds.len(),
    );
    let _ = writeln!(out, "bounds: {passed}/{total} hold");
    for r in report.bounds.iter().filter(|r| !r.pass) {
        let _ = writeln!(
            out,
            "  FAIL {}: lhs {:.6e} > rhs {:.6e} ({})",
            r.name, r.lhs, r.rhs, r.context
        );
    }
    if let Some(basis) = &report.basis {
        let _ = writeln!(
            out,
            "basis: m={:.6} M={:.6} cond(K)={:.6} unconditional={:.6} ({})",
            basis.gram_min_eigenvalue,
            basis.gram_max_eigenvalue,
            basis.cond_k,
            basis.unconditional_value,
            basis.unconditional_mode
        );
    }
    if let Some(blocks) = &report.blocks {
        let _ = writeln!(
            out,
            "blocks: sizes {:?}, off-block {:.3e}, spectra distance {:.3e}",
            blocks.sizes, blocks.off_block_residual, blocks.spectra_distance
        );
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for e in &report.stage_errors {
        let _ = writeln!(out, "stage error [{}]: {}", e.stage, e.error);
    }
    let _ = writeln!(
        out,
        "overall: {}",
        if report.overall_pass { "PASS" } else { "FAIL" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use riesz_core::instance::{generate_instance, InstanceSpec, PerturbationStyle};
    use riesz_core::pipeline::{run_certification, CertificationConfig};

    fn demo_report() -> CertificationReport {
        let spec = InstanceSpec {
            n: 6,
            segments: vec![(0.0, 1.0), (3.0, 4.0)],
            cluster_sizes: vec![3, 3],
            b_ratio: 0.6,
            seed: 11,
            perturbation_style: PerturbationStyle::DenseRandom,
        };
        let (pair, family) = generate_instance(&spec).unwrap();
        let config = CertificationConfig {
            resolvent_samples: 40,
            random_vectors: 6,
            ..CertificationConfig::default()
        };
        run_certification(&pair, &family, &config)
    }

    #[test]
    fn csv_has_header_and_one_row_per_eigenvalue() {
        let report = demo_report();
        let csv = eigenvalues_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re,im,assigned_cluster,dist_to_segment");
        assert_eq!(lines.len(), 1 + report.eigenvalues.len());
        // Values round-trip through the shortest-decimal format.
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0].parse::<f64>().unwrap(), report.eigenvalues[0].re);
    }

    #[test]
    fn svg_draws_every_element_class() {
        let report = demo_report();
        let svg = plot_svg(&report);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // 2 neighborhoods + 2 contours + 2 segments + axis, 6 eigenvalues.
        assert_eq!(svg.matches("<circle").count(), 6);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert_eq!(svg.matches("<rect").count(), 1 + 2 + 2);
    }

    #[test]
    fn summary_reports_pass_and_failures() {
        let report = demo_report();
        let text = summary(&report);
        assert!(text.contains("hypothesis b < d/2: holds"));
        assert!(text.contains("overall: PASS"));
        assert!(!text.contains("FAIL "));
    }
}
