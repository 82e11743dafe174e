//! Browser demo API.
//!
//! Three operations back the static page in `www/`: an instance overview
//! for the spectrum picture, a certificate table, and a resolvent-norm
//! sweep. Each takes a JSON parameter string and returns a JSON string so
//! the JavaScript side stays a thin render loop; failures come back as
//! `{"error": "..."}` instead of thrown exceptions. The functions are
//! plain Rust and fully testable on the host; `wasm-bindgen` exports them
//! unchanged on the `wasm32` target.

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use riesz_core::contour::ContourStyle;
use riesz_core::instance::{generate_instance, InstanceSpec, PerturbationStyle};
use riesz_core::linalg::{complex_eigen, cplx};
use riesz_core::pipeline::{run_certification, CertificationConfig, CERT_TOL, SPECTRA_TOL};
use riesz_core::resolvent::neumann_bound_check;
use riesz_core::spectral::check_hypothesis;
use riesz_core::{Error, Result};

/// Knobs exposed to the page. Defaults describe a three-cluster instance
/// small enough to recompute on every slider move.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoParams {
    pub n: usize,
    pub segments: Vec<(f64, f64)>,
    pub cluster_sizes: Vec<usize>,
    pub b_ratio: f64,
    pub seed: u64,
    pub perturbation_style: PerturbationStyle,
    pub style: ContourStyle,
    /// Continue the certificate past a failed hypothesis.
    pub force: bool,
    /// Sample count of the resolvent sweep.
    pub sweep_points: usize,
    /// Height of the sweep line as a multiple of the gap `d`.
    pub sweep_height: f64,
}

impl Default for DemoParams {
    fn default() -> Self {
        DemoParams {
            n: 12,
            segments: vec![(0.0, 1.0), (3.0, 4.0), (6.0, 6.5)],
            cluster_sizes: vec![5, 4, 3],
            b_ratio: 0.6,
            seed: 1,
            perturbation_style: PerturbationStyle::DenseRandom,
            style: ContourStyle::Rectangle,
            force: false,
            sweep_points: 160,
            sweep_height: 0.25,
        }
    }
}

/// Caps that keep a single-threaded browser tab responsive.
const MAX_DIM: usize = 64;
const MAX_SEGMENTS: usize = 8;
const MAX_SWEEP_POINTS: usize = 600;

impl DemoParams {
    fn parse(text: &str) -> Result<DemoParams> {
        let params: DemoParams = if text.trim().is_empty() {
            DemoParams::default()
        } else {
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec {
                reason: format!("bad parameters: {e}"),
            })?
        };
        if params.n > MAX_DIM {
            return Err(Error::InvalidSpec {
                reason: format!("n = {} exceeds the demo cap {MAX_DIM}", params.n),
            });
        }
        if params.segments.len() > MAX_SEGMENTS {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "{} segments exceed the demo cap {MAX_SEGMENTS}",
                    params.segments.len()
                ),
            });
        }
        if !(0.0..=3.0).contains(&params.b_ratio) {
            return Err(Error::InvalidSpec {
                reason: format!("b_ratio = {} outside [0, 3]", params.b_ratio),
            });
        }
        Ok(params)
    }

    fn instance_spec(&self) -> InstanceSpec {
        InstanceSpec {
            n: self.n,
            segments: self.segments.clone(),
            cluster_sizes: self.cluster_sizes.clone(),
            b_ratio: self.b_ratio,
            seed: self.seed,
            perturbation_style: self.perturbation_style,
        }
    }

    /// Trimmed certification: sequential, fewer samples, same tolerances.
    fn certification(&self) -> CertificationConfig {
        CertificationConfig {
            style: self.style,
            force: self.force,
            resolvent_samples: 96,
            random_vectors: 12,
            parallel: 1,
            ..CertificationConfig::default()
        }
    }
}

fn respond(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn overview_impl(params: &DemoParams) -> Result<Value> {
    let spec = params.instance_spec();
    let (pair, family) = generate_instance(&spec)?;
    let hypothesis = check_hypothesis(&pair, &family)?;
    let b = pair.b_norm();
    let d = family.gap();
    let b_prime = if hypothesis.holds {
        (b + d / 2.0) / 2.0
    } else {
        1.1 * b
    };
    let scale = pair.t().scale();

    let eig = complex_eigen(pair.a_matrix())?;
    let mut max_distance = 0.0f64;
    let eigenvalues: Vec<Value> = eig
        .values
        .iter()
        .map(|&v| {
            let (j, distance) = family.nearest_segment(v);
            max_distance = max_distance.max(distance);
            json!({
                "re": v.re,
                "im": v.im,
                "cluster": j,
                "label": family.label(j),
                "distance": distance,
            })
        })
        .collect();

    let segments: Vec<Value> = family
        .segments()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            json!({ "alpha": s.alpha(), "beta": s.beta(), "label": family.label(j) })
        })
        .collect();

    Ok(json!({
        "n": pair.dim(),
        "gap": d,
        "b": b,
        "b_prime": b_prime,
        "scale": scale,
        "style": params.style,
        "hypothesis": {
            "holds": hypothesis.holds,
            "b": hypothesis.b,
            "d": hypothesis.d,
            "margin": hypothesis.margin,
        },
        "segments": segments,
        "eigenvalues": eigenvalues,
        "max_distance": max_distance,
        "enclosure_ok": max_distance <= b + 1e-10 * scale.max(1.0),
    }))
}

fn row(group: &str, name: &str, value: f64, limit: f64, pass: bool) -> Value {
    json!({ "group": group, "name": name, "value": value, "limit": limit, "pass": pass })
}

fn certificate_impl(params: &DemoParams) -> Result<Value> {
    let spec = params.instance_spec();
    let (pair, family) = generate_instance(&spec)?;
    let report = run_certification(&pair, &family, &params.certification());

    let mut rows = Vec::new();
    if let Some(h) = &report.hypothesis {
        rows.push(row("hypothesis", "perturbation norm vs d/2", h.b, h.d / 2.0, h.holds));
    }
    if let Some(p) = &report.projections {
        let v = &p.verification;
        let worst_idem = p
            .clusters
            .iter()
            .map(|c| c.idempotency_residual)
            .fold(0.0, f64::max);
        rows.push(row("projections", "idempotency residual", worst_idem, CERT_TOL, worst_idem <= CERT_TOL));
        rows.push(row(
            "projections",
            "contour vs eigensolver distance",
            p.max_cross_method_distance,
            CERT_TOL,
            p.max_cross_method_distance <= CERT_TOL,
        ));
        rows.push(row("projections", "minimality residual", v.minimality, CERT_TOL, v.minimality <= CERT_TOL));
        rows.push(row("projections", "completeness residual", v.completeness, CERT_TOL, v.completeness <= CERT_TOL));
        rows.push(row("projections", "commutation residual", v.commutation, CERT_TOL, v.commutation <= CERT_TOL));
        rows.push(row("projections", "enclosure excess", v.enclosure_excess, 0.0, v.enclosure_pass));
    }
    if !report.partial_sums.is_empty() {
        let worst = report
            .partial_sums
            .iter()
            .map(|r| r.identity_residual)
            .fold(0.0, f64::max);
        let pass = report.partial_sums.iter().all(|r| r.pass);
        rows.push(row("partial sums", "worst identity residual", worst, CERT_TOL, pass));
    }
    for b in &report.bounds {
        rows.push(row("bounds", &b.name, b.lhs, b.rhs, b.pass));
    }
    if let Some(basis) = &report.basis {
        rows.push(row(
            "basis",
            "unconditional constant vs cond(K)",
            basis.unconditional_value,
            basis.cond_k,
            basis.cond_bound_pass,
        ));
        rows.push(row(
            "basis",
            "hermiticity residual",
            basis.max_hermiticity_residual,
            CERT_TOL,
            basis.max_hermiticity_residual <= CERT_TOL,
        ));
        rows.push(row(
            "basis",
            "transformed idempotency",
            basis.max_transformed_idempotency,
            CERT_TOL,
            basis.max_transformed_idempotency <= CERT_TOL,
        ));
        rows.push(row(
            "basis",
            "cross orthogonality",
            basis.max_cross_orthogonality,
            CERT_TOL,
            basis.max_cross_orthogonality <= CERT_TOL,
        ));
    }
    if let Some(blocks) = &report.blocks {
        rows.push(row(
            "blocks",
            "off-block residual",
            blocks.off_block_residual,
            CERT_TOL,
            blocks.off_block_residual <= CERT_TOL,
        ));
        rows.push(row(
            "blocks",
            "block spectra vs spectrum of A",
            blocks.spectra_distance,
            SPECTRA_TOL,
            blocks.spectra_distance <= SPECTRA_TOL,
        ));
    }

    let stage_errors: Vec<Value> = report
        .stage_errors
        .iter()
        .map(|e| json!({ "stage": e.stage, "error": e.error }))
        .collect();

    Ok(json!({
        "overall_pass": report.overall_pass,
        "dim": report.dim,
        "b": report.b_norm,
        "rows": rows,
        "warnings": report.warnings,
        "stage_errors": stage_errors,
    }))
}

fn profile_impl(params: &DemoParams) -> Result<Value> {
    let spec = params.instance_spec();
    let (pair, family) = generate_instance(&spec)?;
    let b = pair.b_norm();
    let d = family.gap();
    let height = params.sweep_height.abs() * d;
    let (lo, hi) = family.span();
    let (x0, x1) = (lo - d, hi + d);
    let count = params.sweep_points.clamp(16, MAX_SWEEP_POINTS);

    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let re = x0 + (x1 - x0) * k as f64 / (count - 1) as f64;
        let lambda = cplx(re, height);
        let delta = family.distance_to(lambda);
        // The Neumann bounds need clearance below b; report the rest of the
        // sweep so the page can draw the excluded window.
        if delta <= b + d * 1e-3 {
            points.push(json!({ "re": re, "delta": delta, "inside": true }));
            continue;
        }
        let sample = neumann_bound_check(&pair, &family, lambda)?;
        points.push(json!({
            "re": re,
            "delta": delta,
            "norm_a": sample.a_resolvent_norm,
            "bound_a": sample.a_bound,
            "norm_t": sample.t_resolvent_norm,
            "bound_t": sample.t_bound,
        }));
    }

    Ok(json!({ "b": b, "d": d, "height": height, "points": points }))
}

/// Instance geometry, spectrum of `A` and the enclosure verdict.
#[wasm_bindgen]
pub fn instance_overview(params: &str) -> String {
    respond(DemoParams::parse(params).and_then(|p| overview_impl(&p)))
}

/// Full certificate flattened to `{group, name, value, limit, pass}` rows.
#[wasm_bindgen]
pub fn certificate(params: &str) -> String {
    respond(DemoParams::parse(params).and_then(|p| certificate_impl(&p)))
}

/// Resolvent norms against their closed-form bounds along a horizontal
/// sweep line `Im z = sweep_height * d`.
#[wasm_bindgen]
pub fn resolvent_profile(params: &str) -> String {
    respond(DemoParams::parse(params).and_then(|p| profile_impl(&p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn overview_reports_spectrum_and_enclosure() {
        let v = parse(&instance_overview("{}"));
        assert_eq!(v["n"], 12);
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 12);
        assert_eq!(v["segments"].as_array().unwrap().len(), 3);
        assert_eq!(v["hypothesis"]["holds"], true);
        assert_eq!(v["enclosure_ok"], true);
        let b = v["b"].as_f64().unwrap();
        assert!(v["max_distance"].as_f64().unwrap() <= b + 1e-8);
    }

    #[test]
    fn certificate_passes_on_the_default_instance() {
        let v = parse(&certificate("{}"));
        assert_eq!(v["overall_pass"], true);
        let rows = v["rows"].as_array().unwrap();
        assert!(rows.len() > 10);
        for r in rows {
            assert_eq!(r["pass"], true, "row failed: {r}");
        }
        assert!(v["stage_errors"].as_array().unwrap().is_empty());
    }

    #[test]
    fn certificate_flags_a_violated_hypothesis() {
        let v = parse(&certificate(r#"{"b_ratio": 1.5}"#));
        assert_eq!(v["overall_pass"], false);
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows[0]["group"], "hypothesis");
        assert_eq!(rows[0]["pass"], false);

        // Forcing still completes and still fails overall.
        let forced = parse(&certificate(r#"{"b_ratio": 1.5, "force": true}"#));
        assert_eq!(forced["overall_pass"], false);
        assert!(!forced["warnings"].as_array().unwrap().is_empty());
    }

    #[test]
    fn profile_respects_the_neumann_bounds() {
        let v = parse(&resolvent_profile(r#"{"sweep_points": 60}"#));
        let points = v["points"].as_array().unwrap();
        assert_eq!(points.len(), 60);
        let mut outside = 0;
        for p in points {
            if p["inside"] == Value::Bool(true) {
                continue;
            }
            outside += 1;
            let slack = 1e-8;
            assert!(
                p["norm_a"].as_f64().unwrap() <= p["bound_a"].as_f64().unwrap() + slack,
                "bad point: {p}"
            );
            assert!(p["norm_t"].as_f64().unwrap() <= p["bound_t"].as_f64().unwrap() + slack);
        }
        assert!(outside > 20, "sweep should mostly clear the spectrum");
    }

    #[test]
    fn bad_parameters_become_error_objects() {
        for bad in [
            "{not json",
            r#"{"n": 100000}"#,
            r#"{"b_ratio": -1.0}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"n": 5, "cluster_sizes": [3, 3]}"#,
        ] {
            let v = parse(&instance_overview(bad));
            assert!(v["error"].is_string(), "no error for {bad}: {v}");
        }
    }

    #[test]
    fn responses_are_deterministic() {
        let a = certificate(r#"{"seed": 9, "n": 10, "cluster_sizes": [4, 3, 3]}"#);
        let b = certificate(r#"{"seed": 9, "n": 10, "cluster_sizes": [4, 3, 3]}"#);
        assert_eq!(a, b);
    }
}
