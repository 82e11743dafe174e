//! `riesz`: certification harness for Riesz spectral projections of
//! gap-perturbed Hermitian matrices.
//!
//! Exit codes: 0 all checks pass; 1 a completed certification reports a
//! failure; 2 command-line usage error; 3 hard error (I/O, parse, invalid
//! instance, numerical breakdown outside a certification run).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riesz_cli::config::{
    load_config, parse_contour_style, parse_perturbation_style, parse_segments, parse_sizes,
    FileConfig,
};
use riesz_cli::{mm, outputs};
use riesz_core::instance::{generate_instance, InstanceSpec};
use riesz_core::linalg::CMat;
use riesz_core::pipeline::{run_certification, CertificationConfig, CertificationReport};
use riesz_core::projections::contour_projections;
use riesz_core::spectral::{build_segment_family, HermitianOperator, PerturbedPair, SegmentFamily};
use riesz_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "riesz",
    version,
    about = "Compute and certify Riesz spectral projections of perturbed Hermitian matrices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded instance and write its matrices to disk
    Generate(RunArgs),
    /// Compute the contour projections and write one matrix per cluster
    Project(RunArgs),
    /// Run the full certification and write report, CSV and plot
    Verify(RunArgs),
    /// Run only the hypothesis and bound checks
    Bounds(RunArgs),
    /// Re-render a stored report to CSV and SVG
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML config with [instance], [quadrature], [tolerances], [mode]
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance seed (overrides config)
    #[arg(long)]
    seed: Option<u64>,
    /// Perturbation strength as a fraction of d/2 (overrides config)
    #[arg(long = "b-ratio")]
    b_ratio: Option<f64>,
    /// Keep going when the hypothesis b < d/2 fails
    #[arg(long)]
    force: bool,
    /// Adaptive quadrature target
    #[arg(long)]
    tol: Option<f64>,
    /// Base Gauss-Legendre order per contour edge
    #[arg(long = "quad-order")]
    quad_order: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    parallel: Option<usize>,

    /// Unperturbed matrix from a Matrix Market file (with --b-matrix;
    /// segments still come from the config)
    #[arg(long = "t-matrix")]
    t_matrix: Option<PathBuf>,
    /// Perturbation matrix from a Matrix Market file
    #[arg(long = "b-matrix")]
    b_matrix: Option<PathBuf>,

    // Dotted overrides, one per config key.
    #[arg(long = "instance.n", value_name = "N")]
    instance_n: Option<usize>,
    /// Segments as 'alpha:beta,alpha:beta,...' (endpoints may be negative)
    #[arg(long = "instance.segments", value_name = "SEGS", allow_hyphen_values = true)]
    instance_segments: Option<String>,
    /// Cluster sizes as 'k1,k2,...'
    #[arg(long = "instance.cluster_sizes", value_name = "SIZES")]
    instance_cluster_sizes: Option<String>,
    #[arg(long = "instance.b_ratio", value_name = "F")]
    instance_b_ratio: Option<f64>,
    #[arg(long = "instance.seed", value_name = "U64")]
    instance_seed: Option<u64>,
    /// dense_random | cluster_coupling | hermitian
    #[arg(long = "instance.perturbation_style", value_name = "STYLE")]
    instance_perturbation_style: Option<String>,
    #[arg(long = "quadrature.order", value_name = "N")]
    quadrature_order: Option<usize>,
    /// stadium | rectangle
    #[arg(long = "quadrature.style", value_name = "STYLE")]
    quadrature_style: Option<String>,
    #[arg(long = "quadrature.b_prime", value_name = "F")]
    quadrature_b_prime: Option<f64>,
    #[arg(long = "tolerances.tol", value_name = "F")]
    tolerances_tol: Option<f64>,
    #[arg(long = "mode.force", value_name = "BOOL")]
    mode_force: Option<bool>,
    #[arg(long = "mode.parallel", value_name = "N")]
    mode_parallel: Option<usize>,
    #[arg(long = "mode.resolvent_samples", value_name = "N")]
    mode_resolvent_samples: Option<usize>,
    #[arg(long = "mode.random_vectors", value_name = "N")]
    mode_random_vectors: Option<usize>,
    #[arg(long = "mode.sample_seed", value_name = "U64")]
    mode_sample_seed: Option<u64>,
}

#[derive(Args, Clone)]
struct ReportArgs {
    /// Stored report to re-render
    #[arg(long, default_value = "report.json")]
    from: PathBuf,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    /// Config file, then dotted flags, then the short flags.
    fn effective(&self) -> Result<FileConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => FileConfig::default(),
        };
        if let Some(v) = self.instance_n {
            cfg.instance.n = Some(v);
        }
        if let Some(s) = &self.instance_segments {
            cfg.instance.segments = Some(parse_segments(s)?);
        }
        if let Some(s) = &self.instance_cluster_sizes {
            cfg.instance.cluster_sizes = Some(parse_sizes(s)?);
        }
        if let Some(v) = self.instance_b_ratio {
            cfg.instance.b_ratio = Some(v);
        }
        if let Some(v) = self.instance_seed {
            cfg.instance.seed = Some(v);
        }
        if let Some(s) = &self.instance_perturbation_style {
            cfg.instance.perturbation_style = Some(parse_perturbation_style(s)?);
        }
        if let Some(v) = self.quadrature_order {
            cfg.quadrature.order = Some(v);
        }
        if let Some(s) = &self.quadrature_style {
            cfg.quadrature.style = Some(parse_contour_style(s)?);
        }
        if let Some(v) = self.quadrature_b_prime {
            cfg.quadrature.b_prime = Some(v);
        }
        if let Some(v) = self.tolerances_tol {
            cfg.tolerances.tol = Some(v);
        }
        if let Some(v) = self.mode_force {
            cfg.mode.force = Some(v);
        }
        if let Some(v) = self.mode_parallel {
            cfg.mode.parallel = Some(v);
        }
        if let Some(v) = self.mode_resolvent_samples {
            cfg.mode.resolvent_samples = Some(v);
        }
        if let Some(v) = self.mode_random_vectors {
            cfg.mode.random_vectors = Some(v);
        }
        if let Some(v) = self.mode_sample_seed {
            cfg.mode.sample_seed = Some(v);
        }

        if let Some(v) = self.seed {
            cfg.instance.seed = Some(v);
        }
        if let Some(v) = self.b_ratio {
            cfg.instance.b_ratio = Some(v);
        }
        if let Some(v) = self.tol {
            cfg.tolerances.tol = Some(v);
        }
        if let Some(v) = self.quad_order {
            cfg.quadrature.order = Some(v);
        }
        if let Some(v) = self.parallel {
            cfg.mode.parallel = Some(v);
        }
        if self.force {
            cfg.mode.force = Some(true);
        }
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| Error::InvalidSpec {
            reason: format!("cannot create {}: {e}", dir.display()),
        })?;
        Ok(dir)
    }
}

/// The operator pair: from Matrix Market files when given, from the
/// generated instance otherwise.
fn build_inputs(
    args: &RunArgs,
    cfg: &FileConfig,
) -> Result<(PerturbedPair, SegmentFamily, Option<InstanceSpec>)> {
    if args.t_matrix.is_some() || args.b_matrix.is_some() {
        let t_path = args.t_matrix.as_ref().ok_or_else(|| Error::InvalidSpec {
            reason: "--b-matrix without --t-matrix".into(),
        })?;
        let segments = cfg.instance.segments.clone().ok_or_else(|| Error::InvalidSpec {
            reason: "matrix-file input still needs segments ([instance].segments or \
                     --instance.segments)"
                .into(),
        })?;
        let family = build_segment_family(&segments)?;
        let t_mat = mm::load_square_matrix(t_path, None)?;
        let n = t_mat.nrows();
        let b_mat = match &args.b_matrix {
            Some(p) => mm::load_square_matrix(p, Some(n))?,
            None => CMat::zeros(n, n),
        };
        let t = HermitianOperator::new(t_mat)?;
        let pair = PerturbedPair::new(t, b_mat)?;
        Ok((pair, family, None))
    } else {
        let spec = cfg.instance_spec()?;
        let (pair, family) = generate_instance(&spec)?;
        Ok((pair, family, Some(spec)))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::InvalidSpec {
        reason: format!("cannot write {}: {e}", path.display()),
    })
}

fn write_report_files(dir: &Path, report: &CertificationReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::InvalidSpec {
        reason: format!("report serialization failed: {e}"),
    })?;
    write_file(&dir.join("report.json"), &json)?;
    write_file(&dir.join("eigenvalues.csv"), &outputs::eigenvalues_csv(report))?;
    write_file(&dir.join("plot.svg"), &outputs::plot_svg(report))?;
    Ok(())
}

fn cmd_generate(args: &RunArgs) -> Result<u8> {
    let cfg = args.effective()?;
    let spec = cfg.instance_spec()?;
    let (pair, _family) = generate_instance(&spec)?;
    let dir = args.out_dir()?;
    let spec_json = serde_json::to_string(&spec).map_err(|e| Error::InvalidSpec {
        reason: format!("spec serialization failed: {e}"),
    })?;
    let comments = vec![format!("seed: {}", spec.seed), format!("spec: {spec_json}")];
    mm::save_matrix(&dir.join("t.mtx"), pair.t().matrix(), &comments)?;
    mm::save_matrix(&dir.join("b.mtx"), pair.b_matrix(), &comments)?;
    write_file(&dir.join("instance.json"), &spec_json)?;
    println!(
        "wrote {}, {}, {}",
        dir.join("t.mtx").display(),
        dir.join("b.mtx").display(),
        dir.join("instance.json").display()
    );
    Ok(0)
}

fn cmd_project(args: &RunArgs) -> Result<u8> {
    let cfg = args.effective()?;
    let cert = cfg.certification();
    let (pair, family, _) = build_inputs(args, &cfg)?;
    let b = pair.b_norm();
    let d = family.gap();
    let b_prime = cert.b_prime.unwrap_or(if b < d / 2.0 {
        (b + d / 2.0) / 2.0
    } else {
        1.1 * b
    });
    let (set, diags) = contour_projections(
        &pair,
        &family,
        b_prime,
        cert.style,
        cert.tol,
        cert.quad_order,
        cert.parallel,
    )?;
    let dir = args.out_dir()?;
    let ranks = set.ranks();
    for (j, q) in set.matrices().iter().enumerate() {
        let comments = vec![
            format!("cluster: {j} (label {})", family.label(j)),
            format!("rank: {}", ranks[j]),
            format!("idempotency_residual: {}", diags[j].idempotency_residual),
        ];
        mm::save_matrix(&dir.join(format!("q_{j:03}.mtx")), q, &comments)?;
    }
    #[derive(serde::Serialize)]
    struct ProjectionIndex<'a> {
        b_prime: f64,
        style: riesz_core::contour::ContourStyle,
        tol: f64,
        ranks: Vec<usize>,
        clusters: &'a [riesz_core::projections::ProjectionDiagnostics],
    }
    let index = serde_json::to_string_pretty(&ProjectionIndex {
        b_prime,
        style: cert.style,
        tol: cert.tol,
        ranks,
        clusters: &diags,
    })
    .map_err(|e| Error::InvalidSpec {
        reason: format!("diagnostics serialization failed: {e}"),
    })?;
    write_file(&dir.join("projections.json"), &index)?;
    println!(
        "wrote {} projections and {}",
        set.len(),
        dir.join("projections.json").display()
    );
    Ok(0)
}

fn run_and_report(args: &RunArgs, bounds_only: bool) -> Result<u8> {
    let cfg = args.effective()?;
    let mut cert: CertificationConfig = cfg.certification();
    cert.bounds_only = bounds_only;
    let (pair, family, spec) = build_inputs(args, &cfg)?;
    let mut report = run_certification(&pair, &family, &cert);
    report.instance = spec;
    let dir = args.out_dir()?;
    write_report_files(&dir, &report)?;
    print!("{}", outputs::summary(&report));
    println!("report: {}", dir.join("report.json").display());
    Ok(if report.overall_pass { 0 } else { 1 })
}

fn cmd_report(args: &ReportArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.from).map_err(|e| Error::InvalidSpec {
        reason: format!("cannot read {}: {e}", args.from.display()),
    })?;
    let report: CertificationReport =
        serde_json::from_str(&text).map_err(|e| Error::ParseError {
            line: e.line(),
            message: format!("{}: {e}", args.from.display()),
        })?;
    let dir = match &args.out {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Error::InvalidSpec {
                reason: format!("cannot create {}: {e}", d.display()),
            })?;
            d.clone()
        }
        None => args
            .from
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    write_file(&dir.join("eigenvalues.csv"), &outputs::eigenvalues_csv(&report))?;
    write_file(&dir.join("plot.svg"), &outputs::plot_svg(&report))?;
    print!("{}", outputs::summary(&report));
    Ok(if report.overall_pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Project(args) => cmd_project(args),
        Cmd::Verify(args) => run_and_report(args, false),
        Cmd::Bounds(args) => run_and_report(args, true),
        Cmd::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
