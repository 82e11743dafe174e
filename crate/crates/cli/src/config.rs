//! Run configuration: a TOML file with `[instance]`, `[quadrature]`,
//! `[tolerances]` and `[mode]` sections, every key of which can be
//! overridden on the command line by a flag of the same dotted name
//! (`--instance.n 16`) or by the short flags (`--seed`, `--b-ratio`, ...).

use std::path::Path;

use riesz_core::contour::ContourStyle;
use riesz_core::instance::{InstanceSpec, PerturbationStyle};
use riesz_core::pipeline::CertificationConfig;
use riesz_core::{Error, Result};

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub instance: InstanceSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub mode: ModeSection,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    pub n: Option<usize>,
    /// Segment endpoints as pairs: `segments = [[0.0, 1.0], [3.0, 4.0]]`.
    pub segments: Option<Vec<(f64, f64)>>,
    pub cluster_sizes: Option<Vec<usize>>,
    pub b_ratio: Option<f64>,
    pub seed: Option<u64>,
    pub perturbation_style: Option<PerturbationStyle>,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub order: Option<usize>,
    pub style: Option<ContourStyle>,
    /// Contour radius override; the default is the midpoint of `(b, d/2)`.
    pub b_prime: Option<f64>,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub force: Option<bool>,
    pub parallel: Option<usize>,
    pub resolvent_samples: Option<usize>,
    pub random_vectors: Option<usize>,
    pub sample_seed: Option<u64>,
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidSpec {
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    toml::from_str(&text).map_err(|e| Error::InvalidSpec {
        reason: format!("{}: {e}", path.display()),
    })
}

/// Parses `"0:1,3:4,6:6.5"` into segment endpoint pairs.
pub fn parse_segments(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair.split_once(':').ok_or_else(|| Error::InvalidSpec {
                reason: format!("segment '{pair}' must look like 'alpha:beta'"),
            })?;
            let parse = |t: &str| {
                t.trim().parse::<f64>().map_err(|_| Error::InvalidSpec {
                    reason: format!("invalid segment endpoint '{t}'"),
                })
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

/// Parses `"3,3,2"` into cluster sizes.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| Error::InvalidSpec {
                reason: format!("invalid cluster size '{t}'"),
            })
        })
        .collect()
}

pub fn parse_perturbation_style(s: &str) -> Result<PerturbationStyle> {
    match s {
        "dense_random" => Ok(PerturbationStyle::DenseRandom),
        "cluster_coupling" => Ok(PerturbationStyle::ClusterCoupling),
        "hermitian" => Ok(PerturbationStyle::Hermitian),
        other => Err(Error::InvalidSpec {
            reason: format!(
                "unknown perturbation style '{other}' \
                 (expected dense_random, cluster_coupling or hermitian)"
            ),
        }),
    }
}

pub fn parse_contour_style(s: &str) -> Result<ContourStyle> {
    match s {
        "stadium" => Ok(ContourStyle::Stadium),
        "rectangle" => Ok(ContourStyle::Rectangle),
        other => Err(Error::InvalidSpec {
            reason: format!("unknown contour style '{other}' (expected stadium or rectangle)"),
        }),
    }
}

impl FileConfig {
    /// Resolves the instance description, or explains what is missing.
    pub fn instance_spec(&self) -> Result<InstanceSpec> {
        let i = &self.instance;
        let missing = |what: &str| Error::InvalidSpec {
            reason: format!(
                "no instance {what} given; set [instance] in a config file or pass \
                 --instance.{what}"
            ),
        };
        let segments = i.segments.clone().ok_or_else(|| missing("segments"))?;
        let cluster_sizes = i.cluster_sizes.clone().ok_or_else(|| missing("cluster_sizes"))?;
        let n = i.n.unwrap_or_else(|| cluster_sizes.iter().sum());
        let spec = InstanceSpec {
            n,
            segments,
            cluster_sizes,
            b_ratio: i.b_ratio.unwrap_or(0.8),
            seed: i.seed.unwrap_or(1),
            perturbation_style: i.perturbation_style.unwrap_or_default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn certification(&self) -> CertificationConfig {
        let defaults = CertificationConfig::default();
        CertificationConfig {
            tol: self.tolerances.tol.unwrap_or(defaults.tol),
            quad_order: self.quadrature.order.unwrap_or(defaults.quad_order),
            style: self.quadrature.style.unwrap_or(defaults.style),
            b_prime: self.quadrature.b_prime,
            force: self.mode.force.unwrap_or(false),
            resolvent_samples: self
                .mode
                .resolvent_samples
                .unwrap_or(defaults.resolvent_samples),
            random_vectors: self.mode.random_vectors.unwrap_or(defaults.random_vectors),
            sample_seed: self.mode.sample_seed.unwrap_or(defaults.sample_seed),
            parallel: self.mode.parallel.unwrap_or(defaults.parallel),
            bounds_only: false,
        }
    }
}
