//! Experiment configuration: strict JSON schema, dotted --set overrides,
//! and explicit flag precedence.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Parse `--set key=value` pairs into dotted-path JSON writes.
pub fn apply_sets(base: &mut Value, sets: &[String]) -> Result<()> {
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got '{s}'"))?;
        let val: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
        let mut cursor = &mut *base;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if i + 1 == parts.len() {
                cursor
                    .as_object_mut()
                    .ok_or_else(|| anyhow!("cannot set '{key}': parent is not an object"))?
                    .insert(part.to_string(), val.clone());
            } else {
                cursor = cursor
                    .as_object_mut()
                    .ok_or_else(|| anyhow!("cannot set '{key}': parent is not an object"))?
                    .entry(part.to_string())
                    .or_insert_with(|| Value::Object(Default::default()));
            }
        }
    }
    Ok(())
}

/// Load the config file (if any), apply --set overrides, and deserialize
/// into the strict per-kind parameter struct.
pub fn resolve<T: DeserializeOwned + Default + Serialize>(
    config_path: Option<&Path>,
    sets: &[String],
) -> Result<T> {
    let mut base = match config_path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => serde_json::to_value(T::default())?,
    };
    if !base.is_object() {
        bail!("config root must be a JSON object");
    }
    apply_sets(&mut base, sets)?;
    let typed: T = serde_json::from_value(base).context("invalid configuration")?;
    Ok(typed)
}

fn default_k_max() -> u64 {
    1000
}
fn default_resolution() -> u32 {
    10
}
fn default_eps() -> f64 {
    0.1
}
fn default_instances() -> u64 {
    1000
}
fn default_bound() -> f64 {
    100.0
}
fn default_depth() -> usize {
    4
}
fn default_n_seq() -> String {
    "geometric:10".into()
}
fn default_gamma_samples() -> usize {
    100
}
fn default_t_samples() -> usize {
    20
}
fn default_budget() -> usize {
    500_000
}
fn default_t_max() -> f64 {
    20.0
}
fn default_step() -> f64 {
    0.01
}
fn default_threshold() -> f64 {
    0.1
}
fn default_t_list() -> Vec<u64> {
    vec![100, 1000]
}
fn default_i_max() -> usize {
    5
}
fn default_scale_from() -> u32 {
    4
}
fn default_scale_to() -> u32 {
    10
}
fn default_exponents() -> Vec<f64> {
    vec![1.0, 0.5, -1.5]
}
fn default_shape() -> String {
    "box".into()
}
fn default_r() -> f64 {
    0.1
}
fn default_cover_t() -> u32 {
    15
}
fn default_s_samples() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBadParams {
    pub v: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl Default for ScanBadParams {
    fn default() -> Self {
        Self {
            v: vec![spikelab_core::accept::GOLDEN_FRAC],
            eps: default_eps(),
            k_max: default_k_max(),
            resolution: default_resolution(),
            weights: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceParams {
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for CorrespondenceParams {
    fn default() -> Self {
        Self {
            instances: default_instances(),
            eps: default_eps(),
            k_max: default_k_max(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinkowskiParams {
    /// spanning vectors of the linear part, row per vector
    pub spanning: Vec<Vec<f64>>,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
    #[serde(default = "default_bound")]
    pub bound: f64,
    /// optional badly-approximable test threshold
    #[serde(default)]
    pub eps: Option<f64>,
}

impl Default for MinkowskiParams {
    fn default() -> Self {
        Self {
            spanning: vec![vec![1.0, 1.618033988749895]],
            offset: None,
            bound: default_bound(),
            eps: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalParams {
    /// "geometric:<base>" or a comma-free JSON list of quotients
    #[serde(default = "default_n_seq")]
    pub n_seq: String,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_gamma_samples")]
    pub gamma_samples: usize,
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    #[serde(default = "default_s_samples")]
    pub s_samples: usize,
    #[serde(default = "default_budget")]
    pub materialize_budget: usize,
}

impl Default for FractalParams {
    fn default() -> Self {
        Self {
            n_seq: default_n_seq(),
            depth: default_depth(),
            gamma_samples: default_gamma_samples(),
            t_samples: default_t_samples(),
            s_samples: default_s_samples(),
            materialize_budget: default_budget(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitParams {
    #[serde(default = "default_n_seq")]
    pub quotients: String,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            quotients: default_n_seq(),
            depth: default_depth(),
            t_max: default_t_max(),
            step: default_step(),
            threshold: default_threshold(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeavinessParams {
    #[serde(default = "default_n_seq")]
    pub quotients: String,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_t_list")]
    pub t_list: Vec<u64>,
    #[serde(default = "default_i_max")]
    pub i_max: usize,
    /// defaults to eta_i = 2^-i
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
}

impl Default for HeavinessParams {
    fn default() -> Self {
        Self {
            quotients: default_n_seq(),
            depth: default_depth(),
            t_list: default_t_list(),
            i_max: default_i_max(),
            eta: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimEstimateParams {
    /// "box", "segment", "cantor-x" or "cantor-y"
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default = "default_scale_from")]
    pub scale_from: u32,
    #[serde(default = "default_scale_to")]
    pub scale_to: u32,
    /// euclidean counts alongside the quasi counts
    #[serde(default)]
    pub euclidean: bool,
}

impl Default for DimEstimateParams {
    fn default() -> Self {
        Self {
            shape: default_shape(),
            exponents: default_exponents(),
            scale_from: default_scale_from(),
            scale_to: default_scale_to(),
            euclidean: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringParams {
    #[serde(default = "default_n_seq")]
    pub quotients: String,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_cover_t")]
    pub t_max: u32,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for CoveringParams {
    fn default() -> Self {
        Self {
            quotients: default_n_seq(),
            depth: default_depth(),
            r: default_r(),
            t_max: default_cover_t(),
            threshold: default_threshold(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AcceptParams {
    /// run only these criterion ids (all when empty)
    #[serde(default)]
    pub only: Vec<u32>,
}

/// Parse a quotient argument: "geometric:<base>", "ones", or a JSON
/// array such as "[10,100,1000]".
pub fn parse_quotients(spec: &str, count: usize) -> Result<Vec<u64>> {
    if let Some(base) = spec.strip_prefix("geometric:") {
        let base: u64 = base.parse().context("geometric base")?;
        return Ok(spikelab_core::cf::geometric_quotients(base, count)?);
    }
    if spec == "ones" {
        return Ok(vec![1; count.max(1)]);
    }
    let list: Vec<u64> = serde_json::from_str(spec)
        .with_context(|| format!("quotients must be geometric:<b>, ones, or a JSON list; got '{spec}'"))?;
    Ok(list)
}

/// Like `parse_quotients`, but generator specs are sized so the ladder
/// stays faithful past the time horizon: the truncation to L quotients
/// only reproduces the number's orbit while t < ln q_L. Explicit lists
/// are returned as given. Warns on stderr when the horizon cannot be
/// reached (e.g. geometric quotients overflowing u64).
pub fn quotients_for_horizon(spec: &str, min_count: usize, t_horizon: f64) -> Result<Vec<u64>> {
    let margin = t_horizon.max(0.0) + 5.0;
    let count = if spec == "ones" {
        // ln q_L grows by ln(golden ratio) per quotient
        min_count.max((margin / 0.4812) as usize + 4)
    } else if let Some(base) = spec.strip_prefix("geometric:") {
        // ln q_L ~ (L^2 / 2) ln base, but the quotients themselves
        // overflow u64 past base^i_max
        let b: f64 = base.parse::<u64>().context("geometric base")? as f64;
        let i_max = ((u64::MAX as f64).ln() / b.ln()).floor() as usize;
        min_count.max(((2.0 * margin / b.ln()).sqrt() as usize + 2).min(i_max))
    } else {
        min_count
    };
    let quotients = parse_quotients(spec, count)?;
    let conv = spikelab_core::cf::Convergents::from_quotients(&quotients)?;
    let reach = conv.ln_denominator(conv.depth());
    if reach < t_horizon {
        eprintln!(
            "note: the {}-quotient truncation is faithful only up to t ~ {reach:.1}; samples beyond see the rational truncation, not the full expansion",
            conv.depth()
        );
    }
    Ok(quotients)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_override_nested_keys() {
        let mut v = serde_json::json!({"a": {"b": 1}, "c": 2});
        apply_sets(
            &mut v,
            &["a.b=5".to_string(), "c=0.25".to_string(), "d=hi".to_string()],
        )
        .unwrap();
        assert_eq!(v["a"]["b"], 5);
        assert_eq!(v["c"], 0.25);
        assert_eq!(v["d"], "hi");
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v = serde_json::to_value(ScanBadParams::default()).unwrap();
        apply_sets(&mut v, &["nonsense=1".to_string()]).unwrap();
        let r: std::result::Result<ScanBadParams, _> = serde_json::from_value(v);
        assert!(r.is_err());
    }

    #[test]
    fn quotient_specs() {
        assert_eq!(parse_quotients("geometric:10", 3).unwrap(), vec![10, 100, 1000]);
        assert_eq!(parse_quotients("ones", 4).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(parse_quotients("[3,7,15]", 0).unwrap(), vec![3, 7, 15]);
        assert!(parse_quotients("junk", 2).is_err());
    }
}
