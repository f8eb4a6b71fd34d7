//! File formats: instances and reports.

use std::fmt;

use covext_core::linalg::CMatrix;
use covext_core::num_complex::Complex64;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// Row-major matrix of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(m: &JsonMatrix, what: &str) -> Result<CMatrix, CliError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some(r) = m.iter().position(|row| row.len() != cols) {
        return Err(CliError::input(format!(
            "{what}: row {r} has {} entries, expected {cols}",
            m[r].len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

/// Effects keyed by outcome label, kept in outcome order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Effects(pub Vec<(String, JsonMatrix)>);

impl Serialize for Effects {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Effects {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Effects;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from outcome labels to matrices")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Effects, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, JsonMatrix>()? {
                    out.push((k, v));
                }
                Ok(Effects(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumEntry {
    pub character: Vec<i64>,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IsometryMap {
    pub character: Vec<i64>,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Isometries {
    pub ambient_dim: usize,
    pub maps: Vec<IsometryMap>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GramBlock {
    pub characters: Vec<Vec<i64>>,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TolerancesJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup_generators: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<SpectrumEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isometries: Option<Isometries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<GramBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Effects>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesJson>,
}

pub const REPORT_FORMAT: &str = "covext-report";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Validity {
    pub is_positive: bool,
    pub is_normalized: bool,
    pub min_eigenvalue: f64,
    pub normalization_residual: f64,
    pub hermiticity_residual: f64,
    pub is_covariant: bool,
    pub covariance_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Witnesses {
    pub plus: Effects,
    pub minus: Effects,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CertificateJson {
    /// `covariant`, `global` or `moment`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosets: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<Vec<String>>,
    pub blocks: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResidualsJson {
    pub constraint: f64,
    pub reconstruction: f64,
    pub witness_min_eigenvalue: f64,
    pub witness_normalization: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExtremalityJson {
    pub verdict: String,
    pub perturbation_dim: usize,
    pub sigma_max: f64,
    pub threshold: f64,
    pub smallest_retained: Option<f64>,
    pub singular_value_tail: Vec<f64>,
    pub singular_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witnesses>,
    pub residuals: ResidualsJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OracleJson {
    pub trials: usize,
    pub seed: u64,
    pub found: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witnesses>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArcEffect {
    pub theta1: f64,
    pub theta2: f64,
    pub effect: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FreeModesJson {
    pub window: i64,
    pub modes: Vec<i64>,
    pub all_beyond_window_free: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorrelationWitnesses {
    pub plus: JsonMatrix,
    pub minus: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MomentJson {
    pub indices: Vec<i64>,
    pub correlation: JsonMatrix,
    pub arcs: Vec<ArcEffect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariant_extremality: Option<ExtremalityJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<CorrelationWitnesses>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_modes: Option<FreeModesJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_verdict: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub format: String,
    pub tool_version: String,
    pub seed: u64,
    pub instance: InstanceFile,
    pub tolerances: TolerancesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<InstanceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity: Option<Validity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pvm: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank1_admissible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariant_extremality: Option<ExtremalityJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_extremality: Option<ExtremalityJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<MomentJson>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effects_keep_order() {
        let e = Effects(vec![("1".into(), vec![]), ("0".into(), vec![])]);
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"1":[],"0":[]}"#);
        assert_eq!(serde_json::from_str::<Effects>(&s).unwrap(), e);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let m: JsonMatrix = vec![vec![[1.0, 0.0]], vec![]];
        assert!(matrix_from_json(&m, "m").is_err());
    }
}
