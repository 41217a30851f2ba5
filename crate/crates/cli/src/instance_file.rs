//! TOML instance files.
//!
//! ```toml
//! variant = "noreturn_max"
//! C = 32
//! T = 1440
//! nu = 0.625
//! pi = 34
//! S = 100
//!
//! [demand]
//! type = "piecewise_affine"   # or "step", "constant", "synthetic"
//! points = [[0, 0], [360, 180], [1440, 2016]]
//!
//! [params]
//! rho = 1e-4
//! M = 16
//! grid = 8
//! ```
//!
//! Step points are cumulative values reached at each jump time. A constant
//! curve takes `total` (or a single point). A synthetic curve takes `id`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use shuttle_sched::{synthetic, CurveKind, DemandCurve, Instance, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub variant: String,
    #[serde(rename = "C")]
    pub capacity: f64,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub pi: f64,
    #[serde(rename = "S")]
    pub shuttles: usize,
    pub demand: DemandSection,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl Params {
    fn is_empty(&self) -> bool {
        *self == Params::default()
    }
}

/// Why a file could not be turned into an instance. The message names the
/// offending key, or the line and column for syntax errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn bad(key: &str, msg: impl fmt::Display) -> ParseError {
    ParseError(format!("key `{key}`: {msg}"))
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<InstanceFile, ParseError> {
        toml::from_str(text).map_err(|e| ParseError(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<InstanceFile, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ParseError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance files always serialize")
    }

    pub fn to_instance(&self) -> Result<Instance, ParseError> {
        let variant: Variant = self.variant.parse().map_err(|e| bad("variant", e))?;
        let points: Vec<(f64, f64)> = self.demand.points.iter().map(|p| (p[0], p[1])).collect();
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(bad(
                    "demand.points",
                    format!("times must be strictly increasing ({} then {})", w[0].0, w[1].0),
                ));
            }
        }
        let need_t = || {
            self.horizon
                .ok_or_else(|| bad("T", format!("required for {} demand", self.demand.kind)))
        };
        let demand = match self.demand.kind.as_str() {
            "constant" => {
                let total = match (self.demand.total, points.as_slice()) {
                    (Some(t), []) => t,
                    (None, [(_, v)]) => *v,
                    _ => return Err(bad("demand", "a constant curve takes either `total` or a single point")),
                };
                DemandCurve::constant(need_t()?, total)
            }
            "step" => DemandCurve::step(need_t()?, points),
            "piecewise_affine" => {
                if let (Some(t), Some(last)) = (self.horizon, points.last()) {
                    if t != last.0 {
                        return Err(bad("T", format!("{t} differs from the last demand point time {}", last.0)));
                    }
                }
                DemandCurve::piecewise_affine(points)
            }
            "synthetic" => {
                let id = self
                    .demand
                    .id
                    .as_deref()
                    .ok_or_else(|| bad("demand.id", "required for synthetic demand"))?;
                let curve = synthetic::by_id(id)
                    .ok_or_else(|| bad("demand.id", format!("unknown id '{id}', expected one of {:?}", synthetic::IDS)))?;
                Ok(curve)
            }
            other => return Err(bad("demand.type", format!("unknown type '{other}'"))),
        }
        .map_err(|e| bad("demand", e))?;
        if let Some(rho) = self.params.rho {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(bad("params.rho", format!("must be positive, got {rho}")));
            }
        }
        if self.params.m == Some(0) {
            return Err(bad("params.M", "must be at least 1"));
        }
        if self.params.grid == Some(0) {
            return Err(bad("params.grid", "must be at least 1"));
        }
        Instance::new(variant, self.capacity, self.nu, self.pi, self.shuttles, demand).map_err(|e| {
            let key = match () {
                _ if self.capacity.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) => "C",
                _ if self.shuttles == 0 => "S",
                _ if self.nu.is_nan() || self.nu < 0.0 => "nu",
                _ => "pi",
            };
            bad(key, e)
        })
    }

    /// File describing `instance` with explicit demand points.
    pub fn from_instance(instance: &Instance, params: Params) -> InstanceFile {
        let demand = &instance.demand;
        let kind = demand.kind();
        let section = match kind {
            CurveKind::Constant => DemandSection {
                kind: kind.as_str().into(),
                points: vec![],
                total: Some(demand.total()),
                id: None,
            },
            _ => DemandSection {
                kind: kind.as_str().into(),
                points: demand.anchors().iter().map(|&(t, v)| [t, v]).collect(),
                total: None,
                id: None,
            },
        };
        InstanceFile {
            variant: instance.variant.as_str().into(),
            capacity: instance.capacity,
            horizon: Some(demand.horizon()),
            nu: instance.nu,
            pi: instance.pi,
            shuttles: instance.shuttles,
            demand: section,
            params,
        }
    }
}
