//! Bundled stand-in demand curves.
//!
//! Both serve 2016 users over one day with the constants of a cross-channel
//! shuttle service. `one_peak` has a single busy period around midday and
//! `two_peaks` a morning and an evening one. They are invented, strictly
//! increasing and piecewise affine. The return benchmarks use the same shapes
//! divided by 3.5 so a single shuttle can serve them.

use crate::demand::DemandCurve;
use crate::error::Result;
use crate::schedule::{Instance, Variant};

pub const HORIZON: f64 = 1440.0;
pub const CAPACITY: f64 = 32.0;
pub const NU: f64 = 0.625;
pub const PI: f64 = 34.0;
pub const RETURN_SCALE: f64 = 3.5;

const ONE_PEAK: [(f64, f64); 6] = [
    (0.0, 0.0),
    (360.0, 180.0),
    (480.0, 560.0),
    (600.0, 1060.0),
    (720.0, 1260.0),
    (1440.0, 2016.0),
];

const TWO_PEAKS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (360.0, 150.0),
    (480.0, 450.0),
    (600.0, 800.0),
    (720.0, 950.0),
    (1020.0, 1150.0),
    (1140.0, 1550.0),
    (1260.0, 1850.0),
    (1440.0, 2016.0),
];

pub fn one_peak() -> DemandCurve {
    DemandCurve::piecewise_affine(ONE_PEAK.to_vec()).expect("valid bundled curve")
}

pub fn two_peaks() -> DemandCurve {
    DemandCurve::piecewise_affine(TWO_PEAKS.to_vec()).expect("valid bundled curve")
}

/// Divides every cumulative value by `factor`.
pub fn scaled(curve: &DemandCurve, factor: f64) -> Result<DemandCurve> {
    let anchors = curve.anchors().iter().map(|&(t, v)| (t, v / factor)).collect();
    DemandCurve::new(curve.kind(), curve.horizon(), anchors)
}

/// Identifiers accepted by the CLI: `1P`, `2P`, and `1P/3.5`, `2P/3.5` for
/// the scaled variants.
pub fn by_id(id: &str) -> Option<DemandCurve> {
    match id {
        "1P" => Some(one_peak()),
        "2P" => Some(two_peaks()),
        "1P/3.5" => scaled(&one_peak(), RETURN_SCALE).ok(),
        "2P/3.5" => scaled(&two_peaks(), RETURN_SCALE).ok(),
        _ => None,
    }
}

pub const IDS: [&str; 4] = ["1P", "2P", "1P/3.5", "2P/3.5"];

/// Instance with the service constants above.
pub fn instance(variant: Variant, demand: DemandCurve, shuttles: usize) -> Result<Instance> {
    Instance::new(variant, CAPACITY, NU, PI, shuttles, demand)
}
