use std::path::Path;

use serde::Deserialize;

use singdist::model::{relabel_canonical, DesignParams, Geometry, MotionSpec};
use singdist::pipeline::{RrrGeometry, RrrMotion};

use crate::Failure;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    design: Option<DesignParams>,
    /// Unnormalized anchors; relabeled and normalized on load.
    geometry: Option<Geometry>,
    motion: Option<MotionSpec>,
    rrr: Option<RrrInput>,
}

#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RrrInput {
    pub geometry: RrrGeometry,
    pub motion: RrrMotion,
}

pub struct Problem {
    pub design: DesignParams,
    pub motion: MotionSpec,
    pub rrr: Option<RrrInput>,
}

/// Reads the input file and brings the 3-RPR part into canonical labeling.
pub fn load(path: &Path) -> Result<Problem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let raw: RawInput = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let default_motion = MotionSpec {
        a0: [0.0, 0.0],
        a1: [0.0, 0.0],
        b1: [0.0, 0.0],
        v: 0.0,
        w: std::f64::consts::TAU,
        n: 90,
        phase: 0.0,
    };
    let (geometry, motion) = match (raw.design, raw.geometry) {
        (Some(_), Some(_)) => return Err(Failure::Config("give either `design` or `geometry`, not both".into())),
        (Some(d), None) => (d.geometry(), raw.motion),
        (None, Some(g)) => (g, raw.motion),
        (None, None) if raw.rrr.is_some() => {
            return Ok(Problem {
                design: DesignParams::new(1.0, 0.0, 1.0, 1.0, 0.0, 1.0),
                motion: default_motion,
                rrr: raw.rrr,
            })
        }
        (None, None) => return Err(Failure::Config("input needs `design` or `geometry`".into())),
    };
    let motion = motion.ok_or_else(|| Failure::Config("input needs `motion`".into()))?;
    let relabel = relabel_canonical(&geometry).map_err(|e| Failure::Config(e.to_string()))?;
    let motion = if relabel.permutation == [0, 1, 2] && raw.design.is_some_and(|d| d.is_canonical()) {
        motion
    } else {
        relabel.transform_motion(&motion)
    };
    Ok(Problem {
        design: if raw.design.is_some_and(|d| d.is_canonical()) {
            raw.design.expect("checked")
        } else {
            relabel.design
        },
        motion,
        rrr: raw.rrr,
    })
}
