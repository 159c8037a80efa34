//! Built-in named coframes: frame-bundle lifts of the test profiles and of
//! the `R0` family.
//!
//! Names: `sphere_bundle`, `flat_bundle`, `r0_<R0>_bundle` (e.g.
//! `r0_1.5_bundle`). A trailing `.cf` is ignored.

use crate::coframe::Coframe;
use crate::error::{Error, Result};
use crate::revolution::{build_surface, frame_bundle_coframe, LiftOrientation, SurfaceOfRevolution};

/// Names shipped by `scene --all`.
pub const STANDARD_SCENES: [&str; 5] = [
    "sphere_bundle",
    "flat_bundle",
    "r0_1.25_bundle",
    "r0_1.5_bundle",
    "r0_2_bundle",
];

#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub surface: SurfaceOfRevolution,
    pub coframe: Coframe,
}

pub fn surface_for(name: &str) -> Result<SurfaceOfRevolution> {
    let name = name.strip_suffix(".cf").unwrap_or(name);
    match name {
        "sphere_bundle" => Ok(SurfaceOfRevolution::round_sphere()),
        "flat_bundle" => Ok(SurfaceOfRevolution::flat()),
        _ => {
            let r0 = name
                .strip_prefix("r0_")
                .and_then(|s| s.strip_suffix("_bundle"))
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Input(format!("unknown scene {name:?}")))?;
            build_surface(r0)
        }
    }
}

pub fn scene(name: &str, orientation: LiftOrientation) -> Result<Scene> {
    let surface = surface_for(name)?;
    let coframe = frame_bundle_coframe(&surface, orientation);
    Ok(Scene {
        name: name.strip_suffix(".cf").unwrap_or(name).to_string(),
        surface,
        coframe,
    })
}

pub fn describe(s: &Scene) -> String {
    let (lo, hi) = s.surface.valid_interval();
    format!("{}: frame bundle of {:?}, r in ({lo}, {hi})", s.name, s.surface.profile())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for name in STANDARD_SCENES {
            assert!(scene(name, LiftOrientation::Standard).is_ok(), "{name}");
        }
        assert_eq!(surface_for("r0_1.5_bundle.cf").unwrap().r0(), Some(1.5));
        assert!(surface_for("torus").is_err());
        assert!(surface_for("r0_0.5_bundle").is_err());
    }
}
