//! Orthonormal frame-bundle lift of a surface of revolution and the
//! prime-integral comparison along geodesics.

use serde::{Deserialize, Serialize};

use super::{GeodesicState, SurfaceOfRevolution, Trajectory};
use crate::coframe::Coframe;
use crate::error::{Error, Result};
use crate::field::{Chart, Point, ScalarField};
use crate::report::StructureReport;
use crate::sampling::Sampling;
use crate::structures::{verify_cartan, CartanStructure};

/// Orientation of the lift on the chart `(r, θ, ψ)`.
///
/// Both satisfy the Cartan structure equations with the same `R`; they
/// differ by `(α¹, α³) → (−α¹, −α³)`, which flips the sign of `ê1` and hence
/// of every first coframe derivative `f_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftOrientation {
    /// `α¹ = −sinψ η dr + φ cosψ dθ`, `α² = cosψ η dr + φ sinψ dθ`,
    /// `α³ = dψ + (φ′/η) dθ`; `ê1` is the counter-clockwise normal of the
    /// velocity.
    #[default]
    Standard,
    /// `α¹ = sinψ η dr − φ cosψ dθ`, `α² = cosψ η dr + φ sinψ dθ`,
    /// `α³ = −dψ − (φ′/η) dθ`; `ê1` is the clockwise normal.
    Clockwise,
}

/// Lift of `g = η² dr² + φ² dθ²` to its orthonormal frame bundle.
///
/// `ψ` is the angle of the unit velocity against `∂_r/η`, so the lift of a
/// unit-speed geodesic lies in `{α¹ = 0, α³ = 0}` and has `α²(γ̇) = 1`.
/// The volume coefficient is `−ηφ` in both orientations.
pub fn frame_bundle_coframe(s: &SurfaceOfRevolution, orientation: LiftOrientation) -> Coframe {
    let chart = Chart::FrameBundle;
    let psi = ScalarField::coordinate(2, chart);
    let (sp, cp) = (psi.sin(), psi.cos());
    let eta = s.eta_field();
    let phi = s.phi_field();
    let turn = phi.partial(0) / eta;
    let zero = ScalarField::zero(chart);
    let one = ScalarField::one(chart);
    let sign = match orientation {
        LiftOrientation::Standard => 1.0,
        LiftOrientation::Clockwise => -1.0,
    };
    let rows = [
        [-sign * (&sp * eta), sign * (phi * &cp), zero.clone()],
        [&cp * eta, phi * &sp, zero],
        [ScalarField::zero(chart), sign * turn, sign * one],
    ];
    Coframe::new(rows, s.default_box())
}

/// Lift and verify in one step, sampling the surface's default box.
pub fn frame_bundle_cartan(
    s: &SurfaceOfRevolution,
    orientation: LiftOrientation,
    sampling: Option<&Sampling>,
) -> Result<(CartanStructure, StructureReport)> {
    let cf = frame_bundle_coframe(s, orientation);
    let default;
    let sampling = match sampling {
        Some(x) => x,
        None => {
            default = Sampling::default_for(cf.domain());
            &default
        }
    };
    verify_cartan(&cf, sampling)
}

/// The point `(r, θ, ψ)` over a state, with `ψ = atan2(φθ̇, ηṙ)`.
pub fn lift_state(s: &SurfaceOfRevolution, st: &GeodesicState) -> Point {
    let (eta, _) = s.eta(st.r);
    let (phi, _) = s.phi(st.r);
    [st.r, st.theta, (phi * st.thetadot).atan2(eta * st.rdot)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRatio {
    pub meridian: bool,
    /// Mean of `ρ = R_1 e^R / F` over the samples (0 for meridians).
    pub mean: f64,
    pub spread: f64,
    /// `max |R_1 e^R|`; the asserted quantity on meridians.
    pub max_abs_r1_exp_r: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeIntegralReport {
    pub orientation: LiftOrientation,
    pub trajectories: Vec<TrajectoryRatio>,
    /// Mean `ρ` over all non-meridian trajectories.
    pub rho: f64,
    /// Largest difference between per-trajectory means.
    pub cross_spread: f64,
    /// Largest per-trajectory spread.
    pub max_spread: f64,
    pub negative: bool,
    pub candidate_e32: f64,
    pub candidate_half_e32: f64,
    pub diff_e32: f64,
    pub diff_half_e32: f64,
    /// Which candidate `|ρ|` matches: `"e^{3/2}"` or `"e^{3/2}/2"`.
    pub matches: String,
}

/// Evaluate `ρ = R_1 e^R / F` along trajectories on their lifts. `F` is
/// taken at unit speed (`F/√E`) since `R_1` only sees the direction.
/// `stride` thins the samples.
pub fn prime_integral_check(
    s: &SurfaceOfRevolution,
    trajectories: &[Trajectory],
    orientation: LiftOrientation,
    stride: usize,
) -> Result<PrimeIntegralReport> {
    let cf = frame_bundle_coframe(s, orientation);
    let w = cf.form(2).exterior_derivative()?;
    let r = cf.expand_two_form(&w)?[2].clone();
    let r1_exp_r = cf.d(&r, 0) * r.exp();
    let tape = r1_exp_r.tape();
    let mut buf = Vec::new();
    let mut out = Vec::new();
    for traj in trajectories {
        let thin = traj.thinned(stride);
        let mut ratios = Vec::new();
        let mut max_abs = 0.0f64;
        let mut meridian = true;
        for (st, (f, e)) in thin.states.iter().zip(thin.f.iter().zip(&thin.e)) {
            let v = tape.eval_with(lift_state(s, st), &mut buf)?;
            max_abs = max_abs.max(v.abs());
            let f_unit = f / e.sqrt();
            if f_unit.abs() > 1e-12 {
                meridian = false;
                ratios.push(v / f_unit);
            }
        }
        let (mean, spread) = if meridian {
            (0.0, 0.0)
        } else {
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (mean, hi - lo)
        };
        out.push(TrajectoryRatio {
            meridian,
            mean,
            spread,
            max_abs_r1_exp_r: max_abs,
            samples: thin.len(),
        });
    }
    let means: Vec<f64> = out.iter().filter(|t| !t.meridian).map(|t| t.mean).collect();
    let rho = if means.is_empty() {
        0.0
    } else {
        means.iter().sum::<f64>() / means.len() as f64
    };
    let cross_spread = if means.is_empty() {
        0.0
    } else {
        means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - means.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let max_spread = out.iter().map(|t| t.spread).fold(0.0, f64::max);
    let e32 = 1.5f64.exp();
    let diff_e32 = (rho.abs() - e32).abs();
    let diff_half = (rho.abs() - e32 / 2.0).abs();
    if !rho.is_finite() {
        return Err(Error::Precondition("ratio is not finite".into()));
    }
    Ok(PrimeIntegralReport {
        orientation,
        trajectories: out,
        rho,
        cross_spread,
        max_spread,
        negative: rho < 0.0,
        candidate_e32: e32,
        candidate_half_e32: e32 / 2.0,
        diff_e32,
        diff_half_e32: diff_half,
        matches: if diff_half < diff_e32 { "e^{3/2}/2" } else { "e^{3/2}" }.to_string(),
    })
}
