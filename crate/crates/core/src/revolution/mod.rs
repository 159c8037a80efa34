//! Rotationally symmetric metrics `g = η(r)² dr² + φ(r)² dθ²` and their
//! geodesic flow.
//!
//! The main family is parametrised by `R0 > 1`:
//!
//! ```text
//! Φ(r)² = (R0 − 3/2) − (R0 − 3/2 − r²/4) e^{−r²/2}
//! η(r)  = r e^{−r²/4} / (2Φ(r)),   φ(r) = Φ(r)/(R0 − 1)
//! ```
//!
//! with Gaussian curvature `R0 − r²/4`. At `R0 = 3/2` this is
//! `g = dr² + r² e^{−r²/2} dθ²`.

mod geodesic;
mod lift;

pub use geodesic::{
    conserved_quantities, integrate_beta_geodesic, integrate_geodesic, BetaForm, ConstantCurvature, Forcing,
    GeodesicState, Trajectory,
};
pub use lift::{
    frame_bundle_cartan, frame_bundle_coframe, lift_state, prime_integral_check, LiftOrientation,
    PrimeIntegralReport, TrajectoryRatio,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Chart, ScalarField};
use crate::sampling::SampleBox;

/// Metric profile of a surface of revolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    /// The `R0` family above.
    R0Family { r0: f64 },
    /// `η = φ = 1`: flat, curvature 0.
    Flat,
    /// `η = 1, φ = sin r` on `0 < r < π`: curvature 1.
    RoundSphere,
}

/// Christoffel symbols that can be nonzero for a rotationally symmetric
/// metric in coordinates `(r, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Christoffels {
    /// `γ¹₁₁ = η′/η`
    pub g111: f64,
    /// `γ¹₂₂ = −φφ′/η²`
    pub g122: f64,
    /// `γ²₁₂ = γ²₂₁ = φ′/φ`
    pub g212: f64,
}

#[derive(Debug, Clone)]
pub struct SurfaceOfRevolution {
    profile: Profile,
    /// Open interval of valid `r`.
    r_min: f64,
    r_max: f64,
    eta: ScalarField,
    phi: ScalarField,
}

/// Build the `R0` family member; requires `R0 > 1`.
pub fn build_surface(r0: f64) -> Result<SurfaceOfRevolution> {
    if !(r0.is_finite() && r0 > 1.0) {
        return Err(Error::Precondition(format!("R0 must exceed 1, got {r0}")));
    }
    SurfaceOfRevolution::new(Profile::R0Family { r0 })
}

impl SurfaceOfRevolution {
    pub fn new(profile: Profile) -> Result<Self> {
        let chart = Chart::FrameBundle;
        let (eta, phi, r_max) = match profile {
            Profile::R0Family { r0 } => {
                if !(r0.is_finite() && r0 > 1.0) {
                    return Err(Error::Precondition(format!("R0 must exceed 1, got {r0}")));
                }
                let a = r0 - 1.5;
                let src = format!(
                    "let e = exp(-r^2/2); let big = sqrt({a:?}*(1 - e) + r^2/4*e); \
                     r*exp(-r^2/4)/(2*big)"
                );
                let eta = ScalarField::parse(&src, chart)?;
                let src = format!(
                    "let e = exp(-r^2/2); let big = sqrt({a:?}*(1 - e) + r^2/4*e); big/{:?}",
                    r0 - 1.0
                );
                let phi = ScalarField::parse(&src, chart)?;
                let r_max = if r0 < 1.5 { domain_extent(r0)? } else { f64::INFINITY };
                (eta, phi, r_max)
            }
            Profile::Flat => (ScalarField::one(chart), ScalarField::one(chart), f64::INFINITY),
            Profile::RoundSphere => (
                ScalarField::one(chart),
                ScalarField::parse("sin(r)", chart)?,
                std::f64::consts::PI,
            ),
        };
        Ok(SurfaceOfRevolution {
            profile,
            r_min: 0.0,
            r_max,
            eta,
            phi,
        })
    }

    /// Test profile with `η = φ = 1`.
    pub fn flat() -> Self {
        SurfaceOfRevolution::new(Profile::Flat).expect("flat profile")
    }

    /// Test profile with `φ = sin r`.
    pub fn round_sphere() -> Self {
        SurfaceOfRevolution::new(Profile::RoundSphere).expect("sphere profile")
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn r0(&self) -> Option<f64> {
        match self.profile {
            Profile::R0Family { r0 } => Some(r0),
            _ => None,
        }
    }

    /// Open interval `(r_min, r_max)` on which the metric is positive definite.
    pub fn valid_interval(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.r_min && r < self.r_max
    }

    /// Symbolic `η(r)` on the frame-bundle chart.
    pub fn eta_field(&self) -> &ScalarField {
        &self.eta
    }

    /// Symbolic `φ(r)` on the frame-bundle chart.
    pub fn phi_field(&self) -> &ScalarField {
        &self.phi
    }

    /// Sample box on the frame-bundle chart `(r, θ, ψ)` used for residual checks.
    pub fn default_box(&self) -> SampleBox {
        let two_pi = std::f64::consts::TAU;
        let (lo, hi) = match self.profile {
            Profile::R0Family { r0 } if r0 < 1.5 => (0.3, (0.9 * self.r_max).min(3.0)),
            Profile::R0Family { r0 } if r0 == 1.5 => (0.1, 3.0),
            Profile::R0Family { .. } => (0.3, 3.0),
            Profile::Flat => (0.3, 3.0),
            Profile::RoundSphere => (0.3, 2.8),
        };
        SampleBox::new([lo, 0.0, 0.0], [hi, two_pi, two_pi])
    }

    /// `Φ(r)²`, written to avoid cancellation near `r = 0`.
    pub fn big_phi_sq(&self, r: f64) -> f64 {
        match self.profile {
            Profile::R0Family { r0 } => big_phi_sq(r0, r),
            _ => f64::NAN,
        }
    }

    /// `(η, η′)` at `r`, from closed forms.
    pub fn eta(&self, r: f64) -> (f64, f64) {
        match self.profile {
            Profile::R0Family { r0 } => {
                let a = r0 - 1.5;
                let e = (-r * r / 4.0).exp();
                let p = big_phi_sq(r0, r);
                let dp = r * e * e * (0.5 + a - r * r / 4.0);
                let big = p.sqrt();
                let dbig = dp / (2.0 * big);
                let eta = r * e / (2.0 * big);
                let deta = e * ((1.0 - r * r / 2.0) * big - r * dbig) / (2.0 * p);
                (eta, deta)
            }
            Profile::Flat | Profile::RoundSphere => (1.0, 0.0),
        }
    }

    /// `(φ, φ′)` at `r`, from closed forms.
    pub fn phi(&self, r: f64) -> (f64, f64) {
        match self.profile {
            Profile::R0Family { r0 } => {
                let a = r0 - 1.5;
                let e2 = (-r * r / 2.0).exp();
                let p = big_phi_sq(r0, r);
                let dp = r * e2 * (0.5 + a - r * r / 4.0);
                let big = p.sqrt();
                (big / (r0 - 1.0), dp / (2.0 * big * (r0 - 1.0)))
            }
            Profile::Flat => (1.0, 0.0),
            Profile::RoundSphere => (r.sin(), r.cos()),
        }
    }

    /// Closed-form Gaussian curvature.
    pub fn curvature_closed_form(&self, r: f64) -> f64 {
        match self.profile {
            Profile::R0Family { r0 } => r0 - r * r / 4.0,
            Profile::Flat => 0.0,
            Profile::RoundSphere => 1.0,
        }
    }

    /// Symbolic Gaussian curvature `−(φ′/η)′/(ηφ)`.
    pub fn curvature_field(&self) -> ScalarField {
        let dphi = self.phi.partial(0);
        -((dphi / &self.eta).partial(0)) / (&self.eta * &self.phi)
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if !r.is_finite() || r.abs() >= self.r_max {
            return Err(Error::Precondition(format!(
                "r = {r} outside the valid interval ({}, {})",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }
}

/// `Φ(r)²` for the `R0` family.
pub fn big_phi_sq(r0: f64, r: f64) -> f64 {
    let a = r0 - 1.5;
    let x = -r * r / 2.0;
    -a * x.exp_m1() + r * r / 4.0 * x.exp()
}

/// Gaussian curvature by symbolic differentiation of the profile. The
/// coordinate pole is handled by even extension (`r → |r|`) and the
/// removable singularity at `r = 0` by its limit.
pub fn gauss_curvature(s: &SurfaceOfRevolution, r: f64) -> Result<f64> {
    s.check_r(r)?;
    let r = r.abs();
    if r < 1e-8 {
        return Ok(s.curvature_closed_form(0.0));
    }
    Ok(s.curvature_field().eval([r, 0.0, 0.0])?)
}

/// Nonzero Christoffel symbols at `r`; `r = 0` is the coordinate pole.
pub fn christoffels(s: &SurfaceOfRevolution, r: f64) -> Result<Christoffels> {
    s.check_r(r)?;
    if r == 0.0 {
        return Err(Error::Precondition(
            "γ²₁₂ has a pole at r = 0; only meridians pass through the origin".into(),
        ));
    }
    let (eta, deta) = s.eta(r);
    let (phi, dphi) = s.phi(r);
    Ok(Christoffels {
        g111: deta / eta,
        g122: -phi * dphi / (eta * eta),
        g212: dphi / phi,
    })
}

/// Smallest positive root `T` of `Φ(r)² = 0` for `1 < R0 < 3/2`, by
/// bisection. `r = 0` is always a root and is excluded.
pub fn domain_extent(r0: f64) -> Result<f64> {
    if !(r0 > 1.0) {
        return Err(Error::Precondition(format!("R0 must exceed 1, got {r0}")));
    }
    if r0 >= 1.5 {
        return Err(Error::Precondition(format!(
            "R0 = {r0} ≥ 3/2: infinite extent, (r, θ) are global coordinates"
        )));
    }
    let f = |r: f64| big_phi_sq(r0, r);
    let step = 1e-3;
    let mut lo = step;
    if f(lo) <= 0.0 {
        return Err(Error::Precondition(format!("Φ² not positive near the origin for R0 = {r0}")));
    }
    let mut hi = lo + step;
    while f(hi) > 0.0 {
        lo = hi;
        hi += step;
        if hi > 100.0 {
            return Err(Error::Precondition(format!("no sign change of Φ² below r = 100 for R0 = {r0}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `f(R) = (R − 3/2) e^{2(R − 1)}`, the value of the conserved field `Q`
/// on the `R0` frame bundle.
pub fn f_of_r(r: f64) -> f64 {
    (r - 1.5) * (2.0 * (r - 1.0)).exp()
}

/// Grid scan of `f` on `[lo, hi]` refined by golden-section search.
/// Returns `(argmin, min)`.
pub fn scan_f_minimum(lo: f64, hi: f64, samples: usize) -> (f64, f64) {
    let n = samples.max(2);
    let mut best = lo;
    for k in 0..n {
        let r = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        if f_of_r(r) < f_of_r(best) {
            best = r;
        }
    }
    let h = (hi - lo) / (n - 1) as f64;
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f_of_r(c) < f_of_r(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f_of_r(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r0_three_halves_simplifies() {
        let s = build_surface(1.5).unwrap();
        let (eta, _) = s.eta(1.0);
        let (phi, _) = s.phi(1.0);
        assert!((eta - 1.0).abs() < 1e-15);
        assert!((phi - (-0.25f64).exp()).abs() < 1e-15);
        assert!((s.eta_field().eval([1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn r0_two_at_one() {
        // 1/2 − (1/4)e^{−1/2}
        let expected = 0.5 - 0.25 * 0.606_530_659_712_633_4;
        assert!((big_phi_sq(2.0, 1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn invalid_r0() {
        assert!(build_surface(1.0).is_err());
        assert!(build_surface(0.5).is_err());
        assert!(domain_extent(1.5).is_err());
    }

    #[test]
    fn closed_form_derivatives_match_symbolic() {
        for r0 in [1.25, 1.5, 2.0] {
            let s = build_surface(r0).unwrap();
            let deta = s.eta_field().partial(0);
            let dphi = s.phi_field().partial(0);
            for r in [0.3, 0.7, 1.1, 1.4] {
                let p = [r, 0.0, 0.0];
                let (e, de) = s.eta(r);
                let (f, df) = s.phi(r);
                assert!((e - s.eta_field().eval(p).unwrap()).abs() < 1e-12);
                assert!((de - deta.eval(p).unwrap()).abs() < 1e-11, "η′ {r0} {r}");
                assert!((f - s.phi_field().eval(p).unwrap()).abs() < 1e-12);
                assert!((df - dphi.eval(p).unwrap()).abs() < 1e-11, "φ′ {r0} {r}");
            }
        }
    }

    #[test]
    fn curvature_values() {
        let s = build_surface(1.5).unwrap();
        assert_eq!(gauss_curvature(&s, 0.0).unwrap(), 1.5);
        assert!(gauss_curvature(&s, 6f64.sqrt()).unwrap().abs() < 1e-12);
        for r0 in [1.25, 2.0] {
            let s = build_surface(r0).unwrap();
            for r in [0.4, 0.9, 1.3] {
                let k = gauss_curvature(&s, r).unwrap();
                assert!((k - (r0 - r * r / 4.0)).abs() < 1e-9, "{r0} {r} {k}");
            }
        }
        assert!((gauss_curvature(&SurfaceOfRevolution::round_sphere(), 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn christoffels_at_special_points() {
        let s = build_surface(1.5).unwrap();
        let c = christoffels(&s, 2f64.sqrt()).unwrap();
        assert!(c.g122.abs() < 1e-15 && c.g212.abs() < 1e-15);
        let c = christoffels(&s, 1.0).unwrap();
        assert!((c.g212 - 0.5).abs() < 1e-15);
        assert!(christoffels(&s, 0.0).is_err());
    }

    #[test]
    fn f_minimum() {
        let (x, v) = scan_f_minimum(0.0, 3.0, 301);
        assert!((x - 1.0).abs() < 1e-6);
        assert!((v + 0.5).abs() < 1e-12);
    }
}
