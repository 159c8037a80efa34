//! Geodesic and β-geodesic integration with fixed-step classical RK4.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::SurfaceOfRevolution;
use crate::error::{Error, Result};
use crate::field::{Chart, ScalarField};

/// Position and affine-parameter velocity on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub r: f64,
    pub theta: f64,
    pub rdot: f64,
    pub thetadot: f64,
}

impl GeodesicState {
    pub fn new(r: f64, theta: f64, rdot: f64, thetadot: f64) -> Self {
        GeodesicState {
            r,
            theta,
            rdot,
            thetadot,
        }
    }

    /// Unit-speed state at `(r, θ)` whose velocity makes angle `ψ` with
    /// `∂_r/η`, measured towards `∂_θ/φ`.
    pub fn unit_speed(s: &SurfaceOfRevolution, r: f64, theta: f64, psi: f64) -> Self {
        let (eta, _) = s.eta(r);
        let (phi, _) = s.phi(r);
        GeodesicState::new(r, theta, psi.cos() / eta, psi.sin() / phi)
    }

    fn is_finite(&self) -> bool {
        self.r.is_finite() && self.theta.is_finite() && self.rdot.is_finite() && self.thetadot.is_finite()
    }
}

/// Sampled solution with its conserved-quantity traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GeodesicState>,
    /// Clairaut integral `φ² θ̇`.
    pub f: Vec<f64>,
    /// Energy `η² ṙ² + φ² θ̇²`.
    pub e: Vec<f64>,
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    if v.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest deviation of `F` from its initial value.
    pub fn f_drift(&self) -> f64 {
        drift(&self.f)
    }

    /// Largest deviation of `E` from its initial value.
    pub fn e_drift(&self) -> f64 {
        drift(&self.e)
    }

    pub fn f_spread(&self) -> f64 {
        spread(&self.f)
    }

    pub fn e_spread(&self) -> f64 {
        spread(&self.e)
    }

    /// Every `k`-th sample, always keeping the last one.
    pub fn thinned(&self, k: usize) -> Trajectory {
        let k = k.max(1);
        let n = self.len();
        let keep: Vec<usize> = (0..n).filter(|i| i % k == 0 || *i + 1 == n).collect();
        Trajectory {
            times: keep.iter().map(|&i| self.times[i]).collect(),
            states: keep.iter().map(|&i| self.states[i]).collect(),
            f: keep.iter().map(|&i| self.f[i]).collect(),
            e: keep.iter().map(|&i| self.e[i]).collect(),
        }
    }

    fn push(&mut self, s: &SurfaceOfRevolution, t: f64, st: GeodesicState) {
        let (f, e) = conserved_quantities(s, &st);
        self.times.push(t);
        self.states.push(st);
        self.f.push(f);
        self.e.push(e);
    }
}

fn drift(v: &[f64]) -> f64 {
    match v.first() {
        Some(v0) => v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max),
        None => 0.0,
    }
}

/// Clairaut integral `F = φ(r)² θ̇` and energy `E = η(r)² ṙ² + φ(r)² θ̇²`.
/// `(F, E)` are the coordinates of the geodesic-space map.
pub fn conserved_quantities(s: &SurfaceOfRevolution, st: &GeodesicState) -> (f64, f64) {
    let (eta, _) = s.eta(st.r);
    let (phi, _) = s.phi(st.r);
    let f = phi * phi * st.thetadot;
    let e = eta * eta * st.rdot * st.rdot + phi * phi * st.thetadot * st.thetadot;
    (f, e)
}

fn steps(t_end: f64, step: f64) -> Result<(usize, f64)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Precondition(format!("step must be positive, got {step}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("t_end must be nonnegative, got {t_end}")));
    }
    let n = (t_end / step - 1e-9).ceil().max(0.0) as usize;
    let h = if n == 0 { 0.0 } else { t_end / n as f64 };
    Ok((n, h))
}

fn rk4<const N: usize>(y: [f64; N], h: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], c: f64| std::array::from_fn(|i| a[i] + c * b[i]);
    let k1 = f(&y);
    let k2 = f(&add(&y, &k1, h / 2.0));
    let k3 = f(&add(&y, &k2, h / 2.0));
    let k4 = f(&add(&y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn check_state(s: &SurfaceOfRevolution, st: &GeodesicState, t: f64) -> Result<()> {
    if !st.is_finite() {
        return Err(Error::Precondition(format!("non-finite state {st:?} at t = {t}")));
    }
    if !s.contains(st.r) {
        let (lo, hi) = s.valid_interval();
        return Err(Error::Precondition(format!(
            "trajectory left the valid interval ({lo}, {hi}) at t = {t}: r = {}",
            st.r
        )));
    }
    Ok(())
}

/// Integrate `r″ + γ¹₁₁ r′² + γ¹₂₂ θ′² = 0`, `θ″ + 2γ²₁₂ r′θ′ = 0`.
/// Every step is recorded.
pub fn integrate_geodesic(
    s: &SurfaceOfRevolution,
    init: GeodesicState,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    let (n, h) = steps(t_end, step)?;
    check_state(s, &init, 0.0)?;
    let rhs = |y: &[f64; 4]| {
        let (eta, deta) = s.eta(y[0]);
        let (phi, dphi) = s.phi(y[0]);
        let g111 = deta / eta;
        let g122 = -phi * dphi / (eta * eta);
        let g212 = dphi / phi;
        [
            y[2],
            y[3],
            -g111 * y[2] * y[2] - g122 * y[3] * y[3],
            -2.0 * g212 * y[2] * y[3],
        ]
    };
    let mut traj = Trajectory::default();
    traj.push(s, 0.0, init);
    let mut y = [init.r, init.theta, init.rdot, init.thetadot];
    for k in 1..=n {
        y = rk4(y, h, rhs);
        let t = k as f64 * h;
        let st = GeodesicState::new(y[0], y[1], y[2], y[3]);
        check_state(s, &st, t)?;
        traj.push(s, t, st);
    }
    Ok(traj)
}

/// Prescribed geodesic curvature along a unit-speed curve.
pub trait Forcing: Sync {
    /// `k_g` at position `(r, θ)` for velocity `(ṙ, θ̇)`.
    fn curvature(&self, r: f64, theta: f64, rdot: f64, thetadot: f64) -> Result<f64>;
}

/// A 1-form `β = β_r dr + β_θ dθ` on the surface; `k_g = β(γ̇)`.
#[derive(Debug, Clone)]
pub struct BetaForm {
    pub beta_r: ScalarField,
    pub beta_theta: ScalarField,
}

impl BetaForm {
    pub fn zero() -> Self {
        BetaForm {
            beta_r: ScalarField::zero(Chart::FrameBundle),
            beta_theta: ScalarField::zero(Chart::FrameBundle),
        }
    }

    /// Parse the two components as expressions in `r` and `theta`.
    pub fn parse(beta_r: &str, beta_theta: &str) -> Result<Self> {
        Ok(BetaForm {
            beta_r: ScalarField::parse(beta_r, Chart::FrameBundle)?,
            beta_theta: ScalarField::parse(beta_theta, Chart::FrameBundle)?,
        })
    }
}

impl Forcing for BetaForm {
    fn curvature(&self, r: f64, theta: f64, rdot: f64, thetadot: f64) -> Result<f64> {
        let p = [r, theta, 0.0];
        Ok(self.beta_r.eval(p)? * rdot + self.beta_theta.eval(p)? * thetadot)
    }
}

/// Constant geodesic curvature `k`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurvature(pub f64);

impl Forcing for ConstantCurvature {
    fn curvature(&self, _: f64, _: f64, _: f64, _: f64) -> Result<f64> {
        Ok(self.0)
    }
}

/// Integrate a unit-speed curve with geodesic curvature `k_g` from `forcing`.
///
/// The state is `(r, θ, χ)` with `χ` the angle of the unit tangent against
/// `∂_r/η`: `ṙ = cos χ/η`, `θ̇ = sin χ/φ`, `χ̇ = −(φ′/η) θ̇ + k_g`. Positive
/// `k_g` turns the tangent towards `∂_θ`. With `k_g ≡ 0` this is the geodesic
/// flow, and speed is exactly 1 by construction.
pub fn integrate_beta_geodesic(
    s: &SurfaceOfRevolution,
    forcing: &dyn Forcing,
    init: GeodesicState,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    let (n, h) = steps(t_end, step)?;
    check_state(s, &init, 0.0)?;
    let (_, e0) = conserved_quantities(s, &init);
    if (e0 - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("initial speed must be 1, got E = {e0}")));
    }
    let (eta0, _) = s.eta(init.r);
    let (phi0, _) = s.phi(init.r);
    let chi0 = (phi0 * init.thetadot).atan2(eta0 * init.rdot);

    let velocity = |r: f64, chi: f64| {
        let (eta, _) = s.eta(r);
        let (phi, dphi) = s.phi(r);
        (chi.cos() / eta, chi.sin() / phi, dphi / eta)
    };
    let forcing_error = RefCell::new(None);
    let rhs = |y: &[f64; 3]| {
        let (rdot, thetadot, turn) = velocity(y[0], y[2]);
        let k = forcing.curvature(y[0], y[1], rdot, thetadot).unwrap_or_else(|e| {
            forcing_error.borrow_mut().get_or_insert(e);
            f64::NAN
        });
        [rdot, thetadot, -turn * thetadot + k]
    };
    let state_of = |y: &[f64; 3]| {
        let (rdot, thetadot, _) = velocity(y[0], y[2]);
        GeodesicState::new(y[0], y[1], rdot, thetadot)
    };
    let mut traj = Trajectory::default();
    let mut y = [init.r, init.theta, chi0];
    traj.push(s, 0.0, state_of(&y));
    for k in 1..=n {
        y = rk4(y, h, rhs);
        if let Some(e) = forcing_error.borrow_mut().take() {
            return Err(e);
        }
        let t = k as f64 * h;
        let st = state_of(&y);
        check_state(s, &st, t)?;
        traj.push(s, t, st);
    }
    Ok(traj)
}
