//! Fixed-step integration of the closed loop.
//!
//! The controlled qubit is integrated in three equivalent coordinate
//! systems: complex amplitudes (Schrödinger equation), polar coordinates
//! `(r₁, r₂, φ_a, φ_b)`, and the real coherence vector. The control is
//! recomputed from the current stage state at every Runge-Kutta stage, so
//! the discretization is true state feedback. Trajectories are recorded at
//! `t_k = k·dt` for `k = 0 … ⌊t_max/dt⌋`.
//!
//! The scalar prototype `ẏ = −k sign(y)|y|^α` and its closed-form solution
//! live here as well; they are the reference for the stability checks.

use alloc::vec::Vec;

use num_traits::Float;

use crate::coherence::{coherence_to_state, AdjointMatrix, CoherenceVector, HermitianBasis};
use crate::control::{control_raw, lyapunov_raw, ControlLaw, ControlParams, ControlSystem};
use crate::qstate::{norm, polar_decompose, HermitianOperator, PolarDecomposition, StateVector, RENORM_WINDOW};
use crate::util::{abs_pow, sign0, signed_pow};
use crate::{Error, Result, C64};

/// Radius below which polar phases are undefined.
pub const POLE_THRESHOLD: f64 = 1e-9;

/// Fixed-step scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

/// Step size, horizon and scheme for a fixed-step run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    pub method: Method,
    /// Rescale to unit norm after every full step. Drift is measured first.
    pub renormalize_each_step: bool,
}

impl IntegratorConfig {
    /// RK4 with per-step renormalization.
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_max,
            method: Method::Rk4,
            renormalize_each_step: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_renormalization(mut self, on: bool) -> Self {
        self.renormalize_each_step = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParam("dt must be positive"));
        }
        if !(self.t_max >= self.dt) || !self.t_max.is_finite() {
            return Err(Error::InvalidParam("t_max must be finite and at least dt"));
        }
        Ok(())
    }

    /// Number of steps, `⌊t_max/dt⌋`, robust to decimal round-off in the ratio.
    pub fn steps(&self) -> usize {
        Float::floor(self.t_max / self.dt * (1.0 + 1e-12)) as usize
    }
}

impl Default for IntegratorConfig {
    /// `dt = 1e-4`, `t_max = 15`, RK4, renormalizing.
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_max: 15.0,
            method: Method::Rk4,
            renormalize_each_step: true,
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Reached `t_max`.
    Completed,
    /// Polar run stopped because `r₁` fell below [`POLE_THRESHOLD`].
    TargetReached,
}

/// Time-indexed record of a closed-loop run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Control amplitude evaluated at each recorded state.
    pub controls: Vec<f64>,
    pub lyapunov: Vec<f64>,
    /// Polar coordinates; empty for dimensions other than 2.
    pub polar: Vec<PolarDecomposition>,
    /// `g(t) = |cos φ(t)|^{α+1}` along the run; empty for dimensions other than 2.
    pub g: Vec<f64>,
    /// Coherence vectors, recorded only by [`simulate_coherence`].
    pub coherence: Vec<CoherenceVector>,
    pub status: Status,
    /// Largest `|‖ψ‖ − 1|` seen after a step, before any renormalization.
    pub max_norm_drift: f64,
}

impl Trajectory {
    fn with_capacity(dt: f64, n: usize) -> Self {
        Self {
            dt,
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            controls: Vec::with_capacity(n),
            lyapunov: Vec::with_capacity(n),
            polar: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            coherence: Vec::new(),
            status: Status::Completed,
            max_norm_drift: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample nearest to `t`, clamped to the recorded range.
    pub fn index_at(&self, t: f64) -> usize {
        let i = Float::round(t / self.dt).max(0.0) as usize;
        i.min(self.len().saturating_sub(1))
    }

    /// `r₁(t_k)` series.
    pub fn r1(&self) -> Vec<f64> {
        self.polar.iter().map(|p| p.r1).collect()
    }

    /// Population `1 − V` of the target at the sample nearest to `t`.
    pub fn population_at(&self, t: f64) -> f64 {
        1.0 - self.lyapunov[self.index_at(t)]
    }

    fn push(&mut self, t: f64, state: StateVector, u: f64, v: f64, alpha: f64) -> Result<()> {
        if state.dim() == 2 {
            let p = polar_decompose(&state)?;
            self.g.push(abs_pow(Float::cos(p.phi), alpha + 1.0));
            self.polar.push(p);
        }
        self.times.push(t);
        self.states.push(state);
        self.controls.push(u);
        self.lyapunov.push(v);
        Ok(())
    }
}

/// Minimal vector-space interface for the fixed-step schemes.
pub(crate) trait OdeVec: Clone {
    /// `self + a·x`
    fn axpy(&self, a: f64, x: &Self) -> Self;
}

impl OdeVec for Vec<C64> {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self.iter().zip(x).map(|(y, d)| y + d * a).collect()
    }
}

impl OdeVec for Vec<f64> {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self.iter().zip(x).map(|(y, d)| y + d * a).collect()
    }
}

impl<const N: usize> OdeVec for [f64; N] {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        core::array::from_fn(|i| self[i] + a * x[i])
    }
}

impl OdeVec for f64 {
    fn axpy(&self, a: f64, x: &Self) -> Self {
        self + a * x
    }
}

pub(crate) fn step<S, F>(method: Method, y: &S, dt: f64, mut f: F) -> Result<S>
where
    S: OdeVec,
    F: FnMut(&S) -> Result<S>,
{
    match method {
        Method::Euler => Ok(y.axpy(dt, &f(y)?)),
        Method::Rk4 => {
            let k1 = f(y)?;
            let k2 = f(&y.axpy(0.5 * dt, &k1))?;
            let k3 = f(&y.axpy(0.5 * dt, &k2))?;
            let k4 = f(&y.axpy(dt, &k3))?;
            Ok(y.axpy(dt / 6.0, &k1)
                .axpy(dt / 3.0, &k2)
                .axpy(dt / 3.0, &k3)
                .axpy(dt / 6.0, &k4))
        }
    }
}

fn check_drift(drift: f64) -> Result<()> {
    if drift > RENORM_WINDOW {
        Err(Error::NotNormalized { norm: 1.0 + drift })
    } else {
        Ok(())
    }
}

/// `−i(H₀ + u₁H₁)ψ`.
pub fn schrodinger_rhs(psi: &StateVector, u1: f64, h0: &HermitianOperator, h1: &HermitianOperator) -> Result<Vec<C64>> {
    let a = h0.apply(psi.amplitudes())?;
    let b = h1.apply(psi.amplitudes())?;
    Ok(generator(&a, &b, u1))
}

fn generator(h0_psi: &[C64], h1_psi: &[C64], u1: f64) -> Vec<C64> {
    let minus_i = C64::new(0.0, -1.0);
    h0_psi.iter().zip(h1_psi).map(|(a, b)| minus_i * (a + b * u1)).collect()
}

/// Integrates the Schrödinger equation under state feedback `law`.
pub fn simulate(
    system: &ControlSystem,
    psi0: &StateVector,
    law: ControlLaw,
    params: &ControlParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = system.dim();
    for d in [psi0.dim(), params.target().dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let (h0, h1) = (system.h0(), system.h1());
    let target = params.target().amplitudes();
    let steps = cfg.steps();
    let mut traj = Trajectory::with_capacity(cfg.dt, steps + 1);
    let rhs = |psi: &Vec<C64>| -> Result<Vec<C64>> {
        let u = control_raw(law, params, psi, h1);
        Ok(generator(&h0.apply_unchecked(psi), &h1.apply_unchecked(psi), u))
    };

    let mut psi = psi0.amplitudes().to_vec();
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let u = control_raw(law, params, &psi, h1);
        let v = lyapunov_raw(&psi, target);
        traj.push(t, StateVector::from_raw(psi.clone()), u, v, params.alpha())?;
        if k == steps {
            break;
        }
        let mut next = step(cfg.method, &psi, cfg.dt, rhs)?;
        let t_next = (k + 1) as f64 * cfg.dt;
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
        let nm = norm(&next);
        let drift = (nm - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if cfg.renormalize_each_step {
            for z in &mut next {
                *z /= nm;
            }
        } else {
            check_drift(drift)?;
        }
        psi = next;
    }
    Ok(traj)
}

/// Right-hand side of the polar equations under the non-smooth law.
///
/// Phase rates involve division by the corresponding radius and are `None`
/// below [`POLE_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRates {
    pub r1_dot: f64,
    pub r2_dot: f64,
    pub phi_a_dot: Option<f64>,
    pub phi_b_dot: Option<f64>,
}

impl PolarRates {
    /// All four rates, or [`Error::PolarSingularity`] if either phase rate is undefined.
    pub fn full(&self, r1: f64, r2: f64) -> Result<[f64; 4]> {
        match (self.phi_a_dot, self.phi_b_dot) {
            (Some(a), Some(b)) => Ok([self.r1_dot, self.r2_dot, a, b]),
            _ => Err(Error::PolarSingularity { r1, r2 }),
        }
    }

    /// `φ̇ = φ̇_b − φ̇_a` when both are defined.
    pub fn relative_phase_rate(&self) -> Option<f64> {
        Some(self.phi_b_dot? - self.phi_a_dot?)
    }
}

/// Polar equations of the benchmark (`H₀ = σ_z`, `H₁ = σ_y`, target `|1⟩`):
///
/// ```text
/// ṙ₁ = −u r₂ cos φ          r₁ φ̇_a = −r₁ − u r₂ sin φ
/// ṙ₂ =  u r₁ cos φ          r₂ φ̇_b =  r₂ − u r₁ sin φ
/// ```
///
/// with `u = K sign(r₁ cos φ)|r₁ cos φ|^α`, so `ṙ₁ = −K r₁^α r₂ |cos φ|^{α+1}`.
pub fn polar_rhs(p: &PolarDecomposition, params: &ControlParams) -> PolarRates {
    polar_rates(p.r1, p.r2, p.phi_b - p.phi_a, params)
}

fn polar_rates(r1: f64, r2: f64, phi: f64, params: &ControlParams) -> PolarRates {
    let (s, c) = Float::sin_cos(phi);
    let u = params.k() * signed_pow(r1 * c, params.alpha());
    PolarRates {
        r1_dot: -u * r2 * c,
        r2_dot: u * r1 * c,
        phi_a_dot: (r1.abs() >= POLE_THRESHOLD).then(|| -1.0 - u * r2 * s / r1),
        phi_b_dot: (r2.abs() >= POLE_THRESHOLD).then(|| 1.0 - u * r1 * s / r2),
    }
}

/// Integrates the polar equations under the non-smooth law.
///
/// Stops with [`Status::TargetReached`] once `r₁` drops below
/// [`POLE_THRESHOLD`] (including at `t = 0`, which yields a one-sample
/// trajectory). Starting at, or passing through, `r₂ <` [`POLE_THRESHOLD`]
/// is a [`Error::PolarSingularity`]; the state-vector integrator is the
/// fallback there.
pub fn simulate_polar(p0: &PolarDecomposition, params: &ControlParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = cfg.steps();
    let alpha = params.alpha();
    let mut traj = Trajectory::with_capacity(cfg.dt, steps + 1);
    let mut y = [p0.r1, p0.r2, p0.phi_a, p0.phi_b];
    let rhs = |y: &[f64; 4]| polar_rates(y[0], y[1], y[3] - y[2], params).full(y[0], y[1]);

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let pd = PolarDecomposition::from_parts(y[0], y[1], y[2], y[3]);
        let [x1, x2] = pd.amplitudes();
        let u = params.k() * signed_pow(y[0] * Float::cos(y[3] - y[2]), alpha);
        traj.push(t, StateVector::from_raw(alloc::vec![x1, x2]), u, y[0] * y[0], alpha)?;
        if y[0] < POLE_THRESHOLD {
            traj.status = Status::TargetReached;
            break;
        }
        if y[1] < POLE_THRESHOLD {
            return Err(Error::PolarSingularity { r1: y[0], r2: y[1] });
        }
        if k == steps {
            break;
        }
        let mut next = match step(cfg.method, &y, cfg.dt, rhs) {
            Ok(next) => next,
            // a stage landed on the target pole
            Err(Error::PolarSingularity { r1, .. }) if r1.abs() < POLE_THRESHOLD => {
                traj.status = Status::TargetReached;
                break;
            }
            Err(e) => return Err(e),
        };
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: t + cfg.dt });
        }
        let nm = Float::hypot(next[0], next[1]);
        let drift = (nm - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if cfg.renormalize_each_step {
            next[0] /= nm;
            next[1] /= nm;
        } else {
            check_drift(drift)?;
        }
        y = next;
    }
    Ok(traj)
}

/// Drift and control generators of the coherence-vector dynamics.
#[derive(Debug, Clone)]
pub struct CoherenceGenerators {
    pub a0: AdjointMatrix,
    pub a1: AdjointMatrix,
}

impl CoherenceGenerators {
    pub fn from_system(system: &ControlSystem, basis: &HermitianBasis) -> Result<Self> {
        Ok(Self {
            a0: crate::coherence::adjoint_matrix(system.h0(), basis)?,
            a1: crate::coherence::adjoint_matrix(system.h1(), basis)?,
        })
    }
}

/// Integrates `ṡ = (A₀ + u₁A₁)s` for a qubit.
///
/// The control is evaluated on the Bloch-sphere state reconstructed from the
/// current stage vector, using `system`'s control Hamiltonian.
pub fn simulate_coherence(
    system: &ControlSystem,
    generators: &CoherenceGenerators,
    s0: &CoherenceVector,
    law: ControlLaw,
    params: &ControlParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let (a0, a1) = (&generators.a0, &generators.a1);
    if s0.len() != 3 || a0.dim() != 3 || a1.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: s0.len(),
        });
    }
    let n0 = s0.norm();
    if (n0 - 1.0).abs() > crate::qstate::NORM_TOL {
        return Err(Error::NotNormalized { norm: n0 });
    }
    let h1 = system.h1();
    let target = params.target().amplitudes();
    let control = |s: &[f64; 3]| -> Result<f64> {
        let psi = coherence_to_state(&CoherenceVector::new(s.to_vec()))?;
        Ok(control_raw(law, params, psi.amplitudes(), h1))
    };
    let rhs = |s: &[f64; 3]| -> Result<[f64; 3]> {
        let u = control(s)?;
        let mut out = [0.0; 3];
        a0.mul_add(s, 1.0, &mut out);
        a1.mul_add(s, u, &mut out);
        Ok(out)
    };

    let steps = cfg.steps();
    let mut traj = Trajectory::with_capacity(cfg.dt, steps + 1);
    traj.coherence.reserve(steps + 1);
    let mut s = [s0.s[0], s0.s[1], s0.s[2]];
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let psi = coherence_to_state(&CoherenceVector::new(s.to_vec()))?;
        let u = control_raw(law, params, psi.amplitudes(), h1);
        let v = lyapunov_raw(psi.amplitudes(), target);
        traj.push(t, psi, u, v, params.alpha())?;
        traj.coherence.push(CoherenceVector::new(s.to_vec()));
        if k == steps {
            break;
        }
        let mut next = step(cfg.method, &s, cfg.dt, rhs)?;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: t + cfg.dt });
        }
        let nm = Float::sqrt(next.iter().map(|x| x * x).sum::<f64>());
        let drift = (nm - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if cfg.renormalize_each_step {
            next.iter_mut().for_each(|x| *x /= nm);
        } else {
            check_drift(drift)?;
        }
        s = next;
    }
    Ok(traj)
}

/// Scalar finite-time system `ẏ = −k sign(y)|y|^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPrototype {
    pub k: f64,
    pub alpha: f64,
    pub y0: f64,
}

impl ScalarPrototype {
    pub fn new(k: f64, alpha: f64, y0: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParam("k must be positive"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParam("alpha must lie in (0, 1)"));
        }
        if !y0.is_finite() {
            return Err(Error::InvalidParam("y0 must be finite"));
        }
        Ok(Self { k, alpha, y0 })
    }

    /// `T(y₀) = |y₀|^{1−α} / (k(1−α))`.
    pub fn settling_time(&self) -> f64 {
        abs_pow(self.y0, 1.0 - self.alpha) / (self.k * (1.0 - self.alpha))
    }

    #[inline]
    pub fn rhs(&self, y: f64) -> f64 {
        -self.k * signed_pow(y, self.alpha)
    }
}

/// Closed-form solution `μ(t, y₀)`; identically zero from the settling time on.
pub fn scalar_closed_form(proto: &ScalarPrototype, t: f64) -> f64 {
    let beta = 1.0 - proto.alpha;
    let base = abs_pow(proto.y0, beta) - proto.k * beta * t;
    if proto.y0 == 0.0 || base <= 0.0 {
        0.0
    } else {
        sign0(proto.y0) * Float::powf(base, 1.0 / beta)
    }
}

/// Samples of a scalar run.
#[derive(Debug, Clone)]
pub struct ScalarTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Fixed-step integration of the scalar prototype.
pub fn scalar_simulate(proto: &ScalarPrototype, cfg: &IntegratorConfig) -> Result<ScalarTrajectory> {
    cfg.validate()?;
    let steps = cfg.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut y = proto.y0;
    for k in 0..=steps {
        times.push(k as f64 * cfg.dt);
        values.push(y);
        if k == steps {
            break;
        }
        y = step(cfg.method, &y, cfg.dt, |y: &f64| Ok(proto.rhs(*y)))?;
        if !y.is_finite() {
            return Err(Error::NonFinite {
                t: (k + 1) as f64 * cfg.dt,
            });
        }
    }
    Ok(ScalarTrajectory {
        dt: cfg.dt,
        times,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{pauli_basis, to_coherence};
    use crate::qstate::normalize;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bench() -> (ControlSystem, ControlParams) {
        (
            ControlSystem::two_level(),
            ControlParams::two_level(0.5, 2.0 / 3.0).unwrap(),
        )
    }

    #[test]
    fn config_validation_and_steps() {
        assert!(IntegratorConfig::new(0.0, 1.0).is_err());
        assert!(IntegratorConfig::new(0.1, 0.01).is_err());
        assert_eq!(IntegratorConfig::new(1e-4, 15.0).unwrap().steps(), 150_000);
        assert_eq!(IntegratorConfig::new(0.1, 0.35).unwrap().steps(), 3);
        assert_eq!(IntegratorConfig::new(0.1, 0.3).unwrap().steps(), 3);
    }

    #[test]
    fn schrodinger_rhs_examples() {
        let (sys, _) = bench();
        let d = schrodinger_rhs(&StateVector::ket0(), 0.0, sys.h0(), sys.h1()).unwrap();
        assert_eq!(d, [C64::new(0.0, -1.0), c(0.0)]);
        let d = schrodinger_rhs(&StateVector::ket1(), 0.0, sys.h0(), sys.h1()).unwrap();
        assert_eq!(d, [c(0.0), C64::new(0.0, 1.0)]);
        let psi = normalize(&[C64::new(0.3, -0.2), C64::new(0.1, 0.8)]).unwrap();
        let d = schrodinger_rhs(&psi, 0.7, sys.h0(), sys.h1()).unwrap();
        let re: f64 = psi.amplitudes().iter().zip(&d).map(|(p, q)| (p.conj() * q).re).sum();
        assert_abs_diff_eq!(re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn starting_at_target_stays() {
        let (sys, p) = bench();
        let cfg = IntegratorConfig::new(1e-3, 2.0).unwrap();
        for law in ControlLaw::ALL {
            let tr = simulate(&sys, &StateVector::ket1(), law, &p, &cfg).unwrap();
            assert!(tr.lyapunov.iter().all(|&v| v == 0.0));
            assert!(tr.controls.iter().all(|&u| u == 0.0));
        }
    }

    #[test]
    fn trajectory_shape() {
        let (sys, p) = bench();
        let cfg = IntegratorConfig::new(1e-2, 1.0).unwrap();
        let tr = simulate(&sys, &StateVector::ket0(), ControlLaw::NonSmooth, &p, &cfg).unwrap();
        assert_eq!(tr.len(), 101);
        assert_eq!(tr.polar.len(), 101);
        assert_eq!(tr.g.len(), 101);
        assert!(tr.times.windows(2).all(|w| (w[1] - w[0] - 0.01).abs() < 1e-12));
        assert_eq!(tr.controls[0], 0.5);
    }

    #[test]
    fn euler_without_renormalization_drifts_out() {
        let (sys, p) = bench();
        let cfg = IntegratorConfig::new(1e-2, 15.0)
            .unwrap()
            .with_method(Method::Euler)
            .with_renormalization(false);
        assert!(matches!(
            simulate(&sys, &StateVector::ket0(), ControlLaw::Standard, &p, &cfg),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn polar_rhs_examples() {
        let (_, p) = bench();
        let r = polar_rhs(&PolarDecomposition::from_parts(1.0, 0.0, 0.0, 0.0), &p);
        assert_eq!(r.r2_dot, 0.5);
        assert_eq!(r.r1_dot, 0.0);
        assert!(r.phi_b_dot.is_none());
        assert!(r.full(1.0, 0.0).is_err());

        let pd = PolarDecomposition::from_parts(0.6, 0.8, 0.0, FRAC_PI_2);
        let r = polar_rhs(&pd, &p);
        assert_abs_diff_eq!(r.r1_dot, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.r2_dot, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.relative_phase_rate().unwrap(), 2.0, epsilon = 1e-10);

        let r = polar_rhs(&PolarDecomposition::from_parts(0.0, 1.0, 0.0, 0.3), &p);
        assert_eq!((r.r1_dot, r.r2_dot), (0.0, 0.0));
    }

    #[test]
    fn polar_rhs_matches_state_vector_rates() {
        // differentiate |x₁| of the Schrödinger flow by central differences
        let (sys, p) = bench();
        let psi = normalize(&[C64::from_polar(0.7, 0.4), C64::from_polar(0.5, 1.9)]).unwrap();
        let u = crate::control::control_value(ControlLaw::NonSmooth, &p, &psi, sys.h1()).unwrap();
        let d = schrodinger_rhs(&psi, u, sys.h0(), sys.h1()).unwrap();
        let h = 1e-7;
        let plus: Vec<C64> = psi.amplitudes().iter().zip(&d).map(|(a, b)| a + b * h).collect();
        let minus: Vec<C64> = psi.amplitudes().iter().zip(&d).map(|(a, b)| a - b * h).collect();
        let pd = polar_decompose(&psi).unwrap();
        let r = polar_rhs(&pd, &p);
        assert_abs_diff_eq!((plus[0].norm() - minus[0].norm()) / (2.0 * h), r.r1_dot, epsilon = 1e-7);
        assert_abs_diff_eq!((plus[1].norm() - minus[1].norm()) / (2.0 * h), r.r2_dot, epsilon = 1e-7);
        assert_abs_diff_eq!(
            (plus[0].arg() - minus[0].arg()) / (2.0 * h),
            r.phi_a_dot.unwrap(),
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            (plus[1].arg() - minus[1].arg()) / (2.0 * h),
            r.phi_b_dot.unwrap(),
            epsilon = 1e-7
        );
    }

    #[test]
    fn polar_run_from_target_is_constant() {
        let (_, p) = bench();
        let cfg = IntegratorConfig::new(1e-3, 1.0).unwrap();
        let tr = simulate_polar(&PolarDecomposition::from_parts(0.0, 1.0, 0.0, 0.0), &p, &cfg).unwrap();
        assert_eq!(tr.status, Status::TargetReached);
        assert!(tr.r1().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn polar_run_from_pole_is_singular() {
        let (_, p) = bench();
        let cfg = IntegratorConfig::new(1e-3, 1.0).unwrap();
        assert!(matches!(
            simulate_polar(&PolarDecomposition::from_parts(1.0, 0.0, 0.0, 0.0), &p, &cfg),
            Err(Error::PolarSingularity { .. })
        ));
    }

    #[test]
    fn polar_r1_decreases_while_cos_nonzero() {
        let (_, p) = bench();
        let cfg = IntegratorConfig::new(1e-3, 3.0).unwrap();
        let p0 = PolarDecomposition::from_parts(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0);
        let tr = simulate_polar(&p0, &p, &cfg).unwrap();
        for (w, pd) in tr.r1().windows(2).zip(&tr.polar) {
            if pd.phi.cos().abs() > 1e-2 {
                assert!(w[1] < w[0]);
            } else {
                assert!(w[1] <= w[0] + 1e-15);
            }
        }
    }

    #[test]
    fn coherence_run_from_target_is_constant() {
        let (sys, p) = bench();
        let gens = CoherenceGenerators::from_system(&sys, &pauli_basis()).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 1.0).unwrap();
        let s0 = CoherenceVector::new(alloc::vec![0.0, 0.0, -1.0]);
        let tr = simulate_coherence(&sys, &gens, &s0, ControlLaw::NonSmooth, &p, &cfg).unwrap();
        assert!(tr.coherence.iter().all(|s| s.s == [0.0, 0.0, -1.0]));
        assert!(simulate_coherence(
            &sys,
            &gens,
            &CoherenceVector::new(alloc::vec![0.0, 0.0, 0.5]),
            ControlLaw::NonSmooth,
            &p,
            &cfg
        )
        .is_err());
    }

    #[test]
    fn coherence_and_state_runs_agree_short_horizon() {
        let (sys, p) = bench();
        let b = pauli_basis();
        let gens = CoherenceGenerators::from_system(&sys, &b).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 2.0).unwrap();
        let psi0 = normalize(&[C64::from_polar(0.8, 0.2), C64::from_polar(0.6, -0.5)]).unwrap();
        let a = simulate(&sys, &psi0, ControlLaw::Standard, &p, &cfg).unwrap();
        let s0 = to_coherence(&psi0, &b).unwrap();
        let bt = simulate_coherence(&sys, &gens, &s0, ControlLaw::Standard, &p, &cfg).unwrap();
        for (x, y) in a.lyapunov.iter().zip(&bt.lyapunov) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn scalar_closed_form_examples() {
        let z = ScalarPrototype::new(1.0, 0.5, 0.0).unwrap();
        assert_eq!(scalar_closed_form(&z, 3.0), 0.0);
        let p = ScalarPrototype::new(1.0, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(scalar_closed_form(&p, 1.0), 0.25, epsilon = 1e-15);
        assert_eq!(scalar_closed_form(&p, 2.5), 0.0);
        assert_abs_diff_eq!(p.settling_time(), 2.0, epsilon = 1e-15);
        assert!(ScalarPrototype::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn scalar_simulation_symmetry_and_zero() {
        let cfg = IntegratorConfig::new(1e-3, 3.0).unwrap();
        let z = scalar_simulate(&ScalarPrototype::new(1.0, 0.5, 0.0).unwrap(), &cfg).unwrap();
        assert!(z.values.iter().all(|&y| y == 0.0));
        let up = scalar_simulate(&ScalarPrototype::new(1.0, 0.5, 1.0).unwrap(), &cfg).unwrap();
        let dn = scalar_simulate(&ScalarPrototype::new(1.0, 0.5, -1.0).unwrap(), &cfg).unwrap();
        assert!(up.values.iter().zip(&dn.values).all(|(a, b)| *a == -*b));
    }
}
