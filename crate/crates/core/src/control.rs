//! Lyapunov function `V = 1 − |⟨ψ_f|ψ⟩|²`, its derivative, and the three
//! feedback laws compared in the experiments.
//!
//! All laws share the feedback signal
//! `φ_α(ψ) = Im[e^{i∠⟨ψ|ψ_f⟩} ⟨ψ_f|H₁|ψ⟩]` with `∠0 = 0`:
//!
//! * non-smooth: `u = K sign(φ_α) |φ_α|^α`
//! * standard:   `u = K φ_α`
//! * bang-bang:  `u = K sign(φ_α)`
//!
//! `sign(0) = 0` everywhere.

use core::fmt;
use core::str::FromStr;

use alloc::vec::Vec;

use crate::qstate::{arg0, braket, HermitianOperator, StateVector};
use crate::util::{sign0, signed_pow};
use crate::{Error, Result, C64};

pub use crate::util::{abs_pow, sign0 as sign};

/// Drift and control Hamiltonians of a single-input closed system.
#[derive(Debug, Clone)]
pub struct ControlSystem {
    h0: HermitianOperator,
    h1: HermitianOperator,
}

impl ControlSystem {
    pub fn new(h0: HermitianOperator, h1: HermitianOperator) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::DimensionMismatch {
                expected: h0.dim(),
                found: h1.dim(),
            });
        }
        Ok(Self { h0, h1 })
    }

    /// Spin-1/2 benchmark: `H₀ = σ_z`, `H₁ = σ_y`.
    pub fn two_level() -> Self {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        Self {
            h0: HermitianOperator::from_rows([[one, z], [z, -one]]).expect("σ_z is Hermitian"),
            h1: HermitianOperator::from_rows([[z, -i], [i, z]]).expect("σ_y is Hermitian"),
        }
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn h1(&self) -> &HermitianOperator {
        &self.h1
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }
}

/// Which feedback law drives the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlLaw {
    NonSmooth,
    Standard,
    BangBang,
}

impl ControlLaw {
    pub const ALL: [ControlLaw; 3] = [ControlLaw::NonSmooth, ControlLaw::Standard, ControlLaw::BangBang];

    /// Maps the feedback signal to a control amplitude.
    #[inline]
    pub fn apply(self, phi: f64, k: f64, alpha: f64) -> f64 {
        match self {
            ControlLaw::NonSmooth => k * signed_pow(phi, alpha),
            ControlLaw::Standard => k * phi,
            ControlLaw::BangBang => k * sign0(phi),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlLaw::NonSmooth => "nonsmooth",
            ControlLaw::Standard => "standard",
            ControlLaw::BangBang => "bangbang",
        }
    }
}

impl fmt::Display for ControlLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonsmooth" => Ok(ControlLaw::NonSmooth),
            "standard" => Ok(ControlLaw::Standard),
            "bangbang" => Ok(ControlLaw::BangBang),
            _ => Err(Error::InvalidParam("unknown control law")),
        }
    }
}

/// Gain, fractional exponent and target eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlParams {
    k: f64,
    alpha: f64,
    target: StateVector,
}

/// Tolerance for the target-is-an-eigenstate-of-H₀ check.
pub const EIGEN_TOL: f64 = 1e-9;

impl ControlParams {
    /// Validates `K > 0`, `0 < α < 1` and that `target` is an eigenstate of `h0`.
    pub fn new(k: f64, alpha: f64, target: StateVector, h0: &HermitianOperator) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParam("gain K must be positive"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParam("exponent alpha must lie in (0, 1)"));
        }
        let ht = h0.apply(target.amplitudes())?;
        let lambda = braket(target.amplitudes(), &ht);
        let resid: f64 = ht
            .iter()
            .zip(target.amplitudes())
            .map(|(h, t)| (h - lambda * t).norm_sqr())
            .sum::<f64>();
        if num_traits::Float::sqrt(resid) > EIGEN_TOL {
            return Err(Error::InvalidParam("target must be an eigenstate of H0"));
        }
        Ok(Self { k, alpha, target })
    }

    /// Parameters for the spin-1/2 benchmark with target `|1⟩`.
    pub fn two_level(k: f64, alpha: f64) -> Result<Self> {
        Self::new(k, alpha, StateVector::ket1(), ControlSystem::two_level().h0())
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }
}

fn dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `V = 1 − |⟨ψ_f|ψ⟩|²`.
///
/// Evaluated as `‖ψ − ⟨ψ_f|ψ⟩ψ_f‖²`, which is identical for unit vectors and
/// keeps full relative precision near the target (it is exactly `r₁²` for
/// the benchmark).
pub fn lyapunov_v(psi: &StateVector, target: &StateVector) -> Result<f64> {
    dims(target.dim(), psi.dim())?;
    Ok(lyapunov_raw(psi.amplitudes(), target.amplitudes()))
}

pub(crate) fn lyapunov_raw(psi: &[C64], target: &[C64]) -> f64 {
    let ov = braket(target, psi);
    psi.iter().zip(target).map(|(p, t)| (p - ov * t).norm_sqr()).sum()
}

/// Feedback signal `φ_α(ψ)`.
pub fn phi_alpha(psi: &StateVector, target: &StateVector, h1: &HermitianOperator) -> Result<f64> {
    dims(target.dim(), psi.dim())?;
    dims(h1.dim(), psi.dim())?;
    Ok(phi_alpha_raw(psi.amplitudes(), target.amplitudes(), h1))
}

pub(crate) fn phi_alpha_raw(psi: &[C64], target: &[C64], h1: &HermitianOperator) -> f64 {
    // ∠⟨ψ|ψ_f⟩ = −arg⟨ψ_f|ψ⟩
    let ov = braket(target, psi);
    let rot = C64::from_polar(1.0, arg0(ov.conj()));
    let elem = braket(target, &h1.apply_unchecked(psi));
    (rot * elem).im
}

/// Control amplitude of `law` at state `psi`.
pub fn control_value(
    law: ControlLaw,
    params: &ControlParams,
    psi: &StateVector,
    h1: &HermitianOperator,
) -> Result<f64> {
    let phi = phi_alpha(psi, &params.target, h1)?;
    Ok(law.apply(phi, params.k, params.alpha))
}

pub(crate) fn control_raw(law: ControlLaw, params: &ControlParams, psi: &[C64], h1: &HermitianOperator) -> f64 {
    law.apply(
        phi_alpha_raw(psi, params.target.amplitudes(), h1),
        params.k,
        params.alpha,
    )
}

/// `V̇ = −2 u₁ |⟨ψ|ψ_f⟩| φ_α(ψ)` for a given control amplitude.
///
/// For the benchmark `|⟨ψ|ψ_f⟩| = r₂` and `φ_α = r₁ cos φ`, so under the
/// non-smooth law this is `−2K r₂ |r₁ cos φ|^{α+1}`.
pub fn vdot_analytic(params: &ControlParams, psi: &StateVector, h1: &HermitianOperator, u1: f64) -> Result<f64> {
    let phi = phi_alpha(psi, &params.target, h1)?;
    let ov = params.target.inner(psi)?.norm();
    Ok(-2.0 * u1 * ov * phi)
}

/// Control amplitudes along a sequence of states.
pub fn control_series(
    law: ControlLaw,
    params: &ControlParams,
    states: &[StateVector],
    h1: &HermitianOperator,
) -> Result<Vec<f64>> {
    states.iter().map(|s| control_value(law, params, s, h1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{normalize, polar_decompose};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_1_SQRT_2;
    use proptest::prelude::*;

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
    fn params_validation() {
        assert!(ControlParams::two_level(0.0, 0.5).is_err());
        assert!(ControlParams::two_level(1.0, 1.0).is_err());
        assert!(ControlParams::two_level(1.0, 0.0).is_err());
        let plus = StateVector::qubit(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        assert_eq!(
            ControlParams::new(1.0, 0.5, plus, ControlSystem::two_level().h0()),
            Err(Error::InvalidParam("target must be an eigenstate of H0"))
        );
        assert!(ControlParams::new(1.0, 0.5, StateVector::ket0(), ControlSystem::two_level().h0()).is_ok());
    }

    #[test]
    fn law_names_parse() {
        for law in ControlLaw::ALL {
            assert_eq!(law.name().parse::<ControlLaw>().unwrap(), law);
        }
        assert_eq!("bang-bang".parse::<ControlLaw>().unwrap(), ControlLaw::BangBang);
        assert!("pid".parse::<ControlLaw>().is_err());
    }

    #[test]
    fn lyapunov_examples() {
        let k1 = StateVector::ket1();
        assert_eq!(lyapunov_v(&k1, &k1).unwrap(), 0.0);
        assert_eq!(lyapunov_v(&StateVector::ket0(), &k1).unwrap(), 1.0);
        let half = StateVector::qubit(c(0.5), c(3f64.sqrt() / 2.0)).unwrap();
        assert_abs_diff_eq!(lyapunov_v(&half, &k1).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn phi_alpha_examples() {
        let (sys, p) = bench();
        let t = p.target();
        assert_eq!(phi_alpha(&StateVector::ket0(), t, sys.h1()).unwrap(), 1.0);
        assert_eq!(phi_alpha(&StateVector::ket1(), t, sys.h1()).unwrap(), 0.0);
        let s = StateVector::qubit(c(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2)).unwrap();
        assert_abs_diff_eq!(phi_alpha(&s, t, sys.h1()).unwrap(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn control_examples() {
        let (sys, p) = bench();
        let u = control_value(ControlLaw::NonSmooth, &p, &StateVector::ket0(), sys.h1()).unwrap();
        assert_abs_diff_eq!(u, 0.5, epsilon = 1e-15);
        for law in ControlLaw::ALL {
            assert_eq!(control_value(law, &p, &StateVector::ket1(), sys.h1()).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(
            ControlLaw::NonSmooth.apply(-0.125, 1.0, 2.0 / 3.0),
            -0.25,
            epsilon = 1e-15
        );
        assert_eq!(ControlLaw::BangBang.apply(-0.3, 0.5, 0.5), -0.5);
        assert_eq!(ControlLaw::Standard.apply(-0.3, 0.5, 0.5), -0.15);
    }

    #[test]
    fn vdot_examples() {
        let (sys, p) = bench();
        let h1 = sys.h1();
        let at = |psi: &StateVector| {
            let u = control_value(ControlLaw::NonSmooth, &p, psi, h1).unwrap();
            vdot_analytic(&p, psi, h1, u).unwrap()
        };
        assert_eq!(at(&StateVector::ket1()), 0.0);
        assert_eq!(at(&StateVector::ket0()), 0.0);
        let plus = StateVector::qubit(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        let want = -2.0 * 0.5 * FRAC_1_SQRT_2 * FRAC_1_SQRT_2.powf(5.0 / 3.0);
        assert_abs_diff_eq!(at(&plus), want, epsilon = 1e-15);
    }

    fn arb_qubit() -> impl Strategy<Value = StateVector> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
            .prop_map(|(a, b, c, d)| normalize(&[C64::new(a, b), C64::new(c, d)]).unwrap())
    }

    proptest! {
        #[test]
        fn controls_bounded_by_gain(psi in arb_qubit(), k in 0.01f64..5.0, a in 0.05f64..0.95) {
            let sys = ControlSystem::two_level();
            let p = ControlParams::two_level(k, a).unwrap();
            for law in [ControlLaw::NonSmooth, ControlLaw::BangBang, ControlLaw::Standard] {
                let u = control_value(law, &p, &psi, sys.h1()).unwrap();
                prop_assert!(u.abs() <= k * (1.0 + 1e-12));
            }
        }

        #[test]
        fn nonsmooth_vdot_nonpositive(psi in arb_qubit()) {
            let (sys, p) = bench();
            let u = control_value(ControlLaw::NonSmooth, &p, &psi, sys.h1()).unwrap();
            prop_assert!(vdot_analytic(&p, &psi, sys.h1(), u).unwrap() <= 0.0);
        }

        #[test]
        fn phi_alpha_is_r1_cos_phi(psi in arb_qubit()) {
            let (sys, p) = bench();
            let pd = polar_decompose(&psi).unwrap();
            let want = pd.r1 * pd.phi.cos();
            prop_assert!((phi_alpha(&psi, p.target(), sys.h1()).unwrap() - want).abs() < 1e-9);
        }

        #[test]
        fn vdot_matches_polar_closed_form(psi in arb_qubit()) {
            let (sys, p) = bench();
            let pd = polar_decompose(&psi).unwrap();
            let u = control_value(ControlLaw::NonSmooth, &p, &psi, sys.h1()).unwrap();
            let want = -2.0 * 0.5 * pd.r2 * (pd.r1 * pd.phi.cos()).abs().powf(5.0 / 3.0);
            prop_assert!((vdot_analytic(&p, &psi, sys.h1(), u).unwrap() - want).abs() < 1e-12);
        }

        #[test]
        fn nonsmooth_control_continuous(psi in arb_qubit(), d in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)) {
            let (sys, p) = bench();
            let u0 = control_value(ControlLaw::NonSmooth, &p, &psi, sys.h1()).unwrap();
            let mut last = f64::INFINITY;
            prop_assume!(psi[1].norm() > 1e-3);
            for scale in [1e-2, 1e-4, 1e-6, 1e-8] {
                let a = psi.amplitudes();
                let moved = normalize(&[a[0] + C64::new(d.0, d.1) * scale, a[1] + C64::new(d.2, d.3) * scale]).unwrap();
                let du = (control_value(ControlLaw::NonSmooth, &p, &moved, sys.h1()).unwrap() - u0).abs();
                last = du;
            }
            // Hölder-α: the gap at δ = 1e-8 is of order K δ^α ≈ 1e-6
            prop_assert!(last < 1e-4);
        }
    }
}
