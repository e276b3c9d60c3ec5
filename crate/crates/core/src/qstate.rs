//! Pure states, Hermitian operators and two-level coordinate decompositions.
//!
//! Phase conventions used throughout the crate:
//! * the phase of an amplitude that is exactly zero is 0;
//! * phases are reported in `[0, 2π)`, polar angles `θ` in `[0, π]`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Index;

use num_traits::Float;

use crate::util::wrap_tau;
use crate::{Error, Result, C64};

/// Norm tolerance for accepting a vector as normalized.
pub const NORM_TOL: f64 = 1e-9;
/// Largest norm deviation that constructors repair silently.
pub const RENORM_WINDOW: f64 = 1e-6;
/// Norm below which a vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;
/// Entrywise tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) fn norm(v: &[C64]) -> f64 {
    Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub(crate) fn braket(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Argument of `z` with the zero-value convention `arg(0) = 0`.
#[inline]
pub(crate) fn arg0(z: C64) -> f64 {
    if z == C64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Unit-norm amplitude vector of a pure state, dimension ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps `amps`, which must already be normalized.
    ///
    /// Deviations below [`RENORM_WINDOW`] are corrected silently; anything
    /// larger is reported as [`Error::NotNormalized`].
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidParam("state dimension must be at least 2"));
        }
        let n = norm(&amps);
        if !n.is_finite() {
            return Err(Error::NotNormalized { norm: n });
        }
        if (n - 1.0).abs() <= NORM_TOL {
            return Ok(Self { amps });
        }
        if (n - 1.0).abs() < RENORM_WINDOW {
            return Ok(Self::scaled(amps, n));
        }
        Err(Error::NotNormalized { norm: n })
    }

    /// Stores integrator output as-is; callers track the norm themselves.
    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    fn scaled(mut amps: Vec<C64>, n: f64) -> Self {
        for a in &mut amps {
            *a /= n;
        }
        Self { amps }
    }

    /// Computational basis state `|k⟩` in dimension `n`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if n < 2 || k >= n {
            return Err(Error::InvalidParam("basis index out of range"));
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); n];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// `|0⟩` of a qubit.
    pub fn ket0() -> Self {
        Self::basis(2, 0).expect("valid basis")
    }

    /// `|1⟩` of a qubit.
    pub fn ket1() -> Self {
        Self::basis(2, 1).expect("valid basis")
    }

    /// Qubit state `[a, b]`; must be normalized.
    pub fn qubit(a: C64, b: C64) -> Result<Self> {
        Self::new(alloc::vec![a, b])
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(braket(&self.amps, &other.amps))
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let p = C64::from_polar(1.0, phi);
        Self {
            amps: self.amps.iter().map(|a| a * p).collect(),
        }
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

/// Scales a nonzero vector to unit norm.
pub fn normalize(v: &[C64]) -> Result<StateVector> {
    if v.len() < 2 {
        return Err(Error::InvalidParam("state dimension must be at least 2"));
    }
    let n = norm(v);
    if !(n >= ZERO_NORM) {
        return Err(Error::ZeroVector);
    }
    Ok(StateVector::scaled(v.to_vec(), n))
}

/// Square Hermitian matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianOperator {
    /// Builds an operator from row-major entries, rejecting non-Hermitian input.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dims(dim * dim, entries.len())?;
        if dim == 0 {
            return Err(Error::InvalidParam("operator dimension must be positive"));
        }
        let mut max_dev = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_dev = max_dev.max(d);
            }
        }
        if !(max_dev <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { max_deviation: max_dev });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Result<Self> {
        Self::new(N, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: alloc::vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zero(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    /// `H v` for a raw amplitude slice.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dims(self.dim, v.len())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[C64]) -> Vec<C64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(h, x)| h * x).sum())
            .collect()
    }

    /// `⟨a|H|b⟩`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Result<C64> {
        check_dims(self.dim, a.dim())?;
        check_dims(self.dim, b.dim())?;
        Ok(braket(&a.amps, &self.apply_unchecked(&b.amps)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Plain complex matrix product `self · other`, row-major.
    pub(crate) fn mul_raw(&self, other: &[C64]) -> Vec<C64> {
        let n = self.dim;
        let mut out = alloc::vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other[k * n + j];
                }
            }
        }
        out
    }
}

/// `|⟨ψ_f|ψ⟩|²`.
pub fn fidelity_to_target(psi: &StateVector, target: &StateVector) -> Result<f64> {
    Ok(target.inner(psi)?.norm_sqr())
}

/// Whether `psi1 = e^{iφ} psi2` up to `tol`.
///
/// The criterion is the exact minimum over φ of `‖ψ₁ − e^{iφ}ψ₂‖`, attained
/// at `φ = arg⟨ψ₂|ψ₁⟩` (0 when the overlap vanishes). The distance is formed
/// directly rather than through `2 − 2|⟨ψ₂|ψ₁⟩|`, which loses half the digits
/// for nearly equal states.
pub fn equivalent_up_to_phase(psi1: &StateVector, psi2: &StateVector, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParam("tolerance must be positive"));
    }
    Ok(phase_distance(psi1, psi2)? <= tol)
}

/// `min_φ ‖ψ₁ − e^{iφ}ψ₂‖`.
pub fn phase_distance(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    let overlap = psi2.inner(psi1)?;
    let p = C64::from_polar(1.0, arg0(overlap));
    let d: f64 = psi1
        .amps
        .iter()
        .zip(&psi2.amps)
        .map(|(a, b)| (a - p * b).norm_sqr())
        .sum();
    Ok(Float::sqrt(d))
}

/// Qubit amplitudes in polar form `r₁e^{iφ_a}|0⟩ + r₂e^{iφ_b}|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDecomposition {
    pub r1: f64,
    pub r2: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    /// Relative phase `φ_b − φ_a` reduced to `[0, 2π)`.
    pub phi: f64,
}

impl PolarDecomposition {
    /// Assembles a decomposition from radii and phases, reducing phases to `[0, 2π)`.
    pub fn from_parts(r1: f64, r2: f64, phi_a: f64, phi_b: f64) -> Self {
        let phi_a = wrap_tau(phi_a);
        let phi_b = wrap_tau(phi_b);
        Self {
            r1,
            r2,
            phi_a,
            phi_b,
            phi: wrap_tau(phi_b - phi_a),
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [
            C64::from_polar(self.r1, self.phi_a),
            C64::from_polar(self.r2, self.phi_b),
        ]
    }

    /// Reassembles the state vector.
    pub fn to_state(&self) -> Result<StateVector> {
        let [a, b] = self.amplitudes();
        StateVector::qubit(a, b)
    }
}

fn require_qubit(psi: &StateVector) -> Result<()> {
    check_dims(2, psi.dim())
}

/// Polar form of a qubit state with the zero-amplitude phase convention.
pub fn polar_decompose(psi: &StateVector) -> Result<PolarDecomposition> {
    require_qubit(psi)?;
    let (x1, x2) = (psi[0], psi[1]);
    Ok(PolarDecomposition::from_parts(x1.norm(), x2.norm(), arg0(x1), arg0(x2)))
}

/// Bloch angles `(θ, φ)` with `ψ ≃ [cos(θ/2), e^{iφ} sin(θ/2)]`; `φ = 0` at the poles.
pub fn bloch_angles(psi: &StateVector) -> Result<(f64, f64)> {
    require_qubit(psi)?;
    let (x1, x2) = (psi[0], psi[1]);
    let (m1, m2) = (x1.norm(), x2.norm());
    let theta = (2.0 * Float::atan2(m2, m1)).clamp(0.0, PI);
    let phi = if m1 == 0.0 || m2 == 0.0 {
        0.0
    } else {
        wrap_tau(x2.arg() - x1.arg())
    };
    Ok((theta, phi))
}

/// `[cos(θ/2), e^{iφ} sin(θ/2)]`.
pub fn bloch_state(theta: f64, phi: f64) -> StateVector {
    let (s, c) = Float::sin_cos(theta / 2.0);
    StateVector {
        amps: alloc::vec![C64::new(c, 0.0), C64::from_polar(s, phi)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
    use proptest::prelude::*;

    const I: C64 = C64::new(0.0, 1.0);

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn close(a: &StateVector, b: &[C64], tol: f64) -> bool {
        a.amplitudes().iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn normalize_examples() {
        let s = normalize(&[c(2.0), c(0.0)]).unwrap();
        assert!(close(&s, &[c(1.0), c(0.0)], 1e-15));
        let s = normalize(&[c(0.0), I]).unwrap();
        assert!(close(&s, &[c(0.0), I], 1e-15));
        let s = normalize(&[c(1.0), c(1.0)]).unwrap();
        assert!(close(&s, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], 1e-15));
    }

    #[test]
    fn normalize_rejects_zero() {
        assert_eq!(normalize(&[c(0.0), c(1e-13)]), Err(Error::ZeroVector));
    }

    #[test]
    fn constructor_renorm_window() {
        let s = StateVector::qubit(c(1.0 + 5e-7), c(0.0)).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            StateVector::qubit(c(1.1), c(0.0)),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::new(alloc::vec![c(1.0)]).is_err());
    }

    #[test]
    fn hermitian_check() {
        assert!(HermitianOperator::from_rows([[c(0.0), -I], [I, c(0.0)]]).is_ok());
        assert!(matches!(
            HermitianOperator::from_rows([[c(0.0), I], [I, c(0.0)]]),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let k0 = StateVector::ket0();
        let k1 = StateVector::ket1();
        assert_eq!(fidelity_to_target(&k0, &k1).unwrap(), 0.0);
        assert_eq!(fidelity_to_target(&k1, &k1).unwrap(), 1.0);
        let half = StateVector::qubit(c(0.5), c(3f64.sqrt() / 2.0)).unwrap();
        assert_abs_diff_eq!(fidelity_to_target(&half, &k1).unwrap(), 0.75, epsilon = 1e-15);
        let three = StateVector::basis(3, 0).unwrap();
        assert!(matches!(
            fidelity_to_target(&three, &k1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn phase_equivalence_examples() {
        let a = StateVector::qubit(c(0.0), c(1.0)).unwrap();
        let b = StateVector::qubit(c(0.0), I).unwrap();
        assert!(equivalent_up_to_phase(&a, &b, 1e-9).unwrap());
        assert!(!equivalent_up_to_phase(&StateVector::ket0(), &StateVector::ket1(), 1e-9).unwrap());
        let p = StateVector::qubit(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        let q = StateVector::qubit(I * FRAC_1_SQRT_2, I * FRAC_1_SQRT_2).unwrap();
        assert!(equivalent_up_to_phase(&p, &q, 1e-9).unwrap());
    }

    #[test]
    fn polar_examples() {
        let p = polar_decompose(&StateVector::ket0()).unwrap();
        assert_eq!((p.r1, p.r2, p.phi_a, p.phi_b, p.phi), (1.0, 0.0, 0.0, 0.0, 0.0));

        let s = StateVector::qubit(c(0.0), C64::from_polar(1.0, FRAC_PI_3)).unwrap();
        let p = polar_decompose(&s).unwrap();
        assert_eq!((p.r1, p.r2, p.phi_a), (0.0, 1.0, 0.0));
        assert_abs_diff_eq!(p.phi_b, FRAC_PI_3, epsilon = 1e-15);
        assert_abs_diff_eq!(p.phi, FRAC_PI_3, epsilon = 1e-15);

        let s = StateVector::qubit(
            C64::from_polar(0.5, FRAC_PI_4),
            C64::from_polar(3f64.sqrt() / 2.0, FRAC_PI_2),
        )
        .unwrap();
        let p = polar_decompose(&s).unwrap();
        assert_abs_diff_eq!(p.r1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.r2, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.phi, FRAC_PI_4, epsilon = 1e-15);

        assert!(polar_decompose(&StateVector::basis(3, 1).unwrap()).is_err());
    }

    #[test]
    fn negative_relative_phase_wraps() {
        let s = StateVector::qubit(C64::from_polar(FRAC_1_SQRT_2, 1.0), c(FRAC_1_SQRT_2)).unwrap();
        let p = polar_decompose(&s).unwrap();
        assert_abs_diff_eq!(p.phi, 2.0 * PI - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(bloch_angles(&StateVector::ket0()).unwrap(), (0.0, 0.0));
        assert_eq!(bloch_angles(&StateVector::ket1()).unwrap(), (PI, 0.0));
        let s = StateVector::qubit(c(FRAC_1_SQRT_2), I * FRAC_1_SQRT_2).unwrap();
        let (t, p) = bloch_angles(&s).unwrap();
        assert_abs_diff_eq!(t, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p, FRAC_PI_2, epsilon = 1e-15);
    }

    fn arb_qubit() -> impl Strategy<Value = StateVector> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
            .prop_map(|(a, b, c, d)| normalize(&[C64::new(a, b), C64::new(c, d)]).unwrap())
    }

    proptest! {
        #[test]
        fn polar_round_trip(psi in arb_qubit()) {
            let back = polar_decompose(&psi).unwrap().to_state().unwrap();
            prop_assert!(close(&back, psi.amplitudes(), 1e-12));
        }

        #[test]
        fn bloch_round_trip(psi in arb_qubit()) {
            let (t, p) = bloch_angles(&psi).unwrap();
            prop_assert!((0.0..=PI).contains(&t));
            prop_assert!((0.0..2.0 * PI).contains(&p));
            prop_assert!(equivalent_up_to_phase(&bloch_state(t, p), &psi, 1e-9).unwrap());
        }

        #[test]
        fn equivalence_reflexive_symmetric(a in arb_qubit(), b in arb_qubit(), tol in 1e-6f64..1.0) {
            prop_assert!(equivalent_up_to_phase(&a, &a, tol).unwrap());
            prop_assert_eq!(
                equivalent_up_to_phase(&a, &b, tol).unwrap(),
                equivalent_up_to_phase(&b, &a, tol).unwrap()
            );
        }

        #[test]
        fn fidelity_phase_invariant(a in arb_qubit(), b in arb_qubit(), g in 0.0f64..7.0, h in 0.0f64..7.0) {
            let f = fidelity_to_target(&a, &b).unwrap();
            let g = fidelity_to_target(&a.with_global_phase(g), &b.with_global_phase(h)).unwrap();
            prop_assert!((f - g).abs() <= 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}
