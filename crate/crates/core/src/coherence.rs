//! Coherence-vector (Bloch) representation.
//!
//! Basis normalization is fixed to `tr(σ_m σ_n) = 2 δ_mn`, the Pauli
//! convention, for which the projector expands as
//! `|ψ⟩⟨ψ| = I/n + ½ Σ s_κ σ_κ` with `s_κ = ⟨ψ|σ_κ|ψ⟩`.
//!
//! With this normalization the generator of `ṡ = (A₀ + u A₁) s` is
//! `A(m, n) = tr(iH[σ_m, σ_n]) / 2`. The unscaled trace `tr(iH[σ_m, σ_n])`
//! is the generator for an orthonormal basis (`tr(σ_m σ_n) = δ_mn`); in the
//! Pauli normalization it runs the Bloch vector at twice the Schrödinger
//! rate. [`adjoint_matrix`] divides by [`HermitianBasis::norm_const`] so the
//! coherence dynamics match the state-vector dynamics exactly.

use alloc::vec::Vec;

use num_traits::Float;

use crate::qstate::{braket, HermitianOperator, StateVector};
use crate::{Error, Result, C64};

/// Largest imaginary part tolerated when casting an expectation value to real.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Traceless Hermitian basis `σ_1 … σ_{n²−1}` plus `σ₀ = I/√n`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    sigma: Vec<HermitianOperator>,
    sigma0: HermitianOperator,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.sigma0.dim()
    }

    pub fn sigma(&self) -> &[HermitianOperator] {
        &self.sigma
    }

    pub fn sigma0(&self) -> &HermitianOperator {
        &self.sigma0
    }

    /// `c` in `tr(σ_m σ_n) = c δ_mn`.
    pub fn norm_const(&self) -> f64 {
        2.0
    }

    /// Number of traceless elements, `n² − 1`.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// `σ_x, σ_y, σ_z` and `σ₀ = I/√2`.
pub fn pauli_basis() -> HermitianBasis {
    gell_mann_basis(2).expect("n = 2 is valid")
}

/// Generalized Gell-Mann basis for dimension `n ≥ 2`.
///
/// Ordering: symmetric `E_jk + E_kj` for `j < k`, then antisymmetric
/// `−iE_jk + iE_kj`, then diagonal. For `n = 2` this is `σ_x, σ_y, σ_z`.
pub fn gell_mann_basis(n: usize) -> Result<HermitianBasis> {
    if n < 2 {
        return Err(Error::InvalidParam("basis dimension must be at least 2"));
    }
    let zero = C64::new(0.0, 0.0);
    let unit = |entries: &mut Vec<C64>, i: usize, j: usize, v: C64| entries[i * n + j] = v;
    let mut sigma = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut e = alloc::vec![zero; n * n];
            unit(&mut e, j, k, C64::new(1.0, 0.0));
            unit(&mut e, k, j, C64::new(1.0, 0.0));
            sigma.push(HermitianOperator::new(n, e)?);
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut e = alloc::vec![zero; n * n];
            unit(&mut e, j, k, C64::new(0.0, -1.0));
            unit(&mut e, k, j, C64::new(0.0, 1.0));
            sigma.push(HermitianOperator::new(n, e)?);
        }
    }
    for l in 1..n {
        let lf = l as f64;
        let scale = Float::sqrt(2.0 / (lf * (lf + 1.0)));
        let mut e = alloc::vec![zero; n * n];
        for i in 0..l {
            unit(&mut e, i, i, C64::new(scale, 0.0));
        }
        unit(&mut e, l, l, C64::new(-lf * scale, 0.0));
        sigma.push(HermitianOperator::new(n, e)?);
    }
    let sigma0 = HermitianOperator::identity(n).scaled(1.0 / Float::sqrt(n as f64));
    Ok(HermitianBasis { sigma, sigma0 })
}

/// Real vector of expectation values `s_κ = ⟨ψ|σ_κ|ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    pub s: Vec<f64>,
}

impl CoherenceVector {
    pub fn new(s: Vec<f64>) -> Self {
        Self { s }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.s.iter().map(|x| x * x).sum::<f64>())
    }

    pub fn dot(&self, other: &CoherenceVector) -> f64 {
        self.s.iter().zip(&other.s).map(|(a, b)| a * b).sum()
    }
}

fn dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Coherence vector of `psi` in `basis`.
pub fn to_coherence(psi: &StateVector, basis: &HermitianBasis) -> Result<CoherenceVector> {
    dims(basis.dim(), psi.dim())?;
    let amps = psi.amplitudes();
    let s = basis
        .sigma
        .iter()
        .enumerate()
        .map(|(k, sig)| {
            let e = braket(amps, &sig.apply_unchecked(amps));
            if e.im.abs() > IMAG_RESIDUE_TOL {
                Err(Error::ImaginaryResidue {
                    component: k,
                    residue: e.im,
                })
            } else {
                Ok(e.re)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoherenceVector { s })
}

/// `I/n + ½ Σ s_κ σ_κ`, row-major. Equals `|ψ⟩⟨ψ|` when `s` is a pure-state coherence vector.
pub fn density_from_coherence(s: &CoherenceVector, basis: &HermitianBasis) -> Result<Vec<C64>> {
    dims(basis.len(), s.len())?;
    let n = basis.dim();
    let mut rho = alloc::vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        rho[i * n + i] = C64::new(1.0 / n as f64, 0.0);
    }
    let half = 1.0 / basis.norm_const();
    for (sk, sig) in s.s.iter().zip(&basis.sigma) {
        for (r, e) in rho.iter_mut().zip(sig.entries()) {
            *r += e * (half * sk);
        }
    }
    Ok(rho)
}

/// Qubit state on the Bloch sphere with coherence vector `s` (Pauli basis).
///
/// `s` is projected radially onto the unit sphere first. The global phase
/// makes the larger of the two amplitudes real and non-negative, which keeps
/// the reconstruction well conditioned near both poles.
pub fn coherence_to_state(s: &CoherenceVector) -> Result<StateVector> {
    dims(3, s.len())?;
    let n = s.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let (x, y, z) = (s.s[0] / n, s.s[1] / n, s.s[2] / n);
    let perp = C64::new(x, y);
    // x + iy = 2 conj(a) b
    let (a, b) = if z >= 0.0 {
        let a = Float::sqrt((1.0 + z) / 2.0);
        (C64::new(a, 0.0), perp / (2.0 * a))
    } else {
        let b = Float::sqrt((1.0 - z) / 2.0);
        (perp.conj() / (2.0 * b), C64::new(b, 0.0))
    };
    crate::qstate::normalize(&[a, b])
}

/// Real antisymmetric generator of the coherence-vector dynamics for one Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl AdjointMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[m * self.dim + n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest `|A(m,n) + A(n,m)|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.dim {
            for n in m..self.dim {
                worst = worst.max((self.get(m, n) + self.get(n, m)).abs());
            }
        }
        worst
    }

    pub(crate) fn mul_add(&self, s: &[f64], scale: f64, out: &mut [f64]) {
        for (m, o) in out.iter_mut().enumerate() {
            let row = &self.entries[m * self.dim..(m + 1) * self.dim];
            *o += scale * row.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// `A(m, n) = tr(iH[σ_m, σ_n]) / c` with `c` the basis normalization constant.
pub fn adjoint_matrix(h: &HermitianOperator, basis: &HermitianBasis) -> Result<AdjointMatrix> {
    dims(basis.dim(), h.dim())?;
    let k = basis.len();
    let n = basis.dim();
    let c = basis.norm_const();
    // H σ_m, reused across columns
    let h_sigma: Vec<Vec<C64>> = basis.sigma.iter().map(|s| h.mul_raw(s.entries())).collect();
    let mut entries = alloc::vec![0.0; k * k];
    for m in 0..k {
        for l in (m + 1)..k {
            // tr(H[σ_m, σ_l]) = tr(Hσ_m σ_l) − tr(Hσ_l σ_m)
            let t = trace_product(&h_sigma[m], basis.sigma[l].entries(), n)
                - trace_product(&h_sigma[l], basis.sigma[m].entries(), n);
            let v = C64::new(0.0, 1.0) * t;
            if v.im.abs() > IMAG_RESIDUE_TOL {
                return Err(Error::ImaginaryResidue {
                    component: m * k + l,
                    residue: v.im,
                });
            }
            entries[m * k + l] = v.re / c;
            entries[l * k + m] = -v.re / c;
        }
    }
    Ok(AdjointMatrix { dim: k, entries })
}

fn trace_product(a: &[C64], b: &[C64], n: usize) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            t += a[i * n + j] * b[j * n + i];
        }
    }
    t
}

/// `(A₀ + u₁A₁) s`.
pub fn coherence_rhs(s: &CoherenceVector, u1: f64, a0: &AdjointMatrix, a1: &AdjointMatrix) -> Result<CoherenceVector> {
    dims(a0.dim, s.len())?;
    dims(a0.dim, a1.dim)?;
    let mut out = alloc::vec![0.0; s.len()];
    a0.mul_add(&s.s, 1.0, &mut out);
    a1.mul_add(&s.s, u1, &mut out);
    Ok(CoherenceVector { s: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControlSystem;
    use crate::qstate::{bloch_angles, normalize};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_1_SQRT_2;
    use proptest::prelude::*;

    fn trace_of_product(a: &HermitianOperator, b: &HermitianOperator) -> C64 {
        trace_product(a.entries(), b.entries(), a.dim())
    }

    #[test]
    fn pauli_examples() {
        let b = pauli_basis();
        let sx = &b.sigma()[0];
        assert_eq!(sx.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(sx.get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(sx.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(trace_of_product(&b.sigma()[0], &b.sigma()[1]), C64::new(0.0, 0.0));
        assert_eq!(trace_of_product(&b.sigma()[2], &b.sigma()[2]), C64::new(2.0, 0.0));
        assert_abs_diff_eq!(b.sigma0().get(0, 0).re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn gell_mann_orthogonality() {
        for n in 2..=4 {
            let b = gell_mann_basis(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            for (i, si) in b.sigma().iter().enumerate() {
                assert!(si.trace().norm() < 1e-12);
                for (j, sj) in b.sigma().iter().enumerate() {
                    let t = trace_of_product(si, sj);
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((t - want).norm() < 1e-12, "n={n} ({i},{j}) -> {t}");
                }
            }
        }
    }

    #[test]
    fn coherence_examples() {
        let b = pauli_basis();
        assert_eq!(to_coherence(&StateVector::ket0(), &b).unwrap().s, [0.0, 0.0, 1.0]);
        assert_eq!(to_coherence(&StateVector::ket1(), &b).unwrap().s, [0.0, 0.0, -1.0]);
        let plus = StateVector::qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)).unwrap();
        let s = to_coherence(&plus, &b).unwrap();
        assert_abs_diff_eq!(s.s[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s[2], 0.0, epsilon = 1e-15);
        assert!(to_coherence(&StateVector::basis(3, 0).unwrap(), &b).is_err());
    }

    #[test]
    fn zero_hamiltonian_gives_zero_generator() {
        let a = adjoint_matrix(&HermitianOperator::zero(2), &pauli_basis()).unwrap();
        assert!(a.entries().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn drift_generator_structure() {
        // brute force: tr(iH₀[σ_m,σ_n]) / 2 from explicit matrix products
        let sys = ControlSystem::two_level();
        let b = pauli_basis();
        let a0 = adjoint_matrix(sys.h0(), &b).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                let sm = b.sigma()[m].entries();
                let sn = b.sigma()[n].entries();
                let comm: Vec<C64> = b.sigma()[m]
                    .mul_raw(sn)
                    .iter()
                    .zip(b.sigma()[n].mul_raw(sm))
                    .map(|(x, y)| x - y)
                    .collect();
                let hc = sys.h0().mul_raw(&comm);
                let t = C64::new(0.0, 1.0) * (hc[0] + hc[3]);
                assert_abs_diff_eq!(a0.get(m, n), t.re / 2.0, epsilon = 1e-14);
            }
        }
        let nonzero: Vec<(usize, usize)> = (0..3)
            .flat_map(|m| (0..3).map(move |n| (m, n)))
            .filter(|&(m, n)| a0.get(m, n) != 0.0)
            .collect();
        assert_eq!(nonzero, [(0, 1), (1, 0)]);
        assert_eq!(a0.get(0, 1), -2.0);
    }

    #[test]
    fn drift_leaves_poles_fixed() {
        let sys = ControlSystem::two_level();
        let b = pauli_basis();
        let a0 = adjoint_matrix(sys.h0(), &b).unwrap();
        let a1 = adjoint_matrix(sys.h1(), &b).unwrap();
        for z in [1.0, -1.0] {
            let r = coherence_rhs(&CoherenceVector::new(alloc::vec![0.0, 0.0, z]), 0.0, &a0, &a1).unwrap();
            assert_eq!(r.s, [0.0, 0.0, 0.0]);
        }
        let r = coherence_rhs(&CoherenceVector::new(alloc::vec![0.0; 3]), 0.3, &a0, &a1).unwrap();
        assert_eq!(r.s, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn generator_matches_schrodinger_rate() {
        // ṡ from finite differences of the exact unitary evolution under H₀ = σ_z
        let b = pauli_basis();
        let sys = ControlSystem::two_level();
        let a0 = adjoint_matrix(sys.h0(), &b).unwrap();
        let a1 = adjoint_matrix(sys.h1(), &b).unwrap();
        let psi = normalize(&[C64::new(0.6, 0.1), C64::new(0.3, -0.7)]).unwrap();
        let h = 1e-6;
        let evolve =
            |t: f64| StateVector::qubit(psi[0] * C64::from_polar(1.0, -t), psi[1] * C64::from_polar(1.0, t)).unwrap();
        let sp = to_coherence(&evolve(h), &b).unwrap();
        let sm = to_coherence(&evolve(-h), &b).unwrap();
        let s = to_coherence(&psi, &b).unwrap();
        let rhs = coherence_rhs(&s, 0.0, &a0, &a1).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!((sp.s[k] - sm.s[k]) / (2.0 * h), rhs.s[k], epsilon = 1e-8);
        }
    }

    #[test]
    fn residue_guard_reports_component() {
        let b = pauli_basis();
        let e = Error::ImaginaryResidue {
            component: 1,
            residue: 1.0,
        };
        assert!(alloc::format!("{e}").contains("1"));
        assert!(to_coherence(&StateVector::ket0(), &b).is_ok());
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                let z: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                normalize(&z).unwrap()
            })
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = HermitianOperator> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let mut e = alloc::vec![C64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = v[i * n + j];
                    if i == j {
                        e[i * n + j] = C64::new(a, 0.0);
                    } else if i < j {
                        e[i * n + j] = C64::new(a, b);
                        e[j * n + i] = C64::new(a, -b);
                    }
                }
            }
            HermitianOperator::new(n, e).unwrap()
        })
    }

    proptest! {
        #[test]
        fn qubit_coherence_is_unit(psi in arb_state(2), g in 0.0f64..7.0) {
            let b = pauli_basis();
            let s = to_coherence(&psi, &b).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-9);
            // global phase cancels in every expectation value up to rounding
            let t = to_coherence(&psi.with_global_phase(g), &b).unwrap();
            prop_assert!(s.s.iter().zip(&t.s).all(|(a, b)| (a - b).abs() < 1e-15));
        }

        #[test]
        fn coherence_matches_bloch_angles(psi in arb_state(2)) {
            let s = to_coherence(&psi, &pauli_basis()).unwrap();
            let (t, p) = bloch_angles(&psi).unwrap();
            let want = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            for (got, want) in s.s.iter().zip(want) {
                prop_assert!((got - want).abs() < 1e-9);
            }
        }

        #[test]
        fn projector_reconstruction(n in 2usize..4, seed in arb_state(3)) {
            let amps: Vec<C64> = seed.amplitudes()[..n].to_vec();
            prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
            let psi = normalize(&amps).unwrap();
            let b = gell_mann_basis(n).unwrap();
            let rho = density_from_coherence(&to_coherence(&psi, &b).unwrap(), &b).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let want = psi[i] * psi[j].conj();
                    prop_assert!((rho[i * n + j] - want).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn state_from_coherence_round_trip(psi in arb_state(2)) {
            let b = pauli_basis();
            let back = coherence_to_state(&to_coherence(&psi, &b).unwrap()).unwrap();
            prop_assert!(crate::qstate::equivalent_up_to_phase(&back, &psi, 1e-9).unwrap());
        }

        #[test]
        fn generator_antisymmetric(n in 2usize..4, h in arb_hermitian(3)) {
            let sub: Vec<C64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| h.get(i, j)).collect();
            let h = HermitianOperator::new(n, sub).unwrap();
            let a = adjoint_matrix(&h, &gell_mann_basis(n).unwrap()).unwrap();
            prop_assert!(a.antisymmetry_defect() <= 1e-12);
        }

        #[test]
        fn rhs_preserves_norm(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, u in -2.0f64..2.0) {
            let sys = ControlSystem::two_level();
            let b = pauli_basis();
            let a0 = adjoint_matrix(sys.h0(), &b).unwrap();
            let a1 = adjoint_matrix(sys.h1(), &b).unwrap();
            let s = CoherenceVector::new(alloc::vec![x, y, z]);
            let r = coherence_rhs(&s, u, &a0, &a1).unwrap();
            prop_assert!(s.dot(&r).abs() < 1e-14);
        }
    }
}
