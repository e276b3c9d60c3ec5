//! Finite-time stability checks on recorded trajectories.
//!
//! Everything here is post-processing: settling-time detection and its
//! analytic bounds, the differential inequality `V̇ + cV^α ≤ 0`, comparison
//! envelopes, homogeneity degrees under dilations, and the series expansion
//! of `r₂ = √(1 − r₁²)` that splits the radial dynamics into homogeneous
//! pieces `p_j`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use num_traits::Float;

use crate::dynamics::{scalar_closed_form, ScalarPrototype, ScalarTrajectory, Trajectory};
use crate::util::abs_pow;
use crate::{Error, Result};

/// `√3/2`, the edge of the neighborhood where the higher-order series terms
/// stay below half the leading rate.
pub const NEIGHBORHOOD_EDGE: f64 = 0.866_025_403_784_438_6;

/// Sampled Lyapunov values on a uniform grid.
pub trait LyapunovSeries {
    fn times(&self) -> &[f64];
    fn values(&self) -> &[f64];
    fn dt(&self) -> f64;
}

impl LyapunovSeries for Trajectory {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn values(&self) -> &[f64] {
        &self.lyapunov
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

/// The scalar state itself plays the role of `V` (take `y₀ ≥ 0`).
impl LyapunovSeries for ScalarTrajectory {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

/// Detected settling time together with any analytic bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SettlingReport {
    pub settling_time: Option<f64>,
    /// `V` threshold used for detection.
    pub threshold: f64,
    pub bound_lyapunov: Option<f64>,
    pub bound_neighborhood: Option<f64>,
    /// `settling_time ≤ min(bounds)` when bounds are present, otherwise
    /// whether the run settled at all.
    pub satisfied: bool,
}

impl SettlingReport {
    pub fn with_lyapunov_bound(mut self, bound: f64) -> Self {
        self.bound_lyapunov = Some(bound);
        self.refresh();
        self
    }

    pub fn with_neighborhood_bound(mut self, bound: f64) -> Self {
        self.bound_neighborhood = Some(bound);
        self.refresh();
        self
    }

    fn refresh(&mut self) {
        let bound = [self.bound_lyapunov, self.bound_neighborhood]
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.min(b))));
        self.satisfied = match (self.settling_time, bound) {
            (Some(t), Some(b)) => t <= b,
            (Some(_), None) => true,
            (None, _) => false,
        };
    }

    /// Flat `key=value` lines; absent values are written as `none`.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{self}");
        out
    }
}

fn opt(f: &mut fmt::Formatter<'_>, key: &str, v: Option<f64>) -> fmt::Result {
    match v {
        Some(x) => writeln!(f, "{key}={x}"),
        None => writeln!(f, "{key}=none"),
    }
}

impl fmt::Display for SettlingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        opt(f, "settling_time", self.settling_time)?;
        writeln!(f, "threshold={}", self.threshold)?;
        opt(f, "bound_lyapunov", self.bound_lyapunov)?;
        opt(f, "bound_neighborhood", self.bound_neighborhood)?;
        writeln!(f, "satisfied={}", self.satisfied)
    }
}

/// Earliest recorded time after which `V < eps_v` at every later sample.
pub fn detect_settling<S: LyapunovSeries + ?Sized>(traj: &S, eps_v: f64) -> Result<SettlingReport> {
    if !(eps_v > 0.0) {
        return Err(Error::InvalidParam("settling threshold must be positive"));
    }
    let (t, v) = (traj.times(), traj.values());
    if t.is_empty() {
        return Err(Error::InvalidParam("trajectory is empty"));
    }
    let settling_time = match v.iter().rposition(|&x| !(x < eps_v)) {
        None => Some(t[0]),
        Some(j) if j + 1 < t.len() => Some(t[j + 1]),
        Some(_) => None,
    };
    let mut r = SettlingReport {
        settling_time,
        threshold: eps_v,
        bound_lyapunov: None,
        bound_neighborhood: None,
        satisfied: false,
    };
    r.refresh();
    Ok(r)
}

fn check_exponent(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam("exponent must lie in (0, 1)"))
    }
}

/// `V₀^{1−α} / (c(1−α))`, the settling bound implied by `V̇ + cV^α ≤ 0`.
pub fn lyapunov_settling_bound(v0: f64, c: f64, alpha: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParam("rate c must be positive"));
    }
    check_exponent(alpha)?;
    if !(v0 >= 0.0) {
        return Err(Error::InvalidParam("V0 must be non-negative"));
    }
    Ok(abs_pow(v0, 1.0 - alpha) / (c * (1.0 - alpha)))
}

/// `4 / (|c₁|(1−α)) · V(r₁(0))^{(1−α)/2}` with `V = r₁²`, valid for `r₁(0) < √3/2`.
///
/// `c₁` enters through its magnitude. The series coefficient
/// `c₁ = −K g(t)` is negative and time dependent, so callers pick the value;
/// `c₁ = 1` gives 9.52 a.u. for `r₁(0) = 1/2`, `α = 2/3`.
pub fn neighborhood_settling_bound(r1_0: f64, c1: f64, alpha: f64) -> Result<f64> {
    check_exponent(alpha)?;
    if !(c1 != 0.0) || !c1.is_finite() {
        return Err(Error::InvalidParam("c1 must be finite and nonzero"));
    }
    if !(r1_0 >= 0.0) {
        return Err(Error::InvalidParam("r1 must be non-negative"));
    }
    if !(r1_0 < NEIGHBORHOOD_EDGE) {
        return Err(Error::OutOfNeighborhood { r1: r1_0 });
    }
    Ok(4.0 / (c1.abs() * (1.0 - alpha)) * abs_pow(r1_0 * r1_0, (1.0 - alpha) / 2.0))
}

/// Outcome of a sample-wise inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionCheck {
    pub holds: bool,
    /// Largest positive excess over the inequality (0 if none).
    pub max_violation: f64,
    /// Time of the largest excess.
    pub worst_time: Option<f64>,
    /// Number of samples examined.
    pub checked: usize,
}

/// Centered finite differences of `v`, one-sided at the ends.
pub fn finite_difference(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| match (i, n) {
            (_, 0 | 1) => 0.0,
            (0, _) => (v[1] - v[0]) / dt,
            (i, n) if i == n - 1 => (v[n - 1] - v[n - 2]) / dt,
            (i, _) => (v[i + 1] - v[i - 1]) / (2.0 * dt),
        })
        .collect()
}

/// `V̇ + cV^α ≤ 0` at every sample, `V̇` by finite differences, tolerance `10·dt`.
pub fn check_lyapunov_criterion<S: LyapunovSeries + ?Sized>(traj: &S, c: f64, alpha: f64) -> Result<CriterionCheck> {
    check_lyapunov_criterion_by(traj, |_| c, alpha, |_| true)
}

/// Variant with a per-sample rate `c(i)` and a sample filter.
pub fn check_lyapunov_criterion_by<S, C, M>(traj: &S, rate: C, alpha: f64, include: M) -> Result<CriterionCheck>
where
    S: LyapunovSeries + ?Sized,
    C: Fn(usize) -> f64,
    M: Fn(usize) -> bool,
{
    check_exponent(alpha)?;
    let dt = traj.dt();
    let v = traj.values();
    let vdot = finite_difference(v, dt);
    let tol = 10.0 * dt;
    let mut out = CriterionCheck {
        holds: true,
        max_violation: 0.0,
        worst_time: None,
        checked: 0,
    };
    for i in (0..v.len()).filter(|&i| include(i)) {
        out.checked += 1;
        let excess = vdot[i] + rate(i) * abs_pow(v[i], alpha);
        if excess > out.max_violation {
            out.max_violation = excess;
            out.worst_time = Some(traj.times()[i]);
        }
    }
    out.holds = out.max_violation <= tol;
    Ok(out)
}

/// Tolerance for envelope comparisons.
pub const COMPARISON_TOL: f64 = 1e-6;

/// Result of comparing `V(t)` against a scalar envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub holds: bool,
    /// Largest `V(t) − m(t)` observed (may be negative).
    pub max_excess: f64,
}

/// `V(t) ≤ μ(t, m₀) + 1e-6` with `μ` the closed-form scalar solution.
///
/// `proto.y0` is the envelope start `m₀` and must dominate `V(0)`.
pub fn comparison_check<S: LyapunovSeries + ?Sized>(traj: &S, proto: &ScalarPrototype) -> Result<ComparisonReport> {
    let v = traj.values();
    if v.is_empty() {
        return Err(Error::InvalidParam("trajectory is empty"));
    }
    if v[0] > proto.y0 + 1e-12 {
        return Err(Error::InvalidParam("envelope must start above V(0)"));
    }
    let max_excess = traj
        .times()
        .iter()
        .zip(v)
        .map(|(&t, &x)| x - scalar_closed_form(proto, t))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport {
        holds: max_excess <= COMPARISON_TOL,
        max_excess,
    })
}

/// Comparison against `ṁ = −c(t) m^β`, `m(0) = V(0)`, with a sampled rate.
///
/// The envelope is exact given the rate: `m^{1−β}(t) = m₀^{1−β} − (1−β)∫₀ᵗ c`,
/// the integral taken by the trapezoidal rule on the sample grid. This is
/// the form needed when the rate depends on the trajectory, as `c₀(t)/2 =
/// K g(t)` does.
pub fn comparison_check_time_varying<S: LyapunovSeries + ?Sized>(
    traj: &S,
    rates: &[f64],
    beta: f64,
) -> Result<ComparisonReport> {
    check_exponent(beta)?;
    let v = traj.values();
    if v.is_empty() || rates.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: rates.len(),
        });
    }
    let dt = traj.dt();
    let q = 1.0 - beta;
    let base = abs_pow(v[0], q);
    let mut integral = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..v.len() {
        if i > 0 {
            integral += 0.5 * dt * (rates[i - 1] + rates[i]);
        }
        let rem = base - q * integral;
        let m = if rem > 0.0 { Float::powf(rem, 1.0 / q) } else { 0.0 };
        max_excess = max_excess.max(v[i] - m);
    }
    Ok(ComparisonReport {
        holds: max_excess <= COMPARISON_TOL,
        max_excess,
    })
}

/// Positive coordinate weights `d_j` of a dilation `δ_ε(r) = (ε^{d_j} r_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSpec {
    weights: Vec<f64>,
}

impl DilationSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParam("dilation weights must be positive"));
        }
        Ok(Self { weights })
    }

    /// All weights 1.
    pub fn standard(dim: usize) -> Self {
        Self {
            weights: alloc::vec![1.0; dim.max(1)],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, eps: f64, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(&self.weights)
            .map(|(x, d)| Float::powf(eps, *d) * x)
            .collect()
    }
}

/// Estimated homogeneity degree of a vector field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityEstimate {
    /// Mean of the per-sample log-ratio estimates.
    pub degree: f64,
    /// Largest deviation of a single estimate from the mean.
    pub residual: f64,
    pub used: usize,
    /// Component evaluations skipped because the field vanished.
    pub skipped: usize,
}

/// Degree `k` with `f_j(δ_ε r) = ε^{k+d_j} f_j(r)`, from
/// `k = ln(f_j(δ_ε r)/f_j(r)) / ln ε − d_j` over every sample, component and ε.
///
/// Components where the field vanishes are skipped (logged at warn level);
/// if nothing usable remains the result is [`Error::DegenerateSample`].
pub fn estimate_homogeneity_degree<F>(
    f: F,
    dilation: &DilationSpec,
    samples: &[Vec<f64>],
    epsilons: &[f64],
) -> Result<HomogeneityEstimate>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if epsilons.iter().any(|&e| !(e > 0.0) || e == 1.0) {
        return Err(Error::InvalidParam("dilation factors must be positive and not 1"));
    }
    let d = dilation.weights();
    let mut estimates = Vec::new();
    let mut skipped = 0;
    for r in samples {
        if r.len() != d.len() {
            return Err(Error::DimensionMismatch {
                expected: d.len(),
                found: r.len(),
            });
        }
        let base = f(r);
        for &eps in epsilons {
            let scaled = f(&dilation.apply(eps, r));
            for (j, (&fs, &fb)) in scaled.iter().zip(&base).enumerate() {
                if fb == 0.0 || fs == 0.0 {
                    skipped += 1;
                    continue;
                }
                estimates.push(Float::ln((fs / fb).abs()) / Float::ln(eps) - d[j]);
            }
        }
    }
    if skipped > 0 {
        log::warn!("homogeneity estimate skipped {skipped} vanishing component evaluations");
    }
    if estimates.is_empty() {
        return Err(Error::DegenerateSample);
    }
    let degree = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let residual = estimates.iter().map(|k| (k - degree).abs()).fold(0.0, f64::max);
    Ok(HomogeneityEstimate {
        degree,
        residual,
        used: estimates.len(),
        skipped,
    })
}

/// Homogeneous field: finite-time stable iff asymptotically stable with negative degree.
pub fn homogeneous_finite_time_certificate(degree: f64, asymptotically_stable: bool) -> bool {
    asymptotically_stable && degree < 0.0
}

/// Outcome of the two-sided homogeneity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub holds: bool,
    /// `min V₂` over the `V₁ = 1` level set.
    pub level_min: f64,
    /// `max V₂` over the `V₁ = 1` level set.
    pub level_max: f64,
    pub max_violation: f64,
}

/// Checks `min V₂|_{V₁=1} · V₁^{l₂/l₁} ≤ V₂ ≤ max V₂|_{V₁=1} · V₁^{l₂/l₁}` at `samples`.
///
/// Level-set points are obtained by dilating each sample with
/// `ε = V₁(r)^{−1/l₁}`; in one dimension with the standard dilation that is
/// `{±1}` restricted to the signs present in `samples`. Relative tolerance 1e-9.
pub fn homogeneity_sandwich_check<V1, V2>(
    v1: V1,
    v2: V2,
    l1: f64,
    l2: f64,
    dilation: &DilationSpec,
    samples: &[Vec<f64>],
) -> Result<SandwichReport>
where
    V1: Fn(&[f64]) -> f64,
    V2: Fn(&[f64]) -> f64,
{
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::InvalidParam("homogeneity degrees must be positive"));
    }
    let mut level_min = f64::INFINITY;
    let mut level_max = f64::NEG_INFINITY;
    let mut v1_vals = Vec::with_capacity(samples.len());
    for r in samples {
        let a = v1(r);
        if !(a > 0.0) {
            return Err(Error::InvalidParam("V1 must be positive at every sample"));
        }
        let z = dilation.apply(Float::powf(a, -1.0 / l1), r);
        let w = v2(&z);
        level_min = level_min.min(w);
        level_max = level_max.max(w);
        v1_vals.push(a);
    }
    let mut max_violation = 0.0f64;
    for (r, a) in samples.iter().zip(v1_vals) {
        let scale = Float::powf(a, l2 / l1);
        let w = v2(r);
        let (lo, hi) = (level_min * scale, level_max * scale);
        let tol = 1e-9 * lo.abs().max(hi.abs()).max(w.abs()).max(f64::MIN_POSITIVE);
        max_violation = max_violation.max(lo - w - tol).max(w - hi - tol);
    }
    Ok(SandwichReport {
        holds: max_violation <= 0.0,
        level_min,
        level_max,
        max_violation: max_violation.max(0.0),
    })
}

/// `C(2j, j) / (2^{2j}(2j − 1))`, the j-th coefficient of `1 − √(1 − x²)`.
///
/// `C(2j, j)/4^j` is accumulated as `∏ (2i−1)/(2i)`; every factor is below
/// one so nothing overflows.
pub fn series_coefficient(j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidParam("series index starts at 1"));
    }
    let central = (1..=j).fold(1.0, |acc, i| acc * (2.0 * i as f64 - 1.0) / (2.0 * i as f64));
    Ok(central / (2.0 * j as f64 - 1.0))
}

/// `1 − Σ_{j=1}^{terms} C(2j,j)/(4^j(2j−1)) r₁^{2j}`, the truncated series for `r₂`.
pub fn series_r2(r1: f64, terms: u32) -> f64 {
    let x = r1 * r1;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for j in 1..=terms {
        pow *= x;
        sum += series_coefficient(j).expect("j ≥ 1") * pow;
    }
    1.0 - sum
}

/// `p_j(r₁)` of the radial expansion `ṙ₁ = Σ p_j(r₁)` with frozen `g`:
/// `p₀ = −K r₁^α g`, `p_j = C(2j,j)/(4^j(2j−1)) K r₁^{α+2j} g`.
pub fn series_field_term(j: u32, r1: f64, k: f64, alpha: f64, g: f64) -> f64 {
    let mag = abs_pow(r1, alpha + 2.0 * j as f64) * crate::util::sign0(r1);
    if j == 0 {
        -k * mag * g
    } else {
        series_coefficient(j).expect("j ≥ 1") * k * mag * g
    }
}

/// `c₀ = 2Kg`, `c_j = −2K C(2j,j) g / (4^j(2j−1))`.
pub fn series_rate_coefficient(j: u32, k: f64, g: f64) -> f64 {
    if j == 0 {
        2.0 * k * g
    } else {
        -2.0 * k * series_coefficient(j).expect("j ≥ 1") * g
    }
}

/// Range of `c_j(t)` along the recorded `g(t)`.
pub fn coefficient_range(traj: &Trajectory, j: u32, k: f64) -> Option<(f64, f64)> {
    traj.g
        .iter()
        .map(|&g| series_rate_coefficient(j, k, g))
        .fold(None, |acc, c| {
            Some(acc.map_or((c, c), |(lo, hi): (f64, f64)| (lo.min(c), hi.max(c))))
        })
}

/// `𝒰(r₁)` and membership in the neighborhood where `𝒰 < c₀/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodCheck {
    pub u_value: f64,
    pub inside: bool,
}

/// `𝒰 = 2Kg(1 − √(1 − r₁²))`, inside iff `𝒰 < c₀/2 = Kg`.
pub fn neighborhood_check(r1: f64, k: f64, g: f64) -> NeighborhoodCheck {
    let c0 = series_rate_coefficient(0, k, g);
    let u_value = c0 * (1.0 - Float::sqrt(1.0 - r1 * r1));
    NeighborhoodCheck {
        u_value,
        inside: u_value < c0 / 2.0,
    }
}

/// Relative-phase rates measured where the trajectory crosses `cos φ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransversalityReport {
    pub samples: usize,
    pub min_rate: f64,
    pub max_rate: f64,
    pub holds: bool,
}

/// Centered-difference `dφ/dt` at samples with `|cos φ| < cos_tol` and
/// `r₁ > r1_min`; holds when every rate lies in `[lo, hi]`.
pub fn check_transversality(traj: &Trajectory, cos_tol: f64, r1_min: f64, lo: f64, hi: f64) -> TransversalityReport {
    use core::f64::consts::{PI, TAU};
    let p = &traj.polar;
    let mut min_rate = f64::INFINITY;
    let mut max_rate = f64::NEG_INFINITY;
    let mut samples = 0;
    for i in 1..p.len().saturating_sub(1) {
        if !(Float::cos(p[i].phi).abs() < cos_tol && p[i].r1 > r1_min) {
            continue;
        }
        let mut d = p[i + 1].phi - p[i - 1].phi;
        // unwrap across the 0/2π seam
        d -= TAU * Float::round(d / TAU);
        if d.abs() > PI {
            continue;
        }
        let rate = d / (2.0 * traj.dt);
        samples += 1;
        min_rate = min_rate.min(rate);
        max_rate = max_rate.max(rate);
    }
    TransversalityReport {
        samples,
        min_rate,
        max_rate,
        holds: samples == 0 || (min_rate >= lo && max_rate <= hi),
    }
}

/// Largest `|r₁ᵃ(t) − r₁ᵇ(t)|` over the common samples, stopping at the first
/// sample where either run has `r₁ < r1_floor`. Returns the deviation and
/// the number of samples compared.
pub fn max_r1_deviation(a: &Trajectory, b: &Trajectory, r1_floor: f64) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (pa, pb) in a.polar.iter().zip(&b.polar) {
        if pa.r1 < r1_floor || pb.r1 < r1_floor {
            break;
        }
        worst = worst.max((pa.r1 - pb.r1).abs());
        n += 1;
    }
    (worst, n)
}
