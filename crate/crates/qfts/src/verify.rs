//! Self-checks of the simulation pipeline against closed forms and
//! structural properties.

use std::fmt;

use qfts_core::analysis::{
    check_lyapunov_criterion_by, comparison_check, comparison_check_time_varying, estimate_homogeneity_degree,
    homogeneity_sandwich_check, homogeneous_finite_time_certificate, max_r1_deviation, neighborhood_check,
    series_field_term, series_rate_coefficient, DilationSpec, NEIGHBORHOOD_EDGE,
};
use qfts_core::control::ControlLaw;
use qfts_core::dynamics::{scalar_closed_form, scalar_simulate, IntegratorConfig, ScalarPrototype, Trajectory};

use crate::config::{ExperimentConfig, InitialState, Representation};
use crate::error::RunError;
use crate::experiment::simulate_config;

/// Step size and horizon shared by every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub dt: f64,
    pub t_max: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { dt: 1e-4, t_max: 15.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub items: Vec<CheckItem>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|c| c.passed)
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.items.push(CheckItem { name, passed, detail });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.items {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const SCALAR_GAINS: [f64; 3] = [1.0, 0.5, 2.0];
pub const SCALAR_EXPONENTS: [f64; 3] = [1.0 / 3.0, 0.5, 2.0 / 3.0];
pub const SCALAR_STARTS: [f64; 3] = [-1.0, 0.3, 1.0];

fn scalar_oracle(opts: &VerifyOptions, out: &mut VerifyReport) -> Result<(), RunError> {
    let cfg = IntegratorConfig::new(opts.dt, 3.0)?;
    let mut worst = 0.0f64;
    let mut envelope_ok = true;
    for k in SCALAR_GAINS {
        for alpha in SCALAR_EXPONENTS {
            for y0 in SCALAR_STARTS {
                let proto = ScalarPrototype::new(k, alpha, y0)?;
                let tr = scalar_simulate(&proto, &cfg)?;
                for (t, y) in tr.times.iter().zip(&tr.values) {
                    worst = worst.max((y - scalar_closed_form(&proto, *t)).abs());
                }
                if y0 > 0.0 {
                    envelope_ok &= comparison_check(&tr, &proto)?.holds;
                }
            }
        }
    }
    out.push(
        "scalar-oracle",
        worst < 1e-4 && envelope_ok,
        format!("max |y - closed form| = {worst:.3e} over 27 cases (limit 1e-4), envelope holds = {envelope_ok}"),
    );
    Ok(())
}

fn half_run(opts: &VerifyOptions, representation: Representation) -> Result<Trajectory, RunError> {
    simulate_config(&ExperimentConfig {
        control_law: ControlLaw::NonSmooth,
        psi0: InitialState::Half,
        dt: opts.dt,
        t_max: opts.t_max,
        representation,
        ..Default::default()
    })
}

fn representation_agreement(state: &Trajectory, opts: &VerifyOptions, out: &mut VerifyReport) -> Result<(), RunError> {
    let polar = half_run(opts, Representation::Polar)?;
    let coherence = half_run(opts, Representation::Coherence)?;
    let (dp, np) = max_r1_deviation(state, &polar, 1e-3);
    let (dc, nc) = max_r1_deviation(state, &coherence, 1e-3);
    out.push(
        "representation-agreement",
        dp.max(dc) <= 1e-6 && np > 1 && nc > 1,
        format!("max |r1 difference| polar = {dp:.3e}, coherence = {dc:.3e} (limit 1e-6)"),
    );
    Ok(())
}

fn homogeneity(out: &mut VerifyReport) -> Result<(), RunError> {
    let cfg = ExperimentConfig::default();
    let (k, alpha, g) = (cfg.k, cfg.alpha, 0.5);
    let d = DilationSpec::standard(1);
    let samples: Vec<Vec<f64>> = (1..=9).map(|i| vec![i as f64 / 10.0]).collect();
    let eps = [0.5, 2.0, 10.0];

    let mut worst = 0.0f64;
    let mut degrees = Vec::new();
    for j in 0..=3u32 {
        let est = estimate_homogeneity_degree(|r| vec![series_field_term(j, r[0], k, alpha, g)], &d, &samples, &eps)?;
        worst = worst.max((est.degree - (alpha + 2.0 * j as f64 - 1.0)).abs());
        degrees.push(est.degree);
    }
    let certified = homogeneous_finite_time_certificate(degrees[0], true);
    let v2 = |r: &[f64]| -2.0 * r[0] * series_field_term(0, r[0], k, alpha, g);
    let sandwich = homogeneity_sandwich_check(|r| r[0] * r[0], v2, 2.0, alpha + 1.0, &d, &samples)?;
    let tight = (sandwich.level_min - series_rate_coefficient(0, k, g)).abs() < 1e-12;
    out.push(
        "homogeneity",
        worst < 1e-9 && certified && sandwich.holds && tight,
        format!(
            "degree p0 = {:.10}, p1..p3 = {:.10}, {:.10}, {:.10}; certificate = {certified}, sandwich = {}",
            degrees[0], degrees[1], degrees[2], degrees[3], sandwich.holds
        ),
    );
    Ok(())
}

fn neighborhood(out: &mut VerifyReport) {
    let n = 10_000;
    let mismatches = (0..n)
        .map(|i| i as f64 / (n - 1) as f64)
        .filter(|&r1| neighborhood_check(r1, 0.5, 1.0).inside != (r1 < NEIGHBORHOOD_EDGE))
        .count();
    out.push(
        "neighborhood",
        mismatches == 0,
        format!("{mismatches} disagreements with r1 < sqrt(3)/2 on a {n}-point grid"),
    );
}

fn lyapunov_criterion(state: &Trajectory, out: &mut VerifyReport) -> Result<(), RunError> {
    let cfg = ExperimentConfig::default();
    let beta = (cfg.alpha + 1.0) / 2.0;
    let check = check_lyapunov_criterion_by(
        state,
        |i| cfg.k * state.g[i],
        beta,
        |i| state.polar[i].r1 < NEIGHBORHOOD_EDGE,
    )?;
    let rates: Vec<f64> = state.g.iter().map(|g| cfg.k * g).collect();
    let cmp = comparison_check_time_varying(state, &rates, beta)?;
    out.push(
        "lyapunov-criterion",
        check.holds && cmp.holds,
        format!(
            "max excess of dV/dt + K g V^((1+alpha)/2) = {:.3e} over {} samples, envelope excess = {:.3e}",
            check.max_violation, check.checked, cmp.max_excess
        ),
    );
    Ok(())
}

/// Runs every check; numeric failures inside a check are errors, failed
/// tolerances are recorded in the report.
pub fn run_verification_suite(opts: &VerifyOptions) -> Result<VerifyReport, RunError> {
    let mut out = VerifyReport::default();
    scalar_oracle(opts, &mut out)?;
    let state = half_run(opts, Representation::State)?;
    representation_agreement(&state, opts, &mut out)?;
    homogeneity(&mut out)?;
    neighborhood(&mut out);
    lyapunov_criterion(&state, &mut out)?;
    Ok(out)
}
