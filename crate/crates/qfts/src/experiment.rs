use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use qfts_core::analysis::{detect_settling, neighborhood_settling_bound, SettlingReport, NEIGHBORHOOD_EDGE};
use qfts_core::coherence::{pauli_basis, to_coherence};
use qfts_core::control::{ControlLaw, ControlParams, ControlSystem};
use qfts_core::dynamics::{
    simulate, simulate_coherence, simulate_polar, CoherenceGenerators, IntegratorConfig, Status, Trajectory,
};
use qfts_core::qstate::polar_decompose;

use crate::config::{ExperimentConfig, Representation};
use crate::error::RunError;
use crate::output::{write_csv, Report};

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trajectory: Trajectory,
    pub settling: SettlingReport,
    pub report: Report,
    pub csv_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
}

/// Integrates `cfg` in the requested representation.
pub fn simulate_config(cfg: &ExperimentConfig) -> Result<Trajectory, RunError> {
    cfg.validate()?;
    let system = ControlSystem::two_level();
    let params = ControlParams::two_level(cfg.k, cfg.alpha)?;
    let icfg = IntegratorConfig::new(cfg.dt, cfg.t_max)?;
    let psi0 = cfg.psi0.to_state()?;
    let traj = match cfg.representation {
        Representation::State => simulate(&system, &psi0, cfg.control_law, &params, &icfg)?,
        Representation::Polar => simulate_polar(&polar_decompose(&psi0)?, &params, &icfg)?,
        Representation::Coherence => {
            let basis = pauli_basis();
            let gens = CoherenceGenerators::from_system(&system, &basis)?;
            let s0 = to_coherence(&psi0, &basis)?;
            simulate_coherence(&system, &gens, &s0, cfg.control_law, &params, &icfg)?
        }
    };
    Ok(traj)
}

/// Settling report with the neighborhood bound when it applies.
pub fn settling_for(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<SettlingReport, RunError> {
    let mut settling = detect_settling(traj, cfg.eps_settle)?;
    let r1_0 = traj.polar[0].r1;
    if cfg.control_law == ControlLaw::NonSmooth && r1_0 < NEIGHBORHOOD_EDGE {
        settling = settling.with_neighborhood_bound(neighborhood_settling_bound(r1_0, cfg.c1, cfg.alpha)?);
    }
    Ok(settling)
}

fn build_report(cfg: &ExperimentConfig, traj: &Trajectory, settling: &SettlingReport) -> Report {
    let mut r = Report::new();
    r.push("law", cfg.control_law);
    r.push("k", cfg.k);
    r.push("alpha", cfg.alpha);
    r.push("psi0", cfg.psi0);
    r.push("representation", cfg.representation);
    r.push("dt", cfg.dt);
    r.push("t_max", cfg.t_max);
    r.push("samples", traj.len());
    r.push(
        "status",
        match traj.status {
            Status::Completed => "completed",
            Status::TargetReached => "target_reached",
        },
    );
    r.push_opt("settling_time", settling.settling_time);
    r.push("threshold", settling.threshold);
    r.push_opt("bound_lyapunov", settling.bound_lyapunov);
    r.push_opt("bound_neighborhood", settling.bound_neighborhood);
    r.push("satisfied", settling.satisfied);
    let v_final = traj.lyapunov.last().copied().unwrap_or(f64::NAN);
    r.push("t_final", traj.times.last().copied().unwrap_or(0.0));
    r.push("v_final", v_final);
    r.push("pop_final", 1.0 - v_final);
    r.push("max_abs_u1", traj.controls.iter().fold(0.0f64, |m, u| m.max(u.abs())));
    r.push("max_norm_drift", traj.max_norm_drift);
    r
}

/// Runs `cfg`, writes the CSV and `.report` files when an output path is
/// set, and returns the results.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let trajectory = simulate_config(cfg)?;
    let settling = settling_for(cfg, &trajectory)?;
    let report = build_report(cfg, &trajectory, &settling);

    let (mut csv_path, mut report_path) = (None, None);
    if let Some(path) = &cfg.output_path {
        let file = File::create(path).map_err(|e| RunError::io(path, e))?;
        write_csv(&trajectory, BufWriter::new(file)).map_err(|e| RunError::io(path, e))?;
        let rpath = path.with_extension("report");
        std::fs::write(&rpath, report.to_string()).map_err(|e| RunError::io(&rpath, e))?;
        csv_path = Some(path.clone());
        report_path = Some(rpath);
    }
    Ok(RunSummary {
        trajectory,
        settling,
        report,
        csv_path,
        report_path,
    })
}
