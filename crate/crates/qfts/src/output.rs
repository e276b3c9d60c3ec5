//! Trajectory CSV and key=value report files.

use std::io::{self, Write};

use qfts_core::dynamics::Trajectory;
use qfts_core::qstate::bloch_angles;

/// Header row; time is in atomic units (ħ = 1).
pub const CSV_HEADER: &str = "t (a.u.),re_x1,im_x1,re_x2,im_x2,u1,V,r1,theta,phi_rel,pop_target";

/// Writes one row per sample using shortest round-trip float formatting,
/// so identical trajectories give identical bytes.
pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for i in 0..traj.len() {
        let psi = traj.states[i].amplitudes();
        let (x1, x2) = (psi[0], psi[1]);
        let theta = bloch_angles(&traj.states[i])
            .map(|(theta, _)| theta)
            .unwrap_or(f64::NAN);
        let v = traj.lyapunov[i];
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            traj.times[i],
            x1.re,
            x1.im,
            x2.re,
            x2.im,
            traj.controls[i],
            v,
            traj.polar[i].r1,
            theta,
            traj.polar[i].phi,
            1.0 - v
        )?;
    }
    w.flush()
}

/// Ordered `key=value` pairs, rendered one per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_opt(&mut self, key: impl Into<String>, value: Option<f64>) {
        match value {
            Some(v) => self.push(key, v),
            None => self.push(key, "none"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Parses text produced by the `Display` impl.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Self { entries }
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
