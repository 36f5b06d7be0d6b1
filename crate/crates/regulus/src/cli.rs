//! Configuration and data plumbing for the command-line front end: effective
//! run configuration (defaults < config file < flags), state and parameter
//! parsing, and CSV/JSON export.

use crate::billiards::{BilliardOrbit, WallSurface};
use crate::error::{RegulusError, Result};
use crate::systems::{conserved_set, IntegrateOpts, SystemKind, SystemSpec, Trajectory};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Effective configuration of one CLI invocation. Precedence: command-line
/// flags override config-file keys override defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub integrator: IntegrateOpts,
    /// System parameters: f, m, m1, m2, m0, C (initial `P_κ` for default
    /// reduced states), exclusion.
    pub params: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: 42, integrator: IntegrateOpts::default(), params: BTreeMap::new() }
    }
}

impl RunConfig {
    /// Merge a config file (JSON) over the defaults.
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RegulusError::Usage(format!("config '{path}': {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| RegulusError::Usage(format!("config '{path}': {e}")))
    }

    /// Apply `REGULUS_SEED` unless the seed was set explicitly elsewhere.
    pub fn seed_from_env(&mut self) {
        if let Ok(s) = std::env::var("REGULUS_SEED") {
            if let Ok(v) = s.parse::<u64>() {
                self.seed = v;
            }
        }
    }

    /// Fold `--params k=v,...` over the config.
    pub fn apply_params(&mut self, spec: &str) -> Result<()> {
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| RegulusError::Usage(format!("params: expected key=value in '{part}'")))?;
            let key = k.trim();
            if !matches!(key, "f" | "m" | "m1" | "m2" | "m0" | "C" | "exclusion") {
                return Err(RegulusError::Usage(format!("params: unknown key '{key}'")));
            }
            let val: f64 = v
                .trim()
                .parse()
                .map_err(|_| RegulusError::Usage(format!("params: '{key}' is not a number")))?;
            self.params.insert(key.to_string(), val);
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or(0.0)
    }

    /// Build the system descriptor for a kind from the configured parameters.
    pub fn system_spec(&self, kind: SystemKind) -> Result<SystemSpec> {
        let mut spec = SystemSpec::new(kind);
        spec.f = self.param("f");
        spec.m = self.param("m");
        spec.m1 = self.param("m1");
        spec.m2 = self.param("m2");
        spec.m0 = self.param("m0");
        if let Some(&e) = self.params.get("exclusion") {
            if e.is_nan() || e <= 0.0 {
                return Err(RegulusError::Usage("exclusion must be positive".into()));
            }
            spec.exclusion = e;
        }
        if matches!(kind, SystemKind::Kepler3 | SystemKind::Kepler3Reparam) && spec.m == 0.0 {
            return Err(RegulusError::Usage(
                "Kepler systems need m ≠ 0 (attractive dynamics means m < 0)".into(),
            ));
        }
        Ok(spec)
    }
}

/// Read `--in`-style arguments: inline JSON, or `@path` / a readable path.
pub fn read_input(arg: &str) -> Result<String> {
    let trimmed = arg.trim();
    if let Some(path) = trimmed.strip_prefix('@') {
        return std::fs::read_to_string(path)
            .map_err(|e| RegulusError::Usage(format!("input '{path}': {e}")));
    }
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(trimmed.to_string());
    }
    std::fs::read_to_string(trimmed)
        .map_err(|e| RegulusError::Usage(format!("input '{trimmed}': {e}")))
}

/// Parse a packed state for the given system kind from JSON.
pub fn parse_state(kind: SystemKind, json: &str) -> Result<Vec<f64>> {
    let bad = |e: String| RegulusError::Usage(format!("state: {e}"));
    match kind {
        SystemKind::Hooke4 | SystemKind::TwoCenterTransformed => {
            #[derive(Deserialize)]
            struct S {
                z: [f64; 4],
                w: [f64; 4],
            }
            let s: S = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
            Ok(s.z.iter().chain(s.w.iter()).copied().collect())
        }
        SystemKind::KtildeSpherical => {
            #[derive(Deserialize)]
            struct S {
                r: f64,
                psi: f64,
                #[serde(default)]
                kappa: f64,
                #[serde(default)]
                p_r: f64,
                #[serde(default)]
                p_psi: f64,
                #[serde(default)]
                p_kappa: f64,
            }
            let s: S = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
            Ok(vec![s.r, s.psi, s.kappa, s.p_r, s.p_psi, s.p_kappa])
        }
        _ => {
            #[derive(Deserialize)]
            struct S {
                #[serde(rename = "Q", alias = "x")]
                q: [f64; 3],
                #[serde(rename = "P", alias = "y")]
                p: [f64; 3],
            }
            let s: S = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
            Ok(s.q.iter().chain(s.p.iter()).copied().collect())
        }
    }
}

/// A documented default initial state per system kind, used when `--state`
/// is omitted. `c` sets `P_κ` for the reduced system.
pub fn default_state(kind: SystemKind, c: f64) -> Vec<f64> {
    match kind {
        SystemKind::Hooke4 | SystemKind::TwoCenterTransformed => {
            vec![0.8, 0.2, 0.3, 0.0, 0.0, 0.4, 1.2, 0.5]
        }
        SystemKind::Kepler3 | SystemKind::Kepler3Reparam => {
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.1]
        }
        SystemKind::TwoCenter3 | SystemKind::Lagrange3 => {
            vec![0.4, 1.2, 0.0, 0.3, 0.0, 0.45]
        }
        SystemKind::KtildeSpherical => vec![1.6, 1.8, 0.0, 0.4, 0.25, c],
    }
}

/// Full-precision, locale-independent number formatting (17 significant
/// digits) for CSV output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV export of a trajectory: `t`, state components, conserved quantities.
pub fn trajectory_csv(spec: &SystemSpec, traj: &Trajectory) -> String {
    let mut out = String::from("# regulus-csv v1\n");
    let conserved = conserved_set(spec);
    let mut header = vec!["t".to_string()];
    header.extend(spec.kind.state_labels().iter().map(|s| s.to_string()));
    header.extend(conserved.iter().map(|c| c.name.to_string()));
    out.push_str(&header.join(","));
    out.push('\n');
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(y.iter().map(|v| fmt_f64(*v)));
        for c in &conserved {
            row.push(fmt_f64(c.eval(spec, y).unwrap_or(f64::NAN)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// JSON export of a trajectory.
pub fn trajectory_json(spec: &SystemSpec, traj: &Trajectory) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        system: &'a SystemSpec,
        labels: Vec<&'static str>,
        times: &'a [f64],
        states: &'a [Vec<f64>],
        steps: usize,
        rejected_steps: usize,
        max_energy_drift: f64,
    }
    serde_json::to_string_pretty(&Out {
        system: spec,
        labels: spec.kind.state_labels(),
        times: &traj.times,
        states: &traj.states,
        steps: traj.stats.steps,
        rejected_steps: traj.stats.rejected,
        max_energy_drift: traj.stats.max_energy_drift,
    })
    .expect("trajectory serializes")
}

/// CSV export of a billiard orbit's arc samples (with an `arc` column).
pub fn orbit_csv(spec: &SystemSpec, orbit: &BilliardOrbit) -> String {
    let mut out = String::from("# regulus-csv v1\n");
    let conserved = conserved_set(spec);
    let mut header = vec!["arc".to_string(), "t".to_string()];
    header.extend(spec.kind.state_labels().iter().map(|s| s.to_string()));
    header.extend(conserved.iter().map(|c| c.name.to_string()));
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, arc) in orbit.arcs.iter().enumerate() {
        for (t, y) in arc.times.iter().zip(&arc.states) {
            let mut row = vec![k.to_string(), fmt_f64(*t)];
            row.extend(y.iter().map(|v| fmt_f64(*v)));
            for c in &conserved {
                row.push(fmt_f64(c.eval(spec, y).unwrap_or(f64::NAN)));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

/// CSV export of a billiard orbit's reflection-event table.
pub fn events_csv(spec: &SystemSpec, orbit: &BilliardOrbit) -> String {
    let mut out = String::from("# regulus-csv v1\n");
    let labels = spec.kind.state_labels();
    let n = labels.len() / 2;
    let mut header = vec!["event".to_string(), "t".to_string(), "wall".to_string()];
    for l in &labels[..n] {
        header.push(l.to_string());
    }
    for tag in ["v_in", "v_out", "normal"] {
        for k in 0..n {
            header.push(format!("{tag}{}", k + 1));
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, ev) in orbit.events.iter().enumerate() {
        let mut row = vec![k.to_string(), fmt_f64(ev.t), ev.wall.to_string()];
        row.extend(ev.y_in[..n].iter().map(|v| fmt_f64(*v)));
        row.extend(ev.v_in.iter().map(|v| fmt_f64(*v)));
        row.extend(ev.v_out.iter().map(|v| fmt_f64(*v)));
        row.extend(ev.normal.iter().map(|v| fmt_f64(*v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse `--tspan a,b`.
pub fn parse_tspan(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| RegulusError::Usage("tspan: expected 'a,b'".into()))?;
    let a: f64 = a.trim().parse().map_err(|_| RegulusError::Usage("tspan: bad start".into()))?;
    let b: f64 = b.trim().parse().map_err(|_| RegulusError::Usage("tspan: bad end".into()))?;
    if b.is_nan() || a.is_nan() || b <= a {
        return Err(RegulusError::Usage("tspan must be increasing".into()));
    }
    Ok((a, b))
}

/// Parse wall arguments into surfaces.
pub fn parse_walls(args: &[String]) -> Result<Vec<WallSurface>> {
    args.iter().map(|w| crate::billiards::parse_wall_shorthand(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        let mut cfg = RunConfig::default();
        cfg.apply_params("f=0.5,m1=-1,C=0.3").unwrap();
        assert_eq!(cfg.param("f"), 0.5);
        assert_eq!(cfg.param("C"), 0.3);
        assert!(cfg.apply_params("nope=1").is_err());
        assert!(cfg.apply_params("f=x").is_err());
        assert!(cfg.apply_params("f").is_err());
    }

    #[test]
    fn kepler_requires_nonzero_m() {
        let cfg = RunConfig::default();
        assert!(matches!(
            cfg.system_spec(SystemKind::Kepler3),
            Err(RegulusError::Usage(_))
        ));
    }

    #[test]
    fn state_parsing_round_trip() {
        let y = parse_state(SystemKind::Hooke4, r#"{"z":[1,0,0,0],"w":[0,0,2,0]}"#).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
        let y = parse_state(SystemKind::Kepler3, r#"{"Q":[1,0,0],"P":[0,1,0]}"#).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let y = parse_state(SystemKind::KtildeSpherical, r#"{"r":1.5,"psi":1.2,"p_kappa":0.3}"#)
            .unwrap();
        assert_eq!(y[0], 1.5);
        assert_eq!(y[5], 0.3);
        assert!(parse_state(SystemKind::Hooke4, "{}").is_err());
    }

    #[test]
    fn csv_has_version_header_and_full_precision() {
        let spec = SystemSpec::hooke4(0.5, -1.0);
        let traj = Trajectory {
            times: vec![0.0],
            states: vec![vec![1.0 / 3.0; 8]],
            stats: Default::default(),
        };
        let csv = trajectory_csv(&spec, &traj);
        assert!(csv.starts_with("# regulus-csv v1\n"));
        assert!(csv.contains("3.3333333333333331e-1"));
        assert!(csv.lines().nth(1).unwrap().starts_with("t,z0,z1"));
    }
}
