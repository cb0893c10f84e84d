//! Run configuration: a JSON document, optionally amended by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use trilevel::model::rwa_warnings;
use trilevel::{
    omegas_from_detuning, AtomConfig, Coupling, Couplings, Detunings, LatticeSearch, ModelParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Semiclassical,
    Quantum,
    Projected,
    Compare,
    Separatrix,
    Distribution,
    TransitionOrder,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Semiclassical => "semiclassical",
            Mode::Quantum => "quantum",
            Mode::Projected => "projected",
            Mode::Compare => "compare",
            Mode::Separatrix => "separatrix",
            Mode::Distribution => "distribution",
            Mode::TransitionOrder => "transition-order",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisRange {
    /// Grid values `min, min + step, …` up to `max`, rounded to 12 decimals so
    /// that `0.1 · 3` prints as `0.3`.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.min + i as f64 * self.step;
                format!("{v:.12}").parse().unwrap_or(v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeOverrides {
    pub rho_max: Option<f64>,
    pub cells_per_axis: Option<usize>,
    pub iterations: Option<usize>,
}

/// The JSON document. Every field is optional so that flags can fill gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub configuration: Option<String>,
    /// Field frequency Ω, default 1.
    pub omega: Option<f64>,
    /// Lowest level energy ω1, default 0.
    pub omega1: Option<f64>,
    /// Detuning pair keyed by the configuration's names (`d21`, `d31`, `d32`).
    pub detunings: Option<BTreeMap<String, f64>>,
    /// Explicit `[ω2, ω3]`; excludes `detunings`.
    pub omegas: Option<[f64; 2]>,
    /// Fixed coupling values keyed `mu12`, `mu13`, `mu23`.
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    /// Swept couplings, at most two.
    #[serde(default)]
    pub grid: BTreeMap<String, AxisRange>,
    /// Number of atoms, default 40.
    pub atoms: Option<usize>,
    pub lattice: Option<LatticeOverrides>,
    /// Highest excitation block scanned by the exact solver.
    pub m_cap: Option<usize>,
    /// Highest `M` tabulated in distribution mode.
    pub m_max: Option<usize>,
    /// Number of rays for separatrix and transition-order modes, default 91.
    pub rays: Option<usize>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub const DEFAULT_ATOMS: usize = 40;
pub const DEFAULT_RAYS: usize = 91;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn error(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        }
    }

    fn warning(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub mode: Mode,
    pub config: AtomConfig,
    pub base: ModelParams,
    /// Swept couplings in the configuration's active order, each with its values.
    pub axes: Vec<(Coupling, Vec<f64>)>,
    pub search: LatticeSearch,
    pub m_cap: Option<usize>,
    pub m_max: Option<usize>,
    pub rays: usize,
    pub box_max: [f64; 2],
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Plan {
    /// Grid points in row-major order, first axis outermost.
    pub fn points(&self) -> Vec<ModelParams> {
        let mut points = vec![self.base];
        for (coupling, values) in &self.axes {
            points = points
                .iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut c = p.couplings;
                        c.set(*coupling, v);
                        p.with_couplings(c)
                    })
                })
                .collect();
        }
        points
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    fn atom_config(&self, out: &mut Vec<Diagnostic>) -> Option<AtomConfig> {
        match self.configuration.as_deref() {
            None => {
                out.push(Diagnostic::error(
                    "configuration",
                    "missing; expected xi, lambda or v",
                ));
                None
            }
            Some(s) => match s.parse() {
                Ok(c) => Some(c),
                Err(e) => {
                    out.push(Diagnostic::error("configuration", e.to_string()));
                    None
                }
            },
        }
    }

    /// All violations and warnings, without running anything.
    pub fn validate(&self) -> Vec<Diagnostic> {
        match self.plan() {
            Ok((_, warnings)) => warnings,
            Err(all) => all,
        }
    }

    /// Builds the run plan, or returns every diagnostic if any is an error.
    pub fn plan(&self) -> Result<(Plan, Vec<Diagnostic>), Vec<Diagnostic>> {
        let mut out = Vec::new();
        let config = self.atom_config(&mut out);
        let omega = self.omega.unwrap_or(1.0);
        let omega1 = self.omega1.unwrap_or(0.0);
        if !(omega > 0.0 && omega.is_finite()) {
            out.push(Diagnostic::error(
                "omega",
                format!("field frequency must be positive, got {omega}"),
            ));
        }
        let atoms = self.atoms.unwrap_or(DEFAULT_ATOMS);
        if atoms == 0 {
            out.push(Diagnostic::error("atoms", "must be at least 1"));
        }
        let mut couplings = Couplings::default();
        for (key, &value) in &self.couplings {
            match key.parse::<Coupling>() {
                Ok(c) => couplings.set(c, value),
                Err(e) => out.push(Diagnostic::error(format!("couplings.{key}"), e.to_string())),
            }
        }
        let mut axes = Vec::new();
        if self.grid.len() > 2 {
            out.push(Diagnostic::error(
                "grid",
                format!("at most two swept axes, got {}", self.grid.len()),
            ));
        }
        for (key, range) in &self.grid {
            let field = format!("grid.{key}");
            let coupling = match key.parse::<Coupling>() {
                Ok(c) => c,
                Err(e) => {
                    out.push(Diagnostic::error(field, e.to_string()));
                    continue;
                }
            };
            if !(range.step > 0.0) {
                out.push(Diagnostic::error(
                    &field,
                    format!("step must be positive, got {}", range.step),
                ));
            }
            if !(range.min <= range.max) {
                out.push(Diagnostic::error(
                    &field,
                    format!("min {} exceeds max {}", range.min, range.max),
                ));
            }
            if let Some(cfg) = config {
                if coupling == cfg.forbidden_coupling() {
                    out.push(Diagnostic::error(
                        &field,
                        format!("configuration {cfg} requires {coupling} = 0"),
                    ));
                }
            }
            axes.push((coupling, *range));
        }

        let mut levels = None;
        if let Some(cfg) = config {
            let forbidden = cfg.forbidden_coupling();
            if couplings.get(forbidden) != 0.0 {
                out.push(Diagnostic::error(
                    format!("couplings.{forbidden}"),
                    format!(
                        "configuration {cfg} requires {forbidden} = 0, got {}",
                        couplings.get(forbidden)
                    ),
                ));
            }
            match (&self.detunings, &self.omegas) {
                (Some(_), Some(_)) => {
                    out.push(Diagnostic::error(
                        "detunings",
                        "give either detunings or omegas, not both",
                    ));
                }
                (None, Some([w2, w3])) => levels = Some([omega1, *w2, *w3]),
                (detunings, None) => {
                    let names = cfg.detuning_names();
                    let empty = BTreeMap::new();
                    let given = detunings.as_ref().unwrap_or(&empty);
                    for key in given.keys().filter(|k| !names.contains(&k.as_str())) {
                        out.push(Diagnostic::error(
                            format!("detunings.{key}"),
                            format!("{cfg} is parametrized by {} and {}", names[0], names[1]),
                        ));
                    }
                    let d = Detunings(
                        given.get(names[0]).copied().unwrap_or(0.0),
                        given.get(names[1]).copied().unwrap_or(0.0),
                    );
                    for w in rwa_warnings(cfg, d) {
                        out.push(Diagnostic::warning("detunings", w));
                    }
                    match omegas_from_detuning(cfg, d, omega, omega1) {
                        Ok((w2, w3)) => levels = Some([omega1, w2, w3]),
                        Err(e) => out.push(Diagnostic::error("detunings", e.to_string())),
                    }
                }
            }
        }
        if let Some([w1, w2, w3]) = levels {
            if !(w1 <= w2 && w2 <= w3) {
                out.push(Diagnostic::error(
                    "omegas",
                    format!(
                        "levels must satisfy omega1 <= omega2 <= omega3, got ({w1}, {w2}, {w3})"
                    ),
                ));
            }
        }

        let defaults = LatticeSearch::default();
        let over = self.lattice.unwrap_or_default();
        let search = LatticeSearch {
            rho_max: over.rho_max.unwrap_or(defaults.rho_max),
            cells_per_axis: over.cells_per_axis.unwrap_or(defaults.cells_per_axis),
            iterations: over.iterations.unwrap_or(defaults.iterations),
        };
        if !(search.rho_max > 0.0) {
            out.push(Diagnostic::error("lattice.rho_max", "must be positive"));
        }
        if search.cells_per_axis < 3 {
            out.push(Diagnostic::error(
                "lattice.cells_per_axis",
                "needs at least 3 cells per axis",
            ));
        }
        if search.iterations == 0 {
            out.push(Diagnostic::error(
                "lattice.iterations",
                "needs at least one iteration",
            ));
        }
        if self.threads == Some(0) {
            out.push(Diagnostic::error("threads", "must be at least 1"));
        }
        let rays = self.rays.unwrap_or(DEFAULT_RAYS);
        if rays < 2 {
            out.push(Diagnostic::error("rays", "needs at least 2 rays"));
        }
        let mode = self.mode.unwrap_or(Mode::Semiclassical);
        if mode == Mode::Distribution
            && self
                .grid
                .values()
                .map(|r| r.values().len())
                .product::<usize>()
                > 10_000
        {
            out.push(Diagnostic::warning(
                "grid",
                "distribution mode writes one row per M at every grid point",
            ));
        }

        if out.iter().any(|d| d.severity == Severity::Error) {
            return Err(out);
        }
        let config = config.expect("configuration checked above");
        let levels = levels.expect("levels checked above");
        let base = match ModelParams::new(config, omega, levels, couplings, atoms) {
            Ok(p) => p,
            Err(e) => return Err(vec![Diagnostic::error("parameters", e.to_string())]),
        };
        let active = config.active_couplings();
        axes.sort_by_key(|(c, _)| active.iter().position(|a| a == c));
        let box_max = active.map(|c| {
            axes.iter()
                .find(|(a, _)| *a == c)
                .map(|(_, r)| r.max.abs())
                .unwrap_or(3.0)
                .max(1e-12)
        });
        let axes = axes.into_iter().map(|(c, r)| (c, r.values())).collect();
        let plan = Plan {
            mode,
            config,
            base,
            axes,
            search,
            m_cap: self.m_cap,
            m_max: self.m_max,
            rays,
            box_max,
            output: self.output.clone(),
            threads: self.threads,
        };
        Ok((plan, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn well_formed_file_has_no_diagnostics() {
        let cfg = parse(
            r#"{"mode": "compare", "configuration": "xi", "detunings": {"d21": 0.0, "d32": 0.0},
                "couplings": {"mu23": 0.5}, "grid": {"mu12": {"min": 0, "max": 2, "step": 0.5}}, "atoms": 5}"#,
        );
        assert!(cfg.validate().is_empty());
        let (plan, _) = cfg.plan().unwrap();
        assert_eq!(plan.points().len(), 5);
        assert_eq!(plan.points()[4].couplings.mu12, 2.0);
        assert_eq!(plan.points()[4].couplings.mu23, 0.5);
    }

    #[test]
    fn forbidden_coupling_is_named() {
        let cfg = parse(r#"{"configuration": "lambda", "couplings": {"mu12": 0.3}}"#);
        let d = cfg.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("mu12 = 0"), "{}", d[0]);
    }

    #[test]
    fn large_detuning_only_warns() {
        let cfg = parse(r#"{"configuration": "xi", "detunings": {"d21": 1.5, "d32": 0.0}}"#);
        let d = cfg.validate();
        assert!(!d.is_empty());
        assert!(d.iter().all(|d| d.severity == Severity::Warning));
        assert!(cfg.plan().is_ok());
    }

    #[test]
    fn every_violation_is_listed() {
        let cfg = parse(
            r#"{"configuration": "v", "omega": -1, "detunings": {"d21": 0}, "omegas": [1, 2],
                "grid": {"mu12": {"min": 1, "max": 0, "step": 0}, "mu23": {"min": 0, "max": 1, "step": 0.1}}}"#,
        );
        let fields: Vec<_> = cfg.validate().into_iter().map(|d| d.field).collect();
        for f in ["omega", "grid.mu12", "grid.mu23", "detunings"] {
            assert!(fields.iter().any(|x| x == f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"configuraton": "xi"}"#)
            .unwrap_err()
            .contains("configuraton"));
    }

    #[test]
    fn rows_follow_active_order() {
        let cfg = parse(
            r#"{"configuration": "xi", "grid": {"mu23": {"min": 0, "max": 1, "step": 1},
                 "mu12": {"min": 0, "max": 0.2, "step": 0.1}}}"#,
        );
        let (plan, _) = cfg.plan().unwrap();
        let pts: Vec<_> = plan
            .points()
            .iter()
            .map(|p| (p.couplings.mu12, p.couplings.mu23))
            .collect();
        assert_eq!(
            pts,
            vec![
                (0.0, 0.0),
                (0.0, 1.0),
                (0.1, 0.0),
                (0.1, 1.0),
                (0.2, 0.0),
                (0.2, 1.0)
            ]
        );
        assert_eq!(
            AxisRange {
                min: 0.0,
                max: 3.0,
                step: 0.1
            }
            .values()[3],
            0.3
        );
    }
}
