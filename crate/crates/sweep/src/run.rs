//! Evaluation of a [`Plan`] into a [`Table`] and a [`Summary`].

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rayon::prelude::*;
use trilevel::projected::{delta_n, m_dis, projected_photon_moments};
use trilevel::quantum::{default_m_cap, global_ground, GroundResult};
use trilevel::semiclassical::{
    classify_transition, coherent_expectations, energy_gradient_mu, m_distribution, minimize,
    separatrix_margin, separatrix_normal, separatrix_on_ray, CoherentExpectations,
};
use trilevel::{AtomConfig, CriticalPoint, Error, LatticeSearch, ModelParams};

use crate::config::{Mode, Plan};
use crate::table::{Cell, Table};

/// Outcome of one grid point, ordered by severity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// The semiclassical minimum kept running into the search boundary; the
    /// best point found is reported.
    Edge,
    CapSaturated,
    Failed(String),
}

impl Status {
    pub fn label(&self) -> &str {
        match self {
            Status::Ok => "ok",
            Status::Edge => "edge",
            Status::CapSaturated => "cap_saturated",
            Status::Failed(_) => "error",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Status::CapSaturated | Status::Failed(_))
    }

    fn worst(self, other: Status) -> Status {
        self.max(other)
    }

    fn from_error(e: &Error) -> Status {
        match e {
            Error::CapSaturated { .. } => Status::CapSaturated,
            other => Status::Failed(other.to_string()),
        }
    }
}

/// Semiclassical results at one point.
#[derive(Debug, Clone)]
pub struct Semi {
    pub cp: CriticalPoint,
    pub ex: CoherentExpectations,
    pub margin: Option<f64>,
    pub gradient: [f64; 2],
    pub edge: bool,
}

pub fn semiclassical_point(
    params: &ModelParams,
    config: AtomConfig,
    search: &LatticeSearch,
) -> Result<Semi, Error> {
    let (cp, edge) = match minimize(params, config, search) {
        Ok(cp) => (cp, false),
        Err(Error::BoundaryHit { best, rho_max }) => {
            log::warn!(
                "minimum still on the edge at rho_max = {rho_max} for {:?}",
                params.couplings
            );
            (*best, true)
        }
        Err(e) => return Err(e),
    };
    let ex = coherent_expectations(&cp, params, config);
    let margin = separatrix_margin(params, config).ok();
    let gradient = energy_gradient_mu(&cp, config).map(|(_, g)| g);
    Ok(Semi {
        cp,
        ex,
        margin,
        gradient,
        edge,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proj {
    pub m_dis: usize,
    pub n_mean: f64,
    pub n_var: f64,
}

pub fn projected_point(semi: &Semi, atoms: usize, config: AtomConfig) -> Proj {
    let m = m_dis(semi.ex.m_mean);
    let (n, n2) = projected_photon_moments(&semi.cp, atoms, config, m);
    Proj {
        m_dis: m,
        n_mean: n,
        n_var: n2 - n * n,
    }
}

/// Every observable a sweep can report at one grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub couplings: [f64; 2],
    pub semi: Option<Semi>,
    pub exact: Option<GroundResult>,
    pub proj: Option<Proj>,
    pub delta_n: Option<f64>,
    pub status: Status,
}

fn evaluate(plan: &Plan, params: &ModelParams) -> SweepRow {
    let config = plan.config;
    let couplings = config.active_couplings().map(|c| params.couplings.get(c));
    let mut row = SweepRow {
        couplings,
        semi: None,
        exact: None,
        proj: None,
        delta_n: None,
        status: Status::Ok,
    };
    let semi = match semiclassical_point(params, config, &plan.search) {
        Ok(s) => s,
        Err(e) => {
            row.status = Status::from_error(&e);
            return row;
        }
    };
    if semi.edge {
        row.status = Status::Edge;
    }
    if matches!(plan.mode, Mode::Projected | Mode::Compare) {
        row.proj = Some(projected_point(&semi, params.atoms, config));
    }
    if matches!(plan.mode, Mode::Quantum | Mode::Compare) {
        let cap = plan
            .m_cap
            .unwrap_or_else(|| default_m_cap(params, config, semi.ex.m_mean / params.atoms as f64));
        match global_ground(params, config, cap) {
            Ok(g) => row.exact = Some(g),
            Err(e) => row.status = row.status.clone().worst(Status::from_error(&e)),
        }
    }
    if let (Some(p), Some(g)) = (&row.proj, &row.exact) {
        row.delta_n = Some(delta_n(p.n_mean, g.n_mean, params.atoms));
    }
    row.semi = Some(semi);
    row
}

fn parallel_map<T: Sync, R: Send>(
    threads: Option<usize>,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    let work = || items.par_iter().map(&f).collect();
    match threads {
        Some(1) => items.iter().map(&f).collect(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                log::warn!("could not start {k} worker threads ({e}); running serially");
                items.iter().map(&f).collect()
            }
        },
        None => work(),
    }
}

/// Aggregate facts printed after a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub mode: String,
    pub rows: usize,
    pub statuses: BTreeMap<String, usize>,
    /// Largest `delta_n` and the active couplings where it occurs.
    pub max_delta_n: Option<(f64, [f64; 2])>,
    pub max_m_c: Option<(f64, [f64; 2])>,
    pub min_e_c: Option<(f64, [f64; 2])>,
    /// Grid points whose exact ground state is degenerate across blocks.
    pub degenerate_points: Vec<[f64; 2]>,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }

    fn track(slot: &mut Option<(f64, [f64; 2])>, value: f64, at: [f64; 2], larger: bool) {
        let better = match slot {
            None => true,
            Some((v, _)) => (larger && value > *v) || (!larger && value < *v),
        };
        if better {
            *slot = Some((value, at));
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode {}: {} rows", self.mode, self.rows)?;
        for (status, count) in &self.statuses {
            writeln!(f, "  status {status}: {count}")?;
        }
        let show =
            |f: &mut fmt::Formatter<'_>, name: &str, slot: &Option<(f64, [f64; 2])>| match slot {
                Some((v, at)) => writeln!(f, "  {name} = {v:.6e} at ({}, {})", at[0], at[1]),
                None => Ok(()),
            };
        show(f, "max delta_n", &self.max_delta_n)?;
        show(f, "max m_c", &self.max_m_c)?;
        show(f, "min e_c", &self.min_e_c)?;
        if !self.degenerate_points.is_empty() {
            writeln!(
                f,
                "  degenerate ground states at {} points",
                self.degenerate_points.len()
            )?;
            for at in self.degenerate_points.iter().take(10) {
                writeln!(f, "    ({}, {})", at[0], at[1])?;
            }
        }
        for msg in self.failures.iter().take(10) {
            writeln!(f, "  failure: {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub summary: Summary,
}

fn header(config: AtomConfig, extra: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = config
        .active_couplings()
        .iter()
        .map(|c| c.name().to_string())
        .collect();
    h.extend(extra.iter().map(|s| s.to_string()));
    h
}

fn sweep_header(mode: Mode, config: AtomConfig) -> Vec<String> {
    let [g1, g2] = config
        .active_couplings()
        .map(|c| format!("de_d{}", c.name()));
    let semi = [
        "e_c",
        "rho2_c",
        "rho3_c",
        "r_c",
        "n_c",
        "m_c",
        "q_m",
        g1.as_str(),
        g2.as_str(),
        "separatrix_margin",
    ];
    let exact = ["e_q", "m_q", "n_q_mean", "n_q_var", "degenerate_blocks"];
    let proj = ["m_dis", "n_proj_mean", "n_proj_var"];
    let mut cols: Vec<&str> = Vec::new();
    match mode {
        Mode::Semiclassical => cols.extend(semi),
        Mode::Quantum => cols.extend(exact),
        Mode::Projected => {
            cols.extend(semi);
            cols.extend(proj);
        }
        _ => {
            cols.extend(semi);
            cols.extend(exact);
            cols.extend(proj);
            cols.push("delta_n");
        }
    }
    cols.push("status");
    header(config, &cols)
}

fn sweep_cells(mode: Mode, row: &SweepRow) -> Vec<Cell> {
    let mut cells = vec![Cell::Float(row.couplings[0]), Cell::Float(row.couplings[1])];
    let semi_cells = |cells: &mut Vec<Cell>| match &row.semi {
        Some(s) => {
            let v = s.cp.coords;
            cells.extend([
                Cell::Float(s.cp.energy),
                Cell::Float(v.rho2),
                Cell::Float(v.rho3),
                Cell::Float(v.r),
                Cell::Float(v.r * v.r),
                Cell::Float(s.ex.m_mean / (s.ex.a11 + s.ex.a22 + s.ex.a33)),
                Cell::Float(s.ex.q_m),
                Cell::Float(s.gradient[0]),
                Cell::Float(s.gradient[1]),
                Cell::opt(s.margin),
            ]);
        }
        None => cells.extend(std::iter::repeat_n(Cell::Empty, 10)),
    };
    let exact_cells = |cells: &mut Vec<Cell>| match &row.exact {
        Some(g) => {
            let degenerate = if g.is_degenerate() {
                Cell::Text(
                    g.degenerate_blocks
                        .iter()
                        .map(|m| m.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                )
            } else {
                Cell::Empty
            };
            cells.extend([
                Cell::Float(g.energy),
                Cell::Int(g.m as i64),
                Cell::Float(g.n_mean),
                Cell::Float(g.n_var),
                degenerate,
            ]);
        }
        None => cells.extend(std::iter::repeat_n(Cell::Empty, 5)),
    };
    let proj_cells = |cells: &mut Vec<Cell>| match &row.proj {
        Some(p) => cells.extend([
            Cell::Int(p.m_dis as i64),
            Cell::Float(p.n_mean),
            Cell::Float(p.n_var),
        ]),
        None => cells.extend(std::iter::repeat_n(Cell::Empty, 3)),
    };
    match mode {
        Mode::Semiclassical => semi_cells(&mut cells),
        Mode::Quantum => exact_cells(&mut cells),
        Mode::Projected => {
            semi_cells(&mut cells);
            proj_cells(&mut cells);
        }
        _ => {
            semi_cells(&mut cells);
            exact_cells(&mut cells);
            proj_cells(&mut cells);
            cells.push(Cell::opt(row.delta_n));
        }
    }
    cells.push(Cell::Text(row.status.label().to_string()));
    cells
}

/// Per-point sweep rows for the grid-based modes.
pub fn sweep_rows(plan: &Plan) -> Vec<SweepRow> {
    let points = plan.points();
    parallel_map(plan.threads, &points, |p| evaluate(plan, p))
}

fn summarize_sweep(plan: &Plan, rows: &[SweepRow], summary: &mut Summary) {
    for row in rows {
        let at = row.couplings;
        if let Some(s) = &row.semi {
            Summary::track(
                &mut summary.max_m_c,
                s.ex.m_mean / plan.base.atoms as f64,
                at,
                true,
            );
            Summary::track(&mut summary.min_e_c, s.cp.energy, at, false);
        }
        if let Some(d) = row.delta_n {
            Summary::track(&mut summary.max_delta_n, d, at, true);
        }
        if row.exact.as_ref().is_some_and(|g| g.is_degenerate()) {
            summary.degenerate_points.push(at);
        }
        if let Status::Failed(msg) = &row.status {
            summary
                .failures
                .push(format!("({}, {}): {msg}", at[0], at[1]));
        }
        if row.status == Status::CapSaturated {
            summary.failures.push(format!(
                "({}, {}): ground state in the last scanned block; raise m_cap",
                at[0], at[1]
            ));
        }
    }
}

struct RayPoint {
    angle: f64,
    at: Option<[f64; 2]>,
    status: Status,
}

fn ray_points(plan: &Plan) -> Vec<RayPoint> {
    let t_max = plan.box_max[0].hypot(plan.box_max[1]);
    (0..plan.rays)
        .map(|k| {
            let angle = FRAC_PI_2 * k as f64 / (plan.rays - 1) as f64;
            let dir = [angle.cos(), angle.sin()];
            match separatrix_on_ray(&plan.base, plan.config, [0.0, 0.0], dir, t_max) {
                Ok(Some(t)) => {
                    let at = [(t * dir[0]).max(0.0), (t * dir[1]).max(0.0)];
                    let inside = at[0] <= plan.box_max[0] * (1.0 + 1e-12)
                        && at[1] <= plan.box_max[1] * (1.0 + 1e-12);
                    RayPoint {
                        angle,
                        at: inside.then_some(at),
                        status: Status::Ok,
                    }
                }
                Ok(None) => RayPoint {
                    angle,
                    at: None,
                    status: Status::Ok,
                },
                Err(e) => RayPoint {
                    angle,
                    at: None,
                    status: Status::from_error(&e),
                },
            }
        })
        .collect()
}

fn with_active(plan: &Plan, at: [f64; 2]) -> ModelParams {
    let mut c = plan.base.couplings;
    for (which, v) in plan.config.active_couplings().into_iter().zip(at) {
        c.set(which, v);
    }
    plan.base.with_couplings(c)
}

fn run_rays(plan: &Plan, summary: &mut Summary) -> Table {
    let points = ray_points(plan);
    let classify = plan.mode == Mode::TransitionOrder;
    let extra: &[&str] = if classify {
        &["order", "derivative_jump", "status"]
    } else {
        &["status"]
    };
    let [c1, c2] = plan.config.active_couplings().map(|c| c.name().to_string());
    let mut columns = vec!["angle".to_string(), c1, c2];
    columns.extend(extra.iter().map(|s| s.to_string()));
    let mut table = Table::new(columns);
    let results = parallel_map(plan.threads, &points, |p| {
        let Some(at) = p.at else {
            return (None, p.status.clone());
        };
        if !classify {
            return (None, p.status.clone());
        }
        let params = with_active(plan, at);
        let report = separatrix_normal(&params, plan.config)
            .and_then(|dir| classify_transition(&params, plan.config, dir, &plan.search));
        match report {
            Ok(r) => (Some(r), Status::Ok),
            Err(e) => (None, Status::from_error(&e)),
        }
    });
    for (p, (report, status)) in points.iter().zip(results) {
        let mut row = vec![Cell::Float(p.angle)];
        match p.at {
            Some(at) => row.extend([Cell::Float(at[0]), Cell::Float(at[1])]),
            None => row.extend([Cell::Empty, Cell::Empty]),
        }
        if classify {
            match &report {
                Some(r) => row.extend([Cell::Int(r.order as i64), Cell::Float(r.derivative_jump)]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
        }
        let label = if p.at.is_none() && status == Status::Ok {
            "none"
        } else {
            status.label()
        };
        row.push(Cell::Text(label.to_string()));
        if let Status::Failed(msg) = &status {
            summary
                .failures
                .push(format!("ray at angle {}: {msg}", p.angle));
        }
        table.rows.push(row);
    }
    table
}

fn run_distribution(plan: &Plan, summary: &mut Summary) -> Table {
    let mut table = Table::new(header(
        plan.config,
        &["m", "probability", "m_mean", "q_m", "tail_mass", "status"],
    ));
    let points = plan.points();
    let results = parallel_map(plan.threads, &points, |p| {
        let semi = semiclassical_point(p, plan.config, &plan.search)?;
        let m_max = plan.m_max.unwrap_or_else(|| {
            (semi.ex.m_mean + 10.0 * semi.ex.m_var.max(0.0).sqrt()).ceil() as usize + 10
        });
        Ok::<_, Error>((
            semi.clone(),
            m_distribution(&semi.cp, p.atoms, plan.config, m_max),
        ))
    });
    for (p, result) in points.iter().zip(results) {
        let at = plan.config.active_couplings().map(|c| p.couplings.get(c));
        match result {
            Ok((semi, dist)) => {
                let status = if semi.edge { Status::Edge } else { Status::Ok };
                for (m, prob) in dist.probs.iter().enumerate() {
                    table.rows.push(vec![
                        Cell::Float(at[0]),
                        Cell::Float(at[1]),
                        Cell::Int(m as i64),
                        Cell::Float(*prob),
                        Cell::Float(semi.ex.m_mean),
                        Cell::Float(semi.ex.q_m),
                        Cell::Float(dist.tail_mass),
                        Cell::Text(status.label().to_string()),
                    ]);
                }
            }
            Err(e) => {
                let status = Status::from_error(&e);
                summary
                    .failures
                    .push(format!("({}, {}): {e}", at[0], at[1]));
                let mut row = vec![Cell::Float(at[0]), Cell::Float(at[1])];
                row.extend(std::iter::repeat_n(Cell::Empty, 5));
                row.push(Cell::Text(status.label().to_string()));
                table.rows.push(row);
            }
        }
    }
    table
}

/// Runs the whole plan. Row order is the grid order regardless of threading.
pub fn run(plan: &Plan) -> Outcome {
    let mut summary = Summary {
        mode: plan.mode.name().to_string(),
        ..Default::default()
    };
    let table = match plan.mode {
        Mode::Separatrix | Mode::TransitionOrder => run_rays(plan, &mut summary),
        Mode::Distribution => run_distribution(plan, &mut summary),
        mode => {
            let rows = sweep_rows(plan);
            summarize_sweep(plan, &rows, &mut summary);
            let mut table = Table::new(sweep_header(mode, plan.config));
            table.rows = rows.iter().map(|r| sweep_cells(mode, r)).collect();
            table
        }
    };
    summary.rows = table.rows.len();
    if let Some(k) = table.column("status") {
        for row in &table.rows {
            if let Cell::Text(s) = &row[k] {
                *summary.statuses.entry(s.clone()).or_default() += 1;
            }
        }
    }
    Outcome { table, summary }
}
