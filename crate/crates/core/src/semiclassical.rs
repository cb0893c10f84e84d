//! Coherent-state energy surface and its minimum.
//!
//! The trial state is a Glauber coherent state for the field times an
//! atomic product state with amplitudes `(1, ϱ3, ϱ2)` on levels 1, 2, 3.
//! After the phases are minimized out, the energy per particle depends on
//! `(r, ϱ2, ϱ3)` with `r = ρ/√Na`, and `r` is eliminated in closed form.

use crate::error::Error;
use crate::model::{AtomConfig, Coupling, ModelParams};
use crate::projected;

/// Energy ties closer than this resolve to the lexicographically smallest `(ϱ2, ϱ3)`.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Step along the crossing direction used by [`classify_transition`].
pub const CLASSIFY_STEP: f64 = 1e-3;
/// A derivative jump above this marks a first-order transition.
pub const JUMP_THRESHOLD: f64 = 1e-2;
/// How far from zero a separatrix margin may be for [`classify_transition`].
pub const ON_SEPARATRIX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VariationalCoords {
    /// Scaled field amplitude `ρ/√Na`.
    pub r: f64,
    pub rho2: f64,
    pub rho3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Lattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub coords: VariationalCoords,
    /// Energy per particle `E^c`.
    pub energy: f64,
    pub provenance: Provenance,
}

impl CriticalPoint {
    /// True at the normal point `ϱ2 = ϱ3 = 0`.
    pub fn is_normal(&self) -> bool {
        self.coords.rho2 == 0.0 && self.coords.rho3 == 0.0
    }
}

/// Settings of the iterated lattice search over `[0, rho_max]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSearch {
    pub rho_max: f64,
    pub cells_per_axis: usize,
    pub iterations: usize,
}

impl Default for LatticeSearch {
    fn default() -> Self {
        Self { rho_max: 10.0, cells_per_axis: 9, iterations: 12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentExpectations {
    pub a11: f64,
    pub a22: f64,
    pub a33: f64,
    pub n_mean: f64,
    pub m_mean: f64,
    pub m_var: f64,
    pub q_m: f64,
    /// Mandel parameter of the photon number; zero for a coherent field.
    pub q_photon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    /// Active couplings at the crossing, in the order of `AtomConfig::active_couplings`.
    pub location: [f64; 2],
    pub order: u8,
    pub derivative_jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MDistribution {
    /// `P(M)` for `M = 0..=m_max`.
    pub probs: Vec<f64>,
    /// Probability carried by `M > m_max`.
    pub tail_mass: f64,
}

impl MDistribution {
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs.iter().enumerate().map(|(m, p)| (m as f64 - mean).powi(2) * p).sum()
    }

    /// Mandel parameter of the tabulated distribution; 0 when the mean vanishes.
    pub fn mandel(&self) -> f64 {
        let mean = self.mean();
        if mean == 0.0 {
            0.0
        } else {
            (self.variance() - mean) / mean
        }
    }
}

fn denominator(rho2: f64, rho3: f64) -> f64 {
    1.0 + rho2 * rho2 + rho3 * rho3
}

fn level_average(params: &ModelParams, rho2: f64, rho3: f64) -> f64 {
    let [w1, w2, w3] = params.levels;
    (w1 + w2 * rho3 * rho3 + w3 * rho2 * rho2) / denominator(rho2, rho3)
}

fn coupling_sum(params: &ModelParams, rho2: f64, rho3: f64) -> f64 {
    let c = params.couplings.abs();
    c.mu12 * rho3 + c.mu13 * rho2 + c.mu23 * rho2 * rho3
}

pub fn energy_per_particle(params: &ModelParams, v: VariationalCoords) -> f64 {
    let d = denominator(v.rho2, v.rho3);
    params.omega * v.r * v.r + level_average(params, v.rho2, v.rho3)
        - 2.0 * v.r * coupling_sum(params, v.rho2, v.rho3) / d
}

/// Field amplitude that minimizes the energy at fixed matter coordinates.
pub fn critical_field_amplitude(params: &ModelParams, rho2: f64, rho3: f64) -> f64 {
    coupling_sum(params, rho2, rho3) / (params.omega * denominator(rho2, rho3))
}

/// Energy per particle with `r` set to its optimum.
pub fn reduced_energy(params: &ModelParams, rho2: f64, rho3: f64) -> f64 {
    let d = denominator(rho2, rho3);
    let c = coupling_sum(params, rho2, rho3);
    level_average(params, rho2, rho3) - c * c / (params.omega * d * d)
}

fn critical_point(params: &ModelParams, rho2: f64, rho3: f64, provenance: Provenance) -> CriticalPoint {
    let r = critical_field_amplitude(params, rho2, rho3);
    CriticalPoint {
        coords: VariationalCoords { r, rho2, rho3 },
        energy: reduced_energy(params, rho2, rho3),
        provenance,
    }
}

/// The normal point, where the field is empty and every atom sits in level 1.
pub fn normal_point(params: &ModelParams) -> CriticalPoint {
    critical_point(params, 0.0, 0.0, Provenance::Lattice)
}

/// Scan of one rectangular window. Returns `(rho2, rho3, energy)` of the best
/// cell centre; rows are scanned in lexicographic order and only a strict
/// improvement beyond the tie tolerance replaces the incumbent.
/// Lowest cell centre on a `cells × cells` lattice, with its indices.
/// Cells are scanned in lexicographic `(ϱ2, ϱ3)` order and only a strictly
/// lower energy replaces the incumbent.
fn best_cell(params: &ModelParams, lo: [f64; 2], side: f64, cells: usize) -> (f64, f64, f64, [usize; 2]) {
    let h = side / cells as f64;
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY, [0, 0]);
    for i in 0..cells {
        let x = lo[0] + (i as f64 + 0.5) * h;
        for j in 0..cells {
            let y = lo[1] + (j as f64 + 0.5) * h;
            let e = reduced_energy(params, x, y);
            if e < best.2 {
                best = (x, y, e, [i, j]);
            }
        }
    }
    best
}

/// Most window slides allowed per refinement level.
const MAX_SLIDES: usize = 64;

/// Refines from one cell of the initial lattice.
fn refine(params: &ModelParams, search: &LatticeSearch, start: (f64, f64, f64, [usize; 2])) -> (f64, f64, f64) {
    let cells = search.cells_per_axis;
    let mut lo = [0.0, 0.0];
    let mut side = search.rho_max;
    let mut best = start;
    for _ in 1..search.iterations {
        let h = side / cells as f64;
        let window = 3.0 * h;
        for (axis, centre) in [best.0, best.1].into_iter().enumerate() {
            lo[axis] = (centre - 1.5 * h).clamp(0.0, search.rho_max - window);
        }
        side = window;
        best = best_cell(params, lo, side, cells);
        // A minimum on the window border may lie outside it (long shallow
        // valleys); slide the window at the same scale before shrinking.
        for _ in 0..MAX_SLIDES {
            let on_border = (0..2).any(|axis| {
                let k = best.3[axis];
                (k == 0 && lo[axis] > 0.0) || (k == cells - 1 && lo[axis] + side < search.rho_max)
            });
            if !on_border {
                break;
            }
            let previous = best.2;
            for (axis, centre) in [best.0, best.1].into_iter().enumerate() {
                lo[axis] = (centre - 0.5 * side).clamp(0.0, search.rho_max - side);
            }
            let moved = best_cell(params, lo, side, cells);
            if moved.2 >= previous {
                break;
            }
            best = moved;
        }
    }
    (best.0, best.1, best.2)
}

/// Refines from every cell of the initial lattice and keeps the lowest.
///
/// Shallow basins close to the degenerate-level valleys are often invisible
/// on the initial lattice, so following only its best cell can miss them.
fn lattice_once(params: &ModelParams, search: &LatticeSearch) -> (f64, f64, f64) {
    let cells = search.cells_per_axis;
    let h = search.rho_max / cells as f64;
    let centre = |k: usize| (k as f64 + 0.5) * h;
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for i in 0..cells {
        for j in 0..cells {
            let (x, y) = (centre(i), centre(j));
            let refined = refine(params, search, (x, y, reduced_energy(params, x, y), [i, j]));
            if refined.2 < best.2 - TIE_TOLERANCE {
                best = refined;
            }
        }
    }
    polish(params, best)
}

fn energy_gradient(params: &ModelParams, rho2: f64, rho3: f64) -> [f64; 2] {
    let [_, w2, w3] = params.levels;
    let c = params.couplings.abs();
    let d = denominator(rho2, rho3);
    let w = level_average(params, rho2, rho3);
    let s = coupling_sum(params, rho2, rho3);
    let dd = [2.0 * rho2, 2.0 * rho3];
    let dnum = [2.0 * w3 * rho2, 2.0 * w2 * rho3];
    let ds = [c.mu13 + c.mu23 * rho3, c.mu12 + c.mu23 * rho2];
    let mut g = [0.0; 2];
    for k in 0..2 {
        let dw = (dnum[k] - w * dd[k]) / d;
        g[k] = dw - (2.0 * s * ds[k] / (d * d) - 2.0 * s * s * dd[k] / (d * d * d)) / params.omega;
    }
    g
}

const POLISH_STEPS: usize = 50;

/// Damped Newton steps from the lattice minimum. The lattice resolves the
/// energy well but not the position along flat valleys; a step is kept only
/// if it lowers the energy.
fn polish(params: &ModelParams, start: (f64, f64, f64)) -> (f64, f64, f64) {
    let (mut x, mut y, mut e) = start;
    if !e.is_finite() {
        return start;
    }
    for _ in 0..POLISH_STEPS {
        let g = energy_gradient(params, x, y);
        let hx = 1e-6 * (1.0 + x);
        let hy = 1e-6 * (1.0 + y);
        let gx = [energy_gradient(params, x + hx, y), energy_gradient(params, (x - hx).max(0.0), y)];
        let gy = [energy_gradient(params, x, y + hy), energy_gradient(params, x, (y - hy).max(0.0))];
        let hxx = (gx[0][0] - gx[1][0]) / (x + hx - (x - hx).max(0.0));
        let hyy = (gy[0][1] - gy[1][1]) / (y + hy - (y - hy).max(0.0));
        let hxy = 0.5 * ((gx[0][1] - gx[1][1]) / (x + hx - (x - hx).max(0.0)) + (gy[0][0] - gy[1][0]) / (y + hy - (y - hy).max(0.0)));
        let det = hxx * hyy - hxy * hxy;
        let mut step = if hxx > 0.0 && det > 0.0 {
            [-(hyy * g[0] - hxy * g[1]) / det, -(hxx * g[1] - hxy * g[0]) / det]
        } else {
            [-g[0], -g[1]]
        };
        let mut moved = false;
        for _ in 0..30 {
            let (nx, ny) = ((x + step[0]).max(0.0), (y + step[1]).max(0.0));
            let ne = reduced_energy(params, nx, ny);
            if ne < e {
                let size = (nx - x).abs().max((ny - y).abs());
                (x, y, e) = (nx, ny, ne);
                moved = size > 1e-15 * (1.0 + x.max(y));
                break;
            }
            step = [0.5 * step[0], 0.5 * step[1]];
        }
        if !moved {
            break;
        }
    }
    (x, y, e)
}

/// Iterated lattice refinement of [`reduced_energy`] over `[0, rho_max]²`.
///
/// The normal point is always a candidate and wins ties. If the refined
/// minimum lies within one initial cell of the outer edge, the square is
/// doubled, at most four times; after that [`Error::BoundaryHit`] carries
/// the best point found.
pub fn minimize_lattice(params: &ModelParams, search: &LatticeSearch) -> Result<CriticalPoint, Error> {
    if !(search.rho_max > 0.0) || search.cells_per_axis < 3 || search.iterations < 1 {
        return Err(Error::InvalidParameters(format!(
            "lattice search needs rho_max > 0, at least 3 cells per axis and one iteration, got {search:?}"
        )));
    }
    let normal = normal_point(params);
    let mut current = *search;
    let mut best = normal.clone();
    for doubling in 0..=4 {
        if doubling > 0 {
            current.rho_max *= 2.0;
            log::debug!("lattice minimum on the edge; enlarging to rho_max = {}", current.rho_max);
        }
        let (x, y, e) = lattice_once(params, &current);
        if e >= normal.energy - TIE_TOLERANCE {
            return Ok(normal);
        }
        best = critical_point(params, x, y, Provenance::Lattice);
        let edge = current.rho_max - current.rho_max / current.cells_per_axis as f64;
        if x < edge && y < edge {
            return Ok(best);
        }
    }
    Err(Error::BoundaryHit { rho_max: current.rho_max, best: Box::new(best) })
}

/// Best available minimizer: the closed form where one exists, otherwise the lattice.
pub fn minimize(params: &ModelParams, config: AtomConfig, search: &LatticeSearch) -> Result<CriticalPoint, Error> {
    match analytic_critical(params, config) {
        Some(cp) => Ok(cp),
        None => minimize_lattice(params, search),
    }
}

/// Closed-form minimum for Λ with `ω1 = ω2` and V with `ω2 = ω3`.
///
/// In both cases the two coupled levels combine into one bright level and the
/// problem reduces to a two-level one with coupling `√S`, `S` the sum of the
/// squared couplings. Returns `None` for Ξ, unequal detunings, and Λ with
/// `μ13 = 0` (the minimum then sits at `ϱ3 → ∞`).
pub fn analytic_critical(params: &ModelParams, config: AtomConfig) -> Option<CriticalPoint> {
    let c = params.couplings.abs();
    let omega = params.omega;
    let (s, gap) = match config {
        AtomConfig::Xi => return None,
        AtomConfig::Lambda if params.bohr(2, 1).abs() <= 1e-12 => (c.mu13 * c.mu13 + c.mu23 * c.mu23, params.bohr(3, 1)),
        AtomConfig::V if params.bohr(3, 2).abs() <= 1e-12 => (c.mu12 * c.mu12 + c.mu13 * c.mu13, params.bohr(2, 1)),
        _ => return None,
    };
    let analytic = |rho2: f64, rho3: f64| critical_point(params, rho2, rho3, Provenance::Analytic);
    if s <= omega * gap {
        return Some(analytic(0.0, 0.0));
    }
    let excited = (s - omega * gap) / (s + omega * gap);
    let (rho2, rho3) = match config {
        AtomConfig::Lambda => {
            if c.mu13 == 0.0 {
                return None;
            }
            let rho3 = c.mu23 / c.mu13;
            ((excited * (1.0 + rho3 * rho3)).sqrt(), rho3)
        }
        _ => {
            let t = (excited / s).sqrt();
            (t * c.mu13, t * c.mu12)
        }
    };
    let mut cp = analytic(rho2, rho3);
    cp.energy = params.levels[0] - (s - omega * gap).powi(2) / (4.0 * omega * s);
    Some(cp)
}

fn theta(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Signed distance-like margin from the normal/collective boundary:
/// negative in the normal regime, positive in the collective one.
pub fn separatrix_margin(params: &ModelParams, config: AtomConfig) -> Result<f64, Error> {
    let c = params.couplings.abs();
    let o = params.omega;
    let w21 = params.bohr(2, 1);
    let w31 = params.bohr(3, 1);
    Ok(match config {
        AtomConfig::Xi => c.mu12 * c.mu12 + theta(c.mu23 - (o * w31).sqrt()).powi(2) - o * w21,
        AtomConfig::Lambda => c.mu13 * c.mu13 + theta(c.mu23 - (o * w21).sqrt()).powi(2) - o * w31,
        AtomConfig::V => {
            if w21 == 0.0 || w31 == 0.0 {
                return Err(Error::DegenerateLevels(format!(
                    "V configuration needs omega21 and omega31 nonzero, got ({w21}, {w31})"
                )));
            }
            c.mu12 * c.mu12 / (o * w21) + c.mu13 * c.mu13 / (o * w31) - 1.0
        }
    })
}

/// Unit normal of the separatrix in the active-coupling plane, pointing
/// into the collective regime.
pub fn separatrix_normal(params: &ModelParams, config: AtomConfig) -> Result<[f64; 2], Error> {
    let c = params.couplings.abs();
    let o = params.omega;
    let g = match config {
        AtomConfig::Xi => [2.0 * c.mu12, 2.0 * theta(c.mu23 - (o * params.bohr(3, 1)).sqrt())],
        AtomConfig::Lambda => [2.0 * c.mu13, 2.0 * theta(c.mu23 - (o * params.bohr(2, 1)).sqrt())],
        AtomConfig::V => {
            separatrix_margin(params, config)?;
            [2.0 * c.mu12 / (o * params.bohr(2, 1)), 2.0 * c.mu13 / (o * params.bohr(3, 1))]
        }
    };
    let norm = g[0].hypot(g[1]);
    if norm == 0.0 {
        return Err(Error::InvalidParameters("separatrix normal undefined at the origin".into()));
    }
    Ok([g[0] / norm, g[1] / norm])
}

fn set_active(params: &ModelParams, config: AtomConfig, point: [f64; 2]) -> ModelParams {
    let mut couplings = params.couplings;
    for (which, value) in config.active_couplings().into_iter().zip(point) {
        couplings.set(which, value);
    }
    params.with_couplings(couplings)
}

fn active_point(params: &ModelParams, config: AtomConfig) -> [f64; 2] {
    config.active_couplings().map(|c| params.couplings.get(c))
}

/// Distance `t ∈ (0, t_max]` along `origin + t·direction` where the
/// separatrix margin changes sign, located by bisection to `1e-13`.
pub fn separatrix_on_ray(
    params: &ModelParams,
    config: AtomConfig,
    origin: [f64; 2],
    direction: [f64; 2],
    t_max: f64,
) -> Result<Option<f64>, Error> {
    let margin_at = |t: f64| {
        let p = set_active(params, config, [origin[0] + t * direction[0], origin[1] + t * direction[1]]);
        separatrix_margin(&p, config)
    };
    let (mut lo, mut hi) = (0.0, t_max);
    let (f_lo, f_hi) = (margin_at(lo)?, margin_at(hi)?);
    if f_lo == 0.0 {
        return Ok(Some(0.0));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if margin_at(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

pub fn coherent_expectations(cp: &CriticalPoint, params: &ModelParams, config: AtomConfig) -> CoherentExpectations {
    let na = params.atoms as f64;
    let (l2, l3) = config.lambdas();
    let (l2, l3) = (l2 as f64, l3 as f64);
    let v = cp.coords;
    let d = denominator(v.rho2, v.rho3);
    let a11 = na / d;
    let a22 = na * v.rho3 * v.rho3 / d;
    let a33 = na * v.rho2 * v.rho2 / d;
    let n_mean = na * v.r * v.r;
    let matter = l2 * a22 + l3 * a33;
    let m_mean = n_mean + matter;
    let excess = l3 * (l3 - 1.0) * a33 - matter * matter / na;
    let m_var = m_mean + excess;
    let q_m = if m_mean == 0.0 { 0.0 } else { excess / m_mean };
    CoherentExpectations { a11, a22, a33, n_mean, m_mean, m_var, q_m, q_photon: 0.0 }
}

/// `∂E^c/∂μ` for the two active couplings, by the envelope theorem.
pub fn energy_gradient_mu(cp: &CriticalPoint, config: AtomConfig) -> [(Coupling, f64); 2] {
    let v = cp.coords;
    let scale = -2.0 * v.r / denominator(v.rho2, v.rho3);
    config.active_couplings().map(|c| {
        let factor = match c {
            Coupling::Mu12 => v.rho3,
            Coupling::Mu13 => v.rho2,
            Coupling::Mu23 => v.rho2 * v.rho3,
        };
        (c, scale * factor)
    })
}

fn gradient_at(params: &ModelParams, config: AtomConfig, point: [f64; 2], search: &LatticeSearch) -> Result<[f64; 2], Error> {
    let p = set_active(params, config, point);
    let cp = match minimize(&p, config, search) {
        Ok(cp) => cp,
        Err(Error::BoundaryHit { best, .. }) => *best,
        Err(e) => return Err(e),
    };
    Ok(energy_gradient_mu(&cp, config).map(|(_, g)| g))
}

/// Order of the transition crossed at `params` along `direction`.
///
/// The minimized gradient is evaluated a step [`CLASSIFY_STEP`] to either
/// side; a jump larger than [`JUMP_THRESHOLD`] means first order.
pub fn classify_transition(
    params: &ModelParams,
    config: AtomConfig,
    direction: [f64; 2],
    search: &LatticeSearch,
) -> Result<TransitionReport, Error> {
    let margin = separatrix_margin(params, config)?;
    if margin.abs() > ON_SEPARATRIX {
        return Err(Error::NotOnSeparatrix(margin));
    }
    let norm = direction[0].hypot(direction[1]);
    if norm == 0.0 {
        return Err(Error::InvalidParameters("crossing direction must be nonzero".into()));
    }
    let u = [direction[0] / norm, direction[1] / norm];
    let at = active_point(params, config);
    let step = |s: f64| [(at[0] + s * u[0]).max(0.0), (at[1] + s * u[1]).max(0.0)];
    let before = gradient_at(params, config, step(-CLASSIFY_STEP), search)?;
    let after = gradient_at(params, config, step(CLASSIFY_STEP), search)?;
    let jump = (after[0] - before[0]).hypot(after[1] - before[1]);
    let first = jump > JUMP_THRESHOLD;
    Ok(TransitionReport { location: at, order: if first { 1 } else { 2 }, derivative_jump: if first { jump } else { 0.0 } })
}

/// Excitation-number distribution of the coherent trial state for `atoms` atoms.
pub fn m_distribution(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m_max: usize) -> MDistribution {
    let v = cp.coords;
    let ln_scale = -(atoms as f64) * v.r * v.r - atoms as f64 * denominator(v.rho2, v.rho3).ln();
    let probs: Vec<f64> = (0..=m_max)
        .map(|m| {
            let ln_p = projected::ln_projected_norm(cp, atoms, config, m) + ln_scale;
            ln_p.exp()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    MDistribution { probs, tail_mass: (1.0 - total).max(0.0) }
}
