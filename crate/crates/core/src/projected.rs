//! The coherent trial state restricted to one excitation number `M`.
//!
//! Expanding the coherent product state in Fock labels
//! `(ν photons; Na−n−m, n, m atoms in levels 1, 2, 3)`, the component with
//! `ν + λ2 n + λ3 m = M` is kept. Its weights are
//! `Na! ρ^{2ν} ϱ3^{2n} ϱ2^{2m} / (ν! n! m! (Na−n−m)!)` with `ρ² = Na r²`.

use crate::error::Error;
use crate::logspace::{ln_fact, ln_pow, LogSumExp};
use crate::model::{enumerate_block_basis, AtomConfig};
use crate::semiclassical::CriticalPoint;

/// Values this close to an integer are treated as that integer before the ceiling.
pub const INTEGER_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedState {
    pub m_dis: usize,
    pub cp: CriticalPoint,
    pub atoms: usize,
    pub config: AtomConfig,
    /// `ln` of the squared norm of the unnormalized projection.
    pub ln_norm: f64,
}

/// One admissible Fock label of the block together with its log weight.
struct Term {
    photons: usize,
    level2: usize,
    level3: usize,
    ln_weight: f64,
}

fn terms(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m: usize) -> Vec<Term> {
    let (l2, l3) = config.lambdas();
    let v = cp.coords;
    let rho_sq = atoms as f64 * v.r * v.r;
    let (w2, w3) = (v.rho3 * v.rho3, v.rho2 * v.rho2);
    let ln_na = ln_fact(atoms);
    let mut out = Vec::new();
    for level3 in 0..=atoms {
        for level2 in 0..=atoms - level3 {
            let matter = l2 * level2 + l3 * level3;
            if matter > m {
                continue;
            }
            let photons = m - matter;
            let ln_weight = ln_na - ln_fact(photons) - ln_fact(level2) - ln_fact(level3)
                - ln_fact(atoms - level2 - level3)
                + ln_pow(rho_sq, photons)
                + ln_pow(w2, level2)
                + ln_pow(w3, level3);
            out.push(Term { photons, level2, level3, ln_weight });
        }
    }
    out
}

/// Smallest integer not below `m_mean`, after snapping near-integers.
pub fn m_dis(m_mean: f64) -> usize {
    let nearest = m_mean.round();
    if (m_mean - nearest).abs() <= INTEGER_SNAP {
        nearest.max(0.0) as usize
    } else {
        m_mean.ceil().max(0.0) as usize
    }
}

/// `ln` of the squared norm of the `M` component; `−∞` when it is empty.
pub fn ln_projected_norm(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m: usize) -> f64 {
    terms(cp, atoms, config, m).iter().map(|t| t.ln_weight).collect::<LogSumExp>().value()
}

/// Squared norm of the `M` component.
pub fn projected_norm(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m: usize) -> f64 {
    ln_projected_norm(cp, atoms, config, m).exp()
}

/// `(⟨n⟩, ⟨n²⟩)` in the normalized `M` component.
pub fn projected_photon_moments(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m: usize) -> (f64, f64) {
    let ts = terms(cp, atoms, config, m);
    let norm: LogSumExp = ts.iter().map(|t| t.ln_weight).collect();
    let norm = norm.value();
    if norm == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    let moment = |k: i32| {
        ts.iter()
            .filter(|t| t.photons > 0)
            .map(|t| t.ln_weight + k as f64 * (t.photons as f64).ln())
            .collect::<LogSumExp>()
            .value()
    };
    ((moment(1) - norm).exp(), (moment(2) - norm).exp())
}

fn check_reachable(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m: usize) -> Result<f64, Error> {
    let ln_norm = ln_projected_norm(cp, atoms, config, m);
    if (cp.coords.r == 0.0 && m > 0) || ln_norm == f64::NEG_INFINITY {
        return Err(Error::EmptyProjection(m));
    }
    Ok(ln_norm)
}

/// Projection onto `M = m_dis(⟨M⟩)` for the given mean excitation number.
pub fn project(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m_mean: f64) -> Result<ProjectedState, Error> {
    let m = m_dis(m_mean);
    let ln_norm = check_reachable(cp, atoms, config, m)?;
    Ok(ProjectedState { m_dis: m, cp: cp.clone(), atoms, config, ln_norm })
}

/// Normalized amplitudes of the `M` component over `enumerate_block_basis(config, atoms, m)`.
pub fn projected_state_vector(cp: &CriticalPoint, atoms: usize, config: AtomConfig, m: usize) -> Result<Vec<f64>, Error> {
    let ln_norm = check_reachable(cp, atoms, config, m)?;
    let basis = enumerate_block_basis(config, atoms, m);
    let mut amps = vec![0.0; basis.len()];
    for t in terms(cp, atoms, config, m) {
        let q = atoms - t.level3;
        let r = atoms - t.level2 - t.level3;
        let k = basis.index_of(q, r).expect("every admissible Fock label is in the block basis");
        debug_assert_eq!(basis.states[k].n, t.photons);
        amps[k] = (0.5 * (t.ln_weight - ln_norm)).exp();
    }
    Ok(amps)
}

/// Photon-number difference per atom between projected and exact ground states.
pub fn delta_n(n_proj: f64, n_exact: f64, atoms: usize) -> f64 {
    (n_proj - n_exact).abs() / atoms as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiclassical::{Provenance, VariationalCoords};

    fn point(r: f64, rho2: f64, rho3: f64) -> CriticalPoint {
        CriticalPoint { coords: VariationalCoords { r, rho2, rho3 }, energy: 0.0, provenance: Provenance::Lattice }
    }

    #[test]
    fn ceiling_with_snapping() {
        assert_eq!(m_dis(0.0), 0);
        assert_eq!(m_dis(3.0), 3);
        assert_eq!(m_dis(3.0 + 1e-12), 3);
        assert_eq!(m_dis(2.87 * 40.0), 115);
        assert_eq!(m_dis(0.01), 1);
    }

    #[test]
    fn vacuum_block() {
        let cp = point(0.0, 0.0, 0.0);
        assert_eq!(projected_norm(&cp, 5, AtomConfig::Xi, 0), 1.0);
        assert_eq!(projected_photon_moments(&cp, 5, AtomConfig::Xi, 0), (0.0, 0.0));
        assert_eq!(projected_state_vector(&cp, 5, AtomConfig::Xi, 0).unwrap(), vec![1.0]);
    }

    #[test]
    fn single_lambda_atom_by_hand() {
        let cp = point(1.0, 1.0, 0.0);
        assert!((projected_norm(&cp, 1, AtomConfig::Lambda, 1) - 2.0).abs() < 1e-14);
        let (n, n2) = projected_photon_moments(&cp, 1, AtomConfig::Lambda, 1);
        assert!((n - 0.5).abs() < 1e-14);
        assert!((n2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn ladder_single_excitation_by_hand() {
        // Na = 5, M = 1: one photon with all atoms in level 1, or no photon and
        // one atom in level 2. Weights ρ² and 5ϱ3².
        let (r, rho2, rho3) = (0.4, 0.3, 0.6);
        let cp = point(r, rho2, rho3);
        let amps = projected_state_vector(&cp, 5, AtomConfig::Xi, 1).unwrap();
        let basis = enumerate_block_basis(AtomConfig::Xi, 5, 1);
        let photon = amps[basis.index_of(5, 5).unwrap()];
        let atom = amps[basis.index_of(5, 4).unwrap()];
        let ratio = (5.0 * r * r / (5.0 * rho3 * rho3)).sqrt();
        assert!((photon / atom - ratio).abs() < 1e-12);
    }

    #[test]
    fn empty_projection_is_an_error() {
        let cp = point(0.0, 0.0, 0.0);
        assert_eq!(projected_state_vector(&cp, 3, AtomConfig::Xi, 2), Err(Error::EmptyProjection(2)));
        assert!(project(&cp, 3, AtomConfig::Xi, 0.0).is_ok());
        assert_eq!(projected_norm(&cp, 3, AtomConfig::Xi, 2), 0.0);
    }

    #[test]
    fn difference_metric() {
        assert_eq!(delta_n(0.0, 0.0, 40), 0.0);
        assert!((delta_n(3.0, 1.0, 40) - 0.05).abs() < 1e-15);
    }
}
