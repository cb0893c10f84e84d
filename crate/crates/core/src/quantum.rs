//! Exact ground state: lowest eigenpair of every `M` block and a scan over `M`.

use crate::error::Error;
use crate::linalg::{eigensolve_symmetric, lanczos_lowest, LanczosOptions};
use crate::model::{build_block_hamiltonian, AtomConfig, BlockHamiltonian, ModelParams};

/// Blocks up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 120;
/// Ground energies of different blocks closer than this count as degenerate.
pub const BLOCK_TIE: f64 = 1e-10;
/// Accepted residual `‖Hv − Ev‖` of a Lanczos eigenvector, relative to `‖H‖_F`.
const VECTOR_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockGround {
    pub energy: f64,
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundResult {
    /// Excitation number of the winning block.
    pub m: usize,
    /// Total ground energy, not per particle.
    pub energy: f64,
    /// Ground eigenvector over the winning block's basis.
    pub amplitudes: Vec<f64>,
    pub n_mean: f64,
    pub n2_mean: f64,
    pub n_var: f64,
    /// `(a11, a22, a33)`.
    pub populations: [f64; 3],
    /// Every block whose ground energy ties the winner, ascending.
    pub degenerate_blocks: Vec<usize>,
    /// Ground energy of each scanned block `M = 0..=m_cap`.
    pub block_energies: Vec<f64>,
}

impl GroundResult {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_blocks.len() > 1
    }
}

fn lowest(h: &BlockHamiltonian, want_vector: bool) -> Result<BlockGround, Error> {
    let dim = h.basis.len();
    if dim <= DENSE_LIMIT {
        let eig = eigensolve_symmetric(&h.dense())?;
        let amplitudes = if want_vector { eig.vector(0) } else { Vec::new() };
        return Ok(BlockGround { energy: eig.values[0], amplitudes });
    }
    let opts = LanczosOptions { want_vector, ..Default::default() };
    match lanczos_lowest(&h.matrix, opts) {
        Ok(low) => {
            let Some(v) = low.vector else {
                return Ok(BlockGround { energy: low.value, amplitudes: Vec::new() });
            };
            if h.matrix.residual(low.value, &v) <= VECTOR_RESIDUAL * h.matrix.frobenius_norm().max(1.0) {
                return Ok(BlockGround { energy: low.value, amplitudes: v });
            }
            log::debug!("Lanczos vector residual too large for M = {}; using the dense solver", h.basis.m);
        }
        Err(e) => log::debug!("Lanczos failed for M = {} ({e}); using the dense solver", h.basis.m),
    }
    let eig = eigensolve_symmetric(&h.dense())?;
    let amplitudes = if want_vector { eig.vector(0) } else { Vec::new() };
    Ok(BlockGround { energy: eig.values[0], amplitudes })
}

/// Lowest eigenpair of the `M` block.
pub fn block_ground(params: &ModelParams, config: AtomConfig, m: usize) -> Result<BlockGround, Error> {
    lowest(&build_block_hamiltonian(params, config, m)?, true)
}

/// Lowest eigenvalue of the `M` block, without the eigenvector.
pub fn block_ground_energy(params: &ModelParams, config: AtomConfig, m: usize) -> Result<f64, Error> {
    Ok(lowest(&build_block_hamiltonian(params, config, m)?, false)?.energy)
}

/// Scan cap `max(2 λ3 Na, ⌈Na·M^c⌉ + 10)` from the semiclassical excitation number per atom.
pub fn default_m_cap(params: &ModelParams, config: AtomConfig, m_per_particle: f64) -> usize {
    let na = params.atoms;
    let (_, l3) = config.lambdas();
    let guided = (na as f64 * m_per_particle.max(0.0)).ceil() as usize + 10;
    (2 * l3 * na).max(guided)
}

/// Ground state over all blocks `M = 0..=m_cap`.
///
/// Ties within [`BLOCK_TIE`] go to the smallest `M`. A winner at `m_cap`
/// itself means the scan may have been cut short and is reported as
/// [`Error::CapSaturated`].
pub fn global_ground(params: &ModelParams, config: AtomConfig, m_cap: usize) -> Result<GroundResult, Error> {
    params.check(config)?;
    let mut block_energies = Vec::with_capacity(m_cap + 1);
    let mut best = 0;
    for m in 0..=m_cap {
        let e = block_ground_energy(params, config, m)?;
        if e < block_energies.get(best).copied().unwrap_or(f64::INFINITY) - BLOCK_TIE {
            best = m;
        }
        block_energies.push(e);
    }
    if best == m_cap && m_cap > 0 {
        return Err(Error::CapSaturated { m_cap });
    }
    let h = build_block_hamiltonian(params, config, best)?;
    let ground = lowest(&h, true)?;
    let (mut n_mean, mut n2_mean) = (0.0, 0.0);
    let mut populations = [0.0; 3];
    for (c, s) in ground.amplitudes.iter().zip(&h.basis.states) {
        let w = c * c;
        let n = s.n as f64;
        n_mean += w * n;
        n2_mean += w * n * n;
        for (acc, p) in populations.iter_mut().zip(s.populations(params.atoms)) {
            *acc += w * p as f64;
        }
    }
    let energy = block_energies[best];
    let degenerate_blocks = (0..=m_cap).filter(|&m| (block_energies[m] - energy).abs() <= BLOCK_TIE).collect();
    Ok(GroundResult {
        m: best,
        energy,
        amplitudes: ground.amplitudes,
        n_mean,
        n2_mean,
        n_var: n2_mean - n_mean * n_mean,
        populations,
        degenerate_blocks,
        block_energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Couplings, Detunings};

    fn xi(mu12: f64, mu23: f64, atoms: usize) -> ModelParams {
        ModelParams::from_detunings(AtomConfig::Xi, Detunings(0.0, 0.0), Couplings::new(mu12, 0.0, mu23), atoms).unwrap()
    }

    #[test]
    fn vacuum_block() {
        let g = block_ground(&xi(0.7, 0.3, 4), AtomConfig::Xi, 0).unwrap();
        assert_eq!(g.energy, 0.0);
        assert_eq!(g.amplitudes, vec![1.0]);
    }

    #[test]
    fn single_excitation_block_at_resonance() {
        for mu12 in [0.3, 1.0, 1.7] {
            let g = block_ground(&xi(mu12, 0.4, 6), AtomConfig::Xi, 1).unwrap();
            assert!((g.energy - (1.0 - mu12)).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_system_stays_empty() {
        let g = global_ground(&xi(0.0, 0.0, 5), AtomConfig::Xi, 10).unwrap();
        assert_eq!((g.m, g.energy, g.n_mean), (0, 0.0, 0.0));
        assert_eq!(g.populations, [5.0, 0.0, 0.0]);
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        let p = xi(1.3, 1.1, 16);
        let h = build_block_hamiltonian(&p, AtomConfig::Xi, 30).unwrap();
        assert!(h.basis.len() > DENSE_LIMIT);
        let fast = lowest(&h, true).unwrap();
        let dense = eigensolve_symmetric(&h.dense()).unwrap();
        assert!((fast.energy - dense.values[0]).abs() < 1e-9);
        let overlap: f64 = fast.amplitudes.iter().zip(dense.vector(0)).map(|(a, b)| a * b).sum();
        assert!((overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn moments_and_populations_are_consistent() {
        let p = xi(1.5, 0.5, 5);
        let g = global_ground(&p, AtomConfig::Xi, 20).unwrap();
        assert!(g.m >= 1);
        let norm: f64 = g.amplitudes.iter().map(|c| c * c).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((g.populations.iter().sum::<f64>() - 5.0).abs() < 1e-10);
        assert!(g.n_var >= -1e-12);
        let m = g.n_mean + g.populations[1] + 2.0 * g.populations[2];
        assert!((m - g.m as f64).abs() < 1e-10);
    }

    #[test]
    fn small_cap_is_reported() {
        assert_eq!(global_ground(&xi(2.5, 2.5, 3), AtomConfig::Xi, 1), Err(Error::CapSaturated { m_cap: 1 }));
    }

    #[test]
    fn cap_follows_semiclassical_guess() {
        let p = xi(1.0, 1.0, 40);
        assert_eq!(default_m_cap(&p, AtomConfig::Xi, 0.0), 160);
        assert_eq!(default_m_cap(&p, AtomConfig::V, 0.0), 80);
        assert_eq!(default_m_cap(&p, AtomConfig::V, 2.87), 125);
    }
}
