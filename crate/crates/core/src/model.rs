//! Physical parameters, atomic configurations, the symmetric Gelfand-Tsetlin
//! basis and the block Hamiltonian at fixed total excitation number.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::linalg::{DenseMatrix, SparseSymmetric};

/// Dipole transition between two atomic levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coupling {
    Mu12,
    Mu13,
    Mu23,
}

impl Coupling {
    pub const ALL: [Coupling; 3] = [Coupling::Mu12, Coupling::Mu13, Coupling::Mu23];

    /// Lower and upper level (1-based) joined by this transition.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Coupling::Mu12 => (1, 2),
            Coupling::Mu13 => (1, 3),
            Coupling::Mu23 => (2, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coupling::Mu12 => "mu12",
            Coupling::Mu13 => "mu13",
            Coupling::Mu23 => "mu23",
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mu12" => Ok(Coupling::Mu12),
            "mu13" => Ok(Coupling::Mu13),
            "mu23" => Ok(Coupling::Mu23),
            other => Err(Error::InvalidParameters(format!("unknown coupling '{other}'"))),
        }
    }
}

/// Which of the three dipole transitions is forbidden.
///
/// Each configuration fixes the weights `(λ2, λ3)` of the conserved
/// excitation number `M = n + λ2 A22 + λ3 A33`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomConfig {
    /// Ladder: 1 ↔ 3 forbidden.
    Xi,
    /// 1 ↔ 2 forbidden.
    Lambda,
    /// 2 ↔ 3 forbidden.
    V,
}

impl AtomConfig {
    pub const ALL: [AtomConfig; 3] = [AtomConfig::Xi, AtomConfig::Lambda, AtomConfig::V];

    pub fn lambdas(self) -> (usize, usize) {
        match self {
            AtomConfig::Xi => (1, 2),
            AtomConfig::Lambda => (0, 1),
            AtomConfig::V => (1, 1),
        }
    }

    pub fn forbidden_coupling(self) -> Coupling {
        match self {
            AtomConfig::Xi => Coupling::Mu13,
            AtomConfig::Lambda => Coupling::Mu12,
            AtomConfig::V => Coupling::Mu23,
        }
    }

    /// The two allowed couplings, in ascending level order.
    pub fn active_couplings(self) -> [Coupling; 2] {
        match self {
            AtomConfig::Xi => [Coupling::Mu12, Coupling::Mu23],
            AtomConfig::Lambda => [Coupling::Mu13, Coupling::Mu23],
            AtomConfig::V => [Coupling::Mu12, Coupling::Mu13],
        }
    }

    /// Names of the two detunings that parametrize the levels of this configuration.
    pub fn detuning_names(self) -> [&'static str; 2] {
        match self {
            AtomConfig::Xi => ["d21", "d32"],
            AtomConfig::Lambda => ["d31", "d32"],
            AtomConfig::V => ["d21", "d31"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AtomConfig::Xi => "xi",
            AtomConfig::Lambda => "lambda",
            AtomConfig::V => "v",
        }
    }
}

impl fmt::Display for AtomConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AtomConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xi" | "ladder" | "cascade" => Ok(AtomConfig::Xi),
            "lambda" => Ok(AtomConfig::Lambda),
            "v" => Ok(AtomConfig::V),
            other => Err(Error::InvalidParameters(format!("unknown configuration '{other}'"))),
        }
    }
}

/// `(λ2, λ3)` for a configuration.
pub fn lambdas_for(config: AtomConfig) -> (usize, usize) {
    config.lambdas()
}

/// Dipole couplings, dimensionless in units of the field frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Couplings {
    pub mu12: f64,
    pub mu13: f64,
    pub mu23: f64,
}

impl Couplings {
    pub fn new(mu12: f64, mu13: f64, mu23: f64) -> Self {
        Self { mu12, mu13, mu23 }
    }

    /// Couplings for a configuration from its two active values, the forbidden one set to zero.
    pub fn for_config(config: AtomConfig, first: f64, second: f64) -> Self {
        let mut c = Couplings::default();
        let [a, b] = config.active_couplings();
        c.set(a, first);
        c.set(b, second);
        c
    }

    pub fn get(&self, which: Coupling) -> f64 {
        match which {
            Coupling::Mu12 => self.mu12,
            Coupling::Mu13 => self.mu13,
            Coupling::Mu23 => self.mu23,
        }
    }

    pub fn set(&mut self, which: Coupling, value: f64) {
        match which {
            Coupling::Mu12 => self.mu12 = value,
            Coupling::Mu13 => self.mu13 = value,
            Coupling::Mu23 => self.mu23 = value,
        }
    }

    pub fn abs(self) -> Self {
        Self::new(self.mu12.abs(), self.mu13.abs(), self.mu23.abs())
    }
}

/// Every physical parameter of one Hamiltonian (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Field frequency Ω.
    pub omega: f64,
    /// Atomic level energies ω1 ≤ ω2 ≤ ω3.
    pub levels: [f64; 3],
    /// Couplings, stored as magnitudes.
    pub couplings: Couplings,
    /// Number of atoms, the label h1 of the symmetric irrep.
    pub atoms: usize,
}

impl ModelParams {
    /// Builds and validates parameters for `config`. Negative couplings are
    /// replaced by their magnitudes; only `|μ|` enters the ground state.
    pub fn new(
        config: AtomConfig,
        omega: f64,
        levels: [f64; 3],
        couplings: Couplings,
        atoms: usize,
    ) -> Result<Self, Error> {
        if Coupling::ALL.iter().any(|&c| couplings.get(c) < 0.0) {
            log::info!("negative coupling given; using its magnitude");
        }
        let params = Self { omega, levels, couplings: couplings.abs(), atoms };
        params.check(config)?;
        Ok(params)
    }

    /// Parameters on the default scale Ω = 1, ω1 = 0, with levels from detunings.
    pub fn from_detunings(
        config: AtomConfig,
        detunings: Detunings,
        couplings: Couplings,
        atoms: usize,
    ) -> Result<Self, Error> {
        let (omega2, omega3) = omegas_from_detuning(config, detunings, 1.0, 0.0)?;
        Self::new(config, 1.0, [0.0, omega2, omega3], couplings, atoms)
    }

    pub fn check(&self, config: AtomConfig) -> Result<(), Error> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "field frequency must be positive, got {}",
                self.omega
            )));
        }
        if self.atoms == 0 {
            return Err(Error::InvalidParameters("atom count must be at least 1".into()));
        }
        let [w1, w2, w3] = self.levels;
        if !(w1 <= w2 && w2 <= w3) {
            return Err(Error::InvalidParameters(format!(
                "levels must satisfy omega1 <= omega2 <= omega3, got ({w1}, {w2}, {w3})"
            )));
        }
        let forbidden = config.forbidden_coupling();
        if self.couplings.get(forbidden) != 0.0 {
            return Err(Error::InvalidParameters(format!(
                "configuration {config} requires {forbidden} = 0, got {}",
                self.couplings.get(forbidden)
            )));
        }
        Ok(())
    }

    /// Bohr frequency ω_i − ω_j for 1-based level labels.
    pub fn bohr(&self, i: usize, j: usize) -> f64 {
        self.levels[i - 1] - self.levels[j - 1]
    }

    pub fn with_couplings(mut self, couplings: Couplings) -> Self {
        self.couplings = couplings.abs();
        self
    }

    pub fn with_atoms(mut self, atoms: usize) -> Self {
        self.atoms = atoms;
        self
    }
}

/// Detuning pair in units of Ω: `(Δ21, Δ32)` for Ξ, `(Δ31, Δ32)` for Λ,
/// `(Δ21, Δ31)` for V.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings(pub f64, pub f64);

/// Reconstructs `(ω2, ω3)` from the configuration's detuning pair.
pub fn omegas_from_detuning(
    config: AtomConfig,
    d: Detunings,
    omega: f64,
    omega1: f64,
) -> Result<(f64, f64), Error> {
    let Detunings(a, b) = d;
    let (w2, w3) = match config {
        AtomConfig::Xi => (a + omega1 + omega, b + a + omega1 + 2.0 * omega),
        AtomConfig::Lambda => (a - b + omega1, a + omega1 + omega),
        AtomConfig::V => (a + omega1 + omega, b + omega1 + omega),
    };
    if !(omega1 <= w2 && w2 <= w3) {
        let [na, nb] = config.detuning_names();
        return Err(Error::InvalidDetuning(format!(
            "{config} with {na}={a}, {nb}={b} gives levels ({omega1}, {w2}, {w3}) out of order"
        )));
    }
    Ok((w2, w3))
}

/// Detunings whose magnitude puts the rotating-wave approximation in doubt.
pub fn rwa_warnings(config: AtomConfig, d: Detunings) -> Vec<String> {
    let names = config.detuning_names();
    [d.0, d.1]
        .iter()
        .zip(names)
        .filter(|(v, _)| v.abs() >= 1.0)
        .map(|(v, name)| format!("|{name}| = {} >= 1: rotating-wave approximation questionable", v.abs()))
        .collect()
}

/// Product state `|n⟩ ⊗ |q r⟩` of the field and the symmetric irrep `[Na, 0, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n: usize,
    pub q: usize,
    pub r: usize,
}

impl BasisState {
    pub fn new(n: usize, q: usize, r: usize) -> Self {
        Self { n, q, r }
    }

    /// Level occupations `(A11, A22, A33) = (r, q − r, Na − q)`.
    pub fn populations(&self, atoms: usize) -> [usize; 3] {
        [self.r, self.q - self.r, atoms - self.q]
    }

    pub fn is_valid(&self, atoms: usize) -> bool {
        self.r <= self.q && self.q <= atoms
    }
}

/// The states of one fixed-`M` block, ordered lexicographically in `(q, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBasis {
    pub m: usize,
    pub atoms: usize,
    pub config: AtomConfig,
    pub states: Vec<BasisState>,
    slots: Vec<Option<usize>>,
}

impl BlockBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Position of the state with matter labels `(q, r)`, if it lies in this block.
    pub fn index_of(&self, q: usize, r: usize) -> Option<usize> {
        if r > q || q > self.atoms {
            return None;
        }
        self.slots[q * (self.atoms + 1) + r]
    }
}

/// Enumerates all `(n, q, r)` with `n + λ2 (q − r) + λ3 (Na − q) = M`, `n ≥ 0`.
pub fn enumerate_block_basis(config: AtomConfig, atoms: usize, m: usize) -> BlockBasis {
    let (l2, l3) = config.lambdas();
    let mut states = Vec::new();
    let mut slots = vec![None; (atoms + 1) * (atoms + 1)];
    for q in 0..=atoms {
        for r in 0..=q {
            let matter = l2 * (q - r) + l3 * (atoms - q);
            if matter <= m {
                slots[q * (atoms + 1) + r] = Some(states.len());
                states.push(BasisState::new(m - matter, q, r));
            }
        }
    }
    BlockBasis { m, atoms, config, states, slots }
}

/// Dimension of a block once every matter state fits: `Na(Na+1)/2 + Na + 1`.
pub fn saturated_block_dimension(atoms: usize) -> usize {
    atoms * (atoms + 1) / 2 + atoms + 1
}

/// Matrix element `⟨bra| A_ij |ket⟩` of a u(3) generator in the symmetric
/// irrep. Levels are 1-based; photon labels are ignored.
pub fn matter_matrix_element(i: usize, j: usize, bra: &BasisState, ket: &BasisState, atoms: usize) -> f64 {
    assert!((1..=3).contains(&i) && (1..=3).contains(&j), "levels are 1, 2 or 3");
    if i > j {
        return matter_matrix_element(j, i, ket, bra, atoms);
    }
    let (q, r) = (ket.q, ket.r);
    let target = match (i, j) {
        (1, 1) | (2, 2) | (3, 3) => (q, r),
        (1, 2) => (q, r + 1),
        (1, 3) => (q + 1, r + 1),
        (2, 3) => (q + 1, r),
        _ => unreachable!(),
    };
    if (bra.q, bra.r) != target || !bra.is_valid(atoms) || !ket.is_valid(atoms) {
        return 0.0;
    }
    let v = match (i, j) {
        (1, 1) => r,
        (2, 2) => q - r,
        (3, 3) => atoms - q,
        (1, 2) => (q - r) * (r + 1),
        (1, 3) => (atoms - q) * (r + 1),
        (2, 3) => (atoms - q) * (q - r + 1),
        _ => unreachable!(),
    } as f64;
    if i == j {
        v
    } else {
        v.sqrt()
    }
}

/// One fixed-`M` block of the Hamiltonian together with its basis.
#[derive(Debug, Clone)]
pub struct BlockHamiltonian {
    pub basis: BlockBasis,
    pub matrix: SparseSymmetric,
}

impl BlockHamiltonian {
    pub fn dense(&self) -> DenseMatrix {
        self.matrix.to_dense()
    }
}

/// Assembles the `M` block of the RWA Hamiltonian
/// `Ω a†a + Σ ω_i A_ii − Σ (μ_ij/√Na)(a A_ji + a† A_ij)`.
pub fn build_block_hamiltonian(
    params: &ModelParams,
    config: AtomConfig,
    m: usize,
) -> Result<BlockHamiltonian, Error> {
    params.check(config)?;
    let atoms = params.atoms;
    let basis = enumerate_block_basis(config, atoms, m);
    let [w1, w2, w3] = params.levels;
    let diag = basis
        .states
        .iter()
        .map(|s| {
            let [p1, p2, p3] = s.populations(atoms);
            params.omega * s.n as f64 + w1 * p1 as f64 + w2 * p2 as f64 + w3 * p3 as f64
        })
        .collect();
    let scale = 1.0 / (atoms as f64).sqrt();
    let mut off = Vec::new();
    for (col, ket) in basis.states.iter().enumerate() {
        for coupling in config.active_couplings() {
            let mu = params.couplings.get(coupling);
            if mu == 0.0 {
                continue;
            }
            // a† A_ij with i < j: one photon created, one atom de-excited from j to i.
            let (i, j) = coupling.levels();
            let (q, r) = match (i, j) {
                (1, 2) => (ket.q, ket.r + 1),
                (1, 3) => (ket.q + 1, ket.r + 1),
                _ => (ket.q + 1, ket.r),
            };
            if let Some(row) = basis.index_of(q, r) {
                let bra = basis.states[row];
                debug_assert_eq!(bra.n, ket.n + 1);
                let matter = matter_matrix_element(i, j, &bra, ket, atoms);
                let field = ((ket.n + 1) as f64).sqrt();
                off.push((row, col, -mu * scale * field * matter));
            }
        }
    }
    Ok(BlockHamiltonian { basis, matrix: SparseSymmetric::new(diag, off) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi_resonant(mu12: f64, mu23: f64, atoms: usize) -> ModelParams {
        ModelParams::new(AtomConfig::Xi, 1.0, [0.0, 1.0, 2.0], Couplings::new(mu12, 0.0, mu23), atoms).unwrap()
    }

    #[test]
    fn table_of_lambdas() {
        assert_eq!(lambdas_for(AtomConfig::Xi), (1, 2));
        assert_eq!(lambdas_for(AtomConfig::Lambda), (0, 1));
        assert_eq!(lambdas_for(AtomConfig::V), (1, 1));
        assert_eq!(AtomConfig::Xi.forbidden_coupling(), Coupling::Mu13);
        assert_eq!(AtomConfig::Lambda.forbidden_coupling(), Coupling::Mu12);
        assert_eq!(AtomConfig::V.forbidden_coupling(), Coupling::Mu23);
    }

    #[test]
    fn levels_from_detunings() {
        let (w2, w3) = omegas_from_detuning(AtomConfig::Xi, Detunings(0.0, 0.0), 1.0, 0.0).unwrap();
        assert_eq!((w2, w3), (1.0, 2.0));
        let (w2, w3) = omegas_from_detuning(AtomConfig::Lambda, Detunings(0.3, -0.2), 1.0, 0.0).unwrap();
        assert!((w2 - 0.5).abs() < 1e-15 && (w3 - 1.3).abs() < 1e-15);
        let (w2, w3) = omegas_from_detuning(AtomConfig::V, Detunings(0.0, 0.0), 1.0, 0.0).unwrap();
        assert_eq!((w2, w3), (1.0, 1.0));
    }

    #[test]
    fn lambda_detuning_out_of_order_is_rejected() {
        let err = omegas_from_detuning(AtomConfig::Lambda, Detunings(-0.2, 0.3), 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidDetuning(_)));
    }

    #[test]
    fn rwa_warning_only_for_large_detuning() {
        assert!(rwa_warnings(AtomConfig::V, Detunings(0.2, 0.3)).is_empty());
        assert_eq!(rwa_warnings(AtomConfig::V, Detunings(0.2, 1.3)).len(), 1);
    }

    #[test]
    fn forbidden_coupling_must_vanish() {
        let err = ModelParams::new(AtomConfig::Lambda, 1.0, [0.0, 0.5, 1.3], Couplings::new(0.1, 1.0, 1.0), 3)
            .unwrap_err();
        assert!(err.to_string().contains("mu12 = 0"), "{err}");
    }

    #[test]
    fn negative_couplings_are_taken_by_magnitude() {
        let p = ModelParams::new(AtomConfig::V, 1.0, [0.0, 1.0, 1.0], Couplings::new(-0.4, 0.7, 0.0), 2).unwrap();
        assert_eq!(p.couplings.mu12, 0.4);
    }

    #[test]
    fn small_blocks() {
        let b = enumerate_block_basis(AtomConfig::Xi, 5, 0);
        assert_eq!(b.states, vec![BasisState::new(0, 5, 5)]);
        let b = enumerate_block_basis(AtomConfig::Xi, 5, 1);
        let mut got = b.states.clone();
        got.sort();
        assert_eq!(got, vec![BasisState::new(0, 5, 4), BasisState::new(1, 5, 5)]);
        assert_eq!(enumerate_block_basis(AtomConfig::Xi, 5, 10).len(), 21);
    }

    #[test]
    fn basis_is_lexicographic_and_conserves_m() {
        for config in AtomConfig::ALL {
            let (l2, l3) = config.lambdas();
            let b = enumerate_block_basis(config, 6, 7);
            for w in b.states.windows(2) {
                assert!((w[0].q, w[0].r) < (w[1].q, w[1].r));
            }
            for s in &b.states {
                assert_eq!(s.n + l2 * (s.q - s.r) + l3 * (6 - s.q), 7);
                assert_eq!(b.index_of(s.q, s.r).map(|i| b.states[i]), Some(*s));
            }
        }
    }

    #[test]
    fn block_dimension_saturates_and_grows_monotonically() {
        for config in AtomConfig::ALL {
            let (_, l3) = config.lambdas();
            for atoms in 1..=7 {
                let mut last = 0;
                for m in 0..=(l3 * atoms + 3) {
                    let len = enumerate_block_basis(config, atoms, m).len();
                    assert!(len >= last);
                    last = len;
                    if m >= l3 * atoms {
                        assert_eq!(len, saturated_block_dimension(atoms));
                    }
                }
            }
        }
    }

    #[test]
    fn appendix_elements() {
        let s = |q, r| BasisState::new(0, q, r);
        assert_eq!(matter_matrix_element(1, 1, &s(2, 1), &s(2, 1), 3), 1.0);
        assert_eq!(matter_matrix_element(2, 2, &s(2, 1), &s(2, 1), 3), 1.0);
        assert_eq!(matter_matrix_element(3, 3, &s(2, 1), &s(2, 1), 3), 1.0);
        assert_eq!(matter_matrix_element(1, 2, &s(2, 1), &s(2, 0), 3), 2f64.sqrt());
        assert_eq!(matter_matrix_element(1, 3, &s(2, 1), &s(1, 0), 3), 2f64.sqrt());
        assert_eq!(matter_matrix_element(2, 3, &s(2, 0), &s(1, 0), 3), 2.0);
        // lowering elements are transposes
        assert_eq!(matter_matrix_element(2, 1, &s(2, 0), &s(2, 1), 3), 2f64.sqrt());
        assert_eq!(matter_matrix_element(1, 2, &s(2, 0), &s(2, 0), 3), 0.0);
    }

    #[test]
    fn vacuum_block_is_ground_level() {
        for config in AtomConfig::ALL {
            let couplings = Couplings::for_config(config, 0.7, 1.1);
            let p = ModelParams::new(config, 1.0, [0.25, 1.0, 2.0], couplings, 4).unwrap();
            let block = build_block_hamiltonian(&p, config, 0).unwrap();
            let h = block.dense();
            let ground = block.basis.index_of(4, 4).unwrap();
            // level 2 carries no excitation in Λ, so its vacuum block holds every (1, 2) mixture
            let expected = if config == AtomConfig::Lambda { 5 } else { 1 };
            assert_eq!(h.dim(), expected);
            assert_eq!(h.get(ground, ground), 4.0 * 0.25);
        }
    }

    #[test]
    fn two_state_block_at_double_resonance() {
        for atoms in [1, 3, 8] {
            let h = build_block_hamiltonian(&xi_resonant(0.8, 0.3, atoms), AtomConfig::Xi, 1).unwrap();
            let d = h.dense();
            let photon = h.basis.index_of(atoms, atoms).unwrap();
            let atom = h.basis.index_of(atoms, atoms - 1).unwrap();
            assert!((d.get(photon, photon) - 1.0).abs() < 1e-15);
            assert!((d.get(atom, atom) - 1.0).abs() < 1e-15);
            assert!((d.get(photon, atom) + 0.8).abs() < 1e-14);
            assert!((d.get(atom, photon) + 0.8).abs() < 1e-14);
        }
    }

    #[test]
    fn block_is_symmetric() {
        let h = build_block_hamiltonian(&xi_resonant(0.37, 1.91, 4), AtomConfig::Xi, 3).unwrap().dense();
        assert_eq!(h.asymmetry(), 0.0);
    }

    #[test]
    fn block_rejects_forbidden_coupling() {
        let mut p = xi_resonant(1.0, 1.0, 3);
        p.couplings.mu13 = 0.2;
        assert!(build_block_hamiltonian(&p, AtomConfig::Xi, 2).is_err());
    }
}
