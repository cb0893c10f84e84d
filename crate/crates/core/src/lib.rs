//! Ground states of `Na` identical three-level atoms coupled to one cavity
//! mode in the rotating-wave approximation.
//!
//! Three descriptions are provided and can be compared point by point:
//!
//! * [`semiclassical`]: the coherent-state energy surface, its minimum, the
//!   separatrix between the normal and collective regimes, transition orders
//!   and the excitation-number statistics of the variational state;
//! * [`quantum`]: exact diagonalization of each block of fixed total
//!   excitation number `M`;
//! * [`projected`]: the variational state projected onto a single `M`.
//!
//! The Ξ, Λ and V configurations are selected with [`AtomConfig`].

pub mod error;
pub mod linalg;
pub mod logspace;
pub mod model;
pub mod projected;
pub mod quantum;
pub mod semiclassical;

pub use error::Error;
pub use model::{
    build_block_hamiltonian, enumerate_block_basis, lambdas_for, matter_matrix_element, omegas_from_detuning,
    AtomConfig, BasisState, BlockBasis, BlockHamiltonian, Coupling, Couplings, Detunings, ModelParams,
};
pub use semiclassical::{CriticalPoint, LatticeSearch, Provenance, VariationalCoords};
