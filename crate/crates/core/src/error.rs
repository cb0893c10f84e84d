use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid detuning: {0}")]
    InvalidDetuning(String),
    #[error("degenerate levels: {0}")]
    DegenerateLevels(String),
    #[error("matrix is not symmetric (max |A - A^T| = {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("minimizer still on the search boundary at rho_max = {rho_max}")]
    BoundaryHit { rho_max: f64, best: Box<crate::semiclassical::CriticalPoint> },
    #[error("point is not on the separatrix (margin {0:e})")]
    NotOnSeparatrix(f64),
    #[error("ground state found in the last scanned block M = {m_cap}; raise the cap")]
    CapSaturated { m_cap: usize },
    #[error("projection onto M = {0} is empty at vanishing field amplitude")]
    EmptyProjection(usize),
}
