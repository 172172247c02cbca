use thiserror::Error;

/// Errors raised by the curve, velocity and tangential kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve needs an even node count >= 8, got {0}")]
    NodeCount(usize),

    #[error("non-finite coordinate at node {index}")]
    NonFiniteNode { index: usize },

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Two distinct nodes of the same curve coincide, so the self-induction kernel is singular.
    #[error("singular kernel: nodes {0} and {1} coincide")]
    SingularKernel(usize, usize),

    #[error("target {target} lies on source node {node}")]
    NearSingular { target: usize, node: usize },

    #[error("arclength inversion did not converge at node {node} (residual {residual:e})")]
    Reparametrization { node: usize, residual: f64 },

    #[error("curve file: {0}")]
    CurveFile(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
