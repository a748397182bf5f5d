//! Machine-part cell formation for group technology.
//!
//! The pipeline standardizes the incidence matrix column by column, builds
//! the machine correlation matrix, projects machines and parts onto the first
//! two principal components, and forms cells from the angular layout of the
//! machine loadings. [`metrics`] scores any resulting assignment.
//!
//! Numeric stages are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common double-precision case.

pub mod assignment;
pub mod cellform;
pub mod instance;
pub mod matrix;
pub mod metrics;
pub mod scalar;
pub mod similarity;
pub mod spectral;

pub use assignment::{Assignment, AssignmentError};
pub use cellform::{analyze, solve, CellSolution, ClusterError};
pub use instance::{
    builtin_instance, builtin_instances, parse_instance, serialize_instance, Instance, InstanceError, Orientation,
    BOCTOR_7X11_NAME,
};
pub use metrics::{block_view, score, BlockView, Mark, Objective};
pub use scalar::Scalar;

pub type MachineStats = similarity::MachineStats<f64>;
pub type StandardizedMatrix = similarity::StandardizedMatrix<f64>;
pub type SimilarityMatrix = similarity::SimilarityMatrix<f64>;
pub type EigenSystem = spectral::EigenSystem<f64>;
pub type PrincipalPlane = spectral::PrincipalPlane<f64>;
pub type ClusterConfig = cellform::ClusterConfig<f64>;
pub type Analysis = cellform::Analysis<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type OracleOutcome = metrics::OracleOutcome<f64>;

pub type SimilarityMatrixF32 = similarity::SimilarityMatrix<f32>;
pub type EigenSystemF32 = spectral::EigenSystem<f32>;
pub type PrincipalPlaneF32 = spectral::PrincipalPlane<f32>;
pub type AnalysisF32 = cellform::Analysis<f32>;
