//! Strong integrators for driftless linear Stratonovich systems and the
//! Monte Carlo experiments around them.

pub mod experiment;
pub mod iterated;
pub mod linalg;
pub mod mesh;
pub mod stepper;

pub use experiment::{
    convergence_slope, global_error_experiment, local_excess_sample, reference_solution,
    sample_moments, ErrorReport, ErrorRow, ExperimentConfig, Grid, MeanEstimate,
};
pub use iterated::{iterated_integrals, SignatureAccumulator};
pub use linalg::{mat_exp, mat_sqrt};
pub use mesh::{sample_mesh, WienerMesh};
pub use stepper::{Method, Stepper, StepperSpec};
