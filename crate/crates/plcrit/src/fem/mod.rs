//! Planar finite-element estimation of the Sobolev quotient with mixed
//! Dirichlet / Robin boundary parts.

pub mod energy;
pub mod mesh;
pub mod minimize;

pub use energy::{assemble_energy, quotient, EnergyAssembly, FemProblem};
pub use mesh::{triangulate, BoundaryEdge, BoundaryLabel, LabeledPolygon, Mesh};
pub use minimize::{
    coercivity_estimate, minimize_quotient, minimize_quotient_multistart, quotient_vs_threshold,
    ContinuationSchedule, MinimizeResult, RefinementReport, RefinementRow,
};
