//! Quadratic weighted histopolation on tetrahedral meshes.
//!
//! The local element enriches the four face averages of the linear
//! histopolation element with six weighted moments (face, volume or edge
//! based) whose weights are probability densities on the simplex.

pub mod cli;
pub mod density;
pub mod element;
pub mod error;
pub mod experiment;
pub mod poly;
pub mod quadrature;
pub mod simplex;

pub use density::{Density, EdgeDensity, FaceDensity, VolumeDensity};
pub use element::{
    assemble_d, assemble_h, classical_project, evaluate, reconstruct, unisolvence_check, DofVector, ElementOperator,
    LocalMethod, Poly2OnTet, StrategyConfig, StrategyKind, UnisolvenceReport,
};
pub use error::{Error, Result};
pub use poly::BaryPoly;
pub use simplex::{barycentric, build_mesh, point_from_barycentric, BarycentricPoint, Point3, TetMesh, Tetrahedron};
