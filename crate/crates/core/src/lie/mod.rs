//! Matrix Lie algebras, root-space decomposition and sub-Riemannian frames.

pub mod algebra;
pub mod element;
pub mod frame;
pub mod group;
pub mod roots;

pub use algebra::{
    inner, is_compact_semisimple, structure_constants, structure_constants_of, su_basis,
    CompactnessReport, LieAlgebra, Metric, StructureConstants,
};
pub use element::{bracket, AlgebraElement, CMat};
pub use frame::{epsilon_frame, full_frame_rank, hormander_rank, horizontal_frame, su_frame, Frame};
pub use group::GroupElement;
pub use roots::{
    cartan_subalgebra, decompose, root_space_decomposition, PositiveRoot, RootDatum, RootPair,
    RootPropertyReport,
};
