//! Exact-arithmetic intersection-space cohomology for depth-one stratified
//! pseudomanifolds given as simplicial complexes.

pub mod chaincomplex;
pub mod fixtures;
pub mod flatbundle;
pub mod formats;
pub mod hitheory;
pub mod hodgetrunc;
pub mod ratlinalg;
pub mod simplicial;
