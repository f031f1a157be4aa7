//! Lowest-order Arnold-Winther mixed finite elements for planar linear
//! elasticity, an explicit residual-based error estimator that only needs the
//! discrete stress, and an adaptive refinement driver.

pub mod awfem;
pub mod benchmarks;
pub mod driver;
pub mod estimator;
pub mod jet;
pub mod material;
pub mod mesh;
pub mod poly;
pub mod problem;
pub mod quadrature;
