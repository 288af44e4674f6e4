//! Explicit Euler discretization of the planar transcritical normal form,
//! its blow-up into three charts, and numerical checks of the passage near
//! the singular point.

pub mod argmin;
pub mod charts;
pub mod error;
pub mod experiments;
pub mod manifolds;
pub mod map;
pub mod params;
pub mod passage;
pub mod reference;
pub mod section;

pub use charts::{ChartId, ChartPoint, K1Point, K2Point, K3Point};
pub use error::{Error, Result};
pub use map::{euler_step, iterate, pi_a, pi_e, BranchId, State};
pub use params::Params;
pub use section::{SectionSet, Space};
