//! Exact few-body Lieb-Liniger eigenstates and the Fisher information of the
//! interaction strength `c`, for a ring and for a box with hard walls.
//!
//! ```
//! use llfisher::bethe::{ground_state, solve_bethe, BoundaryCondition, ModelParams};
//!
//! let spec = ground_state(BoundaryCondition::Periodic, 2).unwrap();
//! let sol = solve_bethe(&spec, &ModelParams::new(1.0, 1.0).unwrap()).unwrap();
//! assert!(sol.k[0] < 0.0 && sol.k[1] > 0.0);
//! ```

pub mod bethe;
pub mod error;
pub mod fisher;
pub mod imaging;
pub mod integrals;
pub mod wavefunction;

pub use error::{Error, Result};
