pub mod error;
pub mod families;
pub mod fdcheck;
pub mod forms;
pub mod gauge_invariants;
pub mod multicenter;
pub mod nahm;
pub mod ode;
pub mod quadrature;
pub mod quat;
pub mod radial;

pub use error::{KwError, Result};
pub use quat::{ImQuaternion, Quaternion};
