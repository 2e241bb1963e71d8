//! Quadrature, principal values, special functions, roots, eigenpairs and
//! ODE integration.

pub mod eigen;
pub mod ode;
pub mod pv;
pub mod quadrature;
pub mod roots;
pub mod special;

pub use eigen::{dominant_eigenpair, Eigenpair};
pub use ode::{integrate_ode, OdeControl, Trajectory};
pub use pv::principal_value_integral;
pub use quadrature::{adaptive_simpson, gauss_hermite, gauss_legendre, gauss_weighted_integral, integrate, GaussRule, QuadratureSpec};
pub use roots::{find_root_bracketed, solve_cubic_real};
pub use special::{erf, exponential_integral, exponential_integral_e1};
