//! Numerical tools for conformal radii of slit and punctured subdomains of the
//! unit disk: triangle area proxies on the log-cylinder, closed-form radii,
//! rectangle hyperbolic distances, greedy disjoint selections, walk-on-spheres
//! estimates and the cone-crossing length used for chains of points.

pub mod chain;
pub mod cli;
pub mod closed_form;
pub mod crz;
pub mod cylgeom;
pub mod eikonal;
pub mod elliptic;
pub mod error;
pub mod rect_hyp;
pub mod vitali;
pub mod wos;

pub use error::{Error, Result};
