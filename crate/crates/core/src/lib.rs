//! Reeb dynamics, spectral invariants and index arithmetic on torus-invariant
//! contact models T² × I with contact form α = f(θ) dx + g(θ) dy.

pub mod linalg;
pub mod ode;
pub mod profile;
pub mod reeb;
pub mod spectral;
pub mod index;
pub mod torsion;
pub mod cylinder;
