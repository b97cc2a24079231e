//! Numerics for symmetric alpha-stable Levy processes at desk scale:
//! closed-form constants, resolvent and potential-kernel quadrature,
//! exact-in-law path simulation, occupation-density local times, and
//! Monte Carlo verification of Tanaka-type pathwise decompositions.

pub mod analysis;
pub mod harness;
pub mod localtime;
pub mod report;
pub mod sampler;
pub mod specfun;
