//! Random max-infinitely-divisible and random max-stable laws.
//!
//! A random max-stable law has d.f. `F = φ(−log H)`, where `H` is a classical
//! max-stable d.f. and `φ` a Laplace transform solving the Poincaré equation
//! `φ(s) = P(φ(θs))`. This crate evaluates such laws in closed form and by
//! mixture quadrature, samples random maxima and extremal processes exactly,
//! and ships a seeded harness that checks the representation and limit
//! results numerically.

pub mod cli;
pub mod error;
pub mod evd;
pub mod extremal;
pub mod harness;
pub mod lt_families;
pub mod nmid;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use evd::{
    AttractionTriple, BaseDist, BaseLaw, Dependence, DistributionFunction, Marginal, MaxStableLaw, PoissonMax,
};
pub use lt_families::{CountScheme, LaplaceFamily, MixerU};
pub use nmid::{mixture_cdf, nmid_cdf, sample_random_max, MaxStrategy, MidLaw, NMaxStableLaw};
pub use rng::Substreams;
