//! Casimir forces and energy densities from the dielectric-contrast Born
//! series of the electromagnetic dyadic Green's function.
//!
//! The library computes, at zero temperature and in natural units
//! (ħ = c = ε₀ = 1, μ = 1):
//!
//! * the Casimir force per unit area between two parallel dielectric
//!   half-spaces to second order in the dielectric contrast, together with
//!   its decomposition by scattering topology and the exact Lifshitz
//!   reference ([`planar`]);
//! * first- and second-order Casimir energy densities in all three regions of
//!   the slab geometry, the δ-regularized total energy and the force obtained
//!   from it ([`planar`]);
//! * first-order energy densities outside arbitrary finite two-body volumes
//!   by seeded Monte Carlo volume integration, including the box-pair
//!   geometry ([`montecarlo`]).
//!
//! Module layout: [`materials`] (permittivity models on the imaginary
//! frequency axis), [`green`] (kernel families and the homogeneous dyadic
//! Green's function), [`quadrature`] (deterministic adaptive integration over
//! the semi-infinite quadrant), [`planar`], [`montecarlo`].

pub mod error;
pub mod green;
pub mod materials;
pub mod montecarlo;
pub mod planar;
pub mod quadrature;

pub use error::{Error, Result};
pub use green::{DiagKernel3, FieldType, Region, SgnSq, SpectralPoint, TraceKernelPair};
pub use materials::{Contrast, Permittivity, TablePermittivity};
pub use montecarlo::{DensityMapRow, Geometry, GreenEstimate, McResult, McSpec, VolumePair};
pub use planar::{
    DensityProfile, DensitySample, RegularizedEnergy, SlabPair, StressParts,
};
pub use quadrature::{Mapping, QuadResult, QuadSpec};
