//! Numerical toolkit for round magnetic electron lenses.
//!
//! The crate covers the paraxial theory of axially symmetric magnetic lenses
//! (fundamental solutions, Larmor rotation, transfer maps, cardinal elements),
//! the third-order geometric aberration coefficients, and the exact paraxial
//! propagation of a transverse wavefunction between two axial planes.
//!
//! Units: lengths in millimetres, axial fields in tesla, energies in eV and
//! momenta as `p0·c` in eV. The lens strength `α(z) = q·B(z)/(2·p0)` is
//! therefore expressed in 1/mm.
//!
//! Every analytic route is paired with an independent numerical one:
//! closed forms and Bessel series against Peano-Baker iterated integrals and
//! adaptive Runge-Kutta integration; three equivalent integrals for the
//! spherical aberration coefficient; wave propagation against the ray
//! transfer map.

pub mod aberration;
pub mod beamkin;
pub mod error;
pub mod fields;
pub mod ode;
pub mod paraxial;
pub mod quadrature;
pub mod specfun;
pub mod spline;
pub mod wavefield;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use aberration::{
    aberration_coefficients, aberration_displacement, hawkes_c, scherzer_c,
    third_moment_decomposition, AberrationDisplacement, AberrationMap, AberrationSet,
    MomentModel, ThirdMoment,
};
pub use beamkin::BeamKinematics;
pub use error::{Error, Result};
pub use fields::{FieldProfile, HalfLine, LensStrength};
pub use paraxial::{
    cardinal_elements, find_image_plane, glaser_pair, larmor_angle, ode_pair,
    peano_baker_pair, powerlaw_pair_neg, powerlaw_pair_pos, trace_centroid, transfer_map,
    CardinalElements, CentroidState, FundamentalPair, PairSolver, TransferMap,
};
pub use wavefield::{
    make_gaussian, moments, propagate, propagate_to_image, Branch, GridSpec, Moments,
    PropagationPlan, WaveField,
};
