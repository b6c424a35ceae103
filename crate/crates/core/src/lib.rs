//! Infrared bremsstrahlung decoherence in electron–neutrino scattering.
//!
//! The crate evaluates soft-photon coherent-state functionals for the
//! electron leg of elastic `e ν` scattering, the overlaps between radiation
//! states attached to different scattering branches, the V−A contact
//! amplitude that weights those branches, and the reduced density matrix
//! obtained by tracing out the radiation. A truncated Fock-space oracle and
//! a rescattering Monte Carlo check the analytic pieces.

pub mod branches;
pub mod cli;
pub mod current;
pub mod error;
pub mod fock;
pub mod kinematics;
pub mod radiation;
pub mod restoration;
pub mod weak;

pub use error::{Error, Result};
pub use kinematics::{build_cms_event, mdot, FourVector, ScatteringEvent};
