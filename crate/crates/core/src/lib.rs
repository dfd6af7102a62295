//! Dipole and Röntgen light–matter coupling for hydrogen-like atoms:
//! bound-state matrix elements, recoil-corrected spontaneous emission,
//! electromagnetic vacuum two-point tensors and the vacuum excitation
//! probability of a switched effective dipole, in its rest frame and for a
//! boosted observer.
//!
//! All quantities use natural units `ħ = c = ε₀ = 1` with energies in eV;
//! see [`units`].

pub mod empol;
pub mod error;
pub mod hydrogen;
pub mod quad;
pub mod rates;
pub mod special;
pub mod units;
pub mod vep;
pub mod wightman;

pub use error::{Error, Result};
pub use hydrogen::QuantumNumbers;
pub use units::{AtomParameters, ChargeConvention, UnitSystem};
