//! Cooperative OAM wireless links.
//!
//! A base station with a uniform circular array cannot serve a single
//! size-limited handset with a multiplexed OAM signal, because the hollow
//! vortex ring grows far wider than the handset. Instead two nearby users on
//! the same BS-centred circle are paired as cooperative users (CUs), and the
//! beam waist is tuned so the maximum-intensity ring passes through both of
//! them.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the models:
//!
//! * [`scenario`]: configuration and ground-plane geometry.
//! * [`beam`]: Laguerre-Gaussian amplitude, intensity and waist inversion.
//! * [`selection`]: ring search for a cooperative pair.
//! * [`analytic`]: closed-form cooperative formation probability.
//! * [`channel`]: mode-domain channel, water-filling, spectrum efficiency and
//!   beam steering.
//! * [`trial`]: one Monte Carlo trial of the whole pipeline, plus the seed
//!   derivation used by sweep harnesses.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod beam;
pub mod channel;
mod error;
mod math;
pub mod scenario;
pub mod selection;
pub mod trial;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
