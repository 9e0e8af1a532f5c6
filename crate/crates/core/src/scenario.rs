//! Scenario parameters and the ground-plane geometry every other module uses.
//!
//! Angles are radians and powers are watts everywhere in here; degree and
//! dBm conversions happen once, at the configuration boundary.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, TAU};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// How many independent trials the formation probability is compounded over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingExponent {
    /// One trial per user, `1 - (1 - p_c)^K`.
    #[default]
    PerUser,
    /// One trial per distinct user pair, `1 - (1 - p_c)^(K(K-1)/2)`.
    PerPair,
}

impl PairingExponent {
    pub fn exponent(self, user_count: usize) -> f64 {
        let k = user_count as f64;
        match self {
            PairingExponent::PerUser => k,
            PairingExponent::PerPair => k * (k - 1.0).max(0.0) / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// Height of the UCA centre above ground, m.
    pub bs_height: f64,
    /// Radius of the BS coverage disk, m.
    pub bs_coverage_radius: f64,
    pub user_count: usize,
    /// Maximum D2D distance between the two cooperative users, m.
    pub d2d_max: f64,
    /// Total transmit power, W.
    pub tx_power: f64,
    /// Noise power, W.
    pub noise_power: f64,
    pub uca_elements: usize,
    /// UCA radius, m.
    pub uca_radius: f64,
    /// OAM modes used for multiplexing.
    pub mode_set: Vec<i32>,
    /// Initial search-ring half-width, m.
    pub ring_half_width: f64,
    /// Receive-side oblique angle, rad.
    pub oblique_phi: f64,
    /// Transmit-side oblique angle, rad.
    pub oblique_psi: f64,
    pub pairing_exponent: PairingExponent,
    /// Receive antenna spacing of the fixed-UCA baseline, m.
    pub baseline_separation: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frequency: 1.0e9,
            bs_height: 10.0,
            bs_coverage_radius: 100.0,
            user_count: 2000,
            d2d_max: 10.0,
            tx_power: dbm_to_watts(30.0),
            noise_power: dbm_to_watts(-90.0),
            uca_elements: 8,
            uca_radius: 0.5,
            mode_set: vec![1, 2],
            ring_half_width: 0.5,
            oblique_phi: 3.0_f64.to_radians(),
            oblique_psi: 3.0_f64.to_radians(),
            pairing_exponent: PairingExponent::PerUser,
            baseline_separation: 0.5,
        }
    }
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    /// Angular spacing of the BS array elements, `2π/M`.
    pub fn uca_central_angle(&self) -> f64 {
        TAU / self.uca_elements as f64
    }

    /// Largest |ℓ| in the mode set; it sets the binding feasibility radius.
    pub fn max_abs_mode(&self) -> u32 {
        self.mode_set.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    /// Ring half-width enlarged by steering compensation of the oblique angles.
    pub fn steered_ring_half_width(&self) -> f64 {
        crate::channel::feasible_region_epsilon(self.d2d_max, self.oblique_phi, self.oblique_psi)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.frequency) {
            return Err(Error::InvalidConfig("frequency must be positive"));
        }
        if !(self.bs_height.is_finite() && self.bs_height >= 0.0) {
            return Err(Error::InvalidConfig("bs_height must be non-negative"));
        }
        if !positive(self.bs_coverage_radius) {
            return Err(Error::InvalidConfig("bs_coverage_radius must be positive"));
        }
        if !(positive(self.ring_half_width) && self.ring_half_width < self.bs_coverage_radius) {
            return Err(Error::InvalidConfig("ring_half_width must lie in (0, bs_coverage_radius)"));
        }
        if !(positive(self.d2d_max) && self.d2d_max <= 2.0 * self.bs_coverage_radius) {
            return Err(Error::InvalidConfig("d2d_max must lie in (0, 2 * bs_coverage_radius]"));
        }
        if !positive(self.tx_power) || !positive(self.noise_power) {
            return Err(Error::InvalidConfig("tx_power and noise_power must be positive"));
        }
        if self.uca_elements == 0 || !positive(self.uca_radius) {
            return Err(Error::InvalidConfig("the UCA needs at least one element and a positive radius"));
        }
        if self.mode_set.is_empty() || self.mode_set.contains(&0) {
            return Err(Error::InvalidConfig("mode_set entries must be nonzero"));
        }
        if !(self.oblique_phi.is_finite() && self.oblique_psi.is_finite()) {
            return Err(Error::InvalidConfig("oblique angles must be finite"));
        }
        if !(self.baseline_separation.is_finite() && self.baseline_separation >= 0.0) {
            return Err(Error::InvalidConfig("baseline_separation must be non-negative"));
        }
        Ok(())
    }

    /// Multiplexing operations need exactly two modes.
    pub fn multiplexing_modes(&self) -> Result<[i32; 2]> {
        match self.mode_set.as_slice() {
            &[a, b] => Ok([a, b]),
            other => Err(Error::DimensionMismatch { expected: 2, got: other.len() }),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    math::powf(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * math::log10(watts) + 30.0
}

/// A ground point in polar coordinates about the BS foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    /// Normalizes `theta` into `[0, 2π)`; a negative radius is reflected.
    pub fn new(r: f64, theta: f64) -> Self {
        let (r, theta) = if r < 0.0 { (-r, theta + core::f64::consts::PI) } else { (r, theta) };
        Self { r, theta: normalize_angle(theta) }
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        Self::new(math::hypot(x, y), math::atan2(y, x))
    }

    pub fn to_cartesian(self) -> (f64, f64) {
        (self.r * math::cos(self.theta), self.r * math::sin(self.theta))
    }
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta - TAU * math::floor(theta / TAU);
    // rounding can land exactly on 2π
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Planar distance between two ground points.
pub fn chord_distance(u: PolarPoint, v: PolarPoint) -> f64 {
    if u == v {
        return 0.0;
    }
    let (ux, uy) = u.to_cartesian();
    let (vx, vy) = v.to_cartesian();
    math::hypot(ux - vx, uy - vy)
}

/// Length of the beam axis from the UCA centre to the midpoint of a chord of
/// length `d` on the circle of radius `r_s`.
pub fn beam_axis_length(r_s: f64, d: f64, height: f64) -> Result<f64> {
    let radicand = r_s * r_s - d * d / 4.0 + height * height;
    if radicand < 0.0 || radicand.is_nan() {
        return Err(Error::Domain { what: "beam axis radicand", value: radicand });
    }
    Ok(math::sqrt(radicand))
}
