//! Laguerre-Gaussian beam physics.
//!
//! The OAM beam is the LG beam with radial index `p = 0`. Its intensity is a
//! ring whose radius `r_max(z) = sqrt(|ℓ|/2)·w(z)` grows with distance. The
//! selection scheme inverts that relation: given the radius it wants the ring
//! to have at the receivers, [`waist_from_target_radius`] returns the waist
//! the transmitter has to use.

use num_complex::Complex64;

use crate::math::{self, PI};
use crate::{Error, Result};

/// One LG beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    /// Topological charge ℓ.
    pub mode: i32,
    /// Number of radial nodes p.
    pub radial_index: u32,
    /// Waist radius w₀ at z = 0, m.
    pub waist_radius: f64,
    pub wavelength: f64,
}

impl Beam {
    pub fn new(mode: i32, radial_index: u32, waist_radius: f64, wavelength: f64) -> Result<Self> {
        if !(waist_radius.is_finite() && waist_radius > 0.0) {
            return Err(Error::Domain { what: "waist radius", value: waist_radius });
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Domain { what: "wavelength", value: wavelength });
        }
        Ok(Self { mode, radial_index, waist_radius, wavelength })
    }

    /// OAM beam (`p = 0`).
    pub fn oam(mode: i32, waist_radius: f64, wavelength: f64) -> Result<Self> {
        Self::new(mode, 0, waist_radius, wavelength)
    }

    pub fn abs_mode(&self) -> u32 {
        self.mode.unsigned_abs()
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist_radius * self.waist_radius / self.wavelength
    }

    /// w(z) = w₀·sqrt(1 + (z/z_R)²).
    pub fn beam_radius(&self, z: f64) -> f64 {
        self.waist_radius * math::hypot(1.0, z / self.rayleigh_range())
    }

    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn gouy_phase(&self, z: f64) -> f64 {
        f64::from(2 * self.radial_index + self.abs_mode() + 1) * math::atan(z / self.rayleigh_range())
    }
}

/// Associated Laguerre polynomial `L_p^α(x)` by the three-term recurrence.
pub fn laguerre_polynomial(p: u32, alpha: u32, x: f64) -> f64 {
    let a = f64::from(alpha);
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 2..=p {
        let k = f64::from(k);
        let next = ((2.0 * k - 1.0 + a - x) * cur - (k - 1.0 + a) * prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

/// Complex LG amplitude `U_{p,ℓ}(r, θ, z)`.
pub fn lg_amplitude(b: &Beam, r: f64, theta: f64, z: f64) -> Complex64 {
    let l = b.abs_mode();
    let p = b.radial_index;
    let w = b.beam_radius(z);
    let zr = b.rayleigh_range();
    let rho2 = 2.0 * r * r / (w * w);

    // sqrt(2 p! / (π w² (p+|ℓ|)!)) · (r√2/w)^|ℓ|, assembled in the log domain
    // so large |ℓ| cannot overflow.
    let magnitude = if r == 0.0 && l > 0 {
        0.0
    } else {
        let ln_norm = 0.5
            * (math::ln(2.0) + math::ln_factorial(p) - math::ln(PI) - 2.0 * math::ln(w) - math::ln_factorial(p + l));
        let ln_radial = if l == 0 { 0.0 } else { 0.5 * f64::from(l) * math::ln(rho2) };
        math::exp(ln_norm + ln_radial - r * r / (w * w))
    };
    let laguerre = laguerre_polynomial(p, l, rho2);

    let curvature = b.wave_number() * r * r * z / (2.0 * (z * z + zr * zr));
    let phase = f64::from(b.mode) * theta + curvature - b.gouy_phase(z);
    Complex64::from_polar(magnitude * laguerre, phase)
}

/// OAM intensity `U_ℓ(r, z)`; only defined for `p = 0`.
pub fn lg_intensity(b: &Beam, r: f64, z: f64) -> Result<f64> {
    if b.radial_index != 0 {
        return Err(Error::UnsupportedRadialIndex(b.radial_index));
    }
    let l = b.abs_mode();
    let w = b.beam_radius(z);
    let rho2 = 2.0 * r * r / (w * w);
    if r == 0.0 {
        return Ok(if l == 0 { 2.0 / (PI * w * w) } else { 0.0 });
    }
    let ln_u = math::ln(2.0 / (PI * w * w)) - math::ln_factorial(l) + f64::from(l) * math::ln(rho2) - rho2;
    Ok(math::exp(ln_u))
}

/// Radius of the intensity ring, `sqrt(|ℓ|/2)·w(z)`.
pub fn max_intensity_radius(b: &Beam, z: f64) -> f64 {
    math::sqrt(f64::from(b.abs_mode()) / 2.0) * b.beam_radius(z)
}

/// Peak intensity on the ring, `2|ℓ|^|ℓ| e^{-|ℓ|} / (π w² |ℓ|!)`.
pub fn max_intensity(b: &Beam, z: f64) -> f64 {
    let l = f64::from(b.abs_mode());
    let w = b.beam_radius(z);
    let ln_peak = if l == 0.0 { 0.0 } else { l * math::ln(l) - l };
    2.0 * math::exp(ln_peak - math::ln_factorial(b.abs_mode())) / (PI * w * w)
}

/// Smallest ring radius any waist can produce at distance `z`.
pub fn feasible_radius(z: f64, wavelength: f64, mode: i32) -> f64 {
    math::sqrt(z * wavelength * f64::from(mode.unsigned_abs()) / PI)
}

/// Waist that puts the intensity ring of mode `mode` at `r_target` at
/// distance `z`, taking the smaller of the two roots.
///
/// At `z = 0` the smaller root degenerates to zero and the only physical
/// waist is `r_target·sqrt(2/|ℓ|)`, which is returned instead.
pub fn waist_from_target_radius(r_target: f64, z: f64, wavelength: f64, mode: i32) -> Result<f64> {
    let l = f64::from(mode.unsigned_abs());
    if l == 0.0 {
        return Err(Error::Domain { what: "OAM mode", value: 0.0 });
    }
    if !(z >= 0.0 && r_target > 0.0 && wavelength > 0.0) {
        return Err(Error::Domain { what: "waist inversion input", value: r_target });
    }
    if z == 0.0 {
        return Ok(r_target * math::sqrt(2.0 / l));
    }
    let feasible = feasible_radius(z, wavelength, mode);
    let a = r_target * r_target / l;
    let c = z * wavelength / PI;
    let radicand = a * a - c * c;
    if radicand < 0.0 {
        return Err(Error::InfeasibleTarget { target: r_target, feasible });
    }
    // The roots multiply to c², so the small root avoids a - sqrt(a² - c²).
    let w0_sq = c * c / (a + math::sqrt(radicand));
    Ok(math::sqrt(w0_sq))
}
