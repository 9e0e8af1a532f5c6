//! Closed-form cooperative formation probability.
//!
//! For a ring at radius `r_s`, `P_r = 4·r_s·ε/R_BS²` is the chance one
//! uniform user falls inside it and `P_s = P_r²` that two do. Two users on the
//! ring are a feasible pair when their chord lies in `[D_min(r_s), D_max]`;
//! with uniform angles that happens with probability `P_d(r_s)`, the share of
//! the angular range `[0, π]` between the matching chord angles. Summing
//! `P_s·P_d` over the disjoint rings that tile the disk gives the per-pair
//! probability `P_c`, which is then compounded over the user population.

use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::scenario::{PairingExponent, ScenarioConfig};
use crate::selection::{ring_count, SearchRing};
use crate::{Error, Result};

/// Probability that one uniform user lands in the ring at `r_s`.
pub fn ring_probability(r_s: f64, epsilon: f64, coverage_radius: f64) -> Result<f64> {
    let slack = 1e-9 * coverage_radius;
    if !(epsilon > 0.0 && r_s + slack >= epsilon && r_s <= coverage_radius - epsilon + slack) {
        return Err(Error::Domain { what: "search radius", value: r_s });
    }
    let outer = r_s + epsilon;
    let inner = r_s - epsilon;
    Ok((outer * outer - inner * inner) / (coverage_radius * coverage_radius))
}

/// Smallest feasible chord at ring radius `r_s`: the fixed point of
/// `D = 2·R_fea(sqrt(H² + r_s² - D²/4))` for mode `mode`.
pub fn min_pair_distance_for(r_s: f64, height: f64, wavelength: f64, mode: u32) -> f64 {
    let a = wavelength * f64::from(mode) / PI;
    let c = height * height + r_s * r_s;
    // (2a)(sqrt(a² + 4c) - a), rationalized
    let d2 = 8.0 * a * c / (math::sqrt(a * a + 4.0 * c) + a);
    if d2 > 0.0 {
        math::sqrt(d2)
    } else {
        0.0
    }
}

pub fn min_pair_distance(r_s: f64, cfg: &ScenarioConfig) -> f64 {
    min_pair_distance_for(r_s, cfg.bs_height, cfg.wavelength(), cfg.max_abs_mode())
}

/// Central angle subtended by a chord of length `d` on a circle of radius `r`;
/// saturates at π for chords at least a diameter long.
pub fn chord_angle(d: f64, r: f64) -> f64 {
    if d >= 2.0 * r {
        PI
    } else {
        2.0 * math::asin(d / (2.0 * r))
    }
}

/// `(θ_min, θ_max)` for the chords `D_min(r_s)` and `D_max`.
pub fn angle_window(r_s: f64, cfg: &ScenarioConfig) -> (f64, f64) {
    let theta_min = chord_angle(min_pair_distance(r_s, cfg), r_s);
    let theta_max = chord_angle(cfg.d2d_max, r_s);
    (theta_min, theta_max)
}

/// Smallest ring radius at which any feasible chord exists, `R_fea(H)`.
pub fn r_min(cfg: &ScenarioConfig) -> f64 {
    crate::beam::feasible_radius(cfg.bs_height, cfg.wavelength(), cfg.max_abs_mode() as i32)
}

/// Ring radius at which `D_min` reaches `D_max`; zero if it already does at
/// the BS foot.
pub fn r_v(cfg: &ScenarioConfig) -> f64 {
    let lam_l = cfg.wavelength() * f64::from(cfg.max_abs_mode());
    let d = cfg.d2d_max;
    let radicand = PI * PI * d * d * d * d / (16.0 * lam_l * lam_l) + d * d / 4.0 - cfg.bs_height * cfg.bs_height;
    if radicand > 0.0 {
        math::sqrt(radicand)
    } else {
        0.0
    }
}

pub fn r_max_search(cfg: &ScenarioConfig) -> f64 {
    r_v(cfg).min(cfg.bs_coverage_radius)
}

/// Probability that two uniform users on the ring at `r_s` are a feasible pair.
pub fn distance_condition_probability(r_s: f64, cfg: &ScenarioConfig) -> f64 {
    if r_s < r_min(cfg) || r_s > cfg.bs_coverage_radius || r_s <= 0.0 {
        return 0.0;
    }
    let d_min = min_pair_distance(r_s, cfg);
    if d_min >= 2.0 * r_s {
        // no chord of the circle is long enough
        return 0.0;
    }
    let (theta_min, theta_max) = angle_window(r_s, cfg);
    if r_s <= cfg.d2d_max / 2.0 {
        (PI - theta_min) / PI
    } else if r_s <= r_max_search(cfg) {
        ((theta_max - theta_min) / PI).max(0.0)
    } else {
        0.0
    }
}

/// One ring's contribution to the ring sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingTerm {
    pub r_s: f64,
    pub p_r: f64,
    pub p_s: f64,
    pub d_min: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub p_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormationProbabilityBreakdown {
    pub rings: Vec<RingTerm>,
    pub r_min: f64,
    pub r_v: f64,
    pub r_max_search: f64,
    /// Probability that a given pair of users shares a ring and is feasible.
    pub p_c: f64,
    /// Compounded over `K` trials.
    pub p_cow_per_user: f64,
    /// Compounded over `K(K-1)/2` trials.
    pub p_cow_per_pair: f64,
    /// Under the configured convention.
    pub p_cow: f64,
}

/// `1 - (1 - p)^exponent`, accurate for tiny `p`.
pub fn compound_probability(p: f64, exponent: f64) -> f64 {
    if exponent <= 0.0 || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    (-math::exp_m1(exponent * math::ln_1p(-p))).clamp(0.0, 1.0)
}

pub fn formation_probability(cfg: &ScenarioConfig) -> FormationProbabilityBreakdown {
    let eps = cfg.ring_half_width;
    let radius = cfg.bs_coverage_radius;
    let rings: Vec<RingTerm> = (1..=ring_count(radius, eps))
        .map(|i| {
            let SearchRing { r_s, .. } = SearchRing::nth(i, eps);
            let p_r = ring_probability(r_s, eps, radius).unwrap_or(0.0);
            let (theta_min, theta_max) = angle_window(r_s, cfg);
            RingTerm {
                r_s,
                p_r,
                p_s: p_r * p_r,
                d_min: min_pair_distance(r_s, cfg),
                theta_min,
                theta_max,
                p_d: distance_condition_probability(r_s, cfg),
            }
        })
        .collect();
    let p_c = pairwise_sum(&rings.iter().map(|t| t.p_s * t.p_d).collect::<Vec<_>>()).clamp(0.0, 1.0);
    let k = cfg.user_count;
    let p_cow_per_user = compound_probability(p_c, PairingExponent::PerUser.exponent(k));
    let p_cow_per_pair = compound_probability(p_c, PairingExponent::PerPair.exponent(k));
    let p_cow = match cfg.pairing_exponent {
        PairingExponent::PerUser => p_cow_per_user,
        PairingExponent::PerPair => p_cow_per_pair,
    };
    FormationProbabilityBreakdown {
        rings,
        r_min: r_min(cfg),
        r_v: r_v(cfg),
        r_max_search: r_max_search(cfg),
        p_c,
        p_cow_per_user,
        p_cow_per_pair,
        p_cow,
    }
}

/// Fixed-order pairwise summation.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
