//! Cooperative pair selection.
//!
//! Users are bucketed into search rings `[r_s - ε, r_s + ε]` with
//! `r_s = ε, 3ε, 5ε, …`. Inside a ring every pair of potential users (PUs) is
//! a candidate; a candidate is feasible when its chord `d` satisfies
//! `2·R_fea(z_c) ≤ d ≤ D_max`, i.e. a waist exists that puts the OAM ring
//! through both users and they can still talk over D2D. The feasible pair with
//! the smallest chord over the whole sweep wins. When no ring yields a pair
//! the half-width is doubled and the sweep repeats, until `ε > R_BS`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam;
use crate::math::{self, TAU};
use crate::scenario::{beam_axis_length, PolarPoint, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Disk of the given radius centred on the BS foot.
    Disk { radius: f64 },
    /// Axis-aligned square of the given side centred on the BS foot.
    Square { side: f64 },
}

impl Region {
    pub fn contains(&self, p: PolarPoint) -> bool {
        match *self {
            Region::Disk { radius } => p.r <= radius,
            Region::Square { side } => {
                let (x, y) = p.to_cartesian();
                let h = side / 2.0 + 1e-9 * side;
                math::abs(x) <= h && math::abs(y) <= h
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> PolarPoint {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        match *self {
            Region::Disk { radius } => PolarPoint::new(radius * math::sqrt(u), TAU * v),
            Region::Square { side } => PolarPoint::from_cartesian((u - 0.5) * side, (v - 0.5) * side),
        }
    }
}

/// One realization of user positions.
#[derive(Debug, Clone, PartialEq)]
pub struct UserField {
    pub positions: Vec<PolarPoint>,
    pub seed: u64,
    pub region: Region,
}

impl UserField {
    /// Draws `count` i.i.d. uniform users; the same seed always yields the
    /// same field.
    pub fn generate(count: usize, region: Region, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = (0..count).map(|_| region.sample(&mut rng)).collect();
        Self { positions, seed, region }
    }

    pub fn from_positions(positions: Vec<PolarPoint>, region: Region) -> Self {
        Self { positions, seed: 0, region }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRing {
    pub r_s: f64,
    pub epsilon: f64,
}

impl SearchRing {
    /// The `i`-th ring (1-based) at half-width `epsilon`, `r_s = (2i - 1)ε`.
    pub fn nth(i: usize, epsilon: f64) -> Self {
        Self { r_s: (2 * i - 1) as f64 * epsilon, epsilon }
    }

    pub fn inner(&self) -> f64 {
        self.r_s - self.epsilon
    }

    pub fn outer(&self) -> f64 {
        self.r_s + self.epsilon
    }

    pub fn contains(&self, r: f64) -> bool {
        self.inner() <= r && r <= self.outer()
    }
}

/// Number of rings `r_s = ε, 3ε, …` with `r_s ≤ R_BS - ε`.
pub fn ring_count(coverage_radius: f64, epsilon: f64) -> usize {
    let n = coverage_radius / (2.0 * epsilon);
    // absorb rounding when R_BS is an exact multiple of 2ε
    math::floor(n + 1e-9 * n.max(1.0)) as usize
}

/// Indices of users inside `ring`, ascending.
pub fn potential_users(field: &UserField, ring: &SearchRing) -> Vec<usize> {
    field.positions.iter().enumerate().filter(|(_, p)| ring.contains(p.r)).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStatus {
    PairFound,
    NoPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooperativePair {
    /// User indices, `k1 < k2`.
    pub cu: (usize, usize),
    /// First ring in which the pair was found.
    pub ring: SearchRing,
    /// D2D distance between the two users, m.
    pub chord: f64,
    /// Beam axis length from the UCA centre to the chord midpoint, m.
    pub z_c: f64,
    /// Waist of the largest-|ℓ| mode that puts its ring at `chord / 2`, m.
    pub waist_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub status: SelectionStatus,
    pub pair: Option<CooperativePair>,
    /// Half-width of the last sweep.
    pub epsilon: f64,
    /// Total rings visited over all sweeps.
    pub iterations_inner: usize,
    /// Number of sweeps.
    pub iterations_outer: usize,
}

impl SelectionResult {
    pub fn is_found(&self) -> bool {
        self.status == SelectionStatus::PairFound
    }
}

/// `(⌈R_BS/2ε⌉, ⌈log₂(1 + R_BS/ε)⌉)`: ring visits per sweep and sweeps.
pub fn iteration_bound(cfg: &ScenarioConfig) -> (usize, usize) {
    let ratio = cfg.bs_coverage_radius / cfg.ring_half_width;
    let inner = math::ceil(ratio / 2.0 - 1e-12) as usize;
    let outer = math::ceil(math::log2(1.0 + ratio) - 1e-12) as usize;
    (inner.max(1), outer.max(1))
}

/// Full search with ε doubling from `cfg.ring_half_width`.
pub fn select_pair(field: &UserField, cfg: &ScenarioConfig) -> SelectionResult {
    let index = RadialIndex::new(field);
    let mut epsilon = cfg.ring_half_width;
    let mut inner = 0;
    let mut outer = 0;
    let mut last_epsilon = epsilon;
    while epsilon <= cfg.bs_coverage_radius {
        outer += 1;
        let (pair, visited) = sweep(&index, cfg, epsilon);
        inner += visited;
        last_epsilon = epsilon;
        if let Some(pair) = pair {
            return SelectionResult {
                status: SelectionStatus::PairFound,
                pair: Some(pair),
                epsilon,
                iterations_inner: inner,
                iterations_outer: outer,
            };
        }
        epsilon *= 2.0;
    }
    SelectionResult {
        status: SelectionStatus::NoPair,
        pair: None,
        epsilon: last_epsilon,
        iterations_inner: inner,
        iterations_outer: outer,
    }
}

/// A single sweep at a fixed half-width, without doubling.
pub fn select_pair_at(field: &UserField, cfg: &ScenarioConfig, epsilon: f64) -> SelectionResult {
    let index = RadialIndex::new(field);
    let (pair, visited) = sweep(&index, cfg, epsilon);
    SelectionResult {
        status: if pair.is_some() { SelectionStatus::PairFound } else { SelectionStatus::NoPair },
        pair,
        epsilon,
        iterations_inner: visited,
        iterations_outer: 1,
    }
}

/// Checks one candidate pair; returns `(z_c, waist)` when it is feasible.
pub fn pair_feasibility(a: PolarPoint, b: PolarPoint, chord: f64, cfg: &ScenarioConfig) -> Option<(f64, f64)> {
    if chord > cfg.d2d_max || chord <= 0.0 {
        return None;
    }
    let z_c = midpoint_axis_length(a, b, chord, cfg.bs_height)?;
    let mode = cfg.max_abs_mode() as i32;
    let waist = beam::waist_from_target_radius(chord / 2.0, z_c, cfg.wavelength(), mode).ok()?;
    Some((z_c, waist))
}

/// Beam axis length to the chord midpoint, with the quadratic mean of the two
/// radii as the circle radius; this is exactly the BS-to-midpoint distance.
pub fn midpoint_axis_length(a: PolarPoint, b: PolarPoint, chord: f64, height: f64) -> Option<f64> {
    let r_eff = math::sqrt((a.r * a.r + b.r * b.r) / 2.0);
    beam_axis_length(r_eff, chord, height)
        .ok()
        // the radicand can round a hair below zero for a true diameter
        .or_else(|| (chord / 2.0 - r_eff <= 1e-9 * r_eff.max(1.0)).then_some(height))
}

struct RadialIndex<'a> {
    field: &'a UserField,
    /// User indices sorted by radius.
    order: Vec<usize>,
    radii: Vec<f64>,
    xy: Vec<(f64, f64)>,
}

impl<'a> RadialIndex<'a> {
    fn new(field: &'a UserField) -> Self {
        let mut order: Vec<usize> = (0..field.len()).collect();
        order.sort_by(|&i, &j| field.positions[i].r.total_cmp(&field.positions[j].r).then(i.cmp(&j)));
        let radii = order.iter().map(|&i| field.positions[i].r).collect();
        let xy = field.positions.iter().map(|p| p.to_cartesian()).collect();
        Self { field, order, radii, xy }
    }

    fn ring_members(&self, ring: &SearchRing) -> &[usize] {
        let lo = self.radii.partition_point(|&r| r < ring.inner());
        let hi = self.radii.partition_point(|&r| r <= ring.outer());
        &self.order[lo..hi.max(lo)]
    }
}

fn sweep(index: &RadialIndex<'_>, cfg: &ScenarioConfig, epsilon: f64) -> (Option<CooperativePair>, usize) {
    let rings = ring_count(cfg.bs_coverage_radius, epsilon);
    let d_max2 = cfg.d2d_max * cfg.d2d_max;
    let mut best: Option<CooperativePair> = None;
    for i in 1..=rings {
        let ring = SearchRing::nth(i, epsilon);
        let members = index.ring_members(&ring);
        if members.len() < 2 {
            continue;
        }
        for (a, &ka) in members.iter().enumerate() {
            for &kb in &members[a + 1..] {
                let (k1, k2) = if ka < kb { (ka, kb) } else { (kb, ka) };
                let (x1, y1) = index.xy[k1];
                let (x2, y2) = index.xy[k2];
                let (dx, dy) = (x1 - x2, y1 - y2);
                if dx * dx + dy * dy > d_max2 * (1.0 + 1e-12) {
                    continue;
                }
                let chord = math::hypot(dx, dy);
                if let Some(cur) = &best {
                    let better = chord < cur.chord || (chord == cur.chord && (k1, k2) < cur.cu);
                    if !better {
                        continue;
                    }
                }
                let p1 = index.field.positions[k1];
                let p2 = index.field.positions[k2];
                if let Some((z_c, waist_radius)) = pair_feasibility(p1, p2, chord, cfg) {
                    best = Some(CooperativePair { cu: (k1, k2), ring, chord, z_c, waist_radius });
                }
            }
        }
    }
    (best, rings)
}
