//! Mode-multiplexed OAM channel between the BS and a cooperative pair.
//!
//! Two descriptions of the link live here.
//!
//! The mode-domain model is what spectrum efficiency is computed from: the
//! `(ℓ, k)` gain is the OAM intensity of mode ℓ at CU k's offset from the beam
//! axis, the two CUs sample the ring at azimuths `{0, π}`, and demultiplexing
//! with row `q(ℓ)` yields the effective gain `g_de(ℓ) = q(ℓ)·G·q(ℓ)ᴴ`.
//!
//! The antenna-domain model is a line-of-sight free-space channel from the
//! `M` UCA elements to the `K_c` CUs, used for beam steering: with the array
//! or the receive pair tilted by oblique angles the per-element path lengths
//! pick up phase errors, which the steering vectors `b` and `a` undo.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::beam::{self, Beam};
use crate::math::{self, PI, TAU};
use crate::scenario::ScenarioConfig;
use crate::selection::{CooperativePair, UserField};
use crate::{Error, Result};

/// Row tolerance for multiplexing orthonormality.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: values.len() });
        }
        Ok(Self::from_fn(rows, cols, |i, j| Complex64::new(values[i * cols + j], 0.0)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A·Aᴴ`.
    pub fn gram(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.rows, |i, j| {
            self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b.conj()).sum()
        })
    }
}

/// Mode-domain gain `g(ℓ, k) = U_ℓ(r_k, z_c)` for the beam of mode ℓ.
pub fn gain_element(beam: &Beam, r_k: f64, z_c: f64) -> Result<f64> {
    beam::lg_intensity(beam, r_k, z_c)
}

/// Arc-sampling row `(1/√K)·exp(iℓφ_k)`.
pub fn mode_row(mode: i32, angles: &[f64]) -> Vec<Complex64> {
    let norm = 1.0 / math::sqrt(angles.len() as f64);
    angles.iter().map(|&phi| Complex64::from_polar(norm, f64::from(mode) * phi)).collect()
}

/// Spiral-phase row of an `elements`-element UCA, `(1/√M)·exp(iℓ·2π(m-1)/M)`.
pub fn uca_mode_row(mode: i32, elements: usize) -> Vec<Complex64> {
    let angles: Vec<f64> = (0..elements).map(|m| TAU * m as f64 / elements as f64).collect();
    mode_row(mode, &angles)
}

/// Multiplexing matrix with one arc-sampling row per mode.
///
/// Fails when two rows are not orthogonal, e.g. modes of equal parity at
/// diametral angles.
pub fn mux_matrix(modes: &[i32], cu_angles: &[f64]) -> Result<CMatrix> {
    if modes.len() != cu_angles.len() {
        return Err(Error::DimensionMismatch { expected: cu_angles.len(), got: modes.len() });
    }
    let rows: Vec<Vec<Complex64>> = modes.iter().map(|&l| mode_row(l, cu_angles)).collect();
    let q = CMatrix::from_fn(modes.len(), cu_angles.len(), |i, j| rows[i][j]);
    let gram = q.gram();
    for i in 0..q.rows() {
        for j in i + 1..q.rows() {
            let overlap = gram.get(i, j).norm();
            if overlap > ORTHONORMAL_TOL {
                return Err(Error::NonOrthonormal(overlap));
            }
        }
    }
    Ok(q)
}

fn bilinear(left: &[Complex64], g: &CMatrix, right: &[Complex64]) -> Result<Complex64> {
    if left.len() != g.rows() {
        return Err(Error::DimensionMismatch { expected: g.rows(), got: left.len() });
    }
    if right.len() != g.cols() {
        return Err(Error::DimensionMismatch { expected: g.cols(), got: right.len() });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, l) in left.iter().enumerate() {
        for (j, r) in right.iter().enumerate() {
            acc += l * g.get(i, j) * r;
        }
    }
    Ok(acc)
}

/// Demultiplexed gain `q·G·qᴴ` for the mode whose row is `q`.
pub fn effective_gain(q: &[Complex64], g: &CMatrix) -> Result<Complex64> {
    let right: Vec<Complex64> = q.iter().map(|c| c.conj()).collect();
    bilinear(q, g, &right)
}

/// Steered gain `(q_rx ⊙ a)·G·(bᵀ ⊙ q_txᴴ)`.
///
/// `G` is `rx × tx`. With `q_rx = q_tx = q` and all-ones steering this is
/// exactly [`effective_gain`].
pub fn steered_effective_gain(
    q_rx: &[Complex64],
    q_tx: &[Complex64],
    g: &CMatrix,
    a: &[Complex64],
    b: &[Complex64],
) -> Result<Complex64> {
    if a.len() != q_rx.len() {
        return Err(Error::DimensionMismatch { expected: q_rx.len(), got: a.len() });
    }
    if b.len() != q_tx.len() {
        return Err(Error::DimensionMismatch { expected: q_tx.len(), got: b.len() });
    }
    let left: Vec<Complex64> = q_rx.iter().zip(a).map(|(q, a)| q * a).collect();
    let right: Vec<Complex64> = q_tx.iter().zip(b).map(|(q, b)| b * q.conj()).collect();
    bilinear(&left, g, &right)
}

/// Eigenvalues of a 2×2 channel matrix, ascending by modulus.
pub fn mode_eigenvalues(g: &CMatrix) -> Result<[Complex64; 2]> {
    if g.rows() != 2 || g.cols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: g.rows().max(g.cols()) });
    }
    let tr = g.get(0, 0) + g.get(1, 1);
    let det = g.get(0, 0) * g.get(1, 1) - g.get(0, 1) * g.get(1, 0);
    let disc = (tr * tr - det * 4.0).sqrt();
    let mut ev = [(tr - disc) / 2.0, (tr + disc) / 2.0];
    if ev[0].norm() > ev[1].norm() {
        ev.swap(0, 1);
    }
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Watts per channel, in input order.
    pub powers: Vec<f64>,
    pub water_level: f64,
    /// Every channel had zero gain, so nothing was allocated.
    pub degenerate: bool,
}

/// Water-filling over parallel channels with power gains `gains`.
pub fn water_filling(gains: &[f64], total_power: f64, noise_power: f64) -> PowerAllocation {
    let mut live: Vec<(usize, f64)> = gains
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > 0.0 && g.is_finite())
        .map(|(i, &g)| (i, noise_power / g))
        .collect();
    let mut powers = vec![0.0; gains.len()];
    if live.is_empty() || total_power <= 0.0 {
        return PowerAllocation { powers, water_level: 0.0, degenerate: live.is_empty() };
    }
    live.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut n = live.len();
    let mut level;
    loop {
        let floor_sum: f64 = live[..n].iter().map(|&(_, f)| f).sum();
        level = (total_power + floor_sum) / n as f64;
        if level > live[n - 1].1 || n == 1 {
            break;
        }
        n -= 1;
    }
    for &(i, f) in &live[..n] {
        powers[i] = level - f;
    }
    PowerAllocation { powers, water_level: level, degenerate: false }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEfficiency {
    /// bit/s/Hz per mode.
    pub per_mode: Vec<f64>,
    pub total: f64,
}

impl SpectrumEfficiency {
    pub fn zero(modes: usize) -> Self {
        Self { per_mode: vec![0.0; modes], total: 0.0 }
    }
}

/// `Σ log₂(1 + P_ℓ·|g_ℓ|²/σ²)`.
pub fn capacity(powers: &[f64], gains: &[f64], noise_power: f64) -> SpectrumEfficiency {
    let per_mode: Vec<f64> = powers.iter().zip(gains).map(|(&p, &g)| math::log2(1.0 + p * g / noise_power)).collect();
    let total = per_mode.iter().sum();
    SpectrumEfficiency { per_mode, total }
}

/// Transmit (`b`, length `M`) and receive (`a`, length `k_c`) steering vectors.
pub fn steering_vectors(cfg: &ScenarioConfig, r_max: f64, k_c: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let lambda = cfg.wavelength();
    let m_count = cfg.uca_elements;
    let tx_scale = TAU * cfg.uca_radius / lambda * math::sin(cfg.oblique_psi);
    let rx_scale = TAU * r_max / lambda * math::sin(cfg.oblique_phi);
    // cos(α - π/2) = sin α and cos(β + π/2) = -sin β keep the first entries exactly 1
    let b = (0..m_count)
        .map(|m| {
            let alpha = TAU * m as f64 / m_count as f64;
            Complex64::from_polar(1.0, -tx_scale * math::sin(alpha))
        })
        .collect();
    let a = (0..k_c)
        .map(|k| {
            let beta = TAU * k as f64 / k_c as f64;
            Complex64::from_polar(1.0, rx_scale * math::sin(beta))
        })
        .collect();
    (b, a)
}

/// Ring half-width enlarged by steering, `D_max·sin(φ + ψ)/2`.
pub fn feasible_region_epsilon(d_max: f64, phi: f64, psi: f64) -> f64 {
    d_max * math::sin(phi + psi) / 2.0
}

/// Free-space line-of-sight link between array elements and receive points.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLink {
    pub tx: Vec<[f64; 3]>,
    pub rx: Vec<[f64; 3]>,
    pub wavelength: f64,
}

impl AntennaLink {
    /// Link frame: UCA centred at the origin, axis along +z towards the CU
    /// pair centred at distance `distance`. The array plane is tilted by `psi`
    /// and the receive circle of radius `rx_radius` by `phi`, both about the
    /// x axis.
    #[allow(clippy::too_many_arguments)]
    pub fn tilted(
        elements: usize,
        uca_radius: f64,
        rx_count: usize,
        rx_radius: f64,
        distance: f64,
        wavelength: f64,
        phi: f64,
        psi: f64,
    ) -> Self {
        let (sp, cp) = (math::sin(psi), math::cos(psi));
        let tx = (0..elements)
            .map(|m| {
                let alpha = TAU * m as f64 / elements as f64;
                let y = uca_radius * math::sin(alpha);
                [uca_radius * math::cos(alpha), y * cp, y * sp]
            })
            .collect();
        let (sf, cf) = (math::sin(phi), math::cos(phi));
        let rx = (0..rx_count)
            .map(|k| {
                let beta = TAU * k as f64 / rx_count as f64;
                let y = rx_radius * math::sin(beta);
                [rx_radius * math::cos(beta), y * cf, distance + y * sf]
            })
            .collect();
        Self { tx, rx, wavelength }
    }

    /// `rx × tx` matrix of `λ/(4πd)·exp(-i2πd/λ)`.
    pub fn channel(&self) -> CMatrix {
        CMatrix::from_fn(self.rx.len(), self.tx.len(), |k, m| {
            let (p, q) = (self.rx[k], self.tx[m]);
            let (dx, dy, dz) = (p[0] - q[0], p[1] - q[1], p[2] - q[2]);
            let d = math::sqrt(dx * dx + dy * dy + dz * dz);
            Complex64::from_polar(self.wavelength / (4.0 * PI * d), -TAU * d / self.wavelength)
        })
    }
}

/// Everything about one COW link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub modes: Vec<i32>,
    /// Transverse offset of each CU from the beam axis, m.
    pub cu_offsets: Vec<f64>,
    pub z_c: f64,
    /// Waist used for each mode, m.
    pub waists: Vec<f64>,
    pub gain_matrix: CMatrix,
    pub mux_matrix: CMatrix,
    /// Eigenvalues of the gain matrix, matched to the modes.
    pub eigenvalues: Vec<Complex64>,
    pub effective_gains: Vec<Complex64>,
    pub power_alloc: PowerAllocation,
    pub steered_gains: Vec<Complex64>,
    pub steered_power_alloc: PowerAllocation,
    pub steering_tx: Vec<Complex64>,
    pub steering_rx: Vec<Complex64>,
    pub noise_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkEfficiency {
    pub modes: SpectrumEfficiency,
    pub steered: SpectrumEfficiency,
}

/// Spectrum efficiency of a realization, with and without steering.
pub fn spectrum_efficiency(real: &ChannelRealization) -> LinkEfficiency {
    let sq = |g: &[Complex64]| g.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>();
    LinkEfficiency {
        modes: capacity(&real.power_alloc.powers, &sq(&real.effective_gains), real.noise_power),
        steered: capacity(&real.steered_power_alloc.powers, &sq(&real.steered_gains), real.noise_power),
    }
}

const DIAMETRAL: [f64; 2] = [0.0, PI];

/// Offsets of two ground points from the axis joining `(0, 0, height)` to
/// their midpoint.
pub fn transverse_offsets(field: &UserField, pair: &CooperativePair, height: f64) -> [f64; 2] {
    let (x1, y1) = field.positions[pair.cu.0].to_cartesian();
    let (x2, y2) = field.positions[pair.cu.1].to_cartesian();
    let axis = [(x1 + x2) / 2.0, (y1 + y2) / 2.0, -height];
    let len = math::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if len <= 1e-12 {
        return [pair.chord / 2.0; 2];
    }
    let u = [axis[0] / len, axis[1] / len, axis[2] / len];
    [[x1, y1], [x2, y2]].map(|[x, y]| {
        let v = [x, y, -height];
        let along = v[0] * u[0] + v[1] * u[1] + v[2] * u[2];
        let t = [v[0] - along * u[0], v[1] - along * u[1], v[2] - along * u[2]];
        math::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2])
    })
}

struct ModeLink {
    gain_matrix: CMatrix,
    mux_matrix: CMatrix,
    effective_gains: Vec<Complex64>,
    power_alloc: PowerAllocation,
}

fn mode_domain_link(cfg: &ScenarioConfig, beams: &[Beam], offsets: &[f64], z: f64) -> Result<ModeLink> {
    let modes: Vec<i32> = beams.iter().map(|b| b.mode).collect();
    let mut values = Vec::with_capacity(beams.len() * offsets.len());
    for b in beams {
        for &r in offsets {
            values.push(gain_element(b, r, z)?);
        }
    }
    let gain_matrix = CMatrix::from_real(beams.len(), offsets.len(), &values)?;
    let mux_matrix = mux_matrix(&modes, &DIAMETRAL)?;
    let effective_gains =
        (0..modes.len()).map(|i| effective_gain(mux_matrix.row(i), &gain_matrix)).collect::<Result<Vec<_>>>()?;
    let gains_sq: Vec<f64> = effective_gains.iter().map(|g| g.norm_sqr()).collect();
    let power_alloc = water_filling(&gains_sq, cfg.tx_power, cfg.noise_power);
    Ok(ModeLink { gain_matrix, mux_matrix, effective_gains, power_alloc })
}

/// Builds the COW link for a selected pair: one beam per mode with its
/// waist tuned so the ring passes through both CUs.
pub fn build_realization(
    cfg: &ScenarioConfig,
    field: &UserField,
    pair: &CooperativePair,
) -> Result<ChannelRealization> {
    let modes = cfg.multiplexing_modes()?.to_vec();
    let lambda = cfg.wavelength();
    let z_c = pair.z_c;
    let target = pair.chord / 2.0;
    let beams = modes
        .iter()
        .map(|&l| Beam::oam(l, beam::waist_from_target_radius(target, z_c, lambda, l)?, lambda))
        .collect::<Result<Vec<_>>>()?;
    let offsets = transverse_offsets(field, pair, cfg.bs_height);
    let link = mode_domain_link(cfg, &beams, &offsets, z_c)?;

    let ev = mode_eigenvalues(&link.gain_matrix)?;
    let g = &link.effective_gains;
    let straight = (ev[0] - g[0]).norm() + (ev[1] - g[1]).norm();
    let crossed = (ev[1] - g[0]).norm() + (ev[0] - g[1]).norm();
    let eigenvalues = if straight <= crossed { vec![ev[0], ev[1]] } else { vec![ev[1], ev[0]] };

    let (steering_tx, steering_rx) = steering_vectors(cfg, target, offsets.len());
    let antenna = AntennaLink::tilted(
        cfg.uca_elements,
        cfg.uca_radius,
        offsets.len(),
        target,
        z_c,
        lambda,
        cfg.oblique_phi,
        cfg.oblique_psi,
    )
    .channel();
    let steered_gains = modes
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            steered_effective_gain(
                link.mux_matrix.row(i),
                &uca_mode_row(l, cfg.uca_elements),
                &antenna,
                &steering_rx,
                &steering_tx,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let steered_sq: Vec<f64> = steered_gains.iter().map(|g| g.norm_sqr()).collect();
    let steered_power_alloc = water_filling(&steered_sq, cfg.tx_power, cfg.noise_power);

    Ok(ChannelRealization {
        modes,
        cu_offsets: offsets.to_vec(),
        z_c,
        waists: beams.iter().map(|b| b.waist_radius).collect(),
        gain_matrix: link.gain_matrix,
        mux_matrix: link.mux_matrix,
        eigenvalues,
        effective_gains: link.effective_gains,
        power_alloc: link.power_alloc,
        steered_gains,
        steered_power_alloc,
        steering_tx,
        steering_rx,
        noise_power: cfg.noise_power,
    })
}

/// Traditional reception for comparison: the waist is fixed at the UCA
/// radius, the beam points at the user nearest the BS, and that user holds
/// two antennas `baseline_separation` apart across the beam axis.
pub fn fixed_uca_baseline(cfg: &ScenarioConfig, field: &UserField) -> Result<Option<SpectrumEfficiency>> {
    let modes = cfg.multiplexing_modes()?;
    let Some(nearest) = field.positions.iter().min_by(|a, b| a.r.total_cmp(&b.r)) else {
        return Ok(None);
    };
    let z = math::hypot(nearest.r, cfg.bs_height);
    let lambda = cfg.wavelength();
    let beams = modes.iter().map(|&l| Beam::oam(l, cfg.uca_radius, lambda)).collect::<Result<Vec<_>>>()?;
    let offsets = [cfg.baseline_separation / 2.0; 2];
    let link = mode_domain_link(cfg, &beams, &offsets, z)?;
    let gains_sq: Vec<f64> = link.effective_gains.iter().map(|g| g.norm_sqr()).collect();
    Ok(Some(capacity(&link.power_alloc.powers, &gains_sq, cfg.noise_power)))
}
