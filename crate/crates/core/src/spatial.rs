//! Monte Carlo model of a spatially extended two-level ensemble.
//!
//! Each sampled atom sits at position `r` (in units of the wavelength λ, so
//! wavevectors have magnitude 2π) and has its own detuning. Pulse `i`
//! imprints the optical phase `kᵢ·r` on the atom, and the field radiated in
//! direction `k` is the phasor sum `Σ ⟨1|ρ|2⟩·e^{ik·r}` over atoms. This is
//! a scalar-dipole model: the single-atom radiation pattern is taken as a
//! constant, so intensities are in units of one atom's emission.

use std::f64::consts::TAU;
use std::io;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::LeadingOrder;
use crate::error::{invalid, Error, Result};
use crate::protocol::{Drive, Protocol, Stop};

/// Wavevector magnitude for λ = 1.
pub const K_MAGNITUDE: f64 = TAU;

fn unit(v: Vector3<f64>) -> Result<Vector3<f64>> {
    let n = v.norm();
    if !(n.is_finite() && n > 0.0) {
        return invalid(format!("direction {v:?} cannot be normalized"));
    }
    Ok(v / n)
}

/// Sampled atoms: positions (in λ) inside a box centered on the origin and
/// Gaussian detunings (in Δ₀).
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialEnsemble {
    positions: Vec<Vector3<f64>>,
    detunings: Vec<f64>,
    geometry: [f64; 3],
}

impl SpatialEnsemble {
    pub fn new(positions: Vec<Vector3<f64>>, detunings: Vec<f64>, geometry: [f64; 3]) -> Result<Self> {
        if positions.is_empty() || positions.len() != detunings.len() {
            return invalid("need matching, non-empty position and detuning lists");
        }
        if !geometry.iter().all(|&g| g.is_finite() && g > 0.0) {
            return invalid(format!("box dimensions must be positive, got {geometry:?}"));
        }
        Ok(Self { positions, detunings, geometry })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn geometry(&self) -> [f64; 3] {
        self.geometry
    }
}

/// Draws `m` atoms uniformly in a box of the given side lengths with
/// detunings from the unit-width normal distribution. Deterministic in
/// `seed`.
pub fn sample_atoms(m: usize, geometry: [f64; 3], seed: u64) -> Result<SpatialEnsemble> {
    if m == 0 {
        return invalid("sample size must be at least 1");
    }
    if !geometry.iter().all(|&g| g.is_finite() && g > 0.0) {
        return invalid(format!("box dimensions must be positive, got {geometry:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(m);
    let mut detunings = Vec::with_capacity(m);
    for _ in 0..m {
        let r = Vector3::from_fn(|i, _| (2.0 * rng.random::<f64>() - 1.0) * (geometry[i] / 2.0));
        positions.push(r);
        detunings.push(rng.sample::<f64, _>(StandardNormal));
    }
    SpatialEnsemble::new(positions, detunings, geometry)
}

/// Uniformly distributed unit vectors, deterministic in `seed`.
pub fn random_directions(n: usize, seed: u64) -> Vec<Vector3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        if let Ok(u) = unit(v) {
            out.push(u);
        }
    }
    out
}

/// Random unit vectors at least `min_angle` radians away from `avoid`.
pub fn directions_away_from(avoid: &Vector3<f64>, min_angle: f64, n: usize, seed: u64) -> Result<Vec<Vector3<f64>>> {
    let avoid = unit(*avoid)?;
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&min_angle) {
        return invalid("exclusion angle must lie in [0, π/2)");
    }
    let cos_max = min_angle.cos();
    let mut out = Vec::with_capacity(n);
    let mut stream = seed;
    while out.len() < n {
        out.extend(random_directions(n, stream).into_iter().filter(|d| d.dot(&avoid) < cos_max));
        stream = stream.wrapping_add(0x9E37_79B9_7F4A_7C15);
    }
    out.truncate(n);
    Ok(out)
}

/// Wavevectors of the three pulses, each of magnitude 2π.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamGeometry {
    pub k1: Vector3<f64>,
    pub k2: Vector3<f64>,
    pub k3: Vector3<f64>,
}

impl BeamGeometry {
    /// Builds the geometry from propagation directions (normalized here).
    pub fn from_directions(d1: Vector3<f64>, d2: Vector3<f64>, d3: Vector3<f64>) -> Result<Self> {
        Ok(Self { k1: unit(d1)? * K_MAGNITUDE, k2: unit(d2)? * K_MAGNITUDE, k3: unit(d3)? * K_MAGNITUDE })
    }

    /// Pulses 1 and 3 along `z`, pulse 2 tilted by `angle` in the x-z plane.
    /// The phase-matched direction `−k₁ + k₂ + k₃` is then exactly along `k₂`
    /// and has magnitude 2π.
    pub fn tilted(angle: f64) -> Result<Self> {
        let z = Vector3::z();
        Self::from_directions(z, Vector3::new(angle.sin(), 0.0, angle.cos()), z)
    }

    /// `−k₁ + k₂ + k₃`.
    pub fn matched_wavevector(&self) -> Vector3<f64> {
        -self.k1 + self.k2 + self.k3
    }

    pub fn matched_direction(&self) -> Result<Vector3<f64>> {
        unit(self.matched_wavevector())
    }

    fn phases(&self, r: &Vector3<f64>) -> [f64; 3] {
        [self.k1.dot(r), self.k2.dot(r), self.k3.dot(r)]
    }
}

impl Default for BeamGeometry {
    fn default() -> Self {
        Self::tilted(0.3).expect("fixed geometry is valid")
    }
}

/// Sum of `values` by pairwise (tree) reduction in index order.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(C64::new(0.0, 0.0), |acc, v| acc + v);
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

fn check_spatial_protocol(protocol: &Protocol) -> Result<()> {
    if protocol.dim() != 2 {
        return invalid("spatial analysis supports two-level protocols only");
    }
    if (1..=3).any(|k| protocol.pulse_time(k).is_none()) {
        return invalid("protocol must label all three pulses with wavevector indices");
    }
    Ok(())
}

/// Per-atom emitters of one protocol run, ready to be projected onto any
/// observation direction.
#[derive(Clone, Debug)]
pub struct DirectionalResponse {
    positions: Vec<Vector3<f64>>,
    /// Leading-order `⟨1|ρ|2⟩` of each atom, spatial pulse phases included.
    coherences: Vec<C64>,
    /// Excited-state population of each atom at the same time without the
    /// storage pulse.
    populations: Vec<f64>,
}

impl DirectionalResponse {
    /// Simulates every sampled atom at time `t`.
    pub fn compute(protocol: &Protocol, ens: &SpatialEnsemble, beams: &BeamGeometry, t: f64) -> Result<Self> {
        check_spatial_protocol(protocol)?;
        if t < protocol.start_time() {
            return invalid(format!("time {t} precedes the first event"));
        }
        let leading = LeadingOrder::new(protocol)?;
        let dark = protocol.with_storage_area(0.0)?;
        let mut coherences = Vec::with_capacity(ens.len());
        let mut populations = Vec::with_capacity(ens.len());
        for (r, &delta) in ens.positions.iter().zip(&ens.detunings) {
            let drive = Drive { phases: beams.phases(r) };
            let c = leading.combine(|p| Ok(p.run(delta, Stop::At(t), &drive)?.optical_coherence()))?;
            let pop = dark.run(delta, Stop::At(t), &drive)?.population(1);
            if !(c.re.is_finite() && c.im.is_finite() && pop.is_finite()) {
                return Err(Error::NumericalFailure(format!("non-finite response at detuning {delta}")));
            }
            coherences.push(c);
            populations.push(pop);
        }
        Ok(Self { positions: ens.positions.clone(), coherences, populations })
    }

    pub fn coherences(&self) -> &[C64] {
        &self.coherences
    }

    pub fn len(&self) -> usize {
        self.coherences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coherences.is_empty()
    }

    /// The response of the first `m` atoms. Since atoms are drawn
    /// independently, this is itself a sample of size `m`.
    pub fn prefix(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return invalid(format!("prefix size {m} outside 1..={}", self.len()));
        }
        Ok(Self {
            positions: self.positions[..m].to_vec(),
            coherences: self.coherences[..m].to_vec(),
            populations: self.populations[..m].to_vec(),
        })
    }

    /// Polarization radiating along the unit vector `direction`.
    pub fn polarization(&self, direction: &Vector3<f64>) -> Result<C64> {
        let k = unit(*direction)? * K_MAGNITUDE;
        let terms: Vec<C64> =
            self.positions.iter().zip(&self.coherences).map(|(r, c)| c * C64::from_polar(1.0, k.dot(r))).collect();
        Ok(pairwise_sum(&terms))
    }

    pub fn intensity(&self, direction: &Vector3<f64>) -> Result<f64> {
        Ok(self.polarization(direction)?.norm_sqr())
    }

    /// Incoherent emission, identical in every direction.
    pub fn fluorescence(&self) -> f64 {
        let terms: Vec<C64> = self.populations.iter().map(|&p| C64::new(p, 0.0)).collect();
        pairwise_sum(&terms).re
    }

    pub fn snr(&self, direction: &Vector3<f64>) -> Result<f64> {
        let noise = self.fluorescence();
        if noise <= 0.0 {
            return Err(Error::UndefinedRatio("fluorescence"));
        }
        Ok(self.intensity(direction)? / noise)
    }

    pub fn scan(&self, directions: &[Vector3<f64>]) -> Result<Vec<ScanRow>> {
        if directions.is_empty() {
            return invalid("scan needs at least one direction");
        }
        directions
            .iter()
            .map(|d| {
                let u = unit(*d)?;
                Ok(ScanRow { direction_x: u.x, direction_y: u.y, direction_z: u.z, intensity: self.intensity(&u)? })
            })
            .collect()
    }
}

/// Polarization at time `t` radiated along `direction`.
pub fn directional_polarization(
    protocol: &Protocol,
    ens: &SpatialEnsemble,
    beams: &BeamGeometry,
    t: f64,
    direction: &Vector3<f64>,
) -> Result<C64> {
    DirectionalResponse::compute(protocol, ens, beams, t)?.polarization(direction)
}

/// Echo intensity at the echo time for each direction.
pub fn phase_matching_scan(
    protocol: &Protocol,
    ens: &SpatialEnsemble,
    beams: &BeamGeometry,
    directions: &[Vector3<f64>],
) -> Result<Vec<ScanRow>> {
    DirectionalResponse::compute(protocol, ens, beams, protocol.echo_time())?.scan(directions)
}

/// Echo intensity along `direction` over the total fluorescence at the echo
/// time.
pub fn directional_snr(
    protocol: &Protocol,
    ens: &SpatialEnsemble,
    beams: &BeamGeometry,
    direction: &Vector3<f64>,
) -> Result<f64> {
    DirectionalResponse::compute(protocol, ens, beams, protocol.echo_time())?.snr(direction)
}

/// One row of a phase-matching scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub direction_x: f64,
    pub direction_y: f64,
    pub direction_z: f64,
    pub intensity: f64,
}

impl ScanRow {
    pub fn direction(&self) -> Vector3<f64> {
        Vector3::new(self.direction_x, self.direction_y, self.direction_z)
    }
}

/// Writes scan rows as CSV with a header row.
pub fn write_scan_csv<W: io::Write>(rows: &[ScanRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["direction_x", "direction_y", "direction_z", "intensity"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
