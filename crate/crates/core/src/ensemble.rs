//! Ensemble averages over the Gaussian spectral distribution and the
//! observables built on them.
//!
//! Spectral density: `g(Δ) = N/(√(2π)Δ₀)·exp(−Δ²/(2Δ₀²))`, so `∫g = N`.
//! Units: dipole moment and single-atom intensity are both 1.
//!
//! Echo-related quantities are reported to leading order in the storage
//! pulse area. The simulation is run at `±θ` and `±θ/2`; the odd parts
//! cancel every contribution that does not flip sign with the input field
//! (free-induction tails of the rephasing pulses, terms quadratic in `θ`)
//! and a Richardson step removes the cubic correction.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_finite, Error, Result};
use crate::protocol::{Drive, Protocol, Stop};

/// Quadrature nodes cover `±SPAN` standard deviations; the Gaussian tail
/// beyond is below 1e-21.
const SPAN: f64 = 10.0;
/// Spectral margin between the Nyquist frequency of the node grid and the
/// highest oscillation frequency of the integrand.
const NYQUIST_GUARD: f64 = 12.0;
const MAX_NODES: usize = 200_000;
pub const MIN_QUADRATURE_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Number of atoms `N`.
    pub n_atoms: f64,
    /// Inhomogeneous width Δ₀ (standard deviation); 1 in normalized units.
    pub width: f64,
    /// Half-area `ε` of the weak storage pulse (`θ₁ = 2ε`).
    pub epsilon: f64,
    /// Minimum number of quadrature nodes.
    pub quadrature_order: usize,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { n_atoms: 1e6, width: 1.0, epsilon: 1e-3, quadrature_order: 64 }
    }
}

impl EnsembleSpec {
    pub fn new(n_atoms: f64, epsilon: f64) -> Result<Self> {
        Self { n_atoms, epsilon, ..Self::default() }.validated()
    }

    /// `ε = 1/√N`: one excitation on average.
    pub fn single_photon(n_atoms: f64) -> Result<Self> {
        if !(n_atoms.is_finite() && n_atoms > 0.0) {
            return invalid(format!("atom count must be positive, got {n_atoms}"));
        }
        Self::new(n_atoms, 1.0 / n_atoms.sqrt())
    }

    pub fn with_quadrature_order(self, order: usize) -> Result<Self> {
        Self { quadrature_order: order, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        require_finite("atom count", self.n_atoms)?;
        require_finite("width", self.width)?;
        require_finite("epsilon", self.epsilon)?;
        if self.n_atoms <= 0.0 {
            return invalid(format!("atom count must be positive, got {}", self.n_atoms));
        }
        if self.width <= 0.0 {
            return invalid(format!("width must be positive, got {}", self.width));
        }
        if self.epsilon < 0.0 {
            return invalid(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        if self.quadrature_order < MIN_QUADRATURE_ORDER {
            return invalid(format!("quadrature order must be at least {MIN_QUADRATURE_ORDER}"));
        }
        Ok(self)
    }
}

/// Equally spaced rule for `∫ φ(x) f(x) dx` with `φ` the standard normal
/// density.
///
/// For analytic integrands that are trigonometric polynomials in `x` times
/// the Gaussian, the error is set by aliasing, `~exp(−(2π/h − ω)²/2)` for
/// spacing `h` and highest frequency `ω`. The spacing is chosen so that this
/// is negligible for the requested bandwidth.
#[derive(Clone, Debug)]
pub struct GaussianRule {
    detunings: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussianRule {
    /// `bandwidth` is the largest `|τ|` such that the integrand contains
    /// `e^{iΔτ}`, in units of 1/Δ₀.
    pub fn new(spec: &EnsembleSpec, bandwidth: f64) -> Result<Self> {
        let spec = spec.validated()?;
        require_finite("bandwidth", bandwidth)?;
        let omega = bandwidth.abs() * spec.width;
        let max_step = std::f64::consts::TAU / (omega + NYQUIST_GUARD);
        let needed = (2.0 * SPAN / max_step).ceil();
        if needed > MAX_NODES as f64 {
            return Err(Error::QuadratureRange(format!(
                "bandwidth {bandwidth} needs {needed} nodes, limit is {MAX_NODES}"
            )));
        }
        let n = spec.quadrature_order.max(needed as usize + 1);
        let h = 2.0 * SPAN / (n - 1) as f64;
        let norm = h / std::f64::consts::TAU.sqrt();
        let (detunings, weights) = (0..n)
            .map(|j| {
                let x = -SPAN + j as f64 * h;
                (spec.width * x, norm * (-x * x / 2.0).exp())
            })
            .unzip();
        Ok(Self { detunings, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    /// `Σ wⱼ f(Δⱼ)` in node order; a non-finite value is a numerical failure.
    pub fn try_integrate<F>(&self, mut f: F) -> Result<C64>
    where
        F: FnMut(f64) -> Result<C64>,
    {
        let mut acc = C64::new(0.0, 0.0);
        for (&delta, &w) in self.detunings.iter().zip(&self.weights) {
            let v = f(delta)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NumericalFailure(format!("integrand is {v} at detuning {delta}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// `∫dΔ g(Δ) f(Δ)` for an integrand whose oscillations stay within
/// `bandwidth` (see [`GaussianRule::new`]).
pub fn gaussian_average<F>(f: F, spec: &EnsembleSpec, bandwidth: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let rule = GaussianRule::new(spec, bandwidth)?;
    Ok(spec.n_atoms * rule.try_integrate(|d| Ok(f(d)))?)
}

fn ensemble_sum<F>(protocol: &Protocol, spec: &EnsembleSpec, bandwidth: f64, f: F) -> Result<C64>
where
    F: Fn(&Protocol, f64) -> Result<C64>,
{
    let rule = GaussianRule::new(spec, bandwidth)?;
    Ok(spec.n_atoms * rule.try_integrate(|d| f(protocol, d))?)
}

/// The four storage-area variants `±θ`, `±θ/2` of a protocol and the
/// weights that combine their responses into the part linear in `θ`.
///
/// With `odd(a) = (e(a) − e(−a))/2`, the combination is
/// `(8·odd(θ/2) − odd(θ))/3`, exact through third order in `θ`.
pub(crate) struct LeadingOrder {
    variants: Vec<(Protocol, f64)>,
}

impl LeadingOrder {
    pub(crate) fn new(protocol: &Protocol) -> Result<Self> {
        let area =
            protocol.storage_area().ok_or_else(|| Error::InvalidParameter("protocol has no storage pulse".into()))?;
        let (near, far) = (4.0 / 3.0, 1.0 / 6.0);
        let variants = vec![
            (protocol.with_storage_area(area / 2.0)?, near),
            (protocol.with_storage_area(-area / 2.0)?, -near),
            (protocol.with_storage_area(area)?, -far),
            (protocol.with_storage_area(-area)?, far),
        ];
        Ok(Self { variants })
    }

    pub(crate) fn combine<F>(&self, mut eval: F) -> Result<C64>
    where
        F: FnMut(&Protocol) -> Result<C64>,
    {
        let mut acc = C64::new(0.0, 0.0);
        for (p, w) in &self.variants {
            acc += *w * eval(p)?;
        }
        Ok(acc)
    }
}

/// Part of `eval` linear in the storage pulse area, evaluated at the
/// protocol's own area.
pub(crate) fn linear_response<F>(protocol: &Protocol, eval: F) -> Result<C64>
where
    F: FnMut(&Protocol) -> Result<C64>,
{
    LeadingOrder::new(protocol)?.combine(eval)
}

fn check_time(protocol: &Protocol, t: f64) -> Result<()> {
    require_finite("time", t)?;
    if t < protocol.start_time() {
        return invalid(format!("time {t} precedes the first event at {}", protocol.start_time()));
    }
    Ok(())
}

/// Ensemble average of the density-matrix element `⟨i|ρ|j⟩` at time `t`,
/// as simulated (no leading-order extraction).
pub fn ensemble_element(protocol: &Protocol, spec: &EnsembleSpec, t: f64, i: usize, j: usize) -> Result<C64> {
    check_time(protocol, t)?;
    if i >= protocol.dim() || j >= protocol.dim() {
        return invalid("level index out of range");
    }
    let drive = Drive::default();
    ensemble_sum(protocol, spec, protocol.bandwidth(t), |p, d| Ok(p.run(d, Stop::At(t), &drive)?.element(i, j)))
}

/// Macroscopic polarization `∫dΔ g(Δ)⟨1|ρ_Δ(t)|2⟩` to leading order in the
/// storage pulse.
pub fn polarization(protocol: &Protocol, spec: &EnsembleSpec, t: f64) -> Result<C64> {
    leading_order_element(protocol, spec, t, 0, 1)
}

/// Ensemble average of `⟨i|ρ|j⟩` at time `t`, to leading order in the
/// storage pulse.
pub fn leading_order_element(protocol: &Protocol, spec: &EnsembleSpec, t: f64, i: usize, j: usize) -> Result<C64> {
    check_time(protocol, t)?;
    linear_response(protocol, |p| ensemble_element(p, spec, t, i, j))
}

/// Leading-order polarization right after the storage pulse.
pub fn initial_polarization(protocol: &Protocol, spec: &EnsembleSpec) -> Result<C64> {
    let idx =
        protocol.storage_index().ok_or_else(|| Error::InvalidParameter("protocol has no storage pulse".into()))?;
    let drive = Drive::default();
    let bandwidth = protocol.bandwidth(protocol.events()[idx].time);
    linear_response(protocol, |p| {
        ensemble_sum(p, spec, bandwidth, |p, d| Ok(p.run(d, Stop::AfterEvent(idx), &drive)?.optical_coherence()))
    })
}

/// Echo intensity `|P(t₄)|²` at the protocol's echo time.
pub fn echo_intensity(protocol: &Protocol, spec: &EnsembleSpec) -> Result<f64> {
    Ok(polarization(protocol, spec, protocol.echo_time())?.norm_sqr())
}

/// Intensity of the absorbed part of the input, `N²ε²`.
pub fn input_intensity(spec: &EnsembleSpec) -> f64 {
    (spec.n_atoms * spec.epsilon).powi(2)
}

/// Input intensity recomputed from the simulated initial polarization.
pub fn simulated_input_intensity(protocol: &Protocol, spec: &EnsembleSpec) -> Result<f64> {
    Ok(initial_polarization(protocol, spec)?.norm_sqr())
}

/// Fluorescence at the echo time: excited-state population summed over the
/// ensemble, with no storage pulse applied.
pub fn noise_intensity(protocol: &Protocol, spec: &EnsembleSpec) -> Result<f64> {
    let dark = match protocol.storage_index() {
        Some(_) => protocol.with_storage_area(0.0)?,
        None => protocol.clone(),
    };
    Ok(ensemble_element(&dark, spec, dark.echo_time(), 1, 1)?.re)
}

pub fn snr(i_echo: f64, i_noise: f64) -> Result<f64> {
    require_finite("echo intensity", i_echo)?;
    require_finite("noise intensity", i_noise)?;
    if i_noise == 0.0 {
        return Err(Error::UndefinedRatio("noise intensity"));
    }
    Ok(i_echo / i_noise)
}

/// Time-bin qubit fidelity limited by incoherent noise,
/// `1 − F = I_noise/(I_echo + 2·I_noise)`, i.e. `F = (snr + 1)/(snr + 2)`.
pub fn fidelity_timebin(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return invalid(format!("signal-to-noise ratio must be non-negative, got {snr}"));
    }
    if snr.is_infinite() {
        return Ok(1.0);
    }
    Ok((snr + 1.0) / (snr + 2.0))
}

/// Best fidelity achievable by classical measure-and-prepare storage.
pub const CLASSICAL_FIDELITY_LIMIT: f64 = 2.0 / 3.0;

pub fn readout_efficiency_bound(i_echo: f64, i_input: f64) -> Result<f64> {
    require_finite("echo intensity", i_echo)?;
    require_finite("input intensity", i_input)?;
    if i_input == 0.0 {
        return Err(Error::UndefinedRatio("input intensity"));
    }
    Ok(i_echo / i_input)
}

/// Observables for one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub polarization_initial: C64,
    pub polarization_echo: C64,
    pub i_echo: f64,
    pub i_input: f64,
    pub i_noise: f64,
    /// `+∞` (serialized as `"inf"`) when there is an echo but no noise;
    /// zero when there is neither.
    #[serde(with = "extended_float")]
    pub snr: f64,
    /// Zero when nothing was stored.
    pub efficiency_bound: f64,
    pub fidelity: f64,
}

/// Runs the full pipeline: initial and echo polarizations, intensities,
/// signal-to-noise ratio, efficiency bound and fidelity.
pub fn observe(protocol: &Protocol, spec: &EnsembleSpec) -> Result<ObservableReport> {
    let polarization_initial = initial_polarization(protocol, spec)?;
    let polarization_echo = polarization(protocol, spec, protocol.echo_time())?;
    let i_echo = polarization_echo.norm_sqr();
    let i_input = polarization_initial.norm_sqr();
    let i_noise = noise_intensity(protocol, spec)?.max(0.0);
    let snr = match snr(i_echo, i_noise) {
        Ok(v) => v,
        Err(Error::UndefinedRatio(_)) if i_echo > 0.0 => f64::INFINITY,
        Err(Error::UndefinedRatio(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let efficiency_bound = match readout_efficiency_bound(i_echo, i_input) {
        Err(Error::UndefinedRatio(_)) => 0.0,
        other => other?,
    };
    Ok(ObservableReport {
        polarization_initial,
        polarization_echo,
        i_echo,
        i_input,
        i_noise,
        snr,
        efficiency_bound,
        fidelity: fidelity_timebin(snr)?,
    })
}

mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}
