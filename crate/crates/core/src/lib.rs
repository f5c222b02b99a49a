//! Three-pulse photon-echo storage in inhomogeneously broadened atomic
//! ensembles.
//!
//! Single atoms are propagated through impulse-limit pulse sequences
//! ([`atom`], [`protocol`]), the responses are integrated over the Gaussian
//! spectral distribution ([`ensemble`]) to obtain echo and fluorescence
//! intensities, and a Monte Carlo model of an extended sample ([`spatial`])
//! exposes the phase-matching geometry.

pub mod atom;
pub mod ensemble;
pub mod error;
pub mod protocol;
pub mod spatial;

pub use atom::{apply, dephase, AtomState, Propagator};
pub use ensemble::{
    echo_intensity, ensemble_element, fidelity_timebin, gaussian_average, initial_polarization, input_intensity,
    leading_order_element, noise_intensity, observe, polarization, readout_efficiency_bound, simulated_input_intensity,
    snr, EnsembleSpec, GaussianRule, ObservableReport, CLASSICAL_FIDELITY_LIMIT,
};
pub use error::{Error, Result};
pub use protocol::{
    ham_variant, single_atom_trace, three_level_3pe, two_level_3pe, DetuningRole, EventKind, Protocol, PulseEvent,
    Timing,
};
pub use spatial::{
    directional_polarization, directional_snr, directions_away_from, phase_matching_scan, random_directions,
    sample_atoms, write_scan_csv, BeamGeometry, DirectionalResponse, ScanRow, SpatialEnsemble,
};

pub use nalgebra::Vector3;
pub use num_complex::Complex64;
