//! Shared fixtures for the benchmarks.

use std::f64::consts::{FRAC_PI_2, PI};

use photon_echo::{ham_variant, three_level_3pe, two_level_3pe, EnsembleSpec, Protocol, Timing};

/// The three named protocols at the default timing and input.
pub fn protocols() -> Vec<(&'static str, Protocol, EnsembleSpec)> {
    let spec = EnsembleSpec::default();
    let t = Timing::default();
    vec![
        ("two-level", two_level_3pe(t, 2.0 * spec.epsilon, FRAC_PI_2, FRAC_PI_2).unwrap(), spec),
        ("three-level", three_level_3pe(t, spec.epsilon, PI, PI).unwrap(), spec),
        ("ham-variant", ham_variant(t, spec.epsilon).unwrap(), spec),
    ]
}
