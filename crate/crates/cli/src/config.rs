use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;

use photon_echo::{ham_variant, three_level_3pe, two_level_3pe, EnsembleSpec, EventKind, Protocol, Timing};

use crate::args::{CommonArgs, ProtocolName, SweepParam};
use crate::error::{usage, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilon {
    Value(f64),
    /// ε = 1/√N.
    SinglePhoton,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Named { name: ProtocolName, separation: f64, storage: f64, theta2: f64, theta3: f64 },
    File(Protocol),
}

/// A fully resolved simulation request.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub n_atoms: f64,
    pub epsilon: Epsilon,
    pub quadrature_order: usize,
}

fn default_areas(name: ProtocolName) -> (f64, f64) {
    match name {
        ProtocolName::TwoLevel => (FRAC_PI_2, FRAC_PI_2),
        ProtocolName::ThreeLevel | ProtocolName::HamVariant => (PI, PI),
    }
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        let epsilon = match (args.epsilon, args.single_photon) {
            (Some(e), false) => Epsilon::Value(e),
            (None, true) => Epsilon::SinglePhoton,
            (None, false) => Epsilon::Value(EnsembleSpec::default().epsilon),
            (Some(_), true) => return usage("--epsilon and --single-photon are mutually exclusive"),
        };
        let source = match &args.protocol_file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                let protocol = Protocol::from_json(&text)
                    .map_err(|e| CliError::Usage(format!("bad protocol file {}: {e}", path.display())))?;
                if args.epsilon.is_some() || args.single_photon {
                    return usage("the storage pulse of a protocol file fixes ε; drop --epsilon/--single-photon");
                }
                Source::File(protocol)
            }
            None => {
                let (d2, d3) = default_areas(args.protocol);
                Source::Named {
                    name: args.protocol,
                    separation: args.separation,
                    storage: args.storage,
                    theta2: args.theta2.unwrap_or(d2),
                    theta3: args.theta3.unwrap_or(d3),
                }
            }
        };
        let config = Self { source, n_atoms: args.n_atoms, epsilon, quadrature_order: args.quadrature_order };
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        if !(self.n_atoms.is_finite() && self.n_atoms > 0.0) {
            return usage(format!("--n-atoms must be positive, got {}", self.n_atoms));
        }
        if let Source::Named { name, separation, storage, theta2, theta3 } = self.source {
            if !(separation.is_finite() && separation > 0.0) {
                return usage(format!("--separation must be positive, got {separation}"));
            }
            if !(storage.is_finite() && storage > 0.0) {
                return usage(format!("--storage must be positive, got {storage}"));
            }
            if name == ProtocolName::HamVariant && (theta2 != PI || theta3 != PI) {
                return usage("ham-variant uses π Raman pulses; --theta2/--theta3 cannot be changed");
            }
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        if let Source::File(p) = &self.source {
            return p.storage_area().map_or(0.0, |a| a.abs() / 2.0);
        }
        match self.epsilon {
            Epsilon::Value(e) => e,
            Epsilon::SinglePhoton => 1.0 / self.n_atoms.sqrt(),
        }
    }

    pub fn spec(&self) -> Result<EnsembleSpec> {
        Ok(EnsembleSpec::new(self.n_atoms, self.epsilon())?.with_quadrature_order(self.quadrature_order)?)
    }

    pub fn protocol(&self) -> Result<Protocol> {
        let eps = self.epsilon();
        Ok(match &self.source {
            Source::File(p) => p.clone(),
            Source::Named { name, separation, storage, theta2, theta3 } => {
                let timing = Timing::from_separation(*separation, *storage)?;
                match name {
                    ProtocolName::TwoLevel => two_level_3pe(timing, 2.0 * eps, *theta2, *theta3)?,
                    ProtocolName::ThreeLevel => three_level_3pe(timing, eps, *theta2, *theta3)?,
                    ProtocolName::HamVariant => ham_variant(timing, eps)?,
                }
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match &self.source {
            Source::Named { name, .. } => name.as_str(),
            Source::File(_) => "custom",
        }
    }

    /// Returns a copy with one parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut next = self.clone();
        match param {
            SweepParam::NAtoms => next.n_atoms = value,
            SweepParam::Epsilon => {
                if self.epsilon == Epsilon::SinglePhoton {
                    return usage("cannot sweep epsilon together with --single-photon");
                }
                next.epsilon = Epsilon::Value(value);
            }
            _ => {
                let Source::Named { name, separation, theta2, theta3, .. } = &mut next.source else {
                    return usage("protocol files only support sweeps over epsilon and n_atoms");
                };
                match (param, *name) {
                    (SweepParam::Separation, _) => *separation = value,
                    (SweepParam::Theta2 | SweepParam::Theta2R, ProtocolName::HamVariant)
                    | (SweepParam::Theta3 | SweepParam::Theta3R, ProtocolName::HamVariant) => {
                        return usage("ham-variant pulse areas are fixed");
                    }
                    (SweepParam::Theta2, ProtocolName::TwoLevel) | (SweepParam::Theta2R, ProtocolName::ThreeLevel) => {
                        *theta2 = value
                    }
                    (SweepParam::Theta3, ProtocolName::TwoLevel) | (SweepParam::Theta3R, ProtocolName::ThreeLevel) => {
                        *theta3 = value
                    }
                    (SweepParam::Theta2 | SweepParam::Theta3, _) => {
                        return usage("use theta2_r/theta3_r for the three-level protocol")
                    }
                    _ => return usage("theta2_r/theta3_r apply to the three-level protocol only"),
                }
            }
        }
        if let Source::File(p) = &next.source {
            if param == SweepParam::Epsilon {
                let idx = p.storage_index().ok_or_else(|| CliError::Usage("protocol has no storage pulse".into()))?;
                if !matches!(p.events()[idx].kind, EventKind::Impulse { .. }) {
                    return usage("storage pulse is not an optical impulse");
                }
                next.source = Source::File(p.with_storage_area(2.0 * value)?);
            }
        }
        next.check()?;
        Ok(next)
    }

    /// Separation and rephasing areas of a named protocol.
    pub fn shape(&self) -> Option<(f64, f64, f64)> {
        match self.source {
            Source::Named { separation, theta2, theta3, .. } => Some((separation, theta2, theta3)),
            Source::File(_) => None,
        }
    }
}
