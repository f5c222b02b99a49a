//! Pulse sequences as timed event lists, and their single-atom simulation.
//!
//! A [`Protocol`] starts from the ground state at the time of its first
//! event. Events sharing a timestamp are applied in list order with no free
//! evolution between them, which is how composite instantaneous blocks (the
//! storage pulse plus transfer π pulse, or a Raman pulse plus shelving) are
//! expressed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atom::{apply, dephase, AtomState, Propagator};
use crate::error::{invalid, require_finite, Error, Result};

/// What happens at a [`PulseEvent`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// Short resonant pulse of the given area on `|1⟩-|2⟩`.
    Impulse { theta: f64 },
    /// Raman pulse of the given effective area on `{|1⟩, |2⟩, |3⟩}`.
    Raman { theta: f64 },
    /// π pulse on `|2⟩-|3⟩`.
    Pi23,
    /// Complete loss of coherence, populations kept.
    Dephase,
    /// Coherent transfer `|2⟩ → |a⟩`.
    ShelveToAux,
    /// Inverse of [`EventKind::ShelveToAux`].
    UnshelveFromAux,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Impulse { .. } => "impulse_2lvl",
            Self::Raman { .. } => "impulse_raman",
            Self::Pi23 => "pi_23",
            Self::Dephase => "dephase_marker",
            Self::ShelveToAux => "shelve_to_aux",
            Self::UnshelveFromAux => "unshelve_from_aux",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            Self::Impulse { theta } | Self::Raman { theta } => Some(theta),
            _ => None,
        }
    }

    fn from_parts(name: &str, param: Option<f64>) -> Result<Self> {
        let area = || param.ok_or_else(|| Error::InvalidParameter(format!("event `{name}` needs a param")));
        let kind = match name {
            "impulse_2lvl" => Self::Impulse { theta: area()? },
            "impulse_raman" => Self::Raman { theta: area()? },
            "pi_23" => Self::Pi23,
            "dephase_marker" => Self::Dephase,
            "shelve_to_aux" => Self::ShelveToAux,
            "unshelve_from_aux" => Self::UnshelveFromAux,
            other => return invalid(format!("unknown event kind `{other}`")),
        };
        if kind.param().is_none() && param.is_some() {
            return invalid(format!("event `{name}` takes no param"));
        }
        Ok(kind)
    }

    /// Smallest level count this event can act on.
    fn min_dim(&self) -> usize {
        match self {
            Self::Impulse { .. } | Self::Dephase => 2,
            Self::Raman { .. } | Self::Pi23 => 3,
            Self::ShelveToAux | Self::UnshelveFromAux => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEvent {
    pub time: f64,
    pub kind: EventKind,
    /// Index (1..=3) of the pulse wavevector, for the spatial analysis.
    pub k_label: Option<u8>,
}

impl PulseEvent {
    pub fn new(time: f64, kind: EventKind) -> Self {
        Self { time, kind, k_label: None }
    }

    pub fn labeled(time: f64, kind: EventKind, k_label: u8) -> Self {
        Self { time, kind, k_label: Some(k_label) }
    }
}

/// Which transition carries the inhomogeneous broadening.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetuningRole {
    /// Optical `|1⟩-|2⟩` (two-level atoms).
    Optical,
    /// Spin `|1⟩-|3⟩` (Λ and shelving schemes).
    Spin,
}

/// Pulse times `t1 < t2 < t3` of a three-pulse sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl Timing {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        for (name, t) in [("t1", t1), ("t2", t2), ("t3", t3)] {
            require_finite(name, t)?;
        }
        if !(t1 < t2 && t2 < t3) {
            return invalid(format!("pulse times must increase strictly, got {t1}, {t2}, {t3}"));
        }
        Ok(Self { t1, t2, t3 })
    }

    /// `t1 = 0`, `t2 = separation`, `t3 = separation + storage`.
    pub fn from_separation(separation: f64, storage: f64) -> Result<Self> {
        Self::new(0.0, separation, separation + storage)
    }

    pub fn echo_time(&self) -> f64 {
        self.t3 + self.t2 - self.t1
    }

    fn dephase_time(&self) -> f64 {
        (self.t2 + self.t3) / 2.0
    }
}

impl Default for Timing {
    fn default() -> Self {
        Self { t1: 0.0, t2: 20.0, t3: 120.0 }
    }
}

/// Where a simulation stops.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Stop {
    /// Right after the event with this index.
    AfterEvent(usize),
    /// At time `t`, after every event scheduled at or before `t`.
    At(f64),
}

/// Per-run overrides used by the ensemble and spatial layers.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Drive {
    /// Optical phases of the pulses labeled 1, 2 and 3.
    pub phases: [f64; 3],
}

/// A pulse sequence for `dim`-level atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtocolDoc", into = "ProtocolDoc")]
pub struct Protocol {
    dim: usize,
    events: Vec<PulseEvent>,
    echo_time: f64,
}

impl Protocol {
    /// Validates and assembles a protocol.
    ///
    /// Times must be finite and non-decreasing, every event must fit the
    /// level count, wavevector labels are unique in `1..=3`, at most one
    /// dephasing marker exists and it sits between the pulses labeled 2 and 3
    /// when those are present. If all three labels are present, `echo_time`
    /// must equal `t3 + t2 - t1`.
    pub fn new(dim: usize, events: Vec<PulseEvent>, echo_time: f64) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return invalid(format!("level count must be 2, 3 or 4, got {dim}"));
        }
        if events.is_empty() {
            return invalid("protocol needs at least one event");
        }
        require_finite("echo time", echo_time)?;
        let mut last = f64::NEG_INFINITY;
        let mut labels = [false; 3];
        for ev in &events {
            require_finite("event time", ev.time)?;
            if ev.time < last {
                return invalid(format!("events out of order at t = {}", ev.time));
            }
            last = ev.time;
            if ev.kind.min_dim() > dim {
                return invalid(format!("event `{}` needs at least {} levels", ev.kind.name(), ev.kind.min_dim()));
            }
            if let Some(theta) = ev.kind.param() {
                require_finite("pulse area", theta)?;
            }
            if let Some(k) = ev.k_label {
                if !(1..=3).contains(&k) || labels[k as usize - 1] {
                    return invalid(format!("wavevector label {k} invalid or repeated"));
                }
                labels[k as usize - 1] = true;
            }
        }
        let dephases: Vec<f64> = events.iter().filter(|e| e.kind == EventKind::Dephase).map(|e| e.time).collect();
        if dephases.len() > 1 {
            return invalid("at most one dephasing marker is allowed");
        }
        let protocol = Self { dim, events, echo_time };
        if let (Some(&td), Some(t2), Some(t3)) = (dephases.first(), protocol.pulse_time(2), protocol.pulse_time(3)) {
            if !(t2 <= td && td <= t3) {
                return invalid("dephasing marker must lie between the second and third pulse");
            }
        }
        if let Some(expected) = protocol.labeled_echo_time() {
            if (expected - echo_time).abs() > 1e-9 * expected.abs().max(1.0) {
                return invalid(format!("echo time {echo_time} differs from t3 + t2 - t1 = {expected}"));
            }
        }
        Ok(protocol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn events(&self) -> &[PulseEvent] {
        &self.events
    }

    pub fn echo_time(&self) -> f64 {
        self.echo_time
    }

    pub fn detuning_role(&self) -> DetuningRole {
        if self.dim == 2 {
            DetuningRole::Optical
        } else {
            DetuningRole::Spin
        }
    }

    pub fn start_time(&self) -> f64 {
        self.events[0].time
    }

    /// Time of the pulse carrying wavevector label `k`.
    pub fn pulse_time(&self, k: u8) -> Option<f64> {
        self.events.iter().find(|e| e.k_label == Some(k)).map(|e| e.time)
    }

    fn labeled_echo_time(&self) -> Option<f64> {
        Some(self.pulse_time(3)? + self.pulse_time(2)? - self.pulse_time(1)?)
    }

    /// Index of the storage pulse: the first `|1⟩-|2⟩` impulse.
    pub fn storage_index(&self) -> Option<usize> {
        self.events.iter().position(|e| matches!(e.kind, EventKind::Impulse { .. }))
    }

    pub fn storage_area(&self) -> Option<f64> {
        self.storage_index().and_then(|i| self.events[i].kind.param())
    }

    /// Copy of this protocol with the storage pulse area replaced.
    pub fn with_storage_area(&self, theta: f64) -> Result<Self> {
        require_finite("storage area", theta)?;
        let idx =
            self.storage_index().ok_or_else(|| Error::InvalidParameter("protocol has no storage pulse".into()))?;
        let mut out = self.clone();
        out.events[idx].kind = EventKind::Impulse { theta };
        Ok(out)
    }

    /// Copy with the events after `time` removed (the echo time is kept).
    pub fn truncated_after(&self, time: f64) -> Result<Self> {
        let events: Vec<PulseEvent> = self.events.iter().copied().filter(|e| e.time <= time).collect();
        Self::new(self.dim, events, self.echo_time)
    }

    /// Upper bound on the frequency content, in Δ, of any density-matrix
    /// element at time `t`. Each unit of free evolution adds at most one unit
    /// of phase `Δ·dt` to a matrix element; pulses only mix elements.
    pub fn bandwidth(&self, t: f64) -> f64 {
        (t - self.start_time()).max(0.0)
    }

    fn phase_level(&self) -> usize {
        match self.detuning_role() {
            DetuningRole::Optical => 1,
            DetuningRole::Spin => 2,
        }
    }

    fn pulse_propagator(&self, ev: &PulseEvent, drive: &Drive) -> Result<Option<Propagator>> {
        let phase = ev.k_label.map_or(0.0, |k| drive.phases[k as usize - 1]);
        let p = match ev.kind {
            EventKind::Impulse { theta } => {
                let p = Propagator::two_level_impulse_phased(theta, phase)?;
                if self.dim == 2 {
                    p
                } else {
                    p.embed(self.dim, &[0, 1])?
                }
            }
            EventKind::Raman { theta } => {
                let p = Propagator::raman_impulse(theta)?;
                if self.dim == 3 {
                    p
                } else {
                    p.embed(self.dim, &[0, 1, 2])?
                }
            }
            EventKind::Pi23 => Propagator::two_level_impulse(PI)?.embed(self.dim, &[1, 2])?,
            EventKind::ShelveToAux => Propagator::two_level_impulse(PI)?.embed(self.dim, &[1, 3])?,
            EventKind::UnshelveFromAux => Propagator::two_level_impulse(-PI)?.embed(self.dim, &[1, 3])?,
            EventKind::Dephase => return Ok(None),
        };
        Ok(Some(p))
    }

    fn step(&self, state: &AtomState, ev: &PulseEvent, drive: &Drive) -> Result<AtomState> {
        match self.pulse_propagator(ev, drive)? {
            Some(p) => apply(&p, state),
            None => Ok(dephase(state)),
        }
    }

    fn free(&self, state: AtomState, delta: f64, dt: f64) -> Result<AtomState> {
        if dt == 0.0 {
            return Ok(state);
        }
        let u = Propagator::free_evolution(self.dim, self.phase_level(), delta, dt)?;
        apply(&u, &state)
    }

    pub(crate) fn run(&self, delta: f64, stop: Stop, drive: &Drive) -> Result<AtomState> {
        require_finite("detuning", delta)?;
        let (last, t_end) = match stop {
            Stop::AfterEvent(i) => {
                let ev = self.events.get(i).ok_or_else(|| Error::InvalidParameter(format!("no event {i}")))?;
                (i + 1, ev.time)
            }
            Stop::At(t) => {
                require_finite("time", t)?;
                if t < self.start_time() {
                    return invalid(format!("time {t} precedes the first event at {}", self.start_time()));
                }
                (self.events.iter().take_while(|e| e.time <= t).count(), t)
            }
        };
        let mut state = AtomState::ground(self.dim)?;
        let mut clock = self.start_time();
        for ev in &self.events[..last] {
            state = self.free(state, delta, ev.time - clock)?;
            clock = ev.time;
            state = self.step(&state, ev, drive)?;
        }
        self.free(state, delta, t_end - clock)
    }

    /// Single-atom state at detuning `delta` and time `t`.
    pub fn state_at(&self, delta: f64, t: f64) -> Result<AtomState> {
        self.run(delta, Stop::At(t), &Drive::default())
    }

    /// State right after event `index`.
    pub fn state_after_event(&self, delta: f64, index: usize) -> Result<AtomState> {
        self.run(delta, Stop::AfterEvent(index), &Drive::default())
    }
}

/// The state immediately after every event, then at the echo time.
pub fn single_atom_trace(protocol: &Protocol, delta: f64) -> Result<Vec<(f64, AtomState)>> {
    require_finite("detuning", delta)?;
    let drive = Drive::default();
    let mut out = Vec::with_capacity(protocol.events.len() + 1);
    let mut state = AtomState::ground(protocol.dim)?;
    let mut clock = protocol.start_time();
    for ev in &protocol.events {
        state = protocol.free(state, delta, ev.time - clock)?;
        clock = ev.time;
        state = protocol.step(&state, ev, &drive)?;
        out.push((clock, state.clone()));
    }
    if protocol.echo_time >= clock {
        let at_echo = protocol.free(state, delta, protocol.echo_time - clock)?;
        out.push((protocol.echo_time, at_echo));
    }
    Ok(out)
}

/// Two-level three-pulse echo: storage pulse `theta1` at `t1`, rephasing
/// pulses `theta2` at `t2` and `theta3` at `t3`, complete dephasing midway
/// through the waiting time. The echo is expected at `t3 + t2 - t1`.
pub fn two_level_3pe(timing: Timing, theta1: f64, theta2: f64, theta3: f64) -> Result<Protocol> {
    let timing = Timing::new(timing.t1, timing.t2, timing.t3)?;
    let events = vec![
        PulseEvent::labeled(timing.t1, EventKind::Impulse { theta: theta1 }, 1),
        PulseEvent::labeled(timing.t2, EventKind::Impulse { theta: theta2 }, 2),
        PulseEvent::new(timing.dephase_time(), EventKind::Dephase),
        PulseEvent::labeled(timing.t3, EventKind::Impulse { theta: theta3 }, 3),
    ];
    Protocol::new(2, events, timing.echo_time())
}

fn three_level_events(timing: Timing, epsilon: f64, theta2_r: f64, theta3_r: f64, shelve: bool) -> Vec<PulseEvent> {
    let mut events = vec![
        PulseEvent::labeled(timing.t1, EventKind::Impulse { theta: 2.0 * epsilon }, 1),
        PulseEvent::new(timing.t1, EventKind::Pi23),
        PulseEvent::labeled(timing.t2, EventKind::Raman { theta: theta2_r }, 2),
    ];
    if shelve {
        events.push(PulseEvent::new(timing.t2, EventKind::ShelveToAux));
    }
    events.push(PulseEvent::new(timing.dephase_time(), EventKind::Dephase));
    if shelve {
        events.push(PulseEvent::new(timing.t3, EventKind::UnshelveFromAux));
    }
    events.push(PulseEvent::labeled(timing.t3, EventKind::Raman { theta: theta3_r }, 3));
    events.push(PulseEvent::new(timing.echo_time(), EventKind::Pi23));
    events
}

/// Three-level (Λ) echo: weak pulse of area `2·epsilon` on `|1⟩-|2⟩`
/// immediately followed by a π pulse on `|2⟩-|3⟩` at `t1`, Raman rephasing
/// pulses at `t2` and `t3`, and a read-out π pulse on `|2⟩-|3⟩` at the echo
/// time.
pub fn three_level_3pe(timing: Timing, epsilon: f64, theta2_r: f64, theta3_r: f64) -> Result<Protocol> {
    let timing = Timing::new(timing.t1, timing.t2, timing.t3)?;
    require_finite("epsilon", epsilon)?;
    Protocol::new(3, three_level_events(timing, epsilon, theta2_r, theta3_r, false), timing.echo_time())
}

/// Four-level variant of [`three_level_3pe`] with π Raman pulses, where the
/// excited population is parked in the auxiliary level right after `t2` and
/// brought back right before `t3`.
pub fn ham_variant(timing: Timing, epsilon: f64) -> Result<Protocol> {
    let timing = Timing::new(timing.t1, timing.t2, timing.t3)?;
    require_finite("epsilon", epsilon)?;
    Protocol::new(4, three_level_events(timing, epsilon, PI, PI, true), timing.echo_time())
}

/// JSON wire form of a [`Protocol`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolDoc {
    pub dim: usize,
    pub events: Vec<EventDoc>,
    pub echo_time: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventDoc {
    pub t: f64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_label: Option<u8>,
}

impl TryFrom<ProtocolDoc> for Protocol {
    type Error = Error;

    fn try_from(doc: ProtocolDoc) -> Result<Self> {
        let events = doc
            .events
            .iter()
            .map(|e| Ok(PulseEvent { time: e.t, kind: EventKind::from_parts(&e.kind, e.param)?, k_label: e.k_label }))
            .collect::<Result<Vec<_>>>()?;
        Protocol::new(doc.dim, events, doc.echo_time)
    }
}

impl From<Protocol> for ProtocolDoc {
    fn from(p: Protocol) -> Self {
        let events = p
            .events
            .iter()
            .map(|e| EventDoc { t: e.time, kind: e.kind.name().to_owned(), param: e.kind.param(), k_label: e.k_label })
            .collect();
        ProtocolDoc { dim: p.dim, events, echo_time: p.echo_time }
    }
}

impl Protocol {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("protocol JSON: {e}")))
    }
}
