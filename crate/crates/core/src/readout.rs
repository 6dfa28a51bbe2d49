//! Interchangeable time read-out schemes, looked up by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::clock::{tau_limits_exact, tau_orth_finite, tau_ph_finite};
use crate::error::{Error, Result};
use crate::medium::{ClockSetting, StructureSpec};
use crate::paths::{expand_paths_with_cap, Truncation};
use crate::polarimetry::{
    extract_phase_time, interferometer_curve, main_axis, main_axis_from_paths, PolarizationState,
};
use crate::scatter::circular_amplitudes;

/// Where and how a read-out is taken.
#[derive(Debug, Clone, Copy)]
pub struct Probe<'a> {
    pub structure: &'a StructureSpec,
    pub omega: f64,
    pub clock: ClockSetting,
}

pub trait TimeReadout: Send + Sync {
    fn name(&self) -> &'static str;
    fn read(&self, probe: &Probe<'_>) -> Result<f64>;
}

pub struct ReadoutRegistry {
    entries: BTreeMap<&'static str, Box<dyn TimeReadout>>,
}

impl Default for ReadoutRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl ReadoutRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(PhaseLimit));
        r.register(Box::new(AmpLimit));
        r.register(Box::new(OrthLimit));
        r.register(Box::new(PhaseFinite));
        r.register(Box::new(OrthFinite));
        r.register(Box::new(Interferometer::default()));
        r.register(Box::new(MainAxis));
        r.register(Box::new(PathAxis::default()));
        r
    }

    /// Adds a scheme, replacing any previous one of the same name.
    pub fn register(&mut self, readout: Box<dyn TimeReadout>) {
        self.entries.insert(readout.name(), readout);
    }

    pub fn get(&self, name: &str) -> Result<&dyn TimeReadout> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownReadout(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

fn weak_clock_prior(probe: &Probe<'_>) -> Result<f64> {
    Ok(tau_limits_exact(probe.structure, probe.omega)?.tau_ph)
}

/// Shifts `tau` by whole multiples of `period` to land nearest `prior`.
fn nearest_winding(tau: f64, period: f64, prior: f64) -> f64 {
    tau + ((prior - tau) / period).round() * period
}

/// `∂φ_s/∂ω`.
pub struct PhaseLimit;

impl TimeReadout for PhaseLimit {
    fn name(&self) -> &'static str {
        "phase-limit"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        Ok(tau_limits_exact(p.structure, p.omega)?.tau_ph)
    }
}

/// `∂ log|s|/∂ω`.
pub struct AmpLimit;

impl TimeReadout for AmpLimit {
    fn name(&self) -> &'static str {
        "amp-limit"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        Ok(tau_limits_exact(p.structure, p.omega)?.tau_amp)
    }
}

/// `|s'/s|`.
pub struct OrthLimit;

impl TimeReadout for OrthLimit {
    fn name(&self) -> &'static str {
        "orth-limit"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        Ok(tau_limits_exact(p.structure, p.omega)?.tau_orth)
    }
}

/// `(φ_+ − φ_−)/2Ω`.
pub struct PhaseFinite;

impl TimeReadout for PhaseFinite {
    fn name(&self) -> &'static str {
        "phase"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        tau_ph_finite(p.structure, p.omega, p.clock)
    }
}

/// Crossed-polarizer counts.
pub struct OrthFinite;

impl TimeReadout for OrthFinite {
    fn name(&self) -> &'static str {
        "orth"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        Ok(tau_orth_finite(p.structure, p.omega, p.clock)?.tau)
    }
}

/// Fringe maximum of the circular-component interferometer, sampled over a
/// little more than one fringe period.
pub struct Interferometer {
    /// Grid spacing in units of `1/ω`.
    pub step: f64,
    /// Arm phase offset `Δφ`.
    pub delta_phi: f64,
}

impl Default for Interferometer {
    fn default() -> Self {
        Self {
            step: 1e-3,
            delta_phi: 0.0,
        }
    }
}

impl TimeReadout for Interferometer {
    fn name(&self) -> &'static str {
        "interferometer"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        let (plus, minus) = circular_amplitudes(p.structure, p.omega, p.clock)?;
        let half_span = 1.1 * PI / p.omega;
        let step = self.step / p.omega;
        let points = (2.0 * half_span / step).ceil() as usize + 1;
        let grid: Vec<f64> = (0..points).map(|k| -half_span + k as f64 * step).collect();
        let curve = interferometer_curve(&plus, &minus, self.delta_phi, &grid)?;
        extract_phase_time(
            &curve,
            &grid,
            p.omega,
            self.delta_phi,
            p.clock,
            Some(weak_clock_prior(p)?),
        )
    }
}

/// Main axis of the transmitted polarization divided by `Ω`.
pub struct MainAxis;

impl TimeReadout for MainAxis {
    fn name(&self) -> &'static str {
        "main-axis"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        if p.clock.is_off() {
            return Err(Error::ZeroSplit);
        }
        let (plus, minus) = circular_amplitudes(p.structure, p.omega, p.clock)?;
        let theta =
            main_axis(&PolarizationState::transmitted(plus.value, minus.value))?.ok_or(Error::DegenerateState)?;
        let split = p.clock.omega_split;
        Ok(nearest_winding(theta / split, PI / split, weak_clock_prior(p)?))
    }
}

/// Main axis assembled from the multiple-reflection path sum.
pub struct PathAxis {
    /// Paths are kept up to this many times the optical thickness in delay.
    pub delay_factor: f64,
    pub term_cap: usize,
}

impl Default for PathAxis {
    fn default() -> Self {
        Self {
            delay_factor: 24.0,
            term_cap: 200_000,
        }
    }
}

impl TimeReadout for PathAxis {
    fn name(&self) -> &'static str {
        "path-axis"
    }
    fn read(&self, p: &Probe<'_>) -> Result<f64> {
        if p.clock.is_off() {
            return Err(Error::ZeroSplit);
        }
        let max_delay = self.delay_factor * p.structure.optical_delay().max(f64::MIN_POSITIVE);
        let exp = expand_paths_with_cap(p.structure, Truncation::Delay(max_delay), self.term_cap)?;
        let theta = main_axis_from_paths(&exp, p.omega, p.clock)?;
        let split = p.clock.omega_split;
        Ok(nearest_winding(theta / split, PI / split, weak_clock_prior(p)?))
    }
}
