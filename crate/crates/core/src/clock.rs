//! Traversal times read out by the Faraday clock and the clock's back-action
//! on the transmission probability.
//!
//! Three times are involved. The phase time `τ_ph = ∂φ_s/∂ω` is what the
//! main-axis and interferometric schemes read. The orthogonal-count time
//! `τ_orth = |s'/s|` is what counting photons behind a crossed polarizer
//! reads. The amplitude time `τ_amp = ∂ log|s| / ∂ω` measures how strongly
//! the stack filters one circular component over the other. In the weak-clock
//! limit `τ_orth² = τ_ph² + τ_amp²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{ClockSetting, StructureSpec};
use crate::scatter::{
    amplitude_derivatives, circular_amplitudes, scan, three_point_derivative, transmission_amplitude, FrequencyGrid,
    SpectralScan,
};

/// `|s|` below which time read-outs are refused.
pub const TRANSMISSION_THRESHOLD: f64 = 1e-10;

/// Largest number of intervals used to bridge `ω − Ω .. ω + Ω`.
const MAX_BRIDGE_INTERVALS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversalTimes {
    pub tau_orth: f64,
    pub tau_ph: f64,
    pub tau_amp: f64,
    pub omega: f64,
    /// Splitting used for the read-out; `0` for the weak-clock limit.
    pub omega_split_used: f64,
}

/// Result of the crossed-polarizer read-out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthReadout {
    pub tau: f64,
    /// The arcsine argument exceeded one and was clamped: the clock rotated
    /// past the range this read-out can resolve.
    pub clamped: bool,
    /// Exact fraction `N_orth / N_tr = |s_+ − s_−|² / (2(|s_+|² + |s_−|²))`.
    pub orthogonal_fraction: f64,
}

/// Transmission with and without the clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionComparison {
    /// `(|s(ω+Ω)|² + |s(ω−Ω)|²) / 2`.
    pub p_clock: f64,
    /// `|s(ω)|²`.
    pub p_noclock: f64,
    /// `p_noclock + ½ Ω² ∂²|s|²/∂ω²`.
    pub quadratic_prediction: f64,
}

fn check_transmission(omega: f64, s: Complex64) -> Result<()> {
    let modulus = s.norm();
    if !(modulus >= TRANSMISSION_THRESHOLD) {
        return Err(Error::LowTransmission {
            omega,
            modulus,
            threshold: TRANSMISSION_THRESHOLD,
        });
    }
    Ok(())
}

fn require_split(clock: ClockSetting) -> Result<()> {
    if clock.omega_split > 0.0 {
        Ok(())
    } else {
        Err(Error::ZeroSplit)
    }
}

/// Time from the fraction of photons found orthogonal to the incident
/// polarization:
/// `(1/Ω) arcsin √(|s_+ − s_−|² / (4|s|²))`.
pub fn tau_orth_finite(structure: &StructureSpec, omega: f64, clock: ClockSetting) -> Result<OrthReadout> {
    require_split(clock)?;
    let (plus, minus) = circular_amplitudes(structure, omega, clock)?;
    let s = transmission_amplitude(structure, omega)?.value;
    check_transmission(omega, s)?;
    let ratio = (plus.value - minus.value).norm_sqr() / (4.0 * s.norm_sqr());
    let clamped = ratio > 1.0;
    let tau = ratio.min(1.0).sqrt().asin() / clock.omega_split;
    let orthogonal_fraction =
        (plus.value - minus.value).norm_sqr() / (2.0 * (plus.value.norm_sqr() + minus.value.norm_sqr()));
    Ok(OrthReadout {
        tau,
        clamped,
        orthogonal_fraction,
    })
}

/// Unwrapped phase change of `s` from `from` to `to`, refining the bridging
/// grid until every step is resolved.
pub fn phase_change(structure: &StructureSpec, from: f64, to: f64) -> Result<f64> {
    let mut intervals = 8;
    loop {
        let grid = FrequencyGrid::linspace(from, to, intervals + 1)?;
        match scan(structure, &grid) {
            Ok(sc) => {
                let phase = &sc.unwrapped_phase;
                return Ok(phase[phase.len() - 1] - phase[0]);
            }
            Err(Error::GridTooCoarse { .. }) if intervals < MAX_BRIDGE_INTERVALS => intervals *= 4,
            Err(Error::GridTooCoarse { .. }) | Err(Error::UnwrapAmbiguity { .. }) => {
                return Err(Error::UnwrapAmbiguity { from, to })
            }
            Err(e) => return Err(e),
        }
    }
}

/// Phase time from the phase difference of the circular components,
/// `(φ_+ − φ_−) / 2Ω`, with both phases taken from one continuous scan.
pub fn tau_ph_finite(structure: &StructureSpec, omega: f64, clock: ClockSetting) -> Result<f64> {
    require_split(clock)?;
    clock.check_frequency(omega)?;
    let split = clock.omega_split;
    Ok(phase_change(structure, omega - split, omega + split)? / (2.0 * split))
}

/// Weak-clock times from central differences on a scan.
pub fn tau_limits(scan: &SpectralScan, omega: f64) -> Result<TraversalTimes> {
    let k = scan.stencil_center(omega)?;
    let xs = [scan.omegas[k - 1], scan.omegas[k], scan.omegas[k + 1]];
    for j in k - 1..=k + 1 {
        check_transmission(scan.omegas[j], scan.amplitudes[j].value)?;
    }
    let phase = [
        scan.unwrapped_phase[k - 1],
        scan.unwrapped_phase[k],
        scan.unwrapped_phase[k + 1],
    ];
    let log_mod = [k - 1, k, k + 1].map(|j| scan.amplitudes[j].value.norm().ln());
    let tau_ph = three_point_derivative(xs, phase, omega);
    let tau_amp = three_point_derivative(xs, log_mod, omega);
    Ok(TraversalTimes {
        tau_orth: tau_ph.hypot(tau_amp),
        tau_ph,
        tau_amp,
        omega,
        omega_split_used: 0.0,
    })
}

/// Weak-clock times from the exact derivative of `s`: `s'/s = τ_amp + iτ_ph`.
pub fn tau_limits_exact(structure: &StructureSpec, omega: f64) -> Result<TraversalTimes> {
    let d = amplitude_derivatives(structure, omega)?;
    check_transmission(omega, d.s)?;
    let log = d.log_derivative();
    Ok(TraversalTimes {
        tau_orth: log.norm(),
        tau_ph: log.im,
        tau_amp: log.re,
        omega,
        omega_split_used: 0.0,
    })
}

/// Finite-clock read-outs at one frequency. `tau_amp` is the exact
/// weak-clock value, since no finite-`Ω` scheme reads it directly.
pub fn finite_times(structure: &StructureSpec, omega: f64, clock: ClockSetting) -> Result<TraversalTimes> {
    let orth = tau_orth_finite(structure, omega, clock)?;
    let tau_ph = tau_ph_finite(structure, omega, clock)?;
    let tau_amp = tau_limits_exact(structure, omega)?.tau_amp;
    Ok(TraversalTimes {
        tau_orth: orth.tau,
        tau_ph,
        tau_amp,
        omega,
        omega_split_used: clock.omega_split,
    })
}

/// `∂²|s|²/∂ω²`.
pub fn probability_curvature(structure: &StructureSpec, omega: f64) -> Result<f64> {
    Ok(amplitude_derivatives(structure, omega)?.probability_curvature())
}

/// Transmission probability with the clock, `(P(ω+Ω) + P(ω−Ω))/2`, next to
/// the clock-free probability and its second-order expansion in `Ω`.
pub fn clock_backaction(structure: &StructureSpec, omega: f64, clock: ClockSetting) -> Result<TransmissionComparison> {
    let d = amplitude_derivatives(structure, omega)?;
    let p_noclock = d.s.norm_sqr();
    let p_clock = if clock.is_off() {
        clock.check_frequency(omega)?;
        p_noclock
    } else {
        let (plus, minus) = circular_amplitudes(structure, omega, clock)?;
        0.5 * (plus.probability() + minus.probability())
    };
    let split = clock.omega_split;
    Ok(TransmissionComparison {
        p_clock,
        p_noclock,
        quadratic_prediction: p_noclock + 0.5 * split * split * d.probability_curvature(),
    })
}
