//! Polarization correlations of an entangled photon pair when photon 1
//! crosses the Faraday structure, and the CHSH combination built from them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clock::{tau_limits_exact, TRANSMISSION_THRESHOLD};
use crate::error::{Error, Result};
use crate::medium::{ClockSetting, StructureSpec};
use crate::scatter::circular_amplitudes;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Coarse search resolution for the CHSH angles.
const GRID_STEPS: usize = 64;
const GRID_STEP: f64 = PI / GRID_STEPS as f64;
const ANGLE_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 200;

/// `amp_pm |+,−⟩ + amp_mp |−,+⟩`. Not renormalized after filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState {
    pub amp_pm: Complex64,
    pub amp_mp: Complex64,
}

impl TwoPhotonState {
    pub fn new(amp_pm: Complex64, amp_mp: Complex64) -> Self {
        Self { amp_pm, amp_mp }
    }

    /// The Bell state `(|+,−⟩ + |−,+⟩)/√2`.
    pub fn bell() -> Self {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(a, a)
    }

    /// Bell state after photon 1 is transmitted with circular amplitudes
    /// `s_+`, `s_−`.
    pub fn transmitted(s_plus: Complex64, s_minus: Complex64) -> Self {
        Self::new(s_plus * FRAC_1_SQRT_2, s_minus * FRAC_1_SQRT_2)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_pm.norm_sqr() + self.amp_mp.norm_sqr()
    }

    fn check(&self) -> Result<()> {
        let n = self.norm_sqr();
        if n > 0.0 && n.is_finite() {
            Ok(())
        } else {
            Err(Error::DegenerateState)
        }
    }

    /// `2|a||b| / (|a|² + |b|²)`.
    pub fn correlation_factor(&self) -> f64 {
        (2.0 * self.amp_pm.norm() * self.amp_mp.norm() / self.norm_sqr()).min(1.0)
    }

    /// `arg a − arg b`, in `(−π, π]`.
    pub fn phase_shift(&self) -> f64 {
        (self.amp_pm * self.amp_mp.conj()).arg()
    }

    /// Joint probability of photon 1 passing a linear polarizer at `theta1`
    /// and photon 2 one at `theta2`.
    pub fn coincidence(&self, theta1: f64, theta2: f64) -> f64 {
        // ⟨θ|+⟩ = e^{−iθ}/√2, ⟨θ|−⟩ = e^{iθ}/√2
        let amp = self.amp_pm * Complex64::cis(theta2 - theta1) + self.amp_mp * Complex64::cis(theta1 - theta2);
        0.25 * amp.norm_sqr()
    }

    /// Correlation from the four coincidence rates of the two output ports of
    /// each polarizer.
    pub fn intensity_correlation(&self, theta1: f64, theta2: f64) -> f64 {
        let q = PI / 2.0;
        let same = self.coincidence(theta1, theta2) + self.coincidence(theta1 + q, theta2 + q);
        let crossed = self.coincidence(theta1 + q, theta2) + self.coincidence(theta1, theta2 + q);
        (same - crossed) / (same + crossed)
    }
}

/// `E(θ₁, θ₂) = F cos(2(θ₁ − θ₂) − Δφ)`.
fn closed_form(factor: f64, shift: f64, theta1: f64, theta2: f64) -> f64 {
    factor * (2.0 * (theta1 - theta2) - shift).cos()
}

/// Polarization correlation of the pair, checked against the intensity
/// definition.
pub fn correlation(state: &TwoPhotonState, theta1: f64, theta2: f64) -> Result<f64> {
    state.check()?;
    let e = closed_form(state.correlation_factor(), state.phase_shift(), theta1, theta2);
    let direct = state.intensity_correlation(theta1, theta2);
    debug_assert!((e - direct).abs() < 1e-12, "{e} vs {direct}");
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshResult {
    pub b_value: f64,
    /// `(θ₁, θ₁', θ₂, θ₂')`.
    pub angles: [f64; 4],
    pub correlation_factor: f64,
    pub phase_shift: f64,
}

/// `E(θ₁,θ₂) − E(θ₁,θ₂') + E(θ₁',θ₂) + E(θ₁',θ₂')`.
pub fn chsh_value(state: &TwoPhotonState, angles: [f64; 4]) -> Result<f64> {
    let [a, a2, b, b2] = angles;
    Ok(correlation(state, a, b)? - correlation(state, a, b2)?
        + correlation(state, a2, b)?
        + correlation(state, a2, b2)?)
}

/// Maximizes `|B|` over the four polarizer angles.
///
/// `B` depends only on angle differences, so the coarse search fixes `θ₁ = 0`
/// and scans the other three on a `π/64` lattice; coordinate-wise
/// golden-section search then refines all four.
pub fn chsh_maximize(state: &TwoPhotonState) -> Result<ChshResult> {
    state.check()?;
    let factor = state.correlation_factor();
    let shift = state.phase_shift();
    let objective = |t: &[f64; 4]| {
        let e = |x, y| closed_form(factor, shift, x, y);
        (e(t[0], t[2]) - e(t[0], t[3]) + e(t[1], t[2]) + e(t[1], t[3])).abs()
    };

    // E on the lattice depends on the index difference only.
    let table: Vec<f64> = (0..2 * GRID_STEPS)
        .map(|k| closed_form(factor, shift, k as f64 * GRID_STEP, 0.0))
        .collect();
    let e = |i: usize, j: usize| table[(i + 2 * GRID_STEPS - j) % (2 * GRID_STEPS)];
    let mut best = (f64::NEG_INFINITY, [0usize; 3]);
    for i2 in 0..GRID_STEPS {
        for j in 0..GRID_STEPS {
            for j2 in 0..GRID_STEPS {
                let v = (e(0, j) - e(0, j2) + e(i2, j) + e(i2, j2)).abs();
                if v > best.0 {
                    best = (v, [i2, j, j2]);
                }
            }
        }
    }
    let [i2, j, j2] = best.1;
    let mut angles = [0.0, i2 as f64 * GRID_STEP, j as f64 * GRID_STEP, j2 as f64 * GRID_STEP];
    let mut value = objective(&angles);

    for _ in 0..MAX_SWEEPS {
        let before = angles;
        for k in 0..4 {
            let current = angles;
            let along = |x: f64| {
                let mut t = current;
                t[k] = x;
                objective(&t)
            };
            let x = golden_section_max(along, current[k] - GRID_STEP, current[k] + GRID_STEP);
            let v = along(x);
            if v > value {
                angles[k] = x;
                value = v;
            }
        }
        let moved = before
            .iter()
            .zip(&angles)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if moved < ANGLE_TOLERANCE {
            break;
        }
    }
    Ok(ChshResult {
        b_value: chsh_value(state, angles)?.abs(),
        angles,
        correlation_factor: factor,
        phase_shift: shift,
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > ANGLE_TOLERANCE {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Largest correlation after transmission, next to its weak-clock expansion
/// `1 − 2Ω²τ_amp²`.
pub fn correlation_loss_expansion(structure: &StructureSpec, omega: f64, clock: ClockSetting) -> Result<(f64, f64)> {
    let tau_amp = tau_limits_exact(structure, omega)?.tau_amp;
    let (plus, minus) = circular_amplitudes(structure, omega, clock)?;
    for amp in [plus, minus] {
        let modulus = amp.modulus();
        if !(modulus >= TRANSMISSION_THRESHOLD) {
            return Err(Error::LowTransmission {
                omega: amp.omega,
                modulus,
                threshold: TRANSMISSION_THRESHOLD,
            });
        }
    }
    let e_max = TwoPhotonState::transmitted(plus.value, minus.value).correlation_factor();
    let split = clock.omega_split;
    Ok((e_max, 1.0 - 2.0 * split * split * tau_amp * tau_amp))
}

/// Maximal CHSH value at `omega` for each clock splitting.
pub fn bell_vs_clock_scan(structure: &StructureSpec, omega: f64, splits: &[f64]) -> Vec<Result<ChshResult>> {
    splits
        .par_iter()
        .map(|&x| {
            let clock = if x == 0.0 {
                ClockSetting::off()
            } else {
                ClockSetting::new(x)?
            };
            let (plus, minus) = circular_amplitudes(structure, omega, clock)?;
            chsh_maximize(&TwoPhotonState::transmitted(plus.value, minus.value))
        })
        .collect()
}
