//! Measurement statistics of the clock read-out schemes: orthogonal-polarizer
//! counting, polarizer scans for the main axis, and the two-arm
//! interferometer that compares the phases of the circular components.
//!
//! Circular basis convention: `|±⟩ = (|↔⟩ ∓ i|↕⟩)/√2`, so that the linear
//! state at angle `θ` is `(e^{iθ}|+⟩ + e^{−iθ}|−⟩)/√2` and a component
//! amplitude `s(ω ± Ω)` rotates a linear state forward by `Ωτ`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::ClockSetting;
use crate::paths::{transmitted_polarization_state, PathExpansion};
use crate::scatter::SpectralAmplitude;

/// Visibility floor below which no fringe is considered present.
pub const DEFAULT_VISIBILITY_FLOOR: f64 = 1e-6;

/// Unnormalized Jones vector over `{|+⟩, |−⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub plus_amp: Complex64,
    pub minus_amp: Complex64,
}

impl PolarizationState {
    pub fn new(plus_amp: Complex64, minus_amp: Complex64) -> Self {
        Self { plus_amp, minus_amp }
    }

    /// Linear polarization at angle `theta`.
    pub fn linear(theta: f64) -> Self {
        Self::new(
            Complex64::from_polar(FRAC_1_SQRT_2, theta),
            Complex64::from_polar(FRAC_1_SQRT_2, -theta),
        )
    }

    /// State of a `|↔⟩` photon after the stack: `(s_+, s_−)/√2`.
    pub fn transmitted(s_plus: Complex64, s_minus: Complex64) -> Self {
        Self::new(s_plus * FRAC_1_SQRT_2, s_minus * FRAC_1_SQRT_2)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.plus_amp.norm_sqr() + self.minus_amp.norm_sqr()
    }

    /// Components over `{|↔⟩, |↕⟩}`.
    pub fn linear_components(&self) -> (Complex64, Complex64) {
        let (a, b) = (self.plus_amp, self.minus_amp);
        ((a + b) * FRAC_1_SQRT_2, Complex64::i() * (b - a) * FRAC_1_SQRT_2)
    }

    /// `|⟨θ|ψ⟩|²`.
    pub fn polarizer_probability(&self, theta: f64) -> f64 {
        polarizer_probability(self, theta)
    }

    /// Main axis in `[0, π)`, or `None` for a circular state.
    pub fn main_axis(&self) -> Result<Option<f64>> {
        main_axis(self)
    }
}

/// Counting probability behind a linear polarizer at `theta`.
///
/// For the transmitted state `(s_+, s_−)/√2` this is
/// `¼ |s_+ e^{−iθ} + s_− e^{iθ}|²`.
pub fn polarizer_probability(state: &PolarizationState, theta: f64) -> f64 {
    let amp = Complex64::from_polar(1.0, -theta) * state.plus_amp + Complex64::from_polar(1.0, theta) * state.minus_amp;
    0.5 * amp.norm_sqr()
}

/// Ratio `N_orth / N_tr` of counts behind a polarizer crossed with the
/// incident `|↔⟩`.
pub fn orthogonal_fraction(state: &PolarizationState) -> Result<f64> {
    let total = state.norm_sqr();
    if total == 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok(polarizer_probability(state, FRAC_PI_2) / total)
}

fn reduce_half_turn(angle: f64) -> f64 {
    let a = angle.rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// `½ arg(s_+ s_−*)` reduced to `[0, π)`; `None` for circular states.
pub fn main_axis(state: &PolarizationState) -> Result<Option<f64>> {
    let total = state.norm_sqr();
    if total == 0.0 {
        return Err(Error::DegenerateState);
    }
    let cross = state.plus_amp * state.minus_amp.conj();
    if cross.norm() <= 1e-14 * total {
        return Ok(None);
    }
    Ok(Some(reduce_half_turn(0.5 * cross.arg())))
}

/// A polarizer scan over `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizerCurve {
    pub angles: Vec<f64>,
    pub counts: Vec<f64>,
    pub theta_max: f64,
}

pub fn polarizer_curve(state: &PolarizationState, points: usize) -> Result<PolarizerCurve> {
    if points == 0 {
        return Err(Error::InvalidGrid("polarizer scan needs at least one angle".into()));
    }
    let angles: Vec<f64> = (0..points).map(|k| PI * k as f64 / points as f64).collect();
    let counts: Vec<f64> = angles.iter().map(|&t| polarizer_probability(state, t)).collect();
    let best = counts
        .iter()
        .enumerate()
        .fold(0, |best, (k, &c)| if c > counts[best] { k } else { best });
    Ok(PolarizerCurve {
        theta_max: angles[best],
        angles,
        counts,
    })
}

/// Main axis from the path sum,
///
/// ```text
/// tan 2θ_m = Σ_ij Re(λ_i λ_j*) sin(θ_i + θ_j) / Σ_ij Re(λ_i λ_j*) cos(θ_i + θ_j)
/// ```
///
/// with `λ_j = c_j e^{iωτ_j}` and `θ_j = Ωτ_j`. The result is checked against
/// the axis of the path-built state; the truncation residual bounds how far
/// the two may drift apart.
pub fn main_axis_from_paths(expansion: &PathExpansion, omega: f64, clock: ClockSetting) -> Result<f64> {
    let lambdas: Vec<(Complex64, f64)> = expansion
        .terms
        .iter()
        .map(|t| {
            (
                t.amplitude * Complex64::from_polar(1.0, omega * t.delay),
                clock.omega_split * t.delay,
            )
        })
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (li, ti)) in lambdas.iter().enumerate() {
        num += li.norm_sqr() * (2.0 * ti).sin();
        den += li.norm_sqr() * (2.0 * ti).cos();
        for (lj, tj) in &lambdas[i + 1..] {
            let w = 2.0 * (li * lj.conj()).re;
            num += w * (ti + tj).sin();
            den += w * (ti + tj).cos();
        }
    }
    if num == 0.0 && den == 0.0 {
        return Err(Error::DegenerateState);
    }
    let theta_m = reduce_half_turn(0.5 * num.atan2(den));

    let state = transmitted_polarization_state(expansion, omega, clock);
    let plus = state.plus_amp.norm() * 2f64.sqrt();
    let minus = state.minus_amp.norm() * 2f64.sqrt();
    let eps = expansion.truncation_residual;
    let spread = |m: f64| if eps >= m { FRAC_PI_2 } else { (eps / m).asin() };
    let bound = 0.5 * (spread(plus) + spread(minus));
    let reference = main_axis(&state)?.ok_or(Error::DegenerateState)?;
    let mut disagreement = (theta_m - reference).rem_euclid(PI);
    disagreement = disagreement.min(PI - disagreement);
    if bound >= FRAC_PI_4 || disagreement > bound + 1e-9 {
        return Err(Error::TruncationTooCoarse { disagreement, bound });
    }
    Ok(theta_m)
}

/// Fringe visibility `2|s_+||s_−| / (|s_+|² + |s_−|²)`.
pub fn visibility(s_plus: Complex64, s_minus: Complex64) -> f64 {
    let total = s_plus.norm_sqr() + s_minus.norm_sqr();
    if total == 0.0 {
        0.0
    } else {
        2.0 * s_plus.norm() * s_minus.norm() / total
    }
}

/// Detection rate at one port of the recombining beam splitter as the arm
/// length difference `Δx` is scanned:
/// `|s(ω+Ω) + i s(ω−Ω) e^{i(Δφ + ωΔx)}|²`.
pub fn interferometer_curve(
    s_plus: &SpectralAmplitude,
    s_minus: &SpectralAmplitude,
    delta_phi: f64,
    dx_grid: &[f64],
) -> Result<Vec<f64>> {
    if dx_grid.is_empty() {
        return Err(Error::InvalidGrid("empty path-difference grid".into()));
    }
    let omega = 0.5 * (s_plus.omega + s_minus.omega);
    Ok(dx_grid
        .iter()
        .map(|&dx| {
            let arm = Complex64::i() * s_minus.value * Complex64::from_polar(1.0, delta_phi + omega * dx);
            (s_plus.value + arm).norm_sqr()
        })
        .collect())
}

/// Vertex of the parabola through three points.
fn parabola_vertex(xs: [f64; 3], ys: [f64; 3]) -> f64 {
    let [x0, x1, x2] = xs;
    let [y0, y1, y2] = ys;
    let d01 = (y0 - y1) / (x0 - x1);
    let d12 = (y1 - y2) / (x1 - x2);
    let curvature = (d01 - d12) / (x0 - x2);
    if curvature == 0.0 {
        return x1;
    }
    0.5 * (x0 + x1) - d01 / (2.0 * curvature)
}

/// Phase time from a measured fringe: locate `Δx_max`, form
/// `φ_+ − φ_− = Δφ + ωΔx_max + π/2`, and divide by `2Ω`. The fringe order
/// (a multiple of `π/Ω`) is fixed by the closest match to `prior`.
pub fn extract_phase_time(
    curve: &[f64],
    dx_grid: &[f64],
    omega: f64,
    delta_phi: f64,
    clock: ClockSetting,
    prior: Option<f64>,
) -> Result<f64> {
    extract_phase_time_with_floor(curve, dx_grid, omega, delta_phi, clock, prior, DEFAULT_VISIBILITY_FLOOR)
}

pub fn extract_phase_time_with_floor(
    curve: &[f64],
    dx_grid: &[f64],
    omega: f64,
    delta_phi: f64,
    clock: ClockSetting,
    prior: Option<f64>,
    visibility_floor: f64,
) -> Result<f64> {
    if clock.omega_split <= 0.0 {
        return Err(Error::ZeroSplit);
    }
    if curve.len() != dx_grid.len() || curve.len() < 3 {
        return Err(Error::InvalidGrid(
            "fringe needs at least three samples matching the grid".into(),
        ));
    }
    if dx_grid
        .windows(2)
        .any(|w| !(w[1] > w[0]) || w[1] - w[0] >= PI / (4.0 * omega))
    {
        return Err(Error::InvalidGrid(
            "path-difference grid must increase with spacing below π/(4ω)".into(),
        ));
    }
    let (lo, hi) = curve.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
        (lo.min(c), hi.max(c))
    });
    let visibility = if hi + lo > 0.0 { (hi - lo) / (hi + lo) } else { 0.0 };
    if !(visibility >= visibility_floor) {
        return Err(Error::NoFringe {
            visibility,
            floor: visibility_floor,
        });
    }
    let peak = (1..curve.len() - 1)
        .filter(|&k| curve[k] >= curve[k - 1] && curve[k] >= curve[k + 1])
        .fold(None, |best: Option<usize>, k| match best {
            Some(b) if curve[b] >= curve[k] => Some(b),
            _ => Some(k),
        })
        .ok_or(Error::NoFringe {
            visibility,
            floor: visibility_floor,
        })?;
    let dx_max = parabola_vertex(
        [dx_grid[peak - 1], dx_grid[peak], dx_grid[peak + 1]],
        [curve[peak - 1], curve[peak], curve[peak + 1]],
    );
    let tau = (delta_phi + omega * dx_max + FRAC_PI_2) / (2.0 * clock.omega_split);
    let prior = prior.ok_or(Error::WindingAmbiguity)?;
    let period = PI / clock.omega_split;
    let k = ((prior - tau) / period).round();
    Ok(tau + k * period)
}
