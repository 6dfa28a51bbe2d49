//! Spectral transmission amplitude `s(ω)` by the transfer-matrix method.
//!
//! Each layer maps the field pair `(E, E'/iω)` across its thickness with the
//! characteristic matrix
//!
//! ```text
//! | cos δ        i sin δ / n |
//! | i n sin δ    cos δ       |      δ = n ω d
//! ```
//!
//! and the product over the stack is matched to an incident, reflected and
//! transmitted plane wave in the exterior. The returned amplitude is the
//! ratio of the field at the exit face to the incident field at the entry
//! face, so free propagation over a length `L` gives `e^{iωL}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::medium::{Circular, ClockSetting, StructureSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `s(ω)` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAmplitude {
    pub value: Complex64,
    pub omega: f64,
}

impl SpectralAmplitude {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    /// Transmission probability `|s|^2`.
    pub fn probability(&self) -> f64 {
        self.value.norm_sqr()
    }

    /// Principal value of the phase.
    pub fn phase(&self) -> f64 {
        self.value.arg()
    }
}

/// `s`, `ds/dω` and `d²s/dω²` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeDerivatives {
    pub omega: f64,
    pub s: Complex64,
    pub ds: Complex64,
    pub d2s: Complex64,
}

impl AmplitudeDerivatives {
    /// `s'/s`; its imaginary part is the phase time and its real part the
    /// amplitude time.
    pub fn log_derivative(&self) -> Complex64 {
        self.ds / self.s
    }

    /// Second derivative of `|s|^2`.
    pub fn probability_curvature(&self) -> f64 {
        2.0 * (self.d2s * self.s.conj()).re + 2.0 * self.ds.norm_sqr()
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Product of the characteristic matrices, last layer leftmost.
pub fn characteristic_matrix(structure: &StructureSpec, omega: f64) -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    structure
        .layers()
        .iter()
        .fold([[one, zero], [zero, one]], |acc, layer| {
            let n = layer.refractive_index;
            let (s, c) = (n * omega * layer.thickness).sin_cos();
            let m = [
                [Complex64::new(c, 0.0), I * (s / n)],
                [I * (n * s), Complex64::new(c, 0.0)],
            ];
            mat_mul(&m, &acc)
        })
}

fn boundary_denominator(m: &Mat2, n0: f64) -> Complex64 {
    n0 * m[0][0] + n0 * m[1][1] - m[1][0] - n0 * n0 * m[0][1]
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveFrequency(omega))
    }
}

/// Complex transmission amplitude `s(ω)`.
pub fn transmission_amplitude(structure: &StructureSpec, omega: f64) -> Result<SpectralAmplitude> {
    check_omega(omega)?;
    let m = characteristic_matrix(structure, omega);
    let n0 = structure.exterior_index();
    Ok(SpectralAmplitude {
        value: 2.0 * n0 / boundary_denominator(&m, n0),
        omega,
    })
}

/// Complex reflection amplitude at the entry face.
pub fn reflection_amplitude(structure: &StructureSpec, omega: f64) -> Result<Complex64> {
    check_omega(omega)?;
    let m = characteristic_matrix(structure, omega);
    let n0 = structure.exterior_index();
    let num = m[1][0] + n0 * m[1][1] - n0 * m[0][0] - n0 * n0 * m[0][1];
    Ok(num / boundary_denominator(&m, n0))
}

/// `s(ω)` with its first two frequency derivatives, propagated exactly
/// through the matrix product.
pub fn amplitude_derivatives(structure: &StructureSpec, omega: f64) -> Result<AmplitudeDerivatives> {
    check_omega(omega)?;
    let mut acc = [[Jet::ONE, Jet::ZERO], [Jet::ZERO, Jet::ONE]];
    for layer in structure.layers() {
        let n = layer.refractive_index;
        let (c, s) = Jet::cos_sin_linear(n * layer.thickness, omega);
        let m = [[c, s.scale(I / n)], [s.scale(I * n), c]];
        acc = [
            [
                m[0][0] * acc[0][0] + m[0][1] * acc[1][0],
                m[0][0] * acc[0][1] + m[0][1] * acc[1][1],
            ],
            [
                m[1][0] * acc[0][0] + m[1][1] * acc[1][0],
                m[1][0] * acc[0][1] + m[1][1] * acc[1][1],
            ],
        ];
    }
    let n0 = Complex64::new(structure.exterior_index(), 0.0);
    let den = acc[0][0].scale(n0) + acc[1][1].scale(n0) - acc[1][0] - acc[0][1].scale(n0 * n0);
    let t = Jet::constant(2.0 * n0) / den;
    Ok(AmplitudeDerivatives {
        omega,
        s: t.value,
        ds: t.d1,
        d2s: t.d2,
    })
}

/// `(s(ω+Ω), s(ω−Ω))`, the amplitudes of the `|+⟩` and `|−⟩` components.
pub fn circular_amplitudes(
    structure: &StructureSpec,
    omega: f64,
    clock: ClockSetting,
) -> Result<(SpectralAmplitude, SpectralAmplitude)> {
    clock.check_frequency(omega)?;
    let plus = transmission_amplitude(structure, omega + clock.omega_split)?;
    let minus = transmission_amplitude(structure, omega - clock.omega_split)?;
    Ok((plus, minus))
}

/// Amplitude of one circular component computed through the index-shifted
/// structure at the unshifted frequency.
pub fn circular_component_amplitude(
    structure: &StructureSpec,
    omega: f64,
    clock: ClockSetting,
    sign: Circular,
) -> Result<SpectralAmplitude> {
    let shifted = structure.circular_component(omega, clock, sign)?;
    transmission_amplitude(&shifted, omega)
}

/// A strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    values: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if values.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidGrid("non-finite grid value".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// `points` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, points: usize) -> Result<Self> {
        if points == 1 {
            return Self::new(vec![min]);
        }
        if points == 0 || !(max > min) {
            return Err(Error::InvalidGrid(format!(
                "need max > min and at least one point (min {min}, max {max}, points {points})"
            )));
        }
        let step = (max - min) / (points - 1) as f64;
        let mut values: Vec<f64> = (0..points).map(|k| min + step * k as f64).collect();
        values[points - 1] = max;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Transmission amplitudes over a grid with a continuous phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScan {
    pub omegas: Vec<f64>,
    pub amplitudes: Vec<SpectralAmplitude>,
    pub unwrapped_phase: Vec<f64>,
}

/// Wrapped phase difference `arg(b) − arg(a)` in `(−π, π]`.
pub fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

/// Evaluates `s(ω)` across `grid` and unwraps its phase by nearest-multiple
/// continuation, anchored to the principal value at the lowest frequency.
///
/// Each interval is checked against the increment predicted from the exact
/// phase derivative at its end points; an interval whose predicted increment
/// reaches `π`, or disagrees with the wrapped increment by more than `π/2`,
/// is reported as too coarse.
pub fn scan(structure: &StructureSpec, grid: &FrequencyGrid) -> Result<SpectralScan> {
    let samples = grid
        .values()
        .par_iter()
        .map(|&w| amplitude_derivatives(structure, w))
        .collect::<Result<Vec<_>>>()?;

    let mut unwrapped = Vec::with_capacity(samples.len());
    unwrapped.push(samples[0].s.arg());
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.s.norm() == 0.0 || b.s.norm() == 0.0 {
            return Err(Error::UnwrapAmbiguity {
                from: a.omega,
                to: b.omega,
            });
        }
        let step = phase_step(a.s, b.s);
        let predicted = 0.5 * (a.log_derivative().im + b.log_derivative().im) * (b.omega - a.omega);
        if predicted.abs() >= PI || (step - predicted).abs() > PI / 2.0 {
            return Err(Error::GridTooCoarse {
                omega: a.omega,
                step: predicted,
            });
        }
        let last = *unwrapped.last().expect("seeded");
        unwrapped.push(last + step);
    }

    Ok(SpectralScan {
        omegas: grid.values().to_vec(),
        amplitudes: samples
            .iter()
            .map(|d| SpectralAmplitude {
                value: d.s,
                omega: d.omega,
            })
            .collect(),
        unwrapped_phase: unwrapped,
    })
}

impl SpectralScan {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Index `k` such that the three points `k-1, k, k+1` bracket `omega` as
    /// closely as possible.
    pub(crate) fn stencil_center(&self, omega: f64) -> Result<usize> {
        let n = self.omegas.len();
        if n < 3 || !(omega > self.omegas[0] && omega < self.omegas[n - 1]) {
            return Err(Error::OutsideGrid(omega));
        }
        let upper = self.omegas.partition_point(|&w| w < omega);
        let nearest = if upper < n && (self.omegas[upper] - omega).abs() <= (omega - self.omegas[upper - 1]).abs() {
            upper
        } else {
            upper - 1
        };
        Ok(nearest.clamp(1, n - 2))
    }
}

/// Derivative at `x` of the parabola through three points.
pub(crate) fn three_point_derivative(xs: [f64; 3], ys: [f64; 3], x: f64) -> f64 {
    let [x0, x1, x2] = xs;
    let [y0, y1, y2] = ys;
    y0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::Layer;
    use std::f64::consts::FRAC_PI_2;

    /// Airy transmission of a lossless slab in vacuum, obtained by matching
    /// plane waves at the two faces.
    fn airy_probability(n: f64, delta: f64) -> f64 {
        let f = (n * n - 1.0).powi(2) / (4.0 * n * n);
        1.0 / (1.0 + f * delta.sin().powi(2))
    }

    #[test]
    fn empty_structure_is_identity() {
        let s = transmission_amplitude(&StructureSpec::vacuum(), 1.3).unwrap();
        assert_eq!(s.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn vacuum_slab_is_pure_phase() {
        let slab = StructureSpec::slab(1.0, 2.5).unwrap();
        let w = 0.77;
        let s = transmission_amplitude(&slab, w).unwrap();
        assert!((s.value - Complex64::from_polar(1.0, w * 2.5)).norm() < 1e-15);
    }

    #[test]
    fn quarter_wave_slab_probability() {
        let d = FRAC_PI_2 / 2.0;
        let s = transmission_amplitude(&StructureSpec::slab(2.0, d).unwrap(), 1.0).unwrap();
        assert!((s.probability() - 0.64).abs() < 1e-14);
        assert!((s.probability() - airy_probability(2.0, FRAC_PI_2)).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        assert!(transmission_amplitude(&StructureSpec::default_stack(), 0.0).is_err());
        assert!(transmission_amplitude(&StructureSpec::default_stack(), -1.0).is_err());
    }

    #[test]
    fn zero_split_gives_equal_components() {
        let s = StructureSpec::default_stack();
        let (p, m) = circular_amplitudes(&s, 0.9, ClockSetting::off()).unwrap();
        assert_eq!(p.value, m.value);
        assert_eq!(p.value, transmission_amplitude(&s, 0.9).unwrap().value);
    }

    #[test]
    fn index_shift_reproduces_frequency_shift() {
        let s = StructureSpec::default_stack();
        let clock = ClockSetting::new(0.02).unwrap();
        let (p, m) = circular_amplitudes(&s, 0.93, clock).unwrap();
        let p2 = circular_component_amplitude(&s, 0.93, clock, Circular::Plus).unwrap();
        let m2 = circular_component_amplitude(&s, 0.93, clock, Circular::Minus).unwrap();
        assert!((p.value - p2.value).norm() < 1e-13);
        assert!((m.value - m2.value).norm() < 1e-13);
    }

    #[test]
    fn slab_phase_splitting_is_linear_in_split() {
        let (n, d) = (1.7, 0.9);
        let slab = StructureSpec::slab(n, d).unwrap();
        // choose a resonance so the Airy phase is locally linear: n ω d = π
        let w = PI / (n * d);
        for split in [1e-3, 2e-3] {
            let (p, m) = circular_amplitudes(&slab, w, ClockSetting::new(split).unwrap()).unwrap();
            let diff = phase_step(m.value, p.value);
            // the resonant phase time of a slab is n d * (1 + r^2)/(1 - r^2)
            let r2 = ((n - 1.0) / (n + 1.0)).powi(2);
            let tau = n * d * (1.0 + r2) / (1.0 - r2);
            assert!((diff - 2.0 * split * tau).abs() < 50.0 * split.powi(3));
        }
    }

    #[test]
    fn midgap_components_have_equal_modulus_to_second_order() {
        let s = StructureSpec::default_stack();
        let clock = ClockSetting::new(1e-3).unwrap();
        let (p, m) = circular_amplitudes(&s, 1.0, clock).unwrap();
        let rel = (p.modulus() - m.modulus()).abs() / p.modulus();
        assert!(rel < 1e-6, "relative modulus mismatch {rel}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = StructureSpec::default_stack();
        let w = 0.87;
        let d = amplitude_derivatives(&s, w).unwrap();
        let h = 1e-5;
        let f = |x| transmission_amplitude(&s, x).unwrap().value;
        let d1 = (f(w + h) - f(w - h)) / (2.0 * h);
        assert!((d.ds - d1).norm() < 1e-6 * d.ds.norm());
        assert!((d.s - f(w)).norm() < 1e-15);
    }

    #[test]
    fn unitarity_and_zero_layer_identity() {
        let s = StructureSpec::default_stack();
        for w in [0.3, 0.8, 1.0, 1.4, 2.9] {
            let t = transmission_amplitude(&s, w).unwrap().value;
            let r = reflection_amplitude(&s, w).unwrap();
            assert!((t.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let tiny = StructureSpec::from_layers(vec![Layer::new(3.0, 1e-300).unwrap()]).unwrap();
        let composed = s.then(&tiny);
        let a = transmission_amplitude(&s, 0.9).unwrap().value;
        let b = transmission_amplitude(&composed, 0.9).unwrap().value;
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn vacuum_scan_phase_is_linear() {
        let slab = StructureSpec::slab(1.0, 1.5).unwrap();
        let grid = FrequencyGrid::linspace(0.1, 2.0, 200).unwrap();
        let sc = scan(&slab, &grid).unwrap();
        for (w, phi) in sc.omegas.iter().zip(&sc.unwrapped_phase) {
            assert!((phi - 1.5 * w).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let s = StructureSpec::default_stack();
        let grid = FrequencyGrid::linspace(0.5, 1.5, 4).unwrap();
        assert!(matches!(scan(&s, &grid), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![]).is_err());
        assert!(FrequencyGrid::linspace(2.0, 1.0, 5).is_err());
        let g = FrequencyGrid::linspace(0.0, 1.0, 11).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.values()[10], 1.0);
    }

    #[test]
    fn three_point_rule_is_exact_on_parabolas() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        let xs = [0.1, 0.35, 0.5];
        let d = three_point_derivative(xs, xs.map(f), 0.3);
        assert!((d - (6.0 * 0.3 - 2.0)).abs() < 1e-12);
    }
}
