//! Layered magneto-refractive structures and the Faraday splitting of their
//! refractive indices.
//!
//! Natural units are used throughout (`c = 1`), so a thickness is measured in
//! the same unit as an inverse angular frequency and an optical delay is just
//! `n * d`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One homogeneous dielectric layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub refractive_index: f64,
    pub thickness: f64,
}

impl Layer {
    pub fn new(refractive_index: f64, thickness: f64) -> Result<Self> {
        let valid = |x: f64| x.is_finite() && x > 0.0;
        if !valid(refractive_index) || !valid(thickness) {
            return Err(Error::InvalidLayer {
                index: refractive_index,
                thickness,
            });
        }
        Ok(Self {
            refractive_index,
            thickness,
        })
    }

    /// Single-pass traversal delay `n * d`.
    pub fn delay(&self) -> f64 {
        layer_delay(self)
    }
}

/// Traversal delay of one pass through `layer` (`c = 1`).
pub fn layer_delay(layer: &Layer) -> f64 {
    layer.refractive_index * layer.thickness
}

/// Circular sign of a Faraday-split component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Circular {
    Plus,
    Minus,
}

impl Circular {
    pub fn sign(self) -> f64 {
        match self {
            Circular::Plus => 1.0,
            Circular::Minus => -1.0,
        }
    }
}

/// Strength of the Faraday clock: the splitting rate `Ω` between the two
/// circular components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClockSetting {
    pub omega_split: f64,
}

impl ClockSetting {
    pub fn new(omega_split: f64) -> Result<Self> {
        if !omega_split.is_finite() || omega_split < 0.0 {
            return Err(Error::InvalidSplit(omega_split));
        }
        Ok(Self { omega_split })
    }

    pub fn off() -> Self {
        Self { omega_split: 0.0 }
    }

    pub fn is_off(&self) -> bool {
        self.omega_split == 0.0
    }

    /// Validates that `omega` lies above the splitting, as required for both
    /// shifted frequencies `ω ± Ω` to stay positive.
    pub fn check_frequency(&self, omega: f64) -> Result<()> {
        if !(omega > 0.0) {
            return Err(Error::NonPositiveFrequency(omega));
        }
        if omega <= self.omega_split {
            return Err(Error::FrequencyBelowSplit {
                omega,
                split: self.omega_split,
            });
        }
        Ok(())
    }
}

/// Refractive index seen by one circular component: `n (1 ± Ω/ω)`.
///
/// With this assignment the circular-component amplitude of the whole structure
/// at `ω` is exactly the clock-free amplitude at `ω ± Ω`.
pub fn shifted_index(layer: &Layer, omega: f64, clock: ClockSetting, sign: Circular) -> Result<f64> {
    clock.check_frequency(omega)?;
    Ok(layer.refractive_index * (1.0 + sign.sign() * clock.omega_split / omega))
}

/// An ordered stack of layers between two identical exterior half-spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    layers: Vec<Layer>,
    exterior_index: f64,
}

impl Default for StructureSpec {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl StructureSpec {
    pub fn new(layers: Vec<Layer>, exterior_index: f64) -> Result<Self> {
        if !(exterior_index.is_finite() && exterior_index > 0.0) {
            return Err(Error::InvalidExterior(exterior_index));
        }
        for l in &layers {
            Layer::new(l.refractive_index, l.thickness)?;
        }
        Ok(Self { layers, exterior_index })
    }

    /// Layers surrounded by vacuum.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        Self::new(layers, 1.0)
    }

    /// Free space of zero length.
    pub fn vacuum() -> Self {
        Self {
            layers: Vec::new(),
            exterior_index: 1.0,
        }
    }

    /// A single homogeneous slab in vacuum.
    pub fn slab(refractive_index: f64, thickness: f64) -> Result<Self> {
        Self::from_layers(vec![Layer::new(refractive_index, thickness)?])
    }

    /// `count` alternating layers `1, 2, 1, 2, ...` starting with layer 1.
    pub fn periodic(first: Layer, second: Layer, count: usize) -> Result<Self> {
        let layers = (0..count).map(|i| if i % 2 == 0 { first } else { second }).collect();
        Self::from_layers(layers)
    }

    /// Quarter-wave bilayer stack: `periods` repetitions of (n1, n2) with each
    /// optical thickness equal to a quarter period at `omega_c`.
    pub fn quarter_wave_stack(n1: f64, n2: f64, omega_c: f64, periods: usize) -> Result<Self> {
        if !(omega_c > 0.0) {
            return Err(Error::NonPositiveFrequency(omega_c));
        }
        let quarter = |n: f64| Layer::new(n, FRAC_PI_2 / (n * omega_c));
        Self::periodic(quarter(n1)?, quarter(n2)?, 2 * periods)
    }

    /// Quarter-wave stack closed by one more high-index layer, making it
    /// mirror symmetric (`2 * periods + 1` layers).
    pub fn symmetric_quarter_wave_stack(n1: f64, n2: f64, omega_c: f64, periods: usize) -> Result<Self> {
        let mut s = Self::quarter_wave_stack(n1, n2, omega_c, periods)?;
        s.layers.push(Layer::new(n1, FRAC_PI_2 / (n1 * omega_c))?);
        Ok(s)
    }

    /// The reference structure used throughout the tests: eleven quarter-wave
    /// layers of index 2.22 and 1.41 centred at `ω_c = 1`.
    pub fn default_stack() -> Self {
        Self::symmetric_quarter_wave_stack(2.22, 1.41, 1.0, 5).expect("valid constants")
    }

    /// The same layers embedded in a different exterior medium.
    pub fn with_exterior(self, exterior_index: f64) -> Result<Self> {
        Self::new(self.layers, exterior_index)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn exterior_index(&self) -> f64 {
        self.exterior_index
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    /// Physical width `L`.
    pub fn total_width(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Single-pass optical delay through the whole stack.
    pub fn optical_delay(&self) -> f64 {
        self.layers.iter().map(layer_delay).sum()
    }

    pub fn push(&mut self, layer: Layer) {
        self.layers.push(layer);
    }

    pub fn reversed(&self) -> Self {
        let mut layers = self.layers.clone();
        layers.reverse();
        Self {
            layers,
            exterior_index: self.exterior_index,
        }
    }

    /// Concatenation: `self` followed by `other` (exterior of `self` kept).
    pub fn then(&self, other: &StructureSpec) -> Self {
        let mut layers = self.layers.clone();
        layers.extend_from_slice(&other.layers);
        Self {
            layers,
            exterior_index: self.exterior_index,
        }
    }

    /// The structure as seen by one circular component: every index, the
    /// exterior included, scaled by `1 ± Ω/ω`.
    pub fn circular_component(&self, omega: f64, clock: ClockSetting, sign: Circular) -> Result<Self> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                shifted_index(l, omega, clock, sign).map(|n| Layer {
                    refractive_index: n,
                    thickness: l.thickness,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let scale = 1.0 + sign.sign() * clock.omega_split / omega;
        Ok(Self {
            layers,
            exterior_index: self.exterior_index * scale,
        })
    }

    /// Distinct layer materials in order of first appearance, and the class of
    /// each layer. Layers with bit-identical index and thickness share a class.
    pub fn material_classes(&self) -> (Vec<Layer>, Vec<usize>) {
        let mut classes: Vec<Layer> = Vec::new();
        let assignment = self
            .layers
            .iter()
            .map(|l| match classes.iter().position(|c| c == l) {
                Some(k) => k,
                None => {
                    classes.push(*l);
                    classes.len() - 1
                }
            })
            .collect();
        (classes, assignment)
    }
}
