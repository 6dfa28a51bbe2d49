//! Multiple-reflection expansion of the transmission amplitude,
//! `s(ω) = Σ_j c_j e^{iωτ_j}`.
//!
//! Every transmitted path is a sequence of layer traversals separated by
//! interface transmissions `2 n_a / (n_a + n_b)` and internal reflections
//! `(n_a − n_b) / (n_a + n_b)`. Paths that share their traversal counts per
//! material share their delay, so partial paths are merged on the exact
//! integer key `(layer, direction, counts)` as they are generated, one
//! reflection order at a time. The merged amplitudes are the same sums a
//! depth-first enumeration would produce, without the exponential blow-up.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{ClockSetting, Layer, StructureSpec};
use crate::polarimetry::PolarizationState;

/// Default cap on the number of partial-path states visited.
pub const DEFAULT_TERM_CAP: usize = 2_000_000;

/// One group of transmitted paths with identical traversal counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTerm {
    /// Summed interface factors `c_j` of every path in the group.
    pub amplitude: Complex64,
    /// `τ_j = Σ_k N_k τ_k`.
    pub delay: f64,
    /// Traversals per material class, in order of first appearance.
    pub traversal_counts: Vec<u32>,
    /// Fewest internal reflections among the grouped paths.
    pub bounce_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathExpansion {
    pub terms: Vec<PathTerm>,
    /// Upper bound on `|Σ|` of every discarded path, at any frequency.
    pub truncation_residual: f64,
    /// Distinct materials; `traversal_counts[k]` refers to `materials[k]`.
    pub materials: Vec<Layer>,
    pub truncation: Truncation,
}

impl PathExpansion {
    /// Single-pass delay of each material class.
    pub fn material_delays(&self) -> Vec<f64> {
        self.materials.iter().map(Layer::delay).collect()
    }

    /// Worst-case floating-point error of summing the kept terms,
    /// `n ε Σ|c_j|`, with headroom for evaluating the phase factors.
    pub fn rounding_allowance(&self) -> f64 {
        let total: f64 = self.terms.iter().map(|t| t.amplitude.norm()).sum();
        (self.terms.len() + 64) as f64 * f64::EPSILON * total
    }
}

fn interface(from: f64, to: f64) -> (f64, f64) {
    let sum = from + to;
    (2.0 * from / sum, (from - to) / sum)
}

fn delay_of(counts: &[u32], delays: &[f64]) -> f64 {
    counts.iter().zip(delays).map(|(&k, &d)| k as f64 * d).sum()
}

/// Sum over every continuation of `|amplitude|` from a wave entering layer
/// `i`, for right-movers (`[0..n]`) and left-movers (`[n..2n]`). `None` when
/// the sum diverges.
fn continuation_bounds(indices: &[f64], n0: f64) -> Option<Vec<f64>> {
    let n = indices.len();
    let mut w = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let mut exit = DVector::<f64>::zeros(2 * n);
    for i in 0..n {
        let right_to = if i + 1 < n { indices[i + 1] } else { n0 };
        let (t, r) = interface(indices[i], right_to);
        if i + 1 < n {
            w[(i, i + 1)] += t.abs();
        } else {
            exit[i] = t.abs();
        }
        w[(i, n + i)] += r.abs();

        let left_to = if i > 0 { indices[i - 1] } else { n0 };
        let (t, r) = interface(indices[i], left_to);
        if i > 0 {
            w[(n + i, n + i - 1)] += t.abs();
        }
        w[(n + i, i)] += r.abs();
    }
    let system = DMatrix::<f64>::identity(2 * n, 2 * n) - w;
    let lu = system.lu();
    // I − W is a non-singular M-matrix, i.e. the Neumann series converges,
    // iff (I − W) x = 1 has a strictly positive solution.
    let probe = lu.solve(&DVector::from_element(2 * n, 1.0))?;
    if probe.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return None;
    }
    let g = lu.solve(&exit)?;
    Some(g.iter().map(|&x| x.max(0.0)).collect())
}

/// Frequency-independent bound on the exit amplitude of a unit wave entering
/// each layer, for right-movers (`[0..n]`) and left-movers (`[n..2n]`).
///
/// Seen from inside layer `i`, the stack splits into a left and a right
/// reflector. Reflectances compose as `(r1 + r2 e^{iφ}) / (1 + r1 r2 e^{iφ})`,
/// so each part reflects at most `tanh Σ artanh|r_k|` at any frequency. In
/// flux-normalized amplitudes the exit wave is `T_R / (1 − R_R R_L)` (times
/// `R_L` for a left-mover), with `|T_R|² = 1 − |R_R|²`.
fn cavity_bounds(indices: &[f64], n0: f64) -> Vec<f64> {
    let n = indices.len();
    let media: Vec<f64> = std::iter::once(n0)
        .chain(indices.iter().copied())
        .chain(std::iter::once(n0))
        .collect();
    let rapidity: Vec<f64> = media
        .windows(2)
        .map(|m| ((m[0] - m[1]).abs() / (m[0] + m[1])).atanh())
        .collect();
    let mut out = vec![0.0; 2 * n];
    for i in 0..n {
        let rho_l = rapidity[..=i].iter().sum::<f64>().tanh();
        let rho_r = rapidity[i + 1..].iter().sum::<f64>().tanh();
        let through = if rho_r >= rho_l {
            1.0 / (1.0 - rho_l * rho_l).sqrt()
        } else {
            (1.0 - rho_r * rho_r).sqrt() / (1.0 - rho_l * rho_r)
        };
        let flux = (indices[i] / n0).sqrt();
        out[i] = flux * through;
        out[n + i] = flux * rho_l * through;
    }
    out
}

/// Where the expansion stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Paths with at most this many internal reflections.
    Bounces(u32),
    /// Paths whose delay does not exceed this value, i.e. the transmitted
    /// impulse response up to a fixed time.
    Delay(f64),
}

/// Expands the transmission amplitude into paths with at most `max_bounces`
/// internal reflections.
pub fn expand_paths(structure: &StructureSpec, max_bounces: u32) -> Result<PathExpansion> {
    expand_paths_with_cap(structure, Truncation::Bounces(max_bounces), DEFAULT_TERM_CAP)
}

/// Expands into every path no longer than `max_delay`.
///
/// For thick stacks inside a band gap the series ordered by reflection count
/// does not converge, while the delay-ordered series always does.
pub fn expand_paths_by_delay(structure: &StructureSpec, max_delay: f64) -> Result<PathExpansion> {
    expand_paths_with_cap(structure, Truncation::Delay(max_delay), DEFAULT_TERM_CAP)
}

struct Walker<'a> {
    indices: Vec<f64>,
    class_of: Vec<usize>,
    delays: &'a [f64],
    n0: f64,
    cap: usize,
    visited: usize,
    exits: BTreeMap<Vec<u32>, (Complex64, u32)>,
}

/// Successor of a wave that has just crossed layer `i`.
enum Move {
    Stay { layer: usize, right: bool },
    Exit,
    Lost,
}

impl Walker<'_> {
    fn visit(&mut self, count: usize) -> Result<()> {
        self.visited += count;
        if self.visited > self.cap {
            Err(Error::PathBudget { cap: self.cap })
        } else {
            Ok(())
        }
    }

    /// Interface factors met by a wave that crossed layer `i`, and where the
    /// transmitted and reflected parts go.
    fn face(&self, i: usize, right: bool) -> (f64, f64, Move, Move) {
        let n = self.indices.len();
        let reflected = Move::Stay {
            layer: i,
            right: !right,
        };
        if right {
            let to = if i + 1 < n { self.indices[i + 1] } else { self.n0 };
            let (t, r) = interface(self.indices[i], to);
            let moved = if i + 1 < n {
                Move::Stay {
                    layer: i + 1,
                    right: true,
                }
            } else {
                Move::Exit
            };
            (t, r, moved, reflected)
        } else {
            let to = if i > 0 { self.indices[i - 1] } else { self.n0 };
            let (t, r) = interface(self.indices[i], to);
            let moved = if i > 0 {
                Move::Stay {
                    layer: i - 1,
                    right: false,
                }
            } else {
                Move::Lost
            };
            (t, r, moved, reflected)
        }
    }

    fn exit(&mut self, counts: Vec<u32>, amp: Complex64, bounces: u32) {
        let e = self.exits.entry(counts).or_insert((Complex64::new(0.0, 0.0), bounces));
        e.0 += amp;
        e.1 = e.1.min(bounces);
    }

    fn residual(&self, frontier: &[f64]) -> f64 {
        if frontier.iter().all(|&w| w == 0.0) {
            return 0.0;
        }
        let weigh = |g: &[f64]| g.iter().zip(frontier).map(|(g, f)| g * f).sum::<f64>();
        let cavity = weigh(&cavity_bounds(&self.indices, self.n0));
        match continuation_bounds(&self.indices, self.n0) {
            Some(g) => weigh(&g).min(cavity),
            None => cavity,
        }
    }

    fn terms(self) -> Vec<PathTerm> {
        let delays = self.delays;
        let mut terms: Vec<PathTerm> = self
            .exits
            .into_iter()
            .map(|(counts, (amplitude, bounce_count))| PathTerm {
                amplitude,
                delay: delay_of(&counts, delays),
                traversal_counts: counts,
                bounce_count,
            })
            .collect();
        terms.sort_by(|a, b| (a.bounce_count, &a.traversal_counts).cmp(&(b.bounce_count, &b.traversal_counts)));
        terms
    }
}

type Level = Vec<BTreeMap<Vec<u32>, Complex64>>;

fn walk_by_bounces(w: &mut Walker, max_bounces: u32, entry: Complex64, classes: usize) -> Result<Vec<f64>> {
    let n = w.indices.len();
    // right-movers in slots [0..n], left-movers in [n..2n]
    let mut level: Level = vec![BTreeMap::new(); 2 * n];
    level[0].insert(vec![0; classes], entry);

    for bounce in 0..=max_bounces {
        let mut next: Level = vec![BTreeMap::new(); 2 * n];
        let order = (0..n).chain((n..2 * n).rev());
        for slot in order {
            let (i, right) = if slot < n { (slot, true) } else { (slot - n, false) };
            let states = std::mem::take(&mut level[slot]);
            w.visit(states.len())?;
            let (t, r, moved, reflected) = w.face(i, right);
            for (mut counts, amp) in states {
                counts[w.class_of[i]] += 1;
                if r != 0.0 {
                    if let Move::Stay { layer, right } = reflected {
                        let k = if right { layer } else { n + layer };
                        *next[k].entry(counts.clone()).or_default() += amp * r;
                    }
                }
                match moved {
                    Move::Stay { layer, right } => {
                        let k = if right { layer } else { n + layer };
                        *level[k].entry(counts).or_default() += amp * t;
                    }
                    Move::Exit => w.exit(counts, amp * t, bounce),
                    Move::Lost => {}
                }
            }
        }
        level = next;
    }
    Ok(level.iter().map(|m| m.values().map(|a| a.norm()).sum()).collect())
}

fn walk_by_delay(w: &mut Walker, max_delay: f64, entry: Complex64, classes: usize) -> Result<Vec<f64>> {
    let n = w.indices.len();
    // keyed by the delay accumulated before crossing the layer; crossing
    // strictly increases it, so every state is complete when popped
    type Key = (u64, Vec<u32>, usize, bool);
    let mut pending: BTreeMap<Key, (Complex64, u32)> = BTreeMap::new();
    pending.insert((0f64.to_bits(), vec![0; classes], 0, true), (entry, 0));
    let mut frontier = vec![0.0; 2 * n];

    while let Some(((_, mut counts, i, right), (amp, bounces))) = pending.pop_first() {
        w.visit(1)?;
        let slot = if right { i } else { n + i };
        counts[w.class_of[i]] += 1;
        let delay = delay_of(&counts, w.delays);
        if delay > max_delay {
            frontier[slot] += amp.norm();
            continue;
        }
        let (t, r, moved, reflected) = w.face(i, right);
        let mut push = |layer: usize, right: bool, a: Complex64, b: u32, counts: Vec<u32>| {
            let e = pending
                .entry((delay.to_bits(), counts, layer, right))
                .or_insert((Complex64::new(0.0, 0.0), b));
            e.0 += a;
            e.1 = e.1.min(b);
        };
        if r != 0.0 {
            if let Move::Stay { layer, right } = reflected {
                push(layer, right, amp * r, bounces + 1, counts.clone());
            }
        }
        match moved {
            Move::Stay { layer, right } => push(layer, right, amp * t, bounces, counts),
            Move::Exit => w.exit(counts, amp * t, bounces),
            Move::Lost => {}
        }
    }
    Ok(frontier)
}

pub fn expand_paths_with_cap(
    structure: &StructureSpec,
    truncation: Truncation,
    term_cap: usize,
) -> Result<PathExpansion> {
    let (materials, class_of) = structure.material_classes();
    let n0 = structure.exterior_index();
    if structure.is_empty() {
        return Ok(PathExpansion {
            terms: vec![PathTerm {
                amplitude: Complex64::new(1.0, 0.0),
                delay: 0.0,
                traversal_counts: Vec::new(),
                bounce_count: 0,
            }],
            truncation_residual: 0.0,
            materials,
            truncation,
        });
    }
    let indices: Vec<f64> = structure.layers().iter().map(|l| l.refractive_index).collect();
    let delays: Vec<f64> = materials.iter().map(Layer::delay).collect();
    let entry = Complex64::new(interface(n0, indices[0]).0, 0.0);
    let mut walker = Walker {
        indices,
        class_of,
        delays: &delays,
        n0,
        cap: term_cap,
        visited: 0,
        exits: BTreeMap::new(),
    };
    let frontier = match truncation {
        Truncation::Bounces(b) => walk_by_bounces(&mut walker, b, entry, materials.len())?,
        Truncation::Delay(d) => walk_by_delay(&mut walker, d, entry, materials.len())?,
    };
    let truncation_residual = walker.residual(&frontier);
    Ok(PathExpansion {
        terms: walker.terms(),
        truncation_residual,
        materials,
        truncation,
    })
}

/// `Σ_j c_j e^{iωτ_j}` over the retained terms.
pub fn reconstruct_amplitude(expansion: &PathExpansion, omega: f64) -> Complex64 {
    expansion
        .terms
        .iter()
        .map(|t| t.amplitude * Complex64::from_polar(1.0, omega * t.delay))
        .sum()
}

/// State of a photon incident as `|↔⟩` after crossing the structure, built
/// from the per-path rotations `θ_j = Ωτ_j`:
/// `(1/√2) (Σ_j c_j e^{i(ω+Ω)τ_j}, Σ_j c_j e^{i(ω−Ω)τ_j})` in the circular
/// basis.
pub fn transmitted_polarization_state(expansion: &PathExpansion, omega: f64, clock: ClockSetting) -> PolarizationState {
    let plus = reconstruct_amplitude(expansion, omega + clock.omega_split);
    let minus = reconstruct_amplitude(expansion, omega - clock.omega_split);
    PolarizationState::new(plus * FRAC_1_SQRT_2, minus * FRAC_1_SQRT_2)
}

/// Whether a polarization state is linear, elliptic or circular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationShape {
    Linear,
    Elliptic,
    Circular,
}

/// Main axis of `λ1 |θ1⟩ + λ2 |θ2⟩`.
///
/// When `λ2/λ1` is a negative real `−r` the superposition is linear and the
/// axis is `θ1 − atan[r sin(θ2−θ1) / (1 − r cos(θ2−θ1))]`. Otherwise the axis
/// is the linear polarization of maximal overlap.
pub fn two_term_axis(
    theta1: f64,
    theta2: f64,
    lambda1: Complex64,
    lambda2: Complex64,
) -> Result<(f64, PolarizationShape)> {
    let ratio = lambda2 / lambda1;
    let scale = lambda1.norm() + lambda2.norm();
    if lambda1.norm() == 0.0 || !ratio.is_finite() {
        return Err(Error::DegenerateState);
    }
    if ratio.im.abs() <= 1e-15 * ratio.norm().max(1.0) && ratio.re <= 0.0 {
        let r = -ratio.re;
        let x = theta2 - theta1;
        let (num, den) = (r * x.sin(), 1.0 - r * x.cos());
        if num.hypot(den) <= 1e-15 {
            return Err(Error::DegenerateState);
        }
        return Ok((theta1 - num.atan2(den), PolarizationShape::Linear));
    }
    let plus = lambda1 * Complex64::from_polar(1.0, theta1) + lambda2 * Complex64::from_polar(1.0, theta2);
    let minus = lambda1 * Complex64::from_polar(1.0, -theta1) + lambda2 * Complex64::from_polar(1.0, -theta2);
    let cross = plus * minus.conj();
    if cross.norm() <= 1e-14 * scale * scale {
        return Err(Error::DegenerateState);
    }
    let shape = if (plus.norm() - minus.norm()).abs() <= 1e-12 * (plus.norm() + minus.norm()) {
        PolarizationShape::Linear
    } else {
        PolarizationShape::Elliptic
    };
    Ok((0.5 * cross.arg(), shape))
}
