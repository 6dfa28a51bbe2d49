//! Acceptance checks, one line per criterion.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::process::Command;

use faraday_clock::bell::{bell_vs_clock_scan, chsh_maximize, correlation, correlation_loss_expansion, TwoPhotonState};
use faraday_clock::clock::{clock_backaction, tau_limits_exact, tau_orth_finite, tau_ph_finite};
use faraday_clock::medium::{ClockSetting, Layer, StructureSpec};
use faraday_clock::paths::{expand_paths, reconstruct_amplitude};
use faraday_clock::polarimetry::{extract_phase_time, interferometer_curve, main_axis, PolarizationState};
use faraday_clock::scatter::{
    amplitude_derivatives, circular_amplitudes, reflection_amplitude, transmission_amplitude,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn split(x: f64) -> ClockSetting {
    ClockSetting::new(x).unwrap()
}

fn stack(spec: &[(f64, f64)]) -> StructureSpec {
    StructureSpec::from_layers(spec.iter().map(|&(n, d)| Layer::new(n, d).unwrap()).collect()).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Airy amplitude of a slab in vacuum.
fn airy(n: f64, d: f64, omega: f64) -> Complex64 {
    let r = (n - 1.0) / (n + 1.0);
    let t_in = 2.0 / (1.0 + n);
    let t_out = 2.0 * n / (1.0 + n);
    let delta = n * omega * d;
    t_in * t_out * Complex64::cis(delta) / (1.0 - r * r * Complex64::cis(2.0 * delta))
}

fn fabry_perot() -> Outcome {
    let (n, d) = (2.0, 1.0);
    let slab = StructureSpec::slab(n, d).unwrap();
    let p = transmission_amplitude(&slab, PI / (2.0 * n * d)).unwrap().probability();
    ensure((p - 0.64).abs() < 1e-12, || format!("|s|^2 = {p} at quarter wave"))?;
    let r2 = ((n - 1.0) / (n + 1.0)).powi(2);
    let finesse = 4.0 * r2 / (1.0 - r2).powi(2);
    let mut worst: f64 = 0.0;
    for k in 1..=1000 {
        let w = PI / (n * d) * k as f64 / 1000.0;
        let s = transmission_amplitude(&slab, w).unwrap();
        let delta = n * w * d;
        let t = 1.0 / (1.0 + finesse * delta.sin().powi(2));
        worst = worst
            .max((s.probability() - t).abs())
            .max((s.value - airy(n, d, w)).norm());
    }
    ensure(worst < 1e-12, || format!("max deviation over one FSR {worst:e}"))?;
    Ok(format!("|s|^2 = {p:.15}, FSR max deviation {worst:.1e}"))
}

fn path_equivalence() -> Outcome {
    let set = [
        ("1-layer", stack(&[(2.0, 0.7)])),
        ("2-layer", stack(&[(2.5, 0.4), (1.5, 0.6)])),
        ("3-layer", stack(&[(2.22, 0.35), (1.41, 0.55), (3.0, 0.2)])),
        (
            "5-layer",
            stack(&[(2.22, 0.35), (1.41, 0.55), (2.22, 0.35), (1.41, 0.55), (2.22, 0.35)]),
        ),
    ];
    let omegas: Vec<f64> = (0..25).map(|k| 0.3 + 0.1 * k as f64).collect();
    let mut last = Vec::new();
    for (name, s) in &set {
        let mut prev = f64::INFINITY;
        for b in (4..=40).step_by(4) {
            let exp = expand_paths(s, b).map_err(|e| format!("{name}: {e}"))?;
            let eps = exp.truncation_residual;
            ensure(eps < prev, || {
                format!("{name}: residual {eps:e} at {b} bounces after {prev:e}")
            })?;
            prev = eps;
            for &w in &omegas {
                let gap = (reconstruct_amplitude(&exp, w) - transmission_amplitude(s, w).unwrap().value).norm();
                let tol = eps + exp.rounding_allowance();
                ensure(gap <= tol, || {
                    format!("{name}: |diff| {gap:e} > residual {eps:e} at omega {w}, {b} bounces")
                })?;
            }
        }
        last.push(format!("{name} {prev:.1e}"));
    }
    Ok(format!("residual at 40 bounces: {}", last.join(", ")))
}

fn unitarity_reciprocity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut unit, mut recip): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let layers: Vec<(f64, f64)> = (0..rng.random_range(1..=9))
            .map(|_| (rng.random_range(1.0..4.0), rng.random_range(0.05..2.0)))
            .collect();
        let s = stack(&layers);
        let w = rng.random_range(0.1..5.0);
        let t = transmission_amplitude(&s, w).unwrap().value;
        let r = reflection_amplitude(&s, w).unwrap();
        let back = transmission_amplitude(&s.reversed(), w).unwrap().value;
        unit = unit.max((t.norm_sqr() + r.norm_sqr() - 1.0).abs());
        recip = recip.max((t.norm() - back.norm()).abs());
    }
    ensure(unit < 1e-12 && recip < 1e-12, || {
        format!("unitarity {unit:e}, reciprocity {recip:e}")
    })?;
    Ok(format!("100 random stacks: unitarity {unit:.1e}, reversal {recip:.1e}"))
}

fn weak_clock_convergence() -> Outcome {
    let s = StructureSpec::default_stack();
    let omegas = [0.62, 0.7, 0.78, 0.83, 0.9, 0.97, 1.05, 1.12, 1.25, 1.4];
    let (coarse, fine) = (2e-3, 1e-3);
    let mut ratios = Vec::new();
    for w in omegas {
        let exact = tau_limits_exact(&s, w).unwrap();
        let err = |x: f64| {
            let ph = tau_ph_finite(&s, w, split(x)).unwrap() - exact.tau_ph;
            let orth = tau_orth_finite(&s, w, split(x)).unwrap().tau - exact.tau_orth;
            (ph, orth)
        };
        let (a_ph, a_orth) = err(coarse);
        let (b_ph, b_orth) = err(fine);
        for (label, r) in [("tau_ph", a_ph / b_ph), ("tau_orth", a_orth / b_orth)] {
            ensure((3.2..=4.8).contains(&r), || format!("{label} ratio {r} at omega {w}"))?;
            ratios.push(r);
        }
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    Ok(format!("halving ratios in [{lo:.4}, {hi:.4}] at 10 frequencies"))
}

fn time_identity() -> Outcome {
    let s = StructureSpec::default_stack();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 0..=2000 {
        let w = 0.5 + k as f64 * 5e-4;
        let d = amplitude_derivatives(&s, w).unwrap();
        if d.s.norm() <= 1e-10 {
            continue;
        }
        used += 1;
        let norm = d.s.norm_sqr();
        let tau_orth = d.ds.norm() / d.s.norm();
        let tau_ph = (d.ds * d.s.conj()).im / norm;
        let tau_amp = (d.ds * d.s.conj()).re / norm;
        let t = tau_limits_exact(&s, w).unwrap();
        ensure((t.tau_ph - tau_ph).abs() <= 1e-12 * tau_orth, || {
            format!("tau_ph mismatch at {w}")
        })?;
        worst = worst.max((tau_orth.powi(2) - tau_ph.powi(2) - tau_amp.powi(2)).abs() / tau_orth.powi(2));
    }
    ensure(worst < 1e-8, || format!("relative deviation {worst:e}"))?;
    Ok(format!("{used} grid points, max relative deviation {worst:.1e}"))
}

fn backaction() -> Outcome {
    let s = StructureSpec::default_stack();
    let x = 1e-3;
    let c = clock_backaction(&s, 1.0, split(x)).unwrap();
    let excess = c.p_clock - c.p_noclock;
    let predicted = c.quadratic_prediction - c.p_noclock;
    ensure(excess > 0.0, || format!("p_clock - p_noclock = {excess:e}"))?;
    let rel = (excess - predicted).abs() / predicted.abs();
    ensure(rel < 0.1, || format!("excess {excess:e} vs quadratic {predicted:e}"))?;
    let remainder = |x: f64| {
        let c = clock_backaction(&s, 1.0, split(x)).unwrap();
        c.p_clock - c.quadratic_prediction
    };
    let ratio = remainder(2.0 * x) / remainder(x);
    ensure((ratio - 16.0).abs() <= 0.3 * 16.0, || {
        format!("Richardson ratio {ratio}")
    })?;
    Ok(format!(
        "excess {excess:.3e} vs 1/2 O^2 P'' {predicted:.3e} ({:.1e} rel), remainder ratio {ratio:.3}",
        rel
    ))
}

fn superluminal() -> Outcome {
    let s = StructureSpec::default_stack();
    let tau = tau_limits_exact(&s, 1.0).unwrap().tau_ph;
    let l = s.total_width();
    ensure(tau < l, || format!("tau_ph {tau} >= L {l}"))?;
    Ok(format!("tau_ph(omega_c) = {tau:.6} < L = {l:.6}"))
}

fn gap_symmetry() -> Outcome {
    let s = StructureSpec::default_stack();
    let (n1, n2) = (2.22f64, 1.41f64);
    let gap = 4.0 / PI * ((n1 - n2) / (n1 + n2)).asin();
    let p = |w: f64| transmission_amplitude(&s, w).unwrap().probability();
    let pass_band = p(1.0 - gap);
    ensure(p(1.0) < 0.05 * pass_band, || {
        format!("no gap at omega_c: {} vs {pass_band}", p(1.0))
    })?;
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let delta = 0.25 * gap * k as f64 / 100.0;
        let (a, b) = (p(1.0 + delta), p(1.0 - delta));
        worst = worst.max((a - b).abs() / a.max(b));
    }
    ensure(worst <= 0.02, || format!("relative asymmetry {worst:e}"))?;
    Ok(format!("gap width {gap:.4}, max relative asymmetry {worst:.1e}"))
}

fn chsh() -> Outcome {
    let tsirelson = 2.0 * SQRT_2;
    let s = StructureSpec::default_stack();
    let b0 = bell_vs_clock_scan(&s, 1.0, &[0.0]).remove(0).unwrap().b_value;
    ensure((b0 - tsirelson).abs() < 1e-6, || format!("B(0) = {b0}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_b, mut worst_e): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let sp = Complex64::from_polar(rng.random_range(0.01..1.0), rng.random_range(-PI..PI));
        let sm = Complex64::from_polar(rng.random_range(0.01..1.0), rng.random_range(-PI..PI));
        let state = TwoPhotonState::transmitted(sp, sm);
        let b = chsh_maximize(&state).unwrap().b_value;
        let expected = tsirelson * 2.0 * sp.norm() * sm.norm() / (sp.norm_sqr() + sm.norm_sqr());
        worst_b = worst_b.max((b - expected).abs());
        let (t1, t2) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        worst_e = worst_e.max((correlation(&state, t1, t2).unwrap() - state.intensity_correlation(t1, t2)).abs());
    }
    ensure(worst_b < 1e-6 && worst_e < 1e-12, || {
        format!("B deviation {worst_b:e}, E deviation {worst_e:e}")
    })?;
    Ok(format!(
        "B(0) = {b0:.10}, random B deviation {worst_b:.1e}, E routes {worst_e:.1e}"
    ))
}

fn correlation_loss() -> Outcome {
    let s = StructureSpec::default_stack();
    let edge = 0.85;
    let x = 1e-3;
    let gap = |x: f64| {
        let (e, p) = correlation_loss_expansion(&s, edge, split(x)).unwrap();
        e - p
    };
    let ratio = gap(2.0 * x) / gap(x);
    ensure((ratio - 16.0).abs() <= 0.3 * 16.0, || {
        format!("Richardson ratio {ratio} at omega {edge}")
    })?;
    let splits = [0.0, 2.5e-4, 5e-4, 7.5e-4, 1e-3];
    let mut worst: f64 = 0.0;
    for r in bell_vs_clock_scan(&s, 1.0, &splits) {
        worst = worst.max(2.0 * SQRT_2 - r.map_err(|e| e.to_string())?.b_value);
    }
    ensure(worst < 1e-3, || format!("midgap B loss {worst:e}"))?;
    Ok(format!(
        "band-edge ratio {ratio:.3}, midgap B loss {worst:.1e} for Omega <= 1e-3"
    ))
}

fn scheme_equivalence() -> Outcome {
    let s = StructureSpec::default_stack();
    let clock = split(1e-2);
    let mut worst: f64 = 0.0;
    for w in [0.8, 0.9, 1.0, 1.1, 1.2] {
        let reference = tau_ph_finite(&s, w, clock).unwrap();
        let prior = tau_limits_exact(&s, w).unwrap().tau_ph;
        let (plus, minus) = circular_amplitudes(&s, w, clock).unwrap();
        let grid: Vec<f64> = (-3500..=3500).map(|k| k as f64 * 1e-3 / w).collect();
        let curve = interferometer_curve(&plus, &minus, 0.0, &grid).unwrap();
        let b = extract_phase_time(&curve, &grid, w, 0.0, clock, Some(prior)).map_err(|e| e.to_string())?;
        let axis = main_axis(&PolarizationState::transmitted(plus.value, minus.value))
            .unwrap()
            .unwrap();
        let period = PI / clock.omega_split;
        let c = axis / clock.omega_split;
        let c = c + ((prior - c) / period).round() * period;
        for (label, t) in [("interferometer", b), ("main axis", c)] {
            let rel = (t - reference).abs() / reference.abs();
            ensure(rel < 1e-6, || format!("{label} {t} vs {reference} at omega {w}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("max relative deviation {worst:.1e} at 5 frequencies"))
}

const CLI_CONFIG: &str = r#"{
  "version": 1,
  "structure": {"quarter_wave": {"n1": 2.22, "n2": 1.41, "omega_c": 1.0, "periods": 5, "symmetric": true}},
  "omega": {"min": 0.6, "max": 1.4, "points": 41},
  "clock": [0.0, 0.001, 0.01],
  "bell": {"omega": 0.85},
  "paths": {"truncation": {"max_delay": 120.0}},
  "polarimetry": {"omega": 1.0, "omega_split": 0.01, "angles": 90, "dx": {"min": -4.0, "max": 4.0, "points": 401},
                  "readouts": ["phase", "orth", "interferometer", "main-axis"]}
}"#;

fn run_cli(config: &Path, command: &str, out: &Path, format: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_faraday-clock"))
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--format", format, "--threads", "3"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        format!("{command} failed: {}", String::from_utf8_lossy(&status.stderr))
    })?;
    let mut files: Vec<_> = std::fs::read_dir(out)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.json");
    std::fs::write(&config, CLI_CONFIG).map_err(|e| e.to_string())?;
    let mut count = 0;
    for command in ["scan", "bell", "paths", "polarimetry"] {
        for format in ["csv", "json"] {
            let a = run_cli(
                &config,
                command,
                &dir.path().join(format!("{command}-{format}-a")),
                format,
            )?;
            let b = run_cli(
                &config,
                command,
                &dir.path().join(format!("{command}-{format}-b")),
                format,
            )?;
            ensure(!a.is_empty() && a == b, || {
                format!("{command} --format {format} outputs differ")
            })?;
            count += a.len();
        }
    }
    Ok(format!("{count} files identical across two runs"))
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("Fabry-Perot oracle", fabry_perot),
        ("path/matrix equivalence", path_equivalence),
        ("unitarity and reciprocity", unitarity_reciprocity),
        ("weak-clock convergence", weak_clock_convergence),
        ("time identity", time_identity),
        ("clock back-action", backaction),
        ("superluminal phase time", superluminal),
        ("band-gap symmetry", gap_symmetry),
        ("CHSH", chsh),
        ("correlation-loss expansion", correlation_loss),
        ("scheme equivalence", scheme_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
