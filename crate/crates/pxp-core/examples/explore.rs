//! Temporary exploration scratchpad (not part of the library surface).

use std::f64::consts::PI;
use std::time::Instant;

use ndarray::{Array1, Array2};
use pxp_core::dynamics::{
    calibrate_tau_r, run_drive, CalibrationOptions, EvolveMethod, FloquetEngine, Propagator,
    PulseShape, Sampling,
};
use pxp_core::hilbert::{Basis, Boundary};
use pxp_core::linalg::eig_unitary;
use pxp_core::observables::{subharmonic_weight, Observable};
use pxp_core::operators::{pxp, rydberg, RydbergParams};
use pxp_core::C64;

fn main() {
    c5_diag();
    c15_probe();
}

/// f2(Z4) over 400 cycles at the three binding offsets, under (a) the
/// calibrated revival period, (b) the literature-rounded 1.51*pi value,
/// and (c) L = 20 with the calibrated period (finite-size trend).
fn c5_diag() {
    let t0 = Instant::now();
    let offsets = [0.05, 0.075, 0.10];

    // (a)+(b): L = 16, dense, shared hold propagator per tau.
    let basis = Basis::blockaded(16, Boundary::Periodic).unwrap();
    let h = pxp(&basis).unwrap();
    let psi4 = basis.z4_state().unwrap();
    for (label, tau_r) in [("calibrated", 4.786139), ("1.51pi", 1.51 * PI)] {
        let tau = 0.993 * 0.5 * tau_r;
        let hold = Propagator::new(&h, EvolveMethod::Dense).unwrap();
        let mut vals = Vec::new();
        for off in offsets {
            let theta = (1.0 + off) * PI;
            let engine = FloquetEngine::with_propagator(&basis, &hold, theta, tau).unwrap();
            let rec = run_drive(
                &engine,
                &basis,
                &psi4,
                400,
                &[Observable::Imbalance { normalised: true }],
                Sampling::Stroboscopic,
            )
            .unwrap();
            vals.push(subharmonic_weight(rec.column("imbalance").unwrap(), tau, PI / tau));
        }
        println!(
            "[c5] L=16 tau_r {}: f2(Z4) at +{{0.05,0.075,0.10}}pi = {:.4} {:.4} {:.4}",
            label, vals[0], vals[1], vals[2]
        );
    }

    // (c): L = 20, Krylov.
    let basis20 = Basis::blockaded(20, Boundary::Periodic).unwrap();
    let h20 = pxp(&basis20).unwrap();
    let psi2 = basis20.neel_state().unwrap();
    let psi4 = basis20.z4_state().unwrap();
    let tau_r20 = calibrate_tau_r(&h20, &psi2, 6.0, &CalibrationOptions::default()).unwrap();
    println!("[c5] L=20 tau_r = {:.5} ({:.1}s)", tau_r20, t0.elapsed().as_secs_f64());
    let tau20 = 0.993 * 0.5 * tau_r20;
    let mut vals = Vec::new();
    for off in offsets {
        let theta = (1.0 + off) * PI;
        let engine = FloquetEngine::new(
            &basis20,
            &h20,
            theta,
            tau20,
            PulseShape::Delta,
            EvolveMethod::Auto,
        )
        .unwrap();
        let rec = run_drive(
            &engine,
            &basis20,
            &psi4,
            400,
            &[Observable::Imbalance { normalised: true }],
            Sampling::Stroboscopic,
        )
        .unwrap();
        vals.push(subharmonic_weight(rec.column("imbalance").unwrap(), tau20, PI / tau20));
    }
    println!(
        "[c5] L=20 calibrated: f2(Z4) at +{{0.05,0.075,0.10}}pi = {:.4} {:.4} {:.4}",
        vals[0], vals[1], vals[2]
    );
    println!("[c5] elapsed {:.1}s", t0.elapsed().as_secs_f64());
}

fn top_pair_deviation(u: &Array2<C64>, reference: &Array1<C64>) -> f64 {
    let (phases, vectors) = eig_unitary(u).unwrap();
    let dim = phases.len();
    let mut overlaps = vec![0.0f64; dim];
    for k in 0..dim {
        let mut amp = C64::new(0.0, 0.0);
        for i in 0..dim {
            amp += vectors[[i, k]].conj() * reference[i];
        }
        overlaps[k] = amp.norm_sqr();
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| overlaps[b].partial_cmp(&overlaps[a]).unwrap());
    let raw = (phases[order[0]] - phases[order[1]]).abs();
    let gap = raw.min(2.0 * PI - raw);
    PI - gap
}

/// Least-squares V fit d ~ a|theta - v| + b over a fine vertex grid.
fn v_fit(thetas: &[f64], ds: &[f64]) -> (f64, f64, f64) {
    let n = thetas.len() as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    let lo = thetas[0];
    let hi = thetas[thetas.len() - 1];
    let mut v = lo;
    while v <= hi {
        let xs: Vec<f64> = thetas.iter().map(|t| (t - v).abs()).collect();
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sy: f64 = ds.iter().sum();
        let sxy: f64 = xs.iter().zip(ds).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        if det.abs() < 1e-30 {
            v += 0.001 * PI;
            continue;
        }
        let a = (n * sxy - sx * sy) / det;
        let b = (sy * sxx - sx * sxy) / det;
        let sse: f64 = xs
            .iter()
            .zip(ds)
            .map(|(x, y)| {
                let r = y - (a * x + b);
                r * r
            })
            .sum();
        if sse < best.0 {
            best = (sse, v, a, b);
        }
        v += 0.001 * PI;
    }
    (best.1, best.2, best.3)
}

/// Finite-width pulse diagnostics at L = 10 Rydberg, tau = tau_r/2,
/// tau_p = 0.3 tau: subharmonic persistence windows at theta = pi and the
/// spectral beat-rate line d(theta) for calibrated finite and delta pulses.
fn c15_probe() {
    let t0 = Instant::now();
    let basis = Basis::full(10, Boundary::Periodic).unwrap();
    let h = rydberg(&basis, &RydbergParams::default()).unwrap();
    let psi2 = basis.neel_state().unwrap();
    let tau_r = calibrate_tau_r(&h, &psi2, 12.0, &CalibrationOptions::default()).unwrap();
    let tau = 0.5 * tau_r;
    let pulse = PulseShape::Finite { tau_p: 0.3 * tau, calibrated: true };
    println!("[c15] tau_r = {:.5}, tau = {:.5} ({:.1}s)", tau_r, tau, t0.elapsed().as_secs_f64());

    // Persistence windows at theta = pi, calibrated finite pulses.
    let engine = FloquetEngine::new(&basis, &h, PI, tau, pulse.clone(), EvolveMethod::Dense).unwrap();
    let rec = run_drive(
        &engine,
        &basis,
        &psi2,
        256,
        &[Observable::Imbalance { normalised: true }],
        Sampling::Stroboscopic,
    )
    .unwrap();
    let series = rec.column("imbalance").unwrap();
    for w in [64usize, 100, 128, 256] {
        let f2 = subharmonic_weight(&series[..=w], tau, PI / tau);
        // argmax interior DFT bin of the mean-subtracted window
        let n = w + 1;
        let mean = series[..n].iter().sum::<f64>() / n as f64;
        let mut best_bin = 0;
        let mut best_pow = 0.0;
        for k in 1..=n / 2 {
            let mut s = C64::new(0.0, 0.0);
            for (j, x) in series[..n].iter().enumerate() {
                let ph = -2.0 * PI * (k as f64) * (j as f64) / n as f64;
                s += C64::new(ph.cos(), ph.sin()) * (x - mean);
            }
            let p = s.norm_sqr();
            if p > best_pow {
                best_pow = p;
                best_bin = k;
            }
        }
        println!(
            "[c15] theta=pi finite-cal window {}: f2 = {:.4}, argmax bin {} of {} (half-bin {})",
            w,
            f2,
            best_bin,
            n / 2,
            n / 2
        );
    }

    // Spectral V line: calibrated finite pulses, 13 points.
    let mut thetas = Vec::new();
    let mut ds = Vec::new();
    for k in 0..13 {
        let tp = Instant::now();
        let theta = (0.85 + 0.025 * k as f64) * PI;
        let engine =
            FloquetEngine::new(&basis, &h, theta, tau, pulse.clone(), EvolveMethod::Dense).unwrap();
        let u = engine.unitary().unwrap();
        let d = top_pair_deviation(&u, &psi2);
        println!(
            "[c15] finite-cal theta = {:.3}pi: d = {:.6} ({:.1}s)",
            theta / PI,
            d,
            tp.elapsed().as_secs_f64()
        );
        thetas.push(theta);
        ds.push(d);
    }
    let (v, a, b) = v_fit(&thetas, &ds);
    println!(
        "[c15] finite-cal V fit: vertex = {:.4}pi (offset {:.4}pi), slope {:.4}, floor {:.6}",
        v / PI,
        (v - PI).abs() / PI,
        a,
        b
    );

    // Delta-pulse contrast, 7 points.
    let hold = Propagator::new(&h, EvolveMethod::Dense).unwrap();
    let mut thetas_d = Vec::new();
    let mut ds_d = Vec::new();
    for k in 0..7 {
        let theta = (0.925 + 0.025 * k as f64) * PI;
        let engine = FloquetEngine::with_propagator(&basis, &hold, theta, tau).unwrap();
        let u = engine.unitary().unwrap();
        let d = top_pair_deviation(&u, &psi2);
        println!("[c15] delta theta = {:.3}pi: d = {:.6}", theta / PI, d);
        thetas_d.push(theta);
        ds_d.push(d);
    }
    let (vd, ad, bd) = v_fit(&thetas_d, &ds_d);
    println!(
        "[c15] delta V fit: vertex = {:.4}pi (offset {:.4}pi), slope {:.4}, floor {:.6}",
        vd / PI,
        (vd - PI).abs() / PI,
        ad,
        bd
    );
    println!("[c15] elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
