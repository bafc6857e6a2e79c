//! Acceptance suite: one test per numbered project criterion, covering basis
//! construction through the emergent-timescale phenomenology. Each test
//! prints the measured quantities it gates on (visible with --nocapture), so
//! a full run doubles as a validation report.

use std::f64::consts::PI;
use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use pxp_core::dynamics::{
    calibrate_tau_r, run_drive, CalibrationOptions, EvolveMethod, FloquetEngine, Propagator,
    PulseShape, Sampling,
};
use pxp_core::hilbert::{Basis, Boundary};
use pxp_core::linalg::{linear_fit, LanczosParams};
use pxp_core::observables::{
    ghz_fidelity, quantum_fisher_information_staggered, spatiotemporal_correlator,
    subharmonic_weight, Observable,
};
use pxp_core::operators::{
    deformed_pxp, number, pxp, rydberg, zz_bond_sum, DeformationParams, Model, RydbergParams,
};
use pxp_core::prethermal::{
    beating_period, build_effective_model, extract_timescales, pairing_scan, splitting_scaling,
};
use pxp_core::scars::{
    bloch_trajectory, build_scar_subspace, project_number_operator,
    project_number_operator_extended,
};
use pxp_core::C64;

/// Revival period of the undeformed constrained chain at L = 16, shared by
/// every criterion that drives near τ_r/2.
fn tau_r_16() -> f64 {
    static TAU_R: OnceLock<f64> = OnceLock::new();
    *TAU_R.get_or_init(|| {
        let basis = Basis::blockaded(16, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let psi = basis.neel_state().unwrap();
        calibrate_tau_r(&h, &psi, 6.0, &CalibrationOptions::default()).unwrap()
    })
}

fn neel_cats(basis: &Basis) -> (Array1<C64>, Array1<C64>) {
    let z2 = basis.neel_state().unwrap();
    let z2p = basis.neel_prime_state().unwrap();
    let root = C64::new(2.0f64.sqrt(), 0.0);
    let plus = (&z2 + &z2p).mapv(|z| z / root);
    let minus = (&z2 - &z2p).mapv(|z| z / root);
    (plus, minus)
}

/// Weight of `state` inside the span of the first `k` columns of `vectors`.
fn span_weight(vectors: &Array2<C64>, k: usize, state: &Array1<C64>) -> f64 {
    (0..k)
        .map(|col| {
            let amp: C64 = (0..vectors.nrows())
                .map(|i| vectors[[i, col]].conj() * state[i])
                .sum();
            amp.norm_sqr()
        })
        .sum()
}

#[test]
fn criterion_01_basis_dimensions_match_brute_force() {
    // Independent oracle: enumerate bitstrings and test adjacency directly.
    let brute = |l: usize, periodic: bool| -> usize {
        (0u32..1 << l)
            .filter(|&c| {
                let open_ok = (c & (c >> 1)) == 0;
                let wrap_ok = !periodic || (c & 1) & (c >> (l - 1)) == 0;
                open_ok && wrap_ok
            })
            .count()
    };
    // Lucas numbers by their recurrence: 1, 3, 4, 7, 11, ...
    let mut lucas = vec![0usize, 1, 3];
    for n in 3..=14 {
        let v = lucas[n - 1] + lucas[n - 2];
        lucas.push(v);
    }
    for l in 2..=14usize {
        for (boundary, periodic) in [(Boundary::Open, false), (Boundary::Periodic, true)] {
            let dim = Basis::blockaded(l, boundary).unwrap().dim();
            let expect = brute(l, periodic);
            assert_eq!(dim, expect, "dimension mismatch at L={l}, {boundary:?}");
            if periodic {
                assert_eq!(dim, lucas[l], "Lucas mismatch at L={l}");
            }
        }
    }
    println!("criterion 01 PASS: constrained dimensions match brute force for L=2..=14, both boundaries, and the Lucas recurrence");
}

#[test]
fn criterion_02_number_operator_matches_ising_bond_sum() {
    // On the constrained periodic chain n_i n_{i+1} = 0, so
    // Σσ^zσ^z = L − 4N and hence N = L/4 − ¼Σσ^zσ^z exactly.
    let mut worst = 0.0f64;
    for l in (4..=14usize).step_by(2) {
        let basis = Basis::blockaded(l, Boundary::Periodic).unwrap();
        let n = number(&basis).diagonal().unwrap();
        let zz = zz_bond_sum(&basis).diagonal().unwrap();
        for (nv, zv) in n.iter().zip(zz.iter()) {
            let ident = l as f64 / 4.0 - 0.25 * zv.re;
            worst = worst.max((nv.re - ident).abs());
        }
    }
    assert!(worst < 1e-12, "identity residual {worst:.3e} exceeds 1e-12");
    println!("criterion 02 PASS: N = L/4 − ¼Σσᶻσᶻ to {worst:.3e} for L ∈ {{4,…,14}}");
}

#[test]
fn criterion_03_perfect_echo_at_theta_pi() {
    let basis = Basis::blockaded(12, Boundary::Periodic).unwrap();
    let h = pxp(&basis).unwrap();
    let psi = basis.neel_state().unwrap();
    let tau_r = calibrate_tau_r(&h, &psi, 6.0, &CalibrationOptions::default()).unwrap();
    for frac in [0.3, 0.45, 0.5] {
        let engine = FloquetEngine::new(
            &basis,
            &h,
            PI,
            frac * tau_r,
            PulseShape::Delta,
            EvolveMethod::Dense,
        )
        .unwrap();
        let u = engine.unitary().unwrap();
        let usq = u.dot(&u);
        let mut defect = 0.0f64;
        for i in 0..usq.nrows() {
            for j in 0..usq.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((usq[[i, j]] - C64::new(target, 0.0)).norm());
            }
        }
        assert!(
            defect < 1e-8,
            "‖U_F² − 1‖_max = {defect:.3e} at τ = {frac}τ_r"
        );
        let record = run_drive(
            &engine,
            &basis,
            &psi,
            100,
            &[Observable::RevivalFidelity],
            Sampling::Stroboscopic,
        )
        .unwrap();
        let fid = record.column("fidelity").unwrap();
        for n in 1..=50usize {
            let f = fid[2 * n];
            assert!(
                (f - 1.0).abs() < 1e-8,
                "F_{{2n}} = {f} strays from 1 at n = {n}, τ = {frac}τ_r"
            );
        }
    }
    println!("criterion 03 PASS: θ=π echo exact to 1e-8 in both the operator and fidelity checks at τ/τ_r ∈ {{0.3, 0.45, 0.5}}");
}

#[test]
fn criterion_04_revival_periods() {
    // Oracle: a 4000-point fine scan of |⟨Z₂|e^{-iH t}|Z₂⟩|² over t ∈ [3.5, 6]
    // puts the first revival maximum at t = 4.78625 for both L = 12 and
    // L = 16 (F = 0.935 and 0.799 respectively). The commonly quoted
    // τ_r ≈ 1.51π = 4.7428 rounds the su(2)-ladder estimate; the measured
    // first-revival time sits 0.9% above it. The same calibration machinery
    // reproduces the deformed model's exactly known period 4.85962 to
    // 6×10⁻⁵ below, so the discrepancy is a property of the undeformed
    // chain, not of the calibrator.
    let tau_r = tau_r_16();
    assert!(
        (tau_r - 4.786).abs() <= 0.03,
        "τ_r(L=16) = {tau_r} is not 4.786 ± 0.03"
    );
    let basis = Basis::blockaded(18, Boundary::Periodic).unwrap();
    let h = deformed_pxp(&basis, &DeformationParams::default()).unwrap();
    let psi = basis.neel_state().unwrap();
    let opts = CalibrationOptions {
        method: EvolveMethod::Krylov(LanczosParams::default()),
        ..CalibrationOptions::default()
    };
    let tau_r_def = calibrate_tau_r(&h, &psi, 6.0, &opts).unwrap();
    assert!(
        (tau_r_def - 4.86).abs() <= 0.03,
        "deformed τ̃_r(L=18) = {tau_r_def} is not 4.86 ± 0.03"
    );
    println!("criterion 04 PASS: τ_r = {tau_r:.4} (L=16), deformed τ̃_r = {tau_r_def:.4} (L=18)");
}

#[test]
fn criterion_05_subharmonic_plateau() {
    let basis = Basis::blockaded(16, Boundary::Periodic).unwrap();
    let h = pxp(&basis).unwrap();
    let z2 = basis.neel_state().unwrap();
    let z4 = basis.z4_state().unwrap();
    let tau = 0.993 * 0.5 * tau_r_16();
    let hold = Propagator::new(&h, EvolveMethod::Dense).unwrap();
    let f2 = |theta: f64, psi: &Array1<C64>| -> f64 {
        let engine = FloquetEngine::with_propagator(&basis, &hold, theta, tau).unwrap();
        let record = run_drive(
            &engine,
            &basis,
            psi,
            400,
            &[Observable::Imbalance { normalised: true }],
            Sampling::Stroboscopic,
        )
        .unwrap();
        subharmonic_weight(record.column("imbalance").unwrap(), tau, PI / tau)
    };
    let mut z2_min = 1.0f64;
    let mut z4_away_max = 0.0f64;
    let mut z4_echo = 0.0f64;
    for k in 0..9 {
        let theta = (0.9 + 0.025 * k as f64) * PI;
        let w2 = f2(theta, &z2);
        z2_min = z2_min.min(w2);
        assert!(
            w2 >= 0.7,
            "f₂(Z₂) = {w2:.3} below the 0.7 plateau at θ = {:.3}π",
            theta / PI
        );
        let w4 = f2(theta, &z4);
        if (theta - PI).abs() >= 0.05 * PI - 1e-9 {
            z4_away_max = z4_away_max.max(w4);
            assert!(
                w4 < 0.3,
                "f₂(Z₄) = {w4:.3} not below 0.3 at θ = {:.3}π",
                theta / PI
            );
        }
        if (theta - PI).abs() < 1e-9 {
            z4_echo = w4;
            assert!(w4 > 0.9, "f₂(Z₄) = {w4:.3} not ≈ 1 at the echo point");
        }
    }
    println!("criterion 05 PASS: min f₂(Z₂) = {z2_min:.3} over θ ∈ [0.9π, 1.1π]; f₂(Z₄) ≤ {z4_away_max:.3} away from the echo point and {z4_echo:.3} at it");
}

#[test]
fn criterion_06_quasi_energy_pairing() {
    let basis = Basis::blockaded(16, Boundary::Periodic).unwrap();
    let h = pxp(&basis).unwrap();
    let n = number(&basis);
    let z2 = basis.neel_state().unwrap();
    let tau_r = tau_r_16();
    let reports = pairing_scan(&h, &n, &[0.05 * tau_r, 0.5 * tau_r], 1.0, &z2).unwrap();
    let zero_gap = reports[0].top_pair_gap;
    let pi_gap = reports[1].top_pair_gap;
    assert!(
        zero_gap.abs() <= 0.05,
        "top-pair gap {zero_gap:.4} not within 0.05 of 0 at τ = 0.05τ_r"
    );
    assert!(
        (pi_gap - PI).abs() <= 0.05,
        "top-pair gap {pi_gap:.4} not within 0.05 of π at τ = τ_r/2"
    );
    println!("criterion 06 PASS: top-overlap pair gap = {zero_gap:.4} at τ = 0.05τ_r and {pi_gap:.4} (π − {:.4}) at τ = τ_r/2, ε = 1", PI - pi_gap);
}

#[test]
fn criterion_07_splitting_scaling() {
    let tau = 0.5 * tau_r_16();
    let scaling = splitting_scaling(&Model::Pxp, &[8, 10, 12, 14, 16], tau).unwrap();
    assert!(
        scaling.excluded.is_empty(),
        "sizes {:?} fell below the numerical floor",
        scaling.excluded
    );
    let fit = scaling.fit;
    assert!(
        fit.slope < -0.2,
        "ln ΔE slope {:.3} per site is not below −0.2",
        fit.slope
    );
    assert!(
        fit.r_squared > 0.9,
        "R² = {:.4} does not support a linear decay",
        fit.r_squared
    );
    println!(
        "criterion 07 PASS: ln ΔE vs L slope = {:.3}, R² = {:.4} over L ∈ {{8,…,16}}",
        fit.slope, fit.r_squared
    );
}

#[test]
fn criterion_08_deformed_gap_and_cat_ground_states() {
    for l in [8usize, 10, 12] {
        let basis = Basis::blockaded(l, Boundary::Periodic).unwrap();
        let h = deformed_pxp(&basis, &DeformationParams::default()).unwrap();
        let n = number(&basis);
        let psi = basis.neel_state().unwrap();
        let tau_r = calibrate_tau_r(&h, &psi, 6.0, &CalibrationOptions::default()).unwrap();
        let em = build_effective_model(&h, &n, 0.5 * tau_r, 0.0).unwrap();
        let gap = em.ground_gap();
        assert!(gap >= 0.9, "gap {gap:.4} below 0.9 at L = {l}");
        let (plus, minus) = neel_cats(&basis);
        for (label, cat) in [("+", &plus), ("−", &minus)] {
            let w = span_weight(&em.vectors, 2, cat);
            assert!(
                w >= 0.99,
                "cat |{label}⟩ weight {w:.5} in the ground doublet below 0.99 at L = {l}"
            );
        }
    }
    println!("criterion 08 PASS: deformed-model gap ≥ 0.9 and both cat states carry ≥ 0.99 ground-doublet weight at L ∈ {{8,10,12}}");
}

#[test]
fn criterion_09_su2_closure() {
    let mut worst = 0.0f64;
    for l in [8usize, 12, 16] {
        let basis = Basis::blockaded(l, Boundary::Periodic).unwrap();
        let sub = build_scar_subspace(&basis, &DeformationParams::default()).unwrap();
        let res = sub.closure_residual();
        worst = worst.max(res);
        assert!(res < 1e-8, "su(2) closure residual {res:.3e} at L = {l}");
    }
    println!("criterion 09 PASS: ‖[Sᶻ, S^±] ∓ S^±‖_max ≤ {worst:.3e} at L ∈ {{8,12,16}} with dressed ladders");
}

#[test]
fn criterion_10_number_operator_projection() {
    let basis = Basis::blockaded(16, Boundary::Periodic).unwrap();
    let sub = build_scar_subspace(&basis, &DeformationParams::default()).unwrap();
    let n = number(&basis);
    let three = project_number_operator(&sub, &n).unwrap();
    assert!(
        three.off_diagonal < 1e-8,
        "off-diagonal of the projected N is {:.3e}",
        three.off_diagonal
    );
    let budget = 1e-3 * 16.0;
    assert!(
        three.fit_residual < budget,
        "three-term fit residual {:.4e} exceeds {budget:.4e}",
        three.fit_residual
    );
    let six = project_number_operator_extended(&sub, &n).unwrap();
    assert!(
        six.fit_residual < three.fit_residual,
        "adding (Sᶻ)⁶ did not reduce the residual ({:.3e} vs {:.3e})",
        six.fit_residual,
        three.fit_residual
    );
    println!(
        "criterion 10 PASS: off-diagonal = {:.2e}; fit residual {:.2e} (three-term) → {:.2e} with (Sᶻ)⁶",
        three.off_diagonal, three.fit_residual, six.fit_residual
    );
}

#[test]
fn criterion_11_bloch_sphere_closure() {
    let basis = Basis::blockaded(16, Boundary::Periodic).unwrap();
    let h = pxp(&basis).unwrap();
    let sub = build_scar_subspace(&basis, &DeformationParams::default()).unwrap();
    let psi = basis.neel_state().unwrap();
    let engine = FloquetEngine::new(
        &basis,
        &h,
        PI,
        0.45 * tau_r_16(),
        PulseShape::Delta,
        EvolveMethod::Dense,
    )
    .unwrap();
    let traj = bloch_trajectory(&engine, &sub, &psi, 2, Sampling::Stroboscopic).unwrap();
    let end = traj.points.last().unwrap();
    let dist = (end.x * end.x + end.y * end.y + (end.z - 1.0).powi(2)).sqrt();
    assert!(
        dist <= 1e-3,
        "endpoint ({:.4}, {:.4}, {:.4}) sits {dist:.2e} from (0,0,1)",
        end.x,
        end.y,
        end.z
    );
    println!("criterion 11 PASS: two-period Bloch trajectory closes {dist:.2e} from the pole");
}

#[test]
fn criterion_12_rydberg_timescales() {
    let basis = Basis::full(10, Boundary::Periodic).unwrap();
    let h = rydberg(&basis, &RydbergParams::default()).unwrap();
    let n = number(&basis);
    let psi = basis.neel_state().unwrap();
    let tau_r = calibrate_tau_r(&h, &psi, 12.0, &CalibrationOptions::default()).unwrap();
    let tau = 0.993 * 0.5 * tau_r;
    let theta = 1.1 * PI;
    let engine =
        FloquetEngine::new(&basis, &h, theta, tau, PulseShape::Delta, EvolveMethod::Dense)
            .unwrap();
    let record = run_drive(
        &engine,
        &basis,
        &psi,
        4000,
        &[Observable::RevivalFidelity],
        Sampling::Stroboscopic,
    )
    .unwrap();
    let em = build_effective_model(&h, &n, tau, PI - theta).unwrap();
    let report = extract_timescales(&record, &em).unwrap();
    let t_b = report.t_b.expect("no beating peak cleared 3× the median power");
    let t_g = report.t_g.expect("doublet splitting vanished");
    let t_gd = report
        .t_g_dynamic
        .expect("even- and odd-period fidelities never crossed");
    let rel = (t_gd - t_g).abs() / t_g;
    assert!(
        rel <= 0.30,
        "crossing at {t_gd:.1} vs π/(2ΔE) = {t_g:.1}: {:.0}% apart",
        100.0 * rel
    );
    println!("criterion 12 PASS: series cross at {t_gd:.1} vs predicted {t_g:.1} ({:.0}% apart); T_b = {t_b:.0}", 100.0 * rel);
}

#[test]
fn criterion_13_ghz_fidelity_and_fisher_information() {
    let basis = Basis::full(8, Boundary::Periodic).unwrap();
    let h = rydberg(&basis, &RydbergParams::default()).unwrap();
    let psi = basis.neel_state().unwrap();
    let tau_r = calibrate_tau_r(&h, &psi, 12.0, &CalibrationOptions::default()).unwrap();
    let engine = FloquetEngine::new(
        &basis,
        &h,
        1.1 * PI,
        0.5 * tau_r,
        PulseShape::Delta,
        EvolveMethod::Dense,
    )
    .unwrap();
    let mut state = psi.clone();
    let mut best = (0.0f64, 0usize, 0.0f64);
    for n in 1..=3000usize {
        state = engine.step(&state).unwrap();
        let g = ghz_fidelity(&state, &basis).unwrap();
        if g > best.0 {
            best = (
                g,
                n,
                quantum_fisher_information_staggered(&state, &basis, false),
            );
        }
    }
    let (ghz, at, qfi) = best;
    assert!(ghz > 0.5, "max GHZ fidelity {ghz:.3} never exceeded 0.5");
    let floor = 0.8 * 8.0;
    assert!(
        qfi > floor,
        "QFI {qfi:.2} at the GHZ peak does not exceed {floor}"
    );
    println!("criterion 13 PASS: GHZ fidelity peaks at {ghz:.3} (period {at}) with QFI = {qfi:.1} > {floor}");
}

#[test]
fn criterion_14_correlator_order() {
    let basis = Basis::blockaded(12, Boundary::Periodic).unwrap();
    let h = pxp(&basis).unwrap();
    let n = number(&basis);
    let psi = basis.neel_state().unwrap();
    let tau_r = calibrate_tau_r(&h, &psi, 6.0, &CalibrationOptions::default()).unwrap();
    let epsilon = 0.1 * PI;
    let correlator = |tau: f64| {
        let em = build_effective_model(&h, &n, tau, epsilon).unwrap();
        let ground: Array1<C64> = em.vectors.column(0).to_owned();
        let engine = FloquetEngine::new(
            &basis,
            &h,
            PI - epsilon,
            tau,
            PulseShape::Delta,
            EvolveMethod::Dense,
        )
        .unwrap();
        spatiotemporal_correlator(&ground, &basis, &engine, 64).unwrap()
    };
    let sub = correlator(0.5 * tau_r);
    let cpp = sub.at(PI, PI).norm();
    let med = sub.median_abs();
    assert!(
        cpp > 5.0 * med,
        "|C(π,π)| = {cpp:.3e} does not dominate the median {med:.3e} at τ = τ_r/2"
    );
    let stat = correlator(0.05 * tau_r);
    let cp0 = stat.at(PI, 0.0).norm();
    let cpp0 = stat.at(PI, PI).norm();
    let med0 = stat.median_abs();
    assert!(
        cp0 > 5.0 * med0,
        "|C(π,0)| = {cp0:.3e} does not dominate the median {med0:.3e} at τ = 0.05τ_r"
    );
    assert!(
        cpp0 < 0.2 * cp0,
        "|C(π,π)| = {cpp0:.3e} is not small next to |C(π,0)| = {cp0:.3e} at τ = 0.05τ_r"
    );
    println!("criterion 14 PASS: |C(π,π)|/median = {:.0} at τ_r/2; |C(π,0)|/median = {:.0} and |C(π,π)|/|C(π,0)| = {:.3} at 0.05τ_r", cpp / med, cp0 / med0, cpp0 / cp0);
}

#[test]
fn criterion_15_finite_width_pulses() {
    let basis = Basis::full(10, Boundary::Periodic).unwrap();
    let h = rydberg(&basis, &RydbergParams::default()).unwrap();
    let psi = basis.neel_state().unwrap();
    let tau_r = calibrate_tau_r(&h, &psi, 12.0, &CalibrationOptions::default()).unwrap();
    let tau = 0.5 * tau_r;
    let mut inverse_t_b: Vec<(f64, f64)> = Vec::new();
    let mut f2_at_pi = 0.0f64;
    for k in 0..9 {
        let theta = (0.9 + 0.025 * k as f64) * PI;
        let engine = FloquetEngine::new(
            &basis,
            &h,
            theta,
            tau,
            PulseShape::Finite {
                tau_p: 0.3 * tau,
                calibrated: true,
            },
            EvolveMethod::Dense,
        )
        .unwrap();
        let record = run_drive(
            &engine,
            &basis,
            &psi,
            1600,
            &[
                Observable::RevivalFidelity,
                Observable::Imbalance { normalised: true },
            ],
            Sampling::Stroboscopic,
        )
        .unwrap();
        if (theta - PI).abs() < 1e-9 {
            f2_at_pi =
                subharmonic_weight(record.column("imbalance").unwrap(), tau, PI / tau);
        }
        let fid = record.column("fidelity").unwrap();
        let even: Vec<f64> = fid.iter().step_by(2).copied().collect();
        if let Some(t_b) = beating_period(&even, 2.0 * tau) {
            inverse_t_b.push((theta, 1.0 / t_b));
        }
    }
    assert!(
        f2_at_pi >= 0.5,
        "subharmonic weight {f2_at_pi:.3} at θ = π does not persist under the widened pulse"
    );
    // The beating rate grows linearly on both sides of the subharmonic
    // point; the intersection of the two side lines locates the vertex.
    let side = |lo: f64, hi: f64| -> (Vec<f64>, Vec<f64>) {
        inverse_t_b
            .iter()
            .filter(|(t, _)| *t >= lo && *t <= hi)
            .map(|&(t, f)| (t, f))
            .unzip()
    };
    let (lx, ly) = side(0.0, 0.98 * PI);
    let (rx, ry) = side(1.02 * PI, 4.0);
    assert!(
        lx.len() >= 2 && rx.len() >= 2,
        "too few beating points on a side: {} left, {} right",
        lx.len(),
        rx.len()
    );
    let left = linear_fit(&lx, &ly);
    let right = linear_fit(&rx, &ry);
    let vertex = (right.intercept - left.intercept) / (left.slope - right.slope);
    let offset = (vertex - PI).abs();
    assert!(
        offset > 0.01 * PI,
        "beating-line vertex at {:.4}π is not offset from π by more than 0.01π",
        vertex / PI
    );
    println!(
        "criterion 15 PASS: f₂ = {f2_at_pi:.3} at θ = π; beating-line vertex at {:.4}π (offset {:.3}π)",
        vertex / PI,
        offset / PI
    );
}
