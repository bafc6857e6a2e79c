//! Time evolution: exact propagators for static Hamiltonians (dense spectral
//! or Krylov) and the kicked one-period Floquet cycle
//! U_F(θ,τ) = e^{-iθN} · e^{-iτH}, with delta or finite-width kicks,
//! stroboscopic/micromotion trajectory recording, and calibration of the
//! revival period τ_r from the fidelity autocorrelation.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::hilbert::Basis;
use crate::linalg::{self, LanczosParams};
use crate::observables::{Observable, ObservableContext};
use crate::operators::{self, OperatorMatrix};
use crate::C64;

/// Largest dimension handled by dense eigendecomposition by default; beyond
/// this the automatic mode switches to Krylov stepping.
pub const DENSE_DIM_LIMIT: usize = 6000;

/// How exp(-iHt) is applied.
#[derive(Clone, Copy, Debug)]
pub enum EvolveMethod {
    /// Dense below `DENSE_DIM_LIMIT`, Krylov above.
    Auto,
    Dense,
    Krylov(LanczosParams),
}

#[derive(Clone)]
enum Kernel {
    DenseReal {
        energies: Array1<f64>,
        vectors: Array2<f64>,
    },
    DenseComplex {
        energies: Array1<f64>,
        vectors: Array2<C64>,
    },
    Krylov {
        op: OperatorMatrix,
        params: LanczosParams,
    },
}

/// exp(-iHt) applier for a fixed Hermitian H and arbitrary t.
#[derive(Clone)]
pub struct Propagator {
    pub dim: usize,
    pub basis_fingerprint: u64,
    kernel: Kernel,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix, method: EvolveMethod) -> Result<Self> {
        if !h.hermitian {
            return Err(Error::Invalid(
                "propagators need a Hermitian generator".into(),
            ));
        }
        let kernel = match method {
            EvolveMethod::Auto if h.dim <= DENSE_DIM_LIMIT => Self::dense_kernel(h)?,
            EvolveMethod::Auto => Kernel::Krylov {
                op: h.clone(),
                params: LanczosParams::default(),
            },
            EvolveMethod::Dense => {
                if h.dim > DENSE_DIM_LIMIT {
                    return Err(Error::DenseTooLarge {
                        dim: h.dim,
                        max: DENSE_DIM_LIMIT,
                    });
                }
                Self::dense_kernel(h)?
            }
            EvolveMethod::Krylov(params) => Kernel::Krylov {
                op: h.clone(),
                params,
            },
        };
        Ok(Propagator {
            dim: h.dim,
            basis_fingerprint: h.basis_fingerprint,
            kernel,
        })
    }

    fn dense_kernel(h: &OperatorMatrix) -> Result<Kernel> {
        if let Some(real) = h.real_dense() {
            let (energies, vectors) = linalg::eigh_real(&real)?;
            Ok(Kernel::DenseReal { energies, vectors })
        } else {
            let (energies, vectors) = linalg::eigh_complex(&h.to_dense())?;
            Ok(Kernel::DenseComplex { energies, vectors })
        }
    }

    pub fn evolve(&self, state: &Array1<C64>, t: f64) -> Result<Array1<C64>> {
        assert_eq!(state.len(), self.dim, "state/propagator dimension mismatch");
        match &self.kernel {
            Kernel::DenseReal { energies, vectors } => {
                let re = state.mapv(|z| z.re);
                let im = state.mapv(|z| z.im);
                let cre = vectors.t().dot(&re);
                let cim = vectors.t().dot(&im);
                let mut ore = Array1::zeros(self.dim);
                let mut oim = Array1::zeros(self.dim);
                for k in 0..self.dim {
                    let (s, c) = (energies[k] * t).sin_cos();
                    // (a + ib)(cos - i sin) split into real and imaginary parts.
                    ore[k] = cre[k] * c + cim[k] * s;
                    oim[k] = cim[k] * c - cre[k] * s;
                }
                let rre = vectors.dot(&ore);
                let rim = vectors.dot(&oim);
                Ok(Array1::from_iter(
                    rre.iter().zip(rim.iter()).map(|(&a, &b)| C64::new(a, b)),
                ))
            }
            Kernel::DenseComplex { energies, vectors } => {
                let coeffs = linalg::adjoint(vectors).dot(state);
                let rotated = Array1::from_iter(
                    coeffs
                        .iter()
                        .zip(energies.iter())
                        .map(|(&c, &e)| c * C64::from_polar(1.0, -e * t)),
                );
                Ok(vectors.dot(&rotated))
            }
            Kernel::Krylov { op, params } => {
                linalg::expi_krylov(&|v: &Array1<C64>| op.apply(v), state, t, params)
            }
        }
    }

    /// Fidelity series |⟨ψ0|e^{-iHt}|ψ0⟩|² over a time grid. Dense kernels
    /// use the spectral autocorrelation Σ|c_k|²e^{-iE_k t} (O(dim) per point);
    /// the Krylov kernel steps through the grid sequentially.
    pub fn fidelity_series(&self, psi0: &Array1<C64>, times: &[f64]) -> Result<Vec<f64>> {
        match &self.kernel {
            Kernel::DenseReal { energies, vectors } => {
                let re = psi0.mapv(|z| z.re);
                let im = psi0.mapv(|z| z.im);
                let cre = vectors.t().dot(&re);
                let cim = vectors.t().dot(&im);
                let weights: Vec<f64> = cre
                    .iter()
                    .zip(cim.iter())
                    .map(|(&a, &b)| a * a + b * b)
                    .collect();
                Ok(autocorrelation(energies, &weights, times))
            }
            Kernel::DenseComplex { energies, vectors } => {
                let coeffs = linalg::adjoint(vectors).dot(psi0);
                let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
                Ok(autocorrelation(energies, &weights, times))
            }
            Kernel::Krylov { op, params } => {
                let mut out = Vec::with_capacity(times.len());
                let mut psi = psi0.clone();
                let mut t_now = 0.0;
                for &t in times {
                    psi = linalg::expi_krylov(
                        &|v: &Array1<C64>| op.apply(v),
                        &psi,
                        t - t_now,
                        params,
                    )?;
                    t_now = t;
                    let overlap: C64 = psi0
                        .iter()
                        .zip(psi.iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    out.push(overlap.norm_sqr());
                }
                Ok(out)
            }
        }
    }
}

fn autocorrelation(energies: &Array1<f64>, weights: &[f64], times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            let mut sum = C64::new(0.0, 0.0);
            for (&e, &w) in energies.iter().zip(weights) {
                sum += C64::from_polar(w, -e * t);
            }
            sum.norm_sqr()
        })
        .collect()
}

/// Kick profile of the drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseShape {
    /// Instantaneous e^{-iθN}.
    Delta,
    /// The kick generator θN spread over a window τ_p straddling the period
    /// boundary: evolve with H + aN for τ_p/2, H for τ-τ_p, H + aN for τ_p/2.
    /// Calibrated mode uses a = θ/τ_p so the integrated kick area stays θN;
    /// raw mode uses a = θ as written (area θ·τ_p).
    Finite { tau_p: f64, calibrated: bool },
}

#[derive(Clone)]
enum Segments {
    Delta {
        kick: Array1<C64>,
        hold: Propagator,
    },
    Finite {
        edge: Propagator,
        middle: Propagator,
        tau_p: f64,
    },
}

/// One-period Floquet evolution U_F(θ,τ) = e^{-iθN} e^{-iτH}, with the kick
/// applied after the static segment.
#[derive(Clone)]
pub struct FloquetEngine {
    pub dim: usize,
    pub basis_fingerprint: u64,
    pub theta: f64,
    pub tau: f64,
    pub pulse: PulseShape,
    segments: Segments,
}

impl FloquetEngine {
    pub fn new(
        basis: &Basis,
        h: &OperatorMatrix,
        theta: f64,
        tau: f64,
        pulse: PulseShape,
        method: EvolveMethod,
    ) -> Result<Self> {
        if h.basis_fingerprint != basis.fingerprint() {
            return Err(Error::BasisMismatch(h.basis_fingerprint, basis.fingerprint()));
        }
        if tau <= 0.0 {
            return Err(Error::Invalid("drive period must be positive".into()));
        }
        let segments = match pulse {
            PulseShape::Delta => Segments::Delta {
                kick: operators::kick(basis, theta).diagonal()?,
                hold: Propagator::new(h, method)?,
            },
            PulseShape::Finite { tau_p, calibrated } => {
                if !(tau_p > 0.0 && tau_p < tau) {
                    return Err(Error::Invalid(
                        "finite pulse width must satisfy 0 < tau_p < tau".into(),
                    ));
                }
                let amplitude = if calibrated { theta / tau_p } else { theta };
                let kicked = h.add_scaled(&operators::number(basis), C64::new(amplitude, 0.0))?;
                Segments::Finite {
                    edge: Propagator::new(&kicked, method)?,
                    middle: Propagator::new(h, method)?,
                    tau_p,
                }
            }
        };
        Ok(FloquetEngine {
            dim: h.dim,
            basis_fingerprint: h.basis_fingerprint,
            theta,
            tau,
            pulse,
            segments,
        })
    }

    /// Delta-kick engine over a prebuilt static propagator, so scans that
    /// vary only θ or τ reuse one spectral decomposition.
    pub fn with_propagator(
        basis: &Basis,
        hold: &Propagator,
        theta: f64,
        tau: f64,
    ) -> Result<Self> {
        if hold.basis_fingerprint != basis.fingerprint() {
            return Err(Error::BasisMismatch(
                hold.basis_fingerprint,
                basis.fingerprint(),
            ));
        }
        if tau <= 0.0 {
            return Err(Error::Invalid("drive period must be positive".into()));
        }
        Ok(FloquetEngine {
            dim: hold.dim,
            basis_fingerprint: hold.basis_fingerprint,
            theta,
            tau,
            pulse: PulseShape::Delta,
            segments: Segments::Delta {
                kick: operators::kick(basis, theta).diagonal()?,
                hold: hold.clone(),
            },
        })
    }

    /// Advance one full period.
    pub fn step(&self, state: &Array1<C64>) -> Result<Array1<C64>> {
        match &self.segments {
            Segments::Delta { kick, hold } => {
                let held = hold.evolve(state, self.tau)?;
                Ok(kick * &held)
            }
            Segments::Finite {
                edge,
                middle,
                tau_p,
            } => {
                let a = edge.evolve(state, 0.5 * tau_p)?;
                let b = middle.evolve(&a, self.tau - tau_p)?;
                edge.evolve(&b, 0.5 * tau_p)
            }
        }
    }

    /// Advance one full inverse period (U_F†).
    pub fn step_inverse(&self, state: &Array1<C64>) -> Result<Array1<C64>> {
        match &self.segments {
            Segments::Delta { kick, hold } => {
                let unkicked = Array1::from_iter(
                    state.iter().zip(kick.iter()).map(|(&s, &k)| s * k.conj()),
                );
                hold.evolve(&unkicked, -self.tau)
            }
            Segments::Finite {
                edge,
                middle,
                tau_p,
            } => {
                let a = edge.evolve(state, -0.5 * tau_p)?;
                let b = middle.evolve(&a, -(self.tau - tau_p))?;
                edge.evolve(&b, -0.5 * tau_p)
            }
        }
    }

    /// State a fraction of the way through a period: `s` seconds after the
    /// period boundary, 0 ≤ s ≤ τ. At s = τ the delta kick has not yet been
    /// applied (it acts exactly at the boundary).
    pub fn evolve_within_period(&self, state: &Array1<C64>, s: f64) -> Result<Array1<C64>> {
        assert!((0.0..=self.tau + 1e-12).contains(&s), "0 <= s <= tau");
        match &self.segments {
            Segments::Delta { hold, .. } => hold.evolve(state, s),
            Segments::Finite {
                edge,
                middle,
                tau_p,
            } => {
                let half = 0.5 * tau_p;
                if s <= half {
                    edge.evolve(state, s)
                } else if s <= self.tau - half {
                    let a = edge.evolve(state, half)?;
                    middle.evolve(&a, s - half)
                } else {
                    let a = edge.evolve(state, half)?;
                    let b = middle.evolve(&a, self.tau - tau_p)?;
                    edge.evolve(&b, s - (self.tau - half))
                }
            }
        }
    }

    /// The one-period unitary as a dense matrix, column by column.
    pub fn unitary(&self) -> Result<Array2<C64>> {
        if self.dim > DENSE_DIM_LIMIT {
            return Err(Error::DenseTooLarge {
                dim: self.dim,
                max: DENSE_DIM_LIMIT,
            });
        }
        let mut u = Array2::zeros((self.dim, self.dim));
        let mut column = Array1::zeros(self.dim);
        for j in 0..self.dim {
            column.fill(C64::new(0.0, 0.0));
            column[j] = C64::new(1.0, 0.0);
            let evolved = self.step(&column)?;
            u.column_mut(j).assign(&evolved);
        }
        Ok(u)
    }
}

/// When observables are sampled along a driven trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    /// Once per period, after the kick.
    Stroboscopic,
    /// `substeps` evenly spaced instants inside every period (the last one
    /// coincides with the next stroboscopic point).
    Micromotion { substeps: usize },
}

/// Sampled expectation values along one driven trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// series[i] is the time series of labels[i].
    pub series: Vec<Vec<f64>>,
    pub initial_state: Array1<C64>,
    pub final_state: Array1<C64>,
    /// Echoed drive description, written as CSV comments.
    pub metadata: Vec<(String, String)>,
}

impl TrajectoryRecord {
    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.series[i].as_slice())
    }

    /// CSV with `# key = value` comment lines, then `t,<labels...>` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str("t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, &t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:.12e}"));
            for s in &self.series {
                out.push_str(&format!(",{:.12e}", s[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Drive `psi0` for `n_periods` periods, recording the requested observables
/// at the sampled instants (always including t = 0).
pub fn run_drive(
    engine: &FloquetEngine,
    basis: &Basis,
    psi0: &Array1<C64>,
    n_periods: usize,
    observables: &[Observable],
    sampling: Sampling,
) -> Result<TrajectoryRecord> {
    basis.check_state(psi0)?;
    if basis.fingerprint() != engine.basis_fingerprint {
        return Err(Error::BasisMismatch(
            engine.basis_fingerprint,
            basis.fingerprint(),
        ));
    }
    let ctx = ObservableContext::new(basis, psi0);
    let labels: Vec<String> = observables.iter().map(|o| o.label()).collect();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); observables.len()];
    let mut times = Vec::new();

    let mut record = |t: f64, state: &Array1<C64>, series: &mut Vec<Vec<f64>>| -> Result<()> {
        times.push(t);
        for (obs, column) in observables.iter().zip(series.iter_mut()) {
            column.push(obs.measure(state, &ctx)?);
        }
        Ok(())
    };

    let mut state = psi0.clone();
    record(0.0, &state, &mut series)?;
    for n in 0..n_periods {
        let t0 = n as f64 * engine.tau;
        if let Sampling::Micromotion { substeps } = sampling {
            assert!(substeps > 0, "micromotion needs at least one substep");
            for k in 1..substeps {
                let s = engine.tau * k as f64 / substeps as f64;
                let inside = engine.evolve_within_period(&state, s)?;
                record(t0 + s, &inside, &mut series)?;
            }
        }
        state = engine.step(&state)?;
        record(t0 + engine.tau, &state, &mut series)?;
    }
    Ok(TrajectoryRecord {
        times,
        labels,
        series,
        initial_state: psi0.clone(),
        final_state: state,
        metadata: vec![
            ("theta".into(), format!("{}", engine.theta)),
            ("tau".into(), format!("{}", engine.tau)),
            ("n_periods".into(), format!("{n_periods}")),
        ],
    })
}

/// Options for `calibrate_tau_r`.
#[derive(Clone, Copy, Debug)]
pub struct CalibrationOptions {
    /// Excludes the trivial fidelity peak at t = 0.
    pub t_min: f64,
    /// Minimum peak fidelity counted as a revival.
    pub threshold: f64,
    /// Rough period scale; the scan step is `guess / 200`.
    pub guess: f64,
    pub method: EvolveMethod,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            t_min: 1.0,
            threshold: 0.1,
            guess: 4.74,
            method: EvolveMethod::Auto,
        }
    }
}

/// Locate the first revival of |⟨ψ0|e^{-iHt}|ψ0⟩|² in (t_min, t_max]: dense
/// scan with step guess/200, then parabolic refinement of the first local
/// maximum above the threshold.
pub fn calibrate_tau_r(
    h: &OperatorMatrix,
    psi0: &Array1<C64>,
    t_max: f64,
    options: &CalibrationOptions,
) -> Result<f64> {
    let step = options.guess / 200.0;
    let n_steps = (t_max / step).ceil() as usize;
    let times: Vec<f64> = (1..=n_steps).map(|i| i as f64 * step).collect();
    let propagator = Propagator::new(h, options.method)?;
    let fid = propagator.fidelity_series(psi0, &times)?;

    let mut best = 0.0f64;
    for i in 1..times.len() - 1 {
        if times[i] <= options.t_min {
            continue;
        }
        best = best.max(fid[i]);
        if fid[i] > fid[i - 1] && fid[i] >= fid[i + 1] && fid[i] >= options.threshold {
            return Ok(linalg::parabola_vertex(
                [times[i - 1], times[i], times[i + 1]],
                [fid[i - 1], fid[i], fid[i + 1]],
            ));
        }
    }
    Err(Error::NoRevival {
        best,
        t_min: options.t_min,
        t_max,
        threshold: options.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Basis, Boundary};
    use crate::linalg::max_abs;
    use crate::operators::{number, pxp, rydberg, RydbergParams};

    fn norm(v: &Array1<C64>) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn overlap(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn zero_time_is_identity_and_diagonal_phases_are_exact() {
        let basis = Basis::blockaded(6, Boundary::Periodic).unwrap();
        let psi = crate::hilbert::random_state(basis.dim(), 7);
        let h = pxp(&basis).unwrap();
        let p = Propagator::new(&h, EvolveMethod::Auto).unwrap();
        let same = p.evolve(&psi, 0.0).unwrap();
        assert!(norm(&(&same - &psi)) < 1e-12);

        let n = number(&basis);
        let pn = Propagator::new(&n, EvolveMethod::Auto).unwrap();
        let rotated = pn.evolve(&psi, 0.9).unwrap();
        for (i, &c) in basis.configs().iter().enumerate() {
            let want = psi[i] * C64::from_polar(1.0, -0.9 * c.count_ones() as f64);
            assert!((rotated[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_and_krylov_agree_on_a_constrained_chain() {
        let basis = Basis::blockaded(10, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let psi = crate::hilbert::random_state(basis.dim(), 11);
        let dense = Propagator::new(&h, EvolveMethod::Dense).unwrap();
        let krylov = Propagator::new(&h, EvolveMethod::Krylov(LanczosParams::default())).unwrap();
        let a = dense.evolve(&psi, 5.0).unwrap();
        let b = krylov.evolve(&psi, 5.0).unwrap();
        assert!(norm(&(&a - &b)) < 1e-8, "methods differ by {}", norm(&(&a - &b)));
        assert!((norm(&a) - 1.0).abs() < 1e-10, "unitarity");
    }

    #[test]
    fn static_evolution_conserves_energy_and_reverses() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let p = Propagator::new(&h, EvolveMethod::Dense).unwrap();
        let psi = crate::hilbert::random_state(basis.dim(), 3);
        let e0 = h.expectation(&psi).re;
        let later = p.evolve(&psi, 3.7).unwrap();
        assert!((h.expectation(&later).re - e0).abs() < 1e-8);
        let back = p.evolve(&later, -3.7).unwrap();
        assert!(1.0 - overlap(&psi, &back).norm_sqr() < 1e-9);
    }

    #[test]
    fn echo_drive_squares_to_identity() {
        // At θ=π the kicked PXP cycle is an exact many-body echo: the kick
        // anticommutation C H C = -H reverses the static segment.
        let basis = Basis::blockaded(10, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        for tau in [0.3 * 4.74, 0.45 * 4.74, 0.5 * 4.74] {
            let engine = FloquetEngine::new(
                &basis,
                &h,
                std::f64::consts::PI,
                tau,
                PulseShape::Delta,
                EvolveMethod::Dense,
            )
            .unwrap();
            let u = engine.unitary().unwrap();
            let u2 = u.dot(&u);
            let eye = Array2::from_diag(&Array1::from_elem(basis.dim(), C64::new(1.0, 0.0)));
            assert!(
                max_abs(&(&u2 - &eye)) < 1e-8,
                "U_F(π,τ)² should be the identity"
            );
        }
    }

    #[test]
    fn zero_kick_reduces_to_static_evolution() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let engine =
            FloquetEngine::new(&basis, &h, 0.0, 1.3, PulseShape::Delta, EvolveMethod::Dense)
                .unwrap();
        let p = Propagator::new(&h, EvolveMethod::Dense).unwrap();
        let psi = basis.neel_state().unwrap();
        let a = engine.step(&psi).unwrap();
        let b = p.evolve(&psi, 1.3).unwrap();
        assert!(norm(&(&a - &b)) < 1e-12);
    }

    #[test]
    fn step_inverse_undoes_step_for_both_pulse_shapes() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let psi = crate::hilbert::random_state(basis.dim(), 5);
        for pulse in [
            PulseShape::Delta,
            PulseShape::Finite {
                tau_p: 0.3 * 1.9,
                calibrated: true,
            },
        ] {
            let engine =
                FloquetEngine::new(&basis, &h, 1.1, 1.9, pulse, EvolveMethod::Dense).unwrap();
            let forward = engine.step(&psi).unwrap();
            let back = engine.step_inverse(&forward).unwrap();
            assert!(norm(&(&back - &psi)) < 1e-10);
        }
    }

    #[test]
    fn narrow_calibrated_pulse_converges_to_the_delta_kick() {
        // The pulse straddles the period boundary (half before, half after), so
        // its zero-width limit is the symmetrically split kick
        // exp(-i theta N / 2) exp(-i tau H) exp(-i theta N / 2).  That map is a
        // fixed kick-frame rotation of the end-of-period convention and leaves
        // every stroboscopic observable and Neel-state fidelity unchanged.
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let tau = 2.2;
        let theta = 1.05 * std::f64::consts::PI;
        let psi = basis.neel_state().unwrap();
        let finite = FloquetEngine::new(
            &basis,
            &h,
            theta,
            tau,
            PulseShape::Finite {
                tau_p: 1e-3 * tau,
                calibrated: true,
            },
            EvolveMethod::Dense,
        )
        .unwrap();
        let half_kick = crate::operators::kick(&basis, theta / 2.0);
        let hold = Propagator::new(&h, EvolveMethod::Dense).unwrap();
        let limit = half_kick.apply(&hold.evolve(&half_kick.apply(&psi), tau).unwrap());
        let stepped = finite.step(&psi).unwrap();
        let deficit = 1.0 - overlap(&limit, &stepped).norm_sqr();
        assert!(deficit < 1e-4, "fidelity deficit {deficit}");

        // Revival fidelity is frame independent, so the narrow pulse must also
        // reproduce the plain delta-kick value.
        let delta =
            FloquetEngine::new(&basis, &h, theta, tau, PulseShape::Delta, EvolveMethod::Dense)
                .unwrap();
        let delta_fid = overlap(&psi, &delta.step(&psi).unwrap()).norm_sqr();
        let finite_fid = overlap(&psi, &stepped).norm_sqr();
        assert!(
            (delta_fid - finite_fid).abs() < 1e-4,
            "revival fidelity {finite_fid} vs delta {delta_fid}"
        );
    }

    #[test]
    fn trajectory_matches_explicit_matrix_powers() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let engine =
            FloquetEngine::new(&basis, &h, 2.3, 1.1, PulseShape::Delta, EvolveMethod::Dense)
                .unwrap();
        let psi = basis.neel_state().unwrap();
        let record = run_drive(
            &engine,
            &basis,
            &psi,
            6,
            &[Observable::RevivalFidelity],
            Sampling::Stroboscopic,
        )
        .unwrap();
        let u = engine.unitary().unwrap();
        let mut power = Array2::from_diag(&Array1::from_elem(basis.dim(), C64::new(1.0, 0.0)));
        let fid = record.column("fidelity").unwrap();
        for n in 0..=6 {
            let amp = overlap(&psi, &power.dot(&psi));
            assert!(
                (fid[n] - amp.norm_sqr()).abs() < 1e-10,
                "period {n}: {} vs {}",
                fid[n],
                amp.norm_sqr()
            );
            power = u.dot(&power);
        }
        assert_eq!(record.times.len(), 7, "t=0 plus one row per period");
    }

    #[test]
    fn micromotion_sampling_subdivides_each_period() {
        let basis = Basis::blockaded(6, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let engine =
            FloquetEngine::new(&basis, &h, 0.4, 1.5, PulseShape::Delta, EvolveMethod::Dense)
                .unwrap();
        let psi = basis.neel_state().unwrap();
        let record = run_drive(
            &engine,
            &basis,
            &psi,
            3,
            &[Observable::Imbalance { normalised: true }],
            Sampling::Micromotion { substeps: 4 },
        )
        .unwrap();
        assert_eq!(record.times.len(), 1 + 3 * 4);
        for w in record.times.windows(2) {
            assert!(w[1] > w[0], "times strictly increasing");
        }
        // The echo drive observable at t=0 is the Neel imbalance.
        assert!((record.series[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imbalance_alternates_under_the_subharmonic_echo() {
        let basis = Basis::blockaded(10, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let tau_r = calibrate_tau_r(
            &h,
            &basis.neel_state().unwrap(),
            8.0,
            &CalibrationOptions::default(),
        )
        .unwrap();
        let engine = FloquetEngine::new(
            &basis,
            &h,
            std::f64::consts::PI,
            0.5 * tau_r,
            PulseShape::Delta,
            EvolveMethod::Dense,
        )
        .unwrap();
        let record = run_drive(
            &engine,
            &basis,
            &basis.neel_state().unwrap(),
            8,
            &[Observable::Imbalance { normalised: true }],
            Sampling::Stroboscopic,
        )
        .unwrap();
        let imb = record.column("imbalance").unwrap();
        for n in 0..=8 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                sign * imb[n] > 0.6,
                "period {n}: imbalance {} should alternate",
                imb[n]
            );
        }
    }

    #[test]
    fn calibration_finds_the_rabi_revival() {
        // Free spins: H = (1/2)Σσ^x gives fidelity cos(t/2)^{2L} from the
        // all-down state, so the first revival sits at t = 2π.
        let basis = Basis::full(2, Boundary::Periodic).unwrap();
        let p = RydbergParams {
            omega: 1.0,
            delta: 0.0,
            v1: 0.0,
            v2: 0.0,
        };
        let h = rydberg(&basis, &p).unwrap();
        let psi = basis.basis_state(0);
        let tau = calibrate_tau_r(&h, &psi, 8.0, &CalibrationOptions::default()).unwrap();
        assert!(
            (tau - std::f64::consts::TAU).abs() < 0.01,
            "found {tau}, wanted 2π"
        );
    }

    #[test]
    fn calibration_reports_missing_revivals() {
        // A dephasing diagonal with scattered gaps never rebuilds the
        // superposition within the window.
        use rand::{Rng, SeedableRng};
        let basis = Basis::blockaded(12, Boundary::Periodic).unwrap();
        let dim = basis.dim();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut diag = Array1::zeros(dim);
        for i in 0..dim {
            diag[i] = C64::new(rng.random_range(0.0..25.0), 0.0);
        }
        let h = OperatorMatrix {
            dim,
            basis_fingerprint: basis.fingerprint(),
            hermitian: true,
            storage: crate::operators::Storage::Diagonal(diag),
        };
        let psi = crate::hilbert::random_state(dim, 1);
        match calibrate_tau_r(&h, &psi, 12.0, &CalibrationOptions::default()) {
            Err(Error::NoRevival { best, .. }) => assert!(best < 0.1),
            other => panic!("expected a missing-revival error, got {other:?}"),
        }
    }

    #[test]
    fn trajectory_csv_carries_metadata_and_header() {
        let basis = Basis::blockaded(4, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let engine =
            FloquetEngine::new(&basis, &h, 0.2, 1.0, PulseShape::Delta, EvolveMethod::Dense)
                .unwrap();
        let record = run_drive(
            &engine,
            &basis,
            &basis.neel_state().unwrap(),
            2,
            &[Observable::Number],
            Sampling::Stroboscopic,
        )
        .unwrap();
        let csv = record.to_csv();
        assert!(csv.starts_with("# theta = 0.2\n"));
        assert!(csv.contains("\nt,number\n"));
        assert_eq!(csv.lines().count(), 3 + 1 + 3, "comments, header, rows");
    }
}
