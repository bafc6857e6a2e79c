//! Prethermal analysis of the kicked chain.
//!
//! Near θ = π the Floquet operator factorizes as U_F = e^{iεN}·X_τ with
//! ε = π − θ and X_τ = e^{−iπN} e^{−iτH}.  When the base Hamiltonian
//! anticommutes with the particle-hole phase C = e^{−iπN}, the operator X_τ
//! is a Hermitian involution and an emergent symmetry of the leading-order
//! effective Hamiltonian H_F¹ = −½ (N + X_τ N X_τ), with U_F¹ = e^{−iε H_F¹} X_τ.
//!
//! Because N and C are diagonal, X_τ N X_τ† = U† N U with U = e^{−iτH}, so in
//! the eigenbasis of H the effective Hamiltonian is unitarily equivalent to
//! the real symmetric matrix G_jk = −Ñ_jk · cos(τ(E_j−E_k)/2), where
//! Ñ = VᵀNV.  A single real diagonalization of the base Hamiltonian then
//! serves every τ in a scan.
//!
//! The spectrum of H_F¹ organizes the long-time phenomenology: a
//! symmetry-broken ground doublet with exponentially small splitting ΔE sets
//! the cat-state oscillation time T_g = π/(2ΔE); the gap Δ to the remaining
//! spectrum sets the beating time T_b ∝ τ/(εΔ); the subharmonic response
//! itself has period T_s = 2τ.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::dynamics::{TrajectoryRecord, DENSE_DIM_LIMIT};
use crate::linalg::{self, adjoint, max_abs};
use crate::operators::{number, Model, OperatorMatrix, Storage};
use crate::{C64, Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Effective description of the drive at one (τ, ε) point: the spectrum of
/// H_F¹ together with the emergent-symmetry labels of its eigenstates.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pub tau: f64,
    pub epsilon: f64,
    pub dim: usize,
    pub basis_fingerprint: u64,
    /// Eigenvalues of H_F¹, ascending.
    pub values: Array1<f64>,
    /// Eigenvectors of H_F¹ (columns), rotated within degenerate multiplets
    /// to diagonalize X_τ.
    pub vectors: Array2<C64>,
    /// Diagonal of Φ†X_τΦ after the rotation: ±1 when the base Hamiltonian
    /// hosts the symmetry, |x| < 1 quantifies its absence.
    pub x_values: Array1<C64>,
    base_values: Array1<f64>,
    base_vectors: Array2<f64>,
    c_diag: Array1<f64>,
}

/// Shared spectral data for scans: the base Hamiltonian is diagonalized once
/// and reused for every τ (the per-τ work is then a single real symmetric
/// diagonalization, safe to run from concurrent workers).
pub struct EffectiveFamily {
    basis_fingerprint: u64,
    values: Array1<f64>,
    vectors: Array2<f64>,
    c_diag: Array1<f64>,
    n_tilde: Array2<f64>,
    c_tilde: Array2<f64>,
}

impl EffectiveFamily {
    pub fn new(h: &OperatorMatrix, n: &OperatorMatrix) -> Result<Self> {
        if h.basis_fingerprint != n.basis_fingerprint {
            return Err(Error::BasisMismatch(h.basis_fingerprint, n.basis_fingerprint));
        }
        if h.dim > DENSE_DIM_LIMIT {
            return Err(Error::DenseTooLarge {
                dim: h.dim,
                max: DENSE_DIM_LIMIT,
            });
        }
        let dense = h.real_dense().ok_or_else(|| {
            Error::Invalid("the effective model needs a real symmetric base Hamiltonian".into())
        })?;
        let (values, vectors) = dense
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Linalg(e.to_string()))?;
        let n_diag_c = n.diagonal()?;
        let mut n_diag = Array1::<f64>::zeros(h.dim);
        let mut c_diag = Array1::<f64>::zeros(h.dim);
        for (i, z) in n_diag_c.iter().enumerate() {
            let x = z.re;
            let r = x.round();
            if z.im.abs() > 1e-12 || (x - r).abs() > 1e-9 {
                return Err(Error::Invalid(
                    "the kick generator must have an integer diagonal".into(),
                ));
            }
            n_diag[i] = x;
            c_diag[i] = if (r as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        }
        let n_tilde = row_scaled_sandwich(&vectors, &n_diag);
        let c_tilde = row_scaled_sandwich(&vectors, &c_diag);
        Ok(EffectiveFamily {
            basis_fingerprint: h.basis_fingerprint,
            values,
            vectors,
            c_diag,
            n_tilde,
            c_tilde,
        })
    }

    /// The effective model at one (τ, ε) point over the shared base spectrum.
    pub fn model(&self, tau: f64, epsilon: f64) -> Result<EffectiveModel> {
        let dim = self.values.len();
        // H_F¹ in the rotated base eigenbasis: real, symmetric.
        let mut g = Array2::<f64>::zeros((dim, dim));
        for j in 0..dim {
            for k in 0..dim {
                let omega = self.values[j] - self.values[k];
                g[[j, k]] = -self.n_tilde[[j, k]] * (0.5 * tau * omega).cos();
            }
        }
        let (mu, q) = g
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Linalg(e.to_string()))?;

        // Eigenvectors in the computational basis: Φ = V·diag(e^{iτE/2})·Q,
        // assembled from two real products.
        let half = self.values.mapv(|e| 0.5 * tau * e);
        let mut qc = q.clone();
        let mut qs = q.clone();
        for k in 0..dim {
            let (sin, cos) = half[k].sin_cos();
            qc.row_mut(k).mapv_inplace(|x| x * cos);
            qs.row_mut(k).mapv_inplace(|x| x * sin);
        }
        let re = self.vectors.dot(&qc);
        let im = self.vectors.dot(&qs);
        let mut vectors = Array2::<C64>::zeros((dim, dim));
        for j in 0..dim {
            for k in 0..dim {
                vectors[[j, k]] = C64::new(re[[j, k]], im[[j, k]]);
            }
        }

        // X_τ in the same basis: Qᵀ·[c̃_jk e^{−iτ(E_j+E_k)/2}]·Q, again via
        // real products.
        let mut kc = Array2::<f64>::zeros((dim, dim));
        let mut ks = Array2::<f64>::zeros((dim, dim));
        for j in 0..dim {
            for k in 0..dim {
                let (sin, cos) = (half[j] + half[k]).sin_cos();
                kc[[j, k]] = self.c_tilde[[j, k]] * cos;
                ks[[j, k]] = -self.c_tilde[[j, k]] * sin;
            }
        }
        let xr = q.t().dot(&kc).dot(&q);
        let xi = q.t().dot(&ks).dot(&q);

        // Rotate degenerate multiplets of H_F¹ to the X_τ eigenbasis.
        let scale = 1.0 + mu.iter().fold(0.0f64, |a, &m| a.max(m.abs()));
        let tol = 1e-10 * scale;
        let mut x_values = Array1::<C64>::zeros(dim);
        let mut lo = 0;
        while lo < dim {
            let mut hi = lo + 1;
            while hi < dim && mu[hi] - mu[hi - 1] < tol {
                hi += 1;
            }
            if hi - lo == 1 {
                x_values[lo] = C64::new(xr[[lo, lo]], xi[[lo, lo]]);
            } else {
                let m = hi - lo;
                let mut block = Array2::<C64>::zeros((m, m));
                for a in 0..m {
                    for b in 0..m {
                        block[[a, b]] = C64::new(xr[[lo + a, lo + b]], xi[[lo + a, lo + b]]);
                    }
                }
                let herm = (&block + &adjoint(&block)).mapv(|z| 0.5 * z);
                let (_, rot) = linalg::eigh_complex(&herm)?;
                let rotated_block = adjoint(&rot).dot(&block).dot(&rot);
                for a in 0..m {
                    x_values[lo + a] = rotated_block[[a, a]];
                }
                let cols = vectors.slice(s![.., lo..hi]).to_owned();
                vectors.slice_mut(s![.., lo..hi]).assign(&cols.dot(&rot));
            }
            lo = hi;
        }

        Ok(EffectiveModel {
            tau,
            epsilon,
            dim,
            basis_fingerprint: self.basis_fingerprint,
            values: mu,
            vectors,
            x_values,
            base_values: self.values.clone(),
            base_vectors: self.vectors.clone(),
            c_diag: self.c_diag.clone(),
        })
    }
}

/// Sandwich Vᵀ·diag(d)·V.
fn row_scaled_sandwich(vectors: &Array2<f64>, diag: &Array1<f64>) -> Array2<f64> {
    let mut scaled = vectors.clone();
    for (i, &d) in diag.iter().enumerate() {
        scaled.row_mut(i).mapv_inplace(|x| x * d);
    }
    vectors.t().dot(&scaled)
}

/// Build the effective model of a drive with kick deviation ε = π − θ.
pub fn build_effective_model(
    h: &OperatorMatrix,
    n: &OperatorMatrix,
    tau: f64,
    epsilon: f64,
) -> Result<EffectiveModel> {
    EffectiveFamily::new(h, n)?.model(tau, epsilon)
}

impl EffectiveModel {
    /// The same spectral data relabelled with a different kick deviation.
    /// H_F¹ and X_τ do not depend on ε, so scans over the kick angle can
    /// share one diagonalization.
    pub fn with_epsilon(&self, epsilon: f64) -> EffectiveModel {
        EffectiveModel {
            epsilon,
            ..self.clone()
        }
    }

    /// The emergent-symmetry candidate X_τ = e^{−iπN} e^{−iτH} as a dense
    /// unitary.
    pub fn x_tau(&self) -> OperatorMatrix {
        let mut u = linalg::spectral_unitary(&self.base_values, &self.base_vectors, self.tau);
        for (i, &c) in self.c_diag.iter().enumerate() {
            u.row_mut(i).mapv_inplace(|z| z * c);
        }
        OperatorMatrix {
            dim: self.dim,
            basis_fingerprint: self.basis_fingerprint,
            hermitian: false,
            storage: Storage::Dense(u),
        }
    }

    /// The effective Hamiltonian H_F¹ as a dense Hermitian operator.
    pub fn h_f1(&self) -> OperatorMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &m) in self.values.iter().enumerate() {
            scaled.column_mut(k).mapv_inplace(|z| z * m);
        }
        let dense = scaled.dot(&adjoint(&self.vectors));
        let herm = (&dense + &adjoint(&dense)).mapv(|z| 0.5 * z);
        OperatorMatrix {
            dim: self.dim,
            basis_fingerprint: self.basis_fingerprint,
            hermitian: true,
            storage: Storage::Dense(herm),
        }
    }

    /// First-order Floquet unitary U_F¹ = e^{−iεH_F¹} X_τ.
    pub fn floquet_unitary(&self) -> Result<Array2<C64>> {
        let exp = linalg::spectral_unitary_complex(&self.values, &self.vectors, self.epsilon);
        let x = match self.x_tau().storage {
            Storage::Dense(m) => m,
            _ => unreachable!("x_tau is dense"),
        };
        Ok(exp.dot(&x))
    }

    /// ‖X_τ² − 1‖_max: zero exactly when the base Hamiltonian anticommutes
    /// with the particle-hole phase.
    pub fn involution_defect(&self) -> f64 {
        let x = match self.x_tau().storage {
            Storage::Dense(m) => m,
            _ => unreachable!(),
        };
        let mut sq = x.dot(&x);
        for i in 0..self.dim {
            sq[[i, i]] -= 1.0;
        }
        max_abs(&sq)
    }

    /// ‖[H_F¹, X_τ]‖_max: the emergent-symmetry violation.
    pub fn symmetry_defect(&self) -> f64 {
        let x = match self.x_tau().storage {
            Storage::Dense(m) => m,
            _ => unreachable!(),
        };
        let h = match self.h_f1().storage {
            Storage::Dense(m) => m,
            _ => unreachable!(),
        };
        max_abs(&(h.dot(&x) - x.dot(&h)))
    }

    /// Splitting of the lowest doublet, E₁ − E₀.
    pub fn ground_splitting(&self) -> f64 {
        self.values[1] - self.values[0]
    }

    /// Gap from the ground state to the level above the doublet, E₂ − E₀.
    pub fn ground_gap(&self) -> f64 {
        self.values[2] - self.values[0]
    }

    /// Quasi-energy spectrum of U_F¹ with overlaps against a reference state.
    ///
    /// When every |x| is 1 the joint eigenbasis of (H_F¹, X_τ) is also the
    /// eigenbasis of U_F¹ and the quasi-energies fold analytically; otherwise
    /// the dense unitary is diagonalized directly.
    pub fn quasi_energies(&self, reference: &Array1<C64>) -> Result<PairingReport> {
        if reference.len() != self.dim {
            return Err(Error::DimensionMismatch {
                state: reference.len(),
                basis: self.dim,
            });
        }
        let symmetric = self
            .x_values
            .iter()
            .all(|x| (x.norm() - 1.0).abs() < 1e-8);
        let (quasi, overlaps) = if symmetric {
            let quasi = Array1::from_iter(
                self.values
                    .iter()
                    .zip(self.x_values.iter())
                    .map(|(&m, x)| fold_phase(self.epsilon * m - x.arg())),
            );
            (quasi, overlaps_against(&self.vectors, reference))
        } else {
            let u = self.floquet_unitary()?;
            let (phases, vecs) = linalg::eig_unitary(&u)?;
            let quasi = Array1::from_iter(phases.iter().map(|&p| fold_phase(-p)));
            (quasi, overlaps_against(&vecs, reference))
        };
        let top_pair_gap = top_pair_gap(&quasi, &overlaps);
        Ok(PairingReport {
            tau: self.tau,
            quasi_energies: quasi,
            overlaps,
            x_values: self.x_values.clone(),
            top_pair_gap,
        })
    }

    /// Lowest levels of H_F¹ with emergent-symmetry and translation labels.
    pub fn ground_manifold(
        &self,
        levels: usize,
        translation: Option<&OperatorMatrix>,
    ) -> Result<GroundManifold> {
        let levels = levels.min(self.dim);
        if levels < 3 {
            return Err(Error::Invalid(
                "the ground manifold needs at least three levels".into(),
            ));
        }
        let vectors = self.vectors.slice(s![.., 0..levels]).to_owned();
        let translations = match translation {
            Some(t) => {
                if t.basis_fingerprint != self.basis_fingerprint {
                    return Err(Error::BasisMismatch(
                        t.basis_fingerprint,
                        self.basis_fingerprint,
                    ));
                }
                (0..levels)
                    .map(|k| t.expectation(&vectors.column(k).to_owned()))
                    .collect()
            }
            None => Vec::new(),
        };
        Ok(GroundManifold {
            energies: self.values.slice(s![0..levels]).to_owned(),
            delta_e: self.ground_splitting(),
            gap: self.ground_gap(),
            x_values: self.x_values.slice(s![0..levels]).to_owned(),
            translations,
            vectors,
        })
    }
}

fn overlaps_against(vectors: &Array2<C64>, reference: &Array1<C64>) -> Array1<f64> {
    let dim = vectors.nrows();
    Array1::from_iter((0..vectors.ncols()).map(|k| {
        let mut amp = C64::new(0.0, 0.0);
        for i in 0..dim {
            amp += vectors[[i, k]].conj() * reference[i];
        }
        amp.norm_sqr()
    }))
}

/// Fold a phase into (−π, π].
pub fn fold_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Phase distance folded into [0, π].
fn phase_distance(a: f64, b: f64) -> f64 {
    let d = fold_phase(a - b).abs();
    d.min(2.0 * PI - d)
}

fn top_pair_gap(quasi: &Array1<f64>, overlaps: &Array1<f64>) -> f64 {
    let mut order: Vec<usize> = (0..overlaps.len()).collect();
    order.sort_by(|&a, &b| overlaps[b].partial_cmp(&overlaps[a]).unwrap());
    phase_distance(quasi[order[0]], quasi[order[1]])
}

/// Quasi-energy pairing data at one τ.
#[derive(Clone, Debug)]
pub struct PairingReport {
    pub tau: f64,
    pub quasi_energies: Array1<f64>,
    pub overlaps: Array1<f64>,
    pub x_values: Array1<C64>,
    /// Phase distance of the two highest-overlap quasi-energies, in [0, π]:
    /// ≈ π signals subharmonic pairing, ≈ 0 signals none.
    pub top_pair_gap: f64,
}

/// Scan the quasi-energy pairing over a τ grid at fixed ε, diagonalizing the
/// base Hamiltonian once.
pub fn pairing_scan(
    h: &OperatorMatrix,
    n: &OperatorMatrix,
    taus: &[f64],
    epsilon: f64,
    reference: &Array1<C64>,
) -> Result<Vec<PairingReport>> {
    let base = EffectiveFamily::new(h, n)?;
    taus.iter()
        .map(|&tau| base.model(tau, epsilon)?.quasi_energies(reference))
        .collect()
}

/// CSV rows `tau,quasi_energy,overlap` across a scan.
pub fn pairing_csv(reports: &[PairingReport]) -> String {
    let mut out = String::from("tau,quasi_energy,overlap\n");
    for r in reports {
        for (q, o) in r.quasi_energies.iter().zip(r.overlaps.iter()) {
            out.push_str(&format!("{:.12e},{q:.12e},{o:.12e}\n", r.tau));
        }
    }
    out
}

/// Lowest levels of H_F¹ with their symmetry labels.
#[derive(Clone, Debug)]
pub struct GroundManifold {
    pub energies: Array1<f64>,
    /// Doublet splitting ΔE = E₁ − E₀.
    pub delta_e: f64,
    /// Gap Δ = E₂ − E₀ above the ground state.
    pub gap: f64,
    pub x_values: Array1<C64>,
    /// ⟨T⟩ per level when a translation operator is supplied: +1 marks the
    /// momentum-0 cat, −1 the momentum-π cat.
    pub translations: Vec<C64>,
    pub vectors: Array2<C64>,
}

/// Exponential scaling of the ground-doublet splitting with system size.
#[derive(Clone, Debug)]
pub struct SplittingScaling {
    /// Sizes that entered the fit.
    pub sizes: Vec<usize>,
    /// ΔE per fitted size.
    pub splittings: Vec<f64>,
    /// Sizes dropped because ΔE fell below the 10⁻¹³ numerical floor.
    pub excluded: Vec<usize>,
    /// Linear fit of ln ΔE against L; a negative slope marks exponentially
    /// vanishing splitting.
    pub fit: linalg::LinearFit,
    /// Largest |ln ΔE − fit| over the fitted points.
    pub max_residual: f64,
}

/// Compute ΔE(L) at fixed τ and fit ln ΔE against L.
pub fn splitting_scaling(model: &Model, sizes: &[usize], tau: f64) -> Result<SplittingScaling> {
    let mut kept = Vec::new();
    let mut splittings = Vec::new();
    let mut excluded = Vec::new();
    for &l in sizes {
        let basis = model.basis(l, crate::hilbert::Boundary::Periodic)?;
        let h = model.hamiltonian(&basis)?;
        let n = number(&basis);
        let em = build_effective_model(&h, &n, tau, 0.0)?;
        let delta_e = em.ground_splitting();
        if delta_e < 1e-13 {
            excluded.push(l);
        } else {
            kept.push(l);
            splittings.push(delta_e);
        }
    }
    if kept.len() < 2 {
        return Err(Error::Invalid(format!(
            "splitting fit needs at least two sizes above the numerical floor, got {}",
            kept.len()
        )));
    }
    let xs: Vec<f64> = kept.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = splittings.iter().map(|&d| d.ln()).collect();
    let fit = linalg::linear_fit(&xs, &ys);
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (y - fit.slope * x - fit.intercept).abs())
        .fold(0.0f64, f64::max);
    Ok(SplittingScaling {
        sizes: kept,
        splittings,
        excluded,
        fit,
        max_residual,
    })
}

/// Emergent timescales of a driven trajectory. `t_s` and `t_b` are measured
/// in ordinary time; `t_g` and `t_g_dynamic` live on the prethermal axis,
/// where each drive period accrues ε of evolution under H_F¹ (so a crossing
/// after m periods sits at |ε|·m).
#[derive(Clone, Copy, Debug)]
pub struct TimescaleReport {
    /// Subharmonic response period, 2τ by construction.
    pub t_s: f64,
    /// Beating period from the dominant frequency of the even-period
    /// fidelity; absent when no peak clears 3× the median spectral power.
    pub t_b: Option<f64>,
    /// Cat-oscillation time π/(2ΔE); absent when the doublet is degenerate
    /// to machine precision.
    pub t_g: Option<f64>,
    /// First crossing of the even- and odd-period fidelity envelopes, the
    /// dynamical signature of the same timescale.
    pub t_g_dynamic: Option<f64>,
    /// Splitting of the doublet the trajectory lives on, read off the
    /// quasi-energy pairing of U_F¹: (π − top-pair gap)/|ε| for the two
    /// eigenstates with the largest initial-state overlap. Equals the H_F¹
    /// doublet splitting when X_τ² = 1.
    pub delta_e: f64,
    /// Spectral gap E₂ − E₀ at the bottom of H_F¹.
    pub gap: f64,
}

/// Beating period of a stroboscopic subsequence sampled every `dt`.
pub fn beating_period(samples: &[f64], dt: f64) -> Option<f64> {
    let peak = linalg::dominant_frequency(samples, dt, 4)?;
    if peak.power < 3.0 * peak.median_power {
        return None;
    }
    Some(1.0 / peak.frequency)
}

/// First time the even-period series drops below the odd-period series,
/// linearly interpolated; both series are sampled every `dt`.
pub fn fidelity_crossing(even: &[f64], odd: &[f64], dt: f64) -> Option<f64> {
    let n = even.len().min(odd.len());
    let mut prev = f64::NAN;
    for m in 0..n {
        let d = even[m] - odd[m];
        if m > 0 && d < 0.0 && prev >= 0.0 {
            let frac = prev / (prev - d);
            return Some(dt * ((m - 1) as f64 + frac));
        }
        prev = d;
    }
    None
}

/// Extract T_s, T_b, T_g (spectral and dynamical) from a stroboscopic
/// fidelity record and the matching effective model.
pub fn extract_timescales(
    record: &TrajectoryRecord,
    model: &EffectiveModel,
) -> Result<TimescaleReport> {
    let fid = record
        .column("fidelity")
        .ok_or_else(|| Error::Invalid("the record carries no fidelity column".into()))?;
    if record.times.len() < 8 {
        return Err(Error::Invalid(
            "timescale extraction needs several driving periods".into(),
        ));
    }
    let step = record.times[1] - record.times[0];
    if (step - model.tau).abs() > 1e-9 * model.tau.max(1.0) {
        return Err(Error::Invalid(
            "timescale extraction needs a stroboscopic series sampled every period".into(),
        ));
    }
    if record.initial_state.len() != model.dim {
        return Err(Error::DimensionMismatch {
            state: record.initial_state.len(),
            basis: model.dim,
        });
    }
    let even: Vec<f64> = fid.iter().step_by(2).copied().collect();
    let odd: Vec<f64> = fid.iter().skip(1).step_by(2).copied().collect();
    let dt = 2.0 * model.tau;
    // The doublet splitting is read off the quasi-energy pairing of U_F¹:
    // the two eigenstates with the largest initial-state overlap sit π apart
    // up to a defect ε·ΔE, so ΔE = (π − top-pair gap)/|ε|. When X_τ² = 1
    // this equals the splitting of the two H_F¹ levels the trajectory lives
    // on; when the involution is broken (full product space) the kick itself
    // contributes to the defect at zeroth order in ε, which a bare H_F¹
    // eigenvalue difference would miss.
    let delta_e = if model.epsilon.abs() > 0.0 {
        let pairing = model.quasi_energies(&record.initial_state)?;
        (PI - pairing.top_pair_gap) / model.epsilon.abs()
    } else {
        let overlaps = overlaps_against(&model.vectors, &record.initial_state);
        let mut order: Vec<usize> = (0..model.dim).collect();
        order.sort_by(|&a, &b| overlaps[b].partial_cmp(&overlaps[a]).unwrap());
        (model.values[order[0]] - model.values[order[1]]).abs()
    };
    // The cat oscillation advances by ε·ΔE per period, so the even/odd
    // crossing lands at π/(2ΔE) on the prethermal axis |ε|·(period count);
    // adjacent even samples are 2|ε| apart there.
    let dt_prethermal = 2.0 * model.epsilon.abs();
    Ok(TimescaleReport {
        t_s: dt,
        t_b: beating_period(&even, dt),
        t_g: if delta_e > 1e-300 {
            Some(PI / (2.0 * delta_e))
        } else {
            None
        },
        t_g_dynamic: if dt_prethermal > 0.0 {
            fidelity_crossing(&even, &odd, dt_prethermal)
        } else {
            None
        },
        delta_e,
        gap: model.ground_gap(),
    })
}
