//! Dense and Krylov numerical kernels shared by the physics modules.
//!
//! Everything here is deterministic: LAPACK wrappers for Hermitian problems,
//! a unitary eigendecomposition built from the commuting Hermitian parts
//! (U + U†)/2 and (U - U†)/2i, a Lanczos `exp(-iHt)` applier with adaptive
//! substepping, and small fitting/spectral helpers.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::C64;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (vals, vecs) = m.eigh(UPLO::Lower)?;
    Ok((vals, vecs))
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
///
/// LAPACK works on the column-major reinterpretation of the row-major input,
/// i.e. on conj(M), so the raw eigenvectors come back conjugated; they are
/// conjugated once more here. The residual test below pins this convention.
pub fn eigh_complex(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, vecs) = m.eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenphases and orthonormal eigenvectors of a unitary matrix.
///
/// U is normal, so its Hermitian parts A = (U + U†)/2 and B = (U - U†)/2i
/// commute and share an eigenbasis. A is diagonalised first; inside each
/// (near-)degenerate cos-cluster the projected B is diagonalised to split
/// phases ±φ. Phases are Rayleigh quotients w†Uw, returned in (-π, π],
/// sorted ascending. Every transformation is unitary, so the returned
/// eigenvectors stay orthonormal even through exact degeneracies.
pub fn eig_unitary(u: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let udag = adjoint(u);
    let half = C64::new(0.5, 0.0);
    let a = (u + &udag).mapv(|z| z * half);
    let b = (u - &udag).mapv(|z| z * C64::new(0.0, -0.5));
    let (cos_vals, mut q) = eigh_complex(&a)?;

    let n = cos_vals.len();
    let cluster_tol = 1e-8;
    let mut lo = 0;
    while lo < n {
        let mut hi = lo + 1;
        while hi < n && cos_vals[hi] - cos_vals[hi - 1] < cluster_tol {
            hi += 1;
        }
        if hi - lo > 1 {
            let block = q.slice(ndarray::s![.., lo..hi]).to_owned();
            let b_proj = adjoint(&block).dot(&b).dot(&block);
            let (_, rot) = eigh_complex(&b_proj)?;
            let rotated = block.dot(&rot);
            q.slice_mut(ndarray::s![.., lo..hi]).assign(&rotated);
        }
        lo = hi;
    }

    let uq = u.dot(&q);
    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let col = q.index_axis(Axis(1), j);
            let ucol = uq.index_axis(Axis(1), j);
            let lambda: C64 = col.iter().zip(ucol.iter()).map(|(w, v)| w.conj() * v).sum();
            (lambda.arg(), j)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut phases = Vec::with_capacity(n);
    let mut vecs = Array2::zeros((n, n));
    for (slot, &(phi, j)) in pairs.iter().enumerate() {
        phases.push(phi);
        vecs.column_mut(slot).assign(&q.index_axis(Axis(1), j));
    }
    Ok((phases, vecs))
}

/// Controls for the Lanczos propagator.
#[derive(Clone, Copy, Debug)]
pub struct LanczosParams {
    /// Krylov dimension per substep.
    pub dim: usize,
    /// Error budget for the whole requested interval.
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for LanczosParams {
    fn default() -> Self {
        LanczosParams {
            dim: 30,
            tol: 1e-10,
            max_substeps: 100_000,
        }
    }
}

struct KrylovFactors {
    basis: Vec<Array1<C64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    beta_next: f64,
}

/// One Lanczos pass with full reorthogonalisation (dimensions here are small
/// enough that robustness is worth the extra dot products).
fn lanczos_factorise<F>(apply: &F, start: &Array1<C64>, m: usize) -> KrylovFactors
where
    F: Fn(&Array1<C64>) -> Array1<C64>,
{
    let mut basis: Vec<Array1<C64>> = vec![start.clone()];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut beta_next = 0.0;
    for j in 0..m {
        let mut w = apply(&basis[j]);
        let alpha: f64 = basis[j]
            .iter()
            .zip(w.iter())
            .map(|(v, hv)| (v.conj() * hv).re)
            .sum();
        alphas.push(alpha);
        for (k, vk) in basis.iter().enumerate() {
            let overlap: C64 = vk.iter().zip(w.iter()).map(|(v, x)| v.conj() * x).sum();
            if k + 2 >= basis.len() || overlap.norm() > 1e-14 {
                ndarray::Zip::from(&mut w).and(vk).for_each(|x, &v| *x -= overlap * v);
            }
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if j + 1 == m || beta < 1e-13 {
            beta_next = beta;
            break;
        }
        betas.push(beta);
        basis.push(w.mapv(|z| z / beta));
    }
    KrylovFactors {
        basis,
        alphas,
        betas,
        beta_next,
    }
}

/// Coefficients of exp(-i T t) e_1 for the real symmetric tridiagonal T.
fn tridiag_expi(alphas: &[f64], betas: &[f64], t: f64) -> Result<Array1<C64>> {
    let m = alphas.len();
    let mut tri = Array2::zeros((m, m));
    for (i, &a) in alphas.iter().enumerate() {
        tri[(i, i)] = a;
    }
    for (i, &b) in betas.iter().enumerate() {
        tri[(i, i + 1)] = b;
        tri[(i + 1, i)] = b;
    }
    let (vals, vecs) = eigh_real(&tri)?;
    let mut y = Array1::zeros(m);
    for k in 0..m {
        let phase = C64::from_polar(1.0, -vals[k] * t);
        let weight = phase * vecs[(0, k)];
        for j in 0..m {
            y[j] += weight * vecs[(j, k)];
        }
    }
    Ok(y)
}

/// Apply exp(-iHt) to a state using Lanczos iteration, splitting t into
/// substeps until the local error estimate fits the budget.
pub fn expi_krylov<F>(
    apply: &F,
    state: &Array1<C64>,
    t: f64,
    params: &LanczosParams,
) -> Result<Array1<C64>>
where
    F: Fn(&Array1<C64>) -> Array1<C64>,
{
    if t == 0.0 {
        return Ok(state.clone());
    }
    let norm0 = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return Ok(state.clone());
    }
    let mut psi = state.mapv(|z| z / norm0);
    let mut remaining = t;
    let mut steps = 0usize;
    while remaining != 0.0 {
        steps += 1;
        if steps > params.max_substeps {
            return Err(Error::KrylovStagnation {
                residual: remaining.abs(),
                steps,
            });
        }
        let fac = lanczos_factorise(&apply, &psi, params.dim);
        let m = fac.alphas.len();
        let exact = fac.beta_next < 1e-13;
        let mut dt = remaining;
        let mut y = tridiag_expi(&fac.alphas, &fac.betas, dt)?;
        if !exact {
            let budget = params.tol * dt.abs() / t.abs();
            let mut halvings = 0;
            loop {
                let local = fac.beta_next * y[m - 1].norm() * dt.abs();
                if local <= budget.max(1e-16) || halvings >= 60 {
                    if halvings >= 60 {
                        return Err(Error::KrylovStagnation {
                            residual: local,
                            steps,
                        });
                    }
                    break;
                }
                dt *= 0.5;
                halvings += 1;
                y = tridiag_expi(&fac.alphas, &fac.betas, dt)?;
            }
        }
        let mut next: Array1<C64> = Array1::zeros(psi.len());
        for (j, v) in fac.basis.iter().enumerate() {
            let c = y[j];
            ndarray::Zip::from(&mut next).and(v).for_each(|x, &b| *x += c * b);
        }
        let norm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi = next.mapv(|z| z / norm);
        remaining -= dt;
        if remaining.abs() < 1e-15 * t.abs() {
            break;
        }
    }
    Ok(psi.mapv(|z| z * norm0))
}

/// Vertex abscissa of the parabola through three points; falls back to the
/// middle point when the data is degenerate.
pub fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d21 = (y[1] - y[0]) / (x[1] - x[0]);
    let d32 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d32 - d21) / (x[2] - x[0]);
    if curv.abs() < 1e-300 {
        return x[1];
    }
    0.5 * (x[0] + x[1] - d21 / curv)
}

#[derive(Clone, Copy, Debug)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through (x, y); r² reported as 1 for an exact fit
/// (including the two-point case).
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert!(x.len() == y.len() && x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy < 1e-300 { 1.0 } else { 1.0 - ss_res / syy };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// The strongest nonzero-frequency peak of a sampled real series.
#[derive(Clone, Copy, Debug)]
pub struct SpectralPeak {
    /// Peak location in cycles per time unit.
    pub frequency: f64,
    pub power: f64,
    /// Median power over the nonzero-frequency bins, for peak-validity tests.
    pub median_power: f64,
}

/// Location and power of the strongest nonzero-frequency peak of a real
/// series sampled every `dt`, from a zero-padded discrete Fourier transform
/// with parabolic refinement. Returns None for a flat series.
pub fn dominant_frequency(samples: &[f64], dt: f64, pad: usize) -> Option<SpectralPeak> {
    let n = samples.len();
    if n < 4 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = samples.iter().map(|&s| s - mean).collect();
    if centred.iter().all(|&v| v.abs() < 1e-300) {
        return None;
    }
    let nfft = n * pad.max(1);
    let half = nfft / 2;
    let mut power = vec![0.0f64; half + 1];
    for (m, p) in power.iter_mut().enumerate().skip(1) {
        let w = -std::f64::consts::TAU * m as f64 / nfft as f64;
        let mut sum = C64::new(0.0, 0.0);
        for (j, &v) in centred.iter().enumerate() {
            sum += C64::from_polar(v, w * j as f64);
        }
        *p = sum.norm_sqr();
    }
    let (mut best, mut best_p) = (1, power[1]);
    for (m, &p) in power.iter().enumerate().skip(2) {
        if p > best_p {
            best = m;
            best_p = p;
        }
    }
    let mut sorted: Vec<f64> = power[1..].to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median_power = sorted[sorted.len() / 2];
    let bin = |m: usize| m as f64 / (nfft as f64 * dt);
    let freq = if best > 1 && best < half {
        parabola_vertex(
            [bin(best - 1), bin(best), bin(best + 1)],
            [power[best - 1], power[best], power[best + 1]],
        )
    } else {
        bin(best)
    };
    Some(SpectralPeak {
        frequency: freq,
        power: best_p,
        median_power,
    })
}

/// U = V diag(e^{-i·vals·t}) Vᵀ from a real spectral decomposition, assembled
/// with two real matrix products (much cheaper than complex GEMM).
pub fn spectral_unitary(vals: &Array1<f64>, vecs: &Array2<f64>, t: f64) -> Array2<C64> {
    let mut wc = vecs.clone();
    let mut ws = vecs.clone();
    for (k, &e) in vals.iter().enumerate() {
        let (s, c) = (e * t).sin_cos();
        wc.column_mut(k).mapv_inplace(|x| x * c);
        ws.column_mut(k).mapv_inplace(|x| x * (-s));
    }
    let re = wc.dot(&vecs.t());
    let im = ws.dot(&vecs.t());
    ndarray::Zip::from(&re)
        .and(&im)
        .map_collect(|&r, &i| C64::new(r, i))
}

/// U = V diag(e^{-i·vals·t}) V† from a complex spectral decomposition.
pub fn spectral_unitary_complex(vals: &Array1<f64>, vecs: &Array2<C64>, t: f64) -> Array2<C64> {
    let mut w = vecs.clone();
    for (k, &e) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -e * t);
        w.column_mut(k).mapv_inplace(|z| z * phase);
    }
    w.dot(&adjoint(vecs))
}

/// Least-squares solution of design·x ≈ rhs through the normal equations
/// (the design matrices here are tiny and well conditioned).
pub fn lstsq(design: &Array2<f64>, rhs: &Array1<f64>) -> Result<Array1<f64>> {
    use ndarray_linalg::Solve;
    let ata = design.t().dot(design);
    let atb = design.t().dot(rhs);
    ata.solve_into(atb).map_err(Error::from)
}
