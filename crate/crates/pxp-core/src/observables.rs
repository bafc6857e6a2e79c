//! Scalar diagnostics: imbalance, entanglement entropy, revival and GHZ
//! fidelities, quantum Fisher information, the subharmonic weight f₂, and
//! the spatiotemporal density correlator C(q,ω).

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;

use crate::dynamics::{FloquetEngine, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::hilbert::Basis;
use crate::C64;

/// Named per-state diagnostics recordable along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    /// Σ(n_odd - n_even), scaled by 2/L when normalised.
    Imbalance { normalised: bool },
    Number,
    /// Half-chain von Neumann entropy in nats (default cut L/2).
    EntanglementEntropy { cut: Option<usize> },
    /// |⟨ψ0|ψ(t)⟩|² against the trajectory's initial state.
    RevivalFidelity,
    GhzFidelity,
    /// 4·var(A) with A the staggered operator (unnormalised by default).
    Qfi { normalised: bool },
    /// Occupation of one site (1-based).
    SiteOccupation(usize),
}

impl Observable {
    pub fn label(&self) -> String {
        match self {
            Observable::Imbalance { .. } => "imbalance".into(),
            Observable::Number => "number".into(),
            Observable::EntanglementEntropy { .. } => "entropy".into(),
            Observable::RevivalFidelity => "fidelity".into(),
            Observable::GhzFidelity => "ghz".into(),
            Observable::Qfi { .. } => "qfi".into(),
            Observable::SiteOccupation(site) => format!("n{site}"),
        }
    }

    pub fn measure(&self, state: &Array1<C64>, ctx: &ObservableContext) -> Result<f64> {
        match self {
            Observable::Imbalance { normalised } => {
                Ok(diagonal_expectation(state, ctx.basis, |c, l| {
                    staggered_value(c, l) * if *normalised { 2.0 / l as f64 } else { 1.0 }
                }))
            }
            Observable::Number => Ok(diagonal_expectation(state, ctx.basis, |c, _| {
                c.count_ones() as f64
            })),
            Observable::EntanglementEntropy { cut } => {
                entanglement_entropy(state, ctx.basis, cut.unwrap_or(ctx.basis.sites / 2))
            }
            Observable::RevivalFidelity => Ok(revival_fidelity(ctx.psi0, state)),
            Observable::GhzFidelity => ghz_fidelity(state, ctx.basis),
            Observable::Qfi { normalised } => {
                Ok(quantum_fisher_information_staggered(state, ctx.basis, *normalised))
            }
            Observable::SiteOccupation(site) => {
                if *site < 1 || *site > ctx.basis.sites {
                    return Err(Error::Invalid(format!("site {site} out of range")));
                }
                let bit = site - 1;
                Ok(diagonal_expectation(state, ctx.basis, |c, _| {
                    (c >> bit & 1) as f64
                }))
            }
        }
    }
}

/// Shared inputs for observable evaluation along one trajectory.
pub struct ObservableContext<'a> {
    pub basis: &'a Basis,
    pub psi0: &'a Array1<C64>,
}

impl<'a> ObservableContext<'a> {
    pub fn new(basis: &'a Basis, psi0: &'a Array1<C64>) -> Self {
        ObservableContext { basis, psi0 }
    }
}

fn staggered_value(config: u32, sites: usize) -> f64 {
    let mut v = 0i32;
    for bit in 0..sites {
        if config >> bit & 1 == 1 {
            v += if bit % 2 == 0 { 1 } else { -1 };
        }
    }
    v as f64
}

fn diagonal_expectation(
    state: &Array1<C64>,
    basis: &Basis,
    f: impl Fn(u32, usize) -> f64,
) -> f64 {
    state
        .iter()
        .zip(basis.configs())
        .map(|(a, &c)| a.norm_sqr() * f(c, basis.sites))
        .sum()
}

/// Von Neumann entropy of the left `cut` sites (nats): embed into the 2^L
/// product space, reshape to 2^cut × 2^(L-cut), and sum -s²ln s² over the
/// singular values.
pub fn entanglement_entropy(state: &Array1<C64>, basis: &Basis, cut: usize) -> Result<f64> {
    if cut == 0 || cut >= basis.sites {
        return Err(Error::BadCut {
            cut,
            sites: basis.sites,
        });
    }
    let full = basis.embed(state)?;
    let rows = 1usize << cut;
    let cols = 1usize << (basis.sites - cut);
    // Bit i of a config addresses site i+1; the left block of the chain is
    // the low `cut` bits, so the full-space index splits as a + (b << cut).
    let mut m = Array2::zeros((rows, cols));
    for (idx, &amp) in full.iter().enumerate() {
        m[(idx & (rows - 1), idx >> cut)] = amp;
    }
    let (_, s, _) = m.svd(false, false)?;
    Ok(s.iter()
        .map(|&sv| {
            let p = sv * sv;
            if p > 1e-300 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum())
}

/// Squared overlap |⟨a|b⟩|².
pub fn revival_fidelity(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    overlap.norm_sqr()
}

/// Overlap-based GHZ fidelity ½(|c0|² + |c1|² + 2|c0||c1|) with the two
/// density-wave amplitudes c0 = ⟨Z2|ψ⟩, c1 = ⟨Z2'|ψ⟩; invariant under global
/// and relative phases.
pub fn ghz_fidelity(state: &Array1<C64>, basis: &Basis) -> Result<f64> {
    let c0 = state[basis.neel_index()?].norm();
    let c1 = state[basis.neel_prime_index()?].norm();
    Ok(0.5 * (c0 * c0 + c1 * c1 + 2.0 * c0 * c1))
}

/// QFI of a pure state for the staggered probe: 4(⟨A²⟩ - ⟨A⟩²).
pub fn quantum_fisher_information_staggered(
    state: &Array1<C64>,
    basis: &Basis,
    normalised: bool,
) -> f64 {
    let scale = if normalised {
        2.0 / basis.sites as f64
    } else {
        1.0
    };
    let mean = diagonal_expectation(state, basis, |c, l| scale * staggered_value(c, l));
    let second = diagonal_expectation(state, basis, |c, l| {
        let v = scale * staggered_value(c, l);
        v * v
    });
    4.0 * (second - mean * mean)
}

/// QFI of a pure state for an arbitrary Hermitian probe.
pub fn quantum_fisher_information(
    state: &Array1<C64>,
    probe: &crate::operators::OperatorMatrix,
) -> f64 {
    let applied = probe.apply(state);
    let mean: C64 = state
        .iter()
        .zip(applied.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let second: f64 = applied.iter().map(|z| z.norm_sqr()).sum();
    4.0 * (second - mean.norm_sqr())
}

/// Subharmonic weight of a stroboscopic series sampled every `t1`: the
/// mean-subtracted spectral weight at `omega`, normalised so a perfectly
/// alternating series scores exactly 1,
/// f₂(ω) = |Σ_n e^{iω·n·t1} y_n|² / (N · Σ_n y_n²).
pub fn subharmonic_weight(series: &[f64], t1: f64, omega: f64) -> f64 {
    let n = series.len();
    assert!(n >= 4, "need at least four samples");
    let mean = series.iter().sum::<f64>() / n as f64;
    let variance: f64 = series.iter().map(|&y| (y - mean) * (y - mean)).sum();
    let scale: f64 = series.iter().map(|&y| y * y).sum();
    if variance <= 1e-24 * scale.max(1e-300) {
        return 0.0;
    }
    let mut sum = C64::new(0.0, 0.0);
    for (j, &y) in series.iter().enumerate() {
        sum += C64::from_polar(y - mean, omega * t1 * j as f64);
    }
    sum.norm_sqr() / (n as f64 * variance)
}

/// Normalised spectrum of a stroboscopic series over the discrete frequency
/// bins ω_m = 2πm/(N·t1); by Parseval the bin weights sum to 1.
#[derive(Clone, Debug)]
pub struct SpectralSeries {
    pub omegas: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn subharmonic_spectrum(series: &[f64], t1: f64) -> SpectralSeries {
    let n = series.len();
    let mut omegas = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for m in 0..n {
        let omega = std::f64::consts::TAU * m as f64 / (n as f64 * t1);
        omegas.push(omega);
        weights.push(subharmonic_weight(series, t1, omega));
    }
    SpectralSeries { omegas, weights }
}

/// Trapezoidal time average of the entropy column of a trajectory record.
pub fn time_averaged_entropy(record: &TrajectoryRecord) -> Result<f64> {
    let series = record
        .column("entropy")
        .ok_or_else(|| Error::Invalid("record has no entropy column".into()))?;
    let times = &record.times;
    if times.len() < 2 {
        return Ok(series.first().copied().unwrap_or(0.0));
    }
    let mut integral = 0.0;
    for i in 1..times.len() {
        integral += 0.5 * (series[i] + series[i - 1]) * (times[i] - times[i - 1]);
    }
    Ok(integral / (times[times.len() - 1] - times[0]))
}

/// Double Fourier transform of the stroboscopic density-density correlator,
/// C(q,ω) = (1/(n_T·L)) Σ_{n=1}^{n_T} Σ_{j=1}^{L} e^{i(nω+jq)} g_n(j) with
/// g_n(j) = ⟨ψ0|n_1 U^n n_{1+j} U^{-n}|ψ0⟩ (site 1 fixed by translation
/// invariance). Large |C(π,π)| diagnoses subharmonic (period-doubled) order,
/// large |C(π,0)| static density-wave order.
#[derive(Clone, Debug)]
pub struct CorrelatorGrid {
    /// q_m = 2πm/L for m = 0..L-1.
    pub qs: Vec<f64>,
    /// ω_n = 2πn/n_T for n = 0..n_T-1.
    pub omegas: Vec<f64>,
    /// values[(m, n)] = C(q_m, ω_n).
    pub values: Array2<C64>,
}

impl CorrelatorGrid {
    pub fn at(&self, q: f64, omega: f64) -> C64 {
        let mi = self
            .qs
            .iter()
            .position(|&x| (x - q).abs() < 1e-9)
            .expect("q not on the grid");
        let ni = self
            .omegas
            .iter()
            .position(|&x| (x - omega).abs() < 1e-9)
            .expect("omega not on the grid");
        self.values[(mi, ni)]
    }

    pub fn median_abs(&self) -> f64 {
        let mut mags: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        mags.sort_by(|a, b| a.total_cmp(b));
        mags[mags.len() / 2]
    }

    /// CSV rows `q,omega,re,im,abs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,omega,re,im,abs\n");
        for (m, &q) in self.qs.iter().enumerate() {
            for (n, &w) in self.omegas.iter().enumerate() {
                let v = self.values[(m, n)];
                out.push_str(&format!(
                    "{q:.12e},{w:.12e},{:.12e},{:.12e},{:.12e}\n",
                    v.re,
                    v.im,
                    v.norm()
                ));
            }
        }
        out
    }
}

/// Correlator driven by a Floquet engine (U = one-period unitary).
pub fn spatiotemporal_correlator(
    psi0: &Array1<C64>,
    basis: &Basis,
    engine: &FloquetEngine,
    n_t: usize,
) -> Result<CorrelatorGrid> {
    spatiotemporal_correlator_with(psi0, basis, n_t, |state| engine.step_inverse(state))
}

/// Correlator over a caller-supplied inverse step U^{-1}; the two state
/// histories a_n = U^{-n}ψ0 and b_n = U^{-n}(n_1 ψ0) are advanced together
/// so no dense power of U is ever formed.
pub fn spatiotemporal_correlator_with(
    psi0: &Array1<C64>,
    basis: &Basis,
    n_t: usize,
    mut step_inverse: impl FnMut(&Array1<C64>) -> Result<Array1<C64>>,
) -> Result<CorrelatorGrid> {
    basis.check_state(psi0)?;
    let l = basis.sites;
    let mut a = psi0.clone();
    // b = n_1 ψ0 (site 1 = bit 0 occupation).
    let mut b = Array1::from_iter(
        psi0.iter()
            .zip(basis.configs())
            .map(|(&amp, &c)| if c & 1 == 1 { amp } else { C64::new(0.0, 0.0) }),
    );
    // g[(n-1, j-1)] = ⟨b_n| n_{1+j} |a_n⟩ for n = 1..n_T, j = 1..L.
    let mut g: Array2<C64> = Array2::zeros((n_t, l));
    for n in 0..n_t {
        a = step_inverse(&a)?;
        b = step_inverse(&b)?;
        for ((&bc, &ac), &c) in b.iter().zip(a.iter()).zip(basis.configs()) {
            let w = bc.conj() * ac;
            for j in 1..=l {
                // Site 1+j, cyclic: j = L wraps to site 1 (bit 0).
                let bit = j % l;
                if c >> bit & 1 == 1 {
                    g[(n, j - 1)] += w;
                }
            }
        }
    }
    let qs: Vec<f64> = (0..l).map(|m| std::f64::consts::TAU * m as f64 / l as f64).collect();
    let omegas: Vec<f64> = (0..n_t)
        .map(|n| std::f64::consts::TAU * n as f64 / n_t as f64)
        .collect();
    let mut values = Array2::zeros((l, n_t));
    for (mi, &q) in qs.iter().enumerate() {
        // Spatial transform first: G_n(q) = Σ_j e^{ijq} g_n(j).
        let spatial: Vec<C64> = (0..n_t)
            .map(|n| {
                (1..=l)
                    .map(|j| C64::from_polar(1.0, q * j as f64) * g[(n, j - 1)])
                    .sum::<C64>()
            })
            .collect();
        for (ni, &w) in omegas.iter().enumerate() {
            let mut sum = C64::new(0.0, 0.0);
            for (n, &s) in spatial.iter().enumerate() {
                sum += C64::from_polar(1.0, w * (n + 1) as f64) * s;
            }
            values[(mi, ni)] = sum / C64::new((n_t * l) as f64, 0.0);
        }
    }
    Ok(CorrelatorGrid { qs, omegas, values })
}
