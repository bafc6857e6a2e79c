//! Operator matrices on the chain bases: the PXP Hamiltonian and its
//! long-range deformation, scar ladder operators, the Rydberg chain, number
//! and imbalance diagonals, kick phases, and translation.
//!
//! Conventions: site occupation n ∈ {0, 1}, Pauli σ^z = 1 - 2n (so a ground
//! atom carries σ^z = +1), σ^± raise/lower the occupation. "Odd sites" are
//! bits 0, 2, 4, ...; the staggered magnetisation Σ(n_odd - n_even) is +L/2
//! on |Z2> and -L/2 on |Z2'>.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Boundary, MomentumSector, Space};
use crate::C64;

/// Golden ratio, the decay base of the deformation coefficients.
pub const PHI: f64 = 1.618033988749894848;

/// How an operator's entries are held: a diagonal, row-indexed sparse rows,
/// or a dense matrix.
#[derive(Clone, Debug)]
pub enum Storage {
    Diagonal(Array1<C64>),
    Sparse(Vec<Vec<(usize, C64)>>),
    Dense(Array2<C64>),
}

/// A square operator tied to the basis it was built on.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub dim: usize,
    pub basis_fingerprint: u64,
    pub hermitian: bool,
    pub storage: Storage,
}

impl OperatorMatrix {
    fn diagonal_new(basis: &Basis, diag: Array1<C64>, hermitian: bool) -> Self {
        OperatorMatrix {
            dim: diag.len(),
            basis_fingerprint: basis.fingerprint(),
            hermitian,
            storage: Storage::Diagonal(diag),
        }
    }

    fn sparse_new(basis: &Basis, mut rows: Vec<Vec<(usize, C64)>>, hermitian: bool) -> Self {
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
        }
        OperatorMatrix {
            dim: rows.len(),
            basis_fingerprint: basis.fingerprint(),
            hermitian,
            storage: Storage::Sparse(rows),
        }
    }

    pub fn apply(&self, state: &Array1<C64>) -> Array1<C64> {
        assert_eq!(state.len(), self.dim, "state/operator dimension mismatch");
        match &self.storage {
            Storage::Diagonal(d) => d * state,
            Storage::Sparse(rows) => Array1::from_iter(rows.iter().map(|row| {
                row.iter().map(|&(c, v)| v * state[c]).sum::<C64>()
            })),
            Storage::Dense(m) => m.dot(state),
        }
    }

    pub fn expectation(&self, state: &Array1<C64>) -> C64 {
        let applied = self.apply(state);
        state
            .iter()
            .zip(applied.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_dense(&self) -> Array2<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Diagonal(d) => Array2::from_diag(d),
            Storage::Sparse(rows) => {
                let mut m = Array2::zeros((self.dim, self.dim));
                for (r, row) in rows.iter().enumerate() {
                    for &(c, v) in row {
                        m[(r, c)] += v;
                    }
                }
                m
            }
        }
    }

    /// The diagonal, if the operator is diagonal; otherwise an error carrying
    /// the largest off-diagonal magnitude found.
    pub fn diagonal(&self) -> Result<Array1<C64>> {
        match &self.storage {
            Storage::Diagonal(d) => Ok(d.clone()),
            Storage::Sparse(rows) => {
                let mut off = 0.0f64;
                let mut diag = Array1::zeros(self.dim);
                for (r, row) in rows.iter().enumerate() {
                    for &(c, v) in row {
                        if c == r {
                            diag[r] += v;
                        } else {
                            off = off.max(v.norm());
                        }
                    }
                }
                if off > 1e-12 {
                    return Err(Error::NotDiagonal(off));
                }
                Ok(diag)
            }
            Storage::Dense(m) => {
                let mut off = 0.0f64;
                for ((r, c), v) in m.indexed_iter() {
                    if r != c {
                        off = off.max(v.norm());
                    }
                }
                if off > 1e-12 {
                    return Err(Error::NotDiagonal(off));
                }
                Ok(m.diag().to_owned())
            }
        }
    }

    pub fn max_imag(&self) -> f64 {
        let fold = |it: &mut dyn Iterator<Item = C64>| it.map(|z| z.im.abs()).fold(0.0, f64::max);
        match &self.storage {
            Storage::Diagonal(d) => fold(&mut d.iter().copied()),
            Storage::Sparse(rows) => fold(&mut rows.iter().flatten().map(|&(_, v)| v)),
            Storage::Dense(m) => fold(&mut m.iter().copied()),
        }
    }

    /// Real part as a dense matrix when the operator is purely real.
    pub fn real_dense(&self) -> Option<Array2<f64>> {
        (self.max_imag() == 0.0).then(|| self.to_dense().mapv(|z| z.re))
    }

    /// self + factor * other, keeping the sparsest storage that fits.
    pub fn add_scaled(&self, other: &OperatorMatrix, factor: C64) -> Result<OperatorMatrix> {
        if self.basis_fingerprint != other.basis_fingerprint {
            return Err(Error::BasisMismatch(
                self.basis_fingerprint,
                other.basis_fingerprint,
            ));
        }
        let hermitian = self.hermitian && other.hermitian && factor.im == 0.0;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => {
                Storage::Diagonal(a + &b.mapv(|z| z * factor))
            }
            (Storage::Sparse(rows), Storage::Diagonal(d)) => {
                let mut rows = rows.clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push((r, d[r] * factor));
                }
                merge_rows(&mut rows);
                Storage::Sparse(rows)
            }
            (Storage::Diagonal(d), Storage::Sparse(rows)) => {
                let mut rows: Vec<Vec<(usize, C64)>> = rows
                    .iter()
                    .map(|row| row.iter().map(|&(c, v)| (c, v * factor)).collect())
                    .collect();
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push((r, d[r]));
                }
                merge_rows(&mut rows);
                Storage::Sparse(rows)
            }
            (Storage::Sparse(a), Storage::Sparse(b)) => {
                let mut rows = a.clone();
                for (row, brow) in rows.iter_mut().zip(b) {
                    row.extend(brow.iter().map(|&(c, v)| (c, v * factor)));
                }
                merge_rows(&mut rows);
                Storage::Sparse(rows)
            }
            _ => Storage::Dense(self.to_dense() + other.to_dense().mapv(|z| z * factor)),
        };
        Ok(OperatorMatrix {
            dim: self.dim,
            basis_fingerprint: self.basis_fingerprint,
            hermitian,
            storage,
        })
    }

    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        match &self.storage {
            Storage::Diagonal(d) => {
                for (i, &v) in d.iter().enumerate() {
                    if v != C64::new(0.0, 0.0) {
                        out.push((i, i, v));
                    }
                }
            }
            Storage::Sparse(rows) => {
                for (r, row) in rows.iter().enumerate() {
                    for &(c, v) in row {
                        if v != C64::new(0.0, 0.0) {
                            out.push((r, c, v));
                        }
                    }
                }
            }
            Storage::Dense(m) => {
                for ((r, c), &v) in m.indexed_iter() {
                    if v != C64::new(0.0, 0.0) {
                        out.push((r, c, v));
                    }
                }
            }
        }
        out
    }

    /// Triplet export: `row col re im` lines under a header comment with the
    /// dimension and the fingerprint of the owning basis.
    pub fn triplet_text(&self) -> String {
        let mut out = format!(
            "# dim = {} basis = {:#018x} hermitian = {}\n",
            self.dim, self.basis_fingerprint, self.hermitian
        );
        for (r, c, v) in self.entries() {
            out.push_str(&format!("{} {} {:.17e} {:.17e}\n", r, c, v.re, v.im));
        }
        out
    }
}

fn merge_rows(rows: &mut [Vec<(usize, C64)>]) {
    for row in rows.iter_mut() {
        row.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
        for &(c, v) in row.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        *row = merged;
    }
}

fn neighbour_mask(sites: usize, boundary: Boundary, bit: usize) -> u32 {
    let mut mask = 0u32;
    match boundary {
        Boundary::Periodic => {
            mask |= 1 << ((bit + 1) % sites);
            mask |= 1 << ((bit + sites - 1) % sites);
        }
        Boundary::Open => {
            if bit + 1 < sites {
                mask |= 1 << (bit + 1);
            }
            if bit > 0 {
                mask |= 1 << (bit - 1);
            }
        }
    }
    mask
}

/// Excitation number N = Σ n_i (diagonal).
pub fn number(basis: &Basis) -> OperatorMatrix {
    let diag = Array1::from_iter(
        basis
            .configs()
            .iter()
            .map(|&c| C64::new(c.count_ones() as f64, 0.0)),
    );
    OperatorMatrix::diagonal_new(basis, diag, true)
}

/// Occupation of one site, 1-based (diagonal).
pub fn site_occupation(basis: &Basis, site: usize) -> OperatorMatrix {
    assert!(site >= 1 && site <= basis.sites, "site out of range");
    let bit = site - 1;
    let diag = Array1::from_iter(
        basis
            .configs()
            .iter()
            .map(|&c| C64::new((c >> bit & 1) as f64, 0.0)),
    );
    OperatorMatrix::diagonal_new(basis, diag, true)
}

/// Staggered imbalance Σ (n_odd - n_even), scaled by 2/L when normalised so
/// the Neel state reads +1.
pub fn staggered_imbalance(basis: &Basis, normalised: bool) -> OperatorMatrix {
    let scale = if normalised {
        2.0 / basis.sites as f64
    } else {
        1.0
    };
    let diag = Array1::from_iter(basis.configs().iter().map(|&c| {
        let mut v = 0i32;
        for bit in 0..basis.sites {
            if c >> bit & 1 == 1 {
                v += if bit % 2 == 0 { 1 } else { -1 };
            }
        }
        C64::new(scale * v as f64, 0.0)
    }));
    OperatorMatrix::diagonal_new(basis, diag, true)
}

/// Next-nearest-neighbour density sum Σ n_i n_{i+2} (diagonal).
pub fn nnn_density(basis: &Basis) -> OperatorMatrix {
    let l = basis.sites;
    let pairs: Vec<(usize, usize)> = match basis.boundary {
        Boundary::Periodic => (0..l).map(|i| (i, (i + 2) % l)).collect(),
        Boundary::Open => (0..l.saturating_sub(2)).map(|i| (i, i + 2)).collect(),
    };
    let diag = Array1::from_iter(basis.configs().iter().map(|&c| {
        let v = pairs
            .iter()
            .filter(|&&(a, b)| c >> a & 1 == 1 && c >> b & 1 == 1)
            .count();
        C64::new(v as f64, 0.0)
    }));
    OperatorMatrix::diagonal_new(basis, diag, true)
}

/// Ising bond sum Σ σ^z_i σ^z_{i+1} with σ^z = 1 - 2n (diagonal).
pub fn zz_bond_sum(basis: &Basis) -> OperatorMatrix {
    let l = basis.sites;
    let bonds: Vec<(usize, usize)> = match basis.boundary {
        Boundary::Periodic => (0..l).map(|i| (i, (i + 1) % l)).collect(),
        Boundary::Open => (0..l - 1).map(|i| (i, i + 1)).collect(),
    };
    let diag = Array1::from_iter(basis.configs().iter().map(|&c| {
        let z = |bit: usize| 1.0 - 2.0 * (c >> bit & 1) as f64;
        let v: f64 = bonds.iter().map(|&(a, b)| z(a) * z(b)).sum();
        C64::new(v, 0.0)
    }));
    OperatorMatrix::diagonal_new(basis, diag, true)
}

/// Particle-hole / chiral diagonal C = Π σ^z = (-1)^N; anticommutes with
/// PXP-type Hamiltonians and squares to one.
pub fn particle_hole(basis: &Basis) -> OperatorMatrix {
    let diag = Array1::from_iter(basis.configs().iter().map(|&c| {
        C64::new(if c.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }));
    OperatorMatrix::diagonal_new(basis, diag, true)
}

/// Kick unitary exp(-iθN) (diagonal, not Hermitian).
pub fn kick(basis: &Basis, theta: f64) -> OperatorMatrix {
    let diag = Array1::from_iter(
        basis
            .configs()
            .iter()
            .map(|&c| C64::from_polar(1.0, -theta * c.count_ones() as f64)),
    );
    OperatorMatrix::diagonal_new(basis, diag, false)
}

/// exp(-i·angle·D) for a diagonal Hermitian operator D.
pub fn exp_diag_phase(op: &OperatorMatrix, angle: f64, basis: &Basis) -> Result<OperatorMatrix> {
    let d = op.diagonal()?;
    let diag = Array1::from_iter(d.iter().map(|v| C64::from_polar(1.0, -angle * v.re)));
    Ok(OperatorMatrix::diagonal_new(basis, diag, false))
}

/// The PXP Hamiltonian Σ_i P_{i-1} σ^x_i P_{i+1} on the blockaded space.
pub fn pxp(basis: &Basis) -> Result<OperatorMatrix> {
    if basis.space != Space::Blockaded {
        return Err(Error::NotBlockaded);
    }
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.dim()];
    for (i, &c) in basis.configs().iter().enumerate() {
        for bit in 0..basis.sites {
            if c & neighbour_mask(basis.sites, basis.boundary, bit) != 0 {
                continue;
            }
            let flipped = c ^ (1 << bit);
            let j = basis
                .index_of(flipped)
                .expect("projected flip preserves the blockade");
            rows[i].push((j, C64::new(1.0, 0.0)));
        }
    }
    Ok(OperatorMatrix::sparse_new(basis, rows, true))
}

/// Long-range deformation parameters: dressing amplitudes
/// h_d = h0 (φ^(d-1) - φ^(1-d))^(-2) for distances d = 2..=n_max, so
/// h_2 = h0 exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationParams {
    pub h0: f64,
    pub n_max: usize,
}

impl Default for DeformationParams {
    fn default() -> Self {
        DeformationParams { h0: 0.051, n_max: 8 }
    }
}

impl DeformationParams {
    pub fn undeformed() -> Self {
        DeformationParams { h0: 0.0, n_max: 8 }
    }

    pub fn coefficient(&self, d: usize) -> f64 {
        assert!(d >= 2, "dressing starts at distance 2");
        let x = PHI.powi(d as i32 - 1) - PHI.powi(1 - d as i32);
        self.h0 / (x * x)
    }
}

/// Which half of the scar ladder pair: `Lower` walks |Z2> toward |Z2'>,
/// stepping the staggered magnetisation Σ(n_odd - n_even) down by one per
/// application; `Raise` is its adjoint.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Ladder {
    Lower,
    Raise,
}

/// Dressed ladder operator: σ^+ on even sites and σ^- on odd sites (for
/// `Lower`), each dressed by 1 + Σ_d h_d (σ^z_{i-d} + σ^z_{i+d}) evaluated
/// on the incoming configuration; distances wrap cyclically on small rings.
pub fn scar_ladder(
    basis: &Basis,
    params: &DeformationParams,
    which: Ladder,
) -> Result<OperatorMatrix> {
    if basis.space != Space::Blockaded {
        return Err(Error::NotBlockaded);
    }
    if basis.boundary != Boundary::Periodic && params.h0 != 0.0 {
        return Err(Error::Invalid(
            "the deformed model is defined on periodic chains".into(),
        ));
    }
    let l = basis.sites;
    let hd: Vec<f64> = (2..=params.n_max).map(|d| params.coefficient(d)).collect();
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.dim()];
    for (i, &c) in basis.configs().iter().enumerate() {
        for bit in 0..l {
            // Lower = excite even sites (odd bits), de-excite odd sites.
            let excite = bit % 2 == 1;
            let occupied = c >> bit & 1 == 1;
            if occupied == excite {
                continue;
            }
            if c & neighbour_mask(l, basis.boundary, bit) != 0 {
                continue;
            }
            let mut dressing = 1.0;
            for (k, &h) in hd.iter().enumerate() {
                let d = k + 2;
                let left = (bit + l - d % l) % l;
                let right = (bit + d) % l;
                let z = |b: usize| 1.0 - 2.0 * (c >> b & 1) as f64;
                dressing += h * (z(left) + z(right));
            }
            let flipped = c ^ (1 << bit);
            let j = basis
                .index_of(flipped)
                .expect("projected flip preserves the blockade");
            // The matrix element ⟨flipped|O|c⟩ lands in row `flipped`.
            rows[j].push((i, C64::new(dressing, 0.0)));
        }
    }
    if which == Ladder::Raise {
        let mut transposed: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.dim()];
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                transposed[c].push((r, v));
            }
        }
        rows = transposed;
    }
    Ok(OperatorMatrix::sparse_new(basis, rows, false))
}

/// Deformed PXP Hamiltonian: the Hermitian sum of the two dressed ladders.
/// At h0 = 0 it is exactly the PXP Hamiltonian.
pub fn deformed_pxp(basis: &Basis, params: &DeformationParams) -> Result<OperatorMatrix> {
    let lower = scar_ladder(basis, params, Ladder::Lower)?;
    let raise = scar_ladder(basis, params, Ladder::Raise)?;
    let mut sum = lower.add_scaled(&raise, C64::new(1.0, 0.0))?;
    sum.hermitian = true;
    Ok(sum)
}

/// Rydberg chain parameters. Defaults follow the blockaded working point:
/// V1 = 10Ω, V2 = V1/2^6, δ = V2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RydbergParams {
    pub omega: f64,
    pub delta: f64,
    pub v1: f64,
    pub v2: f64,
}

impl Default for RydbergParams {
    fn default() -> Self {
        let omega = 1.0;
        let v1 = 10.0 * omega;
        let v2 = v1 / 64.0;
        RydbergParams {
            omega,
            delta: v2,
            v1,
            v2,
        }
    }
}

/// Full-space Rydberg Hamiltonian
/// (Ω/2) Σ σ^x_i - δ Σ n_i + V1 Σ n_i n_{i+1} + V2 Σ n_i n_{i+2}.
pub fn rydberg(basis: &Basis, params: &RydbergParams) -> Result<OperatorMatrix> {
    if basis.space != Space::Full {
        return Err(Error::Invalid(
            "the Rydberg model lives on the full product space".into(),
        ));
    }
    let l = basis.sites;
    let half_omega = C64::new(0.5 * params.omega, 0.0);
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.dim()];
    let bonds: Vec<(usize, usize)> = match basis.boundary {
        Boundary::Periodic => (0..l).map(|i| (i, (i + 1) % l)).collect(),
        Boundary::Open => (0..l - 1).map(|i| (i, i + 1)).collect(),
    };
    let nnn: Vec<(usize, usize)> = match basis.boundary {
        Boundary::Periodic => (0..l).map(|i| (i, (i + 2) % l)).collect(),
        Boundary::Open => (0..l.saturating_sub(2)).map(|i| (i, i + 2)).collect(),
    };
    for (i, &c) in basis.configs().iter().enumerate() {
        let n = c.count_ones() as f64;
        let v1: f64 = bonds
            .iter()
            .filter(|&&(a, b)| c >> a & 1 == 1 && c >> b & 1 == 1)
            .count() as f64;
        let v2: f64 = nnn
            .iter()
            .filter(|&&(a, b)| c >> a & 1 == 1 && c >> b & 1 == 1)
            .count() as f64;
        let diag = -params.delta * n + params.v1 * v1 + params.v2 * v2;
        if diag != 0.0 {
            rows[i].push((i, C64::new(diag, 0.0)));
        }
        for bit in 0..l {
            rows[i].push(((c ^ (1 << bit)) as usize, half_omega));
        }
    }
    Ok(OperatorMatrix::sparse_new(basis, rows, true))
}

/// One-site translation as a permutation matrix (periodic chains).
pub fn translation(basis: &Basis) -> Result<OperatorMatrix> {
    let perm = basis.translation_permutation()?;
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); basis.dim()];
    for (j, &pj) in perm.iter().enumerate() {
        rows[pj].push((j, C64::new(1.0, 0.0)));
    }
    Ok(OperatorMatrix::sparse_new(basis, rows, false))
}

/// Reduce an operator to a momentum sector: W† O W over the sector isometry.
pub fn sector_matrix(op: &OperatorMatrix, sector: &MomentumSector) -> Array2<C64> {
    assert_eq!(op.dim, sector.parent_dim, "operator/sector mismatch");
    let w = sector.isometry();
    let d = sector.dim();
    let mut reduced = Array2::zeros((d, d));
    for b in 0..d {
        let col = Array1::from_iter(w.column(b).iter().map(|&x| C64::new(x, 0.0)));
        let applied = op.apply(&col);
        for a in 0..d {
            let val: C64 = w
                .column(a)
                .iter()
                .zip(applied.iter())
                .map(|(&x, &y)| y * x)
                .sum();
            reduced[(a, b)] = val;
        }
    }
    reduced
}

/// The drive's static Hamiltonian choices.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Pxp,
    DeformedPxp(DeformationParams),
    PxpNnn { v2: f64 },
    Rydberg(RydbergParams),
}

impl Model {
    /// The space the model naturally acts on.
    pub fn space(&self) -> Space {
        match self {
            Model::Rydberg(_) => Space::Full,
            _ => Space::Blockaded,
        }
    }

    pub fn basis(&self, sites: usize, boundary: Boundary) -> Result<Basis> {
        match self.space() {
            Space::Blockaded => Basis::blockaded(sites, boundary),
            Space::Full => Basis::full(sites, boundary),
        }
    }

    pub fn hamiltonian(&self, basis: &Basis) -> Result<OperatorMatrix> {
        match self {
            Model::Pxp => pxp(basis),
            Model::DeformedPxp(p) => deformed_pxp(basis, p),
            Model::PxpNnn { v2 } => {
                let base = pxp(basis)?;
                let mut h = base.add_scaled(&nnn_density(basis), C64::new(*v2, 0.0))?;
                h.hermitian = true;
                Ok(h)
            }
            Model::Rydberg(p) => rydberg(basis, p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Model::Pxp => "pxp".into(),
            Model::DeformedPxp(p) => format!("deformed-pxp(h0={}, n_max={})", p.h0, p.n_max),
            Model::PxpNnn { v2 } => format!("pxp+nnn(v2={v2})"),
            Model::Rydberg(p) => format!(
                "rydberg(omega={}, delta={}, v1={}, v2={})",
                p.omega, p.delta, p.v1, p.v2
            ),
        }
    }
}
