//! Bases for chains of Rydberg atoms, with and without the blockade constraint.
//!
//! Site `i` (1-based, `i = 1..=L`) is stored in bit `i-1` of a `u32`
//! configuration; a set bit is an excited atom `•`, a cleared bit a ground
//! atom `◦`. The blockade-constrained space keeps configurations with no two
//! adjacent excitations (cyclically adjacent on periodic chains). Its
//! dimension grows as the Lucas numbers on periodic chains and as the
//! Fibonacci numbers on open ones.
//!
//! "Odd sites" are sites 1, 3, 5, ... (bits 0, 2, 4, ...); the Neel state
//! `|Z2>` excites exactly the odd sites.

use std::collections::HashMap;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::C64;

/// Largest chain the `u32` configuration encoding (and full-space embedding)
/// is allowed to address.
pub const MAX_SITES: usize = 24;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Boundary {
    Periodic,
    Open,
}

/// Which state space a basis spans: the blockade-constrained subspace or the
/// full 2^L product space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Space {
    Blockaded,
    Full,
}

/// An ordered basis of atom configurations with an index lookup.
///
/// Configurations are sorted ascending by their integer value, so basis
/// indices are stable and reproducible.
#[derive(Clone, Debug)]
pub struct Basis {
    pub sites: usize,
    pub boundary: Boundary,
    pub space: Space,
    configs: Vec<u32>,
    index: HashMap<u32, usize>,
}

/// True when `config` has no pair of neighbouring excited sites.
///
/// Written as an explicit loop over site pairs so it can serve as an
/// independent check on the generated bases.
pub fn blockade_satisfied(config: u32, sites: usize, boundary: Boundary) -> bool {
    let bonds = match boundary {
        Boundary::Periodic => sites,
        Boundary::Open => sites - 1,
    };
    for i in 0..bonds {
        let j = (i + 1) % sites;
        if config >> i & 1 == 1 && config >> j & 1 == 1 {
            return false;
        }
    }
    true
}

/// Lucas numbers with L(1) = 1, L(2) = 3: the dimension of the blockaded
/// space on a periodic chain of n sites.
pub fn lucas(n: usize) -> usize {
    match n {
        0 => 2,
        1 => 1,
        _ => {
            let (mut a, mut b) = (2usize, 1usize);
            for _ in 2..=n {
                let c = a + b;
                a = b;
                b = c;
            }
            b
        }
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites < 2 {
        return Err(Error::ChainTooShort(sites));
    }
    if sites > MAX_SITES {
        return Err(Error::ChainTooLong(sites));
    }
    Ok(())
}

impl Basis {
    /// Blockade-constrained basis: every configuration free of adjacent
    /// excitations, ascending.
    pub fn blockaded(sites: usize, boundary: Boundary) -> Result<Self> {
        check_sites(sites)?;
        let configs: Vec<u32> = (0..1u32 << sites)
            .filter(|&c| blockade_satisfied(c, sites, boundary))
            .collect();
        let index = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Ok(Basis {
            sites,
            boundary,
            space: Space::Blockaded,
            configs,
            index,
        })
    }

    /// Full 2^L product basis (used by the Rydberg model, where the blockade
    /// is energetic rather than kinematic).
    pub fn full(sites: usize, boundary: Boundary) -> Result<Self> {
        check_sites(sites)?;
        let configs: Vec<u32> = (0..1u32 << sites).collect();
        Ok(Basis {
            sites,
            boundary,
            space: Space::Full,
            configs,
            index: HashMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[u32] {
        &self.configs
    }

    pub fn config(&self, index: usize) -> u32 {
        self.configs[index]
    }

    pub fn index_of(&self, config: u32) -> Option<usize> {
        match self.space {
            Space::Full => ((config as usize) < self.configs.len()).then_some(config as usize),
            Space::Blockaded => self.index.get(&config).copied(),
        }
    }

    /// Unit vector on the `index`-th basis configuration.
    pub fn basis_state(&self, index: usize) -> Array1<C64> {
        let mut v = Array1::zeros(self.dim());
        v[index] = C64::new(1.0, 0.0);
        v
    }

    fn neel_config(&self, offset: usize) -> Result<u32> {
        if self.sites % 2 != 0 {
            return Err(Error::OddNeelChain(self.sites));
        }
        let mut c = 0u32;
        let mut i = offset;
        while i < self.sites {
            c |= 1 << i;
            i += 2;
        }
        Ok(c)
    }

    /// Index of `|Z2>`: odd sites (bits 0, 2, 4, ...) excited.
    pub fn neel_index(&self) -> Result<usize> {
        let c = self.neel_config(0)?;
        Ok(self.index_of(c).expect("Neel state satisfies the blockade"))
    }

    /// Index of the shifted Neel state `|Z2'>`: even sites excited.
    pub fn neel_prime_index(&self) -> Result<usize> {
        let c = self.neel_config(1)?;
        Ok(self.index_of(c).expect("Neel state satisfies the blockade"))
    }

    /// Index of the period-4 density wave `|Z4> = |•◦◦◦•◦◦◦...>`.
    pub fn z4_index(&self) -> Result<usize> {
        if self.sites % 4 != 0 {
            return Err(Error::BadZ4Chain(self.sites));
        }
        let mut c = 0u32;
        let mut i = 0;
        while i < self.sites {
            c |= 1 << i;
            i += 4;
        }
        Ok(self.index_of(c).expect("Z4 satisfies the blockade"))
    }

    pub fn neel_state(&self) -> Result<Array1<C64>> {
        Ok(self.basis_state(self.neel_index()?))
    }

    pub fn neel_prime_state(&self) -> Result<Array1<C64>> {
        Ok(self.basis_state(self.neel_prime_index()?))
    }

    pub fn z4_state(&self) -> Result<Array1<C64>> {
        Ok(self.basis_state(self.z4_index()?))
    }

    /// One-site translation on a periodic chain: site i -> site i+1, so the
    /// bit pattern rotates up by one.
    pub fn translate_config(&self, config: u32) -> u32 {
        let mask = (1u32 << self.sites) - 1;
        (config << 1 | config >> (self.sites - 1)) & mask
    }

    /// Permutation `p` with `p[j] = index of T(config_j)` for the one-site
    /// translation T. Periodic chains only.
    pub fn translation_permutation(&self) -> Result<Vec<usize>> {
        if self.boundary != Boundary::Periodic {
            return Err(Error::NotPeriodic);
        }
        Ok(self
            .configs
            .iter()
            .map(|&c| {
                self.index_of(self.translate_config(c))
                    .expect("translation preserves the blockade")
            })
            .collect())
    }

    /// Embed a state into the full 2^L product space (for bipartite cuts,
    /// Schmidt decompositions, exports).
    pub fn embed(&self, state: &Array1<C64>) -> Result<Array1<C64>> {
        self.check_state(state)?;
        let mut full = Array1::zeros(1usize << self.sites);
        for (i, &c) in self.configs.iter().enumerate() {
            full[c as usize] = state[i];
        }
        Ok(full)
    }

    /// Restrict a full-space state onto this basis. This is a projection:
    /// amplitude on configurations outside the basis is dropped.
    pub fn restrict(&self, full: &Array1<C64>) -> Result<Array1<C64>> {
        let want = 1usize << self.sites;
        if full.len() != want {
            return Err(Error::DimensionMismatch {
                state: full.len(),
                basis: want,
            });
        }
        Ok(Array1::from_iter(
            self.configs.iter().map(|&c| full[c as usize]),
        ))
    }

    pub fn check_state(&self, state: &Array1<C64>) -> Result<()> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                state: state.len(),
                basis: self.dim(),
            });
        }
        Ok(())
    }

    /// Momentum sector at k = 0 or k = π (the sectors hosting the Neel
    /// states and the top of the scar tower). Periodic chains only.
    pub fn momentum_sector(&self, k: Momentum) -> Result<MomentumSector> {
        if self.boundary != Boundary::Periodic {
            return Err(Error::NotPeriodic);
        }
        let mut reps = Vec::new();
        let mut columns = Vec::new();
        for &c in &self.configs {
            let mut orbit = vec![c];
            let mut t = self.translate_config(c);
            let mut minimal = true;
            while t != c {
                if t < c {
                    minimal = false;
                    break;
                }
                orbit.push(t);
                t = self.translate_config(t);
            }
            if !minimal {
                continue;
            }
            let period = orbit.len();
            if k == Momentum::Pi && period % 2 != 0 {
                continue;
            }
            let norm = 1.0 / (period as f64).sqrt();
            let mut column: Vec<(usize, f64)> = orbit
                .iter()
                .enumerate()
                .map(|(t, &g)| {
                    let sign = match k {
                        Momentum::Zero => 1.0,
                        Momentum::Pi => {
                            if t % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    };
                    (self.index_of(g).expect("orbit stays in basis"), sign * norm)
                })
                .collect();
            column.sort_by_key(|&(i, _)| i);
            reps.push((c, period));
            columns.push(column);
        }
        Ok(MomentumSector {
            k,
            sites: self.sites,
            parent_dim: self.dim(),
            reps,
            columns,
        })
    }

    /// Stable hash of the basis content, stamped into operator and matrix
    /// exports so mismatched artifacts are detectable.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        eat(self.sites as u8);
        eat(match self.boundary {
            Boundary::Periodic => 0,
            Boundary::Open => 1,
        });
        eat(match self.space {
            Space::Blockaded => 0,
            Space::Full => 1,
        });
        for &c in &self.configs {
            for b in c.to_le_bytes() {
                eat(b);
            }
        }
        h
    }

    /// Configuration rendered site 1 first: `5` on L=4 prints as `1010`.
    pub fn site_string(&self, config: u32) -> String {
        (0..self.sites)
            .map(|i| if config >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Basis dump, one `index,bitstring` row per configuration.
    pub fn csv(&self) -> String {
        let mut out = String::from("index,bitstring\n");
        for (i, &c) in self.configs.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i, self.site_string(c)));
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Momentum {
    Zero,
    Pi,
}

impl Momentum {
    /// Translation eigenvalue e^{ik} carried by states in this sector.
    pub fn eigenvalue(&self) -> f64 {
        match self {
            Momentum::Zero => 1.0,
            Momentum::Pi => -1.0,
        }
    }
}

/// A momentum sector of a periodic basis, spanned by symmetrised orbit sums
/// `|r_k> = p^{-1/2} Σ_t e^{-ikt} T^t |r>` over orbit representatives `r`
/// (the smallest configuration of each translation orbit).
#[derive(Clone, Debug)]
pub struct MomentumSector {
    pub k: Momentum,
    pub sites: usize,
    pub parent_dim: usize,
    reps: Vec<(u32, usize)>,
    columns: Vec<Vec<(usize, f64)>>,
}

impl MomentumSector {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Orbit representatives with their translation periods.
    pub fn representatives(&self) -> &[(u32, usize)] {
        &self.reps
    }

    /// Sector coordinates `<r_k|ψ>` of a parent-space state.
    pub fn project(&self, state: &Array1<C64>) -> Result<Array1<C64>> {
        if state.len() != self.parent_dim {
            return Err(Error::DimensionMismatch {
                state: state.len(),
                basis: self.parent_dim,
            });
        }
        Ok(Array1::from_iter(self.columns.iter().map(|col| {
            col.iter().map(|&(i, w)| state[i] * w).sum::<C64>()
        })))
    }

    /// Rebuild the parent-space state `Σ_α v_α |r_k^α>` from sector
    /// coordinates.
    pub fn unproject(&self, coords: &Array1<C64>) -> Result<Array1<C64>> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                state: coords.len(),
                basis: self.dim(),
            });
        }
        let mut state = Array1::zeros(self.parent_dim);
        for (col, &v) in self.columns.iter().zip(coords.iter()) {
            for &(i, w) in col {
                state[i] += v * w;
            }
        }
        Ok(state)
    }

    /// Dense isometry W (parent_dim x dim) whose columns are the sector
    /// basis vectors; W^T O W reduces a parent operator to the sector.
    pub fn isometry(&self) -> ndarray::Array2<f64> {
        let mut w = ndarray::Array2::zeros((self.parent_dim, self.dim()));
        for (a, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                w[(i, a)] = v;
            }
        }
        w
    }
}

/// Seeded pseudo-random state with normally distributed amplitudes,
/// normalised to 1 (Haar-like for test and custom-experiment use).
pub fn random_state(dim: usize, seed: u64) -> Array1<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut v = Array1::from_iter((0..dim).map(|_| C64::new(gauss(), gauss())));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blockaded_dims_match_counting_and_lucas() {
        for sites in 2..=12 {
            let basis = Basis::blockaded(sites, Boundary::Periodic).unwrap();
            let counted = (0..1u32 << sites)
                .filter(|&c| blockade_satisfied(c, sites, Boundary::Periodic))
                .count();
            assert_eq!(basis.dim(), counted, "periodic count mismatch at L={sites}");
            assert_eq!(basis.dim(), lucas(sites), "Lucas mismatch at L={sites}");
        }
        // Open chains follow the Fibonacci numbers instead: 3, 5, 8, ...
        let mut fib = vec![3usize, 5];
        for sites in 2..=12 {
            let basis = Basis::blockaded(sites, Boundary::Open).unwrap();
            if sites >= 4 {
                let n = fib.len();
                fib.push(fib[n - 1] + fib[n - 2]);
            }
            assert_eq!(basis.dim(), fib[sites - 2], "Fibonacci mismatch at L={sites}");
            let counted = (0..1u32 << sites)
                .filter(|&c| blockade_satisfied(c, sites, Boundary::Open))
                .count();
            assert_eq!(basis.dim(), counted, "open count mismatch at L={sites}");
        }
    }

    #[test]
    fn small_periodic_dims() {
        for (sites, dim) in [(2, 3), (4, 7), (6, 18)] {
            let basis = Basis::blockaded(sites, Boundary::Periodic).unwrap();
            assert_eq!(basis.dim(), dim, "dim at L={sites}");
        }
    }

    #[test]
    fn configs_sorted_with_consistent_lookup() {
        let basis = Basis::blockaded(10, Boundary::Periodic).unwrap();
        assert!(basis.configs().windows(2).all(|w| w[0] < w[1]));
        for (i, &c) in basis.configs().iter().enumerate() {
            assert_eq!(basis.index_of(c), Some(i));
        }
        assert_eq!(basis.index_of(0b11), None, "blocked pair must be absent");
    }

    #[test]
    fn neel_states_on_four_sites() {
        let basis = Basis::blockaded(4, Boundary::Periodic).unwrap();
        assert_eq!(basis.config(basis.neel_index().unwrap()), 0b0101);
        assert_eq!(basis.config(basis.neel_prime_index().unwrap()), 0b1010);
        assert_eq!(basis.site_string(0b0101), "1010", "site 1 prints first");
        let odd = Basis::blockaded(5, Boundary::Periodic).unwrap();
        assert!(matches!(odd.neel_index(), Err(Error::OddNeelChain(5))));
    }

    #[test]
    fn z4_places_every_fourth_site() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        assert_eq!(basis.config(basis.z4_index().unwrap()), 0b0001_0001);
        let bad = Basis::blockaded(6, Boundary::Periodic).unwrap();
        assert!(matches!(bad.z4_index(), Err(Error::BadZ4Chain(6))));
    }

    #[test]
    fn embed_is_inverse_of_restrict() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let state = random_state(basis.dim(), 7);
        let full = basis.embed(&state).unwrap();
        assert_eq!(full.len(), 1 << 8);
        let back = basis.restrict(&full).unwrap();
        let err = (&back - &state).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err == 0.0, "restrict(embed(ψ)) must reproduce ψ, err={err}");
        // Neel embedding lands on the raw configuration index.
        let z2 = Basis::blockaded(4, Boundary::Periodic).unwrap();
        let full = z2.embed(&z2.neel_state().unwrap()).unwrap();
        assert_eq!(full[0b0101], C64::new(1.0, 0.0));
        assert_eq!(full.iter().map(|z| z.norm_sqr()).sum::<f64>(), 1.0);
    }

    #[test]
    fn momentum_sector_dimensions_at_four_sites() {
        // Orbits of L=4: {0} p=1, {1,2,4,8} p=4, {5,10} p=2.
        // k=0 keeps all three, k=π needs even period (two orbits),
        // the remaining momenta hold the other 7-5=2 states.
        let basis = Basis::blockaded(4, Boundary::Periodic).unwrap();
        let k0 = basis.momentum_sector(Momentum::Zero).unwrap();
        let kpi = basis.momentum_sector(Momentum::Pi).unwrap();
        assert_eq!(k0.dim(), 3);
        assert_eq!(kpi.dim(), 2);
        assert_eq!(basis.dim() - k0.dim() - kpi.dim(), 2);
    }

    #[test]
    fn sector_states_are_translation_eigenvectors() {
        let basis = Basis::blockaded(10, Boundary::Periodic).unwrap();
        let perm = basis.translation_permutation().unwrap();
        for k in [Momentum::Zero, Momentum::Pi] {
            let sector = basis.momentum_sector(k).unwrap();
            let coords = random_state(sector.dim(), 11);
            let state = sector.unproject(&coords).unwrap();
            let mut translated = Array1::zeros(basis.dim());
            for (j, &pj) in perm.iter().enumerate() {
                translated[pj] = state[j];
            }
            let err = (&translated - &state.mapv(|z| z * k.eigenvalue()))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "T|ψ_k> = e^(ik)|ψ_k> failed for {k:?}: {err}");
            let back = sector.project(&state).unwrap();
            let round = (&back - &coords).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(round < 1e-12, "project(unproject) must be identity: {round}");
        }
    }

    #[test]
    fn neel_norm_splits_across_k0_and_kpi() {
        let basis = Basis::blockaded(8, Boundary::Periodic).unwrap();
        let z2 = basis.neel_state().unwrap();
        let total: f64 = [Momentum::Zero, Momentum::Pi]
            .iter()
            .map(|&k| {
                let sector = basis.momentum_sector(k).unwrap();
                sector
                    .project(&z2)
                    .unwrap()
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        assert!(
            (total - 1.0).abs() < 1e-12,
            "Neel weight must live entirely in k=0 and k=π, got {total}"
        );
    }

    #[test]
    fn random_states_are_seeded_and_normalised() {
        let a = random_state(50, 3);
        let b = random_state(50, 3);
        let c = random_state(50, 4);
        assert_eq!(a, b, "same seed must reproduce the state");
        assert!(a != c, "different seeds must differ");
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_csv_lists_index_and_bitstring() {
        let basis = Basis::blockaded(4, Boundary::Periodic).unwrap();
        let csv = basis.csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("index,bitstring"));
        assert_eq!(lines.next(), Some("0,0000"));
        assert!(csv.lines().count() == basis.dim() + 1);
        assert!(csv.contains("4,1010"), "Neel row present: {csv}");
    }

    proptest::proptest! {
        #[test]
        fn lucas_recurrence_holds_for_dims(sites in 4usize..=14) {
            let d = |l| Basis::blockaded(l, Boundary::Periodic).unwrap().dim();
            proptest::prop_assert_eq!(d(sites), d(sites - 1) + d(sites - 2));
        }

        #[test]
        fn fingerprints_separate_bases(a in 2usize..=10, b in 2usize..=10) {
            let fa = Basis::blockaded(a, Boundary::Periodic).unwrap().fingerprint();
            let fb = Basis::blockaded(b, Boundary::Periodic).unwrap().fingerprint();
            proptest::prop_assert_eq!(a == b, fa == fb);
        }
    }
}
