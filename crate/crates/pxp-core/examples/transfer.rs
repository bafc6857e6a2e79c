//! Temporary exploration scratchpad (not part of the library surface).

use pxp_core::dynamics::{EvolveMethod, Propagator};
use pxp_core::hilbert::{Basis, Boundary};
use pxp_core::operators::pxp;
use pxp_core::C64;

fn main() {
    for l in [12usize, 16] {
        let basis = Basis::blockaded(l, Boundary::Periodic).unwrap();
        let h = pxp(&basis).unwrap();
        let z2 = basis.neel_state().unwrap();
        let z2p = basis.neel_prime_state().unwrap();
        let prop = Propagator::new(&h, EvolveMethod::Dense).unwrap();
        // Fine scans of |<Z2'|psi(t)>|^2 near the transfer and |<Z2|psi(t)>|^2 near the return.
        let scan = |target: &ndarray::Array1<C64>, lo: f64, hi: f64| -> (f64, f64) {
            let mut best = (0.0, 0.0);
            let n = 4000;
            for i in 0..=n {
                let t = lo + (hi - lo) * i as f64 / n as f64;
                let psi = prop.evolve(&z2, t).unwrap();
                let amp: C64 = target.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
                let f = amp.norm_sqr();
                if f > best.1 {
                    best = (t, f);
                }
            }
            best
        };
        let (t_x, f_x) = scan(&z2p, 1.5, 3.5);
        let (t_r, f_r) = scan(&z2, 3.5, 6.0);
        println!(
            "L={l}: transfer peak t = {t_x:.5} (F = {f_x:.4}), doubled = {:.5}; return peak t = {t_r:.5} (F = {f_r:.4})",
            2.0 * t_x
        );
    }
}
