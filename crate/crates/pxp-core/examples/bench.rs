use ndarray::Array2;
use pxp_core::linalg::*;
use pxp_core::hilbert::random_state;
use pxp_core::C64;
use std::time::Instant;

fn main() {
    for n in [1024usize, 2207] {
        let flat = random_state(n * n, 3);
        let m = Array2::from_shape_vec((n, n), flat.to_vec()).unwrap();
        let h = (&m + &adjoint(&m)).mapv(|z| z * C64::new(0.5, 0.0));
        let hr = h.mapv(|z| z.re);
        let t = Instant::now();
        let _ = eigh_real(&hr).unwrap();
        println!("dsyev n={n}: {:.1?}", t.elapsed());
        let t = Instant::now();
        let _ = eigh_complex(&h).unwrap();
        println!("zheev n={n}: {:.1?}", t.elapsed());
        let t = Instant::now();
        let _ = h.dot(&h);
        println!("zgemm n={n}: {:.1?}", t.elapsed());
    }
}
