fn main() {
    // System OpenBLAS bundles BLAS, CBLAS, and LAPACK; ndarray-linalg is
    // used without a -src backend so this is the only linear-algebra link.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
