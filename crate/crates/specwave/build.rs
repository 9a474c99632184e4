// Link the system OpenBLAS (which bundles full LAPACK and CBLAS on this
// platform) for the LAPACK FFI declared by lapack-sys/cblas-sys. The
// directive propagates to every downstream binary and test target.
fn main() {
    println!("cargo:rustc-link-lib=dylib=openblas");
}
