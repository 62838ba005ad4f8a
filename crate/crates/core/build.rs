fn main() {
    // The conic solver's semidefinite cone needs BLAS/LAPACK symbols; link
    // the system implementation instead of building one from source.
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
