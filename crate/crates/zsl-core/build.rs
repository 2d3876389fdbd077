fn main() {
    // The dense symmetric eigensolver binds to LAPACK's dsyevd. OpenBLAS ships
    // LAPACK symbols and is the default; override with e.g.
    // ZSL_LAPACK_LIB=lapack when only a reference LAPACK is installed.
    let lib = std::env::var("ZSL_LAPACK_LIB").unwrap_or_else(|_| "openblas".to_string());
    println!("cargo:rerun-if-env-changed=ZSL_LAPACK_LIB");
    println!("cargo:rustc-link-lib=dylib={lib}");
}
