fn main() {
    // Dense symmetric eigensolves and matrix products go through the system
    // OpenBLAS (which bundles LAPACK). See src/lapack.rs for the bindings.
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
    println!("cargo:rustc-link-lib=dylib=openblas");
}
