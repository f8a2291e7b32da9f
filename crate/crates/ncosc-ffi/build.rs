use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen generates the header");

    let out_header = PathBuf::from(env::var("OUT_DIR").expect("out dir")).join("ncosc.h");
    bindings.write_to_file(&out_header);
    // keep the in-tree copy current for consumers that vendor the header
    bindings.write_to_file(crate_dir.join("include/ncosc.h"));
}
