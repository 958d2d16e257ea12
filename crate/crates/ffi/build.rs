use std::env;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = dir.join("include").join("boolperc.h");
    std::fs::create_dir_all(header.parent().unwrap()).expect("create include directory");
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(
            cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("read cbindgen.toml"),
        )
        .generate()
        .expect("generate C header")
        .write_to_file(&header);
    println!("cargo:rerun-if-changed=src/");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
