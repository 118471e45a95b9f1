fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let header = std::path::Path::new(&crate_dir).join("include").join("gkp_repeater.h");
    std::fs::create_dir_all(header.parent().expect("include dir")).expect("create include dir");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("GKP_REPEATER_H".to_owned()),
        cpp_compat: true,
        documentation: true,
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(crate_dir)
        .with_config(config)
        .generate()
        .expect("Unable to generate bindings")
        .write_to_file(header);

    println!("cargo:rerun-if-changed=src/lib.rs");
}
