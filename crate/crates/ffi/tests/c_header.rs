//! Compiles a C program against the generated header and static library.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libfractherm_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let bin = tmp.join("fractherm_smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());

    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let line = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[0], "17");

    let text = "alpha = 0.5\nlambda = 0.5\nT = 1\nK = 16\nN = 12\nconductivity = shifted_sine\nu0 = sinpi\n";
    let lib_rec = fractherm::run(
        fractherm::config::RunConfig::parse(text)
            .unwrap()
            .problem()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(fields[1].parse::<f64>().unwrap(), lib_rec.alpha0);
    assert_eq!(fields[2].parse::<f64>().unwrap(), lib_rec.l2_norms[16]);
}
