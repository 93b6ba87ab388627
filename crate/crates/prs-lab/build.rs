use std::process::Command;

fn main() {
    // embed the current revision for report provenance; falls back to
    // "unknown" outside a git checkout
    let rev = Command::new("git")
        .args(["rev-parse", "--short", "HEAD"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .and_then(|out| String::from_utf8(out.stdout).ok())
        .map(|s| s.trim().to_string());
    if let Some(rev) = rev {
        println!("cargo:rustc-env=PRS_LAB_REV={rev}");
    }
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
