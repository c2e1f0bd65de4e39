//! Negative control: flipping the sign of the pressure term must be caught.

use std::process::Command;

#[test]
fn pressure_sign_fault_fails_the_dissipativity_check() {
    let o = Command::new(env!("CARGO_BIN_EXE_liens"))
        .args(["verify", "--level", "quick", "--inject-pressure-sign-fault"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.contains("pressure sign fault injected"));
    let line = text
        .lines()
        .find(|l| l.contains("criterion  3"))
        .unwrap_or_else(|| panic!("no criterion 3 line in\n{text}"));
    assert!(line.starts_with("[FAIL]"), "{line}");
}

#[test]
fn clean_run_passes_the_same_check() {
    let o = Command::new(env!("CARGO_BIN_EXE_liens"))
        .args(["verify", "--level", "quick"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find(|l| l.contains("criterion  3")).unwrap();
    assert!(line.starts_with("[PASS]"), "{line}");
}
