use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use liens_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(liens_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn taylor_green(n: usize) -> *mut LiensField {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { liens_field_taylor_green_2d(n, 1.0, &mut f) }, LiensStatus::Ok);
    assert!(!f.is_null());
    f
}

fn energy(f: *const LiensField) -> f64 {
    let mut e = f64::NAN;
    assert_eq!(unsafe { liens_field_energy(f, &mut e) }, LiensStatus::Ok);
    e
}

#[test]
fn analytic_field_diagnostics() {
    let f = taylor_green(16);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((energy(f) - pi2).abs() <= 1e-12 * pi2);
    let (mut z, mut d) = (0.0, 1.0);
    unsafe {
        assert_eq!(liens_field_enstrophy(f, &mut z), LiensStatus::Ok);
        assert_eq!(liens_field_div_max(f, &mut d), LiensStatus::Ok);
        assert_eq!(liens_field_dim(f), 2);
        assert_eq!(liens_field_n(f), 16);
        liens_field_free(f);
    }
    assert!((z - 4.0 * pi2).abs() <= 1e-11 * pi2);
    assert!(d <= 1e-13);
}

#[test]
fn propagate_matches_exact_decay() {
    let f = taylor_green(16);
    let (nu, t) = (0.1, 1.0);
    let mut g = ptr::null_mut();
    let mut stats = LiensPropagateStats::default();
    let status = unsafe { liens_propagate(f, nu, t, 1e-12, 0, &mut g, &mut stats) };
    assert_eq!(status, LiensStatus::Ok, "{}", last_error());
    assert!(stats.steps >= 1 && stats.max_order >= 2 && stats.min_dt > 0.0);
    let expected = energy(f) * (-4.0 * nu * t).exp();
    assert!((energy(g) - expected).abs() <= 1e-9 * expected);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { liens_rk4(f, nu, t, 1e-3, &mut r) }, LiensStatus::Ok);
    assert!((energy(r) - expected).abs() <= 1e-9 * expected);
    unsafe {
        liens_field_free(f);
        liens_field_free(g);
        liens_field_free(r);
    }
}

#[test]
fn physical_round_trip_and_snapshot() {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { liens_field_random(3, 8, 7, 2, 1.0, &mut f) }, LiensStatus::Ok);
    let len = 3 * 8 * 8 * 8;
    let mut buf = vec![0.0; len];
    unsafe {
        assert_eq!(liens_field_copy_physical(f, buf.as_mut_ptr(), len - 1), LiensStatus::BufferTooSmall);
        assert!(last_error().contains("need"));
        assert_eq!(liens_field_copy_physical(f, buf.as_mut_ptr(), len), LiensStatus::Ok);
    }
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { liens_field_from_physical(3, 8, buf.as_ptr(), len, &mut g) },
        LiensStatus::Ok
    );
    assert!((energy(f) - energy(g)).abs() <= 1e-14 * energy(f));

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("f.bin").to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(liens_field_save(g, path.as_ptr()), LiensStatus::Ok);
        assert_eq!(liens_field_load(path.as_ptr(), &mut h), LiensStatus::Ok);
    }
    let mut back = vec![0.0; len];
    unsafe { liens_field_copy_physical(h, back.as_mut_ptr(), len) };
    // save goes through one more inverse transform, so agreement is to round-off
    let peak = buf.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let worst = buf.iter().zip(&back).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(worst <= 1e-14 * peak, "{worst}");
    unsafe {
        liens_field_free(f);
        liens_field_free(g);
        liens_field_free(h);
    }
}

#[test]
fn error_codes() {
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(liens_field_taylor_green_2d(10, 1.0, &mut f), LiensStatus::InvalidGrid);
        assert!(f.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(liens_field_taylor_green_2d(8, 1.0, ptr::null_mut()), LiensStatus::NullPointer);
        assert_eq!(liens_field_random(2, 16, 1, 9, 1.0, &mut f), LiensStatus::InvalidArgument);

        let mut e = 0.0;
        assert_eq!(liens_field_energy(ptr::null(), &mut e), LiensStatus::NullPointer);
        assert_eq!(liens_field_dim(ptr::null()), 0);

        let missing = CString::new("/nonexistent/liens.bin").unwrap();
        assert_eq!(liens_field_load(missing.as_ptr(), &mut f), LiensStatus::Io);

        let short = vec![0.0; 2 * 8 * 8 - 1];
        assert_eq!(
            liens_field_from_physical(2, 8, short.as_ptr(), short.len(), &mut f),
            LiensStatus::InvalidArgument
        );

        let tg = taylor_green(16);
        let mut g = ptr::null_mut();
        assert_eq!(liens_rk4(tg, 0.1, 1.0, 10.0, &mut g), LiensStatus::UnstableStep);
        assert_eq!(liens_propagate(tg, -1.0, 1.0, 1e-10, 0, &mut g, ptr::null_mut()), LiensStatus::InvalidArgument);
        assert!(g.is_null());
        liens_field_free(tg);

        let ok = taylor_green(8);
        assert!(last_error().is_empty());
        liens_field_free(ok);
        liens_field_free(ptr::null_mut());
    }
}

#[test]
fn non_solenoidal_input_is_rejected() {
    let n = 8;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut samples = vec![0.0; 2 * n * n];
    for j in 0..n {
        for i in 0..n {
            samples[j * n + i] = (i as f64 * h).sin();
        }
    }
    let mut f = ptr::null_mut();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(liens_field_from_physical(2, n, samples.as_ptr(), samples.len(), &mut f), LiensStatus::Ok);
        assert_eq!(liens_propagate(f, 0.1, 0.1, 1e-10, 0, &mut g, ptr::null_mut()), LiensStatus::NotSolenoidal);
        liens_field_free(f);
    }
}

#[test]
fn diffpoly_round_trip() {
    let text = CString::new("1/10*u_2 - u_0*u_1").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { liens_diffpoly_parse(text.as_ptr(), &mut f) }, LiensStatus::Ok);

    let mut a1 = ptr::null_mut();
    assert_eq!(unsafe { liens_diffpoly_a_power_u(f, 1, &mut a1) }, LiensStatus::Ok);
    let s = unsafe { liens_diffpoly_to_string(a1) };
    assert_eq!(unsafe { CStr::from_ptr(s) }.to_str().unwrap(), "1/10*u_2 - u_0*u_1");

    let mut neg = ptr::null_mut();
    assert_eq!(unsafe { liens_diffpoly_a_power_u(f, -1, &mut neg) }, LiensStatus::InvalidArgument);
    let garbage = CString::new("u_0 +* u_1").unwrap();
    assert_eq!(unsafe { liens_diffpoly_parse(garbage.as_ptr(), &mut neg) }, LiensStatus::Parse);
    assert!(neg.is_null());
    unsafe {
        assert!(liens_diffpoly_to_string(ptr::null()).is_null());
        liens_string_free(s);
        liens_diffpoly_free(a1);
        liens_diffpoly_free(f);
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/liens.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["liens_propagate", "liens_field_free", "LIENS_STATUS_OK", "liens_last_error"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"liens.h\"\nint main(void) { LiensField *f = 0; \
         return liens_field_taylor_green_2d(8, 1.0, &f) == LIENS_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = header.parent().unwrap();
    for (compiler, extra) in [("cc", &["-std=c99"][..]), ("c++", &["-x", "c++"][..])] {
        let status = Command::new(compiler)
            .args(extra)
            .arg("-fsyntax-only")
            .arg("-Wall")
            .arg("-Werror")
            .arg("-I")
            .arg(include)
            .arg(&src)
            .status()
            .unwrap_or_else(|e| panic!("{compiler} not runnable: {e}"));
        assert!(status.success(), "{compiler} rejected the header");
    }
}
