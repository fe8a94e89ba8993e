use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use chainsynth_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(chainsynth_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn example() -> *mut ChainsynthController {
    let mut h = ptr::null_mut();
    let status = unsafe {
        chainsynth_synthesize(
            3,
            c("1").as_ptr(),
            c("-45").as_ptr(),
            c("1").as_ptr(),
            ptr::null(),
            &mut h,
        )
    };
    assert_eq!(status, ChainsynthStatus::Ok);
    h
}

#[test]
fn evaluates_the_example() {
    let h = example();
    unsafe {
        assert_eq!(chainsynth_controller_dimension(h), 3);
        let x = [0.0, 0.0, 1.0];
        let mut theta = 0.0;
        assert_eq!(
            chainsynth_theta(h, x.as_ptr(), 3, &mut theta),
            ChainsynthStatus::Ok
        );
        assert!((theta - 6150f64.powf(1.0 / 6.0)).abs() < 1e-13 * theta);
        assert!(last_error().is_empty());

        let x1 = 11.0 / 41.0;
        let x = [x1, -41.0 * x1 * x1 / 121.0, 0.0];
        let mut u = 0.0;
        assert_eq!(
            chainsynth_control(h, x.as_ptr(), 3, &mut u),
            ChainsynthStatus::Ok
        );
        assert!((u + 1.0).abs() < 1e-12);
        let mut t = 0.0;
        assert_eq!(
            chainsynth_time_of_motion(h, x.as_ptr(), 3, 0.0, 0.0, &mut t),
            ChainsynthStatus::Ok
        );
        assert!((t - 1.0).abs() < 1e-4);
        chainsynth_controller_free(h);
    }
}

#[test]
fn json_round_trip() {
    let h = example();
    unsafe {
        let mut text: *mut c_char = ptr::null_mut();
        assert_eq!(
            chainsynth_controller_to_json(h, &mut text),
            ChainsynthStatus::Ok
        );
        let mut back = ptr::null_mut();
        assert_eq!(
            chainsynth_controller_from_json(text, &mut back),
            ChainsynthStatus::Ok
        );
        let mut again: *mut c_char = ptr::null_mut();
        assert_eq!(
            chainsynth_controller_to_json(back, &mut again),
            ChainsynthStatus::Ok
        );
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(again));
        chainsynth_string_free(text);
        chainsynth_string_free(again);
        chainsynth_controller_free(back);
        chainsynth_controller_free(h);

        let mut none = ptr::null_mut();
        assert_eq!(
            chainsynth_controller_from_json(c("{}").as_ptr(), &mut none),
            ChainsynthStatus::InvalidArgument
        );
        assert!(none.is_null());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        let s = chainsynth_synthesize(
            3,
            c("1").as_ptr(),
            c("0").as_ptr(),
            ptr::null(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(s, ChainsynthStatus::ValidationFailed);
        assert!(h.is_null());
        assert!(last_error().contains("corner-threshold"));

        let s = chainsynth_synthesize(
            3,
            c("abc").as_ptr(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(s, ChainsynthStatus::InvalidArgument);
        let s = chainsynth_synthesize(
            3,
            ptr::null(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(s, ChainsynthStatus::NullPointer);
        let s = chainsynth_synthesize(
            3,
            c("1").as_ptr(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            ptr::null_mut(),
        );
        assert_eq!(s, ChainsynthStatus::NullPointer);

        let mut theta = 0.0;
        assert_eq!(
            chainsynth_theta(ptr::null(), [1.0].as_ptr(), 1, &mut theta),
            ChainsynthStatus::NullPointer
        );
        let h = example();
        assert_eq!(
            chainsynth_theta(h, [1.0, 2.0].as_ptr(), 2, &mut theta),
            ChainsynthStatus::InvalidArgument
        );
        assert_eq!(
            chainsynth_theta(h, [1.0, f64::NAN, 0.0].as_ptr(), 3, &mut theta),
            ChainsynthStatus::InvalidArgument
        );
        assert_eq!(chainsynth_controller_dimension(ptr::null()), 0);
        chainsynth_controller_free(h);
        chainsynth_controller_free(ptr::null_mut());
        chainsynth_string_free(ptr::null_mut());
    }
}

#[test]
fn xi0_strings() {
    for (n, want) in [(2, "1/3"), (5, "7/15"), (7, "27/56")] {
        let mut out: *mut c_char = ptr::null_mut();
        unsafe {
            assert_eq!(chainsynth_xi0(n, &mut out), ChainsynthStatus::Ok);
            assert_eq!(CStr::from_ptr(out).to_str().unwrap(), want);
            chainsynth_string_free(out);
        }
    }
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { chainsynth_xi0(1, &mut out) },
        ChainsynthStatus::InvalidArgument
    );
}

/// Compiles the C smoke program against the generated header and the
/// shared library from this build, then runs it.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = lib_dir.join(format!(
        "{}chainsynth_ffi{}",
        std::env::consts::DLL_PREFIX,
        std::env::consts::DLL_SUFFIX
    ));
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: no C compiler or shared library at {}",
            lib.display()
        );
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("chainsynth_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lchainsynth_ffi")
        .arg("-lm")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
