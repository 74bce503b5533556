use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use maxmean_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(maxmean_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn scalar_functions_match_the_core_crate() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(maxmean_quantile_inf(0.95, &mut v), MaxmeanStatus::Ok);
        assert!((v - maxmean::dist::quantile_inf(0.95).unwrap()).abs() == 0.0);
        assert_eq!(
            maxmean_upper_percentage_point(0.05, &mut v),
            MaxmeanStatus::Ok
        );
        assert!((v - 3.1534023932).abs() < 1e-9);
        assert_eq!(maxmean_moment(0, 1.0, &mut v), MaxmeanStatus::Ok);
        assert!((v - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
        assert_eq!(maxmean_min_capital(0.05, 1.0, &mut v), MaxmeanStatus::Ok);
        assert!((v - maxmean::ruin::min_capital(0.05, 1.0).unwrap()).abs() == 0.0);
        assert_eq!(maxmean_cdf_shifted_inf(2.0, 0.0, &mut v), MaxmeanStatus::Ok);
        assert!((v - maxmean::dist::cdf_inf(2.0)).abs() < 1e-15);
    }
}

#[test]
fn density_flags_the_branch_point() {
    let (mut v, mut flag) = (0.0, 0);
    unsafe {
        assert_eq!(maxmean_pdf_inf(1.0, &mut v, &mut flag), MaxmeanStatus::Ok);
        assert_eq!((v, flag), (2.0, 1));
        assert_eq!(
            maxmean_pdf_inf(2.0, &mut v, ptr::null_mut()),
            MaxmeanStatus::Ok
        );
        assert!(v > 0.0);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(maxmean_quantile_inf(1.5, &mut v), MaxmeanStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(
            maxmean_ruin_probability(-0.1, 1.0, &mut v),
            MaxmeanStatus::Solvency
        );
        assert_eq!(
            maxmean_cdf_inf(2.0, ptr::null_mut()),
            MaxmeanStatus::NullPointer
        );
        assert_eq!(
            maxmean_cdf_inf_series(ptr::null(), 2.0, &mut v),
            MaxmeanStatus::Domain
        );
        assert_eq!(maxmean_cdf_inf(2.0, &mut v), MaxmeanStatus::Ok);
        assert!(last_error().is_empty());
    }
}

#[test]
fn context_handle_lifecycle() {
    assert!(maxmean_context_new(-1.0, 10).is_null());
    let ctx = maxmean_context_new(1e-12, 1_000_000);
    assert!(!ctx.is_null());
    let mut v = 0.0;
    unsafe {
        assert_eq!(maxmean_cdf_inf_series(ctx, 3.0, &mut v), MaxmeanStatus::Ok);
        assert!((v - maxmean::dist::cdf_inf(3.0)).abs() < 1e-11);
        assert_eq!(maxmean_conjugate_t(ctx, 2.0, &mut v), MaxmeanStatus::Ok);
        assert!((v * (-v).exp() - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(maxmean_lambert_w0(ctx, 1.0, &mut v), MaxmeanStatus::Ok);
        assert!((v - 0.567_143_290_409_783_8).abs() < 1e-15);
        maxmean_context_free(ctx);
        maxmean_context_free(ptr::null_mut());
    }
}

#[test]
fn polynomial_handles() {
    unsafe {
        let a = maxmean_poly_closed_form(6);
        let b = maxmean_poly_by_recursion(6);
        assert_eq!(maxmean_poly_equal(a, b), 1);
        let c = maxmean_poly_recursion_step(b);
        assert_eq!(maxmean_poly_equal(a, c), 0);
        assert!(maxmean_poly_term_count(c) > maxmean_poly_term_count(b));
        let mut v = 0.0;
        assert_eq!(
            maxmean_poly_evaluate(a, 3.0, 0.0, &mut v),
            MaxmeanStatus::Ok
        );
        // at t = 0 only the (n+1)^(n-1) x^n / n! term survives
        let expected = 729.0 * 16807.0 / 720.0;
        assert!((v - expected).abs() < 1e-9 * expected);
        assert_eq!(
            maxmean_poly_evaluate(ptr::null(), 3.0, 0.0, &mut v),
            MaxmeanStatus::Domain
        );
        assert!(maxmean_poly_recursion_step(ptr::null()).is_null());
        for p in [a, b, c] {
            maxmean_poly_free(p);
        }
    }
}

#[test]
fn sampler_fills_the_buffer_deterministically() {
    let mut first = vec![u64::MAX; 1000];
    let mut second = vec![0; 1000];
    unsafe {
        assert_eq!(
            maxmean_genpoisson_sample(0.5, 1.0, 1000, 9, first.as_mut_ptr()),
            MaxmeanStatus::Ok
        );
        assert_eq!(
            maxmean_genpoisson_sample(0.5, 1.0, 1000, 9, second.as_mut_ptr()),
            MaxmeanStatus::Ok
        );
        assert_eq!(
            maxmean_genpoisson_sample(0.5, 1.0, 10, 9, ptr::null_mut()),
            MaxmeanStatus::NullPointer
        );
        let mut p = 0.0;
        assert_eq!(
            maxmean_genpoisson_pmf(0, 0.5, 1.0, &mut p),
            MaxmeanStatus::Ok
        );
        assert!((p - (-0.5f64).exp()).abs() < 1e-15);
    }
    assert_eq!(first, second);
    assert!(first.iter().all(|&k| k < 1000));
}

#[test]
fn generated_header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/maxmean.h")).unwrap();
    let source =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exported: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() > 20);
    for name in exported {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links_against_the_static_library() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libmaxmean_ffi.a");
    assert!(
        lib.exists(),
        "static library not found at {}",
        lib.display()
    );
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("maxmean_smoke");
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
