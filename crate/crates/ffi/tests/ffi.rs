use std::ffi::{CStr, CString};
use std::ptr;

use spectral_surgery_ffi::*;

fn last_error() -> String {
    let p = ss_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn square(n: usize, h: f64) -> *mut SsDomain {
    // n x n block inside an (n + 2) window
    let w = n + 2;
    let mut cells = vec![0u8; w * w];
    for j in 1..=n {
        for i in 1..=n {
            cells[j * w + i] = 1;
        }
    }
    let mut d = ptr::null_mut();
    let st = unsafe { ss_domain_from_cells(w, w, h, 0.0, 0.0, cells.as_ptr(), &mut d) };
    assert_eq!(st, SsStatus::Ok);
    d
}

#[test]
fn handles_report_geometry() {
    let d = square(8, 0.125);
    let (mut count, mut m, mut p) = (0usize, 0.0, 0.0);
    unsafe {
        assert_eq!(ss_domain_cell_count(d, &mut count), SsStatus::Ok);
        assert_eq!(ss_domain_measure(d, &mut m), SsStatus::Ok);
        assert_eq!(ss_domain_perimeter(d, &mut p), SsStatus::Ok);
    }
    assert_eq!(count, 64);
    assert_eq!(m, 1.0);
    assert_eq!(p, 4.0);

    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(ss_domain_rescale(d, 2.0, &mut r), SsStatus::Ok);
        assert_eq!(ss_domain_measure(r, &mut m), SsStatus::Ok);
        ss_domain_free(r);
        ss_domain_free(d);
    }
    assert_eq!(m, 4.0);
}

#[test]
fn eigenvalues_and_torsion_of_a_small_square() {
    let n = 8;
    let h = 1.0 / n as f64;
    let d = square(n, h);
    let mut vals = [0.0; 2];
    let (mut wmax, mut wint) = (0.0, 0.0);
    unsafe {
        assert_eq!(ss_eigenvalues(d, 2, vals.as_mut_ptr()), SsStatus::Ok);
        assert_eq!(ss_torsion(d, 0.0, &mut wmax, &mut wint), SsStatus::Ok);
        ss_domain_free(d);
    }
    // product of two path-graph spectra: 2 * 4 sin^2(pi / (2 (n + 1))) / h^2
    let s = (std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
    let exact = 8.0 * s * s / (h * h);
    assert!(
        (vals[0] - exact).abs() <= 1e-8 * exact,
        "{} vs {exact}",
        vals[0]
    );
    assert!(vals[1] > vals[0]);
    assert!(wmax > 0.0 && wint > 0.0 && wint < wmax);
}

#[test]
fn errors_set_status_and_message() {
    let mut d = ptr::null_mut();
    let st = unsafe { ss_domain_from_cells(4, 4, 0.5, 0.0, 0.0, ptr::null(), &mut d) };
    assert_eq!(st, SsStatus::NullPointer);
    assert!(last_error().contains("cells"));

    let mut count = 0usize;
    assert_eq!(
        unsafe { ss_domain_cell_count(ptr::null(), &mut count) },
        SsStatus::NullPointer
    );

    let bad = CString::new("{\"id\":\"x\",\"generator\":\"ball\"}").unwrap();
    assert_eq!(
        unsafe { ss_domain_generate(bad.as_ptr(), &mut d) },
        SsStatus::Parse
    );

    let thin = CString::new(
        r#"{"id":"x","generator":"dumbbell","left_radius":0.3,"right_radius":0.3,"neck_width":0.001,"neck_length":0.5,"h":0.01,"seed":1}"#,
    )
    .unwrap();
    assert_eq!(
        unsafe { ss_domain_generate(thin.as_ptr(), &mut d) },
        SsStatus::InvalidArgument
    );
    assert!(last_error().contains("neck width"), "{}", last_error());

    let sq = square(4, 0.25);
    let mut vals = [0.0; 20];
    assert_eq!(
        unsafe { ss_eigenvalues(sq, 20, vals.as_mut_ptr()) },
        SsStatus::InvalidArgument
    );
    unsafe { ss_domain_free(sq) };
}

#[test]
fn generated_ball_survives_surgery_unchanged() {
    let spec =
        CString::new(r#"{"id":"b","generator":"ball","radius":0.5,"h":0.03125,"seed":1}"#).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { ss_domain_generate(spec.as_ptr(), &mut d) },
        SsStatus::Ok
    );
    let mut out = ptr::null_mut();
    let mut json = ptr::null_mut();
    let mut verdict = SsVerdict::Fail;
    let st = unsafe { ss_strip_surgery(d, 100.0, 1, 0.0, 1.0, &mut out, &mut json, &mut verdict) };
    assert_eq!(st, SsStatus::Ok, "{}", last_error());
    assert_eq!(verdict, SsVerdict::NoOp);
    let report = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(report.contains("\"verdict\":\"no_op\""), "{report}");
    let (mut a, mut b) = (0usize, 0usize);
    unsafe {
        ss_domain_cell_count(d, &mut a);
        ss_domain_cell_count(out, &mut b);
        ss_string_free(json);
        ss_domain_free(out);
    }
    assert_eq!(a, b);

    let st =
        unsafe { ss_bounded_surgery(d, 100.0, 1, 1.0, &mut out, ptr::null_mut(), &mut verdict) };
    assert_eq!(st, SsStatus::Ok, "{}", last_error());
    assert_ne!(verdict, SsVerdict::Fail);
    unsafe {
        ss_domain_free(out);
        ss_domain_free(d);
    }
}

#[test]
fn save_and_load_round_trip() {
    let dir = std::env::temp_dir().join(format!("ss-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = CString::new(dir.join("sq.pbm").to_str().unwrap()).unwrap();
    let d = square(5, 0.2);
    let mut back = ptr::null_mut();
    unsafe {
        assert_eq!(ss_domain_save(d, path.as_ptr()), SsStatus::Ok);
        assert_eq!(ss_domain_load(path.as_ptr(), &mut back), SsStatus::Ok);
    }
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        ss_domain_perimeter(d, &mut a);
        ss_domain_perimeter(back, &mut b);
        ss_domain_free(d);
        ss_domain_free(back);
    }
    assert_eq!(a, b);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn header_declares_the_interface() {
    let h = include_str!("../include/spectral_surgery.h");
    for name in [
        "ss_domain_from_cells",
        "ss_strip_surgery",
        "ss_last_error",
        "SS_STATUS_OK",
        "typedef struct SsDomain SsDomain",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
