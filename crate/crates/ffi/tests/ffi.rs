use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use harmonic_lattice::boxes::{dirichlet_extension, DirichletData};
use harmonic_lattice::halfspace::periodized_poisson_kernel;
use harmonic_lattice::lattice::BoxDomain;
use harmonic_lattice_ffi::*;

fn boundary_data(d: usize, n: usize) -> Vec<f64> {
    let domain = BoxDomain::new(d, n).unwrap();
    domain
        .boundary_vertices()
        .iter()
        .map(|x| x.iter().enumerate().map(|(i, &c)| ((i + 1) as f64 * c as f64).sin()).sum())
        .collect()
}

fn last_error() -> String {
    let p = hl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn dirichlet_handle_matches_library() {
    let (d, n) = (2, 5);
    let data = boundary_data(d, n);
    let mut m = 0usize;
    assert_eq!(unsafe { hl_boundary_vertex_count(d, n, &mut m) }, HlStatus::Ok);
    assert_eq!(m, data.len());

    let mut h: *mut HlBoxFunction = ptr::null_mut();
    let s = unsafe { hl_dirichlet_extension(d, n, data.as_ptr(), data.len(), &mut h) };
    assert_eq!(s, HlStatus::Ok);
    let len = unsafe { hl_box_function_len(h) };
    assert_eq!(len, 36);
    let mut values = vec![0.0; len];
    assert_eq!(unsafe { hl_box_function_values(h, values.as_mut_ptr(), len) }, HlStatus::Ok);

    let domain = BoxDomain::new(d, n).unwrap();
    let u = dirichlet_extension(&DirichletData::new(domain, data).unwrap()).unwrap();
    let expected: Vec<f64> = u.values().iter().copied().collect();
    assert_eq!(values, expected);

    let x = [3i64, 2];
    let mut v = 0.0;
    assert_eq!(unsafe { hl_box_function_value_at(h, x.as_ptr(), 2, &mut v) }, HlStatus::Ok);
    assert_eq!(v, values[3 * 6 + 2]);

    let mut r = HlGradientReport::default();
    assert_eq!(unsafe { hl_gradient_comparison(h, 2.0, &mut r) }, HlStatus::Ok);
    assert!((r.nor_over_tan - r.nor_norm / r.tan_norm).abs() < 1e-15);
    unsafe { hl_box_function_free(h) };
}

#[test]
fn neumann_rejects_incompatible_data() {
    let mut m = 0usize;
    assert_eq!(unsafe { hl_normal_edge_count(2, 4, &mut m) }, HlStatus::Ok);
    assert_eq!(m, 12);
    let g = vec![1.0; m];
    let mut h: *mut HlBoxFunction = ptr::null_mut();
    let s = unsafe { hl_neumann_extension(2, 4, g.as_ptr(), m, &mut h) };
    assert_eq!(s, HlStatus::Incompatible);
    assert!(h.is_null());
    assert!(last_error().contains("sums to"));

    let g: Vec<f64> = (0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    assert_eq!(unsafe { hl_neumann_extension(2, 4, g.as_ptr(), m, &mut h) }, HlStatus::Ok);
    let mut r = HlGradientReport::default();
    assert_eq!(unsafe { hl_gradient_comparison(h, f64::INFINITY, &mut r) }, HlStatus::Ok);
    assert!((r.nor_norm - 1.0).abs() < 1e-12);
    unsafe { hl_box_function_free(h) };
}

#[test]
fn error_codes() {
    let mut h: *mut HlBoxFunction = ptr::null_mut();
    let data = [0.0; 3];
    assert_eq!(
        unsafe { hl_dirichlet_extension(2, 4, data.as_ptr(), 3, &mut h) },
        HlStatus::ShapeMismatch
    );
    assert_eq!(
        unsafe { hl_dirichlet_extension(2, 4, ptr::null(), 16, &mut h) },
        HlStatus::NullPointer
    );
    assert_eq!(
        unsafe { hl_dirichlet_extension(2, 1, data.as_ptr(), 3, &mut h) },
        HlStatus::InvalidArgument
    );
    assert_eq!(unsafe { hl_box_function_len(ptr::null()) }, 0);
    unsafe { hl_box_function_free(ptr::null_mut()) };

    let good = boundary_data(2, 3);
    assert_eq!(
        unsafe { hl_dirichlet_extension(2, 3, good.as_ptr(), good.len(), &mut h) },
        HlStatus::Ok
    );
    let x = [5i64, 0];
    let mut v = 0.0;
    assert_eq!(
        unsafe { hl_box_function_value_at(h, x.as_ptr(), 2, &mut v) },
        HlStatus::OutOfDomain
    );
    let mut r = HlGradientReport::default();
    assert_eq!(unsafe { hl_gradient_comparison(h, 0.5, &mut r) }, HlStatus::InvalidArgument);
    unsafe { hl_box_function_free(h) };
}

#[test]
fn kernel_matches_library() {
    let mut out = vec![0.0; 32];
    assert_eq!(
        unsafe { hl_periodized_poisson_kernel(3, 2, 16, out.as_mut_ptr(), 32) },
        HlStatus::Ok
    );
    let expected: Vec<f64> = periodized_poisson_kernel(3, 2, 16).unwrap().iter().copied().collect();
    assert_eq!(out, expected);
    assert_eq!(
        unsafe { hl_periodized_poisson_kernel(3, 2, 16, out.as_mut_ptr(), 31) },
        HlStatus::ShapeMismatch
    );
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_staticlib() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libharmonic_lattice_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let bin = std::env::temp_dir().join(format!("hl_smoke_{}", std::process::id()));
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    let _ = std::fs::remove_file(&bin);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
