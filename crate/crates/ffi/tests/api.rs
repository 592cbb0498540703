use rabispec_ffi::*;
use std::ffi::CStr;
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { rabi_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
    assert_eq!(s.len(), n.min(255));
    s
}

fn points(h: *const RabiSpectrum) -> Vec<RabiPoint> {
    let mut len = 0usize;
    assert_eq!(unsafe { rabi_spectrum_len(h, &mut len) }, RabiStatus::Ok);
    (0..len)
        .map(|i| {
            let mut p = RabiPoint { x: 0.0, energy: 0.0, kind: RabiPointKind::Generic, multiplicity: 0, parity: 0 };
            assert_eq!(unsafe { rabi_spectrum_point(h, i, &mut p) }, RabiStatus::Ok);
            p
        })
        .collect()
}

#[test]
fn first_model_spectrum_matches_oracle() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rabi_spectrum_eps(0.7, 0.4, 0.0, 0.0, 3.0, &mut h) }, RabiStatus::Ok);
    let pts = points(h);
    let energies: Vec<f64> = pts.iter().flat_map(|p| std::iter::repeat_n(p.energy, p.multiplicity as usize)).collect();
    let mut oracle = vec![0.0; 8];
    assert_eq!(unsafe { rabi_oracle_eps(0.7, 0.4, 0.0, 120, 8, oracle.as_mut_ptr(), oracle.len()) }, RabiStatus::Ok);
    let inside: Vec<f64> = oracle.iter().copied().filter(|e| *e + 0.49 >= 0.0 && *e + 0.49 <= 3.0).collect();
    assert_eq!(energies.len(), inside.len());
    for (a, b) in energies.iter().zip(&inside) {
        assert!((a - b).abs() < 1e-6);
    }
    assert!(pts.iter().all(|p| p.parity == 1 || p.parity == -1 || p.multiplicity == 2));
    unsafe { rabi_spectrum_free(h) };
}

#[test]
fn second_model_parabola_point() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rabi_spectrum_nl(2.0, 1.46, 0.9, -2.0, 1.0, 2.0, &mut h) }, RabiStatus::Ok);
    let pts = points(h);
    let p = pts.iter().find(|p| (p.energy - 1.46).abs() < 1e-9).expect("E = 1.46");
    assert_eq!(p.kind, RabiPointKind::DoublyDegenerate);
    assert_eq!(p.multiplicity, 2);
    let mut n = usize::MAX;
    assert_eq!(unsafe { rabi_spectrum_diagnostic_count(h, &mut n) }, RabiStatus::Ok);
    assert_ne!(n, usize::MAX);
    unsafe { rabi_spectrum_free(h) };
}

#[test]
fn wronskians_change_sign_across_a_level() {
    let mut a = 0.0;
    let mut b = 0.0;
    // lowest level of the second model at (2, 1, 0.5, -2) lies in (-0.6, -0.4)
    let mut oracle = [0.0; 1];
    assert_eq!(unsafe { rabi_oracle_nl(2.0, 1.0, 0.5, -2.0, 80, 1, oracle.as_mut_ptr(), 1) }, RabiStatus::Ok);
    let e0 = oracle[0];
    assert_eq!(unsafe { rabi_wronskian_nl(e0 - 0.01, 2.0, 1.0, 0.5, -2.0, &mut a) }, RabiStatus::Ok);
    assert_eq!(unsafe { rabi_wronskian_nl(e0 + 0.01, 2.0, 1.0, 0.5, -2.0, &mut b) }, RabiStatus::Ok);
    assert!(a * b < 0.0, "{a} {b}");
    assert_eq!(unsafe { rabi_wronskian_eps(0.3, 0.4, 0.7, 0.2, &mut a) }, RabiStatus::Ok);
    assert!(a.is_finite());
}

#[test]
fn errors_are_reported() {
    assert_eq!(unsafe { rabi_spectrum_eps(0.5, 0.5, 0.0, 0.0, 1.0, ptr::null_mut()) }, RabiStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rabi_spectrum_eps(0.5, 0.5, 0.0, 2.0, 1.0, &mut h) }, RabiStatus::InvalidArgument);
    assert!(h.is_null());
    assert_eq!(unsafe { rabi_spectrum_nl(1.0, 1.0, 0.5, 3.0, 0.0, 1.0, &mut h) }, RabiStatus::ComputationFailed);
    assert!(!last_error().is_empty());
    let mut buf = [0.0; 2];
    assert_eq!(unsafe { rabi_oracle_eps(0.5, 0.5, 0.0, 10, 4, buf.as_mut_ptr(), 2) }, RabiStatus::BufferTooSmall);
    assert_eq!(unsafe { rabi_oracle_eps(0.5, 0.5, 0.0, 1, 1, buf.as_mut_ptr(), 2) }, RabiStatus::InvalidArgument);
    let mut w = 0.0;
    // integer exponent gap: the generic spectral function is undefined there
    assert_eq!(unsafe { rabi_wronskian_eps(1.2, 0.4, 0.7, 0.2, &mut w) }, RabiStatus::ComputationFailed);
    assert_eq!(unsafe { rabi_wronskian_eps(f64::NAN, 0.4, 0.7, 0.2, &mut w) }, RabiStatus::InvalidArgument);
    let mut p = RabiPoint { x: 0.0, energy: 0.0, kind: RabiPointKind::Generic, multiplicity: 0, parity: 0 };
    assert_eq!(unsafe { rabi_spectrum_point(ptr::null(), 0, &mut p) }, RabiStatus::NullPointer);
    assert_eq!(unsafe { rabi_spectrum_eps(0.5, 0.5, 0.0, 0.0, 1.0, &mut h) }, RabiStatus::Ok);
    assert_eq!(last_error(), "");
    assert_eq!(unsafe { rabi_spectrum_point(h, 999, &mut p) }, RabiStatus::InvalidArgument);
    unsafe { rabi_spectrum_free(h) };
    unsafe { rabi_spectrum_free(ptr::null_mut()) };
}

#[test]
fn truncated_error_message() {
    let mut h = ptr::null_mut();
    unsafe { rabi_spectrum_eps(0.5, 0.5, 0.0, 2.0, 1.0, &mut h) };
    let mut small = [1 as std::ffi::c_char; 4];
    let full = unsafe { rabi_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(full > 3);
    assert_eq!(small[3], 0);
    assert_eq!(unsafe { rabi_last_error_message(ptr::null_mut(), 0) }, full);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(rabi_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
