use std::ffi::{c_char, CStr, CString};
use std::ptr;

use semiphi_ffi::*;

fn last_error() -> Option<String> {
    let p = semiphi_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

unsafe fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    semiphi_string_free(p);
    s
}

unsafe fn json(status: SemiphiStatus, p: *mut c_char) -> serde_json::Value {
    assert_eq!(status, SemiphiStatus::Ok, "{:?}", last_error());
    serde_json::from_str(&take_string(p)).unwrap()
}

unsafe fn generated(kind: SemiphiKind, dims: SemiphiDims, seed: u64) -> *mut SemiphiInstance {
    let mut inst = ptr::null_mut();
    let status = semiphi_instance_generate(kind, dims, seed, 2.0, &mut inst, ptr::null_mut());
    assert_eq!(status, SemiphiStatus::Ok, "{:?}", last_error());
    inst
}

const SMALL: SemiphiDims = SemiphiDims { p: 1, n: 2, d1: 2, d2: 2 };

#[test]
fn certify_phi_map() {
    unsafe {
        let inst = generated(SemiphiKind::PhiMap, SMALL, 3);
        let mut cert = ptr::null_mut();
        assert_eq!(semiphi_certify(inst, ptr::null(), &mut cert), SemiphiStatus::Ok);
        assert!(last_error().is_none());
        let mut verdict = SemiphiVerdict::Undecided;
        assert_eq!(semiphi_certificate_verdict(cert, &mut verdict), SemiphiStatus::Ok);
        assert_eq!(verdict, SemiphiVerdict::CompletelySemiPhi);
        let mut gram = f64::NAN;
        assert_eq!(semiphi_certificate_gram_min_eig(cert, &mut gram), SemiphiStatus::Ok);
        assert!(gram >= -1e-9);
        let mut iters = 0;
        assert_eq!(semiphi_certificate_iterations(cert, &mut iters), SemiphiStatus::Ok);
        assert!(iters > 0);
        let mut text = ptr::null_mut();
        let report = json(semiphi_certificate_to_json(cert, &mut text), text);
        assert_eq!(report["verdict"], "CompletelySemiPhi");
        semiphi_certificate_free(cert);
        semiphi_instance_free(inst);
    }
}

#[test]
fn adversarial_scalar_is_rejected_in_band() {
    unsafe {
        let inst = generated(SemiphiKind::Adversarial, SemiphiDims { p: 1, n: 1, d1: 1, d2: 1 }, 0);
        let mut cert = ptr::null_mut();
        assert_eq!(semiphi_certify(inst, ptr::null(), &mut cert), SemiphiStatus::Ok);
        let mut verdict = SemiphiVerdict::Undecided;
        semiphi_certificate_verdict(cert, &mut verdict);
        assert_eq!(verdict, SemiphiVerdict::NotSemiPhi);
        let mut gram = 0.0;
        semiphi_certificate_gram_min_eig(cert, &mut gram);
        assert!((gram + 3.0).abs() < 1e-12, "{gram}");
        semiphi_certificate_free(cert);
        semiphi_instance_free(inst);
    }
}

#[test]
fn options_reach_the_solver() {
    unsafe {
        let inst = generated(SemiphiKind::PhiMap, SemiphiDims { p: 2, n: 2, d1: 2, d2: 2 }, 1);
        let opts = SemiphiOptions { max_iter: 1, ..semiphi_options_default() };
        let mut cert = ptr::null_mut();
        assert_eq!(semiphi_certify(inst, &opts, &mut cert), SemiphiStatus::Ok);
        let mut verdict = SemiphiVerdict::CompletelySemiPhi;
        semiphi_certificate_verdict(cert, &mut verdict);
        assert_eq!(verdict, SemiphiVerdict::Undecided);
        semiphi_certificate_free(cert);

        let bad = SemiphiOptions { tol: -1.0, ..semiphi_options_default() };
        let mut out = ptr::null_mut();
        assert_eq!(semiphi_certify(inst, &bad, &mut out), SemiphiStatus::Parse);
        assert!(out.is_null());
        assert!(last_error().unwrap().contains("tol"));
        semiphi_instance_free(inst);
    }
}

#[test]
fn json_round_trip_preserves_instance() {
    unsafe {
        let inst = generated(SemiphiKind::PhiMap, SMALL, 4);
        let mut text = ptr::null_mut();
        assert_eq!(semiphi_instance_to_json(inst, &mut text), SemiphiStatus::Ok);
        let first = take_string(text);
        let c = CString::new(first.clone()).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(semiphi_instance_from_json(c.as_ptr(), &mut again), SemiphiStatus::Ok);
        let mut text = ptr::null_mut();
        semiphi_instance_to_json(again, &mut text);
        assert_eq!(take_string(text), first);
        let mut dims = SemiphiDims::default();
        assert_eq!(semiphi_instance_dims(again, &mut dims), SemiphiStatus::Ok);
        assert_eq!(dims, SMALL);
        semiphi_instance_free(again);
        semiphi_instance_free(inst);
    }
}

#[test]
fn reports_match_the_pipeline() {
    unsafe {
        let inst = generated(SemiphiKind::PhiMap, SMALL, 5);
        let mut p = ptr::null_mut();
        let d = json(semiphi_dilate(inst, ptr::null(), true, &mut p), p);
        assert_eq!(d["minimal"], serde_json::json!([true, true]));
        let e = json(semiphi_equiv(inst, ptr::null(), &mut p), p);
        assert_eq!(e["equivalent"], true);
        let c = json(semiphi_commutant(inst, ptr::null(), &mut p), p);
        assert_eq!(c["commutant_dim"], c["linking_commutant_dim"]);
        let u = json(semiphi_purity(inst, ptr::null(), &mut p), p);
        assert!(u["pure"].is_boolean());
        semiphi_instance_free(inst);
    }
}

#[test]
fn subordinate_with_parent() {
    unsafe {
        let dims = SemiphiDims { p: 2, n: 2, d1: 2, d2: 2 };
        let (mut sub, mut dom) = (ptr::null_mut(), ptr::null_mut());
        let status = semiphi_instance_generate(SemiphiKind::Subordinate, dims, 7, 2.0, &mut sub, &mut dom);
        assert_eq!(status, SemiphiStatus::Ok, "{:?}", last_error());
        let mut p = ptr::null_mut();
        assert_eq!(json(semiphi_order(sub, dom, ptr::null(), true, &mut p), p)["leq"], true);
        assert_eq!(json(semiphi_order(sub, dom, ptr::null(), false, &mut p), p)["leq"], false);
        let rn = json(semiphi_rn(sub, dom, ptr::null(), true, &mut p), p);
        assert!(rn["residuals"]["module_map"].as_f64().unwrap() <= 1e-6);
        semiphi_instance_free(sub);
        semiphi_instance_free(dom);

        let mut inst = ptr::null_mut();
        let mut parent = ptr::null_mut();
        let status = semiphi_instance_generate(SemiphiKind::PhiMap, dims, 7, 2.0, &mut inst, &mut parent);
        assert_eq!(status, SemiphiStatus::UnsupportedDims);
        assert!(inst.is_null() && parent.is_null());
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(semiphi_instance_from_json(ptr::null(), &mut inst), SemiphiStatus::NullArgument);
        assert_eq!(last_error().unwrap(), "json is NULL");

        let bad = CString::new("{\"schema_version\": \"1.0\",").unwrap();
        assert_eq!(semiphi_instance_from_json(bad.as_ptr(), &mut inst), SemiphiStatus::Parse);
        assert!(last_error().unwrap().contains("line"));
        assert!(inst.is_null());

        let invalid = [0xffu8 as c_char, 0];
        assert_eq!(semiphi_instance_from_json(invalid.as_ptr(), &mut inst), SemiphiStatus::InvalidUtf8);

        let missing = CString::new("/nonexistent/instance.json").unwrap();
        assert_eq!(semiphi_instance_read(missing.as_ptr(), &mut inst), SemiphiStatus::Io);

        let big = SemiphiDims { p: 9, n: 1, d1: 1, d2: 1 };
        let status = semiphi_instance_generate(SemiphiKind::PhiMap, big, 0, 2.0, &mut inst, ptr::null_mut());
        assert_eq!(status, SemiphiStatus::UnsupportedDims);

        let mut out = ptr::null_mut();
        assert_eq!(semiphi_dilate(ptr::null(), ptr::null(), false, &mut out), SemiphiStatus::NullArgument);
        assert_eq!(semiphi_certify(ptr::null(), ptr::null(), ptr::null_mut()), SemiphiStatus::NullArgument);

        let mut dims = SemiphiDims::default();
        let ok = generated(SemiphiKind::PhiMap, SMALL, 0);
        assert_eq!(semiphi_instance_dims(ok, &mut dims), SemiphiStatus::Ok);
        assert!(last_error().is_none(), "success clears the message");
        semiphi_instance_free(ok);
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        semiphi_instance_free(ptr::null_mut());
        semiphi_certificate_free(ptr::null_mut());
        semiphi_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(semiphi_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
