use std::ffi::{CStr, CString};
use std::ptr;

use mds53_ffi::*;

fn canonical() -> *mut Mds53Code {
    let mut code = ptr::null_mut();
    assert_eq!(unsafe { mds53_code_new_canonical(&mut code) }, Mds53Status::Ok);
    assert!(!code.is_null());
    code
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mds53_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_roundtrip_and_repair() {
    let code = canonical();
    let message = [1u8, 2, 3, 0, 2, 2];
    let mut cw = [0u8; 10];
    assert_eq!(unsafe { mds53_encode_scalars(code, message.as_ptr(), cw.as_mut_ptr()) }, Mds53Status::Ok);
    assert_eq!(&cw[..6], &message);

    // decode from nodes 5, 2, 4 given in that order
    let nodes = [5u8, 2, 4];
    let segs: Vec<u8> = nodes.iter().flat_map(|&n| cw[(n as usize - 1) * 2..][..2].to_vec()).collect();
    let mut out = [0u8; 6];
    assert_eq!(unsafe { mds53_decode_scalars(code, nodes.as_ptr(), segs.as_ptr(), out.as_mut_ptr()) }, Mds53Status::Ok);
    assert_eq!(out, message);

    for failed in 1..=5u8 {
        let mut plan = ptr::null_mut();
        assert_eq!(unsafe { mds53_plan_new(code, failed, &mut plan) }, Mds53Status::Ok);
        let mut helpers = [0u8; 4];
        assert_eq!(unsafe { mds53_plan_helpers(plan, helpers.as_mut_ptr()) }, Mds53Status::Ok);
        let mut downloads = [0u8; 4];
        for (d, &h) in downloads.iter_mut().zip(&helpers) {
            let mut v = [0u8; 2];
            assert_eq!(unsafe { mds53_plan_download_vector(plan, h, v.as_mut_ptr()) }, Mds53Status::Ok);
            let seg = &cw[(h as usize - 1) * 2..][..2];
            *d = gf4_dot(v, [seg[0], seg[1]]);
        }
        let mut seg = [0u8; 2];
        assert_eq!(unsafe { mds53_plan_execute_scalars(plan, downloads.as_ptr(), seg.as_mut_ptr()) }, Mds53Status::Ok);
        assert_eq!(&seg, &cw[(failed as usize - 1) * 2..][..2]);
        let mut v = [0u8; 2];
        assert_eq!(unsafe { mds53_plan_download_vector(plan, failed, v.as_mut_ptr()) }, Mds53Status::InvalidArgument);
        unsafe { mds53_plan_free(plan) };
    }
    unsafe { mds53_code_free(code) };
}

fn gf4_dot(a: [u8; 2], b: [u8; 2]) -> u8 {
    const MUL: [[u8; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
    MUL[a[0] as usize][b[0] as usize] ^ MUL[a[1] as usize][b[1] as usize]
}

#[test]
fn block_repair_through_helpers() {
    let code = canonical();
    let ss = 33;
    let message: Vec<u8> = (0..6 * ss).map(|i| (i * 37 + 11) as u8).collect();
    let mut cw = vec![0u8; 10 * ss];
    assert_eq!(unsafe { mds53_encode_blocks(code, message.as_ptr(), ss, cw.as_mut_ptr()) }, Mds53Status::Ok);
    assert_eq!(&cw[..6 * ss], &message[..]);

    let nodes = [1u8, 4, 5];
    let segs: Vec<u8> = nodes.iter().flat_map(|&n| cw[(n as usize - 1) * 2 * ss..][..2 * ss].to_vec()).collect();
    let mut out = vec![0u8; 6 * ss];
    assert_eq!(
        unsafe { mds53_decode_blocks(code, nodes.as_ptr(), segs.as_ptr(), ss, out.as_mut_ptr()) },
        Mds53Status::Ok
    );
    assert_eq!(out, message);

    for failed in 1..=5u8 {
        let mut plan = ptr::null_mut();
        assert_eq!(unsafe { mds53_plan_new(code, failed, &mut plan) }, Mds53Status::Ok);
        let mut helpers = [0u8; 4];
        unsafe { mds53_plan_helpers(plan, helpers.as_mut_ptr()) };
        let mut downloads = vec![0u8; 4 * ss];
        for (k, &h) in helpers.iter().enumerate() {
            let seg = &cw[(h as usize - 1) * 2 * ss..][..2 * ss];
            let status = unsafe { mds53_plan_helper_symbol_blocks(plan, h, seg.as_ptr(), ss, downloads[k * ss..].as_mut_ptr()) };
            assert_eq!(status, Mds53Status::Ok);
        }
        let mut rebuilt = vec![0u8; 2 * ss];
        assert_eq!(
            unsafe { mds53_plan_execute_blocks(plan, downloads.as_ptr(), ss, rebuilt.as_mut_ptr()) },
            Mds53Status::Ok
        );
        assert_eq!(&rebuilt[..], &cw[(failed as usize - 1) * 2 * ss..][..2 * ss]);
        unsafe { mds53_plan_free(plan) };
    }
    unsafe { mds53_code_free(code) };
}

#[test]
fn errors_are_reported() {
    let mut code = ptr::null_mut();
    assert_eq!(unsafe { mds53_code_new_canonical(ptr::null_mut()) }, Mds53Status::NullPointer);
    let bad = CString::new("q=4;lambda=1;mu=3;theta=3;eta=2").unwrap();
    assert_eq!(unsafe { mds53_code_from_params(bad.as_ptr(), &mut code) }, Mds53Status::InvalidParams);
    assert!(last_error().contains("6a"), "{}", last_error());
    assert!(code.is_null());
    let junk = CString::new("lambda").unwrap();
    assert_eq!(unsafe { mds53_code_from_params(junk.as_ptr(), &mut code) }, Mds53Status::InvalidParams);

    let good = CString::new("q=4;lambda=3;mu=2;theta=2;eta=3").unwrap();
    assert_eq!(unsafe { mds53_code_from_params(good.as_ptr(), &mut code) }, Mds53Status::Ok);
    assert_eq!(last_error(), "");

    let mut needed = 0usize;
    let mut small = [0 as std::ffi::c_char; 4];
    assert_eq!(
        unsafe { mds53_code_params(code, small.as_mut_ptr(), small.len(), &mut needed) },
        Mds53Status::BufferTooSmall
    );
    let mut buf = vec![0 as std::ffi::c_char; needed];
    assert_eq!(unsafe { mds53_code_params(code, buf.as_mut_ptr(), buf.len(), ptr::null_mut()) }, Mds53Status::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(text, "q=4;poly=0x7;lambda=3;mu=2;theta=2;eta=3");

    let mut cw = [0u8; 10];
    let out_of_field = [0u8, 0, 0, 0, 0, 4];
    assert_eq!(unsafe { mds53_encode_scalars(code, out_of_field.as_ptr(), cw.as_mut_ptr()) }, Mds53Status::InvalidParams);
    assert_eq!(unsafe { mds53_encode_scalars(code, ptr::null(), cw.as_mut_ptr()) }, Mds53Status::NullPointer);
    let dup = [1u8, 1, 2];
    let mut m = [0u8; 6];
    assert_eq!(unsafe { mds53_decode_scalars(code, dup.as_ptr(), cw.as_ptr(), m.as_mut_ptr()) }, Mds53Status::InvalidArgument);
    assert_eq!(unsafe { mds53_encode_blocks(code, cw.as_ptr(), 0, cw.as_mut_ptr()) }, Mds53Status::InvalidArgument);

    let mut plan = ptr::null_mut();
    assert_eq!(unsafe { mds53_plan_new(code, 6, &mut plan) }, Mds53Status::InvalidArgument);
    assert_eq!(unsafe { mds53_plan_new(ptr::null(), 1, &mut plan) }, Mds53Status::NullPointer);
    unsafe { mds53_code_free(code) };
    unsafe { mds53_code_free(ptr::null_mut()) };
    unsafe { mds53_plan_free(ptr::null_mut()) };
}

#[test]
fn gf8_code_rejects_blocks() {
    let mut code = ptr::null_mut();
    let p = CString::new("q=8;lambda=2;mu=3;theta=3;eta=2").unwrap();
    assert_eq!(unsafe { mds53_code_from_params(p.as_ptr(), &mut code) }, Mds53Status::Ok);
    let msg = [7u8, 6, 5, 4, 3, 2];
    let mut cw = [0u8; 10];
    assert_eq!(unsafe { mds53_encode_scalars(code, msg.as_ptr(), cw.as_mut_ptr()) }, Mds53Status::Ok);
    let mut big = [0u8; 60];
    assert_eq!(unsafe { mds53_encode_blocks(code, big.as_ptr(), 6, big.as_mut_ptr()) }, Mds53Status::InvalidArgument);
    unsafe { mds53_code_free(code) };
}

#[test]
fn cluster_lifecycle() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.bin");
    let data: Vec<u8> = (0..10_000u32).map(|i| (i % 251) as u8).collect();
    std::fs::write(&input, &data).unwrap();
    let dir = tmp.path().join("cluster");
    let (c_in, c_dir) = (
        CString::new(input.to_str().unwrap()).unwrap(),
        CString::new(dir.to_str().unwrap()).unwrap(),
    );
    let code = canonical();
    assert_eq!(unsafe { mds53_cluster_encode_file(code, c_in.as_ptr(), c_dir.as_ptr(), 64) }, Mds53Status::Ok);
    unsafe { mds53_code_free(code) };

    assert_eq!(unsafe { mds53_cluster_fail(c_dir.as_ptr(), 2) }, Mds53Status::Ok);
    let mut traffic = 0u64;
    assert_eq!(unsafe { mds53_cluster_repair(c_dir.as_ptr(), 2, &mut traffic) }, Mds53Status::Ok);
    let stripes = (10_000u64 + 8).div_ceil(6 * 64);
    assert_eq!(traffic, 4 * 64 * stripes);

    assert_eq!(unsafe { mds53_cluster_fail(c_dir.as_ptr(), 1) }, Mds53Status::Ok);
    assert_eq!(unsafe { mds53_cluster_fail(c_dir.as_ptr(), 3) }, Mds53Status::Ok);
    assert_eq!(unsafe { mds53_cluster_repair(c_dir.as_ptr(), 1, ptr::null_mut()) }, Mds53Status::Store);
    let out = CString::new(tmp.path().join("out.bin").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { mds53_cluster_reconstruct(c_dir.as_ptr(), out.as_ptr()) }, Mds53Status::Ok);
    assert_eq!(std::fs::read(tmp.path().join("out.bin")).unwrap(), data);

    let missing = CString::new(tmp.path().join("nope").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { mds53_cluster_reconstruct(missing.as_ptr(), out.as_ptr()) }, Mds53Status::Io);
}
