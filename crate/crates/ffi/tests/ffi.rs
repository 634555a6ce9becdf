use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hyperpath_ffi::*;

fn message() -> String {
    unsafe { CStr::from_ptr(hp_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn instance(n: u32, f: &[u32], s: &[u32], t: &[u32]) -> (HpStatus, *mut HpInstance) {
    let mut out = ptr::null_mut();
    let st = unsafe {
        hp_instance_new(
            n,
            f.as_ptr(),
            f.len(),
            s.as_ptr(),
            t.as_ptr(),
            s.len(),
            &mut out,
        )
    };
    (st, out)
}

#[test]
fn route_and_read_back() {
    let (st, inst) = instance(5, &[3, 12, 21], &[0, 24], &[1, 28]);
    assert_eq!(st, HpStatus::Ok);
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { hp_route(inst, 0, 0, &mut res) }, HpStatus::Ok);
    unsafe {
        assert!(hp_result_verified(res));
        assert_eq!(hp_result_path_count(res), 2);
        let mut labels = Vec::new();
        let mut lens = Vec::new();
        for i in 0..2 {
            let len = hp_result_path_len(res, i);
            let mut buf = vec![0u32; len];
            assert_eq!(hp_result_path(res, i, buf.as_mut_ptr(), len), len);
            lens.push(len);
            labels.extend(buf);
        }
        assert_eq!(labels.len(), hp_result_coverage(res));
        assert!(hp_result_coverage(res) >= hp_result_bound(res));
        assert_eq!(
            hp_verify(inst, labels.as_ptr(), lens.as_ptr(), 2),
            HpStatus::Ok
        );

        labels.swap(0, 1);
        assert_eq!(
            hp_verify(inst, labels.as_ptr(), lens.as_ptr(), 2),
            HpStatus::Verify
        );
        assert!(!message().is_empty());

        let json = hp_result_to_json(res);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"verified\": true"));
        hp_string_free(json);
        hp_result_free(res);
        hp_instance_free(inst);
    }
}

#[test]
fn error_codes() {
    let (st, _) = instance(5, &[3, 5, 6, 9], &[0, 24], &[1, 16]);
    assert_eq!(st, HpStatus::Ok);
    let (_, inst) = instance(5, &[3, 5, 6, 9], &[0, 24], &[1, 16]);
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { hp_route(inst, 0, 0, &mut res) },
        HpStatus::Hypothesis
    );
    assert_eq!(message(), "precondition violated: f=4 exceeds 2n-2k-3=3");
    assert!(res.is_null());
    unsafe { hp_instance_free(inst) };

    let (st, _) = instance(3, &[], &[0], &[3]);
    assert_eq!(st, HpStatus::Parse);

    let json = CString::new(r#"{"n": 2, "k": 1, "faults": [], "sources": ["012"], "sinks": [1]}"#)
        .unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { hp_instance_from_json(json.as_ptr(), &mut out) },
        HpStatus::Parse
    );
    assert_eq!(
        unsafe { hp_instance_from_json(ptr::null(), &mut out) },
        HpStatus::NullArgument
    );
    assert_eq!(
        unsafe { hp_route(ptr::null(), 0, 0, &mut ptr::null_mut()) },
        HpStatus::NullArgument
    );
    let name = unsafe { CStr::from_ptr(hp_status_name(HpStatus::Budget)) };
    assert_eq!(name.to_str().unwrap(), "budget");
}

#[test]
fn json_round_trip() {
    let json = CString::new(
        r#"{"n": 4, "k": 2, "faults": ["1111"], "sources": ["0000", "0011"], "sinks": [1, 2]}"#,
    )
    .unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(
        unsafe { hp_instance_from_json(json.as_ptr(), &mut inst) },
        HpStatus::Ok
    );
    let text = unsafe { hp_instance_to_json(inst) };
    let mut again = ptr::null_mut();
    assert_eq!(
        unsafe { hp_instance_from_json(text, &mut again) },
        HpStatus::Ok
    );
    let text2 = unsafe { hp_instance_to_json(again) };
    unsafe {
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(text2));
        hp_string_free(text);
        hp_string_free(text2);
        hp_instance_free(inst);
        hp_instance_free(again);
    }
}

#[test]
fn c_program_links_against_header() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = target.join("libhyperpath_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let exe = tempfile_path("hyperpath_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
