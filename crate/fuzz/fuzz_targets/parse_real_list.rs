#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(v) = ecp_core::io::parse_real_list(s) {
            assert!(!v.is_empty());
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }
});
