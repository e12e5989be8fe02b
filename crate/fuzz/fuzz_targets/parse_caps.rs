#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(caps) = ecp_core::io::parse_caps(s) {
            assert!(caps.iter().all(|&(n, m)| n >= 1 && m >= 1));
        }
    }
});
