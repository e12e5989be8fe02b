#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(kind) = ecp_core::io::parse_protocol(s) {
            assert_eq!(ecp_core::io::parse_protocol(kind.name()).unwrap(), kind);
        }
    }
});
