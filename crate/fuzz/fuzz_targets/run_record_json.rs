#![no_main]
use ecp_core::io::RunRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(rec) = RunRecord::from_json(s) {
            // Anything accepted must survive a re-encode.
            let again = RunRecord::from_json(&rec.to_json()).expect("re-encoded record decodes");
            assert_eq!(again.coeffs2.len(), rec.coeffs2.len());
            let _ = rec.to_csv();
            let _ = rec.to_text();
        }
    }
});
