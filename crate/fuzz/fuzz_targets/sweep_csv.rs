#![no_main]
use ecp_core::io::{sweep_from_csv, sweep_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(table) = sweep_from_csv(s) {
            let text = sweep_to_csv(&table, 0);
            let again = sweep_from_csv(&text).expect("re-encoded table decodes");
            assert_eq!(again.rows.len(), table.rows.len());
        }
    }
});
