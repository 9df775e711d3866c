#![no_main]

use fdpu_core::io::{format_csv_matrix, parse_csv_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = parse_csv_matrix(data) {
        assert_eq!(m.names.len(), m.data.ncols());
        assert!(m.data.iter().all(|v| v.is_finite()));
        if let Ok(bytes) = format_csv_matrix(&m) {
            if let Ok(again) = parse_csv_matrix(&bytes) {
                assert_eq!(again.data, m.data);
            }
        }
    }
});
