#![no_main]

use fdpu_core::io::{decode_binary, encode_binary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = decode_binary(data) {
        assert_eq!(encode_binary(&m), data);
    }
});
