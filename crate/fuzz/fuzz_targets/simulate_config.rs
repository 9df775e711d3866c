#![no_main]

use fdpu_core::sim::TableConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<TableConfig>(data) {
        let _ = cfg.validate();
    }
});
