#![no_main]

use fdpu_cli::commands::two_sample::TwoSampleSettings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<TwoSampleSettings>(data) {
        let _ = cfg.validate();
    }
});
