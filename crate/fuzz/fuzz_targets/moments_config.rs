#![no_main]

use fdpu_cli::commands::moments::MomentsConfig;
use fdpu_cli::config::RawConfig;
use libfuzzer_sys::fuzz_target;
use std::path::PathBuf;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice(data) else {
        return;
    };
    let raw = RawConfig {
        value,
        base: PathBuf::from("/nonexistent"),
    };
    if let Ok(cfg) = raw.parse::<MomentsConfig>() {
        let _ = cfg.validate();
    }
});
