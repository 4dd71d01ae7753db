#![no_main]

use auction_core::experiment::SweepConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        if let Ok(cfg) = SweepConfig::from_text(text) {
            assert!(cfg.check().is_ok());
        }
    }
});
