#![no_main]

use auction_core::model::validate_instance;
use auction_core::workload::{parse_trace, TracePriceModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(inst) = parse_trace(text, &TracePriceModel::default()) {
        // accepted rows always make a valid instance
        assert!(validate_instance(&inst).is_empty());
    }
});
