#![no_main]

use auction_core::model::{emit_instance, parse_instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(inst) = parse_instance(text) {
        let again = parse_instance(&emit_instance(&inst)).expect("canonical form parses");
        assert_eq!(inst, again);
    }
});
