#![no_main]

use auction_core::model::{emit_schedule, parse_schedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(sched) = parse_schedule(text) {
        let again = parse_schedule(&emit_schedule(&sched)).expect("canonical form parses");
        assert_eq!(sched, again);
    }
});
