//! JSON run output: parsing never panics and accepted documents round-trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use twocenter::run::{from_json, to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(out) = from_json(text) else { return };
    let rendered = to_json(&out);
    let again = from_json(&rendered).expect("rendered JSON parses");
    assert_eq!(to_json(&again), rendered);
});
