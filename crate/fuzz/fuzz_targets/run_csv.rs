//! CSV run output: parsing never panics, and rendering is a fixed point of
//! parse-then-render.

#![no_main]

use libfuzzer_sys::fuzz_target;
use twocenter::run::{from_csv, to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(out) = from_csv(text) else { return };
    let rendered = to_csv(&out);
    let again = from_csv(&rendered).expect("rendered CSV parses");
    assert_eq!(to_csv(&again), rendered);
});
