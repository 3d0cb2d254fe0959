//! Format detection plus the report built from whatever parses.

#![no_main]

use libfuzzer_sys::fuzz_target;
use twocenter::report::{render_json, render_text, report};
use twocenter::run::parse_output;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(out) = parse_output(text) else { return };
    if let Ok(rep) = report(&[out]) {
        let _ = render_text(&rep);
        let _ = render_json(&rep);
    }
});
