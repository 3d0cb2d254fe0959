//! Fixture files: parsing never panics, and anything accepted survives a
//! render and re-parse. Grid errors are written with four significant
//! digits, so they are compared loosely.

#![no_main]

use libfuzzer_sys::fuzz_target;
use twocenter::fixtures::{parse, render};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(first) = parse(text) else { return };
    let again = parse(&render(&first, "fuzz")).expect("rendered fixtures parse");
    assert_eq!(first.len(), again.len());
    for (a, b) in first.iter().zip(&again) {
        assert_eq!((a.z, a.omega, a.r, a.m, a.index, a.energy), (b.z, b.omega, b.r, b.m, b.index, b.energy));
        assert!((a.grid_error - b.grid_error).abs() <= 1e-3 * a.grid_error);
    }
});
