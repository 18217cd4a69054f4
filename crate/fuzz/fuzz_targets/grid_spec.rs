#![no_main]

use libfuzzer_sys::fuzz_target;
use weakmeas_cli::grid::{GridSpec, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<GridSpec>() {
        let points = spec.points().expect("parsed grids expand");
        assert!(!points.is_empty() && points.len() <= MAX_GRID_POINTS);
        assert!(points.iter().all(|p| p.is_finite()));
    }
});
