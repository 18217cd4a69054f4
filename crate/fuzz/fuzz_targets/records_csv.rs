#![no_main]

use libfuzzer_sys::fuzz_target;
use weakmeas_core::sampler::parse_records_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_records_csv(data) {
        assert!(rows.iter().all(|r| r.time.is_finite() && r.outcome.is_finite()));
    }
});
