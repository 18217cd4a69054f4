#![no_main]

use libfuzzer_sys::fuzz_target;
use weakmeas_cli::config::{parse_override, RawConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((k, v)) = parse_override(text) {
        // an accepted override also parses as a one-line config file
        let cfg = RawConfig::parse(&format!("{k} = {v}")).expect("override round-trips");
        assert_eq!(cfg.get(&k), Some(v.as_str()));
    }
});
