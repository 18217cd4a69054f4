#![no_main]

use libfuzzer_sys::fuzz_target;
use weakmeas_cli::config::RawConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RawConfig::parse(text) {
        // every accepted key is a lowercase identifier with a non-empty value
        for k in cfg.keys() {
            assert!(k.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_'));
            assert!(!cfg.get(k).unwrap().is_empty());
        }
    }
});
