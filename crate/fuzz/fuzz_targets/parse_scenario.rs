#![no_main]

use libfuzzer_sys::fuzz_target;

// The scenario-file parser must never panic; malformed input is reported as
// an error. Anything it accepts must survive the canonical
// serialize -> reparse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = bubblesim::config::parse_str(text) {
        let canonical = bubblesim::config::to_config_string(&config);
        let reparsed = bubblesim::config::parse_str(&canonical)
            .expect("canonical serialization must reparse");
        assert_eq!(reparsed, config, "round trip changed the configuration");
    }
});
