#![no_main]

use libfuzzer_sys::fuzz_target;

// `--values` accepts comma-separated floats. Must never panic; accepted
// values are finite and the list is non-empty.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = bubblesim::cli::parse_value_list(text) {
        assert!(!values.is_empty());
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
