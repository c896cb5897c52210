#![no_main]

use libfuzzer_sys::fuzz_target;

// `--seeds` accepts `7`, `1..20` or comma lists. Must never panic and never
// hand back an unbounded amount of seeds.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(seeds) = bubblesim::cli::parse_seed_list(text) {
        assert!(!seeds.is_empty());
        assert!(seeds.len() <= 100_000);
    }
});
