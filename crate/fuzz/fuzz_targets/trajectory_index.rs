#![no_main]

use libfuzzer_sys::fuzz_target;

use q4nls_core::snapshot::parse_index;

fuzz_target!(|data: &[u8]| {
    if let Ok(index) = parse_index(data) {
        // A parsed index is sorted and every path stays under its directory.
        assert!(index.entries.windows(2).all(|w| w[0].time < w[1].time));
        for e in &index.entries {
            assert!(!e.path.starts_with('/') && !e.path.split('/').any(|c| c == ".."));
        }
    }
});
