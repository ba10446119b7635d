#![no_main]

use libfuzzer_sys::fuzz_target;

use q4nls_cli::{Resolved, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(raw) = RunConfig::parse(text) else {
        return;
    };
    // Validation builds the initial data, so keep grids small enough to stay fast.
    let small = match (raw.dimension, raw.points_per_axis) {
        (Some(d), Some(n)) => d <= 3 && n <= 64,
        _ => true,
    };
    if small {
        let _ = Resolved::new(raw);
    }
});
