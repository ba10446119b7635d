#![no_main]

use libfuzzer_sys::fuzz_target;

use q4nls_core::snapshot::{decode_field, encode_field};

fuzz_target!(|data: &[u8]| {
    // Anything that decodes must re-encode to the same bytes.
    if let Ok(field) = decode_field(data) {
        assert_eq!(encode_field(&field), data);
    }
});
