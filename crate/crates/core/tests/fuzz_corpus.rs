//! The fuzz corpus seeds double as decoder regression inputs.

use std::fs;
use std::path::PathBuf;

use q4nls_core::snapshot::{decode_field, encode_field, parse_index};

fn corpus(target: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target)
}

fn read(target: &str, name: &str) -> Vec<u8> {
    fs::read(corpus(target).join(name)).unwrap()
}

#[test]
fn snapshot_seeds() {
    for name in ["line4.q4nl", "square4_spectral.q4nl"] {
        let bytes = read("snapshot_decode", name);
        let f = decode_field(&bytes).unwrap();
        assert_eq!(encode_field(&f), bytes);
    }
    // Header promises 64 values, body has none.
    assert!(decode_field(&read("snapshot_decode", "header_only.q4nl")).is_err());
    let mut bytes = read("snapshot_decode", "line4.q4nl");
    bytes.pop();
    assert!(decode_field(&bytes).is_err());
    assert!(decode_field(&bytes[..10]).is_err());
}

#[test]
fn index_seeds() {
    let idx = parse_index(&read("trajectory_index", "two.json")).unwrap();
    assert_eq!(idx.times(), vec![0.0, 0.5]);
    assert!(parse_index(&read("trajectory_index", "escape.json")).is_err());
    assert!(parse_index(&read("trajectory_index", "unsorted.json")).is_err());
}
