//! Fuzz the item-file parser and catalogue loader. Accepted catalogues
//! must come out with consistent dimensions and strictly ascending ids;
//! everything else must be a clean error, never a panic.

#![no_main]

use hqs::corpus::{load_catalogue, parse_items};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_items(text);
    let Ok(catalogue) = load_catalogue(text) else {
        return;
    };
    assert!(!catalogue.is_empty());
    let dim = catalogue.dim();
    for (_, vector) in catalogue.iter() {
        assert_eq!(vector.dim(), dim);
        // Components are validated finite; squares may still overflow,
        // but never to NaN.
        assert!(!vector.norm_squared().is_nan());
    }
    for pair in catalogue.ids().windows(2) {
        assert!(pair[0] < pair[1], "ranks must be strictly ascending");
    }
});
