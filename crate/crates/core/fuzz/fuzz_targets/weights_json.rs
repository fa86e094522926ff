#![no_main]

use john_core::io::{parse_weights, weights_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = parse_weights(text) {
        assert!(w.iter().all(|x| x.is_finite() && *x >= 0.0));
        let again = parse_weights(&weights_json(&w)).expect("serialized weights parse");
        assert_eq!(again.as_slice(), w.as_slice());
    }
});
