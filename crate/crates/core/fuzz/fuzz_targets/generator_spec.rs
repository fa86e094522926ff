#![no_main]

use john_core::GeneratorSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<GeneratorSpec>() {
        let again: GeneratorSpec = spec.to_string().parse().expect("canonical form parses");
        assert_eq!(again, spec);
    }
});
