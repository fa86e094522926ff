#![no_main]

use john_core::io::{parse_matrix_market, to_matrix_market};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = parse_matrix_market(text) {
        let again = parse_matrix_market(&to_matrix_market(&inst)).expect("writer output parses");
        assert_eq!((again.rows(), again.cols()), (inst.rows(), inst.cols()));
        assert_eq!(again.to_dense(), inst.to_dense());
    }
});
