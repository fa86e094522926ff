#![no_main]

use john_core::io::parse_matrix_market;
use john_core::{certify, leverage_scores, WeightVector};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = parse_matrix_market(text) else { return };
    if inst.rows() * inst.cols() > 1 << 16 {
        return;
    }
    let (m, n) = (inst.rows(), inst.cols());
    let w = WeightVector::uniform(m, n as f64 / m as f64);
    if let Ok(sigma) = leverage_scores(&inst, &w) {
        assert_eq!(sigma.len(), m);
        let _ = certify(&inst, &w, 0.5);
    }
});
