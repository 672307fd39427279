#![no_main]

use cliffcomm::gf::FMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    for q in [2, 3, 5] {
        if let Ok(m) = FMatrix::parse(data, q) {
            let text = m.to_text();
            assert_eq!(FMatrix::parse(&text, q).unwrap().to_text(), text);
        }
    }
});
