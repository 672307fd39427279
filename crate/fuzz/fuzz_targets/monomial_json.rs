#![no_main]

use cliffcomm::monomial::Monomial;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(m) = Monomial::parse(data) {
        let back = Monomial::parse(&m.to_json().to_string()).unwrap();
        assert_eq!(back.to_json(), m.to_json());
        // reduction must not panic on anything that parses
        let _ = m.reduce();
    }
});
