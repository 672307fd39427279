#![no_main]

use cliffcomm::commutant::CommClass;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(c) = CommClass::parse(data) {
        let back = CommClass::parse(&c.to_json().to_string()).unwrap();
        assert_eq!(back.to_json(), c.to_json());
    }
});
