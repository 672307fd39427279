#![no_main]

use cliffcomm::pauli::PauliTensor;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    for q in [2, 3] {
        if let Ok(t) = PauliTensor::parse(data, q) {
            let lit = t.literal();
            assert_eq!(PauliTensor::parse(&lit, q).unwrap(), t, "{lit}");
        }
    }
});
