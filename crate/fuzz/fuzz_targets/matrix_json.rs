#![no_main]

use cliffcomm::dense::DenseOperator;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(op) = DenseOperator::parse(data) {
        let back = DenseOperator::parse(&op.to_json().to_string()).unwrap();
        assert_eq!(back.to_json(), op.to_json());
    }
});
