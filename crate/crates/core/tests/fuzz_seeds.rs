//! Replays the checked-in fuzz corpus through the same round trips the
//! fuzz targets assert.

use std::fs;
use std::path::PathBuf;

use cliffcomm::commutant::CommClass;
use cliffcomm::dense::DenseOperator;
use cliffcomm::gf::FMatrix;
use cliffcomm::monomial::Monomial;
use cliffcomm::pauli::PauliTensor;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn fmatrix_text() {
    let mut ok = 0;
    for (_, s) in seeds("fmatrix_text") {
        for q in [2, 3, 5] {
            if let Ok(m) = FMatrix::parse(&s, q) {
                ok += 1;
                let text = m.to_text();
                assert_eq!(FMatrix::parse(&text, q).unwrap().to_text(), text);
            }
        }
    }
    assert!(ok > 0);
    assert!(FMatrix::parse("10/1", 2).is_err());
}

#[test]
fn pauli_literal() {
    for (name, s) in seeds("pauli_literal") {
        let parsed: Vec<_> = [2, 3].iter().filter_map(|&q| PauliTensor::parse(&s, q).ok().map(|t| (q, t))).collect();
        assert_eq!(parsed.is_empty(), name == "empty_copy", "{name}");
        for (q, t) in parsed {
            assert_eq!(PauliTensor::parse(&t.literal(), q).unwrap(), t);
        }
    }
}

#[test]
fn monomial_json() {
    for (name, s) in seeds("monomial_json") {
        match Monomial::parse(&s) {
            Ok(m) => {
                assert_eq!(Monomial::parse(&m.to_json().to_string()).unwrap().to_json(), m.to_json());
                let _ = m.reduce();
            }
            Err(_) => assert_eq!(name, "bad_pair"),
        }
    }
}

#[test]
fn class_json() {
    for (name, s) in seeds("class_json") {
        match CommClass::parse(&s) {
            Ok(c) => assert_eq!(CommClass::parse(&c.to_json().to_string()).unwrap().to_json(), c.to_json()),
            Err(_) => assert_eq!(name, "odd"),
        }
    }
}

#[test]
fn matrix_json() {
    for (name, s) in seeds("matrix_json") {
        match DenseOperator::parse(&s) {
            Ok(op) => assert_eq!(DenseOperator::parse(&op.to_json().to_string()).unwrap().to_json(), op.to_json()),
            Err(_) => assert_eq!(name, "not_power"),
        }
    }
}
