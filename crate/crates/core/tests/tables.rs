use cliffcomm::commutant::{class_table, class_table_generic, table_total};

#[test]
fn fast_and_generic_tables_agree() {
    for k in 2..=6 {
        let a: Vec<u64> = class_table(k).unwrap().iter().map(|r| r.size).collect();
        let b: Vec<u64> = class_table_generic(k).unwrap().iter().map(|r| r.size).collect();
        assert_eq!(a, b, "k={k}");
    }
}

#[test]
fn k6_table() {
    let t = class_table(6).unwrap();
    let mut sizes: Vec<u64> = t.iter().map(|r| r.size).collect();
    sizes.sort();
    assert_eq!(sizes, vec![450, 720, 720, 2700]);
    assert_eq!(table_total(&t), 4590);
}
