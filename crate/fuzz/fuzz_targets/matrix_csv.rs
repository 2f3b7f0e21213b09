#![no_main]

use libfuzzer_sys::fuzz_target;
use lrmg::io::{read_matrix_csv, write_matrix_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(m) = read_matrix_csv(data) else { return };
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &m).expect("writing to memory");
    let back = read_matrix_csv(buf.as_slice()).expect("own output parses");
    assert_eq!(back.shape(), m.shape());
    for (a, b) in back.iter().zip(m.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
});
