#![no_main]

use libfuzzer_sys::fuzz_target;
use lrmg::graph::laplacian;
use lrmg::io::{read_graph, write_graph};
use lrmg::LaplacianKind;

fuzz_target!(|data: &[u8]| {
    let Ok(g) = read_graph(data) else { return };
    let mut buf = Vec::new();
    write_graph(&mut buf, &g).expect("writing to memory");
    assert_eq!(read_graph(buf.as_slice()).expect("own output parses"), g);
    if g.num_vertices() <= 512 {
        for kind in [LaplacianKind::Normalized, LaplacianKind::Unnormalized] {
            let l = laplacian(&g, kind);
            assert_eq!(l.size(), g.num_vertices());
        }
    }
});
