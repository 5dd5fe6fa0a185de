#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = multilayer::io::parse_graph(text) {
            // Accepted graphs must uphold the structural invariants.
            let _ = g.is_connected();
            for l in 0..g.num_links() {
                let (u, v) = g.link(l);
                assert_ne!(u, v);
                assert_eq!(g.link_between(u, v), Some(l));
            }
        }
    }
});
