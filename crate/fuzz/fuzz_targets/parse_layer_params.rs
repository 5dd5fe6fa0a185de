#![no_main]

use libfuzzer_sys::fuzz_target;
use multilayer::graph::BaseGraph;

fuzz_target!(|data: &[u8]| {
    let g = BaseGraph::path(3);
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(params) = multilayer::io::parse_layer_params(text, &g) {
            let _ = params.validate(&g);
        }
    }
});
