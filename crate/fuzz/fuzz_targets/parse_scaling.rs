#![no_main]

use libfuzzer_sys::fuzz_target;
use multilayer::asymptotic::{check_regularity, poisson_lambda};
use multilayer::graph::BaseGraph;

fuzz_target!(|data: &[u8]| {
    let g = BaseGraph::path(3);
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = multilayer::io::parse_scaling(text, &g) {
            // Accepted scalings always admit rates and a regularity verdict.
            let _ = poisson_lambda(&spec, &g);
            let _ = check_regularity(&spec, &g);
        }
    }
});
