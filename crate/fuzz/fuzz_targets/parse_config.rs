#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for len in [0usize, 3, 12] {
            if let Ok(x) = multilayer::io::parse_config(text, len) {
                assert_eq!(x.len(), len);
                // Display and reparse agree.
                let again = multilayer::io::parse_config(&x.to_string(), len).unwrap();
                assert_eq!(x, again);
            }
        }
    }
});
