#![no_main]

use libfuzzer_sys::fuzz_target;
use mft_core::io::{format_change_points, parse_change_points};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cps) = parse_change_points(text) {
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            parse_change_points(&format_change_points(&cps)).expect("re-parse"),
            cps
        );
    }
});
